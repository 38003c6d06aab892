import csv
import itertools
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from scipy.special import xlogy

from graphons.entropy import block_entropy
from graphons.exceptions import DomainError
from sampler.graphs import Graph, pair_count

from .fitting import default_k, fit_labels, theta_mle


def two_cliques(size=5):
    edges = [(i, j) for i, j in itertools.combinations(range(size), 2)]
    edges += [(i + size, j + size) for i, j in edges]
    return Graph.from_edges(2 * size, edges)


def grid_argmax(edges, pairs, lattice):
    """Brute-force likelihood maximiser over a 3-d lattice of (t11, t12, t22)."""
    terms = [xlogy(e, lattice) + xlogy(p - e, 1.0 - lattice) for e, p in zip(edges, pairs)]
    total = terms[0][:, None, None] + terms[1][None, :, None] + terms[2][None, None, :]
    index = np.unravel_index(np.argmax(total), total.shape)
    return np.array([lattice[i] for i in index])


class ThetaMleTests(SimpleTestCase):
    def test_direct_counting(self):
        graph = Graph.from_edges(4, [(0, 1), (0, 2)])
        fit = theta_mle(graph, [0, 0, 1, 1])
        self.assertEqual(fit.theta_hat[0, 0], 1.0)
        self.assertEqual(fit.theta_hat[0, 1], 0.25)
        self.assertEqual(fit.theta_hat[1, 0], 0.25)
        self.assertEqual(fit.theta_hat[1, 1], 0.0)
        np.testing.assert_array_equal(fit.pair_counts, [[1, 4], [4, 1]])

    def test_complete_graph(self):
        fit = theta_mle(Graph.complete(9), [0, 1, 2, 0, 1, 2, 0, 1, 2])
        np.testing.assert_array_equal(fit.theta_hat, np.ones((3, 3)))
        self.assertEqual(fit.log_likelihood, 0.0)

    def test_empty_block(self):
        with self.assertRaises(DomainError):
            theta_mle(Graph.complete(4), [0, 0, 2, 2])

    def test_matches_likelihood_grid(self):
        rng = np.random.default_rng(6)
        lattice = np.linspace(0.0, 1.0, 201)
        for _ in range(20):
            graph = Graph.from_upper(6, rng.random(pair_count(6)) < rng.uniform(0.2, 0.8))
            labels = rng.permutation([0, 0, 0, 1, 1, 1])
            fit = theta_mle(graph, labels)
            edges = [fit.edge_counts[0, 0], fit.edge_counts[0, 1], fit.edge_counts[1, 1]]
            pairs = [fit.pair_counts[0, 0], fit.pair_counts[0, 1], fit.pair_counts[1, 1]]
            best = grid_argmax(edges, pairs, lattice)
            estimate = np.array([fit.theta_hat[0, 0], fit.theta_hat[0, 1], fit.theta_hat[1, 1]])
            np.testing.assert_allclose(estimate, best, atol=1 / 200)

    def test_perturbation_lowers_likelihood(self):
        rng = np.random.default_rng(8)
        graph = Graph.from_upper(30, rng.random(pair_count(30)) < 0.4)
        fit = theta_mle(graph, np.repeat([0, 1, 2], 10))
        edges, pairs = fit.edge_counts, fit.pair_counts

        def likelihood(theta):
            terms = xlogy(edges, theta) + xlogy(pairs - edges, 1.0 - theta)
            return terms[np.triu_indices(3)].sum()

        base = likelihood(fit.theta_hat)
        self.assertAlmostEqual(base, fit.log_likelihood, places=9)
        for a, b in itertools.combinations_with_replacement(range(3), 2):
            if not 0.0 < fit.theta_hat[a, b] < 1.0:
                continue
            for step in (-1e-3, 1e-3):
                theta = fit.theta_hat.copy()
                theta[a, b] += step
                theta[b, a] = theta[a, b]
                self.assertLess(likelihood(theta), base)


class FitLabelsTests(SimpleTestCase):
    def test_two_cliques_recovered(self):
        graph = two_cliques()
        fit = fit_labels(graph, 2, restarts=5, seed=1)
        planted = np.repeat([0, 1], 5)
        self.assertTrue(np.array_equal(fit.labels, planted) or np.array_equal(fit.labels, 1 - planted))
        self.assertEqual(fit.log_likelihood, 0.0)
        np.testing.assert_array_equal(fit.theta_hat, np.eye(2))
        self.assertTrue(fit.converged)

    def test_two_cliques_partition_is_exhaustive_optimum(self):
        graph = two_cliques()
        best = max(
            theta_mle(graph, [int(bit) for bit in format(mask, '010b')]).log_likelihood
            for mask in range(1, 2 ** 10 - 1)
        )
        self.assertEqual(best, fit_labels(graph, 2, restarts=5, seed=1).log_likelihood)

    def test_single_block_is_density(self):
        rng = np.random.default_rng(2)
        graph = Graph.from_upper(40, rng.random(pair_count(40)) < 0.3)
        fit = fit_labels(graph, 1)
        self.assertAlmostEqual(fit.theta_hat[0, 0], graph.edge_count / pair_count(40), places=15)

    def test_saturated_model(self):
        rng = np.random.default_rng(4)
        graph = Graph.from_upper(8, rng.random(pair_count(8)) < 0.5)
        fit = fit_labels(graph, 8)
        self.assertTrue(fit.degenerate)
        off_diagonal = ~np.eye(8, dtype=bool)
        relabelled = fit.theta_hat[np.ix_(fit.labels, fit.labels)]
        np.testing.assert_array_equal(relabelled[off_diagonal], graph.adjacency[off_diagonal])
        self.assertEqual(block_entropy(fit.theta_hat, fit.block_sizes, 8), 0.0)

    def test_ascent_never_lowers_likelihood(self):
        rng = np.random.default_rng(12)
        probabilities = np.where(np.add.outer(np.arange(60) < 30, np.arange(60) < 30) == 1, 0.1, 0.6)
        upper = probabilities[np.triu_indices(60, 1)]
        graph = Graph.from_upper(60, rng.random(upper.size) < upper)
        start = fit_labels(graph, 3, seed=9, max_sweeps=0)
        fitted = fit_labels(graph, 3, seed=9)
        self.assertGreaterEqual(fitted.log_likelihood, start.log_likelihood)
        self.assertFalse(start.converged)

    def test_same_seed_same_fit(self):
        rng = np.random.default_rng(13)
        graph = Graph.from_upper(50, rng.random(pair_count(50)) < 0.2)
        first = fit_labels(graph, 4, restarts=2, seed=3)
        second = fit_labels(graph, 4, restarts=2, seed=3)
        np.testing.assert_array_equal(first.labels, second.labels)
        self.assertEqual(first.log_likelihood, second.log_likelihood)

    def test_block_relabelling_leaves_likelihood(self):
        rng = np.random.default_rng(14)
        graph = Graph.from_upper(40, rng.random(pair_count(40)) < 0.35)
        fit = fit_labels(graph, 4, seed=2)
        renamed = theta_mle(graph, np.array([2, 0, 3, 1])[fit.labels])
        self.assertEqual(renamed.log_likelihood, fit.log_likelihood)
        self.assertEqual(block_entropy(renamed.theta_hat, renamed.block_sizes, 40),
                         block_entropy(fit.theta_hat, fit.block_sizes, 40))

    def test_k_larger_than_n(self):
        with self.assertRaises(DomainError):
            fit_labels(Graph.complete(3), 4)

    def test_writers(self):
        fit = fit_labels(two_cliques(), 2, restarts=3, seed=1)
        with tempfile.TemporaryDirectory() as tmp:
            with fit.write_labels_csv(Path(tmp) / 'labels.csv').open() as handle:
                rows = list(csv.DictReader(handle))
            theta = np.loadtxt(fit.write_theta(Path(tmp) / 'theta.txt'))
        self.assertEqual(len(rows), 10)
        self.assertEqual({row['label'] for row in rows}, {'1', '2'})
        np.testing.assert_array_equal(theta, fit.theta_hat)


class DefaultKTests(SimpleTestCase):
    def test_values(self):
        self.assertEqual(default_k(1), 1)
        self.assertEqual(default_k(100), 10)
        self.assertEqual(default_k(600), 24)

    def test_monotone(self):
        values = [default_k(n) for n in range(1, 2000)]
        self.assertTrue(all(b >= a for a, b in zip(values, values[1:])))
