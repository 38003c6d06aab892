import csv
import itertools
import math
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, tag

from blockfit.fitting import theta_mle
from graphons.entropy import binary_entropy, graphon_entropy
from graphons.exceptions import DegenerateInputError, DomainError
from graphons.specs import GraphonSpec, make_f1, make_f2
from sampler.graphs import Graph, LatentVector, pair_count
from sampler.sampling import derive_seed, sample_graph, sample_latents

from .blockmodel import blockmodel_variance, entropy_blockmodel, entropy_blockmodel_given_labels
from .estimates import (
    DegreeData, compute_g_hat, entropy_constant, entropy_separable, estimate_rho,
    rescaled_g_hat, separable_variance,
)
from .lowrank import entropy_lowrank, usvt
from .models import EstimateRecord
from .registry import EstimatorOptions, apply_estimator

LOG2 = math.log(2.0)
PATH3 = Graph.from_edges(3, [(0, 1), (1, 2)])


def circulant(n, half_degree):
    """d-regular ring lattice with d = 2 * half_degree."""
    edges = [(i, (i + step) % n) for i in range(n) for step in range(1, half_degree + 1)]
    return Graph.from_edges(n, edges)


def two_cliques(size=5):
    edges = list(itertools.combinations(range(size), 2))
    edges += [(i + size, j + size) for i, j in edges]
    return Graph.from_edges(2 * size, edges)


def random_graph(n, p, seed):
    rng = np.random.default_rng(seed)
    return Graph.from_upper(n, rng.random(pair_count(n)) < p)


class ConstantEstimatorTests(SimpleTestCase):
    def test_estimate_rho(self):
        self.assertEqual(estimate_rho(Graph.empty(6)), 0.0)
        self.assertEqual(estimate_rho(Graph.complete(6)), 1.0)
        self.assertEqual(estimate_rho(Graph.from_edges(3, [(0, 2)])), 1 / 3)
        with self.assertRaises(DomainError):
            estimate_rho(Graph.empty(1))

    def test_half_density(self):
        graph = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
        self.assertAlmostEqual(entropy_constant(graph).value, LOG2, places=15)

    def test_empty_graph(self):
        estimate = entropy_constant(Graph.empty(10))
        self.assertEqual((estimate.value, estimate.variance), (0.0, 0.0))

    def test_one_third(self):
        estimate = entropy_constant(Graph.from_edges(3, [(0, 1)]))
        self.assertAlmostEqual(estimate.value, 0.636514, delta=1e-6)
        expected = math.log(2.0) ** 2 * (1 / 3) * (2 / 3) / 3
        self.assertAlmostEqual(estimate.variance, expected, places=15)

    def test_bits(self):
        estimate = entropy_constant(Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)]))
        self.assertAlmostEqual(estimate.in_bits(), 1.0, places=14)


class SeparableEstimatorTests(SimpleTestCase):
    def test_path_configuration_probabilities(self):
        data = compute_g_hat(PATH3)
        rho_hat = estimate_rho(PATH3)
        probabilities = rho_hat * np.outer(data.g_hat, data.g_hat)
        self.assertAlmostEqual(probabilities[0, 1], 0.5, places=15)
        self.assertAlmostEqual(probabilities[1, 2], 0.5, places=15)
        self.assertAlmostEqual(probabilities[0, 2], 0.25, places=15)
        self.assertEqual(data.d_norm1, 4)

    def test_path_paper_normalization(self):
        np.testing.assert_allclose(compute_g_hat(PATH3, 'paper').g_hat, [2.0, 4.0, 2.0])

    def test_regular_graph_has_equal_g_hat(self):
        g_hat = compute_g_hat(circulant(30, 3)).g_hat
        self.assertTrue(np.all(g_hat == g_hat[0]))

    def test_empty_graph_is_degenerate(self):
        with self.assertRaises(DegenerateInputError):
            compute_g_hat(Graph.empty(5))
        with self.assertRaises(DegenerateInputError):
            entropy_separable(Graph.empty(5))

    def test_path_value(self):
        # mean of h(1/2), h(1/4), h(1/2); the configuration probabilities above
        expected = (2 * binary_entropy(0.5) + binary_entropy(0.25)) / 3
        value = entropy_separable(PATH3).value
        self.assertAlmostEqual(value, expected, places=14)
        self.assertAlmostEqual(value, 0.649543, delta=1e-6)

    def test_regular_graph_close_to_constant(self):
        graph = circulant(100, 5)
        separable = entropy_separable(graph).value
        self.assertAlmostEqual(separable, binary_entropy(10 / 100), places=12)
        self.assertLess(abs(separable - entropy_constant(graph).value), 1e-2)

    def test_complete_graph(self):
        # every fitted probability is d_i d_j / |d|_1 = (n - 1) / n
        self.assertAlmostEqual(entropy_separable(Graph.complete(12)).value, binary_entropy(11 / 12), places=13)

    def test_variance_zero_without_edges_or_spread(self):
        data = DegreeData(np.zeros(5, dtype=np.int64), 0, np.zeros(5), 'configuration')
        self.assertEqual(separable_variance(data, 0.0, 5), 0.0)
        self.assertAlmostEqual(entropy_separable(circulant(40, 4)).variance, 0.0, places=12)

    def test_variance_decays_like_one_over_n(self):
        pattern = np.linspace(0.5, 1.5, 200)
        small = DegreeData(np.ones(200, dtype=np.int64), 200, pattern, 'configuration')
        large = DegreeData(np.ones(400, dtype=np.int64), 400, np.tile(pattern, 2), 'configuration')
        ratio = separable_variance(large, 0.3, 400) / separable_variance(small, 0.3, 200)
        self.assertGreater(ratio, 0.45)
        self.assertLess(ratio, 0.55)

    def test_paper_normalization_runs(self):
        estimate = entropy_separable(random_graph(60, 0.05, 3), normalization='paper')
        self.assertGreaterEqual(estimate.value, 0.0)
        self.assertLessEqual(estimate.value, LOG2)
        with self.assertRaises(DomainError):
            compute_g_hat(PATH3, 'other')


class BlockmodelEstimatorTests(SimpleTestCase):
    def test_single_block_equals_constant(self):
        graph = random_graph(50, 0.3, 21)
        block, fit = entropy_blockmodel(graph, k=1)
        constant = entropy_constant(graph)
        self.assertEqual(block.value, constant.value)
        self.assertAlmostEqual(block.variance, constant.variance, places=15)
        self.assertEqual(fit.k, 1)

    def test_two_cliques(self):
        estimate, fit = entropy_blockmodel(two_cliques(), k=2, restarts=5, seed=1)
        np.testing.assert_array_equal(fit.theta_hat, np.eye(2))
        self.assertEqual(estimate.value, 0.0)
        self.assertEqual(estimate.variance, 0.0)

    def test_half_blocks_have_zero_variance(self):
        edges = [(0, 1), (0, 2), (0, 3), (4, 5), (4, 6), (4, 7)]
        edges += [(i, i + 4) for i in range(4)] + [(i, (i + 1) % 4 + 4) for i in range(4)]
        fit = theta_mle(Graph.from_edges(8, edges), [0, 0, 0, 0, 1, 1, 1, 1])
        np.testing.assert_array_equal(fit.theta_hat, np.full((2, 2), 0.5))
        self.assertEqual(blockmodel_variance(fit, 8), 0.0)

    def test_single_node(self):
        estimate, fit = entropy_blockmodel(Graph.empty(1))
        self.assertEqual(fit.k, 1)
        self.assertEqual(estimate.value, 0.0)
        self.assertEqual(estimate.variance, 0.0)
        self.assertEqual(estimate.rho_hat, 0.0)

    def test_k_larger_than_n(self):
        with self.assertRaises(DomainError):
            entropy_blockmodel(Graph.complete(4), k=5)

    def test_saturated_fit_is_flagged(self):
        estimate, _ = entropy_blockmodel(random_graph(6, 0.5, 2), k=6)
        self.assertTrue(estimate.degenerate)
        self.assertEqual(estimate.value, 0.0)

    def test_default_k(self):
        _, fit = entropy_blockmodel(random_graph(49, 0.2, 5))
        self.assertEqual(fit.k, 7)

    @tag('slow')
    def test_planted_partition_near_truth(self):
        spec = GraphonSpec.block_constant([[0.8, 0.1], [0.1, 0.8]], [0.5, 0.5])
        labels = np.repeat([0, 1], 200)
        xi = np.where(labels == 0, 0.25, 0.75)
        truth = 0.5 * binary_entropy(0.8) + 0.5 * binary_entropy(0.1)
        self.assertAlmostEqual(truth, 0.412776, delta=1e-6)
        values = []
        for trial in range(30):
            graph = sample_graph(spec, LatentVector(xi), derive_seed(5, trial))
            estimate, _ = entropy_blockmodel(graph, k=2, restarts=2, seed=trial)
            values.append(estimate.value)
        standard_error = np.std(values, ddof=1) / math.sqrt(len(values))
        self.assertLess(abs(np.mean(values) - truth), 3 * standard_error + 1e-3)


class LowRankEstimatorTests(SimpleTestCase):
    def test_empty_graph(self):
        np.testing.assert_array_equal(usvt(Graph.empty(9)), np.zeros((9, 9)))
        self.assertEqual(entropy_lowrank(Graph.empty(9)).value, 0.0)

    def test_complete_graph(self):
        n = 20
        estimate = usvt(Graph.complete(n))
        off_diagonal = ~np.eye(n, dtype=bool)
        np.testing.assert_allclose(estimate[off_diagonal], (n - 1) / n, atol=1e-8)
        np.testing.assert_array_equal(np.diag(estimate), np.zeros(n))

    def test_output_is_symmetric_probability_matrix(self):
        estimate = usvt(random_graph(80, 0.3, 17))
        self.assertTrue(np.all((estimate >= 0.0) & (estimate <= 1.0)))
        np.testing.assert_array_equal(estimate, estimate.T)

    def test_argument_checks(self):
        with self.assertRaises(DomainError):
            usvt(Graph.empty(1))
        with self.assertRaises(DomainError):
            usvt(Graph.complete(5), eta=1.5)

    def test_no_variance(self):
        self.assertIsNone(entropy_lowrank(random_graph(40, 0.4, 1)).variance)

    @tag('slow')
    def test_rank_two_graphon(self):
        lattice = np.linspace(0.0, 1.0, 257)
        spec = GraphonSpec.low_rank([0.5, 0.5], [2.0 * lattice, 2.0 * (1.0 - lattice)], rho_n=0.25)
        graph = sample_graph(spec, sample_latents(800, 31), 32)
        self.assertLess(abs(entropy_lowrank(graph).value - graphon_entropy(spec)), 0.02)


class EstimatorInvarianceTests(SimpleTestCase):
    def setUp(self):
        spec = make_f1(grid_points=65)
        self.graph = sample_graph(spec, sample_latents(120, 4), 5)
        self.order = np.random.default_rng(9).permutation(120)
        self.permuted = self.graph.permuted(self.order)

    def test_constant_and_separable_are_exact(self):
        self.assertEqual(entropy_constant(self.graph).value, entropy_constant(self.permuted).value)
        self.assertEqual(entropy_separable(self.graph).value, entropy_separable(self.permuted).value)

    def test_blockmodel_with_permuted_labels(self):
        _, fit = entropy_blockmodel(self.graph, k=4, seed=3)
        original, _ = entropy_blockmodel_given_labels(self.graph, fit.labels, 4)
        permuted, _ = entropy_blockmodel_given_labels(self.permuted, fit.labels[self.order], 4)
        self.assertEqual(original.value, permuted.value)

    def test_lowrank(self):
        self.assertAlmostEqual(entropy_lowrank(self.graph).value, entropy_lowrank(self.permuted).value,
                               delta=1e-6)

    def test_bounds(self):
        for estimator_id in ('H1', 'H2', 'H3', 'H4'):
            value = apply_estimator(estimator_id, self.graph).value
            self.assertGreaterEqual(value, 0.0)
            self.assertLessEqual(value, LOG2)

    def test_shared_n_and_density(self):
        estimates = [apply_estimator(e, self.graph, EstimatorOptions(k=3)) for e in ('h1', 'h2', 'h3', 'h4')]
        self.assertEqual({e.n for e in estimates}, {120})
        self.assertEqual(len({e.rho_hat for e in estimates}), 1)

    def test_unknown_estimator(self):
        with self.assertRaises(DomainError):
            apply_estimator('H5', self.graph)


@tag('slow')
class ConsistencyDecayTests(SimpleTestCase):
    n_values = (200, 400, 800)
    trials = 50

    def test_g_hat_error_decreases(self):
        spec = make_f1(rho_n=0.25)
        errors = []
        for n in self.n_values:
            per_trial = []
            for trial in range(self.trials):
                latents = sample_latents(n, derive_seed(1, trial, n))
                graph = sample_graph(spec, latents, derive_seed(2, trial, n))
                g_hat = rescaled_g_hat(compute_g_hat(graph), 1.0)
                per_trial.append(np.mean(np.abs(g_hat - 2.0 * latents.xi)))
            errors.append(np.mean(per_trial))
        self.assertTrue(all(b < a for a, b in zip(errors, errors[1:])), errors)

    def assert_blockmodel_error_decreases(self, spec):
        truth = graphon_entropy(spec)
        medians = []
        for n in self.n_values:
            deviations = []
            for trial in range(self.trials):
                graph = sample_graph(spec, sample_latents(n, derive_seed(3, trial, n)), derive_seed(4, trial, n))
                estimate, _ = entropy_blockmodel(graph, seed=trial)
                deviations.append(abs(estimate.value - truth))
            medians.append(np.median(deviations))
        self.assertTrue(all(b < a for a, b in zip(medians, medians[1:])), medians)

    def test_blockmodel_error_decreases(self):
        self.assert_blockmodel_error_decreases(make_f1(rho_n=0.25))

    def test_blockmodel_error_decreases_without_separability(self):
        self.assert_blockmodel_error_decreases(make_f2(0.25, 0.15, 3.0))


class EstimateCommandTests(TestCase):
    def run_estimate(self, graph, *args):
        tmp = tempfile.mkdtemp()
        path = graph.write_edge_list(Path(tmp) / 'input.edges')
        stdout = StringIO()
        call_command('estimate', '--input', str(path), '--out', tmp, *args, stdout=stdout, stderr=StringIO())
        with (Path(tmp) / 'estimates.csv').open() as handle:
            return list(csv.DictReader(handle)), stdout.getvalue()

    def test_empty_graph_h1(self):
        rows, _ = self.run_estimate(Graph.empty(10), '--estimators', 'h1')
        self.assertEqual(len(rows), 1)
        self.assertEqual(float(rows[0]['value']), 0.0)

    def test_all_four_estimators(self):
        rows, output = self.run_estimate(random_graph(60, 0.3, 8), '--estimators', 'h1,h2,h3,h4', '--bits')
        self.assertEqual([row['estimator'] for row in rows], ['H1', 'H2', 'H3', 'H4'])
        self.assertEqual({row['n'] for row in rows}, {'60'})
        self.assertEqual(len({row['rho_hat'] for row in rows}), 1)
        self.assertEqual(rows[3]['variance'], '')
        self.assertIn('bits', output)
        self.assertEqual(EstimateRecord.objects.count(), 4)

    def test_single_block_matches_h1(self):
        rows, _ = self.run_estimate(random_graph(40, 0.2, 9), '--estimators', 'h1,h3', '--k', '1')
        self.assertEqual(rows[0]['value'], rows[1]['value'])

    def test_degenerate_estimator_fails_after_writing(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_estimate(Graph.empty(10), '--estimators', 'h1,h2')
        self.assertEqual(ctx.exception.returncode, 1)

    def test_k_above_n_is_invalid(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_estimate(Graph.complete(5), '--estimators', 'h3', '--k', '9')
        self.assertEqual(ctx.exception.returncode, 2)

    def test_help_lists_flags(self):
        from estimators.management.commands.estimate import Command
        help_text = Command().create_parser('manage.py', 'estimate').format_help()
        for flag in ('--input', '--estimators', '--k', '--eta', '--ghat-norm', '--out', '--bits'):
            self.assertIn(flag, help_text)
