import math
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from graphons.exceptions import DomainError
from graphons.specs import GraphonSpec, make_f1

from .graphs import Graph, LatentVector, pair_count
from .sampling import derive_seed, rho_schedule, sample_graph, sample_latents


class GraphStorageTests(SimpleTestCase):
    def setUp(self):
        self.path = Graph.from_edges(3, [(0, 1), (1, 2)])

    def test_adjacency_is_symmetric_and_hollow(self):
        matrix = self.path.adjacency
        np.testing.assert_array_equal(matrix, matrix.T)
        self.assertTrue(np.all(np.diag(matrix) == 0))
        np.testing.assert_array_equal(self.path.degrees, [1, 2, 1])

    def test_duplicate_edges_collapse(self):
        graph = Graph.from_edges(3, [(0, 1), (1, 0), (0, 1)])
        self.assertEqual(graph.edge_count, 1)

    def test_self_loop_rejected(self):
        with self.assertRaises(DomainError):
            Graph.from_edges(3, [(1, 1)])

    def test_complete_graph_counts(self):
        graph = Graph.complete(7)
        self.assertEqual(graph.edge_count, pair_count(7))
        np.testing.assert_array_equal(graph.degrees, np.full(7, 6))

    def test_permuted_preserves_degree_multiset(self):
        rng = np.random.default_rng(11)
        graph = Graph.from_upper(12, rng.random(pair_count(12)) < 0.4)
        order = rng.permutation(12)
        permuted = graph.permuted(order)
        np.testing.assert_array_equal(permuted.degrees, graph.degrees[order])
        self.assertEqual(permuted.edge_count, graph.edge_count)

    def test_subgraph(self):
        graph = Graph.complete(5).subgraph([0, 2, 4])
        self.assertEqual(graph.n, 3)
        self.assertEqual(graph.edge_count, 3)

    def test_edge_list_file(self):
        graph = Graph.from_edges(6, [(0, 5), (2, 3)])
        with tempfile.TemporaryDirectory() as tmp:
            path = graph.write_edge_list(Path(tmp) / 'g.edges')
            self.assertEqual(path.read_text().splitlines()[1:], ['0 5', '2 3'])
            again = Graph.read_edge_list(path)
        self.assertEqual(again.n, 6)
        np.testing.assert_array_equal(again.adjacency, graph.adjacency)


class LatentTests(SimpleTestCase):
    def test_same_seed_same_latents(self):
        np.testing.assert_array_equal(sample_latents(50, 3).xi, sample_latents(50, 3).xi)

    def test_mean_of_many_latents(self):
        xi = sample_latents(10_000, 42).xi
        self.assertTrue(np.all((xi > 0.0) & (xi < 1.0)))
        self.assertLess(abs(xi.mean() - 0.5), 3 / math.sqrt(12 * 10_000))

    def test_zero_nodes(self):
        with self.assertRaises(DomainError):
            sample_latents(0, 1)

    def test_latent_vector_bounds(self):
        with self.assertRaises(DomainError):
            LatentVector([0.2, 1.0])


class SampleGraphTests(SimpleTestCase):
    def test_zero_and_one_probabilities(self):
        latents = sample_latents(30, 1)
        empty = GraphonSpec.block_constant([[0.0]], [1.0])
        self.assertEqual(sample_graph(empty, latents, 2).edge_count, 0)
        full = GraphonSpec.constant(1.0)
        self.assertEqual(sample_graph(full, latents, 2).edge_count, pair_count(30))

    def test_constant_density_band(self):
        n, p = 500, 0.3
        graph = sample_graph(GraphonSpec.constant(p), sample_latents(n, 10), 20)
        pairs = pair_count(n)
        density = graph.edge_count / pairs
        self.assertLess(abs(density - p), 4 * math.sqrt(p * (1 - p) / pairs))

    def test_deterministic_given_seed(self):
        spec = make_f1(grid_points=33)
        latents = sample_latents(80, 5)
        first = sample_graph(spec, latents, 6)
        second = sample_graph(spec, latents, 6)
        np.testing.assert_array_equal(first.packed, second.packed)
        np.testing.assert_array_equal(first.latents, latents.xi)

    def test_edge_count_law_invariant_under_latent_permutation(self):
        spec = make_f1(grid_points=33)
        latents = sample_latents(60, 99)
        shuffled = latents.permuted(np.random.default_rng(1).permutation(60))
        original, permuted = [], []
        for trial in range(200):
            seed = derive_seed(7, trial)
            original.append(sample_graph(spec, latents, seed).edge_count)
            permuted.append(sample_graph(spec, shuffled, seed + 1).edge_count)
        original, permuted = np.array(original), np.array(permuted)
        spread = math.sqrt(original.var(ddof=1) / 200 + permuted.var(ddof=1) / 200)
        self.assertLess(abs(original.mean() - permuted.mean()), 4 * spread)

    def test_disjoint_edges_uncorrelated(self):
        spec = make_f1(rho_n=0.25, grid_points=33)
        latents = LatentVector([0.3, 0.9, 0.6, 0.8])
        first, second = [], []
        for draw in range(10_000):
            adjacency = sample_graph(spec, latents, derive_seed(3, draw)).adjacency
            first.append(adjacency[0, 1])
            second.append(adjacency[2, 3])
        first, second = np.array(first, dtype=float), np.array(second, dtype=float)
        covariance = np.mean((first - first.mean()) * (second - second.mean()))
        bound = 4 * math.sqrt(first.var() * second.var() / 10_000)
        self.assertLess(abs(covariance), bound)


class RhoScheduleTests(SimpleTestCase):
    def test_dense_is_constant(self):
        for n in (10, 600, 10_000):
            self.assertEqual(rho_schedule(n, 'dense', 0.25), 0.25)

    def test_sparse_value_and_cap(self):
        self.assertAlmostEqual(rho_schedule(1000, 'sparse', 1.0), math.log(1000) ** 3.5 / 1000, places=15)
        self.assertAlmostEqual(rho_schedule(1000, 'sparse', 1.0), 0.869, delta=5e-3)
        self.assertEqual(rho_schedule(1000, 'sparse', 0.5), 0.5)

    def test_sparse_nonincreasing(self):
        values = [rho_schedule(n, 'sparse', 1.0) for n in range(30, 5000, 7)]
        self.assertTrue(all(b <= a for a, b in zip(values, values[1:])))

    def test_bad_level_and_regime(self):
        with self.assertRaises(DomainError):
            rho_schedule(100, 'dense', 0.0)
        with self.assertRaises(DomainError):
            rho_schedule(100, 'medium', 0.5)


class DeriveSeedTests(SimpleTestCase):
    def test_distinct_trials(self):
        seeds = {derive_seed(2024, trial, 0) for trial in range(1000)}
        self.assertEqual(len(seeds), 1000)

    def test_reproducible_and_in_range(self):
        self.assertEqual(derive_seed(1, 2, 3), derive_seed(1, 2, 3))
        self.assertLess(derive_seed(1, 2, 3), 2 ** 64)

    def test_negative_seed(self):
        with self.assertRaises(DomainError):
            derive_seed(-1)


class SimulateCommandTests(SimpleTestCase):
    def run_simulate(self, out, *args):
        stdout = StringIO()
        call_command('simulate', *args, '--out', out, stdout=stdout)
        return stdout.getvalue()

    def test_half_density_graph(self):
        with tempfile.TemporaryDirectory() as tmp:
            output = self.run_simulate(tmp, '--graphon', 'constant', '--rho', '0.5', '--n', '100', '--seed', '7')
            graph = Graph.read_edge_list(Path(tmp) / 'graph.edges')
            self.assertEqual(np.loadtxt(Path(tmp) / 'latents.txt').size, 100)
        pairs = pair_count(100)
        self.assertLess(abs(graph.edge_count - pairs / 2), 3 * math.sqrt(pairs / 4))
        self.assertIn('n=100', output)
        self.assertIn(f"edges={graph.edge_count}", output)

    def test_same_flags_same_files(self):
        with tempfile.TemporaryDirectory() as first, tempfile.TemporaryDirectory() as second:
            for out in (first, second):
                self.run_simulate(out, '--graphon', 'f1', '--n', '60', '--seed', '3')
            for name in ('graph.edges', 'latents.txt'):
                self.assertEqual((Path(first) / name).read_text(), (Path(second) / name).read_text())

    def test_rho_out_of_range_exits_with_code_two(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(CommandError) as ctx:
                self.run_simulate(tmp, '--graphon', 'constant', '--rho', '1.5', '--n', '10')
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn('(0, 1]', str(ctx.exception))

    def test_help_lists_flags_with_defaults(self):
        from sampler.management.commands.simulate import Command
        help_text = Command().create_parser('manage.py', 'simulate').format_help()
        for flag in ('--graphon', '--rho', '--regime', '--n', '--seed', '--out', '--bits'):
            self.assertIn(flag, help_text)
        self.assertIn('default: 600', help_text)
