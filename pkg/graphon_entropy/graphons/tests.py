import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from scipy.integrate import trapezoid
from scipy.special import betaincinv

from .entropy import binary_entropy, block_entropy, graphon_entropy, midpoint_entropy
from .exceptions import DomainError
from .forms import dump_graphon_config, graphon_from_options, load_graphon_config, read_graphon_config
from .specs import GraphonKind, GraphonSpec, eval_graphon, make_f1, make_f2
from .special import beta_quantile, regularized_incomplete_beta

LOG2 = math.log(2.0)


class BinaryEntropyTests(SimpleTestCase):
    def test_boundaries_are_zero(self):
        self.assertEqual(binary_entropy(0.0), 0.0)
        self.assertEqual(binary_entropy(1.0), 0.0)

    def test_maximum_at_one_half(self):
        self.assertAlmostEqual(binary_entropy(0.5), LOG2, places=15)

    def test_symmetry(self):
        self.assertAlmostEqual(binary_entropy(0.1), binary_entropy(0.9), places=14)

    def test_outside_unit_interval_is_domain_error(self):
        with self.assertRaises(DomainError):
            binary_entropy(1.2)
        with self.assertRaises(DomainError):
            binary_entropy(-0.01)


class GraphonSpecTests(SimpleTestCase):
    def setUp(self):
        self.block = GraphonSpec.block_constant([[0.2, 0.5], [0.5, 0.8]], [0.5, 0.5])

    def test_constant_evaluation(self):
        spec = GraphonSpec.constant(0.3)
        self.assertEqual(eval_graphon(spec, 0.12, 0.77), 0.3)

    def test_block_lookup(self):
        self.assertEqual(eval_graphon(self.block, 0.1, 0.9), 0.5)
        self.assertEqual(eval_graphon(self.block, 0.1, 0.2), 0.2)
        self.assertEqual(eval_graphon(self.block, 0.7, 0.9), 0.8)

    def test_separable_scaling(self):
        spec = GraphonSpec.separable(np.full(11, 2.0), rho_n=0.25)
        self.assertAlmostEqual(eval_graphon(spec, 0.3, 0.6), 1.0, places=15)

    def test_evaluation_is_exactly_symmetric(self):
        rng = np.random.default_rng(5)
        lattice = np.linspace(0, 1, 9)
        specs = [
            self.block,
            make_f1(grid_points=33),
            GraphonSpec.separable(1 + lattice ** 2, rho_n=0.2),
            GraphonSpec.low_rank([0.3, 0.2], [1 + lattice, 2 - lattice], rho_n=0.5),
        ]
        x, y = rng.random(500), rng.random(500)
        for spec in specs:
            np.testing.assert_array_equal(spec.evaluate(x, y), spec.evaluate(y, x))

    def test_invalid_probability_scale_rejected(self):
        with self.assertRaises(DomainError) as ctx:
            GraphonSpec.separable(np.full(5, 2.0), rho_n=0.5)
        self.assertIn('exceeds 1', str(ctx.exception))

    def test_rho_bounds(self):
        with self.assertRaises(DomainError):
            GraphonSpec.constant(0.5, rho_n=1.5)
        with self.assertRaises(DomainError):
            GraphonSpec.constant(0.5, rho_n=0.0)

    def test_block_validation(self):
        with self.assertRaises(DomainError):
            GraphonSpec.block_constant([[0.2, 0.4], [0.5, 0.8]], [0.5, 0.5])
        with self.assertRaises(DomainError):
            GraphonSpec.block_constant([[0.2, 0.5], [0.5, 0.8]], [0.6, 0.5])

    def test_low_rank_must_be_nonnegative(self):
        with self.assertRaises(DomainError):
            GraphonSpec.low_rank([1.0], [[0.5, -0.1, 0.2]])

    def test_with_rho_revalidates(self):
        spec = make_f1(rho_n=0.25, grid_points=9)
        self.assertEqual(spec.with_rho(0.1).rho_n, 0.1)
        with self.assertRaises(DomainError):
            spec.with_rho(0.5)


class GraphonEntropyTests(SimpleTestCase):
    def test_constant_half(self):
        self.assertAlmostEqual(graphon_entropy(GraphonSpec.constant(0.5)), LOG2, places=15)

    def test_block_closed_form(self):
        spec = GraphonSpec.block_constant([[0.2, 0.5], [0.5, 0.8]], [0.5, 0.5])
        expected = 0.25 * binary_entropy(0.2) + 0.5 * binary_entropy(0.5) + 0.25 * binary_entropy(0.8)
        self.assertAlmostEqual(graphon_entropy(spec), expected, places=14)
        self.assertAlmostEqual(graphon_entropy(spec), 0.596775, delta=1e-6)

    def test_f1_against_series_oracle(self):
        # Series expansion of the double integral of h(xy) gives 0.42750...
        self.assertAlmostEqual(graphon_entropy(make_f1()), 0.4275, delta=5e-4)

    def test_block_entropy_examples(self):
        self.assertAlmostEqual(block_entropy(np.full((3, 3), 0.5), [2, 5, 3], 10), LOG2, places=15)
        self.assertEqual(block_entropy([[0.3]], [7], 7), binary_entropy(0.3))
        self.assertEqual(block_entropy([[1.0, 0.0], [0.0, 1.0]], [4, 4], 8), 0.0)

    def test_block_entropy_size_mismatch(self):
        with self.assertRaises(DomainError):
            block_entropy([[0.5]], [3], 4)

    def test_block_entropy_matches_aligned_quadrature(self):
        rng = np.random.default_rng(2024)
        quad_points = 64
        for _ in range(50):
            k = int(rng.integers(1, 9))
            cuts = np.sort(rng.choice(np.arange(1, quad_points), size=k - 1, replace=False))
            sizes = np.diff(np.concatenate([[0], cuts, [quad_points]]))
            upper = np.triu(rng.random((k, k)))
            theta = upper + np.triu(upper, 1).T
            spec = GraphonSpec.block_constant(theta, sizes / quad_points)
            self.assertAlmostEqual(
                midpoint_entropy(spec, quad_points),
                block_entropy(theta, sizes, quad_points),
                delta=1e-10,
            )

    def test_block_relabelling_invariance(self):
        theta = np.array([[0.1, 0.4, 0.7], [0.4, 0.2, 0.3], [0.7, 0.3, 0.9]])
        fractions = np.array([0.2, 0.5, 0.3])
        order = [2, 0, 1]
        original = GraphonSpec.block_constant(theta, fractions)
        permuted = GraphonSpec.block_constant(theta[np.ix_(order, order)], fractions[order])
        self.assertEqual(graphon_entropy(original), graphon_entropy(permuted))

    def test_entropy_bounds(self):
        for spec in (make_f1(grid_points=65), make_f2(0.25, 0.15, 3.0, grid_points=65),
                     GraphonSpec.constant(0.9, rho_n=0.5)):
            value = graphon_entropy(spec, quad_points=256)
            self.assertGreaterEqual(value, 0.0)
            self.assertLessEqual(value, LOG2)


class BetaQuantileTests(SimpleTestCase):
    def test_symmetric_median(self):
        for shape in (0.5, 1.0, 3.0, 7.5):
            self.assertEqual(beta_quantile(0.5, shape, shape), 0.5)

    def test_boundaries(self):
        self.assertEqual(beta_quantile(0.0, 2.0, 5.0), 0.0)
        self.assertEqual(beta_quantile(1.0, 2.0, 5.0), 1.0)

    def test_forward_residual(self):
        q = beta_quantile(0.75, 2.0, 2.0)
        self.assertLess(abs(regularized_incomplete_beta(q, 2.0, 2.0) - 0.75), 1e-12)
        self.assertAlmostEqual(q, betaincinv(2.0, 2.0, 0.75), places=10)

    def test_round_trip_and_monotone(self):
        previous = 0.0
        for p in np.linspace(0.001, 0.999, 101):
            q = beta_quantile(p, 3.0, 3.0)
            self.assertAlmostEqual(regularized_incomplete_beta(q, 3.0, 3.0), p, delta=1e-10)
            self.assertGreaterEqual(q, previous)
            previous = q

    def test_nonpositive_shape(self):
        with self.assertRaises(DomainError):
            beta_quantile(0.3, 0.0, 1.0)
        with self.assertRaises(DomainError):
            beta_quantile(0.3, 1.0, -2.0)


class F2GraphonTests(SimpleTestCase):
    def setUp(self):
        self.a0, self.a1 = 0.25, 0.15
        self.spec = make_f2(self.a0, self.a1, 3.0, grid_points=257)

    def test_degenerate_amplitude_is_constant(self):
        spec = make_f2(0.4, 0.0, 3.0, grid_points=17)
        self.assertEqual(spec.kind, GraphonKind.ANALYTIC_GRID)
        self.assertAlmostEqual(eval_graphon(spec, 0.31, 0.84), 0.4, places=14)

    def test_flat_marginal(self):
        lattice = np.linspace(0, 1, self.spec.grid.shape[0])
        marginals = trapezoid(self.spec.grid, lattice, axis=1)
        np.testing.assert_allclose(marginals, self.a0 + 2 * self.a1, atol=1e-6)

    def test_point_symmetry(self):
        for x, y in ((0.1, 0.3), (0.25, 0.8), (0.6, 0.95)):
            self.assertAlmostEqual(eval_graphon(self.spec, x, y),
                                   eval_graphon(self.spec, 1 - x, 1 - y), places=12)

    def test_probability_bound(self):
        with self.assertRaises(DomainError):
            make_f2(0.5, 0.2, 3.0)


class GraphonConfigTests(SimpleTestCase):
    def test_kind_name_with_rho(self):
        spec = graphon_from_options('constant', rho=0.5)
        self.assertEqual(eval_graphon(spec, 0.2, 0.4), 0.5)

    def test_rho_message_names_bound(self):
        with self.assertRaises(DomainError) as ctx:
            graphon_from_options('constant', rho=1.5)
        self.assertIn('(0, 1]', str(ctx.exception))

    def test_config_file_round_trip(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = Path(tmp) / 'sbm.cfg'
            config.write_text("# planted partition\nkind=block\nrho=0.9\n"
                              "theta=0.2,0.5;0.5,0.8\nfractions=0.25 0.75\n")
            spec = load_graphon_config(config)
            self.assertEqual(spec.rho_n, 0.9)
            np.testing.assert_array_equal(spec.block_fractions, [0.25, 0.75])
            again = load_graphon_config(dump_graphon_config(spec, Path(tmp) / 'copy.cfg'))
            np.testing.assert_array_equal(again.theta, spec.theta)

    def test_grid_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            np.savetxt(Path(tmp) / 'g.txt', [[0.1, 0.3], [0.3, 0.5]])
            config = Path(tmp) / 'grid.cfg'
            config.write_text("kind=grid\ngrid_file=g.txt\nholder=0.5\n")
            spec = load_graphon_config(config)
            self.assertAlmostEqual(eval_graphon(spec, 0.5, 0.5), 0.3, places=14)

    def test_hash_inside_a_value_is_kept(self):
        with tempfile.TemporaryDirectory() as tmp:
            np.savetxt(Path(tmp) / 'run#2.txt', [[0.2, 0.4], [0.4, 0.6]])
            config = Path(tmp) / 'grid.cfg'
            config.write_text("kind=grid  # measured lattice\ngrid_file=run#2.txt\n#holder=2\n")
            self.assertEqual(read_graphon_config(config), {'kind': 'grid', 'grid_file': 'run#2.txt'})
            spec = load_graphon_config(config)
            self.assertAlmostEqual(eval_graphon(spec, 0.5, 0.5), 0.4, places=14)

    def test_unknown_key(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = Path(tmp) / 'bad.cfg'
            config.write_text("kind=constant\ncolour=blue\n")
            with self.assertRaises(DomainError):
                load_graphon_config(config)

    def test_grid_kind_requires_file(self):
        with self.assertRaises(DomainError):
            graphon_from_options('grid')
