import csv
import math
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, tag

from entropy_main.runconfig import default_threads
from estimators.blockmodel import entropy_blockmodel_given_labels
from estimators.registry import EstimatorOptions
from graphons.conf import engine_setting
from graphons.entropy import binary_entropy
from graphons.exceptions import DegenerateInputError, DomainError
from graphons.specs import GraphonSpec, make_f1, make_f2
from sampler.graphs import LatentVector, pair_count
from sampler.sampling import derive_seed, rho_schedule, sample_graph

from .batches import (
    BATCH_COLUMNS, SUMMARY_COLUMNS, SWEEP_COLUMNS, TrialBatch, decay_sweep, loglog_slope, run_batch,
    srmse, write_batch_csv, write_summary_csv, write_sweep_csv,
)
from .diagnostics import clt_diagnostic
from .models import BatchSummary, BenchmarkRun


class SrmseTests(SimpleTestCase):
    def test_equal_estimates(self):
        self.assertEqual(srmse([0.3] * 5, 0.5, dense=True), 0.0)

    def test_hand_value(self):
        self.assertAlmostEqual(srmse([0.4, 0.6], 0.25, dense=True), 0.1, places=12)

    def test_sparse_divisor(self):
        rho = 0.05
        expected = 0.1 / math.sqrt(abs(rho * math.log(rho)))
        self.assertAlmostEqual(srmse([0.4, 0.6], rho, dense=False), expected, places=12)

    def test_needs_two_estimates(self):
        with self.assertRaises(DomainError):
            srmse([0.4], 0.5, dense=True)


class TrialBatchTests(SimpleTestCase):
    def make_batch(self, estimates, truth=0.5):
        return TrialBatch('test', 'H1', 100, 0.3, truth, tuple(estimates))

    def test_rmse_decomposition(self):
        values = np.random.default_rng(2).normal(0.47, 0.03, size=250)
        batch = self.make_batch(values)
        self.assertAlmostEqual(batch.rmse ** 2, batch.bias_squared + batch.variance, delta=1e-10)
        self.assertAlmostEqual(batch.mean, float(np.mean(values)), places=12)
        self.assertAlmostEqual(batch.variance, float(np.var(values)), places=12)

    def test_rmse_about_mean_is_dense_srmse(self):
        batch = self.make_batch([0.4, 0.6, 0.5])
        self.assertEqual(batch.rmse_about_mean, batch.srmse)

    def test_summary_row_matches_columns(self):
        self.assertEqual(len(self.make_batch([0.4, 0.6]).summary_row()), len(SUMMARY_COLUMNS))


class RunBatchTests(SimpleTestCase):
    spec = GraphonSpec.constant(1.0, rho_n=0.3)

    def test_trials_must_be_at_least_two(self):
        with self.assertRaises(DomainError):
            run_batch(self.spec, ['H1'], 20, 1, 0)

    def test_unknown_estimator(self):
        with self.assertRaises(DomainError):
            run_batch(self.spec, ['H7'], 20, 3, 0)

    def test_same_seed_same_batch(self):
        first = run_batch(self.spec, ['h1', 'h2'], 40, 4, 11)
        second = run_batch(self.spec, ['h1', 'h2'], 40, 4, 11)
        self.assertEqual(first['H1'].estimates, second['H1'].estimates)
        self.assertEqual(first['H2'].estimates, second['H2'].estimates)
        self.assertNotEqual(first['H1'].estimates, run_batch(self.spec, ['h1'], 40, 4, 12)['H1'].estimates)

    def test_parallel_schedule_is_bit_identical(self):
        options = EstimatorOptions(k=3)
        serial = run_batch(make_f1(grid_points=65), ['H1', 'H2', 'H3'], 50, 6, 5, options=options, threads=1)
        parallel = run_batch(make_f1(grid_points=65), ['H1', 'H2', 'H3'], 50, 6, 5, options=options, threads=3)
        for estimator_id in ('H1', 'H2', 'H3'):
            self.assertEqual(serial[estimator_id].estimates, parallel[estimator_id].estimates)
            self.assertEqual(serial[estimator_id].srmse, parallel[estimator_id].srmse)

    def test_truth_and_identity(self):
        batch = run_batch(self.spec, ['H1'], 30, 5, 3)['H1']
        self.assertEqual(batch.truth, binary_entropy(0.3))
        self.assertEqual(batch.trials, 5)
        self.assertAlmostEqual(batch.rmse ** 2, batch.bias_squared + batch.variance, delta=1e-10)

    def test_degenerate_trials_are_counted(self):
        sparse = GraphonSpec.constant(1.0, rho_n=1e-4)
        with self.assertLogs('simharness.batches', 'WARNING'):
            batches = run_batch(sparse, ['H1', 'H2'], 10, 5, 0)
        self.assertEqual(batches['H1'].failures, 0)
        self.assertGreaterEqual(batches['H2'].failures, 1)
        self.assertEqual(batches['H2'].trials + batches['H2'].failures, 5)
        self.assertEqual(len(batches['H2'].outcomes), 5)

    def test_sparse_regime_rescales(self):
        batch = run_batch(self.spec, ['H1'], 40, 3, 0, regime='sparse', sparse_exponent=1.0)['H1']
        self.assertAlmostEqual(batch.rho_n, math.log(40) / 40, places=15)
        self.assertFalse(batch.dense)

    @tag('slow')
    def test_half_density_mean(self):
        batch = run_batch(GraphonSpec.constant(1.0, rho_n=0.5), ['H1'], 600, 100, 0,
                          threads=default_threads())['H1']
        self.assertLess(abs(batch.mean - math.log(2.0)), 1e-4)
        self.assertLessEqual(batch.mean, math.log(2.0))


class SweepTests(SimpleTestCase):
    def test_slope_of_power_law(self):
        rows = [(n, 0.0, 3.0 / n) for n in (200, 400, 800)]
        self.assertAlmostEqual(loglog_slope(rows), -1.0, places=12)

    def test_slope_rejects_zero(self):
        with self.assertRaises(DomainError):
            loglog_slope([(200, 0.0, 0.0), (400, 0.0, 0.1)])

    def test_n_values_must_increase(self):
        with self.assertRaises(DomainError):
            decay_sweep(GraphonSpec.constant(1.0, rho_n=0.3), 'H1', [60, 40], 3, 0)

    def test_small_sweep_and_csv(self):
        rows, batches = decay_sweep(GraphonSpec.constant(1.0, rho_n=0.3), 'H1', [30, 60], 4, 1)
        self.assertEqual([row[0] for row in rows], [30, 60])
        with tempfile.TemporaryDirectory() as tmp:
            paths = [
                (write_batch_csv(batches.values(), Path(tmp) / 'batch.csv'), BATCH_COLUMNS, 8),
                (write_summary_csv(batches.values(), Path(tmp) / 'summary.csv'), SUMMARY_COLUMNS, 2),
                (write_sweep_csv(batches.values(), Path(tmp) / 'sweep.csv', 'dense'), SWEEP_COLUMNS, 2),
            ]
            for path, columns, count in paths:
                with path.open() as handle:
                    reader = csv.DictReader(handle)
                    data = list(reader)
                self.assertEqual(reader.fieldnames, columns)
                self.assertEqual(len(data), count)


class CltDiagnosticTests(SimpleTestCase):
    def test_normal_draws_pass(self):
        draws = np.random.default_rng(123).normal(3.0, 2.0, size=100_000)
        result = clt_diagnostic(draws)
        self.assertGreater(result.p_value, 0.01)
        self.assertLess(abs(result.skewness), 0.05)
        self.assertLess(abs(result.excess_kurtosis), 0.1)

    def test_constant_sequence(self):
        with self.assertRaises(DegenerateInputError):
            clt_diagnostic([0.5] * 200)

    def test_needs_a_hundred(self):
        with self.assertRaises(DomainError):
            clt_diagnostic(np.arange(50.0))

    def test_skewed_sample_fails(self):
        draws = np.random.default_rng(5).exponential(size=5000)
        self.assertFalse(clt_diagnostic(draws).looks_normal())


@tag('slow')
class AcceptanceTests(SimpleTestCase):
    """Long Monte-Carlo runs of the benchmark scenarios."""

    def test_separable_graphon_ordering(self):
        batches = run_batch(make_f1(rho_n=0.25), ['H1', 'H2', 'H3'], 600, 100, 2024, threads=default_threads())
        h1, h2, h3 = batches['H1'], batches['H2'], batches['H3']
        self.assertLess(h2.rmse, h3.rmse)
        self.assertLess(h3.rmse, h1.rmse)
        self.assertGreaterEqual(h1.bias_squared, 10 * h1.variance)

    def test_non_separable_graphon_ordering(self):
        spec = make_f2(engine_setting('F2_A0'), engine_setting('F2_A1'), engine_setting('F2_ALPHA1'))
        batches = run_batch(spec, ['H1', 'H2', 'H3'], 600, 100, 2025, threads=default_threads())
        h1, h2, h3 = batches['H1'], batches['H2'], batches['H3']
        self.assertLess(h3.rmse, min(h1.rmse, h2.rmse))
        self.assertLess(h3.bias_squared, h2.bias_squared)

    def test_constant_graphon_clt(self):
        rho, n = 0.3, 300
        batch = run_batch(GraphonSpec.constant(1.0, rho_n=rho), ['H1'], n, 500, 7,
                          threads=default_threads())['H1']
        delta_variance = math.log((1 - rho) / rho) ** 2 * rho * (1 - rho) / pair_count(n)
        self.assertLess(abs(batch.variance / delta_variance - 1.0), 0.15)
        self.assertAlmostEqual(batch.truth, 0.610864, places=6)
        self.assertLess(abs(batch.mean - batch.truth), 3 * batch.standard_error)
        result = clt_diagnostic(batch.estimates)
        self.assertGreater(result.p_value, 0.01)
        self.assertLess(abs(result.skewness), 0.25)

    def test_blockmodel_clt_at_fixed_labels(self):
        spec = GraphonSpec.block_constant([[0.8, 0.1], [0.1, 0.8]], [0.5, 0.5])
        labels = np.repeat([0, 1], 200)
        latents = LatentVector(np.where(labels == 0, 0.25, 0.75))
        values, predicted = [], []
        for trial in range(500):
            graph = sample_graph(spec, latents, derive_seed(41, trial))
            estimate, _ = entropy_blockmodel_given_labels(graph, labels, 2)
            values.append(estimate.value)
            predicted.append(estimate.variance)
        self.assertGreater(clt_diagnostic(values).p_value, 0.01)
        empirical = np.var(values, ddof=1)
        self.assertLess(abs(np.mean(predicted) / empirical - 1.0), 0.25)

    def test_decay_in_dense_regime(self):
        rows, _ = decay_sweep(make_f1(rho_n=0.25), 'H3', [200, 400, 600, 800, 1000], 100, 99,
                              threads=default_threads())
        values = [row[-1] for row in rows]
        self.assertTrue(all(later < earlier for earlier, later in zip(values, values[1:])), values)
        self.assertTrue(-1.4 <= loglog_slope(rows) <= -0.6)

    def test_decay_in_sparse_regime(self):
        # At level 1 the (log n)^3.5 / n rate binds once n passes about 750.
        spec = GraphonSpec.block_constant([[0.9, 0.2], [0.2, 0.9]], [0.5, 0.5], rho_n=1.0)
        n_values = [800, 1200, 1600, 2000]
        rows, _ = decay_sweep(spec, 'H3', n_values, 100, 99, options=EstimatorOptions(k=2),
                              regime='sparse', threads=default_threads())
        rates = [row[1] for row in rows]
        self.assertEqual(rates, [rho_schedule(n, 'sparse', 1.0) for n in n_values])
        self.assertTrue(all(later < earlier for earlier, later in zip(rates, rates[1:])), rates)
        self.assertLess(rates[-1], 0.65)
        values = [row[-1] for row in rows]
        self.assertLess(values[-1], values[0])
        self.assertLess(loglog_slope(rows), 0.0)


class BenchmarkCommandTests(TestCase):
    def run_benchmark(self, out, *args):
        stdout = StringIO()
        call_command('benchmark', '--graphon', 'constant', '--rho', '0.3', '--out', out, '--threads', '1',
                     *args, stdout=stdout, stderr=StringIO())
        return stdout.getvalue()

    def read(self, path):
        with path.open() as handle:
            return list(csv.DictReader(handle))

    def test_sweep_writes_every_table(self):
        with tempfile.TemporaryDirectory() as tmp:
            output = self.run_benchmark(tmp, '--n', '30,60', '--trials', '3', '--estimators', 'h1,h2')
            summary = self.read(Path(tmp) / 'summary.csv')
            sweep = self.read(Path(tmp) / 'sweep.csv')
            trials = self.read(Path(tmp) / 'batch.csv')
        self.assertEqual([(row['estimator'], row['n']) for row in summary],
                         [('H1', '30'), ('H2', '30'), ('H1', '60'), ('H2', '60')])
        self.assertEqual({row['regime'] for row in sweep}, {'dense'})
        self.assertEqual(len(trials), 12)
        self.assertIn('Summaries written', output)
        run = BenchmarkRun.objects.get()
        self.assertEqual(run.n_values, [30, 60])
        self.assertEqual(BatchSummary.objects.filter(run=run).count(), 4)

    def test_same_seed_same_summary(self):
        with tempfile.TemporaryDirectory() as first, tempfile.TemporaryDirectory() as second:
            for out in (first, second):
                self.run_benchmark(out, '--n', '40', '--trials', '3', '--estimators', 'h1', '--seed', '5')
            self.assertEqual((Path(first) / 'summary.csv').read_text(), (Path(second) / 'summary.csv').read_text())

    def test_single_trial_is_invalid(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(CommandError) as ctx:
                self.run_benchmark(tmp, '--n', '30', '--trials', '1')
        self.assertEqual(ctx.exception.returncode, 2)

    def test_decreasing_n_is_invalid(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(CommandError) as ctx:
                self.run_benchmark(tmp, '--n', '60,30', '--trials', '3')
        self.assertEqual(ctx.exception.returncode, 2)

    def test_help_lists_flags(self):
        from simharness.management.commands.benchmark import Command
        help_text = Command().create_parser('manage.py', 'benchmark').format_help()
        for flag in ('--graphon', '--rho', '--regime', '--n', '--trials', '--seed', '--threads',
                     '--estimators', '--k', '--eta', '--ghat-norm', '--out', '--bits'):
            self.assertIn(flag, help_text)
