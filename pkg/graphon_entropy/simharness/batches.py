"""
Monte-Carlo trial batches of the entropy estimators.

A batch samples ``trials`` independent graphs from one graphon at one size,
applies every requested estimator to each, and summarises the estimates
against the quadrature entropy of the graphon. Trial ``t`` draws its latents,
edges and label-fit randomness from seeds derived from (master seed, t), so a
batch is the same whatever the number of worker processes.
"""
import csv
import dataclasses
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

import numpy as np

from estimators.registry import ESTIMATORS, EstimatorOptions, apply_estimator
from graphons.entropy import graphon_entropy
from graphons.exceptions import DomainError, GraphonEntropyError
from sampler.sampling import DENSE, derive_seed, rho_schedule, sample_graph, sample_latents

logger = logging.getLogger(__name__)

LATENT_STREAM = 0
EDGE_STREAM = 1
FIT_STREAM = 2

BATCH_COLUMNS = ['spec_id', 'estimator', 'n', 'rho_n', 'trial', 'value', 'variance', 'rho_hat', 'error']
SUMMARY_COLUMNS = ['spec_id', 'estimator', 'n', 'rho_n', 'trials', 'failures', 'truth', 'mean',
                   'bias_squared', 'variance', 'rmse', 'rmse_about_mean', 'srmse']
SWEEP_COLUMNS = ['spec_id', 'estimator', 'n', 'rho_n', 'srmse', 'regime']


def _mean(values):
    return math.fsum(values) / len(values)


def _mean_square_about(values, centre):
    return math.fsum((value - centre) ** 2 for value in values) / len(values)


def srmse(estimates, rho_n, dense):
    """
    Root-mean-square deviation about the mean, scaled by sqrt(|rho_n log rho_n|).

    The divisor is 1 in the dense regime.
    """
    estimates = [float(value) for value in estimates]
    if len(estimates) < 2:
        raise DomainError(f"sRMSE needs at least 2 estimates, got {len(estimates)}")
    spread = math.sqrt(_mean_square_about(estimates, _mean(estimates)))
    if dense:
        return spread
    if not 0.0 < rho_n < 1.0:
        raise DomainError(f"sparse sRMSE needs rho_n in (0, 1), got {rho_n}")
    return spread / math.sqrt(abs(rho_n * math.log(rho_n)))


@dataclasses.dataclass(frozen=True)
class TrialOutcome:
    """What one estimator produced on one trial graph."""
    trial: int
    estimator: str
    value: float | None = None
    variance: float | None = None
    rho_hat: float | None = None
    error: str = ''

    @property
    def failed(self):
        return self.value is None


@dataclasses.dataclass(frozen=True)
class TrialBatch:
    """
    Estimates of one estimator over the trials of one (graphon, n) setting.

    ``estimates`` holds the successful trials in trial order; failed trials
    are only counted. ``rmse`` is centred at the truth, ``rmse_about_mean``
    and ``srmse`` at the batch mean, so that rmse^2 = bias^2 + variance.
    """
    spec_id: str
    estimator_id: str
    n: int
    rho_n: float
    truth: float
    estimates: tuple
    failures: int = 0
    dense: bool = True
    outcomes: tuple = ()

    @property
    def trials(self):
        return len(self.estimates)

    @property
    def mean(self):
        return _mean(self.estimates) if self.estimates else math.nan

    @property
    def bias_squared(self):
        return (self.mean - self.truth) ** 2

    @property
    def variance(self):
        return _mean_square_about(self.estimates, self.mean) if self.estimates else math.nan

    @property
    def standard_error(self):
        return math.sqrt(self.variance / self.trials) if self.estimates else math.nan

    @property
    def rmse(self):
        return math.sqrt(_mean_square_about(self.estimates, self.truth)) if self.estimates else math.nan

    @property
    def rmse_about_mean(self):
        return math.sqrt(self.variance)

    @property
    def srmse(self):
        if self.trials < 2 or (not self.dense and self.rho_n >= 1.0):
            return math.nan
        return srmse(self.estimates, self.rho_n, self.dense)

    def summary_row(self):
        return [self.spec_id, self.estimator_id, self.n, repr(self.rho_n), self.trials, self.failures,
                repr(self.truth), repr(self.mean), repr(self.bias_squared), repr(self.variance),
                repr(self.rmse), repr(self.rmse_about_mean), repr(self.srmse)]


def _run_trial(spec, estimator_ids, n, master_seed, options, trial):
    latents = sample_latents(n, derive_seed(master_seed, trial, LATENT_STREAM))
    graph = sample_graph(spec, latents, derive_seed(master_seed, trial, EDGE_STREAM))
    trial_options = dataclasses.replace(options, fit_seed=derive_seed(master_seed, trial, FIT_STREAM))
    outcomes = []
    for estimator_id in estimator_ids:
        try:
            estimate = apply_estimator(estimator_id, graph, trial_options)
        except DomainError:
            raise
        except GraphonEntropyError as exc:
            logger.warning("Trial %d: %s failed: %s", trial, estimator_id, exc)
            outcomes.append(TrialOutcome(trial, estimator_id, error=str(exc)))
            continue
        outcomes.append(TrialOutcome(trial, estimator_id, estimate.value, estimate.variance, estimate.rho_hat))
    return outcomes


def run_batch(spec, estimators, n, trials, master_seed, options=None, threads=1, regime=DENSE,
              spec_id=None, quad_points=2048, sparse_exponent=3.5):
    """
    Run one Monte-Carlo batch.

    Args:
        spec: GraphonSpec; its rho_n is the level of the sparsity schedule
        estimators: Estimator ids, e.g. ('H1', 'H3')
        n: Node count
        trials: Number of independent graphs, at least 2
        master_seed: Nonnegative seed the trial seeds derive from
        options: EstimatorOptions; the fit seed is replaced per trial
        threads: Worker processes; 1 runs in-process
        regime: 'dense' or 'sparse'
        spec_id: Label in the outputs, the spec label by default
        quad_points: Quadrature resolution of the truth
        sparse_exponent: Log exponent of the sparse schedule

    Returns:
        dict of estimator id -> TrialBatch, in the order requested
    """
    if trials < 2:
        raise DomainError(f"a batch needs at least 2 trials, got {trials}")
    estimator_ids = tuple(estimator_id.upper() for estimator_id in estimators)
    unknown = [estimator_id for estimator_id in estimator_ids if estimator_id not in ESTIMATORS]
    if unknown:
        raise DomainError(f"unknown estimators {', '.join(unknown)}")
    rho_n = rho_schedule(n, regime, spec.rho_n, exponent=sparse_exponent)
    spec = spec.with_rho(rho_n)
    truth = graphon_entropy(spec, quad_points=quad_points)
    options = options or EstimatorOptions()
    spec_id = spec_id or spec.label

    logger.info("Batch %s n=%d rho_n=%.6g: %d trials of %s on %d workers",
                spec_id, n, rho_n, trials, ','.join(estimator_ids), threads)
    work = partial(_run_trial, spec, estimator_ids, n, master_seed, options)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as executor:
            per_trial = list(executor.map(work, range(trials)))
    else:
        per_trial = [work(trial) for trial in range(trials)]

    batches = {}
    for index, estimator_id in enumerate(estimator_ids):
        outcomes = tuple(trial_outcomes[index] for trial_outcomes in per_trial)
        estimates = tuple(outcome.value for outcome in outcomes if not outcome.failed)
        batches[estimator_id] = TrialBatch(
            spec_id=spec_id,
            estimator_id=estimator_id,
            n=n,
            rho_n=rho_n,
            truth=truth,
            estimates=estimates,
            failures=len(outcomes) - len(estimates),
            dense=regime == DENSE,
            outcomes=outcomes,
        )
        if len(estimates) < len(outcomes):
            logger.warning("%s: %d of %d trials failed", estimator_id, len(outcomes) - len(estimates), trials)
    return batches


def decay_sweep(spec, estimator_id, n_values, trials, master_seed, options=None, threads=1,
                regime=DENSE, spec_id=None, quad_points=2048, sparse_exponent=3.5):
    """
    sRMSE of one estimator over increasing n.

    Returns:
        list of (n, rho_n, srmse) rows plus the batches, keyed by n
    """
    n_values = [int(n) for n in n_values]
    if any(later <= earlier for earlier, later in zip(n_values, n_values[1:])):
        raise DomainError(f"n values must increase, got {n_values}")
    rows, batches = [], {}
    for n in n_values:
        batch = run_batch(spec, [estimator_id], n, trials, master_seed, options=options, threads=threads,
                          regime=regime, spec_id=spec_id, quad_points=quad_points,
                          sparse_exponent=sparse_exponent)[estimator_id.upper()]
        batches[n] = batch
        rows.append((n, batch.rho_n, batch.srmse))
    return rows, batches


def loglog_slope(rows):
    """Least-squares slope of log sRMSE against log n over (n, ..., srmse) rows."""
    if len(rows) < 2:
        raise DomainError("a slope needs at least 2 rows")
    n = np.array([row[0] for row in rows], dtype=float)
    values = np.array([row[-1] for row in rows], dtype=float)
    if np.any(values <= 0):
        raise DomainError("log-log slope needs positive sRMSE values")
    slope, _ = np.polyfit(np.log(n), np.log(values), 1)
    return float(slope)


def _fmt(value):
    return '' if value is None else repr(float(value))


def write_batch_csv(batches, path):
    """One row per (trial, estimator); ``batches`` is an iterable of TrialBatch."""
    path = Path(path)
    with path.open('w', newline='') as handle:
        writer = csv.writer(handle)
        writer.writerow(BATCH_COLUMNS)
        for batch in batches:
            for outcome in batch.outcomes:
                writer.writerow([batch.spec_id, batch.estimator_id, batch.n, repr(batch.rho_n), outcome.trial,
                                 _fmt(outcome.value), _fmt(outcome.variance), _fmt(outcome.rho_hat),
                                 outcome.error])
    return path


def write_summary_csv(batches, path):
    path = Path(path)
    with path.open('w', newline='') as handle:
        writer = csv.writer(handle)
        writer.writerow(SUMMARY_COLUMNS)
        for batch in batches:
            writer.writerow(batch.summary_row())
    return path


def write_sweep_csv(batches, path, regime):
    path = Path(path)
    with path.open('w', newline='') as handle:
        writer = csv.writer(handle)
        writer.writerow(SWEEP_COLUMNS)
        for batch in batches:
            writer.writerow([batch.spec_id, batch.estimator_id, batch.n, repr(batch.rho_n),
                             repr(batch.srmse), regime])
    return path
