"""
Dispatch from estimator ids (H1..H4) to the estimator functions.
"""
import csv
import dataclasses
from pathlib import Path

from graphons.exceptions import DomainError

from .blockmodel import entropy_blockmodel
from .estimates import entropy_constant, entropy_separable
from .lowrank import entropy_lowrank

ESTIMATE_COLUMNS = ['estimator', 'n', 'rho_hat', 'value', 'variance']


@dataclasses.dataclass(frozen=True)
class EstimatorOptions:
    """Tuning shared by every estimator call; k=None selects round(sqrt(n))."""
    k: int | None = None
    eta: float = 0.01
    normalization: str = 'configuration'
    restarts: int = 1
    fit_seed: int = 0
    max_sweeps: int = 100
    epsilon: float = 1e-12
    tol: float = 1e-8


def _h1(graph, options):
    return entropy_constant(graph)


def _h2(graph, options):
    return entropy_separable(graph, normalization=options.normalization, epsilon=options.epsilon)


def _h3(graph, options):
    estimate, _ = entropy_blockmodel(graph, k=options.k, restarts=options.restarts,
                                     seed=options.fit_seed, max_sweeps=options.max_sweeps)
    return estimate


def _h4(graph, options):
    return entropy_lowrank(graph, eta=options.eta, tol=options.tol)


ESTIMATORS = {
    'H1': _h1,
    'H2': _h2,
    'H3': _h3,
    'H4': _h4,
}


def apply_estimator(estimator_id, graph, options=None):
    """
    Run one estimator on a graph.

    Args:
        estimator_id: 'H1', 'H2', 'H3' or 'H4' (case-insensitive)
        graph: Graph
        options: EstimatorOptions, defaults when None

    Returns:
        EntropyEstimate
    """
    try:
        estimator = ESTIMATORS[estimator_id.upper()]
    except KeyError:
        raise DomainError(f"unknown estimator '{estimator_id}'") from None
    return estimator(graph, options or EstimatorOptions())


def write_estimates_csv(estimates, path):
    path = Path(path)
    with path.open('w', newline='') as handle:
        writer = csv.writer(handle)
        writer.writerow(ESTIMATE_COLUMNS)
        for estimate in estimates:
            writer.writerow(estimate.csv_row())
    return path
