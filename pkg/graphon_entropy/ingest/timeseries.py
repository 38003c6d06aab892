"""
Entropy of each snapshot of a SnapshotSeries.
"""
import csv
import dataclasses
import logging
from pathlib import Path

import numpy as np

from estimators.registry import ESTIMATORS, EstimatorOptions, apply_estimator
from graphons.exceptions import DomainError, GraphonEntropyError

logger = logging.getLogger(__name__)

TIMESERIES_COLUMNS = ['timestamp', 'estimator', 'n_active', 'rho_hat', 'entropy', 'variance', 'flag']

FLAG_TOO_FEW_NODES = 'too_few_nodes'
FLAG_DEGENERATE = 'degenerate'


@dataclasses.dataclass(frozen=True)
class TimeseriesRow:
    timestamp: str
    estimator: str
    n_active: int
    rho_hat: float | None = None
    entropy: float | None = None
    variance: float | None = None
    flag: str = ''

    def csv_row(self):
        def fmt(value):
            return '' if value is None else repr(float(value))
        return [self.timestamp, self.estimator, self.n_active, fmt(self.rho_hat),
                fmt(self.entropy), fmt(self.variance), self.flag]


def entropy_timeseries(series, estimator_id, options=None, restrict_active=True):
    """
    Apply one estimator to every snapshot, in time order.

    With ``restrict_active`` each snapshot is reduced to its nodes of degree
    at least one. Snapshots with fewer than two nodes left, and snapshots on
    which the estimator fails, give a flagged row without an estimate.
    """
    estimator_id = estimator_id.upper()
    if estimator_id not in ESTIMATORS:
        raise DomainError(f"unknown estimator '{estimator_id}'")
    if not len(series):
        raise DomainError("the snapshot series is empty")
    options = options or EstimatorOptions()

    rows = []
    for timestamp, graph in series:
        nodes = np.flatnonzero(graph.degrees > 0) if restrict_active else np.arange(graph.n)
        if nodes.size < 2:
            rows.append(TimeseriesRow(timestamp, estimator_id, int(nodes.size), flag=FLAG_TOO_FEW_NODES))
            continue
        if restrict_active:
            graph = graph.subgraph(nodes)
        try:
            estimate = apply_estimator(estimator_id, graph, options)
        except GraphonEntropyError as exc:
            logger.warning("%s on snapshot %s failed: %s", estimator_id, timestamp, exc)
            rows.append(TimeseriesRow(timestamp, estimator_id, graph.n, flag=f"error: {exc}"))
            continue
        rows.append(TimeseriesRow(
            timestamp, estimator_id, graph.n, estimate.rho_hat, estimate.value, estimate.variance,
            FLAG_DEGENERATE if estimate.degenerate else '',
        ))
    return rows


def write_timeseries_csv(rows, path, header=()):
    """Write rows after '# name: value' lines for each (name, value) in ``header``."""
    path = Path(path)
    with path.open('w', newline='') as handle:
        for name, value in header:
            handle.write(f"# {name}: {value}\n")
        writer = csv.writer(handle)
        writer.writerow(TIMESERIES_COLUMNS)
        for row in rows:
            writer.writerow(row.csv_row())
    return path


def read_timeseries_csv(path):
    """Data rows of a timeseries CSV as dicts, header lines skipped."""
    with Path(path).open(newline='') as handle:
        lines = [line for line in handle if not line.startswith('#')]
    return list(csv.DictReader(lines))
