"""
Snapshot sequences of a timestamped edge list.
"""
import bisect
import dataclasses
import logging
from datetime import date

from graphons.exceptions import DomainError

from .parsing import parse_timestamp, records_to_graph, token_key, universe_index

logger = logging.getLogger(__name__)

CALENDAR_WINDOWS = ('monthly', 'yearly')
MODES = ('cumulative', 'windowed')


@dataclasses.dataclass(frozen=True)
class SnapshotSeries:
    """
    Graphs in time order over one node universe.

    Every graph has ``len(universe)`` nodes; nodes without ties in a window
    stay isolated.
    """
    timestamps: tuple
    graphs: tuple
    universe: dict

    def __len__(self):
        return len(self.graphs)

    def __iter__(self):
        return iter(zip(self.timestamps, self.graphs))


def _calendar_bucket(value, window):
    """(sort key, label) of the calendar window holding ``value``; integers are their own window."""
    if not isinstance(value, date):
        return (value,), str(value)
    if window == 'yearly':
        return (value.year,), f"{value.year:04d}"
    return (value.year, value.month), f"{value.year:04d}-{value.month:02d}"


def _boundaries(window):
    boundaries = [parse_timestamp(b) if isinstance(b, str) else b for b in window]
    if not boundaries:
        raise DomainError("custom windows need at least one boundary")
    try:
        increasing = all(a < b for a, b in zip(boundaries, boundaries[1:]))
    except TypeError as exc:
        raise DomainError("window boundaries mix dates and integer keys") from exc
    if not increasing:
        raise DomainError("window boundaries must be strictly increasing")
    return boundaries


def build_snapshots(records, window='yearly', mode='cumulative'):
    """
    Bucket timestamped records into snapshots.

    Args:
        records: EdgeRecord sequence, every record timestamped
        window: 'monthly', 'yearly', or a sequence of increasing boundaries;
            a custom window ends at its boundary, inclusive
        mode: 'windowed' keeps each window's edges, 'cumulative' every edge
            up to the window end

    Returns:
        SnapshotSeries. Calendar windows group ISO dates by year or month and
        give every integer key its own window, in key order; they keep only
        windows holding records. Custom windows keep every boundary. Records later than the last
        boundary are dropped.
    """
    if mode not in MODES:
        raise DomainError(f"mode must be one of {', '.join(MODES)}, got '{mode}'")
    records = list(records)
    if not records:
        raise DomainError("no records to build snapshots from")
    if any(record.t is None for record in records):
        raise DomainError("snapshots need a timestamp on every record")

    tokens = {record.u for record in records} | {record.v for record in records}
    universe = universe_index(sorted(tokens, key=token_key))

    if isinstance(window, str):
        if window not in CALENDAR_WINDOWS:
            raise DomainError(f"window must be monthly, yearly or a list of boundaries, got '{window}'")
        if len({isinstance(record.t, date) for record in records}) > 1:
            raise DomainError("calendar windows cannot mix integer keys and ISO dates")
        buckets = {}
        for record in records:
            buckets.setdefault(_calendar_bucket(record.t, window), []).append(record)
        keys = sorted(buckets)
        labels = [label for _, label in keys]
        grouped = [buckets[key] for key in keys]
    else:
        boundaries = _boundaries(window)
        grouped = [[] for _ in boundaries]
        late = 0
        for record in records:
            try:
                position = bisect.bisect_left(boundaries, record.t)
            except TypeError as exc:
                raise DomainError("record timestamps and window boundaries are not comparable") from exc
            if position == len(boundaries):
                late += 1
                continue
            grouped[position].append(record)
        if late:
            logger.warning("Dropped %d records after the last window boundary", late)
        labels = [b.isoformat() if isinstance(b, date) else str(b) for b in boundaries]

    graphs, running = [], []
    for bucket in grouped:
        if mode == 'cumulative':
            running.extend(bucket)
            bucket = running
        graphs.append(records_to_graph(bucket, universe))
    logger.info("Built %d %s snapshots over %d nodes", len(graphs), mode, len(universe))
    return SnapshotSeries(tuple(labels), tuple(graphs), universe)


def parse_window(value):
    """'monthly', 'yearly' or a comma-separated list of boundaries."""
    if value in CALENDAR_WINDOWS:
        return value
    try:
        return [parse_timestamp(token) for token in value.split(',') if token.strip()]
    except ValueError as exc:
        raise DomainError(f"--window expects monthly, yearly or boundaries, got '{value}'") from exc
