"""
Edge-list files of observed networks.

Lines hold ``u v`` or ``u v t`` tokens. Node ids are opaque tokens; they are
mapped to 0-based indices in a stable order (integers numerically, then other
tokens lexically), so the same edge set always gives the same graph.
"""
import dataclasses
import logging
from datetime import date, datetime
from pathlib import Path

from graphons.exceptions import GraphonEntropyError
from sampler.graphs import Graph

logger = logging.getLogger(__name__)


class IngestError(GraphonEntropyError):
    """An edge-list file cannot be read or holds no usable edge."""


def token_key(token):
    """Sort key placing integer tokens first, in numeric order."""
    try:
        return (0, int(token), '')
    except ValueError:
        return (1, 0, token)


def parse_timestamp(text):
    """
    An integer key, or an ISO date 'YYYY-MM' / 'YYYY-MM-DD'.

    Integers are opaque ordered keys and come back as int; ISO dates come
    back as ``datetime.date`` (a month maps to its first day).
    """
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    for fmt in ('%Y-%m-%d', '%Y-%m'):
        try:
            return datetime.strptime(text, fmt).date()
        except ValueError:
            continue
    raise ValueError(f"unrecognised timestamp '{text}'")


def format_timestamp(value):
    if isinstance(value, date):
        return value.isoformat()
    return str(value)


@dataclasses.dataclass(frozen=True)
class EdgeRecord:
    """One undirected tie; ``u`` sorts before ``v`` under ``token_key``."""
    u: str
    v: str
    t: int | date | None = None

    @classmethod
    def canonical(cls, u, v, t=None):
        if token_key(v) < token_key(u):
            u, v = v, u
        return cls(u, v, t)

    def as_line(self, delimiter=' '):
        tokens = [self.u, self.v]
        if self.t is not None:
            tokens.append(format_timestamp(self.t))
        return delimiter.join(tokens)


@dataclasses.dataclass(frozen=True)
class EdgeListParse:
    """Records of one file plus what was dropped on the way."""
    records: tuple
    self_loops: int = 0
    duplicates: int = 0
    malformed: tuple = ()

    @property
    def has_timestamps(self):
        return any(record.t is not None for record in self.records)

    def node_tokens(self):
        tokens = {record.u for record in self.records} | {record.v for record in self.records}
        return sorted(tokens, key=token_key)

    def to_graph(self):
        """Graph over every token seen, timestamps ignored."""
        return records_to_graph(self.records, universe_index(self.node_tokens()))


def universe_index(tokens):
    return {token: index for index, token in enumerate(tokens)}


def records_to_graph(records, universe):
    edges = [(universe[record.u], universe[record.v]) for record in records]
    return Graph.from_edges(len(universe), edges)


def _read_lines(path):
    try:
        with Path(path).open() as handle:
            return handle.readlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise IngestError(f"cannot read edge list {path}: {exc}") from exc


def parse_edge_list(path, delimiter=None, has_timestamps=False, comment_prefix='#'):
    """
    Parse an edge-list file.

    Args:
        path: File to read
        delimiter: Token separator, whitespace when None
        has_timestamps: Read a third token as the timestamp
        comment_prefix: Lines starting with it are skipped

    Returns:
        EdgeListParse; duplicates collapse per undirected pair (and timestamp
        when present), self-loops are dropped and counted.

    Raises:
        IngestError: unreadable file or no valid edge
    """
    needed = 3 if has_timestamps else 2
    records, seen = [], set()
    self_loops = duplicates = 0
    malformed = []
    for line_number, raw in enumerate(_read_lines(path), start=1):
        line = raw.strip()
        if not line or (comment_prefix and line.startswith(comment_prefix)):
            continue
        tokens = [token.strip() for token in line.split(delimiter)]
        if len(tokens) < needed or not tokens[0] or not tokens[1]:
            malformed.append(line_number)
            continue
        t = None
        if has_timestamps:
            try:
                t = parse_timestamp(tokens[2])
            except ValueError:
                malformed.append(line_number)
                continue
        u, v = tokens[0], tokens[1]
        if u == v:
            self_loops += 1
            continue
        record = EdgeRecord.canonical(u, v, t)
        if record in seen:
            duplicates += 1
            continue
        seen.add(record)
        records.append(record)

    if malformed:
        logger.warning("%s: skipped %d malformed lines: %s", path, len(malformed),
                       ', '.join(str(number) for number in malformed[:20]))
    if self_loops or duplicates:
        logger.info("%s: dropped %d self-loops and %d duplicate edges", path, self_loops, duplicates)
    if not records:
        raise IngestError(f"{path} holds no valid edge")
    return EdgeListParse(tuple(records), self_loops, duplicates, tuple(malformed))


def write_edge_records(records, path, delimiter=' '):
    path = Path(path)
    with path.open('w') as handle:
        for record in records:
            handle.write(record.as_line(delimiter) + '\n')
    return path


def _has_node_header(lines):
    for raw in lines:
        line = raw.strip()
        if not line:
            continue
        if not line.startswith('#'):
            return False
        if line[1:].strip().startswith('nodes:'):
            return True
    return False


def load_graph(path):
    """
    Graph of an edge-list file for estimation.

    Files written by ``simulate`` carry a '# nodes: n' header and keep their
    0-based indices, isolated nodes included; any other file goes through
    ``parse_edge_list``.
    """
    if _has_node_header(_read_lines(path)):
        return Graph.read_edge_list(path)
    return parse_edge_list(path).to_graph()
