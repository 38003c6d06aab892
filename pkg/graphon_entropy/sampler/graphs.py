"""
Simple undirected graphs stored as packed upper-triangle bitsets.

Only the pairs i < j are kept, row by row, one bit each; the symmetric hollow
adjacency matrix is rebuilt on demand and cached. A graph with n = 1000 nodes
takes about 62 KB.
"""
import dataclasses
import logging
from functools import cached_property, lru_cache
from pathlib import Path

import numpy as np

from graphons.exceptions import DomainError

logger = logging.getLogger(__name__)


def pair_count(n):
    """Number of unordered node pairs, C(n, 2)."""
    return n * (n - 1) // 2


@lru_cache(maxsize=16)
def upper_indices(n):
    """Row and column indices of the strict upper triangle, row-major."""
    rows, cols = np.triu_indices(n, 1)
    rows.flags.writeable = False
    cols.flags.writeable = False
    return rows, cols


@dataclasses.dataclass(frozen=True, eq=False)
class LatentVector:
    """The latent uniforms xi_1..xi_n attached to the nodes."""
    xi: np.ndarray

    def __post_init__(self):
        xi = np.array(self.xi, dtype=float, ndmin=1)
        if xi.ndim != 1 or xi.size == 0:
            raise DomainError("latent vector must be a non-empty 1-d sequence")
        if np.any(xi <= 0.0) or np.any(xi >= 1.0):
            raise DomainError("latent values must lie strictly inside (0, 1)")
        xi.flags.writeable = False
        object.__setattr__(self, 'xi', xi)

    def __len__(self):
        return self.xi.size

    def permuted(self, order):
        return LatentVector(self.xi[np.asarray(order)])


@dataclasses.dataclass(frozen=True, eq=False)
class Graph:
    """
    Immutable simple undirected graph on nodes 0..n-1.

    Build it with ``from_upper``, ``from_adjacency`` or ``from_edges``.
    """
    n: int
    packed: np.ndarray
    latents: np.ndarray | None = None

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"a graph needs at least one node, got n={self.n}")
        expected = (pair_count(self.n) + 7) // 8
        if self.packed.size != expected:
            raise DomainError(f"packed storage has {self.packed.size} bytes, expected {expected}")
        self.packed.flags.writeable = False

    @classmethod
    def from_upper(cls, n, bits, latents=None):
        bits = np.asarray(bits, dtype=bool)
        if bits.size != pair_count(n):
            raise DomainError(f"expected {pair_count(n)} pair indicators, got {bits.size}")
        return cls(n=n, packed=np.packbits(bits), latents=latents)

    @classmethod
    def from_adjacency(cls, matrix, latents=None):
        matrix = np.asarray(matrix)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DomainError(f"adjacency must be square, got shape {matrix.shape}")
        if not np.array_equal(matrix, matrix.T):
            raise DomainError("adjacency must be symmetric")
        if np.any(np.diag(matrix) != 0):
            raise DomainError("adjacency must have an empty diagonal")
        n = matrix.shape[0]
        rows, cols = upper_indices(n)
        return cls.from_upper(n, matrix[rows, cols] != 0, latents=latents)

    @classmethod
    def from_edges(cls, n, edges, latents=None):
        """Graph from (i, j) pairs; self-loops are rejected, duplicates collapse."""
        matrix = np.zeros((n, n), dtype=np.uint8)
        for i, j in edges:
            if i == j:
                raise DomainError(f"self-loop at node {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise DomainError(f"edge ({i}, {j}) outside nodes 0..{n - 1}")
            matrix[i, j] = matrix[j, i] = 1
        return cls.from_adjacency(matrix, latents=latents)

    @classmethod
    def empty(cls, n):
        return cls.from_upper(n, np.zeros(pair_count(n), dtype=bool))

    @classmethod
    def complete(cls, n):
        return cls.from_upper(n, np.ones(pair_count(n), dtype=bool))

    @cached_property
    def upper(self):
        """Pair indicators A_ij for i < j, row-major."""
        return np.unpackbits(self.packed, count=pair_count(self.n)).astype(bool)

    @cached_property
    def adjacency(self):
        """Dense symmetric 0/1 matrix with a zero diagonal."""
        matrix = np.zeros((self.n, self.n), dtype=np.uint8)
        rows, cols = upper_indices(self.n)
        matrix[rows, cols] = self.upper
        matrix += matrix.T
        matrix.flags.writeable = False
        return matrix

    @cached_property
    def degrees(self):
        return self.adjacency.sum(axis=1, dtype=np.int64)

    @cached_property
    def edge_count(self):
        return int(np.count_nonzero(self.upper))

    def edge_array(self):
        """Edges as an (m, 2) integer array with i < j, in row-major order."""
        rows, cols = upper_indices(self.n)
        mask = self.upper
        return np.column_stack([rows[mask], cols[mask]])

    def permuted(self, order):
        """Relabel nodes so that new node i is old node order[i]."""
        order = np.asarray(order)
        matrix = self.adjacency[np.ix_(order, order)]
        latents = None if self.latents is None else np.asarray(self.latents)[order]
        return Graph.from_adjacency(matrix, latents=latents)

    def subgraph(self, nodes):
        """Induced subgraph on the given nodes, relabelled 0..len(nodes)-1."""
        nodes = np.asarray(nodes, dtype=np.int64)
        return Graph.from_adjacency(self.adjacency[np.ix_(nodes, nodes)])

    def write_edge_list(self, path):
        """One 'i j' pair per line, 0-indexed, after a '# nodes: n' header."""
        path = Path(path)
        with path.open('w') as handle:
            handle.write(f"# nodes: {self.n}\n")
            for i, j in self.edge_array():
                handle.write(f"{i} {j}\n")
        return path

    @classmethod
    def read_edge_list(cls, path, n=None):
        """
        Read a 0-indexed integer edge list.

        The node count comes from ``n``, else from a '# nodes: n' header, else
        from the largest index seen.
        """
        edges = []
        header_n = None
        with Path(path).open() as handle:
            for line_number, raw in enumerate(handle, start=1):
                line = raw.strip()
                if not line:
                    continue
                if line.startswith('#'):
                    if line[1:].strip().startswith('nodes:'):
                        header_n = int(line.split(':', 1)[1])
                    continue
                try:
                    i, j = (int(token) for token in line.split()[:2])
                except ValueError as exc:
                    raise DomainError(f"{path}:{line_number}: expected 'i j', got '{line}'") from exc
                if i != j:
                    edges.append((i, j))
        if n is None:
            n = header_n if header_n is not None else (max(max(e) for e in edges) + 1 if edges else 1)
        logger.debug("Read %d edges on %d nodes from %s", len(edges), n, path)
        return cls.from_edges(n, edges)
