"""
Stochastic block model fitting by greedy profile-likelihood ascent.

Labels are 0-based inside the library (0..k-1) and written 1-based to CSV.
The profile log-likelihood of a labelling z is

    l(z) = sum over a <= b of  E_ab log theta_ab + (N_ab - E_ab) log(1 - theta_ab)

with theta_ab = E_ab / N_ab the block edge average, E_ab the edges between
blocks a and b and N_ab the node pairs between them (C(h_a, 2) when a == b).
"""
import csv
import dataclasses
import logging
import math
from pathlib import Path

import numpy as np
from scipy.special import xlogy

from graphons.exceptions import DomainError
from sampler.sampling import derive_seed, make_generator

logger = logging.getLogger(__name__)

# Smallest likelihood gain accepted as a strict increase.
GAIN_TOLERANCE = 1e-9


def default_k(n):
    """Number of blocks used when none is given: max(1, round(sqrt(n)))."""
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    return max(1, int(round(math.sqrt(n))))


def _pair_terms(edges, pairs):
    """Per-pair likelihood terms; zero where a block pair holds no node pairs."""
    edges = np.asarray(edges, dtype=float)
    pairs = np.asarray(pairs, dtype=float)
    return xlogy(edges, edges) + xlogy(pairs - edges, pairs - edges) - xlogy(pairs, pairs)


def _pair_counts(sizes):
    sizes = np.asarray(sizes, dtype=np.int64)
    counts = np.outer(sizes, sizes)
    np.fill_diagonal(counts, sizes * (sizes - 1) // 2)
    return counts


def _block_edges(adjacency, labels, k):
    """k x k edge counts; the diagonal holds edges inside each block."""
    membership = np.zeros((labels.size, k), dtype=np.int64)
    membership[np.arange(labels.size), labels] = 1
    edges = membership.T @ adjacency @ membership
    edges[np.diag_indices(k)] //= 2
    return edges


def _log_likelihood(edges, sizes):
    terms = _pair_terms(edges, _pair_counts(sizes))
    return math.fsum(terms[np.triu_indices(len(sizes))])


def _as_adjacency(graph):
    return np.asarray(graph.adjacency, dtype=np.int64)


@dataclasses.dataclass(frozen=True, eq=False)
class BlockFit:
    """
    A fitted k-block model.

    ``labels`` are 0-based. ``edge_counts`` and ``pair_counts`` are the k x k
    E_ab and N_ab tables, so theta_hat == edge_counts / pair_counts wherever
    pair_counts is positive and 0 elsewhere.
    """
    labels: np.ndarray
    block_sizes: np.ndarray
    theta_hat: np.ndarray
    log_likelihood: float
    pair_counts: np.ndarray
    edge_counts: np.ndarray
    converged: bool = True
    sweeps: int = 0
    restart: int = 0

    @property
    def k(self):
        return int(self.block_sizes.size)

    @property
    def n(self):
        return int(self.labels.size)

    @property
    def degenerate(self):
        """Saturated model with one node per block."""
        return self.k == self.n

    def write_labels_csv(self, path):
        """One row per node: node,label with labels 1..k."""
        path = Path(path)
        with path.open('w', newline='') as handle:
            writer = csv.writer(handle)
            writer.writerow(['node', 'label'])
            for node, label in enumerate(self.labels):
                writer.writerow([node, int(label) + 1])
        return path

    def write_theta(self, path):
        path = Path(path)
        np.savetxt(path, self.theta_hat, fmt='%.17g')
        return path


def theta_mle(graph, labels, k=None):
    """
    Block-average maximum likelihood estimate for fixed labels.

    Args:
        graph: Graph
        labels: n labels in 0..k-1
        k: Number of blocks; defaults to max(labels) + 1

    Returns:
        BlockFit holding theta_hat and the log-likelihood at (theta_hat, labels)
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (graph.n,):
        raise DomainError(f"expected {graph.n} labels, got shape {labels.shape}")
    k = int(labels.max()) + 1 if k is None else int(k)
    if labels.min() < 0 or labels.max() >= k:
        raise DomainError(f"labels must lie in 0..{k - 1}")
    sizes = np.bincount(labels, minlength=k)
    if np.any(sizes == 0):
        empty = np.flatnonzero(sizes == 0).tolist()
        raise DomainError(f"blocks {empty} are empty")
    edges = _block_edges(_as_adjacency(graph), labels, k)
    pairs = _pair_counts(sizes)
    theta = np.divide(edges, pairs, out=np.zeros((k, k)), where=pairs > 0)
    return BlockFit(
        labels=labels,
        block_sizes=sizes,
        theta_hat=theta,
        log_likelihood=_log_likelihood(edges, sizes),
        pair_counts=pairs,
        edge_counts=edges,
    )


class _AscentState:
    """
    Mutable bookkeeping for one restart.

    ``neighbours[i, c]`` counts the neighbours of node i in block c; ``edges``
    is the k x k block edge table with within-block counts on the diagonal.
    """

    def __init__(self, adjacency, labels, k):
        self.adjacency = adjacency
        self.labels = labels.copy()
        self.k = k
        self.sizes = np.bincount(labels, minlength=k).astype(np.int64)
        membership = np.zeros((labels.size, k), dtype=np.int64)
        membership[np.arange(labels.size), labels] = 1
        self.neighbours = adjacency @ membership
        self.edges = _block_edges(adjacency, labels, k)

    def log_likelihood(self):
        return _log_likelihood(self.edges, self.sizes)

    def move_gains(self, node):
        """Likelihood change for moving ``node`` to each block; -inf for its own."""
        a = self.labels[node]
        m = self.neighbours[node]
        edges, sizes = self.edges, self.sizes
        h_a = sizes[a]

        old = _pair_terms(edges, _pair_counts(sizes))
        old_total = old[a].sum() + old.sum(axis=1) - old[a]

        row_a = _pair_terms(edges[a] - m, (h_a - 1) * sizes)
        row_a[a] = 0.0
        cross = _pair_terms(edges[a] - m + m[a], (h_a - 1) * (sizes + 1))
        inside_a = _pair_terms(edges[a, a] - m[a], (h_a - 1) * (h_a - 2) // 2)
        grown = _pair_terms(edges + m[np.newaxis, :], (sizes[:, np.newaxis] + 1) * sizes[np.newaxis, :])
        grown_rest = grown.sum(axis=1) - grown[:, a] - np.diag(grown)
        inside_b = _pair_terms(np.diag(edges) + m, (sizes + 1) * sizes // 2)

        new_total = (row_a.sum() - row_a) + cross + inside_a + grown_rest + inside_b
        gains = new_total - old_total
        gains[a] = -np.inf
        return gains

    def move(self, node, target):
        a = self.labels[node]
        if a == target:
            return
        m = self.neighbours[node]
        edges = self.edges
        row_a = edges[a] - m
        row_b = edges[target] + m
        between = edges[a, target] - m[target] + m[a]
        edges[a, :] = row_a
        edges[:, a] = row_a
        edges[target, :] = row_b
        edges[:, target] = row_b
        edges[a, target] = edges[target, a] = between
        column = self.adjacency[:, node]
        self.neighbours[:, a] -= column
        self.neighbours[:, target] += column
        self.labels[node] = target
        self.sizes[a] -= 1
        self.sizes[target] += 1


def _initial_labels(degrees, k, rng):
    """Degree-sorted contiguous groups; ties in degree are broken at random."""
    order = np.lexsort((rng.random(degrees.size), -degrees))
    labels = np.empty(degrees.size, dtype=np.int64)
    for block, members in enumerate(np.array_split(order, k)):
        labels[members] = block
    return labels


def _sweep(state, rng):
    """One pass of single-node moves and pairwise swaps; returns accepted count."""
    accepted = 0
    n = state.labels.size
    for node in rng.permutation(n):
        source = state.labels[node]
        if state.sizes[source] > 1:
            gains = state.move_gains(node)
            target = int(np.argmax(gains))
            if gains[target] > GAIN_TOLERANCE:
                state.move(node, target)
                accepted += 1
                continue

        candidates = np.flatnonzero(state.labels != source)
        if candidates.size == 0:
            continue
        partner = int(candidates[rng.integers(candidates.size)])
        partner_block = state.labels[partner]
        first_gain = state.move_gains(node)[partner_block]
        state.move(node, partner_block)
        second_gain = state.move_gains(partner)[source]
        if first_gain + second_gain > GAIN_TOLERANCE:
            state.move(partner, source)
            accepted += 1
        else:
            state.move(node, source)
    return accepted


def fit_labels(graph, k, restarts=1, seed=0, max_sweeps=100):
    """
    Fit k block labels by greedy ascent of the profile log-likelihood.

    Each restart starts from nodes sorted by degree (ties shuffled with a
    seed derived from ``seed`` and the restart index), split into k
    contiguous groups. Sweeps propose the best single-node move and one
    random pairwise swap per node, accepting only strict increases, and stop
    when a sweep accepts nothing or ``max_sweeps`` is reached.

    Args:
        graph: Graph
        k: Number of blocks, 1 <= k <= n
        restarts: Independent restarts; the best (likelihood, -restart) wins
        seed: Nonnegative integer seed
        max_sweeps: Sweep cap per restart

    Returns:
        BlockFit
    """
    n = graph.n
    if not 1 <= k <= n:
        raise DomainError(f"k must lie in 1..n={n}, got {k}")
    if restarts < 1:
        raise DomainError(f"restarts must be at least 1, got {restarts}")

    adjacency = _as_adjacency(graph)
    degrees = adjacency.sum(axis=1)
    best = None
    for restart in range(restarts):
        rng = make_generator(derive_seed(seed, restart))
        labels = _initial_labels(degrees, k, rng)
        sweeps, converged = 0, True
        if 1 < k < n:
            state = _AscentState(adjacency, labels, k)
            converged = False
            while sweeps < max_sweeps:
                sweeps += 1
                if _sweep(state, rng) == 0:
                    converged = True
                    break
            labels = state.labels
            if not converged:
                logger.warning("Block fit restart %d stopped after %d sweeps without converging",
                               restart, sweeps)
        fit = dataclasses.replace(theta_mle(graph, labels, k), converged=converged,
                                  sweeps=sweeps, restart=restart)
        logger.debug("Restart %d: log-likelihood %.6f after %d sweeps", restart, fit.log_likelihood, sweeps)
        if best is None or fit.log_likelihood > best.log_likelihood:
            best = fit
    return best
