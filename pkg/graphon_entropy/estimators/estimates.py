"""
Degree-based plug-in entropy estimators.

H1 treats the graph as Erdos-Renyi and plugs the edge density into the
binary entropy. H2 fits the separable (configuration) model from degrees and
averages the binary entropy of the fitted edge probabilities over all pairs.
"""
import dataclasses
import itertools
import math

import numpy as np

from graphons.entropy import binary_entropy, binary_entropy_array
from graphons.exceptions import DegenerateInputError, DomainError
from sampler.graphs import pair_count

LOG2 = math.log(2.0)

# Rows of the n x n probability table handled at once.
_ROW_CHUNK = 256

NORMALIZATIONS = ('configuration', 'paper')


@dataclasses.dataclass(frozen=True)
class EntropyEstimate:
    """One entropy estimate in nats, with its asymptotic variance where known."""
    estimator: str
    n: int
    rho_hat: float
    value: float
    variance: float | None = None
    degenerate: bool = False

    def in_bits(self):
        return self.value / LOG2

    def csv_row(self):
        return [self.estimator, self.n, repr(self.rho_hat), repr(self.value),
                '' if self.variance is None else repr(self.variance)]


@dataclasses.dataclass(frozen=True, eq=False)
class DegreeData:
    """Degrees d, their sum, and the fitted separable factor g_hat."""
    degrees: np.ndarray
    d_norm1: int
    g_hat: np.ndarray
    normalization: str


def mean_entropy(values, count):
    """Exactly rounded mean of entropy terms, kept inside [0, log 2]."""
    if count == 0:
        return 0.0
    return min(LOG2, max(0.0, math.fsum(values) / count))


def estimate_rho(graph):
    """Edge density: edges over C(n, 2)."""
    if graph.n < 2:
        raise DomainError(f"edge density needs n >= 2, got {graph.n}")
    return graph.edge_count / pair_count(graph.n)


def entropy_constant(graph):
    """
    H1: binary entropy of the edge density.

    The variance is the delta-method value log((1-rho)/rho)^2 rho(1-rho) / C(n, 2);
    at rho_hat in {0, 1} both value and variance are 0.
    """
    rho_hat = estimate_rho(graph)
    if rho_hat in (0.0, 1.0):
        variance = 0.0
    else:
        variance = math.log((1.0 - rho_hat) / rho_hat) ** 2 * rho_hat * (1.0 - rho_hat) / pair_count(graph.n)
    return EntropyEstimate('H1', graph.n, rho_hat, binary_entropy(rho_hat), variance)


def compute_g_hat(graph, normalization='configuration'):
    """
    Separable factor g_hat_i = C d_i estimated from degrees.

    Args:
        graph: Graph with at least one edge
        normalization: 'configuration' uses C = sqrt(n(n-1)) / |d|_1, so that
            rho_hat g_hat_i g_hat_j = d_i d_j / |d|_1; 'paper' uses
            C = (n + 1) / sqrt(|d|_1)

    Returns:
        DegreeData
    """
    if normalization not in NORMALIZATIONS:
        raise DomainError(f"normalization must be one of {NORMALIZATIONS}, got '{normalization}'")
    degrees = np.asarray(graph.degrees, dtype=np.int64)
    d_norm1 = int(degrees.sum())
    if d_norm1 == 0:
        raise DegenerateInputError("the graph has no edges, degrees carry no information")
    n = graph.n
    if normalization == 'configuration':
        scale = math.sqrt(n * (n - 1)) / d_norm1
    else:
        scale = (n + 1) / math.sqrt(d_norm1)
    return DegreeData(degrees=degrees, d_norm1=d_norm1, g_hat=scale * degrees, normalization=normalization)


def _pair_entropies(g_hat, rho_hat, epsilon):
    """
    Yield (rows, values, upper) per chunk of rows.

    ``values`` holds h(clip(rho_hat g_i g_j)) for every column, 0 on the
    diagonal; ``upper`` masks the pairs i < j.
    """
    n = g_hat.size
    columns = np.arange(n)
    for start in range(0, n, _ROW_CHUNK):
        rows = np.arange(start, min(start + _ROW_CHUNK, n))
        probabilities = rho_hat * (g_hat[rows, np.newaxis] * g_hat[np.newaxis, :])
        values = binary_entropy_array(probabilities, epsilon)
        values[np.arange(rows.size), rows] = 0.0
        yield rows, values, columns[np.newaxis, :] > rows[:, np.newaxis]


def entropy_separable(graph, normalization='configuration', epsilon=1e-12):
    """
    H2: mean over pairs i < j of h(clip(rho_hat g_hat_i g_hat_j)).

    Returns:
        EntropyEstimate carrying the separable_variance value
    """
    rho_hat = estimate_rho(graph)
    degree_data = compute_g_hat(graph, normalization)
    n = graph.n
    upper = (values[mask] for _, values, mask in _pair_entropies(degree_data.g_hat, rho_hat, epsilon))
    value = mean_entropy(itertools.chain.from_iterable(upper), pair_count(n))
    variance = separable_variance(degree_data, rho_hat, n, epsilon)
    return EntropyEstimate('H2', n, rho_hat, value, variance)


def separable_variance(degree_data, rho_hat, n, epsilon=1e-12):
    """
    Plug-in variance of H2 as a U-statistic of order 2.

    With kernel K_ij = h(clip(rho_hat g_hat_i g_hat_j)), zeta_1 is the variance
    over nodes of the row means of K and zeta_2 the variance of K over pairs;
    the result is (2(n - 2) zeta_1 + zeta_2) / C(n, 2), clamped at 0.
    """
    if rho_hat == 0.0 or n < 2:
        return 0.0
    row_means = np.empty(n)
    pair_sum, pair_square_sum = [], []
    for rows, values, mask in _pair_entropies(degree_data.g_hat, rho_hat, epsilon):
        row_means[rows] = values.sum(axis=1) / (n - 1)
        upper = values[mask]
        pair_sum.append(math.fsum(upper))
        pair_square_sum.append(math.fsum(upper * upper))
    pairs = pair_count(n)
    kernel_mean = math.fsum(pair_sum) / pairs
    zeta_2 = max(0.0, math.fsum(pair_square_sum) / pairs - kernel_mean ** 2)
    zeta_1 = float(np.var(row_means))
    return max(0.0, (2 * (n - 2) * zeta_1 + zeta_2) / pairs)


def rescaled_g_hat(degree_data, target_mean):
    """g_hat rescaled so its node average equals ``target_mean`` (e.g. the integral of g)."""
    mean = degree_data.g_hat.mean()
    if mean == 0.0:
        raise DegenerateInputError("g_hat is identically zero")
    return degree_data.g_hat * (target_mean / mean)
