"""
H3: entropy of a fitted stochastic block model (network histogram).
"""
import logging
import math

from blockfit.fitting import default_k, fit_labels, theta_mle
from graphons.entropy import block_entropy
from graphons.exceptions import DomainError

from .estimates import EntropyEstimate, estimate_rho

logger = logging.getLogger(__name__)


def blockmodel_variance(fit, n):
    """
    Delta-method variance of H3 for fixed labels.

    H3 = sum over block pairs a <= b of c_ab h(theta_hat_ab), with
    c_ab = 2 h_a h_b / n^2 off the diagonal and h_a^2 / n^2 on it. Each
    theta_hat_ab averages N_ab independent Bernoulli edges, so

        Var = sum over a <= b of c_ab^2 log((1 - t) / t)^2 t (1 - t) / N_ab

    with t = theta_hat_ab. Pairs with t in {0, 1} or N_ab = 0 contribute 0.
    """
    sizes = fit.block_sizes
    total = n * n
    terms = []
    for a in range(fit.k):
        for b in range(a, fit.k):
            theta = float(fit.theta_hat[a, b])
            pairs = int(fit.pair_counts[a, b])
            if pairs == 0 or theta <= 0.0 or theta >= 1.0:
                continue
            weight = (2.0 if a != b else 1.0) * sizes[a] * sizes[b] / total
            slope = math.log((1.0 - theta) / theta)
            terms.append(weight ** 2 * slope ** 2 * theta * (1.0 - theta) / pairs)
    return max(0.0, math.fsum(terms))


def _estimate_from_fit(graph, fit):
    value = block_entropy(fit.theta_hat, fit.block_sizes, graph.n)
    # A single node has no pairs: zero entropy, zero variance.
    rho_hat = estimate_rho(graph) if graph.n > 1 else 0.0
    return EntropyEstimate(
        'H3', graph.n, rho_hat, value,
        variance=blockmodel_variance(fit, graph.n),
        degenerate=fit.degenerate,
    )


def entropy_blockmodel(graph, k=None, restarts=1, seed=0, max_sweeps=100):
    """
    H3: fit k block labels, then plug the block averages into the block entropy.

    Args:
        graph: Graph
        k: Number of blocks, or None for default_k(n)
        restarts: Restarts of the label fit
        seed: Seed of the label fit
        max_sweeps: Sweep cap per restart

    Returns:
        (EntropyEstimate, BlockFit)
    """
    k = default_k(graph.n) if k is None else int(k)
    if k > graph.n:
        raise DomainError(f"k={k} exceeds the number of nodes n={graph.n}")
    fit = fit_labels(graph, k, restarts=restarts, seed=seed, max_sweeps=max_sweeps)
    if fit.degenerate:
        logger.info("H3 with k = n = %d is the saturated model", graph.n)
    return _estimate_from_fit(graph, fit), fit


def entropy_blockmodel_given_labels(graph, labels, k=None):
    """H3 at known labels, e.g. the planted assignment of a simulated SBM."""
    fit = theta_mle(graph, labels, k)
    return _estimate_from_fit(graph, fit), fit
