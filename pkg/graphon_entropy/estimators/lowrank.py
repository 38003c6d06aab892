"""
H4: universal singular value thresholding of the adjacency matrix.

The adjacency matrix is symmetric, so its singular values are the absolute
eigenvalues. The leading ones are found by block subspace iteration with a
Rayleigh-Ritz step; the block grows until it reaches below the threshold.
"""
import logging
import math

import numpy as np

from graphons.entropy import binary_entropy_array
from graphons.exceptions import DomainError, NumericalError
from sampler.graphs import upper_indices
from sampler.sampling import make_generator

from .estimates import EntropyEstimate, estimate_rho, mean_entropy

logger = logging.getLogger(__name__)

_INITIAL_BLOCK = 8


def usvt_threshold(n, rho_hat, eta):
    """(2 + eta) sqrt(n max(rho_hat, 1/n))."""
    return (2.0 + eta) * math.sqrt(n * max(rho_hat, 1.0 / n))


def leading_eigenpairs(matrix, threshold, tol=1e-8, max_iter=None, seed=0):
    """
    Eigenpairs of a symmetric matrix whose magnitude exceeds ``threshold``.

    Args:
        matrix: Symmetric n x n array
        threshold: Magnitude cut
        tol: Residual tolerance relative to the largest magnitude
        max_iter: Iteration cap, default 10 n
        seed: Seed of the random start block

    Returns:
        (values, vectors) sorted by decreasing magnitude

    Raises:
        NumericalError: when the retained pairs do not converge within max_iter
    """
    n = matrix.shape[0]
    max_iter = 10 * n if max_iter is None else max_iter
    rng = make_generator(seed)
    block = min(n, _INITIAL_BLOCK)
    basis = rng.standard_normal((n, block))
    residual = math.inf
    for iteration in range(1, max_iter + 1):
        q, _ = np.linalg.qr(matrix @ basis)
        ritz_values, ritz_vectors = np.linalg.eigh(q.T @ matrix @ q)
        order = np.argsort(-np.abs(ritz_values), kind='stable')
        values = ritz_values[order]
        basis = q @ ritz_vectors[:, order]

        if block < n and np.abs(values[-1]) > threshold:
            extra = min(n, 2 * block) - block
            basis = np.hstack([basis, rng.standard_normal((n, extra))])
            block += extra
            continue

        retained = int(np.count_nonzero(np.abs(values) > threshold))
        checked = max(retained, 1)
        residuals = np.linalg.norm(matrix @ basis[:, :checked] - basis[:, :checked] * values[:checked], axis=0)
        scale = max(abs(values[0]), 1.0)
        residual = float(residuals.max() / scale)
        if residual < tol:
            logger.debug("Subspace iteration converged after %d iterations, block %d, rank %d",
                         iteration, block, retained)
            return values[:retained], basis[:, :retained]
    raise NumericalError("subspace iteration did not converge", iterations=max_iter, residual=residual)


def usvt(graph, eta=0.01, tol=1e-8, max_iter=None):
    """
    Estimate the edge probability matrix by singular value thresholding.

    Keeps the singular values above (2 + eta) sqrt(n max(rho_hat, 1/n)),
    reconstructs, clips entries to [0, 1], symmetrizes and zeroes the diagonal.

    Args:
        graph: Graph with n >= 2
        eta: Threshold slack in (0, 1)
        tol: Relative residual tolerance of the eigensolver
        max_iter: Iteration cap, default 10 n

    Returns:
        n x n array P_hat
    """
    n = graph.n
    if n < 2:
        raise DomainError(f"USVT needs n >= 2, got {n}")
    if not 0.0 < eta < 1.0:
        raise DomainError(f"eta must lie in (0, 1), got {eta}")
    if graph.edge_count == 0:
        return np.zeros((n, n))
    matrix = np.asarray(graph.adjacency, dtype=float)
    threshold = usvt_threshold(n, estimate_rho(graph), eta)
    values, vectors = leading_eigenpairs(matrix, threshold, tol=tol, max_iter=max_iter)
    estimate = (vectors * values) @ vectors.T
    np.clip(estimate, 0.0, 1.0, out=estimate)
    estimate = 0.5 * (estimate + estimate.T)
    np.fill_diagonal(estimate, 0.0)
    return estimate


def entropy_lowrank(graph, eta=0.01, tol=1e-8, max_iter=None):
    """
    H4: (1 / n^2) times the sum of h(P_hat_ij) over all ordered pairs.

    The diagonal of P_hat is zero and contributes h(0) = 0. No variance
    formula is available for this estimator.
    """
    n = graph.n
    estimate = usvt(graph, eta=eta, tol=tol, max_iter=max_iter)
    rows, cols = upper_indices(n)
    upper = binary_entropy_array(estimate[rows, cols])
    value = mean_entropy(upper, n * n / 2.0)
    return EntropyEstimate('H4', n, estimate_rho(graph), value)
