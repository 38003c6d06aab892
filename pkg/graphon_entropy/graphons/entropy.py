"""
Binary entropy and the graphon entropy functional.

All values are in nats. ``0 * log 0`` is taken as 0 everywhere, which makes
h(0) = h(1) = 0 by continuity.
"""
import math

import numpy as np
from scipy.special import xlogy

from .exceptions import DomainError
from .specs import GraphonKind

# Rows evaluated at once by the midpoint rule; bounds memory at about 8 MB.
_QUADRATURE_CHUNK = 512


def binary_entropy(x):
    """
    Binary entropy h(x) = -x log x - (1 - x) log(1 - x).

    Args:
        x: Probability in [0, 1]

    Returns:
        Entropy in nats, in [0, log 2]
    """
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"binary entropy is defined on [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return float(-xlogy(x, x) - xlogy(1.0 - x, 1.0 - x))


def binary_entropy_array(p, epsilon=0.0):
    """
    Elementwise binary entropy of an array of probabilities.

    With ``epsilon > 0`` arguments are first clipped into [epsilon, 1 - epsilon];
    the plug-in estimators use this before taking logarithms.
    """
    p = np.asarray(p, dtype=float)
    if epsilon > 0.0:
        p = np.clip(p, epsilon, 1.0 - epsilon)
    q = 1.0 - p
    return -xlogy(p, p) - xlogy(q, q)


def block_entropy(theta, block_sizes, n):
    """
    Entropy of a stochastic block model with the given block sizes.

    Sum over all ordered block pairs (a, b) of (h_a h_b / n^2) h(theta_ab),
    accumulated with ``math.fsum`` so the result does not depend on the order
    of the blocks.

    Args:
        theta: k x k matrix with entries in [0, 1]
        block_sizes: k positive integers summing to n
        n: Node count

    Returns:
        Entropy in nats
    """
    theta = np.asarray(theta, dtype=float)
    sizes = [int(size) for size in block_sizes]
    k = len(sizes)
    if theta.shape != (k, k):
        raise DomainError(f"theta must be {k}x{k} for {k} blocks, got {theta.shape}")
    if any(size <= 0 for size in sizes):
        raise DomainError("block sizes must be positive")
    if sum(sizes) != n:
        raise DomainError(f"block sizes sum to {sum(sizes)}, expected n={n}")
    if np.any(theta < 0) or np.any(theta > 1):
        raise DomainError("theta entries must lie in [0, 1]")
    total = n * n
    return math.fsum(
        (sizes[a] * sizes[b] / total) * binary_entropy(float(theta[a, b]))
        for a in range(k)
        for b in range(k)
    )


def midpoint_entropy(spec, quad_points):
    """
    Tensor-product midpoint rule for the double integral of h(rho_n f).

    Works for every graphon kind; uses quad_points^2 evaluations.
    """
    if quad_points < 2:
        raise DomainError(f"quad_points must be at least 2, got {quad_points}")
    nodes = (np.arange(quad_points) + 0.5) / quad_points
    row_sums = []
    for start in range(0, quad_points, _QUADRATURE_CHUNK):
        rows = nodes[start:start + _QUADRATURE_CHUNK]
        x, y = np.meshgrid(rows, nodes, indexing='ij')
        values = binary_entropy_array(spec.evaluate(x, y))
        row_sums.extend(values.sum(axis=1))
    return math.fsum(row_sums) / (quad_points * quad_points)


def graphon_entropy(spec, quad_points=2048):
    """
    Graphon entropy H(f), the double integral of h(rho_n f(x, y)) over [0, 1]^2.

    Block-constant graphons use the closed form over block regions; every other
    kind goes through the midpoint rule.

    Args:
        spec: A valid GraphonSpec
        quad_points: Midpoints per axis, at least 2

    Returns:
        Entropy in nats, in [0, log 2]
    """
    if quad_points < 2:
        raise DomainError(f"quad_points must be at least 2, got {quad_points}")
    if spec.kind is GraphonKind.BLOCK_CONSTANT:
        fractions = spec.block_fractions
        k = fractions.size
        return math.fsum(
            (fractions[a] * fractions[b]) * binary_entropy(min(1.0, spec.rho_n * spec.theta[a, b]))
            for a in range(k)
            for b in range(k)
        )
    if spec.kind is GraphonKind.CONSTANT:
        return binary_entropy(spec.rho_n * spec.constant_level)
    return midpoint_entropy(spec, quad_points)
