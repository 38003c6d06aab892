"""
Sampling exchangeable random graphs from a graphon.

Every random stream comes from a counter-based Philox generator keyed by a
64-bit seed. Per-trial seeds are derived from a master seed with
``numpy.random.SeedSequence``, so trials can run in any order or in parallel
and still reproduce bit for bit.
"""
import math

import numpy as np

from graphons.exceptions import DomainError

from .graphs import Graph, LatentVector, upper_indices

# Pairs evaluated per chunk when drawing edges; bounds memory for large n.
_PAIR_CHUNK = 1 << 22

DENSE = 'dense'
SPARSE = 'sparse'
REGIMES = (DENSE, SPARSE)


def derive_seed(master_seed, *keys):
    """
    A 64-bit seed determined by the master seed and integer keys.

    Args:
        master_seed: Nonnegative integer
        keys: Further nonnegative integers, e.g. (trial, stream)

    Returns:
        Python int in [0, 2**64)
    """
    if master_seed < 0 or any(key < 0 for key in keys):
        raise DomainError("seeds and seed keys must be nonnegative")
    sequence = np.random.SeedSequence([int(master_seed), *(int(key) for key in keys)])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def make_generator(seed):
    """Philox-backed numpy Generator for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(int(seed)))


def sample_latents(n, seed):
    """
    Draw n independent uniform latent positions strictly inside (0, 1).

    Args:
        n: Node count, at least 1
        seed: 64-bit seed

    Returns:
        LatentVector
    """
    if n < 1:
        raise DomainError(f"need at least one latent, got n={n}")
    rng = make_generator(seed)
    return LatentVector(rng.uniform(np.nextafter(0.0, 1.0), 1.0, size=n))


def sample_graph(spec, latents, seed):
    """
    Draw A_ij ~ Bernoulli(rho_n f(xi_i, xi_j)) independently for i < j.

    Args:
        spec: GraphonSpec
        latents: LatentVector of length n
        seed: 64-bit seed for the edge draws

    Returns:
        Graph carrying the latents
    """
    xi = latents.xi
    n = xi.size
    rows, cols = upper_indices(n)
    rng = make_generator(seed)
    bits = np.empty(rows.size, dtype=bool)
    for start in range(0, rows.size, _PAIR_CHUNK):
        stop = min(start + _PAIR_CHUNK, rows.size)
        probabilities = spec.evaluate(xi[rows[start:stop]], xi[cols[start:stop]])
        bits[start:stop] = rng.random(stop - start) < probabilities
    return Graph.from_upper(n, bits, latents=xi)


def rho_schedule(n, regime, level, exponent=3.5):
    """
    Sparsity scale for a graph of n nodes.

    The dense regime keeps rho_n = level. The sparse regime uses
    min(level, (log n)^exponent / n), one concrete sequence decaying more
    slowly than n^-1 log^3 n.

    Args:
        n: Node count
        regime: 'dense' or 'sparse'
        level: Scale in (0, 1]
        exponent: Log exponent of the sparse sequence

    Returns:
        rho_n in (0, 1]
    """
    if not 0.0 < level <= 1.0:
        raise DomainError(f"level must lie in (0, 1], got {level}")
    if regime == DENSE:
        return float(level)
    if regime != SPARSE:
        raise DomainError(f"regime must be one of {REGIMES}, got '{regime}'")
    if n < 2:
        raise DomainError(f"the sparse schedule needs n >= 2, got {n}")
    return float(min(level, math.log(n) ** exponent / n))
