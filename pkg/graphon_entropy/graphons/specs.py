"""
Graphon representations and their evaluation.

A ``GraphonSpec`` describes the generating mechanism of an exchangeable random
graph: a symmetric function f on [0, 1]^2 together with the sparsity scale
rho_n, so that edge (i, j) appears with probability rho_n * f(xi_i, xi_j).
Five kinds are supported, from the constant (Erdos-Renyi) graphon up to a
general symmetric function sampled on a lattice.
"""
import dataclasses
import enum
from functools import cached_property

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .exceptions import DomainError
from .special import beta_quantile

FRACTION_TOLERANCE = 1e-12


class GraphonKind(str, enum.Enum):
    CONSTANT = 'constant'
    SEPARABLE = 'separable'
    BLOCK_CONSTANT = 'block'
    LOW_RANK = 'lowrank'
    ANALYTIC_GRID = 'grid'


def _frozen_array(values, ndim, name):
    array = np.array(values, dtype=float, ndmin=ndim)
    if array.ndim != ndim:
        raise DomainError(f"{name} must be {ndim}-dimensional, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise DomainError(f"{name} contains non-finite values")
    array.flags.writeable = False
    return array


def _lattice(points):
    return np.linspace(0.0, 1.0, points)


@dataclasses.dataclass(frozen=True, eq=False)
class GraphonSpec:
    """
    An immutable generating mechanism.

    Use the class constructors (``constant``, ``separable``, ``block_constant``,
    ``low_rank``, ``analytic_grid``) rather than the raw initializer. Validation
    runs on every construction, including ``with_rho``.
    """
    kind: GraphonKind
    rho_n: float = 1.0
    constant_level: float | None = None
    g_values: np.ndarray | None = None
    theta: np.ndarray | None = None
    block_fractions: np.ndarray | None = None
    lambdas: np.ndarray | None = None
    component_grids: np.ndarray | None = None
    grid: np.ndarray | None = None
    holder_exponent: float | None = None
    label: str = ''

    def __post_init__(self):
        object.__setattr__(self, 'kind', GraphonKind(self.kind))
        if not 0.0 < self.rho_n <= 1.0:
            raise DomainError(f"rho must lie in (0, 1], got {self.rho_n}")
        validator = {
            GraphonKind.CONSTANT: self._validate_constant,
            GraphonKind.SEPARABLE: self._validate_separable,
            GraphonKind.BLOCK_CONSTANT: self._validate_block,
            GraphonKind.LOW_RANK: self._validate_low_rank,
            GraphonKind.ANALYTIC_GRID: self._validate_grid,
        }[self.kind]
        validator()
        peak = self.rho_n * self.max_value
        if peak > 1.0 + 1e-12:
            raise DomainError(
                f"rho_n * max f = {peak:.6g} exceeds 1; edge probabilities would be invalid"
            )
        if not self.label:
            object.__setattr__(self, 'label', self.kind.value)

    # -- validation ---------------------------------------------------------

    def _validate_constant(self):
        if self.constant_level is None or not 0.0 < self.constant_level <= 1.0:
            raise DomainError(f"constant level must lie in (0, 1], got {self.constant_level}")

    def _validate_separable(self):
        g = _frozen_array(self.g_values, 1, 'g_values')
        if g.size < 2:
            raise DomainError("g_values needs at least 2 lattice points")
        if np.any(g < 0):
            raise DomainError("g_values must be nonnegative")
        object.__setattr__(self, 'g_values', g)

    def _validate_block(self):
        theta = _frozen_array(self.theta, 2, 'theta')
        fractions = _frozen_array(self.block_fractions, 1, 'block_fractions')
        k = fractions.size
        if theta.shape != (k, k):
            raise DomainError(f"theta must be {k}x{k} to match block_fractions, got {theta.shape}")
        if not np.array_equal(theta, theta.T):
            raise DomainError("theta must be symmetric")
        if np.any(theta < 0) or np.any(theta > 1):
            raise DomainError("theta entries must lie in [0, 1]")
        if np.any(fractions <= 0):
            raise DomainError("block_fractions must be positive")
        if abs(fractions.sum() - 1.0) > FRACTION_TOLERANCE:
            raise DomainError(f"block_fractions must sum to 1, got {fractions.sum():.15g}")
        object.__setattr__(self, 'theta', theta)
        object.__setattr__(self, 'block_fractions', fractions)

    def _validate_low_rank(self):
        lambdas = _frozen_array(self.lambdas, 1, 'lambdas')
        components = _frozen_array(self.component_grids, 2, 'component_grids')
        if components.shape[0] != lambdas.size:
            raise DomainError(
                f"{lambdas.size} weights but {components.shape[0]} component grids"
            )
        if components.shape[1] < 2:
            raise DomainError("component grids need at least 2 lattice points")
        if np.any(lambdas < 0) or np.any(components < 0):
            raise DomainError("low-rank weights and components must be nonnegative")
        object.__setattr__(self, 'lambdas', lambdas)
        object.__setattr__(self, 'component_grids', components)

    def _validate_grid(self):
        grid = _frozen_array(self.grid, 2, 'grid')
        if grid.shape[0] != grid.shape[1] or grid.shape[0] < 2:
            raise DomainError(f"grid must be square with side >= 2, got {grid.shape}")
        if not np.array_equal(grid, grid.T):
            raise DomainError("grid must be symmetric")
        if np.any(grid < 0):
            raise DomainError("grid values must be nonnegative")
        if self.holder_exponent is not None and not 0.0 < self.holder_exponent <= 1.0:
            raise DomainError(f"holder exponent must lie in (0, 1], got {self.holder_exponent}")
        object.__setattr__(self, 'grid', grid)

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, level, rho_n=1.0, label=''):
        return cls(GraphonKind.CONSTANT, rho_n=rho_n, constant_level=float(level), label=label)

    @classmethod
    def separable(cls, g_values, rho_n=1.0, label=''):
        return cls(GraphonKind.SEPARABLE, rho_n=rho_n, g_values=g_values, label=label)

    @classmethod
    def block_constant(cls, theta, block_fractions, rho_n=1.0, label=''):
        return cls(GraphonKind.BLOCK_CONSTANT, rho_n=rho_n, theta=theta,
                   block_fractions=block_fractions, label=label)

    @classmethod
    def low_rank(cls, lambdas, component_grids, rho_n=1.0, label=''):
        return cls(GraphonKind.LOW_RANK, rho_n=rho_n, lambdas=lambdas,
                   component_grids=component_grids, label=label)

    @classmethod
    def analytic_grid(cls, grid, rho_n=1.0, holder_exponent=None, label=''):
        return cls(GraphonKind.ANALYTIC_GRID, rho_n=rho_n, grid=grid,
                   holder_exponent=holder_exponent, label=label)

    def with_rho(self, rho_n):
        """Return a copy at another sparsity scale (validated again)."""
        return dataclasses.replace(self, rho_n=float(rho_n))

    # -- evaluation ---------------------------------------------------------

    @cached_property
    def max_value(self):
        """Supremum of f. Piecewise-(bi)linear kinds attain it on the lattice."""
        if self.kind is GraphonKind.CONSTANT:
            return float(self.constant_level)
        if self.kind is GraphonKind.SEPARABLE:
            return float(self.g_values.max() ** 2)
        if self.kind is GraphonKind.BLOCK_CONSTANT:
            return float(self.theta.max())
        if self.kind is GraphonKind.LOW_RANK:
            weighted = self.component_grids.T * self.lambdas
            return float((weighted @ self.component_grids).max())
        return float(self.grid.max())

    @cached_property
    def _grid_interpolator(self):
        lattice = _lattice(self.grid.shape[0])
        return RegularGridInterpolator((lattice, lattice), self.grid, method='linear')

    def graphon_values(self, x, y):
        """
        Evaluate the unscaled graphon f at arrays of points.

        Points are ordered as (min, max) first so that f(x, y) == f(y, x)
        holds bit for bit regardless of interpolation rounding.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        lo = np.minimum(x, y)
        hi = np.maximum(x, y)
        if self.kind is GraphonKind.CONSTANT:
            return np.full(np.broadcast(lo, hi).shape, self.constant_level)
        if self.kind is GraphonKind.SEPARABLE:
            lattice = _lattice(self.g_values.size)
            return np.interp(lo, lattice, self.g_values) * np.interp(hi, lattice, self.g_values)
        if self.kind is GraphonKind.BLOCK_CONSTANT:
            edges = np.cumsum(self.block_fractions)[:-1]
            a = np.searchsorted(edges, lo, side='right')
            b = np.searchsorted(edges, hi, side='right')
            return self.theta[a, b]
        if self.kind is GraphonKind.LOW_RANK:
            lattice = _lattice(self.component_grids.shape[1])
            total = np.zeros(np.broadcast(lo, hi).shape)
            for weight, component in zip(self.lambdas, self.component_grids):
                total = total + weight * (np.interp(lo, lattice, component)
                                          * np.interp(hi, lattice, component))
            return total
        lo, hi = np.broadcast_arrays(lo, hi)
        points = np.stack([lo.ravel(), hi.ravel()], axis=-1)
        return self._grid_interpolator(points).reshape(lo.shape)

    def evaluate(self, x, y):
        """Edge probabilities rho_n * f(x, y), clipped into [0, 1]."""
        return np.clip(self.rho_n * self.graphon_values(x, y), 0.0, 1.0)


def eval_graphon(spec, x, y):
    """
    Edge probability rho_n * f(x, y) at a single point.

    Args:
        spec: A valid GraphonSpec
        x: Latent position in [0, 1]
        y: Latent position in [0, 1]

    Returns:
        Probability in [0, 1]
    """
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        raise DomainError(f"latent positions must lie in [0, 1], got ({x}, {y})")
    return float(spec.evaluate(x, y))


def make_f1(rho_n=0.25, grid_points=513):
    """The separable test graphon f1(x, y) = 4xy on a lattice."""
    lattice = _lattice(grid_points)
    return GraphonSpec.analytic_grid(4.0 * np.outer(lattice, lattice), rho_n=rho_n,
                                     holder_exponent=1.0, label='f1')


def make_f2(a0, a1, alpha1, rho_n=1.0, grid_points=513, tol=1e-12):
    """
    The non-separable test graphon with a flat degree profile.

    f2(x, y) = a0 + 4 a1 Q(x) Q(y) + 4 a1 (1 - Q(x)) (1 - Q(y)),
    with Q the Beta(alpha1, alpha1) quantile function. Its marginal
    integral over y equals a0 + 2 a1 for every x.

    Args:
        a0: Baseline level, positive
        a1: Structure amplitude, nonnegative
        alpha1: Beta shape, positive
        rho_n: Sparsity scale
        grid_points: Lattice size (odd sizes keep x = 1/2 on the lattice)
        tol: Quantile residual tolerance

    Returns:
        GraphonSpec of kind ANALYTIC_GRID
    """
    if a0 <= 0:
        raise DomainError(f"a0 must be positive, got {a0}")
    if a1 < 0:
        raise DomainError(f"a1 must be nonnegative, got {a1}")
    if alpha1 <= 0:
        raise DomainError(f"alpha1 must be positive, got {alpha1}")
    if rho_n * (a0 + 4.0 * a1) > 1.0 + 1e-12:
        raise DomainError(
            f"a0 + 4*a1 = {a0 + 4.0 * a1:.6g} exceeds 1/rho = {1.0 / rho_n:.6g}"
        )
    lattice = _lattice(grid_points)
    quantiles = np.empty(grid_points)
    half = (grid_points + 1) // 2
    for i in range(half):
        quantiles[i] = beta_quantile(lattice[i], alpha1, alpha1, tol=tol)
    # Q(1 - p) = 1 - Q(p) for a symmetric Beta law
    for i in range(half, grid_points):
        quantiles[i] = 1.0 - quantiles[grid_points - 1 - i]
    complement = 1.0 - quantiles
    grid = a0 + 4.0 * a1 * (np.outer(quantiles, quantiles) + np.outer(complement, complement))
    return GraphonSpec.analytic_grid(grid, rho_n=rho_n, label='f2')
