"""
Regularized incomplete beta function and its inverse.

The forward function is evaluated with the modified Lentz continued fraction
(Numerical Recipes ``betacf``); the inverse used by the f2 test graphon is a
Newton iteration safeguarded by bisection.
"""
import math

from scipy.special import betaln

from .exceptions import DomainError, NumericalError

_FPMIN = 1e-300
_CF_EPS = 1e-16
_CF_MAX_ITER = 10000


def _check_shapes(alpha, beta):
    if not (alpha > 0 and beta > 0):
        raise DomainError(f"beta shape parameters must be positive, got alpha={alpha}, beta={beta}")


def _continued_fraction(x, a, b):
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise NumericalError(
        f"incomplete beta continued fraction did not converge for a={a}, b={b}, x={x}",
        iterations=_CF_MAX_ITER,
        residual=abs(delta - 1.0),
    )


def regularized_incomplete_beta(x, alpha, beta):
    """
    Evaluate I_x(alpha, beta).

    Args:
        x: Point in [0, 1]
        alpha: First shape parameter, positive
        beta: Second shape parameter, positive

    Returns:
        The regularized incomplete beta function at x
    """
    _check_shapes(alpha, beta)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"incomplete beta argument must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = alpha * math.log(x) + beta * math.log1p(-x) - betaln(alpha, beta)
    front = math.exp(log_front)
    if x < (alpha + 1.0) / (alpha + beta + 2.0):
        return front * _continued_fraction(x, alpha, beta) / alpha
    return 1.0 - front * _continued_fraction(1.0 - x, beta, alpha) / beta


def beta_density(x, alpha, beta):
    """Density of the Beta(alpha, beta) distribution at an interior point x."""
    return math.exp(
        (alpha - 1.0) * math.log(x) + (beta - 1.0) * math.log1p(-x) - betaln(alpha, beta)
    )


def beta_quantile(p, alpha, beta, tol=1e-12, max_iter=200):
    """
    Invert the regularized incomplete beta function.

    Returns q with |I_q(alpha, beta) - p| <= tol. Newton steps that leave the
    current bracket are replaced by bisection, so the iteration cannot diverge.

    Args:
        p: Probability in [0, 1]
        alpha: First shape parameter, positive
        beta: Second shape parameter, positive
        tol: Absolute tolerance on the forward residual
        max_iter: Iteration cap

    Returns:
        The quantile q in [0, 1]
    """
    _check_shapes(alpha, beta)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"probability must lie in [0, 1], got {p}")
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    if alpha == beta and p == 0.5:
        return 0.5

    lo, hi = 0.0, 1.0
    x = alpha / (alpha + beta)
    residual = float('inf')
    for iteration in range(1, max_iter + 1):
        residual = regularized_incomplete_beta(x, alpha, beta) - p
        if abs(residual) <= tol:
            return x
        if residual < 0.0:
            lo = x
        else:
            hi = x
        density = beta_density(x, alpha, beta)
        candidate = x - residual / density if density > 0.0 else lo - 1.0
        if not lo < candidate < hi:
            candidate = 0.5 * (lo + hi)
        if candidate == x or hi - lo <= 4 * math.ulp(x):
            # bracket has collapsed to machine precision
            return candidate
        x = candidate
    raise NumericalError(
        f"beta quantile did not converge for p={p}, alpha={alpha}, beta={beta}",
        iterations=max_iter,
        residual=abs(residual),
    )
