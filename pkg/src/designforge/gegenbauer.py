"""Gegenbauer polynomials, their derivatives, and spherical harmonic dimensions.

Everything here is scalar special-function plumbing: the three-term
recurrence for C_k^alpha on [-1, 1], closed forms at t = 1, and the
dimension count for the degree-k harmonic space on S^d.  The alpha = 0
case (the circle, d = 1) uses the renormalized Chebyshev limit
lim_{a->0} C_k^a / a = (2/k) T_k so that values at 1 stay nonzero and the
zonal addition identity keeps the same shape as for d >= 2.
"""

import math
from fractions import Fraction

import numpy as np
from scipy.special import roots_jacobi

MAX_DEGREE = 200

_T_SLACK = 1e-12


def _check_degree(k):
    if k < 0:
        raise ValueError("degree must be nonnegative")
    if k > MAX_DEGREE:
        raise ValueError(f"degree {k} exceeds supported maximum {MAX_DEGREE}")


def _check_alpha(alpha):
    if alpha < 0:
        raise ValueError("alpha < 0 is not supported (alpha = (d-1)/2 >= 0)")


def _clamp(t):
    """Clamp t into [-1, 1], allowing 1e-12 of rounding drift outside."""
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0 + _T_SLACK):
        raise ValueError("argument outside [-1, 1]")
    return np.clip(t, -1.0, 1.0)


def gegenbauer_eval(alpha, k, t):
    """Evaluate the Gegenbauer polynomial C_k^alpha at t in [-1, 1].

    Uses the iterative three-term recurrence
        C_0 = 1,  C_1 = 2*alpha*t,
        k C_k = 2(k+alpha-1) t C_{k-1} - (k+2*alpha-2) C_{k-2}.
    For alpha = 0 the renormalized limit (2/k) T_k(t) is returned (1 for
    k = 0), which keeps the value at t = 1 nonzero.

    Accepts scalar or ndarray t; returns the same shape.
    """
    _check_alpha(alpha)
    _check_degree(k)
    t = _clamp(t)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    if alpha == 0.0:
        out = _chebyshev_renormalized(k, t)
    else:
        out = _gegenbauer_recurrence(alpha, k, t)
    return float(out[0]) if scalar else out


def _gegenbauer_recurrence(alpha, k, t):
    prev = np.ones_like(t)
    if k == 0:
        return prev
    cur = 2.0 * alpha * t
    for j in range(2, k + 1):
        prev, cur = cur, (2.0 * (j + alpha - 1.0) * t * cur - (j + 2.0 * alpha - 2.0) * prev) / j
    return cur


def _chebyshev_renormalized(k, t):
    prev = np.ones_like(t)
    if k == 0:
        return prev
    cur = t.copy()
    for _ in range(2, k + 1):
        prev, cur = cur, 2.0 * t * cur - prev
    return (2.0 / k) * cur


def gegenbauer_at_one(alpha, k):
    """Value of C_k^alpha at t = 1: the binomial coefficient C(2*alpha+k-1, k).

    Computed by the product formula prod_{j=1..k} (2*alpha+j-1)/j, which is
    exact for integer 2*alpha.  For alpha = 0 the renormalized-limit value
    2/k is returned (1 for k = 0).
    """
    _check_alpha(alpha)
    _check_degree(k)
    if k == 0:
        return 1.0
    if alpha == 0.0:
        return 2.0 / k
    value = 1.0
    for j in range(1, k + 1):
        value *= (2.0 * alpha + j - 1.0) / j
    return value


def gegenbauer_at_one_exact(alpha2, k):
    """Exact rational C_k^alpha(1) given alpha2 = 2*alpha as a Fraction/int."""
    alpha2 = Fraction(alpha2)
    if k == 0:
        return Fraction(1)
    if alpha2 == 0:
        return Fraction(2, k)
    value = Fraction(1)
    for j in range(1, k + 1):
        value *= Fraction(alpha2 + j - 1, j)
    return value


def gegenbauer_derivative(alpha, k, t, order=1):
    """First or second derivative of C_k^alpha at t.

    Uses the index-shift identities
        d/dt   C_k^alpha = 2*alpha * C_{k-1}^{alpha+1}
        d2/dt2 C_k^alpha = 4*alpha*(alpha+1) * C_{k-2}^{alpha+2}
    whose alpha -> 0 limits under the renormalized convention are
    2*C_{k-1}^1 and 4*C_{k-2}^2.
    """
    _check_alpha(alpha)
    _check_degree(k)
    if order not in (1, 2):
        raise ValueError("derivative order must be 1 or 2")
    if k < order:
        t = _clamp(t)
        return 0.0 if t.ndim == 0 else np.zeros_like(t)
    if order == 1:
        factor = 2.0 * alpha if alpha > 0 else 2.0
        return _scale(factor, gegenbauer_eval(alpha + 1.0, k - 1, t))
    factor = 4.0 * alpha * (alpha + 1.0) if alpha > 0 else 4.0
    return _scale(factor, gegenbauer_eval(alpha + 2.0, k - 2, t))


def _scale(c, v):
    return c * v if isinstance(v, np.ndarray) else float(c * v)


def derivative_at_one_exact(d, k, order):
    """Exact rational value of the order-th derivative of C_k^alpha at 1.

    alpha = (d-1)/2 for integer sphere dimension d >= 1; uses the same
    index-shift identities as gegenbauer_derivative.
    """
    if order not in (1, 2):
        raise ValueError("derivative order must be 1 or 2")
    if k < order:
        return Fraction(0)
    alpha2 = d - 1
    if order == 1:
        factor = Fraction(alpha2) if alpha2 > 0 else Fraction(2)
        return factor * gegenbauer_at_one_exact(alpha2 + 2, k - 1)
    if alpha2 > 0:
        factor = Fraction(alpha2) * Fraction(alpha2 + 2)
    else:
        factor = Fraction(4)
    return factor * gegenbauer_at_one_exact(alpha2 + 4, k - 2)


def harmonic_dim(d, k):
    """Dimension of the space of degree-k spherical harmonics on S^d.

    Exact integer arithmetic via dim = C(d+k, d) - C(d+k-2, d), which
    equals (2k+d-1)/(k+d-1) * C(d+k-1, k).  Degree k = 0 is rejected:
    constants are excluded from the mean-zero polynomial space.
    """
    if d < 1:
        raise ValueError("sphere dimension d must be >= 1")
    if k < 1:
        raise ValueError("harmonic degree k must be >= 1 (constants excluded)")
    return math.comb(d + k, d) - math.comb(d + k - 2, d)


def orthogonality_residual(alpha, m, n, grid_size=256):
    """|quadrature of C_m C_n against (1-t^2)^(alpha-1/2) minus closed form|.

    Gauss-Jacobi quadrature with `grid_size` nodes integrates the product
    exactly once 2*grid_size - 1 >= m + n.  Test helper only.
    """
    _check_alpha(alpha)
    if grid_size < 64:
        raise ValueError("grid_size must be >= 64")
    nodes, weights = roots_jacobi(grid_size, alpha - 0.5, alpha - 0.5)
    fm = gegenbauer_eval(alpha, m, nodes)
    fn = fm if m == n else gegenbauer_eval(alpha, n, nodes)
    numeric = float(np.dot(weights, fm * fn))
    return abs(numeric - _orthogonality_constant(alpha, m, n))


def _orthogonality_constant(alpha, m, n):
    if m != n:
        return 0.0
    if alpha == 0.0:
        # renormalized (2/k) T_k: integral of (2/m)^2 T_m^2 / sqrt(1-t^2)
        return math.pi if m == 0 else 2.0 * math.pi / m**2
    if m == 0:
        # B(1/2, alpha+1/2)
        return math.exp(math.lgamma(0.5) + math.lgamma(alpha + 0.5) - math.lgamma(alpha + 1.0))
    log_c = (
        math.log(math.pi)
        + (1.0 - 2.0 * alpha) * math.log(2.0)
        + math.lgamma(m + 2.0 * alpha)
        - math.lgamma(m + 1.0)
        - math.log(alpha + m)
        - 2.0 * math.lgamma(alpha)
    )
    return math.exp(log_c)
