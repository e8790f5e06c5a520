"""Vectorized double-double (~31 significant digits) helpers.

A dd number is a pair (hi, lo) of float64 ndarrays (or scalars) with
hi = fl(hi + lo).  Only the operations the kernel energy path needs are
provided.  Inputs are assumed well inside the exponent range, so the
Dekker split cannot overflow.
"""

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def quick_two_sum(a, b):
    """Requires |a| >= |b| (or a == 0)."""
    s = a + b
    err = b - (s - a)
    return s, err


def two_prod(a, b):
    p = a * b
    ca = _SPLITTER * a
    ahi = ca - (ca - a)
    alo = a - ahi
    cb = _SPLITTER * b
    bhi = cb - (cb - b)
    blo = b - bhi
    err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, err


def dd(a):
    """Promote a float/ndarray to dd."""
    a = np.asarray(a, dtype=float)
    return a, np.zeros_like(a)


def from_fraction(frac):
    """Exact-to-dd image of a Fraction (scalar pair)."""
    from fractions import Fraction

    frac = Fraction(frac)
    hi = float(frac)
    lo = float(frac - Fraction(hi))
    return hi, lo


def add(x, y):
    s1, s2 = two_sum(x[0], y[0])
    t1, t2 = two_sum(x[1], y[1])
    s2 = s2 + t1
    s1, s2 = quick_two_sum(s1, s2)
    s2 = s2 + t2
    return quick_two_sum(s1, s2)


def sub(x, y):
    return add(x, (-y[0], -y[1]))


def mul(x, y):
    p1, p2 = two_prod(x[0], y[0])
    p2 = p2 + (x[0] * y[1] + x[1] * y[0])
    return quick_two_sum(p1, p2)


def mul_d(x, c):
    p1, p2 = two_prod(x[0], c)
    p2 = p2 + x[1] * c
    return quick_two_sum(p1, p2)


def div(x, y):
    q1 = x[0] / y[0]
    r = sub(x, mul_d(y, q1))
    q2 = r[0] / y[0]
    r = sub(r, mul_d(y, q2))
    q3 = r[0] / y[0]
    s1, s2 = quick_two_sum(q1, q2)
    return add((s1, s2), dd(q3))


def sqrt(x):
    s = np.sqrt(x[0])
    r = sub(x, two_prod(s, s))
    e = r[0] / (2.0 * s)
    return quick_two_sum(s, e)


def pairwise_sum(values):
    """Deterministic compensated sum of a float64 array; returns dd."""
    return pairwise_sum_dd(dd(values))


def pairwise_sum_dd(x):
    """Deterministic pairwise reduction of a dd array; returns a dd scalar."""
    hi = np.atleast_1d(np.asarray(x[0], dtype=float))
    lo = np.atleast_1d(np.asarray(x[1], dtype=float))
    if hi.size == 0:
        return 0.0, 0.0
    while hi.size > 1:
        m = hi.size // 2
        s = add((hi[0:2 * m:2], lo[0:2 * m:2]), (hi[1:2 * m:2], lo[1:2 * m:2]))
        if hi.size % 2:
            s = (np.append(s[0], hi[-1]), np.append(s[1], lo[-1]))
        hi, lo = s
    return float(hi[0]), float(lo[0])


def clip_unit(x):
    """Clamp a dd value into [-1, 1] (componentwise for arrays)."""
    hi, lo = x
    over = hi > 1.0
    under = hi < -1.0
    if np.any(over) or np.any(under):
        hi = np.where(over, 1.0, np.where(under, -1.0, hi))
        lo = np.where(over | under, 0.0, lo)
    edge = (hi == 1.0) & (lo > 0.0)
    edge |= (hi == -1.0) & (lo < 0.0)
    if np.any(edge):
        lo = np.where(edge, 0.0, lo)
    return hi, lo
