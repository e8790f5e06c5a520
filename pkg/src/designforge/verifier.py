"""Independent certification of spherical designs.

The design check never touches the kernel code path: monomials up to the
target degree are averaged over the points and compared against exact
closed-form sphere integrals computed in rational arithmetic.  The module
also validates the two-sided L1 sampling inequality (Marcinkiewicz-
Zygmund) against dense reference quadrature, and the averaging bound used
to seed the solver, by Monte Carlo over in-region sampling.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np
from scipy.special import roots_legendre

from .kernel import _energy_raw, gw_eval, make_kernel
from .sphere import as_coords
from .solver import initial_energy_bound

MAX_MONOMIAL_DIM = 4
MAX_MONOMIAL_DEGREE = 12


def monomial_sphere_integral(exponents):
    """Exact integral of x^a over S^d w.r.t. normalized surface measure.

    Zero when any exponent is odd; otherwise
    prod_i (a_i - 1)!! / prod_{j=0}^{|a|/2 - 1} (d + 1 + 2j),
    evaluated in integer arithmetic (d + 1 = len(exponents)).
    """
    a = [int(e) for e in exponents]
    if any(e < 0 for e in a):
        raise ValueError("exponents must be nonnegative")
    if len(a) < 2:
        raise ValueError("exponent vector must have length d + 1 >= 2")
    if any(e % 2 for e in a):
        return 0.0
    m = len(a)
    total = sum(a)
    num = 1
    for e in a:
        num *= _double_factorial(e - 1)
    den = 1
    for j in range(total // 2):
        den *= m + 2 * j
    return float(Fraction(num, den))


def _double_factorial(k):
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


def monomial_exponents(d, max_degree, min_degree=1):
    """All exponent vectors of length d+1 with min_degree <= |a| <= max_degree."""
    for total in range(min_degree, max_degree + 1):
        yield from _compositions(total, d + 1)


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


def worst_monomial_deviation(points, n):
    """Max |mean x^a - integral x^a| over monomials of degree 1..n.

    Returns (worst, witness_exponents).  Capped at desk scale d <= 4,
    n <= 12 where the monomial count stays tractable.
    """
    X = as_coords(points)
    d = X.shape[1] - 1
    if d > MAX_MONOMIAL_DIM:
        raise ValueError(f"monomial certification supports d <= {MAX_MONOMIAL_DIM}")
    if not 1 <= n <= MAX_MONOMIAL_DEGREE:
        raise ValueError(f"monomial certification supports n in 1..{MAX_MONOMIAL_DEGREE}")
    powers = [
        np.stack([X[:, c] ** e for e in range(n + 1)]) for c in range(d + 1)
    ]
    worst = -1.0
    witness = None
    for a in monomial_exponents(d, n):
        vals = powers[0][a[0]].copy()
        for c in range(1, d + 1):
            if a[c]:
                vals *= powers[c][a[c]]
        deviation = abs(float(np.mean(vals)) - monomial_sphere_integral(a))
        if deviation > worst:
            worst = deviation
            witness = a
    return worst, witness


def is_design(points, n, tol):
    """Certify the design property by exhaustive monomial comparison.

    Returns (passed, worst_error, witness_exponents); independent of the
    kernel energy path.
    """
    X = as_coords(points)
    norms = np.linalg.norm(X, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-9):
        raise ValueError("points must be unit vectors (1e-9)")
    worst, witness = worst_monomial_deviation(X, n)
    return worst <= tol, worst, witness


def residual_consistency(config):
    """Monomial-path deviation of a kernel-space configuration.

    Cross-checks the kernel residual against the independent certification
    route; returns the worst monomial deviation at the kernel's strength.
    """
    worst, _ = worst_monomial_deviation(config.coords, config.spec.n)
    return worst


# -- reference quadrature ----

def sphere_quadrature_grid(d, min_nodes=1_000_000):
    """Dense product quadrature grid on S^d, d <= 3: (points, weights).

    Gauss-Legendre in each colatitude factor, uniform in longitude;
    weights are normalized to total mass 1.  Exact for polynomials well
    beyond the degrees used here; accuracy for |P| integrands is set by
    the node count (error O(nodes^(-2/d)) near kinks).
    """
    if d == 1:
        M = int(min_nodes)
        phi = (np.arange(M) + 0.5) * (2.0 * math.pi / M)
        pts = np.column_stack([np.cos(phi), np.sin(phi)])
        return pts, np.full(M, 1.0 / M)
    if d == 2:
        na = max(2, math.ceil(math.sqrt(min_nodes)))
        t, wt = roots_legendre(na)
        phi = (np.arange(na) + 0.5) * (2.0 * math.pi / na)
        s = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
        pts = np.empty((na * na, 3))
        pts[:, 0] = np.outer(s, np.cos(phi)).ravel()
        pts[:, 1] = np.outer(s, np.sin(phi)).ravel()
        pts[:, 2] = np.repeat(t, na)
        w = np.repeat(wt * 0.5, na) / na
        return pts, w
    if d == 3:
        na = max(2, math.ceil(min_nodes ** (1.0 / 3.0)))
        u, wu = roots_legendre(na)
        theta = 0.5 * math.pi * (u + 1.0)  # colatitude on [0, pi]
        # sin^2 weight: the (pi/2) interval scale cancels the measure norm
        w1 = wu * np.sin(theta) ** 2
        sub_pts, sub_w = sphere_quadrature_grid(2, na * na)
        M2 = sub_pts.shape[0]
        pts = np.empty((na * M2, 4))
        pts[:, :3] = np.repeat(np.sin(theta), M2)[:, None] * np.tile(sub_pts, (na, 1))
        pts[:, 3] = np.repeat(np.cos(theta), M2)
        w = np.repeat(w1, M2) * np.tile(sub_w, na)
        return pts, w
    raise ValueError("reference quadrature unsupported for d > 3")


@dataclass
class MzReport:
    """Observed band of discrete/continuous L1 ratios over random polynomials."""

    degree: int
    trials: int
    min_ratio: float
    max_ratio: float
    passed: bool

    def to_dict(self):
        return {
            "degree": self.degree,
            "trials": self.trials,
            "min_ratio": self.min_ratio,
            "max_ratio": self.max_ratio,
            "pass": self.passed,
        }


def mz_check(points, partition, m, trials=100, seed=0, min_nodes=1_000_000):
    """Two-sided L1 sampling test: is the node average of |P| within
    (1/2, 3/2) times the true integral for random degree-<=m polynomials?

    Trials alternate between random kernel-span combinations and random
    monomial mixtures; the reference integral uses a dense product grid
    (consistency-checked against a coarser grid on the first trials).
    """
    X = as_coords(points)
    d = X.shape[1] - 1
    if partition is not None and partition.d != d:
        raise ValueError("partition dimension does not match the points")
    if m < 1:
        raise ValueError("polynomial degree m must be >= 1")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    grid, gw = sphere_quadrature_grid(d, min_nodes)
    coarse = sphere_quadrature_grid(d, max(4096, min_nodes // 4))
    spec_m = make_kernel(d, m)
    exponent_pool = list(monomial_exponents(d, m, 0)) if d <= MAX_MONOMIAL_DIM else None

    lo = math.inf
    hi = -math.inf
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        if trial % 2 == 0 or exponent_pool is None:
            evaluate = _random_kernel_span(spec_m, d, rng)
        else:
            evaluate = _random_monomial_mixture(exponent_pool, d, rng)
        reference = float(np.dot(gw, np.abs(evaluate(grid))))
        if trial < 2:
            check = float(np.dot(coarse[1], np.abs(evaluate(coarse[0]))))
            if abs(check - reference) > 1e-3 * max(reference, 1e-12):
                raise ArithmeticError("reference quadrature failed its grid consistency check")
        discrete = float(np.mean(np.abs(evaluate(X))))
        ratio = discrete / reference
        lo = min(lo, ratio)
        hi = max(hi, ratio)
    return MzReport(degree=m, trials=trials, min_ratio=lo, max_ratio=hi,
                    passed=(0.5 < lo and hi < 1.5))


def _random_kernel_span(spec_m, d, rng, centers=8):
    Z = rng.standard_normal((centers, d + 1))
    Z /= np.linalg.norm(Z, axis=1)[:, None]
    c = rng.standard_normal(centers)
    c /= np.linalg.norm(c)

    def evaluate(Y):
        T = np.clip(Y @ Z.T, -1.0, 1.0)
        return gw_eval(spec_m, T) @ c

    return evaluate


def _random_monomial_mixture(exponent_pool, d, rng, terms=10):
    idx = rng.choice(len(exponent_pool), size=min(terms, len(exponent_pool)), replace=False)
    chosen = [exponent_pool[i] for i in idx]
    c = rng.standard_normal(len(chosen))
    c /= np.linalg.norm(c)

    def evaluate(Y):
        out = np.zeros(Y.shape[0])
        for coef, a in zip(c, chosen):
            vals = np.ones(Y.shape[0])
            for col, e in enumerate(a):
                if e:
                    vals = vals * _int_power(Y[:, col], e)
            out += coef * vals
        return out

    return evaluate


def _int_power(base, e):
    """base**e by binary exponentiation (cheaper than np.power on big grids)."""
    result = None
    square = base
    while e:
        if e & 1:
            result = square if result is None else result * square
        e >>= 1
        if e:
            square = square * square
    return result


class SamplingEnergyReport(NamedTuple):
    mean_energy: float
    bound: float
    passed: bool
    cross_mean: float
    cross_stderr: float


def sampling_energy_check(spec, partition, trials=200, seed=0):
    """Monte Carlo check of the one-point-per-region averaging bound.

    Draws each point uniformly in its region, `trials` times; passes when
    the mean energy stays within the predicted bound (plus 3/sqrt(trials)
    statistical slack).  Each trial also pairs two independent draws to
    estimate the unconstrained double integral of the kernel, whose exact
    value is zero (the kernel is mean-free degree by degree).
    """
    if trials < 50:
        raise ValueError("trials must be >= 50 for a stable mean")
    N = partition.N
    bound = initial_energy_bound(spec, partition)
    energies = np.empty(trials)
    cross = np.empty(trials)
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        X = np.stack([partition.regions[i].sample(rng).coords for i in range(N)])
        Y = np.stack([partition.regions[i].sample(rng).coords for i in range(N)])
        energies[trial] = _energy_raw(spec, X)
        cross[trial] = float(np.mean(gw_eval(spec, np.clip(X @ Y.T, -1.0, 1.0))))
    mean_energy = float(np.mean(energies))
    cross_mean = float(np.mean(cross))
    cross_stderr = float(np.std(cross, ddof=1) / math.sqrt(trials))
    passed = mean_energy <= bound * (1.0 + 3.0 / math.sqrt(trials))
    return SamplingEnergyReport(mean_energy, bound, passed, cross_mean, cross_stderr)
