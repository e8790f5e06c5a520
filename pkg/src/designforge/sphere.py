"""Points on S^d, tangent vectors, geodesics, and equal-area partitions.

The partition construction is recursive and zonal: two polar caps plus
collars, each collar split by partitioning the cross-section sphere
S^(d-1) with the same algorithm.  Region areas are then analytically
exact products of cap-area differences, and region diameters admit
analytic upper bounds (tight for caps and full bands).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betainc, betaincinv, gammaln

UNIT_TOL = 1e-12
_TANGENT_TOL = 1e-10
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class UnitPoint:
    """A point on S^d stored as a unit vector in R^(d+1)."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.ndim != 1 or c.size < 2:
            raise ValueError("coords must be a vector of length d+1 >= 2")
        if abs(np.linalg.norm(c) - 1.0) > UNIT_TOL:
            raise ValueError("coords are not unit length")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coords", c)

    @property
    def d(self):
        return self.coords.size - 1


@dataclass(frozen=True, eq=False)
class TangentVector:
    """A vector attached to a base point and orthogonal to it."""

    base: UnitPoint
    dir: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.dir, dtype=float)
        if v.shape != self.base.coords.shape:
            raise ValueError("dir must match the base point dimension")
        if abs(float(v @ self.base.coords)) > _TANGENT_TOL * max(np.linalg.norm(v), 1e-300):
            raise ValueError("dir is not tangential at base")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "dir", v)

    @property
    def norm(self):
        return float(np.linalg.norm(self.dir))


def normalize(v):
    """Scale a nonzero vector to unit length."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("degenerate direction")
    return UnitPoint(v / n)


def tangent_project(x, v):
    """Project v onto the tangent space at x: v - (v,x) x."""
    base = x if isinstance(x, UnitPoint) else UnitPoint(np.asarray(x, dtype=float))
    v = np.asarray(v, dtype=float)
    d = v - (v @ base.coords) * base.coords
    # one re-orthogonalization pass keeps the residual at rounding level
    d = d - (d @ base.coords) * base.coords
    return TangentVector(base, d)


def geodesic_step(x, v, t):
    """Move from x along the great circle with tangent velocity v for time t.

    Arc length traveled is |v| * t; zero velocity returns x unchanged.
    """
    base = x.coords if isinstance(x, UnitPoint) else np.asarray(x, dtype=float)
    vel = v.dir if isinstance(v, TangentVector) else np.asarray(v, dtype=float)
    out = _geodesic_rows(base[None, :], vel[None, :], t)[0]
    return UnitPoint(out)


def _geodesic_rows(X, V, t):
    """Vectorized geodesic motion for row-stacked points and velocities."""
    speeds = np.linalg.norm(V, axis=1)
    moving = speeds > 0.0
    out = X.copy()
    if np.any(moving):
        s = speeds[moving]
        ang = s * t
        U = V[moving] / s[:, None]
        out[moving] = X[moving] * np.cos(ang)[:, None] + U * np.sin(ang)[:, None]
        norms = np.linalg.norm(out[moving], axis=1)
        out[moving] /= norms[:, None]
    return out


def random_point(d, rng):
    """Uniform point on S^d (normalized Gaussian vector)."""
    return UnitPoint(_random_unit(d, rng))


def _random_unit(d, rng):
    while True:
        g = rng.standard_normal(d + 1)
        n = np.linalg.norm(g)
        if n > 0.0:
            return g / n


def as_coords(points):
    """Coerce UnitPoints / array-likes into an (N, d+1) float array."""
    if isinstance(points, np.ndarray):
        a = np.asarray(points, dtype=float)
    elif len(points) and isinstance(points[0], UnitPoint):
        a = np.stack([p.coords for p in points])
    else:
        a = np.asarray(points, dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2 or a.shape[1] < 2:
        raise ValueError("expected an (N, d+1) array of points")
    return a


# -- cap geometry ----

def cap_area_fraction(d, theta):
    """Normalized area of the cap {colatitude <= theta} on S^d."""
    if theta <= 0.0:
        return 0.0
    if theta >= math.pi:
        return 1.0
    if d == 1:
        return theta / math.pi
    if theta <= math.pi / 2.0:
        return 0.5 * float(betainc(d / 2.0, 0.5, math.sin(theta) ** 2))
    return 1.0 - cap_area_fraction(d, math.pi - theta)


def cap_colatitude(d, fraction):
    """Inverse of cap_area_fraction in the fraction argument."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("area fraction must lie in [0, 1]")
    if fraction == 0.0:
        return 0.0
    if fraction == 1.0:
        return math.pi
    if d == 1:
        return fraction * math.pi
    if fraction > 0.5:
        return math.pi - cap_colatitude(d, 1.0 - fraction)
    s2 = float(betaincinv(d / 2.0, 0.5, 2.0 * fraction))
    return math.asin(min(1.0, math.sqrt(s2)))


def sphere_surface_area(d):
    """Unnormalized surface measure of S^d."""
    return 2.0 * math.pi ** ((d + 1) / 2.0) / math.exp(gammaln((d + 1) / 2.0))


# -- regions and partitions ----

@dataclass(frozen=True)
class Region:
    """Nested zonal bounds: levels[j] constrains the sphere of dim d - j.

    On a sphere of dimension m >= 2 a level is a colatitude interval; on
    the circle (m = 1) it is a longitude interval in [0, 2*pi].  Missing
    levels mean the full cross-section.  Intervals are half-open [lo, hi)
    except when hi reaches the domain end (pi or 2*pi), which is closed.
    """

    d: int
    levels: tuple

    def area_fraction(self):
        frac = 1.0
        m = self.d
        for lo, hi in self.levels:
            if m == 1:
                frac *= (hi - lo) / TWO_PI
            else:
                frac *= cap_area_fraction(m, hi) - cap_area_fraction(m, lo)
            m -= 1
        return frac

    def diameter_bound(self):
        return _diameter_bound(self.levels, self.d)

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        m = self.d
        for lo, hi in self.levels:
            if m == 1:
                phi = math.atan2(x[1], x[0]) % TWO_PI
                if not (lo <= phi < hi or (hi >= TWO_PI and phi >= lo)):
                    return False
                return True
            theta = math.acos(max(-1.0, min(1.0, x[m] / np.linalg.norm(x))))
            closed = hi >= math.pi
            if not (lo <= theta and (theta < hi or (closed and theta <= hi))):
                return False
            s = np.linalg.norm(x[:m])
            if s == 0.0:
                return True
            x = x[:m] / s
            m -= 1
        return True

    def center(self):
        return UnitPoint(_center_coords(self.levels, self.d))

    def sample(self, rng):
        return UnitPoint(_sample_coords(self.levels, self.d, rng))


def _diameter_bound(levels, m):
    if not levels:
        return 2.0
    lo, hi = levels[0]
    if m == 1:
        width = min(hi - lo, math.pi)
        return 2.0 * math.sin(width / 2.0)
    if len(levels) == 1:
        # full cross-section band: exact diameter 2*sin(s/2) with
        # s the admissible colatitude sum closest to pi
        s = min(max(math.pi, 2.0 * lo), 2.0 * hi)
        return 2.0 * math.sin(s / 2.0)
    sub = _diameter_bound(levels[1:], m - 1)
    if lo <= math.pi / 2.0 <= hi:
        smax = 1.0
    else:
        smax = max(math.sin(lo), math.sin(hi))
    bound = math.sqrt(4.0 * math.sin((hi - lo) / 2.0) ** 2 + (smax * sub) ** 2)
    return min(bound, 2.0)


def _center_coords(levels, m):
    if not levels:
        out = np.zeros(m + 1)
        out[m] = 1.0
        return out
    lo, hi = levels[0]
    if m == 1:
        phi = 0.5 * (lo + hi)
        return np.array([math.cos(phi), math.sin(phi)])
    if lo == 0.0:
        theta = 0.0
    elif hi >= math.pi:
        theta = math.pi
    else:
        theta = 0.5 * (lo + hi)
    sub = _center_coords(levels[1:], m - 1)
    return np.concatenate([math.sin(theta) * sub, [math.cos(theta)]])


def _sample_coords(levels, m, rng):
    if not levels:
        return _random_unit(m, rng)
    lo, hi = levels[0]
    if m == 1:
        phi = lo + rng.random() * (hi - lo)
        return np.array([math.cos(phi), math.sin(phi)])
    vlo = cap_area_fraction(m, lo)
    vhi = cap_area_fraction(m, hi)
    theta = cap_colatitude(m, vlo + rng.random() * (vhi - vlo))
    sub = _sample_coords(levels[1:], m - 1, rng)
    return np.concatenate([math.sin(theta) * sub, [math.cos(theta)]])


@dataclass(frozen=True)
class Partition:
    """Area-regular partition of S^d into N regions of area 1/N each."""

    d: int
    regions: tuple
    centers: np.ndarray = field(repr=False)
    region_diameters: np.ndarray = field(repr=False)
    areas: np.ndarray = field(repr=False)

    @property
    def N(self):
        return len(self.regions)

    @property
    def norm(self):
        """Maximal region diameter (analytic upper bound)."""
        return float(np.max(self.region_diameters))

    def to_dict(self):
        return {
            "d": self.d,
            "N": self.N,
            "centers": [list(row) for row in self.centers],
            "norms": list(self.region_diameters),
            "areas": list(self.areas),
            "bounds": [[list(iv) for iv in r.levels] for r in self.regions],
        }

    @classmethod
    def from_regions(cls, d, regions):
        regions = tuple(regions)
        centers = np.stack([r.center().coords for r in regions])
        diams = np.array([r.diameter_bound() for r in regions])
        areas = np.array([r.area_fraction() for r in regions])
        return cls(d, regions, centers, diams, areas)

    @classmethod
    def from_dict(cls, data):
        d = int(data["d"])
        regions = [Region(d, tuple(tuple(iv) for iv in b)) for b in data["bounds"]]
        return cls.from_regions(d, regions)


def eq_partition(d, N):
    """Recursive zonal equal-area partition of S^d into N regions.

    Two polar caps of area 1/N plus collars whose cross-sections are
    partitioned recursively; collar boundaries are placed by inverting the
    cap-area function at exact cumulative fractions, so every region has
    area 1/N up to rounding in that inversion.
    """
    if d < 1:
        raise ValueError("sphere dimension d must be >= 1")
    if N < 1:
        raise ValueError("region count N must be >= 1")
    return Partition.from_regions(d, _eq_regions(d, N))


def _eq_regions(d, N):
    if N == 1:
        return [Region(d, ())]
    if d == 1:
        bounds = [TWO_PI * j / N for j in range(N)] + [TWO_PI]
        return [Region(1, ((bounds[j], bounds[j + 1]),)) for j in range(N)]
    if N == 2:
        half = math.pi / 2.0
        return [Region(d, ((0.0, half),)), Region(d, ((half, math.pi),))]

    theta_c = cap_colatitude(d, 1.0 / N)
    span = math.pi - 2.0 * theta_c
    delta_ideal = (sphere_surface_area(d) / N) ** (1.0 / d)
    n_collars = max(1, round(span / delta_ideal))
    delta_fit = span / n_collars

    # ideal region counts per collar, rounded with a running remainder
    counts = []
    remainder = 0.0
    prev_v = cap_area_fraction(d, theta_c)
    for i in range(1, n_collars + 1):
        v = cap_area_fraction(d, theta_c + i * delta_fit) if i < n_collars else 1.0 - 1.0 / N
        ideal = N * (v - prev_v) + remainder
        m_i = max(0, round(ideal))
        remainder = ideal - m_i
        counts.append(m_i)
        prev_v = v
    counts[-1] += (N - 2) - sum(counts)
    if counts[-1] < 0:
        # push the deficit into the largest collar
        deficit = counts[-1]
        counts[-1] = 0
        counts[int(np.argmax(counts))] += deficit

    regions = [Region(d, ((0.0, theta_c),))]
    cumulative = 1
    for m_i in counts:
        if m_i == 0:
            continue
        lo = cap_colatitude(d, cumulative / N)
        cumulative += m_i
        hi = cap_colatitude(d, cumulative / N)
        for sub in _eq_regions(d - 1, m_i):
            regions.append(Region(d, ((lo, hi),) + sub.levels))
    regions.append(Region(d, ((cap_colatitude(d, (N - 1.0) / N), math.pi),)))
    return regions


def partition_norm(partition):
    """Maximal region diameter of a partition (upper bound, tight for caps)."""
    return partition.norm


def region_center(partition, i):
    """Representative point of region i (the pole for polar caps)."""
    _check_index(partition, i)
    return partition.regions[i].center()


def region_sample(partition, i, rng):
    """Uniform sample from region i, drawn by inverse-CDF at every level."""
    _check_index(partition, i)
    return partition.regions[i].sample(rng)


def _check_index(partition, i):
    if not 0 <= i < partition.N:
        raise IndexError(f"region index {i} out of range for N={partition.N}")
