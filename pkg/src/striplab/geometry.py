"""Cylinder geometry, strip patterns on the lateral surface, and regime classification.

The lateral surface of the cylinder carries N narrow rings ("strips") on
which the Dirichlet condition is imposed; the rest is Neumann.  Strip j is
centered at height eps*pi*(j+1/2) with eps = H/(pi*N), extends eps*a_j(s)
below and eps*b_j(s) above the center, and both widths must stay strictly
inside (0, pi/2) so that strips never touch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConstraintViolation, IncompatiblePatterns, UnsupportedLaw
from .rng import unit_floats

HALF_PI = math.pi / 2.0

DEFAULT_GRID_SAMPLES = 256
MIN_SAMPLES_PER_OSCILLATION = 16


# ---------------------------------------------------------------------------
# cross sections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Disk:
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ConstraintViolation(f"disk radius must be positive, got {self.radius}")

    @property
    def boundary_length(self) -> float:
        return 2.0 * math.pi * self.radius

    def boundary_point(self, s):
        """Point on the circle at arclength s (origin at angle 0, counterclockwise)."""
        theta = np.asarray(s, dtype=float) / self.radius
        return np.stack([self.radius * np.cos(theta), self.radius * np.sin(theta)], axis=-1)


@dataclass(frozen=True)
class Polygon:
    """Simple counterclockwise polygon; vertices shape (n, 2)."""

    vertices: np.ndarray

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 2 or verts.shape[0] < 3:
            raise ConstraintViolation("polygon needs at least 3 planar vertices")
        verts = verts.copy()
        verts.setflags(write=False)
        object.__setattr__(self, "vertices", verts)
        if self.signed_area() <= 0:
            raise ConstraintViolation("polygon vertices must be ordered counterclockwise")
        if _polygon_self_intersects(verts):
            raise ConstraintViolation("polygon must be simple (non-self-intersecting)")

    def signed_area(self) -> float:
        v = self.vertices
        x, y = v[:, 0], v[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    @property
    def edge_lengths(self) -> np.ndarray:
        v = self.vertices
        return np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)

    @property
    def boundary_length(self) -> float:
        return float(self.edge_lengths.sum())

    def boundary_point(self, s):
        """Point on the boundary at arclength s from vertex 0, counterclockwise."""
        s = np.atleast_1d(np.asarray(s, dtype=float)) % self.boundary_length
        cum = np.concatenate([[0.0], np.cumsum(self.edge_lengths)])
        idx = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(self.vertices) - 1)
        v = self.vertices
        nxt = np.roll(v, -1, axis=0)
        t = (s - cum[idx]) / self.edge_lengths[idx]
        return v[idx] + t[:, None] * (nxt[idx] - v[idx])


CrossSection = Disk | Polygon


def _polygon_self_intersects(verts: np.ndarray) -> bool:
    n = len(verts)
    segs = [(verts[i], verts[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue  # shared vertex
            if _segments_cross(*segs[i], *segs[j]):
                return True
    return False


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    return d1 * d2 < 0 and d3 * d4 < 0


@dataclass(frozen=True)
class CylinderGeometry:
    """Cylinder over the cross section; the Neumann basis sits at x3 = 0 and the
    Dirichlet basis at x3 = H (any consistent choice is isometric by reflection)."""

    cross_section: CrossSection
    height: float

    def __post_init__(self):
        if self.height <= 0:
            raise ConstraintViolation(f"cylinder height must be positive, got {self.height}")

    @property
    def boundary_length(self) -> float:
        return self.cross_section.boundary_length


# ---------------------------------------------------------------------------
# width profiles
# ---------------------------------------------------------------------------

class WidthProfile:
    """Common behaviour for strip-width profiles a_j(s), b_j(s).

    A profile is known through its values on a uniform arclength grid
    (periodic, period = boundary length); between samples it is evaluated
    by linear interpolation.
    """

    def grid(self, boundary_length: float, samples: int = DEFAULT_GRID_SAMPLES) -> np.ndarray:
        samples = max(samples, self.min_samples(boundary_length))
        return np.linspace(0.0, boundary_length, samples, endpoint=False)

    def min_samples(self, boundary_length: float) -> int:
        return DEFAULT_GRID_SAMPLES

    def is_constant(self) -> bool:
        return False

    def values(self, s, boundary_length: float) -> np.ndarray:
        raise NotImplementedError


def _periodic_interp(s, period, samples):
    """Linear interpolation of uniformly spaced periodic samples."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    n = len(samples)
    pos = (s / period) * n % n
    i0 = np.floor(pos).astype(int) % n
    i1 = (i0 + 1) % n
    t = pos - np.floor(pos)
    return (1.0 - t) * samples[i0] + t * samples[i1]


@dataclass(frozen=True)
class Constant(WidthProfile):
    value: float

    def is_constant(self) -> bool:
        return True

    def values(self, s, boundary_length):
        return np.full(np.shape(np.atleast_1d(s)), self.value)


@dataclass(frozen=True)
class Modulated(WidthProfile):
    """scale * shape(s), with `shape` sampled uniformly over one boundary period."""

    shape: np.ndarray
    scale: float

    def __post_init__(self):
        arr = np.asarray(self.shape, dtype=float).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "shape", arr)

    def min_samples(self, boundary_length):
        return max(DEFAULT_GRID_SAMPLES, 2 * len(self.shape))

    def values(self, s, boundary_length):
        return self.scale * _periodic_interp(s, boundary_length, self.shape)


@dataclass(frozen=True)
class Oscillatory(WidthProfile):
    """scale * shape(s / oscillation_period); `shape` is sampled over one unit period.

    With oscillation_period -> 0 this models fast oscillation; evaluation grids
    are densified so every oscillation is seen by at least
    MIN_SAMPLES_PER_OSCILLATION samples.
    """

    shape: np.ndarray
    scale: float
    oscillation_period: float

    def __post_init__(self):
        arr = np.asarray(self.shape, dtype=float).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "shape", arr)
        if self.oscillation_period <= 0:
            raise ConstraintViolation("oscillation period must be positive")

    def min_samples(self, boundary_length):
        per_period = MIN_SAMPLES_PER_OSCILLATION * max(1, len(self.shape) // 4)
        n_osc = boundary_length / self.oscillation_period
        return max(DEFAULT_GRID_SAMPLES, int(math.ceil(per_period * n_osc)))

    def values(self, s, boundary_length):
        arg = np.atleast_1d(np.asarray(s, dtype=float)) / self.oscillation_period
        return self.scale * _periodic_interp(arg, 1.0, self.shape)


@dataclass(frozen=True)
class RandomBounded(WidthProfile):
    """Widths drawn uniformly from [lower, upper] at each grid sample.

    Draws come from an explicit splitmix64 stream so rebuilding with the
    same seed reproduces the sampled widths bit for bit.
    """

    lower: float
    upper: float
    seed: int
    samples: int = DEFAULT_GRID_SAMPLES

    def __post_init__(self):
        if not (0.0 < self.lower <= self.upper < HALF_PI):
            raise ConstraintViolation(
                f"random width bounds must satisfy 0 < lower <= upper < pi/2, "
                f"got [{self.lower}, {self.upper}]"
            )
        draws = self.lower + (self.upper - self.lower) * unit_floats(self.seed, self.samples)
        draws.setflags(write=False)
        object.__setattr__(self, "_draws", draws)

    def min_samples(self, boundary_length):
        return self.samples

    def values(self, s, boundary_length):
        return _periodic_interp(s, boundary_length, self._draws)


# ---------------------------------------------------------------------------
# strip patterns
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StripPattern:
    """N Dirichlet strips on the lateral surface with per-strip width profiles.

    `lower_profiles[j]` gives the downward half-width a_j(s) of strip j (in
    units of eps), `upper_profiles[j]` the upward half-width b_j(s).
    """

    geometry: CylinderGeometry
    count: int
    lower_profiles: tuple
    upper_profiles: tuple
    sample_grid: np.ndarray = field(repr=False)

    @property
    def eps(self) -> float:
        """Derived small parameter: H / (pi N); never stored independently."""
        return self.geometry.height / (math.pi * self.count)

    def centers(self) -> np.ndarray:
        return self.eps * math.pi * (np.arange(self.count) + 0.5)

    def widths_on_grid(self):
        """Sampled half-widths: arrays (N, len(grid)) for lower and upper."""
        L = self.geometry.boundary_length
        lower = np.stack([p.values(self.sample_grid, L) for p in self.lower_profiles])
        upper = np.stack([p.values(self.sample_grid, L) for p in self.upper_profiles])
        return lower, upper

    def is_s_independent(self) -> bool:
        return all(p.is_constant() for p in self.lower_profiles + self.upper_profiles)

    def contains(self, s, z) -> np.ndarray:
        """Membership of lateral points (s, z) in the strip set."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        z = np.atleast_1d(np.asarray(z, dtype=float))
        eps = self.eps
        period = eps * math.pi
        j = np.clip(np.floor(z / period).astype(int), 0, self.count - 1)
        L = self.geometry.boundary_length
        out = np.zeros(s.shape, dtype=bool)
        for jj in np.unique(j):
            mask = j == jj
            a = self.lower_profiles[jj].values(s[mask], L)
            b = self.upper_profiles[jj].values(s[mask], L)
            c = period * (jj + 0.5)
            out[mask] = (z[mask] > c - eps * a) & (z[mask] < c + eps * b)
        return out

    def measure(self) -> float:
        """Lateral-surface area of the strip set (trapezoid rule on the sample grid,
        exact for the piecewise-linear profiles)."""
        lower, upper = self.widths_on_grid()
        L = self.geometry.boundary_length
        ds = L / len(self.sample_grid)
        return float(self.eps * np.sum(lower + upper) * ds)


def build_pattern(geometry: CylinderGeometry, count: int,
                  lower_profiles: Sequence[WidthProfile],
                  upper_profiles: Sequence[WidthProfile],
                  grid_samples: Optional[int] = None) -> StripPattern:
    """Validate profiles against the admissible range and assemble a pattern.

    Raises ConstraintViolation naming the offending strip index and arclength
    location if any sampled width leaves (0, pi/2).
    """
    if count < 1:
        raise ConstraintViolation(f"strip count must be a positive integer, got {count}")
    lower_profiles = tuple(lower_profiles)
    upper_profiles = tuple(upper_profiles)
    if len(lower_profiles) != count or len(upper_profiles) != count:
        raise ConstraintViolation(
            f"need {count} lower and upper profiles, got {len(lower_profiles)} and {len(upper_profiles)}"
        )
    L = geometry.boundary_length
    samples = grid_samples or DEFAULT_GRID_SAMPLES
    for p in lower_profiles + upper_profiles:
        samples = max(samples, p.min_samples(L))
    grid = np.linspace(0.0, L, samples, endpoint=False)
    for j in range(count):
        for name, prof in (("lower", lower_profiles[j]), ("upper", upper_profiles[j])):
            vals = prof.values(grid, L)
            bad = np.nonzero((vals <= 0.0) | (vals >= HALF_PI))[0]
            if len(bad):
                i = bad[0]
                raise ConstraintViolation(
                    f"strip {j}: {name} width {vals[i]:.6g} at s={grid[i]:.6g} "
                    f"outside the open interval (0, pi/2)"
                )
    grid.setflags(write=False)
    return StripPattern(geometry, count, lower_profiles, upper_profiles, grid)


def strip_intervals(pattern: StripPattern, s: float) -> list[tuple[float, float]]:
    """Open z-intervals of the N strips at arclength s, in ascending order."""
    L = pattern.geometry.boundary_length
    if not (0.0 <= s < L):
        raise ConstraintViolation(f"arclength s={s} outside [0, {L})")
    eps = pattern.eps
    out = []
    for j in range(pattern.count):
        c = eps * math.pi * (j + 0.5)
        a = float(pattern.lower_profiles[j].values(s, L)[0])
        b = float(pattern.upper_profiles[j].values(s, L)[0])
        out.append((c - eps * a, c + eps * b))
    return out


def _check_compatible(p1: StripPattern, p2: StripPattern):
    if p1.geometry != p2.geometry or p1.count != p2.count:
        raise IncompatiblePatterns("patterns must share geometry and strip count")


def pattern_subset(p1: StripPattern, p2: StripPattern) -> bool:
    """True iff every strip interval of p1 is contained in p2's, checked on the
    union of both sampling grids (sub-grid violations are undetected)."""
    _check_compatible(p1, p2)
    L = p1.geometry.boundary_length
    grid = np.union1d(p1.sample_grid, p2.sample_grid)
    for j in range(p1.count):
        a1 = p1.lower_profiles[j].values(grid, L)
        a2 = p2.lower_profiles[j].values(grid, L)
        b1 = p1.upper_profiles[j].values(grid, L)
        b2 = p2.upper_profiles[j].values(grid, L)
        if np.any(a1 > a2) or np.any(b1 > b2):
            return False
    return True


def bounding_constant_patterns(pattern: StripPattern) -> tuple[StripPattern, StripPattern]:
    """Constant-width comparison patterns bracketing `pattern` from inside and outside.

    The inner pattern uses the infimum of all sampled widths (symmetric on all
    strips), the outer the supremum; both then satisfy
    pattern_subset(inner, pattern) and pattern_subset(pattern, outer).
    """
    lower, upper = pattern.widths_on_grid()
    w_min = float(min(lower.min(), upper.min()))
    w_max = float(max(lower.max(), upper.max()))
    inner = build_pattern(pattern.geometry, pattern.count,
                          [Constant(w_min)] * pattern.count,
                          [Constant(w_min)] * pattern.count,
                          grid_samples=len(pattern.sample_grid))
    outer = build_pattern(pattern.geometry, pattern.count,
                          [Constant(w_max)] * pattern.count,
                          [Constant(w_max)] * pattern.count,
                          grid_samples=len(pattern.sample_grid))
    return inner, outer


# ---------------------------------------------------------------------------
# width-scale laws and regime classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WidthLaw:
    """Symbolic width-scale law from the supported family.

    kind "power":        eta(eps) = eps**p,            p > 0
    kind "exponential":  eta(eps) = exp(-c / eps**q),  c > 0, q > 0
    kind "constant":     eta(eps) = value in (0, pi/2)
    """

    kind: str
    p: float = 0.0
    c: float = 0.0
    q: float = 0.0
    value: float = 0.0

    def __post_init__(self):
        if self.kind == "power":
            if self.p <= 0:
                raise UnsupportedLaw("power law needs p > 0")
        elif self.kind == "exponential":
            if self.c <= 0 or self.q <= 0:
                raise UnsupportedLaw("exponential law needs c > 0 and q > 0")
        elif self.kind == "constant":
            if not (0.0 < self.value < HALF_PI):
                raise UnsupportedLaw("constant law needs a value in (0, pi/2)")
        else:
            raise UnsupportedLaw(
                f"unsupported width law {self.kind!r}; supported: power, exponential, constant "
                f"(classify manually otherwise)"
            )

    def __call__(self, eps: float) -> float:
        if self.kind == "power":
            return eps**self.p
        if self.kind == "exponential":
            return math.exp(-self.c / eps**self.q)
        return self.value

    def log_value(self, eps: float) -> float:
        """ln eta(eps), computed without underflow for exponential laws."""
        if self.kind == "power":
            return self.p * math.log(eps)
        if self.kind == "exponential":
            return -self.c / eps**self.q
        return math.log(self.value)

    def to_config(self) -> dict:
        d = {"law": self.kind}
        if self.kind == "power":
            d["p"] = self.p
        elif self.kind == "exponential":
            d["c"] = self.c
            d["q"] = self.q
        else:
            d["value"] = self.value
        return d

    @staticmethod
    def from_config(d: dict) -> "WidthLaw":
        kind = d.get("law")
        if kind == "power":
            return WidthLaw("power", p=float(d["p"]))
        if kind == "exponential":
            return WidthLaw("exponential", c=float(d["c"]), q=float(d["q"]))
        if kind == "constant":
            return WidthLaw("constant", value=float(d["value"]))
        raise UnsupportedLaw(f"unsupported width law {kind!r}")


DIRICHLET_LIMIT = "DirichletLimit"
CRITICAL_ROBIN = "CriticalRobin"
NEUMANN_LIMIT = "NeumannLimit"


@dataclass(frozen=True)
class RegimeParameters:
    """Classified homogenization regime with its rate-scale closures.

    rate_scale is the theorem's convergence gauge: -A - 1/(eps ln eta) in the
    critical regime, -1/(eps ln eta) in the Neumann regime; undefined (None)
    in the Dirichlet regime, whose gauge is eps*(|ln eta| + 1).
    inner_rate_scale is the analogous gauge built from the inner width
    eta0*eta (critical regime only).
    """

    regime: str
    width_law: WidthLaw
    inner_law: Optional[WidthLaw]
    robin_coefficient: float
    width_scale: Callable[[float], float]
    inner_scale: Optional[Callable[[float], float]]
    rate_scale: Optional[Callable[[float], float]]
    inner_rate_scale: Optional[Callable[[float], float]]


def classify_regime(width_law: WidthLaw, inner_law: Optional[WidthLaw] = None,
                    robin_hint: Optional[float] = None) -> RegimeParameters:
    """Classify the limit regime by symbolic limit evaluation on the law family.

    DirichletLimit:  eps*ln eta -> 0
    CriticalRobin:   1/(eps*ln eta) -> -A (A > 0); needs inner_law with eps*ln eta0 -> 0
    NeumannLimit:    1/(eps*ln eta) -> 0
    """
    # limit of eps*ln(eta(eps)) as eps -> 0 on the supported family
    if width_law.kind in ("power", "constant"):
        regime = DIRICHLET_LIMIT           # eps*ln eta -> 0 in both cases
        A = 0.0
    elif width_law.kind == "exponential":
        if width_law.q < 1.0:
            regime = DIRICHLET_LIMIT       # eps*ln eta = -c*eps**(1-q) -> 0
            A = 0.0
        elif width_law.q == 1.0:
            regime = CRITICAL_ROBIN        # eps*ln eta = -c
            A = 1.0 / width_law.c
        else:
            regime = NEUMANN_LIMIT         # eps*ln eta -> -inf
            A = 0.0
    else:  # pragma: no cover - WidthLaw constructor rejects other kinds
        raise UnsupportedLaw(f"unsupported width law {width_law.kind!r}")

    if robin_hint is not None and regime == CRITICAL_ROBIN:
        if not math.isclose(robin_hint, A, rel_tol=1e-12):
            raise UnsupportedLaw(
                f"law implies Robin coefficient {A}, inconsistent with hint {robin_hint}"
            )

    if regime == CRITICAL_ROBIN:
        if inner_law is None:
            inner_law = WidthLaw("constant", value=1.0 - 1e-12)  # trivial eta0 ~ 1
        if inner_law.kind == "exponential" and inner_law.q >= 1.0:
            raise UnsupportedLaw("inner law must satisfy eps*ln(eta0) -> 0")

    def width_scale(eps: float) -> float:
        return width_law(eps)

    inner_scale = None
    rate_scale = None
    inner_rate_scale = None
    if regime == CRITICAL_ROBIN:
        inner_scale = lambda eps: inner_law(eps)

        def rate_scale(eps: float, _A=A) -> float:
            return -_A - 1.0 / (eps * width_law.log_value(eps))

        def inner_rate_scale(eps: float, _A=A) -> float:
            log_inner = width_law.log_value(eps) + inner_law.log_value(eps)
            return -_A - 1.0 / (eps * log_inner)

    elif regime == NEUMANN_LIMIT:

        def rate_scale(eps: float) -> float:
            return -1.0 / (eps * width_law.log_value(eps))

    return RegimeParameters(
        regime=regime,
        width_law=width_law,
        inner_law=inner_law if regime == CRITICAL_ROBIN else None,
        robin_coefficient=A,
        width_scale=width_scale,
        inner_scale=inner_scale,
        rate_scale=rate_scale,
        inner_rate_scale=inner_rate_scale,
    )


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def profile_to_config(profile: WidthProfile) -> dict:
    if isinstance(profile, Constant):
        return {"form": "constant", "value": profile.value}
    if isinstance(profile, Modulated):
        return {"form": "modulated", "shape": profile.shape.tolist(), "scale": profile.scale}
    if isinstance(profile, Oscillatory):
        return {"form": "oscillatory", "shape": profile.shape.tolist(),
                "scale": profile.scale, "oscillation_period": profile.oscillation_period}
    if isinstance(profile, RandomBounded):
        return {"form": "random", "lower": profile.lower, "upper": profile.upper,
                "seed": profile.seed, "samples": profile.samples}
    raise ConstraintViolation(f"unknown profile type {type(profile).__name__}")


def profile_from_config(d: dict) -> WidthProfile:
    form = d.get("form")
    if form == "constant":
        return Constant(float(d["value"]))
    if form == "modulated":
        return Modulated(np.asarray(d["shape"], dtype=float), float(d["scale"]))
    if form == "oscillatory":
        return Oscillatory(np.asarray(d["shape"], dtype=float), float(d["scale"]),
                           float(d["oscillation_period"]))
    if form == "random":
        return RandomBounded(float(d["lower"]), float(d["upper"]), int(d["seed"]),
                             int(d.get("samples", DEFAULT_GRID_SAMPLES)))
    raise ConstraintViolation(f"unknown profile form {form!r}")


def cross_section_to_config(cs: CrossSection) -> dict:
    if isinstance(cs, Disk):
        return {"kind": "disk", "radius": cs.radius}
    return {"kind": "polygon", "vertices": cs.vertices.tolist()}


def cross_section_from_config(d: dict) -> CrossSection:
    if d.get("kind") == "disk":
        return Disk(float(d["radius"]))
    if d.get("kind") == "polygon":
        return Polygon(np.asarray(d["vertices"], dtype=float))
    raise ConstraintViolation(f"unknown cross-section kind {d.get('kind')!r}")


def pattern_to_config(pattern: StripPattern) -> dict:
    return {
        "geometry": {
            "cross_section": cross_section_to_config(pattern.geometry.cross_section),
            "height": pattern.geometry.height,
        },
        "count": pattern.count,
        "lower_profiles": [profile_to_config(p) for p in pattern.lower_profiles],
        "upper_profiles": [profile_to_config(p) for p in pattern.upper_profiles],
        "grid_samples": len(pattern.sample_grid),
    }


def pattern_from_config(d: dict) -> StripPattern:
    geo = d["geometry"]
    geometry = CylinderGeometry(cross_section_from_config(geo["cross_section"]),
                                float(geo["height"]))
    return build_pattern(
        geometry,
        int(d["count"]),
        [profile_from_config(p) for p in d["lower_profiles"]],
        [profile_from_config(p) for p in d["upper_profiles"]],
        grid_samples=int(d.get("grid_samples") or DEFAULT_GRID_SAMPLES),
    )


def export_profiles_csv(pattern: StripPattern, path):
    """Write sampled widths as CSV with columns j, s, a, b."""
    L = pattern.geometry.boundary_length
    with open(path, "w") as f:
        f.write("j,s,a,b\n")
        for j in range(pattern.count):
            a = pattern.lower_profiles[j].values(pattern.sample_grid, L)
            b = pattern.upper_profiles[j].values(pattern.sample_grid, L)
            for s, aa, bb in zip(pattern.sample_grid, a, b):
                f.write(f"{j},{float(s)!r},{float(aa)!r},{float(bb)!r}\n")
