"""Homogenized limit spectra of the cylinder.

For a disk cross-section the limit problems separate: eigenvalues are
kappa_{n,m}^2 + ((2l+1)*pi/(2H))^2 where kappa are radial frequencies
(Bessel roots for a Dirichlet or Robin lateral condition) and the axial
factor encodes Neumann at the bottom basis, Dirichlet at the top.
For general cross-sections the limit spectra are computed by FEM.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import EigensolverError, StripLabError
from .geometry import CylinderGeometry, Disk

BESSEL_MAX_ORDER = 50
BESSEL_MAX_ARGUMENT = 500.0


class BesselDomainError(StripLabError):
    """Argument outside the documented validity window."""


# ---------------------------------------------------------------------------
# Bessel functions of the first kind
# ---------------------------------------------------------------------------

def _bessel_j_all(nmax: int, x: float) -> np.ndarray:
    """J_0(x)..J_nmax(x) by Miller's backward recurrence.

    Downward recurrence f_{k-1} = (2k/x) f_k - f_{k+1} from a start order
    well above max(nmax, x), normalized with J_0 + 2*sum_{m>=1} J_{2m} = 1.
    Absolute accuracy ~1e-12 on the documented window.
    """
    if x == 0.0:
        out = np.zeros(nmax + 1)
        out[0] = 1.0
        return out
    if x < 1e-6:
        # two-term ascending series; avoids extreme rescaling for tiny x
        out = np.zeros(nmax + 1)
        half = 0.5 * x
        term = 1.0
        for n in range(nmax + 1):
            out[n] = term * (1.0 - half * half / (n + 1.0))
            term *= half / (n + 1.0)
            if term == 0.0:
                break
        return out

    top = max(nmax, int(math.ceil(x)))
    start = top + int(12.0 * math.sqrt(top + 4)) + 30
    if start % 2 == 1:
        start += 1

    f_next = 0.0       # f_{k+1}
    f_curr = 1e-30     # f_k at k = start
    norm = 0.0         # accumulates f_0 + 2*sum f_{2m}
    out = np.zeros(nmax + 1)
    for k in range(start, 0, -1):
        f_prev = (2.0 * k / x) * f_curr - f_next
        f_next = f_curr
        f_curr = f_prev
        if k - 1 <= nmax:
            out[k - 1] = f_curr
        if (k - 1) % 2 == 0:
            norm += f_curr if k - 1 == 0 else 2.0 * f_curr
        if abs(f_curr) > 1e250:
            f_curr *= 1e-250
            f_next *= 1e-250
            norm *= 1e-250
            out *= 1e-250
    return out / norm


def bessel_j(n: int, x: float) -> float:
    """Bessel function J_n(x) on the window n <= 50, 0 <= x <= 500."""
    if not (0 <= n <= BESSEL_MAX_ORDER):
        raise BesselDomainError(f"order {n} outside [0, {BESSEL_MAX_ORDER}]")
    if not (0.0 <= x <= BESSEL_MAX_ARGUMENT):
        raise BesselDomainError(f"argument {x} outside [0, {BESSEL_MAX_ARGUMENT}]")
    return float(_bessel_j_all(n, float(x))[n])


def bessel_j_derivative(n: int, x: float) -> float:
    """J_n'(x) = (J_{n-1}(x) - J_{n+1}(x))/2, with J_{-1} = -J_1."""
    if not (0 <= n <= BESSEL_MAX_ORDER):
        raise BesselDomainError(f"order {n} outside [0, {BESSEL_MAX_ORDER}]")
    if not (0.0 <= x <= BESSEL_MAX_ARGUMENT):
        raise BesselDomainError(f"argument {x} outside [0, {BESSEL_MAX_ARGUMENT}]")
    vals = _bessel_j_all(n + 1, float(x))
    lower = -vals[1] if n == 0 else vals[n - 1]
    return 0.5 * float(lower - vals[n + 1])


# ---------------------------------------------------------------------------
# radial roots
# ---------------------------------------------------------------------------

def _bisect(f, lo: float, hi: float, rel_tol: float = 4e-16) -> float:
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise EigensolverError(
            f"no sign change on [{lo}, {hi}]; interlacing bracket table is wrong"
        )
    while hi - lo > rel_tol * max(1.0, abs(lo)):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if flo * fmid < 0.0:
            hi = mid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


@lru_cache(maxsize=None)
def _jn_zeros(n: int, count: int) -> tuple:
    """First `count` positive zeros of J_n, by scan + bisection.

    Consecutive zeros of J_n are more than 2.4 apart, so a unit scan step
    cannot skip one.
    """
    zeros = []
    x = max(0.05, float(n) * 0.5)
    f_prev = bessel_j(n, x)
    step = 1.0
    while len(zeros) < count:
        x_next = x + step
        if x_next > BESSEL_MAX_ARGUMENT:
            raise BesselDomainError(
                f"zero #{len(zeros)+1} of J_{n} lies beyond the argument window"
            )
        f_next = bessel_j(n, x_next)
        if f_prev == 0.0:
            zeros.append(x)
            f_prev = f_next
            x = x_next
            continue
        if f_prev * f_next < 0.0:
            zeros.append(_bisect(lambda t: bessel_j(n, t), x, x_next))
        x, f_prev = x_next, f_next
    return tuple(zeros)


@lru_cache(maxsize=None)
def _radial_roots_x(n: int, count: int, robin_ar) -> tuple:
    """Roots in x = kappa*R of the lateral condition, dimensionless form.

    robin_ar is None for Dirichlet (J_n(x) = 0) and the product A*R for a
    Robin condition x J_n'(x) + (A R) J_n(x) = 0; A*R = 0 is Neumann.
    The n = 0 Neumann case includes the constant radial mode x = 0.
    """
    if robin_ar is None:
        return _jn_zeros(n, count)

    def h(x):
        return x * bessel_j_derivative(n, x) + robin_ar * bessel_j(n, x)

    roots = []
    if robin_ar == 0.0 and n == 0:
        roots.append(0.0)
    if len(roots) >= count:
        return tuple(roots[:count])
    need = count - len(roots)
    # one root per interval between consecutive zeros of J_n, plus possibly
    # one in (0, j_{n,1}); h alternates sign at the zeros of J_n.
    zeros = _jn_zeros(n, need + 2)
    lo = 1e-3
    for m in range(need + 2):
        hi = zeros[m]
        if h(lo) * h(hi) < 0.0:
            roots.append(_bisect(h, lo, hi))
            if len(roots) >= count:
                return tuple(roots[:count])
        lo = hi
    raise EigensolverError(
        f"exhausted {need + 2} brackets finding {count} Robin roots for n={n}; "
        f"this indicates an interlacing-table bug"
    )


def radial_roots(n: int, count: int, radius: float = 1.0,
                 robin_coefficient: Optional[float] = None) -> list[float]:
    """First `count` radial frequencies kappa for angular mode n on a disk.

    robin_coefficient None selects the Dirichlet condition (kappa = j_{n,m}/R);
    a value A >= 0 selects (d/dnu + A) = 0 at r = R, i.e. the positive roots of
    kappa J_n'(kappa R) + A J_n(kappa R) = 0; A = 0 is Neumann, which for n = 0
    additionally contributes kappa = 0 (the constant radial mode).
    """
    if count < 1:
        raise EigensolverError("count must be >= 1")
    if robin_coefficient is not None and robin_coefficient < 0:
        raise EigensolverError("Robin coefficient must be nonnegative")
    key = None if robin_coefficient is None else float(robin_coefficient) * float(radius)
    xs = _radial_roots_x(n, count, key)
    return [x / radius for x in xs]


# ---------------------------------------------------------------------------
# closed-form limit spectra (disk)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LimitSpectrumRequest:
    geometry: CylinderGeometry
    k: int
    robin_coefficient: Optional[float] = None   # None = Dirichlet lateral; 0.0 = Neumann
    method: str = "closed_form"                 # "closed_form" or "fem"
    fem_size: float = 0.1

    def __post_init__(self):
        if self.method == "closed_form" and not isinstance(self.geometry.cross_section, Disk):
            raise EigensolverError("closed-form limit spectra need a disk cross-section")
        if self.k < 1:
            raise EigensolverError("k must be >= 1")


@dataclass
class LimitSpectrum:
    """Smallest limit eigenvalues in ascending order counting multiplicity.

    labels[i] = (n, m, l): angular mode, radial root index (1-based; m = 0
    marks the constant radial mode), axial index.  multiplicities[i] is 1 for
    n = 0 and 2 for n >= 1; eigenvalues are already expanded accordingly.
    """

    eigenvalues: np.ndarray
    labels: list
    multiplicities: np.ndarray
    method: str
    details: dict = field(default_factory=dict)


def axial_eigenvalue(l: int, height: float) -> float:
    """Axial factor for Neumann bottom / Dirichlet top: ((2l+1) pi / (2H))^2."""
    return ((2 * l + 1) * math.pi / (2.0 * height)) ** 2


def closed_form_limit_spectrum(request: LimitSpectrumRequest) -> LimitSpectrum:
    """k smallest limit eigenvalues on a disk cylinder by bounded enumeration.

    Enumerates all (n, m, l) with eigenvalue below an iteratively grown bound
    until at least k entries (counting multiplicity) are collected, so no
    eigenvalue can be missed.
    """
    disk = request.geometry.cross_section
    H = request.geometry.height
    R = disk.radius
    A = request.robin_coefficient
    k = request.k

    ax0 = axial_eigenvalue(0, H)
    first = radial_roots(0, 1, R, A)[0]
    bound = (first**2 + ax0) * 4.0 + 4.0 * ax0

    while True:
        entries = []   # (lambda, n, m, l, mult)
        n = 0
        while n <= BESSEL_MAX_ORDER:
            base_roots = radial_roots(n, 1, R, A)
            if base_roots[0] ** 2 + ax0 > bound:
                break
            m_count = 1
            roots = base_roots
            while roots[-1] ** 2 + ax0 <= bound:
                m_count += 1
                roots = radial_roots(n, m_count, R, A)
            mult = 1 if n == 0 else 2
            for m_idx, kappa in enumerate(roots):
                radial = kappa**2
                if radial + ax0 > bound:
                    continue
                l = 0
                while radial + axial_eigenvalue(l, H) <= bound:
                    # m label: 0 for the constant radial mode, else 1-based index
                    if A == 0.0 and n == 0:
                        m_label = m_idx
                    else:
                        m_label = m_idx + 1
                    entries.append((radial + axial_eigenvalue(l, H), n, m_label, l, mult))
                    l += 1
            n += 1
        total = sum(e[4] for e in entries)
        if total >= k:
            break
        bound *= 2.0

    entries.sort(key=lambda e: (e[0], e[1], e[2], e[3]))
    eigenvalues = []
    labels = []
    mults = []
    for lam, n, m, l, mult in entries:
        for _ in range(mult):
            eigenvalues.append(lam)
            labels.append((n, m, l))
            mults.append(mult)
            if len(eigenvalues) == k:
                break
        if len(eigenvalues) == k:
            break
    return LimitSpectrum(
        eigenvalues=np.array(eigenvalues),
        labels=labels,
        multiplicities=np.array(mults, dtype=int),
        method="closed_form",
        details={"robin_coefficient": A, "radius": R, "height": H},
    )


def export_limit_csv(spectrum: LimitSpectrum, path):
    """CSV with columns rank, lambda, n, m, l, multiplicity, method."""
    with open(path, "w") as f:
        f.write("rank,lambda,n,m,l,multiplicity,method\n")
        for i, lam in enumerate(spectrum.eigenvalues):
            n, m, l = spectrum.labels[i]
            f.write(f"{i+1},{float(lam)!r},{n},{m},{l},"
                    f"{int(spectrum.multiplicities[i])},{spectrum.method}\n")


def fem_limit_spectrum(request: LimitSpectrumRequest, tol: float = 1e-9,
                       mode_cap: int = 40) -> LimitSpectrum:
    """FEM limit spectrum; meridian modes merged for a disk, extruded 3D otherwise."""
    from . import fem as fem_mod
    from .eigen import smallest_eigenpairs
    from .mesh import LateralCondition, build_extruded_mesh_uniform_lateral, build_limit_mesh
    from .modes import merge_mode_spectra

    A = request.robin_coefficient
    lateral = (LateralCondition.DIRICHLET if A is None
               else LateralCondition.NEUMANN if A == 0.0
               else LateralCondition.ROBIN)

    if isinstance(request.geometry.cross_section, Disk):
        def solve_mode(n):
            mesh = build_limit_mesh(request.geometry, lateral, n, request.fem_size)
            pair = fem_mod.assemble(mesh, robin_coefficient=A if lateral is LateralCondition.ROBIN else None)
            kk = min(request.k, pair.n_free)
            return smallest_eigenpairs(pair, kk, tol=tol)

        merged = merge_mode_spectra(solve_mode, request.k, mode_cap=mode_cap)
        labels = [(n, -1, -1) for n in merged.mode_labels]
        mults = np.array([1 if n == 0 else 2 for n in merged.mode_labels], dtype=int)
        return LimitSpectrum(merged.eigenvalues, labels, mults, method="fem",
                             details={"h": request.fem_size, "n_max": merged.n_max})

    mesh = build_extruded_mesh_uniform_lateral(request.geometry, lateral, request.fem_size)
    pair = fem_mod.assemble(mesh, robin_coefficient=A if lateral is LateralCondition.ROBIN else None)
    spec = smallest_eigenpairs(pair, min(request.k, pair.n_free), tol=tol)
    labels = [(-1, -1, -1)] * len(spec.eigenvalues)
    return LimitSpectrum(spec.eigenvalues, labels,
                         np.ones(len(spec.eigenvalues), dtype=int), method="fem",
                         details={"h": request.fem_size})
