"""Merging per-mode meridian spectra into the 3D spectrum of the cylinder.

For a disk cross-section with s-independent boundary data the 3D spectrum is
the union over angular modes n of the meridian spectra, with every n >= 1
eigenvalue counted twice (the pair e^{+i n theta}, e^{-i n theta}).  Since
the meridian stiffness grows monotonically with n (the n^2/r^2 term), modes
can be solved in increasing n until the newest mode's smallest eigenvalue
exceeds the k-th merged value; no later mode can then contribute.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .eigen import Spectrum
from .errors import EigensolverError


@dataclass
class MergedSpectrum:
    eigenvalues: np.ndarray       # k smallest, ascending, multiplicity expanded
    mode_labels: list             # angular mode n of each entry
    n_max: int                    # last mode solved (completeness guard)
    per_mode: dict                # n -> Spectrum
    converged: bool


def merge_mode_spectra(solve_mode: Callable[[int], Spectrum], k: int,
                       mode_cap: int = 40) -> MergedSpectrum:
    """Merge per-mode spectra until the completeness guard triggers."""
    entries = []            # (lambda, n)
    per_mode = {}
    converged = True
    n = 0
    while True:
        spec = solve_mode(n)
        per_mode[n] = spec
        converged = converged and spec.converged
        mult = 1 if n == 0 else 2
        for lam in spec.eigenvalues:
            for _ in range(mult):
                entries.append((float(lam), n))
        entries.sort(key=lambda e: (e[0], e[1]))
        kth = entries[min(k, len(entries)) - 1][0] if entries else np.inf
        if len(entries) >= k and spec.eigenvalues[0] > kth:
            break
        if n >= mode_cap:
            raise EigensolverError(
                f"mode merge did not close by n={mode_cap}; raise mode_cap"
            )
        n += 1
    merged = entries[:k]
    return MergedSpectrum(
        eigenvalues=np.array([e[0] for e in merged]),
        mode_labels=[e[1] for e in merged],
        n_max=n,
        per_mode=per_mode,
        converged=converged,
    )
