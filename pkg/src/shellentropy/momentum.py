"""Momentum-space radial amplitudes via the spherical Bessel transform

    phi_l(k) = sqrt(2/pi) * int_0^inf u(r) j_l(k r) r dr

evaluated by direct quadrature on the orbital's own radial grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bound_states import OrbitalState
from .errors import DomainCoverageError, InvalidArgumentError
from .grid import RadialGrid, build_grid

_SERIES_TERMS = 40
# k-points per block when forming the j_l(k r) kernel
_CHUNK = 256
# phi must fall below this fraction of its peak over the last 1% of the k grid
COVERAGE_TOL = 1e-6


def _series(l, x):
    x2 = -0.5 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, _SERIES_TERMS):
        term = term * x2 / (k * (2 * l + 2 * k + 1))
        total += term
    dfact = math.prod(range(1, 2 * l + 2, 2))
    return x**l / dfact * total


def spherical_bessel_all(l_max: int, x):
    """``j_0 ... j_{l_max}`` at ``x``; shape ``(l_max + 1,) + x.shape``.

    Power series below ``x = l + 1``, upward recurrence from the closed forms
    of ``j_0`` and ``j_1`` above it (stable there).
    """
    if l_max < 0:
        raise InvalidArgumentError("l must be >= 0")
    x = np.asarray(x, dtype=float)
    shape = x.shape
    x = np.atleast_1d(x)
    if np.any(x < 0):
        raise InvalidArgumentError("x must be >= 0")
    out = np.empty((l_max + 1,) + x.shape)
    big = x >= 1.0
    xs = np.where(big, x, 1.0)
    s, c = np.sin(xs), np.cos(xs)
    jm = s / xs
    out[0] = jm
    if l_max >= 1:
        jl = s / xs**2 - c / xs
        out[1] = jl
        for m in range(1, l_max):
            jm, jl = jl, (2 * m + 1) / xs * jl - jm
            out[m + 1] = jl
    for l in range(l_max + 1):
        small = x < l + 1
        if np.any(small):
            out[l][small] = _series(l, x[small])
    return out.reshape((l_max + 1,) + shape)


def spherical_bessel(l: int, x):
    """Spherical Bessel function of the first kind ``j_l(x)``."""
    res = spherical_bessel_all(l, x)[l]
    return float(res) if np.ndim(res) == 0 else res


@dataclass(eq=False)
class MomentumOrbital:
    l: int
    phi: np.ndarray = field(repr=False)
    k_grid: RadialGrid = field(repr=False)
    n_radial: int = 0

    def norm(self) -> float:
        """int phi^2 k^2 dk (unity by Parseval)."""
        k = self.k_grid.points
        return self.k_grid.integrate(self.phi**2 * k**2)


def default_k_grid(length_scale: float, n_k: int = 3000) -> RadialGrid:
    """Momentum grid reaching ``40 / length_scale``."""
    return build_grid(40.0 / length_scale, n_k)


def _check_coverage(phi, k_grid, l):
    peak = np.max(np.abs(phi))
    tail = np.max(np.abs(phi[-max(3, len(phi) // 100):]))
    if peak == 0 or tail > COVERAGE_TOL * peak:
        raise DomainCoverageError(
            f"phi_l={l} not decayed at k_max={k_grid.r_max:.4g} "
            f"(tail/peak = {tail / peak if peak else float('nan'):.2e})"
        )


def transform_orbitals(orbitals, k_grid: RadialGrid, check=True):
    """Transform several orbitals sharing one radial grid in one pass."""
    if not orbitals:
        return []
    grid = orbitals[0].grid
    for orb in orbitals:
        if orb.grid is not grid and not np.array_equal(orb.grid.points, grid.points):
            raise InvalidArgumentError("orbitals must share a radial grid")
    r = grid.points
    l_max = max(orb.l for orb in orbitals)
    # integrand pieces u(r) r w(r), one row per orbital
    src = np.array([orb.u * r * grid.weights for orb in orbitals])
    ls = np.array([orb.l for orb in orbitals])
    k = k_grid.points
    phi = np.empty((len(orbitals), len(k)))
    for start in range(0, len(k), _CHUNK):
        kk = k[start : start + _CHUNK]
        jl = spherical_bessel_all(l_max, np.multiply.outer(kk, r))
        for l in np.unique(ls):
            rows = np.nonzero(ls == l)[0]
            phi[rows, start : start + len(kk)] = src[rows] @ jl[l].T
    phi *= math.sqrt(2.0 / math.pi)
    result = []
    for orb, row in zip(orbitals, phi):
        if check:
            _check_coverage(row, k_grid, orb.l)
        result.append(MomentumOrbital(orb.l, row, k_grid, orb.n_radial))
    return result


def transform_to_momentum(orbital: OrbitalState, k_grid: RadialGrid) -> MomentumOrbital:
    """Momentum amplitude of one orbital; no renormalisation is applied."""
    return transform_orbitals([orbital], k_grid)[0]


def momentum_to_csv(orbital: MomentumOrbital) -> str:
    """Debug dump of ``(k, phi)`` pairs."""
    lines = ["k,phi"]
    lines += [f"{k:.6g},{p:.6g}" for k, p in zip(orbital.k_grid.points, orbital.phi)]
    return "\n".join(lines) + "\n"
