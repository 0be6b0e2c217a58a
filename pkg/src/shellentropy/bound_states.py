"""Bound single-particle levels of a spherical mean field.

Levels are found by shooting: Numerov integration outward from the origin and
inward from ``r_max`` (Dirichlet wall), matched at the outer classical turning
point.  Energy is bisected using the node count of the outward solution, and,
once the node count is right, the sign of the log-derivative jump.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import (
    ClosureError,
    InvalidArgumentError,
    LevelNotFoundError,
    NumericalFailure,
)
from .grid import RadialGrid
from .potentials import PotentialKind, PotentialSpec, evaluate_potential

_L_LETTERS = "spdfghiklmnoq"

# relative width at which bisection stops; well inside the 1e-9 requirement
ENERGY_RTOL = 1e-12
# levels closer than this (relative) are treated as one degenerate shell
DEGENERACY_RTOL = 1e-6
_RESCALE = 1e150


@dataclass(eq=False)
class OrbitalState:
    """One bound level: quantum numbers, energy and reduced radial function
    ``u(r) = r R(r)`` normalised to ``int u^2 dr = 1``."""

    n_radial: int
    l: int
    energy: float
    u: np.ndarray = field(repr=False)
    grid: RadialGrid = field(repr=False)
    spin_degeneracy: int = 2

    @property
    def degeneracy(self) -> int:
        return self.spin_degeneracy * (2 * self.l + 1)

    @property
    def label(self) -> str:
        return f"{self.n_radial + 1}{_L_LETTERS[self.l]}"

    def tail_ratio(self, fraction: float = 0.05) -> float:
        """max|u| over the outer ``fraction`` of the grid relative to max|u|."""
        start = int(len(self.u) * (1.0 - fraction))
        return float(np.max(np.abs(self.u[start:])) / np.max(np.abs(self.u)))


class FillingMode(str, enum.Enum):
    STRICT_CLOSED = "strict_closed"
    UNIFORM_FRACTIONAL = "uniform_fractional"


@dataclass
class ShellFilling:
    occupied: list  # of (OrbitalState, occupancy)
    N: int

    @property
    def orbitals(self):
        return [orb for orb, _ in self.occupied]

    @property
    def occupancies(self):
        return [occ for _, occ in self.occupied]

    def describe(self) -> dict:
        return {orb.label: occ for orb, occ in self.occupied}


# --- Numerov kernels -----------------------------------------------------


@numba.njit(cache=True)
def _outward(g, u1, u2, start, stop):
    """Integrate u'' = f u from the origin; returns (u, sign changes).

    ``g = 1 - h^2 f / 12``.  ``u[0] = 0``; ``start`` is 1 (l = 0: only u[1]
    seeded) or 2 (u[1], u[2] seeded from the power series).
    """
    n = g.shape[0]
    u = np.zeros(n)
    u[1] = u1
    if start == 2:
        u[2] = u2
    nodes = 0
    if start == 2 and u[1] * u[2] < 0.0:
        nodes += 1
    for i in range(start, stop):
        u[i + 1] = ((12.0 - 10.0 * g[i]) * u[i] - g[i - 1] * u[i - 1]) / g[i + 1]
        if u[i + 1] * u[i] < 0.0:
            nodes += 1
        if abs(u[i + 1]) > _RESCALE:
            for j in range(i + 2):
                u[j] /= _RESCALE
    return u, nodes


@numba.njit(cache=True)
def _inward(g, stop):
    """Integrate from the wall ``u[-1] = 0`` down to index ``stop``."""
    n = g.shape[0]
    u = np.zeros(n)
    u[n - 2] = 1e-30
    for i in range(n - 2, stop, -1):
        u[i - 1] = ((12.0 - 10.0 * g[i]) * u[i] - g[i + 1] * u[i + 1]) / g[i - 1]
        if abs(u[i - 1]) > _RESCALE:
            for j in range(i - 1, n):
                u[j] /= _RESCALE
    return u


class _Problem:
    """Precomputed effective potential of one (spec, l, grid) triple."""

    def __init__(self, spec: PotentialSpec, l: int, grid: RadialGrid):
        if l < 0:
            raise InvalidArgumentError("l must be >= 0")
        self.spec = spec
        self.l = l
        self.grid = grid
        r = grid.points
        self.h = grid.spacing
        self.K = spec.kinetic_constant
        self.v = evaluate_potential(spec, r)
        cent = np.zeros_like(r)
        cent[1:] = l * (l + 1) / r[1:] ** 2
        # f(r) = w(r) - E / K
        self.w = cent + self.v / self.K
        if l > 0:
            self.w[0] = self.w[1]  # never used: u[0] = 0
        veff = self.K * self.w[1:]
        self.e_min = float(np.min(veff))
        self.v0 = float(self.v[0])

    def g(self, E):
        return 1.0 - self.h**2 / 12.0 * (self.w - E / self.K)

    def _seed(self, E):
        r1, r2 = self.h, 2.0 * self.h
        l = self.l
        c = (self.v0 - E) / (self.K * (4 * l + 6))
        u1 = r1 ** (l + 1) * (1.0 + c * r1 * r1)
        u2 = r2 ** (l + 1) * (1.0 + c * r2 * r2)
        return u1, u2, (1 if l == 0 else 2)

    def outward(self, E, stop):
        u1, u2, start = self._seed(E)
        return _outward(self.g(E), u1, u2, start, stop)

    def count_below(self, E) -> int:
        """Number of levels of this l below E (Sturm count over the box)."""
        n = len(self.grid.points)
        _, nodes = self.outward(E, n - 2)
        return nodes

    def turning_point(self, E):
        """Index of the outermost point in the classically allowed region, or
        None if E lies below the whole effective potential."""
        f = self.w[1:] - E / self.K
        allowed = np.nonzero(f < 0.0)[0]
        if allowed.size == 0:
            return None
        return int(allowed[-1]) + 1

    def trial(self, E, n_radial):
        """-1: E too low, +1: E too high, plus the matched solution."""
        n = len(self.grid.points)
        icl = self.turning_point(E)
        if icl is None:
            return -1, None
        if icl >= n - 4:
            return +1, None
        icl = max(icl, 3)
        u_out, nodes = self.outward(E, icl + 1)
        # a sign change between icl and icl+1 belongs to the inward part
        if u_out[icl] * u_out[icl + 1] < 0.0:
            nodes -= 1
        if nodes > n_radial:
            return +1, None
        if nodes < n_radial:
            return -1, None
        u_in = _inward(self.g(E), icl - 1)
        if u_out[icl] == 0.0 or u_in[icl] == 0.0:
            return +1, None
        u_in *= u_out[icl] / u_in[icl]
        g = self.g(E)
        resid = (
            g[icl + 1] * u_in[icl + 1]
            + g[icl - 1] * u_out[icl - 1]
            - (12.0 - 10.0 * g[icl]) * u_out[icl]
        )
        # log-derivative mismatch u'_out/u - u'_in/u; decreasing in E
        mismatch = -resid / (self.h * u_out[icl])
        u = np.concatenate([u_out[: icl + 1], u_in[icl + 1 :]])
        return (-1 if mismatch > 0 else +1), u


def _energy_window(spec: PotentialSpec, problem: _Problem, e_max=None):
    if spec.kind is PotentialKind.WOODS_SAXON:
        eps = 1e-9 * spec.V0
        top = -eps if e_max is None else min(e_max, -eps)
    else:
        top = default_ho_ceiling(spec, problem.grid) if e_max is None else e_max
    bottom = problem.e_min
    return bottom, top


def default_ho_ceiling(spec: PotentialSpec, grid: RadialGrid) -> float:
    """Search ceiling for oscillator levels: a quarter of V(r_max)."""
    return 0.25 * evaluate_potential(spec, grid.r_max)


def _count_nodes(u):
    scale = np.max(np.abs(u))
    s = np.sign(u[np.abs(u) > 1e-14 * scale])
    return int(np.count_nonzero(s[1:] != s[:-1]))


def _solve(problem: _Problem, n_radial: int, bottom: float, top: float) -> OrbitalState:
    if n_radial < 0:
        raise InvalidArgumentError("n_radial must be >= 0")
    if top <= bottom or problem.count_below(top) <= n_radial:
        raise LevelNotFoundError(
            f"no bound level with l={problem.l}, n_radial={n_radial} below {top:.6g}"
        )
    lo, hi = bottom, top
    u = None
    for _ in range(400):
        E = 0.5 * (lo + hi)
        direction, u_trial = problem.trial(E, n_radial)
        if direction < 0:
            lo = E
        else:
            hi = E
        if u_trial is not None:
            u = u_trial
        if hi - lo <= ENERGY_RTOL * max(abs(E), 1e-300):
            break
    else:
        raise NumericalFailure(f"bisection did not converge (l={problem.l}, n={n_radial})")
    E = 0.5 * (lo + hi)
    direction, u_final = problem.trial(E, n_radial)
    if u_final is not None:
        u = u_final
    if u is None:
        raise NumericalFailure(
            f"no matched solution found for l={problem.l}, n_radial={n_radial}"
        )
    grid = problem.grid
    norm = math.sqrt(grid.weights @ (u * u))
    u = u / norm
    if u[np.argmax(np.abs(u) > 1e-8)] < 0:
        u = -u
    nodes = _count_nodes(u)
    if nodes != n_radial:
        raise NumericalFailure(
            f"converged state has {nodes} nodes, expected {n_radial} (l={problem.l})"
        )
    return OrbitalState(
        n_radial=n_radial,
        l=problem.l,
        energy=E,
        u=u,
        grid=grid,
        spin_degeneracy=problem.spec.spin_degeneracy,
    )


def solve_bound_state(
    spec: PotentialSpec, l: int, n_radial: int, grid: RadialGrid, e_max=None
) -> OrbitalState:
    """Eigenstate with ``n_radial`` interior nodes and angular momentum ``l``.

    Raises
    ------
    LevelNotFoundError
        If fewer than ``n_radial + 1`` levels of this ``l`` lie below the
        search ceiling (zero for Woods-Saxon).
    NumericalFailure
        If bisection fails or the converged state has the wrong node count.
    """
    problem = _Problem(spec, l, grid)
    bottom, top = _energy_window(spec, problem, e_max)
    return _solve(problem, n_radial, bottom, top)


def _sort_levels(levels):
    levels = sorted(levels, key=lambda s: s.energy)
    groups = group_degenerate(levels)
    return [s for grp in groups for s in sorted(grp, key=lambda s: (s.l, s.n_radial))]


def group_degenerate(levels, rtol=DEGENERACY_RTOL):
    """Split an energy-sorted level list into sets of (near-)equal energy."""
    groups = []
    for s in levels:
        if groups:
            ref = groups[-1][0].energy
            if abs(s.energy - ref) <= rtol * max(abs(ref), abs(s.energy)):
                groups[-1].append(s)
                continue
        groups.append([s])
    return groups


def enumerate_bound_levels(
    spec: PotentialSpec, grid: RadialGrid, l_max: int = 6, e_max=None
) -> list:
    """All bound levels with ``l <= l_max``, ascending in energy; ties are
    ordered by ``(l, n_radial)``."""
    if l_max < 0:
        raise InvalidArgumentError("l_max must be >= 0")
    levels = []
    for l in range(l_max + 1):
        problem = _Problem(spec, l, grid)
        bottom, top = _energy_window(spec, problem, e_max)
        if top <= bottom:
            continue
        count = problem.count_below(top)
        for n in range(count):
            levels.append(_solve(problem, n, bottom, top))
    return _sort_levels(levels)


def shell_closures(levels) -> list:
    """Cumulative particle numbers at which a degenerate level set is full."""
    closures, total = [], 0
    for grp in group_degenerate(levels):
        total += sum(s.degeneracy for s in grp)
        closures.append(total)
    return closures


def fill_shells(levels, N: int, mode=FillingMode.STRICT_CLOSED) -> ShellFilling:
    """Occupy ``levels`` bottom-up with N particles.

    In ``strict_closed`` mode N must close a shell.  In ``uniform_fractional``
    mode the particles left over after the last full shell are shared over the
    next degenerate set in proportion to each level's capacity.
    """
    mode = FillingMode(mode)
    if N < 1:
        raise InvalidArgumentError("N must be >= 1")
    levels = _sort_levels(levels)
    closures = shell_closures(levels)
    available = closures[-1] if closures else 0
    if N > available:
        raise InvalidArgumentError(f"only {available} bound states for N={N}")
    if mode is FillingMode.STRICT_CLOSED and N not in closures:
        raise ClosureError(N, closures)
    occupied = []
    remaining = N
    for grp in group_degenerate(levels):
        capacity = sum(s.degeneracy for s in grp)
        if remaining >= capacity:
            occupied += [(s, float(s.degeneracy)) for s in grp]
            remaining -= capacity
        else:
            occupied += [(s, remaining * s.degeneracy / capacity) for s in grp]
            remaining = 0
        if remaining == 0:
            break
    return ShellFilling(occupied=occupied, N=N)


def levels_to_csv(levels) -> str:
    """Level scheme as CSV: l, n_radial, energy, degeneracy, cumulative_N."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["l", "n_radial", "energy", "degeneracy", "cumulative_N"])
    total = 0
    for s in _sort_levels(levels):
        total += s.degeneracy
        writer.writerow([s.l, s.n_radial, f"{s.energy:.6g}", s.degeneracy, total])
    return buf.getvalue()
