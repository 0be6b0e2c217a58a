"""One-body densities, Shannon entropies and the entropic uncertainty
relation (EUR)."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator

from .constants import ANGSTROM_PER_FM, EUR_UNIT_BOUND
from .errors import (
    DataIntegrityError,
    DensityParseError,
    InvalidArgumentError,
    InvalidDensityError,
)
from .grid import RadialGrid, build_grid

# 0 ln 0 = 0: samples below this contribute nothing
ZERO_DENSITY = 1e-300
NEGATIVE_SLACK = 1e-12
# external tables are silently renormalised if off by less than this
RENORM_TOLERANCE = 0.01


class Normalization(str, enum.Enum):
    UNIT = "unit"
    PARTICLE_NUMBER = "particle_number"


class Direction(str, enum.Enum):
    TO_UNIT = "to_unit"
    TO_PARTICLE_NUMBER = "to_particle_number"


@dataclass(eq=False)
class DensityPair:
    """rho(r) and n(k) of one system, both on radial grids."""

    rho: np.ndarray = field(repr=False)
    nk: np.ndarray = field(repr=False)
    r_grid: RadialGrid = field(repr=False)
    k_grid: RadialGrid = field(repr=False)
    N: float
    normalization: Normalization = Normalization.UNIT
    length_unit: str = "angstrom"

    def norms(self):
        """(4 pi int rho r^2 dr, 4 pi int n k^2 dk)."""
        r, k = self.r_grid.points, self.k_grid.points
        return (
            4 * math.pi * self.r_grid.integrate(self.rho * r**2),
            4 * math.pi * self.k_grid.integrate(self.nk * k**2),
        )

    def to(self, normalization) -> "DensityPair":
        normalization = Normalization(normalization)
        if normalization is self.normalization:
            return self
        factor = self.N if normalization is Normalization.PARTICLE_NUMBER else 1.0 / self.N
        return replace(
            self, rho=self.rho * factor, nk=self.nk * factor, normalization=normalization
        )


@dataclass(frozen=True)
class EntropyResult:
    S_r: float
    S_k: float
    S_sum: float
    eur_bound: float
    eur_margin: float
    N: float = 1.0
    normalization: Normalization = Normalization.UNIT


def _origin_density(orb):
    if orb.l != 0:
        return 0.0
    u, h = orb.u, orb.grid.spacing
    # one-sided third-order estimate of u'(0) with u(0) = 0
    du0 = (18.0 * u[1] - 9.0 * u[2] + 2.0 * u[3]) / (6.0 * h)
    return du0 * du0


def build_density(filling, momentum_orbitals) -> DensityPair:
    """Unit-normalised rho and n from occupied orbitals and their transforms."""
    occupied = filling.occupied
    if len(occupied) != len(momentum_orbitals):
        raise InvalidArgumentError(
            f"{len(occupied)} occupied levels but {len(momentum_orbitals)} momentum orbitals"
        )
    if not occupied:
        raise InvalidArgumentError("empty filling")
    r_grid = occupied[0][0].grid
    k_grid = momentum_orbitals[0].k_grid
    r = r_grid.points
    rho = np.zeros_like(r)
    nk = np.zeros_like(k_grid.points)
    for (orb, occ), mom in zip(occupied, momentum_orbitals):
        if mom.l != orb.l or mom.n_radial != orb.n_radial:
            raise InvalidArgumentError(
                f"momentum orbital (l={mom.l}, n={mom.n_radial}) does not match {orb.label}"
            )
        part = np.empty_like(r)
        part[1:] = (orb.u[1:] / r[1:]) ** 2
        part[0] = _origin_density(orb)
        rho += occ * part
        nk += occ * mom.phi**2
    total = float(sum(filling.occupancies))
    scale = 1.0 / (4.0 * math.pi * total)
    return DensityPair(
        rho=rho * scale,
        nk=nk * scale,
        r_grid=r_grid,
        k_grid=k_grid,
        N=filling.N,
        normalization=Normalization.UNIT,
    )


def shannon_entropy(density, grid: RadialGrid) -> float:
    """-4 pi int rho ln(rho) r^2 dr with 0 ln 0 = 0."""
    rho = np.asarray(density, dtype=float)
    if rho.shape != grid.points.shape:
        raise InvalidArgumentError("density and grid lengths differ")
    if np.any(rho < -NEGATIVE_SLACK):
        raise InvalidDensityError(f"negative density sample {rho.min():.3e}")
    live = rho > ZERO_DENSITY
    integrand = np.zeros_like(rho)
    integrand[live] = -rho[live] * np.log(rho[live])
    return 4.0 * math.pi * grid.integrate(integrand * grid.points**2)


def eur_bound(N: float = 1.0, normalization=Normalization.UNIT) -> float:
    """Lower bound on S_r + S_k: 3(1 + ln pi) for unit normalisation,
    3N(1 + ln pi) - 2N ln N for normalisation to N."""
    if Normalization(normalization) is Normalization.UNIT:
        return EUR_UNIT_BOUND
    return N * EUR_UNIT_BOUND - 2.0 * N * math.log(N)


def entropy_report(pair: DensityPair) -> EntropyResult:
    unit = pair.to(Normalization.UNIT)
    S_r = shannon_entropy(unit.rho, unit.r_grid)
    S_k = shannon_entropy(unit.nk, unit.k_grid)
    if pair.normalization is Normalization.PARTICLE_NUMBER:
        S_r = convert_normalization(S_r, pair.N, Direction.TO_PARTICLE_NUMBER)
        S_k = convert_normalization(S_k, pair.N, Direction.TO_PARTICLE_NUMBER)
    S_sum = S_r + S_k
    bound = eur_bound(pair.N, pair.normalization)
    return EntropyResult(S_r, S_k, S_sum, bound, S_sum - bound, pair.N, pair.normalization)


def convert_normalization(S: float, N: float, direction, space_count: int = 1) -> float:
    """Switch an entropy between normalisation to one and to N.

    Per space ``S_1 = S_N / N + ln N``; a sum over ``space_count`` spaces picks
    up ``space_count * ln N``.
    """
    if not N >= 1:
        raise InvalidArgumentError(f"N must be >= 1, got {N}")
    if space_count not in (1, 2):
        raise InvalidArgumentError("space_count must be 1 or 2")
    shift = space_count * math.log(N)
    if Direction(direction) is Direction.TO_UNIT:
        return S / N + shift
    return N * (S - shift)


def report_to_csv(rows) -> str:
    """CSV of (system_id, N, S_r, S_k, S_sum, eur_margin); ``rows`` are
    ``(system_id, EntropyResult)`` pairs."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["system_id", "N", "S_r", "S_k", "S_sum", "eur_margin"])
    for system_id, res in rows:
        writer.writerow(
            [system_id, f"{res.N:.6g}"]
            + [f"{v:.6g}" for v in (res.S_r, res.S_k, res.S_sum, res.eur_margin)]
        )
    return buf.getvalue()


# --- external densities ---------------------------------------------------

_POSITION_UNITS = {"angstrom": 1.0, "fm": ANGSTROM_PER_FM}  # in Angstrom
_MOMENTUM_UNITS = {"inverse_angstrom": 1.0, "inverse_fm": 1.0 / ANGSTROM_PER_FM}
_UNIT_NAMES = {"angstrom": "angstrom", "fm": "fm", "inverse_angstrom": "angstrom", "inverse_fm": "fm"}


@dataclass
class _Block:
    space: str
    start_line: int
    unit: str | None = None
    norm: str | None = None
    x: list = field(default_factory=list)
    y: list = field(default_factory=list)


def _parse_table(text: str, path=None):
    blocks, header = [], {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" not in body:
                continue
            key, value = (s.strip() for s in body.split(":", 1))
            key = key.lower()
            if key == "space":
                if value not in ("position", "momentum"):
                    raise DensityParseError(f"unknown space {value!r}", lineno, path)
                blocks.append(_Block(value, lineno))
            elif key == "unit":
                if blocks:
                    blocks[-1].unit = value
                else:
                    header["unit"] = value
            elif key == "norm":
                if value not in ("1", "N"):
                    raise DensityParseError(f"norm must be 1 or N, got {value!r}", lineno, path)
                if blocks:
                    blocks[-1].norm = value
                else:
                    header["norm"] = value
            elif key == "n":
                try:
                    header["N"] = float(value)
                except ValueError:
                    raise DensityParseError(f"bad particle count {value!r}", lineno, path)
            continue
        if not blocks:
            raise DensityParseError("data before '# space:' header", lineno, path)
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise DensityParseError(f"expected 2 columns, got {len(parts)}", lineno, path)
        try:
            x, y = float(parts[0]), float(parts[1])
        except ValueError:
            raise DensityParseError(f"non-numeric row {line!r}", lineno, path)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise DensityParseError("non-finite value", lineno, path)
        blk = blocks[-1]
        if x < 0 or (blk.x and x <= blk.x[-1]):
            raise DensityParseError(
                "abscissa must be non-negative and strictly increasing "
                "(columns out of order?)",
                lineno,
                path,
            )
        if y < 0:
            raise DataIntegrityError(
                f"{path or '<table>'}:{lineno}: negative density {y:g}"
            )
        blk.x.append(x)
        blk.y.append(y)
    for blk in blocks:
        if blk.unit is None:
            blk.unit = header.get("unit")
        if blk.norm is None:
            blk.norm = header.get("norm", "1")
    return blocks, header


def _resample(blk: _Block, n_points: int, N: float, path):
    x, y = np.array(blk.x), np.array(blk.y)
    if len(x) < 4:
        raise DensityParseError(f"{blk.space} table needs at least 4 rows", blk.start_line, path)
    grid = build_grid(x[-1], n_points)
    values = np.clip(PchipInterpolator(x, y, extrapolate=True)(grid.points), 0.0, None)
    norm = 4 * math.pi * grid.integrate(values * grid.points**2)
    target = N if blk.norm == "N" else 1.0
    if abs(norm / target - 1.0) >= RENORM_TOLERANCE:
        raise DataIntegrityError(
            f"{path or '<table>'}: {blk.space} density integrates to {norm:.6g}, "
            f"declared {target:g}"
        )
    return grid, values / norm


def _rescale(grid: RadialGrid, values, factor: float):
    """Express a radial density in a new unit: x -> factor * x."""
    new = build_grid(grid.r_max * factor, len(grid.points))
    return new, values / factor**3


def ingest_external_density(*sources, n_points: int = 4001, N=None) -> DensityPair:
    """Read tabulated rho(r) and n(k) from one or more text tables.

    Each block opens with ``# space: position|momentum`` and declares
    ``# unit:`` (mandatory) and ``# norm: 1|N``; a ``# N: <count>`` line gives
    the particle number.  Both spaces must be present across ``sources``,
    which may be paths or raw text.  The result is unit-normalised.
    """
    blocks, header = [], {}
    for src in sources:
        if isinstance(src, (str, Path)) and "\n" not in str(src):
            path = Path(src)
            try:
                text = path.read_text()
            except OSError as exc:
                raise DensityParseError(f"cannot read: {exc.strerror}", None, path) from exc
        else:
            text, path = str(src), None
        b, h = _parse_table(text, path)
        blocks += [(blk, path) for blk in b]
        header.update(h)
    count = float(N if N is not None else header.get("N", 1.0))
    if count < 1:
        raise InvalidArgumentError("particle count must be >= 1")
    found = {}
    for blk, path in blocks:
        if blk.space in found:
            raise DensityParseError(f"duplicate {blk.space} block", blk.start_line, path)
        units = _POSITION_UNITS if blk.space == "position" else _MOMENTUM_UNITS
        if blk.unit not in units:
            raise DensityParseError(
                f"{blk.space} block needs '# unit:' in {sorted(units)}", blk.start_line, path
            )
        found[blk.space] = (blk, path)
    missing = {"position", "momentum"} - set(found)
    if missing:
        raise DensityParseError(f"missing {' and '.join(sorted(missing))} block")
    (pblk, ppath), (kblk, kpath) = found["position"], found["momentum"]
    r_grid, rho = _resample(pblk, n_points, count, ppath)
    k_grid, nk = _resample(kblk, n_points, count, kpath)
    length_unit = _UNIT_NAMES[pblk.unit]
    if _UNIT_NAMES[kblk.unit] != length_unit:
        # momentum in inverse length: factor is the reciprocal length ratio
        ratio = _MOMENTUM_UNITS[kblk.unit] / _MOMENTUM_UNITS["inverse_" + length_unit]
        k_grid, nk = _rescale(k_grid, nk, ratio)
    return DensityPair(
        rho=rho,
        nk=nk,
        r_grid=r_grid,
        k_grid=k_grid,
        N=count,
        normalization=Normalization.UNIT,
        length_unit=length_unit,
    )


def write_density_table(path, grid: RadialGrid, values, space: str, unit: str,
                        norm: str = "1", N=None, mode: str = "w"):
    """Write a table in the external-density format (round-trips with
    :func:`ingest_external_density`)."""
    with open(path, mode) as fh:
        if N is not None and mode == "w":
            fh.write(f"# N: {N:g}\n")
        fh.write(f"# space: {space}\n# unit: {unit}\n# norm: {norm}\n")
        for x, y in zip(grid.points, values):
            fh.write(f"{x:.12e} {y:.12e}\n")
