"""End-to-end runs: solve levels, fill shells, transform, build densities,
compute entropies for a family of systems, then fit S = a + b ln N."""

from __future__ import annotations

import configparser
import csv
import io
import json
import logging
import os
import tempfile
from dataclasses import dataclass, field, replace
from pathlib import Path

from .bound_states import FillingMode, enumerate_bound_levels, fill_shells, levels_to_csv
from .density import build_density, entropy_report, ingest_external_density, report_to_csv
from .errors import (
    ClosureError,
    InsufficientDataError,
    InvalidArgumentError,
    NumericalFailure,
    ShellEntropyError,
)
from .grid import build_grid
from .momentum import transform_orbitals
from .potentials import PotentialKind, default_cluster_spec, default_nucleus_spec
from .scaling import REFERENCE_FITS, ScalingFit, boltzmann_analogy, fit_log_linear

log = logging.getLogger(__name__)

MODES = ("cluster_ws", "nucleus_ho", "external")
DEFAULT_COUNTS = {
    "cluster_ws": [8, 18, 20, 34, 40, 58, 68, 70],
    "nucleus_ho": [4, 16, 40, 80, 140, 224],
}
# which published fits each mode is compared against
COMPARE_KEYS = {
    "cluster_ws": {"S_r": "clusters_WS_Sr", "S_k": "clusters_WS_Sk", "S_sum": "clusters_WS_sum"},
    "nucleus_ho": {"S_sum": "nuclei_HO_sum"},
    "external": {"S_r": "nuclei_SKIII_Sr", "S_k": "nuclei_SKIII_Sk", "S_sum": "nuclei_SKIII_sum"},
}
FIGURE_REFERENCES = {
    "atoms": "atoms_HF_sum",
    "clusters": "clusters_WS_sum",
    "nuclei": "nuclei_SKIII_sum",
}
TAIL_TOLERANCE = 1e-6


@dataclass
class RunConfig:
    mode: str = "cluster_ws"
    particle_counts: list = field(default_factory=list)
    output_dir: str | None = None
    filling: FillingMode = FillingMode.STRICT_CLOSED
    r_max: float | None = None
    n_points: int = 4001
    k_max: float | None = None
    n_k: int = 3000
    l_max: int = 6
    hbar_omega: float | None = None
    length_scale: float = 1.0  # multiplies the HO oscillator length
    potential_overrides: dict = field(default_factory=dict)
    external_files: list = field(default_factory=list)  # list of lists of paths

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidArgumentError(f"mode must be one of {MODES}, got {self.mode!r}")
        self.filling = FillingMode(self.filling)
        if self.mode != "external":
            if not self.particle_counts:
                self.particle_counts = list(DEFAULT_COUNTS[self.mode])
            for n in self.particle_counts:
                if int(n) != n or n < 1:
                    raise InvalidArgumentError(f"particle counts must be integers >= 1, got {n}")
            self.particle_counts = [int(n) for n in self.particle_counts]
        elif not self.external_files:
            raise InvalidArgumentError("external mode needs at least one density file")


@dataclass
class SystemResult:
    system_id: str
    N: float
    entropy: object
    spec: object = None
    levels: list = None
    filling: object = None
    density: object = None
    momentum: list = None


@dataclass
class RunReport:
    config: RunConfig
    systems: list
    failures: list  # (system_id, message, exit_code)
    fits: dict
    comparison: dict
    boltzmann: dict

    @property
    def exit_code(self) -> int:
        return max([code for *_, code in self.failures], default=0)


# --- config file -----------------------------------------------------------


def _floats(text):
    return [float(x) for x in text.replace(",", " ").split()]


def load_config(path_or_text) -> RunConfig:
    """Read an INI-style run config (sections ``run``, ``grid``,
    ``potential``, ``external``)."""
    parser = configparser.ConfigParser()
    text = str(path_or_text)
    base = Path(".")
    if "\n" not in text and Path(text).exists():
        base = Path(text).resolve().parent
        text = Path(text).read_text()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise InvalidArgumentError(f"bad config: {exc}") from exc
    run = parser["run"] if parser.has_section("run") else {}
    grid = parser["grid"] if parser.has_section("grid") else {}
    kwargs = {}
    try:
        if "mode" in run:
            kwargs["mode"] = run["mode"].strip()
        if "particle_counts" in run:
            kwargs["particle_counts"] = _floats(run["particle_counts"])
        if "output" in run:
            kwargs["output_dir"] = str(base / run["output"].strip())
        if "filling" in run:
            kwargs["filling"] = run["filling"].strip()
        for key, conv in (("r_max", float), ("n_points", int), ("k_max", float),
                          ("n_k", int), ("l_max", int)):
            if key in grid:
                kwargs[key] = conv(grid[key])
        if parser.has_section("potential"):
            pot = dict(parser["potential"])
            if "hbar_omega_mev" in pot:
                kwargs["hbar_omega"] = float(pot.pop("hbar_omega_mev"))
            if "length_scale" in pot:
                kwargs["length_scale"] = float(pot.pop("length_scale"))
            kwargs["potential_overrides"] = {k: float(v) for k, v in pot.items()}
        if parser.has_section("external"):
            systems = parser["external"].get("files", "")
            kwargs["external_files"] = [
                [str(base / p.strip()) for p in item.split("+")]
                for item in systems.replace("\n", ",").split(",")
                if item.strip()
            ]
    except (ValueError, KeyError) as exc:
        raise InvalidArgumentError(f"bad config value: {exc}") from exc
    return RunConfig(**kwargs)


# --- model systems ----------------------------------------------------------


def system_spec(config: RunConfig, N: int):
    if config.mode == "cluster_ws":
        spec = default_cluster_spec(N)
        over = {k.lower(): v for k, v in config.potential_overrides.items()}
        return replace(
            spec,
            V0=over.get("v0_ev", spec.V0),
            r0=over.get("r0_a", spec.r0),
            a=over.get("a_a", spec.a),
        )
    spec = default_nucleus_spec(N, config.hbar_omega)
    if config.length_scale != 1.0:
        # b scales as (hbar omega)^(-1/2)
        spec = replace(spec, hbar_omega=spec.hbar_omega / config.length_scale**2)
    return spec


def system_grids(spec, config: RunConfig):
    """Position and momentum grids for one system."""
    if spec.kind is PotentialKind.WOODS_SAXON:
        r_max = config.r_max or spec.R + 15.0 * spec.a + 10.0
    else:
        r_max = config.r_max or 12.0 * spec.oscillator_length
    k_max = config.k_max or 40.0 / spec.characteristic_length
    return build_grid(r_max, config.n_points), build_grid(k_max, config.n_k)


def solve_levels(spec, config: RunConfig):
    r_grid, _ = system_grids(spec, config)
    return enumerate_bound_levels(spec, r_grid, config.l_max)


def compute_system(spec, config: RunConfig, levels=None, system_id=None) -> SystemResult:
    """Full chain for one model system."""
    r_grid, k_grid = system_grids(spec, config)
    if levels is None:
        levels = enumerate_bound_levels(spec, r_grid, config.l_max)
    filling = fill_shells(levels, spec.N_particles, config.filling)
    for orb in filling.orbitals:
        if orb.tail_ratio() > TAIL_TOLERANCE:
            raise NumericalFailure(
                f"{orb.label} not decayed at r_max={r_grid.r_max:.4g}; enlarge r_max"
            )
    momentum = transform_orbitals(filling.orbitals, k_grid)
    density = build_density(filling, momentum)
    density.length_unit = spec.length_unit
    return SystemResult(
        system_id=system_id or f"{config.mode}_N{spec.N_particles}",
        N=spec.N_particles,
        entropy=entropy_report(density),
        spec=spec,
        levels=levels,
        filling=filling,
        density=density,
        momentum=momentum,
    )


def _external_system(paths, config: RunConfig) -> SystemResult:
    density = ingest_external_density(*paths, n_points=config.n_points)
    system_id = "+".join(Path(p).stem for p in paths)
    return SystemResult(system_id, density.N, entropy_report(density), density=density)


# --- outputs ------------------------------------------------------------------


def write_atomic(path, text: str):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_figure_data(fits, labels, n_min: int = 2, n_max: int = 100) -> str:
    """Plot-ready CSV: one fitted-curve column ``S_<label>`` per fit sampled at
    every integer N in [n_min, n_max], plus ``points_<label>`` scatter
    columns holding the computed values at their N (blank elsewhere)."""
    fits = list(fits)
    labels = list(labels)
    if not fits:
        raise InvalidArgumentError("need at least one fit")
    if len(labels) != len(fits):
        raise InvalidArgumentError("one label per fit required")
    Ns = set(range(n_min, n_max + 1))
    scatter = []
    for fit in fits:
        pts = {}
        for n, s in fit.points:
            if float(n).is_integer():
                n = int(n)
            pts[n] = s
            Ns.add(n)
        scatter.append(pts)
    with_points = [i for i, pts in enumerate(scatter) if pts]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["N"] + [f"S_{lab}" for lab in labels] + [f"points_{labels[i]}" for i in with_points]
    )
    for n in sorted(Ns):
        row = [f"{n:.6g}"] + [f"{float(fit(n)):.6g}" for fit in fits]
        row += [f"{scatter[i][n]:.6g}" if n in scatter[i] else "" for i in with_points]
        writer.writerow(row)
    return buf.getvalue()


def _figure_fits(report: RunReport):
    mine = {"cluster_ws": "clusters", "nucleus_ho": "nuclei", "external": "external"}[
        report.config.mode
    ]
    fits, labels = [], []
    for label, key in FIGURE_REFERENCES.items():
        if label == mine:
            continue
        fits.append(ScalingFit.reference(key))
        labels.append(label)
    if "S_sum" in report.fits:
        fits.append(report.fits["S_sum"])
        labels.append(mine)
    return fits, labels


def _write_outputs(report: RunReport):
    out = Path(report.config.output_dir)
    for res in report.systems:
        if res.levels is not None:
            write_atomic(out / "levels" / f"{res.system_id}.csv", levels_to_csv(res.levels))
    write_atomic(
        out / "entropies.csv", report_to_csv([(r.system_id, r.entropy) for r in report.systems])
    )
    payload = {
        "mode": report.config.mode,
        "fits": {k: f.to_dict() for k, f in report.fits.items()},
        "reference": report.comparison,
        "boltzmann": report.boltzmann,
        "failures": [{"system_id": s, "error": m} for s, m, _ in report.failures],
    }
    write_atomic(out / "fits.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")
    fits, labels = _figure_fits(report)
    write_atomic(out / "figure.csv", emit_figure_data(fits, labels))


def run_pipeline(config: RunConfig) -> RunReport:
    """Process every system of ``config``; fit once at least two succeed.

    In strict filling mode every particle count is checked against the level
    scheme before any transform or density work starts; a non-closure aborts
    the whole run with :class:`ClosureError`.
    """
    systems, failures = [], []
    if config.mode == "external":
        for paths in config.external_files:
            sid = "+".join(Path(p).stem for p in paths)
            try:
                systems.append(_external_system(paths, config))
            except ShellEntropyError as exc:
                log.error("%s: %s", sid, exc)
                failures.append((sid, str(exc), exc.exit_code))
    else:
        specs = [system_spec(config, N) for N in config.particle_counts]
        schemes = {}
        for spec in specs:
            sid = f"{config.mode}_N{spec.N_particles}"
            try:
                schemes[sid] = solve_levels(spec, config)
            except ShellEntropyError as exc:
                log.error("%s: %s", sid, exc)
                failures.append((sid, str(exc), exc.exit_code))
                continue
            if config.filling is FillingMode.STRICT_CLOSED:
                # raises ClosureError before any system is processed further
                fill_shells(schemes[sid], spec.N_particles, config.filling)
        for spec in specs:
            sid = f"{config.mode}_N{spec.N_particles}"
            if sid not in schemes:
                continue
            try:
                systems.append(compute_system(spec, config, schemes[sid], sid))
            except ShellEntropyError as exc:
                log.error("%s: %s", sid, exc)
                failures.append((sid, str(exc), exc.exit_code))

    fits, comparison, boltzmann = {}, {}, {}
    if len({s.N for s in systems}) >= 2:
        for key in ("S_r", "S_k", "S_sum"):
            pts = [(s.N, getattr(s.entropy, key)) for s in systems]
            fits[key] = fit_log_linear(pts, label=f"{config.mode}_{key}")
        for key, ref in COMPARE_KEYS[config.mode].items():
            a, b = REFERENCE_FITS[ref]
            comparison[key] = {
                "reference": ref,
                "a_ref": a,
                "b_ref": b,
                "a": fits[key].a,
                "b": fits[key].b,
                "delta_a": fits[key].a - a,
                "delta_b": fits[key].b - b,
            }
        try:
            inv, text = boltzmann_analogy(fits["S_sum"])
            boltzmann = {"inv_N0": inv, "report": text}
        except ShellEntropyError as exc:
            boltzmann = {"inv_N0": None, "report": str(exc)}
    elif systems or failures:
        msg = f"fit skipped: only {len(systems)} system(s) succeeded"
        log.warning(msg)
        if not failures:
            failures.append(("fit", msg, InsufficientDataError.exit_code))
    report = RunReport(config, systems, failures, fits, comparison, boltzmann)
    if config.output_dir:
        _write_outputs(report)
    return report


__all__ = [
    "ClosureError",
    "RunConfig",
    "RunReport",
    "SystemResult",
    "compute_system",
    "emit_figure_data",
    "load_config",
    "run_pipeline",
    "write_atomic",
]
