"""Command-line front end.

Verbs: ``run``, ``entropy``, ``fit``, ``figure``, ``levels``.
Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .bound_states import levels_to_csv
from .density import Normalization, entropy_report, ingest_external_density, report_to_csv
from .errors import InvalidArgumentError, ShellEntropyError
from .pipeline import (
    FIGURE_REFERENCES,
    MODES,
    RunConfig,
    emit_figure_data,
    load_config,
    run_pipeline,
    solve_levels,
    system_spec,
    write_atomic,
)
from .scaling import REFERENCE_FITS, ScalingFit, fit_log_linear

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(text: str, path):
    if path:
        write_atomic(path, text)
    else:
        sys.stdout.write(text)


def _add_grid_flags(p):
    g = p.add_argument_group("grid overrides")
    g.add_argument("--r-max", type=float)
    g.add_argument("--n-points", type=int)
    g.add_argument("--k-max", type=float)
    g.add_argument("--n-k", type=int)
    g.add_argument("--l-max", type=int)


def _overrides(args) -> dict:
    keys = ("r_max", "n_points", "k_max", "n_k", "l_max")
    out = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    if getattr(args, "hbar_omega", None) is not None:
        out["hbar_omega"] = args.hbar_omega
    return out


def cmd_run(args) -> int:
    fields = load_config(args.config).__dict__ if args.config else {}
    if args.mode:
        fields["mode"] = args.mode
    if args.N:
        fields["particle_counts"] = args.N
    if args.files:
        fields["external_files"] = [f.split("+") for f in args.files]
    if args.filling:
        fields["filling"] = args.filling
    if args.output:
        fields["output_dir"] = args.output
    fields.update(_overrides(args))
    fields.setdefault("output_dir", None)
    fields["output_dir"] = fields["output_dir"] or "shellentropy-out"
    config = RunConfig(**fields)
    report = run_pipeline(config)
    for sid, msg, _ in report.failures:
        print(f"FAILED {sid}: {msg}", file=sys.stderr)
    for key, fit in report.fits.items():
        line = f"{key:6s} = {fit.a:.4f} + {fit.b:.4f} ln N   (rms {fit.rms_residual:.3g})"
        ref = report.comparison.get(key)
        if ref:
            line += f"   reference {ref['reference']}: {ref['a_ref']} + {ref['b_ref']} ln N"
        print(line)
    if report.boltzmann:
        print(report.boltzmann["report"])
    print(f"outputs written to {config.output_dir}")
    return report.exit_code


def cmd_entropy(args) -> int:
    pair = ingest_external_density(*args.files, n_points=args.n_points, N=args.particles)
    if args.norm == "particle_number":
        pair = pair.to(Normalization.PARTICLE_NUMBER)
    res = entropy_report(pair)
    sid = args.id or "+".join(Path(f).stem for f in args.files)
    _emit(report_to_csv([(sid, res)]), args.output)
    return EXIT_OK


def _read_points(path):
    points = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                points.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                if lineno == 1:
                    continue  # header
                raise InvalidArgumentError(f"{path}:{lineno}: expected 'N,S'")
    return points


def cmd_fit(args) -> int:
    fit = fit_log_linear(_read_points(args.csv), label=args.label or Path(args.csv).stem)
    _emit(fit.to_json() + "\n", args.output)
    return EXIT_OK


def cmd_figure(args) -> int:
    fits, labels = [], []
    for path in args.fits:
        d = json.loads(Path(path).read_text())
        if "fits" in d:  # full run report: take the sum fit
            d = d["fits"]["S_sum"]
        fits.append(ScalingFit.from_dict(d))
        labels.append(d.get("label") or Path(path).stem)
    for key in args.reference or []:
        if key not in REFERENCE_FITS:
            raise InvalidArgumentError(f"unknown reference {key!r}; choose from {sorted(REFERENCE_FITS)}")
        fits.append(ScalingFit.reference(key))
        labels.append(key)
    if not fits:
        for label, key in FIGURE_REFERENCES.items():
            fits.append(ScalingFit.reference(key))
            labels.append(label)
    if args.label:
        if len(args.label) != len(fits):
            raise InvalidArgumentError("--label must be given once per fit")
        labels = args.label
    _emit(emit_figure_data(fits, labels, args.n_min, args.n_max), args.output)
    return EXIT_OK


def cmd_levels(args) -> int:
    config = RunConfig(mode=args.mode, particle_counts=[args.N], **_overrides(args))
    spec = system_spec(config, args.N)
    _emit(levels_to_csv(solve_levels(spec, config)), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="shellentropy", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run a pipeline from a config file and/or flags")
    p.add_argument("config", nargs="?", help="INI run config")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--N", type=int, nargs="+", help="particle counts")
    p.add_argument("--files", nargs="+", help="external systems; join pos+mom files with '+'")
    p.add_argument("--filling", choices=["strict_closed", "uniform_fractional"])
    p.add_argument("--hbar-omega", type=float, help="fixed HO quantum in MeV")
    p.add_argument("-o", "--output", help="output directory")
    _add_grid_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("entropy", help="entropy report for an external density")
    p.add_argument("files", nargs="+")
    p.add_argument("--particles", type=float, help="particle count (overrides '# N:')")
    p.add_argument("--norm", choices=["unit", "particle_number"], default="unit")
    p.add_argument("--n-points", type=int, default=4001)
    p.add_argument("--id")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("fit", help="fit S = a + b ln N to a CSV of (N, S)")
    p.add_argument("csv")
    p.add_argument("--label")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("figure", help="plot CSV of fitted curves")
    p.add_argument("fits", nargs="*", help="fit JSON files")
    p.add_argument("--reference", nargs="+", help=f"published fits: {', '.join(REFERENCE_FITS)}")
    p.add_argument("--label", nargs="+")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=100)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("levels", help="dump the level scheme of one system")
    p.add_argument("--mode", choices=MODES[:2], default="cluster_ws")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--hbar-omega", type=float)
    p.add_argument("-o", "--output")
    _add_grid_flags(p)
    p.set_defaults(func=cmd_levels)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ShellEntropyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
