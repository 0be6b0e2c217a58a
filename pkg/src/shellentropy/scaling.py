"""Log-linear scaling fits S = a + b ln N and the Boltzmann-entropy analogy
S = b ln(N / N0), with W = N / N0 microstates."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDesignError, InsufficientDataError, UndefinedAnalogyError

#: published (a, b) coefficients of S = a + b ln N, normalisation to one
REFERENCE_FITS = {
    "atoms_TF_sum": (6.65, 1.0),
    "atoms_HF_sum": (6.257, 1.007),
    "nuclei_HO_sum": (5.287, 0.870),
    "clusters_WS_Sr": (4.133, 0.934),
    "clusters_WS_Sk": (1.563, -0.027),
    "clusters_WS_sum": (5.695, 0.907),
    "nuclei_SKIII_Sr": (3.395, 0.767),
    "nuclei_SKIII_Sk": (1.929, 0.091),
    "nuclei_SKIII_sum": (5.319, 0.860),
}

#: quoted 1/N0 values and the rough universal estimate
REFERENCE_INV_N0 = {"atoms": 500.0, "nuclei": 485.0, "clusters": 533.0}
UNIVERSAL_INV_N0 = 500.0


@dataclass
class ScalingFit:
    a: float
    b: float
    points: list  # of (N, S)
    rms_residual: float
    label: str = ""

    @property
    def inv_N0(self) -> float | None:
        """e^(a/b); undefined for b == 0."""
        if self.b == 0:
            return None
        try:
            return math.exp(self.a / self.b)
        except OverflowError:
            return math.inf

    @property
    def W_of_N(self) -> str:
        inv = self.inv_N0
        return "undefined (b = 0)" if inv is None else f"W(N) = {inv:.3g} N"

    def __call__(self, N):
        return self.a + self.b * np.log(N)

    def residuals(self) -> np.ndarray:
        N, S = np.array(self.points, dtype=float).T
        return S - self(N)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "a": self.a,
            "b": self.b,
            "rms": self.rms_residual,
            "inv_N0": self.inv_N0 if self.inv_N0 is None or math.isfinite(self.inv_N0) else None,
            "points": [[float(n), float(s)] for n, s in self.points],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d) -> "ScalingFit":
        return cls(
            a=float(d["a"]),
            b=float(d["b"]),
            points=[tuple(p) for p in d.get("points", [])],
            rms_residual=float(d.get("rms", 0.0)),
            label=d.get("label", ""),
        )

    @classmethod
    def reference(cls, key: str) -> "ScalingFit":
        a, b = REFERENCE_FITS[key]
        return cls(a=a, b=b, points=[], rms_residual=0.0, label=key)


def fit_log_linear(points, label: str = "") -> ScalingFit:
    """Ordinary least squares of S on ln N."""
    pts = [(float(n), float(s)) for n, s in points]
    if len(pts) < 2:
        raise InsufficientDataError(f"need at least 2 points, got {len(pts)}")
    N, S = np.array(pts).T
    if np.any(N <= 0):
        raise InsufficientDataError("particle numbers must be positive")
    if np.unique(N).size < 2:
        raise DegenerateDesignError("all points share one N; slope is undetermined")
    design = np.column_stack([np.ones_like(N), np.log(N)])
    (a, b), *_ = np.linalg.lstsq(design, S, rcond=None)
    resid = S - design @ np.array([a, b])
    rms = float(np.sqrt(np.mean(resid**2)))
    return ScalingFit(float(a), float(b), pts, rms, label)


def boltzmann_analogy(fit: ScalingFit):
    """1/N0 = e^(a/b) and a short report against the quoted values.

    Raises UndefinedAnalogyError for b <= 0 (no ln(N/N0) form).
    """
    if not fit.b > 0:
        raise UndefinedAnalogyError(f"analogy needs b > 0, got b = {fit.b}")
    inv = fit.inv_N0
    if math.isinf(inv):
        raise UndefinedAnalogyError(f"1/N0 = exp({fit.a:.4g} / {fit.b:.3g}) overflows")
    name = fit.label or "fit"
    lines = [
        f"{name}: S = {fit.a:.4g} + {fit.b:.4g} ln N = {fit.b:.4g} ln(N / N0), "
        f"1/N0 = {inv:.3g}",
        f"  S_phys = k {fit.b:.3g} ln({inv:.3g} N); universal estimate k ln({UNIVERSAL_INV_N0:.0f} N)",
    ]
    for system, quoted in REFERENCE_INV_N0.items():
        lines.append(f"  quoted 1/N0 for {system}: {quoted:.0f} (ratio {inv / quoted:.3f})")
    return inv, "\n".join(lines)


def reference_fits() -> dict:
    return dict(REFERENCE_FITS)


def fit_curve_csv(fit: ScalingFit, n_min: int = 2, n_max: int = 100) -> str:
    """Fitted curve sampled at integer N in [n_min, n_max]."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["N", "S"])
    for n in range(n_min, n_max + 1):
        writer.writerow([n, f"{float(fit(n)):.6g}"])
    return buf.getvalue()
