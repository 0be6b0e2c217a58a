"""Mean-field potentials: Woods-Saxon (metallic clusters) and harmonic
oscillator (nuclei)."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from . import constants as C
from .errors import InvalidArgumentError


class PotentialKind(str, enum.Enum):
    WOODS_SAXON = "woods_saxon"
    HARMONIC_OSCILLATOR = "harmonic_oscillator"


# beyond this many diffuseness lengths the Fermi function is exactly zero
_FERMI_CUTOFF = 500.0


@dataclass(frozen=True)
class PotentialSpec:
    """A spherical mean field plus the kinetic constant hbar^2/2m.

    Energies and lengths are in whatever unit pair ``kinetic_constant`` uses
    (eV/Angstrom for clusters, MeV/fm for nuclei).
    """

    kind: PotentialKind
    N_particles: int
    kinetic_constant: float
    V0: float | None = None
    r0: float | None = None
    a: float | None = None
    hbar_omega: float | None = None
    spin_degeneracy: int = C.ELECTRON_SPIN_DEGENERACY
    energy_unit: str = "eV"
    length_unit: str = "angstrom"

    def __post_init__(self):
        object.__setattr__(self, "kind", PotentialKind(self.kind))
        if self.N_particles < 1:
            raise InvalidArgumentError("N_particles must be >= 1")
        if not self.kinetic_constant > 0:
            raise InvalidArgumentError("kinetic_constant must be positive")
        if self.kind is PotentialKind.WOODS_SAXON:
            for name in ("V0", "r0", "a"):
                value = getattr(self, name)
                if value is None or not value > 0:
                    raise InvalidArgumentError(f"Woods-Saxon {name} must be positive")
        elif self.hbar_omega is None or not self.hbar_omega > 0:
            raise InvalidArgumentError("hbar_omega must be positive")

    @property
    def R(self) -> float:
        """Woods-Saxon half-density radius r0 * N^(1/3)."""
        if self.kind is not PotentialKind.WOODS_SAXON:
            raise AttributeError("R is defined for Woods-Saxon potentials only")
        return self.r0 * self.N_particles ** (1.0 / 3.0)

    @property
    def oscillator_length(self) -> float:
        """b = sqrt(hbar / m omega) = sqrt(2 K / hbar omega)."""
        if self.kind is not PotentialKind.HARMONIC_OSCILLATOR:
            raise AttributeError("oscillator_length is defined for HO potentials only")
        return math.sqrt(2.0 * self.kinetic_constant / self.hbar_omega)

    @property
    def characteristic_length(self) -> float:
        """Shortest length scale of the potential (sets the momentum cutoff)."""
        if self.kind is PotentialKind.WOODS_SAXON:
            return self.a
        return self.oscillator_length

    def with_particles(self, N: int) -> "PotentialSpec":
        return replace(self, N_particles=N)


def evaluate_potential(spec: PotentialSpec, r):
    """Potential energy at radius ``r`` (scalar or array)."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0) or not np.all(np.isfinite(r_arr)):
        raise InvalidArgumentError("radius must be finite and non-negative")
    if spec.kind is PotentialKind.WOODS_SAXON:
        x = (r_arr - spec.R) / spec.a
        with np.errstate(over="ignore"):
            fermi = np.where(x > _FERMI_CUTOFF, 0.0, 1.0 / (1.0 + np.exp(np.minimum(x, _FERMI_CUTOFF))))
        v = -spec.V0 * fermi
    else:
        v = spec.hbar_omega**2 / (4.0 * spec.kinetic_constant) * r_arr**2
    return float(v) if np.ndim(v) == 0 else v


def default_cluster_spec(N: int) -> PotentialSpec:
    """Woods-Saxon field of a neutral Na cluster with N valence electrons."""
    if N < 1:
        raise InvalidArgumentError(f"cluster needs N >= 1, got {N}")
    return PotentialSpec(
        kind=PotentialKind.WOODS_SAXON,
        N_particles=int(N),
        kinetic_constant=C.HBAR2_2ME_EV_A2,
        V0=C.CLUSTER_V0_EV,
        r0=C.CLUSTER_R0_A,
        a=C.CLUSTER_A_A,
        spin_degeneracy=C.ELECTRON_SPIN_DEGENERACY,
        energy_unit="eV",
        length_unit="angstrom",
    )


def default_nucleus_spec(A: int, hbar_omega: float | None = None) -> PotentialSpec:
    """Oscillator nucleus with hbar*omega = 41 A^(-1/3) MeV unless overridden."""
    if A < 2:
        raise InvalidArgumentError(f"nucleus needs A >= 2, got {A}")
    if hbar_omega is None:
        hbar_omega = C.HO_OMEGA_COEFF_MEV * A ** (-1.0 / 3.0)
    return PotentialSpec(
        kind=PotentialKind.HARMONIC_OSCILLATOR,
        N_particles=int(A),
        kinetic_constant=C.HBAR2_2MN_MEV_FM2,
        hbar_omega=float(hbar_omega),
        spin_degeneracy=C.NUCLEON_SPIN_ISOSPIN_DEGENERACY,
        energy_unit="MeV",
        length_unit="fm",
    )


# --- plain-text serialisation -------------------------------------------

_KIND_NAMES = {
    "woods_saxon": PotentialKind.WOODS_SAXON,
    "ws": PotentialKind.WOODS_SAXON,
    "harmonic_oscillator": PotentialKind.HARMONIC_OSCILLATOR,
    "ho": PotentialKind.HARMONIC_OSCILLATOR,
}


def spec_to_text(spec: PotentialSpec) -> str:
    """Serialise to ``key = value`` lines (keys: kind, V0_eV, r0_A, a_A,
    hbar_omega_MeV, N)."""
    lines = [f"kind = {spec.kind.value}", f"N = {spec.N_particles}"]
    if spec.kind is PotentialKind.WOODS_SAXON:
        lines += [f"V0_eV = {spec.V0!r}", f"r0_A = {spec.r0!r}", f"a_A = {spec.a!r}"]
    else:
        lines.append(f"hbar_omega_MeV = {spec.hbar_omega!r}")
    return "\n".join(lines) + "\n"


def spec_from_text(text: str) -> PotentialSpec:
    """Inverse of :func:`spec_to_text`; missing parameters take defaults."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidArgumentError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key] = value
    return spec_from_mapping(values)


def spec_from_mapping(values) -> PotentialSpec:
    try:
        kind = _KIND_NAMES[str(values.get("kind", "woods_saxon")).lower()]
    except KeyError:
        raise InvalidArgumentError(f"unknown potential kind {values.get('kind')!r}")
    try:
        N = int(values.get("N", 1))
        if kind is PotentialKind.WOODS_SAXON:
            spec = default_cluster_spec(N)
            return replace(
                spec,
                V0=float(values.get("V0_eV", spec.V0)),
                r0=float(values.get("r0_A", spec.r0)),
                a=float(values.get("a_A", spec.a)),
            )
        omega = values.get("hbar_omega_MeV")
        return default_nucleus_spec(N, None if omega is None else float(omega))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidArgumentError):
            raise
        raise InvalidArgumentError(f"bad potential parameter: {exc}") from exc
