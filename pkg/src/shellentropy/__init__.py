"""Shannon information entropies of shell-filled fermion systems and the
scaling law S = a + b ln N."""

__version__ = "0.1.0"

from .bound_states import (
    FillingMode,
    OrbitalState,
    ShellFilling,
    enumerate_bound_levels,
    fill_shells,
    solve_bound_state,
)
from .density import (
    DensityPair,
    EntropyResult,
    Normalization,
    build_density,
    convert_normalization,
    entropy_report,
    ingest_external_density,
    shannon_entropy,
)
from .grid import RadialGrid, build_grid, integrate
from .momentum import MomentumOrbital, spherical_bessel, transform_to_momentum
from .pipeline import RunConfig, emit_figure_data, run_pipeline
from .potentials import (
    PotentialKind,
    PotentialSpec,
    default_cluster_spec,
    default_nucleus_spec,
    evaluate_potential,
)
from .scaling import ScalingFit, boltzmann_analogy, fit_log_linear, reference_fits
