"""Wavelength assignment for QKD channels sharing a DWDM link with classical data."""

from .assign import (
    Method,
    PlanResult,
    algorithm1,
    brute_force_noise,
    brute_force_rate,
    check_lemma1,
    conventional,
    cost_matrix,
    dual_fiber_split,
    optimize,
)
from .grid import (
    DwdmParams,
    NoiseMode,
    QkdParams,
    ScenarioConfig,
    Structure,
    beta,
    build_grid,
    default_raman_table,
    launch_power_w,
    load_raman_table,
)
from .rate import fit_linear_model, noise_threshold, secret_key_rate, transmissivity
from .system import Assignment, LinkContext, channel_noise

__version__ = "0.1.0"
