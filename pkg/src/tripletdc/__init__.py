"""Simulation toolkit for intracavity degenerate triplet down conversion.

An optical cavity holds a low-energy mode a and a pumped high-energy mode b
at three times the frequency; a chi^(3) medium converts one b photon into
three a photons and back. The package simulates the driven, damped system
four ways that cross-check each other:

* semiclassical mean-field equations, steady states and stability
  (`tripletdc.semiclassical`),
* exact-in-principle stochastic phase-space trajectories of the truncated
  positive-P equations (`tripletdc.ensemble`),
* linearized fluctuation spectra around stable steady states, giving output
  squeezing and Duan-Simon entanglement bands (`tripletdc.spectra`),
* Monte Carlo wave-function evolution in a truncated Fock basis for
  independent validation at small photon number (`tripletdc.mcwf`).

`tripletdc.nonlinearity` estimates the physical coupling rate from material
and geometry data, and `tripletdc.cli` exposes everything as subcommands
writing CSV plus a JSON run manifest.
"""

from tripletdc.semiclassical import (
    SystemParams,
    DriveSchedule,
    SteadyStateSolution,
    pump_threshold,
    steady_state_branches,
    semiclassical_drift,
    integrate_semiclassical,
    numeric_steady_state,
    classify_stability,
)
from tripletdc.ensemble import (
    PhaseSpacePoint,
    EnsembleConfig,
    MomentSeries,
    QuadratureStats,
    run_ensemble,
    quadrature_statistics,
    transition_region_flag,
    phase_space_drift,
    noise_amplitudes,
)
from tripletdc.spectra import (
    drift_matrix,
    diffusion_matrix,
    stability_check,
    spectrum_matrix,
    quadrature_spectrum,
    output_covariances,
    duan_simon,
    spectrum_scan,
)
from tripletdc.mcwf import FockConfig, build_operators, mcwf_ensemble, compare_methods
from tripletdc.nonlinearity import MaterialGeometry, ModeProfileGrid, modal_overlap, estimate_kappa

__version__ = "0.1.0"

__all__ = [
    "SystemParams", "DriveSchedule", "SteadyStateSolution",
    "pump_threshold", "steady_state_branches", "semiclassical_drift",
    "integrate_semiclassical", "numeric_steady_state", "classify_stability",
    "PhaseSpacePoint", "EnsembleConfig", "MomentSeries", "QuadratureStats",
    "run_ensemble", "quadrature_statistics", "transition_region_flag",
    "phase_space_drift", "noise_amplitudes",
    "drift_matrix", "diffusion_matrix", "stability_check", "spectrum_matrix",
    "quadrature_spectrum", "output_covariances", "duan_simon", "spectrum_scan",
    "FockConfig", "build_operators", "mcwf_ensemble", "compare_methods",
    "MaterialGeometry", "ModeProfileGrid", "modal_overlap", "estimate_kappa",
    "__version__",
]
