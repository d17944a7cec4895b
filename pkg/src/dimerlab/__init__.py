"""Two-mode (dimer) reduction of the double-well nonlinear Schrodinger problem.

Subpackages/modules:
    core        closed-form model functions and critical constants
    stationary  fixed points, stability, bifurcation diagrams, portraits
    dynamics    adaptive integration of both charts, beating diagnostics
    reduction   double-well eigenproblem and dimer constants (omega, c, eta)
    cli         command-line front end (CSV/JSON/SVG outputs)
"""

__version__ = "0.1.0"

from .core import (
    AmplitudePair,
    DimerParams,
    PhasePoint,
    StabilityTag,
    amplitude_hamiltonian,
    d2eta_at_zero,
    eta_of_z,
    eta_plus,
    eta_star,
    f_pm,
    fold_condition,
    g_func,
    hamiltonian,
    mu_threshold,
    to_amplitudes,
    to_phase,
    vector_field,
)
from .dynamics import Trajectory, beating_period, integrate_amplitudes, integrate_phase
from .reduction import (
    PotentialSpec,
    ReductionResult,
    compute_c,
    cross_terms,
    epsilon_of_eta,
    map_epsilon_to_eta,
    solve_doublet,
)
from .stationary import (
    Branch,
    BranchLabel,
    BranchSample,
    PhasePortrait,
    StationaryPoint,
    bifurcation_diagram,
    classify_stability,
    find_stationary_points,
    phase_portrait,
)

__all__ = [
    "AmplitudePair",
    "Branch",
    "BranchLabel",
    "BranchSample",
    "DimerParams",
    "PhasePoint",
    "PhasePortrait",
    "PotentialSpec",
    "ReductionResult",
    "StabilityTag",
    "StationaryPoint",
    "Trajectory",
    "amplitude_hamiltonian",
    "beating_period",
    "bifurcation_diagram",
    "classify_stability",
    "compute_c",
    "cross_terms",
    "d2eta_at_zero",
    "epsilon_of_eta",
    "eta_of_z",
    "eta_plus",
    "eta_star",
    "f_pm",
    "find_stationary_points",
    "fold_condition",
    "g_func",
    "hamiltonian",
    "integrate_amplitudes",
    "integrate_phase",
    "map_epsilon_to_eta",
    "mu_threshold",
    "phase_portrait",
    "solve_doublet",
    "to_amplitudes",
    "to_phase",
    "vector_field",
]
