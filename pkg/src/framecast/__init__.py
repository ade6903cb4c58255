"""Objectivity of quantum states across reference frames.

The package has four layers: dense linear algebra (:mod:`.linalg`) and
ring geometry (:mod:`.ring`) at the bottom; broadcast-structure metrics
(:mod:`.metrics`) and closed-form Gaussian fidelities (:mod:`.gaussian`)
on top of them; the dynamical case runner (:mod:`.dynamics`) and
structural checkers (:mod:`.checkers`) above those; and a CLI
(:mod:`.cli`) with file plumbing (:mod:`.fileio`) on top.
"""

from .linalg import (
    DensityMatrix,
    HermitianOperator,
    SubsystemLayout,
    ValidationError,
    evolve,
    fidelity_B,
    matrix_sqrt,
    overlap_L,
    partial_trace,
    tensor,
    trace_norm,
    von_neumann_entropy,
)
from .ring import (
    FramePermutation,
    RingCoordinate,
    apply_frame_transform,
    build_frame_permutation,
    cycle_structure,
    permutation_character,
)
from .metrics import (
    SaturationStats,
    SbsReport,
    compile_report,
    conditional_mutual_information,
    conditional_state,
    decoherence_gamma,
    error_bounds,
    eta_bound,
    holevo_information,
    quantum_mutual_information,
    saturation_stats,
    system_spectrum,
)
from .gaussian import (
    GaussianBranch,
    MacrofractionSpec,
    fidelity_incoherent_pair,
    fidelity_transformed_env,
    fidelity_transformed_system,
    linear_fidelity_coherent_system,
    macrofraction_fidelity,
    sweep_localisation_vs_fraction,
)
from .dynamics import (
    CASE_IDS,
    CaseConfig,
    CaseResult,
    Couplings,
    desk_preset,
    initial_state,
    paper_preset,
    run_case,
    seeded_rng,
)
from .checkers import (
    BranchSpec,
    CheckReport,
    ConditionalState,
    TabulatedMap,
    Wavefunction,
    check_injectivity,
    check_mixture_objectivity,
    check_reduced_objectivity,
    check_strict_objectivity,
    ghz_frame_transform,
    instantiate_on_ring,
    localized_branch_spec,
)

__version__ = "0.1.0"

__all__ = [
    "DensityMatrix",
    "HermitianOperator",
    "SubsystemLayout",
    "ValidationError",
    "evolve",
    "fidelity_B",
    "matrix_sqrt",
    "overlap_L",
    "partial_trace",
    "tensor",
    "trace_norm",
    "von_neumann_entropy",
    "FramePermutation",
    "RingCoordinate",
    "apply_frame_transform",
    "build_frame_permutation",
    "cycle_structure",
    "permutation_character",
    "SaturationStats",
    "SbsReport",
    "compile_report",
    "conditional_mutual_information",
    "conditional_state",
    "decoherence_gamma",
    "error_bounds",
    "eta_bound",
    "holevo_information",
    "quantum_mutual_information",
    "saturation_stats",
    "system_spectrum",
    "GaussianBranch",
    "MacrofractionSpec",
    "fidelity_incoherent_pair",
    "fidelity_transformed_env",
    "fidelity_transformed_system",
    "linear_fidelity_coherent_system",
    "macrofraction_fidelity",
    "sweep_localisation_vs_fraction",
    "CASE_IDS",
    "CaseConfig",
    "CaseResult",
    "Couplings",
    "desk_preset",
    "initial_state",
    "paper_preset",
    "run_case",
    "seeded_rng",
    "BranchSpec",
    "CheckReport",
    "ConditionalState",
    "TabulatedMap",
    "Wavefunction",
    "check_injectivity",
    "check_mixture_objectivity",
    "check_reduced_objectivity",
    "check_strict_objectivity",
    "ghz_frame_transform",
    "instantiate_on_ring",
    "localized_branch_spec",
    "__version__",
]
