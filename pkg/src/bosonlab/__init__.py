"""bosonlab: symbolic-numeric workbench for finite-mode bosonic systems.

The symbolic layer canonicalizes ladder-operator polynomials and carries the
two quantization maps (normal product and raw substitution); the numeric
layer realizes states and operators on truncated Fock spaces, verifies
trace identities for coherent-state ensembles, analyzes the quadratic
spectral operator, discretizes 1-D lattice fields into modes, and runs the
phase-space flow / Boltzmann-ensemble machinery.
"""

__version__ = "0.1.0"

from .errors import (
    BlowUpError,
    BosonLabError,
    ConfigError,
    DefiniteEnergyError,
    DimensionLimitError,
    ExpressionError,
    ModeMismatchError,
    NotHermitianError,
    NotRealValuedError,
    TruncationError,
    ValidationError,
)
from .expressions import (
    mode_names_for,
    parse_classical,
    parse_expression,
    parse_operator,
    parse_operator_words,
    parse_phase_space,
)
from .fock_numerics import (
    FockBasis,
    FockMatrix,
    FockVector,
    basis_vector,
    build_matrix,
    coherent_state,
    density_of,
    expectation,
    hermitian_eigen,
    trace_product,
    truncation_bound,
)
from .operator_algebra import (
    ClassicalPolynomial,
    ClassicalState,
    OperatorPolynomial,
    adjoint,
    evaluate_classical,
    format_classical_polynomial,
    format_operator_polynomial,
    multiply,
    normal_product,
    quantize_raw,
    word_polynomial,
)
from .phase_space import PhaseSpacePolynomial
from .pmap import (
    TraceCheckReport,
    WeightedEnsemble,
    adequate_basis,
    ensemble_from_text,
    ensemble_to_text,
    phase_quadrature,
    rho_of_ensemble,
    rho_of_state,
    trace_theorem_check,
)
from .spectral import (
    SpectralReport,
    analyze,
    build_M,
    classical_image_min,
    compare_with_square,
    delta_operator,
    level_set_sampler,
    zero_eigenspace,
)
from .lattice_field import (
    FieldConfiguration,
    LatticeModel,
    ModeTransform,
    classical_hamiltonian,
    field_energy,
    load_model,
    mode_variables,
    normal_hamiltonian,
    phase_space_hamiltonian,
)
from .ensemble_dynamics import (
    FlowEnsemble,
    InvarianceReport,
    OdeSystem,
    boltzmann_sample,
    divergence,
    divergence_polynomial,
    dual_operator,
    evolve,
    gaussian_oracle_moments,
    invariance_test,
    is_statistically_incompressible,
    snapshot_from_text,
    snapshot_to_text,
)
