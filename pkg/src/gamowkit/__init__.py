"""Resonance states, Hardy-class wave functions and semigroup time evolution."""

__version__ = "0.1.0"

from .born import (
    DecayCurve,
    born_overlap,
    breit_wigner_wavefunction,
    fit_decay_rate,
    gamow_decay_curve,
    gamow_wavefunction,
    hilbert_survival_curve,
    lifetime_from_curve,
    observable_dyad,
    trace_probability,
)
from .errors import (
    CausalityError,
    ConfigError,
    ContourOverlapError,
    DomainError,
    GamowkitError,
    GridError,
    NotHardyError,
    PoleEvaluationError,
    ResolutionError,
    ShapeError,
)
from .evolution import (
    evolve_jordan_bra,
    evolve_jordan_ket,
    evolve_state_operator,
    evolve_W_PT,
    ket_propagator,
    run_evolution,
    unitary_evolve,
)
from .hardy import (
    EnergyGrid,
    HalfPlane,
    HardyReport,
    Rational,
    WaveFunction,
    analytic_continue,
    hardy_membership,
    hilbert_transform,
)
from .jordan import (
    CompositeBasis,
    HamiltonianMatrix,
    JordanKetCoeffs,
    StateOperator,
    assemble_hamiltonian,
    build_W_G,
    build_W_n,
    build_W_PT,
    gamow_ket,
    jordan_block,
)
from .smatrix import PoleSpec, SMatrixModel, evaluate, laurent_coefficient, load_model, pole_residues
