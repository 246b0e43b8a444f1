"""Penalty-constrained VQE on a statevector simulator.

The public surface re-exports the operator algebra, fermion mappings,
circuit simulation, optimizers, VQE drivers and exact reference.
"""

from .circuit import (
    Ansatz,
    SampledEstimate,
    Statevector,
    apply_ansatz,
    build_ansatz,
    expval,
    parameter_shift_grad,
    sampled_expval,
)
from .engine import (
    Constraint,
    PenaltySchedule,
    SpvqeResult,
    VqeResult,
    check_mu_max,
    cvqe_run,
    final_remeasure,
    mu_max_lower_bound,
    penalized_cost,
    reconstructed_energy,
    spvqe_run,
    vqe_run,
)
from .errors import (
    CapacityError,
    DegenerateConstraintError,
    FcidumpError,
    InfeasibleSectorError,
    NonHermitianError,
    OptimizationError,
    SpvqeError,
    StructuralError,
    SymmetryViolationError,
)
from .exact import (
    ObservableError,
    SpectrumResult,
    constrained_ground_state,
    exact_spectrum,
    observable_error,
)
from .fcidump import FermionIntegrals, parse_fcidump, read_fcidump, write_fcidump
from .fermion import (
    FermionOperator,
    ReductionSector,
    build_hamiltonian,
    jordan_wigner,
    map_operator,
    map_problem,
    number_operator,
    parity_map,
    sector_for,
    total_spin_operator,
    two_qubit_reduction,
)
from .kernels import BACKEND
from .optimizers import (
    OptimizationTrace,
    OptimizerConfig,
    PenaltyStructure,
    cg_minimize,
    nft_minimize,
)
from .pauli import (
    PauliTerm,
    QubitOperator,
    commutator_norm,
    op_simplify,
    pauli_mul,
    to_matrix,
)

__version__ = "0.1.0"
