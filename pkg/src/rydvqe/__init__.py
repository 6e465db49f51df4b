"""Digital-analog VQE simulation for Rydberg atom arrays."""

from .dynamics import (
    DriveSegment,
    PulseSequence,
    QuantumState,
    build_hamiltonian,
    evolve,
    prepare_product_state,
    ucc_xy_state,
)
from .measurement import (
    DerandomizedPlan,
    ShotBatch,
    allocate_shots,
    derandomize,
    empirical_average,
    estimate_energy,
    sample,
)
from .pauli import (
    FermionHamiltonian,
    PauliHamiltonian,
    PauliString,
    expectation,
    ground_energy_exact,
    hits,
    jordan_wigner,
    multiply,
    parse_hamiltonian,
    to_matrix,
)
from .register import (
    InteractionModel,
    Register,
    embedding_score,
    interaction_matrix,
    optimize_register,
    target_matrix,
)
from .vqe import (
    VqeConfig,
    VqeTrace,
    relative_error,
    run_alternating,
    run_iterative_pulse,
    run_phase_ansatz,
    run_ucc_xy,
    scan_product_states,
    split_time_label,
)

__version__ = "0.1.0"
