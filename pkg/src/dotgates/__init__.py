"""Intrinsic multi-qubit gate synthesis and verification for quantum-dot arrays."""

from .model import (
    Bond,
    DegenerateChargeState,
    Dot,
    DotArray,
    array_from_json,
    array_to_json,
    bond_vector,
    effective_velocity,
    exchange_energy,
    grid_vector,
    tunneling_from_soi,
)
from .gates import (
    ControlAnalysis,
    DynamicsCandidates,
    FreePhase,
    GateSpec,
    MqcpFactor,
    NoBondVelocity,
    ParitySolution,
    PhaseVector,
    assert_single_control,
    decompose_intrinsic,
    equiv_up_to_free_phase,
    ideal_gate_vector,
    mqcp_phase_solution,
    parity_matrix,
    solve_dynamics,
    solve_parity,
)
from .simulate import (
    DegenerateSpectrum,
    EigensolverFailure,
    SimReport,
    average_gate_fidelity,
    build_hamiltonian,
    fidelity_lower_bound,
    ideal_evolution,
    optimal_phase_correction,
    perturbation_second_order,
    pulsed_evolution,
    qubit_frame_evolution,
    simulate_gate,
)
from .calibrate import (
    BudgetExceeded,
    CalibrationTarget,
    InfeasibleSchedule,
    PauliAssignment,
    PulseSchedule,
    Stage,
    assignment_vectors,
    accumulated_bond_phases,
    conjugated_grid_vector,
    extra_local_phases,
    kspace_path,
    solve_intervals,
    time_upper_bound,
    weave_dd,
)
from .circuits import (
    consecutive_ones_parity,
    logical_z_triangle,
    order_reversal,
    parity_check_circuit,
    surface_code_cycle_unit,
)

__version__ = "0.1.0"
