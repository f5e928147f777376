"""Simulator and verification toolkit for the translation-invariant Ising
sampling model on brickwork and cluster lattices."""

from .lattice import (
    AngleField,
    Lattice,
    build_brickwork,
    build_cluster,
    build_custom,
    canonical_angle_field,
    cell_angles,
    lattice_from_json,
    lattice_to_json,
    zero_angle_field,
)
from .statevec import (
    Distribution,
    MeasurementRecord,
    PhaseProgram,
    PureState,
    apply_local_unitary,
    apply_phase_program,
    compile_phase_program,
    distribution_in_bases,
    full_distribution,
    init_plus,
    postselect,
    rz,
    sample,
    state_fidelity,
    x_basis_amplitude,
)
from .partition import (
    ErrorBudget,
    PartitionValue,
    mixed_error_check,
    multiplicative_error_check,
    partition_function,
    partition_table,
    variation_distance,
    verify_born_partition_identity,
)
from .mbqc import (
    FlipRules,
    Gadget,
    ReductionPlan,
    absorb_fields,
    conditional_rotation_gadget,
    cz_network_state,
    cz_phase_decomposition,
    hrz_k_gadget,
    marginalize_square_to_brickwork,
    plan_reduction,
    propagate_single_measurement,
    red_site_measurement,
    reduce_cluster_to_brickwork,
    reduced_state_nominal,
    square_model_distribution,
)
from .certification import (
    CertificationReport,
    LocalTerm,
    NoiseBudget,
    NoiseModel,
    apply_measurement_noise,
    certify,
    energy_estimate,
    fidelity_and_trace_bounds,
    noise_budget_split,
    parent_hamiltonian,
    sample_budget,
)
from .ensemble import (
    BrickGate,
    brick_gate,
    is_entangling,
    porter_thomas_stat,
    random_brick_gate,
    random_instance_distribution,
)

__version__ = "0.1.0"
