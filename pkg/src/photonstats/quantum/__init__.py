from .basis import RestrictedBasis, build_basis, count_states
from .system import DetectorQ, EmitterQ, SystemSpec, rotating_frame
from .liouvillian import (basis_for, build_hamiltonian, build_liouvillian,
                          collapse_operators, liouvillian_matrix,
                          site_kinds_for, site_operators)
from .dynamics import (AmplitudeTrajectory, DensityState,
                       effective_hamiltonian_1exc, evolve,
                       evolve_lab_frame_driven, evolve_single_excitation,
                       vacuum_state)
from .steady import (SteadyStateError, WeakDriveSolution,
                     liouvillian_residual, steady_state, weak_drive_steady)
from .correlations import (CorrelationRecord, convolution_check,
                           correlation_record, detector_g1, detector_g2,
                           detector_population)

__all__ = [
    "RestrictedBasis", "build_basis", "count_states",
    "DetectorQ", "EmitterQ", "SystemSpec", "rotating_frame",
    "basis_for", "build_hamiltonian", "build_liouvillian",
    "collapse_operators", "liouvillian_matrix", "site_kinds_for",
    "site_operators",
    "AmplitudeTrajectory", "DensityState", "effective_hamiltonian_1exc",
    "evolve", "evolve_lab_frame_driven", "evolve_single_excitation",
    "vacuum_state",
    "SteadyStateError", "WeakDriveSolution", "liouvillian_residual",
    "steady_state", "weak_drive_steady",
    "CorrelationRecord", "convolution_check", "correlation_record",
    "detector_g1", "detector_g2", "detector_population",
]
