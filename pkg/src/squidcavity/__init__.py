"""Photon-state engineering with a SQUID charge qubit in a microwave cavity.

Compile carrier/red-sideband pulse sequences that prepare Fock states and
superpositions of a cavity field, simulate them (closed-form, matrix
exponential, or dissipative), and estimate device feasibility from circuit
and cavity parameters.
"""

from .compiler import (
    PulseSequence,
    PulseStep,
    TargetState,
    binary_superposition,
    fock_sequence,
    reachable,
    sequence_from_document,
    sequence_from_json,
    sequence_to_document,
    sequence_to_json,
    simulate_sequence,
    synthesize,
)
from .dynamics import (
    PulseKind,
    RabiRates,
    blue_propagator,
    carrier_propagator,
    idle_propagator,
    propagator,
    red_propagator,
    rwa_hamiltonian,
)
from .errors import (
    DimensionMismatch,
    HermiticityViolation,
    IndexOutOfRange,
    InvalidTarget,
    NotAPhysicalKnob,
    PhaseUnreachable,
    SquidCavityError,
    StepTooLarge,
    TruncationTooSmall,
)
from .hilbert import (
    E,
    G,
    Ket,
    basis_ket,
    basis_state,
    dimension,
    expm_hermitian,
    fidelity,
    flat_index,
    is_hermitian,
    is_unitary,
    ket_from_cavity_coefficients,
    ladder_operators,
    number_operator,
    vacuum,
)
from .lindblad import (
    DecayChannels,
    collapse_operators,
    density_from_ket,
    dissipative_fock_fidelity,
    evolve_density,
    lindblad_rhs,
)
from .physics import (
    CavityParams,
    DerivedParams,
    DeviceParams,
    FeasibilityReport,
    derive,
    eta_magnitude,
    feasibility_report,
    fock_ratio_curve,
    knob_settings,
    operation_times,
    photon_lifetime,
    ratio_curve_csv,
    report_to_json,
    thermal_occupation,
)

__version__ = "0.1.0"
