"""Wave-particle-entanglement triality for qubit and qutrit interferometers
under amplitude and phase damping."""

from .core import (
    BlochVector,
    DensityMatrix,
    DetectorGram,
    DimensionError,
    GellMannVector,
    InvalidStateError,
    PureState,
    composite_state,
    density_from_pure,
    gellmann_decompose,
    gellmann_reconstruct,
    gram_from_detector_states,
    partial_trace_detector,
    pauli_decompose,
    pauli_reconstruct,
    purity,
    reduced_density,
)
from .measures import (
    ComplementarityTriple,
    entanglement2_pairwise,
    entanglement2_residual,
    predictability2,
    residual_triple,
    triality_triple,
    visibility2,
)
from .channels import (
    KrausChannel,
    NotCPTPError,
    amplitude_damping_qubit,
    apply,
    cascade_ad_qutrit,
    compare_paper_vs_oracle,
    compose,
    paper_kraus_ad_qutrit,
    phase_damping_qubit,
    phase_damping_qutrit,
    qutrit_decay_step,
    validate_cptp,
)

__version__ = "0.1.0"
