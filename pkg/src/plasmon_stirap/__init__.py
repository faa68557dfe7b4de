"""Plasmon-mediated adiabatic population transfer between quantum emitters.

Library + CLI building mode-selective effective Hamiltonians for emitters
coupled to the localized surface plasmons of a metal nanosphere (through
canonical orthonormalization of their overlapping bright modes) and
simulating STIRAP-driven transfer between two of them.
"""

__version__ = "0.1.0"

from .greens import (
    CouplingSpectrum,
    EmitterSpec,
    ModeResonance,
    NanoparticleModel,
    coupling_spectrum,
    drude_permittivity,
    fit_lorentzian,
    im_green_radial,
    mode_polarizability,
    mode_resonance,
    mode_resonance_frequency,
    partial_ldos,
    peak_partial_ldos,
    select_modes,
)
from .lowdin import (
    LowdinDecomposition,
    OverlapMatrix,
    canonical_orthonormalize,
    eigendecompose_rank,
    gram_matrix,
    mode_overlap,
    overlap_matrix,
    reconstruct_originals,
    two_emitter_closed_form,
)
from .hamiltonian import (
    BasisLabel,
    EffectiveHamiltonian,
    adiabatic_eliminate,
    add_drive,
    assemble_effective,
    enumerate_basis,
)
from .dynamics import PulsePair, Trajectory, evaluate_pulses, propagate, transfer_efficiency
from .config import RunConfig, parse_config, render_config
from .pipeline import (
    StirapResult,
    build_effective_hamiltonian,
    distance_study,
    run_stirap,
    scan_angle_area,
    truncation_index,
    truncation_study,
)
