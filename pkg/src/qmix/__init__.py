"""Wave mixing spectra of a resonantly driven two-level emitter.

Three drive scenarios share one rotating frame and one integrator: two
coherent tones, one tone inside a pair-correlated (squeezed) bath, and
one tone alongside a periodic single-photon emitter.  Closed-form
quasi-static references, an independent density-matrix solver, and
photon-exchange bookkeeping validate every numerical spectrum.
"""

__version__ = "0.1.0"

from .model import (
    BlochState,
    ConfigError,
    DomainError,
    EnvelopeMode,
    Fock,
    FrameConfig,
    GROUND,
    IntegrationError,
    OracleError,
    QmixError,
    QubitParams,
    RunSettings,
    Squeezed,
    Trajectory,
    TwoTone,
    ValidationReport,
    derive_gamma,
    denormalize_units,
    load_config,
    normalize_units,
    parse_config,
    purity_check,
    validate_scenario,
    validate_setup,
)
from .analytic import (
    FockCoeffs,
    SqueezedWeakDrive,
    TwoToneMixing,
    emitter_pulse_state,
    fock_coeffs,
    fock_envelope_spectrum,
    lambda_mix,
    pulse_correlators,
    single_drive_steady,
    squeezed_steady,
    squeezed_steady_spectrum,
    squeezed_weak_drive,
    squeezed_weak_spectrum,
    theta_mix,
    two_tone_mixing,
    two_tone_series,
    two_tone_spectrum,
    two_tone_steady,
)
from .dynamics import (
    CorrelatorDrive,
    density_matrix_oracle,
    integrate,
    rhs_fock,
    rhs_squeezed,
    rhs_two_tone,
    steady_state_detect,
)
from .spectra import (
    PeakReport,
    SpectrumTable,
    compare_tables,
    emitted_amplitude,
    extract_component,
    peak_report,
    read_spectrum_csv,
    spectrum_table,
    write_spectrum_csv,
    write_trajectory_csv,
)
from .multiphoton import (
    ProcessDescriptor,
    allowed_indices,
    predicted_scaling,
    process_descriptor,
)

__all__ = [name for name in dir() if not name.startswith("_")]
