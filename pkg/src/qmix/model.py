"""Parameter model for a driven two-level emitter mixed with a second signal.

A single qubit with radiative decay ``gamma_rad`` and pure dephasing
``gamma_phi`` is driven by a coherent tone at ``w1 = w_d + delta_w``.  The
second input at ``w2 = w_d - delta_w`` is one of

* a second coherent tone      (:class:`TwoTone`),
* broadband squeezed vacuum   (:class:`Squeezed`),
* a periodically re-prepared 0/1 photon superposition emitted by an
  auxiliary qubit             (:class:`Fock`).

All dynamics are expressed in the frame rotating at the midpoint frequency
``w_d``; only the offsets ``delta_w`` (tone half-splitting) and ``big_delta``
(qubit detuning from ``w_d``) enter the equations of motion.  Absolute
frequencies are bookkeeping and never appear here.

Rates are plain floats in a common unit system.  Internally the pipeline
normalizes everything to ``gamma_rad = 1`` (see :func:`normalize_units`);
the round trip through :func:`denormalize_units` is the identity.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

# Tolerance for physicality checks (Bloch-vector length, |M|^2 <= N(N+1)).
EPS_PHYS = 1e-9


class QmixError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(QmixError, ValueError):
    """Malformed or inconsistent configuration input."""


class DomainError(QmixError, ValueError):
    """Inputs outside the mathematical or physical domain of an operation."""


class IntegrationError(QmixError, RuntimeError):
    """Time integration aborted (non-finite state, no steady state, ...)."""


class OracleError(QmixError, RuntimeError):
    """No analytic reference is available for the requested comparison."""


def derive_gamma(gamma_rad: float, gamma_phi: float) -> float:
    """Total coherence decay rate: gamma_rad / 2 + gamma_phi."""
    if gamma_rad <= 0.0:
        raise DomainError(f"gamma_rad must be positive, got {gamma_rad}")
    if gamma_phi < 0.0:
        raise DomainError(f"gamma_phi must be non-negative, got {gamma_phi}")
    return 0.5 * gamma_rad + gamma_phi


@dataclass(frozen=True)
class QubitParams:
    gamma_rad: float            # radiative decay rate of the probed qubit
    gamma_phi: float = 0.0      # pure dephasing rate
    dipole_scale: float = 1.0   # mode-matching scale of the emitted field

    def __post_init__(self) -> None:
        derive_gamma(self.gamma_rad, self.gamma_phi)  # validates both
        if self.dipole_scale == 0.0:
            raise DomainError("dipole_scale must be non-zero")

    @property
    def gamma_tot(self) -> float:
        return derive_gamma(self.gamma_rad, self.gamma_phi)


@dataclass(frozen=True)
class FrameConfig:
    delta_w: float              # half-splitting of the two inputs, > 0
    big_delta: float = 0.0      # qubit detuning from the frame frequency

    def __post_init__(self) -> None:
        if not self.delta_w > 0.0:
            raise DomainError(f"delta_w must be positive, got {self.delta_w}")


class EnvelopeMode(enum.Enum):
    """Shape of the inter-pulse correlator envelope in the Fock scenario."""

    EXACT = "exact"   # exponential decay restarting at every pulse
    STEP = "step"     # unit envelope up to step_cutoff, zero afterwards


@dataclass(frozen=True)
class TwoTone:
    omega1: float               # Rabi amplitude of the tone at w_d + delta_w
    omega2: float               # Rabi amplitude of the tone at w_d - delta_w

    kind = "two_tone"


@dataclass(frozen=True)
class Squeezed:
    omega1: float               # Rabi amplitude of the coherent tone
    n_bath: float               # photon number N of the squeezed vacuum
    m_bath: complex             # squeezing correlation M, |M|^2 <= N(N+1)

    kind = "squeezed"


@dataclass(frozen=True)
class Fock:
    omega1: float               # Rabi amplitude of the coherent tone
    gamma_e: float              # decay rate of the auxiliary emitter qubit
    nu: float                   # excited-state weight of each pulse, in [0, 1]
    period: float               # re-preparation period T of the emitter
    envelope_mode: EnvelopeMode = EnvelopeMode.EXACT
    step_cutoff: Optional[float] = None     # step length; defaults to period
    unsigned_correlators: bool = False      # drop correlator signs/phases,
                                            # keeping only pulse magnitudes

    kind = "fock"


ScenarioConfig = Union[TwoTone, Squeezed, Fock]

_SCENARIO_KINDS = {"two_tone": TwoTone, "squeezed": Squeezed, "fock": Fock}


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a total validation pass: never raises, lists findings."""

    violations: tuple = ()      # hard errors; simulation must not proceed
    warnings: tuple = ()        # questionable but runnable settings
    flags: tuple = ()           # informational markers (e.g. pure squeezing)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_scenario(scenario: ScenarioConfig) -> ValidationReport:
    """Check scenario parameters against their physical domain.

    Total over all three scenario kinds: malformed values are reported in
    the returned :class:`ValidationReport`, never raised.
    """
    bad = []
    warn = []
    flags = []
    if isinstance(scenario, TwoTone):
        if scenario.omega1 < 0.0 or scenario.omega2 < 0.0:
            bad.append("drive amplitudes must be non-negative")
    elif isinstance(scenario, Squeezed):
        n = scenario.n_bath
        m2 = abs(complex(scenario.m_bath)) ** 2
        if scenario.omega1 < 0.0:
            bad.append("omega1 must be non-negative")
        if n < 0.0:
            bad.append(f"n_bath must be non-negative, got {n}")
        else:
            bound = n * (n + 1.0)
            if m2 > bound + EPS_PHYS:
                bad.append(
                    f"|m_bath|^2 = {m2:.12g} exceeds n_bath*(n_bath+1) = {bound:.12g}"
                )
            elif abs(m2 - bound) <= EPS_PHYS:
                flags.append("pure squeezed state")
    elif isinstance(scenario, Fock):
        if scenario.omega1 < 0.0:
            bad.append("omega1 must be non-negative")
        if not 0.0 <= scenario.nu <= 1.0:
            bad.append(f"nu must lie in [0, 1], got {scenario.nu}")
        if scenario.gamma_e <= 0.0:
            bad.append(f"gamma_e must be positive, got {scenario.gamma_e}")
        if scenario.period <= 0.0:
            bad.append(f"period must be positive, got {scenario.period}")
        elif scenario.gamma_e > 0.0 and scenario.period * scenario.gamma_e < 3.0:
            warn.append(
                "period below 3/gamma_e: emitter pulses overlap appreciably"
            )
        if scenario.step_cutoff is not None and scenario.step_cutoff <= 0.0:
            bad.append("step_cutoff must be positive when given")
    else:
        bad.append(f"unknown scenario type {type(scenario).__name__}")
    return ValidationReport(tuple(bad), tuple(warn), tuple(flags))


def validate_setup(
    qubit: QubitParams, frame: FrameConfig, scenario: ScenarioConfig
) -> ValidationReport:
    """Scenario validation plus cross-parameter sanity checks."""
    rep = validate_scenario(scenario)
    warn = list(rep.warnings)
    if frame.delta_w > qubit.gamma_tot / 10.0:
        warn.append(
            "delta_w above gamma_tot/10: harmonics are no longer quasi-discrete"
        )
    return ValidationReport(rep.violations, tuple(warn), rep.flags)


@dataclass(frozen=True)
class BlochState:
    """Expectation values (<sigma_->, <sigma_z>) in the rotating frame."""

    sm: complex
    sz: float

    def purity_excess(self) -> float:
        """How far 4|sm|^2 + sz^2 exceeds 1 (negative inside the sphere)."""
        return 4.0 * abs(self.sm) ** 2 + self.sz**2 - 1.0


GROUND = BlochState(sm=0.0 + 0.0j, sz=-1.0)


def purity_check(state: BlochState, tol: float = EPS_PHYS) -> bool:
    """True when the state lies on or inside the Bloch sphere within tol."""
    return state.purity_excess() <= tol


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled rotating-frame trajectory.

    ``sm`` and ``sz`` are read-only numpy arrays sampled at
    ``t0 + i * dt``.  ``max_purity_excess`` is tracked over every
    integrator step, not only the recorded ones.
    """

    t0: float
    dt: float
    sm: np.ndarray
    sz: np.ndarray
    frame: FrameConfig
    scenario_kind: str = ""
    max_purity_excess: float = float("nan")

    def __post_init__(self) -> None:
        if self.sm.shape != self.sz.shape or self.sm.ndim != 1:
            raise ValueError("sm and sz must be 1-d arrays of equal length")
        self.sm.flags.writeable = False
        self.sz.flags.writeable = False

    def __len__(self) -> int:
        return self.sm.shape[0]

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self))

    def state(self, i: int) -> BlochState:
        return BlochState(complex(self.sm[i]), float(self.sz[i]))


# ----------------------------------------------------------------------
# Unit normalization

@dataclass(frozen=True)
class RunSettings:
    """Integration and extraction settings (all optional in config files)."""

    dt: float = 1e-2            # target step; snapped to the run's periods
    transient: float = 40.0     # time discarded before the analysis window
    periods: int = 5            # beat periods in the analysis window
    n_max: int = 8              # spectrum table covers |n| <= n_max
    record_stride: int = 1      # keep every record_stride-th sample
    out_stride: int = 0         # trajectory CSV decimation; 0 = auto
    steady_tol: float = 1e-7    # periodicity tolerance for steadiness check


def normalize_units(
    qubit: QubitParams,
    frame: FrameConfig,
    scenario: ScenarioConfig,
    run: Optional[RunSettings] = None,
):
    """Rescale all rates by 1/gamma_rad and times by gamma_rad.

    Returns ``(qubit, frame, scenario, run, scale)`` with
    ``qubit.gamma_rad == 1``.  ``scale`` is the original gamma_rad; feed it
    to :func:`denormalize_units` to undo the rescaling exactly.
    """
    g = qubit.gamma_rad
    qubit_n = QubitParams(1.0, qubit.gamma_phi / g, qubit.dipole_scale)
    frame_n = FrameConfig(frame.delta_w / g, frame.big_delta / g)
    if isinstance(scenario, TwoTone):
        scen_n: ScenarioConfig = TwoTone(scenario.omega1 / g, scenario.omega2 / g)
    elif isinstance(scenario, Squeezed):
        scen_n = Squeezed(scenario.omega1 / g, scenario.n_bath, scenario.m_bath)
    else:
        cutoff = None if scenario.step_cutoff is None else scenario.step_cutoff * g
        scen_n = Fock(
            scenario.omega1 / g,
            scenario.gamma_e / g,
            scenario.nu,
            scenario.period * g,
            scenario.envelope_mode,
            cutoff,
            scenario.unsigned_correlators,
        )
    run_n = None
    if run is not None:
        run_n = replace(run, dt=run.dt * g, transient=run.transient * g)
    return qubit_n, frame_n, scen_n, run_n, g


def denormalize_units(qubit, frame, scenario, run, scale: float):
    """Inverse of :func:`normalize_units` for the same ``scale``."""
    inv = QubitParams(qubit.gamma_rad * scale, qubit.gamma_phi * scale,
                      qubit.dipole_scale)
    frame_d = FrameConfig(frame.delta_w * scale, frame.big_delta * scale)
    if isinstance(scenario, TwoTone):
        scen_d: ScenarioConfig = TwoTone(scenario.omega1 * scale, scenario.omega2 * scale)
    elif isinstance(scenario, Squeezed):
        scen_d = Squeezed(scenario.omega1 * scale, scenario.n_bath, scenario.m_bath)
    else:
        cutoff = None if scenario.step_cutoff is None else scenario.step_cutoff / scale
        scen_d = Fock(
            scenario.omega1 * scale,
            scenario.gamma_e * scale,
            scenario.nu,
            scenario.period / scale,
            scenario.envelope_mode,
            cutoff,
            scenario.unsigned_correlators,
        )
    run_d = None
    if run is not None:
        run_d = replace(run, dt=run.dt / scale, transient=run.transient / scale)
    return inv, frame_d, scen_d, run_d


# ----------------------------------------------------------------------
# Config files

_QUBIT_KEYS = {"gamma_rad", "gamma_phi", "dipole_scale"}
_FRAME_KEYS = {"delta_w", "big_delta"}
_SCENARIO_KEYS = {
    "two_tone": {"kind", "omega1", "omega2"},
    "squeezed": {"kind", "omega1", "n_bath", "m_bath"},
    "fock": {"kind", "omega1", "gamma_e", "nu", "period", "envelope_mode",
             "step_cutoff", "unsigned_correlators"},
}
_RUN_KEYS = {"dt", "transient", "periods", "n_max", "record_stride",
             "out_stride", "steady_tol"}


def _reject_unknown(table: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise ConfigError(f"unknown keys in [{where}]: {', '.join(unknown)}")


def _as_complex(value, where: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(
        isinstance(v, (int, float)) for v in value
    ):
        return complex(value[0], value[1])
    raise ConfigError(f"{where} must be a number or a [re, im] pair")


def parse_config(data: dict):
    """Build (qubit, frame, scenario, run) from a parsed config mapping."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a table")
    _reject_unknown(data, {"qubit", "frame", "scenario", "run"}, "<root>")
    for required in ("qubit", "frame", "scenario"):
        if required not in data:
            raise ConfigError(f"missing [{required}] table")

    qt = data["qubit"]
    _reject_unknown(qt, _QUBIT_KEYS, "qubit")
    if "gamma_rad" not in qt:
        raise ConfigError("[qubit] requires gamma_rad")
    try:
        qubit = QubitParams(
            float(qt["gamma_rad"]),
            float(qt.get("gamma_phi", 0.0)),
            float(qt.get("dipole_scale", 1.0)),
        )
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc

    ft = data["frame"]
    _reject_unknown(ft, _FRAME_KEYS, "frame")
    if "delta_w" not in ft:
        raise ConfigError("[frame] requires delta_w")
    try:
        frame = FrameConfig(float(ft["delta_w"]), float(ft.get("big_delta", 0.0)))
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc

    st = data["scenario"]
    kind = st.get("kind")
    if kind not in _SCENARIO_KINDS:
        raise ConfigError(
            f"[scenario] kind must be one of {sorted(_SCENARIO_KINDS)}, got {kind!r}"
        )
    _reject_unknown(st, _SCENARIO_KEYS[kind], "scenario")
    try:
        if kind == "two_tone":
            scenario: ScenarioConfig = TwoTone(
                float(st["omega1"]), float(st["omega2"])
            )
        elif kind == "squeezed":
            scenario = Squeezed(
                float(st["omega1"]),
                float(st["n_bath"]),
                _as_complex(st["m_bath"], "[scenario] m_bath"),
            )
        else:
            mode_name = str(st.get("envelope_mode", "exact")).lower()
            try:
                mode = EnvelopeMode(mode_name)
            except ValueError:
                raise ConfigError(
                    f"envelope_mode must be 'exact' or 'step', got {mode_name!r}"
                ) from None
            cutoff = st.get("step_cutoff")
            scenario = Fock(
                float(st["omega1"]),
                float(st["gamma_e"]),
                float(st["nu"]),
                float(st["period"]),
                mode,
                None if cutoff is None else float(cutoff),
                bool(st.get("unsigned_correlators", False)),
            )
    except KeyError as exc:
        raise ConfigError(f"[scenario] ({kind}) requires key {exc.args[0]!r}") from exc

    rt = data.get("run", {})
    _reject_unknown(rt, _RUN_KEYS, "run")
    defaults = RunSettings()
    run = RunSettings(
        dt=float(rt.get("dt", defaults.dt)),
        transient=float(rt.get("transient", defaults.transient)),
        periods=int(rt.get("periods", defaults.periods)),
        n_max=int(rt.get("n_max", defaults.n_max)),
        record_stride=int(rt.get("record_stride", defaults.record_stride)),
        out_stride=int(rt.get("out_stride", defaults.out_stride)),
        steady_tol=float(rt.get("steady_tol", defaults.steady_tol)),
    )
    if run.dt <= 0.0 or run.transient < 0.0 or run.periods < 1:
        raise ConfigError("[run] requires dt > 0, transient >= 0, periods >= 1")
    if run.n_max < 1 or run.record_stride < 1:
        raise ConfigError("[run] requires n_max >= 1 and record_stride >= 1")

    report = validate_scenario(scenario)
    if not report.ok:
        raise ConfigError("; ".join(report.violations))
    return qubit, frame, scenario, run


def load_config(path):
    """Parse a TOML config file. See parse_config for the schema."""
    try:
        import tomllib  # py >= 3.11
    except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            try:
                data = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(data)
