"""Closed-form references for the driven two-level mixer.

Everything here evaluates the slow-splitting (quasi-static) limit
``delta_w << gamma`` of the rotating-frame Bloch dynamics, where the
stationary response can be written down exactly per instant of the beat
and expanded into sharp harmonics.  These expressions are the oracles
the integrator is validated against: they become exact as delta_w -> 0
and deviate at O(delta_w / slowest rate) for finite splitting.

Conventions: the frame rotates at the mean drive frequency w_d, tone 1
enters as ``omega1 exp(-i delta_w t)``, tone 2 / the pulse carrier as
``exp(+i delta_w t)``, and a spectrum entry S_n multiplies
``exp(-i n delta_w t)`` so that line n radiates at w_d + n delta_w.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from .model import (
    BlochState,
    DomainError,
    Fock,
    FrameConfig,
    OracleError,
    QubitParams,
    Squeezed,
    TwoTone,
    EnvelopeMode,
)
from .spectra import SpectrumTable

TWO_PI = 2.0 * math.pi


# ----------------------------------------------------------------------
# Two coherent tones

@dataclass(frozen=True)
class TwoToneMixing:
    """Mixing angle and ladder data for the two-tone stationary state.

    ``ratio`` is the signed geometric factor between next-neighbour
    harmonics, S_{n+2} / S_n = ratio for n >= 1; ``prefactor`` carries
    tan(theta) / lam written in a form that stays finite when one tone
    is switched off.
    """

    theta: float
    lam: complex
    ratio: float
    prefactor: complex


def _tt_denominator(sc: TwoTone, qubit: QubitParams, frame: FrameConfig) -> float:
    g = qubit.gamma_tot
    return (
        qubit.gamma_rad * (frame.big_delta**2 + g * g)
        + g * (sc.omega1**2 + sc.omega2**2)
    )


def theta_mix(sc: TwoTone, qubit: QubitParams, frame: FrameConfig) -> float:
    """Mixing angle theta of the two-tone stationary state.

    sin(theta) = 2 gamma w1 w2 / (G (D^2 + gamma^2) + gamma (w1^2 + w2^2));
    the argument is strictly below 1 for any nonzero rates, so theta
    lies in [0, pi/2).
    """
    g = qubit.gamma_tot
    x = 2.0 * g * sc.omega1 * sc.omega2 / _tt_denominator(sc, qubit, frame)
    return math.asin(x)


def lambda_mix(sc: TwoTone, qubit: QubitParams, frame: FrameConfig) -> complex:
    """Complex mixing strength lam = 4 gamma w1 w2 / (G (D + i gamma)).

    Raises DomainError when either tone is off; the ratio
    tan(theta)/lam used by the harmonic ladder stays finite in that
    limit, but lam itself degenerates to 0.
    """
    if sc.omega1 * sc.omega2 == 0.0:
        raise DomainError("lambda_mix needs both tones on (omega1 * omega2 > 0)")
    g = qubit.gamma_tot
    return (
        4.0 * g * sc.omega1 * sc.omega2
        / (qubit.gamma_rad * (frame.big_delta + 1j * g))
    )


def two_tone_mixing(sc: TwoTone, qubit: QubitParams, frame: FrameConfig) -> TwoToneMixing:
    """Bundle theta, lam, the ladder ratio and the safe prefactor."""
    g = qubit.gamma_tot
    theta = theta_mix(sc, qubit, frame)
    # tan(theta)/lam with the w1 w2 product cancelled algebraically, so
    # single-tone input degrades gracefully instead of dividing 0 by 0.
    pref = (
        qubit.gamma_rad * (frame.big_delta + 1j * g)
        / (2.0 * _tt_denominator(sc, qubit, frame) * math.cos(theta))
    )
    lam = lambda_mix(sc, qubit, frame) if sc.omega1 * sc.omega2 != 0.0 else 0.0j
    return TwoToneMixing(theta, lam, -math.tan(0.5 * theta), pref)


def _two_tone_fields(t, sc: TwoTone, qubit: QubitParams, frame: FrameConfig):
    """Vectorized quasi-static (sm, sz) of the two-tone state."""
    g = qubit.gamma_tot
    dw, D = frame.delta_w, frame.big_delta
    drive = sc.omega1 * np.exp(-1j * dw * t) + sc.omega2 * np.exp(1j * dw * t)
    bracket = 1.0 + (g / qubit.gamma_rad) * (
        sc.omega1**2 + sc.omega2**2
        + 2.0 * sc.omega1 * sc.omega2 * np.cos(2.0 * dw * t)
    ) / (D * D + g * g)
    sz = -1.0 / bracket
    sm = 0.5 * drive / ((D - 1j * g) * bracket)
    return sm, sz


def two_tone_steady(sc: TwoTone, qubit: QubitParams, frame: FrameConfig,
                    t: float) -> BlochState:
    """Quasi-static two-tone state at time t.

    Exact solution of the Bloch equations with time derivatives dropped;
    the true periodic attractor approaches it as delta_w -> 0.
    """
    sm, sz = _two_tone_fields(float(t), sc, qubit, frame)
    return BlochState(complex(sm), float(sz))


def two_tone_series(sc: TwoTone, qubit: QubitParams, frame: FrameConfig,
                    t: float, p_max: int = 40) -> complex:
    """Harmonic-ladder resummation of the quasi-static coherence.

    sm(t) = prefactor (w1 e^{-i dw t} + w2 e^{+i dw t})
            sum_p ratio^{|p|} e^{2 i p dw t},  |p| <= p_max.

    Identical to two_tone_steady up to the geometric tail beyond p_max;
    with |ratio| < 1 always true, p_max = 40 reaches machine precision
    for any physical input.
    """
    mix = two_tone_mixing(sc, qubit, frame)
    dw = frame.delta_w
    drive = sc.omega1 * cmath.exp(-1j * dw * t) + sc.omega2 * cmath.exp(1j * dw * t)
    comb = sum(
        mix.ratio ** abs(p) * cmath.exp(2j * p * dw * t)
        for p in range(-p_max, p_max + 1)
    )
    return mix.prefactor * drive * comb


def two_tone_spectrum(sc: TwoTone, qubit: QubitParams, frame: FrameConfig,
                      n_max: int = 9) -> SpectrumTable:
    """Harmonic amplitudes of the quasi-static two-tone state.

    S_n = prefactor (w1 ratio^{|(n-1)/2|} + w2 ratio^{|(n+1)/2|}) for odd
    n; even entries are included as exact zeros.  Neighbouring odd lines
    obey S_{n+2}/S_n = ratio for n >= 1.
    """
    mix = two_tone_mixing(sc, qubit, frame)
    entries = {}
    for n in range(-n_max, n_max + 1):
        if n % 2 == 0:
            entries[n] = 0.0j
            continue
        entries[n] = mix.prefactor * (
            sc.omega1 * mix.ratio ** abs((n - 1) // 2)
            + sc.omega2 * mix.ratio ** abs((n + 1) // 2)
        )
    beat = TWO_PI / frame.delta_w
    return SpectrumTable(frame.delta_w, entries, (0.0, beat))


def single_drive_steady(omega1: float, qubit: QubitParams, frame: FrameConfig,
                        t: float = 0.0) -> BlochState:
    """Stationary state under tone 1 alone (carrier w_d + delta_w)."""
    sm, sz = _two_tone_fields(float(t), TwoTone(omega1, 0.0), qubit, frame)
    return BlochState(complex(sm), float(sz))


# ----------------------------------------------------------------------
# Single tone in a pair-correlated (squeezed) bath

def _squeezed_fields(t, sc: Squeezed, qubit: QubitParams, frame: FrameConfig):
    """Vectorized quasi-static (sm, sz) for the squeezed-bath scenario."""
    g = qubit.gamma_tot
    G = qubit.gamma_rad
    dw, D0 = frame.delta_w, frame.big_delta
    u = 1.0 + 2.0 * sc.n_bath
    M = complex(sc.m_bath)
    gap = u * u - 4.0 * abs(M) ** 2
    if gap <= 0.0:
        raise DomainError(
            "bath correlation exceeds the physical bound; the stationary "
            "denominator is not positive"
        )
    osc = 1.0 + 2.0 * np.real(M * np.exp(4j * dw * t)) / u
    den = D0 * D0 + g * g * gap + (g * sc.omega1**2 / G) * osc
    sz = -1.0 / u + (g * sc.omega1**2 / (G * u)) * osc / den
    sm = 0.5 * sc.omega1 * (
        (1j * g + D0 / u) * np.exp(-1j * dw * t)
        + 1j * g * (2.0 * M / u) * np.exp(3j * dw * t)
    ) / den
    return sm, sz


def squeezed_steady(sc: Squeezed, qubit: QubitParams, frame: FrameConfig,
                    t: float) -> BlochState:
    """Quasi-static state of the driven qubit in the correlated bath.

    Reduces to the single-tone result at n_bath = m_bath = 0.  The beat
    enters only through exp(4 i delta_w t), so the coherence carries
    harmonics with n = 1 (mod 4) exclusively.
    """
    sm, sz = _squeezed_fields(float(t), sc, qubit, frame)
    return BlochState(complex(sm), float(sz))


def squeezed_steady_spectrum(sc: Squeezed, qubit: QubitParams,
                             frame: FrameConfig, n_max: int = 9,
                             samples: int = 4096) -> SpectrumTable:
    """Fourier-analyse the quasi-static squeezed state over one beat.

    Rectangle-rule projection is spectrally exact for a smooth periodic
    integrand once samples far exceeds n_max, so the entries inherit the
    closed form's machine-precision selection rule: every n != 1 (mod 4)
    comes out at numerical zero.
    """
    beat = TWO_PI / frame.delta_w
    t = np.arange(samples) * (beat / samples)
    sm, _ = _squeezed_fields(t, sc, qubit, frame)
    entries = {
        n: complex(np.mean(sm * np.exp(1j * n * frame.delta_w * t)))
        for n in range(-n_max, n_max + 1)
    }
    return SpectrumTable(frame.delta_w, entries, (0.0, beat))


@dataclass(frozen=True)
class SqueezedWeakDrive:
    """Weak-drive expansion parameters: line strength f, pair weight m."""

    f: float
    m: complex


def squeezed_weak_drive(sc: Squeezed, qubit: QubitParams,
                        frame: FrameConfig) -> SqueezedWeakDrive:
    """Expansion parameters of the weak-drive harmonic hierarchy.

    f = omega1 / sqrt(2 G gamma (u^2 - 4|M|^2)) with u = 1 + 2N measures
    the drive against the squeezing-gapped linewidth; m = 2M/u is the
    pair amplitude seen by the qubit, |m| <= sqrt(N(N+1))*2/(2N+1) < 1.
    Quoted for zero detuning and no extra dephasing; both are enforced.
    """
    if frame.big_delta != 0.0:
        raise DomainError("weak-drive expansion is defined at zero detuning")
    if qubit.gamma_phi != 0.0:
        raise DomainError("weak-drive expansion assumes no pure dephasing")
    u = 1.0 + 2.0 * sc.n_bath
    gap = u * u - 4.0 * abs(sc.m_bath) ** 2
    if gap <= 0.0:
        raise DomainError("bath correlation exceeds the physical bound")
    f = sc.omega1 / math.sqrt(2.0 * qubit.gamma_rad * qubit.gamma_tot * gap)
    if f > 0.3:
        warnings.warn(
            f"weak-drive parameter f = {f:.3f} is large; the truncated "
            "hierarchy degrades beyond f ~ 0.3",
            stacklevel=2,
        )
    return SqueezedWeakDrive(f, 2.0 * complex(sc.m_bath) / u)


def squeezed_weak_spectrum(sc: Squeezed, qubit: QubitParams,
                           frame: FrameConfig, orders: int = 4) -> SpectrumTable:
    """Leading harmonic ladder of the weakly driven squeezed scenario.

    The first four lines, in order of appearance in powers of f:

        S_1   =  i pref f          (the drive line)
        S_-3  =  i pref f m        (one pair exchanged)
        S_5   = -i pref f^3 conj(m)
        S_-7  = -i pref f^3 m^2

    with pref = f G / omega1 real, so |S_-3 / S_1| = |m| exactly.
    ``orders`` in 1..4 truncates the list.
    """
    if not 1 <= orders <= 4:
        raise DomainError("orders must be between 1 and 4")
    wd = squeezed_weak_drive(sc, qubit, frame)
    u = 1.0 + 2.0 * sc.n_bath
    gap = u * u - 4.0 * abs(sc.m_bath) ** 2
    scale = 1.0 / math.sqrt(2.0 * qubit.gamma_rad * qubit.gamma_tot * gap)
    pref = 1j * qubit.gamma_rad * scale
    f, m = wd.f, wd.m
    ladder = (
        (1, pref * f),
        (-3, pref * f * m),
        (5, -pref * f**3 * m.conjugate()),
        (-7, -pref * f**3 * m * m),
    )
    entries = dict(ladder[:orders])
    beat = TWO_PI / frame.delta_w
    return SpectrumTable(frame.delta_w, entries, (0.0, beat))


# ----------------------------------------------------------------------
# Single tone plus a periodic single-photon emitter

def fock_sin_half_theta(nu: float) -> float:
    """Coherence amplitude sqrt(nu (1 - nu)) of the emitted superposition."""
    if not 0.0 <= nu <= 1.0:
        raise DomainError(f"excited-state weight nu = {nu!r} outside [0, 1]")
    return math.sqrt(nu * (1.0 - nu))


def emitter_pulse_state(nu: float, pulse_index: int, period: float,
                        frame: FrameConfig) -> BlochState:
    """Emitter state injected at the start of pulse window ``pulse_index``.

    The emitter is re-prepared every period in the superposition with
    excited weight nu; its coherence rides the pulse carrier at
    w_d - delta_w, which in this frame contributes exp(+i delta_w Tn) at
    the window start Tn.  The state is pure: 4|sm|^2 + sz^2 = 1.
    """
    tn = pulse_index * period
    sm = fock_sin_half_theta(nu) * cmath.exp(1j * frame.delta_w * tn)
    return BlochState(sm, 2.0 * nu - 1.0)


def pulse_correlators(sc: Fock, qubit: QubitParams, frame: FrameConfig,
                      pulse_index: int = 0) -> Tuple[complex, complex]:
    """Factorized qubit-emitter correlators at a pulse-window start.

    Returns (zc, pc): zc seeds the coherence equation with the emitter
    coherence gated by the stationary inversion, pc seeds the inversion
    equation with the interference of qubit and emitter coherences.
    Both carry their physical signs; at zero detuning zc is negative
    real and pc positive imaginary for the first window.
    """
    tn = pulse_index * sc.period
    det = single_drive_steady(sc.omega1, qubit, frame, t=tn)
    em = emitter_pulse_state(sc.nu, pulse_index, sc.period, frame)
    return det.sz * em.sm, det.sm * em.sm.conjugate()


def _envelope_averages(sc: Fock, qubit: QubitParams,
                       frame: FrameConfig) -> Tuple[complex, complex]:
    """Window averages of the two correlator envelopes.

    Returns (avg E_z, avg E_p e^{i dw tau}) over tau in [0, T); the
    rotation on E_p tracks the residual carrier left inside the window.
    """
    g, G, ge = qubit.gamma_tot, qubit.gamma_rad, sc.gamma_e
    dw, T = frame.delta_w, sc.period
    if sc.envelope_mode is EnvelopeMode.STEP:
        cut = min(sc.step_cutoff if sc.step_cutoff is not None else T, T)
        a_z = cut / T
        a_p = (cmath.exp(1j * dw * cut) - 1.0) / (1j * dw * T) if dw * T != 0.0 \
            else cut / T
        return complex(a_z), a_p
    rz = (G + ge) * T
    rp = ((g + ge) - 1j * dw) * T
    return complex(-math.expm1(-rz) / rz), (1.0 - cmath.exp(-rp)) / rp


@dataclass(frozen=True)
class FockCoeffs:
    """Weak-drive line coefficients of the pulsed scenario.

    c1 multiplies exp(+i dw t) (the scattered pulse line), cm1 multiplies
    exp(-i dw t) (the tone line), cm3 multiplies exp(-3 i dw t) (the
    mixing line); cm3 is quoted with its envelope bracket averaged over
    one pulse window.
    """

    c1: complex
    cm1: complex
    cm3: complex


def fock_coeffs(sc: Fock, qubit: QubitParams, frame: FrameConfig) -> FockCoeffs:
    """Leading-order line coefficients at zero detuning.

    With the physically signed correlators the cm3 bracket is a
    difference of the two envelope averages and vanishes for flat
    envelopes; with ``unsigned_correlators`` both correlators enter as
    magnitudes and the bracket terms add in quadrature instead.
    """
    if frame.big_delta != 0.0:
        raise DomainError("line coefficients are defined at zero detuning")
    g, G, R = qubit.gamma_tot, qubit.gamma_rad, math.sqrt(qubit.gamma_tot * sc.gamma_e)
    s2 = fock_sin_half_theta(sc.nu)
    if sc.unsigned_correlators:
        zc0, pc0 = s2 + 0.0j, (sc.omega1 / (2.0 * g)) * s2 + 0.0j
    else:
        zc0, pc0 = -s2 + 0.0j, 1j * (sc.omega1 / (2.0 * g)) * s2
    a_z, a_p = _envelope_averages(sc, qubit, frame)
    c1 = R * zc0 / g
    cm1 = 1j * sc.omega1 / (2.0 * g)
    cm3 = -(1j * sc.omega1 / (2.0 * g * G)) * (
        1j * sc.omega1 * (R * zc0 / g) * a_z + 2.0 * R * pc0 * a_p
    )
    return FockCoeffs(c1, cm1, cm3)


def fock_envelope_spectrum(sc: Fock, qubit: QubitParams,
                           frame: FrameConfig) -> SpectrumTable:
    """Envelope-aware prediction of the three pulsed-scenario lines.

    Exact period-averaging identities for the linear response chain: the
    window-averaged amplitude of a channel driven at rate r with source
    average A is A / r, which fixes

        S_-1 = R zc0 <E_z> / (gamma + i dw)
        S_1  = -(i w1 / 2) Z0 / (gamma - i dw)
        S_3  = -(i w1 / 2) Z2 / (gamma - 3 i dw)

    with Z0 the stationary inversion line and Z2 the inversion component
    two beat units down, fed by S_-1 and the pc correlator.  Valid at
    zero detuning; raises OracleError otherwise.  Entries outside
    {-1, 1, 3} are exact zeros of the truncated hierarchy.
    """
    if frame.big_delta != 0.0:
        raise OracleError(
            "envelope-aware prediction requires zero detuning; got "
            f"big_delta = {frame.big_delta!r}"
        )
    g, G, ge = qubit.gamma_tot, qubit.gamma_rad, sc.gamma_e
    dw = frame.delta_w
    R = math.sqrt(g * ge)
    zc0, pc0 = pulse_correlators(sc, qubit, frame, 0)
    if sc.unsigned_correlators:
        zc0, pc0 = abs(zc0) + 0.0j, abs(pc0) + 0.0j
    a_z, a_p = _envelope_averages(sc, qubit, frame)

    q = g * sc.omega1**2 / (G * (g * g + dw * dw))
    z0 = -1.0 / (1.0 + q)
    s_1 = -(0.5j * sc.omega1) * z0 / (g - 1j * dw)
    s_m1 = R * zc0 * a_z / (g + 1j * dw)
    z2 = (1j * sc.omega1 * s_m1.conjugate() + 2.0 * R * pc0 * a_p) / (G - 2j * dw)
    s_3 = -(0.5j * sc.omega1) * z2 / (g - 3j * dw)

    entries = {n: 0.0j for n in range(-7, 8)}
    entries[-1] = s_m1
    entries[1] = s_1
    entries[3] = s_3
    beat = TWO_PI / dw
    return SpectrumTable(dw, entries, (0.0, beat))
