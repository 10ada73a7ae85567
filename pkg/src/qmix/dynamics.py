"""Time-domain integration of the three mixing scenarios.

`integrate` drives the compiled RK4 kernel and returns an immutable
Trajectory; `density_matrix_oracle` solves the same physics written as a
2x2 density-matrix master equation with an adaptive high-order scipy
solver, sharing no stepping code with the kernel, so agreement between
the two is a genuine cross-implementation check.

Reference right-hand sides (`rhs_two_tone` etc.) mirror the kernel in
plain python for tests and for anyone reading the equations of motion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from . import analytic, _kernels
from .model import (
    BlochState,
    DomainError,
    EnvelopeMode,
    Fock,
    FrameConfig,
    GROUND,
    IntegrationError,
    QubitParams,
    Squeezed,
    Trajectory,
    TwoTone,
)

# Explicit RK4 needs the step well under the fastest rate; 1/50 keeps the
# local truncation error at the 1e-10 scale for unit-rate problems.
DT_RATE_FACTOR = 50.0

_GRID_TOL = 1e-6

_KIND_CODE = {
    "two_tone": _kernels.KIND_TWO_TONE,
    "squeezed": _kernels.KIND_SQUEEZED,
    "fock": _kernels.KIND_FOCK,
}


@dataclass(frozen=True)
class CorrelatorDrive:
    """Resolved pulse-train drive parameters fed to the stepping kernel.

    zc0 is the (real) coherence-channel correlator at a window start;
    pc_mag/pc_phase0 polar-decompose the inversion-channel correlator.
    With ``unsigned_correlators`` both enter as bare magnitudes.
    """

    zc0: float
    pc_mag: float
    pc_phase0: float
    envelope_mode: EnvelopeMode
    step_cutoff: float

    @classmethod
    def from_scenario(cls, sc: Fock, qubit: QubitParams,
                      frame: FrameConfig) -> "CorrelatorDrive":
        zc, pc = analytic.pulse_correlators(sc, qubit, frame, 0)
        # zc is real at a window start: both factors carry no phase there.
        if abs(zc.imag) > 1e-12 * max(abs(zc), 1.0):
            raise DomainError("window-start correlator acquired a phase")
        cutoff = sc.step_cutoff if sc.step_cutoff is not None else sc.period
        if sc.unsigned_correlators:
            return cls(abs(zc), abs(pc), 0.0, sc.envelope_mode, cutoff)
        return cls(zc.real, abs(pc), math.atan2(pc.imag, pc.real),
                   sc.envelope_mode, cutoff)


def correlator_envelopes(t, drive: CorrelatorDrive, sc: Fock,
                         qubit: QubitParams, frame: FrameConfig):
    """Correlator drives (zc, pc) at time t (scalar or array).

    zc rides the pulse carrier exp(+i dw t) under the envelope that
    decays with the inversion and emitter rates; pc hops by -2 dw per
    window and unwinds at -(dw + big_delta) inside each one.
    """
    T = sc.period
    tau = t - np.floor(t / T) * T
    tn = t - tau
    if drive.envelope_mode is EnvelopeMode.STEP:
        gate = np.where(tau <= drive.step_cutoff, 1.0, 0.0)
        ez = gate
        ep = gate
    else:
        ez = np.exp(-(qubit.gamma_rad + sc.gamma_e) * tau)
        ep = np.exp(-(qubit.gamma_tot + sc.gamma_e) * tau)
    dw = frame.delta_w
    zc = drive.zc0 * ez * np.exp(1j * dw * t)
    pc = drive.pc_mag * ep * np.exp(
        1j * (drive.pc_phase0 - 2.0 * dw * tn - (dw + frame.big_delta) * tau)
    )
    return zc, pc


def _drive_field(t, sc, frame: FrameConfig):
    """Instantaneous coherent drive in the rotating frame."""
    om = sc.omega1 * np.exp(-1j * frame.delta_w * t)
    if sc.kind == "two_tone":
        om = om + sc.omega2 * np.exp(1j * frame.delta_w * t)
    return om


def rhs_two_tone(state: BlochState, t: float, sc: TwoTone,
                 qubit: QubitParams, frame: FrameConfig) -> Tuple[complex, float]:
    """Bloch derivatives (dsm, dsz) under two coherent tones."""
    om = _drive_field(t, sc, frame)
    ds = state.sm * (-1j * frame.big_delta - qubit.gamma_tot) \
        - 0.5j * om * state.sz
    dz = -qubit.gamma_rad * (state.sz + 1.0) \
        - 2.0 * (state.sm.conjugate() * om).imag
    return ds, dz


def rhs_squeezed(state: BlochState, t: float, sc: Squeezed,
                 qubit: QubitParams, frame: FrameConfig) -> Tuple[complex, float]:
    """Bloch derivatives in the pair-correlated bath.

    The thermal occupation scales both decay channels by u = 1 + 2N; the
    pair correlator couples sm to its own conjugate through the
    exp(+2 i dw t) carrier.
    """
    u = 1.0 + 2.0 * sc.n_bath
    om = _drive_field(t, sc, frame)
    pair = complex(sc.m_bath) * np.exp(2j * frame.delta_w * t)
    ds = state.sm * (-1j * frame.big_delta - qubit.gamma_tot * u) \
        - 0.5j * om * state.sz \
        - 2.0 * qubit.gamma_tot * pair * state.sm.conjugate()
    dz = -qubit.gamma_rad * u * state.sz - qubit.gamma_rad \
        - 2.0 * (state.sm.conjugate() * om).imag
    return ds, dz


def rhs_fock(state: BlochState, t: float, sc: Fock, qubit: QubitParams,
             frame: FrameConfig,
             drive: Optional[CorrelatorDrive] = None) -> Tuple[complex, float]:
    """Bloch derivatives under one tone plus the pulse-train correlators."""
    if drive is None:
        drive = CorrelatorDrive.from_scenario(sc, qubit, frame)
    om = _drive_field(t, sc, frame)
    zc, pc = correlator_envelopes(t, drive, sc, qubit, frame)
    root_ge = math.sqrt(qubit.gamma_tot * sc.gamma_e)
    ds = state.sm * (-1j * frame.big_delta - qubit.gamma_tot) \
        - 0.5j * om * state.sz + root_ge * zc
    dz = -qubit.gamma_rad * (state.sz + 1.0) \
        - 2.0 * (state.sm.conjugate() * om).imag \
        + 4.0 * root_ge * np.real(pc)
    return ds, complex(dz).real


def rate_scale(sc, qubit: QubitParams, frame: FrameConfig) -> float:
    """Fastest rate in the problem; bounds the stable explicit step."""
    base = max(qubit.gamma_rad, qubit.gamma_tot, sc.omega1,
               abs(frame.big_delta), frame.delta_w)
    if sc.kind == "two_tone":
        return max(base, sc.omega2)
    if sc.kind == "squeezed":
        u = 1.0 + 2.0 * sc.n_bath
        return max(base, qubit.gamma_rad * u,
                   qubit.gamma_tot * (u + 2.0 * abs(sc.m_bath)))
    return max(base, qubit.gamma_rad + sc.gamma_e,
               qubit.gamma_tot + sc.gamma_e)


def integrate(sc, qubit: QubitParams, frame: FrameConfig,
              t_span: Tuple[float, float], dt: float,
              state0: BlochState = GROUND, record_stride: int = 1,
              enforce_dt: bool = True) -> Trajectory:
    """March the Bloch equations with fixed-step RK4.

    Parameters
    ----------
    t_span:
        (t0, t1); the span must be a whole number of steps.  For the
        pulse train, dt must divide the window and t0 must sit on a
        window boundary, so the window clock stays exact.
    record_stride:
        Keep every record_stride-th step (plus the initial state).
    enforce_dt:
        Reject steps above 1 / (50 * fastest rate).  Disable only to
        study the integrator's own convergence.

    Raises
    ------
    DomainError
        For grid misalignment or an over-long step.
    IntegrationError
        If the state leaves the finite range mid-run.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise DomainError("t_span must have positive length")
    if dt <= 0.0:
        raise DomainError("dt must be positive")
    bound = 1.0 / (DT_RATE_FACTOR * rate_scale(sc, qubit, frame))
    if enforce_dt and dt > bound * (1.0 + 1e-12):
        raise DomainError(
            f"dt = {dt!r} exceeds the stability budget {bound!r} for the "
            "fastest rate in this setup"
        )
    steps_f = (t1 - t0) / dt
    if abs(steps_f - round(steps_f)) > _GRID_TOL:
        raise DomainError("t_span is not a whole number of steps")
    n_steps = int(round(steps_f))
    if n_steps < 1:
        raise DomainError("t_span shorter than a single step")
    if record_stride < 1 or n_steps % record_stride:
        raise DomainError(
            f"record_stride {record_stride} does not divide {n_steps} steps"
        )

    kind = _KIND_CODE[sc.kind]
    om2 = n_bath = m_re = m_im = 0.0
    gamma_e = zc0 = pc_mag = pc_ph0 = cutoff = 0.0
    env_step = 0
    period_steps = 1
    if sc.kind == "two_tone":
        om2 = sc.omega2
    elif sc.kind == "squeezed":
        n_bath = sc.n_bath
        m = complex(sc.m_bath)
        m_re, m_im = m.real, m.imag
    else:
        spp_f = sc.period / dt
        if abs(spp_f - round(spp_f)) > _GRID_TOL:
            raise DomainError(
                f"dt = {dt!r} does not divide the pulse window {sc.period!r}"
            )
        period_steps = int(round(spp_f))
        off = t0 / sc.period
        if abs(off - round(off)) > _GRID_TOL:
            raise DomainError("t0 must sit on a pulse-window boundary")
        drive = CorrelatorDrive.from_scenario(sc, qubit, frame)
        gamma_e = sc.gamma_e
        zc0, pc_mag, pc_ph0 = drive.zc0, drive.pc_mag, drive.pc_phase0
        env_step = 1 if drive.envelope_mode is EnvelopeMode.STEP else 0
        cutoff = drive.step_cutoff

    out_sm = np.empty(n_steps // record_stride + 1, dtype=np.complex128)
    out_sz = np.empty_like(out_sm, dtype=np.float64)
    status, bad, pmax = _kernels.rk4_loop(
        kind, complex(state0.sm), float(state0.sz), t0, dt, n_steps,
        record_stride, qubit.gamma_rad, qubit.gamma_tot, frame.big_delta,
        frame.delta_w, sc.omega1, om2, n_bath, m_re, m_im, gamma_e, zc0,
        pc_mag, pc_ph0, env_step, cutoff, period_steps, out_sm, out_sz,
    )
    if status == _kernels.STATUS_NONFINITE:
        raise IntegrationError(
            f"state became non-finite at step {bad} (t = {t0 + bad * dt!r})"
        )
    return Trajectory(t0, dt * record_stride, out_sm, out_sz, frame,
                      scenario_kind=sc.kind, max_purity_excess=float(pmax))


# ----------------------------------------------------------------------
# Independent reference: density-matrix master equation

_SP = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)   # |e><g|
_SM = _SP.T.copy()
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def _dissipator(L, rho):
    LdL = L.conj().T @ L
    return L @ rho @ L.conj().T - 0.5 * (LdL @ rho + rho @ LdL)


def _oracle_rhs(sc, qubit: QubitParams, frame: FrameConfig,
                drive: Optional[CorrelatorDrive]):
    G, dw = qubit.gamma_rad, frame.delta_w
    thermal = sc.n_bath if sc.kind == "squeezed" else 0.0
    c_phi = 0.5 * qubit.gamma_phi * (1.0 + 2.0 * thermal)
    root_ge = math.sqrt(qubit.gamma_tot * sc.gamma_e) \
        if sc.kind == "fock" else 0.0

    def fun(t, y):
        rho = np.array([[y[0], y[1] + 1j * y[2]],
                        [y[1] - 1j * y[2], 1.0 - y[0]]], dtype=complex)
        om = _drive_field(t, sc, frame)
        H = 0.5 * frame.big_delta * _SZ \
            - 0.5 * (om * _SP + np.conj(om) * _SM)
        drho = -1j * (H @ rho - rho @ H)
        drho += G * (thermal + 1.0) * _dissipator(_SM, rho)
        if thermal:
            drho += G * thermal * _dissipator(_SP, rho)
        if c_phi:
            drho += c_phi * _dissipator(_SZ, rho)
        if sc.kind == "squeezed":
            pair = -2.0 * qubit.gamma_tot * complex(sc.m_bath) \
                * np.exp(2j * dw * t)
            drho += pair * (_SP @ rho @ _SP) \
                + np.conj(pair) * (_SM @ rho @ _SM)
        if sc.kind == "fock":
            zc, pc = correlator_envelopes(t, drive, sc, qubit, frame)
            drho += root_ge * (zc * _SP + np.conj(zc) * _SM)
            drho += 2.0 * root_ge * np.real(pc) * _SZ
        return np.array([drho[0, 0].real, drho[0, 1].real, drho[0, 1].imag])

    return fun


def density_matrix_oracle(sc, qubit: QubitParams, frame: FrameConfig,
                          t_span: Tuple[float, float], t_eval,
                          state0: BlochState = GROUND,
                          rtol: float = 1e-10, atol: float = 1e-12):
    """Solve the master equation for rho(t) and return (sm, sz) arrays.

    Uses adaptive DOP853 on the 2x2 density matrix written in operator
    form, which shares neither stepping nor right-hand-side code with
    `integrate`.  The pulse train is integrated window by window so the
    solver never steps across an envelope discontinuity.
    """
    t_eval = np.asarray(t_eval, dtype=float)
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t_eval.size and (t_eval[0] < t0 or t_eval[-1] > t1):
        raise DomainError("t_eval outside t_span")
    drive = CorrelatorDrive.from_scenario(sc, qubit, frame) \
        if sc.kind == "fock" else None
    fun = _oracle_rhs(sc, qubit, frame, drive)
    y = np.array([0.5 * (1.0 + state0.sz), state0.sm.real, state0.sm.imag])

    if sc.kind == "fock":
        edges = [t0]
        k = math.floor(t0 / sc.period) + 1
        while k * sc.period < t1 - 1e-12 * sc.period:
            if k * sc.period > t0:
                edges.append(k * sc.period)
            k += 1
        edges.append(t1)
    else:
        edges = [t0, t1]

    sm = np.empty(t_eval.size, dtype=complex)
    sz = np.empty(t_eval.size, dtype=float)
    filled = 0
    for a, b in zip(edges[:-1], edges[1:]):
        # Segment-local evaluation points; a point on a shared edge goes
        # to the segment that reaches it first.
        lo = t_eval >= a if a == edges[0] else t_eval > a
        seg_eval = t_eval[lo & (t_eval <= b)]
        # Always request the segment end so the state carries over exactly.
        if seg_eval.size and seg_eval[-1] == b:
            request = seg_eval
        else:
            request = np.concatenate([seg_eval, [b]])
        sol = solve_ivp(fun, (a, b), y, method="DOP853", t_eval=request,
                        rtol=rtol, atol=atol)
        if not sol.success:
            raise IntegrationError(f"reference solver failed: {sol.message}")
        sm[filled:filled + seg_eval.size] = \
            sol.y[1, :seg_eval.size] + 1j * sol.y[2, :seg_eval.size]
        sz[filled:filled + seg_eval.size] = 2.0 * sol.y[0, :seg_eval.size] - 1.0
        filled += seg_eval.size
        y = sol.y[:, -1]
    if filled != t_eval.size:
        raise IntegrationError("reference solver missed evaluation points")
    return sm, sz


def steady_state_detect(traj: Trajectory, period: float,
                        tol: float = 1e-7) -> float:
    """Earliest recorded time from which the tail is period-periodic.

    Compares each sample against its image one period later and takes
    the first index whose entire suffix stays within tol.  Raises
    IntegrationError when even the final stretch has not settled.
    """
    steps_f = period / traj.dt
    if abs(steps_f - round(steps_f)) > _GRID_TOL:
        raise DomainError("period does not sit on the recorded grid")
    p = int(round(steps_f))
    n = len(traj)
    if p < 1 or p >= n:
        raise DomainError("period out of range for this trajectory")
    diff = np.maximum(np.abs(traj.sm[p:] - traj.sm[:-p]),
                      np.abs(traj.sz[p:] - traj.sz[:-p]))
    # Suffix running maximum, right to left.
    suffix = np.maximum.accumulate(diff[::-1])[::-1]
    idx = np.nonzero(suffix <= tol)[0]
    if idx.size == 0:
        raise IntegrationError(
            f"no steady state within the recorded window at tol = {tol!r}"
        )
    return traj.t0 + idx[0] * traj.dt
