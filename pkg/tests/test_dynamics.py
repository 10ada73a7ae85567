"""Integrator behavior: grids, guards, convergence, and the cross-check
against an independently formulated density-matrix solver."""

import math

import numpy as np
import pytest

from qmix import dynamics
from qmix.model import (
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

Q = QubitParams(1.0)
QD = QubitParams(1.0, 0.1)


def states_for_probing():
    return [
        (GROUND, 0.0),
        (BlochState(0.2 - 0.1j, -0.7), 0.4),
        (BlochState(-0.05 + 0.3j, 0.1), 17.3),
    ]


def test_squeezed_rhs_degenerates_to_coherent_drive():
    frame = FrameConfig(0.01, 0.05)
    tt = TwoTone(0.15, 0.0)
    sq = Squeezed(0.15, 0.0, 0.0)
    for state, t in states_for_probing():
        ds_a, dz_a = dynamics.rhs_two_tone(state, t, tt, QD, frame)
        ds_b, dz_b = dynamics.rhs_squeezed(state, t, sq, QD, frame)
        assert ds_a == ds_b
        assert dz_a == dz_b


def test_pulse_rhs_without_pulses_is_a_single_tone():
    frame = FrameConfig(0.01)
    tt = TwoTone(0.15, 0.0)
    fk = Fock(0.15, 0.5, 0.0, 10.0)   # nu = 0: no emitter coherence
    for state, t in states_for_probing():
        ds_a, dz_a = dynamics.rhs_two_tone(state, t, tt, Q, frame)
        ds_b, dz_b = dynamics.rhs_fock(state, t, fk, Q, frame)
        assert ds_b == pytest.approx(ds_a, abs=1e-15)
        assert dz_b == pytest.approx(dz_a, abs=1e-15)


def test_correlator_drive_resolution():
    frame = FrameConfig(0.002)
    drv = dynamics.CorrelatorDrive.from_scenario(Fock(0.15, 0.5, 0.5, 10.0),
                                                 Q, frame)
    assert drv.zc0 == pytest.approx(-0.47846889952153115, rel=1e-14)
    assert drv.pc_mag == pytest.approx(0.07177033492822966, rel=1e-14)
    assert drv.pc_phase0 == pytest.approx(math.pi / 2, rel=1e-12)
    assert drv.step_cutoff == 10.0      # defaults to the window length
    lit = dynamics.CorrelatorDrive.from_scenario(
        Fock(0.15, 0.5, 0.5, 10.0, unsigned_correlators=True), Q, frame)
    assert lit.zc0 == pytest.approx(+0.47846889952153115, rel=1e-14)
    assert lit.pc_phase0 == 0.0


def test_correlator_envelopes_decay_and_restart():
    frame = FrameConfig(0.002)
    sc = Fock(0.15, 0.5, 0.5, 10.0)
    drv = dynamics.CorrelatorDrive.from_scenario(sc, Q, frame)
    zc0, pc0 = dynamics.correlator_envelopes(0.0, drv, sc, Q, frame)
    tau = 3.0 / (Q.gamma_rad + sc.gamma_e)
    zc, pc = dynamics.correlator_envelopes(tau, drv, sc, Q, frame)
    assert abs(zc) / abs(zc0) == pytest.approx(math.exp(-3.0), rel=1e-12)
    assert abs(pc) / abs(pc0) == pytest.approx(
        math.exp(-(Q.gamma_tot + sc.gamma_e) * tau), rel=1e-12)
    # Envelopes restart at each window; only the carrier phase advances.
    zc_next, _ = dynamics.correlator_envelopes(10.0 + tau, drv, sc, Q, frame)
    assert abs(zc_next) == pytest.approx(abs(zc), rel=1e-12)


def test_correlator_phase_law_across_windows():
    frame = FrameConfig(0.002)
    sc = Fock(0.15, 0.5, 0.5, 10.0)
    drv = dynamics.CorrelatorDrive.from_scenario(sc, Q, frame)
    dw, tau = frame.delta_w, 2.5
    _, pc = dynamics.correlator_envelopes(10.0 + tau, drv, sc, Q, frame)
    expected = drv.pc_mag * math.exp(-(Q.gamma_tot + sc.gamma_e) * tau) \
        * np.exp(1j * (drv.pc_phase0 - 2.0 * dw * 10.0 - dw * tau))
    assert pc == pytest.approx(expected, rel=1e-12)


def test_step_envelope_gates_at_the_cutoff():
    frame = FrameConfig(0.002)
    sc = Fock(0.15, 0.5, 0.5, 10.0, EnvelopeMode.STEP, step_cutoff=2.0)
    drv = dynamics.CorrelatorDrive.from_scenario(sc, Q, frame)
    zc_in, pc_in = dynamics.correlator_envelopes(1.9, drv, sc, Q, frame)
    zc_out, pc_out = dynamics.correlator_envelopes(2.1, drv, sc, Q, frame)
    assert abs(zc_in) == pytest.approx(abs(drv.zc0), rel=1e-12)
    assert zc_out == 0.0j and pc_out == 0.0j
    assert abs(pc_in) == pytest.approx(drv.pc_mag, rel=1e-12)


def test_undriven_decay_matches_the_exponential():
    frame = FrameConfig(0.01, 0.3)
    state0 = BlochState(0.25 - 0.1j, 0.4)
    traj = dynamics.integrate(TwoTone(0.0, 0.0), QD, frame, (0.0, 5.0), 0.0025,
                              state0=state0)
    t = traj.times()
    sm_ref = state0.sm * np.exp((-1j * frame.big_delta - QD.gamma_tot) * t)
    sz_ref = -1.0 + (state0.sz + 1.0) * np.exp(-QD.gamma_rad * t)
    assert np.max(np.abs(traj.sm - sm_ref)) < 1e-12
    assert np.max(np.abs(traj.sz - sz_ref)) < 1e-12


def test_integrate_guards_grid_and_step():
    frame = FrameConfig(0.01)
    sc = TwoTone(0.15, 0.1)
    with pytest.raises(DomainError, match="stability"):
        dynamics.integrate(sc, Q, frame, (0.0, 10.0), 0.1)
    # The same step is accepted when convergence studies ask for it.
    dynamics.integrate(sc, Q, frame, (0.0, 10.0), 0.1, enforce_dt=False)
    with pytest.raises(DomainError, match="whole number"):
        dynamics.integrate(sc, Q, frame, (0.0, 1.0033), 0.01)
    with pytest.raises(DomainError, match="record_stride"):
        dynamics.integrate(sc, Q, frame, (0.0, 1.0), 0.01, record_stride=3)
    with pytest.raises(DomainError):
        dynamics.integrate(sc, Q, frame, (1.0, 1.0), 0.01)


def test_integrate_guards_pulse_train_grid():
    frame = FrameConfig(0.01)
    sc = Fock(0.15, 0.5, 0.5, 10.0)
    with pytest.raises(DomainError, match="divide the pulse window"):
        dynamics.integrate(sc, Q, frame, (0.0, 30.0), 0.012)
    with pytest.raises(DomainError, match="window boundary"):
        dynamics.integrate(sc, Q, frame, (5.0, 25.0), 0.01)
    traj = dynamics.integrate(sc, Q, frame, (10.0, 30.0), 0.01)
    assert len(traj) == 2001


def test_divergence_is_reported_not_propagated():
    # A wildly over-long step makes the explicit scheme blow up; the
    # overflow must surface as a typed error, not as nan-filled output.
    with pytest.raises(IntegrationError, match="non-finite"):
        dynamics.integrate(TwoTone(0.5, 0.0), Q, FrameConfig(0.01),
                           (0.0, 2000.0), 5.0, enforce_dt=False)


def test_integrate_is_deterministic_and_stride_consistent():
    frame = FrameConfig(0.01)
    sc = TwoTone(0.15, 0.1)
    a = dynamics.integrate(sc, Q, frame, (0.0, 20.0), 0.01)
    b = dynamics.integrate(sc, Q, frame, (0.0, 20.0), 0.01)
    assert np.array_equal(a.sm, b.sm) and np.array_equal(a.sz, b.sz)
    thin = dynamics.integrate(sc, Q, frame, (0.0, 20.0), 0.01,
                              record_stride=4)
    assert thin.dt == pytest.approx(0.04)
    assert np.array_equal(a.sm[::4], thin.sm)
    assert np.array_equal(a.sz[::4], thin.sz)


def test_purity_tracking_inside_and_outside_the_ball():
    frame = FrameConfig(0.01)
    clean = dynamics.integrate(TwoTone(0.15, 0.1), Q, frame, (0.0, 200.0),
                               0.01)
    assert clean.max_purity_excess <= 1e-12
    # The frozen pulse-train correlators feed the qubit without the
    # matching backaction, so this scenario genuinely exits the ball.
    pulsed = dynamics.integrate(Fock(0.15, 0.5, 0.5, 10.0), Q, frame,
                                (0.0, 200.0), 0.01)
    assert pulsed.max_purity_excess > 0.05


@pytest.mark.parametrize("scenario,qubit,span", [
    (TwoTone(0.15, 0.15), Q, (0.0, 25.0)),
    (Squeezed(0.15, 2.0, math.sqrt(6.0)), Q, (0.0, 25.0)),
    (Fock(0.15, 0.5, 0.5, 10.0), Q, (0.0, 30.0)),
])
def test_master_equation_solver_agrees(scenario, qubit, span):
    frame = FrameConfig(0.01)
    dt = 1e-3
    traj = dynamics.integrate(scenario, qubit, frame, span, dt)
    t_eval = np.arange(span[0], span[1] + 0.25, 0.5)
    sm_ref, sz_ref = dynamics.density_matrix_oracle(scenario, qubit, frame,
                                                    span, t_eval)
    idx = np.round((t_eval - span[0]) / dt).astype(int)
    assert np.max(np.abs(traj.sm[idx] - sm_ref)) < 1e-9
    assert np.max(np.abs(traj.sz[idx] - sz_ref)) < 1e-9


def test_master_equation_solver_guards_its_grid():
    with pytest.raises(DomainError, match="t_eval"):
        dynamics.density_matrix_oracle(TwoTone(0.1, 0.0), Q, FrameConfig(0.01),
                                       (0.0, 1.0), [0.0, 2.0])


def _attractor(omega1, dw):
    """Exact periodic orbit of the single-tone problem in this frame."""
    gam, G = Q.gamma_tot, Q.gamma_rad
    dp = -dw                      # tone detuning seen from the mid frame
    D = dp * dp + gam * gam
    szs = -1.0 / (1.0 + gam * omega1**2 / (G * D))
    A = 0.5 * omega1 * szs * (-dp - 1j * gam) / D
    return A, szs


def test_rk4_is_fourth_order_against_the_exact_orbit():
    dw, om1 = 0.3, 0.15
    frame = FrameConfig(dw)
    sc = TwoTone(om1, 0.0)
    A, szs = _attractor(om1, dw)
    state0 = BlochState(A, szs)

    def sup_error(dt):
        traj = dynamics.integrate(sc, Q, frame, (0.0, 30.0), dt,
                                  state0=state0, enforce_dt=False)
        t = traj.times()
        return max(np.max(np.abs(traj.sm - A * np.exp(-1j * dw * t))),
                   np.max(np.abs(traj.sz - szs)))

    ratio = sup_error(0.2) / sup_error(0.1)
    assert ratio >= 15.0


def test_steady_state_detect_on_a_settling_run():
    dw = 0.1
    beat = 2.0 * math.pi / dw
    dt = beat / 4000
    t = dt * np.arange(10 * 4000 + 1)
    sm = (1.0 + np.exp(-0.2 * t)) * 0.1 * np.exp(-1j * dw * t)
    traj = Trajectory(0.0, dt, sm, np.full(t.size, -0.5), FrameConfig(dw))
    settled = dynamics.steady_state_detect(traj, beat, tol=1e-4)
    assert 0.0 < settled < 10 * beat
    # Earliest index: one sample earlier must still violate the bound.
    i = int(round(settled / traj.dt))
    p = 4000
    diffs = np.abs(traj.sm[p:] - traj.sm[:-p])
    assert diffs[i:].max() <= 1e-4
    assert i == 0 or diffs[i - 1:].max() > 1e-4
    # Looser bounds settle earlier, never later.
    assert dynamics.steady_state_detect(traj, beat, tol=1e-2) <= settled


def test_steady_state_detect_immediate_for_a_periodic_signal():
    dw = 0.1
    beat = 2.0 * math.pi / dw
    dt = beat / 1000
    t = 3.0 + dt * np.arange(6000 + 1)
    sm = 0.1 * np.exp(-1j * dw * t)
    traj = Trajectory(3.0, dt, sm, np.full(t.size, -0.5), FrameConfig(dw))
    assert dynamics.steady_state_detect(traj, beat) == pytest.approx(3.0)


def test_steady_state_detect_guards_and_failure():
    dw = 0.1
    beat = 2.0 * math.pi / dw
    dt = beat / 1000
    t = dt * np.arange(5000 + 1)
    drift = (0.001 * t) * np.exp(-1j * dw * t)
    traj = Trajectory(0.0, dt, drift, np.full(t.size, -0.5), FrameConfig(dw))
    with pytest.raises(IntegrationError, match="no steady state"):
        dynamics.steady_state_detect(traj, beat, tol=1e-6)
    with pytest.raises(DomainError, match="grid"):
        dynamics.steady_state_detect(traj, beat * 1.0001)
    with pytest.raises(DomainError, match="range"):
        dynamics.steady_state_detect(traj, 10 * beat)
