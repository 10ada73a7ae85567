"""Time-stepping kernels for the rotating-frame Bloch equations.

One flat-argument RK4 loop serves all three scenarios, dispatched by an
integer code so the hot path stays monomorphic: 0 two tones, 1 squeezed
bath, 2 pulse train.  Compiled with numba when importable (set
QMIX_NO_NUMBA to force the pure-python fallback).

The pulse-train window clock is kept in integer step arithmetic: the
caller guarantees dt divides the window, so tau = (k mod steps_per
window) * dt never drifts off the window boundaries no matter how long
the run is.  Right-hand-side evaluations landing exactly on a boundary
use the closing window's values (left limit).
"""

from __future__ import annotations

import os

import numpy as np

KIND_TWO_TONE = 0
KIND_SQUEEZED = 1
KIND_FOCK = 2

STATUS_OK = 0
STATUS_NONFINITE = 1


def _rhs(kind, s, z, t, tau, g_rad, g_tot, big_d, dw, om1, om2, n_bath,
         m_re, m_im, gamma_e, root_ge, zc0, pc_mag, pc_ph0, env_step,
         cutoff):
    e1 = np.exp(-1j * dw * t)
    if kind == 0:
        om = om1 * e1 + om2 * e1.conjugate()
        ds = s * (-1j * big_d - g_tot) - 0.5j * om * z
        dz = -g_rad * (z + 1.0) - 2.0 * (s.conjugate() * om).imag
    elif kind == 1:
        u = 1.0 + 2.0 * n_bath
        om = om1 * e1
        pair = (m_re + 1j * m_im) * (e1 * e1).conjugate()
        ds = (s * (-1j * big_d - g_tot * u) - 0.5j * om * z
              - 2.0 * g_tot * pair * s.conjugate())
        dz = -g_rad * u * z - g_rad - 2.0 * (s.conjugate() * om).imag
    else:
        om = om1 * e1
        if env_step == 1:
            gate = 1.0 if tau <= cutoff else 0.0
            ez = gate
            ep = gate
        else:
            ez = np.exp(-(g_rad + gamma_e) * tau)
            ep = np.exp(-(g_tot + gamma_e) * tau)
        zc = zc0 * ez * e1.conjugate()
        tn = t - tau
        pc = pc_mag * ep * np.exp(
            1j * (pc_ph0 - 2.0 * dw * tn - (dw + big_d) * tau)
        )
        ds = s * (-1j * big_d - g_tot) - 0.5j * om * z + root_ge * zc
        dz = (-g_rad * (z + 1.0) - 2.0 * (s.conjugate() * om).imag
              + 4.0 * root_ge * pc.real)
    return ds, dz


def _rk4_loop(kind, sm0, sz0, t0, dt, n_steps, stride, g_rad, g_tot,
              big_d, dw, om1, om2, n_bath, m_re, m_im, gamma_e, zc0,
              pc_mag, pc_ph0, env_step, cutoff, period_steps, out_sm,
              out_sz):
    root_ge = np.sqrt(g_tot * gamma_e)
    s = sm0
    z = sz0
    out_sm[0] = s
    out_sz[0] = z
    pmax = 4.0 * (s.real * s.real + s.imag * s.imag) + z * z - 1.0
    half = 0.5 * dt
    sixth = dt / 6.0
    for k in range(n_steps):
        t = t0 + k * dt
        if kind == 2:
            tau = (k - (k // period_steps) * period_steps) * dt
        else:
            tau = 0.0
        d1s, d1z = _rhs(kind, s, z, t, tau, g_rad, g_tot, big_d, dw,
                        om1, om2, n_bath, m_re, m_im, gamma_e, root_ge,
                        zc0, pc_mag, pc_ph0, env_step, cutoff)
        d2s, d2z = _rhs(kind, s + half * d1s, z + half * d1z, t + half,
                        tau + half, g_rad, g_tot, big_d, dw, om1, om2,
                        n_bath, m_re, m_im, gamma_e, root_ge, zc0,
                        pc_mag, pc_ph0, env_step, cutoff)
        d3s, d3z = _rhs(kind, s + half * d2s, z + half * d2z, t + half,
                        tau + half, g_rad, g_tot, big_d, dw, om1, om2,
                        n_bath, m_re, m_im, gamma_e, root_ge, zc0,
                        pc_mag, pc_ph0, env_step, cutoff)
        d4s, d4z = _rhs(kind, s + dt * d3s, z + dt * d3z, t + dt,
                        tau + dt, g_rad, g_tot, big_d, dw, om1, om2,
                        n_bath, m_re, m_im, gamma_e, root_ge, zc0,
                        pc_mag, pc_ph0, env_step, cutoff)
        s = s + sixth * (d1s + 2.0 * (d2s + d3s) + d4s)
        z = z + sixth * (d1z + 2.0 * (d2z + d3z) + d4z)
        if not (np.isfinite(s.real) and np.isfinite(s.imag)
                and np.isfinite(z)):
            return STATUS_NONFINITE, k + 1, pmax
        p = 4.0 * (s.real * s.real + s.imag * s.imag) + z * z - 1.0
        if p > pmax:
            pmax = p
        if (k + 1) % stride == 0:
            out_sm[(k + 1) // stride] = s
            out_sz[(k + 1) // stride] = z
    return STATUS_OK, -1, pmax


HAVE_NUMBA = False
if not os.environ.get("QMIX_NO_NUMBA"):
    try:
        from numba import njit

        _rhs = njit(_rhs, cache=True, nogil=True)
        _rk4_loop = njit(_rk4_loop, cache=True, nogil=True)
        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - exercised only without numba
        pass

rk4_loop = _rk4_loop
