"""Quasi-discrete emission spectra of a rotating-frame trajectory.

Under a weak splitting ``delta_w`` the stationary coherence is a sum of
sharp harmonics, ``sm(t) = sum_n S_n exp(-i n delta_w t)``; the lab-frame
emission line ``n`` sits at ``w_d + n * delta_w``.  Amplitudes are
recovered by projecting the sampled trajectory on the harmonic kernels
over a window that spans an integer number of beat periods, where the
kernels are orthogonal.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from .model import DomainError, QubitParams, Trajectory
from . import multiphoton

TWO_PI = 2.0 * math.pi

# Window alignment slop, as a fraction of one sample / one period.
_GRID_TOL = 1e-6


@dataclass(frozen=True)
class SpectrumTable:
    """Harmonic amplitudes S_n keyed by integer line index n."""

    delta_w: float
    entries: Dict[int, complex]
    window: Tuple[float, float] = (0.0, 0.0)
    floor: float = 0.0

    def indices(self) -> Tuple[int, ...]:
        return tuple(sorted(self.entries))

    def amp(self, n: int) -> complex:
        return self.entries[n]

    def max_abs(self) -> float:
        if not self.entries:
            return 0.0
        return max(abs(v) for v in self.entries.values())

    def above_floor(self, n: int) -> bool:
        """Peak test against the estimated extraction floor."""
        threshold = max(5.0 * self.floor, 1e-12 * self.max_abs())
        return abs(self.entries[n]) > threshold


def _window_indices(traj: Trajectory, window) -> Tuple[int, int]:
    if window is None:
        return 0, len(traj) - 1
    t_lo, t_hi = window
    i0 = (t_lo - traj.t0) / traj.dt
    i1 = (t_hi - traj.t0) / traj.dt
    for name, x in (("start", i0), ("end", i1)):
        if abs(x - round(x)) > _GRID_TOL:
            raise DomainError(
                f"window {name} {t_lo if name == 'start' else t_hi!r} does not "
                f"fall on the sample grid (dt = {traj.dt!r})"
            )
    i0, i1 = int(round(i0)), int(round(i1))
    if not 0 <= i0 < i1 <= len(traj) - 1:
        raise DomainError("window exceeds the recorded trajectory span")
    return i0, i1


def extract_component(
    traj: Trajectory,
    n: int,
    window: Optional[Tuple[float, float]] = None,
    min_periods: int = 5,
) -> complex:
    """Amplitude of the exp(-i n delta_w t) component of sm over a window.

    Parameters
    ----------
    traj:
        Uniformly sampled trajectory.
    n:
        Harmonic index; the lab emission frequency is w_d + n delta_w.
    window:
        (t_lo, t_hi) in trajectory time.  Both ends must lie on the sample
        grid and the length must be an integer number of beat periods
        2 pi / delta_w; otherwise neighbouring harmonics leak into the
        estimate.  Defaults to the full recorded span.
    min_periods:
        Reject windows shorter than this many beat periods.

    Returns
    -------
    complex
        Trapezoid estimate of (1/W) integral of sm(t) exp(+i n delta_w t).
    """
    dw = traj.frame.delta_w
    i0, i1 = _window_indices(traj, window)
    span = (i1 - i0) * traj.dt
    periods = span * dw / TWO_PI
    if abs(periods - round(periods)) > _GRID_TOL:
        raise DomainError(
            f"window length {span!r} is {periods:.6f} beat periods; "
            "an integer count is required for harmonic orthogonality"
        )
    if round(periods) < min_periods:
        raise DomainError(
            f"window spans {int(round(periods))} beat periods; "
            f"at least {min_periods} required"
        )
    t = traj.t0 + traj.dt * np.arange(i0, i1 + 1)
    integrand = traj.sm[i0 : i1 + 1] * np.exp(1j * n * dw * t)
    return complex(np.trapezoid(integrand, dx=traj.dt) / span)


def spectrum_table(
    traj: Trajectory,
    n_range: Union[int, Iterable[int]],
    window: Optional[Tuple[float, float]] = None,
    scenario_kind: Optional[str] = None,
    min_periods: int = 5,
) -> SpectrumTable:
    """Extract a table of harmonics and estimate the numerical floor.

    ``n_range`` may be an int (symmetric range |n| <= n_range) or an
    explicit iterable of indices.  The floor is the median |S_n| over the
    indices that the scenario's photon bookkeeping forbids; for those the
    extracted value is numerical residue by construction.
    """
    if isinstance(n_range, int):
        ns: Sequence[int] = range(-n_range, n_range + 1)
    else:
        ns = sorted(set(int(n) for n in n_range))
    kind = scenario_kind or traj.scenario_kind
    entries = {
        n: extract_component(traj, n, window, min_periods) for n in ns
    }
    floor = 0.0
    if kind:
        allowed = set(multiphoton.allowed_indices(kind, max(abs(n) for n in ns)))
        residue = [abs(entries[n]) for n in ns if n not in allowed]
        if residue:
            floor = float(np.median(residue))
    i0, i1 = _window_indices(traj, window)
    win = (traj.t0 + i0 * traj.dt, traj.t0 + i1 * traj.dt)
    return SpectrumTable(traj.frame.delta_w, entries, win, floor)


def emitted_amplitude(sm, qubit: QubitParams):
    """Emitted-field amplitude for a coherence value or array of them."""
    return -1j * qubit.gamma_rad * sm / qubit.dipole_scale


# ----------------------------------------------------------------------
# Comparison against a reference table

@dataclass(frozen=True)
class CompareRow:
    n: int
    numeric: complex
    oracle: complex
    delta: float            # |numeric - oracle|
    allowance: float        # rel_tol * |oracle| + abs_floor
    ok: bool


@dataclass(frozen=True)
class TableComparison:
    rows: Tuple[CompareRow, ...]
    rel_tol: float
    abs_floor: float

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def failures(self) -> Tuple[CompareRow, ...]:
        return tuple(r for r in self.rows if not r.ok)


def compare_tables(
    numeric: SpectrumTable,
    oracle: SpectrumTable,
    rel_tol: float,
    abs_floor: float,
) -> TableComparison:
    """Per-index comparison: pass iff |num - ora| <= rel_tol |ora| + abs_floor.

    Indices present in the oracle but missing from the numeric table fail.
    """
    rows = []
    for n in sorted(oracle.entries):
        ora = oracle.entries[n]
        allowance = rel_tol * abs(ora) + abs_floor
        if n not in numeric.entries:
            rows.append(CompareRow(n, complex("nan"), ora, math.inf, allowance, False))
            continue
        num = numeric.entries[n]
        delta = abs(num - ora)
        rows.append(CompareRow(n, num, ora, delta, allowance, delta <= allowance))
    return TableComparison(tuple(rows), rel_tol, abs_floor)


# ----------------------------------------------------------------------
# Peak report

@dataclass(frozen=True)
class PeakEntry:
    n: int
    abs: float
    phase: float
    passed: bool


@dataclass(frozen=True)
class PeakReport:
    scenario: str
    delta_w: float
    floor: float
    entries: Tuple[PeakEntry, ...]

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "delta_w": self.delta_w,
            "floor": self.floor,
            "entries": [
                {"n": e.n, "abs": e.abs, "phase": e.phase, "pass": e.passed}
                for e in self.entries
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def peak_report(
    table: SpectrumTable,
    scenario_kind: str,
    comparison: Optional[TableComparison] = None,
) -> PeakReport:
    """Summarize a table; 'pass' is comparison success when a reference is
    given, otherwise agreement of presence/absence with the allowed set."""
    allowed = set(
        multiphoton.allowed_indices(scenario_kind, max((abs(n) for n in table.entries), default=1))
    )
    by_n = {}
    if comparison is not None:
        by_n = {r.n: r.ok for r in comparison.rows}
    entries = []
    for n in table.indices():
        amp = table.entries[n]
        if comparison is not None:
            ok = by_n.get(n, table.above_floor(n) == (n in allowed))
        else:
            ok = table.above_floor(n) == (n in allowed)
        entries.append(PeakEntry(n, abs(amp), math.atan2(amp.imag, amp.real), ok))
    return PeakReport(scenario_kind, table.delta_w, table.floor, tuple(entries))


# ----------------------------------------------------------------------
# CSV formats.  Leading '#' lines carry run metadata; the column header
# row is always present.  Floats are written with repr for an exact,
# deterministic round trip.

def _fmt(x: float) -> str:
    return repr(float(x))


def write_trajectory_csv(path, traj: Trajectory, config_hash: str = "",
                         stride: int = 1) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if config_hash:
            fh.write(f"# config_sha256={config_hash}\n")
        fh.write(f"# delta_w={_fmt(traj.frame.delta_w)}\n")
        fh.write("t,re_sm,im_sm,sz\n")
        for i in range(0, len(traj), stride):
            t = traj.t0 + i * traj.dt
            s = traj.sm[i]
            fh.write(f"{_fmt(t)},{_fmt(s.real)},{_fmt(s.imag)},{_fmt(traj.sz[i])}\n")


def write_spectrum_csv(path, table: SpectrumTable, scenario_kind: str,
                       config_hash: str = "") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if config_hash:
            fh.write(f"# config_sha256={config_hash}\n")
        fh.write(f"# scenario={scenario_kind}\n")
        fh.write(f"# delta_w={_fmt(table.delta_w)}\n")
        fh.write(f"# floor={_fmt(table.floor)}\n")
        fh.write("n,freq_over_delta_w,re,im,abs,above_floor\n")
        for n in table.indices():
            s = table.entries[n]
            fh.write(
                f"{n},{n},{_fmt(s.real)},{_fmt(s.imag)},{_fmt(abs(s))},"
                f"{int(table.above_floor(n))}\n"
            )


def read_spectrum_csv(path):
    """Read a spectrum CSV back into (table, scenario_kind, config_hash)."""
    meta = {}
    entries: Dict[int, complex] = {}
    header_seen = False
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key.strip()] = val.strip()
                continue
            if not header_seen:
                if line != "n,freq_over_delta_w,re,im,abs,above_floor":
                    raise DomainError(f"{path}: unexpected spectrum CSV header")
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 6:
                raise DomainError(f"{path}: malformed spectrum row {line!r}")
            n = int(parts[0])
            entries[n] = complex(float(parts[2]), float(parts[3]))
    if not header_seen:
        raise DomainError(f"{path}: missing spectrum CSV header")
    table = SpectrumTable(
        delta_w=float(meta.get("delta_w", "nan")),
        entries=entries,
        floor=float(meta.get("floor", "0.0")),
    )
    return table, meta.get("scenario", ""), meta.get("config_sha256", "")
