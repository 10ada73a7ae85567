"""Command-line pipeline: plan, run, extract, compare, persist.

Commands
--------
simulate
    Integrate the configured scenario past its transient, extract the
    harmonic table over a commensurate window, and write trajectory.csv,
    spectrum.csv, peaks.json and manifest.json into --out.
validate
    Run (or re-read) a spectrum and compare it against the matching
    closed-form prediction; nonzero exit when any line misses tolerance.
sweep
    Re-run the scenario over a parameter grid, tabulate the lines, and
    fit log-log scaling exponents against the photon-count prediction.

Exit codes: 0 success, 2 configuration or domain problem, 3 integration
failure, 4 no applicable closed form, 5 validation mismatch.

Run planning snaps every time scale onto one grid: dt is shrunk so an
integer number of steps covers a beat (and a pulse window, whose period
also fixes the effective delta_w through 2 pi / (m T)), the transient is
rounded up to whole recorded strides, and the analysis window to whole
beats.  Harmonic extraction on such a window has no spectral leakage,
so line amplitudes are limited by integrator accuracy alone.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Optional, Sequence, Tuple

import numpy as np

from . import __version__, analytic, dynamics, multiphoton, spectra
from .model import (
    ConfigError,
    DomainError,
    FrameConfig,
    GROUND,
    IntegrationError,
    OracleError,
    QmixError,
    QubitParams,
    RunSettings,
    Trajectory,
    load_config,
    validate_scenario,
    validate_setup,
)

TWO_PI = 2.0 * math.pi

# Validation tolerance against the quasi-static closed forms.  The
# closed forms drop the O(n delta_w / gamma) phase drift that a finite
# beat frequency imprints on each harmonic, so the complex difference
# grows with |n| even when the magnitudes agree to <0.1%.  Measured
# worst cases at delta_w = 0.002: 8% at n = +-7 (two tone), ~30% on the
# weak outer lines of the squeezed ladder.  Tolerances sit above those.
DEFAULT_REL_TOL = {"two_tone": 0.10, "squeezed": 0.35, "fock": 0.10}
DEFAULT_ABS_FLOOR = 1e-9

_MAX_TRAJECTORY_ROWS = 200_000


@dataclass(frozen=True)
class RunPlan:
    """Commensurate integration grid for one scenario run."""

    frame: FrameConfig          # effective frame (delta_w possibly snapped)
    dt: float
    record_stride: int
    transient_steps: int
    window_steps: int
    beat_steps: int
    steps_per_window: int = 0   # pulse train only
    windows_per_beat: int = 0   # pulse train only

    @property
    def n_steps(self) -> int:
        return self.transient_steps + self.window_steps

    @property
    def t_end(self) -> float:
        return self.n_steps * self.dt

    @property
    def window(self) -> Tuple[float, float]:
        return self.transient_steps * self.dt, self.t_end


def plan_run(scenario, qubit: QubitParams, frame: FrameConfig,
             run: RunSettings) -> RunPlan:
    """Choose dt and window so every period sits exactly on the grid."""
    if run.periods < 5:
        raise DomainError("at least 5 beat periods are needed for extraction")
    stride = run.record_stride
    bound = 1.0 / (dynamics.DT_RATE_FACTOR
                   * dynamics.rate_scale(scenario, qubit, frame))
    dt_target = min(run.dt, bound)

    if scenario.kind == "fock":
        T = scenario.period
        m = max(1, round(TWO_PI / (frame.delta_w * T)))
        frame_eff = dataclasses.replace(frame, delta_w=TWO_PI / (m * T))
        spw = stride * math.ceil(T / (stride * dt_target))
        dt = T / spw
        beat_steps = m * spw
        transient_steps = spw * math.ceil(run.transient / T)
        return RunPlan(frame_eff, dt, stride, transient_steps,
                       run.periods * beat_steps, beat_steps,
                       steps_per_window=spw, windows_per_beat=m)

    beat = TWO_PI / frame.delta_w
    beat_steps = stride * math.ceil(beat / (stride * dt_target))
    dt = beat / beat_steps
    transient_steps = stride * math.ceil(run.transient / (stride * dt))
    return RunPlan(frame, dt, stride, transient_steps,
                   run.periods * beat_steps, beat_steps)


@dataclass(frozen=True)
class RunResult:
    plan: RunPlan
    trajectory: Trajectory
    table: spectra.SpectrumTable


def run_scenario(scenario, qubit: QubitParams, frame: FrameConfig,
                 run: RunSettings, state0=GROUND) -> RunResult:
    """Plan, integrate, and extract the harmonic table for one setup."""
    plan = plan_run(scenario, qubit, frame, run)
    traj = dynamics.integrate(scenario, qubit, plan.frame,
                              (0.0, plan.t_end), plan.dt, state0=state0,
                              record_stride=plan.record_stride)
    beat = plan.beat_steps * plan.dt
    settled = dynamics.steady_state_detect(traj, beat, run.steady_tol)
    if settled > plan.window[0] + 0.5 * plan.dt:
        raise IntegrationError(
            f"trajectory only becomes periodic at t = {settled:.6g}, "
            f"after the configured transient {plan.window[0]:.6g}; "
            "raise run.transient"
        )
    table = spectra.spectrum_table(traj, run.n_max, window=plan.window,
                                   scenario_kind=scenario.kind)
    return RunResult(plan, traj, table)


def oracle_table(scenario, qubit: QubitParams, frame: FrameConfig,
                 n_max: int) -> spectra.SpectrumTable:
    """Closed-form spectrum prediction for the validate command."""
    if scenario.kind == "two_tone":
        return analytic.two_tone_spectrum(scenario, qubit, frame, n_max)
    if scenario.kind == "squeezed":
        return analytic.squeezed_steady_spectrum(scenario, qubit, frame, n_max)
    table = analytic.fock_envelope_spectrum(scenario, qubit, frame)
    kept = {n: v for n, v in table.entries.items() if abs(n) <= n_max}
    return spectra.SpectrumTable(table.delta_w, kept, table.window)


# ----------------------------------------------------------------------
# Commands

def _sha256_of(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _emit_warnings(report, quiet: bool) -> None:
    if quiet:
        return
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    for f in report.flags:
        print(f"note: {f}", file=sys.stderr)


def _manifest(args, scenario, frame_req, result: RunResult,
              run: RunSettings, config_hash: str) -> dict:
    plan = result.plan
    return {
        "config_path": args.config,
        "config_sha256": config_hash,
        "scenario": scenario.kind,
        "delta_w_requested": frame_req.delta_w,
        "delta_w_effective": plan.frame.delta_w,
        "dt": plan.dt,
        "record_stride": plan.record_stride,
        "n_steps": plan.n_steps,
        "t_end": plan.t_end,
        "window": list(plan.window),
        "periods": run.periods,
        "n_max": run.n_max,
        "max_purity_excess": result.trajectory.max_purity_excess,
        "outputs": ["trajectory.csv", "spectrum.csv", "peaks.json"],
        "deterministic": True,
        "version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }


def cmd_simulate(args) -> int:
    qubit, frame, scenario, run = load_config(args.config)
    _emit_warnings(validate_setup(qubit, frame, scenario), args.quiet)
    result = run_scenario(scenario, qubit, frame, run)
    config_hash = _sha256_of(args.config)

    os.makedirs(args.out, exist_ok=True)
    n_rec = len(result.trajectory)
    out_stride = run.out_stride or max(1, math.ceil(n_rec / _MAX_TRAJECTORY_ROWS))
    spectra.write_trajectory_csv(os.path.join(args.out, "trajectory.csv"),
                                 result.trajectory, config_hash, out_stride)
    spectra.write_spectrum_csv(os.path.join(args.out, "spectrum.csv"),
                               result.table, scenario.kind, config_hash)
    report = spectra.peak_report(result.table, scenario.kind)
    with open(os.path.join(args.out, "peaks.json"), "w", encoding="utf-8") as fh:
        fh.write(report.to_json() + "\n")
    manifest = _manifest(args, scenario, frame, result, run, config_hash)
    with open(os.path.join(args.out, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    if not args.quiet:
        table = result.table
        print(f"scenario={scenario.kind} "
              f"delta_w={result.plan.frame.delta_w:.6g} "
              f"dt={result.plan.dt:.6g} steps={result.plan.n_steps}")
        lines = [n for n in table.indices() if table.above_floor(n)]
        print("lines above floor: "
              + (", ".join(f"n={n} |S|={abs(table.entries[n]):.4e}"
                           for n in lines) or "none"))
        print(f"outputs in {args.out}")
    return 0


def cmd_validate(args) -> int:
    qubit, frame, scenario, run = load_config(args.config)
    _emit_warnings(validate_setup(qubit, frame, scenario), args.quiet)
    config_hash = _sha256_of(args.config)

    if args.spectrum:
        numeric, kind, embedded = spectra.read_spectrum_csv(args.spectrum)
        if kind and kind != scenario.kind:
            raise ConfigError(
                f"spectrum file holds a {kind} run, config is {scenario.kind}"
            )
        if embedded and embedded != config_hash:
            raise ConfigError(
                "spectrum file was produced from a different configuration "
                f"(hash {embedded[:12]}.. != {config_hash[:12]}..)"
            )
        frame_eff = dataclasses.replace(frame, delta_w=numeric.delta_w)
    else:
        result = run_scenario(scenario, qubit, frame, run)
        numeric = result.table
        frame_eff = result.plan.frame

    oracle = oracle_table(scenario, qubit, frame_eff, run.n_max)
    rel = args.rel_tol if args.rel_tol is not None \
        else DEFAULT_REL_TOL[scenario.kind]
    comparison = spectra.compare_tables(numeric, oracle, rel, args.abs_floor)
    payload = {
        "scenario": scenario.kind,
        "rel_tol": rel,
        "abs_floor": args.abs_floor,
        "ok": comparison.ok,
        "rows": [
            {"n": r.n, "numeric_abs": abs(r.numeric),
             "oracle_abs": abs(r.oracle), "delta": r.delta,
             "allowance": r.allowance, "ok": r.ok}
            for r in comparison.rows
        ],
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0 if comparison.ok else 5


_SWEEPABLE = {
    "omega1": "scenario", "nu": "scenario", "n_bath": "scenario",
    "m_bath": "scenario", "period": "scenario",
    "delta_w": "frame",
}


def _parse_values(text: str) -> Tuple[float, ...]:
    if text.startswith(("lin:", "log:")):
        mode, a, b, count = text.split(":")
        a, b, count = float(a), float(b), int(count)
        if count < 2:
            raise ConfigError("value grids need at least 2 points")
        if mode == "lin":
            return tuple(float(v) for v in np.linspace(a, b, count))
        if a <= 0 or b <= 0:
            raise ConfigError("log grids need positive endpoints")
        return tuple(float(v) for v in np.geomspace(a, b, count))
    values = tuple(float(v) for v in text.split(",") if v.strip())
    if not values:
        raise ConfigError("empty sweep value list")
    return values


def _with_param(scenario, frame: FrameConfig, name: str, value: float):
    target = _SWEEPABLE.get(name)
    if target is None or (target == "scenario"
                          and not hasattr(scenario, name)):
        raise ConfigError(
            f"cannot sweep {name!r} for scenario {scenario.kind!r}"
        )
    if target == "frame":
        return scenario, dataclasses.replace(frame, delta_w=value)
    return dataclasses.replace(scenario, **{name: value}), frame


def cmd_sweep(args) -> int:
    qubit, frame, scenario, run = load_config(args.config)
    # Aggregation is order-independent; emit rows sorted by axis value.
    values = tuple(sorted(_parse_values(args.values)))
    target = _SWEEPABLE.get(args.axis)
    if target is None or (target == "scenario"
                          and not hasattr(scenario, args.axis)):
        raise ConfigError(
            f"cannot sweep {args.axis!r} for scenario {scenario.kind!r}"
        )

    def one(v):
        # A bad grid point (unphysical value, diverging run, ...) is a
        # per-point failure; the rest of the grid still runs.
        try:
            sc_v, fr_v = _with_param(scenario, frame, args.axis, v)
            report = validate_scenario(sc_v)
            if not report.ok:
                raise ConfigError("; ".join(report.violations))
            return run_scenario(sc_v, qubit, fr_v, run).table, None
        except QmixError as exc:
            return None, str(exc)

    workers = int(os.environ.get("QMIX_THREADS", "0")) or (os.cpu_count() or 1)
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        outcomes = list(pool.map(one, values))

    os.makedirs(args.out, exist_ok=True)
    config_hash = _sha256_of(args.config)
    sweep_path = os.path.join(args.out, "sweep.csv")
    failures = []
    with open(sweep_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# config_sha256={config_hash}\n")
        fh.write(f"# axis={args.axis}\n")
        fh.write("value,n,abs_S_n\n")
        for v, (table, err) in zip(values, outcomes):
            if table is None:
                failures.append((v, err))
                fh.write(f"# failed value={v!r}: {err}\n")
                continue
            for n in table.indices():
                fh.write(f"{v!r},{n},{abs(table.entries[n])!r}\n")

    # Slope fits only where the bookkeeping predicts a power law in the
    # swept amplitude, i.e. the omega1 axis.
    exponents = {}
    good = [(v, t) for v, (t, e) in zip(values, outcomes) if t is not None]
    if args.axis == "omega1" and len(good) >= 3:
        allowed = multiphoton.allowed_indices(scenario.kind, run.n_max)
        logs = np.log(np.asarray([v for v, _ in good]))
        for n in allowed:
            mags = np.array([abs(t.entries[n]) for _, t in good])
            if np.any(mags < 1e-13):
                continue
            slope = float(np.polyfit(logs, np.log(mags), 1)[0])
            exponents[str(n)] = {
                "slope": slope,
                "predicted": multiphoton.predicted_scaling(scenario.kind, n)[0],
            }
    with open(os.path.join(args.out, "exponents.json"), "w",
              encoding="utf-8") as fh:
        json.dump(exponents, fh, indent=2, sort_keys=True)
        fh.write("\n")

    if not args.quiet:
        print(f"swept {args.axis} over {len(values)} values -> {sweep_path}")
        for n, fit in sorted(exponents.items(), key=lambda kv: int(kv[0])):
            print(f"n={n}: slope={fit['slope']:.3f} "
                  f"predicted={fit['predicted']}")
    for v, err in failures:
        print(f"error: sweep point {v!r} failed: {err}", file=sys.stderr)
    return 3 if failures else 0


# ----------------------------------------------------------------------
# Entry point

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmix",
        description="Wave mixing spectra of a driven two-level emitter.",
    )
    parser.add_argument("--quiet", action="store_true",
                        help="suppress progress output")
    parser.add_argument("--json-errors", action="store_true",
                        help="report failures as JSON on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate and extract a spectrum")
    sim.add_argument("--config", required=True, help="TOML setup file")
    sim.add_argument("--out", default="qmix_out", help="output directory")

    val = sub.add_parser("validate",
                         help="compare a run against its closed form")
    val.add_argument("--config", required=True)
    val.add_argument("--spectrum",
                     help="existing spectrum.csv to check instead of re-running")
    val.add_argument("--rel-tol", type=float, default=None,
                     help="relative tolerance (default per scenario)")
    val.add_argument("--abs-floor", type=float, default=DEFAULT_ABS_FLOOR,
                     help="absolute tolerance added to every line")

    swp = sub.add_parser("sweep", help="re-run over a parameter grid")
    swp.add_argument("--config", required=True)
    swp.add_argument("--axis", required=True,
                     help="one of: " + ", ".join(sorted(_SWEEPABLE)))
    swp.add_argument("--values", required=True,
                     help="comma list, lin:a:b:n, or log:a:b:n")
    swp.add_argument("--out", default="qmix_out")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {"simulate": cmd_simulate, "validate": cmd_validate,
               "sweep": cmd_sweep}[args.command]
    try:
        return handler(args)
    except (QmixError, OSError) as exc:
        code = 2
        if isinstance(exc, IntegrationError):
            code = 3
        elif isinstance(exc, OracleError):
            code = 4
        if args.json_errors:
            print(json.dumps({"error": {
                "type": type(exc).__name__, "message": str(exc),
            }}), file=sys.stderr)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    raise SystemExit(main())
