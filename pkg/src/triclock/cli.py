"""Command-line front end.

Subcommands: spectrum, scan, protocol, optimize.  Configuration comes from a
preset (--preset) or a key=value file (--config), with --set overrides; all
outputs are CSV/JSON files with provenance sidecars.  Exit codes: 0 success,
2 configuration error, 3 labeling/degeneracy failure, 4 solver failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import (RunConfig, available_presets, load_config_file,
                     load_preset, resolve)
from .drive import DriveConfig
from .engine import ProtocolSpec, run_protocol
from .errors import ConfigError, TriclockError
from .fitting import (extract_envelope, fid_decay_time, fit_damped_sinusoid,
                      scan_detunings)
from .io import sidecar, write_csv, write_json
from .noise import one_over_e_time
from .optimize import (basic_coherence_limit, max_coherence_scan,
                       optimize_basic, optimize_improved)
from .spectrum import (amplitude_mixing, combined_coherence_time,
                       doubly_dressed_spectrum, drive_susceptibility,
                       magnetic_second_order)

TWO_PI = 2.0 * math.pi
MHZ = TWO_PI * 1e6


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="triclock",
                                     description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("spectrum", "eigenvalue / susceptibility report"),
                        ("scan", "coherence time versus detuning or drive"),
                        ("protocol", "Monte Carlo protocol ensemble"),
                        ("optimize", "solve the clock-transition conditions")):
        cmd = sub.add_parser(name, help=help_)
        cmd.add_argument("--preset", help="named preset; see --list-presets")
        cmd.add_argument("--config", help="key = value configuration file")
        cmd.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                         help="override a configuration key")
        cmd.add_argument("--out", default="runs", help="output directory")
        cmd.add_argument("--seed", type=int, help="master seed override")
        cmd.add_argument("--workers", type=int, help="parallel trial workers")
        cmd.add_argument("--dt", type=float, dest="dt_ns",
                         help="integrator step override (ns)")
    parser.add_argument("--list-presets", action="store_true")
    return parser


def _load(args, command: str) -> RunConfig:
    if args.preset and args.config:
        raise ConfigError("give either --preset or --config, not both")
    if args.preset:
        raw = load_preset(args.preset)
    elif args.config:
        raw = load_config_file(args.config)
    else:
        raise ConfigError("a --preset or --config is required")
    overrides = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        overrides[key.strip()] = value.strip()
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.dt_ns is not None:
        overrides["dt_ns"] = args.dt_ns
    return resolve(raw, command, overrides)


def _stem(args) -> str:
    if args.preset:
        return args.preset
    return Path(args.config).stem


def cmd_spectrum(rc: RunConfig, out_dir: Path, stem: str) -> int:
    cfg = rc.drive_config()
    spec = doubly_dressed_spectrum(cfg)
    sus = drive_susceptibility(cfg, rc.direction(), spectrum=spec)
    a, b, c = magnetic_second_order(cfg, spectrum=spec)
    sigma = rc.resolved_sigma()
    mixing = amplitude_mixing(cfg, sigma, spectrum=spec)
    report = {
        "energies_mhz": {"u~": spec.energies[0] / MHZ,
                         "B~": spec.energies[1] / MHZ,
                         "d~": spec.energies[2] / MHZ},
        "omega_rq_mhz": spec.omega_rq / MHZ,
        "alpha": spec.alpha,
        "beta": spec.beta,
        "labeling_overlaps": spec.overlaps,
        "susceptibility_mhz": {"u~": sus.e_u / MHZ, "B~": sus.e_b / MHZ,
                               "d~": sus.e_d / MHZ},
        "susceptibility_direction": sus.direction,
        "clock_residual_mhz": (sus.e_b - sus.e_d) / MHZ,
        "magnetic_second_order_per_2pi_mhz": {"a": a * MHZ, "b": b * MHZ,
                                              "c": c * MHZ},
        "sigma_b_khz": sigma / (TWO_PI * 1e3),
        "mixing_fraction": mixing,
    }
    payload = sidecar(rc.as_dict(), rc.seed, {"result": report})
    write_json(out_dir / f"{stem}-spectrum.json", payload)
    print(f"spectrum: omega_rq = {report['omega_rq_mhz']:.6f} MHz, "
          f"clock residual = {report['clock_residual_mhz']:.6e} MHz")
    return 0


def _auto_t_limit(rc: RunConfig, cfg: DriveConfig) -> float:
    direction = rc.direction()
    solution = optimize_basic(cfg, direction)
    solved = cfg.with_detunings(solution.delta, 0.0)
    return basic_coherence_limit(solved, direction, rc.ou_params(),
                                 rc.drive_noise_params())


def cmd_scan(rc: RunConfig, out_dir: Path, stem: str) -> int:
    if rc.scan_type == "delta":
        for key in ("delta_min_mhz", "delta_max_mhz", "delta_points"):
            if rc.values[key] is None:
                raise ConfigError(f"delta scans require {key}")
        if rc.delta_points < 10:
            raise ConfigError("delta scans need at least 10 grid points")
        cfg = rc.drive_config(delta_mhz=rc.delta_min_mhz)
        t_limit = rc.t_limit_us
        t_limit_s = (_auto_t_limit(rc, cfg) if t_limit == "auto"
                     else t_limit * 1e-6)
        direction = rc.direction()
        deltas = np.linspace(rc.delta_min_mhz, rc.delta_max_mhz,
                             rc.delta_points) * MHZ

        def evaluator(delta):
            return combined_coherence_time(cfg.with_detunings(delta),
                                           direction, rc.delta_rms, t_limit_s)

        curve = scan_detunings(deltas, evaluator)
        write_csv(out_dir / f"{stem}-scan.csv",
                  ["delta_mhz", "t2_us", "t2_err_us"],
                  zip(curve.deltas / MHZ, curve.t2 * 1e6, curve.t2_err * 1e6))
        extra = {
            "peak_delta_mhz": curve.peak_delta / MHZ,
            "peak_t2_us": curve.peak_t2 * 1e6,
            "fwhm_mhz": curve.fwhm / MHZ,
            "peak_on_boundary": curve.peak_on_boundary,
            "t_limit_us": t_limit_s * 1e6,
        }
        write_json(out_dir / f"{stem}-scan.json",
                   sidecar(rc.as_dict(), rc.seed, {"result": extra}))
        print(f"scan: peak T2 = {extra['peak_t2_us']:.1f} us at "
              f"{extra['peak_delta_mhz']:.4f} MHz")
        return 0

    for key in ("omega_min_mhz", "omega_max_mhz", "omega_points"):
        if rc.values[key] is None:
            raise ConfigError(f"omega scans require {key}")
    if rc.omega_points < 1:
        raise ConfigError("omega scans need at least one point")
    omegas = np.linspace(rc.omega_min_mhz, rc.omega_max_mhz,
                         rc.omega_points) * MHZ
    points = max_coherence_scan(omegas, rc.ou_params(), rc.drive_noise_params(),
                                scheme=rc.scheme, direction=rc.direction())
    rows = []
    for pt in points:
        sol = pt.solution
        rows.append((pt.omega_d / MHZ,
                     pt.t2 * 1e6 if math.isfinite(pt.t2) else float("nan"),
                     sol.delta / MHZ if sol else float("nan"),
                     sol.delta0 / MHZ if sol else float("nan")))
    write_csv(out_dir / f"{stem}-scan.csv",
              ["omega_mhz", "t2max_us", "delta_mhz", "delta0_mhz"], rows)
    solved = [pt for pt in points if pt.solution is not None]
    if not solved:
        raise ConfigError("no drive strength in the grid was solvable")
    best = max(solved, key=lambda p: p.t2)
    extra = {
        "best_omega_mhz": best.omega_d / MHZ,
        "best_t2_us": best.t2 * 1e6,
        "failures": [{"omega_mhz": p.omega_d / MHZ, "error": p.error}
                     for p in points if p.solution is None],
    }
    write_json(out_dir / f"{stem}-scan.json",
               sidecar(rc.as_dict(), rc.seed, {"result": extra}))
    print(f"scan: best T2 = {extra['best_t2_us']:.1f} us at "
          f"{extra['best_omega_mhz']:.2f} MHz drive")
    return 0


def cmd_protocol(rc: RunConfig, out_dir: Path, stem: str) -> int:
    if rc.trials < 1:
        raise ConfigError("trials must be at least 1")
    needs_delta = rc.protocol in ("dressed_ramsey", "survival_probe")
    fallback_delta = rc.values["delta_mhz"] if rc.values["delta_mhz"] is not None else 10.0
    cfg = rc.drive_config() if needs_delta else rc.drive_config(delta_mhz=fallback_delta)
    from .engine import default_timestep, uniform_tau_grid, windowed_tau_grid
    dt = rc.dt_ns * 1e-9 if rc.dt_ns else default_timestep(cfg, rc.protocol,
                                                           rc.ou_params())
    if rc.values["tau_windows"] is not None:
        if rc.values["tau_window_span_us"] is None:
            raise ConfigError("tau_windows requires tau_window_span_us")
        taus = windowed_tau_grid(rc.tau_max_us * 1e-6, rc.tau_windows,
                                 rc.tau_window_span_us * 1e-6, rc.tau_points)
    else:
        grid_dt = min(dt, rc.tau_max_us * 1e-6 / (rc.tau_points - 1) / 2)
        dt = grid_dt
        taus = uniform_tau_grid(rc.tau_max_us * 1e-6, rc.tau_points, dt)
    spec = ProtocolSpec(variant=rc.protocol, taus=taus, dt=dt)
    result = run_protocol(spec, cfg, rc.ou_params(), rc.drive_noise_params(),
                          trials=rc.trials, seed=rc.seed, workers=rc.workers)
    write_csv(out_dir / f"{stem}-signal.csv", ["tau_s", "mean", "stderr"],
              zip(result.taus, result.mean, result.stderr))
    analysis: dict = {}
    try:
        if rc.protocol == "survival_probe":
            env = extract_envelope(result)
            analysis["envelope_time_constant_us"] = env.time_constant * 1e6
            analysis["envelope_time_constant_err_us"] = env.time_constant_err * 1e6
        elif rc.protocol == "fid_bare":
            analysis["t2_star_us"] = fid_decay_time(result) * 1e6
        else:
            est = fit_damped_sinusoid(result)
            analysis["fit"] = {
                "amplitude": est.amplitude,
                "frequency_mhz": est.omega / MHZ,
                "phase": est.phase,
                "t2_us": est.t2 * 1e6,
                "offset": est.offset,
                "errors": est.errors,
                "residual_rms": est.residual_rms,
                "envelope_only": est.envelope_only,
            }
    except TriclockError as exc:
        analysis["analysis_error"] = str(exc)
    extra = {
        "result": analysis,
        "dt_s": result.dt,
        "trials": result.trials,
        "engine": result.meta,
    }
    write_json(out_dir / f"{stem}-signal.json",
               sidecar(rc.as_dict(), rc.seed, extra))
    summary = analysis.get("fit", analysis)
    print(f"protocol {rc.protocol}: {result.trials} trials, "
          f"dt = {result.dt*1e9:.3f} ns, analysis: {summary}")
    return 0


def cmd_optimize(rc: RunConfig, out_dir: Path, stem: str) -> int:
    cfg = rc.drive_config(delta_mhz=rc.values["delta_mhz"] or 1.0,
                          delta0_mhz=rc.values["delta0_mhz"])
    direction = rc.direction()
    ou = rc.ou_params()
    dn = rc.drive_noise_params()
    if rc.scheme == "basic":
        sol = optimize_basic(cfg, direction, ou=ou, drive_noise=dn)
    else:
        sol = optimize_improved(cfg, direction, ou=ou, drive_noise=dn)
    report = {
        "scheme": sol.scheme,
        "delta_mhz": sol.delta / MHZ,
        "delta0_mhz": sol.delta0 / MHZ,
        "residuals_normalized": sol.residuals,
        "predicted_t2_us": sol.predicted_t2 * 1e6,
        "iterations": sol.iterations,
        "pair": sol.pair,
    }
    write_json(out_dir / f"{stem}-solution.json",
               sidecar(rc.as_dict(), rc.seed, {"result": report}))
    print(f"optimize [{sol.scheme}]: delta = {report['delta_mhz']:.4f} MHz, "
          f"delta0 = {report['delta0_mhz']:.4f} MHz, "
          f"predicted T2 = {report['predicted_t2_us']:.1f} us")
    return 0


_COMMANDS = {
    "spectrum": cmd_spectrum,
    "scan": cmd_scan,
    "protocol": cmd_protocol,
    "optimize": cmd_optimize,
}


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    if "--list-presets" in argv:
        for name in available_presets():
            print(name)
        return 0
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        rc = _load(args, args.command)
        out_dir = Path(args.out)
        return _COMMANDS[args.command](rc, out_dir, _stem(args))
    except TriclockError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return getattr(exc, "exit_code", 4)


if __name__ == "__main__":
    sys.exit(main())
