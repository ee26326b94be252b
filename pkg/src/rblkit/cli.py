"""Command-line interface.

Subcommands: simulate, estimate, benchmark, crlb, track, complete. All
outputs land in the --out directory (default ./rblkit-out) as CSV or JSON;
runs are deterministic for a fixed seed. Exit code 0 on success, 1 on
configuration errors (with a diagnostic on stderr), 2 on bad usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bounds import crlb_sweep, sweep_to_csv
from .errors import ConfigError, RblError
from .geometry import Twist
from .harness import (
    ExperimentConfig,
    derive_seed,
    generate_trajectory,
    load_experiment,
    load_scenario,
    preset,
    rows_to_csv,
    rows_to_json,
    run_benchmark,
    run_scenario_once,
    _draw_trial,
)
from .measurement import Edm, assemble_edm
from .completion import complete_edm
from .tracking import MeasurementFrame, TrackConfig, track_sequence, track_to_csv
from .measurement import NoiseModel


def _add_common(sub):
    sub.add_argument("--scenario", metavar="FILE", help="scenario config (JSON)")
    sub.add_argument("--experiment", metavar="FILE", help="experiment config (JSON)")
    sub.add_argument("--preset", choices=["fig4", "fig5"], help="builtin scenario+experiment")
    sub.add_argument("--seed", type=int, default=None, metavar="U64", help="master seed override")
    sub.add_argument("--out", default="rblkit-out", metavar="DIR", help="output directory")
    sub.add_argument("--format", choices=["csv", "json"], default="csv", help="tabular output format")


def _resolve_configs(args, need_experiment=False):
    scenario = experiment = None
    if args.preset:
        scenario, experiment = preset(args.preset)
    if args.scenario:
        scenario = load_scenario(args.scenario)
    if args.experiment:
        experiment = load_experiment(args.experiment)
    if scenario is None:
        raise ConfigError("a --scenario file or --preset is required")
    if need_experiment and experiment is None:
        raise ConfigError("an --experiment file or --preset is required")
    if experiment is not None and args.seed is not None:
        experiment = ExperimentConfig(
            sigma_grid=experiment.sigma_grid,
            trials=experiment.trials,
            master_seed=args.seed,
            estimators=experiment.estimators,
            completion=experiment.completion,
        )
    return scenario, experiment


def _default_sigma(args, scenario, experiment):
    if args.sigma is not None:
        return args.sigma
    if experiment is not None:
        return experiment.sigma_grid[0]
    return scenario.noise.range_sigma if scenario.noise.range_sigma > 0 else 0.1


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str):
    path.write_text(text)
    print(path)


def _write_json(path: Path, doc):
    _write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _cmd_simulate(args) -> int:
    scenario, experiment = _resolve_configs(args)
    sigma = _default_sigma(args, scenario, experiment)
    seed = args.seed if args.seed is not None else 1234
    truth, meas = _draw_trial(scenario, sigma, derive_seed(seed, 11, 0, 0))
    doc = {
        "sigma": sigma,
        "seed": seed,
        "truth": {
            "rotation": [float(v) for v in truth.rotation.ravel()],
            "translation": [float(v) for v in truth.translation],
        },
        "measurements": meas.to_json_dict(),
        "edm": assemble_edm(scenario.anchors, scenario.conformation, meas).to_json_dict(),
    }
    _write_json(_outdir(args) / "measurements.json", doc)
    return 0


def _cmd_estimate(args) -> int:
    scenario, experiment = _resolve_configs(args)
    sigma = _default_sigma(args, scenario, experiment)
    seed = args.seed if args.seed is not None else 1234
    completion = experiment.completion if experiment is not None else not args.no_completion
    if args.no_completion:
        completion = False
    trace = run_scenario_once(
        scenario, sigma, derive_seed(seed, 11, 0, 0), args.estimator, completion
    )
    _write_json(_outdir(args) / "trace.json", trace)
    return 0


def _cmd_benchmark(args) -> int:
    scenario, experiment = _resolve_configs(args, need_experiment=True)
    rows = run_benchmark(scenario, experiment)
    out = _outdir(args)
    if args.format == "json":
        _write_json(out / "benchmark.json", rows_to_json(rows))
    else:
        _write(out / "benchmark.csv", rows_to_csv(rows))
    return 0


def _cmd_crlb(args) -> int:
    scenario, experiment = _resolve_configs(args)
    if experiment is not None:
        grid = experiment.sigma_grid
    elif args.sigma is not None:
        grid = (args.sigma,)
    else:
        raise ConfigError("need an --experiment/--preset sigma grid or --sigma")
    seed = args.seed if args.seed is not None else 1234
    pose = scenario.sample_pose(np.random.default_rng(derive_seed(seed, 1)))
    reports = crlb_sweep(scenario.anchors, scenario.conformation, pose, grid)
    out = _outdir(args)
    if args.format == "json":
        doc = [
            {
                "sigma": r.sigma,
                "crlb_translation_m2": r.translation_bound,
                "crlb_rotation_rad2": r.rotation_bound,
                "condition_number": r.condition_number,
            }
            for r in reports
        ]
        _write_json(out / "crlb.json", doc)
    else:
        _write(out / "crlb.csv", sweep_to_csv(reports))
    return 0


def _parse_twist(text: str) -> Twist:
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 6:
        raise ConfigError("twist must be 'wx,wy,wz,vx,vy,vz'", field="twist")
    return Twist(parts[:3], parts[3:])


def _cmd_track(args) -> int:
    scenario, experiment = _resolve_configs(args)
    seed = args.seed if args.seed is not None else 1234
    noise = NoiseModel(
        range_sigma=_default_sigma(args, scenario, experiment),
        angle_sigma=scenario.noise.angle_sigma,
        range_rate_sigma=scenario.noise.range_rate_sigma,
    )
    truth = None
    if args.trajectory:
        doc = json.loads(Path(args.trajectory).read_text())
        frames = [MeasurementFrame.from_json_dict(f) for f in doc]
    else:
        twist = _parse_twist(args.twist)
        frames, truth = generate_trajectory(
            scenario, twist, args.frames, args.dt, noise.range_sigma, seed
        )
    config = TrackConfig(estimator=args.estimator, noise=noise)
    track = track_sequence(scenario.anchors, scenario.conformation, frames, config)
    out = _outdir(args)
    if args.format == "json":
        doc = [
            {
                "timestamp": f.timestamp,
                "estimate": f.pose_estimate.to_json_dict() if f.pose_estimate else None,
                "twist": None
                if f.twist_estimate is None
                else {
                    "angular": [float(v) for v in f.twist_estimate.angular],
                    "linear": [float(v) for v in f.twist_estimate.linear],
                },
                "twist_residual_rms": f.twist_residual_rms,
                "error": f.error,
            }
            for f in track
        ]
        _write_json(out / "track.json", doc)
    else:
        _write(out / "track.csv", track_to_csv(track, truth))
    return 0


def _cmd_complete(args) -> int:
    doc = json.loads(Path(args.edm).read_text())
    if "edm" in doc and doc["edm"] is not None:
        doc = doc["edm"]
    edm = Edm.from_json_dict(doc)
    report = complete_edm(edm, rank=args.rank, max_iters=args.max_iters, tol=args.tol)
    _write_json(_outdir(args) / "completion.json", report.to_json_dict())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rblkit",
        description="Rigid body localization toolkit: simulate, estimate, benchmark.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw one trial's measurements")
    _add_common(p)
    p.add_argument("--sigma", type=float, default=None, help="range noise sigma (m)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("estimate", help="run one estimator on one seeded trial")
    _add_common(p)
    p.add_argument("--sigma", type=float, default=None, help="range noise sigma (m)")
    p.add_argument("--estimator", choices=["mds", "nls", "gabp"], default="nls")
    p.add_argument("--no-completion", action="store_true", help="zero-fill masked EDMs instead")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("benchmark", help="Monte Carlo RMSE sweep with CRLB columns")
    _add_common(p)
    p.set_defaults(func=_cmd_benchmark)

    p = sub.add_parser("crlb", help="CRLB-vs-sigma table for a scenario")
    _add_common(p)
    p.add_argument("--sigma", type=float, default=None, help="single sigma when no grid given")
    p.set_defaults(func=_cmd_crlb)

    p = sub.add_parser("track", help="frame-to-frame pose+twist tracking")
    _add_common(p)
    p.add_argument("--trajectory", metavar="FILE", help="JSON list of measurement frames")
    p.add_argument("--twist", default="0,0,0.1,1,0,0", help="synthesized twist wx,wy,wz,vx,vy,vz")
    p.add_argument("--frames", type=int, default=10, help="synthesized frame count")
    p.add_argument("--dt", type=float, default=0.1, help="synthesized frame spacing (s)")
    p.add_argument("--sigma", type=float, default=None, help="range noise sigma (m)")
    p.add_argument("--estimator", choices=["mds", "nls", "gabp"], default="nls")
    p.set_defaults(func=_cmd_track)

    p = sub.add_parser("complete", help="complete a masked EDM document")
    _add_common(p)
    p.add_argument("--edm", required=True, metavar="FILE", help="EDM JSON (or a simulate output)")
    p.add_argument("--rank", type=int, default=3)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=_cmd_complete)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"rblkit: config error: {exc}", file=sys.stderr)
        return 1
    except (RblError, OSError, json.JSONDecodeError) as exc:
        print(f"rblkit: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
