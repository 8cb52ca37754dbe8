"""Command-line surface: fuse, baseline, evaluate, simulate, sweep, verify.

Every command is deterministic given its inputs and seed flags, writes
output files atomically, and fails with a one-line `error: ...` message and
a nonzero exit code. Config files are flat key=value text; any key can be
overridden by the matching flag.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .baselines import first_frame_assign, reid_swap
from .core import SceneConfig, validate_inputs
from .emissions import StationModel, build_emission_sequence
from .hmm import stacked_matching_values
from .io import (
    RunConfig,
    read_events,
    read_ground_truth,
    read_tracks,
    read_assignment,
    write_assignment,
    write_csv,
    write_events,
    write_ground_truth,
    write_json,
    write_tracks,
)
from .metrics import evaluate as score_assignment
from .oracle import brute_force_posterior
from .pipeline import fuse_details
from .simulate import SimConfig, generate_scene, sweep as run_sweep
from .transitions import SmoothingConfig, transitions_from_tracks


def _config_from(args) -> RunConfig:
    path = getattr(args, "config", None)
    return RunConfig.from_file(path) if path else RunConfig.empty()


def _smoothing(args, config: RunConfig) -> SmoothingConfig:
    epsilon = args.epsilon if args.epsilon is not None else config.get_float("epsilon", 0.01)
    persistence = (
        args.lost_persistence
        if args.lost_persistence is not None
        else config.get_float("lost_self_persistence", 0.5)
    )
    return SmoothingConfig(epsilon=epsilon, lost_self_persistence=persistence)


def _station(args, config: RunConfig) -> StationModel:
    x = args.station_x if args.station_x is not None else config.get_float("station_x", 0.0)
    y = args.station_y if args.station_y is not None else config.get_float("station_y", 0.0)
    floor = (
        args.distance_floor
        if args.distance_floor is not None
        else config.get_float("distance_floor", 1.0)
    )
    return StationModel((x, y), distance_floor=floor)


def _catalog(args, config: RunConfig, events) -> tuple[str, ...]:
    raw = args.rwids if args.rwids is not None else config.get("rwids")
    if raw:
        return tuple(item.strip() for item in raw.split(",") if item.strip())
    catalog = tuple(sorted({event.rwid for event in events}))
    if not catalog:
        raise ValueError("no identities: pass --rwids or provide events")
    return catalog


def _out_dir(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _cmd_fuse(args) -> int:
    config = _config_from(args)
    tracks = read_tracks(args.tracks)
    events = read_events(args.events)
    catalog = _catalog(args, config, events)
    population = (
        args.population
        if args.population is not None
        else config.get_int("population", len(catalog))
    )
    report = validate_inputs(
        tracks, events, SceneConfig(tracks.total_frames, catalog)
    )
    if not report.ok:
        raise ValueError("; ".join(report.violations[:3]))
    labeled, assignments = fuse_details(
        tracks,
        events,
        catalog,
        population=population,
        smoothing=_smoothing(args, config),
        station=_station(args, config),
    )
    out = _out_dir(args)
    write_assignment(os.path.join(out, "assignment.csv"), labeled)

    per_rwid = {}
    for rwid in catalog:
        values = [
            value
            for fa in assignments
            for (r, _), value in zip(fa.pairs, fa.pair_values)
            if r == rwid
        ]
        per_rwid[rwid] = {
            "events": sum(1 for e in events if e.rwid == rwid),
            "frames_assigned": len(values),
            "min_value": min(values) if values else None,
            "mean_value": float(np.mean(values)) if values else None,
        }
    write_json(
        os.path.join(out, "posterior_summary.json"),
        {
            "frames": tracks.total_frames,
            "population": population,
            "identities": per_rwid,
        },
    )
    print(os.path.join(out, "assignment.csv"))
    return 0


def _first_frame_positions(ground_truth):
    frames = ground_truth.annotated_frames
    if not frames:
        raise ValueError("ground truth has no annotated frames")
    return {
        rwid: (box[0] + box[2] / 2.0, box[1] + box[3] / 2.0)
        for rwid, box in ground_truth.at(frames[0])
    }


def _cmd_baseline(args) -> int:
    config = _config_from(args)
    tracks = read_tracks(args.tracks)
    positions = _first_frame_positions(read_ground_truth(args.gt))
    anchored = first_frame_assign(tracks, positions)
    if args.method == "reid":
        events = read_events(args.events) if args.events else []
        labeled = reid_swap(anchored, events, _station(args, config), tracks)
    else:
        labeled = anchored
    out = _out_dir(args)
    write_assignment(os.path.join(out, "assignment.csv"), labeled)
    print(os.path.join(out, "assignment.csv"))
    return 0


def _cmd_evaluate(args) -> int:
    ground_truth = read_ground_truth(args.gt)
    predicted = read_assignment(args.pred)
    report = score_assignment(ground_truth, predicted, args.window, args.mode)
    out = _out_dir(args)
    write_json(os.path.join(out, "score.json"), report.as_json_dict())
    write_csv(
        os.path.join(out, "f1_over_time.csv"),
        "frame,precision,recall,f1",
        [(p.frame, p.precision, p.recall, p.f1) for p in report.series],
    )
    print(
        f"precision={report.micro_precision:.4f} "
        f"recall={report.micro_recall:.4f} f1={report.micro_f1:.4f}"
    )
    return 0


def _sim_config(config: RunConfig, seed: int | None) -> SimConfig:
    defaults = SimConfig()
    return SimConfig(
        pen_width=config.get_float("pen_width", defaults.pen_width),
        pen_height=config.get_float("pen_height", defaults.pen_height),
        population=config.get_int("population", defaults.population),
        total_frames=config.get_int("total_frames", defaults.total_frames),
        speed=config.get_float("speed", defaults.speed),
        feeder_zone=(
            config.get_float("feeder_left", defaults.feeder_zone[0]),
            config.get_float("feeder_top", defaults.feeder_zone[1]),
            config.get_float("feeder_width", defaults.feeder_zone[2]),
            config.get_float("feeder_height", defaults.feeder_zone[3]),
        ),
        visit_rate=config.get_float("visit_rate", defaults.visit_rate),
        switch_rate=config.get_float("switch_rate", defaults.switch_rate),
        detection_dropout=config.get_float(
            "detection_dropout", defaults.detection_dropout
        ),
        seed=seed if seed is not None else config.get_int("seed", defaults.seed),
        agent_size=config.get_float("agent_size", defaults.agent_size),
    )


def _cmd_simulate(args) -> int:
    sim = _sim_config(_config_from(args), args.seed)
    ground_truth, tracks, events = generate_scene(sim)
    out = _out_dir(args)
    write_tracks(os.path.join(out, "tracks.csv"), tracks)
    write_ground_truth(os.path.join(out, "gt.csv"), ground_truth)
    write_events(os.path.join(out, "events.jsonl"), events)
    print(f"{tracks.total_frames} frames, {len(events)} identification events")
    return 0


def _cmd_sweep(args) -> int:
    config = _config_from(args)
    sim = _sim_config(config, args.seed)
    counts = [int(c) for c in args.counts.split(",") if c.strip()]
    result = run_sweep(
        sim,
        counts,
        noise_fraction=args.noise,
        repeats=args.repeats,
        seed=args.seed if args.seed is not None else sim.seed,
        smoothing=_smoothing(args, config),
        max_workers=args.workers,
    )
    out = _out_dir(args)
    write_csv(
        os.path.join(out, "sweep.csv"),
        "method,count,repeat,i_tp,i_fp,i_fn,precision,recall,f1",
        [
            (
                r.method, r.count, r.repeat,
                r.confusion.i_tp, r.confusion.i_fp, r.confusion.i_fn,
                r.precision, r.recall, r.f1,
            )
            for r in result.rows
        ],
    )
    write_csv(
        os.path.join(out, "sweep_summary.csv"),
        "method,count,mean_f1,std_f1",
        [(s.method, s.count, s.mean_f1, s.std_f1) for s in result.summary],
    )
    print(os.path.join(out, "sweep.csv"))
    return 0


def _cmd_verify(args) -> int:
    tracks = read_tracks(args.tracks)
    events = read_events(args.events)
    catalog = _catalog(args, RunConfig.empty(), events)

    # longest prefix the oracle can enumerate
    budget = args.max_paths
    total = 1
    prefix = 0
    for count in (len(dets) + 1 for dets in tracks.frames):
        if total * count > budget:
            break
        total *= count
        prefix += 1
    if prefix == 0:
        raise ValueError("first frame alone exceeds the enumeration budget")
    truncated = type(tracks)(tracks.frames[:prefix])
    kept = [e for e in events if e.frame <= prefix]

    transitions = transitions_from_tracks(truncated)
    station = StationModel((0.0, 0.0))
    sequences = [
        build_emission_sequence(
            [e for e in kept if e.rwid == rwid], truncated, station, rwid=rwid
        )
        for rwid in catalog
    ]
    values = stacked_matching_values(transitions, sequences)
    deviation = 0.0
    for i, seq in enumerate(sequences):
        exact = brute_force_posterior(transitions, seq)
        for t in range(prefix):
            deviation = max(deviation, float(np.max(np.abs(values[t][i] - exact[t]))))
    print(
        f"max deviation {deviation:.3e} over {prefix} frames, "
        f"{len(catalog)} identities"
    )
    return 0 if deviation < 1e-6 else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="idfuse",
        description="Fuse sparse identity observations into multi-object tracks.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_station_flags(p):
        p.add_argument("--station-x", type=float, default=None)
        p.add_argument("--station-y", type=float, default=None)
        p.add_argument("--distance-floor", type=float, default=None)

    p = sub.add_parser("fuse", help="run the full fusion chain")
    p.add_argument("--tracks", required=True)
    p.add_argument("--events", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--lost-persistence", type=float, default=None)
    p.add_argument("--population", type=int, default=None)
    p.add_argument("--rwids", default=None, help="comma-separated identity labels")
    add_station_flags(p)
    p.set_defaults(run=_cmd_fuse)

    p = sub.add_parser("baseline", help="first_frame or reid comparison method")
    p.add_argument("--method", choices=("first_frame", "reid"), required=True)
    p.add_argument("--tracks", required=True)
    p.add_argument("--gt", required=True, help="ground truth for initial positions")
    p.add_argument("--events", default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    add_station_flags(p)
    p.set_defaults(run=_cmd_baseline)

    p = sub.add_parser("evaluate", help="identity-aware scores for a prediction")
    p.add_argument("--gt", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--window", type=int, default=1000)
    p.add_argument("--mode", choices=("cumulative", "windowed"), default="cumulative")
    p.set_defaults(run=_cmd_evaluate)

    p = sub.add_parser("simulate", help="generate a synthetic pen scene")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(run=_cmd_simulate)

    p = sub.add_parser("sweep", help="score methods across identification counts")
    p.add_argument("--config", default=None)
    p.add_argument("--counts", required=True, help="comma-separated, e.g. 5,10,20")
    p.add_argument("--repeats", type=int, default=20)
    p.add_argument("--noise", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--lost-persistence", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(run=_cmd_sweep)

    p = sub.add_parser("verify", help="check the engine against enumeration")
    p.add_argument("--tracks", required=True)
    p.add_argument("--events", required=True)
    p.add_argument("--rwids", default=None)
    p.add_argument("--max-paths", type=int, default=1_000_000)
    p.set_defaults(run=_cmd_verify)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.run(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # one line, machine-parsable, nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
