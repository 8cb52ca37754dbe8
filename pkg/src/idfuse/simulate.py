"""Synthetic pen scenes and the identification-count sweep.

Agents wander a rectangular pen and occasionally visit a feeder zone where
a station reads their identity once per visit. The simulated tracker
replays the true boxes but corrupts them the way real trackers do: ids can
swap when two boxes start overlapping, and detections drop out at random.
Difficulty therefore lives exactly where occlusions happen.

Everything is driven by one seeded generator per scene (and one per sweep
cell), so equal seeds give bitwise-equal outputs regardless of schedule.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .assignment import assign_frames, assignments_to_track_set
from .baselines import first_frame_assign, reid_swap
from .core import (
    Detection,
    GroundTruth,
    IdentificationEvent,
    IdentityTrackSet,
    StationObservation,
    TrackSet,
)
from .emissions import (
    StationModel,
    build_emission_sequence,
    simulate_identifications,
)
from .hmm import stacked_matching_values
from .metrics import IdentityConfusion, identity_confusion, micro_scores
from .transitions import SmoothingConfig, transitions_from_tracks


@dataclass(frozen=True)
class SimConfig:
    pen_width: float = 100.0
    pen_height: float = 100.0
    population: int = 15
    total_frames: int = 1000
    speed: float = 0.8
    feeder_zone: tuple[float, float, float, float] = (40.0, 0.0, 20.0, 12.0)
    visit_rate: float = 0.5  # expected feeder visits per agent per 1000 frames
    switch_rate: float = 0.1  # id swap probability per overlap onset
    detection_dropout: float = 0.0  # per agent per frame
    seed: int = 0
    agent_size: float = 4.0

    def __post_init__(self) -> None:
        for name in ("switch_rate", "detection_dropout"):
            rate = getattr(self, name)
            if not (0.0 <= rate <= 1.0):
                raise ValueError(f"{name} must be in [0, 1], got {rate}")
        # visit_rate / 1000 is a per-frame probability
        if not (0.0 <= self.visit_rate <= 1000.0):
            raise ValueError(f"visit_rate must be in [0, 1000], got {self.visit_rate}")
        if self.population < 1 or self.total_frames < 1:
            raise ValueError("population and total_frames must be at least 1")
        if self.speed <= 0 or self.agent_size <= 0:
            raise ValueError("speed and agent_size must be positive")
        fx, fy, fw, fh = self.feeder_zone
        if fw <= 0 or fh <= 0:
            raise ValueError("feeder_zone must have positive size")
        if fx < 0 or fy < 0 or fx + fw > self.pen_width or fy + fh > self.pen_height:
            raise ValueError("pen must contain feeder_zone")

    @property
    def rwid_catalog(self) -> tuple[str, ...]:
        return tuple(str(i + 1) for i in range(self.population))

    @property
    def feeder_center(self) -> tuple[float, float]:
        fx, fy, fw, fh = self.feeder_zone
        return (fx + fw / 2.0, fy + fh / 2.0)


def _inside(zone: tuple[float, float, float, float], pos: np.ndarray) -> np.ndarray:
    fx, fy, fw, fh = zone
    return (
        (pos[:, 0] >= fx)
        & (pos[:, 0] <= fx + fw)
        & (pos[:, 1] >= fy)
        & (pos[:, 1] <= fy + fh)
    )


def _push_out(zone: tuple[float, float, float, float], pos: np.ndarray, who: np.ndarray) -> None:
    # shove a center out of the zone through the nearest edge
    fx, fy, fw, fh = zone
    for i in np.flatnonzero(who):
        x, y = pos[i]
        exits = (
            (x - fx, (fx - 1e-6, y)),
            (fx + fw - x, (fx + fw + 1e-6, y)),
            (y - fy, (x, fy - 1e-6)),
            (fy + fh - y, (x, fy + fh + 1e-6)),
        )
        pos[i] = min(exits)[1]


def _sample_waypoints(
    rng: np.random.Generator,
    count: int,
    lo: np.ndarray,
    hi: np.ndarray,
    zone: tuple[float, float, float, float],
) -> np.ndarray:
    # wander targets stay out of the feeder zone, else agents pushed out of
    # the zone would lean on its edge forever waiting to arrive
    points = rng.uniform(lo, hi, size=(count, 2))
    while True:
        stuck = _inside(zone, points)
        if not stuck.any():
            return points
        points[stuck] = rng.uniform(lo, hi, size=(int(stuck.sum()), 2))


_WANDER, _SEEK, _DWELL = 0, 1, 2


def generate_scene(
    config: SimConfig,
) -> tuple[GroundTruth, TrackSet, list[IdentificationEvent]]:
    """Simulate one pen scene: truth, corrupted tracker output, feeder reads.

    Ground truth covers every agent on every frame. Agents outside a feeder
    visit are kept out of the feeder zone, so the station fires exactly at
    deliberate visit entries, one read per visit; visit_rate 0 means no
    events at all.
    """
    rng = np.random.default_rng(config.seed)
    n = config.population
    size = config.agent_size
    half = size / 2.0
    lo = np.array([half, half])
    hi = np.array([config.pen_width - half, config.pen_height - half])
    catalog = config.rwid_catalog

    pos = rng.uniform(lo, hi, size=(n, 2))
    _push_out(config.feeder_zone, pos, _inside(config.feeder_zone, pos))
    waypoint = _sample_waypoints(rng, n, lo, hi, config.feeder_zone)
    mode = np.full(n, _WANDER)
    dwell_left = np.zeros(n, dtype=int)
    tracker_of = np.arange(n)  # agent -> tracker id the detector reports
    seek_prob = config.visit_rate / 1000.0
    feeder = np.array(config.feeder_center)

    gt_frames = {}
    track_frames: list[tuple[Detection, ...]] = []
    events: list[IdentificationEvent] = []
    overlapped = np.zeros((n, n), dtype=bool)

    for frame in range(1, config.total_frames + 1):
        # who starts heading for the feeder this frame
        wandering = mode == _WANDER
        starts = wandering & (rng.random(n) < seek_prob)
        mode[starts] = _SEEK

        target = np.where((mode == _SEEK)[:, None], feeder[None, :], waypoint)
        delta = target - pos
        dist = np.hypot(delta[:, 0], delta[:, 1])
        np.maximum(dist, 1e-9, out=dist)
        step = delta / dist[:, None] * config.speed
        step += rng.normal(0.0, config.speed / 3.0, size=(n, 2))
        pos = np.clip(pos + step, lo, hi)

        # wanderers and dwellers stay out of the feeder zone; seekers enter
        inside = _inside(config.feeder_zone, pos)
        entering = inside & (mode == _SEEK)
        _push_out(config.feeder_zone, pos, inside & (mode != _SEEK))
        for i in np.flatnonzero(entering):
            events.append(
                IdentificationEvent(
                    frame, catalog[i], StationObservation(config.feeder_center)
                )
            )
        mode[entering] = _DWELL
        dwell_left[entering] = rng.integers(10, 40, size=int(entering.sum()))

        done_dwelling = (mode == _DWELL) & (dwell_left <= 0)
        mode[done_dwelling] = _WANDER
        if done_dwelling.any():
            waypoint[done_dwelling] = _sample_waypoints(
                rng, int(done_dwelling.sum()), lo, hi, config.feeder_zone
            )
        dwell_left[mode == _DWELL] -= 1

        arrived = (mode == _WANDER) & (
            np.hypot(*(waypoint - pos).T) < config.speed * 2.0
        )
        if arrived.any():
            waypoint[arrived] = _sample_waypoints(
                rng, int(arrived.sum()), lo, hi, config.feeder_zone
            )

        # tracker id swaps fire at overlap onset, once per contact episode
        boxes = np.column_stack([pos - half, np.full((n, 2), size)])
        sep_x = np.abs(pos[:, 0][:, None] - pos[:, 0][None, :]) < size
        sep_y = np.abs(pos[:, 1][:, None] - pos[:, 1][None, :]) < size
        touching = sep_x & sep_y
        np.fill_diagonal(touching, False)
        onsets = np.argwhere(np.triu(touching & ~overlapped))
        for a, b in onsets:
            if rng.random() < config.switch_rate:
                tracker_of[[a, b]] = tracker_of[[b, a]]
        overlapped = touching

        gt_frames[frame] = [
            (catalog[i], tuple(boxes[i])) for i in range(n)
        ]
        dropped = rng.random(n) < config.detection_dropout
        detections = []
        for i in range(n):
            if dropped[i]:
                continue
            detections.append(
                Detection(
                    frame=frame,
                    local_index=len(detections),
                    bbox=tuple(boxes[i]),
                    confidence=1.0,
                    tracker_id=int(tracker_of[i]),
                )
            )
        track_frames.append(tuple(detections))

    return (
        GroundTruth.from_mapping(gt_frames),
        TrackSet(tuple(track_frames)),
        events,
    )


# ---------------------------------------------------------------------------
# Sweep: how performance moves with the number of identifications.


@dataclass(frozen=True)
class SweepRow:
    method: str
    count: int
    repeat: int
    confusion: IdentityConfusion
    precision: float
    recall: float
    f1: float
    min_pair_value: float  # smallest matching value any emitted pair had


@dataclass(frozen=True)
class SweepSummary:
    method: str
    count: int
    mean_f1: float
    std_f1: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    summary: tuple[SweepSummary, ...]


def worker_cap() -> int:
    """Parallelism limit from IDFUSE_THREADS; 0 or unset means auto."""
    raw = os.environ.get("IDFUSE_THREADS", "0")
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValueError(f"IDFUSE_THREADS must be an integer, got {raw!r}") from exc
    if cap < 0:
        raise ValueError(f"IDFUSE_THREADS must be >= 0, got {cap}")
    return cap if cap > 0 else (os.cpu_count() or 1)


def _score(
    ground_truth: GroundTruth, assignment: IdentityTrackSet, method: str,
    count: int, repeat: int, min_pair_value: float,
) -> SweepRow:
    confusion = identity_confusion(ground_truth, assignment)
    report = micro_scores(confusion)
    return SweepRow(
        method, count, repeat, confusion,
        report.micro_precision, report.micro_recall, report.micro_f1,
        min_pair_value,
    )


_CELL_CONTEXT: dict = {}


def _run_cell(task: tuple[int, int, int]) -> list[SweepRow]:
    count, repeat, event_seed = task
    ctx = _CELL_CONTEXT
    gt, tracks, transitions = ctx["gt"], ctx["tracks"], ctx["transitions"]
    catalog, station, population = ctx["catalog"], ctx["station"], ctx["population"]

    if count > 0:
        events = simulate_identifications(
            gt, tracks, count, ctx["noise_fraction"], event_seed
        )
    else:
        events = []
    by_rwid: dict[str, list[IdentificationEvent]] = {r: [] for r in catalog}
    for event in events:
        by_rwid.setdefault(event.rwid, []).append(event)
    sequences = [
        build_emission_sequence(by_rwid[r], tracks, station, rwid=r)
        for r in catalog
    ]
    values = stacked_matching_values(transitions, sequences)
    assignments = assign_frames(values, catalog, population)
    min_value = min(
        (min(fa.pair_values) for fa in assignments if fa.pair_values),
        default=float("inf"),
    )
    fused = assignments_to_track_set(assignments, tracks, "hmm")
    corrected = reid_swap(ctx["first_frame"], events, station, tracks)
    return [
        _score(gt, fused, "hmm", count, repeat, min_value),
        _score(gt, corrected, "reid", count, repeat, float("inf")),
    ]


def sweep(
    config: SimConfig,
    identification_counts: list[int],
    noise_fraction: float,
    repeats: int,
    seed: int,
    smoothing: SmoothingConfig = SmoothingConfig(),
    max_workers: int | None = None,
) -> SweepResult:
    """Score hmm fusion and both baselines across identification budgets.

    One scene is generated from ``config``; every (count, repeat) cell then
    draws its own artificial identifications with a generator seeded from
    (seed, count, repeat), so cells are independent of execution order. The
    first-frame baseline sees no events and is computed once.
    """
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    gt, tracks, _ = generate_scene(config)
    station = StationModel(config.feeder_center)
    transitions = transitions_from_tracks(tracks, smoothing)
    first_positions = {
        rwid: (box[0] + box[2] / 2.0, box[1] + box[3] / 2.0)
        for rwid, box in gt.at(1)
    }
    anchored = first_frame_assign(tracks, first_positions)

    _CELL_CONTEXT.update(
        gt=gt, tracks=tracks, transitions=transitions,
        catalog=config.rwid_catalog, station=station,
        population=config.population, noise_fraction=noise_fraction,
        first_frame=anchored,
    )
    base_row = _score(gt, anchored, "first_frame", 0, 0, float("inf"))

    tasks = []
    for count in identification_counts:
        for repeat in range(repeats):
            entropy = np.random.SeedSequence([seed, count, repeat])
            tasks.append((count, repeat, int(entropy.generate_state(1)[0])))

    workers = worker_cap() if max_workers is None else max_workers
    rows: list[SweepRow] = []
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for cell_rows in pool.map(_run_cell, tasks):
                rows.extend(cell_rows)
    else:
        for task in tasks:
            rows.extend(_run_cell(task))
    for count in identification_counts:
        for repeat in range(repeats):
            rows.append(
                SweepRow(
                    "first_frame", count, repeat, base_row.confusion,
                    base_row.precision, base_row.recall, base_row.f1,
                    float("inf"),
                )
            )
    rows.sort(key=lambda r: (r.method, r.count, r.repeat))

    summary = []
    for method in sorted({r.method for r in rows}):
        for count in identification_counts:
            scores = [r.f1 for r in rows if r.method == method and r.count == count]
            summary.append(
                SweepSummary(
                    method, count,
                    float(np.mean(scores)), float(np.std(scores)),
                )
            )
    return SweepResult(tuple(rows), tuple(summary))
