"""Per-frame observation likelihoods for one real-world identity.

An identity's evidence is sparse: most frames carry no identification at
all and contribute a flat row, while frames with a station read or an
explicit probability row pin the identity onto nearby detections. The LOST
state never emits evidence, so its entry is zero on identified frames and
uniform on silent ones.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import (
    Detection,
    ExplicitRow,
    GroundTruth,
    IdentificationEvent,
    StationObservation,
    TrackSet,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StationModel:
    """A fixed identification point (feeder, drinker, gate antenna)."""

    station_xy: tuple[float, float]
    distance_floor: float = 1.0

    def __post_init__(self) -> None:
        if self.distance_floor <= 0:
            raise ValueError("distance_floor must be positive")


@dataclass(frozen=True)
class EmissionSequence:
    """One emission row per frame for a single identity.

    ``rows[t-1]`` has m_t + 1 entries (LOST last), sums to one, and is
    read-only; silent frames share one cached uniform row per state count.
    """

    rwid: str
    rows: tuple[np.ndarray, ...]

    @property
    def total_frames(self) -> int:
        return len(self.rows)


def uniform_row(detection_count: int) -> np.ndarray:
    """Flat row over ``detection_count`` detections plus LOST."""
    row = np.full(detection_count + 1, 1.0 / (detection_count + 1))
    row.flags.writeable = False
    return row


def distance_emission_row(
    detections: tuple[Detection, ...] | list[Detection],
    station: StationModel,
) -> np.ndarray:
    """Inverse-distance row: closer detections take more probability.

    Each detection gets mass proportional to 1/d, with d its center's
    distance to the station clamped below by the distance floor so a
    detection sitting on the station cannot absorb everything. LOST gets 0.
    """
    if not detections:
        raise ValueError("no detections to score against the station")
    centers = np.array([det.center for det in detections])
    d = np.hypot(
        centers[:, 0] - station.station_xy[0],
        centers[:, 1] - station.station_xy[1],
    )
    inverse = 1.0 / np.maximum(d, station.distance_floor)
    row = np.append(inverse / inverse.sum(), 0.0)
    row.flags.writeable = False
    return row


def _event_row(
    event: IdentificationEvent,
    detections: tuple[Detection, ...],
    station: StationModel | None,
) -> np.ndarray:
    source = event.source
    if isinstance(source, StationObservation):
        model = StationModel(
            source.station_xy,
            station.distance_floor if station is not None else 1.0,
        )
        return distance_emission_row(detections, model)
    if isinstance(source, ExplicitRow):
        probs = np.asarray(source.probabilities, dtype=float)
        if len(probs) != len(detections):
            raise ValueError(
                f"frame {event.frame}: explicit row has {len(probs)} entries "
                f"for {len(detections)} detections"
            )
        return np.append(probs, 0.0)
    raise TypeError(f"unknown identification source: {type(source).__name__}")


def _nearest_populated_frame(
    track_set: TrackSet, frame: int, window: int
) -> int | None:
    # prefer the closest frame; ties go to the earlier one
    for offset in range(1, window + 1):
        for candidate in (frame - offset, frame + offset):
            if 1 <= candidate <= track_set.total_frames:
                if track_set.count_at(candidate) > 0:
                    return candidate
    return None


def build_emission_sequence(
    events: list[IdentificationEvent] | tuple[IdentificationEvent, ...],
    track_set: TrackSet,
    station: StationModel | None = None,
    rwid: str | None = None,
    defer_window: int = 25,
) -> EmissionSequence:
    """Assemble the full emission sequence for one identity.

    All events must name the same identity (pass ``rwid`` explicitly when
    the event list may be empty). An event landing on an empty frame is
    deferred to the nearest populated frame within ``defer_window`` frames,
    or dropped with a warning when none exists. Multiple events on one frame
    multiply elementwise and renormalize; contradictory rows (product
    identically zero) are rejected.
    """
    names = {event.rwid for event in events}
    if rwid is not None:
        names.add(rwid)
    if len(names) > 1:
        raise ValueError(f"events name more than one identity: {sorted(names)}")
    if not names:
        raise ValueError("cannot infer the identity from an empty event list; pass rwid")
    identity = names.pop()

    by_frame: dict[int, list[IdentificationEvent]] = {}
    for event in events:
        if not (1 <= event.frame <= track_set.total_frames):
            raise ValueError(
                f"event at frame {event.frame} outside 1..{track_set.total_frames}"
            )
        frame = event.frame
        if track_set.count_at(frame) == 0:
            target = _nearest_populated_frame(track_set, frame, defer_window)
            if target is None:
                logger.warning(
                    "dropping identification of %s at empty frame %d: no "
                    "populated frame within %d frames",
                    identity, frame, defer_window,
                )
                continue
            logger.warning(
                "deferring identification of %s from empty frame %d to %d",
                identity, frame, target,
            )
            frame = target
        by_frame.setdefault(frame, []).append(event)

    uniform_cache: dict[int, np.ndarray] = {}
    rows: list[np.ndarray] = []
    for t in range(1, track_set.total_frames + 1):
        m = track_set.count_at(t)
        todays = by_frame.get(t)
        if not todays:
            if m not in uniform_cache:
                uniform_cache[m] = uniform_row(m)
            rows.append(uniform_cache[m])
            continue
        detections = track_set.detections_at(t)
        row = _event_row(todays[0], detections, station)
        if len(todays) > 1:
            row = row.copy()
            for extra in todays[1:]:
                row *= _event_row(extra, detections, station)
        total = row.sum()
        if total <= 0:
            raise ValueError(
                f"frame {t}: identifications of {identity} contradict each "
                "other (joint row is all zero)"
            )
        if len(todays) > 1 or abs(total - 1.0) > 1e-12:
            row = row / total
        row.flags.writeable = False
        rows.append(row)
    return EmissionSequence(identity, tuple(rows))


def simulate_identifications(
    ground_truth: GroundTruth,
    track_set: TrackSet,
    count: int,
    noise_fraction: float,
    seed: int,
) -> list[IdentificationEvent]:
    """Draw ``count`` artificial identification events from ground truth.

    Events are spread evenly over the annotated frames that have at least
    one detection. A noise_fraction share of them (rounded to the nearest
    integer) carries a flat row over the frame's detections; the rest carry
    an inverse-distance row anchored at the sampled identity's true box
    center, so correct events are concentrated but not certain. Same seed,
    same events.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if not (0.0 <= noise_fraction <= 1.0):
        raise ValueError("noise_fraction must be in [0, 1]")
    eligible = [
        f
        for f in ground_truth.annotated_frames
        if 1 <= f <= track_set.total_frames
        and track_set.count_at(f) > 0
        and ground_truth.at(f)
    ]
    if not eligible:
        raise ValueError("no annotated frames with detections to identify on")
    population = len({rwid for _, entries in ground_truth.frames for rwid, _ in entries})
    if count > len(eligible) * population:
        raise ValueError(
            f"cannot place {count} events on {len(eligible)} annotated frames "
            f"of {population} identities"
        )

    rng = np.random.default_rng(seed)
    frames = [eligible[(i * len(eligible)) // count] for i in range(count)]
    noisy = set(rng.choice(count, size=int(round(noise_fraction * count)), replace=False))

    used: set[tuple[int, str]] = set()
    events: list[IdentificationEvent] = []
    for i, frame in enumerate(frames):
        entries = dict(ground_truth.at(frame))
        fresh = sorted(r for r in entries if (frame, r) not in used)
        candidates = fresh if fresh else sorted(entries)
        rwid = str(rng.choice(candidates))
        used.add((frame, rwid))
        detections = track_set.detections_at(frame)
        if i in noisy:
            probs = tuple([1.0 / len(detections)] * len(detections))
        else:
            left, top, w, h = entries[rwid]
            anchor = StationModel((left + w / 2.0, top + h / 2.0))
            probs = tuple(distance_emission_row(detections, anchor)[:-1])
        events.append(IdentificationEvent(frame, rwid, ExplicitRow(probs)))
    return events


def filter_identifications(
    events: list[IdentificationEvent] | tuple[IdentificationEvent, ...],
    ground_truth: GroundTruth,
    track_set: TrackSet,
    min_iou: float = 0.7,
    min_prob: float = 0.5,
) -> list[IdentificationEvent]:
    """Keep only well-grounded explicit-row events.

    An event survives when some detection on its frame overlaps the
    identity's true box with IOU above ``min_iou`` and the row's largest
    probability exceeds ``min_prob``. Events whose identity is not annotated
    on their frame are dropped with a warning.
    """
    from .metrics import iou

    kept: list[IdentificationEvent] = []
    for event in events:
        if not isinstance(event.source, ExplicitRow):
            raise ValueError(
                f"frame {event.frame}: filtering needs explicit rows, got "
                f"{type(event.source).__name__}"
            )
        entries = dict(ground_truth.at(event.frame)) if ground_truth.is_annotated(event.frame) else {}
        truth_box = entries.get(event.rwid)
        if truth_box is None:
            logger.warning(
                "dropping identification of %s at frame %d: identity not in "
                "the ground truth there",
                event.rwid, event.frame,
            )
            continue
        detections = track_set.detections_at(event.frame)
        if not detections:
            continue
        best_iou = max(iou(det.bbox, truth_box) for det in detections)
        if best_iou > min_iou and max(event.source.probabilities) > min_prob:
            kept.append(event)
    return kept
