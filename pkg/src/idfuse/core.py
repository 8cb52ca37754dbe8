"""Shared domain types for identity-aware track fusion.

Everything here is an immutable value object: per-frame detections from a
base tracker, sparse identity observations from an identifier (a feeding
station, a face recognizer, ...), ground-truth annotations, and the final
frame-by-frame identity assignments. Structural validation of a scene lives
in :func:`validate_inputs`; file formats live in :mod:`idfuse.io`.

Frames are 1-indexed throughout, matching the MOT CSV convention.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Union

#: Identity value meaning "this detection carries no real-world identity".
UNASSIGNED = None

#: Tolerance used everywhere a probability row must sum to one.
ROW_SUM_TOL = 1e-9

Bbox = tuple[float, float, float, float]  # (left, top, width, height) in pixels


@dataclass(frozen=True)
class SceneConfig:
    """Global scene facts: how many frames, and which real-world identities exist.

    ``population`` is always the catalog size; the catalog must list every
    identity that can occur, observed at the identifier or not.
    """

    total_frames: int
    rwid_catalog: tuple[str, ...]
    frame_rate: float = 25.0  # metadata only, never used in computation

    @property
    def population(self) -> int:
        return len(self.rwid_catalog)


@dataclass(frozen=True)
class Detection:
    """One detected object in one frame.

    ``local_index`` is the detection's position within its frame (0-based) and
    is the handle every downstream module uses. ``tracker_id`` is the base
    tracker's internal track id, if the tracker provides one.
    """

    frame: int
    local_index: int
    bbox: Bbox
    confidence: float = 1.0
    tracker_id: Optional[int] = None

    @property
    def center(self) -> tuple[float, float]:
        left, top, width, height = self.bbox
        return (left + width / 2.0, top + height / 2.0)


@dataclass(frozen=True)
class TrackSet:
    """Dense per-frame detection lists, frames 1..T. Empty frames are legal."""

    frames: tuple[tuple[Detection, ...], ...]

    @property
    def total_frames(self) -> int:
        return len(self.frames)

    def detections_at(self, frame: int) -> tuple[Detection, ...]:
        """Detections at a 1-indexed frame number."""
        return self.frames[frame - 1]

    def count_at(self, frame: int) -> int:
        return len(self.frames[frame - 1])

    @classmethod
    def from_frames(cls, frames) -> "TrackSet":
        return cls(tuple(tuple(dets) for dets in frames))


@dataclass(frozen=True)
class StationObservation:
    """The identity was read at a fixed station located at ``station_xy``."""

    station_xy: tuple[float, float]


@dataclass(frozen=True)
class ExplicitRow:
    """The identifier directly supplies one probability per detection."""

    probabilities: tuple[float, ...]


@dataclass(frozen=True)
class IdentificationEvent:
    """One sparse identity observation: at ``frame``, ``rwid`` was seen."""

    frame: int
    rwid: str
    source: Union[StationObservation, ExplicitRow]


@dataclass(frozen=True)
class GroundTruth:
    """Identity-labelled boxes on the annotated subset of frames.

    ``frames`` maps are stored as a sorted tuple of (frame, entries) where
    entries are (rwid, bbox) pairs; annotation is typically sparse (often
    about one labelled frame per second of video).
    """

    frames: tuple[tuple[int, tuple[tuple[str, Bbox], ...]], ...]

    @cached_property
    def _index(self) -> dict[int, tuple[tuple[str, Bbox], ...]]:
        return dict(self.frames)

    @property
    def annotated_frames(self) -> tuple[int, ...]:
        return tuple(frame for frame, _ in self.frames)

    def at(self, frame: int) -> tuple[tuple[str, Bbox], ...]:
        """Entries at a frame; empty tuple when the frame is not annotated."""
        return self._index.get(frame, ())

    def is_annotated(self, frame: int) -> bool:
        return frame in self._index

    @classmethod
    def from_mapping(cls, mapping) -> "GroundTruth":
        frames = tuple(
            (int(frame), tuple((str(r), tuple(b)) for r, b in entries))
            for frame, entries in sorted(mapping.items())
        )
        return cls(frames)


@dataclass(frozen=True)
class IdentityTrackSet:
    """Final output: every detection of every frame paired with an identity or None.

    ``frames[t-1]`` lists (local_index, rwid-or-None) for each detection at
    frame t, in local_index order. The underlying ``track_set`` travels along
    so evaluation and serialization can reach the boxes.
    """

    track_set: TrackSet
    frames: tuple[tuple[tuple[int, Optional[str]], ...], ...]
    provenance: str  # "hmm" | "first_frame" | "reid"

    def assignments_at(self, frame: int) -> tuple[tuple[int, Optional[str]], ...]:
        return self.frames[frame - 1]

    def rwid_of(self, frame: int, local_index: int) -> Optional[str]:
        for idx, rwid in self.frames[frame - 1]:
            if idx == local_index:
                return rwid
        return UNASSIGNED


@dataclass(frozen=True)
class ValidationReport:
    """All structural violations found in a scene; empty means admissible."""

    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:  # truthy iff clean, so `if report:` reads naturally
        return self.ok


def validate_inputs(
    track_set: TrackSet,
    events: list[IdentificationEvent] | tuple[IdentificationEvent, ...],
    config: SceneConfig,
) -> ValidationReport:
    """Check every structural invariant of a scene; report all violations.

    Purely diagnostic: nothing is raised, identical inputs always produce the
    identical report. Fusion entry points reject scenes whose report is
    non-empty.
    """
    problems: list[str] = []

    if config.total_frames < 1:
        problems.append(f"total_frames must be >= 1, got {config.total_frames}")
    if config.population < 1:
        problems.append("rwid_catalog must not be empty")
    if len(set(config.rwid_catalog)) != len(config.rwid_catalog):
        problems.append("rwid_catalog contains duplicate labels")

    if track_set.total_frames != config.total_frames:
        problems.append(
            f"track set covers {track_set.total_frames} frames, "
            f"config says {config.total_frames}"
        )

    for frame_number, detections in enumerate(track_set.frames, start=1):
        seen_local: set[int] = set()
        seen_ids: set[int] = set()
        for det in detections:
            if det.frame != frame_number:
                problems.append(
                    f"frame {frame_number}: detection carries frame={det.frame}"
                )
            if det.local_index in seen_local:
                problems.append(
                    f"frame {frame_number}: duplicate local_index {det.local_index}"
                )
            seen_local.add(det.local_index)
            if det.tracker_id is not None:
                if det.tracker_id in seen_ids:
                    problems.append(
                        f"frame {frame_number}: duplicate tracker_id {det.tracker_id}"
                    )
                seen_ids.add(det.tracker_id)
            _, _, width, height = det.bbox
            if not (width > 0 and height > 0):
                problems.append(
                    f"frame {frame_number}: detection {det.local_index} has "
                    f"non-positive bbox size ({width}, {height})"
                )
            if not (0.0 <= det.confidence <= 1.0):
                problems.append(
                    f"frame {frame_number}: detection {det.local_index} has "
                    f"confidence {det.confidence} outside [0, 1]"
                )

    catalog = set(config.rwid_catalog)
    for event in events:
        where = f"event at frame {event.frame} for rwid {event.rwid!r}"
        if not (1 <= event.frame <= config.total_frames):
            problems.append(f"{where}: frame outside 1..{config.total_frames}")
        if event.rwid not in catalog:
            problems.append(f"{where}: unknown RWID")
        if isinstance(event.source, ExplicitRow):
            row = event.source.probabilities
            if any(p < 0 for p in row):
                problems.append(f"{where}: row has negative entries")
            elif abs(math.fsum(row) - 1.0) > ROW_SUM_TOL:
                problems.append(
                    f"{where}: row not normalized (sums to {math.fsum(row):.6g})"
                )
            if 1 <= event.frame <= track_set.total_frames:
                expected = track_set.count_at(event.frame)
                if len(row) != expected:
                    problems.append(
                        f"{where}: row has {len(row)} entries, frame has "
                        f"{expected} detections"
                    )

    return ValidationReport(tuple(problems))
