"""File formats: MOT-style CSV for boxes, JSON lines for identifications.

Track CSVs follow the MOT challenge convention
``frame,id,bb_left,bb_top,bb_width,bb_height,conf,x,y,z`` so existing
tracker output drops in unchanged. Assignment output keeps the shape but
puts the identity label in the id column and appends a status column.
Identification events are one JSON object per line, append-friendly the way
sporadic sensor logs are. All writes go through a temp file and rename, so
readers never see a half-written file.
"""
from __future__ import annotations

import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass
from typing import Mapping

from .core import (
    Detection,
    ExplicitRow,
    GroundTruth,
    IdentificationEvent,
    IdentityTrackSet,
    ROW_SUM_TOL,
    StationObservation,
    TrackSet,
)

logger = logging.getLogger(__name__)

_MOT_FIELDS = 10


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _num(value: float) -> str:
    value = float(value)
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _parse_mot_line(line: str, number: int) -> tuple[int, str, tuple, float]:
    parts = line.split(",")
    if len(parts) != _MOT_FIELDS:
        raise ValueError(
            f"line {number}: expected {_MOT_FIELDS} comma-separated fields, "
            f"got {len(parts)}"
        )
    try:
        frame = int(parts[0])
        bbox = tuple(float(p) for p in parts[2:6])
        conf = float(parts[6])
    except ValueError as exc:
        raise ValueError(f"line {number}: {exc}") from None
    if frame < 1:
        raise ValueError(f"line {number}: frame must be >= 1, got {frame}")
    return frame, parts[1].strip(), bbox, conf


def read_tracks(path: str) -> TrackSet:
    """Parse tracker output; ids below zero mean "no id".

    Frames absent from the file are padded empty (with a warning) so frame
    numbers stay aligned with the video.
    """
    per_frame: dict[int, list[tuple[str, tuple, float]]] = {}
    with open(path) as handle:
        for number, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            frame, raw_id, bbox, conf = _parse_mot_line(line, number)
            try:
                tracker_id = int(raw_id)
            except ValueError:
                raise ValueError(
                    f"line {number}: tracker id must be an integer, got {raw_id!r}"
                ) from None
            per_frame.setdefault(frame, []).append((tracker_id, bbox, conf))
    if not per_frame:
        raise ValueError(f"{path}: no detections")
    total = max(per_frame)
    missing = total - len(per_frame)
    if missing:
        logger.warning(
            "%s: %d of %d frames have no detections; padding them empty",
            path, missing, total,
        )
    frames = []
    for frame in range(1, total + 1):
        rows = per_frame.get(frame, [])
        frames.append(
            tuple(
                Detection(
                    frame=frame,
                    local_index=i,
                    bbox=bbox,
                    confidence=conf,
                    tracker_id=tid if tid >= 0 else None,
                )
                for i, (tid, bbox, conf) in enumerate(rows)
            )
        )
    return TrackSet(tuple(frames))


def write_tracks(path: str, track_set: TrackSet) -> None:
    lines = []
    for frame_dets in track_set.frames:
        for det in frame_dets:
            tid = det.tracker_id if det.tracker_id is not None else -1
            left, top, w, h = det.bbox
            lines.append(
                f"{det.frame},{tid},{_num(left)},{_num(top)},{_num(w)},{_num(h)},"
                f"{_num(det.confidence)},-1,-1,-1"
            )
    _atomic_write(path, "\n".join(lines) + "\n")


def read_ground_truth(path: str) -> GroundTruth:
    """Same CSV shape as tracks, id column holding the identity label."""
    per_frame: dict[int, list] = {}
    with open(path) as handle:
        for number, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            frame, rwid, bbox, _ = _parse_mot_line(line, number)
            per_frame.setdefault(frame, []).append((rwid, bbox))
    return GroundTruth.from_mapping(per_frame)


def write_ground_truth(path: str, ground_truth: GroundTruth) -> None:
    lines = []
    for frame, entries in ground_truth.frames:
        for rwid, (left, top, w, h) in entries:
            lines.append(
                f"{frame},{rwid},{_num(left)},{_num(top)},{_num(w)},{_num(h)},1,-1,-1,-1"
            )
    _atomic_write(path, "\n".join(lines) + "\n")


def write_assignment(path: str, assignment: IdentityTrackSet) -> None:
    """Identity-labeled boxes; unassigned detections keep -1 in the id slot."""
    lines = []
    track_set = assignment.track_set
    for t in range(1, track_set.total_frames + 1):
        labels = dict(assignment.frames[t - 1])
        for det in track_set.detections_at(t):
            rwid = labels.get(det.local_index)
            status = "unassigned" if rwid is None else "assigned"
            left, top, w, h = det.bbox
            lines.append(
                f"{t},{rwid if rwid is not None else -1},"
                f"{_num(left)},{_num(top)},{_num(w)},{_num(h)},"
                f"{_num(det.confidence)},-1,-1,-1,{status}"
            )
    _atomic_write(path, "\n".join(lines) + "\n")


def read_assignment(path: str, provenance: str = "hmm") -> IdentityTrackSet:
    """Inverse of write_assignment; tracker ids are not representable here."""
    per_frame: dict[int, list] = {}
    with open(path) as handle:
        for number, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.rsplit(",", 1)
            if len(parts) != 2 or parts[1] not in ("assigned", "unassigned"):
                raise ValueError(
                    f"line {number}: expected a trailing assigned|unassigned status"
                )
            frame, rwid, bbox, conf = _parse_mot_line(parts[0], number)
            label = rwid if parts[1] == "assigned" else None
            per_frame.setdefault(frame, []).append((label, bbox, conf))
    if not per_frame:
        raise ValueError(f"{path}: no rows")
    total = max(per_frame)
    frames = []
    labels = []
    for frame in range(1, total + 1):
        rows = per_frame.get(frame, [])
        frames.append(
            tuple(
                Detection(frame=frame, local_index=i, bbox=bbox, confidence=conf)
                for i, (_, bbox, conf) in enumerate(rows)
            )
        )
        labels.append(tuple((i, label) for i, (label, _, _) in enumerate(rows)))
    return IdentityTrackSet(TrackSet(tuple(frames)), tuple(labels), provenance)


def read_events(path: str) -> list[IdentificationEvent]:
    """One identification per line, station form or explicit-row form."""
    events = []
    with open(path) as handle:
        for number, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"line {number}: invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict) or "frame" not in obj or "rwid" not in obj:
                raise ValueError(f"line {number}: need frame and rwid fields")
            has_station = "station" in obj
            has_row = "row" in obj
            if has_station == has_row:
                raise ValueError(
                    f"line {number}: exactly one of station or row is required"
                )
            frame = int(obj["frame"])
            rwid = str(obj["rwid"])
            if has_station:
                station = obj["station"]
                source = StationObservation((float(station["x"]), float(station["y"])))
            else:
                row = [float(p) for p in obj["row"]]
                if any(p < 0 for p in row):
                    raise ValueError(f"line {number}: negative probability")
                if abs(math.fsum(row) - 1.0) > ROW_SUM_TOL:
                    raise ValueError(
                        f"line {number}: row sums to {math.fsum(row):.6g}, not 1"
                    )
                source = ExplicitRow(tuple(row))
            events.append(IdentificationEvent(frame, rwid, source))
    return events


def write_events(path: str, events) -> None:
    lines = []
    for event in events:
        obj: dict = {"frame": event.frame, "rwid": event.rwid}
        if isinstance(event.source, StationObservation):
            x, y = event.source.station_xy
            obj["station"] = {"x": float(x), "y": float(y)}
        else:
            obj["row"] = [float(p) for p in event.source.probabilities]
        lines.append(json.dumps(obj))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_json(path: str, payload: dict) -> None:
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_csv(path: str, header: str, rows) -> None:
    lines = [header]
    lines.extend(",".join(str(cell) for cell in row) for row in rows)
    _atomic_write(path, "\n".join(lines) + "\n")


@dataclass(frozen=True)
class RunConfig:
    """Flat key=value settings; '#' starts a comment, flags override."""

    values: Mapping[str, str]

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        values: dict[str, str] = {}
        with open(path) as handle:
            for number, line in enumerate(handle, start=1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"line {number}: expected key = value")
                key, _, value = line.partition("=")
                values[key.strip()] = value.strip()
        return cls(values)

    @classmethod
    def empty(cls) -> "RunConfig":
        return cls({})

    def get(self, key: str, default: str | None = None) -> str | None:
        return self.values.get(key, default)

    def get_float(self, key: str, default: float | None = None) -> float | None:
        raw = self.values.get(key)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise ValueError(f"config key {key}: {raw!r} is not a number") from None

    def get_int(self, key: str, default: int | None = None) -> int | None:
        raw = self.values.get(key)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise ValueError(f"config key {key}: {raw!r} is not an integer") from None

    def get_list(self, key: str, default=None):
        raw = self.values.get(key)
        if raw is None:
            return default
        return [item.strip() for item in raw.split(",") if item.strip()]
