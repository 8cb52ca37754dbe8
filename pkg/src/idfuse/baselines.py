"""Comparison methods: first-frame assignment and event-driven swap repair.

Both ride the base tracker's internal ids instead of reasoning about
uncertainty, which is exactly what makes them brittle: one internal id
switch and the identity rides the wrong object forever (first-frame), or
until the next identification happens to pass by (swap repair).
"""
from __future__ import annotations

import logging

import numpy as np

from .core import (
    Detection,
    IdentificationEvent,
    IdentityTrackSet,
    ExplicitRow,
    StationObservation,
    TrackSet,
)
from .assignment import hungarian_max
from .emissions import StationModel

logger = logging.getLogger(__name__)


def _label_frames(track_set, id_to_rwid, first_frame_pairs=None):
    frames = []
    for t in range(1, track_set.total_frames + 1):
        direct = first_frame_pairs if t == 1 and first_frame_pairs else {}
        frames.append(
            tuple(
                (
                    det.local_index,
                    direct.get(det.local_index)
                    if det.local_index in direct
                    else (
                        id_to_rwid.get(det.tracker_id)
                        if det.tracker_id is not None
                        else None
                    ),
                )
                for det in track_set.detections_at(t)
            )
        )
    return tuple(frames)


def first_frame_assign(
    track_set: TrackSet,
    initial_rwid_positions: dict[str, tuple[float, float]],
) -> IdentityTrackSet:
    """Match identities to the first frame's detections, then never look back.

    Identities are paired with first-frame detections by minimum total
    euclidean distance; each matched detection's tracker id carries its
    identity for the whole video. Detections under tracker ids that never
    appeared at frame 1 stay unassigned, and surplus detections (more boxes
    than identities) stay unassigned too.
    """
    first = track_set.detections_at(1)
    if not first:
        raise ValueError("first frame has no detections to anchor identities on")
    rwids = sorted(initial_rwid_positions)
    points = np.array([initial_rwid_positions[r] for r in rwids], dtype=float)
    centers = np.array([det.center for det in first], dtype=float)
    distances = np.hypot(
        points[:, None, 0] - centers[None, :, 0],
        points[:, None, 1] - centers[None, :, 1],
    )
    pairs = hungarian_max(-distances)

    id_to_rwid: dict[int, str] = {}
    first_frame_pairs: dict[int, str] = {}
    for r, c in pairs:
        det = first[c]
        first_frame_pairs[det.local_index] = rwids[r]
        if det.tracker_id is not None:
            id_to_rwid[det.tracker_id] = rwids[r]
    return IdentityTrackSet(
        track_set,
        _label_frames(track_set, id_to_rwid, first_frame_pairs),
        "first_frame",
    )


def _event_target(
    event: IdentificationEvent,
    detections: tuple[Detection, ...],
    station: StationModel,
) -> Detection:
    source = event.source
    if isinstance(source, StationObservation):
        point = source.station_xy
    elif isinstance(source, ExplicitRow):
        if len(source.probabilities) != len(detections):
            raise ValueError(
                f"frame {event.frame}: row has {len(source.probabilities)} "
                f"entries for {len(detections)} detections"
            )
        return detections[int(np.argmax(source.probabilities))]
    else:
        point = station.station_xy
    centers = np.array([det.center for det in detections], dtype=float)
    nearest = int(
        np.argmin(np.hypot(centers[:, 0] - point[0], centers[:, 1] - point[1]))
    )
    return detections[nearest]


def reid_swap(
    base_assignment: IdentityTrackSet,
    events: list[IdentificationEvent] | tuple[IdentificationEvent, ...],
    station: StationModel,
    track_set: TrackSet,
) -> IdentityTrackSet:
    """Repair a first-frame assignment with hard identity swaps.

    Each identification names an identity at a frame; the detection at the
    station (nearest for station reads, largest probability for explicit
    rows) should hold it. If some other track holds the identity, the two
    tracks trade labels from that frame onward. Frames before the first
    event are copied from the base verbatim, so with no events the output
    is the base assignment itself.
    """
    if not events:
        return base_assignment

    # the mapping every tracker id carries in the base, for the replay part
    id_to_rwid: dict[int, str] = {}
    for t in range(1, track_set.total_frames + 1):
        labels = dict(base_assignment.frames[t - 1])
        for det in track_set.detections_at(t):
            rwid = labels.get(det.local_index)
            if rwid is not None and det.tracker_id is not None:
                id_to_rwid.setdefault(det.tracker_id, rwid)

    ordered = sorted(events, key=lambda e: e.frame)
    first_event_frame = ordered[0].frame
    rwid_holder = {rwid: tid for tid, rwid in id_to_rwid.items()}

    frames = list(base_assignment.frames[: first_event_frame - 1])
    event_index = 0
    for t in range(first_event_frame, track_set.total_frames + 1):
        detections = track_set.detections_at(t)
        while event_index < len(ordered) and ordered[event_index].frame == t:
            event = ordered[event_index]
            event_index += 1
            if not detections:
                logger.warning(
                    "skipping identification of %s at frame %d: no detections",
                    event.rwid, t,
                )
                continue
            target = _event_target(event, detections, station)
            if target.tracker_id is None:
                logger.warning(
                    "skipping identification of %s at frame %d: detection "
                    "has no tracker id to correct",
                    event.rwid, t,
                )
                continue
            current = id_to_rwid.get(target.tracker_id)
            if current == event.rwid:
                continue
            holder = rwid_holder.get(event.rwid)
            if holder is None:
                # nobody holds this identity: claim the track, dropping
                # whatever label it carried
                if current is not None:
                    rwid_holder.pop(current, None)
                id_to_rwid[target.tracker_id] = event.rwid
                rwid_holder[event.rwid] = target.tracker_id
            else:
                id_to_rwid[target.tracker_id] = event.rwid
                rwid_holder[event.rwid] = target.tracker_id
                if current is not None:
                    id_to_rwid[holder] = current
                    rwid_holder[current] = holder
                else:
                    id_to_rwid.pop(holder, None)
        frames.append(
            tuple(
                (
                    det.local_index,
                    id_to_rwid.get(det.tracker_id)
                    if det.tracker_id is not None
                    else None,
                )
                for det in detections
            )
        )
    return IdentityTrackSet(track_set, tuple(frames), "reid")
