"""Shared builders for compact test scenes."""
from __future__ import annotations

import numpy as np

from idfuse import Detection, TrackSet


def box(cx: float, cy: float, size: float = 4.0):
    return (cx - size / 2.0, cy - size / 2.0, size, size)


def make_tracks(frame_layout, size: float = 4.0) -> TrackSet:
    """Build a TrackSet from [[(cx, cy, tracker_id), ...] per frame]."""
    frames = []
    for t, dets in enumerate(frame_layout, start=1):
        frames.append(
            tuple(
                Detection(
                    frame=t,
                    local_index=i,
                    bbox=box(cx, cy, size),
                    confidence=1.0,
                    tracker_id=tid,
                )
                for i, (cx, cy, tid) in enumerate(dets)
            )
        )
    return TrackSet(tuple(frames))


def random_tracks(
    rng: np.random.Generator,
    total_frames: int,
    max_detections: int = 4,
    allow_empty: bool = True,
) -> TrackSet:
    """Random track set with births, deaths, and id switches."""
    frames = []
    next_id = 0
    alive: list[int] = []
    low = 0 if allow_empty else 1
    for t in range(1, total_frames + 1):
        m = int(rng.integers(low, max_detections + 1))
        while len(alive) < m:
            alive.append(next_id)
            next_id += 1
        while len(alive) > m:
            alive.pop(int(rng.integers(len(alive))))
        if len(alive) >= 2 and rng.random() < 0.3:
            a, b = rng.choice(len(alive), size=2, replace=False)
            alive[a], alive[b] = alive[b], alive[a]
        frames.append(
            tuple(
                Detection(
                    frame=t,
                    local_index=i,
                    bbox=box(
                        float(rng.uniform(2, 98)), float(rng.uniform(2, 98))
                    ),
                    confidence=1.0,
                    tracker_id=tid,
                )
                for i, tid in enumerate(alive)
            )
        )
    return TrackSet(tuple(frames))
