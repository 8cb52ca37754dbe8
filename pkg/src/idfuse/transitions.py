"""Turn base-tracker output into per-frame-pair transition matrices.

Each matrix maps the states of frame t-1 onto the states of frame t, where
the states are that frame's detections plus one virtual LOST state (always
the last row/column). LOST absorbs track deaths and seeds track births, which
keeps every row stochastic even when detection counts change between frames
or a frame is empty.

Hard tracker ids are softened with a small leak probability so the posterior
can recover from tracker identity switches; the leak and the LOST dwell
probability live in :class:`SmoothingConfig`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import TrackSet


@dataclass(frozen=True)
class SmoothingConfig:
    """How hard tracker ids become probabilities.

    ``epsilon`` is the probability mass leaked away from a continuing track,
    spread uniformly over the other detections and LOST.
    ``lost_self_persistence`` is the probability that LOST stays LOST; the
    remainder is spread uniformly over the frame's detections, which is how
    new tracks are born into an identity's chain.
    """

    epsilon: float = 0.01
    lost_self_persistence: float = 0.5

    def __post_init__(self) -> None:
        if not (0.0 <= self.epsilon < 0.5):
            raise ValueError(f"epsilon must be in [0, 0.5), got {self.epsilon}")
        if not (0.0 <= self.lost_self_persistence <= 1.0):
            raise ValueError(
                "lost_self_persistence must be in [0, 1], got "
                f"{self.lost_self_persistence}"
            )


@dataclass(frozen=True)
class TransitionSequence:
    """Row-stochastic matrices between consecutive frames.

    ``matrices[i]`` has shape (m_{i+1}+1, m_{i+2}+1) and carries the
    probability that each state of frame i+1 continues as each state of
    frame i+2 (1-indexed frames). ``state_counts[t-1]`` is m_t + 1.
    """

    matrices: tuple[np.ndarray, ...]
    state_counts: tuple[int, ...]

    @property
    def total_frames(self) -> int:
        return len(self.state_counts)

    def matrix_into(self, frame: int) -> np.ndarray:
        """Matrix mapping frame-1 states onto ``frame`` states (frame >= 2)."""
        return self.matrices[frame - 2]


def _freeze(matrix: np.ndarray) -> np.ndarray:
    matrix.flags.writeable = False
    return matrix


def _lost_row(m_next: int, persistence: float) -> np.ndarray:
    row = np.empty(m_next + 1)
    if m_next == 0:
        row[0] = 1.0
    else:
        row[:m_next] = (1.0 - persistence) / m_next
        row[m_next] = persistence
    return row


def transitions_from_tracks(
    track_set: TrackSet,
    smoothing: SmoothingConfig = SmoothingConfig(),
) -> TransitionSequence:
    """Build transitions from hard per-detection tracker ids.

    A track continuing from frame t-1 to t keeps 1 - epsilon of its mass on
    its continuation and leaks epsilon uniformly over the other detections
    and LOST. A track with no continuation gets a uniform row (a vanished
    track usually means a missed detection, not a true disappearance). The
    LOST row follows :func:`SmoothingConfig.lost_self_persistence`. An empty
    next frame collapses every row onto LOST.
    """
    eps = smoothing.epsilon
    if track_set.total_frames >= 2:
        for t in range(1, track_set.total_frames + 1):
            for det in track_set.detections_at(t):
                if det.tracker_id is None:
                    raise ValueError(
                        f"frame {t}: detection {det.local_index} has no "
                        "tracker_id; transitions from tracks need one on "
                        "every detection"
                    )
    matrices: list[np.ndarray] = []
    for t in range(2, track_set.total_frames + 1):
        prev = track_set.detections_at(t - 1)
        cur = track_set.detections_at(t)
        m_next = len(cur)
        matrix = np.empty((len(prev) + 1, m_next + 1))
        if m_next == 0:
            matrix[:, 0] = 1.0
        else:
            id_to_column = {det.tracker_id: j for j, det in enumerate(cur)}
            for l, det in enumerate(prev):
                j = id_to_column.get(det.tracker_id)
                if j is None:
                    matrix[l, :] = 1.0 / (m_next + 1)
                else:
                    matrix[l, :] = eps / m_next
                    matrix[l, j] = 1.0 - eps
            matrix[-1, :] = _lost_row(m_next, smoothing.lost_self_persistence)
        matrices.append(_freeze(matrix))
    state_counts = tuple(len(dets) + 1 for dets in track_set.frames)
    return TransitionSequence(tuple(matrices), state_counts)


def transitions_from_soft_associations(
    raw_matrices: list[np.ndarray] | tuple[np.ndarray, ...],
    track_set: TrackSet,
    smoothing: SmoothingConfig = SmoothingConfig(),
) -> TransitionSequence:
    """Build transitions from a tracker that emits soft match scores.

    Accepts one raw nonnegative matrix per consecutive frame pair, either
    already including the LOST row/column (shape (m_{t-1}+1, m_t+1)) or bare
    (m_{t-1}, m_t). Bare matrices get a LOST column holding epsilon of each
    detection row's mass and a synthesized LOST row. Every row is rescaled to
    sum to one; all-zero rows become uniform rows.
    """
    expected = track_set.total_frames - 1
    if len(raw_matrices) != expected:
        raise ValueError(
            f"need {expected} matrices for {track_set.total_frames} frames, "
            f"got {len(raw_matrices)}"
        )
    matrices: list[np.ndarray] = []
    for i, raw in enumerate(raw_matrices):
        raw = np.asarray(raw, dtype=float)
        t = i + 2
        m_prev = track_set.count_at(t - 1)
        m_next = track_set.count_at(t)
        if np.any(raw < 0):
            raise ValueError(f"matrix into frame {t}: negative entries")
        if raw.shape == (m_prev + 1, m_next + 1):
            matrix = raw.copy()
        elif raw.shape == (m_prev, m_next):
            matrix = np.zeros((m_prev + 1, m_next + 1))
            if m_next > 0:
                sums = raw.sum(axis=1)
                scaled = np.divide(
                    raw * (1.0 - smoothing.epsilon),
                    sums[:, None],
                    out=np.zeros_like(raw),
                    where=sums[:, None] > 0,
                )
                matrix[:m_prev, :m_next] = scaled
                matrix[:m_prev, m_next] = np.where(sums > 0, smoothing.epsilon, 0.0)
            matrix[-1, :] = _lost_row(m_next, smoothing.lost_self_persistence)
        else:
            raise ValueError(
                f"matrix into frame {t}: shape {raw.shape} matches neither "
                f"({m_prev + 1}, {m_next + 1}) nor ({m_prev}, {m_next})"
            )
        row_sums = matrix.sum(axis=1)
        zero_rows = row_sums == 0
        if np.any(zero_rows):
            matrix[zero_rows, :] = 1.0 / matrix.shape[1]
            row_sums[zero_rows] = 1.0
        matrix /= row_sums[:, None]
        matrices.append(_freeze(matrix))
    state_counts = tuple(len(dets) + 1 for dets in track_set.frames)
    return TransitionSequence(tuple(matrices), state_counts)
