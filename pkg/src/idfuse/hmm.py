"""Scaled forward-backward over per-frame detection states.

One chain per real-world identity: the hidden state at frame t is which of
the frame's m_t detections carries the identity, or LOST. Both recursions
renormalize every frame, so the tables hold conditionals rather than raw
joint probabilities and stay bounded over arbitrarily long videos with no
need for log space. The per-frame product of forward and backward entries,
renormalized, is the matching value fed to the assignment stage.

Smoothing (forward-backward) rather than Viterbi: the consumer is a
per-frame matcher that wants calibrated per-detection probabilities it can
threshold, not a single best path.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import TrackSet
from .emissions import EmissionSequence
from .transitions import SmoothingConfig, TransitionSequence, transitions_from_tracks


class InconsistentEvidenceError(ValueError):
    """All probability mass vanished at some frame.

    Raised when a frame's unscaled forward or backward vector sums to zero,
    meaning the identification evidence contradicts every continuation the
    transitions allow.
    """

    def __init__(self, frame: int, rwid: str | None = None, stage: str = "forward"):
        self.frame = frame
        self.rwid = rwid
        self.stage = stage
        who = f" for {rwid}" if rwid is not None else ""
        super().__init__(
            f"inconsistent evidence{who}: {stage} mass is zero at frame {frame}"
        )


@dataclass(frozen=True)
class ForwardResult:
    """Per-frame normalized forward vectors and their scale factors."""

    rwid: str
    values: tuple[np.ndarray, ...]
    scale: np.ndarray


@dataclass(frozen=True)
class BackwardResult:
    rwid: str
    values: tuple[np.ndarray, ...]
    scale: np.ndarray


@dataclass(frozen=True)
class PosteriorTable:
    """Everything the fusion stage needs to know about one identity.

    ``values[t-1]`` sums to one over frame t's m_t + 1 states (LOST last)
    and is the identity's matching-value row for that frame.
    """

    rwid: str
    forward: tuple[np.ndarray, ...]
    backward: tuple[np.ndarray, ...]
    values: tuple[np.ndarray, ...]
    forward_scale: np.ndarray
    backward_scale: np.ndarray

    @property
    def total_frames(self) -> int:
        return len(self.values)


def _check_shapes(transitions: TransitionSequence, emissions: EmissionSequence) -> None:
    if emissions.total_frames != transitions.total_frames:
        raise ValueError(
            f"emissions cover {emissions.total_frames} frames, transitions "
            f"cover {transitions.total_frames}"
        )
    for t, row in enumerate(emissions.rows, start=1):
        if len(row) != transitions.state_counts[t - 1]:
            raise ValueError(
                f"frame {t}: emission row has {len(row)} states, expected "
                f"{transitions.state_counts[t - 1]}"
            )


def forward(
    transitions: TransitionSequence, emissions: EmissionSequence
) -> ForwardResult:
    """Filtered distributions, renormalized every frame.

    The first frame starts from a flat prior, so its vector is just the
    emission row rescaled; each later frame propagates through that frame's
    transition matrix before weighting by its emission row.
    """
    _check_shapes(transitions, emissions)
    total = transitions.total_frames
    values: list[np.ndarray] = []
    scale = np.empty(total)
    current = np.asarray(emissions.rows[0], dtype=float)
    for t in range(1, total + 1):
        if t > 1:
            current = (current @ transitions.matrix_into(t)) * emissions.rows[t - 1]
        mass = current.sum()
        if mass <= 0.0:
            raise InconsistentEvidenceError(t, emissions.rwid, "forward")
        current = current / mass
        current.flags.writeable = False
        scale[t - 1] = mass
        values.append(current)
    return ForwardResult(emissions.rwid, tuple(values), scale)


def backward(
    transitions: TransitionSequence, emissions: EmissionSequence
) -> BackwardResult:
    """Future-evidence weights, renormalized every frame.

    The last frame is flat by construction. Earlier frames fold in the next
    frame's emission row and transition matrix; renormalizing per frame
    keeps entries O(1) regardless of video length.
    """
    _check_shapes(transitions, emissions)
    total = transitions.total_frames
    values: list[np.ndarray] = [None] * total  # type: ignore[list-item]
    scale = np.empty(total)
    states_last = transitions.state_counts[-1]
    current = np.full(states_last, 1.0 / states_last)
    current.flags.writeable = False
    values[-1] = current
    scale[-1] = float(states_last)
    for t in range(total - 1, 0, -1):
        weighted = values[t] * emissions.rows[t]
        current = transitions.matrix_into(t + 1) @ weighted
        mass = current.sum()
        if mass <= 0.0:
            raise InconsistentEvidenceError(t, emissions.rwid, "backward")
        current = current / mass
        current.flags.writeable = False
        scale[t - 1] = mass
        values[t - 1] = current
    return BackwardResult(emissions.rwid, tuple(values), scale)


def posteriors(fwd: ForwardResult, bwd: BackwardResult) -> PosteriorTable:
    """Combine both passes into per-frame matching values.

    Because each pass was renormalized per frame, their elementwise product
    only needs one more per-frame renormalization to become the smoothed
    posterior; the double scaling cancels in the division.
    """
    if fwd.rwid != bwd.rwid:
        raise ValueError(f"mixed identities: {fwd.rwid!r} vs {bwd.rwid!r}")
    if len(fwd.values) != len(bwd.values):
        raise ValueError("forward and backward cover different frame counts")
    values: list[np.ndarray] = []
    for t, (f, b) in enumerate(zip(fwd.values, bwd.values), start=1):
        v = f * b
        mass = v.sum()
        if mass <= 0.0:
            raise InconsistentEvidenceError(t, fwd.rwid, "posterior")
        v = v / mass
        v.flags.writeable = False
        values.append(v)
    return PosteriorTable(
        fwd.rwid, fwd.values, bwd.values, tuple(values), fwd.scale, bwd.scale
    )


# ---------------------------------------------------------------------------
# Batched path: all identities share the transitions, so the per-frame work
# collapses into one (N, S) x (S, S') product instead of N separate ones.


def _stack_rows(sequences: list[EmissionSequence], t: int) -> np.ndarray:
    return np.stack([seq.rows[t] for seq in sequences])


def stacked_matching_values(
    transitions: TransitionSequence,
    sequences: list[EmissionSequence],
) -> list[np.ndarray]:
    """Matching-value matrix per frame, identities as rows.

    Returns one (N, m_t + 1) array per frame, each row summing to one;
    row order follows ``sequences``. Backward vectors are folded into the
    running product frame by frame instead of being kept, which is what
    makes week-long videos fit in memory.
    """
    for seq in sequences:
        _check_shapes(transitions, seq)
    total = transitions.total_frames
    n = len(sequences)
    emission = [_stack_rows(sequences, t) for t in range(total)]

    def fail_rows(mass: np.ndarray, t: int, stage: str) -> None:
        bad = np.flatnonzero(mass <= 0.0)
        if bad.size:
            raise InconsistentEvidenceError(t, sequences[bad[0]].rwid, stage)

    forward_tables: list[np.ndarray] = []
    current = emission[0].copy()
    for t in range(1, total + 1):
        if t > 1:
            current = (current @ transitions.matrix_into(t)) * emission[t - 1]
        mass = current.sum(axis=1)
        fail_rows(mass, t, "forward")
        current = current / mass[:, None]
        forward_tables.append(current)

    values: list[np.ndarray] = [None] * total  # type: ignore[list-item]
    states_last = transitions.state_counts[-1]
    beta = np.full((n, states_last), 1.0 / states_last)
    for t in range(total, 0, -1):
        if t < total:
            weighted = beta * emission[t]
            beta = weighted @ transitions.matrix_into(t + 1).T
            mass = beta.sum(axis=1)
            fail_rows(mass, t, "backward")
            beta = beta / mass[:, None]
        v = forward_tables[t - 1] * beta
        mass = v.sum(axis=1)
        fail_rows(mass, t, "posterior")
        v /= mass[:, None]
        v.flags.writeable = False
        values[t - 1] = v
        forward_tables[t - 1] = None  # type: ignore[call-overload]
    return values


def posterior_tables(
    transitions: TransitionSequence,
    sequences: list[EmissionSequence],
) -> list[PosteriorTable]:
    """Full per-identity tables over shared transitions."""
    tables = []
    for seq in sequences:
        fwd = forward(transitions, seq)
        bwd = backward(transitions, seq)
        tables.append(posteriors(fwd, bwd))
    return tables


def run_all_rwids(
    track_set: TrackSet,
    sequences: list[EmissionSequence],
    smoothing: SmoothingConfig = SmoothingConfig(),
) -> list[PosteriorTable]:
    """One independent chain per identity over shared transitions."""
    transitions = transitions_from_tracks(track_set, smoothing)
    return posterior_tables(transitions, sequences)
