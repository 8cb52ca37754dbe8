"""Per-frame merge of identity posteriors into one consistent labeling.

Each frame poses a small assignment problem: rows are identities, columns
are the frame's detections, entries are matching values from the chains.
The maximum-total matching wins, then every matched pair whose value falls
below 1/population is cut loose; an identity spread thin over many
detections should stay unassigned rather than label its best guess.

Ties are broken deterministically: among matchings with the same total the
lexicographically smallest (row, column) pair list is returned. Totals are
compared as :func:`math.fsum` sums, which makes the objective independent
of summation order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import IdentityTrackSet, TrackSet
from .hmm import PosteriorTable

# full lexicographic tie refinement is exponential-ish in candidates tried,
# so it only runs for small sides; larger matrices settle ties by grouping
# identical rows, which is where ties actually come from in this domain
_LEX_REFINE_MAX = 8


@dataclass(frozen=True)
class FrameAssignment:
    """Outcome of one frame's matching, detections referenced by local index."""

    frame: int
    pairs: tuple[tuple[str, int], ...]
    pair_values: tuple[float, ...]
    unassigned_detections: tuple[int, ...]
    unassigned_rwids: tuple[str, ...]


def matching_total(values: np.ndarray, pairs) -> float:
    """Order-independent total value of a matching."""
    return math.fsum(float(values[r, c]) for r, c in pairs)


def _argmax_certificate(values: np.ndarray):
    """Unique-optimum fast path.

    When every row's maximum is strict and the argmax columns are all
    distinct (rows and columns swapped for wide-side-down matrices), that
    matching is the unique maximizer, so no tie handling is needed. Returns
    None when the certificate does not hold.
    """
    n, m = values.shape
    if n <= m:
        best = values.argmax(axis=1)
        if len(set(best.tolist())) != n:
            return None
        top = values[np.arange(n), best]
        if np.any((values == top[:, None]).sum(axis=1) != 1):
            return None
        return tuple(zip(range(n), best.tolist()))
    best = values.argmax(axis=0)
    if len(set(best.tolist())) != m:
        return None
    top = values[best, np.arange(m)]
    if np.any((values == top[None, :]).sum(axis=0) != 1):
        return None
    return tuple(sorted(zip(best.tolist(), range(m))))


def _canonicalize_identical_rows(values: np.ndarray, match: dict[int, int]) -> dict[int, int]:
    """Settle ties among bitwise-identical rows.

    Swapping columns between identical rows never changes the total, so the
    lexicographically smallest arrangement puts the matched columns, sorted
    ascending, on the group's lowest row indices.
    """
    _, inverse = np.unique(values, axis=0, return_inverse=True)
    groups: dict[int, list[int]] = {}
    for r in range(values.shape[0]):
        groups.setdefault(int(inverse[r]), []).append(r)
    for rows in groups.values():
        if len(rows) < 2:
            continue
        taken = sorted(match[r] for r in rows if r in match)
        if not taken:
            continue
        for r in rows:
            match.pop(r, None)
        for r, c in zip(rows, taken):
            match[r] = c
    return match


def _refine_lexicographic(values: np.ndarray, match: dict[int, int]) -> dict[int, int]:
    """Pin rows to the smallest columns that keep the total optimal.

    Walks the rows in order, trying free columns ascending; a column is
    accepted when some completion of the pins reaches the best known total
    (checked by re-solving the remainder). The current best matching acts
    as a witness: once the scan reaches the witness's column for a row, it
    accepts without solving, so each row costs at most a handful of solves.
    """
    n, m = values.shape
    target = min(n, m)
    witness = dict(match)
    best_total = matching_total(values, witness.items())
    fixed: dict[int, int] = {}
    free_cols: set[int] = set(range(m))
    for r in range(n):
        needed = target - len(fixed)
        if needed == 0:
            break
        rows_after = list(range(r + 1, n))
        # a loose but safe cap on what rows after r can still contribute
        if rows_after and needed > 1 and free_cols:
            caps = np.sort(values[np.ix_(rows_after, sorted(free_cols))].max(axis=1))
            head = math.fsum(caps[-(needed - 1):]) * (1.0 + 1e-9) + 1e-12
        else:
            head = 0.0
        fixed_values = [float(values[i, c]) for i, c in fixed.items()]
        wcol = witness.get(r)
        pinned = None
        for j in sorted(free_cols):
            if wcol is not None and j == wcol:
                pinned = j
                break
            if math.fsum(fixed_values + [float(values[r, j]), head]) < best_total:
                continue
            cols_sub = sorted(free_cols - {j})
            if min(len(rows_after), len(cols_sub)) < needed - 1:
                continue
            candidate = dict(fixed)
            candidate[r] = j
            if needed > 1:
                sub = values[np.ix_(rows_after, cols_sub)]
                ri, ci = linear_sum_assignment(sub, maximize=True)
                candidate.update(
                    (rows_after[a], cols_sub[b]) for a, b in zip(ri, ci)
                )
            total = matching_total(values, candidate.items())
            if total >= best_total:
                best_total = total
                witness = candidate
                pinned = j
                break
        if pinned is not None:
            fixed[r] = pinned
            free_cols.discard(pinned)
        # no column worked: the witness leaves r unmatched, so skipping is optimal
    return fixed


def hungarian_max(values) -> tuple[tuple[int, int], ...]:
    """Maximum-total matching of cardinality min(rows, cols).

    Returns (row, col) pairs sorted by row. Among equal-total matchings the
    lexicographically smallest pair list is chosen; for matrices whose short
    side exceeds a small bound, only ties between identical rows are
    canonicalized (cross-row value coincidences at that scale are not a
    phenomenon of this domain, and full refinement would dominate runtime).
    """
    values = np.ascontiguousarray(values, dtype=float)
    if values.ndim != 2:
        raise ValueError(f"need a 2-d value matrix, got shape {values.shape}")
    n, m = values.shape
    if n == 0 or m == 0:
        return ()
    certified = _argmax_certificate(values)
    if certified is not None:
        return certified
    rows, cols = linear_sum_assignment(values, maximize=True)
    match = {int(r): int(c) for r, c in zip(rows, cols)}
    match = _canonicalize_identical_rows(values, match)
    if min(n, m) <= _LEX_REFINE_MAX:
        match = _refine_lexicographic(values, match)
    return tuple(sorted(match.items()))


def assign_frame(
    value_rows,
    rwids: tuple[str, ...] | list[str],
    population: int,
    frame: int = 1,
) -> FrameAssignment:
    """Match identities to one frame's detections and prune weak pairs.

    ``value_rows`` holds one posterior row per identity over the frame's
    m detections plus LOST (last column); LOST is stripped before matching
    since it can never be assigned. A matched pair survives only when its
    value reaches 1/population, the weight an identity would have if the
    evidence said nothing at all.
    """
    rows = np.asarray(value_rows, dtype=float)
    if rows.ndim != 2 or rows.shape[0] != len(rwids):
        raise ValueError(
            f"value rows shape {rows.shape} does not fit {len(rwids)} identities"
        )
    if population < 1:
        raise ValueError("population must be at least 1")
    m = rows.shape[1] - 1
    if m == 0:
        return FrameAssignment(frame, (), (), (), tuple(rwids))
    matrix = rows[:, :m]
    threshold = 1.0 / population
    pairs: list[tuple[str, int]] = []
    values: list[float] = []
    assigned_rows: set[int] = set()
    assigned_cols: set[int] = set()
    for r, c in hungarian_max(matrix):
        value = float(matrix[r, c])
        if value < threshold:
            continue
        pairs.append((rwids[r], c))
        values.append(value)
        assigned_rows.add(r)
        assigned_cols.add(c)
    return FrameAssignment(
        frame,
        tuple(pairs),
        tuple(values),
        tuple(c for c in range(m) if c not in assigned_cols),
        tuple(rwids[r] for r in range(len(rwids)) if r not in assigned_rows),
    )


def assign_frames(
    value_matrices: list[np.ndarray],
    rwids: tuple[str, ...] | list[str],
    population: int,
) -> list[FrameAssignment]:
    """One matching per frame over stacked per-frame value matrices."""
    return [
        assign_frame(matrix, rwids, population, frame=t)
        for t, matrix in enumerate(value_matrices, start=1)
    ]


def assignments_to_track_set(
    assignments: list[FrameAssignment],
    track_set: TrackSet,
    provenance: str = "hmm",
) -> IdentityTrackSet:
    """Fold per-frame matchings into a labeled copy of the track set."""
    frames = []
    for t, fa in enumerate(assignments, start=1):
        label = dict((c, rwid) for rwid, c in fa.pairs)
        frames.append(
            tuple(
                (det.local_index, label.get(det.local_index))
                for det in track_set.detections_at(t)
            )
        )
    return IdentityTrackSet(track_set, tuple(frames), provenance)


def assign_video(
    posterior_tables: list[PosteriorTable],
    track_set: TrackSet,
    population: int,
) -> IdentityTrackSet:
    """Frame-by-frame merge of all identity posteriors into final labels."""
    if len(posterior_tables) == 0:
        raise ValueError("no posterior tables to assign from")
    for table in posterior_tables:
        if table.total_frames != track_set.total_frames:
            raise ValueError(
                f"table for {table.rwid} covers {table.total_frames} frames, "
                f"track set covers {track_set.total_frames}"
            )
    rwids = tuple(table.rwid for table in posterior_tables)
    matrices = [
        np.stack([table.values[t] for table in posterior_tables])
        for t in range(track_set.total_frames)
    ]
    return assignments_to_track_set(
        assign_frames(matrices, rwids, population), track_set, "hmm"
    )
