"""Brute-force reference implementations for small instances.

These recompute the chain posteriors and the frame matching by exhaustive
enumeration, sharing no code with the production paths. They exist so the
fast implementations can be checked against something that is obviously
correct, and they refuse instances large enough to make enumeration lie
about being feasible.
"""
from __future__ import annotations

import math
from itertools import combinations, permutations

import numpy as np

from .assignment import matching_total
from .emissions import EmissionSequence
from .transitions import TransitionSequence

_MAX_PATHS = 1_000_000
_MAX_SIDE = 8


def brute_force_posterior(
    transitions: TransitionSequence,
    emissions: EmissionSequence,
) -> list[np.ndarray]:
    """Per-frame state marginals by summing over every full path.

    A path picks one state per frame; its weight is the product of the
    transition probabilities along it and the emission probabilities at
    every frame, starting from a flat prior. Marginals are path-weight sums
    grouped by the state at each frame, normalized by the total weight.
    """
    counts = transitions.state_counts
    total_paths = math.prod(counts)
    if total_paths > _MAX_PATHS:
        raise ValueError(
            f"{total_paths} paths exceed the enumeration bound {_MAX_PATHS}"
        )
    if emissions.total_frames != len(counts):
        raise ValueError("emissions and transitions cover different frame counts")

    # path index -> state at frame t, via mixed-radix digits
    strides = np.ones(len(counts), dtype=np.int64)
    for t in range(len(counts) - 2, -1, -1):
        strides[t] = strides[t + 1] * counts[t + 1]
    paths = np.arange(total_paths, dtype=np.int64)
    states = [(paths // strides[t]) % counts[t] for t in range(len(counts))]

    weights = np.ones(total_paths)
    for t in range(len(counts)):
        weights *= np.asarray(emissions.rows[t])[states[t]]
        if t > 0:
            weights *= transitions.matrices[t - 1][states[t - 1], states[t]]
    total = weights.sum()
    if total <= 0.0:
        raise ValueError("inconsistent evidence: every path has zero weight")
    return [
        np.bincount(states[t], weights=weights, minlength=counts[t]) / total
        for t in range(len(counts))
    ]


def brute_force_assignment(values) -> tuple[tuple[tuple[int, int], ...], float]:
    """Best matching by trying every one of them.

    Returns (pairs, total) where pairs is sorted by row and, among matchings
    of maximal total, lexicographically smallest. Totals are compared as
    math.fsum sums, the same objective the production matcher uses.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ValueError(f"need a 2-d value matrix, got shape {values.shape}")
    n, m = values.shape
    if min(n, m) > _MAX_SIDE:
        raise ValueError(
            f"short side {min(n, m)} exceeds the enumeration bound {_MAX_SIDE}"
        )
    if n == 0 or m == 0:
        return (), 0.0

    best_pairs: tuple[tuple[int, int], ...] | None = None
    best_total = -math.inf
    if n <= m:
        for cols in permutations(range(m), n):
            pairs = tuple(zip(range(n), cols))
            total = matching_total(values, pairs)
            if total > best_total or (total == best_total and pairs < best_pairs):
                best_total, best_pairs = total, pairs
    else:
        for rows in combinations(range(n), m):
            for cols in permutations(range(m)):
                pairs = tuple(zip(rows, cols))
                total = matching_total(values, pairs)
                if total > best_total or (total == best_total and pairs < best_pairs):
                    best_total, best_pairs = total, pairs
    return best_pairs, best_total
