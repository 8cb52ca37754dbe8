import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idfuse import (
    FrameAssignment,
    assign_frame,
    assign_frames,
    assign_video,
    assignments_to_track_set,
    brute_force_assignment,
    build_emission_sequence,
    hungarian_max,
    matching_total,
    posterior_tables,
    transitions_from_tracks,
    IdentificationEvent,
    StationObservation,
)
from conftest import make_tracks


def _random_matrix(rng, grid: bool) -> np.ndarray:
    n = int(rng.integers(1, 7))
    m = int(rng.integers(1, 7))
    if grid:
        # coarse grid forces heavy value ties
        values = rng.integers(0, 100, size=(n, m)) / 100.0
    else:
        values = rng.uniform(size=(n, m))
    # duplicated rows and columns are the tie cases the matcher must settle
    if n > 1 and rng.uniform() < 0.4:
        values[int(rng.integers(1, n))] = values[0]
    if m > 1 and rng.uniform() < 0.4:
        values[:, int(rng.integers(1, m))] = values[:, 0]
    return values


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=10**9), st.booleans())
def test_matcher_agrees_with_exhaustive_search(seed, grid):
    values = _random_matrix(np.random.default_rng(seed), grid)
    pairs = hungarian_max(values)
    expected_pairs, expected_total = brute_force_assignment(values)
    assert pairs == expected_pairs
    assert matching_total(values, pairs) == expected_total


def test_unique_optimum_fast_path():
    values = np.array([[0.9, 0.1, 0.0], [0.2, 0.7, 0.1]])
    assert hungarian_max(values) == ((0, 0), (1, 1))
    # transposed shape exercises the column-side certificate
    assert hungarian_max(values.T) == ((0, 0), (1, 1))


def test_identical_rows_settle_to_sorted_columns():
    row = np.array([0.3, 0.6, 0.1])
    values = np.stack([row, row, row])
    assert hungarian_max(values) == ((0, 0), (1, 1), (2, 2))


def test_identical_columns_settle_lexicographically():
    values = np.array([[0.5, 0.5], [0.2, 0.2]])
    assert hungarian_max(values) == ((0, 0), (1, 1))


def test_empty_matrix_gives_empty_matching():
    assert hungarian_max(np.empty((0, 3))) == ()
    assert hungarian_max(np.empty((3, 0))) == ()


def test_non_matrix_input_rejected():
    with pytest.raises(ValueError):
        hungarian_max(np.array([1.0, 2.0]))


def test_matching_total_is_order_independent():
    values = np.array([[1e16, 1.0], [1.0, 1e-16]])
    forward_order = matching_total(values, [(0, 0), (1, 1)])
    reverse_order = matching_total(values, [(1, 1), (0, 0)])
    assert forward_order == reverse_order


def test_assign_frame_threshold_is_inclusive():
    # population 4 -> cut below 0.25; the 0.25 pair must survive
    rows = np.array([[0.25, 0.05, 0.70], [0.2499, 0.05, 0.7001]])
    fa = assign_frame(rows, ("a", "b"), population=4, frame=3)
    assert fa.frame == 3
    assert fa.pairs == (("a", 0),)
    assert fa.pair_values == (0.25,)
    assert fa.unassigned_rwids == ("b",)
    assert fa.unassigned_detections == (1,)


def test_assign_frame_strips_lost_column():
    # LOST holds the largest value but can never be assigned
    rows = np.array([[0.1, 0.9]])
    fa = assign_frame(rows, ("a",), population=2)
    assert fa.pairs == ()
    assert fa.unassigned_rwids == ("a",)
    assert fa.unassigned_detections == (0,)


def test_assign_frame_empty_frame():
    rows = np.array([[1.0], [1.0]])
    fa = assign_frame(rows, ("a", "b"), population=2)
    assert fa.pairs == ()
    assert fa.unassigned_detections == ()
    assert fa.unassigned_rwids == ("a", "b")


def test_assign_frame_more_detections_than_identities():
    rows = np.array([[0.6, 0.3, 0.05, 0.05]])
    fa = assign_frame(rows, ("a",), population=2)
    assert fa.pairs == (("a", 0),)
    assert fa.unassigned_detections == (1, 2)
    assert fa.unassigned_rwids == ()


def test_assign_frame_validates_inputs():
    rows = np.array([[0.5, 0.5]])
    with pytest.raises(ValueError):
        assign_frame(rows, ("a", "b"), population=2)
    with pytest.raises(ValueError):
        assign_frame(rows, ("a",), population=0)


def test_assignments_to_track_set_maps_local_indices():
    tracks = make_tracks([[(0, 0, 1), (9, 9, 2)], [(0, 0, 1)]])
    assignments = [
        FrameAssignment(1, (("a", 1),), (0.9,), (0,), ()),
        FrameAssignment(2, (), (), (0,), ("a",)),
    ]
    labeled = assignments_to_track_set(assignments, tracks, provenance="hmm")
    assert labeled.provenance == "hmm"
    assert labeled.rwid_of(1, 0) is None
    assert labeled.rwid_of(1, 1) == "a"
    assert labeled.rwid_of(2, 0) is None


def test_assign_frames_numbers_frames_from_one():
    matrices = [np.array([[0.9, 0.1]]), np.array([[0.8, 0.2]])]
    out = assign_frames(matrices, ("a",), population=2)
    assert [fa.frame for fa in out] == [1, 2]
    assert all(fa.pairs == (("a", 0),) for fa in out)


def _evented_scene():
    tracks = make_tracks([[(0, 0, 1), (50, 0, 2)]] * 4)
    events = {
        "a": [IdentificationEvent(2, "a", StationObservation((0.0, 0.0)))],
        "b": [IdentificationEvent(3, "b", StationObservation((50.0, 0.0)))],
    }
    sequences = [build_emission_sequence(ev, tracks) for ev in events.values()]
    transitions = transitions_from_tracks(tracks)
    return tracks, posterior_tables(transitions, sequences)


def test_assign_video_labels_evented_detections():
    tracks, tables = _evented_scene()
    labeled = assign_video(tables, tracks, population=2)
    for frame in range(1, 5):
        assert labeled.rwid_of(frame, 0) == "a"
        assert labeled.rwid_of(frame, 1) == "b"


def test_assign_video_validates_tables():
    tracks, tables = _evented_scene()
    with pytest.raises(ValueError):
        assign_video([], tracks, population=2)
    short = make_tracks([[(0, 0, 1)]])
    with pytest.raises(ValueError):
        assign_video(tables, short, population=2)
