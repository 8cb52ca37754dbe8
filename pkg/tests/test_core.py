import pytest

from idfuse import (
    Detection,
    ExplicitRow,
    GroundTruth,
    IdentificationEvent,
    IdentityTrackSet,
    SceneConfig,
    StationObservation,
    TrackSet,
    validate_inputs,
)
from conftest import box, make_tracks


def test_scene_config_population_matches_catalog():
    config = SceneConfig(total_frames=10, rwid_catalog=("a", "b", "c"))
    assert config.population == 3


def test_detection_center():
    det = Detection(frame=1, local_index=0, bbox=(10.0, 20.0, 30.0, 40.0))
    assert det.center == (25.0, 40.0)


def test_track_set_lookup():
    tracks = make_tracks([[(10, 10, 1)], [], [(5, 5, 1), (9, 9, 2)]])
    assert tracks.total_frames == 3
    assert tracks.count_at(2) == 0
    assert tracks.count_at(3) == 2
    assert tracks.detections_at(3)[1].tracker_id == 2


def test_ground_truth_index_and_missing_frames():
    gt = GroundTruth.from_mapping(
        {5: [("a", box(1, 1))], 2: [("a", box(0, 0)), ("b", box(9, 9))]}
    )
    assert gt.annotated_frames == (2, 5)
    assert gt.is_annotated(5)
    assert not gt.is_annotated(3)
    assert gt.at(3) == ()
    assert {r for r, _ in gt.at(2)} == {"a", "b"}


def test_identity_track_set_lookup():
    tracks = make_tracks([[(0, 0, 1), (9, 9, 2)]])
    labeled = IdentityTrackSet(tracks, (((0, "a"), (1, None)),), "hmm")
    assert labeled.rwid_of(1, 0) == "a"
    assert labeled.rwid_of(1, 1) is None
    assert labeled.assignments_at(1) == ((0, "a"), (1, None))


def _config(tracks, rwids=("p1", "p2")):
    return SceneConfig(total_frames=tracks.total_frames, rwid_catalog=tuple(rwids))


def test_validate_clean_inputs():
    tracks = make_tracks([[(0, 0, 1)], [(1, 1, 1)]])
    events = [IdentificationEvent(2, "p1", StationObservation((1.0, 1.0)))]
    report = validate_inputs(tracks, events, _config(tracks))
    assert report.ok
    assert bool(report)


def test_validate_flags_event_frame_out_of_range():
    tracks = make_tracks([[(0, 0, 1)]])
    events = [IdentificationEvent(9, "p1", StationObservation((0.0, 0.0)))]
    report = validate_inputs(tracks, events, _config(tracks))
    assert not report.ok
    assert any("frame" in v for v in report.violations)


def test_validate_flags_unknown_rwid():
    tracks = make_tracks([[(0, 0, 1)]])
    events = [IdentificationEvent(1, "ghost", StationObservation((0.0, 0.0)))]
    report = validate_inputs(tracks, events, _config(tracks))
    assert any("ghost" in v for v in report.violations)


def test_validate_flags_bad_row_sum():
    tracks = make_tracks([[(0, 0, 1), (5, 5, 2)]])
    events = [IdentificationEvent(1, "p1", ExplicitRow((0.5, 0.3)))]
    report = validate_inputs(tracks, events, _config(tracks))
    assert len(report.violations) == 1
    assert "0.8" in report.violations[0] or "sum" in report.violations[0]


def test_validate_flags_row_length_mismatch():
    tracks = make_tracks([[(0, 0, 1), (5, 5, 2)]])
    events = [IdentificationEvent(1, "p1", ExplicitRow((1.0,)))]
    report = validate_inputs(tracks, events, _config(tracks))
    assert not report.ok


def test_validate_flags_duplicate_tracker_ids_in_frame():
    tracks = make_tracks([[(0, 0, 7), (5, 5, 7)]])
    report = validate_inputs(tracks, [], _config(tracks))
    assert not report.ok


def test_validate_flags_nonpositive_bbox():
    det = Detection(frame=1, local_index=0, bbox=(0.0, 0.0, 0.0, 4.0))
    tracks = TrackSet(((det,),))
    report = validate_inputs(tracks, [], _config(tracks))
    assert not report.ok


def test_validate_flags_negative_probability():
    tracks = make_tracks([[(0, 0, 1), (5, 5, 2)]])
    events = [IdentificationEvent(1, "p1", ExplicitRow((1.2, -0.2)))]
    report = validate_inputs(tracks, events, _config(tracks))
    assert not report.ok
