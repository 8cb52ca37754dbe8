import logging

import numpy as np
import pytest

from idfuse import (
    ExplicitRow,
    IdentificationEvent,
    StationModel,
    StationObservation,
    first_frame_assign,
    reid_swap,
)
from conftest import make_tracks

STATION = StationModel((0.0, 0.0))


def _two_agent_tracks(total_frames=5):
    return make_tracks([[(0, 0, 1), (10, 0, 2)]] * total_frames)


def test_first_frame_matches_by_distance():
    tracks = _two_agent_tracks()
    out = first_frame_assign(tracks, {"a": (1.0, 0.0), "b": (9.0, 0.0)})
    assert out.provenance == "first_frame"
    for t in range(1, 6):
        assert out.rwid_of(t, 0) == "a"
        assert out.rwid_of(t, 1) == "b"


def test_first_frame_label_rides_the_tracker_id():
    # the id switch at frame 3 drags identity b onto the wrong object
    tracks = make_tracks(
        [[(0, 0, 1), (10, 0, 2)], [(0, 0, 1), (10, 0, 2)], [(0, 0, 2), (10, 0, 1)]]
    )
    out = first_frame_assign(tracks, {"a": (0.0, 0.0), "b": (10.0, 0.0)})
    assert out.rwid_of(2, 0) == "a"
    assert out.rwid_of(3, 0) == "b"
    assert out.rwid_of(3, 1) == "a"


def test_first_frame_unseen_id_stays_unassigned():
    tracks = make_tracks([[(0, 0, 1)], [(0, 0, 7)]])
    out = first_frame_assign(tracks, {"a": (0.0, 0.0)})
    assert out.rwid_of(1, 0) == "a"
    assert out.rwid_of(2, 0) is None


def test_first_frame_surplus_detections_stay_unassigned():
    tracks = make_tracks([[(0, 0, 1), (10, 0, 2), (20, 0, 3)]])
    out = first_frame_assign(tracks, {"a": (19.0, 0.0)})
    assert out.assignments_at(1) == ((0, None), (1, None), (2, "a"))


def test_first_frame_requires_detections():
    tracks = make_tracks([[], [(0, 0, 1)]])
    with pytest.raises(ValueError, match="first frame"):
        first_frame_assign(tracks, {"a": (0.0, 0.0)})


def test_first_frame_handles_missing_tracker_ids():
    tracks = make_tracks([[(0, 0, None), (10, 0, 2)], [(0, 0, None), (10, 0, 2)]])
    out = first_frame_assign(tracks, {"a": (0.0, 0.0), "b": (10.0, 0.0)})
    # a direct first-frame pair needs no id; later frames have nothing to ride
    assert out.rwid_of(1, 0) == "a"
    assert out.rwid_of(2, 0) is None
    assert out.rwid_of(2, 1) == "b"


def test_reid_swap_without_events_is_the_base_object():
    tracks = _two_agent_tracks()
    base = first_frame_assign(tracks, {"a": (0.0, 0.0), "b": (10.0, 0.0)})
    assert reid_swap(base, [], STATION, tracks) is base


def test_reid_swap_corrects_from_the_event_frame_onward():
    tracks = _two_agent_tracks()
    # anchors swapped on purpose: the base labels both agents wrongly
    base = first_frame_assign(tracks, {"a": (10.0, 0.0), "b": (0.0, 0.0)})
    event = IdentificationEvent(3, "a", StationObservation((0.0, 0.0)))
    out = reid_swap(base, [event], STATION, tracks)
    assert out.provenance == "reid"
    for t in (1, 2):
        assert out.rwid_of(t, 0) == "b"
        assert out.rwid_of(t, 1) == "a"
    for t in (3, 4, 5):
        assert out.rwid_of(t, 0) == "a"
        assert out.rwid_of(t, 1) == "b"
    # the base itself is untouched
    assert base.rwid_of(3, 0) == "b"


def test_reid_swap_trades_labels_one_to_one():
    tracks = _two_agent_tracks()
    base = first_frame_assign(tracks, {"a": (10.0, 0.0), "b": (0.0, 0.0)})
    event = IdentificationEvent(2, "a", StationObservation((0.0, 0.0)))
    out = reid_swap(base, [event], STATION, tracks)
    for t in range(1, 6):
        labels = [rwid for _, rwid in out.assignments_at(t) if rwid is not None]
        assert len(labels) == len(set(labels))


def test_reid_swap_agreeing_event_changes_nothing():
    tracks = _two_agent_tracks()
    base = first_frame_assign(tracks, {"a": (0.0, 0.0), "b": (10.0, 0.0)})
    event = IdentificationEvent(3, "a", StationObservation((0.0, 0.0)))
    out = reid_swap(base, [event], STATION, tracks)
    assert out.frames == base.frames


def test_reid_swap_explicit_row_targets_the_argmax():
    tracks = _two_agent_tracks()
    base = first_frame_assign(tracks, {"a": (10.0, 0.0), "b": (0.0, 0.0)})
    event = IdentificationEvent(4, "a", ExplicitRow((0.9, 0.1)))
    out = reid_swap(base, [event], STATION, tracks)
    assert out.rwid_of(4, 0) == "a"
    assert out.rwid_of(3, 0) == "b"


def test_reid_swap_explicit_row_length_checked():
    tracks = _two_agent_tracks()
    base = first_frame_assign(tracks, {"a": (0.0, 0.0), "b": (10.0, 0.0)})
    event = IdentificationEvent(2, "a", ExplicitRow((1.0,)))
    with pytest.raises(ValueError, match="row has"):
        reid_swap(base, [event], STATION, tracks)


def test_reid_swap_claims_unheld_identity_and_drops_the_old_label():
    tracks = _two_agent_tracks()
    base = first_frame_assign(tracks, {"a": (0.0, 0.0), "b": (10.0, 0.0)})
    event = IdentificationEvent(2, "c", StationObservation((0.0, 0.0)))
    out = reid_swap(base, [event], STATION, tracks)
    assert out.rwid_of(2, 0) == "c"
    # a is gone for good; b is untouched
    for t in range(2, 6):
        labels = {rwid for _, rwid in out.assignments_at(t)}
        assert "a" not in labels
        assert out.rwid_of(t, 1) == "b"


def test_reid_swap_skips_events_on_empty_frames(caplog):
    tracks = make_tracks([[(0, 0, 1)], [], [(0, 0, 1)]])
    base = first_frame_assign(tracks, {"a": (0.0, 0.0)})
    event = IdentificationEvent(2, "b", StationObservation((0.0, 0.0)))
    with caplog.at_level(logging.WARNING, logger="idfuse.baselines"):
        out = reid_swap(base, [event], STATION, tracks)
    assert "no detections" in caplog.text
    assert out.rwid_of(3, 0) == "a"


def test_reid_swap_skips_idless_targets(caplog):
    tracks = make_tracks([[(0, 0, 1)], [(0, 0, None)], [(0, 0, 1)]])
    base = first_frame_assign(tracks, {"a": (0.0, 0.0)})
    event = IdentificationEvent(2, "b", StationObservation((0.0, 0.0)))
    with caplog.at_level(logging.WARNING, logger="idfuse.baselines"):
        out = reid_swap(base, [event], STATION, tracks)
    assert "no tracker id" in caplog.text
    assert out.rwid_of(3, 0) == "a"


def test_reid_swap_wrong_event_hurts():
    tracks = _two_agent_tracks()
    base = first_frame_assign(tracks, {"a": (0.0, 0.0), "b": (10.0, 0.0)})
    # a noisy identification pointing at the wrong agent breaks both tracks
    event = IdentificationEvent(3, "a", StationObservation((10.0, 0.0)))
    out = reid_swap(base, [event], STATION, tracks)
    assert out.rwid_of(4, 0) == "b"
    assert out.rwid_of(4, 1) == "a"


def test_reid_swap_applies_sequentially():
    tracks = _two_agent_tracks(total_frames=6)
    base = first_frame_assign(tracks, {"a": (10.0, 0.0), "b": (0.0, 0.0)})
    fix = IdentificationEvent(2, "a", StationObservation((0.0, 0.0)))
    undo = IdentificationEvent(4, "b", StationObservation((0.0, 0.0)))
    out = reid_swap(base, [undo, fix], STATION, tracks)
    assert out.rwid_of(3, 0) == "a"
    assert out.rwid_of(5, 0) == "b"
    assert out.rwid_of(5, 1) == "a"
