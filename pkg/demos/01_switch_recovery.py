"""The core story: surviving a tracker identity switch.

Two agents sit apart for 60 frames. The simulated tracker swaps their
internal ids at frame 31, the classic occlusion failure. A label anchored
to a tracker id rides the swap into the wrong animal and never comes back.
Fusing two cheap station reads repairs almost the whole corrupted span.

Run: python3 demos/01_switch_recovery.py
"""
import sys

sys.path.insert(0, "demos")
from _shared import banner

from idfuse import (
    Detection,
    GroundTruth,
    IdentificationEvent,
    StationModel,
    StationObservation,
    TrackSet,
    evaluate,
    first_frame_assign,
    fuse_scene,
    reid_swap,
)

TOTAL = 60
SWAP_AT = 31
LEFT = (0.0, 0.0, 4.0, 4.0)
RIGHT = (30.0, 0.0, 4.0, 4.0)


def build_scene():
    frames, truth = [], []
    for t in range(1, TOTAL + 1):
        left_id, right_id = (1, 2) if t < SWAP_AT else (2, 1)
        frames.append(
            (
                Detection(frame=t, local_index=0, bbox=LEFT, tracker_id=left_id),
                Detection(frame=t, local_index=1, bbox=RIGHT, tracker_id=right_id),
            )
        )
        truth.append((t, (("L", LEFT), ("R", RIGHT))))
    return TrackSet(tuple(frames)), GroundTruth(tuple(truth))


def correct_span(tracks, labeled, rwid, want_box):
    ok = [
        t
        for t in range(1, TOTAL + 1)
        for idx, tag in labeled.assignments_at(t)
        if tag == rwid and tracks.detections_at(t)[idx].bbox == want_box
    ]
    return len(ok)


def main():
    tracks, gt = build_scene()
    station = StationModel((0.0, 0.0))
    # each animal is read once on each side of the swap
    events = [
        IdentificationEvent(5, "R", StationObservation((32.0, 2.0))),
        IdentificationEvent(10, "L", StationObservation((2.0, 2.0))),
        IdentificationEvent(50, "L", StationObservation((2.0, 2.0))),
        IdentificationEvent(55, "R", StationObservation((32.0, 2.0))),
    ]

    banner("anchor labels to first-frame tracker ids")
    anchors = {"L": (2.0, 2.0), "R": (32.0, 2.0)}
    anchored = first_frame_assign(tracks, anchors)
    print(f"frames where L sits on the left box: {correct_span(tracks, anchored, 'L', LEFT)}/{TOTAL}")
    print("the label follows tracker id 1 into the right box at frame "
          f"{SWAP_AT} and stays wrong for the rest of the video")

    banner("swap-repair from the same four reads")
    repaired = reid_swap(anchored, events, station, tracks)
    print(f"frames where L sits on the left box: {correct_span(tracks, repaired, 'L', LEFT)}/{TOTAL}")
    print("the frame-50 read triggers a swap, but frames 31..49 stay wrong:"
          " corrections only flow forward")

    banner("posterior fusion from the same four reads")
    fused = fuse_scene(tracks, events, ("L", "R"), population=2)
    print(f"frames where L sits on the left box: {correct_span(tracks, fused, 'L', LEFT)}/{TOTAL}")
    for method, labeled in (("anchored", anchored), ("repaired", repaired), ("fused", fused)):
        report = evaluate(gt, labeled)
        c = report.confusion
        print(f"  {method:9s} micro F1 = {report.micro_f1:.3f}"
              f"  (correct {c.i_tp}, wrong {c.i_fp}, missed {c.i_fn})")
    print("smoothing pushes evidence both ways from each read; only the two"
          " frames nearest the swap stay unlabeled, and nothing is mislabeled")

    banner("identities with no reads are abstained, not guessed")
    partial = fuse_scene(tracks, events[:1], ("L", "R"), population=2)
    unassigned = sum(
        1
        for t in range(1, TOTAL + 1)
        for _, tag in partial.assignments_at(t)
        if tag is None
    )
    print(f"with only L's first read, {unassigned} of {2 * TOTAL} detections"
          " stay unlabeled")
    print("R was never read, so its matching values sit below the 1/2"
          " rejection floor and the right box is reported undetected")


if __name__ == "__main__":
    main()
