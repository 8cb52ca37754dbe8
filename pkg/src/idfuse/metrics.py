"""Identity-aware evaluation against ground truth.

Counts are defined over (detection, identity) correctness, not detection
alone: a perfectly tracked box with the wrong identity is a false positive,
and an unlabeled box sitting on a ground-truth object is a false negative.
Boxes are matched per frame by IOU-maximizing assignment with zero-overlap
pairs discarded, so the counts do not depend on input ordering.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assignment import hungarian_max
from .core import Bbox, GroundTruth, IdentityTrackSet


@dataclass(frozen=True)
class IdentityConfusion:
    i_tp: int = 0
    i_fp: int = 0
    i_fn: int = 0

    def __post_init__(self) -> None:
        if min(self.i_tp, self.i_fp, self.i_fn) < 0:
            raise ValueError("counts cannot be negative")

    def __add__(self, other: "IdentityConfusion") -> "IdentityConfusion":
        return IdentityConfusion(
            self.i_tp + other.i_tp,
            self.i_fp + other.i_fp,
            self.i_fn + other.i_fn,
        )


@dataclass(frozen=True)
class SeriesPoint:
    frame: int
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class ScoreReport:
    """Pooled precision/recall/F1, optionally with a time-resolved series."""

    micro_precision: float
    micro_recall: float
    micro_f1: float
    confusion: IdentityConfusion
    series: tuple[SeriesPoint, ...] = ()

    def as_json_dict(self) -> dict:
        return {
            "i_tp": self.confusion.i_tp,
            "i_fp": self.confusion.i_fp,
            "i_fn": self.confusion.i_fn,
            "micro_precision": self.micro_precision,
            "micro_recall": self.micro_recall,
            "micro_f1": self.micro_f1,
        }


def iou(box_a: Bbox, box_b: Bbox) -> float:
    """Intersection area over union area of two (left, top, w, h) boxes."""
    ax, ay, aw, ah = box_a
    bx, by, bw, bh = box_b
    iw = min(ax + aw, bx + bw) - max(ax, bx)
    ih = min(ay + ah, by + bh) - max(ay, by)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    return inter / (aw * ah + bw * bh - inter)


def iou_matrix(boxes_a: np.ndarray, boxes_b: np.ndarray) -> np.ndarray:
    """Pairwise IOU, boxes as (n, 4) ltwh arrays."""
    ar = boxes_a[:, None, :]
    br = boxes_b[None, :, :]
    iw = np.minimum(ar[..., 0] + ar[..., 2], br[..., 0] + br[..., 2]) - np.maximum(
        ar[..., 0], br[..., 0]
    )
    ih = np.minimum(ar[..., 1] + ar[..., 3], br[..., 1] + br[..., 3]) - np.maximum(
        ar[..., 1], br[..., 1]
    )
    inter = np.clip(iw, 0.0, None) * np.clip(ih, 0.0, None)
    union = ar[..., 2] * ar[..., 3] + br[..., 2] * br[..., 3] - inter
    return np.where(union > 0.0, inter / np.where(union > 0.0, union, 1.0), 0.0)


def match_frame(gt_boxes, detection_boxes) -> tuple[tuple[int, int], ...]:
    """Match boxes by maximum total IOU, then drop non-overlapping pairs."""
    if len(gt_boxes) == 0 or len(detection_boxes) == 0:
        return ()
    matrix = iou_matrix(
        np.asarray(gt_boxes, dtype=float), np.asarray(detection_boxes, dtype=float)
    )
    return tuple((g, d) for g, d in hungarian_max(matrix) if matrix[g, d] > 0.0)


def identity_confusion(
    ground_truth: GroundTruth, assignment: IdentityTrackSet
) -> IdentityConfusion:
    """Pool identity-aware counts over all annotated frames.

    Per frame: a matched ground-truth object scores i_tp with the correct
    identity, i_fp with a wrong one, and i_fn when its detection carries no
    identity at all. Unmatched ground truth is i_fn; a detection matched to
    nothing is i_fp.
    """
    track_set = assignment.track_set
    total = track_set.total_frames
    i_tp = i_fp = i_fn = 0
    for frame, entries in ground_truth.frames:
        detections = track_set.detections_at(frame) if 1 <= frame <= total else ()
        if not detections:
            i_fn += len(entries)
            continue
        if not entries:
            i_fp += len(detections)
            continue
        gt_boxes = np.array([box for _, box in entries], dtype=float)
        det_boxes = np.array([det.bbox for det in detections], dtype=float)
        matrix = iou_matrix(gt_boxes, det_boxes)
        matched_gt: set[int] = set()
        matched_det: set[int] = set()
        labels = dict(assignment.frames[frame - 1])
        for g, d in hungarian_max(matrix):
            if matrix[g, d] <= 0.0:
                continue
            matched_gt.add(g)
            matched_det.add(d)
            predicted = labels.get(detections[d].local_index)
            if predicted is None:
                i_fn += 1
            elif predicted == entries[g][0]:
                i_tp += 1
            else:
                i_fp += 1
        i_fn += len(entries) - len(matched_gt)
        i_fp += len(detections) - len(matched_det)
    return IdentityConfusion(i_tp, i_fp, i_fn)


def micro_scores(confusion: IdentityConfusion) -> ScoreReport:
    """Pooled precision, recall, and F1; zero denominators score 0."""
    tp, fp, fn = confusion.i_tp, confusion.i_fp, confusion.i_fn
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return ScoreReport(precision, recall, f1, confusion)


def f1_over_time(
    ground_truth: GroundTruth,
    assignment: IdentityTrackSet,
    window: int,
    mode: str = "cumulative",
) -> tuple[SeriesPoint, ...]:
    """Score series at window boundaries.

    Cumulative mode pools counts from frame 1 up to each boundary; windowed
    mode scores each window alone. Windows containing no annotated frames
    contribute no point.
    """
    if window < 1:
        raise ValueError("window must be at least 1")
    if mode not in ("cumulative", "windowed"):
        raise ValueError(f"unknown mode {mode!r}")
    total = max(assignment.track_set.total_frames, *(f for f, _ in ground_truth.frames), 1) \
        if ground_truth.frames else assignment.track_set.total_frames

    by_frame = {frame: entries for frame, entries in ground_truth.frames}
    points: list[SeriesPoint] = []
    running = IdentityConfusion()
    start = 1
    while start <= total:
        end = min(start + window - 1, total)
        span = [f for f in range(start, end + 1) if f in by_frame]
        if span:
            chunk = identity_confusion(
                GroundTruth(tuple((f, by_frame[f]) for f in span)), assignment
            )
            running = running + chunk
            scored = micro_scores(running if mode == "cumulative" else chunk)
            points.append(
                SeriesPoint(
                    end, scored.micro_precision, scored.micro_recall, scored.micro_f1
                )
            )
        start = end + 1
    return tuple(points)


def evaluate(
    ground_truth: GroundTruth,
    assignment: IdentityTrackSet,
    window: int | None = None,
    mode: str = "cumulative",
) -> ScoreReport:
    """Full report: pooled scores plus an optional time series."""
    report = micro_scores(identity_confusion(ground_truth, assignment))
    if window is None:
        return report
    series = f1_over_time(ground_truth, assignment, window, mode)
    return ScoreReport(
        report.micro_precision,
        report.micro_recall,
        report.micro_f1,
        report.confusion,
        series,
    )
