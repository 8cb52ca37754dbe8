"""Identity-aware multi-object tracking from sparse, uncertain identifications.

A base tracker says how detections connect frame to frame; sparse
identification events (feeder reads, recognition hits) say who some of them
are. This package fuses the two with one hidden Markov chain per identity,
solved by scaled forward-backward and merged per frame by maximum-value
assignment with a 1/population rejection rule.
"""

from .core import (
    Bbox,
    Detection,
    ExplicitRow,
    GroundTruth,
    IdentificationEvent,
    IdentityTrackSet,
    SceneConfig,
    StationObservation,
    TrackSet,
    UNASSIGNED,
    ValidationReport,
    validate_inputs,
)
from .transitions import (
    SmoothingConfig,
    TransitionSequence,
    transitions_from_soft_associations,
    transitions_from_tracks,
)
from .emissions import (
    EmissionSequence,
    StationModel,
    build_emission_sequence,
    distance_emission_row,
    filter_identifications,
    simulate_identifications,
    uniform_row,
)
from .hmm import (
    BackwardResult,
    ForwardResult,
    InconsistentEvidenceError,
    PosteriorTable,
    backward,
    forward,
    posterior_tables,
    posteriors,
    run_all_rwids,
    stacked_matching_values,
)
from .assignment import (
    FrameAssignment,
    assign_frame,
    assign_frames,
    assign_video,
    assignments_to_track_set,
    hungarian_max,
    matching_total,
)
from .metrics import (
    IdentityConfusion,
    ScoreReport,
    SeriesPoint,
    evaluate,
    f1_over_time,
    identity_confusion,
    iou,
    iou_matrix,
    match_frame,
    micro_scores,
)
from .baselines import first_frame_assign, reid_swap
from .oracle import brute_force_assignment, brute_force_posterior
from .io import (
    RunConfig,
    read_assignment,
    read_events,
    read_ground_truth,
    read_tracks,
    write_assignment,
    write_csv,
    write_events,
    write_ground_truth,
    write_json,
    write_tracks,
)
from .pipeline import fuse_details, fuse_scene
from .simulate import (
    SimConfig,
    SweepResult,
    SweepRow,
    SweepSummary,
    generate_scene,
    sweep,
    worker_cap,
)

__version__ = "0.1.0"

__all__ = [
    "Bbox",
    "Detection",
    "ExplicitRow",
    "GroundTruth",
    "IdentificationEvent",
    "IdentityTrackSet",
    "SceneConfig",
    "StationObservation",
    "TrackSet",
    "UNASSIGNED",
    "ValidationReport",
    "validate_inputs",
    "SmoothingConfig",
    "TransitionSequence",
    "transitions_from_soft_associations",
    "transitions_from_tracks",
    "EmissionSequence",
    "StationModel",
    "build_emission_sequence",
    "distance_emission_row",
    "filter_identifications",
    "simulate_identifications",
    "uniform_row",
    "BackwardResult",
    "ForwardResult",
    "InconsistentEvidenceError",
    "PosteriorTable",
    "backward",
    "forward",
    "posterior_tables",
    "posteriors",
    "run_all_rwids",
    "stacked_matching_values",
    "FrameAssignment",
    "assign_frame",
    "assign_frames",
    "assign_video",
    "assignments_to_track_set",
    "hungarian_max",
    "matching_total",
    "IdentityConfusion",
    "ScoreReport",
    "SeriesPoint",
    "evaluate",
    "f1_over_time",
    "identity_confusion",
    "iou",
    "iou_matrix",
    "match_frame",
    "micro_scores",
    "first_frame_assign",
    "reid_swap",
    "brute_force_assignment",
    "brute_force_posterior",
    "RunConfig",
    "read_assignment",
    "read_events",
    "read_ground_truth",
    "read_tracks",
    "write_assignment",
    "write_csv",
    "write_events",
    "write_ground_truth",
    "write_json",
    "write_tracks",
    "fuse_details",
    "fuse_scene",
    "SimConfig",
    "SweepResult",
    "SweepRow",
    "SweepSummary",
    "generate_scene",
    "sweep",
    "worker_cap",
    "__version__",
]
