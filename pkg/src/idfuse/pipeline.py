"""End-to-end fusion: tracker output + identifications -> labeled tracks."""
from __future__ import annotations

from .assignment import (
    FrameAssignment,
    assign_frames,
    assignments_to_track_set,
)
from .core import IdentificationEvent, IdentityTrackSet, TrackSet
from .emissions import StationModel, build_emission_sequence
from .hmm import stacked_matching_values
from .transitions import SmoothingConfig, TransitionSequence, transitions_from_tracks


def fuse_details(
    track_set: TrackSet,
    events: list[IdentificationEvent] | tuple[IdentificationEvent, ...],
    rwid_catalog: tuple[str, ...] | list[str],
    population: int | None = None,
    smoothing: SmoothingConfig = SmoothingConfig(),
    station: StationModel | None = None,
    transitions: TransitionSequence | None = None,
) -> tuple[IdentityTrackSet, list[FrameAssignment]]:
    """Run the full chain and keep the per-frame matching outcomes.

    One chain per catalog identity (identities without events still run on
    flat evidence), shared transitions, per-frame matching with the
    1/population rejection rule. ``population`` defaults to the catalog
    size; pass the true population explicitly when the catalog only lists
    the identities that appear in events.
    """
    if not rwid_catalog:
        raise ValueError("rwid_catalog must name at least one identity")
    catalog = tuple(dict.fromkeys(rwid_catalog))
    if len(catalog) != len(rwid_catalog):
        raise ValueError("rwid_catalog has duplicate labels")
    unknown = sorted({e.rwid for e in events} - set(catalog))
    if unknown:
        raise ValueError(f"events name identities outside the catalog: {unknown}")
    if transitions is None:
        transitions = transitions_from_tracks(track_set, smoothing)
    by_rwid: dict[str, list[IdentificationEvent]] = {r: [] for r in catalog}
    for event in events:
        by_rwid[event.rwid].append(event)
    sequences = [
        build_emission_sequence(by_rwid[r], track_set, station, rwid=r)
        for r in catalog
    ]
    values = stacked_matching_values(transitions, sequences)
    assignments = assign_frames(
        values, catalog, population if population is not None else len(catalog)
    )
    return assignments_to_track_set(assignments, track_set, "hmm"), assignments


def fuse_scene(
    track_set: TrackSet,
    events,
    rwid_catalog,
    population: int | None = None,
    smoothing: SmoothingConfig = SmoothingConfig(),
    station: StationModel | None = None,
) -> IdentityTrackSet:
    """Labeled tracks only; see fuse_details for the per-frame breakdown."""
    labeled, _ = fuse_details(
        track_set, events, rwid_catalog, population, smoothing, station
    )
    return labeled
