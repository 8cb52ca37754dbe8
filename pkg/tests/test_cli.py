import json

import numpy as np
import pytest

from idfuse import (
    SimConfig,
    generate_scene,
    simulate_identifications,
    sweep,
    write_events,
    write_ground_truth,
    write_tracks,
)
from idfuse.cli import main


def _scene_config(**overrides) -> SimConfig:
    base = dict(
        pen_width=60.0,
        pen_height=60.0,
        population=3,
        total_frames=60,
        feeder_zone=(20.0, 0.0, 16.0, 10.0),
        visit_rate=0.0,
        switch_rate=0.0,
        seed=2,
    )
    base.update(overrides)
    return SimConfig(**base)


def _write_scene(tmp_path, config: SimConfig, name="scene"):
    directory = tmp_path / name
    directory.mkdir()
    gt, tracks, events = generate_scene(config)
    write_tracks(str(directory / "tracks.csv"), tracks)
    write_ground_truth(str(directory / "gt.csv"), gt)
    write_events(str(directory / "events.jsonl"), events)
    return directory, gt, tracks, events


def test_simulate_is_deterministic(tmp_path, capsys):
    config = tmp_path / "sim.cfg"
    config.write_text("population = 3\ntotal_frames = 50\nvisit_rate = 2.0\n")
    for name in ("one", "two"):
        assert main([
            "simulate", "--config", str(config), "--seed", "9",
            "--out", str(tmp_path / name),
        ]) == 0
    assert "frames" in capsys.readouterr().out
    for filename in ("tracks.csv", "gt.csv", "events.jsonl"):
        assert (tmp_path / "one" / filename).read_bytes() == (
            tmp_path / "two" / filename
        ).read_bytes()


def test_fuse_writes_assignment_and_summary(tmp_path):
    config = _scene_config(visit_rate=20.0, total_frames=120, seed=4)
    scene, _, _, events = _write_scene(tmp_path, config)
    assert events, "scene must produce identification events"
    out = tmp_path / "fused"
    code = main([
        "fuse", "--tracks", str(scene / "tracks.csv"),
        "--events", str(scene / "events.jsonl"),
        "--rwids", "1,2,3", "--station-x", "28", "--station-y", "5",
        "--out", str(out),
    ])
    assert code == 0
    assert (out / "assignment.csv").exists()
    summary = json.loads((out / "posterior_summary.json").read_text())
    assert summary["population"] == 3
    assert set(summary["identities"]) == {"1", "2", "3"}
    assert summary["frames"] == 120


def test_fuse_without_events_leaves_everything_unassigned(tmp_path):
    scene, _, _, _ = _write_scene(tmp_path, _scene_config())
    (scene / "empty.jsonl").write_text("")
    out = tmp_path / "fused"
    code = main([
        "fuse", "--tracks", str(scene / "tracks.csv"),
        "--events", str(scene / "empty.jsonl"),
        "--rwids", "1,2,3", "--out", str(out),
    ])
    assert code == 0
    lines = (out / "assignment.csv").read_text().strip().splitlines()
    assert lines
    assert all(line.endswith(",unassigned") for line in lines)


def test_fuse_rejects_out_of_range_events(tmp_path, capsys):
    scene, _, _, _ = _write_scene(tmp_path, _scene_config())
    bad = scene / "bad.jsonl"
    bad.write_text('{"frame": 9999, "rwid": "1", "station": {"x": 0, "y": 0}}\n')
    code = main([
        "fuse", "--tracks", str(scene / "tracks.csv"), "--events", str(bad),
        "--rwids", "1,2,3", "--out", str(tmp_path / "fused"),
    ])
    assert code == 1
    assert capsys.readouterr().err.startswith("error:")


def test_fuse_requires_some_identity(tmp_path, capsys):
    scene, _, _, _ = _write_scene(tmp_path, _scene_config())
    (scene / "empty.jsonl").write_text("")
    code = main([
        "fuse", "--tracks", str(scene / "tracks.csv"),
        "--events", str(scene / "empty.jsonl"), "--out", str(tmp_path / "x"),
    ])
    assert code == 1
    assert "no identities" in capsys.readouterr().err


def test_baseline_reid_without_events_equals_first_frame(tmp_path):
    scene, _, _, _ = _write_scene(tmp_path, _scene_config())
    for method, name in (("first_frame", "ff"), ("reid", "reid")):
        assert main([
            "baseline", "--method", method,
            "--tracks", str(scene / "tracks.csv"), "--gt", str(scene / "gt.csv"),
            "--out", str(tmp_path / name),
        ]) == 0
    assert (tmp_path / "ff" / "assignment.csv").read_bytes() == (
        tmp_path / "reid" / "assignment.csv"
    ).read_bytes()


def test_evaluate_scores_a_perfect_prediction(tmp_path, capsys):
    # stable ids and true anchors make the first-frame baseline exact
    scene, _, _, _ = _write_scene(tmp_path, _scene_config())
    pred = tmp_path / "pred"
    main([
        "baseline", "--method", "first_frame",
        "--tracks", str(scene / "tracks.csv"), "--gt", str(scene / "gt.csv"),
        "--out", str(pred),
    ])
    out = tmp_path / "scores"
    code = main([
        "evaluate", "--gt", str(scene / "gt.csv"),
        "--pred", str(pred / "assignment.csv"),
        "--out", str(out), "--window", "20",
    ])
    assert code == 0
    assert "f1=1.0000" in capsys.readouterr().out
    score = json.loads((out / "score.json").read_text())
    assert score["micro_f1"] == 1.0
    assert score["i_fp"] == 0 and score["i_fn"] == 0
    series = (out / "f1_over_time.csv").read_text().splitlines()
    assert series[0] == "frame,precision,recall,f1"
    assert len(series) == 4  # 60 frames / window 20


def test_verify_confirms_the_engine_on_a_tiny_scene(tmp_path, capsys):
    config = _scene_config(population=2, total_frames=6, visit_rate=8.0, seed=6)
    scene, _, _, _ = _write_scene(tmp_path, config)
    code = main([
        "verify", "--tracks", str(scene / "tracks.csv"),
        "--events", str(scene / "events.jsonl"), "--rwids", "1,2",
    ])
    out = capsys.readouterr().out
    assert code == 0
    assert "max deviation" in out
    assert "2 identities" in out


def test_verify_rejects_an_impossible_budget(tmp_path, capsys):
    scene, _, _, _ = _write_scene(tmp_path, _scene_config())
    code = main([
        "verify", "--tracks", str(scene / "tracks.csv"),
        "--events", str(scene / "events.jsonl"), "--rwids", "1,2,3",
        "--max-paths", "1",
    ])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_sweep_command_writes_both_tables(tmp_path):
    config = tmp_path / "sim.cfg"
    config.write_text(
        "population = 3\ntotal_frames = 80\npen_width = 60\npen_height = 60\n"
        "feeder_left = 20\nfeeder_top = 0\nfeeder_width = 16\nfeeder_height = 10\n"
        "seed = 5\n"
    )
    out = tmp_path / "swept"
    code = main([
        "sweep", "--config", str(config), "--counts", "0,2", "--repeats", "1",
        "--workers", "1", "--out", str(out),
    ])
    assert code == 0
    rows = (out / "sweep.csv").read_text().splitlines()
    assert rows[0] == "method,count,repeat,i_tp,i_fp,i_fn,precision,recall,f1"
    assert len(rows) == 1 + 3 * 2  # three methods, two counts, one repeat
    summary = (out / "sweep_summary.csv").read_text().splitlines()
    assert summary[0] == "method,count,mean_f1,std_f1"
    assert len(summary) == 1 + 3 * 2


def test_sweep_scoring_equals_fuse_plus_evaluate(tmp_path):
    """A sweep cell's hmm and reid scores must be reproducible through the
    file-level commands given the same scene and the cell's event seed."""
    config = _scene_config(population=4, total_frames=150, switch_rate=0.15, seed=7)
    result = sweep(config, [6], noise_fraction=0.25, repeats=1, seed=11, max_workers=1)
    by_method = {r.method: r for r in result.rows if r.count == 6}

    scene, gt, tracks, _ = _write_scene(tmp_path, config)
    event_seed = int(np.random.SeedSequence([11, 6, 0]).generate_state(1)[0])
    events = simulate_identifications(gt, tracks, 6, 0.25, event_seed)
    write_events(str(scene / "cell.jsonl"), events)

    fused = tmp_path / "fused"
    assert main([
        "fuse", "--tracks", str(scene / "tracks.csv"),
        "--events", str(scene / "cell.jsonl"),
        "--rwids", "1,2,3,4", "--population", "4", "--out", str(fused),
    ]) == 0
    scores = tmp_path / "scores"
    assert main([
        "evaluate", "--gt", str(scene / "gt.csv"),
        "--pred", str(fused / "assignment.csv"), "--out", str(scores),
    ]) == 0
    report = json.loads((scores / "score.json").read_text())
    assert report["i_tp"] == by_method["hmm"].confusion.i_tp
    assert report["i_fp"] == by_method["hmm"].confusion.i_fp
    assert report["i_fn"] == by_method["hmm"].confusion.i_fn
    assert report["micro_f1"] == by_method["hmm"].f1

    corrected = tmp_path / "corrected"
    assert main([
        "baseline", "--method", "reid",
        "--tracks", str(scene / "tracks.csv"), "--gt", str(scene / "gt.csv"),
        "--events", str(scene / "cell.jsonl"),
        "--station-x", "28", "--station-y", "5", "--out", str(corrected),
    ]) == 0
    assert main([
        "evaluate", "--gt", str(scene / "gt.csv"),
        "--pred", str(corrected / "assignment.csv"), "--out", str(scores),
    ]) == 0
    report = json.loads((scores / "score.json").read_text())
    assert report["micro_f1"] == by_method["reid"].f1


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert capsys.readouterr().out.strip()


def test_unknown_command_exits_nonzero():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2
