"""Command-line pipeline tests: config files, run artifacts, snapshots.

The CSV and snapshot checks recompute their expectations independently:
summary statistics are re-derived from the JSONL records with numpy, and
snapshot fidelity is judged against a freshly fitted in-process estimator
built from the same config.
"""

import json
import warnings
from pathlib import Path

import numpy as np
import pytest
import yaml

from paretogen.benchmarks import make_benchmark
from paretogen.cli import main
from paretogen.config import build_estimator, load_config, resolve_output_dir
from paretogen.snapshot import (
    SNAPSHOT_FORMAT_VERSION,
    bundle_digest,
    load_snapshot,
    save_snapshot,
)
from paretogen.validation import ConfigError, SnapshotFormatError

RECORD_KEYS = {
    "round", "tau", "n_labeled_pos", "hv", "rel_hvi", "degenerate_baseline",
    "diversity", "losses", "batch", "seed_state_digest",
}

TINY_RUN = {
    "rounds": 2,
    "batch_size": 3,
    "init_points": 12,
    "gradient_samples": 24,
    "max_inner_iters": 30,
    "refresh_period": 20,
    "cpe_iters": 30,
    "mixture_iters": 40,
    "prior_max_iters": 60,
}


def write_config(path, *, output_dir, seeds=(0, 1), benchmark="branin-currin",
                 params=None, run=None, extra=None):
    cfg = {
        "benchmark": {"name": benchmark},
        "run": dict(TINY_RUN, **(run or {})),
        "backbone": {"hidden_width": 8},
        "preference": "mixture",
        "output_dir": str(output_dir),
        "seeds": list(seeds),
    }
    if params:
        cfg["benchmark"]["params"] = params
    if extra:
        cfg.update(extra)
    path.write_text(yaml.safe_dump(cfg))
    return cfg


@pytest.fixture(scope="module")
def run_artifacts(tmp_path_factory):
    """One tiny two-seed run shared by the artifact-shape tests."""
    base = tmp_path_factory.mktemp("run")
    cfg_path = base / "config.yaml"
    write_config(cfg_path, output_dir=base / "out")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        code = main(["run", str(cfg_path)])
    assert code == 0
    return base


def read_jsonl(path):
    lines = path.read_text().splitlines()
    header = json.loads(lines[0])
    return header, [json.loads(line) for line in lines[1:]]


def read_summary(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("#") and "format_version" in lines[0]
    assert lines[1] == "round,mean_rel_hvi,std_rel_hvi"
    rows = [line.split(",") for line in lines[2:]]
    return [(int(r[0]), float(r[1]), float(r[2])) for r in rows]


# ---------------------------------------------------------------------------
# cmd_run artifacts
# ---------------------------------------------------------------------------

def test_run_writes_expected_files(run_artifacts):
    out = run_artifacts / "out"
    for seed in (0, 1):
        assert (out / f"branin-currin-seed{seed}.jsonl").exists()
        assert (out / f"snapshot-seed{seed}.json").exists()
    assert (out / "summary.csv").exists()


def test_jsonl_has_version_header_and_record_schema(run_artifacts):
    header, records = read_jsonl(
        run_artifacts / "out" / "branin-currin-seed0.jsonl")
    assert header == {"format_version": 1}
    assert len(records) == TINY_RUN["rounds"]
    for i, rec in enumerate(records):
        assert set(rec) == RECORD_KEYS
        assert rec["round"] == i + 1
        assert len(rec["batch"]) == TINY_RUN["batch_size"]


def test_summary_matches_jsonl_recomputation(run_artifacts):
    out = run_artifacts / "out"
    per_seed = []
    for seed in (0, 1):
        _, records = read_jsonl(out / f"branin-currin-seed{seed}.jsonl")
        per_seed.append([rec["rel_hvi"] for rec in records])
    table = np.asarray(per_seed)  # (n_seeds, rounds)
    rows = read_summary(out / "summary.csv")
    assert [r[0] for r in rows] == list(range(1, TINY_RUN["rounds"] + 1))
    np.testing.assert_allclose(
        [r[1] for r in rows], table.mean(axis=0), atol=1e-9)
    np.testing.assert_allclose(
        [r[2] for r in rows], table.std(axis=0), atol=1e-9)


def test_rerun_is_byte_identical(run_artifacts, tmp_path):
    cfg_path = tmp_path / "config.yaml"
    write_config(cfg_path, output_dir=tmp_path / "out", seeds=(0,))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert main(["run", str(cfg_path)]) == 0
    first = (tmp_path / "out" / "branin-currin-seed0.jsonl").read_bytes()
    reference = (
        run_artifacts / "out" / "branin-currin-seed0.jsonl").read_bytes()
    assert first == reference


def test_output_root_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("PARETOGEN_OUTPUT_ROOT", str(tmp_path / "root"))
    cfg_path = tmp_path / "config.yaml"
    write_config(cfg_path, output_dir="nested/run", seeds=(0,),
                 run={"rounds": 1, "init_points": 8, "batch_size": 2})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert main(["run", str(cfg_path)]) == 0
    assert (tmp_path / "root" / "nested" / "run" / "summary.csv").exists()


# ---------------------------------------------------------------------------
# config validation
# ---------------------------------------------------------------------------

def test_unknown_top_level_key_rejected(tmp_path, capsys):
    cfg_path = tmp_path / "config.yaml"
    write_config(cfg_path, output_dir=tmp_path / "out",
                 extra={"bananas": 1})
    assert main(["run", str(cfg_path)]) == 2
    assert "bananas" in capsys.readouterr().err


def test_unknown_run_key_rejected(tmp_path, capsys):
    cfg_path = tmp_path / "config.yaml"
    write_config(cfg_path, output_dir=tmp_path / "out",
                 run={"learning_rate_typo": 0.1})
    assert main(["run", str(cfg_path)]) == 2
    assert "learning_rate_typo" in capsys.readouterr().err


def test_unknown_benchmark_rejected(tmp_path, capsys):
    cfg_path = tmp_path / "config.yaml"
    write_config(cfg_path, output_dir=tmp_path / "out",
                 benchmark="rosenbrock-37")
    assert main(["run", str(cfg_path)]) == 2
    err = capsys.readouterr().err
    assert "rosenbrock-37" in err and "branin-currin" in err


def test_missing_config_file_is_config_error(tmp_path):
    assert main(["run", str(tmp_path / "nope.yaml")]) == 2


def test_malformed_yaml_is_config_error(tmp_path):
    cfg_path = tmp_path / "config.yaml"
    cfg_path.write_text("benchmark: [unclosed\n")
    assert main(["run", str(cfg_path)]) == 2


def test_run_seed_belongs_in_seed_list(tmp_path, capsys):
    cfg_path = tmp_path / "config.yaml"
    write_config(cfg_path, output_dir=tmp_path / "out", run={"seed": 3})
    assert main(["run", str(cfg_path)]) == 2
    assert "seeds" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# cmd_baseline
# ---------------------------------------------------------------------------

def test_baseline_random_shares_record_schema(tmp_path):
    cfg_path = tmp_path / "config.yaml"
    write_config(cfg_path, output_dir=tmp_path / "out", seeds=(0,))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert main(["baseline", str(cfg_path), "--name", "random"]) == 0
    out = tmp_path / "out"
    header, records = read_jsonl(out / "branin-currin-random-seed0.jsonl")
    assert header == {"format_version": 1}
    assert len(records) == TINY_RUN["rounds"]
    for rec in records:
        assert set(rec) == RECORD_KEYS
        assert rec["tau"] is None
        assert all(v is None for v in rec["losses"].values())
    rows = read_summary(out / "summary-random.csv")
    assert len(rows) == TINY_RUN["rounds"]


def test_baseline_unknown_name_lists_choices(tmp_path, capsys):
    cfg_path = tmp_path / "config.yaml"
    write_config(cfg_path, output_dir=tmp_path / "out", seeds=(0,))
    assert main(["baseline", str(cfg_path), "--name", "simulated"]) == 2
    err = capsys.readouterr().err
    assert "random" in err and "cbas" in err and "vsd" in err


def test_baseline_mutation_needs_sequences(tmp_path):
    cfg_path = tmp_path / "config.yaml"
    write_config(cfg_path, output_dir=tmp_path / "out", seeds=(0,))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        code = main(["baseline", str(cfg_path), "--name", "random-mutation"])
    assert code == 2


@pytest.mark.parametrize("name", ["vsd", "cbas"])
def test_engine_mode_baselines_run(tmp_path, name):
    cfg_path = tmp_path / "config.yaml"
    write_config(cfg_path, output_dir=tmp_path / "out", seeds=(0,))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert main(["baseline", str(cfg_path), "--name", name]) == 0
    _, records = read_jsonl(
        tmp_path / "out" / f"branin-currin-{name}-seed0.jsonl")
    assert len(records) == TINY_RUN["rounds"]
    if name == "cbas":
        assert all(rec["tau"] == 1 for rec in records)


# ---------------------------------------------------------------------------
# snapshots and cmd_sample
# ---------------------------------------------------------------------------

def test_snapshot_roundtrip_reproduces_log_probs(run_artifacts):
    cfg = load_config(run_artifacts / "config.yaml")
    bench = make_benchmark("branin-currin")
    est = build_estimator(cfg, seed=0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        est.fit(bench)
    snap = load_snapshot(run_artifacts / "out" / "snapshot-seed0.json")

    rng = np.random.default_rng(42)
    U = rng.standard_normal((16, 2))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    X = rng.random((16, bench.domain.n_dims))
    np.testing.assert_allclose(
        snap.variational.log_prob(X, U), est.variational_.log_prob(X, U),
        atol=1e-12)
    np.testing.assert_allclose(
        snap.prior.log_prob(X, U), est.prior_.log_prob(X, U), atol=1e-12)
    np.testing.assert_allclose(snap.reference_point, est.reference_point_)
    np.testing.assert_allclose(snap.Y, est.Y_)


def test_snapshot_version_checked(tmp_path):
    bad = tmp_path / "snap.json"
    bad.write_text(json.dumps({"format_version": 99}))
    with pytest.raises(SnapshotFormatError, match="version"):
        load_snapshot(bad)
    bad.write_text(json.dumps({"dataset": {}}))
    with pytest.raises(SnapshotFormatError, match="format_version"):
        load_snapshot(bad)


def test_snapshot_save_load_digest_stable(run_artifacts, tmp_path):
    snap = load_snapshot(run_artifacts / "out" / "snapshot-seed0.json")
    save_snapshot(tmp_path / "copy.json", snap)
    again = load_snapshot(tmp_path / "copy.json")
    assert bundle_digest(snap) == bundle_digest(again)


def test_sample_command_outputs_scored_designs(run_artifacts, capsys):
    snap_path = str(run_artifacts / "out" / "snapshot-seed0.json")
    assert main(["sample", snap_path, "--u", "0.6,0.8", "--n", "3"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["format_version"] == SNAPSHOT_FORMAT_VERSION
    np.testing.assert_allclose(out["u_used"], [0.6, 0.8], atol=1e-12)
    assert len(out["designs"]) == 3
    for d in out["designs"]:
        assert set(d) >= {"x", "logq", "pareto_score", "align_score"}
        assert len(d["x"]) == 2


def test_sample_command_is_deterministic(run_artifacts, capsys):
    snap_path = str(run_artifacts / "out" / "snapshot-seed0.json")
    assert main(["sample", snap_path, "--u", "1,1", "--n", "4",
                 "--seed", "7"]) == 0
    first = capsys.readouterr().out
    assert main(["sample", snap_path, "--u", "1,1", "--n", "4",
                 "--seed", "7"]) == 0
    assert capsys.readouterr().out == first


def test_sample_command_renormalizes_with_warning(run_artifacts, capsys):
    snap_path = str(run_artifacts / "out" / "snapshot-seed0.json")
    with pytest.warns(UserWarning, match="renormaliz"):
        assert main(["sample", snap_path, "--u", "1,1", "--n", "1"]) == 0
    out = json.loads(capsys.readouterr().out)
    np.testing.assert_allclose(np.linalg.norm(out["u_used"]), 1.0, atol=1e-12)


def test_sample_command_accepts_target_outcome(run_artifacts, capsys):
    snap = load_snapshot(run_artifacts / "out" / "snapshot-seed0.json")
    y = snap.Y.mean(axis=0)
    snap_path = str(run_artifacts / "out" / "snapshot-seed0.json")
    code = main(["sample", snap_path, f"--y={y[0]},{y[1]}", "--n", "2"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    expected = y - snap.reference_point
    expected = expected / np.linalg.norm(expected)
    np.testing.assert_allclose(out["u_used"], expected, atol=1e-12)


def test_sample_command_n_zero_gives_empty_list(run_artifacts, capsys):
    snap_path = str(run_artifacts / "out" / "snapshot-seed0.json")
    assert main(["sample", snap_path, "--u", "0.6,0.8", "--n", "0"]) == 0
    assert json.loads(capsys.readouterr().out)["designs"] == []


def test_sample_command_requires_exactly_one_target(run_artifacts, capsys):
    snap_path = str(run_artifacts / "out" / "snapshot-seed0.json")
    assert main(["sample", snap_path, "--u", "1,0", "--y", "1,1",
                 "--n", "1"]) == 2
    assert main(["sample", snap_path, "--n", "1"]) == 2


def test_sample_command_rejects_corrupt_snapshot(tmp_path, capsys):
    bad = tmp_path / "snap.json"
    bad.write_text(json.dumps({"format_version": 99}))
    assert main(["sample", str(bad), "--u", "1,0", "--n", "1"]) == 2
    assert main(["sample", str(tmp_path / "missing.json"),
                 "--u", "1,0", "--n", "1"]) == 2


# ---------------------------------------------------------------------------
# config helpers
# ---------------------------------------------------------------------------

def test_resolve_output_dir_without_env(tmp_path, monkeypatch):
    monkeypatch.delenv("PARETOGEN_OUTPUT_ROOT", raising=False)
    cfg = {"output_dir": str(tmp_path / "abs")}
    assert resolve_output_dir(cfg) == Path(tmp_path / "abs")


def test_build_estimator_merges_sections(tmp_path):
    cfg_path = tmp_path / "config.yaml"
    write_config(cfg_path, output_dir=tmp_path / "out",
                 extra={"preference": "empirical"})
    cfg = load_config(cfg_path)
    est = build_estimator(cfg, seed=5)
    assert est.seed == 5
    assert est.rounds == TINY_RUN["rounds"]
    assert est.hidden_width == 8
    assert est.preference_model == "empirical"


def test_config_requires_benchmark_and_output(tmp_path):
    cfg_path = tmp_path / "config.yaml"
    cfg_path.write_text(yaml.safe_dump({"output_dir": "x"}))
    with pytest.raises(ConfigError, match="benchmark"):
        load_config(cfg_path)
    cfg_path.write_text(yaml.safe_dump({"benchmark": {"name": "zdt3"}}))
    with pytest.raises(ConfigError, match="output_dir"):
        load_config(cfg_path)
