import json

import pytest

from src.cli import read_manifest
from src.graph import read_dataset_info
from src.main import EXIT_ERROR, EXIT_OK, EXIT_USAGE, main

from tests.conftest import random_graph

TINY = ["--dim", "8", "--candidate_top_k", "5", "--views_per_d_step", "2", "--mlp_hidden", "8"]


def _run(capsys, *argv: str) -> tuple[int, dict]:
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else {}


@pytest.fixture
def dataset(tmp_path, capsys):
    """Ingested 30-node graph with an edge split."""
    edges = tmp_path / "edges.txt"
    g = random_graph(30, 60, seed=1)
    edges.write_text("".join(f"n{i} n{j}\n" for i, j in g.edges.tolist()))
    code, _ = _run(capsys, "ingest", edges, "--out", tmp_path / "ds", "--split-edges", "0.8,0.1,0.1")
    assert code == EXIT_OK
    return tmp_path / "ds"


def test_ingest_two_line_file(tmp_path, capsys):
    edges = tmp_path / "edges.txt"
    edges.write_text("a b\nb c\n")
    code, out = _run(capsys, "ingest", edges, "--out", tmp_path / "ds", "--name", "toy")
    assert code == EXIT_OK
    assert out["name"] == "toy"
    assert out["fingerprint"]["n_nodes"] == 3
    assert out["fingerprint"]["n_edges"] == 2


def test_ingest_missing_file(tmp_path, capsys):
    code = main(["ingest", str(tmp_path / "nope.txt"), "--out", str(tmp_path / "ds")])
    assert code == EXIT_ERROR
    assert "nope.txt" in capsys.readouterr().err


def test_unknown_flag_is_usage_error(capsys):
    assert main(["train", "ds", "--not_a_field", "1"]) == EXIT_USAGE


def test_train_without_iterations(tmp_path, capsys, dataset):
    code, out = _run(capsys, "train", dataset, "--output-root", tmp_path / "runs", "--max_iters", "0", *TINY)
    assert code == EXIT_OK
    assert out["iterations"] == 0
    run_dir = tmp_path / "runs" / out["run_dir"].split("/")[-1]
    assert (run_dir / "embeddings.tsv").exists()
    assert (run_dir / "checkpoint" / "state.json").exists()
    assert read_manifest(run_dir).config_hash == out["config_hash"]


def test_train_variant_is_recorded(tmp_path, capsys, dataset):
    code, out = _run(
        capsys, "train", dataset, "--output-root", tmp_path, "--variant", "wo_gan", "--max_iters", "1", *TINY
    )
    assert code == EXIT_OK
    manifest = read_manifest(tmp_path / out["run_dir"].split("/")[-1])
    assert manifest.variant == "wo_gan"
    assert (manifest.config.n_g, manifest.config.n_d) == (0, 0)


def test_repeat_run_name_is_refused(tmp_path, capsys, dataset):
    argv = ["train", dataset, "--output-root", tmp_path, "--run-name", "r", "--max_iters", "0", *TINY]
    assert _run(capsys, *argv)[0] == EXIT_OK
    assert main([str(a) for a in argv]) == EXIT_ERROR


def test_training_is_deterministic(tmp_path, capsys, dataset):
    for name in ("a", "b"):
        code, _ = _run(
            capsys, "train", dataset, "--output-root", tmp_path, "--run-name", name, "--max_iters", "2", *TINY
        )
        assert code == EXIT_OK
    assert (tmp_path / "a" / "embeddings.tsv").read_bytes() == (tmp_path / "b" / "embeddings.tsv").read_bytes()


def test_eval_and_exports(tmp_path, capsys, dataset):
    _run(capsys, "train", dataset, "--output-root", tmp_path, "--run-name", "r", "--max_iters", "1", *TINY)
    run_dir = tmp_path / "r"

    code, record = _run(capsys, "eval", run_dir)
    assert code == EXIT_OK
    assert record["task"] == "link_prediction"
    assert (run_dir / "metrics.jsonl").read_text().count("\n") == 1

    code, out = _run(capsys, "export-embeddings", run_dir, "--out", tmp_path / "emb.npy", "--format", "npy")
    assert code == EXIT_OK
    assert (out["rows"], out["dim"]) == (read_dataset_info(dataset).fingerprint.n_nodes, 8)

    code, out = _run(capsys, "view-stats", run_dir, "--views", "2", "--node", "0")
    assert code == EXIT_OK
    assert out["statistics"]["n_views"] == 2
    assert "neighborhood" in out

    code, out = _run(capsys, "degree-profile", run_dir)
    assert code == EXIT_OK
    assert out["random"]["source"] == "random"


def test_eval_without_embeddings(tmp_path, capsys, dataset):
    _run(capsys, "train", dataset, "--output-root", tmp_path, "--run-name", "r", "--max_iters", "0", *TINY)
    (tmp_path / "r" / "embeddings.tsv").unlink()
    assert main(["eval", str(tmp_path / "r")]) == EXIT_ERROR


def test_eval_outside_run_directory(tmp_path, capsys):
    assert main(["eval", str(tmp_path)]) == EXIT_ERROR


def test_sweep(tmp_path, capsys, dataset):
    code, out = _run(
        capsys,
        "sweep",
        dataset,
        "--grid",
        "lr=0.001,0.01",
        "--grid",
        "layers=1",
        "--max_iters",
        "1",
        "--out",
        tmp_path / "sweep.tsv",
        *TINY,
    )
    assert code == EXIT_OK
    rows = out["rows"]
    assert len(rows) == 3
    assert rows[0]["eta"] == 1.0
    assert (tmp_path / "sweep.tsv").read_text().splitlines()[0].split("\t") == ["param", "value", "MRR", "eta"]


def test_sweep_unknown_param(capsys, dataset):
    assert main(["sweep", str(dataset), "--grid", "warmup=1,2"]) == EXIT_ERROR


def test_ablate(tmp_path, capsys, dataset):
    code, out = _run(
        capsys,
        "ablate",
        dataset,
        "--variants",
        "full",
        "wo_gan",
        "--output-root",
        tmp_path,
        "--run-name",
        "abl",
        "--max_iters",
        "1",
        *TINY,
    )
    assert code == EXIT_OK
    assert set(out["variants"]) == {"full", "wo_gan"}
    assert read_manifest(tmp_path / "abl-wo_gan").variant == "wo_gan"
    assert (tmp_path / "abl-full" / "metrics.jsonl").exists()


def test_replacement_curve(tmp_path, capsys, dataset):
    code, out = _run(
        capsys, "replacement-curve", dataset, "--rates", "0,0.5", "--max_iters", "1", "--out", tmp_path / "c.tsv", *TINY
    )
    assert code == EXIT_OK
    assert [point["rate"] for point in out["curve"]] == [0.0, 0.5]
    assert (tmp_path / "c.tsv").exists()
