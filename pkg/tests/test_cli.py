import json
import subprocess
import sys

import pytest

from fixtures import make_cli_workspace, write_ndjson
from xdis.cli import build_parser, parse_and_run


def run_cli(*argv):
    return parse_and_run([str(a) for a in argv])


@pytest.fixture
def workspace(tmp_path):
    paths = make_cli_workspace(tmp_path)
    corpus = tmp_path / "corpus.ndjson"
    assert run_cli("ingest", "--input", paths["articles"], "--out", corpus) == 0
    paths["corpus"] = corpus
    return paths, tmp_path


def test_ingest_writes_corpus(workspace):
    paths, tmp_path = workspace
    lines = paths["corpus"].read_text().strip().splitlines()
    assert len(lines) == 4
    record = json.loads(lines[0])
    assert record["id"] == "a0"
    assert len(record["spans"]) == 6


def test_attr_import_round_trip(workspace):
    paths, tmp_path = workspace
    out = tmp_path / "store.ndjson"
    code = run_cli(
        "attr-import", "--input", paths["attributions"], "--corpus", paths["corpus"], "--out", out
    )
    assert code == 0
    assert len(out.read_text().strip().splitlines()) == 8


def test_agree_global_end_to_end(workspace):
    paths, tmp_path = workspace
    report_path = tmp_path / "report.json"
    flat_path = tmp_path / "report.csv"
    code = run_cli(
        "agree-global",
        "--corpus", paths["corpus"],
        "--attributions", paths["attributions"],
        "--out", report_path,
        "--flat", flat_path,
        "--k", "2,3",
    )
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["scope"] == "global"
    assert {m["metric"] for m in report["matrices"]} == {
        "feature_agreement", "rank_agreement", "pairwise_rank_agreement", "spearman",
    }
    assert flat_path.read_text().startswith("metric,method_a,method_b,k,value,count")


def test_agree_global_single_method_config_error(workspace, capsys):
    paths, tmp_path = workspace
    code = run_cli(
        "agree-global",
        "--corpus", paths["corpus"],
        "--attributions", paths["attributions"],
        "--out", tmp_path / "r.json",
        "--methods", "attention",
    )
    assert code == 1
    assert "at least two methods required" in capsys.readouterr().err


def test_unknown_subcommand_exits_1(capsys):
    assert run_cli("frobnicate") == 1
    assert "usage" in capsys.readouterr().err.lower()


def test_missing_subcommand_exits_1(capsys):
    assert run_cli() == 1
    assert "subcommand" in capsys.readouterr().err


def test_unknown_flag_exits_1(capsys):
    assert run_cli("ingest", "--nope", "x") == 1


def test_io_error_exits_2(workspace, capsys):
    paths, tmp_path = workspace
    code = run_cli(
        "ingest", "--input", tmp_path / "does-not-exist.ndjson", "--out", tmp_path / "o"
    )
    assert code == 2


EXPECTED_FLAGS = {
    "ingest": ["--input", "--out", "--budget", "--tokenizer"],
    "attr-import": ["--input", "--corpus", "--out", "--agg"],
    "agree-global": [
        "--corpus", "--attributions", "--out", "--flat", "--methods", "--k",
        "--metrics", "--agg", "--seed", "--jobs", "--rank-by",
    ],
    "segment": [
        "--corpus", "--embeddings", "--out", "--seed", "--restarts",
        "--budget", "--tokenizer", "--jobs",
    ],
    "agree-regional": [
        "--corpus", "--attributions", "--out", "--flat", "--methods", "--k",
        "--metrics", "--agg", "--seed", "--jobs", "--rank-by", "--embeddings",
        "--restarts", "--budget", "--tokenizer", "--segment-source",
        "--weighted-segments",
    ],
    "compare": ["--global", "--regional", "--out"],
    "export-viz": [
        "--corpus", "--attributions", "--article", "--method", "--summary",
        "--title", "--out",
    ],
}


def test_help_documents_every_flag(capsys):
    for command, flags in EXPECTED_FLAGS.items():
        assert run_cli(command, "--help") == 0
        text = capsys.readouterr().out
        for flag in flags:
            assert flag in text, (command, flag)


def test_segment_and_regional_pipeline(workspace):
    paths, tmp_path = workspace
    segments_path = tmp_path / "segments.ndjson"
    code = run_cli(
        "segment",
        "--corpus", paths["corpus"],
        "--embeddings", paths["embeddings"],
        "--out", segments_path,
    )
    assert code == 0
    segment_records = [json.loads(line) for line in segments_path.read_text().splitlines()]
    assert len(segment_records) == 4
    assert all(rec["segments"] == [[0, 1, 2], [3, 4, 5]] for rec in segment_records)

    report_path = tmp_path / "regional.json"
    code = run_cli(
        "agree-regional",
        "--corpus", paths["corpus"],
        "--attributions", paths["attributions"],
        "--embeddings", paths["embeddings"],
        "--out", report_path,
        "--segment-source", "slice",
        "--k", "2,3",
    )
    assert code == 0
    assert json.loads(report_path.read_text())["scope"] == "regional"


def test_compare_command(workspace):
    paths, tmp_path = workspace
    g, r, out = tmp_path / "g.json", tmp_path / "r.json", tmp_path / "cmp.json"
    assert run_cli(
        "agree-global", "--corpus", paths["corpus"], "--attributions", paths["attributions"],
        "--out", g, "--k", "2,3",
    ) == 0
    assert run_cli(
        "agree-regional", "--corpus", paths["corpus"], "--attributions", paths["attributions"],
        "--embeddings", paths["embeddings"], "--out", r, "--segment-source", "slice", "--k", "2,3",
    ) == 0
    assert run_cli("compare", "--global", g, "--regional", r, "--out", out) == 0
    comparison = json.loads(out.read_text())
    assert comparison["rows"]
    assert all("delta" in row for row in comparison["rows"])


def test_export_viz_payload(workspace):
    paths, tmp_path = workspace
    out = tmp_path / "payload.json"
    code = run_cli(
        "export-viz",
        "--corpus", paths["corpus"],
        "--attributions", paths["attributions"],
        "--article", "a0",
        "--method", "attention",
        "--summary", "model summary text",
        "--title", "demo article",
        "--out", out,
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["title"] == "demo article"
    assert len(payload["sentences"]) == len(payload["weights"]) == 6
    assert min(payload["weights"]) == 0.0 and max(payload["weights"]) == 1.0


def test_same_seed_same_bytes(workspace):
    paths, tmp_path = workspace
    outputs = []
    for run, jobs in (("one", 1), ("two", 8)):
        out = tmp_path / f"report-{run}.json"
        code = run_cli(
            "agree-global",
            "--corpus", paths["corpus"],
            "--attributions", paths["attributions"],
            "--out", out,
            "--seed", 7,
            "--jobs", jobs,
            "--k", "2,3",
        )
        assert code == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]


def test_module_entry_point(workspace):
    paths, tmp_path = workspace
    result = subprocess.run(
        [sys.executable, "-m", "xdis", "--help"], capture_output=True, text=True
    )
    assert result.returncode == 0
    assert "agree-global" in result.stdout


def test_duplicate_id_is_validation_error(tmp_path, capsys):
    path = tmp_path / "articles.ndjson"
    write_ndjson(path, [{"id": "a1", "text": "x."}, {"id": "a1", "text": "y."}])
    assert run_cli("ingest", "--input", path, "--out", tmp_path / "c") == 1
    assert "a1" in capsys.readouterr().err
