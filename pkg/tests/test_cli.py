from __future__ import annotations

import json

import pytest

from apimention import cli
from apimention.errors import InvariantError

from conftest import AMBIGUITY, FIXTURES, GOLDEN, SCENARIOS

DB = str(FIXTURES / "small_db.jsonl")
MODEL = str(FIXTURES / "model.json")


def run(*args):
    return cli.main([str(a) for a in args])


class TestIngest:
    def test_ok(self, capsys):
        assert run("ingest", DB) == 0
        assert "7 APIs" in capsys.readouterr().out

    def test_normalized_output_is_stable(self, tmp_path):
        assert run("ingest", DB, "-o", tmp_path / "db.jsonl") == 0
        assert (tmp_path / "db.jsonl").read_bytes() == (FIXTURES / "small_db.jsonl").read_bytes()

    def test_bad_db(self, tmp_path, capsys):
        bad = tmp_path / "db.jsonl"
        bad.write_text('{"id": "a", "name": "a", "dependencies": ["missing"]}\n')
        assert run("ingest", bad) == 1
        assert "error:" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert run("ingest", tmp_path / "none.jsonl") == 1


class TestTrain:
    def test_reproduces_fixture_model(self, tmp_path, capsys):
        out = tmp_path / "m.json"
        code = run(
            "train", FIXTURES / "training" / "truth.jsonl", "--db", FIXTURES / "extended_db.jsonl",
            "--threads", FIXTURES / "training" / "threads", "-o", out,
        )
        assert code == 0
        assert out.read_bytes() == (FIXTURES / "model.json").read_bytes()
        assert "323 pairs" in capsys.readouterr().out

    def test_bad_corpus(self, tmp_path):
        bad = tmp_path / "c.jsonl"
        bad.write_text("not json\n")
        assert run("train", bad, "--db", DB, "--threads", SCENARIOS, "-o", tmp_path / "m.json") == 1


class TestResolve:
    def test_records_golden(self, tmp_path):
        out = tmp_path / "r.jsonl"
        assert run("resolve", SCENARIOS, "--db", DB, "--model", MODEL, "-o", out) == 0
        assert out.read_bytes() == (GOLDEN / "scenarios.records.jsonl").read_bytes()

    def test_stdout(self, capsys):
        assert run("resolve", SCENARIOS / "centrality.json", "--db", DB, "--model", MODEL) == 0
        (line,) = capsys.readouterr().out.splitlines()
        assert json.loads(line)["provenance"] == "INTRINSIC:centrality"

    def test_html_single(self, tmp_path):
        out = tmp_path / "c.html"
        assert run("resolve", SCENARIOS / "composition.json", "--db", DB, "--model", MODEL, "--format", "html", "-o", out) == 0
        assert out.read_text() == (GOLDEN / "composition.html").read_text()

    def test_html_directory(self, tmp_path):
        assert run("resolve", SCENARIOS, "--db", DB, "--model", MODEL, "--format", "html", "-o", tmp_path / "h") == 0
        assert sorted(p.name for p in (tmp_path / "h").iterdir()) == sorted(p.stem + ".html" for p in SCENARIOS.glob("*.json"))

    def test_html_several_needs_directory(self, capsys):
        assert run("resolve", SCENARIOS, "--db", DB, "--model", MODEL, "--format", "html") == 1

    def test_flags_override_config(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text('{"tau": 0.0}')
        run("resolve", SCENARIOS / "centrality.json", "--db", DB, "--model", MODEL, "--config", cfg, "--tau", "0.5")
        assert json.loads(capsys.readouterr().out)["provenance"] == "INTRINSIC:centrality"

    @pytest.mark.parametrize("extra", [["--window", "-1"], ["--tau", "2"], ["--format", "pdf"]])
    def test_bad_options(self, extra):
        assert run("resolve", SCENARIOS, "--db", DB, "--model", MODEL, *extra) == 1

    def test_bad_thread(self, tmp_path):
        bad = tmp_path / "t.json"
        bad.write_text("{")
        assert run("resolve", bad, "--db", DB, "--model", MODEL) == 1

    def test_invariant_violation(self, monkeypatch, capsys):
        def broken(*args, **kwargs):
            raise InvariantError("decision outside candidate list")

        monkeypatch.setattr(cli, "resolve_thread", broken)
        assert run("resolve", SCENARIOS, "--db", DB, "--model", MODEL) == 2
        assert "internal error" in capsys.readouterr().err


class TestEvaluate:
    def test_table_metrics_and_figure(self, tmp_path, capsys):
        metrics, fig = tmp_path / "m.jsonl", tmp_path / "scores.png"
        code = run(
            "evaluate", GOLDEN / "ambiguity.records.jsonl", AMBIGUITY / "truth.jsonl", "-o", metrics, "--figure", fig,
        )
        assert code == 0
        assert capsys.readouterr().out.splitlines()[-1].startswith("ALL")
        assert json.loads(metrics.read_text().splitlines()[-1])["thread_id"] == "*"
        assert fig.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_unknown_thread(self):
        assert run("evaluate", GOLDEN / "ambiguity.records.jsonl", SCENARIOS / "truth.jsonl") == 1


class TestRender:
    def test_matches_resolve_html(self, tmp_path):
        out = tmp_path / "p.html"
        code = run("render", GOLDEN / "scenarios.records.jsonl", SCENARIOS / "projection.json", "--db", DB, "-o", out)
        assert code == 0
        assert out.read_text() == (GOLDEN / "projection.html").read_text()

    def test_bad_records(self, tmp_path):
        bad = tmp_path / "r.jsonl"
        bad.write_text("{}\n")
        assert run("render", bad, SCENARIOS / "projection.json", "-o", tmp_path / "x.html") == 1


def test_unknown_command():
    assert run("frobnicate") == 1
