import json

import pytest

from config.build_config import BuildConfig
from src.lattice_tables import morphisms
from src.lattice_tables.cli import (
    EXIT_BUDGET,
    EXIT_OK,
    EXIT_REFUTED,
    EXIT_UNKNOWN,
    EXIT_USAGE,
    main,
)
from src.lattice_tables.pudlak import dot_edge_multiset, graph_from_json


def read(path):
    return json.loads(path.read_text())


def test_build_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "art"
    code = main(["build", "--lattice", "catalog:3-chain", "--stages", "1", "--out", str(out), "--format", "dot"])
    assert code == EXIT_OK
    for stage in (0, 1):
        assert (out / f"stage_{stage}.graph.json").exists()
        assert (out / f"stage_{stage}.table.json").exists()
        assert (out / f"stage_{stage}.dot").exists()
    graph = graph_from_json(read(out / "stage_1.graph.json"))
    assert dot_edge_multiset((out / "stage_1.dot").read_text()) == graph.edge_multiset()
    assert "stage 1: 11 nodes, 13 edges" in capsys.readouterr().out


def test_build_over_budget(tmp_path):
    code = main(["build", "--lattice", "catalog:2", "--stages", "2", "--budget-nodes", "10", "--out", str(tmp_path)])
    assert code == EXIT_BUDGET


def test_stats_defaults_to_plain_growth(capsys):
    assert main(["stats", "--lattice", "two", "--stages", "2"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[-1].split()[:3] == ["2", "20", "25"]


def test_usage_errors(capsys):
    assert main(["build"]) == EXIT_USAGE
    assert main(["build", "--lattice", "catalog:Z9"]) == EXIT_USAGE
    assert main(["check"]) == EXIT_USAGE
    assert main(["check", "nonsense"]) == EXIT_USAGE
    assert main(["check", "maltsev", "--input", "does/not/exist.json"]) == EXIT_USAGE
    assert main(["code", "--set", "0,x", "--n", "3"]) == EXIT_USAGE
    assert main(["build", "--lattice", "catalog:2", "--jobs", "0"]) == EXIT_USAGE


def test_corrupted_table_is_refuted(fixtures_dir, tmp_path, capsys):
    report = tmp_path / "maltsev.json"
    code = main(["check", "maltsev", "--input", str(fixtures_dir / "corrupted_table.json"), "--out", str(report)])
    assert code == EXIT_REFUTED
    payload = read(report)
    assert payload["verdict"] == "refuted"
    assert payload["result"]["counterexample"] == [0, 1, 0, 3]
    assert "counterexample [0, 1, 0, 3]" in capsys.readouterr().out


def test_representation_suite(tmp_path):
    assert main(["check", "representation", "--lattice", "catalog:3-chain", "--max-stage", "1"]) == EXIT_OK
    assert main(["check", "representation", "--lattice", "catalog:3-chain", "--max-stage", "0"]) == EXIT_UNKNOWN
    report = tmp_path / "rep.json"
    args = ["check", "representation", "--lattice", "two", "--max-stage", "0", "--diagnostic", "--out", str(report)]
    assert main(args) == EXIT_OK
    assert read(report)["result"]["catalog:2"]["diagnostic"]["outside"] == []


def test_budget_during_check_is_unknown(tmp_path):
    report = tmp_path / "r.json"
    code = main([
        "check", "representation", "--lattice", "catalog:M3", "--max-stage", "3",
        "--budget-nodes", "4", "--out", str(report),
    ])
    assert code == EXIT_UNKNOWN
    assert read(report)["verdict"] == "unknown"


def test_small_suites():
    assert main(["check", "adjoint", "--lattice", "catalog:B2"]) == EXIT_OK
    assert main(["check", "coherence", "--lattice", "catalog:N5", "--max-stage", "1"]) == EXIT_OK
    assert main(["check", "dual-con", "--count", "5", "--seed", "3"]) == EXIT_OK
    assert main(["check", "end-inclusion", "--count", "3"]) == EXIT_OK
    assert main(["check", "sequential", "--lattice", "catalog:2", "--stages", "1"]) == EXIT_OK


def test_embedding_suite(tmp_path):
    report = tmp_path / "emb.json"
    assert main(["check", "embedding", "--chain", "2>3-chain", "--out", str(report)]) == EXIT_OK
    embedding = read(report)["result"]["embedding"]
    assert embedding["stageMap"] == [0, 2]

    saved = tmp_path / "embedding.json"
    saved.write_text(json.dumps(embedding))
    assert main(["check", "embedding", "--input", str(saved)]) == EXIT_OK
    assert main(["check", "embedding", "--input", str(saved), "--corrupt"]) == EXIT_REFUTED


def test_assembly_suite():
    assert main(["check", "assembly", "--chain", "2>3-chain", "--stages", "1"]) == EXIT_OK


def test_failed_assembly_is_refuted(monkeypatch, tmp_path):
    def failing(embedding):
        return morphisms.EmbeddingReport(checks={"colors": False}, witnesses={"colors": [0, 1, "0"]})

    monkeypatch.setattr(morphisms, "verify_embedding", failing)
    report = tmp_path / "assembly.json"
    code = main(["check", "assembly", "--chain", "2>3-chain", "--stages", "1", "--out", str(report)])
    assert code == EXIT_REFUTED
    clause = read(report)["result"]["clauses"]["embedding"]
    assert clause == {"verdict": "refuted", "detail": "level 1 into level 0", "witness": ["colors"]}


def test_code_round_trip(tmp_path, capsys):
    pres_file = tmp_path / "pres.json"
    code = main(["code", "--set", "0,1,3", "--n", "5", "--scramble-seed", "11", "--decode", "--out", str(pres_file)])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "U = {0,1,3}" in out

    payload = read(pres_file)
    g0, e1 = payload["landmarks"]["g0"], payload["landmarks"]["e1"]
    payload["joins"][g0][e1] = payload["joins"][e1][g0] = g0
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps(payload))
    assert main(["code", "--presentation", str(broken), "--decode"]) == EXIT_REFUTED


def test_coding_suite():
    assert main(["check", "coding", "--n", "3"]) == EXIT_OK


def test_recheck_certificate(tmp_path):
    out = tmp_path / "art"
    assert main(["build", "--lattice", "catalog:2", "--stages", "0", "--out", str(out)]) == EXIT_OK
    certificate = tmp_path / "cert.json"
    certificate.write_text(json.dumps({"quadruple": [0, 1, 1, 0], "chain": [1, 0], "maps": [[0, 1]]}))
    table = str(out / "stage_0.table.json")
    assert main(["check", "--input", table, "--recheck-certificate", str(certificate)]) == EXIT_OK
    certificate.write_text(json.dumps({"quadruple": [0, 1, 1, 0], "chain": [1, 0], "maps": [[0, 0]]}))
    assert main(["check", "--input", table, "--recheck-certificate", str(certificate)]) == EXIT_REFUTED


def test_export_table_and_graph(tmp_path, capsys):
    out = tmp_path / "art"
    main(["build", "--lattice", "catalog:B2", "--stages", "1", "--out", str(out)])
    capsys.readouterr()
    dot = tmp_path / "g.dot"
    assert main(["export", "--input", str(out / "stage_1.graph.json"), "--out", str(dot)]) == EXIT_OK
    graph = graph_from_json(read(out / "stage_1.graph.json"))
    assert dot_edge_multiset(dot.read_text()) == graph.edge_multiset()
    assert main(["export", "--input", str(out / "stage_1.table.json"), "--format", "json"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out) == read(out / "stage_1.table.json")
    assert main(["export", "--input", str(out / "stage_1.table.json"), "--format", "dot"]) == EXIT_USAGE


def test_reports_are_deterministic(tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    for path in (first, second):
        assert main(["check", "coding", "--n", "2", "--jobs", "2", "--out", str(path)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


def test_environment_sets_flag_defaults(monkeypatch):
    monkeypatch.setenv("LATTAB_BUDGET_NODES", "10")
    assert BuildConfig.env("BUDGET_NODES", "0") == "10"
    assert main(["build", "--lattice", "catalog:2", "--stages", "2", "--out", "unused"]) == EXIT_BUDGET


def test_environment_sets_max_stage(monkeypatch):
    monkeypatch.setenv("LATTAB_MAX_STAGE", "0")
    assert main(["check", "representation", "--lattice", "catalog:3-chain"]) == EXIT_UNKNOWN
    monkeypatch.setenv("LATTAB_MAX_STAGE", "1")
    assert main(["check", "representation", "--lattice", "catalog:3-chain"]) == EXIT_OK


@pytest.mark.slow
def test_full_catalog_representation():
    assert main(["check", "representation", "--max-stage", "3", "--budget-nodes", "1000000", "--jobs", "2"]) == EXIT_OK
