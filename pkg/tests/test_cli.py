import json
import os

import pytest

from spineforge.cli import (EXIT_CONFIG, EXIT_MISMATCH, EXIT_OK, export, main, parse_spine,
                            verify_file)
from spineforge.coxeter import golden_table


@pytest.fixture(scope="module")
def built(tmp_path_factory):
    out = tmp_path_factory.mktemp("build")
    assert main(["build", "--kind", "simplicial", "--d", "2", "--k", "3", "--seed", "11",
                 "--out", str(out)]) == EXIT_OK
    return out


def test_build_writes_all_files(built):
    assert sorted(os.listdir(built)) == ["report.json", "spine.dot", "spine.json", "trace.jsonl"]
    report = json.loads((built / "report.json").read_text())
    assert report["pass"] and report["R1"]["pass"]
    assert report["top_edge_required"] == 8
    assert "--" in (built / "spine.dot").read_text()


def test_build_prints_warning_for_short_top_edges(tmp_path, capsys):
    assert main(["build", "--kind", "simplicial", "--d", "2", "--seed", "11",
                 "--out", str(tmp_path)]) == EXIT_OK
    captured = capsys.readouterr()
    assert "topological edge shorter than required" in captured.err
    assert "R5=pass" in captured.out


def test_verify_round_trip(built, capsys):
    assert main(["verify", str(built / "spine.json")]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["fields_mismatched"] == []
    stored = json.loads((built / "report.json").read_text())
    for key in ("R1", "R2", "R3", "R4", "R5"):
        assert out["report"][key]["pass"] == stored[key]["pass"]


def test_export_round_trip(built):
    text = (built / "spine.json").read_bytes()
    s, _ = parse_spine(text.decode())
    assert export(s, "json") == text


def test_corrupted_fiber_fails_r2_at_that_edge(built, tmp_path, capsys):
    data = json.loads((built / "spine.json").read_text())
    data["fibers"][5] = data["fibers"][5][:-1]
    path = tmp_path / "spine.json"
    path.write_text(json.dumps(data))
    assert main(["verify", str(path), "--report", str(built / "report.json")]) == EXIT_MISMATCH
    err = capsys.readouterr().err
    assert "R2" in err
    fresh, bad = verify_file(str(path), str(built / "report.json"))
    assert not fresh["R2"]["pass"] and [5, "fiber", 1] in fresh["R2"]["witnesses"]
    assert "R2" in bad and "pass" in bad


def test_truncated_file_is_a_parse_error(built, tmp_path, capsys):
    path = tmp_path / "spine.json"
    path.write_bytes((built / "spine.json").read_bytes()[:200])
    assert main(["verify", str(path)]) == EXIT_CONFIG
    assert "parse error" in capsys.readouterr().err


def test_schema_error_names_pointer(built, tmp_path, capsys):
    data = json.loads((built / "spine.json").read_text())
    data["partition"]["ori"][3] = 0
    path = tmp_path / "spine.json"
    path.write_text(json.dumps(data))
    assert main(["verify", str(path)]) == EXIT_CONFIG
    assert "schema error at /partition/ori/3" in capsys.readouterr().err


def test_verify_trace_upto(built, capsys):
    trace = str(built / "trace.jsonl")
    assert main(["verify", "--trace", trace, "--upto", "2"]) == EXIT_OK
    part = json.loads(capsys.readouterr().out)
    assert main(["verify", "--trace", trace]) == EXIT_OK
    full = json.loads(capsys.readouterr().out)
    assert part["lines"] == 2
    assert part["glued_edges"] < full["glued_edges"] == full["edges"]


def test_cubical_d3_k3_is_config_error(tmp_path, capsys):
    assert main(["build", "--kind", "cubical", "--d", "3", "--k", "3",
                 "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "2k-1 >= 7" in capsys.readouterr().err


def test_missing_kind_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["build", "--d", "2"])
    assert info.value.code == 2


def test_bad_thread_count(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("SPINEFORGE_THREADS", "zero")
    assert main(["build", "--kind", "simplicial", "--d", "2", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "SPINEFORGE_THREADS" in capsys.readouterr().err


def test_stage_failure_exit(tmp_path, capsys):
    assert main(["build", "--kind", "simplicial", "--d", "2", "--model", "uniform",
                 "--out", str(tmp_path)]) == 3
    assert "stage match failed" in capsys.readouterr().err


def test_classify_single(capsys):
    assert main(["classify", "--kind", "simplex", "--m", "7", "--d", "2"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["class"] == "compact" and out["labels"] == [7, 3]


def test_classify_golden_table_reports_mismatches(capsys):
    status = main(["classify", "--format", "json"])
    data = json.loads(capsys.readouterr().out)["golden"]
    assert len(data) == len(golden_table())
    assert status == (EXIT_OK if all(r["ok"] for r in data) else EXIT_MISMATCH)


def test_analyze_writes_outputs(tmp_path, capsys):
    assert main(["analyze", "--k", "2", "--n", "1024", "--seed", "3", "--out", str(tmp_path),
                 "--format", "json,csv"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert json.loads((tmp_path / "analysis.json").read_text()) == out
    assert (tmp_path / "pieces.csv").read_text().startswith("length,positions\n")
    assert out["pieces_ratio"] == out["max_piece"] / 1024


def test_analyze_lift_on_spine(built, capsys):
    assert main(["analyze", "--spine", str(built / "spine.json"), "--beta", "0.05"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["lift"]["verdict"] is True


def test_unknown_format(tmp_path, capsys):
    assert main(["build", "--kind", "simplicial", "--d", "2", "--format", "svg",
                 "--out", str(tmp_path)]) == EXIT_CONFIG
