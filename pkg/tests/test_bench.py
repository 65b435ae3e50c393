import csv
import io
import json
import math

import pytest

from apartlearn import bench
from apartlearn.bench import MetricsRow, aggregate, main, parse_random, ratio_report, resets_ceiling
from apartlearn.dot import render_dot
from apartlearn.mealy import random_machine


def row(model="m", **counters):
    base = dict(n=5, k=2, learn_resets=0, learn_inputs=0, test_resets=0, test_inputs=0, eq_queries=0,
                success=True)
    base.update(counters)
    return MetricsRow(model=model, **base)


def test_cli_random_five_rows(tmp_path, capsys):
    out = tmp_path / "m.csv"
    code = main(["--random", "n=20,k=3,p=3", "--variant", "ads", "--oracle", "exact",
                 "--repeats", "5", "--seed", "7", "--out", str(out)])
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 5
    assert all(r["success"] == "True" for r in rows)
    assert list(rows[0]) == [f for f in MetricsRow.__dataclass_fields__]
    assert "learn_resets" in capsys.readouterr().out


def test_cli_missing_model(capsys):
    code = main(["--model", "missing.dot"])
    assert code == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "file-not-found"


def test_cli_byte_identical(tmp_path):
    args = ["--random", "n=10,k=2,p=3", "--oracle", "randomwalk", "--repeats", "3", "--seed", "4",
            "--policy", "any"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--jobs", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_cli_dot_model_json(tmp_path, capsys):
    path = tmp_path / "target.dot"
    path.write_text(render_dot(random_machine(6, 2, 2, 3)))
    code = main(["--model", str(path), "--format", "json", "--variant", "plain"])
    assert code == 0
    data = json.loads(capsys.readouterr().out)
    assert data[0]["model"] == "target" and data[0]["n"] == 6 and data[0]["success"] is True
    assert data[0]["wall_time"] is None


def test_cli_timing_fills_wall_time(capsys):
    assert main(["--random", "n=4,k=2,p=2", "--timing"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert float(rows[0]["wall_time"]) >= 0


def test_cli_parse_error(tmp_path, capsys):
    path = tmp_path / "bad.dot"
    path.write_text("digraph g {\n s -> t [label=\"nolabel\"];\n}\n")
    assert main(["--model", str(path)]) == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "parse-error" and err["line"] == 2


def test_cli_budget_failure(capsys):
    assert main(["--random", "n=10,k=3,p=3", "--max-queries", "3"]) == 3
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "budget-exceeded"


def test_cli_verbose_events(capsys):
    assert main(["--random", "n=3,k=2,p=2", "--verbose"]) == 0
    err = capsys.readouterr().err
    events = [json.loads(line) for line in err.splitlines() if line.startswith("{")]
    assert events and all(e["norm_after"] > e["norm_before"] for e in events)


def test_cli_needs_a_model(capsys):
    assert main([]) == 2
    assert "usage" in capsys.readouterr().err


def test_parse_random_errors():
    assert parse_random("n=3,k=2,p=2").n == 3
    import argparse
    for bad in ("n=3,k=2", "n=3,k=2,p=x", "n=3,k=2,q=1"):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_random(bad)


def test_aggregate_single_row():
    stats = aggregate([row(learn_resets=7)])["m"]["learn_resets"]
    assert stats == {"mean": 7, "stddev": 0, "min": 7, "max": 7}


def test_aggregate_two_equal_rows():
    stats = aggregate([row(eq_queries=3), row(eq_queries=3)])["m"]["eq_queries"]
    assert stats["stddev"] == 0 and stats["mean"] == 3


def test_aggregate_three_rows_by_hand():
    stats = aggregate([row(learn_inputs=2), row(learn_inputs=4), row(learn_inputs=9)])["m"]["learn_inputs"]
    # mean 5; squared deviations 9, 1, 16
    assert stats["mean"] == 5
    assert stats["stddev"] == pytest.approx(math.sqrt(26 / 3))
    assert (stats["min"], stats["max"]) == (2, 9)


def test_aggregate_groups_by_model():
    summary = aggregate([row("a", learn_resets=1), row("b", learn_resets=5), row("a", learn_resets=3)])
    assert summary["a"]["learn_resets"]["mean"] == 2
    assert summary["b"]["learn_resets"]["mean"] == 5


def test_ratio_report_flags():
    report = ratio_report([row(n=5, k=2, learn_resets=20), row(n=5, k=2, learn_resets=50)])
    assert report[0][1] == 2 and not report[0][2]
    assert report[1][1] == 5 and report[1][2]


def test_ceiling():
    assert resets_ceiling(10, 2, 1) == bench.CEILING_C * 200 + 10
    assert resets_ceiling(10, 2, 8) == bench.CEILING_C * 200 + 30 + 10
