import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from qkdwave.bench import parse_pattern
from qkdwave.cli import EXIT_BUDGET, EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE, dump_json, main, sci

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"
PATTERNS_M1 = str(SCENARIOS / "patterns_m1.json")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_sci_format():
    assert sci(1234.5) == "1.23450e+03"
    assert sci(0.0) == "0.00000e+00"
    assert sci(float("inf")) == "inf"
    assert sci("undefined") == "undefined"


def test_dump_json_keeps_numbers_numeric():
    text = dump_json({"a": 1.5, "b": "x", "c": [2.0, None], "d": 3})
    assert '"a": 1.50000e+00' in text
    doc = json.loads(text)
    assert doc == {"a": 1.5, "b": "x", "c": [2.0, None], "d": 3}


def test_optimize_text(capsys):
    code, out, _ = run(capsys, "optimize", "--scenario", PATTERNS_M1)
    assert code == EXIT_OK
    assert "pattern_link:" in out
    assert "feasible: True" in out


def test_optimize_json_matches_pattern(capsys):
    code, out, _ = run(capsys, "optimize", "--scenario", PATTERNS_M1, "--format", "json")
    doc = json.loads(out)
    q, c = parse_pattern(doc["pattern_link"])
    rows = doc["rows"]
    assert [r["index"] for r in rows if r["kind"] == "quantum"] == list(q)
    assert [r["index"] for r in rows if r["kind"] == "classical_a"] == list(c)
    assert doc["total_rate_bps"] == pytest.approx(sum(r["rate_bps"] for r in rows if r["kind"] == "quantum"))


@pytest.mark.parametrize("method", ["algorithm1", "brute-force", "conventional"])
def test_optimize_methods(capsys, method):
    code, out, _ = run(capsys, "optimize", "--scenario", PATTERNS_M1, "--method", method, "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out)["method"].replace("_", "-").startswith(method.split("-")[0])


def test_csv_has_meta_block_then_table(capsys, tmp_path):
    out_file = tmp_path / "re.csv"
    code, out, _ = run(
        capsys, "sweep-re", "--scenario", str(SCENARIOS / "re_l45.json"), "--format", "csv", "--out", str(out_file)
    )
    assert code == EXIT_OK and out == ""
    meta, table = out_file.read_text().split("\n\n")
    assert meta.splitlines()[0] == "key,value"
    rows = list(csv.DictReader(io.StringIO(table)))
    assert rows[0].keys() == {"m_quantum", "n_classical", "rate_proposed_bps", "rate_conventional_bps", "re_percent"}
    assert len(rows) == 5 * 18 - 1  # M=5, N=18 does not fit in 22 slots
    for r in rows:
        if r["re_percent"] not in ("undefined", "infeasible"):
            assert float(r["re_percent"]) >= 0


def test_pattern_command(capsys):
    code, out, _ = run(capsys, "pattern", "--scenario", PATTERNS_M1, "--format", "csv")
    assert code == EXIT_OK
    table = out.split("\n\n")[1]
    rows = list(csv.DictReader(io.StringIO(table)))
    assert [int(r["n_classical"]) for r in rows] == list(range(1, 20))


def test_nmax_command(capsys):
    code, out, _ = run(capsys, "nmax", "--scenario", str(SCENARIOS / "re_l65.json"), "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_OK
    assert all(r["n_max_proposed"] >= r["n_max_conventional"] for r in doc["rows"])


def test_compare_command_reports_knee(capsys):
    code, out, _ = run(capsys, "compare", "--scenario", str(SCENARIOS / "knee_l70.json"), "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out)["knee_m"] == 2


def test_compare_budget_refusal(capsys):
    code, _, _ = run(capsys, "compare", "--scenario", str(SCENARIOS / "knee_l70.json"), "--budget", "10")
    assert code == EXIT_BUDGET


def test_brute_force_budget_refusal(capsys):
    code, _, err = run(capsys, "optimize", "--scenario", PATTERNS_M1, "--method", "brute-force", "--budget", "5")
    assert code == EXIT_BUDGET
    assert "refused" in err


def test_rate_curve_command(capsys):
    code, out, _ = run(capsys, "rate-curve", "--scenario", str(SCENARIOS / "rate_curve_l45.json"), "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_OK and len(doc["rows"]) == 61
    assert doc["rows"][0]["rate_exact_bps"] == pytest.approx(1.52098e7, rel=1e-5)


def test_unreachable_floor_is_infeasible(capsys):
    code, _, err = run(capsys, "optimize", "--scenario", PATTERNS_M1, "--rth", "1e9")
    assert code == EXIT_INFEASIBLE
    assert "infeasible" in err


def test_floor_missed_by_plan_is_infeasible(capsys):
    code, _, err = run(capsys, "optimize", "--scenario", PATTERNS_M1, "--rth", "1.5e7")
    assert code == EXIT_INFEASIBLE


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus", "--scenario", PATTERNS_M1],
        ["optimize"],
        ["optimize", "--scenario", "/nonexistent.json"],
        ["optimize", "--scenario", PATTERNS_M1, "--format", "xml"],
    ],
)
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_USAGE
    assert err.startswith("plan:")


def test_bad_raman_csv_is_usage_error(capsys, tmp_path):
    bad = tmp_path / "r.csv"
    bad.write_text("shift_nm,beta_per_km_nm\n0,-1\n1,1\n")
    code, _, _ = run(capsys, "optimize", "--scenario", PATTERNS_M1, "--raman", str(bad))
    assert code == EXIT_USAGE


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qkdwave", "optimize", "--scenario", PATTERNS_M1],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert "total_rate_bps" in proc.stdout
