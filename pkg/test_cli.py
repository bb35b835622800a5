"""Checks for the command-line surface: verbs, formats and exit codes."""

import csv
import io
import json
import tempfile
from pathlib import Path

from src.bounds.taylor import choose_degree
from src.cli.report import csv_columns
from src.cli.runner import EXIT_INVALID, EXIT_OK, EXIT_UNCONVERGED, run


def _run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_count_json():
    """count on e^z + 1 over B_10 at delta = 1/2."""
    code, out, _ = _run("count", "--map", "builtin:exp_shift", "--n", "1", "--r", "10",
                        "--delta", "0.5", "--res", "64", "--format", "json", "--threads", "1")
    assert code == EXIT_OK
    report = json.loads(out)
    assert set(report) == {"tool", "tool_version", "command", "config", "result", "verdicts"}
    assert report["command"] == "count"
    assert report["result"]["zeta"] == 4 and report["result"]["zeta0"] == 4
    assert report["config"]["delta"] == 0.5 and report["config"]["map_spec"] == "builtin:exp_shift"
    print("✅ zeta = zeta0 = 4 with the resolved config embedded")


def test_count_with_bound():
    code, out, _ = _run("count", "--r", "10", "--delta", "0.5", "--a", "2", "--threads", "1")
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["verdicts"]["zeta_within_bezout_bound"] is True
    assert report["result"]["bound_check"]["measured"] == 4
    print("✅ Measured zeta checked against the explicit bound")


def test_bezout_bound():
    """Pure bound arithmetic, JSON and CSV."""
    code, out, _ = _run("bezout-bound", "--n", "2", "--a", "2", "--log2mu", "20", "--delta", "0.1")
    assert code == EXIT_OK
    result = json.loads(out)["result"]
    k = choose_degree(2.0, 20.0, 0.1)
    assert k == 26
    assert result["degree"] == k and result["tau_bound"] == k * k
    assert result["bezout_bound"] == k ** 2 + 5 * k * (10 * k) ** 2
    assert result["zeta_d_bound"] == 3 * k * (3 + 2 * k) ** 3
    print(f"✅ Degree {k}: bezout {result['bezout_bound']}, tau {result['tau_bound']}")

    code, out, _ = _run("bezout-bound", "--n", "1", "--a", "2", "--log2mu", "20", "--delta", "0.1",
                        "--b", "0.5", "--format", "csv")
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == csv_columns("bezout-bound")
    assert len(rows) == 2 and rows[1][-1] != ""
    print("✅ CSV row carries the near-holomorphic bound")


def test_invalid_input():
    """Bad flags exit 2 with a readable message on stderr."""
    code, out, err = _run("count", "--r", "10", "--delta", "-1")
    assert code == EXIT_INVALID and out == ""
    assert "delta must be positive" in err
    print(f"✅ Negative delta: {err.splitlines()[0]}")

    code, _, err = _run("count", "--delta", "0.5")
    assert code == EXIT_INVALID and "--r" in err

    code, _, err = _run("count", "--map", "builtin:bessel", "--r", "1", "--delta", "0.1")
    assert code == EXIT_INVALID

    code, _, _ = _run("bezout-bound", "--a", "2", "--log2mu", "20", "--delta", "0.1", "--b", "1.0")
    assert code == EXIT_INVALID

    code, _, _ = _run("bezout-bound", "--a", "1", "--log2mu", "20", "--delta", "0.1")
    assert code == EXIT_INVALID
    print("✅ Missing flags, unknown maps and out-of-range values exit 2")

    assert _run("frobnicate")[0] == EXIT_INVALID
    assert _run("count", "--no-such-flag")[0] == EXIT_INVALID
    print("✅ Unknown verbs and flags exit 2")


def test_strict_unconverged():
    argv = ["count", "--r", "10", "--delta", "0.5", "--res", "32", "--max-res", "32", "--threads", "1"]
    code, out, _ = _run(*argv)
    assert code == EXIT_OK
    assert json.loads(out)["result"]["converged"] is False

    code, out, _ = _run(*argv, "--strict")
    assert code == EXIT_UNCONVERGED
    assert json.loads(out)["result"]["converged"] is False
    print("✅ --strict turns an unconverged count into exit 3, report still written")


def test_output_file():
    with tempfile.TemporaryDirectory() as folder:
        target = Path(folder) / "nested" / "report.json"
        code, out, _ = _run("mu", "--map", "builtin:polynomial", "--coeffs", "0,0,0,1", "--r", "2",
                            "--budget", "64", "--output", str(target))
        assert code == EXIT_OK and out == ""
        report = json.loads(target.read_text())
    assert abs(report["result"]["log2_mu_lower"] - 3.0) < 1e-9
    print("✅ Report written to --output, stdout left empty")


def test_cs_verify_csv():
    code, out, _ = _run("cs-verify", "--k-min", "4", "--k-max", "6", "--deltas", "0.1,0.25",
                        "--format", "csv", "--threads", "1")
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == csv_columns("cs-verify")
    assert len(rows) == 1 + 3 * 2
    print(f"✅ cs-verify table with {len(rows) - 1} rows")

    code, out, _ = _run("cs-verify", "--k-min", "10", "--k-max", "10", "--threads", "1")
    report = json.loads(out)
    assert report["verdicts"]["within_envelopes"] is True
    assert report["verdicts"]["jacobian_decay"] is True
    assert report["verdicts"]["falsification_cutoff"] == 2
    row = report["result"]["rows"][0]
    assert (row["zeta_lower"], row["zeta_upper"]) == (8, 9)
    print("✅ cs-verify verdicts at r = 2^10")

    assert _run("cs-verify", "--k-min", "6", "--k-max", "4")[0] == EXIT_INVALID


def test_determinism():
    """Same config, same bytes, whatever the thread count."""
    argv = ["count", "--r", "10", "--delta", "0.5", "--res", "64"]
    first = _run(*argv, "--threads", "1")[1]
    again = _run(*argv, "--threads", "1")[1]
    assert first == again
    parallel = _run(*argv, "--threads", "4")[1]
    assert first == parallel
    assert "threads" not in json.loads(first)["config"]
    print("✅ count report byte-identical for 1 and 4 threads")

    argv = ["cs-verify", "--k-min", "4", "--k-max", "6", "--deltas", "0.1,0.25"]
    for fmt in ("json", "csv"):
        serial = _run(*argv, "--format", fmt, "--threads", "1")[1]
        assert serial == _run(*argv, "--format", fmt, "--threads", "4")[1]
    print("✅ cs-verify report and table byte-identical for 1 and 4 threads")


if __name__ == "__main__":
    print("🧪 Testing the command line\n")
    for check in (test_count_json, test_count_with_bound, test_bezout_bound, test_invalid_input,
                  test_strict_unconverged, test_output_file, test_cs_verify_csv, test_determinism):
        print("=" * 50)
        print(check.__doc__.strip() if check.__doc__ else check.__name__)
        print("=" * 50)
        check()
        print()
    print("🎉 CLI checks completed!")
