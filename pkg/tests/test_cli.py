"""
Tests for the command-line surface
"""
import csv
import json
import math

import numpy as np
import pytest

from loewner import cli, config
from loewner.cli import build_contour_grid, main
from loewner.errors import ArgumentError, ConsistencyError, QuadratureBudgetError, UnboundedBracketError
from loewner.models import ProblemSpec

JUMP = ProblemSpec.from_levels(7, 2, 1.0, 10.0, 0.3, -1.6)
BLOW_UP_ARGS = ["--n", "7", "--k", "2", "--a", "1", "--b", "10", "--infinite"]
JUMP_ARGS = ["--n", "7", "--k", "2", "--a", "1", "--b", "10", "--c1", repr(JUMP.c1), "--c2", repr(JUMP.c2)]


def _json_out(capsys) -> dict:
    return json.loads(capsys.readouterr().out)


def test_classify_blow_up(capsys):
    assert main(["classify", *BLOW_UP_ARGS]) == config.EXIT_OK
    payload = _json_out(capsys)
    assert payload["regime"] == "InfiniteBC"
    assert payload["m"] == pytest.approx(math.sqrt(10.0), rel=1e-12)


def test_classify_jump(capsys):
    assert main(["classify", *JUMP_ARGS]) == config.EXIT_OK
    payload = _json_out(capsys)
    assert payload["regime"] == "Case4InteriorJump"
    assert 1.0 < payload["m"] < math.sqrt(10.0)
    assert payload["p_a"] == pytest.approx(0.3)


def test_solve_writes_profile_and_report(tmp_path):
    out = tmp_path / "jump"
    assert main(["solve", *JUMP_ARGS, "--out", str(out)]) == config.EXIT_OK
    with (out / config.PROFILE_FILENAME).open() as handle:
        rows = list(csv.reader(handle))
    assert tuple(rows[0]) == config.CSV_HEADER
    assert {row[-1] for row in rows[1:]} == {"L", "R"}
    report = json.loads((out / config.REPORT_FILENAME).read_text())
    assert report["classification"]["regime"] == "Case4InteriorJump"
    assert report["report"]["passed"]
    assert report["config"]["c1"] == JUMP.c1


def test_solve_is_deterministic(tmp_path):
    """A rerun reproduces both files byte for byte"""
    out = tmp_path / "blowup"
    assert main(["solve", *BLOW_UP_ARGS, "--out", str(out), "--points", "401"]) == config.EXIT_OK
    first = [(out / name).read_bytes() for name in (config.PROFILE_FILENAME, config.REPORT_FILENAME)]
    assert main(["solve", *BLOW_UP_ARGS, "--out", str(out), "--points", "401"]) == config.EXIT_OK
    second = [(out / name).read_bytes() for name in (config.PROFILE_FILENAME, config.REPORT_FILENAME)]
    assert first == second


@pytest.mark.parametrize("args", [BLOW_UP_ARGS, JUMP_ARGS])
def test_verify_accepts_written_profile(tmp_path, capsys, args):
    out = tmp_path / "run"
    assert main(["solve", *args, "--out", str(out)]) == config.EXIT_OK
    capsys.readouterr()
    profile = out / config.PROFILE_FILENAME
    assert main(["verify", *args, "--profile", str(profile)]) == config.EXIT_OK
    assert _json_out(capsys)["report"]["passed"]


def test_verify_rejects_flipped_slope(tmp_path, capsys):
    """One interior slope with the wrong sign fails the audit"""
    out = tmp_path / "run"
    assert main(["solve", *JUMP_ARGS, "--out", str(out)]) == config.EXIT_OK
    path = out / config.PROFILE_FILENAME
    with path.open(newline="") as handle:
        rows = list(csv.reader(handle))
    outer = [i for i, row in enumerate(rows) if row[-1] == "R"]
    row = rows[outer[len(outer) // 2]]
    row[3] = repr(-float(row[3]))
    with path.open("w", newline="") as handle:
        csv.writer(handle).writerows(rows)
    capsys.readouterr()
    assert main(["verify", *JUMP_ARGS, "--profile", str(path)]) == config.EXIT_AUDIT_FAIL
    report = _json_out(capsys)["report"]
    assert report["cone_violations"] >= 1


def test_verify_empty_profile_is_usage_error(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    assert main(["verify", *JUMP_ARGS, "--profile", str(path)]) == config.EXIT_USAGE


def test_verify_missing_profile_is_io_error(tmp_path):
    path = tmp_path / "absent.csv"
    assert main(["verify", *JUMP_ARGS, "--profile", str(path)]) == config.EXIT_IO


def test_contours_json(capsys):
    """H(0, -1) = -1 and the band |q| < 1 is masked"""
    assert main(["contours", "--resolution", "7"]) == config.EXIT_OK
    payload = _json_out(capsys)
    xi, q = np.array(payload["xi"]), np.array(payload["q"])
    H, mask = np.array(payload["H"]), np.array(payload["mask"])
    i, j = int(np.argmin(np.abs(q + 1.0))), int(np.argmin(np.abs(xi)))
    assert H[i, j] == pytest.approx(-1.0, abs=1e-14)
    assert not mask[i, j]
    assert np.array_equal(mask[:, 0], np.abs(q) < 1.0)


def test_contours_with_solution_path(tmp_path):
    out = tmp_path / "contours.json"
    assert main(["contours", *BLOW_UP_ARGS, "--with-solution", "--resolution", "11",
                 "--out", str(out)]) == config.EXIT_OK
    path = json.loads(out.read_text())["path"]
    assert path["max_drift"] < 1e-10
    assert len(path["xi"]) == len(path["q"])


def test_contours_csv(tmp_path):
    out = tmp_path / "contours.csv"
    assert main(["contours", "--resolution", "5", "--format", "csv", "--out", str(out)]) == config.EXIT_OK
    with out.open() as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["xi", "q", "H", "masked"]
    assert len(rows) == 26


def test_contour_grid_size_limit():
    with pytest.raises(ArgumentError):
        build_contour_grid(7, 2, (-1.0, 1.0), (-1.0, 1.0), 5000)


def test_sweep_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    code = main(["sweep", "--n", "7", "--k", "2", "--a", "1", "--b", "1.1", "--size", "2",
                 "--points", "401", "--threads", "2", "--format", "csv", "--out", str(out)])
    assert code == config.EXIT_OK
    with out.open() as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 4
    assert all(row["passed"] == "True" for row in rows)


@pytest.mark.parametrize("argv, code", [
    (["classify", "--n", "7", "--k", "2", "--a", "2", "--b", "1", "--infinite"], config.EXIT_USAGE),
    (["classify", "--n", "7", "--k", "9", "--a", "1", "--b", "2", "--infinite"], config.EXIT_USAGE),
    (["classify", "--n", "7", "--k", "2", "--a", "1", "--b", "2", "--c1", "1"], config.EXIT_USAGE),
    (["classify", "--n", "7", "--k", "2"], config.EXIT_USAGE),
    (["classify", "--n", "4", "--k", "2", "--a", "1", "--b", "2", "--c1", "2", "--c2", "1",
      "--classify-tol", "10"], config.EXIT_INCONSISTENT),
    (["contours", "--format", "csv"], config.EXIT_USAGE),
    (["--version"], config.EXIT_OK),
])
def test_exit_codes(argv, code):
    assert main(argv) == code


@pytest.mark.parametrize("error", [
    QuadratureBudgetError("kernel integral: limit reached", best=1.0, abs_error=1e-3),
    UnboundedBracketError("no sign change"),
    ConsistencyError("t decreases"),
])
def test_solver_failures_are_not_audit_failures(monkeypatch, error):
    """classify runs no audit, so numerical breakdowns get their own exit code"""
    def fail(*args, **kwargs):
        raise error

    monkeypatch.setattr(cli, "classify", fail)
    assert main(["classify", *BLOW_UP_ARGS]) == config.EXIT_INTERNAL
    assert config.EXIT_INTERNAL not in (config.EXIT_OK, config.EXIT_AUDIT_FAIL, config.EXIT_USAGE,
                                        config.EXIT_INCONSISTENT, config.EXIT_IO)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
