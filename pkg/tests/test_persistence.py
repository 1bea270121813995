"""
Tests for profile tables and report files
"""
import json

import numpy as np
import pytest

from loewner.errors import ProfileFormatError
from loewner.models import ProblemSpec
from loewner.persistence import dumps, read_profile_csv, read_profile_rows, write_profile_csv
from loewner.solver import classify, solve

HEADER = "t,r,xi,xi_p,u,dlnu_dr,branch\n"
BLOW_UP = ProblemSpec.blow_up(7, 2, 1.0, 10.0)
JUMP = ProblemSpec.from_levels(7, 2, 1.0, 10.0, 0.3, -1.6)


@pytest.fixture(scope="module")
def blow_up():
    return solve(BLOW_UP)


def test_round_trip_keeps_every_value(tmp_path, blow_up):
    """17 significant digits reproduce the floats exactly"""
    regime, profile, solution = blow_up
    path = tmp_path / "profile.csv"
    write_profile_csv(path, profile, solution)
    loaded = read_profile_csv(path, BLOW_UP, regime)
    assert np.array_equal(loaded.t, profile.t)
    assert np.array_equal(loaded.xi_p, profile.xi_p)
    assert list(loaded.branch) == list(profile.branch)


def test_round_trip_recovers_boundary_times(tmp_path, blow_up):
    """Times to the boundary are rebuilt from the deepest rows"""
    regime, profile, solution = blow_up
    path = tmp_path / "profile.csv"
    write_profile_csv(path, profile, solution)
    loaded = read_profile_csv(path, BLOW_UP, regime)
    assert np.allclose(loaded.tau, profile.tau, rtol=1e-6, atol=0.0)


@pytest.mark.parametrize("body, row", [
    ("", 1),
    ("t,r,xi\n", 1),
    (HEADER + "0,1,0,-2,1,0,L\n", 2),
    (HEADER + "0,1,0,-2,1,0,L\n0,1,0,-2,1,L\n", 3),
    (HEADER + "0,1,0,-2,1,0,L\n0,1,zero,-2,1,0,L\n", 3),
    (HEADER + "0,1,0,-2,1,0,L\n0,1,0,nan,1,0,L\n", 3),
    (HEADER + "0,1,0,-2,1,0,L\n0,1,0,-2,1,0,Q\n", 3),
])
def test_malformed_rows_name_the_row(tmp_path, body, row):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(ProfileFormatError) as info:
        read_profile_rows(path)
    assert info.value.row == row
    assert str(info.value).startswith(f"row {row}:")


def test_decreasing_time_is_a_format_error(tmp_path, blow_up):
    regime, _, _ = blow_up
    path = tmp_path / "bad.csv"
    path.write_text(HEADER + "0.5,1,0,-2,1,0,R\n0.25,1,-1,-2,1,0,R\n")
    with pytest.raises(ProfileFormatError) as info:
        read_profile_csv(path, BLOW_UP, regime)
    assert info.value.row == 3


def _row(t, label, xi=-1.0):
    return f"{t},1,{xi},-2,1,0,{label}\n"


@pytest.mark.parametrize("labels, row", [
    ("SR", 2),
    ("RR", 2),
    ("LL", 3),
    ("LRLR", 4),
])
def test_blow_up_labels_name_the_first_bad_row(tmp_path, blow_up, labels, row):
    """Blow-up tables hold 'L' rows then 'R' rows; the first break is reported"""
    regime, _, _ = blow_up
    path = tmp_path / "bad.csv"
    path.write_text(HEADER + "".join(_row(0.1 * i, label) for i, label in enumerate(labels)))
    with pytest.raises(ProfileFormatError) as info:
        read_profile_csv(path, BLOW_UP, regime)
    assert info.value.row == row


def test_repeated_time_outside_a_jump_names_the_second_row(tmp_path):
    """A tie between two 'R' rows is reported at the later of the two"""
    regime = classify(JUMP)
    path = tmp_path / "bad.csv"
    path.write_text(HEADER + _row(0.0, "L") + _row(0.1, "R") + _row(0.2, "R") + _row(0.2, "R"))
    with pytest.raises(ProfileFormatError) as info:
        read_profile_csv(path, JUMP, regime)
    assert info.value.row == 5
    assert "outside a jump" in str(info.value)


def test_dumps_is_sorted_plain_json():
    text = dumps({"b": np.float64(1.5), "a": np.arange(3)})
    assert text.endswith("\n")
    assert list(json.loads(text)) == ["a", "b"]
    assert json.loads(text)["a"] == [0, 1, 2]


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
