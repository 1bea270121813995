"""
Profile tables and report files

Profiles are CSV with the header t,r,xi,xi_p,u,dlnu_dr,branch and floats
written with 17 significant digits. Reports are JSON with sorted keys.
"""
import csv
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

from loewner import config
from loewner.cylinder import LevelSet
from loewner.errors import ConsistencyError, ProfileFormatError
from loewner.models import ProblemSpec
from loewner.quadrature import boundary_tail_time
from loewner.solver import CylinderProfile, RadialSolution, Regime

BRANCH_LABELS = ("L", "R", "S")


def format_float(value: float) -> str:
    return format(float(value), config.FLOAT_FORMAT)


def write_profile_csv(path: Path, profile: CylinderProfile, solution: RadialSolution) -> None:
    """Write one row per profile sample"""
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(config.CSV_HEADER)
        for i in range(profile.t.size):
            writer.writerow([
                format_float(profile.t[i]),
                format_float(solution.r[i]),
                format_float(profile.xi[i]),
                format_float(profile.xi_p[i]),
                format_float(solution.u[i]),
                format_float(solution.dlnu_dr[i]),
                profile.branch[i],
            ])


def _parse_float(text: str, row: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ProfileFormatError(row, f"{column}={text!r} is not a number")
    if not math.isfinite(value):
        raise ProfileFormatError(row, f"{column} is not finite")
    return value


def read_profile_rows(path: Path) -> Dict[str, np.ndarray]:
    """
    Parse a profile CSV into columns

    Raises:
        ProfileFormatError: empty file, wrong header, short rows, bad numbers
            or labels; row numbers count the header as row 1
    """
    path = Path(path)
    with path.open(newline="") as handle:
        rows = list(csv.reader(handle))
    if not rows:
        raise ProfileFormatError(1, "empty file")
    if tuple(cell.strip() for cell in rows[0]) != config.CSV_HEADER:
        raise ProfileFormatError(1, f"header {rows[0]} differs from {list(config.CSV_HEADER)}")
    if len(rows) < 3:
        raise ProfileFormatError(len(rows), "profile needs at least two data rows")
    columns: Dict[str, List] = {name: [] for name in config.CSV_HEADER}
    for number, cells in enumerate(rows[1:], start=2):
        if len(cells) != len(config.CSV_HEADER):
            raise ProfileFormatError(number, f"expected {len(config.CSV_HEADER)} fields, got {len(cells)}")
        for name, cell in zip(config.CSV_HEADER[:-1], cells[:-1]):
            columns[name].append(_parse_float(cell, number, name))
        label = cells[-1].strip()
        if label not in BRANCH_LABELS:
            raise ProfileFormatError(number, f"branch label {label!r} not in {BRANCH_LABELS}")
        columns["branch"].append(label)
    return {name: np.array(values) for name, values in columns.items()}


def _tail_times(t: np.ndarray, xi: np.ndarray, branch: np.ndarray, spec: ProblemSpec,
                regime: Regime) -> np.ndarray:
    """
    Time to the nearer boundary for blow-up rows, measured from the deepest row of each branch

    Blow-up profiles hold 'L' rows followed by 'R' rows; the first row that
    breaks this pattern is reported.
    """
    stray = np.flatnonzero(~np.isin(branch, ("L", "R")))
    if stray.size:
        raise ProfileFormatError(int(stray[0]) + 2, f"label {branch[stray[0]]!r} in a blow-up profile")
    right = branch == "R"
    if right[0]:
        raise ProfileFormatError(2, "blow-up profile has no 'L' rows")
    if not right[-1]:
        raise ProfileFormatError(branch.size + 1, "blow-up profile has no 'R' rows")
    late = np.flatnonzero(~right & (np.cumsum(right) > 0))
    if late.size:
        raise ProfileFormatError(int(late[0]) + 2, "'L' row after the first 'R' row")
    level = LevelSet(regime.H, spec.n, spec.k)
    tau = np.empty_like(t)
    for label in ("L", "R"):
        rows = np.flatnonzero(branch == label)
        end = rows[int(np.argmin(xi[rows]))]
        tau[rows] = boundary_tail_time(float(xi[end]), level) + np.abs(t[rows] - t[end])
    return tau


def read_profile_csv(path: Path, spec: ProblemSpec, regime: Regime) -> CylinderProfile:
    """Profile from a CSV written for spec; row order problems become format errors"""
    columns = read_profile_rows(path)
    t = columns["t"]
    backwards = np.flatnonzero(np.diff(t) < 0.0)
    if backwards.size:
        raise ProfileFormatError(int(backwards[0]) + 3, "t decreases")
    tau = _tail_times(t, columns["xi"], columns["branch"], spec, regime) if spec.infinite else None
    try:
        return CylinderProfile(t=t, xi=columns["xi"], xi_p=columns["xi_p"],
                               branch=columns["branch"], regime=regime, spec=spec, tau=tau)
    except ConsistencyError as e:
        # data rows start at row 2, after the header
        raise ProfileFormatError(2 + (e.index or 0), str(e))


def to_jsonable(value: Any) -> Any:
    """numpy scalars and arrays to plain JSON types"""
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    return value


def dumps(payload: Any) -> str:
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2) + "\n"


def write_json(path: Path, payload: Any) -> None:
    Path(path).write_text(dumps(payload))


def write_table(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """CSV table with 17-digit floats"""
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
