"""
Command-line interface

    python main.py classify --n 7 --k 2 --a 1 --b 10 --infinite
    python main.py solve    --n 7 --k 2 --a 1 --b 10 --infinite --out runs/blowup
    python main.py verify   --n 7 --k 2 --a 1 --b 10 --infinite --profile runs/blowup/profile.csv
    python main.py contours --out contours.csv --format csv
    python main.py sweep    --n 7 --k 2 --a 1 --b 1.1 --size 20 --threads 4 --out sweep.csv

Exit codes: 0 pass, 1 audit failure, 2 usage or parse error,
3 inconsistent data, 4 I/O failure, 5 numerical failure inside the solver.
"""
import argparse
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from loewner import __version__, config
from loewner.cylinder import first_integral, first_integral_drift
from loewner.errors import (
    ArgumentError,
    DomainError,
    InconsistentDataError,
    LoewnerError,
    ProfileFormatError,
)
from loewner.logger import SystemLogger, configure_logging, log_report_table
from loewner.models import GridControl, ProblemSpec
from loewner.persistence import (
    dumps,
    read_profile_csv,
    write_json,
    write_profile_csv,
    write_table,
)
from loewner.solver import build_profile, classify, reconstruct_u
from loewner.verification import audit, run_matrix

logger = logging.getLogger(__name__)
system_log = SystemLogger()

SUBCOMMANDS = ("classify", "solve", "verify", "contours", "sweep")


class RunConfig(BaseModel):
    """Everything a run depends on, echoed into every report"""
    subcommand: Literal["classify", "solve", "verify", "contours", "sweep"]
    n: Optional[int] = None
    k: Optional[int] = None
    a: Optional[float] = None
    b: Optional[float] = None
    c1: Optional[float] = None
    c2: Optional[float] = None
    infinite: bool = False
    quad_tol: float = Field(default=config.QUAD_TOL, gt=0.0)
    root_tol: float = Field(default=config.ROOT_TOL, gt=0.0)
    classify_tol: float = Field(default=config.CLASSIFY_TOL, ge=0.0)
    points: int = Field(default=config.BRANCH_POINTS, ge=50)
    out: Optional[str] = None
    profile: Optional[str] = None
    format: Literal["json", "csv"] = "json"
    threads: int = Field(default=1, ge=1)
    xi_min: float = config.CONTOUR_XI_RANGE[0]
    xi_max: float = config.CONTOUR_XI_RANGE[1]
    q_min: float = config.CONTOUR_Q_RANGE[0]
    q_max: float = config.CONTOUR_Q_RANGE[1]
    resolution: int = Field(default=config.CONTOUR_RESOLUTION, ge=2)
    with_solution: bool = False
    size: int = Field(default=config.SWEEP_SIZE, ge=1)
    c_min: float = Field(default=config.SWEEP_C_RANGE[0], gt=0.0)
    c_max: float = Field(default=config.SWEEP_C_RANGE[1], gt=0.0)

    @classmethod
    def from_namespace(cls, args: argparse.Namespace) -> "RunConfig":
        values = {key: value for key, value in vars(args).items()
                  if key in cls.model_fields and value is not None}
        return cls(**values)

    def to_spec(self) -> ProblemSpec:
        return ProblemSpec(n=self.n, k=self.k, a=self.a, b=self.b,
                           c1=self.c1, c2=self.c2, infinite=self.infinite)

    def grid(self) -> GridControl:
        return GridControl(points_per_branch=self.points, quad_tol=self.quad_tol, root_tol=self.root_tol)


@dataclass(frozen=True)
class ContourGrid:
    """
    Values of H on a (xi, q = xi') grid

    mask is True exactly where |q| < 1, the part of each contour no
    viscosity solution uses.
    """
    xi: np.ndarray
    q: np.ndarray
    H: np.ndarray  # shape (q.size, xi.size)
    mask: np.ndarray
    n: int
    k: int
    path: Optional[Dict] = None

    def to_dict(self) -> dict:
        payload = {
            "n": self.n,
            "k": self.k,
            "xi": self.xi.tolist(),
            "q": self.q.tolist(),
            "H": self.H.tolist(),
            "mask": self.mask.tolist(),
        }
        if self.path is not None:
            payload["path"] = self.path
        return payload

    def rows(self):
        for i, q in enumerate(self.q):
            for j, xi in enumerate(self.xi):
                yield [float(xi), float(q), float(self.H[i, j]), int(self.mask[i, j])]


def build_contour_grid(n: int, k: int, xi_range, q_range, resolution: int) -> ContourGrid:
    if resolution * resolution > config.MAX_CONTOUR_POINTS:
        raise ArgumentError(f"resolution {resolution} exceeds {int(math.sqrt(config.MAX_CONTOUR_POINTS))}")
    xi = np.linspace(xi_range[0], xi_range[1], resolution)
    q = np.linspace(q_range[0], q_range[1], resolution)
    xi_grid, q_grid = np.meshgrid(xi, q)
    return ContourGrid(xi=xi, q=q, H=first_integral(xi_grid, q_grid, n, k),
                       mask=np.abs(q_grid) < 1.0, n=n, k=k)


def _add_spec_args(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("--n", type=int, required=required, help="dimension n >= 3")
    parser.add_argument("--k", type=int, required=required, help="order 2 <= k <= n")
    parser.add_argument("--a", type=float, required=required, help="inner radius")
    parser.add_argument("--b", type=float, required=required, help="outer radius")
    parser.add_argument("--c1", type=float, help="boundary value on |x| = a")
    parser.add_argument("--c2", type=float, help="boundary value on |x| = b")
    parser.add_argument("--infinite", action="store_true", help="u = +infinity on both spheres")


def _add_solver_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--quad-tol", dest="quad_tol", type=float)
    parser.add_argument("--root-tol", dest="root_tol", type=float)
    parser.add_argument("--classify-tol", dest="classify_tol", type=float)
    parser.add_argument("--points", type=int, help="samples per profile branch")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="loewner", description="Radial sigma_k Loewner-Nirenberg solutions on annuli")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", dest="log_level", default="WARNING")
    parser.add_argument("--log-file", dest="log_file")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("classify", help="decide the solution shape")
    _add_spec_args(p)
    _add_solver_args(p)

    p = sub.add_parser("solve", help="build, audit and write a profile")
    _add_spec_args(p)
    _add_solver_args(p)
    p.add_argument("--out", default="out", help="output directory")

    p = sub.add_parser("verify", help="audit a profile CSV")
    _add_spec_args(p)
    _add_solver_args(p)
    p.add_argument("--profile", required=True, help="profile CSV to audit")
    p.add_argument("--out", help="report path, stdout if omitted")

    p = sub.add_parser("contours", help="export H on a (xi, xi') grid")
    _add_spec_args(p, required=False)
    _add_solver_args(p)
    p.add_argument("--xi-min", dest="xi_min", type=float)
    p.add_argument("--xi-max", dest="xi_max", type=float)
    p.add_argument("--q-min", dest="q_min", type=float)
    p.add_argument("--q-max", dest="q_max", type=float)
    p.add_argument("--resolution", type=int)
    p.add_argument("--with-solution", dest="with_solution", action="store_true")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--out", help="output file, stdout if omitted")

    p = sub.add_parser("sweep", help="classify and audit an N x N grid of (c1, c2)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    _add_solver_args(p)
    p.add_argument("--size", type=int)
    p.add_argument("--c-min", dest="c_min", type=float)
    p.add_argument("--c-max", dest="c_max", type=float)
    p.add_argument("--threads", type=int)
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--out", help="output file, stdout if omitted")
    return parser


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_classify(cfg: RunConfig) -> int:
    spec = cfg.to_spec()
    regime = classify(spec, cfg.classify_tol, cfg.root_tol, cfg.quad_tol)
    payload = regime.to_dict()
    payload.update({"T": spec.T, "p_a": spec.p_a, "p_b": spec.p_b})
    if regime.t_m is not None:
        payload["m"] = spec.sqrt_ab * math.exp(regime.t_m)
    _emit(dumps(payload), None)
    return config.EXIT_OK


def cmd_solve(cfg: RunConfig) -> int:
    spec = cfg.to_spec()
    regime = classify(spec, cfg.classify_tol, cfg.root_tol, cfg.quad_tol)
    profile = build_profile(spec, regime, cfg.grid())
    solution = reconstruct_u(profile)
    report = audit(profile, solution)
    log_report_table(report, system_log)

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_profile_csv(out / config.PROFILE_FILENAME, profile, solution)
    write_json(out / config.REPORT_FILENAME, {
        "config": cfg.model_dump(),
        "classification": regime.to_dict(),
        "report": report.model_dump(),
    })
    system_log.info(f"wrote {out / config.PROFILE_FILENAME} ({profile.t.size} rows)")
    return config.EXIT_OK if report.passed else config.EXIT_AUDIT_FAIL


def cmd_verify(cfg: RunConfig) -> int:
    spec = cfg.to_spec()
    regime = classify(spec, cfg.classify_tol, cfg.root_tol, cfg.quad_tol)
    profile = read_profile_csv(Path(cfg.profile), spec, regime)
    report = audit(profile)
    log_report_table(report, system_log)
    _emit(dumps({"config": cfg.model_dump(), "report": report.model_dump()}), cfg.out)
    return config.EXIT_OK if report.passed else config.EXIT_AUDIT_FAIL


def cmd_contours(cfg: RunConfig) -> int:
    n = cfg.n if cfg.n is not None else config.CONTOUR_N
    k = cfg.k if cfg.k is not None else config.CONTOUR_K
    grid = build_contour_grid(n, k, (cfg.xi_min, cfg.xi_max), (cfg.q_min, cfg.q_max), cfg.resolution)
    if cfg.with_solution:
        spec = cfg.to_spec()
        regime = classify(spec, cfg.classify_tol, cfg.root_tol, cfg.quad_tol)
        profile = build_profile(spec, regime, cfg.grid())
        drift = first_integral_drift(profile.xi, profile.xi_p, regime.H, spec.n, spec.k)
        grid = ContourGrid(grid.xi, grid.q, grid.H, grid.mask, n, k, path={
            "H": regime.H,
            "xi": profile.xi.tolist(),
            "q": profile.xi_p.tolist(),
            "max_drift": float(np.max(drift)),
        })
    if cfg.format == "csv":
        if not cfg.out:
            raise ArgumentError("csv contour export needs --out")
        write_table(Path(cfg.out), ("xi", "q", "H", "masked"), grid.rows())
    else:
        _emit(dumps(grid.to_dict()), cfg.out)
    return config.EXIT_OK


def sweep_specs(cfg: RunConfig) -> List[ProblemSpec]:
    """Row-major (c1, c2) grid, log-spaced on [c_min, c_max]"""
    values = np.geomspace(cfg.c_min, cfg.c_max, cfg.size)
    return [ProblemSpec(n=cfg.n, k=cfg.k, a=cfg.a, b=cfg.b, c1=float(c1), c2=float(c2))
            for c1 in values for c2 in values]


SWEEP_HEADER = ("c1", "c2", "regime", "borderline", "jump_radius", "passed")


def cmd_sweep(cfg: RunConfig) -> int:
    specs = sweep_specs(cfg)
    system_log.info(f"sweeping {len(specs)} problems on {cfg.threads} thread(s)")
    reports = run_matrix(specs, cfg.grid(), cfg.threads)
    rows = [[spec.c1, spec.c2, report.regime, report.borderline, report.jump_radius, report.passed]
            for spec, report in zip(specs, reports)]
    if cfg.format == "csv":
        if not cfg.out:
            raise ArgumentError("csv sweep output needs --out")
        write_table(Path(cfg.out), SWEEP_HEADER, rows)
    else:
        _emit(dumps({"config": cfg.model_dump(),
                     "rows": [dict(zip(SWEEP_HEADER, row)) for row in rows]}), cfg.out)
    failed = sum(1 for report in reports if not report.passed)
    if failed:
        system_log.warning(f"{failed} of {len(reports)} audits failed")
    return config.EXIT_OK if failed == 0 else config.EXIT_AUDIT_FAIL


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "classify": cmd_classify,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "contours": cmd_contours,
    "sweep": cmd_sweep,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    configure_logging(args.log_level, args.log_file)

    try:
        cfg = RunConfig.from_namespace(args)
        return COMMANDS[cfg.subcommand](cfg)
    except ValidationError as e:
        system_log.error(f"invalid arguments: {e}")
        return config.EXIT_USAGE
    except ProfileFormatError as e:
        system_log.error(f"malformed profile: {e}")
        return config.EXIT_USAGE
    except InconsistentDataError as e:
        system_log.error(f"inconsistent data: {e}")
        return config.EXIT_INCONSISTENT
    except (ArgumentError, DomainError) as e:
        system_log.error(str(e))
        return config.EXIT_USAGE
    except OSError as e:
        system_log.error(f"I/O failure: {e}")
        return config.EXIT_IO
    except LoewnerError as e:
        system_log.error(f"solver failure {type(e).__name__}: {e}")
        return config.EXIT_INTERNAL
