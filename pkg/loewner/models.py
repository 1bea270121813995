"""
Input models shared across the solver

ProblemSpec describes one boundary value problem on the annulus
{a < |x| < b} in R^n. GridControl tunes how profiles are sampled.
"""
import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from loewner import config


class ProblemSpec(BaseModel):
    """Dimension, order, radii and boundary data of one annulus problem"""
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=3)
    k: int = Field(ge=2)
    a: float = Field(gt=0)
    b: float = Field(gt=0)
    c1: Optional[float] = Field(default=None, gt=0)
    c2: Optional[float] = Field(default=None, gt=0)
    infinite: bool = False

    @model_validator(mode="after")
    def _check_consistency(self) -> "ProblemSpec":
        if self.k > self.n:
            raise ValueError(f"k={self.k} exceeds n={self.n}")
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or self.a >= self.b:
            raise ValueError(f"radii must satisfy 0 < a < b, got a={self.a}, b={self.b}")
        if self.infinite:
            if self.c1 is not None or self.c2 is not None:
                raise ValueError("infinite boundary data take no c1/c2")
        elif self.c1 is None or self.c2 is None:
            raise ValueError("finite boundary data need both c1 and c2")
        return self

    @classmethod
    def blow_up(cls, n: int, k: int, a: float, b: float) -> "ProblemSpec":
        """Problem with u = +infinity on both boundary spheres"""
        return cls(n=n, k=k, a=a, b=b, infinite=True)

    @classmethod
    def from_levels(cls, n: int, k: int, a: float, b: float, p_a: float, p_b: float) -> "ProblemSpec":
        """Problem whose boundary data sit at cylinder heights p_a, p_b"""
        alpha = (n - 2) / 2.0
        c1 = math.exp(-alpha * (p_a + math.log(a)))
        c2 = math.exp(-alpha * (p_b + math.log(b)))
        return cls(n=n, k=k, a=a, b=b, c1=c1, c2=c2)

    @property
    def is_infinite(self) -> bool:
        return self.infinite

    @property
    def symmetric(self) -> bool:
        """Invariant under r -> ab/r"""
        if self.infinite:
            return True
        return math.isclose(self.p_a, self.p_b, rel_tol=config.EQUAL_HEIGHT_TOL,
                            abs_tol=config.EQUAL_HEIGHT_TOL)

    @property
    def T(self) -> float:
        """Half-length of the cylinder interval, 0.5 * ln(b/a)"""
        return 0.5 * math.log(self.b / self.a)

    @property
    def log_center(self) -> float:
        """0.5 * ln(ab), the radius mapped to t = 0"""
        return 0.5 * (math.log(self.a) + math.log(self.b))

    @property
    def sqrt_ab(self) -> float:
        return math.exp(self.log_center)

    @property
    def p_a(self) -> Optional[float]:
        if self.infinite:
            return None
        return -(2.0 / (self.n - 2)) * math.log(self.c1) - math.log(self.a)

    @property
    def p_b(self) -> Optional[float]:
        if self.infinite:
            return None
        return -(2.0 / (self.n - 2)) * math.log(self.c2) - math.log(self.b)

    def describe(self) -> dict:
        return self.model_dump()


class GridControl(BaseModel):
    """Sampling of profile branches"""
    model_config = ConfigDict(frozen=True)

    points_per_branch: int = Field(default=config.BRANCH_POINTS, ge=50)
    geometric_fraction: float = Field(default=config.GEOMETRIC_FRACTION, ge=0.0, le=0.95)
    fold_offset_min: float = Field(default=config.FOLD_OFFSET_MIN, gt=0.0, lt=1e-3)
    xi_floor: float = config.XI_FLOOR
    xi_floor_margin: float = Field(default=config.XI_FLOOR_MARGIN, gt=0.0)
    quad_tol: float = Field(default=config.QUAD_TOL, gt=0.0)
    root_tol: float = Field(default=config.ROOT_TOL, gt=0.0)
