from pydantic import BaseModel, Field
from typing import Dict, List, Optional, Tuple


class FitReport(BaseModel):
    window: Tuple[int, int]
    r_hat: float
    C_hat: float
    residual_rms: float
    target: float
    A_hat: float
    B_hat: float


class FitVerdict(FitReport):
    """A fit report with its verdict, written flat to fit.json"""

    tolerance: float
    passed: bool = Field(serialization_alias="pass")
    group: str
    u: int


class SeriesSource(BaseModel):
    """What a series.csv was computed for"""

    group: str
    rep: List[Tuple[List[int], int]]
    mode: str


class InvariantStatus(BaseModel):
    name: str
    passed: bool
    n: Optional[int] = None
    witness: Optional[List[int]] = None
    detail: str = ""


class CheckReport(BaseModel):
    group: str
    n_max: int
    passed: bool
    invariants: List[InvariantStatus]


class MomentsReport(BaseModel):
    group: str
    r: int
    u: int
    dim: int
    mean: List[float]
    covariance: List[List[float]]
    Q: List[List[float]]
    step_lattice: List[List[int]]
    covolume: Optional[int]
    spanning: bool
    null_direction: Optional[List[int]] = None
    profile: List[Dict[str, float]] = []
