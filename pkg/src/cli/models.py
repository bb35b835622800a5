"""Run configuration for the command-line surface."""

from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator


class Command(str, Enum):
    """Verbs accepted by the command line."""
    COUNT = "count"
    TAU = "tau"
    BARCODE = "barcode"
    MU = "mu"
    BEZOUT_BOUND = "bezout-bound"
    CS_VERIFY = "cs-verify"
    STABILITY = "stability"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class RunConfig(BaseModel):
    """Fully resolved configuration of one run; embedded in every report."""
    command: Command
    map_spec: str = Field(default="builtin:exp_shift", description="builtin:<name> or a map-config path")
    n: int = Field(default=1, ge=1, le=8)
    r: Optional[float] = None
    delta: Optional[float] = None
    a: Optional[float] = None
    res: int = Field(default=64, ge=2)
    max_res: Optional[int] = Field(default=None, ge=2)
    format: OutputFormat = OutputFormat.JSON
    output: Optional[str] = None
    threads: int = Field(default=1, ge=1)
    strict: bool = False

    # map parameters
    c_spec: Optional[str] = None
    coeffs: Optional[List[List[float]]] = None  # [re, im] per power

    # bezout-bound
    log2mu: Optional[float] = None
    b: Optional[float] = Field(default=None, ge=0.0, lt=1.0)

    # stability
    map2_spec: Optional[str] = None
    c: Optional[float] = None
    epsilon: Optional[float] = None

    # cs-verify
    k_min: int = Field(default=4, ge=1)
    k_max: int = Field(default=30, ge=1)
    deltas: List[float] = Field(default_factory=lambda: [0.1])

    # mu
    budget: int = Field(default=4096, ge=1)

    dump_mask: Optional[str] = None

    @field_validator("delta")
    @classmethod
    def _positive_delta(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not value > 0:
            raise ValueError("delta must be positive")
        return value

    @field_validator("deltas")
    @classmethod
    def _positive_deltas(cls, values: List[float]) -> List[float]:
        if not values or any(not v > 0 for v in values):
            raise ValueError("delta must be positive")
        return values

    @field_validator("r")
    @classmethod
    def _positive_r(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not value > 0:
            raise ValueError("r must be positive")
        return value

    @field_validator("a")
    @classmethod
    def _a_above_one(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not value > 1:
            raise ValueError("a must be greater than 1")
        return value

    def map_params(self) -> dict:
        params = {}
        if self.c_spec is not None:
            params["c_spec"] = self.c_spec
        if self.coeffs is not None:
            params["coeffs"] = self.coeffs
        return params
