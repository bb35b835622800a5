"""Records for Taylor models and bound comparisons."""

from typing import List, Optional

from pydantic import BaseModel, Field


class TaylorModel(BaseModel):
    """Degree-k Taylor data at 0 with its certified Cauchy remainder on B_r."""
    degree: int = Field(..., ge=0)
    a: float = Field(..., gt=1.0)
    r: Optional[float] = Field(default=None, gt=0.0)
    log2_mu_ar: float
    log2_remainder_bound: float
    coefficients: List[List[float]] = Field(default_factory=list)  # [re, im] per power
    samples: Optional[int] = None

    def coefficient(self, j: int) -> complex:
        re, im = self.coefficients[j]
        return complex(re, im)


class BoundCheck(BaseModel):
    """A measured quantity against its explicit upper bound."""
    name: str
    measured: int
    bound: Optional[int] = None
    holds: Optional[bool] = None
    degree: Optional[int] = None
    reason: Optional[str] = None

    @property
    def ratio(self) -> Optional[float]:
        if self.bound is None or self.bound == 0:
            return None
        return self.measured / self.bound


class BoundSet(BaseModel):
    """All three proof-chain bounds at one (n, a, log2 mu(f, ar), delta)."""
    n: int = Field(..., ge=1)
    a: float = Field(..., gt=1.0)
    log2_mu_ar: float
    delta: float = Field(..., gt=0.0)
    degree: int = Field(..., ge=1)
    bezout_bound: int
    tau_bound: int
    zeta_d_bound: int
