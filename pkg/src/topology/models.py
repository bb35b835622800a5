"""Report and record models for sublevel-set topology."""

from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator


class Component(BaseModel):
    """One connected component of a sampled sublevel set."""
    label: int = Field(..., ge=1)
    cell_count: int = Field(..., ge=1)
    touches_sphere: bool = False
    island: bool = False
    bbox_lo: List[int]
    bbox_hi: List[int]  # exclusive
    zero_indices: List[int] = Field(default_factory=list)

    @property
    def contains_zero(self) -> bool:
        return bool(self.zero_indices)


class CountReport(BaseModel):
    """Coarse counts with their convergence status and bound verdicts."""
    zeta: int = Field(..., ge=0)
    zeta0: int = Field(..., ge=0)
    tau: Optional[int] = Field(default=None, ge=0)
    n_delta: Optional[int] = Field(default=None, ge=0)
    converged: bool
    resolutions: List[int] = Field(default_factory=list)
    zeros_located: int = 0
    unattached_zeros: int = 0
    islands_without_zero: int = 0
    absorbed: bool = False
    verdicts: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _ordering(self) -> "CountReport":
        if self.zeta0 > self.zeta:
            raise ValueError(f"zeta0 ({self.zeta0}) exceeds zeta ({self.zeta})")
        if self.tau is not None and self.zeta0 > self.tau:
            raise ValueError(f"zeta0 ({self.zeta0}) exceeds tau ({self.tau})")
        return self


class Bar(BaseModel):
    """One degree-0 bar [birth, death) with multiplicity; death may be inf."""
    birth: float
    death: float
    multiplicity: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _ordered(self) -> "Bar":
        if self.death < self.birth:
            raise ValueError("bar dies before it is born")
        return self

    @property
    def length(self) -> float:
        return self.death - self.birth


class Barcode(BaseModel):
    """Multiset of degree-0 bars, sorted by (birth, death)."""
    bars: List[Bar] = Field(default_factory=list)

    def key(self) -> List[Tuple[float, float, int]]:
        return [(b.birth, b.death, b.multiplicity) for b in self.bars]

    @property
    def total(self) -> int:
        return sum(b.multiplicity for b in self.bars)


class StabilityVerdict(BaseModel):
    """Outcome of comparing long-bar counts of two nearby functions."""
    verdict: str  # holds | fails | inapplicable
    sup_distance: float
    c: float
    epsilon: float
    count_f: Optional[int] = None
    count_g: Optional[int] = None
    reason: Optional[str] = None
