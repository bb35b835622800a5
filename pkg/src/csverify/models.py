"""Records produced by the structural analysis of the Cornalba-Shiffman map."""

from typing import Dict, List, Optional

from pydantic import BaseModel, Field, computed_field, model_validator


class CSStructure(BaseModel):
    """Thresholds that fix the shape of {|F| <= delta} from some slice on."""
    c_spec: str
    delta: float = Field(..., gt=0.0)
    c0: float
    k_merge: int = Field(..., ge=1)  # slices i >= k_merge contain {2^i} x [0, 1]
    k_sep: int = Field(..., ge=1)  # hyperplanes Re z = 2^k + 2^(k-1), k >= k_sep, avoid the set

    @computed_field
    @property
    def exact_tail_from(self) -> int:
        return max(self.k_merge, self.k_sep + 1)


class ContainmentResult(BaseModel):
    """Whether {2^i} x [0, b_i] is certified inside {|F| <= delta}."""
    i: int = Field(..., ge=1)
    c_i: Optional[int] = None
    hypothesis: bool
    log2_b: float
    samples: int = 0
    sample_max_log2: Optional[float] = None
    sample_ok: Optional[bool] = None

    @property
    def b(self) -> float:
        return 2.0 ** self.log2_b if self.log2_b < 1024 else float("inf")


class SeparationResult(BaseModel):
    """Lower bound for |F| on the hyperplane Re z = 2^k + 2^(k-1)."""
    k: int = Field(..., ge=1)
    delta: float
    holds: bool
    log2_bound: float  # log2(C_0 2^((k-1)k/2))
    log2_minorant: float  # log2 prod |1 - 2^-i x|
    minorant_ok: bool
    samples: int = 0
    sample_min_log2: Optional[float] = None
    sample_ok: Optional[bool] = None


class SliceCount(BaseModel):
    """Components meeting one slice z = 2^i, before cross-slice merging."""
    i: int = Field(..., ge=1)
    zeros_inside: Optional[int] = Field(default=None, ge=0)  # None when c_i is only known through log2
    components: int = Field(..., ge=0)
    method: str  # merged | grid | classical
    converged: Optional[bool] = None


class ZetaBracket(BaseModel):
    """lower <= zeta(F, r, delta) <= upper, with the envelopes it is compared to."""
    r: float
    delta: float
    lower: int = Field(..., ge=0)
    upper: int = Field(..., ge=0)
    exact_tail_from: int
    tail_count: int = 0
    envelope_lower: float
    envelope_upper: float
    slices: List[SliceCount] = Field(default_factory=list)
    assumptions: List[str] = Field(default_factory=list)
    verdicts: Dict[str, bool] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _ordered(self) -> "ZetaBracket":
        if self.lower > self.upper:
            raise ValueError(f"bracket lower {self.lower} exceeds upper {self.upper}")
        return self


class SliceVerdict(BaseModel):
    i: int
    zeros_inside: Optional[int] = None
    containment: bool
    log2_b: float
    verdict: str  # peninsula | undetermined


class IslandAnalysis(BaseModel):
    """Upper bounds on zeta0(F, r, delta) and the per-slice peninsula evidence."""
    r: float
    delta: float
    upper: int = Field(..., ge=0)
    applicable: bool
    reason: Optional[str] = None
    i0: Optional[int] = None
    proof_upper: Optional[float] = None
    m: Optional[float] = None
    closed_form: Optional[float] = None
    growth_class: Optional[str] = None
    slices: List[SliceVerdict] = Field(default_factory=list)


class JacobianDecay(BaseModel):
    i: int = Field(..., ge=1)
    j: int = Field(..., ge=1)
    log2_det: float
    log2_threshold: float  # -c_i^2 + i^2 - 2i
    verdict: bool


class FalsificationRow(BaseModel):
    i: int
    log2_det_max: float
    log2_rhs: float  # log2(c) - b log2 mu_upper(|xi|)
    fails: bool  # |det J_F| < c mu^-b at every zero of the slice


class FalsificationReport(BaseModel):
    c: float
    b: float
    rows: List[FalsificationRow] = Field(default_factory=list)
    cutoff: Optional[int] = None


class SweepRow(BaseModel):
    """One line of the cs-verify table."""
    r: float
    log2_r: float
    delta: float
    zeta_lower: int
    zeta_upper: int
    envelope_lower: float
    envelope_upper: float
    mu_lower: float
    mu_upper: float
    islands_upper: int
    zeros_log2: float = float("-inf")  # log2 of the classical zero count in B_r
    within_envelopes: bool = True
