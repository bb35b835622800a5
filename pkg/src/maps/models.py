"""Data models for maps, map configs and maximum-modulus reports."""

import math
import re
from enum import Enum
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, PrivateAttr, field_validator, model_validator

from config.settings import get_setting

# tolerance when comparing a sampled maximum with an analytic bound
MU_COMPARE_SLACK = 1e-9
# c_i with more bits than this are only known through log2
EXACT_VALUE_BITS = 4096


class MapKind(str, Enum):
    """Built-in map families plus expression-backed maps."""
    CS_F = "cs_F"
    CS_G = "cs_g"
    EXP_SHIFT = "exp_shift"
    POLYNOMIAL = "polynomial"
    EXPR = "expr"


class CSParams(BaseModel):
    """Parameters of the Cornalba-Shiffman map: the sequence c_i and the truncation tolerance.

    ``c_spec`` is either ``"pow:LAMBDA,L"`` (c_i = floor of L-fold iterated
    exp2 of LAMBDA*i) or ``"explicit:[c1, c2, ...]"``.
    """
    c_spec: str = Field(default="pow:1,1", description="Rule generating c_1 < c_2 < ...")
    truncation_rel_err: float = Field(
        default_factory=lambda: float(get_setting("truncation_rel_err", 2.0 ** -50)), gt=0.0, lt=1.0
    )
    check_terms: int = Field(default=64, ge=1, le=4096)

    _rule: str = PrivateAttr(default="pow")
    _lam: float = PrivateAttr(default=1.0)
    _levels: int = PrivateAttr(default=1)
    _explicit: Tuple[int, ...] = PrivateAttr(default=())

    @field_validator("c_spec")
    @classmethod
    def _check_syntax(cls, value: str) -> str:
        value = value.strip()
        if not (value.startswith("pow:") or value.startswith("explicit:")):
            raise ValueError("c_spec must be 'pow:lambda,l' or 'explicit:[...]'")
        return value

    @model_validator(mode="after")
    def _parse_rule(self) -> "CSParams":
        kind, _, body = self.c_spec.partition(":")
        if kind == "pow":
            parts = [p.strip() for p in body.split(",")]
            if len(parts) != 2:
                raise ValueError("pow rule needs two parameters: pow:lambda,l")
            lam, levels = float(parts[0]), int(parts[1])
            if not (lam > 0 and math.isfinite(lam)):
                raise ValueError("lambda must be positive")
            if levels < 1:
                raise ValueError("l must be at least 1")
            self._rule, self._lam, self._levels = "pow", lam, levels
        else:
            numbers = re.findall(r"-?\d+", body)
            if not numbers:
                raise ValueError("explicit rule needs at least one term")
            self._rule, self._explicit = "explicit", tuple(int(x) for x in numbers)
        self._check_increasing()
        return self

    def _check_increasing(self) -> None:
        terms = self.check_terms if self._rule == "pow" else min(self.check_terms, len(self._explicit))
        previous_exact, previous_log = 0, float("-inf")
        for i in range(1, terms + 1):
            exact = self.value(i)
            if exact is not None:
                if exact <= previous_exact or exact < 1:
                    raise ValueError(f"c_i must be strictly increasing positive integers (fails at i={i})")
                previous_exact = exact
            else:
                log2_c = self.log2_value(i)
                if not log2_c > previous_log and not math.isinf(log2_c):
                    raise ValueError(f"c_i must be strictly increasing positive integers (fails at i={i})")
            previous_log = self.log2_value(i)

    @property
    def rule(self) -> str:
        return self._rule

    @property
    def lam(self) -> float:
        return self._lam

    @property
    def levels(self) -> int:
        return self._levels

    def max_index(self) -> Optional[int]:
        """Last defined index for explicit sequences, None for unbounded rules."""
        return len(self._explicit) if self._rule == "explicit" else None

    def _require(self, i: int) -> None:
        if i < 1:
            raise ValueError(f"sequence index must be >= 1, got {i}")
        if self._rule == "explicit" and i > len(self._explicit):
            raise ValueError(f"explicit sequence too short: index {i} requested, {len(self._explicit)} given")

    def log2_value(self, i: int) -> float:
        """log2(c_i); +inf when even that overflows a double."""
        self._require(i)
        if self._rule == "explicit":
            return math.log2(self._explicit[i - 1])
        x = self._lam * i
        for _ in range(self._levels - 1):
            if x > 1023:
                return math.inf
            x = 2.0 ** x
        # floor only matters while c_i is small
        if x < 52:
            return math.log2(math.floor(2.0 ** x))
        return x

    def value(self, i: int) -> Optional[int]:
        """Exact c_i when it has at most EXACT_VALUE_BITS bits, else None."""
        self._require(i)
        if self._rule == "explicit":
            return self._explicit[i - 1]
        x = self._lam * i
        for _ in range(self._levels - 1):
            if x > 1023:
                return None
            x = 2.0 ** x
        if x > EXACT_VALUE_BITS:
            return None
        if float(x).is_integer():
            return 1 << int(x)
        whole = math.floor(x)
        if whole < 53:
            return int(math.floor(2.0 ** x))
        # beyond double precision the low bits follow the double exponent
        return int(math.ldexp(2.0 ** (x - whole), 52)) << (whole - 52)

    def iterated_log2(self, i: int, times: int) -> float:
        """log2 applied `times` times to c_i (only the pow rule is exact here)."""
        if self._rule == "pow" and 1 <= times <= self._levels:
            x = self._lam * i
            for _ in range(self._levels - times):
                x = 2.0 ** x if x <= 1023 else math.inf
            return x
        value = self.log2_value(i)
        for _ in range(times - 1):
            value = math.log2(value) if value > 0 else float("-inf")
        return value


class MaxModulusReport(BaseModel):
    """Sampled lower and (for builtins) analytic upper bound of log2 mu(f, r)."""
    r: float = Field(..., gt=0)
    log2_mu_lower: float
    log2_mu_upper: Optional[float] = None
    upper_note: Optional[str] = None
    sample_count: int = Field(..., ge=1)
    absorbed: bool = False

    @model_validator(mode="after")
    def _sandwich(self) -> "MaxModulusReport":
        if self.log2_mu_upper is not None and self.log2_mu_lower > self.log2_mu_upper + MU_COMPARE_SLACK:
            raise ValueError(
                f"sampled lower bound {self.log2_mu_lower} exceeds analytic upper bound {self.log2_mu_upper}"
            )
        return self


class MapConfig(BaseModel):
    """Map-config JSON document (schema version 1)."""
    schema_version: Literal[1] = 1
    kind: Literal["builtin", "expr"]
    name: Optional[str] = None
    components: List[str] = Field(default_factory=list)
    n: int = Field(default=1, ge=1, le=8)
    params: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_kind(self) -> "MapConfig":
        if self.kind == "builtin" and not self.name:
            raise ValueError("builtin map config needs a name")
        if self.kind == "expr" and not self.components:
            raise ValueError("expression map config needs at least one component")
        return self
