"""Records for located zeros, island winding counts and isolation certificates."""

import math
from typing import List, Tuple

from pydantic import BaseModel, Field

from ..utils.errors import InputValidationError

Box = Tuple[float, float, float, float]  # (x0, x1, y0, y1)


class Zero(BaseModel):
    """A polished zero of a one-variable map."""
    re: float
    im: float
    multiplicity: int = Field(..., ge=1)
    residual: float = Field(..., ge=0.0)

    @property
    def location(self) -> complex:
        return complex(self.re, self.im)


class ZeroSearch(BaseModel):
    """Result of subdivision search; partial when some boxes hit the depth cap."""
    zeros: List[Zero] = Field(default_factory=list)
    partial: bool = False
    unresolved_boxes: List[Box] = Field(default_factory=list)
    unresolved_count: int = 0

    @property
    def total_multiplicity(self) -> int:
        return sum(z.multiplicity for z in self.zeros)


class IslandWinding(BaseModel):
    label: int
    contour: Box
    winding: int = Field(..., ge=0)


class TauReport(BaseModel):
    """tau with the per-island winding numbers it was summed from."""
    tau: int = Field(..., ge=0)
    zeta: int = Field(..., ge=0)
    zeta0: int = Field(..., ge=0)
    res: int
    islands: List[IslandWinding] = Field(default_factory=list)


class IsolationCertificate(BaseModel):
    """Ball around a nondegenerate zero on whose boundary |f| stays above a floor.

    Inside the ball |f(xi + z)| >= 2^log2_slope |z|, so the sublevel
    component of xi at any level below 2^log2_delta stays inside the ball.
    """
    zero: List[List[float]] = Field(..., description="[re, im] per coordinate")
    log2_abs_det: float
    log2_mu: float
    mu_certified: bool
    log2_radius: float
    log2_slope: float
    log2_delta: float
    log2_residual: float

    @property
    def radius(self) -> float:
        return 2.0 ** self.log2_radius

    def log2_floor(self, abs_z: float) -> float:
        """log2 of the guaranteed lower bound on |f(xi + z)| at distance abs_z."""
        if abs_z > self.radius:
            raise InputValidationError(f"|z| = {abs_z} lies outside the certified radius {self.radius}",
                                       user_message="The floor only holds inside the isolation ball")
        return self.log2_slope + math.log2(abs_z) if abs_z > 0 else -math.inf
