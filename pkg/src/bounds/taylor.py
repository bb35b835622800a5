"""Cauchy remainder of Taylor polynomials and the counting bounds built on it.

All bounds use the explicit constants of the proof chain:

    C_a = a / (a - 1),  mu(R_k, r) <= C_a a^-k mu(f, ar)
    k     = least k >= 1 with C_a a^-k mu(f, ar) < delta / 2
    zeta  <= k^n + 5k (10k)^(2n-2)
    tau   <= k^n
    zeta_d <= 3k (3 + 2k)^(2n-1)

Every log is base 2.
"""

import math
from typing import Optional

import numpy as np

from ..maps.builtin import EntireMap
from ..arith.xnum import XArray
from ..utils.errors import BoundDomainError, InputValidationError
from ..utils.logger import get_logger
from ..utils.parallel import parallel_map, split_range
from .models import BoundSet, TaylorModel

logger = get_logger()

COEFF_DRIFT_TOL = 1e-12
MAX_QUADRATURE_SAMPLES = 2 ** 20


def _check_a(a: float) -> None:
    if not a > 1.0:
        raise InputValidationError(f"a must exceed 1, got {a}", user_message="a must be greater than 1")


def remainder_bound(a: float, k: int, log2_mu_ar: float) -> float:
    """log2 of C_a a^-k mu(f, ar)."""
    _check_a(a)
    if k < 0:
        raise InputValidationError(f"degree must be non-negative, got {k}", user_message="k must be >= 0")
    return math.log2(a / (a - 1.0)) - k * math.log2(a) + log2_mu_ar


def choose_degree(a: float, log2_mu_ar: float, delta: float) -> int:
    """Least k >= 1 with remainder_bound(a, k, log2_mu_ar) < log2(delta / 2)."""
    _check_a(a)
    if not delta > 0:
        raise InputValidationError("delta must be positive", user_message="delta must be positive")
    if math.isnan(log2_mu_ar) or log2_mu_ar == math.inf:
        raise InputValidationError(f"log2 mu must be finite, got {log2_mu_ar}",
                                   user_message="log2 mu(f, ar) must be a finite number")
    if log2_mu_ar == -math.inf:
        # f = 0: every Taylor polynomial is exact
        return 1
    target = math.log2(delta) - 1.0
    k = max(1, int(math.floor((math.log2(a / (a - 1.0)) + log2_mu_ar - target) / math.log2(a))) + 1)
    # float slack around the exact crossing
    while k > 1 and remainder_bound(a, k - 1, log2_mu_ar) < target:
        k -= 1
    while remainder_bound(a, k, log2_mu_ar) >= target:
        k += 1
    return k


def _admissible(a: float, log2_mu_ar: float, delta: float) -> int:
    if not delta > 0:
        raise InputValidationError("delta must be positive", user_message="delta must be positive")
    if not math.log2(delta) < log2_mu_ar - 1.0:
        raise BoundDomainError(
            f"delta={delta} is not below mu(f, ar)/2 = 2^{log2_mu_ar - 1.0:.6g}",
            user_message="delta must lie in (0, mu(f, ar)/2) for the counting bounds",
            suggestions=["Lower delta", "Use a larger radius or a larger a"],
            context={"delta": delta, "log2_mu_ar": log2_mu_ar},
        )
    return choose_degree(a, log2_mu_ar, delta)


def zero_count(n: int, k: int) -> int:
    """k^n: isolated zeros of a degree-k polynomial map in n variables."""
    return k ** n


def component_count(n: int, k: int) -> int:
    """k^n + 5k (10k)^(2n-2): zeros plus critical-point components."""
    return zero_count(n, k) + 5 * k * (10 * k) ** (2 * n - 2)


def homology_count(n: int, k: int) -> int:
    """3k (3 + 2k)^(2n-1): total Betti number bound, any degree d."""
    return 3 * k * (3 + 2 * k) ** (2 * n - 1)


def bezout_bound(n: int, a: float, log2_mu_ar: float, delta: float) -> int:
    """zeta(f, r, delta) <= k^n + 5k (10k)^(2n-2)."""
    return component_count(n, _admissible(a, log2_mu_ar, delta))


def tau_bound(n: int, a: float, log2_mu_ar: float, delta: float) -> int:
    """tau(f, r, delta) <= k^n."""
    return zero_count(n, _admissible(a, log2_mu_ar, delta))


def zeta_d_bound(n: int, a: float, log2_mu_ar: float, delta: float) -> int:
    """zeta_d(f, r, delta) <= 3k (3 + 2k)^(2n-1), any degree d."""
    return homology_count(n, _admissible(a, log2_mu_ar, delta))


def all_bounds(n: int, a: float, log2_mu_ar: float, delta: float) -> BoundSet:
    if n < 1:
        raise InputValidationError(f"n must be >= 1, got {n}", user_message="n must be at least 1")
    return BoundSet(
        n=n, a=a, log2_mu_ar=log2_mu_ar, delta=delta,
        degree=_admissible(a, log2_mu_ar, delta),
        bezout_bound=bezout_bound(n, a, log2_mu_ar, delta),
        tau_bound=tau_bound(n, a, log2_mu_ar, delta),
        zeta_d_bound=zeta_d_bound(n, a, log2_mu_ar, delta),
    )


def near_holomorphic_bound(n: int, a: float, b: float, log2_mu_ar: float, delta: float) -> int:
    """Bound on zeta(h, r, (1 + b) delta) for continuous h with sup|h - f| < b delta / 2.

    `log2_mu_ar` is log2 mu(h, ar); mu(f, ar) <= mu(h, ar) + b delta / 2 feeds
    the holomorphic chain, whose degree already keeps |f - p| < delta / 2.
    """
    if not 0.0 <= b < 1.0:
        raise InputValidationError(f"b must lie in [0, 1), got {b}", user_message="b must satisfy 0 <= b < 1")
    if not delta > 0:
        raise InputValidationError("delta must be positive", user_message="delta must be positive")
    log2_mu_f = float(np.logaddexp2(log2_mu_ar, math.log2(b * delta / 2.0))) if b > 0 else log2_mu_ar
    return bezout_bound(n, a, log2_mu_f, delta)


def taylor_coeffs(entire_map: EntireMap, k: int, rho: float, samples: Optional[int] = None,
                  threads: Optional[int] = None) -> np.ndarray:
    """c_0..c_{k-1} by the trapezoid rule for Cauchy integrals on |w| = rho.

    The sample count starts at max(4k, 64) (or `samples`) and doubles until no
    coefficient moves by more than 1e-12 relative to the largest one.
    """
    if entire_map.n != 1 or entire_map.m != 1:
        raise InputValidationError("Taylor coefficients need a map C -> C",
                                   user_message="taylor_coeffs supports one-variable scalar maps only")
    if k < 1 or not rho > 0:
        raise InputValidationError(f"need k >= 1 and rho > 0, got k={k}, rho={rho}",
                                   user_message="k must be >= 1 and rho positive")
    minimum = max(4 * k, 64)
    m = minimum if samples is None else samples
    if m < minimum:
        raise InputValidationError(f"{m} samples is below max(4k, 64) = {minimum}",
                                   user_message=f"Use at least {minimum} quadrature samples")

    def coefficients(count: int) -> np.ndarray:
        theta = 2.0 * np.pi * np.arange(count) / count
        points = rho * np.exp(1j * theta)
        blocks = split_range(count, max(1, count // 4096))
        parts = parallel_map(
            lambda block: entire_map.evaluate_array([XArray.from_complex(points[block])])[0].to_complex(),
            blocks, threads)
        values = np.concatenate(parts)
        return np.fft.fft(values)[:k] / count / rho ** np.arange(k)

    current = coefficients(m)
    while m < MAX_QUADRATURE_SAMPLES:
        m *= 2
        refined = coefficients(m)
        drift = float(np.max(np.abs(refined - current)))
        scale = max(1.0, float(np.max(np.abs(refined))))
        current = refined
        if drift <= COEFF_DRIFT_TOL * scale:
            break
    else:
        logger.warning("Quadrature sample cap reached before coefficients settled", k=k, rho=rho, samples=m)
    logger.debug("Taylor coefficients", k=k, rho=rho, samples=m)
    return current


def taylor_model(entire_map: EntireMap, r: float, a: float, delta: float, log2_mu_ar: float,
                 threads: Optional[int] = None) -> TaylorModel:
    """Taylor polynomial of the degree the counting bounds use, with its remainder bound on B_r."""
    k = choose_degree(a, log2_mu_ar, delta)
    coeffs = taylor_coeffs(entire_map, k, a * r, threads=threads) if entire_map.n == 1 else np.zeros(0)
    return TaylorModel(
        degree=k,
        a=a,
        r=r,
        log2_mu_ar=log2_mu_ar,
        log2_remainder_bound=remainder_bound(a, k, log2_mu_ar),
        coefficients=[[float(c.real), float(c.imag)] for c in coeffs],
    )


def max_remainder(entire_map: EntireMap, coeffs: np.ndarray, r: float, samples: int = 2048) -> float:
    """Sampled max over B_r of |f - sum c_j z^j| (boundary circle plus interior rings)."""
    rings = np.linspace(0.0, 1.0, 9)[1:]
    theta = 2.0 * np.pi * np.arange(samples) / samples
    points = (r * rings[:, None] * np.exp(1j * theta)[None, :]).reshape(-1)
    values = entire_map.evaluate_array([XArray.from_complex(points)])[0].to_complex()
    poly = np.polynomial.polynomial.polyval(points, coeffs)
    return float(np.max(np.abs(values - poly)))
