"""Isolation balls around nondegenerate zeros of maps C^n -> C^n.

With M = mu(f, |xi| + 1) and D = |det J_f(xi)|, every z with

    |z| <= 1 / (2 (n! M^n / D + 1))

satisfies |f(xi + z)| >= D |z| / (2 n! M^(n-1)). Cauchy's estimate bounds the
adjugate of J_f(xi) by n! M^(n-1), and a Schwarz-lemma step on
J_f(xi)^-1 f(xi + z) - z gives the radius.
"""

import math
from typing import Optional, Sequence

import mpmath
import numpy as np
from scipy.special import gammaln

from ..arith.xnum import LogComplex, XArray, log2_norm
from ..maps.builtin import EntireMap
from ..maps.modulus import mu_estimate
from ..utils.errors import BoundDomainError, InputValidationError
from ..utils.logger import get_logger
from .models import IsolationCertificate

logger = get_logger()


def _to_mpc(value: LogComplex) -> mpmath.mpc:
    return mpmath.mpc(mpmath.ldexp(value.mantissa_re, value.exp2), mpmath.ldexp(value.mantissa_im, value.exp2))


def log2_abs_det(matrix: Sequence[Sequence[LogComplex]]) -> float:
    """log2 |det| of a square matrix of extended-exponent entries; -inf when singular."""
    with mpmath.workdps(30):
        det = mpmath.det(mpmath.matrix([[_to_mpc(entry) for entry in row] for row in matrix]))
        if det == 0:
            return -math.inf
        return float(mpmath.log(abs(det), 2))


def log2_factorial(n: int) -> float:
    return float(gammaln(n + 1.0) / math.log(2.0))


def isolation_certificate(entire_map: EntireMap, zero: Sequence[complex], log2_mu_outer: Optional[float] = None,
                          budget: int = 4096, threads: Optional[int] = None) -> IsolationCertificate:
    """Certified isolation ball of a zero with invertible Jacobian.

    mu(f, |xi| + 1) comes from the map's analytic upper bound when it has one.
    Otherwise the sampled maximum stands in and the certificate is marked
    uncertified; `log2_mu_outer` overrides both.
    """
    n = entire_map.n
    if entire_map.m != n:
        raise InputValidationError(f"isolation needs a square map, got C^{n} -> C^{entire_map.m}",
                                   user_message="Isolation balls need a map C^n -> C^n")
    if len(zero) != n:
        raise InputValidationError(f"zero has {len(zero)} coordinates, map has {n}",
                                   user_message=f"Give the zero as {n} complex coordinates")
    point = [LogComplex.from_complex(complex(x)) for x in zero]
    log2_det = log2_abs_det(entire_map.jacobian(point))
    if log2_det == -math.inf:
        raise BoundDomainError(
            f"Jacobian is singular at {list(zero)}",
            user_message="The zero is degenerate: det J_f vanishes there",
            suggestions=["Isolation balls only exist around nondegenerate zeros"],
            context={"zero": [str(x) for x in zero]},
        )

    outer = float(np.linalg.norm(np.asarray(zero, dtype=np.complex128))) + 1.0
    certified = True
    if log2_mu_outer is None:
        report = mu_estimate(entire_map, outer, budget, threads)
        if report.log2_mu_upper is not None and math.isfinite(report.log2_mu_upper):
            log2_mu_outer = report.log2_mu_upper
        else:
            log2_mu_outer = report.log2_mu_lower
            certified = False
            logger.warning("No analytic mu bound; isolation radius uses the sampled maximum",
                           map=entire_map.name, r=outer)

    log2_nfact = log2_factorial(n)
    log2_radius = -1.0 - float(np.logaddexp2(log2_nfact + n * log2_mu_outer - log2_det, 0.0))
    log2_slope = log2_det - 1.0 - log2_nfact - (n - 1) * log2_mu_outer
    residual = float(log2_norm([XArray.from_scalars([v]) for v in entire_map.evaluate(point)])[0])
    certificate = IsolationCertificate(
        zero=[[float(complex(x).real), float(complex(x).imag)] for x in zero],
        log2_abs_det=log2_det,
        log2_mu=log2_mu_outer,
        mu_certified=certified,
        log2_radius=log2_radius,
        log2_slope=log2_slope,
        log2_delta=log2_slope + log2_radius,
        log2_residual=residual,
    )
    if residual >= certificate.log2_delta:
        logger.warning("Residual at the zero reaches the isolation floor", map=entire_map.name,
                       log2_residual=residual, log2_delta=certificate.log2_delta)
    logger.debug("Isolation certificate", map=entire_map.name, log2_radius=log2_radius,
                 log2_delta=certificate.log2_delta, certified=certified)
    return certificate
