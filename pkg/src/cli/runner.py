"""Command-line entry: parse flags, validate a RunConfig, dispatch a verb, emit the report."""

import argparse
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from ..bounds.models import BoundCheck
from ..bounds.taylor import all_bounds, bezout_bound, near_holomorphic_bound, tau_bound
from ..csverify.bracket import verify_sweep
from ..csverify.jacobian import falsification, jacobian_decay
from ..csverify.thresholds import cs_structure
from ..maps.builtin import EntireMap, map_from_spec
from ..maps.models import CSParams
from ..maps.modulus import log2_mu, mu_estimate
from ..topology.grid import coarse_count, dump_mask, sample_sublevel
from ..topology.persist import barcode0, barcode_bound_check, count_long_bars, stability_check
from ..utils.errors import (
    BoundDomainError,
    CoarseBezoutError,
    ConfigurationError,
    ExpressionSyntaxError,
    InputValidationError,
    UnknownMapError,
    categorize_validation_error,
)
from ..utils.logger import get_logger
from ..utils.parallel import resolve_threads
from ..zeros.tau import tau_report
from .models import Command, RunConfig
from .report import emit, render

logger = get_logger()

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID = 2
EXIT_UNCONVERGED = 3

# errors caused by what the user typed
INPUT_ERRORS = (InputValidationError, ConfigurationError, ExpressionSyntaxError, UnknownMapError)

# result, CSV rows, verdicts, converged
Outcome = Tuple[Dict[str, Any], List[Dict[str, Any]], Dict[str, Any], bool]


def _coeff_list(text: str) -> List[List[float]]:
    values = []
    for part in text.split(","):
        value = complex(part.strip().replace(" ", "").replace("i", "j"))
        values.append([value.real, value.imag])
    return values


def _float_list(text: str) -> List[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--map", dest="map_spec", default="builtin:exp_shift",
                        help="builtin:<name> (cs_F, cs_g, exp_shift, polynomial) or a map-config JSON path")
    common.add_argument("--n", type=int, default=1, help="number of variables for builtins")
    common.add_argument("--r", type=float, help="ball radius")
    common.add_argument("--delta", type=float, help="sublevel threshold")
    common.add_argument("--a", type=float, help="radius factor a > 1 for the explicit bounds")
    common.add_argument("--res", type=int, default=64, help="starting grid resolution per real axis")
    common.add_argument("--max-res", type=int, help="largest resolution tried while refining")
    common.add_argument("--format", choices=["csv", "json"], default="json")
    common.add_argument("--output", help="report path (stdout when omitted)")
    common.add_argument("--threads", type=int, help="worker threads (env COARSE_BEZOUT_THREADS)")
    common.add_argument("--strict", action="store_true", help="exit 3 when a grid count did not converge")
    common.add_argument("--c-spec", help="c-sequence of cs_F, pow:LAMBDA,L or explicit:[...]")
    common.add_argument("--coeffs", type=_coeff_list, help="polynomial coefficients a0,a1,... (complex allowed)")
    common.add_argument("--log2mu", type=float, help="log2 mu(f, ar) for bezout-bound")
    common.add_argument("--b", type=float, help="near-holomorphic slack factor in [0, 1)")
    common.add_argument("--map2", dest="map2_spec", help="second map for stability")
    common.add_argument("--c", type=float, help="stability constant c")
    common.add_argument("--epsilon", type=float, help="stability epsilon")
    common.add_argument("--k-min", type=int, default=4, help="cs-verify: smallest k with r = 2^k")
    common.add_argument("--k-max", type=int, default=30, help="cs-verify: largest k with r = 2^k")
    common.add_argument("--deltas", type=_float_list, default=[0.1], help="cs-verify: comma-separated deltas")
    common.add_argument("--budget", type=int, default=4096, help="mu: sample budget")
    common.add_argument("--dump-mask", help="count: write the final mask and its JSON sidecar here")

    parser = argparse.ArgumentParser(prog="coarse-bezout", description="Coarse Bezout zero counts of entire maps")
    verbs = parser.add_subparsers(dest="command", required=True, metavar="VERB")
    help_text = {
        Command.COUNT: "zeta and zeta0 on refined grids",
        Command.TAU: "zeros with multiplicity inside islands",
        Command.BARCODE: "degree-0 sublevel barcode",
        Command.MU: "maximum modulus estimate",
        Command.BEZOUT_BOUND: "explicit counting bounds",
        Command.CS_VERIFY: "structural sweep of the Cornalba-Shiffman map",
        Command.STABILITY: "long-bar stability between two maps",
    }
    for command in Command:
        verbs.add_parser(command.value, parents=[common], help=help_text[command])
    return parser


def _require(config: RunConfig, *names: str) -> None:
    missing = [name for name in names if getattr(config, name) is None]
    if missing:
        flags = ", ".join("--" + name.replace("_spec", "").replace("_", "-") for name in missing)
        raise InputValidationError(
            f"{config.command.value} needs {flags}",
            user_message=f"Missing required flag(s) for {config.command.value}: {flags}",
            suggestions=[f"Run 'coarse-bezout {config.command.value} --help'"],
        )


def _map(config: RunConfig, spec: Optional[str] = None) -> EntireMap:
    return map_from_spec(spec or config.map_spec, config.n, config.map_params())


def _bound_check(name: str, measured: int, bound_fn: Callable[..., int], n: int, a: float,
                 log2_mu_ar: float, delta: float) -> BoundCheck:
    try:
        bound = bound_fn(n, a, log2_mu_ar, delta)
    except BoundDomainError as e:
        return BoundCheck(name=name, measured=measured, reason=e.user_message)
    return BoundCheck(name=name, measured=measured, bound=bound, holds=measured <= bound)


def _count(config: RunConfig) -> Outcome:
    _require(config, "r", "delta")
    entire_map = _map(config)
    report = coarse_count(entire_map, config.r, config.delta, res_start=config.res,
                          threads=config.threads, max_res=config.max_res)
    result = report.model_dump()
    verdicts: Dict[str, Any] = dict(report.verdicts)
    if config.a is not None:
        log2_mu_ar = log2_mu(entire_map, config.a * config.r, threads=config.threads)
        check = _bound_check("zeta", report.zeta, bezout_bound, entire_map.n, config.a, log2_mu_ar, config.delta)
        result["bound_check"] = check.model_dump()
        verdicts["zeta_within_bezout_bound"] = check.holds
    if config.dump_mask:
        grid = sample_sublevel(entire_map, config.r, config.delta, report.resolutions[-1], config.threads)
        dump_mask(grid, config.dump_mask)
    row = dict(result, final_res=report.resolutions[-1])
    return result, [row], verdicts, report.converged


def _tau(config: RunConfig) -> Outcome:
    _require(config, "r", "delta")
    entire_map = _map(config)
    report = tau_report(entire_map, config.r, config.delta, res=config.res, threads=config.threads)
    result = report.model_dump()
    verdicts: Dict[str, Any] = {"zeta0_le_tau": report.zeta0 <= report.tau}
    if config.a is not None:
        log2_mu_ar = log2_mu(entire_map, config.a * config.r, threads=config.threads)
        check = _bound_check("tau", report.tau, tau_bound, entire_map.n, config.a, log2_mu_ar, config.delta)
        result["bound_check"] = check.model_dump()
        verdicts["tau_within_bound"] = check.holds
    row = {"tau": report.tau, "zeta": report.zeta, "zeta0": report.zeta0, "res": report.res,
           "islands": len(report.islands)}
    return result, [row], verdicts, True


def _barcode(config: RunConfig) -> Outcome:
    _require(config, "r")
    entire_map = _map(config)
    barcode = barcode0(entire_map, config.r, config.res, config.threads)
    result: Dict[str, Any] = {"bars": [bar.model_dump() for bar in barcode.bars], "total": barcode.total}
    verdicts: Dict[str, Any] = {}
    if config.delta is not None:
        result["n_delta"] = count_long_bars(barcode, config.delta)
        if config.a is not None:
            log2_mu_ar = log2_mu(entire_map, config.a * config.r, threads=config.threads)
            check = barcode_bound_check(barcode, entire_map.n, config.a, log2_mu_ar, config.delta)
            result["bound_check"] = check.model_dump()
            verdicts["n_delta_within_bezout_bound"] = check.holds
    return result, result["bars"], verdicts, True


def _mu(config: RunConfig) -> Outcome:
    _require(config, "r")
    entire_map = _map(config)
    report = mu_estimate(entire_map, config.r, config.budget, config.threads)
    result = report.model_dump()
    verdicts = {"sample_below_upper": report.log2_mu_upper is None or report.log2_mu_lower <= report.log2_mu_upper}
    return result, [result], verdicts, True


def _bezout_bound(config: RunConfig) -> Outcome:
    _require(config, "a", "log2mu", "delta")
    bounds = all_bounds(config.n, config.a, config.log2mu, config.delta)
    result = bounds.model_dump()
    if config.b is not None:
        result["near_holomorphic_bound"] = near_holomorphic_bound(config.n, config.a, config.b,
                                                                  config.log2mu, config.delta)
    return result, [result], {}, True


def _jacobian_verdict(params: CSParams, slices: int = 10) -> bool:
    for i in range(1, slices + 1):
        if params.max_index() is not None and i > params.max_index():
            break
        c = params.value(i)
        if c is None or c > 4096:
            continue
        if not all(jacobian_decay(i, j, params).verdict for j in range(1, c + 1)):
            return False
    return True


def _cs_verify(config: RunConfig) -> Outcome:
    if config.k_max < config.k_min:
        raise InputValidationError(f"k_max {config.k_max} is below k_min {config.k_min}",
                                   user_message="--k-max must not be below --k-min")
    try:
        params = CSParams(c_spec=config.c_spec or "pow:1,1")
    except ValidationError as e:
        raise categorize_validation_error(e)
    radii = [2.0 ** k for k in range(config.k_min, config.k_max + 1)]
    rows = verify_sweep(radii, config.deltas, params, config.threads)
    report = falsification(params=params)
    result = {
        "rows": [row.model_dump() for row in rows],
        "structure": [cs_structure(delta, params).model_dump() for delta in config.deltas],
        "falsification": report.model_dump(),
    }
    verdicts = {
        "within_envelopes": all(row.within_envelopes for row in rows),
        "jacobian_decay": _jacobian_verdict(params),
        "falsification_cutoff": report.cutoff,
    }
    return result, result["rows"], verdicts, True


def _stability(config: RunConfig) -> Outcome:
    _require(config, "map2_spec", "c", "epsilon", "r")
    f = _map(config)
    g = _map(config, config.map2_spec)
    verdict = stability_check(f, g, config.c, config.epsilon, config.r, config.res, config.threads)
    result = verdict.model_dump()
    return result, [result], {"stability": verdict.verdict}, True


HANDLERS: Dict[Command, Callable[[RunConfig], Outcome]] = {
    Command.COUNT: _count,
    Command.TAU: _tau,
    Command.BARCODE: _barcode,
    Command.MU: _mu,
    Command.BEZOUT_BOUND: _bezout_bound,
    Command.CS_VERIFY: _cs_verify,
    Command.STABILITY: _stability,
}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Flags > environment > defaults, validated."""
    fields = {key: value for key, value in vars(args).items() if value is not None}
    fields["threads"] = resolve_threads(args.threads)
    try:
        return RunConfig(**fields)
    except ValidationError as e:
        raise categorize_validation_error(e)


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    """Run one verb; returns the process exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK

    try:
        config = resolve_config(args)
        logger.info("Running", command=config.command.value, map=config.map_spec, threads=config.threads)
        with logger.timed(config.command.value, map=config.map_spec):
            result, rows, verdicts, converged = HANDLERS[config.command](config)
        emit(render(config, result, rows, verdicts), config.output, stdout)
    except INPUT_ERRORS as e:
        logger.error("Invalid input", error=e)
        stderr.write(e.get_user_friendly_message() + "\n")
        return EXIT_INVALID
    except CoarseBezoutError as e:
        logger.error("Run failed", error=e)
        stderr.write(e.get_user_friendly_message() + "\n")
        return EXIT_FAILURE
    except Exception as e:
        logger.error("Unexpected error", error=e)
        stderr.write(f"❌ An unexpected error occurred: {e}\n")
        return EXIT_FAILURE

    if config.strict and not converged:
        logger.warning("Unconverged result with --strict", command=config.command.value)
        return EXIT_UNCONVERGED
    return EXIT_OK
