"""Entire maps: built-in families and expression-backed maps."""

import json
import math
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from ..arith.xnum import LogComplex, XArray, log2_norm
from ..expr.evaluator import evaluate_array, jacobian_array
from ..expr.nodes import ExprAst, to_text
from ..expr.parser import parse
from ..utils.errors import ConfigurationError, UnknownMapError, categorize_validation_error
from ..utils.logger import get_logger
from .cornalba import cs_F_array, cs_g_array, cs_zeros_inside, log2_growth_bound, mu_cs_bounds
from .models import CSParams, MapConfig, MapKind

logger = get_logger()

Point = Tuple[complex, ...]


class EntireMap(ABC):
    """An entire map C^n -> C^m evaluated in extended-exponent arithmetic."""

    kind: MapKind

    def __init__(self, n: int, m: int, name: str, params: Optional[Dict[str, Any]] = None):
        self.n = n
        self.m = m
        self.name = name
        self.params = dict(params or {})

    @abstractmethod
    def evaluate_array(self, coords: Sequence[XArray]) -> List[XArray]:
        """Component arrays at every point of `coords` (one array per variable)."""

    @abstractmethod
    def jacobian_array(self, coords: Sequence[XArray]) -> List[List[XArray]]:
        """m x n derivative arrays."""

    def evaluate(self, point: Sequence[LogComplex]) -> List[LogComplex]:
        coords = [XArray.from_scalars([p]) for p in point]
        return [value.item(0) for value in self.evaluate_array(coords)]

    def jacobian(self, point: Sequence[LogComplex]) -> List[List[LogComplex]]:
        coords = [XArray.from_scalars([p]) for p in point]
        return [[entry.item(0) for entry in row] for row in self.jacobian_array(coords)]

    def log2_abs_array(self, coords: Sequence[XArray]) -> Tuple[np.ndarray, np.ndarray]:
        """log2 of the Euclidean norm of the value, plus the absorbed flags."""
        values = self.evaluate_array(coords)
        absorbed = np.zeros(values[0].shape, dtype=bool)
        for value in values:
            absorbed |= value.absorbed
        return log2_norm(values), absorbed

    def log2_abs_points(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Same as log2_abs_array for a (count, n) complex array of plain points."""
        coords = [XArray.from_complex(points[:, k]) for k in range(self.n)]
        return self.log2_abs_array(coords)

    def known_zeros(self, r: float) -> Optional[List[Point]]:
        """Explicit zero set inside B_r when the family has one."""
        return None

    def log2_mu_upper(self, r: float) -> Optional[float]:
        """Analytic upper bound on log2 mu(f, r), if one is known."""
        return None

    upper_note: Optional[str] = None

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "name": self.name, "n": self.n, "m": self.m, "params": self.params}

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r}, n={self.n}, m={self.m})"


class ExpShiftMap(EntireMap):
    """(e^{z_1} + 1, ..., e^{z_n} + 1); zeros on the lattice ((2k+1) pi i)^n."""

    kind = MapKind.EXP_SHIFT

    def __init__(self, n: int = 1):
        super().__init__(n, n, "exp_shift", {"n": n})

    def evaluate_array(self, coords):
        return [coord.exp() + XArray.ones(coord.shape) for coord in coords]

    def jacobian_array(self, coords):
        shape = coords[0].shape
        rows = []
        for k, coord in enumerate(coords):
            row = [XArray.zeros(shape) for _ in coords]
            row[k] = coord.exp()
            rows.append(row)
        return rows

    def known_zeros(self, r: float) -> List[Point]:
        top = int(math.floor((r / math.pi - 1.0) / 2.0))
        axis = [complex(0.0, (2 * k + 1) * math.pi) for k in range(-top - 1, top + 1)]
        axis = [a for a in axis if abs(a) <= r]
        points: List[Point] = [()]
        for _ in range(self.n):
            points = [p + (a,) for p in points for a in axis
                      if sum(abs(x) ** 2 for x in p) + abs(a) ** 2 <= r * r]
        return sorted(points, key=lambda p: tuple((x.real, x.imag) for x in p))

    def log2_mu_upper(self, r: float) -> float:
        # |e^z + 1| <= e^r + 1 on each coordinate
        return r / math.log(2.0) + math.log2(1.0 + math.exp(-r)) + 0.5 * math.log2(self.n)


class PolynomialMap(EntireMap):
    """One-variable polynomial a_0 + a_1 z + ... + a_d z^d."""

    kind = MapKind.POLYNOMIAL

    def __init__(self, coeffs: Sequence[complex]):
        coeffs = [complex(c) for c in coeffs] or [0j]
        super().__init__(1, 1, "polynomial", {"coeffs": [[c.real, c.imag] for c in coeffs]})
        self.coeffs = coeffs

    def _horner(self, z: XArray, coeffs: Sequence[complex]) -> XArray:
        total = XArray.zeros(z.shape)
        for coeff in reversed(coeffs):
            total = total * z + XArray.full(coeff, z.shape)
        return total

    def evaluate_array(self, coords):
        return [self._horner(coords[0], self.coeffs)]

    def jacobian_array(self, coords):
        derivative = [k * c for k, c in enumerate(self.coeffs)][1:] or [0j]
        return [[self._horner(coords[0], derivative)]]

    def log2_mu_upper(self, r: float) -> float:
        total = sum(abs(c) * r ** k for k, c in enumerate(self.coeffs))
        return math.log2(total) if total > 0 else float("-inf")


class CSGMap(EntireMap):
    """g(z) = prod (1 - z/2^i); zeros at the powers of two."""

    kind = MapKind.CS_G

    def __init__(self, truncation_rel_err: Optional[float] = None):
        params = CSParams() if truncation_rel_err is None else CSParams(truncation_rel_err=truncation_rel_err)
        super().__init__(1, 1, "cs_g", {"truncation_rel_err": params.truncation_rel_err})
        self.tol = params.truncation_rel_err

    def evaluate_array(self, coords):
        value, _ = cs_g_array(coords[0], self.tol)
        return [value]

    def jacobian_array(self, coords):
        _, derivative = cs_g_array(coords[0], self.tol, derivative=True)
        return [[derivative]]

    def known_zeros(self, r: float) -> List[Point]:
        zeros = []
        i = 1
        while 2.0 ** i <= r:
            zeros.append((complex(2.0 ** i),))
            i += 1
        return zeros

    def log2_mu_upper(self, r: float) -> float:
        # |g(z)| <= prod (1 + r 2^-j) on B_r
        return float(log2_growth_bound(XArray.from_complex([r]))[0])


class CSFMap(EntireMap):
    """F(z, w) = (g(z), f(z, w)) for a sequence c_i."""

    kind = MapKind.CS_F
    upper_note = "analytic, possibly loose"

    def __init__(self, params: Optional[CSParams] = None):
        self.cs_params = params or CSParams()
        super().__init__(2, 2, "cs_F", {
            "c_spec": self.cs_params.c_spec,
            "truncation_rel_err": self.cs_params.truncation_rel_err,
        })

    def evaluate_array(self, coords):
        g, f, _ = cs_F_array(coords[0], coords[1], self.cs_params)
        return [g, f]

    def jacobian_array(self, coords):
        _, _, jac = cs_F_array(coords[0], coords[1], self.cs_params, jacobian=True)
        return jac

    def known_zeros(self, r: float) -> Optional[List[Point]]:
        return cs_zeros_inside(r, self.cs_params)

    def log2_mu_upper(self, r: float) -> float:
        # mu is non-decreasing in r, so radii below 2 use the bound at 2
        return mu_cs_bounds(max(r, 2.0))[1]


class ExpressionMap(EntireMap):
    """Map whose components are parsed expressions."""

    kind = MapKind.EXPR

    def __init__(self, components: Sequence[str], n: int):
        asts = [parse(text, n) for text in components]
        super().__init__(n, len(asts), "expr", {"components": [to_text(a) for a in asts]})
        self.asts: List[ExprAst] = asts

    def evaluate_array(self, coords):
        return [evaluate_array(ast, coords) for ast in self.asts]

    def jacobian_array(self, coords):
        return jacobian_array(self.asts, coords)


_ALIASES = {
    "cs_f": MapKind.CS_F,
    "cs_g": MapKind.CS_G,
    "exp_shift": MapKind.EXP_SHIFT,
    "exp_shift_n": MapKind.EXP_SHIFT,
    "polynomial": MapKind.POLYNOMIAL,
}


def _coerce_coeff(value: Any) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        return complex(value.replace(" ", "").replace("i", "j"))
    return complex(value)


def builtin(name: str, **params: Any) -> EntireMap:
    """Construct a built-in map by name (cs_F, cs_g, exp_shift_n, polynomial)."""
    kind = _ALIASES.get(name.strip().lower())
    if kind is None:
        raise UnknownMapError(
            f"Unknown builtin map: {name}",
            user_message=f"There is no builtin map called '{name}'",
            suggestions=["Use one of: cs_F, cs_g, exp_shift, polynomial"],
            context={"name": name},
        )
    try:
        if kind is MapKind.EXP_SHIFT:
            return ExpShiftMap(int(params.get("n", 1)))
        if kind is MapKind.POLYNOMIAL:
            return PolynomialMap([_coerce_coeff(c) for c in params.get("coeffs", [0])])
        if kind is MapKind.CS_G:
            return CSGMap(params.get("truncation_rel_err"))
        cs_kwargs = {k: params[k] for k in ("c_spec", "truncation_rel_err") if params.get(k) is not None}
        return CSFMap(CSParams(**cs_kwargs))
    except (ValidationError, ValueError) as e:
        raise categorize_validation_error(e)


def map_from_config(config: MapConfig) -> EntireMap:
    if config.kind == "builtin":
        params = dict(config.params)
        params.setdefault("n", config.n)
        return builtin(config.name, **params)
    return ExpressionMap(config.components, config.n)


def load_map_config(path: str) -> MapConfig:
    """Read and validate a map-config JSON file."""
    file_path = Path(path)
    if not file_path.is_file():
        raise ConfigurationError(
            f"Map config not found: {path}",
            user_message=f"Map config file '{path}' does not exist",
            suggestions=["Pass builtin:<name> or the path of a map-config JSON file"],
            context={"path": path},
        )
    try:
        document = json.loads(file_path.read_text())
        return MapConfig(**document)
    except json.JSONDecodeError as e:
        raise ConfigurationError(
            f"Map config is not valid JSON: {e}",
            user_message=f"Map config file '{path}' is not valid JSON",
            suggestions=["Check the file against schema/report_schema_v1.json's map_config section"],
            context={"path": path, "line": e.lineno},
        )
    except ValidationError as e:
        raise categorize_validation_error(e)


def map_from_spec(spec: str, n: int = 1, params: Optional[Dict[str, Any]] = None) -> EntireMap:
    """Resolve ``builtin:<name>`` or a map-config path into a map."""
    params = dict(params or {})
    if spec.startswith("builtin:"):
        params.setdefault("n", n)
        entire_map = builtin(spec[len("builtin:"):], **params)
    else:
        entire_map = map_from_config(load_map_config(spec))
    logger.debug("Resolved map", spec=spec, map=repr(entire_map))
    return entire_map
