"""Extended-exponent complex arithmetic.

A value is ``(mantissa_re + i*mantissa_im) * 2**exp2`` with an integer
exponent and a mantissa of modulus in [1, 2) (or the canonical zero: both
parts 0 and exp2 = 0). Products such as prod(1 - z/2^i) or coefficients
2^(-c_i^2) therefore never overflow or underflow a double.

`LogComplex` is the scalar type; `XArray` is the same representation over
numpy arrays and is what maps evaluate on grids and contours. Both carry a
sticky ``absorbed`` bit set when an addition drops an operand that is more
than `absorption_gap_bits` below the other.
"""

import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np

from config.settings import get_setting
from ..utils.errors import ExponentOverflowError

NEG_INF = float("-inf")
# |Re u| below this goes through numpy's own exp/sin/cos
_DIRECT_RANGE = 700.0
_LOG2_E = 1.0 / math.log(2.0)


def _gap_bits() -> int:
    return int(get_setting("absorption_gap_bits", 100))


def _exponent_limit() -> int:
    return int(get_setting("exponent_limit", 2 ** 62))


def _overflow(exp2, where: str) -> ExponentOverflowError:
    return ExponentOverflowError(
        f"Base-2 exponent {exp2} out of range in {where}",
        user_message="Intermediate value exceeded the extended exponent range (2^62)",
        suggestions=["Reduce the radius or the map parameters"],
        context={"exp2": str(exp2), "operation": where},
    )


@dataclass(frozen=True)
class LogComplex:
    """Normalized extended-exponent complex scalar."""
    mantissa_re: float = 0.0
    mantissa_im: float = 0.0
    exp2: int = 0
    absorbed: bool = False

    @classmethod
    def normalize(cls, re: float, im: float, exp2: int = 0, absorbed: bool = False) -> "LogComplex":
        """Bring (re + i im) * 2^exp2 to normal form."""
        if re == 0.0 and im == 0.0:
            return cls(0.0, 0.0, 0, absorbed)
        modulus = math.hypot(re, im)
        if not math.isfinite(modulus):
            raise _overflow("inf", "normalize")
        _, k = math.frexp(modulus)
        shift = k - 1
        exp2 = int(exp2) + shift
        if abs(exp2) >= _exponent_limit():
            raise _overflow(exp2, "normalize")
        return cls(math.ldexp(re, -shift), math.ldexp(im, -shift), exp2, absorbed)

    @classmethod
    def zero(cls) -> "LogComplex":
        return cls(0.0, 0.0, 0, False)

    @classmethod
    def one(cls) -> "LogComplex":
        return cls(1.0, 0.0, 0, False)

    @classmethod
    def from_complex(cls, value: Union[complex, float, int]) -> "LogComplex":
        value = complex(value)
        return cls.normalize(value.real, value.imag, 0)

    @classmethod
    def pow2(cls, k: int) -> "LogComplex":
        """Exactly 2^k."""
        return cls.normalize(1.0, 0.0, k)

    @property
    def is_zero(self) -> bool:
        return self.mantissa_re == 0.0 and self.mantissa_im == 0.0

    def to_complex(self) -> complex:
        """Plain complex value; saturates to inf / 0 outside double range."""
        if self.is_zero:
            return 0j
        e = max(min(self.exp2, 1100), -1100)
        try:
            return complex(math.ldexp(self.mantissa_re, e), math.ldexp(self.mantissa_im, e))
        except OverflowError:
            return complex(math.copysign(math.inf, self.mantissa_re) if self.mantissa_re else 0.0,
                           math.copysign(math.inf, self.mantissa_im) if self.mantissa_im else 0.0)

    def __mul__(self, other: "LogComplex") -> "LogComplex":
        return xc_mul(self, other)

    def __add__(self, other: "LogComplex") -> "LogComplex":
        return xc_add(self, other)

    def __neg__(self) -> "LogComplex":
        return LogComplex(-self.mantissa_re, -self.mantissa_im, self.exp2, self.absorbed)

    def __sub__(self, other: "LogComplex") -> "LogComplex":
        return xc_add(self, -other)


def xc_mul(a: LogComplex, b: LogComplex) -> LogComplex:
    """Product; exponents add exactly, mantissas multiply in double."""
    absorbed = a.absorbed or b.absorbed
    if a.is_zero or b.is_zero:
        return LogComplex(0.0, 0.0, 0, absorbed)
    re = a.mantissa_re * b.mantissa_re - a.mantissa_im * b.mantissa_im
    im = a.mantissa_re * b.mantissa_im + a.mantissa_im * b.mantissa_re
    return LogComplex.normalize(re, im, a.exp2 + b.exp2, absorbed)


def xc_add(a: LogComplex, b: LogComplex) -> LogComplex:
    """Sum with exact alignment when the exponent gap is small.

    Beyond the gap threshold the smaller operand is dropped and the result
    carries the sticky absorbed bit.
    """
    absorbed = a.absorbed or b.absorbed
    if b.is_zero:
        return LogComplex(a.mantissa_re, a.mantissa_im, a.exp2, absorbed)
    if a.is_zero:
        return LogComplex(b.mantissa_re, b.mantissa_im, b.exp2, absorbed)
    gap = a.exp2 - b.exp2
    if abs(gap) > _gap_bits():
        big = a if gap > 0 else b
        return LogComplex(big.mantissa_re, big.mantissa_im, big.exp2, True)
    top = max(a.exp2, b.exp2)
    re = math.ldexp(a.mantissa_re, a.exp2 - top) + math.ldexp(b.mantissa_re, b.exp2 - top)
    im = math.ldexp(a.mantissa_im, a.exp2 - top) + math.ldexp(b.mantissa_im, b.exp2 - top)
    return LogComplex.normalize(re, im, top, absorbed)


def xc_log2_abs(a: LogComplex) -> float:
    """log2 of the modulus; -inf for the canonical zero.

    The float sum loses the low bits of the fraction once |exp2| is large;
    use `xc_log2_abs_split` to compare magnitudes exactly.
    """
    if a.is_zero:
        return NEG_INF
    return a.exp2 + math.log2(math.hypot(a.mantissa_re, a.mantissa_im))


def xc_log2_abs_split(a: LogComplex) -> Tuple[int, float]:
    """log2 of the modulus as (integer exponent, fraction in [0, 1)); (0, -inf) for zero."""
    if a.is_zero:
        return 0, NEG_INF
    frac = math.log2(math.hypot(a.mantissa_re, a.mantissa_im))
    if frac >= 1.0:
        return a.exp2 + 1, frac - 1.0
    return a.exp2, max(frac, 0.0)


def xc_log2_ratio(a: LogComplex, b: LogComplex) -> float:
    """log2(|a| / |b|) without rounding the exponents into a float first."""
    ea, fa = xc_log2_abs_split(a)
    eb, fb = xc_log2_abs_split(b)
    return float(ea - eb) + (fa - fb)


def xc_exp(a: LogComplex) -> LogComplex:
    return XArray.from_scalars([a]).exp().item(0)


def xc_pow(a: LogComplex, k: int) -> LogComplex:
    return XArray.from_scalars([a]).pow_int(k).item(0)


class XArray:
    """Array of extended-exponent complex values (same normal form as LogComplex)."""

    __slots__ = ("mant", "exp2", "absorbed")

    def __init__(self, mant: np.ndarray, exp2: np.ndarray, absorbed: np.ndarray = None, normalized: bool = False):
        mant = np.asarray(mant, dtype=np.complex128)
        exp2 = np.broadcast_to(np.asarray(exp2, dtype=np.int64), mant.shape)
        if absorbed is None:
            absorbed = np.zeros(mant.shape, dtype=bool)
        absorbed = np.broadcast_to(np.asarray(absorbed, dtype=bool), mant.shape)
        if normalized:
            self.mant, self.exp2, self.absorbed = mant, np.array(exp2), np.array(absorbed)
        else:
            self.mant, self.exp2 = _normalize_arrays(mant, exp2)
            self.absorbed = np.array(absorbed)

    # construction

    @classmethod
    def from_complex(cls, values) -> "XArray":
        return cls(np.asarray(values, dtype=np.complex128), 0)

    @classmethod
    def from_scalars(cls, values: Iterable[LogComplex]) -> "XArray":
        values = list(values)
        mant = np.array([complex(v.mantissa_re, v.mantissa_im) for v in values], dtype=np.complex128)
        exp2 = np.array([v.exp2 for v in values], dtype=np.int64)
        absorbed = np.array([v.absorbed for v in values], dtype=bool)
        return cls(mant, exp2, absorbed, normalized=True)

    @classmethod
    def full(cls, value: Union[LogComplex, complex, float], shape) -> "XArray":
        if not isinstance(value, LogComplex):
            value = LogComplex.from_complex(value)
        mant = np.full(shape, complex(value.mantissa_re, value.mantissa_im), dtype=np.complex128)
        return cls(mant, np.full(shape, value.exp2, dtype=np.int64),
                   np.full(shape, value.absorbed, dtype=bool), normalized=True)

    @classmethod
    def zeros(cls, shape) -> "XArray":
        return cls(np.zeros(shape, dtype=np.complex128), np.zeros(shape, dtype=np.int64), normalized=True)

    @classmethod
    def ones(cls, shape) -> "XArray":
        return cls(np.ones(shape, dtype=np.complex128), np.zeros(shape, dtype=np.int64), normalized=True)

    @classmethod
    def pow2(cls, k, shape=()) -> "XArray":
        """Exactly 2^k (k may be an integer array)."""
        k = np.broadcast_to(np.asarray(k, dtype=np.int64), shape if shape else np.shape(k))
        if np.any(np.abs(k) >= _exponent_limit()):
            raise _overflow(int(np.max(np.abs(k))), "pow2")
        return cls(np.ones(k.shape, dtype=np.complex128), k, normalized=True)

    @staticmethod
    def concatenate(parts: Sequence["XArray"], axis: int = 0) -> "XArray":
        return XArray(np.concatenate([p.mant for p in parts], axis=axis),
                      np.concatenate([p.exp2 for p in parts], axis=axis),
                      np.concatenate([p.absorbed for p in parts], axis=axis), normalized=True)

    @staticmethod
    def where(mask, a: "XArray", b: "XArray") -> "XArray":
        return XArray(np.where(mask, a.mant, b.mant), np.where(mask, a.exp2, b.exp2),
                      np.where(mask, a.absorbed, b.absorbed), normalized=True)

    # inspection

    @property
    def shape(self):
        return self.mant.shape

    def __len__(self) -> int:
        return len(self.mant)

    def __getitem__(self, index) -> "XArray":
        return XArray(self.mant[index], self.exp2[index], self.absorbed[index], normalized=True)

    def reshape(self, *shape) -> "XArray":
        return XArray(self.mant.reshape(*shape), self.exp2.reshape(*shape),
                      self.absorbed.reshape(*shape), normalized=True)

    def item(self, index=0) -> LogComplex:
        flat = np.ravel_multi_index(index, self.shape) if isinstance(index, tuple) else index
        m = self.mant.reshape(-1)[flat]
        return LogComplex(float(m.real), float(m.imag), int(self.exp2.reshape(-1)[flat]),
                          bool(self.absorbed.reshape(-1)[flat]))

    def to_scalars(self) -> List[LogComplex]:
        return [self.item(i) for i in range(self.mant.size)]

    def is_zero(self) -> np.ndarray:
        return self.mant == 0

    def log2_abs(self) -> np.ndarray:
        """log2 of the moduli, -inf at exact zeros."""
        modulus = np.abs(self.mant)
        with np.errstate(divide="ignore"):
            return np.where(modulus == 0, NEG_INF, np.log2(modulus) + self.exp2)

    def to_complex(self) -> np.ndarray:
        """Plain complex128 values (inf / 0 outside double range)."""
        e = np.clip(self.exp2, -1100, 1100).astype(np.int64)
        with np.errstate(over="ignore", invalid="ignore"):
            return np.ldexp(self.mant.real, e) + 1j * np.ldexp(self.mant.imag, e)

    def angle(self) -> np.ndarray:
        """Argument; independent of the exponent."""
        return np.angle(self.mant)

    # arithmetic

    def __mul__(self, other: "XArray") -> "XArray":
        other = _coerce(other, self.shape)
        exp2 = self.exp2 + other.exp2
        return XArray(self.mant * other.mant, exp2, self.absorbed | other.absorbed)

    __rmul__ = __mul__

    def __neg__(self) -> "XArray":
        return XArray(-self.mant, self.exp2, self.absorbed, normalized=True)

    def __add__(self, other: "XArray") -> "XArray":
        other = _coerce(other, self.shape)
        return _add_arrays(self, other)

    __radd__ = __add__

    def __sub__(self, other: "XArray") -> "XArray":
        return self + (-_coerce(other, self.shape))

    def __rsub__(self, other) -> "XArray":
        return _coerce(other, self.shape) + (-self)

    def scale2(self, k) -> "XArray":
        """Multiply by 2^k exactly."""
        k = np.asarray(k, dtype=np.int64)
        exp2 = np.where(self.mant == 0, 0, self.exp2 + k)
        if np.any(np.abs(exp2) >= _exponent_limit()):
            raise _overflow(int(np.max(np.abs(exp2))), "scale2")
        return XArray(self.mant, exp2, self.absorbed, normalized=True)

    def pow_int(self, k: int) -> "XArray":
        """Integer power by repeated squaring (k >= 0)."""
        if k < 0:
            raise ValueError("negative powers are not entire")
        result = XArray.ones(self.shape)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def exp(self) -> "XArray":
        """e^u with the real part routed through the base-2 exponent."""
        u = self.to_complex()
        direct = np.isfinite(u) & (np.abs(u.real) < _DIRECT_RANGE)
        result_mant = np.ones(self.shape, dtype=np.complex128)
        result_exp = np.zeros(self.shape, dtype=np.int64)
        if np.any(direct):
            value = XArray.from_complex(np.exp(np.where(direct, u, 0)))
            result_mant = np.where(direct, value.mant, result_mant)
            result_exp = np.where(direct, value.exp2, result_exp)
        if not np.all(direct):
            far = ~direct
            t = np.where(far, u.real, 0.0) * _LOG2_E
            if np.any(~np.isfinite(t[far])) or np.any(np.abs(t[far]) >= _exponent_limit()):
                raise _overflow("exp(%s)" % np.max(np.abs(u.real[far])), "exp")
            k = np.floor(t)
            frac = t - k
            phase = np.exp(1j * np.where(far, u.imag, 0.0))
            far_mant = np.exp2(frac) * phase
            result_mant = np.where(far, far_mant, result_mant)
            result_exp = np.where(far, k.astype(np.int64), result_exp)
        return XArray(result_mant, result_exp, self.absorbed)

    def sin(self) -> "XArray":
        u = self.to_complex()
        direct = np.isfinite(u) & (np.abs(u.imag) < _DIRECT_RANGE)
        if np.all(direct):
            return XArray(np.sin(u), 0, self.absorbed)
        iu = _times_i(self)
        value = (iu.exp() - (-iu).exp()) * XArray.full(complex(0.0, -0.5), self.shape)
        return XArray.where(direct, XArray(np.sin(np.where(direct, u, 0)), 0, self.absorbed), value)

    def cos(self) -> "XArray":
        u = self.to_complex()
        direct = np.isfinite(u) & (np.abs(u.imag) < _DIRECT_RANGE)
        if np.all(direct):
            return XArray(np.cos(u), 0, self.absorbed)
        iu = _times_i(self)
        value = (iu.exp() + (-iu).exp()).scale2(-1)
        return XArray.where(direct, XArray(np.cos(np.where(direct, u, 0)), 0, self.absorbed), value)

    def sum(self, axis: int = 0) -> "XArray":
        """Sequential extended sum along an axis (fixed order)."""
        moved = XArray(np.moveaxis(self.mant, axis, 0), np.moveaxis(self.exp2, axis, 0),
                       np.moveaxis(self.absorbed, axis, 0), normalized=True)
        total = XArray.zeros(moved.shape[1:])
        for index in range(moved.shape[0]):
            total = total + moved[index]
        return total

    def prod(self, axis: int = 0) -> "XArray":
        moved = XArray(np.moveaxis(self.mant, axis, 0), np.moveaxis(self.exp2, axis, 0),
                       np.moveaxis(self.absorbed, axis, 0), normalized=True)
        total = XArray.ones(moved.shape[1:])
        for index in range(moved.shape[0]):
            total = total * moved[index]
        return total


def _times_i(x: XArray) -> XArray:
    return XArray(x.mant * 1j, x.exp2, x.absorbed, normalized=True)


def _coerce(value, shape) -> XArray:
    if isinstance(value, XArray):
        return value
    if isinstance(value, LogComplex):
        return XArray.full(value, shape)
    return XArray.full(LogComplex.from_complex(value), shape)


def _normalize_arrays(mant: np.ndarray, exp2: np.ndarray):
    modulus = np.abs(mant)
    if not np.all(np.isfinite(modulus)):
        raise _overflow("inf", "normalize")
    zero = modulus == 0
    _, k = np.frexp(modulus)
    shift = np.where(zero, 0, k.astype(np.int64) - 1)
    new_exp = np.where(zero, 0, exp2 + shift)
    if new_exp.size and np.any(np.abs(new_exp) >= _exponent_limit()):
        raise _overflow(int(np.max(np.abs(new_exp))), "normalize")
    new_mant = np.ldexp(mant.real, -shift) + 1j * np.ldexp(mant.imag, -shift)
    new_mant = np.where(zero, 0j, new_mant)
    return new_mant, new_exp


def _add_arrays(a: XArray, b: XArray) -> XArray:
    gap_bits = _gap_bits()
    za, zb = a.mant == 0, b.mant == 0
    gap = a.exp2 - b.exp2
    far = (np.abs(gap) > gap_bits) & ~za & ~zb
    top = np.where(za, b.exp2, np.where(zb, a.exp2, np.maximum(a.exp2, b.exp2)))
    # shifts are clamped so far-apart entries do not produce huge ldexp arguments
    shift_a = np.clip(a.exp2 - top, -gap_bits - 64, 0)
    shift_b = np.clip(b.exp2 - top, -gap_bits - 64, 0)
    aligned = (np.ldexp(a.mant.real, shift_a) + np.ldexp(b.mant.real, shift_b)) \
        + 1j * (np.ldexp(a.mant.imag, shift_a) + np.ldexp(b.mant.imag, shift_b))
    aligned = np.where(za, b.mant, np.where(zb, a.mant, aligned))
    big_mant = np.where(gap > 0, a.mant, b.mant)
    big_exp = np.where(gap > 0, a.exp2, b.exp2)
    mant = np.where(far, big_mant, aligned)
    exp2 = np.where(far, big_exp, top)
    absorbed = a.absorbed | b.absorbed | far
    return XArray(mant, exp2, absorbed)


def log2_norm(components: Sequence[XArray]) -> np.ndarray:
    """log2 of the Euclidean norm sqrt(sum |f_j|^2) of a vector of arrays."""
    total = None
    for comp in components:
        twice = 2.0 * comp.log2_abs()
        total = twice if total is None else np.logaddexp2(total, twice)
    return 0.5 * total
