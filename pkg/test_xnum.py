"""Checks for the extended-exponent complex arithmetic."""

import math

import numpy as np

from src.arith.xnum import (
    LogComplex,
    XArray,
    log2_norm,
    xc_add,
    xc_exp,
    xc_log2_abs,
    xc_log2_abs_split,
    xc_log2_ratio,
    xc_mul,
    xc_pow,
)
from src.utils.errors import ExponentOverflowError, ErrorCategory


def test_multiplication():
    """Exponents add exactly and mantissas renormalize."""
    x = LogComplex.normalize(-0.75, 0.25, 17)
    assert xc_mul(LogComplex.one(), x) == x

    product = xc_mul(LogComplex(1.5, 0.0, 10), LogComplex(1.5, 0.0, 20))
    assert product.mantissa_re == 1.125
    assert product.mantissa_im == 0.0
    assert product.exp2 == 31
    print("✅ 1.5*2^10 x 1.5*2^20 = 1.125*2^31")

    assert xc_mul(LogComplex.zero(), x).is_zero
    print("✅ Zero is absorbing")


def test_addition_and_absorption():
    """The smaller operand is dropped beyond the gap and the sticky bit is set."""
    x = LogComplex.normalize(1.25, -0.5, 3)
    assert xc_add(x, LogComplex.zero()) == x

    two = xc_add(LogComplex.one(), LogComplex.one())
    assert (two.mantissa_re, two.exp2, two.absorbed) == (1.0, 1, False)
    print("✅ 1 + 1 = 2^1")

    absorbed = xc_add(LogComplex(1.0, 0.0, 0), LogComplex(1.0, 0.0, -200))
    assert (absorbed.mantissa_re, absorbed.exp2) == (1.0, 0)
    assert absorbed.absorbed
    # sticky through later products
    assert xc_mul(absorbed, LogComplex.one()).absorbed
    print("✅ Gap of 200 bits absorbs the small term and flags it")

    cancelled = LogComplex.pow2(40) - LogComplex.pow2(40)
    assert cancelled.is_zero
    print("✅ Exact cancellation gives the canonical zero")


def test_log2_abs():
    assert xc_log2_abs(LogComplex.zero()) == float("-inf")
    assert xc_log2_abs(LogComplex(1.0, 0.0, 40)) == 40.0
    assert abs(xc_log2_abs(LogComplex(1.5, 0.0, 0)) - 0.5849625007) < 1e-9
    print("✅ log2|.| of zero, 2^40 and 1.5")


def test_overflow_is_an_error():
    try:
        xc_mul(LogComplex.pow2(2 ** 61), LogComplex.pow2(2 ** 61))
        raise AssertionError("Should have failed but didn't!")
    except ExponentOverflowError as e:
        assert e.category == ErrorCategory.NUMERIC_OVERFLOW
        print(f"✅ Correctly caught overflow: {e.user_message}")


def test_exp_and_powers():
    value = xc_exp(LogComplex.from_complex(1j * math.pi)).to_complex()
    assert abs(value + 1.0) < 1e-14
    print("✅ exp(i pi) = -1")

    big = xc_exp(LogComplex.from_complex(5000.0))
    assert abs(xc_log2_abs(big) - 5000.0 / math.log(2.0)) < 1e-6
    print("✅ exp(5000) stays finite in log2 form")

    cube = xc_pow(LogComplex.from_complex(2.0), 3)
    assert (cube.mantissa_re, cube.exp2) == (1.0, 3)
    print("✅ 2^3 by repeated squaring")


def test_array_operations():
    a = XArray.from_complex([1.0, 2.0, 0.0, 3j])
    b = XArray.pow2(np.array([0, 1, 2, 3]))
    np.testing.assert_allclose((a * b).to_complex(), [1.0, 4.0, 0.0, 24j])
    np.testing.assert_allclose((a + b).to_complex(), [2.0, 4.0, 4.0, 8.0 + 3j])
    assert list(a.is_zero()) == [False, False, True, False]
    print("✅ Elementwise product, sum and zero mask")

    scaled = XArray.full(LogComplex.pow2(-1000), (3,)).scale2(1000)
    np.testing.assert_allclose(scaled.to_complex(), [1.0, 1.0, 1.0])
    print("✅ scale2 shifts exponents exactly")

    norm = log2_norm([XArray.from_complex([3.0]), XArray.from_complex([4.0])])
    assert abs(norm[0] - math.log2(5.0)) < 1e-12
    print("✅ Euclidean norm of (3, 4) in log2")

def _random_scalar(rng, spread):
    re, im = rng.uniform(-1.0, 1.0, size=2)
    return LogComplex.normalize(float(re), float(im), int(rng.integers(-spread, spread + 1)))


def _normal(x):
    if x.is_zero:
        return x.exp2 == 0 and x.mantissa_re == 0.0 and x.mantissa_im == 0.0
    return 1.0 <= math.hypot(x.mantissa_re, x.mantissa_im) < 2.0


def test_log2_of_products_far_out():
    """log2|ab| = log2|a| + log2|b| to 1e-12 for exponents up to 10^6 in magnitude."""
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100_000):
        a = _random_scalar(rng, 10 ** 6)
        b = _random_scalar(rng, 10 ** 6)
        e_ab, f_ab = xc_log2_abs_split(xc_mul(a, b))
        e_a, f_a = xc_log2_abs_split(a)
        e_b, f_b = xc_log2_abs_split(b)
        worst = max(worst, abs(float(e_ab - e_a - e_b) + (f_ab - f_a - f_b)))
    assert worst < 1e-12
    print(f"✅ 10^5 random pairs, worst deviation {worst:.2e}")

    a, b = _random_scalar(rng, 10 ** 6), _random_scalar(rng, 10 ** 6)
    assert abs(xc_log2_ratio(xc_mul(a, b), b) - xc_log2_ratio(a, LogComplex.one())) < 1e-12
    assert xc_log2_abs_split(LogComplex.zero()) == (0, float("-inf"))
    print("✅ Ratios stay exact in the integer part")


def test_normal_form_over_random_streams():
    """Every intermediate of a long random operation stream is in normal form."""
    rng = np.random.default_rng(11)
    for _ in range(20):
        x = _random_scalar(rng, 50)
        for _ in range(500):
            y = _random_scalar(rng, 50)
            op = int(rng.integers(0, 5))
            if op == 0:
                x = xc_mul(x, y)
            elif op == 1:
                x = xc_add(x, y)
            elif op == 2:
                x = x - x if rng.uniform() < 0.05 else x - y
            elif op == 3:
                x = -x
            else:
                x = xc_add(x, LogComplex.zero())
            assert _normal(x), x
    print("✅ 10^4 operations, all results normalized")


def test_commutativity_and_associativity():
    """Products and sums commute exactly and associate within a few ulps."""
    rng = np.random.default_rng(13)
    for _ in range(2000):
        a, b, c = (_random_scalar(rng, 80) for _ in range(3))
        assert xc_mul(a, b) == xc_mul(b, a)
        assert xc_add(a, b) == xc_add(b, a)
        left, right = xc_mul(xc_mul(a, b), c), xc_mul(a, xc_mul(b, c))
        assert abs(xc_log2_ratio(left, right)) < 1e-14
        # same-sign real parts keep the sums away from cancellation
        pa, pb, pc = (LogComplex.normalize(abs(x.mantissa_re) + 0.5, 0.0, x.exp2 % 20) for x in (a, b, c))
        assert abs(xc_log2_ratio(xc_add(xc_add(pa, pb), pc), xc_add(pa, xc_add(pb, pc)))) < 1e-14
    print("✅ 2000 triples: exact commutativity, associativity to 1e-14")



if __name__ == "__main__":
    print("🧪 Testing extended-exponent arithmetic\n")
    for check in (test_multiplication, test_addition_and_absorption, test_log2_abs,
                  test_overflow_is_an_error, test_exp_and_powers, test_array_operations,
                  test_log2_of_products_far_out, test_normal_form_over_random_streams,
                  test_commutativity_and_associativity):
        print("=" * 50)
        print(check.__doc__.strip().splitlines()[0] if check.__doc__ else check.__name__)
        print("=" * 50)
        check()
        print()
    print("🎉 Arithmetic checks completed!")
