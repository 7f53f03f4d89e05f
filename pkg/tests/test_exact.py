import math
import random
from fractions import Fraction as F

import pytest

from liftsim.exact import (
    cmp_pow2,
    cmp_products,
    exact_log2,
    frac_decimal,
    frac_str,
    log2_bounds,
    parse_frac,
    _cmp_pow2_cleared,
)


def test_cmp_pow2_basics():
    assert cmp_pow2(F(1, 2), F(1)) == 0          # 2^-1 = 1/2
    assert cmp_pow2(F(0), F(5)) == -1            # zero is below any threshold
    assert cmp_pow2(F(1), F(0)) == 0
    assert cmp_pow2(F(3, 4), F(1)) == 1
    # negative exponents: threshold above 1
    assert cmp_pow2(F(1), F(-2)) == -1           # 1 < 2^2


def test_cmp_pow2_fractional_exponent():
    # (1/3)^2 = 1/9 < 1/8 = 2^-3, hence 1/3 < 2^(-3/2)
    assert cmp_pow2(F(1, 3), F(3, 2)) == -1
    # and slightly above the threshold
    assert cmp_pow2(F(36, 100), F(3, 2)) == 1    # 0.36 > 0.3535...
    # exact equality is impossible for non-integer exponents on rationals
    assert cmp_pow2(F(5, 7), F(1, 3)) in (-1, 1)


def test_cmp_pow2_interval_path_agrees_with_cleared():
    rng = random.Random(7)
    for _ in range(500):
        p = F(rng.randrange(1, 3000), rng.randrange(1, 3000))
        q = F(rng.randrange(-30, 30), 2 ** rng.randrange(7, 14))
        assert cmp_pow2(p, q) == _cmp_pow2_cleared(p, q)


def test_exact_log2():
    assert exact_log2(F(8)) == 3
    assert exact_log2(F(1, 4)) == -2
    assert exact_log2(F(3)) is None
    with pytest.raises(ValueError):
        exact_log2(F(0))


def test_log2_bounds_certified():
    rng = random.Random(13)
    for _ in range(300):
        x = F(rng.randrange(1, 10 ** 5), rng.randrange(1, 10 ** 5))
        lo, hi = log2_bounds(x, 25)
        t = math.log2(x)
        assert float(lo) - 1e-6 <= t <= float(hi) + 1e-6
        assert hi - lo <= F(1, 2 ** 22)
    for e in range(-12, 13):
        lo, hi = log2_bounds(F(2) ** e, 8)
        assert lo == hi == e


def test_cmp_products_mixed_bases():
    # n^2 * Pr >= 4 with n=3, Pr=1/2: 9/2 >= 4
    assert cmp_products(F(1, 2), [(3, F(2))], F(4), []) == 1
    assert cmp_products(F(1, 2), [(3, F(1))], F(4), []) == -1
    assert cmp_products(F(1), [(2, F(3, 2))], F(1), [(2, F(3, 2))]) == 0
    assert cmp_products(F(0), [], F(1), [(2, F(5))]) == -1
    assert cmp_products(F(1), [], F(0), []) == 1
    # fractional exponents on distinct bases
    lhs = math.log2(3) * 0.5
    rhs = math.log2(5) * 0.25
    want = 1 if lhs > rhs else -1
    assert cmp_products(F(1), [(3, F(1, 2))], F(1), [(5, F(1, 4))]) == want


def test_frac_rendering():
    assert frac_str(F(3, 4)) == "3/4"
    assert frac_str(F(5)) == "5"
    assert frac_decimal(F(1, 2)) == "0.5"
    assert frac_decimal(F(0)) == "0"
    assert frac_decimal(F(1, 3)) == "0.333333333333"
    assert frac_decimal(F(1, 10 ** 9)) == "1e-9"
    assert parse_frac("3/8") == F(3, 8)
    assert parse_frac("0.25") == F(1, 4)
