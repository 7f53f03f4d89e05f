"""Exact comparisons of rationals against powers with rational exponents.

Every probability in this library is a `fractions.Fraction`, and every
threshold is of the form ``2**(-q)`` (or more generally a product of integer
bases raised to rational exponents).  Those thresholds are irrational in
general and are never materialized; instead comparisons are decided exactly:

* integer exponents: plain Fraction comparison;
* small exponent denominators: clear the root by raising both sides
  (``p <= 2**(-a/d)  <=>  p**d <= 2**(-a)``, both sides nonnegative);
* huge dyadic denominators (e.g. density witnesses with 2**-12 resolution):
  certified interval arithmetic on log2, with the cleared-power comparison as
  a last-resort exact fallback.  ``2**q`` is rational only for integer ``q``,
  so for non-integer exponents the interval refinement always terminates.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Tuple

__all__ = [
    "sign",
    "is_power_of_two",
    "exact_log2",
    "log2_bounds",
    "cmp_pow2",
    "cmp_products",
    "frac_str",
    "frac_decimal",
    "parse_frac",
]

# Clear roots directly up to this exponent denominator; beyond it, go through
# the interval path first.
_DIRECT_DENOM_LIMIT = 64

# Interval refinement schedule (fractional bits of log2 precision).
_BITS_SCHEDULE = (32, 96, 256, 768)


def sign(x) -> int:
    return (x > 0) - (x < 0)


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def exact_log2(x: Fraction):
    """log2(x) as a Fraction if x is an integer power of two, else None."""
    if x <= 0:
        raise ValueError("log of a non-positive value")
    num, den = x.numerator, x.denominator
    if is_power_of_two(num) and is_power_of_two(den):
        return Fraction(num.bit_length() - den.bit_length())
    return None


def _floor_log2(x: Fraction) -> int:
    a, b = x.numerator, x.denominator
    e = a.bit_length() - b.bit_length()
    # adjust so that 2^e <= a/b < 2^(e+1)
    while (b << e if e >= 0 else b) > (a if e >= 0 else a << -e):
        e -= 1
    while (b << (e + 1) if e + 1 >= 0 else b) <= (a if e + 1 >= 0 else a << -(e + 1)):
        e += 1
    return e


def log2_bounds(x: Fraction, frac_bits: int) -> Tuple[Fraction, Fraction]:
    """Certified dyadic bounds lo <= log2(x) <= hi with width about 2**-frac_bits.

    Uses the classic square-and-extract-bit algorithm twice, once with all
    roundings directed down and once directed up, so each bound is certified
    by construction (no uncertified floating point anywhere).
    """
    if x <= 0:
        raise ValueError("log of a non-positive value")
    ex = exact_log2(x)
    if ex is not None:
        return ex, ex
    e = _floor_log2(x)
    prec = frac_bits + 40
    one = 1 << prec
    # mantissa m = x / 2^e in [1, 2), scaled by 2^prec
    a, b = x.numerator, x.denominator
    shift = prec - e
    if shift >= 0:
        num, den = a << shift, b
    else:
        num, den = a, b << -shift
    m_lo = num // den
    m_hi = m_lo if num % den == 0 else m_lo + 1

    def run(m: int, ceil: bool) -> int:
        acc = 0
        for _ in range(frac_bits):
            m = m * m
            m = -((-m) >> prec) if ceil else m >> prec
            acc <<= 1
            if m >= 2 * one:
                acc |= 1
                m = -((-m) >> 1) if ceil else m >> 1
        return acc

    acc_lo = run(m_lo, ceil=False)
    acc_hi = run(m_hi, ceil=True)
    scale = 1 << frac_bits
    # 1-ulp safety margins cover the bounded residual mantissa drift.
    lo = e + Fraction(acc_lo - 1, scale)
    hi = e + Fraction(acc_hi + 2, scale)
    return lo, hi


def cmp_pow2(p: Fraction, q: Fraction) -> int:
    """Sign of p - 2**(-q), exactly, for p >= 0 and rational q."""
    p = Fraction(p)
    q = Fraction(q)
    if p < 0:
        raise ValueError("cmp_pow2 expects a nonnegative left-hand side")
    if p == 0:
        return -1
    d = q.denominator
    if d == 1:
        a = q.numerator
        target = Fraction(1, 1 << a) if a >= 0 else Fraction(1 << -a)
        return sign(p - target)
    if d <= _DIRECT_DENOM_LIMIT:
        return _cmp_pow2_cleared(p, q)
    # log2(p) vs -q; equality impossible since 2**q is irrational here
    target = -q
    for bits in _BITS_SCHEDULE:
        lo, hi = log2_bounds(p, bits)
        if hi < target:
            return -1
        if lo > target:
            return 1
    return _cmp_pow2_cleared(p, q)


def _cmp_pow2_cleared(p: Fraction, q: Fraction) -> int:
    # p vs 2^(-a/d)  <=>  p^d vs 2^(-a), monotone since both sides >= 0
    a, d = q.numerator, q.denominator
    lhs = p ** d
    if a >= 0:
        return sign(lhs * (1 << a) - 1)
    return sign(lhs - (1 << -a))


def cmp_products(
    a: Fraction,
    a_pows: Iterable[Tuple[int, Fraction]],
    b: Fraction,
    b_pows: Iterable[Tuple[int, Fraction]] = (),
) -> int:
    """Sign of a*prod(base**exp) - b*prod(base**exp), all exact.

    Coefficients must be nonnegative rationals; bases positive integers;
    exponents rationals.  Used for every inequality whose cleared form mixes
    powers of 2 with powers of n.
    """
    a = Fraction(a)
    b = Fraction(b)
    a_pows = [(int(base), Fraction(exp)) for base, exp in a_pows]
    b_pows = [(int(base), Fraction(exp)) for base, exp in b_pows]
    if a < 0 or b < 0:
        raise ValueError("cmp_products expects nonnegative coefficients")
    for base, _ in a_pows + b_pows:
        if base <= 0:
            raise ValueError("bases must be positive integers")
    if a == 0 and b == 0:
        return 0
    if a == 0:
        return -1
    if b == 0:
        return 1
    # single side: ratio r = a/b, compare log2(r) + sum(e*log2(base)) vs 0
    terms = [(base, exp) for base, exp in a_pows if base != 1 and exp != 0]
    terms += [(base, -exp) for base, exp in b_pows if base != 1 and exp != 0]
    ratio = a / b
    denoms = [exp.denominator for _, exp in terms]
    d = lcm(*denoms) if denoms else 1
    if d <= _DIRECT_DENOM_LIMIT:
        return _cmp_products_cleared(ratio, terms, d)
    for bits in _BITS_SCHEDULE:
        lo, hi = log2_bounds(ratio, bits)
        for base, exp in terms:
            blo, bhi = log2_bounds(Fraction(base), bits)
            if exp >= 0:
                lo, hi = lo + exp * blo, hi + exp * bhi
            else:
                lo, hi = lo + exp * bhi, hi + exp * blo
        if hi < 0:
            return -1
        if lo > 0:
            return 1
    return _cmp_products_cleared(ratio, terms, d)


def _cmp_products_cleared(ratio: Fraction, terms, d: int) -> int:
    lhs = ratio ** d
    rhs = Fraction(1)
    for base, exp in terms:
        k = int(exp * d)
        if k >= 0:
            lhs *= Fraction(base) ** k
        else:
            rhs *= Fraction(base) ** (-k)
    return sign(lhs - rhs)


# -- rendering / parsing ----------------------------------------------------

def frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def frac_decimal(x: Fraction, digits: int = 12) -> str:
    """Approximate decimal rendering with `digits` significant digits.

    Deterministic (pure integer arithmetic); always labeled approximate by
    callers that print it.
    """
    x = Fraction(x)
    if x == 0:
        return "0"
    neg = x < 0
    if neg:
        x = -x
    e = 0
    while x >= 10:
        x /= 10
        e += 1
    while x < 1:
        x *= 10
        e -= 1
    scaled = x * 10 ** (digits - 1)
    mant = scaled.numerator // scaled.denominator
    if 2 * (scaled.numerator % scaled.denominator) >= scaled.denominator:
        mant += 1
    if mant >= 10 ** digits:  # rounding carried over
        mant //= 10
        e += 1
    s = str(mant)
    if -7 < e < digits:  # positional rendering
        if e >= 0:
            head, tail = s[: e + 1], s[e + 1:].rstrip("0")
            text = head + ("." + tail if tail else "")
        else:
            text = "0." + "0" * (-e - 1) + s.rstrip("0")
    else:
        tail = s[1:].rstrip("0")
        text = s[0] + ("." + tail if tail else "") + f"e{e}"
    return ("-" if neg else "") + text


def parse_frac(text: str) -> Fraction:
    return Fraction(str(text).strip())
