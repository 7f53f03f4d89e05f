"""Two-party boolean gadgets: tables, exact discrepancy, XOR powers, checks.

Discrepancy is maximized by exhaustive enumeration over all combinatorial
rectangles.  Sides are subsets of the 2^s-element input domain, represented
as bitmasks (bit i = i-th domain element in lexicographic order); rectangles
are ordered by (A mask, B mask) and the reported witness is the first
maximizer in that order.  The inner loop is pure integer arithmetic; the
enumeration is a deterministic fold, so it could be split across workers
without changing the result.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Tuple

from .dist import DistributionTable, ZERO
from .errors import BudgetError, DomainError, LiftsimError
from .exact import cmp_pow2

__all__ = [
    "Gadget",
    "Rectangle",
    "DiscrepancyResult",
    "xor_power",
    "eval_blocks",
    "rectangle_discrepancy",
    "discrepancy",
    "check_xor_lemma",
    "XorLemmaReport",
    "extractor_check",
    "sampling_check",
    "xor_extractor_check",
    "xor_sampling_check",
    "random_gadget",
    "builtin_gadget",
    "BUILTIN_NAMES",
    "gadget_to_json",
    "gadget_from_json",
]

RECT_SIDE_LIMIT = 16


class Gadget:
    """g : {0,1}^b x {0,1}^b -> {0,1} as an explicit table.

    `table[x * side + y]` is the output on (x, y); x and y are integers whose
    binary expansions (b bits, most significant first) are the input strings.
    """

    __slots__ = ("b", "side", "table", "name")

    def __init__(self, b: int, table: Sequence[int], name: str = ""):
        if b < 1:
            raise DomainError("block length must be at least 1")
        side = 1 << b
        table = tuple(int(v) for v in table)
        if len(table) != side * side:
            raise DomainError(f"table must have {side * side} entries, got {len(table)}")
        if any(v not in (0, 1) for v in table):
            raise DomainError("table entries must be bits")
        self.b = b
        self.side = side
        self.table = table
        self.name = name

    def eval(self, x: int, y: int) -> int:
        if not (0 <= x < self.side and 0 <= y < self.side):
            raise DomainError(f"inputs must lie in [0, {self.side})")
        return self.table[x * self.side + y]

    def transpose(self) -> "Gadget":
        """Same function with the roles of the two parties swapped."""
        side = self.side
        t = [self.table[y * side + x] for x in range(side) for y in range(side)]
        return Gadget(self.b, t, name=self.name + "^T" if self.name else "")

    def __eq__(self, other) -> bool:
        return isinstance(other, Gadget) and self.b == other.b and self.table == other.table

    def __repr__(self) -> str:
        label = self.name or f"b={self.b}"
        return f"Gadget({label})"


@dataclass(frozen=True)
class Rectangle:
    """A combinatorial rectangle given by sorted tuples of domain indices."""

    a: Tuple[int, ...]
    b: Tuple[int, ...]

    @property
    def empty(self) -> bool:
        return not self.a or not self.b


def _split_blocks(v: int, m: int, b: int) -> Tuple[int, ...]:
    mask = (1 << b) - 1
    return tuple((v >> (b * (m - 1 - i))) & mask for i in range(m))


def xor_power(g: Gadget, m: int) -> Gadget:
    """Parity of m independent copies, as a gadget on b*m-bit blocks."""
    if m < 1:
        raise DomainError("xor power needs m >= 1")
    if m == 1:
        return g
    side = 1 << (g.b * m)
    table = []
    for x in range(side):
        xs = _split_blocks(x, m, g.b)
        for y in range(side):
            ys = _split_blocks(y, m, g.b)
            acc = 0
            for xi, yi in zip(xs, ys):
                acc ^= g.eval(xi, yi)
            table.append(acc)
    name = f"{g.name}^xor{m}" if g.name else f"xor^{m}"
    return Gadget(g.b * m, table, name=name)


def eval_blocks(g: Gadget, xs: Sequence[int], ys: Sequence[int]) -> Tuple[int, ...]:
    """Coordinatewise outputs g(x_i, y_i) on equal-length block tuples."""
    if len(xs) != len(ys):
        raise DomainError("block tuples must have equal length")
    return tuple(g.eval(x, y) for x, y in zip(xs, ys))


def _sign_row(g: Gadget, x: int) -> Tuple[int, ...]:
    return tuple(1 - 2 * g.table[x * g.side + y] for y in range(g.side))


def rectangle_discrepancy(g: Gadget, rect: Rectangle) -> Fraction:
    """|Pr[g=0 and in R] - Pr[g=1 and in R]| under uniform inputs."""
    total = 0
    for x in rect.a:
        row = x * g.side
        for y in rect.b:
            total += 1 - 2 * g.table[row + y]
    return Fraction(abs(total), g.side * g.side)


@dataclass(frozen=True)
class DiscrepancyResult:
    value: Fraction
    argmax: Rectangle


def _mask_to_tuple(mask: int) -> Tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def discrepancy(g: Gadget, side_limit: int = RECT_SIDE_LIMIT) -> DiscrepancyResult:
    """Exact maximum rectangle discrepancy with a canonical witness.

    For each side A (Gray-code walk keeping column sums incremental) the best
    opposing side is the set of columns whose sums share a sign; the first
    maximizer in (A, B) mask order is reported.
    """
    n = g.side
    if n > side_limit:
        raise BudgetError("rectangle enumeration side domain", n, side_limit)
    rows = [_sign_row(g, x) for x in range(n)]
    col = [0] * n
    best_num = -1
    best_pair = None  # (a_mask, b_mask)

    prev = 0
    for k in range(1 << n):
        gray = k ^ (k >> 1)
        diff = gray ^ prev
        if diff:
            x = diff.bit_length() - 1
            row = rows[x]
            if gray & diff:
                for y in range(n):
                    col[y] += row[y]
            else:
                for y in range(n):
                    col[y] -= row[y]
        prev = gray

        pos = neg = 0
        pos_mask = neg_mask = 0
        for y in range(n):
            c = col[y]
            if c > 0:
                pos += c
                pos_mask |= 1 << y
            elif c < 0:
                neg -= c
                neg_mask |= 1 << y
        if pos > neg:
            val, bmask = pos, pos_mask
        elif neg > pos:
            val, bmask = neg, neg_mask
        else:
            val, bmask = pos, min(pos_mask, neg_mask)
        if val > best_num or (val == best_num and (gray, bmask) < best_pair):
            best_num = val
            best_pair = (gray, bmask)

    a_mask, b_mask = best_pair
    rect = Rectangle(_mask_to_tuple(a_mask), _mask_to_tuple(b_mask))
    return DiscrepancyResult(Fraction(best_num, n * n), rect)


@dataclass
class XorLemmaReport:
    m: int
    disc_base: Fraction
    lower: Fraction
    value: Fraction
    upper: Fraction
    sandwich_holds: bool


def check_xor_lemma(g: Gadget, m: int, side_limit: int = RECT_SIDE_LIMIT) -> XorLemmaReport:
    """disc(g)^m <= disc(xor-power) <= (64*disc(g))^m, upper clamped at 1."""
    base = discrepancy(g, side_limit).value
    value = discrepancy(xor_power(g, m), side_limit).value
    lower = base ** m
    upper = min(Fraction(1), (64 * base) ** m)
    return XorLemmaReport(m, base, lower, value, upper, lower <= value <= upper)


# -- extractor / sampling checks ---------------------------------------------

@dataclass
class ExtractorReport:
    disc_ok: bool
    entropy_ok: bool
    bias: Fraction
    bound_bits: Fraction  # conclusion threshold is 2**(-bound_bits)
    conclusion: bool

    @property
    def hypothesis(self) -> bool:
        return self.disc_ok and self.entropy_ok

    @property
    def implication_holds(self) -> bool:
        return (not self.hypothesis) or self.conclusion


def _entropy_sum_at_least(x: DistributionTable, y: DistributionTable, bits: Fraction) -> bool:
    return cmp_pow2(x.maxprob() * y.maxprob(), bits) <= 0


def _joint_bias(g: Gadget, x: DistributionTable, y: DistributionTable) -> Fraction:
    p0 = ZERO
    for a in x.support():
        row = a * g.side
        for c in y.support():
            if g.table[row + c] == 0:
                p0 += x.mass[a] * y.mass[c]
    return abs(2 * p0 - 1)


def _conditional_bias(g: Gadget, a: int, y: DistributionTable) -> Fraction:
    row = a * g.side
    p0 = sum((y.mass[c] for c in y.support() if g.table[row + c] == 0), ZERO)
    return abs(2 * p0 - 1)


def extractor_check(
    g: Gadget,
    x: DistributionTable,
    y: DistributionTable,
    eta: Fraction,
    lam: Fraction,
    disc_value: Fraction | None = None,
) -> ExtractorReport:
    """Low discrepancy plus joint min-entropy (2-eta+lam)*log|domain| forces
    bias(g(X,Y)) <= |domain|^(-lam); all quantities exact."""
    eta, lam = Fraction(eta), Fraction(lam)
    s = g.b
    disc = discrepancy(g).value if disc_value is None else disc_value
    disc_ok = cmp_pow2(disc, eta * s) <= 0
    entropy_ok = _entropy_sum_at_least(x, y, (2 - eta + lam) * s)
    bv = _joint_bias(g, x, y)
    bound_bits = lam * s
    return ExtractorReport(disc_ok, entropy_ok, bv, bound_bits, cmp_pow2(bv, bound_bits) <= 0)


@dataclass
class SamplingReport:
    disc_ok: bool
    entropy_ok: bool
    bad_mass: Fraction
    bound_bits: Fraction
    conclusion: bool

    @property
    def hypothesis(self) -> bool:
        return self.disc_ok and self.entropy_ok

    @property
    def implication_holds(self) -> bool:
        return (not self.hypothesis) or self.conclusion


def sampling_check(
    g: Gadget,
    x: DistributionTable,
    y: DistributionTable,
    gamma: Fraction,
    lam: Fraction,
    eta: Fraction,
    disc_value: Fraction | None = None,
) -> SamplingReport:
    """Bounds the X-mass of values whose conditional bias exceeds the
    extractor threshold; the bad mass must stay strictly below |domain|^(-gamma)."""
    gamma, lam, eta = Fraction(gamma), Fraction(lam), Fraction(eta)
    s = g.b
    disc = discrepancy(g).value if disc_value is None else disc_value
    disc_ok = cmp_pow2(disc, eta * s) <= 0
    entropy_ok = _entropy_sum_at_least(x, y, (2 - eta + gamma + lam) * s + 1)
    bad = ZERO
    for a in x.support():
        if cmp_pow2(_conditional_bias(g, a, y), lam * s) > 0:
            bad += x.mass[a]
    bound_bits = gamma * s
    return SamplingReport(disc_ok, entropy_ok, bad, bound_bits, cmp_pow2(bad, bound_bits) < 0)


def xor_extractor_check(
    g: Gadget,
    m: int,
    x: DistributionTable,
    y: DistributionTable,
    eta: Fraction,
    lam: Fraction,
    disc_value: Fraction | None = None,
) -> ExtractorReport:
    """Extractor corollary for the XOR power: entropy threshold gains 6/b and
    the conclusion bound scales with the number of copies."""
    eta, lam = Fraction(eta), Fraction(lam)
    b = g.b
    disc = discrepancy(g).value if disc_value is None else disc_value
    disc_ok = cmp_pow2(disc, eta * b) <= 0
    gx = xor_power(g, m)
    entropy_ok = _entropy_sum_at_least(x, y, (2 + Fraction(6, b) - eta + lam) * m * b)
    bv = _joint_bias(gx, x, y)
    bound_bits = lam * b * m
    return ExtractorReport(disc_ok, entropy_ok, bv, bound_bits, cmp_pow2(bv, bound_bits) <= 0)


def xor_sampling_check(
    g: Gadget,
    m: int,
    x: DistributionTable,
    y: DistributionTable,
    gamma: Fraction,
    lam: Fraction,
    eta: Fraction,
    disc_value: Fraction | None = None,
) -> SamplingReport:
    gamma, lam, eta = Fraction(gamma), Fraction(lam), Fraction(eta)
    b = g.b
    disc = discrepancy(g).value if disc_value is None else disc_value
    disc_ok = cmp_pow2(disc, eta * b) <= 0
    gx = xor_power(g, m)
    entropy_ok = _entropy_sum_at_least(x, y, (2 + Fraction(7, b) - eta + gamma + lam) * m * b)
    bad = ZERO
    for a in x.support():
        if cmp_pow2(_conditional_bias(gx, a, y), lam * b * m) > 0:
            bad += x.mass[a]
    bound_bits = gamma * b * m
    return SamplingReport(disc_ok, entropy_ok, bad, bound_bits, cmp_pow2(bad, bound_bits) < 0)


# -- construction -------------------------------------------------------------

def random_gadget(b: int, seed: int) -> Gadget:
    """Independent fair table bits from a seeded generator; reproducible."""
    rng = random.Random(seed)
    side = 1 << b
    table = [rng.getrandbits(1) for _ in range(side * side)]
    return Gadget(b, table, name=f"rand:{b}:{seed}")


def _ip_gadget(b: int) -> Gadget:
    side = 1 << b
    table = [(x & y).bit_count() & 1 for x in range(side) for y in range(side)]
    return Gadget(b, table, name=f"ip{b}")


def _bit_op_gadget(name: str, op) -> Gadget:
    return Gadget(1, [op(x, y) for x in range(2) for y in range(2)], name=name)


BUILTIN_NAMES = ("and1", "or1", "xor1", "ip1", "ip2")


def builtin_gadget(name: str) -> Gadget:
    """Named gadget: and1, or1, xor1, ip1, ip2, or rand:<b>:<seed>."""
    if name == "and1":
        return _bit_op_gadget("and1", lambda x, y: x & y)
    if name == "or1":
        return _bit_op_gadget("or1", lambda x, y: x | y)
    if name == "xor1":
        return _bit_op_gadget("xor1", lambda x, y: x ^ y)
    if name == "ip1":
        return _ip_gadget(1)
    if name == "ip2":
        return _ip_gadget(2)
    if name.startswith("rand:"):
        parts = name.split(":")
        if len(parts) != 3:
            raise LiftsimError(f"bad random gadget spec {name!r}, expected rand:<b>:<seed>")
        return random_gadget(int(parts[1]), int(parts[2]))
    raise LiftsimError(f"unknown gadget {name!r}")


# -- file format --------------------------------------------------------------

def gadget_to_json(g: Gadget) -> str:
    rows = []
    for x in range(g.side):
        rows.append("".join(str(g.table[x * g.side + y]) for y in range(g.side)))
    return json.dumps({"b": g.b, "rows": rows}, indent=None, sort_keys=True)


def gadget_from_json(text: str) -> Gadget:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise LiftsimError(f"gadget file is not valid JSON: {e}") from None
    if not isinstance(doc, dict) or "b" not in doc or "rows" not in doc:
        raise LiftsimError("gadget file must be an object with keys 'b' and 'rows'")
    b = int(doc["b"])
    side = 1 << b
    rows = doc["rows"]
    if len(rows) != side:
        raise LiftsimError(f"expected {side} rows, got {len(rows)}")
    table = []
    for i, row in enumerate(rows):
        if len(row) != side or any(ch not in "01" for ch in row):
            raise LiftsimError(f"row {i} must be a bitstring of length {side}")
        table.extend(int(ch) for ch in row)
    return Gadget(b, table)
