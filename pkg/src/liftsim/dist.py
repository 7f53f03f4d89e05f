"""Exact probability tables, min-entropy, statistical distance, Fourier tools.

A :class:`DistributionTable` carries an ordered domain and exact rational
masses summing to one.  Two element conventions are used throughout the
library:

* boolean cubes {0,1}^m: elements are ints in [0, 2^m); bit i of the string
  (1-indexed, leftmost first in written form) is bit (m-1-i) of the int, so
  numeric order equals lexicographic order on bitstrings;
* block tuples over alphabets like {0,1}^b per coordinate: elements are
  tuples of ints, ordered lexicographically.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence, Tuple

from .errors import DomainError, NullEventError
from .exact import cmp_pow2, sign

__all__ = [
    "DistributionTable",
    "project",
    "statistical_distance",
    "bias",
    "min_entropy_at_least",
    "fourier_coefficient",
    "fourier_inversion",
    "xor_bias",
    "vazirani_uniformity_check",
    "vazirani_minentropy_check",
    "VaziraniReport",
]

ZERO = Fraction(0)
ONE = Fraction(1)


class DistributionTable:
    """Exact probability mass function over an ordered finite domain."""

    __slots__ = ("domain", "mass")

    def __init__(self, masses: Mapping):
        items = sorted(masses.items(), key=lambda kv: kv[0])
        domain = tuple(k for k, _ in items)
        if len(set(domain)) != len(domain):
            raise DomainError("domain elements must be distinct")
        table = {}
        total = ZERO
        for k, v in items:
            v = Fraction(v)
            if v < 0:
                raise DomainError(f"negative mass at {k!r}")
            table[k] = v
            total += v
        if total != 1:
            raise DomainError(f"masses must sum to 1 exactly, got {total}")
        self.domain = domain
        self.mass = table

    @classmethod
    def uniform(cls, domain: Iterable) -> "DistributionTable":
        dom = list(domain)
        if not dom:
            raise DomainError("uniform distribution needs a nonempty domain")
        p = Fraction(1, len(dom))
        return cls({x: p for x in dom})

    @classmethod
    def point(cls, element, domain: Iterable = ()) -> "DistributionTable":
        masses = {x: ZERO for x in domain}
        masses[element] = ONE
        return cls(masses)

    @classmethod
    def from_weights(cls, weights: Mapping) -> "DistributionTable":
        total = sum(Fraction(w) for w in weights.values())
        if total <= 0:
            raise DomainError("weights must have positive total")
        return cls({k: Fraction(w) / total for k, w in weights.items()})

    def __len__(self) -> int:
        return len(self.domain)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DistributionTable)
            and self.domain == other.domain
            and self.mass == other.mass
        )

    def __repr__(self) -> str:
        inner = ", ".join(f"{k!r}: {v}" for k, v in self.mass.items())
        return f"DistributionTable({{{inner}}})"

    def prob(self, element) -> Fraction:
        return self.mass.get(element, ZERO)

    def support(self) -> Tuple:
        return tuple(x for x in self.domain if self.mass[x] > 0)

    def maxprob(self) -> Fraction:
        return max(self.mass.values())

    def event_prob(self, event: Callable) -> Fraction:
        return sum((self.mass[x] for x in self.domain if event(x)), ZERO)

    def condition(self, event) -> "DistributionTable":
        """Condition on an event (predicate or collection of elements)."""
        if not callable(event):
            members = set(event)
            event = members.__contains__
        kept = [x for x in self.domain if event(x)]
        total = sum((self.mass[x] for x in kept), ZERO)
        if total == 0:
            raise NullEventError("conditioning on null event")
        return DistributionTable({x: self.mass[x] / total for x in kept})


def project(d: DistributionTable, coords: Sequence[int]) -> DistributionTable:
    """Marginal of a tuple-element table onto the given coordinates (sorted)."""
    coords = tuple(sorted(coords))
    out: dict = {}
    for x in d.domain:
        key = tuple(x[i] for i in coords)
        out[key] = out.get(key, ZERO) + d.mass[x]
    return DistributionTable(out)


def statistical_distance(d1: DistributionTable, d2: DistributionTable) -> Fraction:
    """Exact total variation distance (half the L1 distance)."""
    if d1.domain != d2.domain:
        raise DomainError("statistical distance requires identical domains")
    return sum((abs(d1.mass[x] - d2.mass[x]) for x in d1.domain), ZERO) / 2


def align_domains(d1: DistributionTable, d2: DistributionTable):
    """Extend both tables with zero mass onto the union domain."""
    union = sorted(set(d1.domain) | set(d2.domain))
    e1 = DistributionTable({x: d1.prob(x) for x in union})
    e2 = DistributionTable({x: d2.prob(x) for x in union})
    return e1, e2


def bias(d: DistributionTable) -> Fraction:
    """|Pr[V=0] - Pr[V=1]| for a table over a subset of {0,1}."""
    if not set(d.domain) <= {0, 1}:
        raise DomainError("bias requires a boolean domain")
    return abs(d.prob(0) - d.prob(1))


def min_entropy_at_least(d: DistributionTable, q: Fraction) -> bool:
    """True iff every mass is at most 2**(-q), i.e. the min-entropy is >= q."""
    return cmp_pow2(d.maxprob(), Fraction(q)) <= 0


# -- Fourier machinery on {0,1}^m --------------------------------------------

def _parity(z: int, smask: int) -> int:
    return (z & smask).bit_count() & 1


def _coords_to_mask(coords: Iterable[int], m: int) -> int:
    mask = 0
    for i in coords:
        if not 0 <= i < m:
            raise DomainError(f"coordinate {i} outside [0, {m})")
        mask |= 1 << (m - 1 - i)
    return mask


def fourier_coefficient(d: DistributionTable, m: int, coords: Iterable[int]) -> Fraction:
    """Coefficient of the mass function at the character indexed by `coords`.

    The convention is fixed so that |coef| equals 2**(-m) times the bias of
    the XOR of the selected bits, and the empty set gives exactly 2**(-m).
    """
    smask = _coords_to_mask(coords, m)
    total = ZERO
    for z in d.domain:
        mu = d.mass[z]
        total += -mu if _parity(z, smask) else mu
    return total / (1 << m)


def fourier_inversion(coeffs: Mapping[Tuple[int, ...], Fraction], m: int) -> DistributionTable:
    """Rebuild the mass function from all 2^m coefficients."""
    masks = {coords: _coords_to_mask(coords, m) for coords in coeffs}
    masses = {}
    for z in range(1 << m):
        v = ZERO
        for coords, c in coeffs.items():
            v += -c if _parity(z, masks[coords]) else c
        masses[z] = v
    return DistributionTable(masses)


def xor_bias(d: DistributionTable, m: int, coords: Iterable[int]) -> Fraction:
    """Exact bias of the XOR of the selected bits."""
    smask = _coords_to_mask(coords, m)
    p0 = sum((d.mass[z] for z in d.domain if not _parity(z, smask)), ZERO)
    return abs(2 * p0 - 1)


def subsets_by_size(k: int, nonempty: bool = False):
    """All subsets of range(k) as sorted tuples, ordered by (size, lex)."""
    from itertools import combinations

    start = 1 if nonempty else 0
    for r in range(start, k + 1):
        yield from combinations(range(k), r)


@dataclass
class VaziraniReport:
    hypothesis: bool
    conclusion: bool
    worst_witness: tuple | None = None

    @property
    def implication_holds(self) -> bool:
        return (not self.hypothesis) or self.conclusion


def vazirani_uniformity_check(d: DistributionTable, m: int, eps: Fraction) -> VaziraniReport:
    """Small XOR biases force pointwise near-uniformity.

    hypothesis: bias(xor over S) <= eps * (2m)**(-|S|) for every nonempty S;
    conclusion: every point mass lies in [(1-eps), (1+eps)] * 2**(-m).
    """
    eps = Fraction(eps)
    hypothesis = True
    worst = None
    for coords in subsets_by_size(m, nonempty=True):
        bound = eps * Fraction(1, (2 * m) ** len(coords))
        bv = xor_bias(d, m, coords)
        if bv > bound:
            hypothesis = False
            if worst is None:
                worst = ("bias", coords, bv, bound)
    base = Fraction(1, 1 << m)
    lo, hi = (1 - eps) * base, (1 + eps) * base
    conclusion = True
    for z in range(1 << m):
        p = d.prob(z)
        if not lo <= p <= hi:
            conclusion = False
            if worst is None:
                worst = ("mass", z, p, (lo, hi))
            break
    return VaziraniReport(hypothesis, conclusion, worst)


def vazirani_minentropy_check(d: DistributionTable, m: int, t: int) -> VaziraniReport:
    """Small XOR biases on large sets force high min-entropy.

    hypothesis: bias(xor over S) <= (2m)**(-|S|) for every S with |S| >= t;
    conclusion: min-entropy >= m - t*log2(m) - 1, tested in the cleared form
    maxprob * 2**(m-1) <= m**t (exact integers).
    """
    if t < 1:
        raise ValueError("t must be at least 1")
    hypothesis = True
    worst = None
    for coords in subsets_by_size(m, nonempty=True):
        if len(coords) < t:
            continue
        bound = Fraction(1, (2 * m) ** len(coords))
        bv = xor_bias(d, m, coords)
        if bv > bound:
            hypothesis = False
            worst = ("bias", coords, bv, bound)
            break
    p = d.maxprob()
    conclusion = sign(p * (1 << (m - 1)) - m ** t) <= 0
    return VaziraniReport(hypothesis, conclusion, worst)
