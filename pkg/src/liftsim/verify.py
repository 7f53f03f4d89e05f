"""Lemma-level verification harness and the desk-scale corpus runner.

Each checker tests one exact implication (hypothesis => conclusion) and each
corpus instance lands in one of three verdicts:

  pass     hypothesis and conclusion both hold,
  vacuous  hypothesis fails (the implication is untested),
  FAIL     hypothesis holds but the conclusion fails -- a counterexample.

Only FAILs break the run.  Sections where every instance is vacuous are
flagged so the suite cannot pass silently by vacuity.  All randomness is
seeded and every enumeration is canonical, so reports are byte-identical
across runs.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, List, Optional, Sequence, Tuple

from .dist import (
    DistributionTable,
    ZERO,
    fourier_coefficient,
    fourier_inversion,
    project,
    statistical_distance,
    vazirani_minentropy_check,
    vazirani_uniformity_check,
    xor_bias,
)
from .dtrees import (
    brute_force_Ddt,
    find_one_problem,
    first_bit_problem,
    index_problem,
    parity_problem,
    solves,
)
from .errors import LiftsimError
from .exact import cmp_pow2, cmp_products, frac_str
from .gadgets import (
    Gadget,
    builtin_gadget,
    check_xor_lemma,
    discrepancy,
    extractor_check,
    sampling_check,
    xor_extractor_check,
    xor_sampling_check,
)
from .protocols import canonical_protocol, complexity, kraft_heavy_message
from .simulate import (
    ERROR_K,
    LiftingParams,
    certify_transcript,
    enumerate_output_distribution,
    ledger_assertions,
    lift_deterministic,
    lift_randomized,
)
from .structure import (
    Restriction,
    dangerous_probability,
    density_restoring_fix,
    density_restoring_partition,
    is_biasing,
    is_dense,
    is_leaking,
    is_skewing,
    is_sparsifying,
    is_structured,
    max_density,
    StructureCertificate,
)

__all__ = [
    "LemmaInstance",
    "SectionReport",
    "CorpusReport",
    "CorpusSpec",
    "check_multiplicative_uniformity",
    "check_uniform_marginals",
    "check_main_lemma",
    "run_corpus",
    "default_corpus_spec",
    "seeded_distribution",
    "seeded_support",
    "all_prefix_free_codes",
]

# Universal constants as fixed in the proofs of the two uniformity results;
# the main lemma's constant is only known to be "large enough", so the same
# default is used and remains configurable.
H_MULTIPLICATIVE = Fraction(8)
H_UNIFORM_MARGINALS = Fraction(10)
H_MAIN = Fraction(8)


# -- structure-lemma checkers ---------------------------------------------------

@dataclass
class LemmaInstance:
    instance: str
    verdict: str                     # 'pass' | 'vacuous' | 'FAIL'
    measured: Optional[str] = None
    bound: Optional[str] = None
    detail: str = ""


def _regime_ok(b: int, n: int, c: Fraction, eta: Fraction, g: Gadget,
               disc_value: Fraction) -> bool:
    """Shared preamble: n >= 2, b >= c*log2(n), disc(g) <= 2^(-eta*b)."""
    if n < 2:
        return False
    # b >= c*log2(n)  <=>  2^b >= n^c
    if cmp_products(Fraction(1), [(2, Fraction(b))], Fraction(1), [(n, Fraction(c))]) < 0:
        return False
    return cmp_pow2(disc_value, eta * b) <= 0


def check_multiplicative_uniformity(
    x: DistributionTable,
    y: DistributionTable,
    rho: Restriction,
    g: Gadget,
    z: int,
    gamma: Fraction,
    eta: Fraction,
    c: Fraction,
    h: Fraction = H_MULTIPLICATIVE,
    disc_value: Optional[Fraction] = None,
) -> LemmaInstance:
    """Structured inputs make every free output pattern multiplicatively close
    to uniform: Pr[g^I(X_I, Y_I) = z_I] in (1 +- 2^(-gamma*b)) * 2^(-|I|)."""
    gamma, eta, c = Fraction(gamma), Fraction(eta), Fraction(c)
    n, b = len(rho), g.b
    disc_v = discrepancy(g).value if disc_value is None else disc_value
    free = rho.free()
    xf = project(x, free) if free else x
    yf = project(y, free) if free else y
    tau_req = 2 + h / c - eta + gamma
    cert = is_structured(xf, yf, rho, tau_req, g, x_full=x, y_full=y)
    hypothesis = (
        _regime_ok(b, n, c, eta, g, disc_v)
        and rho.consistent_with(z)
        and isinstance(cert, StructureCertificate)
    )
    worst = ZERO
    if free:
        size = len(free)
        for bits in product((0, 1), repeat=size):
            prob = ZERO
            for xv in xf.support():
                for yv in yf.support():
                    if all(g.eval(xv[i], yv[i]) == bit for i, bit in enumerate(bits)):
                        prob += xf.mass[xv] * yf.mass[yv]
            deviation = abs(prob * (1 << size) - 1)
            worst = max(worst, deviation)
    conclusion = cmp_pow2(worst, gamma * b) <= 0
    verdict = "FAIL" if hypothesis and not conclusion else ("pass" if hypothesis else "vacuous")
    return LemmaInstance(
        instance="",
        verdict=verdict,
        measured=frac_str(worst),
        bound=f"2^-({frac_str(gamma * b)})",
    )


def check_uniform_marginals(
    x_support: Sequence[Tuple[int, ...]],
    y_support: Sequence[Tuple[int, ...]],
    rho: Restriction,
    g: Gadget,
    z: int,
    gamma: Fraction,
    eta: Fraction,
    c: Fraction,
    h: Fraction = H_UNIFORM_MARGINALS,
    disc_value: Optional[Fraction] = None,
) -> LemmaInstance:
    """Structured uniform X, Y are close to the marginals of the uniform
    distribution on the preimage of z inside their rectangle."""
    gamma, eta, c = Fraction(gamma), Fraction(eta), Fraction(c)
    n, b = len(rho), g.b
    disc_v = discrepancy(g).value if disc_value is None else disc_value
    x = DistributionTable.uniform(sorted(x_support))
    y = DistributionTable.uniform(sorted(y_support))
    free = rho.free()
    xf = project(x, free) if free else x
    yf = project(y, free) if free else y
    tau_req = 2 + h / c - eta + gamma
    cert = is_structured(xf, yf, rho, tau_req, g, x_full=x, y_full=y)
    hypothesis = (
        _regime_ok(b, n, c, eta, g, disc_v)
        and rho.consistent_with(z)
        and isinstance(cert, StructureCertificate)
    )
    pairs = [
        (xv, yv)
        for xv in x.domain
        for yv in y.domain
        if all(g.eval(xv[i], yv[i]) == ((z >> (n - 1 - i)) & 1) for i in range(n))
    ]
    if not pairs:
        raise LiftsimError("empty preimage intersection; the lemma does not apply")
    fiber_x: Dict[Tuple[int, ...], Fraction] = {v: ZERO for v in x.domain}
    fiber_y: Dict[Tuple[int, ...], Fraction] = {v: ZERO for v in y.domain}
    share = Fraction(1, len(pairs))
    for xv, yv in pairs:
        fiber_x[xv] += share
        fiber_y[yv] += share
    dist_x = statistical_distance(x, DistributionTable(fiber_x))
    dist_y = statistical_distance(y, DistributionTable(fiber_y))
    worst = max(dist_x, dist_y)
    conclusion = cmp_pow2(worst, gamma * b) <= 0
    verdict = "FAIL" if hypothesis and not conclusion else ("pass" if hypothesis else "vacuous")
    return LemmaInstance(
        instance="",
        verdict=verdict,
        measured=frac_str(worst),
        bound=f"2^-({frac_str(gamma * b)})",
    )


def check_main_lemma(
    x: DistributionTable,
    y: DistributionTable,
    rho: Restriction,
    g: Gadget,
    gamma: Fraction,
    eps: Fraction,
    eta: Fraction,
    c: Fraction,
    h: Fraction = H_MAIN,
    disc_value: Optional[Fraction] = None,
) -> LemmaInstance:
    """Structured inputs give dangerous values at most 2^(-gamma*b) mass."""
    gamma, eps, eta, c = Fraction(gamma), Fraction(eps), Fraction(eta), Fraction(c)
    n, b = len(rho), g.b
    disc_v = discrepancy(g).value if disc_value is None else disc_value
    free = rho.free()
    xf = project(x, free) if free else x
    yf = project(y, free) if free else y
    tau_req = 2 + h / (c * eps) - eta - gamma
    cert = is_structured(xf, yf, rho, tau_req, g, x_full=x, y_full=y)
    hypothesis = (
        _regime_ok(b, n, c, eta, g, disc_v)
        and 0 < gamma <= 1
        and 0 < eps <= 1
        and eps * b >= 4
        and isinstance(cert, StructureCertificate)
    )
    if free and isinstance(cert, StructureCertificate):
        measured = dangerous_probability(xf, yf, g, cert.delta_y, eps, b)
    elif free:
        # no certificate: classify against the actual density witness
        delta_w = max_density(yf, b)[0]
        measured = dangerous_probability(xf, yf, g, delta_w, eps, b)
    else:
        measured = ZERO
    conclusion = cmp_pow2(measured, gamma * b) <= 0
    verdict = "FAIL" if hypothesis and not conclusion else ("pass" if hypothesis else "vacuous")
    return LemmaInstance(
        instance="",
        verdict=verdict,
        measured=frac_str(measured),
        bound=f"2^-({frac_str(gamma * b)})",
    )


# -- seeded generators -----------------------------------------------------------

def seeded_distribution(rng: random.Random, domain: Sequence, max_weight: int = 16) -> DistributionTable:
    """Random rational masses (zeros allowed, not all zero)."""
    while True:
        weights = [rng.randrange(max_weight + 1) for _ in domain]
        if any(weights):
            break
    total = sum(weights)
    return DistributionTable({d: Fraction(w, total) for d, w in zip(domain, weights)})


def near_uniform_distribution(rng: random.Random, m: int) -> DistributionTable:
    """A tiny seeded jitter around uniform; keeps every XOR bias below the
    strictest Vazirani threshold at m <= 4."""
    base = 1 << 24
    weights = [base + rng.randrange(4) for _ in range(1 << m)]
    total = sum(weights)
    return DistributionTable({z: Fraction(w, total) for z, w in enumerate(weights)})


def seeded_support(rng: random.Random, universe: Sequence, min_size: int = 1):
    size = rng.randrange(min_size, len(universe) + 1)
    return tuple(sorted(rng.sample(list(universe), size)))


def seeded_dense_support(rng: random.Random, n: int, b: int):
    """Random support whose uniform distribution has positive max density."""
    universe = list(product(range(1 << b), repeat=n))
    while True:
        supp = seeded_support(rng, universe, min_size=2)
        dist = DistributionTable.uniform(supp)
        if all(project(dist, (i,)).maxprob() < 1 for i in range(n)):
            return supp


def all_prefix_free_codes(max_len: int):
    """Every nonempty prefix-free code over nonempty strings of length <= max_len.

    A code is an antichain of the binary prefix tree; the enumeration streams
    the left subtree and materializes only the (small) right subtree per level.
    """

    def gen(prefix: str, depth: int):
        yield ()
        if prefix:
            yield (prefix,)
        if depth > 0:
            rights = list(gen(prefix + "1", depth - 1))
            for left in gen(prefix + "0", depth - 1):
                for right in rights:
                    if left or right:
                        yield left + right

    for code in gen("", max_len):
        if code:
            yield code


# -- corpus ----------------------------------------------------------------------

@dataclass
class SectionReport:
    name: str
    total: int = 0
    passes: int = 0
    vacuous: int = 0
    fails: int = 0
    counterexamples: List[dict] = field(default_factory=list)
    info: Dict[str, object] = field(default_factory=dict)

    @property
    def all_vacuous(self) -> bool:
        return self.total > 0 and self.vacuous == self.total

    def record(self, inst: LemmaInstance) -> None:
        self.total += 1
        if inst.verdict == "FAIL":
            self.fails += 1
            self.counterexamples.append({
                "instance": inst.instance,
                "measured": inst.measured,
                "bound": inst.bound,
                "detail": inst.detail,
            })
        elif inst.verdict == "vacuous":
            self.vacuous += 1
        else:
            self.passes += 1

    def to_obj(self) -> dict:
        return {
            "name": self.name,
            "total": self.total,
            "passes": self.passes,
            "vacuous": self.vacuous,
            "fails": self.fails,
            "all_vacuous": self.all_vacuous,
            "counterexamples": self.counterexamples,
            "info": self.info,
        }


@dataclass
class CorpusReport:
    seed: int
    sections: List[SectionReport]

    @property
    def ok(self) -> bool:
        return all(s.fails == 0 for s in self.sections)

    def to_json(self) -> str:
        return json.dumps(
            {"seed": self.seed, "ok": self.ok,
             "sections": [s.to_obj() for s in self.sections]},
            sort_keys=True, indent=2)

    def to_table(self) -> str:
        lines = [f"{'section':32} {'total':>7} {'pass':>7} {'vacuous':>8} {'FAIL':>6}  note"]
        for s in self.sections:
            note = "ALL-VACUOUS" if s.all_vacuous else ""
            lines.append(
                f"{s.name:32} {s.total:>7} {s.passes:>7} {s.vacuous:>8} {s.fails:>6}  {note}")
        lines.append(f"overall: {'OK' if self.ok else 'COUNTEREXAMPLES FOUND'}")
        return "\n".join(lines)


@dataclass
class CorpusSpec:
    """Which sections to run and how large; omitted sections are skipped."""

    seed: int = 2024
    fourier: Optional[dict] = None
    vazirani: Optional[dict] = None
    xor_lemma: Optional[dict] = None
    extractor_sampling: Optional[dict] = None
    kraft: Optional[dict] = None
    density: Optional[dict] = None
    claims: Optional[dict] = None
    structure_lemmas: Optional[dict] = None
    lifting: Optional[dict] = None
    fixture_planted_violation: bool = False

    @classmethod
    def from_json(cls, text: str) -> "CorpusSpec":
        doc = json.loads(text)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise LiftsimError(f"unknown corpus spec keys: {sorted(unknown)}")
        return cls(**doc)


def default_corpus_spec(scale: int = 1) -> CorpusSpec:
    """The shipped desk-scale corpus; scale > 1 shrinks the seeded sweeps."""
    return CorpusSpec(
        seed=2024,
        fourier={"count": max(1000 // scale, 50)},
        vazirani={"count": max(1000 // scale, 50)},
        xor_lemma={"gadgets": ["and1", "or1", "xor1", "ip1"], "powers": [1, 2, 3],
                   "extra": [["ip2", 1]]},
        extractor_sampling={"samples_b2": max(200 // scale, 20)},
        kraft={"max_len": 4 if scale == 1 else 3, "assignments": 100 // scale + 1},
        density={"count": max(200 // scale, 20)},
        claims={"supports": max(20 // scale, 4)},
        structure_lemmas={"count": max(40 // scale, 8)},
        lifting={"gadget": "ip2", "rand_seeds": 3},
    )


def run_corpus(spec: CorpusSpec) -> CorpusReport:
    sections: List[SectionReport] = []
    if spec.fourier:
        sections.append(_section_fourier(spec.seed, **spec.fourier))
    if spec.vazirani:
        sections.append(_section_vazirani(spec.seed, **spec.vazirani))
    if spec.xor_lemma:
        sections.append(_section_xor_lemma(**spec.xor_lemma))
    if spec.extractor_sampling:
        sections.extend(_section_extractor_sampling(spec.seed, **spec.extractor_sampling))
    if spec.kraft:
        sections.append(_section_kraft(spec.seed, **spec.kraft))
    if spec.density:
        sections.append(_section_density(spec.seed, **spec.density))
    if spec.claims:
        sections.extend(_section_claims(spec.seed, **spec.claims))
    if spec.structure_lemmas:
        sections.append(_section_structure_lemmas(spec.seed, **spec.structure_lemmas))
    if spec.lifting:
        sections.extend(_section_lifting(spec.seed, **spec.lifting))
    if spec.fixture_planted_violation:
        sections.append(_section_fixture())
    return CorpusReport(spec.seed, sections)


def _section_fourier(seed: int, count: int = 1000) -> SectionReport:
    rep = SectionReport("fourier_bias_identity")
    rng = random.Random(f"{seed}/fourier")
    for k in range(count):
        m = 1 + (k % 4)
        d = seeded_distribution(rng, list(range(1 << m)))
        ok = True
        coeffs = {}
        for r in range(m + 1):
            for coords in combinations(range(m), r):
                coef = fourier_coefficient(d, m, coords)
                coeffs[coords] = coef
                if abs(coef) * (1 << m) != xor_bias(d, m, coords):
                    ok = False
                if coords == () and coef != Fraction(1, 1 << m):
                    ok = False
        if fourier_inversion(coeffs, m) != DistributionTable(
                {z: d.prob(z) for z in range(1 << m)}):
            ok = False
        rep.record(LemmaInstance(f"fourier/{k}/m={m}", "pass" if ok else "FAIL"))
    return rep


def _section_vazirani(seed: int, count: int = 1000) -> SectionReport:
    rep = SectionReport("vazirani_checkers")
    rng = random.Random(f"{seed}/vazirani")
    eps_grid = (Fraction(1, 4), Fraction(1, 2), Fraction(1))
    for k in range(count):
        m = 1 + (k % 4)
        if k % 3 == 0:
            d = near_uniform_distribution(rng, m)
        else:
            d = seeded_distribution(rng, list(range(1 << m)))
        for eps in eps_grid:
            r = vazirani_uniformity_check(d, m, eps)
            rep.record(LemmaInstance(
                f"vazirani-uniformity/{k}/m={m}/eps={eps}",
                "FAIL" if (r.hypothesis and not r.conclusion)
                else ("pass" if r.hypothesis else "vacuous")))
        for t in (1, 2):
            r = vazirani_minentropy_check(d, m, t)
            rep.record(LemmaInstance(
                f"vazirani-minentropy/{k}/m={m}/t={t}",
                "FAIL" if (r.hypothesis and not r.conclusion)
                else ("pass" if r.hypothesis else "vacuous")))
    return rep


def _section_xor_lemma(gadgets: Sequence[str], powers: Sequence[int],
                       extra: Sequence = ()) -> SectionReport:
    rep = SectionReport("xor_lemma_sandwich")
    jobs = [(name, m) for name in gadgets for m in powers]
    jobs += [(name, m) for name, m in extra]
    archived = {}
    for name, m in jobs:
        g = builtin_gadget(name)
        r = check_xor_lemma(g, m)
        archived[f"{name}/m={m}"] = {
            "disc": frac_str(r.disc_base),
            "lower": frac_str(r.lower),
            "value": frac_str(r.value),
            "upper": frac_str(r.upper),
        }
        rep.record(LemmaInstance(
            f"xor-lemma/{name}/m={m}",
            "pass" if r.sandwich_holds else "FAIL",
            measured=frac_str(r.value),
            bound=f"[{frac_str(r.lower)}, {frac_str(r.upper)}]"))
    rep.info["values"] = archived
    return rep


def _flat_tables(universe_size: int):
    universe = list(range(universe_size))
    for r in range(1, universe_size + 1):
        for supp in combinations(universe, r):
            yield DistributionTable.uniform(supp)


def _section_extractor_sampling(seed: int, samples_b2: int = 200) -> List[SectionReport]:
    rep_e = SectionReport("discrepancy_extractor")
    rep_s = SectionReport("discrepancy_sampling")
    grid = (Fraction(1, 4), Fraction(1, 2))
    b1_gadgets = [builtin_gadget(n) for n in ("and1", "or1", "xor1", "ip1")]
    flats1 = list(_flat_tables(2))
    for g in b1_gadgets:
        disc_v = discrepancy(g).value
        for x in flats1:
            for y in flats1:
                for eta in grid:
                    for lam in grid:
                        r = extractor_check(g, x, y, eta, lam, disc_value=disc_v)
                        rep_e.record(_ext_instance(f"b1/{g.name}", r))
                        for gam in grid:
                            rs = sampling_check(g, x, y, gam, lam, eta, disc_value=disc_v)
                            rep_s.record(_ext_instance(f"b1/{g.name}", rs))
    # xor-power corollaries at b=1, two copies, exhaustive flat pairs
    flats2 = list(_flat_tables(4))
    for g in b1_gadgets:
        disc_v = discrepancy(g).value
        for x in flats2:
            for y in flats2:
                r = xor_extractor_check(g, 2, x, y, Fraction(1, 2), Fraction(1, 4),
                                        disc_value=disc_v)
                rep_e.record(_ext_instance(f"b1-xor2/{g.name}", r))
                rs = xor_sampling_check(g, 2, x, y, Fraction(1, 4), Fraction(1, 4),
                                        Fraction(1, 2), disc_value=disc_v)
                rep_s.record(_ext_instance(f"b1-xor2/{g.name}", rs))
    # seeded flat pairs at b=2
    rng = random.Random(f"{seed}/extractor-b2")
    ip2 = builtin_gadget("ip2")
    disc_v = discrepancy(ip2).value
    universe = list(range(4))
    for k in range(samples_b2):
        xs = seeded_support(rng, universe)
        ys = seeded_support(rng, universe)
        x = DistributionTable.uniform(xs)
        y = DistributionTable.uniform(ys)
        eta, lam, gam = (rng.choice(grid) for _ in range(3))
        r = extractor_check(ip2, x, y, eta, lam, disc_value=disc_v)
        rep_e.record(_ext_instance(f"b2/{k}", r))
        rs = sampling_check(ip2, x, y, gam, lam, eta, disc_value=disc_v)
        rep_s.record(_ext_instance(f"b2/{k}", rs))
    return [rep_e, rep_s]


def _ext_instance(tag: str, r) -> LemmaInstance:
    if r.hypothesis and not r.conclusion:
        verdict = "FAIL"
    elif r.hypothesis:
        verdict = "pass"
    else:
        verdict = "vacuous"
    measured = getattr(r, "bias", None)
    if measured is None:
        measured = getattr(r, "bad_mass", None)
    return LemmaInstance(tag, verdict,
                         measured=frac_str(measured) if measured is not None else None,
                         bound=f"2^-({frac_str(r.bound_bits)})")


def _section_kraft(seed: int, max_len: int = 4, assignments: int = 100) -> SectionReport:
    rep = SectionReport("kraft_heavy_message")
    rng = random.Random(f"{seed}/kraft")
    codes = list(all_prefix_free_codes(max_len))
    rep.info["codes"] = len(codes)
    small = [c for c in codes if max(len(w) for w in c) <= 3]
    for code in codes:
        d = seeded_distribution(rng, sorted(code))
        ok = _kraft_ok(d)
        rep.record(LemmaInstance(f"kraft/{'|'.join(code)}", "pass" if ok else "FAIL"))
    for code in small:
        for _ in range(assignments - 1):
            d = seeded_distribution(rng, sorted(code))
            ok = _kraft_ok(d)
            rep.record(LemmaInstance(f"kraft-small/{'|'.join(code)}", "pass" if ok else "FAIL"))
    return rep


def _kraft_ok(d: DistributionTable) -> bool:
    try:
        w = kraft_heavy_message(d)
    except Exception:
        return False
    return d.mass[w] * (1 << len(w)) >= 1


def _section_density(seed: int, count: int = 200) -> SectionReport:
    rep = SectionReport("density_restoring")
    rng = random.Random(f"{seed}/density")
    deltas = (Fraction(1, 2), Fraction(3, 4), Fraction(1))
    shapes = [(1, 1), (2, 1), (3, 1), (1, 2), (2, 2), (3, 2)]
    for k in range(count):
        n, b = shapes[k % len(shapes)]
        universe = list(product(range(1 << b), repeat=n))
        d = seeded_distribution(rng, universe)
        # keep only the support; zero-mass rows do not matter for density
        d = d.condition(d.support())
        delta = deltas[k % len(deltas)]
        ok, detail = _density_postconditions(d, delta, b)
        rep.record(LemmaInstance(
            f"density/{k}/n={n}/b={b}/delta={delta}", "pass" if ok else "FAIL",
            detail=detail))
    return rep


def _density_postconditions(d: DistributionTable, delta: Fraction, b: int):
    coords, value, reduced = density_restoring_fix(d, delta, b)
    if coords and not is_dense(reduced, delta, b).dense:
        return False, "conditioned remainder is not dense"
    if not coords and not is_dense(d, delta, b).dense:
        return False, "empty fix on a non-dense input"
    parts = density_restoring_partition(d, delta, b)
    covered = []
    p_geq = Fraction(1)
    maxp_full = d.maxprob()
    k = len(d.domain[0])
    for part in parts:
        if part.p_geq != p_geq:
            return False, f"p_geq mismatch at part {part.index}"
        p_geq -= part.prob
        covered.extend(part.members)
        cond = d.condition(set(part.members))
        for i, v in zip(part.coords, part.value):
            if any(t[i] != v for t in cond.support()):
                return False, f"part {part.index} does not fix its block set"
        rest = tuple(i for i in range(k) if i not in part.coords)
        reduced = project(cond, rest) if rest else None
        if reduced is not None and not is_dense(reduced, delta, b).dense:
            return False, f"part {part.index} remainder is not dense"
        # entropy bound: maxprob(rest | part) <= maxp_full * 2^(delta*b*|I|) / p_geq_j
        mp = reduced.maxprob() if reduced is not None else Fraction(1)
        lhs = mp * part.p_geq
        if cmp_products(lhs, (), maxp_full, [(2, delta * b * len(part.coords))]) > 0:
            return False, f"part {part.index} violates the entropy bound"
    if sorted(covered) != list(d.support()):
        return False, "parts do not partition the support"
    if p_geq != 0:
        return False, "part probabilities do not exhaust the distribution"
    return True, ""


def _section_claims(seed: int, supports: int = 20) -> List[SectionReport]:
    rep_skew = SectionReport("claim_skewing_condition")
    rep_bias = SectionReport("claim_biasing_condition")
    rng = random.Random(f"{seed}/claims")
    eps_grid = (Fraction(1, 4), Fraction(1, 2))
    c_param = Fraction(2)
    n = 2
    for gname in ("xor1", "and1", "ip1", "ip2"):
        g = builtin_gadget(gname)
        b = g.b
        universe = list(product(range(1 << b), repeat=n))
        for s_idx in range(supports):
            supp = seeded_dense_support(rng, n, b)
            y = DistributionTable.uniform(supp)
            delta_y = max_density(y, b)[0]
            for eps in eps_grid:
                for x_val in universe:
                    leak = is_leaking(x_val, y, g).flagged
                    spars = is_sparsifying(x_val, y, g, delta_y, eps, b).flagged
                    dangerous = leak or spars
                    tag = f"{gname}/supp{s_idx}/eps={eps}/x={x_val}"
                    # claim 1: dangerous and not leaking => skewing
                    if dangerous and not leak:
                        skew = is_skewing(x_val, y, g, delta_y, eps, b).flagged
                        rep_skew.record(LemmaInstance(
                            f"skewing/{tag}", "pass" if skew else "FAIL",
                            detail="sparsifying but not skewing" if not skew else ""))
                    else:
                        rep_skew.record(LemmaInstance(f"skewing/{tag}", "vacuous"))
                    # claim 2: not biasing => not dangerous
                    biasing = is_biasing(x_val, y, g, delta_y, eps, b, c_param, n).flagged
                    if not biasing:
                        rep_bias.record(LemmaInstance(
                            f"biasing/{tag}",
                            "pass" if not dangerous else "FAIL",
                            detail="dangerous but not biasing" if dangerous else ""))
                    else:
                        rep_bias.record(LemmaInstance(f"biasing/{tag}", "vacuous"))
    return [rep_skew, rep_bias]


def _section_structure_lemmas(seed: int, count: int = 40) -> SectionReport:
    rep = SectionReport("structure_lemmas")
    rng = random.Random(f"{seed}/structure")
    gamma = Fraction(1)
    eta = Fraction(1, 2)
    for k in range(count):
        gname = ("xor1", "and1", "ip2")[k % 3]
        g = builtin_gadget(gname)
        b = g.b
        n = 2
        disc_v = discrepancy(g).value
        supp_x = seeded_dense_support(rng, n, b)
        supp_y = seeded_dense_support(rng, n, b)
        x = DistributionTable.uniform(supp_x)
        y = DistributionTable.uniform(supp_y)
        rho = Restriction.all_free(n)
        z = rng.randrange(1 << n)
        c = Fraction(rng.choice((1, 2, 16)))
        inst = check_multiplicative_uniformity(x, y, rho, g, z, gamma, eta, c,
                                               disc_value=disc_v)
        inst.instance = f"multiplicative-uniformity/{k}/{gname}"
        rep.record(inst)
        try:
            inst = check_uniform_marginals(supp_x, supp_y, rho, g, z, gamma, eta, c,
                                           disc_value=disc_v)
            inst.instance = f"uniform-marginals/{k}/{gname}"
            rep.record(inst)
        except LiftsimError:
            rep.record(LemmaInstance(
                f"uniform-marginals/{k}/{gname}", "vacuous", detail="empty fiber"))
        inst = check_main_lemma(x, y, rho, g, gamma, Fraction(1, 2), eta, c,
                                disc_value=disc_v)
        inst.instance = f"main-lemma/{k}/{gname}"
        rep.record(inst)
    return rep


def shipped_problems():
    return [
        ("parity2", parity_problem(2)),
        ("index2", index_problem(2)),
        ("first_bit2", first_bit_problem(2)),
        ("find_one2", find_one_problem(2)),
    ]


def _section_lifting(seed: int, gadget: str = "ip2", rand_seeds: int = 3) -> List[SectionReport]:
    rep_det = SectionReport("lifting_deterministic")
    rep_err = SectionReport("lifting_error_halt")
    rep_led = SectionReport("deficiency_ledger")
    rep_orc = SectionReport("oracle_bounds")
    g = builtin_gadget(gadget)
    b = g.b
    n = 2
    det = LiftingParams.standard(b=b, n=n, mode="det")
    rnd = LiftingParams.standard(b=b, n=n, mode="rand")

    d3, t3 = brute_force_Ddt(parity_problem(3))
    rep_orc.record(LemmaInstance("oracle/parity3",
                                 "pass" if d3 == 3 else "FAIL",
                                 measured=str(d3), bound="3"))

    for pname, problem in shipped_problems():
        depth, tree = brute_force_Ddt(problem)
        ok, bad = solves(tree, problem)
        proto = canonical_protocol(tree, g)
        cap_c, cap_r = complexity(proto)
        rep_orc.record(LemmaInstance(
            f"oracle/upper-bound/{pname}",
            "pass" if ok and cap_c <= depth * (b + 1) else "FAIL",
            measured=str(cap_c), bound=f"{depth}*(b+1)={depth * (b + 1)}"))
        for z in range(1 << n):
            res = lift_deterministic(proto, g, z, det)
            tag = f"det/{pname}/z={z:02b}"
            if res.status == "done":
                cert = certify_transcript(res, proto, g, z)
                ok_run = cert is not None and res.depth <= cap_r
                rep_det.record(LemmaInstance(
                    tag, "pass" if ok_run else "FAIL",
                    detail="no certifying preimage" if cert is None else ""))
            elif res.status == "invariant_violation" and res.violation:
                rep_det.record(LemmaInstance(tag, "pass",
                                             detail=f"violation named: {res.violation}"))
            else:
                rep_det.record(LemmaInstance(tag, "FAIL", detail=str(res.status)))
            led = ledger_assertions(res, det)
            rep_led.record(LemmaInstance(
                f"ledger/{tag}", "pass" if led.ok else "FAIL"))

            dist = enumerate_output_distribution(proto, g, z, rnd)
            err_mass = dist.prob(ERROR_K)
            bound = Fraction(1, 1 << b)
            rep_err.record(LemmaInstance(
                f"rand/{pname}/z={z:02b}", "pass" if err_mass < bound else "FAIL",
                measured=frac_str(err_mass), bound=frac_str(bound)))
            for sd in range(rand_seeds):
                rres = lift_randomized(proto, g, z, rnd, seed=sd)
                rled = ledger_assertions(rres, rnd)
                rep_led.record(LemmaInstance(
                    f"ledger/rand/{pname}/z={z:02b}/seed={sd}",
                    "pass" if rled.ok else "FAIL"))
    return [rep_det, rep_err, rep_led, rep_orc]


def _section_fixture() -> SectionReport:
    """Self-test: a deliberately wrong bound must register as a FAIL."""
    rep = SectionReport("fixture_planted_violation")
    fair = DistributionTable.uniform([0, 1])
    wrong = xor_bias(fair, 1, (0,)) < 0  # bias is 0; the planted claim is 'negative'
    rep.record(LemmaInstance("fixture/planted", "pass" if wrong else "FAIL",
                             detail="planted violation (expected FAIL)"))
    return rep
