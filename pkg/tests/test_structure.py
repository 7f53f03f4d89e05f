import random
from fractions import Fraction as F
from itertools import product

import pytest

from liftsim.dist import DistributionTable, project
from liftsim.errors import BudgetError, DomainError
from liftsim.exact import cmp_pow2, cmp_products
from liftsim.gadgets import builtin_gadget, random_gadget
from liftsim.structure import (
    Restriction,
    StructureCertificate,
    StructureRefusal,
    dangerous_probability,
    density_restoring_fix,
    density_restoring_partition,
    is_biasing,
    is_dangerous,
    is_dense,
    is_leaking,
    is_skewing,
    is_sparsifying,
    is_structured,
    max_density,
)

AND = builtin_gadget("and1")
XOR = builtin_gadget("xor1")
IP2 = builtin_gadget("ip2")

U3 = DistributionTable.uniform([(0, 0), (0, 1), (1, 0)])  # b=1, n=2


def rand_block_table(rng, n, b):
    universe = list(product(range(1 << b), repeat=n))
    weights = {t: rng.randrange(9) for t in universe}
    if not any(weights.values()):
        weights[universe[0]] = 1
    d = DistributionTable.from_weights(weights)
    return d.condition(d.support())


def test_restriction():
    r = Restriction("0*1")
    assert r.free() == (1,) and r.fixed() == (0, 2)
    assert r.consistent_with(0b001) and not r.consistent_with(0b101)
    r2 = r.fix((1,), (1,))
    assert r2.cells == "011"
    with pytest.raises(DomainError):
        r2.fix((0,), (0,))
    with pytest.raises(DomainError):
        Restriction("0x1")


def test_is_dense_examples():
    u = DistributionTable.uniform(list(product((0, 1), repeat=2)))
    assert is_dense(u, F(1), 1).dense
    const = DistributionTable.uniform([(0, 0), (0, 1)])
    w = is_dense(const, F(1, 2), 1)
    assert w.violating_set == (0,) and w.witness_maxprob == 1
    w = is_dense(U3, F(1), 1)
    assert w.violating_set == (0,) and w.witness_maxprob == F(2, 3)


def test_max_density_examples():
    u = DistributionTable.uniform(list(product((0, 1), repeat=2)))
    assert max_density(u, 1) == (1, 1)
    pm = DistributionTable.point((0, 0))
    lo, hi = max_density(pm, 1)
    assert lo == 0 and hi <= F(1, 2 ** 20)
    lo, hi = max_density(U3, 1)
    # sup is log2(3/2)/1 = 0.58496...
    assert float(lo) <= 0.5849625 <= float(hi)
    assert hi - lo <= F(1, 2 ** 20)
    # the lower bracket is itself a certified density level
    assert is_dense(U3, lo, 1).dense
    assert not is_dense(U3, hi, 1).dense


def test_is_structured_certificate_and_refusals():
    n, b = 2, 1
    full = DistributionTable.uniform(list(product((0, 1), repeat=n)))
    rho = Restriction.all_free(n)
    cert = is_structured(full, full, rho, F(2), XOR)
    assert isinstance(cert, StructureCertificate)
    assert cert.delta_x == cert.delta_y == 1

    # inconsistent fixed block
    rho_fixed = Restriction("1*")
    xs = DistributionTable.point((0, 0), domain=list(product((0, 1), repeat=2)))
    ys = full
    ref = is_structured(project(xs, (1,)), project(ys, (1,)), rho_fixed, F(1), AND,
                        x_full=xs, y_full=ys)
    assert isinstance(ref, StructureRefusal)
    assert ref.reason == "fixed-block consistency"  # and(0, y) is never 1

    # tau beyond the reachable density sum
    ref = is_structured(U3, full, rho, F(19, 10), XOR)
    assert isinstance(ref, StructureRefusal)
    assert ref.reason == "density sum"

    # certificate re-verification: both sides dense at the emitted levels
    cert = is_structured(U3, full, rho, F(3, 2), XOR)
    assert isinstance(cert, StructureCertificate)
    assert cert.delta_x + cert.delta_y >= F(3, 2)
    assert is_dense(U3, cert.delta_x, 1).dense
    assert is_dense(full, cert.delta_y, 1).dense


def test_certificate_reverification_sweep():
    # every emitted certificate re-verifies: both deltas are exact density
    # levels and their sum reaches tau
    rng = random.Random(41)
    for _ in range(30):
        n, b = rng.choice([(2, 1), (2, 2)])
        x = rand_block_table(rng, n, b)
        y = rand_block_table(rng, n, b)
        g = XOR if b == 1 else IP2
        rho = Restriction.all_free(n)
        for tau in (F(1, 4), F(1, 2), F(1)):
            out = is_structured(x, y, rho, tau, g)
            if isinstance(out, StructureCertificate):
                assert out.delta_x > 0 and out.delta_y > 0
                assert out.delta_x + out.delta_y >= tau
                assert is_dense(x, out.delta_x, b).dense
                assert is_dense(y, out.delta_y, b).dense


def test_density_restoring_fix_examples():
    u = DistributionTable.uniform(list(product((0, 1), repeat=2)))
    coords, value, rest = density_restoring_fix(u, F(1), 1)
    assert coords == () and rest is u

    const0 = DistributionTable.uniform([(0, 0), (0, 1)])
    coords, value, rest = density_restoring_fix(const0, F(1, 2), 1)
    assert 0 in coords
    assert is_dense(rest, F(1, 2), 1).dense

    coords, value, rest = density_restoring_fix(U3, F(1), 1)
    assert coords == (0, 1) and value == (0, 0)  # heaviest, lexicographically first
    assert is_dense(rest, F(1), 1).dense


def test_density_restoring_partition_guarantees():
    rng = random.Random(17)
    deltas = (F(1, 2), F(3, 4), F(1))
    cases = [U3, DistributionTable.point((1, 0), domain=list(product((0, 1), repeat=2)))]
    for _ in range(40):
        n, b = rng.choice([(2, 1), (3, 1), (2, 2)])
        cases.append(rand_block_table(rng, n, b))
    for d in cases:
        k = len(d.domain[0])
        b = 1 if max(max(t) for t in d.support()) < 2 else 2
        maxp = d.maxprob()
        for delta in deltas:
            parts = density_restoring_partition(d, delta, b)
            assert parts[0].p_geq == 1
            p_geqs = [p.p_geq for p in parts]
            assert all(p_geqs[i] > p_geqs[i + 1] for i in range(len(p_geqs) - 1))
            covered = []
            for part in parts:
                covered.extend(part.members)
                cond = d.condition(set(part.members))
                for i, v in zip(part.coords, part.value):
                    assert all(t[i] == v for t in cond.support())
                rest = tuple(i for i in range(k) if i not in part.coords)
                if rest:
                    reduced = project(cond, rest)
                    assert is_dense(reduced, delta, b).dense
                    lhs = reduced.maxprob() * part.p_geq
                else:
                    lhs = part.p_geq
                # cleared entropy bound through p_geq
                assert cmp_products(
                    lhs, (), maxp, [(2, delta * b * len(part.coords))]) <= 0
            assert sorted(covered) == list(d.support())


def test_is_leaking_examples():
    uy = DistributionTable.uniform(list(product((0, 1), repeat=2)))
    for x in product((0, 1), repeat=2):
        assert not is_leaking(x, uy, XOR).flagged
    v = is_leaking((0, 0), uy, AND)
    assert v.flagged  # and(0, y) never outputs 1
    assert not is_leaking((), DistributionTable.point(()), AND).flagged


def test_is_sparsifying_examples():
    uy = DistributionTable.uniform(list(product((0, 1), repeat=2)))
    # eps >= delta_y: the reduced level is <= 0, never sparsifying
    for x in product((0, 1), repeat=2):
        assert not is_sparsifying(x, uy, AND, F(1), F(1), 1).flagged
    # xor keeps conditioned marginals uniform
    for x in product((0, 1), repeat=2):
        assert not is_sparsifying(x, uy, XOR, F(1), F(1, 4), 1).flagged
    # single free coordinate: no room for a violating set after conditioning
    y1 = DistributionTable.uniform([(0,), (1,)])
    assert not is_sparsifying((0,), y1, AND, F(1), F(1, 4), 1).flagged


def test_is_skewing_examples():
    # Exactly uniform conditional outputs have min-entropy |I|, which sits
    # below the threshold |I| - eps*b*|J| - e + 1 precisely when
    # eps*b*|J| + e < 1: the +1 slack makes small eps*b instances skewing
    # even for the xor gadget against uniform inputs.
    uy = DistributionTable.uniform(list(product((0, 1), repeat=2)))
    for x in product((0, 1), repeat=2):
        assert is_skewing(x, uy, XOR, F(1), F(1, 4), 1).flagged
        assert not is_skewing(x, uy, XOR, F(1), F(1), 1).flagged
    # at b=2 the slack closes already at eps = 1/2
    uy2 = DistributionTable.uniform(list(product(range(4), repeat=2)))
    for x in ((1, 2), (3, 3)):
        assert not is_skewing(x, uy2, IP2, F(1), F(1, 2), 2).flagged
    # a collapsed conditional output (and with a zero block) is always skewing
    v = is_skewing((0, 0), uy, AND, F(1), F(1, 8), 1)
    assert v.flagged


def test_is_biasing_examples():
    uy = DistributionTable.uniform(list(product((0, 1), repeat=2)))
    for x in product((0, 1), repeat=2):
        assert not is_biasing(x, uy, XOR, F(1), F(1, 4), 1, F(2), 2).flagged
    # and with x = (0,0): the xor over S={1,2} is constant zero, bias 1
    assert is_biasing((0, 0), uy, AND, F(1), F(1, 4), 1, F(2), 2).flagged
    with pytest.raises(DomainError):
        is_biasing((0,), DistributionTable.uniform([(0,), (1,)]), AND,
                   F(1), F(1, 4), 1, F(2), 1)


def test_dangerous_probability_examples():
    uy = DistributionTable.uniform(list(product((0, 1), repeat=2)))
    ux = DistributionTable.uniform(list(product((0, 1), repeat=2)))
    assert dangerous_probability(ux, uy, XOR, F(1), F(1, 4), 1) == 0
    # x values with a zero block are leaking for AND; mass 3/4 under uniform
    p = dangerous_probability(ux, uy, AND, F(1), F(1, 4), 1)
    assert p >= F(3, 4)


def test_scan_budget():
    big = DistributionTable.uniform(list(product((0, 1), repeat=4)))
    with pytest.raises(BudgetError):
        is_leaking((0, 0, 0, 0), big, AND)


def test_skewing_condition_claim_exhaustive():
    """dangerous and not leaking implies skewing: exact and unconditional."""
    rng = random.Random(23)
    for gname in ("xor1", "and1", "or1", "ip1", "ip2"):
        g = builtin_gadget(gname)
        b = g.b
        universe = list(product(range(1 << b), repeat=2))
        for _ in range(6):
            supp = sorted(rng.sample(universe, rng.randrange(2, len(universe) + 1)))
            y = DistributionTable.uniform(supp)
            if any(project(y, (i,)).maxprob() == 1 for i in range(2)):
                continue
            delta_y = max_density(y, b)[0]
            for eps in (F(1, 4), F(1, 2)):
                for x in universe:
                    leak = is_leaking(x, y, g).flagged
                    spars = is_sparsifying(x, y, g, delta_y, eps, b).flagged
                    if spars and not leak:
                        assert is_skewing(x, y, g, delta_y, eps, b).flagged, (gname, x, supp, eps)


def test_biasing_condition_counterexample_documented():
    """The reverse claim (not biasing => not dangerous) fails at n=2.

    With the AND gadget and Y uniform on {00, 11}, the value x = (0, 1) is
    leaking (AND(0, .) never outputs 1) yet no (S, J, y_J) triple satisfies
    the size bound with a biased conditional XOR: the only candidate at n=2
    is S={1,2} with empty J, whose xor is Y_2 with bias 0.  This is a
    genuine small-n counterexample, kept here as a regression anchor.
    """
    y = DistributionTable.uniform([(0, 0), (1, 1)])
    delta_y = max_density(y, 1)[0]
    assert delta_y == F(1, 2)
    x = (0, 1)
    assert is_leaking(x, y, AND).flagged
    for eps in (F(1, 4), F(1, 2)):
        for c in (F(1, 2), F(2), F(16)):
            assert not is_biasing(x, y, AND, delta_y, eps, 1, c, 2).flagged
