import random
from fractions import Fraction as F

import pytest

from liftsim.dist import DistributionTable
from liftsim.dtrees import brute_force_Ddt, parity_problem, first_bit_problem
from liftsim.errors import DomainError, InvariantError
from liftsim.gadgets import builtin_gadget
from liftsim.protocols import (
    PLeaf,
    PNode,
    ProtocolTree,
    RandomizedProtocol,
    assert_prefix_free,
    canonical_protocol,
    complexity,
    kraft_heavy_message,
    message_distribution,
    protocol_from_json,
    protocol_to_json,
    randomized_protocol_from_json,
    randomized_protocol_to_json,
    run_protocol,
)
from liftsim.simulate import compose_eval

XOR = builtin_gadget("xor1")
IP2 = builtin_gadget("ip2")


def leaf_protocol(n=1, b=1, output="o"):
    return ProtocolTree(n, b, PLeaf(output))


def one_bit_protocol():
    # Alice sends her single input bit (n=1, b=1)
    return ProtocolTree(1, 1, PNode("A", (0, 1), (PLeaf("zero"), PLeaf("one"))))


def test_run_protocol_examples():
    p = leaf_protocol()
    assert run_protocol(p, 0, 0) == ("", "o", [])
    p1 = one_bit_protocol()
    t, out, rounds = run_protocol(p1, 1, 0)
    assert t == "1" and out == "one" and rounds == [("A", "1")]
    with pytest.raises(DomainError):
        run_protocol(p1, 2, 0)


def test_complexity_examples():
    assert complexity(leaf_protocol()) == (0, 0)
    assert complexity(one_bit_protocol()) == (1, 1)
    # Alice announces both bits of her 2-bit input: C=2, r=1
    p = ProtocolTree(1, 2, PNode("A", (0, 0, 1, 1), (
        PNode("A", (0, 1, 0, 1), (PLeaf("00"), PLeaf("01"))),
        PNode("A", (0, 1, 0, 1), (PLeaf("10"), PLeaf("11"))),
    )))
    assert complexity(p) == (2, 1)


def test_message_distribution_and_prefix_freeness():
    # messages 0, 10, 11, 10 for the four inputs of a 2-bit Alice round
    inner = PNode("A", (0, 0, 1, 0), (PLeaf("m10"), PLeaf("m11")))
    root = PNode("A", (0, 1, 1, 1), (PLeaf("m0"), inner))
    p = ProtocolTree(1, 2, root)
    table, ends = message_distribution(p, root, DistributionTable.uniform(range(4)))
    assert table.mass == {"0": F(1, 4), "10": F(1, 2), "11": F(1, 4)}
    assert isinstance(ends["0"], PLeaf) and ends["0"].output == "m0"
    # constant speaker bits on the support give a single certain message
    table, _ = message_distribution(p, root, DistributionTable.point(0, domain=range(4)))
    assert table.mass == {"0": F(1)}


def test_assert_prefix_free():
    assert_prefix_free(["0", "10", "11"])
    with pytest.raises(InvariantError):
        assert_prefix_free(["0", "01"])


def test_kraft_heavy_message_examples():
    single = DistributionTable.point("101")
    assert kraft_heavy_message(single) == "101"
    d = DistributionTable({"0": F(1, 2), "10": F(1, 4), "11": F(1, 4)})
    assert kraft_heavy_message(d) == "0"
    d = DistributionTable({"0": F(1, 8), "10": F(7, 16), "11": F(7, 16)})
    assert kraft_heavy_message(d) == "10"


def test_kraft_heavy_message_fuzz():
    rng = random.Random(12)
    for _ in range(300):
        # random prefix-free code: random binary tree leaves, depth <= 4
        code = []

        def grow(prefix, depth):
            if depth == 0 or rng.random() < 0.4:
                code.append(prefix)
                return
            grow(prefix + "0", depth - 1)
            grow(prefix + "1", depth - 1)

        grow("0", 3)
        grow("1", 3)
        weights = {w: rng.randrange(1, 10) for w in code}
        d = DistributionTable.from_weights(weights)
        w = kraft_heavy_message(d)
        assert d.mass[w] * (1 << len(w)) >= 1


def test_canonical_protocol_examples():
    # zero-query tree
    from liftsim.dtrees import DLeaf, ParallelDecisionTree
    t0 = ParallelDecisionTree(2, DLeaf("c"))
    p0 = canonical_protocol(t0, XOR)
    assert complexity(p0) == (0, 0)
    assert run_protocol(p0, 0, 0)[1] == "c"

    # one query at b=1: C = 2, r = 2
    d, t1 = brute_force_Ddt(first_bit_problem(1))
    assert d == 1
    p1 = canonical_protocol(t1, XOR)
    assert complexity(p1) == (2, 2)

    # depth-D tree at block length b: C = D*(b+1), r = 2D
    d2, t2 = brute_force_Ddt(parity_problem(2))
    p2 = canonical_protocol(t2, IP2)
    assert complexity(p2) == (d2 * 3, 2 * d2)


def test_canonical_protocol_solves_composed_problems():
    for n, g in ((2, XOR), (2, IP2), (3, XOR)):
        problem = parity_problem(n)
        _, tree = brute_force_Ddt(problem)
        proto = canonical_protocol(tree, g)
        for x in range(proto.input_size):
            for y in range(proto.input_size):
                _, out, _ = run_protocol(proto, x, y)
                z = compose_eval(g, x, y, n)
                assert problem.allows(z, out)


def test_protocol_json_roundtrip():
    _, tree = brute_force_Ddt(parity_problem(2))
    p = canonical_protocol(tree, IP2)
    text = protocol_to_json(p)
    q = protocol_from_json(text)
    assert protocol_to_json(q) == text
    rp = RandomizedProtocol(((F(1, 2), p), (F(1, 2), p)))
    text2 = randomized_protocol_to_json(rp)
    rp2 = randomized_protocol_from_json(text2)
    assert randomized_protocol_to_json(rp2) == text2
    with pytest.raises(DomainError):
        RandomizedProtocol(((F(1, 2), p),))
