"""Bit-granular communication protocols over Lambda^n x Lambda^n.

A protocol is a binary tree: each internal node names a speaker and a total
map from that speaker's input to the transmitted bit; leaves carry outputs.
A round is a maximal same-speaker segment of a root-leaf path.  Inputs are
integers in [0, 2^(b*n)) whose binary expansion concatenates the n blocks,
first block most significant (numeric order = lexicographic order).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from .dist import DistributionTable
from .dtrees import DLeaf, DNode, ParallelDecisionTree
from .errors import DomainError, InvariantError, LiftsimError
from .gadgets import Gadget

__all__ = [
    "PLeaf",
    "PNode",
    "ProtocolTree",
    "RandomizedProtocol",
    "run_protocol",
    "message_distribution",
    "assert_prefix_free",
    "kraft_heavy_message",
    "canonical_protocol",
    "complexity",
    "blocks_of",
    "index_of_blocks",
    "protocol_to_json",
    "protocol_from_json",
    "randomized_protocol_to_json",
    "randomized_protocol_from_json",
]


@dataclass(frozen=True)
class PLeaf:
    output: object


@dataclass(frozen=True)
class PNode:
    speaker: str                     # 'A' or 'B'
    bits: Tuple[int, ...]            # transmitted bit per speaker input
    children: Tuple[object, object]  # child 0, child 1


@dataclass(frozen=True)
class ProtocolTree:
    n: int
    b: int
    root: object

    def __post_init__(self):
        size = self.input_size

        def check(node):
            if isinstance(node, PLeaf):
                return
            if len(node.bits) != size:
                raise DomainError(
                    f"bit map has {len(node.bits)} entries, expected {size}")
            for child in node.children:
                check(child)

        check(self.root)

    @property
    def input_size(self) -> int:
        return 1 << (self.b * self.n)


def blocks_of(v: int, n: int, b: int) -> Tuple[int, ...]:
    mask = (1 << b) - 1
    return tuple((v >> (b * (n - 1 - i))) & mask for i in range(n))


def index_of_blocks(blocks: Sequence[int], b: int) -> int:
    v = 0
    for blk in blocks:
        v = (v << b) | blk
    return v


def run_protocol(p: ProtocolTree, x: int, y: int):
    """Walk to a leaf; returns (transcript bits, output, round list)."""
    size = p.input_size
    if not (0 <= x < size and 0 <= y < size):
        raise DomainError("inputs out of range for this protocol")
    node = p.root
    transcript: List[str] = []
    rounds: List[Tuple[str, str]] = []
    while isinstance(node, PNode):
        bit = node.bits[x if node.speaker == "A" else y]
        transcript.append(str(bit))
        if rounds and rounds[-1][0] == node.speaker:
            rounds[-1] = (node.speaker, rounds[-1][1] + str(bit))
        else:
            rounds.append((node.speaker, str(bit)))
        node = node.children[bit]
    return "".join(transcript), node.output, rounds


def complexity(p: ProtocolTree) -> Tuple[int, int]:
    """(communication complexity in bits, round complexity)."""

    def go(node, speaker) -> Tuple[int, int]:
        if isinstance(node, PLeaf):
            return 0, 0
        extra_round = 0 if node.speaker == speaker else 1
        best_c = best_r = 0
        for child in node.children:
            c, r = go(child, node.speaker)
            best_c = max(best_c, c)
            best_r = max(best_r, r)
        return 1 + best_c, extra_round + best_r

    return go(p.root, None)


def assert_prefix_free(messages: Sequence[str]) -> None:
    seen = sorted(messages)
    for a, b in zip(seen, seen[1:]):
        if b.startswith(a):
            raise InvariantError(f"message set is not prefix-free: {a!r} prefixes {b!r}")


def message_distribution(p: ProtocolTree, node: PNode, x: DistributionTable):
    """Distribution over the speaker's maximal same-speaker messages from `node`.

    `x` must be the speaker's input distribution restricted to inputs that
    reach `node`.  Returns (table over message strings, message -> end node).
    """
    if not isinstance(node, PNode):
        raise DomainError("message distribution needs an internal node")
    speaker = node.speaker
    masses: Dict[str, Fraction] = {}
    ends: Dict[str, object] = {}
    for v in x.support():
        cur = node
        msg = []
        while isinstance(cur, PNode) and cur.speaker == speaker:
            bit = cur.bits[v]
            msg.append(str(bit))
            cur = cur.children[bit]
        w = "".join(msg)
        masses[w] = masses.get(w, Fraction(0)) + x.mass[v]
        ends[w] = cur
    if not masses:
        raise DomainError("empty support at this node")
    assert_prefix_free(list(masses))
    return DistributionTable(masses), ends


def kraft_heavy_message(d: DistributionTable) -> str:
    """Some message w with mass >= 2**(-|w|); canonical pick among qualifiers.

    Existence is a theorem for prefix-free supports, so a miss raises an
    invariant error rather than returning a sentinel.
    """
    support = [w for w in d.domain if d.mass[w] > 0]
    assert_prefix_free(support)
    qualifiers = [w for w in support if d.mass[w] * (1 << len(w)) >= 1]
    if not qualifiers:
        raise InvariantError("no Kraft-heavy message; support cannot be prefix-free")
    return min(qualifiers, key=lambda w: (len(w), w))


def canonical_protocol(tree: ParallelDecisionTree, g: Gadget) -> ProtocolTree:
    """The natural protocol for a composed search problem.

    For every queried coordinate i, Alice announces her block x_i (b bits,
    most significant first) and Bob answers with the gadget output (1 bit);
    leaf labels are copied from the decision tree.
    """
    n, b = tree.n, g.b
    size = 1 << (b * n)
    x_blocks = [blocks_of(v, n, b) for v in range(size)]
    y_blocks = x_blocks

    def _query_chain(dnode: DNode, coords, k: int, partial: Tuple[int, ...]):
        if not coords:  # degenerate pass-through node, communicates nothing
            child = dnode.children[0]
            if isinstance(child, DLeaf):
                return PLeaf(child.output)
            return _query_chain(child, child.queries, 0, ())
        # announce coordinate coords[k]: b Alice bits then one Bob bit
        coord = coords[k]

        def alice_level(depth: int, xi_prefix: int):
            if depth == b:
                row = xi_prefix * g.side
                bits = tuple(g.table[row + y_blocks[v][coord]] for v in range(size))

                def after(zbit: int):
                    new_partial = partial + (zbit,)
                    if k + 1 < len(coords):
                        return _query_chain(dnode, coords, k + 1, new_partial)
                    idx = 0
                    for bitv in new_partial:
                        idx = (idx << 1) | bitv
                    child = dnode.children[idx]
                    if isinstance(child, DLeaf):
                        return PLeaf(child.output)
                    return _query_chain(child, child.queries, 0, ())

                return PNode("B", bits, (after(0), after(1)))
            bits = tuple((x_blocks[v][coord] >> (b - 1 - depth)) & 1 for v in range(size))
            return PNode(
                "A",
                bits,
                (alice_level(depth + 1, xi_prefix << 1),
                 alice_level(depth + 1, (xi_prefix << 1) | 1)),
            )

        return alice_level(0, 0)

    root = tree.root
    if isinstance(root, DLeaf):
        return ProtocolTree(n, b, PLeaf(root.output))
    return ProtocolTree(n, b, _query_chain(root, root.queries, 0, ()))


@dataclass(frozen=True)
class RandomizedProtocol:
    components: Tuple[Tuple[Fraction, ProtocolTree], ...]

    def __post_init__(self):
        if sum((w for w, _ in self.components), Fraction(0)) != 1:
            raise DomainError("component weights must sum to 1")
        dims = {(p.n, p.b) for _, p in self.components}
        if len(dims) > 1:
            raise DomainError(f"components disagree on dimensions: {sorted(dims)}")


# -- file format ---------------------------------------------------------------

def _node_to_obj(node):
    if isinstance(node, PLeaf):
        return {"leaf": node.output}
    return {
        "speaker": node.speaker,
        "bit_map": list(node.bits),
        "children": [_node_to_obj(c) for c in node.children],
    }


def protocol_to_json(p: ProtocolTree) -> str:
    return json.dumps({"n": p.n, "b": p.b, "tree": _node_to_obj(p.root)}, sort_keys=True)


def _node_from_obj(obj, size: int):
    if "leaf" in obj:
        return PLeaf(obj["leaf"])
    speaker = obj["speaker"]
    if speaker not in ("A", "B"):
        raise LiftsimError(f"speaker must be 'A' or 'B', got {speaker!r}")
    bits = tuple(int(v) for v in obj["bit_map"])
    if len(bits) != size or any(v not in (0, 1) for v in bits):
        raise LiftsimError(f"bit_map must list {size} bits")
    children = obj["children"]
    if len(children) != 2:
        raise LiftsimError("internal nodes need exactly two children")
    return PNode(speaker, bits, tuple(_node_from_obj(c, size) for c in children))


def protocol_from_json(text: str) -> ProtocolTree:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise LiftsimError(f"protocol file is not valid JSON: {e}") from None
    n, b = int(doc["n"]), int(doc["b"])
    return ProtocolTree(n, b, _node_from_obj(doc["tree"], 1 << (b * n)))


def randomized_protocol_to_json(rp: RandomizedProtocol) -> str:
    comps = [
        {"weight": f"{w.numerator}/{w.denominator}", "protocol": json.loads(protocol_to_json(p))}
        for w, p in rp.components
    ]
    return json.dumps({"components": comps}, sort_keys=True)


def randomized_protocol_from_json(text: str) -> RandomizedProtocol:
    doc = json.loads(text)
    comps = []
    for item in doc["components"]:
        w = Fraction(item["weight"])
        p = protocol_from_json(json.dumps(item["protocol"]))
        comps.append((w, p))
    return RandomizedProtocol(tuple(comps))
