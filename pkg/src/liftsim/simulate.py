"""Round-by-round extraction of decision trees from communication protocols.

Both engines walk the protocol one round (maximal same-speaker segment) at a
time while maintaining a rectangle of surviving inputs:

  deterministic: discard dangerous values, follow a Kraft-heavy message, fix
  a maximal density-violating block set, query those coordinates, condition
  the silent side on the gadget outputs;

  randomized: sample the message and a density-restoring partition class
  instead, track the information total K as an exact product of message
  probabilities, and halt with an error when K exceeds C+b or a sampled
  class falls below the truncation threshold.

Desk-scale parameters generally violate the asymptotic hypotheses; the
engines run faithfully anyway and record every violated hypothesis in the
trace instead of refusing.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Dict, List, Optional, Sequence, Tuple

from .dist import DistributionTable, ZERO, project
from .errors import BudgetError, DomainError, LiftsimError
from .exact import cmp_pow2, cmp_products, exact_log2, frac_str
from .gadgets import Gadget
from .protocols import (
    PLeaf,
    PNode,
    ProtocolTree,
    RandomizedProtocol,
    blocks_of,
    complexity,
    kraft_heavy_message,
    message_distribution,
    run_protocol,
)
from .dtrees import DLeaf, DNode, ParallelDecisionTree
from .structure import (
    Restriction,
    density_restoring_fix,
    density_restoring_partition,
    is_dangerous,
    is_dense,
    max_density,
)

__all__ = [
    "LiftingParams",
    "RoundRecord",
    "SimResult",
    "lift_deterministic",
    "lift_randomized",
    "lift_randomized_protocol",
    "enumerate_output_distribution",
    "enumerate_randomized_protocol",
    "reference_distribution",
    "certify_transcript",
    "extract_parallel_tree",
    "ledger_assertions",
    "LedgerReport",
    "RoundLedger",
    "compose_eval",
    "ERROR_K",
    "ERROR_TRUNCATION",
    "VIOLATION_PREFIX",
]

ERROR_K = "<ERROR:K>"
ERROR_TRUNCATION = "<ERROR:TRUNCATION>"
VIOLATION_PREFIX = "<VIOLATION:"
ENUM_BRANCH_LIMIT = 10 ** 6
FIBER_LIMIT_BITS = 18
DENSITY_WITNESS_BITS = 12


@dataclass
class LiftingParams:
    """Simulation parameters; the derived trio follows the standard recipe.

    deterministic: eps = h/(c*eta);  randomized: eps = h*log2(c)/(c*eta),
    which is rational only when c is a power of two.  Either way
    delta = 1 - eta/4 + eps/2 and tau = 2*delta - eps.  Nonstandard
    combinations must be flagged explicitly.
    """

    eta: Fraction
    c: Fraction
    h: Fraction
    b: int
    n: int
    mode: str = "det"
    eps: Optional[Fraction] = None
    delta: Optional[Fraction] = None
    tau: Optional[Fraction] = None
    nonstandard: bool = False
    trunc_scaled_by_b: bool = True
    density_witness_bits: int = DENSITY_WITNESS_BITS

    def __post_init__(self):
        self.eta = Fraction(self.eta)
        self.c = Fraction(self.c)
        self.h = Fraction(self.h)
        if self.mode not in ("det", "rand"):
            raise DomainError("mode must be 'det' or 'rand'")
        overridden = self.eps is not None or self.delta is not None or self.tau is not None
        if overridden and not self.nonstandard:
            raise DomainError("explicit eps/delta/tau require nonstandard=True")
        if self.eps is None:
            if self.mode == "det":
                self.eps = self.h / (self.c * self.eta)
            else:
                log2c = exact_log2(self.c)
                if log2c is None:
                    raise DomainError(
                        "randomized eps needs log2(c) rational; use a power-of-two c "
                        "or pass eps explicitly with nonstandard=True"
                    )
                self.eps = self.h * log2c / (self.c * self.eta)
        self.eps = Fraction(self.eps)
        if self.delta is None:
            self.delta = 1 - self.eta / 4 + self.eps / 2
        self.delta = Fraction(self.delta)
        if self.tau is None:
            self.tau = 2 * self.delta - self.eps
        self.tau = Fraction(self.tau)

    @classmethod
    def standard(cls, b: int, n: int, mode: str = "det",
                 eta=Fraction(1), c=Fraction(2), h=Fraction(1), **kw) -> "LiftingParams":
        return cls(eta=eta, c=c, h=h, b=b, n=n, mode=mode, **kw)

    def trunc_cmp(self, p_geq: Fraction) -> int:
        """Sign of p_geq minus the step-5 truncation threshold, exact."""
        exponent = self.eta * self.b / 8 if self.trunc_scaled_by_b else self.eta / 8
        return cmp_products(p_geq, (), Fraction(1, 16 * self.n * self.b), [(2, -exponent)])


@dataclass
class RoundRecord:
    index: int
    speaker: str
    free_before: Tuple[int, ...]
    delta_witness: Optional[Fraction] = None
    dangerous_values: Tuple = ()
    discarded_mass: Fraction = ZERO
    message: str = ""
    p_message: Fraction = Fraction(1)
    heavy_value_prob: Optional[Fraction] = None   # det step 3 conditioning prob
    class_index: Optional[int] = None             # rand step 4 (1-based)
    p_class: Optional[Fraction] = None
    p_geq: Optional[Fraction] = None
    query_coords: Tuple[int, ...] = ()
    fixed_value: Tuple[int, ...] = ()
    step5_prob: Optional[Fraction] = None
    snapshots: Dict[str, Tuple[int, Fraction, Fraction]] = field(default_factory=dict)
    flags: Dict[str, bool] = field(default_factory=dict)


@dataclass
class SimResult:
    status: str
    violation: Optional[str]
    transcript: str
    output: object
    rho: str
    queries: Tuple[Tuple[int, ...], ...]
    depth: int
    xset: Tuple[int, ...]
    yset: Tuple[int, ...]
    rounds: List[RoundRecord]
    k_product: Optional[Fraction] = None
    component: Optional[int] = None  # sampled index, randomized mixtures only

    @property
    def total_queries(self) -> int:
        return sum(len(q) for q in self.queries)

    def to_json(self) -> str:
        def fr(v):
            return None if v is None else frac_str(v)

        rounds = []
        for r in self.rounds:
            rounds.append({
                "index": r.index,
                "speaker": r.speaker,
                "free_before": list(r.free_before),
                "delta_witness": fr(r.delta_witness),
                "discarded_mass": fr(r.discarded_mass),
                "dangerous_values": [list(v) for v in r.dangerous_values],
                "message": r.message,
                "p_message": fr(r.p_message),
                "heavy_value_prob": fr(r.heavy_value_prob),
                "class_index": r.class_index,
                "p_class": fr(r.p_class),
                "p_geq": fr(r.p_geq),
                "query_coords": list(r.query_coords),
                "fixed_value": list(r.fixed_value),
                "step5_prob": fr(r.step5_prob),
                "deficiency_snapshots": {
                    k: {"free": v[0], "maxp_x": fr(v[1]), "maxp_y": fr(v[2])}
                    for k, v in r.snapshots.items()
                },
                "flags": dict(sorted(r.flags.items())),
            })
        doc = {
            "status": self.status,
            "violation": self.violation,
            "transcript": self.transcript,
            "output": self.output,
            "rho": self.rho,
            "queries": [list(q) for q in self.queries],
            "depth": self.depth,
            "total_queries": self.total_queries,
            "k_product": fr(self.k_product),
            "final_rectangle": {"x_size": len(self.xset), "y_size": len(self.yset)},
            "rounds": rounds,
        }
        return json.dumps(doc, sort_keys=True, indent=2)


def compose_eval(g: Gadget, x: int, y: int, n: int) -> int:
    """The composed map: n gadget outputs packed into an n-bit integer."""
    xb = blocks_of(x, n, g.b)
    yb = blocks_of(y, n, g.b)
    z = 0
    for xi, yi in zip(xb, yb):
        z = (z << 1) | g.eval(xi, yi)
    return z


def _free_marginal(inputs: Sequence[int], free: Tuple[int, ...], n: int, b: int) -> DistributionTable:
    weights: Dict[Tuple[int, ...], int] = {}
    for v in inputs:
        blocks = blocks_of(v, n, b)
        key = tuple(blocks[i] for i in free)
        weights[key] = weights.get(key, 0) + 1
    return DistributionTable.from_weights(weights)


def _maxp_free(inputs: Sequence[int], free: Tuple[int, ...], n: int, b: int) -> Fraction:
    if not free:
        return Fraction(1)
    return _free_marginal(inputs, free, n, b).maxprob()


class _DangerCache:
    """Memoizes the dangerous-value classification across rounds and branches."""

    def __init__(self, g: Gadget, params: LiftingParams):
        self.g = g
        self.gt = g.transpose()
        self.params = params
        self.contexts: Dict[tuple, tuple] = {}

    def context(self, speaker: str, silent: Tuple[int, ...], free: Tuple[int, ...]):
        key = (speaker, silent, free)
        ctx = self.contexts.get(key)
        if ctx is None:
            p = self.params
            silent_free = _free_marginal(silent, free, p.n, p.b)
            delta_w = max_density(silent_free, p.b, p.density_witness_bits)[0]
            gad = self.g if speaker == "A" else self.gt
            ctx = (silent_free, delta_w, gad, {})
            self.contexts[key] = ctx
        return ctx

    def dangerous(self, speaker: str, silent: Tuple[int, ...], free: Tuple[int, ...], value) -> bool:
        silent_free, delta_w, gad, memo = self.context(speaker, silent, free)
        hit = memo.get(value)
        if hit is None:
            p = self.params
            hit = is_dangerous(value, silent_free, gad, delta_w, p.eps, p.b,
                               coord_limit=max(len(free), 1))
            memo[value] = hit
        return hit


def _message_of(node: PNode, v: int) -> str:
    speaker = node.speaker
    cur = node
    bits = []
    while isinstance(cur, PNode) and cur.speaker == speaker:
        bit = cur.bits[v]
        bits.append(str(bit))
        cur = cur.children[bit]
    return "".join(bits)


class _Engine:
    """Shared state and steps for one simulation run."""

    def __init__(self, p: ProtocolTree, g: Gadget, z: int, params: LiftingParams,
                 cache: Optional[_DangerCache] = None,
                 state: Optional[dict] = None, rho: Optional[Restriction] = None):
        _check_dims(p, g, z, params)
        self.p = p
        self.g = g
        self.z = z
        self.params = params
        self.cache = cache or _DangerCache(g, params)
        full = tuple(range(p.input_size))
        self.state = state if state is not None else {"xset": full, "yset": full}
        self.rho = rho if rho is not None else Restriction.all_free(p.n)
        self.transcript: List[str] = []
        self.rounds: List[RoundRecord] = []
        self.queries: List[Tuple[int, ...]] = []

    # -- step helpers ---------------------------------------------------------

    def begin_round(self, node: PNode) -> RoundRecord:
        rec = RoundRecord(index=len(self.rounds) + 1, speaker=node.speaker,
                          free_before=self.rho.free())
        self.rounds.append(rec)
        self._density_invariant(rec)
        rec.snapshots["start"] = self.snapshot(rec.free_before)
        return rec

    def snapshot(self, free: Tuple[int, ...]):
        n, b = self.params.n, self.params.b
        return (len(free),
                _maxp_free(self.state["xset"], free, n, b),
                _maxp_free(self.state["yset"], free, n, b))

    def _density_invariant(self, rec: RoundRecord) -> None:
        free = rec.free_before
        if not free:
            rec.flags["invariant_speaker_dense"] = True
            rec.flags["invariant_silent_dense"] = True
            return
        pr = self.params
        spk = self.state["xset"] if rec.speaker == "A" else self.state["yset"]
        sil = self.state["yset"] if rec.speaker == "A" else self.state["xset"]
        spk_m = _free_marginal(spk, free, pr.n, pr.b)
        sil_m = _free_marginal(sil, free, pr.n, pr.b)
        rec.flags["invariant_speaker_dense"] = is_dense(spk_m, pr.delta - pr.eps, pr.b).dense
        rec.flags["invariant_silent_dense"] = is_dense(sil_m, pr.delta, pr.b).dense

    def discard_dangerous(self, rec: RoundRecord) -> bool:
        """Step 1: returns False when the speaker's set empties."""
        free = rec.free_before
        if not free:
            rec.snapshots["after_discard"] = self.snapshot(free)
            return True
        speaker = rec.speaker
        spk_key = "xset" if speaker == "A" else "yset"
        silent = self.state["yset" if speaker == "A" else "xset"]
        _, delta_w, _, _ = self.cache.context(speaker, silent, free)
        rec.delta_witness = delta_w
        n, b = self.params.n, self.params.b
        spk_set = self.state[spk_key]
        value_of = {v: tuple(blocks_of(v, n, b)[i] for i in free) for v in spk_set}
        distinct = sorted(set(value_of.values()))
        bad = {val for val in distinct
               if self.cache.dangerous(speaker, silent, free, val)}
        kept = tuple(v for v in spk_set if value_of[v] not in bad)
        rec.dangerous_values = tuple(sorted(bad))
        rec.discarded_mass = Fraction(len(spk_set) - len(kept), len(spk_set))
        if not kept:
            rec.snapshots["after_discard"] = self.snapshot(free)
            return False
        self.state[spk_key] = kept
        rec.snapshots["after_discard"] = self.snapshot(free)
        return True

    def message_table(self, node: PNode):
        spk_key = "xset" if node.speaker == "A" else "yset"
        table, ends = message_distribution(
            self.p, node, DistributionTable.uniform(self.state[spk_key]))
        return table, ends

    def take_message(self, node: PNode, rec: RoundRecord, message: str,
                     p_message: Fraction, end_node) -> object:
        spk_key = "xset" if node.speaker == "A" else "yset"
        rec.message = message
        rec.p_message = p_message
        rec.flags["kraft_heavy"] = p_message * (1 << len(message)) >= 1
        self.transcript.append(message)
        self.state[spk_key] = tuple(
            v for v in self.state[spk_key] if _message_of(node, v) == message)
        rec.snapshots["after_message"] = self.snapshot(rec.free_before)
        return end_node

    def fix_blocks(self, rec: RoundRecord, rel_coords, value) -> None:
        """Condition the speaker on a block assignment inside the free part."""
        free = rec.free_before
        abs_coords = tuple(free[i] for i in rel_coords)
        rec.query_coords = abs_coords
        rec.fixed_value = tuple(value)
        if not abs_coords:
            rec.snapshots["after_fix"] = self.snapshot(free)
            return
        spk_key = "xset" if rec.speaker == "A" else "yset"
        n, b = self.params.n, self.params.b
        sel = dict(zip(abs_coords, value))
        self.state[spk_key] = tuple(
            v for v in self.state[spk_key]
            if all(blocks_of(v, n, b)[i] == bv for i, bv in sel.items()))
        rec.snapshots["after_fix"] = self.snapshot(free)

    def query_and_condition(self, rec: RoundRecord):
        """Steps 4-5 (det) / 6-7 (rand): query z and condition the silent side."""
        n, b = self.params.n, self.params.b
        abs_coords = rec.query_coords
        zbits = tuple((self.z >> (n - 1 - i)) & 1 for i in abs_coords)
        if abs_coords:
            self.rho = self.rho.fix(abs_coords, zbits)
        self.queries.append(abs_coords)
        rec.snapshots["after_query"] = self.snapshot(self.rho.free())
        if not abs_coords:
            rec.snapshots["end"] = self.snapshot(self.rho.free())
            return True
        silent_key = "yset" if rec.speaker == "A" else "xset"
        silent = self.state[silent_key]
        kept = []
        for w in silent:
            wb = blocks_of(w, n, b)
            ok = True
            for coord, xb, bit in zip(abs_coords, rec.fixed_value, zbits):
                out = (self.g.eval(xb, wb[coord]) if rec.speaker == "A"
                       else self.g.eval(wb[coord], xb))
                if out != bit:
                    ok = False
                    break
            if ok:
                kept.append(w)
        rec.step5_prob = Fraction(len(kept), len(silent))
        rec.flags["nonleaking_event"] = rec.step5_prob * (1 << (len(abs_coords) + 1)) >= 1
        if not kept:
            rec.snapshots["end"] = self.snapshot(self.rho.free())
            return False
        self.state[silent_key] = tuple(kept)
        rec.snapshots["end"] = self.snapshot(self.rho.free())
        return True

    def result(self, status: str, violation=None, output=None,
               k_product: Optional[Fraction] = None) -> SimResult:
        return SimResult(
            status=status, violation=violation, transcript="".join(self.transcript),
            output=output, rho=self.rho.cells, queries=tuple(self.queries),
            depth=len(self.rounds), xset=self.state["xset"], yset=self.state["yset"],
            rounds=self.rounds, k_product=k_product)


def _check_dims(p: ProtocolTree, g: Gadget, z: int, params: LiftingParams):
    if g.b != p.b or params.b != p.b or params.n != p.n:
        raise DomainError("protocol, gadget and parameter dimensions disagree")
    if not 0 <= z < (1 << p.n):
        raise DomainError(f"z must be an {p.n}-bit value")


def lift_deterministic(p: ProtocolTree, g: Gadget, z: int, params: LiftingParams,
                       cache: Optional[_DangerCache] = None) -> SimResult:
    """Deterministic five-step simulation of one protocol run on input z."""
    eng = _Engine(p, g, z, params, cache=cache)
    node = p.root
    while isinstance(node, PNode):
        rec = eng.begin_round(node)
        if not eng.discard_dangerous(rec):
            return eng.result("invariant_violation",
                              "step1: every surviving value is dangerous")
        table, ends = eng.message_table(node)
        message = kraft_heavy_message(table)
        node = eng.take_message(node, rec, message, table.mass[message], ends[message])
        marg = _free_marginal(eng.state["xset" if rec.speaker == "A" else "yset"],
                              rec.free_before, params.n, params.b) if rec.free_before else None
        if marg is not None:
            rel_coords, value, _ = density_restoring_fix(marg, params.delta, params.b)
            if rel_coords:
                rec.heavy_value_prob = project(marg, rel_coords).mass[tuple(value)]
                rec.flags["heavy_value"] = cmp_pow2(
                    rec.heavy_value_prob,
                    params.delta * params.b * len(rel_coords)) > 0
            eng.fix_blocks(rec, rel_coords, value)
        else:
            eng.fix_blocks(rec, (), ())
        if not eng.query_and_condition(rec):
            return eng.result("invariant_violation",
                              "step5: conditioning emptied the silent side")
    return eng.result("done", output=node.output)


# -- randomized engine ---------------------------------------------------------

def _sample(rng: random.Random, items):
    """Exact sampling from [(key, Fraction prob)] listed in canonical order."""
    denom = lcm(*[p.denominator for _, p in items])
    r = rng.randrange(denom)
    acc = 0
    for key, prob in items:
        acc += int(prob * denom)
        if r < acc:
            return key
    return items[-1][0]


def _partition_for(eng: _Engine, rec: RoundRecord, partition_memo: dict):
    spk_key = "xset" if rec.speaker == "A" else "yset"
    key = (spk_key, eng.state[spk_key], rec.free_before)
    parts = partition_memo.get(key)
    if parts is None:
        marg = _free_marginal(eng.state[spk_key], rec.free_before,
                              eng.params.n, eng.params.b)
        parts = density_restoring_partition(marg, eng.params.delta, eng.params.b)
        partition_memo[key] = parts
    return parts


def _apply_class(eng: _Engine, rec: RoundRecord, part) -> None:
    rec.class_index = part.index
    rec.p_class = part.prob
    rec.p_geq = part.p_geq
    spk_key = "xset" if rec.speaker == "A" else "yset"
    n, b = eng.params.n, eng.params.b
    members = set(part.members)
    free = rec.free_before
    eng.state[spk_key] = tuple(
        v for v in eng.state[spk_key]
        if tuple(blocks_of(v, n, b)[i] for i in free) in members)
    rec.query_coords = tuple(free[i] for i in part.coords)
    rec.fixed_value = tuple(part.value)
    rec.snapshots["after_fix"] = eng.snapshot(free)


def lift_randomized(p: ProtocolTree, g: Gadget, z: int, params: LiftingParams,
                    seed: int = 0) -> SimResult:
    """Sampled randomized simulation (messages and partition classes drawn
    from a deterministic seeded source); K is tracked as an exact product."""
    if params.mode != "rand":
        raise DomainError("lift_randomized needs randomized-mode parameters")
    rng = random.Random(seed)
    eng = _Engine(p, g, z, params)
    cap_c, _ = complexity(p)
    k_product = Fraction(1)
    partition_memo: dict = {}
    node = p.root
    while isinstance(node, PNode):
        rec = eng.begin_round(node)
        if not eng.discard_dangerous(rec):
            return eng.result("invariant_violation",
                              "step1: every surviving value is dangerous",
                              k_product=k_product)
        table, ends = eng.message_table(node)
        items = [(w, table.mass[w]) for w in table.domain if table.mass[w] > 0]
        message = _sample(rng, items)
        k_product *= table.mass[message]
        node = eng.take_message(node, rec, message, table.mass[message], ends[message])
        # step 3: halt when K = sum log(1/p_M) exceeds C + b
        if cmp_pow2(k_product, Fraction(cap_c + params.b)) < 0:
            rec.flags["k_halt"] = True
            return eng.result("error_halt_k", "step3: K exceeded C+b", k_product=k_product)
        if rec.free_before:
            parts = _partition_for(eng, rec, partition_memo)
            part = _sample(rng, [(pt, pt.prob) for pt in parts])
            _apply_class(eng, rec, part)
            if eng.params.trunc_cmp(part.p_geq) < 0:
                rec.flags["trunc_halt"] = True
                return eng.result("error_halt_truncation",
                                  "step5: sampled class below truncation threshold",
                                  k_product=k_product)
        else:
            eng.fix_blocks(rec, (), ())
        if not eng.query_and_condition(rec):
            return eng.result("invariant_violation",
                              "step7: conditioning emptied the silent side",
                              k_product=k_product)
    return eng.result("done", output=node.output, k_product=k_product)


def lift_randomized_protocol(rp: RandomizedProtocol, g: Gadget, z: int,
                             params: LiftingParams, seed: int = 0) -> SimResult:
    """Sample a deterministic component by weight, then run the simulation."""
    rng = random.Random(seed)
    comp = _sample(rng, [(i, w) for i, (w, _) in enumerate(rp.components)])
    _, proto = rp.components[comp]
    res = lift_randomized(proto, g, z, params, seed=rng.randrange(2 ** 32))
    res.component = comp
    return res


def enumerate_output_distribution(p: ProtocolTree, g: Gadget, z: int,
                                  params: LiftingParams,
                                  branch_limit: int = ENUM_BRANCH_LIMIT) -> DistributionTable:
    """Exact output distribution of the randomized simulation.

    Branches over every message and partition class with its exact
    probability; outcomes are transcripts, the two error markers, or a
    violation marker when the desk-scale regime empties a rectangle.
    """
    if params.mode != "rand":
        raise DomainError("enumeration needs randomized-mode parameters")
    cap_c, _ = complexity(p)
    cache = _DangerCache(g, params)
    partition_memo: dict = {}
    outcomes: Dict[str, Fraction] = {}
    branches = 0

    def add(key: str, prob: Fraction) -> None:
        outcomes[key] = outcomes.get(key, ZERO) + prob

    def walk(node, state, rho, transcript: str, k_product: Fraction, prob: Fraction):
        nonlocal branches
        branches += 1
        if branches > branch_limit:
            raise BudgetError("randomized enumeration branches", branches, branch_limit)
        if isinstance(node, PLeaf):
            add(transcript, prob)
            return
        eng = _Engine(p, g, z, params, cache=cache, state=dict(state), rho=rho)
        eng.transcript = [transcript]
        rec = eng.begin_round(node)
        if not eng.discard_dangerous(rec):
            add(f"{VIOLATION_PREFIX}step1>", prob)
            return
        table, ends = eng.message_table(node)
        base_state = dict(eng.state)
        for message in table.domain:
            p_msg = table.mass[message]
            if p_msg == 0:
                continue
            eng.state = dict(base_state)
            eng.transcript = [transcript]
            rec_m = RoundRecord(index=rec.index, speaker=rec.speaker,
                                free_before=rec.free_before)
            nxt = eng.take_message(node, rec_m, message, p_msg, ends[message])
            k2 = k_product * p_msg
            prob2 = prob * p_msg
            if cmp_pow2(k2, Fraction(cap_c + params.b)) < 0:
                add(ERROR_K, prob2)
                continue
            if rec.free_before:
                parts = _partition_for(eng, rec_m, partition_memo)
                msg_state = dict(eng.state)
                for part in parts:
                    eng.state = dict(msg_state)
                    eng.rho = rho
                    rec_c = RoundRecord(index=rec.index, speaker=rec.speaker,
                                        free_before=rec.free_before)
                    _apply_class(eng, rec_c, part)
                    prob3 = prob2 * part.prob
                    if params.trunc_cmp(part.p_geq) < 0:
                        add(ERROR_TRUNCATION, prob3)
                        continue
                    eng.queries = []
                    if not eng.query_and_condition(rec_c):
                        add(f"{VIOLATION_PREFIX}step7>", prob3)
                        continue
                    walk(nxt, eng.state, eng.rho, transcript + message, k2, prob3)
            else:
                walk(nxt, eng.state, rho, transcript + message, k2, prob2)

    full = tuple(range(p.input_size))
    walk(p.root, {"xset": full, "yset": full}, Restriction.all_free(p.n),
         "", Fraction(1), Fraction(1))
    return DistributionTable(outcomes)


def enumerate_randomized_protocol(rp: RandomizedProtocol, g: Gadget, z: int,
                                  params: LiftingParams,
                                  branch_limit: int = ENUM_BRANCH_LIMIT) -> DistributionTable:
    """Exact mixture of per-component enumerations."""
    mix: Dict[str, Fraction] = {}
    for w, proto in rp.components:
        dist = enumerate_output_distribution(proto, g, z, params, branch_limit)
        for key in dist.domain:
            mix[key] = mix.get(key, ZERO) + w * dist.mass[key]
    return DistributionTable(mix)


def reference_distribution(p: ProtocolTree, g: Gadget, z: int,
                           fiber_limit_bits: int = FIBER_LIMIT_BITS) -> DistributionTable:
    """Transcript distribution of the protocol on uniform preimages of z."""
    n, b = p.n, p.b
    if 2 * b * n > fiber_limit_bits:
        raise BudgetError("preimage enumeration input bits", 2 * b * n, fiber_limit_bits)
    size = p.input_size
    masses: Dict[str, int] = {}
    count = 0
    for x in range(size):
        for y in range(size):
            if compose_eval(g, x, y, n) == z:
                t, _, _ = run_protocol(p, x, y)
                masses[t] = masses.get(t, 0) + 1
                count += 1
    if count == 0:
        raise LiftsimError(f"z = {z:0{n}b} has no preimage under the composed map")
    return DistributionTable({t: Fraction(c, count) for t, c in masses.items()})


def certify_transcript(result: SimResult, p: ProtocolTree, g: Gadget, z: int):
    """Brute-force search for a preimage of z in the final rectangle that
    reproduces the simulated transcript; None reports a regime failure."""
    for x in result.xset:
        for y in result.yset:
            if compose_eval(g, x, y, p.n) != z:
                continue
            t, _, _ = run_protocol(p, x, y)
            if t == result.transcript:
                return x, y
    return None


def extract_parallel_tree(p: ProtocolTree, g: Gadget, params: LiftingParams) -> ParallelDecisionTree:
    """Materialize the full extracted tree by running every input z.

    The deterministic run depends on z only through the answers to its own
    queries, so runs merge into a well-formed parallel decision tree whose
    depth is the number of simulated rounds.
    """
    n = p.n
    cache = _DangerCache(g, params)
    runs = {}
    for z in range(1 << n):
        res = lift_deterministic(p, g, z, params, cache=cache)
        if res.status != "done":
            raise LiftsimError(
                f"run on z={z:0{n}b} ended with {res.status} ({res.violation}); "
                "cannot assemble a total tree")
        runs[z] = res

    def build_node(zs: List[int], round_idx: int):
        r0 = runs[zs[0]]
        if round_idx >= len(r0.queries):
            # inputs agreeing on every queried answer have identical runs
            for z in zs[1:]:
                if runs[z].output != r0.output or runs[z].transcript != r0.transcript:
                    raise LiftsimError("runs diverged without an answer split")
            return DLeaf(r0.output)
        coords = r0.queries[round_idx]
        for z in zs[1:]:
            if runs[z].queries[round_idx] != coords:
                raise LiftsimError("query sets diverged without an answer split")
        groups: Dict[int, List[int]] = {}
        for z in zs:
            idx = 0
            for i in coords:
                idx = (idx << 1) | ((z >> (n - 1 - i)) & 1)
            groups.setdefault(idx, []).append(z)
        children = tuple(
            build_node(groups[i], round_idx + 1) for i in range(1 << len(coords)))
        return DNode(coords, children)

    return ParallelDecisionTree(n, build_node(list(range(1 << n)), 0))


# -- deficiency ledger -----------------------------------------------------------

@dataclass
class RoundLedger:
    index: int
    checks: Dict[str, Optional[bool]]
    preconditions: Dict[str, bool]

    @property
    def ok(self) -> bool:
        return all(v is not False for v in self.checks.values())


@dataclass
class LedgerReport:
    rounds: List[RoundLedger]
    deficiency_nonnegative: bool

    @property
    def ok(self) -> bool:
        return self.deficiency_nonnegative and all(r.ok for r in self.rounds)


def _dval(snapshot, b: int) -> Fraction:
    free_count, mpx, mpy = snapshot
    return Fraction(4) ** (b * free_count) * mpx * mpy


def ledger_assertions(result: SimResult, params: LiftingParams) -> LedgerReport:
    """Recompute every deficiency delta from the trace and check the bounds.

    Deficiency is 2b|free| - H_inf(X_free) - H_inf(Y_free); it is carried in
    the cleared form 4^(b|free|) * maxp_x * maxp_y, so every clause is an
    exact rational comparison.  Conditional clauses are checked only when
    their recorded preconditions hold; failed preconditions are reported.
    """
    b = params.b
    delta = params.delta
    rounds_out: List[RoundLedger] = []
    nonneg = True
    for rec in result.rounds:
        snaps = rec.snapshots
        checks: Dict[str, Optional[bool]] = {}
        pre: Dict[str, bool] = {}
        for name in ("start", "after_discard", "after_message", "after_fix",
                     "after_query", "end"):
            if name in snaps and snaps[name] is not None:
                if _dval(snaps[name], b) < 1:
                    nonneg = False
        if "after_discard" in snaps and "start" in snaps:
            d0, d1 = _dval(snaps["start"], b), _dval(snaps["after_discard"], b)
            pre["discard_at_most_half"] = rec.discarded_mass * 2 <= 1
            checks["discard_increase_le_1_bit"] = (
                d1 <= 2 * d0 if pre["discard_at_most_half"] else None)
        if "after_message" in snaps and "after_discard" in snaps:
            d1, d2 = _dval(snaps["after_discard"], b), _dval(snaps["after_message"], b)
            if params.mode == "det":
                pre["kraft_heavy"] = bool(rec.flags.get("kraft_heavy"))
                checks["message_increase_le_len"] = (
                    d2 <= d1 * (1 << len(rec.message)) if pre["kraft_heavy"] else None)
            else:
                checks["message_increase_le_log"] = d2 * rec.p_message <= d1
            if "start" in snaps:
                d0 = _dval(snaps["start"], b)
                if pre.get("discard_at_most_half"):
                    checks["steps12_increase_le_log_plus_1"] = (
                        d2 * rec.p_message <= 2 * d0)
        if rec.query_coords and "after_message" in snaps and "end" in snaps:
            isize = len(rec.query_coords)
            d2 = _dval(snaps["after_message"], b)
            d5 = _dval(snaps["end"], b)
            pre["nonleaking_event"] = bool(rec.flags.get("nonleaking_event"))
            if "after_fix" in snaps:
                d3 = _dval(snaps["after_fix"], b)
                if params.mode == "det":
                    pre["heavy_value"] = bool(rec.flags.get("heavy_value", True))
                    checks["fix_increase_lt_delta_b_I"] = (
                        cmp_products(d3, (), d2, [(2, delta * b * isize)]) < 0
                        if pre["heavy_value"] else None)
                else:
                    checks["partition_increase_bound"] = (
                        cmp_products(d3 * rec.p_geq, (), d2, [(2, delta * b * isize)]) <= 0
                        if rec.p_geq is not None else None)
            if "after_query" in snaps and "after_fix" in snaps:
                d3 = _dval(snaps["after_fix"], b)
                d4 = _dval(snaps["after_query"], b)
                checks["query_decrease_ge_b_I"] = (
                    cmp_products(d4, [(2, Fraction(b * isize))], d3, ()) <= 0)
            if params.mode == "det":
                bound = (1 - delta - Fraction(2, b)) * b * isize
                applicable = pre.get("heavy_value", False) and pre["nonleaking_event"]
                checks["net_decrease_det"] = (
                    cmp_products(d5, [(2, bound)], d2, ()) <= 0 if applicable else None)
            else:
                pre["trunc_ok"] = (
                    rec.p_geq is not None and params.trunc_cmp(rec.p_geq) >= 0)
                # slack: 16nb * 2^(|I|+1) <= 2^((7/c)b|I| + (eta/8)b(|I|-1))
                slack_rhs = (Fraction(7, 1) / params.c) * b * isize \
                    + params.eta * b * (isize - 1) / 8
                pre["slack_ok"] = cmp_products(
                    Fraction(16 * params.n * b * (1 << (isize + 1))), (),
                    Fraction(1), [(2, slack_rhs)]) <= 0
                bound = (1 - delta - params.eta / 8 - 7 / params.c) * b * isize
                applicable = pre["trunc_ok"] and pre["nonleaking_event"] and pre["slack_ok"]
                checks["net_decrease_rand"] = (
                    cmp_products(d5, [(2, bound)], d2, ()) <= 0 if applicable else None)
                delta_alt = 1 - params.eta / 8 + params.eps / 2
                bound_alt = (1 - delta_alt - params.eta / 8 - 7 / params.c) * b * isize
                checks["net_decrease_rand_alt_delta_reading"] = (
                    cmp_products(d5, [(2, bound_alt)], d2, ()) <= 0 if applicable else None)
        rounds_out.append(RoundLedger(rec.index, checks, pre))
    return LedgerReport(rounds_out, nonneg)
