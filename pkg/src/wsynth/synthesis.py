"""End-to-end synthesis pipelines and the independent realizer verifier.

Threshold synthesis plays the critical prefix game on the domain-safe
specification (final states critical); best-value synthesis enumerates
output selectors over the domain-safe automaton (any best-value realizer
is such a subautomaton); approximate synthesis for Sum/Avg reduces to an
imperfect-information critical prefix energy game where Adam secretly
runs a rival run of the same automaton.

verify_realizer is deliberately independent of the synthesis route: it
checks domains by DFA equivalence and value conditions on synchronized
products, and every REALIZABLE result must pass it before being
returned.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import domain as domain_mod
from . import games, prefix
from .core import (
    AVG,
    DSUM,
    INPUT,
    NEG_INF,
    OUTPUT,
    SUM,
    MealyTransducer,
    WeightedSpec,
    best_value,
    evaluate,
    run_transducer,
    trim_transducer,
    word,
)
from .domain import NO_BOOLEAN_REALIZER, make_domain_safe
from .dsumpath import NO as PATH_NO
from .dsumpath import WeightedGraph, exists_path_leq, exists_path_lt
from .games import ADAM, EVE, Arena, ImperfectArena

REALIZABLE = "realizable"
UNREALIZABLE = "unrealizable"
UNKNOWN_AT_CAP = "unknown_at_cap"

PASS = "pass"
FAIL = "fail"

_GAME_SINK = "__sink__"
_COMPLETE_IN = "__absorb_in__"
_COMPLETE_OUT = "__absorb_out__"
_BOT = "__bot__"


@dataclass
class Objective:
    """What verify_realizer checks a transducer against."""

    kind: str  # boolean | threshold | best_value | approx
    cmp: Optional[str] = None  # threshold: > or >=   approx: < or <=
    bound: Optional[Fraction] = None  # threshold nu or approx r

    def __post_init__(self):
        if self.kind not in ("boolean", "threshold", "best_value", "approx"):
            raise ValueError("unknown objective kind %r" % self.kind)
        if self.kind == "threshold" and self.cmp not in (">", ">="):
            raise ValueError("threshold cmp must be '>' or '>='")
        if self.kind == "approx" and self.cmp not in ("<", "<="):
            raise ValueError("approx cmp must be '<' or '<='")
        if self.kind in ("threshold", "approx"):
            self.bound = Fraction(self.bound)


@dataclass
class SynthResult:
    status: str  # realizable | unrealizable | no_boolean_realizer | unknown_at_cap
    transducer: Optional[MealyTransducer] = None
    cap: Optional[int] = None


# ---------------------------------------------------------------------------
# Specification as a game arena


def spec_to_prefix_arena(spec: WeightedSpec):
    """Interpret the (domain-safe) spec as a critical prefix arena.

    Input states belong to Adam, output states to Eve, final states are
    critical; deadlocked states get a 0-weight exit to a fresh sink so
    plays never get stuck.  Returns (arena, provenance) where provenance
    maps edge indices back to (state, symbol) of the spec transition.
    """
    edges = []
    provenance = {}
    for (src, sym), (tgt, w) in spec.transitions.items():
        provenance[len(edges)] = (src, sym)
        edges.append((src, sym, w, tgt))
    vertices = list(spec.states)
    owner = {
        q: (ADAM if spec.polarity[q] == INPUT else EVE) for q in spec.states
    }
    have_out = {src for (src, _sym) in spec.transitions}
    dead = [q for q in spec.states if q not in have_out]
    if dead:
        vertices.append(_GAME_SINK)
        owner[_GAME_SINK] = ADAM
        for q in dead:
            provenance[len(edges)] = None
            edges.append((q, "-", 0, _GAME_SINK))
        provenance[len(edges)] = None
        edges.append((_GAME_SINK, "-", 0, _GAME_SINK))
    arena = Arena(
        vertices=tuple(vertices),
        owner=owner,
        initial=spec.initial,
        edges=edges,
        critical=frozenset(spec.finals),
    )
    return arena, provenance


def extract_transducer(spec: WeightedSpec, arena: Arena, provenance, strategy):
    """Mealy machine following Eve's positional strategy on the spec arena.

    State space: input states reachable under the strategy.  Domain
    equality with the spec holds by domain-safety (any followed run on a
    domain word ends in a final state).
    """
    transitions = {}
    reached = [spec.initial]
    seen = {spec.initial}
    while reached:
        p = reached.pop(0)
        for a in spec.inputs:
            entry = spec.transitions.get((p, a))
            if entry is None:
                continue
            mid = entry[0]
            if mid not in strategy.choice:
                raise ValueError(
                    "strategy undefined at reachable output state %r" % (mid,)
                )
            origin = provenance.get(strategy.choice[mid])
            if origin is None:
                raise ValueError("strategy escapes the specification at %r" % (mid,))
            _state, b = origin
            tgt = spec.transitions[(mid, b)][0]
            transitions[(p, a)] = (b, tgt)
            if tgt not in seen:
                seen.add(tgt)
                reached.append(tgt)
    return MealyTransducer(
        inputs=spec.inputs,
        outputs=spec.outputs,
        states=tuple(q for q in spec.states if q in seen),
        initial=spec.initial,
        finals=tuple(f for f in spec.finals if f in seen),
        transitions=transitions,
    )


# ---------------------------------------------------------------------------
# Independent verification


def _check_alphabets(spec, t):
    if not set(t.inputs) <= set(spec.inputs) or not set(t.outputs) <= set(
        spec.outputs
    ):
        raise ValueError("transducer and specification alphabets mismatch")


def _domain_equal_witness(spec, t):
    """None when dom(t) = dom(spec), else a separating input word."""
    start = (t.initial, domain_mod._closure(spec, [spec.initial]))
    seen = {start}
    queue = [(start, ())]
    while queue:
        (s, subset), path = queue.pop(0)
        t_accepts = s is not None and s in t.finals
        s_accepts = domain_mod._accepts(spec, subset)
        if t_accepts != s_accepts:
            return path
        for a in spec.inputs:
            entry = t.transitions.get((s, a)) if s is not None else None
            nxt_t = entry[1] if entry else None
            nxt_sub = domain_mod._dom_step(spec, subset, a)
            node = (nxt_t, nxt_sub)
            if node not in seen:
                seen.add(node)
                queue.append((node, path + (a,)))
    return None


def _boolean_witness(spec, t):
    """None when every accepted input's run accepts, else a witness word."""
    start = (t.initial, spec.initial)
    seen = {start}
    queue = [(start, ())]
    while queue:
        (s, p), path = queue.pop(0)
        if s in t.finals and (p is None or p not in spec.finals):
            return path
        for a in spec.inputs:
            entry = t.transitions.get((s, a))
            if entry is None:
                continue
            b, s2 = entry
            p2 = None
            if p is not None:
                mid = spec.transitions.get((p, a))
                if mid is not None:
                    out = spec.transitions.get((mid[0], b))
                    p2 = out[0] if out is not None else None
            node = (s2, p2)
            if node not in seen:
                seen.add(node)
                queue.append((node, path + (a,)))
    return None


def _min_walk_below(nodes, edges, source, accepting, threshold):
    """Is there a source-to-accepting walk of value < threshold?

    edges: list of (src, weight, dst, label).  Returns None or the labels
    of a violating walk; walks may repeat a negative cycle, in which case
    the witness pumps it just enough.
    """
    adjacency = {}
    for src, w, dst, label in edges:
        adjacency.setdefault(src, []).append((w, dst, label))
    dist = {source: 0}
    parent = {}
    for _ in range(max(1, len(nodes) - 1)):
        changed = False
        for src, w, dst, label in edges:
            if src not in dist:
                continue
            cand = dist[src] + w
            if dst not in dist or cand < dist[dst]:
                dist[dst] = cand
                parent[dst] = (src, label)
                changed = True
        if not changed:
            break
    improvable = {
        dst
        for src, w, dst, _label in edges
        if src in dist and dist[src] + w < dist[dst]
    }
    reaches_accepting = set(accepting)
    changed = True
    while changed:
        changed = False
        for src, _w, dst, _label in edges:
            if dst in reaches_accepting and src not in reaches_accepting:
                reaches_accepting.add(src)
                changed = True

    if improvable & reaches_accepting:
        return _pumped_min_walk(adjacency, edges, source, accepting, threshold, dist)

    best = None
    for node in accepting:
        if node in dist and (best is None or dist[node] < dist[best]):
            best = node
    if best is None or dist[best] >= threshold:
        return None
    # no negative cycle feeds an accepting node here, so the parent chain
    # from `best` is acyclic and ends at the source
    labels = []
    node = best
    steps = 0
    while node != source:
        src, label = parent[node]
        labels.append(label)
        node = src
        steps += 1
        assert steps <= len(nodes), "parent chain cycled unexpectedly"
    labels.reverse()
    return labels


def _pumped_min_walk(adjacency, edges, source, accepting, threshold, dist):
    """Witness through a negative cycle: stem + enough laps + tail."""

    def bfs_path(starts, goal_test):
        # unweighted search returning (end, labels, value)
        queue = [(s, [], 0) for s in starts]
        seen = set(starts)
        while queue:
            node, labels, value = queue.pop(0)
            if goal_test(node):
                return node, labels, value
            for w, dst, label in adjacency.get(node, ()):
                if dst not in seen:
                    seen.add(dst)
                    queue.append((dst, labels + [label], value + w))
        return None

    # locate a reachable negative cycle that reaches an accepting node
    reaches_accepting = set(accepting)
    changed = True
    while changed:
        changed = False
        for src, _w, dst, _label in edges:
            if dst in reaches_accepting and src not in reaches_accepting:
                reaches_accepting.add(src)
                changed = True

    best_cycle = None
    for entry in sorted(dist, key=repr):
        if entry not in reaches_accepting:
            continue
        # try to close a negative cycle at `entry` with <= |dist| edges
        found = _negative_cycle_at(adjacency, entry, len(dist))
        if found is not None:
            best_cycle = (entry, found)
            break
    assert best_cycle is not None, "negative cycle detection disagreed"
    entry, (cycle_labels, cycle_sum) = best_cycle

    stem = bfs_path([source], lambda n: n == entry)
    assert stem is not None
    _e, stem_labels, stem_value = stem
    tail = bfs_path([entry], lambda n: n in accepting)
    assert tail is not None
    _e, tail_labels, tail_value = tail

    base = stem_value + tail_value
    # smallest laps with base + laps*cycle_sum < threshold
    laps = 0
    if base >= threshold:
        need = base - threshold  # need laps*|cycle_sum| > need
        laps = need // (-cycle_sum) + 1
    return stem_labels + cycle_labels * laps + tail_labels


def _negative_cycle_at(adjacency, start, max_len):
    """A negative-sum cycle through start, or None; DFS over simple paths."""
    stack = [(start, [], 0, {start})]
    while stack:
        node, labels, value, seen = stack.pop()
        for w, dst, label in adjacency.get(node, ()):
            if dst == start:
                if value + w < 0:
                    return labels + [label], value + w
                continue
            if dst in seen or len(labels) + 1 >= max_len:
                continue
            stack.append((dst, labels + [label], value + w, seen | {dst}))
    return None


def _threshold_witness(spec, t, cmp, nu):
    """A domain word whose pair value violates S(u (x) f(u)) cmp nu, or None."""
    nu = Fraction(nu)
    if spec.measure == DSUM:
        return _threshold_witness_dsum(spec, t, cmp, nu)
    q_scale = nu.denominator
    nu_int = nu.numerator

    nodes = set()
    edges = []
    start = (t.initial, spec.initial)
    queue = [start]
    nodes.add(start)
    accepting = set()
    while queue:
        node = queue.pop(0)
        s, p = node
        if s in t.finals and p in spec.finals:
            accepting.add(node)
        for a in spec.inputs:
            entry = t.transitions.get((s, a))
            if entry is None:
                continue
            b, s2 = entry
            mid = spec.transitions.get((p, a))
            if mid is None:
                continue
            out = spec.transitions.get((mid[0], b))
            if out is None:
                continue
            p2 = out[0]
            if spec.measure == SUM:
                w = q_scale * (mid[1] + out[1])
            else:
                w = q_scale * (mid[1] + out[1]) - 2 * nu_int
            nxt = (s2, p2)
            edges.append((node, w, nxt, a))
            if nxt not in nodes:
                nodes.add(nxt)
                queue.append(nxt)
    if spec.measure == SUM:
        bound = nu_int if cmp == ">=" else nu_int + 1
    else:
        bound = 0 if cmp == ">=" else 1
    labels = _min_walk_below(nodes, edges, start, accepting, bound)
    if labels is None:
        return None
    return tuple(labels)


def _threshold_witness_dsum(spec, t, cmp, nu):
    nodes = set()
    edges = []
    start = ("in", t.initial, spec.initial)
    nodes.add(start)
    queue = [start]
    accepting = set()
    while queue:
        node = queue.pop(0)
        if node[0] == "in":
            _k, s, p = node
            if s in t.finals and p in spec.finals:
                accepting.add(node)
            for a in spec.inputs:
                entry = t.transitions.get((s, a))
                mid = spec.transitions.get((p, a))
                if entry is None or mid is None:
                    continue
                b, s2 = entry
                nxt = ("mid", s2, mid[0], b)
                edges.append((node, mid[1], nxt, a))
                if nxt not in nodes:
                    nodes.add(nxt)
                    queue.append(nxt)
        else:
            _k, s2, pm, b = node
            out = spec.transitions.get((pm, b))
            if out is None:
                continue
            nxt = ("in", s2, out[0])
            edges.append((node, out[1], nxt, None))
            if nxt not in nodes:
                nodes.add(nxt)
                queue.append(nxt)
    graph = WeightedGraph(
        vertices=tuple(sorted(nodes, key=repr)),
        edges=[(src, w, dst) for src, w, dst, _l in edges],
        source=start,
        targets=frozenset(accepting),
        discount=spec.discount,
    )
    labels = {
        (src, w, dst): label for src, w, dst, label in edges
    }
    checker = exists_path_leq if cmp == ">" else exists_path_lt
    answer, witness = checker(graph, nu)
    if answer == PATH_NO:
        return None
    symbols = []
    for i in witness.edges:
        src, w, dst = graph.edges[i]
        label = labels[(src, w, dst)]
        if label is not None:
            symbols.append(label)
    return tuple(symbols)


def _difference_witness(spec, t, cmp, bound):
    """A domain word where bestVal(u) - S(u (x) f(u)) violates cmp bound.

    Tracks the transducer run against an adversary run of the same
    automaton, synchronized on inputs; the adversary's outputs are
    unconstrained.  Sum/Avg use scaled integer min-walk searches, Dsum
    uses the exact discounted path checkers.
    """
    bound = Fraction(bound)
    if spec.measure == DSUM:
        return _difference_witness_dsum(spec, t, cmp, bound)
    q_scale = bound.denominator
    p_bound = bound.numerator

    start = (t.initial, spec.initial, spec.initial)
    nodes = {start}
    edges = []
    queue = [start]
    accepting = set()
    while queue:
        node = queue.pop(0)
        s, p, q = node
        if s in t.finals and p in spec.finals and q in spec.finals:
            accepting.add(node)
        for a in spec.inputs:
            entry = t.transitions.get((s, a))
            mid_main = spec.transitions.get((p, a))
            mid_adv = spec.transitions.get((q, a))
            if entry is None or mid_main is None or mid_adv is None:
                continue
            b, s2 = entry
            out_main = spec.transitions.get((mid_main[0], b))
            if out_main is None:
                continue
            p2 = out_main[0]
            main_w = mid_main[1] + out_main[1]
            for b_adv in spec.outputs:
                out_adv = spec.transitions.get((mid_adv[0], b_adv))
                if out_adv is None:
                    continue
                q2 = out_adv[0]
                adv_w = mid_adv[1] + out_adv[1]
                w = q_scale * (main_w - adv_w)
                if spec.measure == AVG:
                    w += 2 * p_bound
                nxt = (s2, p2, q2)
                edges.append((node, w, nxt, a))
                if nxt not in nodes:
                    nodes.add(nxt)
                    queue.append(nxt)
    if spec.measure == SUM:
        # value + p_bound must stay >= 0 (or >= 1 for strict)
        threshold = -p_bound if cmp == "<=" else -p_bound + 1
    else:
        threshold = 0 if cmp == "<=" else 1
    labels = _min_walk_below(nodes, edges, start, accepting, threshold)
    if labels is None:
        return None
    return tuple(labels)


def _difference_witness_dsum(spec, t, cmp, bound):
    start = ("in", t.initial, spec.initial, spec.initial)
    nodes = {start}
    edges = []
    queue = [start]
    accepting = set()
    while queue:
        node = queue.pop(0)
        if node[0] == "in":
            _k, s, p, q = node
            if s in t.finals and p in spec.finals and q in spec.finals:
                accepting.add(node)
            for a in spec.inputs:
                entry = t.transitions.get((s, a))
                mid_main = spec.transitions.get((p, a))
                mid_adv = spec.transitions.get((q, a))
                if entry is None or mid_main is None or mid_adv is None:
                    continue
                b, s2 = entry
                nxt = ("mid", s2, mid_main[0], mid_adv[0], b)
                edges.append((node, mid_main[1] - mid_adv[1], nxt, a))
                if nxt not in nodes:
                    nodes.add(nxt)
                    queue.append(nxt)
        else:
            _k, s2, pm, qm, b = node
            out_main = spec.transitions.get((pm, b))
            if out_main is None:
                continue
            for b_adv in spec.outputs:
                out_adv = spec.transitions.get((qm, b_adv))
                if out_adv is None:
                    continue
                nxt = ("in", s2, out_main[0], out_adv[0])
                edges.append((node, out_main[1] - out_adv[1], nxt, None))
                if nxt not in nodes:
                    nodes.add(nxt)
                    queue.append(nxt)
    graph = WeightedGraph(
        vertices=tuple(sorted(nodes, key=repr)),
        edges=[(src, w, dst) for src, w, dst, _l in edges],
        source=start,
        targets=frozenset(accepting),
        discount=spec.discount,
    )
    labels = {(src, w, dst): lbl for src, w, dst, lbl in edges}
    # difference graph carries main - adversary weights, so the pair value
    # difference bestVal - value equals -Dsum(path); violation of <= bound
    # means Dsum(path) < -bound (or <= for the strict objective)
    checker = exists_path_lt if cmp == "<=" else exists_path_leq
    answer, witness = checker(graph, -bound)
    if answer == PATH_NO:
        return None
    symbols = []
    for i in witness.edges:
        src, w, dst = graph.edges[i]
        lbl = labels[(src, w, dst)]
        if lbl is not None:
            symbols.append(lbl)
    return tuple(symbols)


def verify_realizer(spec: WeightedSpec, t: MealyTransducer, obj: Objective):
    """Independent check of a candidate realizer; (PASS, None) or (FAIL, word).

    Boolean: domain equality plus acceptance of every produced pair.
    Threshold: no domain word's pair value may fall at or below the line.
    Best-value / approximate: no adversary run may beat the produced run
    by more than the allowed slack (best-value is slack 0, non-strict).
    """
    _check_alphabets(spec, t)
    witness = _domain_equal_witness(spec, t)
    if witness is not None:
        return FAIL, tuple(witness)
    witness = _boolean_witness(spec, t)
    if witness is not None:
        return FAIL, tuple(witness)
    if obj.kind == "boolean":
        return PASS, None
    if obj.kind == "threshold":
        witness = _threshold_witness(spec, t, obj.cmp, obj.bound)
    elif obj.kind == "best_value":
        witness = _difference_witness(spec, t, "<=", Fraction(0))
    else:
        witness = _difference_witness(spec, t, obj.cmp, obj.bound)
    if witness is None:
        return PASS, None
    return FAIL, tuple(witness)


def check_difference(spec, t, u):
    """bestVal(u) - S(u (x) f(u)); NEG_INF handling mirrors the objective."""
    u = word(u)
    out = run_transducer(t, u)
    top = best_value(spec, u)
    if out is None:
        return None if top is NEG_INF else NEG_INF
    got = evaluate(spec, u, out)
    if top is NEG_INF and got is NEG_INF:
        return None
    if got is NEG_INF:
        return NEG_INF
    return top - got


# ---------------------------------------------------------------------------
# Threshold synthesis


def synth_threshold(spec: WeightedSpec, cmp: str, nu) -> SynthResult:
    nu = Fraction(nu)
    safe = make_domain_safe(spec)
    if safe is NO_BOOLEAN_REALIZER:
        return SynthResult(status=NO_BOOLEAN_REALIZER)
    arena, provenance = spec_to_prefix_arena(safe)
    obj = prefix.PrefixObjective(
        measure=spec.measure, cmp=cmp, nu=nu, discount=spec.discount
    )
    winner, strategy = prefix.solve_prefix_threshold(arena, obj)
    if winner == ADAM:
        return SynthResult(status=UNREALIZABLE)
    t = extract_transducer(safe, arena, provenance, strategy)
    verdict, witness = verify_realizer(
        spec, t, Objective(kind="threshold", cmp=cmp, bound=nu)
    )
    assert verdict == PASS, "synthesized transducer failed verification: %r" % (
        witness,
    )
    return SynthResult(status=REALIZABLE, transducer=t)


# ---------------------------------------------------------------------------
# Best-value synthesis


def _selector_transducer(spec: WeightedSpec, selector):
    """Transducer following one output transition per output state."""
    transitions = {}
    seen = {spec.initial}
    queue = [spec.initial]
    while queue:
        p = queue.pop(0)
        for a in spec.inputs:
            entry = spec.transitions.get((p, a))
            if entry is None:
                continue
            mid = entry[0]
            b = selector[mid]
            tgt = spec.transitions[(mid, b)][0]
            transitions[(p, a)] = (b, tgt)
            if tgt not in seen:
                seen.add(tgt)
                queue.append(tgt)
    return MealyTransducer(
        inputs=spec.inputs,
        outputs=spec.outputs,
        states=tuple(q for q in spec.states if q in seen),
        initial=spec.initial,
        finals=tuple(f for f in spec.finals if f in seen),
        transitions=transitions,
    )


def synth_best_value(spec: WeightedSpec) -> SynthResult:
    """Enumerate output selectors over the domain-safe automaton.

    Complete because a best-value realizer can be folded into a
    subautomaton of the specification, and Boolean realizers never leave
    the safety region that make_domain_safe keeps.
    """
    work = spec.with_measure(SUM) if spec.measure == AVG else spec
    safe = make_domain_safe(work)
    if safe is NO_BOOLEAN_REALIZER:
        return SynthResult(status=NO_BOOLEAN_REALIZER)
    out_states = [q for q in safe.states if safe.polarity[q] == OUTPUT]
    pools = []
    for q in out_states:
        choices = [sym for sym in safe.outputs if (q, sym) in safe.transitions]
        pools.append(choices)
    objective = Objective(kind="best_value")
    for combo in itertools.product(*pools):
        selector = dict(zip(out_states, combo))
        candidate = _selector_transducer(safe, selector)
        verdict, _witness = verify_realizer(spec, candidate, objective)
        if verdict == PASS:
            return SynthResult(status=REALIZABLE, transducer=candidate)
    return SynthResult(status=UNREALIZABLE)


# ---------------------------------------------------------------------------
# Approximate synthesis


def _complete_spec(spec: WeightedSpec) -> WeightedSpec:
    """Total transition function via fresh non-final absorbing states."""
    transitions = dict(spec.transitions)
    needs = False
    for q in spec.states:
        symbols = spec.inputs if spec.polarity[q] == INPUT else spec.outputs
        for sym in symbols:
            if (q, sym) not in transitions:
                needs = True
    if not needs:
        return spec
    states = tuple(spec.states) + (_COMPLETE_IN, _COMPLETE_OUT)
    polarity = dict(spec.polarity)
    polarity[_COMPLETE_IN] = INPUT
    polarity[_COMPLETE_OUT] = OUTPUT
    for q in states:
        symbols = spec.inputs if polarity[q] == INPUT else spec.outputs
        sink = _COMPLETE_OUT if polarity[q] == INPUT else _COMPLETE_IN
        for sym in symbols:
            transitions.setdefault((q, sym), (sink, 0))
    return WeightedSpec(
        inputs=spec.inputs,
        outputs=spec.outputs,
        states=states,
        initial=spec.initial,
        finals=spec.finals,
        transitions=transitions,
        measure=spec.measure,
        discount=spec.discount,
        polarity=polarity,
    )


def _trim_states(spec: WeightedSpec):
    reach = domain_mod.reachable_states(spec)
    co = set(spec.finals)
    changed = True
    while changed:
        changed = False
        for (src, _sym), (tgt, _w) in spec.transitions.items():
            if tgt in co and src not in co:
                co.add(src)
                changed = True
    return reach & co


_START_COPY = "__start__"


def build_approx_game(spec: WeightedSpec, measure: str, cmp: str, r):
    """Imperfect-information critical prefix energy game for approximate
    synthesis: Eve steers a run of the completed automaton while Adam
    secretly steers a rival run over the trimmed states, sharing inputs.

    Avg adds the (scaled) slack to every step's weight; Sum instead
    grants it as initial credit.  The strict variant charges one unit
    once, on the edges leaving a one-shot copy of the initial vertex.
    Returns (ImperfectArena, initial credit).
    """
    if measure not in (SUM, AVG):
        raise ValueError(
            "approximate synthesis supports sum and avg; dsum requires external "
            "determinization and is not offered"
        )
    r = Fraction(r)
    if r < 0:
        raise ValueError("approximation slack must be nonnegative")
    strict = cmp == "<"
    scale, slack = r.denominator, r.numerator

    full = _complete_spec(spec)
    trimmed = _trim_states(spec)

    def polarity(q):
        return full.polarity[q]

    def weight(q, sym):
        return full.transitions[(q, sym)][1]

    def step(q, sym):
        return full.transitions[(q, sym)][0]

    per_step = slack if measure == AVG else 0
    initial = (spec.initial, spec.initial)
    vertices = []
    edges = []
    obs = {}
    critical = set()
    seen = set()
    queue = []

    def note(v):
        if v not in seen:
            seen.add(v)
            vertices.append(v)
            queue.append(v)

    note(initial)
    note(_BOT)
    obs[_BOT] = _BOT
    critical.add(_BOT)
    edges.append((_BOT, "choose", -1, _BOT))
    while queue:
        v = queue.pop(0)
        if v == _BOT:
            continue
        if len(v) == 2:
            p, q = v
            obs[v] = ("i", p)
            if q in spec.finals:
                critical.add(v)
            for a in spec.inputs:
                q2 = step(q, a)
                if q2 not in trimmed:
                    continue
                p2 = step(p, a)
                nxt = (p2, q2, a)
                w = scale * (weight(p, a) - weight(q, a)) + per_step
                note(nxt)
                edges.append((v, "choose", w, nxt))
            if p not in spec.finals and q in spec.finals:
                edges.append((v, "choose", 0, _BOT))
            edges.append((v, "choose", 0, v))
        else:
            p, q, a = v
            obs[v] = ("o", p, a)
            for b in spec.outputs:
                p2 = step(p, b)
                for b_adv in spec.outputs:
                    q2 = step(q, b_adv)
                    if q2 not in trimmed:
                        continue
                    w = scale * (weight(p, b) - weight(q, b_adv)) + per_step
                    nxt = (p2, q2)
                    note(nxt)
                    edges.append((v, b, w, nxt))

    credit = 0 if measure == AVG else (slack if not strict else slack - 1)
    if strict and measure == AVG:
        copy = _START_COPY
        vertices.append(copy)
        obs[copy] = obs[initial]
        if initial in critical:
            critical.add(copy)
        for src, action, w, dst in list(edges):
            if src == initial:
                edges.append((copy, action, w - 1, dst))
        start = copy
    else:
        start = initial

    actions = ("choose",) + tuple(spec.outputs)
    arena = ImperfectArena(
        vertices=tuple(vertices),
        initial=start,
        actions=actions,
        obs=obs,
        edges=edges,
        critical=frozenset(critical),
    )
    return arena, credit


def _transducer_from_belief_strategy(spec, full, strategy):
    """Read the Mealy machine off a winning observation-based strategy.

    Beliefs sitting at input observations become machine states; input a
    leads through the observation (o, step(p,a), a), where the strategy
    names the output symbol, and on to the next input observation.
    """

    def input_state_of(belief):
        for vertex, _credit in sorted(belief, key=repr):
            if vertex == _START_COPY:
                return spec.initial
            if isinstance(vertex, tuple) and len(vertex) == 2:
                return vertex[0]
        raise AssertionError("belief %r is not at an input observation" % (belief,))

    b0 = strategy.initial
    states = {}
    order = []

    def name(belief):
        if belief not in states:
            states[belief] = "m%d" % len(states)
            order.append(belief)
        return states[belief]

    transitions = {}
    finals = []
    queue = [b0]
    seen = {b0}
    while queue:
        belief = queue.pop(0)
        src = name(belief)
        p = input_state_of(belief)
        if p in spec.finals:
            finals.append(src)
        for a in spec.inputs:
            p2 = full.transitions[(p, a)][0]
            mid = strategy.step.get((belief, ("o", p2, a)))
            if mid is None:
                continue
            b = strategy.act[mid]
            p3 = full.transitions[(p2, b)][0]
            nxt = strategy.step.get((mid, ("i", p3)))
            if nxt is None:
                continue
            transitions[(src, a)] = (b, name(nxt))
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return MealyTransducer(
        inputs=spec.inputs,
        outputs=spec.outputs,
        states=tuple(states[b] for b in order),
        initial=name(b0),
        finals=tuple(finals),
        transitions=transitions,
    )


def synth_approx(spec: WeightedSpec, measure: str, cmp: str, r, cap: int) -> SynthResult:
    """Approximate synthesis via the capped knowledge solver.

    WIN yields a verified transducer; NOT_WIN_AT_CAP is reported as
    UNKNOWN_AT_CAP since the cap never certifies unrealizability.
    """
    r = Fraction(r)
    if r < 0:
        raise ValueError("approximation slack must be nonnegative")
    if cap < 0:
        raise ValueError("cap must be nonnegative")
    if next(_domain_words_probe(spec), None) is None:
        t = MealyTransducer(
            inputs=spec.inputs,
            outputs=spec.outputs,
            states=(spec.initial,),
            initial=spec.initial,
            finals=(),
            transitions={},
        )
        return SynthResult(status=REALIZABLE, transducer=t)
    if cmp == "<" and r == 0:
        return SynthResult(status=UNREALIZABLE)

    iarena, credit = build_approx_game(spec, measure, cmp, r)
    outcome = prefix.reduce_prefix_energy_to_energy(iarena, credit)
    assert outcome is not prefix.HYPOTHESIS_FAILED, (
        "approx game always lets Adam finish a rival run"
    )
    reduced, buffered = outcome
    effective_cap = max(cap, buffered)
    status, strategy = games.solve_imperfect_energy_capped(
        reduced, buffered, effective_cap
    )
    if status != games.WIN:
        return SynthResult(status=UNKNOWN_AT_CAP, cap=cap)
    full = _complete_spec(spec)
    t = _transducer_from_belief_strategy(spec, full, strategy)
    t = trim_transducer(t)
    verdict, witness = verify_realizer(
        spec, t, Objective(kind="approx", cmp=cmp, bound=r)
    )
    assert verdict == PASS, "synthesized transducer failed verification: %r" % (
        witness,
    )
    return SynthResult(status=REALIZABLE, transducer=t)


def _domain_words_probe(spec):
    """Does the spec accept anything at all?  Yields at most one witness."""
    subset = domain_mod._closure(spec, [spec.initial])
    seen = {subset}
    queue = [subset]
    while queue:
        current = queue.pop(0)
        if domain_mod._accepts(spec, current):
            yield current
            return
        for a in spec.inputs:
            nxt = domain_mod._dom_step(spec, current, a)
            if nxt and nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)


# ---------------------------------------------------------------------------
# Church totalization


def totalize_for_church(t: MealyTransducer, o0) -> MealyTransducer:
    """Make the machine total: missing inputs head to a fresh sink that
    emits o0 forever.  Finality is untouched, so the recognized partial
    function is unchanged; the total machine is the per-step strategy a
    Church-style synthesizer needs."""
    if o0 not in t.outputs:
        raise ValueError("default output %r not in the output alphabet" % (o0,))
    sink = "__church_sink__"
    while sink in t.states:
        sink += "_"
    transitions = dict(t.transitions)
    for q in tuple(t.states) + (sink,):
        for a in t.inputs:
            transitions.setdefault((q, a), (o0, sink))
    return MealyTransducer(
        inputs=t.inputs,
        outputs=t.outputs,
        states=tuple(t.states) + (sink,),
        initial=t.initial,
        finals=t.finals,
        transitions=transitions,
    )


# ---------------------------------------------------------------------------
# Mean-payoff hardness generator


def gen_spec_from_mp_game(arena: Arena):
    """Sum specification whose threshold->=0 synthesis answer equals the
    mean-payoff winner of the arena.

    Adam vertices read inputs, Eve vertices read outputs; a fresh prefix
    charges N (the sum of all absolute weights) so no honest play can
    dip below zero without an actual negative cycle, and a stop input
    lets Adam cash the current sum at the unique final state.
    """
    if arena.deadlocks():
        raise ValueError("mean-payoff generator needs a deadlock-free arena")

    # force strict Adam/Eve alternation with relay vertices
    vertices = []
    owner = {}
    edges = []
    for v in arena.vertices:
        vertices.append(v)
        owner[v] = arena.owner[v]
    relay_count = 0
    for src, _a, w, dst in arena.edges:
        if arena.owner[src] != arena.owner[dst]:
            edges.append((src, w, dst))
        else:
            relay = ("relay", relay_count)
            relay_count += 1
            vertices.append(relay)
            owner[relay] = EVE if arena.owner[src] == ADAM else ADAM
            edges.append((src, w, relay))
            edges.append((relay, 0, dst))
    initial = arena.initial
    if owner[initial] == EVE:
        pre = ("relay", relay_count)
        relay_count += 1
        vertices.append(pre)
        owner[pre] = ADAM
        edges.append((pre, 0, initial))
        initial = pre

    out_of = {v: [] for v in vertices}
    for src, w, dst in edges:
        out_of[src].append((w, dst))
    m = max(len(out_of[v]) for v in vertices if owner[v] == ADAM)
    eve_degrees = [len(out_of[v]) for v in vertices if owner[v] == EVE]
    n = max(eve_degrees) if eve_degrees else 1
    big = sum(abs(w) for _s, w, _d in edges)

    inputs = tuple("a%d" % i for i in range(1, m + 1)) + ("stop",)
    outputs = tuple("b%d" % i for i in range(1, n + 1))

    def state(v):
        # relays are tuples and get their own prefix, so they can never
        # collide with a g_-prefixed original vertex name
        return "rel%d" % v[1] if isinstance(v, tuple) else "g_%s" % (v,)

    transitions = {}
    states = ["start", "boot"]
    transitions[("start", "a1")] = ("boot", 0)
    transitions[("boot", "b1")] = (state(initial), big)
    for v in vertices:
        states.append(state(v))
        symbols = inputs if owner[v] == ADAM else outputs
        listed = out_of[v]
        for j, (w, dst) in enumerate(listed):
            transitions[(state(v), symbols[j])] = (state(dst), w)
        if owner[v] == ADAM:
            for j in range(len(listed), m):
                w, dst = listed[0]
                transitions[(state(v), symbols[j])] = (state(dst), w)
            transitions[(state(v), "stop")] = ("halt", 0)
    states.extend(["halt", "end"])
    transitions[("halt", "b1")] = ("end", 0)

    spec = WeightedSpec(
        inputs=inputs,
        outputs=outputs,
        states=tuple(states),
        initial="start",
        finals=("end",),
        transitions=transitions,
        measure=SUM,
    )
    return spec, (SUM, ">=", Fraction(0))
