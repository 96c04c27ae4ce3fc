"""Critical prefix threshold games and their reductions.

A critical prefix game checks a quantitative condition only at prefixes
ending in a critical vertex.  Sum and Avg thresholds reduce to
mean-payoff (subtract the threshold, add cash-in edges from critical
vertices back to the initial vertex); a non-strict Dsum threshold
reduces to a discounted-sum game with stop gadgets (Adam may freeze the
value whenever a check falls due); a strict Dsum threshold admits no
such reduction and is solved by enumerating Eve's positional strategies
and path-checking each one, which is complete because positional
strategies suffice.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import games
from .core import AVG, DSUM, SUM
from .dsumpath import NO, WeightedGraph, exists_path_leq, exists_path_lt
from .games import ADAM, EVE, Arena, ImperfectArena, PositionalStrategy

EVE_WINS_TRIVIALLY = "eve_wins_trivially"
ADAM_WINS_IMMEDIATELY = "adam_wins_immediately"
HYPOTHESIS_FAILED = "hypothesis_failed"

_SINK = "__sink__"


@dataclass
class PrefixObjective:
    """Threshold objective checked at every critical prefix."""

    measure: str
    cmp: str  # ">" or ">="
    nu: Fraction
    discount: Optional[Fraction] = None

    def __post_init__(self):
        if self.measure not in (SUM, AVG, DSUM):
            raise ValueError("unknown measure %r" % self.measure)
        if self.cmp not in (">", ">="):
            raise ValueError("cmp must be '>' or '>='")
        self.nu = Fraction(self.nu)
        if self.measure == DSUM:
            if self.discount is None or not (0 < Fraction(self.discount) < 1):
                raise ValueError("dsum needs a discount strictly between 0 and 1")
            self.discount = Fraction(self.discount)
        elif self.discount is not None:
            raise ValueError("discount only makes sense for dsum")


def avoid_critical_strategy(arena: Arena):
    """Eve's positional choices that keep the play outside Adam's forcing set."""
    forcing, _ = games.attractor(arena, arena.critical, ADAM)
    choice = {}
    for v in arena.vertices:
        if arena.owner[v] != EVE or v in forcing:
            continue
        for i in arena.out(v):
            if arena.edges[i][3] not in forcing:
                choice[v] = i
                break
    return forcing, PositionalStrategy(choice)


def reduce_avg_to_sum(arena: Arena, nu: Fraction):
    """Same arena with weights q*w - p for nu = p/q; objective becomes Sum cmp 0."""
    nu = Fraction(nu)
    p, q = nu.numerator, nu.denominator
    edges = [(src, a, q * w - p, dst) for src, a, w, dst in arena.edges]
    reduced = Arena(
        vertices=arena.vertices,
        owner=dict(arena.owner),
        initial=arena.initial,
        edges=edges,
        critical=arena.critical,
        obs=dict(arena.obs),
    )
    return reduced, Fraction(0)


@dataclass
class MeanPayoffReduction:
    arena: Arena
    edge_origin: dict  # reduced edge index -> original edge index or None
    copies: dict  # original Eve-critical vertex -> copy vertex name


def reduce_sum_prefix_to_mp(arena: Arena, cmp: str, nu: int):
    """Critical prefix Sum game to a mean-payoff >= 0 game.

    nu must already be an integer (callers scale rational thresholds into
    the weights); a strict comparison is first lowered to >= nu+1.
    Vertices from which Adam cannot force a critical visit are replaced
    by an absorbing zero vertex (no check is ever due there), critical
    vertices gain a cash-in edge of weight -nu back to the initial
    vertex, and Eve-owned critical vertices are split so that Adam owns
    the moment of the check.
    """
    if cmp == ">":
        nu = nu + 1
    forcing, _ = games.attractor(arena, arena.critical, ADAM)
    if arena.initial not in forcing:
        return EVE_WINS_TRIVIALLY

    vertices = []
    owner = {}
    copies = {}
    for v in arena.vertices:
        if v not in forcing:
            continue
        if v in arena.critical and arena.owner[v] == EVE:
            copy = ("copy", v)
            copies[v] = copy
            vertices.extend([v, copy])
            owner[v] = ADAM
            owner[copy] = EVE
        else:
            vertices.append(v)
            owner[v] = arena.owner[v]
    vertices.append(_SINK)
    owner[_SINK] = EVE

    edges = []
    edge_origin = {}

    def add(src, w, dst, origin):
        edge_origin[len(edges)] = origin
        edges.append((src, "-", w, dst))

    for i, (src, _a, w, dst) in enumerate(arena.edges):
        if src not in forcing:
            continue
        reduced_src = copies.get(src, src)
        reduced_dst = dst if dst in forcing else _SINK
        add(reduced_src, w, reduced_dst, i)
    for v in arena.vertices:
        if v not in forcing or v not in arena.critical:
            continue
        if v in copies:
            add(v, 0, copies[v], None)
        add(v, -nu, arena.initial, None)
    add(_SINK, 0, _SINK, None)

    reduced = Arena(
        vertices=tuple(vertices),
        owner=owner,
        initial=arena.initial,
        edges=edges,
        critical=frozenset(),
    )
    return MeanPayoffReduction(arena=reduced, edge_origin=edge_origin, copies=copies)


@dataclass
class DsumReduction:
    arena: Arena


def reduce_dsum_prefix_to_ds(arena: Arena, nu: Fraction, lam: Fraction):
    """Critical prefix Dsum >= nu game to a plain discounted-sum game.

    Only for the non-strict comparison: the strict case has no such
    reduction (waiting drives the value to the threshold from above
    without ever attaining it).  Adam gets the option to stop the game
    exactly when a check falls due, freezing the current value in a
    zero sink; gadget vertices keep path lengths unchanged so discounts
    line up.  The check on the empty prefix (initial vertex critical) is
    decided directly.
    """
    nu = Fraction(nu)
    lam = Fraction(lam)
    if arena.initial in arena.critical and not (0 >= nu):
        return ADAM_WINS_IMMEDIATELY
    forcing, _ = games.attractor(arena, arena.critical, ADAM)
    if arena.initial not in forcing:
        return EVE_WINS_TRIVIALLY

    def eve_critical(v):
        return v in arena.critical and arena.owner[v] == EVE

    vertices = []
    owner = {}
    for v in arena.vertices:
        if v not in forcing:
            continue
        vertices.append(v)
        owner[v] = arena.owner[v]
        if eve_critical(v):
            for i in arena.out(v):
                pick = ("pick", v, i)
                vertices.append(pick)
                owner[pick] = ADAM
    vertices.append(_SINK)
    owner[_SINK] = ADAM

    edges = []

    def land(src, w, dst):
        """Materialize a move; entering an Eve-critical vertex installs
        Adam's stop option (for Adam-side sources) or commits Eve's next
        pick one step early (for Eve-side sources)."""
        if dst not in forcing:
            # leaving the forcing region ends all future checks: worthless
            # for Adam (drop his option), winning for Eve provided the
            # checks so far passed, which is exactly the value frozen in
            # the sink (only Eve-owned critical vertices can still have
            # such edges)
            if owner[src] == EVE:
                edges.append((src, "-", 0, _SINK))
            return
        if eve_critical(dst):
            if owner[src] == EVE:
                for i in arena.out(dst):
                    edges.append((src, "-", w, ("pick", dst, i)))
            else:
                edges.append((src, "-", w, dst))
                edges.append((src, "-", w, _SINK))
        else:
            edges.append((src, "-", w, dst))

    for v in arena.vertices:
        if v not in forcing:
            continue
        for i in arena.out(v):
            _s, _a, w, dst = arena.edges[i]
            land(v, w, dst)
            if eve_critical(v):
                pick = ("pick", v, i)
                edges.append((pick, "-", 0, _SINK))
                land(pick, w, dst)
        if v in arena.critical and arena.owner[v] == ADAM:
            edges.append((v, "-", 0, _SINK))
    edges.append((_SINK, "-", 0, _SINK))

    # only critical vertices can lose their moves to the pruning; freezing
    # the value there is exactly their pending check
    have_out = {src for src, _a, _w, _d in edges}
    for v in vertices:
        if v not in have_out:
            edges.append((v, "-", 0, _SINK))

    reduced = Arena(
        vertices=tuple(vertices),
        owner=owner,
        initial=arena.initial,
        edges=edges,
        critical=frozenset(),
    )
    return DsumReduction(arena=reduced)


def restrict_to_strategy(arena: Arena, strategy: PositionalStrategy):
    """Weighted graph of the plays allowed by Eve's positional strategy."""
    reachable = {arena.initial}
    queue = [arena.initial]
    edges = []
    while queue:
        v = queue.pop(0)
        if arena.owner[v] == EVE:
            if v not in strategy.choice:
                raise ValueError("strategy undefined at reachable vertex %r" % (v,))
            indices = [strategy.choice[v]]
        else:
            indices = arena.out(v)
        for i in indices:
            _s, _a, w, dst = arena.edges[i]
            edges.append((v, w, dst))
            if dst not in reachable:
                reachable.add(dst)
                queue.append(dst)
    return reachable, edges


def check_positional_dsum(arena: Arena, strategy: PositionalStrategy, obj: PrefixObjective):
    """Does Eve's positional strategy win the Dsum prefix game?

    The strategy loses iff Adam can trace a path to a critical vertex
    whose value fails the threshold: Dsum <= nu for the strict game,
    Dsum < nu for the non-strict one.  Returns (True, None) or
    (False, violating PathWitness).
    """
    if obj.measure != DSUM:
        raise ValueError("path checking applies to dsum objectives")
    reachable, edges = restrict_to_strategy(arena, strategy)
    targets = frozenset(v for v in arena.critical if v in reachable)
    if not targets:
        return True, None
    graph = WeightedGraph(
        vertices=tuple(sorted(reachable, key=repr)),
        edges=edges,
        source=arena.initial,
        targets=targets,
        discount=obj.discount,
    )
    checker = exists_path_leq if obj.cmp == ">" else exists_path_lt
    answer, witness = checker(graph, obj.nu)
    if answer == NO:
        return True, None
    return False, witness


def enumerate_positional(arena: Arena):
    """Eve's positional strategies, vertices by arena order, edges by file order."""
    eve_vertices = [v for v in arena.vertices if arena.owner[v] == EVE]
    pools = [arena.out(v) for v in eve_vertices]
    if any(not pool for pool in pools):
        return
    for combo in itertools.product(*pools):
        yield PositionalStrategy(dict(zip(eve_vertices, combo)))


def _scale_sum_objective(arena: Arena, nu: Fraction):
    """Integer weights and threshold: multiply weights by denominator(nu)."""
    nu = Fraction(nu)
    q = nu.denominator
    if q == 1:
        return arena, nu.numerator
    edges = [(src, a, q * w, dst) for src, a, w, dst in arena.edges]
    scaled = Arena(
        vertices=arena.vertices,
        owner=dict(arena.owner),
        initial=arena.initial,
        edges=edges,
        critical=arena.critical,
        obs=dict(arena.obs),
    )
    return scaled, nu.numerator


def solve_prefix_threshold(arena: Arena, obj: PrefixObjective):
    """Winner of the critical prefix threshold game, with Eve's positional
    strategy (on the given arena) whenever she wins."""
    if arena.deadlocks():
        raise ValueError("prefix games need a deadlock-free arena")

    if obj.measure == AVG:
        reduced, nu0 = reduce_avg_to_sum(arena, obj.nu)
        winner, strategy = _solve_sum(reduced, obj.cmp, nu0)
        return winner, strategy
    if obj.measure == SUM:
        return _solve_sum(arena, obj.cmp, obj.nu)
    if obj.cmp == ">=":
        reduction = reduce_dsum_prefix_to_ds(arena, obj.nu, obj.discount)
        if reduction is ADAM_WINS_IMMEDIATELY:
            return ADAM, None
        if reduction is EVE_WINS_TRIVIALLY:
            _f, strategy = avoid_critical_strategy(arena)
            return EVE, strategy
        winner, _s, _value = games.solve_discounted_sum(
            reduction.arena, obj.discount, obj.nu, ">="
        )
        if winner == ADAM:
            return ADAM, None
        strategy = _find_positional_dsum(arena, obj)
        assert strategy is not None, "positional sufficiency violated"
        return EVE, strategy
    strategy = _find_positional_dsum(arena, obj)
    if strategy is None:
        return ADAM, None
    return EVE, strategy


def _find_positional_dsum(arena: Arena, obj: PrefixObjective):
    if arena.initial in arena.critical:
        empty_ok = Fraction(0) > obj.nu if obj.cmp == ">" else Fraction(0) >= obj.nu
        if not empty_ok:
            return None
    for strategy in enumerate_positional(arena):
        winning, _witness = check_positional_dsum(arena, strategy, obj)
        if winning:
            return strategy
    return None


def _solve_sum(arena: Arena, cmp: str, nu: Fraction):
    scaled, nu_int = _scale_sum_objective(arena, nu)
    reduction = reduce_sum_prefix_to_mp(scaled, cmp, nu_int)
    if reduction is EVE_WINS_TRIVIALLY:
        _f, strategy = avoid_critical_strategy(arena)
        return EVE, strategy
    winner, mp_strategy = games.solve_mean_payoff(reduction.arena)
    if winner == ADAM:
        return ADAM, None

    forcing, avoid = avoid_critical_strategy(arena)
    choice = dict(avoid.choice)
    back = {copy: v for v, copy in reduction.copies.items()}
    for vertex, edge_idx in mp_strategy.choice.items():
        original_vertex = back.get(vertex, vertex)
        if arena.owner.get(original_vertex) != EVE:
            continue
        origin = reduction.edge_origin.get(edge_idx)
        if origin is not None:
            choice[original_vertex] = origin
    return EVE, PositionalStrategy(choice)


# ---------------------------------------------------------------------------
# Critical prefix energy games with imperfect information


def _force_critical_everywhere(iarena: ImperfectArena):
    """Adam's reachability attractor to the critical set, action-model rules.

    Returns vertex -> rank (distance-like level), or None when some vertex
    escapes (Eve can avoid criticality there, hypothesis fails).
    """
    rank = {v: 0 for v in iarena.critical}
    changed = True
    while changed:
        changed = False
        for v in iarena.vertices:
            if v in rank:
                continue
            available = iarena.available(v)
            if not available:
                continue
            worst = 0
            ok = True
            for a in available:
                levels = [rank[dst] for _w, dst in iarena.moves(v, a) if dst in rank]
                if not levels:
                    ok = False
                    break
                worst = max(worst, min(levels) + 1)
            if ok:
                rank[v] = worst
                changed = True
    if len(rank) < len(iarena.vertices):
        return None
    return rank


def _forcing_rise_bound(iarena: ImperfectArena, rank):
    """Max energy rise Eve can extract while Adam forces a critical visit.

    h(v) = max over Eve's actions of the min over Adam's rank-decreasing
    resolutions of max(0, w + h(target)); the nesting computes the maximal
    prefix sum along the forcing play.
    """
    order = sorted(iarena.vertices, key=lambda v: (rank[v], repr(v)))
    h = {}
    for v in order:
        if v in iarena.critical:
            h[v] = 0
            continue
        worst = 0
        for a in iarena.available(v):
            best = None
            for w, dst in iarena.moves(v, a):
                if rank[dst] >= rank[v]:
                    continue
                rise = w + h[dst]
                if rise < 0:
                    rise = 0
                if best is None or rise < best:
                    best = rise
            assert best is not None, "rank-decreasing move must exist"
            worst = max(worst, best)
        h[v] = worst
    return max(h.values(), default=0)


_ENERGY_SINK = "__drain__"


def reduce_prefix_energy_to_energy(iarena: ImperfectArena, c0: int):
    """Critical prefix energy game to a plain energy game, plus credit buffer.

    Requires that Adam can force a critical visit from every vertex (checked
    in the perfect-information game, which suffices against observation-based
    strategies).  Every critical vertex gets, for each action, a -B escape to
    a fresh sink: dropping below -B anywhere lets Adam convert the deficit
    into a failed check, so level >= 0 with credit c0 + B in the result is
    equivalent to the prefix objective with credit c0.
    """
    rank = _force_critical_everywhere(iarena)
    if rank is None:
        return HYPOTHESIS_FAILED
    bound = _forcing_rise_bound(iarena, rank)
    wmax = max((abs(w) for _s, _a, w, _d in iarena.edges), default=0)
    assert bound <= len(iarena.vertices) * wmax

    vertices = tuple(iarena.vertices) + (_ENERGY_SINK,)
    edges = list(iarena.edges)
    for v in iarena.critical:
        # only enabled actions: an escape edge on a disabled action would
        # hand Eve a brand-new move to hide in the sink
        for a in iarena.available(v):
            edges.append((v, a, -bound, _ENERGY_SINK))
    for a in iarena.actions:
        edges.append((_ENERGY_SINK, a, 0, _ENERGY_SINK))
    obs = dict(iarena.obs)
    obs[_ENERGY_SINK] = _ENERGY_SINK
    reduced = ImperfectArena(
        vertices=vertices,
        initial=iarena.initial,
        actions=iarena.actions,
        edges=edges,
        obs=obs,
        critical=frozenset(),
    )
    return reduced, c0 + bound
