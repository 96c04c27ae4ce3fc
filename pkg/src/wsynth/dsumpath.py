"""Discounted-sum path thresholds on weighted graphs, with witnesses.

A path's relative gap rg(pi) = (nu - Dsum(pi)) / lambda^|pi| is the
normalized budget a continuation has left: Dsum(pi) <= nu iff rg(pi) >= 0,
extending by an edge of weight j maps rg to rg/lambda - j, and appending
pi2 gives rg(pi1 pi2) = (rg(pi1) - Dsum(pi2)) / lambda^|pi2|.

The decision procedures iterate the maximal-relative-gap table
mrg_i(v) = best rg over paths of length <= i from the source to v for
n = |V| rounds.  No path with Dsum <= nu exists iff every target's
mrg_n is negative and round n is already a fixpoint; a non-fixpoint
vertex yields a pumpable loop whose relative gap grows without bound.
Every YES answer ships a concrete path, re-validated by exact
evaluation before being returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

NO = "no"
YES = "yes"


@dataclass
class WeightedGraph:
    """Directed integer-weighted graph with a source, targets, and discount."""

    vertices: tuple
    edges: list  # (src, weight, dst)
    source: object
    targets: frozenset
    discount: Fraction

    def __post_init__(self):
        self.discount = Fraction(self.discount)
        if not (0 < self.discount < 1):
            raise ValueError("discount must lie strictly between 0 and 1")
        known = set(self.vertices)
        if self.source not in known:
            raise ValueError("unknown source vertex")
        for src, _w, dst in self.edges:
            if src not in known or dst not in known:
                raise ValueError("edge endpoints must be vertices")


@dataclass
class PathWitness:
    """A concrete source-to-target path: vertices plus its exact Dsum."""

    vertices: list
    edges: list  # edge indices into the originating graph
    value: Fraction


def dsum_of_edges(graph: WeightedGraph, edge_indices):
    lam = graph.discount
    acc = Fraction(0)
    power = Fraction(1)
    for i in edge_indices:
        power *= lam
        acc += power * graph.edges[i][1]
    return acc


def relative_gap(dsum_value, length, nu, lam) -> Fraction:
    """(nu - dsum) / lam^length, exactly."""
    lam = Fraction(lam)
    if not (0 < lam < 1):
        raise ValueError("discount must lie strictly between 0 and 1")
    return (Fraction(nu) - Fraction(dsum_value)) / lam**length


def _prune_to_targets(graph: WeightedGraph):
    """Keep only vertices that can reach a target; returns (vertices, edges)."""
    can = set(graph.targets) & set(graph.vertices)
    changed = True
    while changed:
        changed = False
        for src, _w, dst in graph.edges:
            if dst in can and src not in can:
                can.add(src)
                changed = True
    edges = [
        (i, src, w, dst)
        for i, (src, w, dst) in enumerate(graph.edges)
        if src in can and dst in can
    ]
    vertices = [v for v in graph.vertices if v in can]
    return vertices, edges


@dataclass
class MrgTable:
    """Per-round maximal relative gaps with backtracking pointers.

    rows[i][v] is mrg_i(v); vertices absent from a row sit at -infinity.
    parent[(i, v)] explains the value: either ("stay",) or
    ("edge", edge_index, predecessor).
    """

    rounds: int
    rows: list
    parent: dict = field(default_factory=dict)


def compute_mrg(graph: WeightedGraph, nu: Fraction):
    """Tables over the pruned graph; None when the source cannot reach T."""
    vertices, edges = _prune_to_targets(graph)
    if graph.source not in set(vertices):
        return None, vertices, edges
    lam = graph.discount
    nu = Fraction(nu)
    rows = [{graph.source: nu}]
    parent = {(0, graph.source): ("stay",)}
    n = len(vertices)
    for i in range(1, n + 1):
        prev = rows[-1]
        row = dict(prev)
        for key in row:
            parent.setdefault((i, key), ("stay",))
        for idx, src, w, dst in edges:
            if src not in prev:
                continue
            cand = prev[src] / lam - w
            if dst not in row or cand > row[dst]:
                row[dst] = cand
                parent[(i, dst)] = ("edge", idx, src)
        rows.append(row)
    return MrgTable(rounds=n, rows=rows, parent=parent), vertices, edges


def _backtrack(graph: WeightedGraph, table: MrgTable, round_i, vertex):
    """Path from the source achieving rows[round_i][vertex]."""
    path_edges = []
    i, v = round_i, vertex
    while True:
        entry = table.parent[(i, v)]
        if entry[0] == "stay":
            if i == 0:
                break
            i -= 1
            continue
        _tag, edge_idx, pred = entry
        path_edges.append(edge_idx)
        i -= 1
        v = pred
    path_edges.reverse()
    vertices = [graph.source]
    for idx in path_edges:
        vertices.append(graph.edges[idx][2])
    return vertices, path_edges


def _witness(graph, edge_indices):
    vertices = [graph.source]
    for idx in edge_indices:
        vertices.append(graph.edges[idx][2])
    return PathWitness(
        vertices=vertices, edges=list(edge_indices), value=dsum_of_edges(graph, edge_indices)
    )


def _pumped_witness(graph: WeightedGraph, table: MrgTable, nu, strict, edges):
    """Build pi1 pi2^l pi4 from a vertex still rising at round n.

    The length-n path achieving the raised value must repeat a vertex;
    the repeated loop raises the relative gap by z > 0 per pump, so some
    pump count l makes the gap at the loop head at least (strictly above,
    for the strict variant) the Dsum of a fixed tail into the targets.
    """
    lam = graph.discount
    n = table.rounds
    rising = [
        v
        for v in table.rows[n]
        if v not in table.rows[n - 1] or table.rows[n][v] > table.rows[n - 1][v]
    ]
    # prefer a deterministic pick
    v_star = sorted(rising, key=repr)[0]
    vertices, path_edges = _backtrack(graph, table, n, v_star)
    assert len(path_edges) == n, "a freshly raised value needs a full-length path"
    first_seen = {}
    split = None
    for pos, v in enumerate(vertices):
        if v in first_seen:
            split = (first_seen[v], pos)
            break
        first_seen[v] = pos
    assert split is not None, "length-n path must repeat a vertex"
    j, k = split
    stem = path_edges[:j]
    loop = path_edges[j:k]
    head = vertices[j]

    rg_stem = relative_gap(dsum_of_edges(graph, stem), len(stem), nu, lam)
    rg_loop = relative_gap(dsum_of_edges(graph, stem + loop), len(stem) + len(loop), nu, lam)
    z = rg_loop - rg_stem
    assert z > 0, "loop removal would contradict the shortest raised path"

    # shortest tail from the loop head into the targets (BFS over edges)
    tail = {head: []}
    queue = [head]
    goal = None
    while queue:
        u = queue.pop(0)
        if u in graph.targets:
            goal = u
            break
        for idx, src, w, dst in edges:
            if src == u and dst not in tail:
                tail[dst] = tail[u] + [idx]
                queue.append(dst)
    assert goal is not None, "pruned graph always reaches a target"
    tail_edges = tail[goal]
    tail_value = dsum_of_edges(graph, tail_edges)

    # l * z + rg(stem) >= Dsum(tail)   (strictly above, when strict)
    need = (tail_value - rg_stem) / z
    pumps = max(1, -(-need.numerator // need.denominator))  # ceil
    if strict:
        while pumps * z + rg_stem <= tail_value:
            pumps += 1
    return _witness(graph, stem + loop * pumps + tail_edges)


def exists_path_leq(graph: WeightedGraph, nu) -> tuple:
    """Is there a path from the source to a target with Dsum <= nu?

    Returns (NO, None) or (YES, PathWitness); witnesses are validated
    against the claimed comparison before being returned.
    """
    return _exists_path(graph, nu, strict=False)


def exists_path_lt(graph: WeightedGraph, nu) -> tuple:
    """Strict variant: a path with Dsum < nu.

    At a fixpoint the table holds the attained maximum relative gap, so a
    strict witness exists iff some target gap is strictly positive; away
    from the fixpoint pumping yields strict witnesses.
    """
    return _exists_path(graph, nu, strict=True)


def _exists_path(graph: WeightedGraph, nu, strict):
    nu = Fraction(nu)
    table, vertices, edges = compute_mrg(graph, nu)
    if table is None:
        return NO, None
    n = table.rounds
    last, prev = table.rows[n], table.rows[n - 1]
    at_fixpoint = last == prev

    witness = None
    if strict:
        hits = [v for v in graph.targets if last.get(v, None) is not None and last[v] > 0]
        if hits:
            v = sorted(hits, key=repr)[0]
            _vs, path_edges = _backtrack(graph, table, n, v)
            witness = _witness(graph, path_edges)
        elif not at_fixpoint:
            witness = _pumped_witness(graph, table, nu, True, edges)
    else:
        hits = [v for v in graph.targets if last.get(v, None) is not None and last[v] >= 0]
        if hits:
            v = sorted(hits, key=repr)[0]
            _vs, path_edges = _backtrack(graph, table, n, v)
            witness = _witness(graph, path_edges)
        elif not at_fixpoint:
            witness = _pumped_witness(graph, table, nu, False, edges)

    if witness is None:
        return NO, None
    assert witness.vertices[-1] in graph.targets
    if strict:
        assert witness.value < nu, "witness failed strict re-validation"
    else:
        assert witness.value <= nu, "witness failed re-validation"
    return YES, witness


@dataclass
class NondetDsumAutomaton:
    """Nondeterministic max-semantics discounted-sum automaton."""

    states: tuple
    initial: object
    finals: frozenset
    transitions: list  # (src, symbol, weight, dst)
    discount: Fraction


def dsum_nonempty_geq(automaton: NondetDsumAutomaton, nu) -> tuple:
    """Some accepted word with value >= nu?  Returns (NO/YES, witness).

    The value of a word is the max over its accepting runs, so it
    suffices to find a run of value >= nu; inverting the weights turns
    that into a path of Dsum <= -nu.  The witness is (word, run-states).
    """
    nu = Fraction(nu)
    graph = WeightedGraph(
        vertices=automaton.states,
        edges=[(src, -w, dst) for src, _sym, w, dst in automaton.transitions],
        source=automaton.initial,
        targets=frozenset(automaton.finals),
        discount=automaton.discount,
    )
    answer, path = exists_path_leq(graph, -nu)
    if answer == NO:
        return NO, None
    sym_word = [automaton.transitions[i][1] for i in path.edges]
    value = -path.value
    assert value >= nu
    return YES, (tuple(sym_word), list(path.vertices), value)
