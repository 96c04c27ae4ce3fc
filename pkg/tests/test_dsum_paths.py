import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from wsynth import dsumpath
from wsynth.dsumpath import (
    NO,
    YES,
    NondetDsumAutomaton,
    WeightedGraph,
    dsum_nonempty_geq,
    exists_path_leq,
    exists_path_lt,
    relative_gap,
)


def remark_graph():
    return WeightedGraph(
        vertices=("v0", "v1"),
        edges=[("v0", 1, "v0"), ("v0", 3, "v1"), ("v1", 0, "v1")],
        source="v0",
        targets=frozenset(["v1"]),
        discount=Fraction(1, 2),
    )


def dsum(weights, lam):
    return sum(lam**i * w for i, w in enumerate(weights, start=1))


def random_graph(rng, max_v=6, max_w=3):
    n = rng.randint(1, max_v)
    names = ["g%d" % i for i in range(n)]
    edges = []
    for v in names:
        for _ in range(rng.randint(0, 2)):
            edges.append((v, rng.randint(-max_w, max_w), rng.choice(names)))
    targets = frozenset(v for v in names if rng.random() < 0.4)
    lam = rng.choice([Fraction(1, 2), Fraction(1, 3), Fraction(2, 5)])
    return WeightedGraph(
        vertices=tuple(names),
        edges=edges,
        source=names[0],
        targets=targets,
        discount=lam,
    )


def brute_force_paths(graph, max_len):
    """All (edge-index path, value) from the source, up to max_len edges."""
    out = {v: [] for v in graph.vertices}
    for i, (src, _w, dst) in enumerate(graph.edges):
        out[src].append(i)
    results = []
    stack = [(graph.source, [], Fraction(0), Fraction(1))]
    while stack:
        v, path, value, power = stack.pop()
        if v in graph.targets:
            results.append((list(path), value))
        if len(path) == max_len:
            continue
        for i in out[v]:
            _s, w, dst = graph.edges[i]
            stack.append((dst, path + [i], value + power * graph.discount * w,
                          power * graph.discount))
    return results


# --- relative gap algebra ----------------------------------------------------


def test_relative_gap_empty_path():
    assert relative_gap(0, 0, Fraction(1), Fraction(1, 2)) == 1


def test_relative_gap_remark_prefix():
    lam = Fraction(1, 2)
    value = dsum([3], lam)
    assert value == Fraction(3, 2)
    rg = relative_gap(value, 1, Fraction(1), lam)
    assert rg == -1
    assert (value > 1) == (rg < 0)  # property (A) on this prefix


@settings(max_examples=200)
@given(
    st.lists(st.integers(-5, 5), min_size=0, max_size=6),
    st.sampled_from([Fraction(1, 2), Fraction(1, 3), Fraction(2, 5)]),
    st.integers(-3, 3),
)
def test_property_A_strict_iff_negative_gap(weights, lam, nu_int):
    nu = Fraction(nu_int)
    value = dsum(weights, lam)
    rg = relative_gap(value, len(weights), nu, lam)
    assert (value > nu) == (rg < 0)
    assert (value == nu) == (rg == 0)


@settings(max_examples=200)
@given(
    st.lists(st.integers(-5, 5), min_size=0, max_size=5),
    st.integers(-5, 5),
    st.sampled_from([Fraction(1, 2), Fraction(2, 5)]),
    st.integers(-3, 3),
)
def test_property_B_one_step_update(prefix, j, lam, nu_int):
    nu = Fraction(nu_int)
    rg_prefix = relative_gap(dsum(prefix, lam), len(prefix), nu, lam)
    extended = prefix + [j]
    rg_ext = relative_gap(dsum(extended, lam), len(extended), nu, lam)
    assert rg_ext == rg_prefix / lam - j


@settings(max_examples=200)
@given(
    st.lists(st.integers(-5, 5), min_size=0, max_size=4),
    st.lists(st.integers(-5, 5), min_size=0, max_size=4),
    st.sampled_from([Fraction(1, 2), Fraction(1, 3)]),
    st.integers(-3, 3),
)
def test_property_C_composition(part1, part2, lam, nu_int):
    nu = Fraction(nu_int)
    rg1 = relative_gap(dsum(part1, lam), len(part1), nu, lam)
    rg12 = relative_gap(dsum(part1 + part2, lam), len(part1 + part2), nu, lam)
    assert rg12 == (rg1 - dsum(part2, lam)) / lam ** len(part2)


@settings(max_examples=200)
@given(
    st.lists(st.integers(-4, 4), min_size=0, max_size=3),
    st.lists(st.integers(-4, 4), min_size=1, max_size=3),
    st.lists(st.integers(-4, 4), min_size=0, max_size=3),
    st.sampled_from([Fraction(1, 2), Fraction(2, 5)]),
    st.integers(-2, 2),
)
def test_property_D_loop_monotonicity(p1, p2, p3, lam, nu_int):
    nu = Fraction(nu_int)

    def rg(ws):
        return relative_gap(dsum(ws, lam), len(ws), nu, lam)

    if rg(p1) >= rg(p1 + p2):
        assert rg(p1 + p3) >= rg(p1 + p2 + p3)


# --- mrg tables ---------------------------------------------------------------


def test_mrg_monotone_rows():
    rng = random.Random(17)
    for _ in range(40):
        graph = random_graph(rng)
        table, _v, _e = dsumpath.compute_mrg(graph, Fraction(1))
        if table is None:
            continue
        for i in range(table.rounds):
            for v, val in table.rows[i].items():
                assert table.rows[i + 1][v] >= val


def test_remark_graph_leq_cases():
    graph = remark_graph()
    answer, _ = exists_path_leq(graph, Fraction(1))
    assert answer == NO  # path values are 1 + 2^-(k+1), all strictly above 1
    answer, witness = exists_path_leq(graph, Fraction(3, 2))
    assert answer == YES
    assert witness.value <= Fraction(3, 2)
    assert witness.vertices[-1] == "v1"


def test_remark_graph_lt_cases():
    graph = remark_graph()
    answer, _ = exists_path_lt(graph, Fraction(1))
    assert answer == NO  # 1 is the infimum, never attained
    # one loop before exiting already gives 5/4 < 3/2
    answer, witness = exists_path_lt(graph, Fraction(3, 2))
    assert answer == YES
    assert witness.value < Fraction(3, 2)
    answer, witness = exists_path_lt(graph, Fraction(2))
    assert answer == YES
    assert witness.value < 2


def test_single_zero_edge_boundary():
    graph = WeightedGraph(
        vertices=("s", "t"),
        edges=[("s", 0, "t")],
        source="s",
        targets=frozenset(["t"]),
        discount=Fraction(1, 2),
    )
    assert exists_path_lt(graph, Fraction(0))[0] == NO
    answer, witness = exists_path_leq(graph, Fraction(0))
    assert answer == YES and witness.value == 0


def test_pumped_witness_positive_loop():
    # the loop at p keeps raising the relative gap (weight -1 pumps value
    # down), and a heavy exit edge needs many pumps before the budget fits
    graph = WeightedGraph(
        vertices=("p", "t"),
        edges=[("p", -1, "p"), ("p", 40, "t")],
        source="p",
        targets=frozenset(["t"]),
        discount=Fraction(1, 2),
    )
    answer, witness = exists_path_leq(graph, Fraction(0))
    assert answer == YES
    assert witness.value <= 0
    assert len(witness.edges) > 2  # pumping was actually needed
    answer, witness = exists_path_lt(graph, Fraction(0))
    assert answer == YES
    assert witness.value < 0


def test_empty_pruned_graph():
    graph = WeightedGraph(
        vertices=("a", "b"),
        edges=[],
        source="a",
        targets=frozenset(["b"]),
        discount=Fraction(1, 2),
    )
    assert exists_path_leq(graph, Fraction(100))[0] == NO
    assert exists_path_lt(graph, Fraction(100))[0] == NO


def test_source_is_target_empty_path():
    graph = WeightedGraph(
        vertices=("a",),
        edges=[],
        source="a",
        targets=frozenset(["a"]),
        discount=Fraction(1, 2),
    )
    answer, witness = exists_path_leq(graph, Fraction(0))
    assert answer == YES and witness.value == 0 and witness.edges == []
    assert exists_path_lt(graph, Fraction(0))[0] == NO
    assert exists_path_lt(graph, Fraction(1))[0] == YES


def check_against_brute_force(graph, nu, strict, max_len):
    checker = exists_path_lt if strict else exists_path_leq
    answer, witness = checker(graph, nu)
    found = [
        (path, value)
        for path, value in brute_force_paths(graph, max_len)
        if (value < nu if strict else value <= nu)
    ]
    if answer == YES:
        assert witness.value < nu if strict else witness.value <= nu
        assert witness.vertices[-1] in graph.targets
        recomputed = dsumpath.dsum_of_edges(graph, witness.edges)
        assert recomputed == witness.value
    if found:
        assert answer == YES, (graph, nu, strict)


def test_oracle_equivalence_random_graphs():
    rng = random.Random(99)
    for trial in range(150):
        graph = random_graph(rng)
        nu = Fraction(rng.randint(-2, 2))
        max_len = 3 * len(graph.vertices)
        check_against_brute_force(graph, nu, False, max_len)
        check_against_brute_force(graph, nu, True, max_len)


# --- nondeterministic dsum automata -------------------------------------------


def test_nonempty_trivial_accepting_initial():
    auto = NondetDsumAutomaton(
        states=("q",),
        initial="q",
        finals=frozenset(["q"]),
        transitions=[],
        discount=Fraction(1, 2),
    )
    answer, witness = dsum_nonempty_geq(auto, Fraction(0))
    assert answer == YES and witness[0] == ()
    assert dsum_nonempty_geq(auto, Fraction(1, 10))[0] == NO


def test_nonempty_single_transition():
    auto = NondetDsumAutomaton(
        states=("q", "f"),
        initial="q",
        finals=frozenset(["f"]),
        transitions=[("q", "x", 1, "f")],
        discount=Fraction(1, 2),
    )
    answer, witness = dsum_nonempty_geq(auto, Fraction(1, 2))
    assert answer == YES
    assert witness[0] == ("x",) and witness[2] == Fraction(1, 2)


def test_nonempty_matches_brute_force():
    rng = random.Random(4)
    for trial in range(60):
        n = rng.randint(1, 4)
        states = ["s%d" % i for i in range(n)]
        transitions = []
        for s in states:
            for _ in range(rng.randint(0, 2)):
                transitions.append(
                    (s, rng.choice("xy"), rng.randint(-2, 2), rng.choice(states))
                )
        finals = frozenset(s for s in states if rng.random() < 0.5)
        lam = Fraction(1, 2)
        auto = NondetDsumAutomaton(
            states=tuple(states),
            initial=states[0],
            finals=finals,
            transitions=transitions,
            discount=lam,
        )
        nu = Fraction(rng.randint(-2, 2))
        answer, witness = dsum_nonempty_geq(auto, nu)

        # brute force over runs up to length 10
        best = None
        stack = [(states[0], Fraction(0), Fraction(1), 0)]
        while stack:
            s, value, power, depth = stack.pop()
            if s in finals and (best is None or value > best):
                best = value
            if depth == 10:
                continue
            for src, _sym, w, dst in transitions:
                if src == s:
                    stack.append((dst, value + power * lam * w, power * lam, depth + 1))
        if best is not None and best >= nu:
            assert answer == YES
        if answer == YES:
            assert witness[2] >= nu
