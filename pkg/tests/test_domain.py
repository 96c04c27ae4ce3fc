import itertools
import random

import pytest

from wsynth import core, domain

from conftest import brute_best_value, brute_domain, random_spec


def residual_words(spec, state, max_len):
    """Oracle: domain words readable from `state`, by bounded enumeration."""
    words = set()
    for n in range(max_len + 1):
        for u in itertools.product(spec.inputs, repeat=n):
            subset = domain._closure(spec, [state])
            for a in u:
                subset = domain._dom_step(spec, subset, a)
            if domain._accepts(spec, subset):
                words.add(u)
    return words


def boolean_realizable_oracle(spec):
    """Exact oracle for Boolean realizability, independent of the two-run game.

    Eve tracks her own run plus the determinized domain subset; she loses
    whenever the subset accepts but her run is not in a final state.  Solved
    by a fixpoint over the (state, subset) safety game.
    """
    start = (spec.initial, domain._closure(spec, [spec.initial]))

    states = set()
    queue = [start]
    moves = {}
    while queue:
        node = queue.pop()
        if node in states:
            continue
        states.add(node)
        q, subset = node
        opts = []
        for a in spec.inputs:
            nsub = domain._dom_step(spec, subset, a)
            mid = spec.transitions.get((q, a)) if q is not None else None
            mid_state = mid[0] if mid else None
            outs = []
            if mid_state is not None:
                for b in spec.outputs:
                    entry = spec.transitions.get((mid_state, b))
                    outs.append((entry[0] if entry else None, nsub))
            else:
                outs.append((None, nsub))
            opts.append(outs)
            for nxt in outs:
                if nxt not in states:
                    queue.append(nxt)
        moves[node] = opts
    losing = set()
    changed = True
    while changed:
        changed = False
        for node in states:
            if node in losing:
                continue
            q, subset = node
            if domain._accepts(spec, subset) and q not in spec.finals:
                losing.add(node)
                changed = True
                continue
            for outs in moves[node]:
                if all(nxt in losing for nxt in outs):
                    losing.add(node)
                    changed = True
                    break
    return start not in losing


def test_domain_membership_paper(paper_spec):
    assert domain.domain_membership(paper_spec, "b")
    assert not domain.domain_membership(paper_spec, "aa")
    assert not domain.domain_membership(paper_spec, "")
    for i in range(1, 6):
        assert domain.domain_membership(paper_spec, "a" * i + "b")


def test_domain_membership_epsilon():
    spec = core.parse_wfa(
        "wfa\nmeasure: sum\ninputs: a\noutputs: c\ninitial: q0\nfinals: q0\n"
    )
    assert domain.domain_membership(spec, "")


def test_domain_membership_matches_enumeration(paper_spec):
    dom = set(brute_domain(paper_spec, 5))
    for n in range(6):
        for u in itertools.product(paper_spec.inputs, repeat=n):
            assert domain.domain_membership(paper_spec, u) == (u in dom)


def test_paper_fixture_is_domain_safe(paper_spec):
    assert domain.unsafe_transitions(paper_spec) == set()


def test_unsafe_transition_dead_branch():
    # at o0, output c accepts but output d leads to a non-final dead end
    spec = core.WeightedSpec(
        inputs=("a",),
        outputs=("c", "d"),
        states=("i0", "o0", "i1", "i2"),
        initial="i0",
        finals=("i1",),
        transitions={
            ("i0", "a"): ("o0", 0),
            ("o0", "c"): ("i1", 0),
            ("o0", "d"): ("i2", 0),
        },
    )
    assert domain.unsafe_transitions(spec) == {("o0", "d", "i2")}


def test_unsafe_transitions_single_output_per_state():
    rng = random.Random(3)
    for _ in range(20):
        spec = random_spec(rng)
        pruned = {}
        seen_out = set()
        for (src, sym), val in spec.transitions.items():
            if spec.polarity[src] == core.OUTPUT:
                if src in seen_out:
                    continue
                seen_out.add(src)
            pruned[(src, sym)] = val
        single = core.WeightedSpec(
            inputs=spec.inputs,
            outputs=spec.outputs,
            states=spec.states,
            initial=spec.initial,
            finals=spec.finals,
            transitions=pruned,
            polarity=dict(spec.polarity),
        )
        assert domain.unsafe_transitions(single) == set()


def test_residual_equality_matches_enumeration(paper_spec):
    for p in paper_spec.states:
        for q in paper_spec.states:
            expected = residual_words(paper_spec, p, 8) == residual_words(
                paper_spec, q, 8
            )
            assert domain.residual_languages_equal(paper_spec, p, q) == expected


def test_make_domain_safe_keeps_paper_fixture(paper_spec):
    result = domain.make_domain_safe(paper_spec)
    assert result is not domain.NO_BOOLEAN_REALIZER
    assert domain.unsafe_transitions(result) == set()
    assert domain.domains_equal(result, paper_spec)
    assert set(result.states) == set(paper_spec.states)
    assert result.transitions == paper_spec.transitions


def test_make_domain_safe_prunes_dead_branch():
    spec = core.WeightedSpec(
        inputs=("a",),
        outputs=("c", "d"),
        states=("i0", "o0", "i1", "i2"),
        initial="i0",
        finals=("i1",),
        transitions={
            ("i0", "a"): ("o0", 0),
            ("o0", "c"): ("i1", 0),
            ("o0", "d"): ("i2", 0),
        },
    )
    result = domain.make_domain_safe(spec)
    assert result is not domain.NO_BOOLEAN_REALIZER
    assert ("o0", "d") not in result.transitions
    assert ("o0", "c") in result.transitions


def test_make_domain_safe_unrealizable():
    # Adam can pick his output to accept exactly when Eve's differs: after
    # input a, output c accepts iff the next input is x, output d accepts
    # iff it is y; Eve must commit first, so she always risks the domain.
    spec = core.WeightedSpec(
        inputs=("a", "x", "y"),
        outputs=("c", "d"),
        states=("i0", "o0", "ix", "iy", "ox", "oy", "f"),
        initial="i0",
        finals=("f",),
        transitions={
            ("i0", "a"): ("o0", 0),
            ("o0", "c"): ("ix", 0),
            ("o0", "d"): ("iy", 0),
            ("ix", "x"): ("ox", 0),
            ("iy", "y"): ("oy", 0),
            ("ox", "c"): ("f", 0),
            ("oy", "c"): ("f", 0),
        },
    )
    assert not boolean_realizable_oracle(spec)
    assert domain.make_domain_safe(spec) is domain.NO_BOOLEAN_REALIZER


def test_two_run_game_vertex_bound(paper_spec):
    game = domain.build_two_run_game(paper_spec)
    n = len(paper_spec.states) + 1  # dead marker
    assert len(game.arena.vertices) <= 2 * n * n
    dot = domain.two_run_game_to_dot(game)
    assert dot.startswith("digraph")


def every_domain_run_accepts(spec, max_len):
    """Every run on u (x) v with u in dom ends in a final state."""
    for n in range(max_len + 1):
        for u in itertools.product(spec.inputs, repeat=n):
            if not domain.domain_membership(spec, u):
                continue
            for v in itertools.product(spec.outputs, repeat=n):
                state = spec.initial
                ok = True
                for a, b in zip(u, v):
                    for sym in (a, b):
                        entry = spec.transitions.get((state, sym))
                        if entry is None:
                            ok = False
                            break
                        state = entry[0]
                    if not ok:
                        break
                if ok and state not in spec.finals:
                    return False
    return True


def canonical_form(spec):
    """Structure up to breadth-first state renaming."""
    order = [spec.initial]
    seen = {spec.initial}
    i = 0
    while i < len(order):
        q = order[i]
        i += 1
        for sym in list(spec.inputs) + list(spec.outputs):
            entry = spec.transitions.get((q, sym))
            if entry and entry[0] not in seen:
                seen.add(entry[0])
                order.append(entry[0])
    rank = {q: j for j, q in enumerate(order)}
    trans = sorted(
        (rank[src], sym, w, rank[tgt])
        for (src, sym), (tgt, w) in spec.transitions.items()
        if src in rank and tgt in rank
    )
    finals = sorted(rank[f] for f in spec.finals if f in rank)
    return (trans, finals)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_make_domain_safe_random_suite(seed):
    rng = random.Random(seed)
    for trial in range(40):
        spec = random_spec(rng)
        oracle_says = boolean_realizable_oracle(spec)
        result = domain.make_domain_safe(spec)
        if result is domain.NO_BOOLEAN_REALIZER:
            assert not oracle_says
            continue
        assert oracle_says
        assert every_domain_run_accepts(result, 6)
        assert domain.domains_equal(result, spec)
        assert domain.unsafe_transitions(result) == set()
        twice = domain.make_domain_safe(result)
        assert twice is not domain.NO_BOOLEAN_REALIZER
        assert canonical_form(twice) == canonical_form(result)
