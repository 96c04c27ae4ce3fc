"""Two-player weighted game arenas and exact solvers.

Perfect-information arenas partition vertices between Eve and Adam.
Solvers are exact over integers/rationals: attractors and safety by
fixpoint, mean-payoff (threshold 0, sup variant) by energy progress-
measure lifting, discounted sum by strategy iteration with closed-form
lasso evaluation, and imperfect-information energy games by a capped
knowledge construction (sound for WIN, inconclusive otherwise).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .core import FormatError

EVE = "eve"
ADAM = "adam"


@dataclass
class Arena:
    """Perfect-information weighted game graph.

    edges is an ordered list of (src, action, weight, dst); the action is
    kept only for files and provenance, perfect-information solvers ignore
    it.  Edge indices into this list are the currency of strategies.
    """

    vertices: tuple
    owner: dict
    initial: object
    edges: list
    critical: frozenset = frozenset()
    obs: dict = field(default_factory=dict)

    def __post_init__(self):
        known = set(self.vertices)
        if self.initial not in known:
            raise ValueError("unknown initial vertex %r" % (self.initial,))
        for v in self.vertices:
            if self.owner.get(v) not in (EVE, ADAM):
                raise ValueError("vertex %r has no owner" % (v,))
        for src, _a, _w, dst in self.edges:
            if src not in known or dst not in known:
                raise ValueError("edge endpoints must be vertices")
        self._out = {v: [] for v in self.vertices}
        for i, (src, _a, _w, dst) in enumerate(self.edges):
            self._out[src].append(i)

    def out(self, v):
        return self._out[v]

    def deadlocks(self):
        return [v for v in self.vertices if not self._out[v]]

    def ensure_deadlock_free(self, complete=False):
        """Reject deadlocked vertices, or repair them with 0-weight self-loops."""
        dead = self.deadlocks()
        if not dead:
            return self
        if not complete:
            raise ValueError("arena has dead ends: %r" % (dead,))
        edges = list(self.edges)
        for v in dead:
            edges.append((v, "-", 0, v))
        return Arena(
            vertices=self.vertices,
            owner=dict(self.owner),
            initial=self.initial,
            edges=edges,
            critical=self.critical,
            obs=dict(self.obs),
        )


@dataclass
class ImperfectArena:
    """Action-labeled arena with an observation partition for Eve.

    Eve picks an action, Adam resolves it to any action-successor of the
    true vertex; Eve only sees the observation class of each vertex.
    """

    vertices: tuple
    initial: object
    actions: tuple
    edges: list  # (src, action, weight, dst)
    obs: dict  # vertex -> observation id
    critical: frozenset = frozenset()

    def __post_init__(self):
        known = set(self.vertices)
        for v in self.vertices:
            if v not in self.obs:
                raise ValueError("vertex %r has no observation" % (v,))
        for src, a, _w, dst in self.edges:
            if src not in known or dst not in known:
                raise ValueError("edge endpoints must be vertices")
            if a not in self.actions:
                raise ValueError("unknown action %r" % (a,))
        self._succ = {}
        for src, a, w, dst in self.edges:
            self._succ.setdefault((src, a), []).append((w, dst))

    def moves(self, v, a):
        return self._succ.get((v, a), [])

    def available(self, v):
        return [a for a in self.actions if (v, a) in self._succ]


@dataclass
class PositionalStrategy:
    """vertex -> edge index into the arena's edge list."""

    choice: dict

    def edge(self, arena, v):
        return arena.edges[self.choice[v]]


@dataclass
class MemoryStrategy:
    """Observation-based finite-memory strategy.

    act maps a memory state to the action played; step maps
    (memory, observation) to the next memory state.
    """

    initial: object
    act: dict
    step: dict


def attractor(arena: Arena, targets, player):
    """Vertices from which `player` forces a visit to `targets`.

    Returns (vertex set, PositionalStrategy) where the strategy records,
    for the player's vertices added through an edge, one attracting edge.
    """
    targets = set(targets)
    region = set(t for t in targets if t in set(arena.vertices))
    pending = {v: len(arena.out(v)) for v in arena.vertices}
    strategy = {}
    incoming = {v: [] for v in arena.vertices}
    for i, (src, _a, _w, dst) in enumerate(arena.edges):
        incoming[dst].append((src, i))
    queue = list(region)
    while queue:
        v = queue.pop()
        for src, edge_idx in incoming[v]:
            if src in region:
                continue
            if arena.owner[src] == player:
                region.add(src)
                strategy[src] = edge_idx
                queue.append(src)
            else:
                pending[src] -= 1
                if pending[src] == 0:
                    region.add(src)
                    queue.append(src)
    return region, PositionalStrategy(strategy)


def solve_safety(arena: Arena, safe):
    """Eve's winning region for 'stay inside safe forever', plus a strategy.

    The region is the complement of Adam's attractor to the unsafe set;
    the strategy picks the first edge that stays inside the region.
    """
    safe = set(safe)
    unsafe = [v for v in arena.vertices if v not in safe]
    attr, _ = attractor(arena, unsafe, ADAM)
    region = set(v for v in arena.vertices if v not in attr)
    choice = {}
    for v in region:
        if arena.owner[v] != EVE:
            continue
        for i in arena.out(v):
            if arena.edges[i][3] in region:
                choice[v] = i
                break
    return region, PositionalStrategy(choice)


def _lift(vertices, owner, out_edges, cap):
    """Minimal energy progress measure; values above cap become None (top)."""

    def bump(value, weight):
        if value is None:
            return None
        need = value - weight
        if need < 0:
            need = 0
        return None if need > cap else need

    f = {v: 0 for v in vertices}

    def target(v):
        best = None
        first = True
        for weight, dst in out_edges[v]:
            cand = bump(f[dst], weight)
            if first:
                best = cand
                first = False
            elif owner[v] == EVE:
                if best is None or (cand is not None and cand < best):
                    best = cand
            else:
                if cand is None or (best is not None and cand > best):
                    best = cand
        return best

    preds = {v: set() for v in vertices}
    for u in vertices:
        for _w, dst in out_edges[u]:
            preds[dst].add(u)
    dirty = set(vertices)
    while dirty:
        v = dirty.pop()
        current = f[v]
        if current is None:
            continue
        t = target(v)
        if t == current:
            continue
        if t is None or t > current:
            f[v] = t
            dirty.update(preds[v])
    return f


def solve_mean_payoff(arena: Arena):
    """Winner at the initial vertex for mean-payoff >= 0, with a strategy.

    Exact over integers via progress-measure lifting of the associated
    energy game.  When Adam wins, his strategy comes from re-solving the
    dual game (owners swapped, weights -(N*w+1)), where a negative value
    turns into a lifting win for him.
    """
    if arena.deadlocks():
        raise ValueError("mean-payoff needs a deadlock-free arena")
    out_edges = {
        v: [(arena.edges[i][2], arena.edges[i][3]) for i in arena.out(v)]
        for v in arena.vertices
    }
    wneg = max((max(0, -w) for _v, pairs in out_edges.items() for w, _ in pairs), default=0)
    cap = len(arena.vertices) * wneg
    f = _lift(arena.vertices, arena.owner, out_edges, cap)
    if f[arena.initial] is not None:
        choice = {}
        for v in arena.vertices:
            if arena.owner[v] != EVE or f[v] is None:
                continue
            for i in arena.out(v):
                _src, _a, w, dst = arena.edges[i]
                need = f[dst]
                if need is None:
                    continue
                need = max(0, need - w)
                if need <= f[v]:
                    choice[v] = i
                    break
        return EVE, PositionalStrategy(choice)

    n = len(arena.vertices)
    dual_owner = {v: (EVE if arena.owner[v] == ADAM else ADAM) for v in arena.vertices}
    dual_out = {
        v: [(-(n * w + 1), dst) for w, dst in out_edges[v]] for v in arena.vertices
    }
    wneg2 = max(
        (max(0, -w) for _v, pairs in dual_out.items() for w, _ in pairs), default=0
    )
    g = _lift(arena.vertices, dual_owner, dual_out, n * wneg2)
    assert g[arena.initial] is not None, "mean-payoff determinacy violated"
    choice = {}
    for v in arena.vertices:
        if arena.owner[v] != ADAM or g[v] is None:
            continue
        for i in arena.out(v):
            _src, _a, w, dst = arena.edges[i]
            need = g[dst]
            if need is None:
                continue
            need = max(0, need - (-(n * w + 1)))
            if need <= g[v]:
                choice[v] = i
                break
    return ADAM, PositionalStrategy(choice)


def solve_discounted_sum(arena: Arena, lam: Fraction, nu: Fraction, cmp: str):
    """Exact optimal discounted-sum value and winner for DS cmp nu.

    Dsum of a play weights the i-th edge by lam^i (i starting at 1); the
    optimal value satisfies val(v) = opt over edges (v -> u) of
    lam [w + val(u)].  Solved by strategy iteration: Eve improves against
    Adam's exact best response, play values of fixed positional pairs are
    solved in closed form on their lassos.
    """
    if cmp not in (">", ">="):
        raise ValueError("cmp must be '>' or '>='")
    if not (0 < lam < 1):
        raise ValueError("discount must lie strictly between 0 and 1")
    if arena.deadlocks():
        raise ValueError("discounted-sum needs a deadlock-free arena")
    lam = Fraction(lam)
    nu = Fraction(nu)

    next_edge = {v: arena.out(v)[0] for v in arena.vertices}

    def evaluate():
        values = {}
        for start in arena.vertices:
            if start in values:
                continue
            path = []
            index = {}
            v = start
            while v not in values and v not in index:
                index[v] = len(path)
                path.append(v)
                v = arena.edges[next_edge[v]][3]
            if v not in values:
                # the walk closed a fresh cycle at v
                acc = Fraction(0)
                power = Fraction(1)
                for u in path[index[v]:]:
                    power *= lam
                    acc += power * arena.edges[next_edge[u]][2]
                values[v] = acc / (1 - power)
            suffix = values[v]
            for u in reversed(path):
                w = arena.edges[next_edge[u]][2]
                suffix = lam * (w + suffix)
                values[u] = suffix
        return values

    def greedy_edge(v, values, maximize):
        best_i = None
        best_val = None
        for i in arena.out(v):
            _s, _a, w, dst = arena.edges[i]
            cand = lam * (w + values[dst])
            if best_val is None or (cand > best_val if maximize else cand < best_val):
                best_val = cand
                best_i = i
        return best_i, best_val

    guard = 0
    while True:
        # Adam best response to the current Eve choices
        while True:
            values = evaluate()
            switched = False
            for v in arena.vertices:
                if arena.owner[v] != ADAM:
                    continue
                i, val = greedy_edge(v, values, maximize=False)
                if val < values[v]:
                    next_edge[v] = i
                    switched = True
            if not switched:
                break
            guard += 1
            assert guard < 10_000, "discounted-sum iteration did not converge"
        improved = False
        for v in arena.vertices:
            if arena.owner[v] != EVE:
                continue
            i, val = greedy_edge(v, values, maximize=True)
            if val > values[v]:
                next_edge[v] = i
                improved = True
        if not improved:
            break
        guard += 1
        assert guard < 10_000, "discounted-sum iteration did not converge"

    for v in arena.vertices:
        maximize = arena.owner[v] == EVE
        _i, opt = greedy_edge(v, values, maximize)
        assert values[v] == opt, "discounted-sum fixpoint identity violated"

    value = values[arena.initial]
    eve_wins = value > nu if cmp == ">" else value >= nu
    winner = EVE if eve_wins else ADAM
    choice = {
        v: next_edge[v]
        for v in arena.vertices
        if arena.owner[v] == (EVE if eve_wins else ADAM)
    }
    return winner, PositionalStrategy(choice), value


WIN = "win"
NOT_WIN_AT_CAP = "not_win_at_cap"


def solve_imperfect_energy_capped(iarena: ImperfectArena, c0: int, cap: int):
    """Capped knowledge construction for the energy objective (level >= 0).

    Beliefs are sets of (vertex, credit) pairs with credits clamped at
    cap.  An action loses outright when some belief element can drop
    below zero; otherwise Adam picks any observation class with a
    nonempty update.  WIN is sound for the uncapped objective (clamping
    only lowers credits); NOT_WIN_AT_CAP is inconclusive.
    """
    if c0 < 0:
        raise ValueError("initial credit must be nonnegative")
    if cap < c0:
        raise ValueError("cap must be at least the initial credit")

    def updates(belief, action):
        """None when the action immediately loses, else obs -> belief."""
        per_obs = {}
        for v, c in belief:
            moves = iarena.moves(v, action)
            if not moves:
                return None  # action not available from this belief
            for w, dst in moves:
                nc = c + w
                if nc < 0:
                    return None
                per_obs.setdefault(iarena.obs[dst], set()).add((dst, min(cap, nc)))
        return {o: frozenset(b) for o, b in per_obs.items()}

    initial = frozenset([(iarena.initial, min(c0, cap))])
    succ = {}
    order = []
    queue = [initial]
    seen = {initial}
    while queue:
        belief = queue.pop(0)
        order.append(belief)
        options = {}
        for action in iarena.actions:
            result = updates(belief, action)
            if result is None:
                continue
            options[action] = result
            for nxt in result.values():
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        succ[belief] = options

    losing = set()
    changed = True
    while changed:
        changed = False
        for belief in order:
            if belief in losing:
                continue
            safe_action = None
            for action, result in succ[belief].items():
                if all(nxt not in losing for nxt in result.values()):
                    safe_action = action
                    break
            if safe_action is None:
                losing.add(belief)
                changed = True

    if initial in losing:
        return NOT_WIN_AT_CAP, None

    act = {}
    step = {}
    reached = [initial]
    seen = {initial}
    while reached:
        belief = reached.pop(0)
        for action in iarena.actions:
            result = succ[belief].get(action)
            if result is None:
                continue
            if any(nxt in losing for nxt in result.values()):
                continue
            act[belief] = action
            for obs, nxt in result.items():
                step[(belief, obs)] = nxt
                if nxt not in seen:
                    seen.add(nxt)
                    reached.append(nxt)
            break
    return WIN, MemoryStrategy(initial=initial, act=act, step=step)


# ---------------------------------------------------------------------------
# Text format


def parse_arena(text: str) -> Arena:
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((number, line))
    if not lines or lines[0][1] != "arena":
        raise FormatError("expected 'arena' header", lines[0][0] if lines else 1)
    vertices = []
    owner = {}
    critical = set()
    initial = None
    edges = []
    obs = {}
    for number, line in lines[1:]:
        if ":" not in line:
            raise FormatError("expected 'key: ...'", number)
        key, rest = line.split(":", 1)
        tokens = rest.split()
        key = key.strip()
        if key == "vertex":
            if len(tokens) < 2 or tokens[1] not in (EVE, ADAM):
                raise FormatError("vertex takes: name eve|adam [critical]", number)
            name = tokens[0]
            if name in owner:
                raise FormatError("duplicate vertex %r" % name, number)
            vertices.append(name)
            owner[name] = tokens[1]
            if len(tokens) == 3 and tokens[2] == "critical":
                critical.add(name)
            elif len(tokens) > 2:
                raise FormatError("vertex takes: name eve|adam [critical]", number)
        elif key == "initial":
            if len(tokens) != 1:
                raise FormatError("initial takes one vertex", number)
            initial = tokens[0]
        elif key == "edge":
            if len(tokens) != 4:
                raise FormatError("edge takes: src action weight dst", number)
            src, action, weight, dst = tokens
            try:
                weight = int(weight)
            except ValueError:
                raise FormatError("weight must be an integer", number)
            edges.append((src, action, weight, dst))
        elif key == "obs":
            if len(tokens) < 2:
                raise FormatError("obs takes: name v1 v2 ...", number)
            for v in tokens[1:]:
                obs[v] = tokens[0]
        else:
            raise FormatError("unknown directive %r" % key, number)
    if initial is None:
        raise FormatError("missing initial")
    try:
        return Arena(
            vertices=tuple(vertices),
            owner=owner,
            initial=initial,
            edges=edges,
            critical=frozenset(critical),
            obs=obs,
        )
    except ValueError as exc:
        raise FormatError(str(exc))


def emit_arena(arena: Arena) -> str:
    lines = ["arena"]
    for v in arena.vertices:
        mark = " critical" if v in arena.critical else ""
        lines.append("vertex: %s %s%s" % (v, arena.owner[v], mark))
    lines.append("initial: %s" % (arena.initial,))
    for src, action, w, dst in arena.edges:
        lines.append("edge: %s %s %d %s" % (src, action, w, dst))
    if arena.obs:
        classes = {}
        for v, o in arena.obs.items():
            classes.setdefault(o, []).append(v)
        for o in sorted(classes):
            lines.append("obs: %s %s" % (o, " ".join(classes[o])))
    return "\n".join(lines) + "\n"


def arena_to_iarena(arena: Arena) -> ImperfectArena:
    """Reinterpret a parsed arena file as an imperfect-information arena.

    Vertices without an obs line observe themselves.
    """
    obs = {v: arena.obs.get(v, "__self_%s" % (v,)) for v in arena.vertices}
    actions = []
    for _s, a, _w, _d in arena.edges:
        if a not in actions:
            actions.append(a)
    return ImperfectArena(
        vertices=arena.vertices,
        initial=arena.initial,
        actions=tuple(actions),
        edges=list(arena.edges),
        obs=obs,
        critical=arena.critical,
    )


def arena_to_dot(arena: Arena, highlight=()) -> str:
    highlight = set(highlight)
    lines = ["digraph arena {", "  rankdir=LR;"]
    for v in arena.vertices:
        shape = "ellipse" if arena.owner[v] == EVE else "box"
        extra = ""
        if v in arena.critical:
            extra += ", peripheries=2"
        if v in highlight:
            extra += ', style=filled, fillcolor="lightgray"'
        lines.append('  "%s" [shape=%s%s];' % (str(v).replace('"', "'"), shape, extra))
    lines.append("  __init [shape=point];")
    lines.append('  __init -> "%s";' % str(arena.initial).replace('"', "'"))
    for src, action, w, dst in arena.edges:
        label = "%d" % w if action == "-" else "%s|%d" % (action, w)
        lines.append(
            '  "%s" -> "%s" [label="%s"];'
            % (str(src).replace('"', "'"), str(dst).replace('"', "'"), label)
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
