"""Constructive Nash equilibria for trees, loops, regular bipartite graphs
and games with a dominant resource.

Every constructor checks its output with :func:`scg.model.is_nash` and
raises if the check fails.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from scg.dynamics import run_dynamics
from scg.model import GameInstance, InterferenceGraph, Profile, best_response, is_nash


class NotApplicable(ValueError):
    """The instance is outside the family a constructor handles."""


@dataclass(frozen=True)
class ConstructionReport:
    profile: Profile
    method: str
    verified: bool
    relabeling: tuple[int, ...] | None = None
    notes: tuple[str, ...] = ()


def _verified(instance: GameInstance, profile: Sequence[int], method: str, **extra) -> ConstructionReport:
    profile = tuple(profile)
    check = is_nash(instance, profile)
    if not check:
        raise RuntimeError(f"{method}: constructed profile {profile} is not an NE (deviators {check.deviators})")
    return ConstructionReport(profile, method, True, **extra)


def _require_undirected_monotone(instance: GameInstance) -> None:
    if instance.graph.directed:
        raise NotApplicable("constructions need an undirected graph")
    if not instance.monotone:
        raise NotApplicable("constructions need non-increasing payoffs")


def _components(graph: InterferenceGraph) -> list[list[int]]:
    seen: set[int] = set()
    parts = []
    for root in range(graph.player_count):
        if root in seen:
            continue
        seen.add(root)
        part, queue = [], deque([root])
        while queue:
            u = queue.popleft()
            part.append(u)
            for v in graph.interferers[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        parts.append(part)
    return parts


def is_tree(graph: InterferenceGraph) -> bool:
    if graph.directed:
        return False
    return len(graph.undirected_pairs()) == graph.player_count - 1 and len(_components(graph)) == 1


def cycle_order(graph: InterferenceGraph) -> list[int] | None:
    """Players in order around the loop starting at 0, or None if the graph
    is not a single cycle through every player."""
    n = graph.player_count
    if graph.directed or n < 3 or any(len(k) != 2 for k in graph.interferers):
        return None
    order = [0]
    prev, cur = None, 0
    while True:
        a, b = graph.interferers[cur]
        nxt = a if a != prev else b
        if prev is None:
            nxt = min(a, b)
        if nxt == 0:
            break
        order.append(nxt)
        prev, cur = cur, nxt
        if len(order) > n:
            return None
    return order if len(order) == n else None


def _tie_broken_argmax(values: dict[int, Fraction], preference: Sequence[int]) -> int:
    top = max(values.values())
    return next(r for r in preference if values[r] == top)


# -- trees -------------------------------------------------------------------


def construct_tree_ne(instance: GameInstance) -> ConstructionReport:
    """Grow the tree one leaf at a time in BFS order from player 0.

    A new leaf takes its best response. If it lands on its parent's
    resource and the parent now wants to leave, the smaller game is solved
    again with the parent's table on that resource shifted by one user.
    """
    _require_undirected_monotone(instance)
    if not is_tree(instance.graph):
        raise NotApplicable("graph is not a tree")

    graph = instance.graph
    order, parent = [0], {0: None}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in graph.interferers[u]:
            if v not in parent:
                parent[v] = u
                order.append(v)
                queue.append(v)
    position = {v: k for k, v in enumerate(order)}
    cases = Counter()

    def g(shifts: frozenset, v: int, r: int, k: int) -> Fraction:
        extra = dict(shifts).get((v, r), 0)
        return instance.g(v, r, k + extra)

    def options(shifts, sigma: dict[int, int], v: int, size: int) -> dict[int, Fraction]:
        crowd = Counter(sigma[u] for u in graph.interferers[v] if position[u] < size)
        return {r: g(shifts, v, r, crowd[r] + 1) for r in instance.resources()}

    @lru_cache(maxsize=None)
    def solve(size: int, shifts: frozenset) -> tuple[tuple[int, int], ...]:
        root = order[0]
        if size == 1:
            first = {r: g(shifts, root, r, 1) for r in instance.resources()}
            return ((root, _tie_broken_argmax(first, instance.preferences[root])),)
        sigma = dict(solve(size - 1, shifts))
        leaf, j = order[size - 1], parent[order[size - 1]]
        leaf_options = {
            r: g(shifts, leaf, r, 1 + (sigma[j] == r)) for r in instance.resources()
        }
        r_o = _tie_broken_argmax(leaf_options, instance.preferences[leaf])
        if sigma[j] != r_o:
            cases["case1"] += 1
            sigma[leaf] = r_o
            return tuple(sorted(sigma.items()))
        sigma[leaf] = r_o
        j_options = options(shifts, sigma, j, size)
        if j_options[r_o] == max(j_options.values()):
            cases["case2"] += 1
            return tuple(sorted(sigma.items()))
        cases["case3"] += 1
        bumped = dict(shifts)
        bumped[(j, r_o)] = bumped.get((j, r_o), 0) + 1
        sigma = dict(solve(size - 1, frozenset(bumped.items())))
        sigma[leaf] = r_o
        leaf_after = options(shifts, sigma, leaf, size)
        if leaf_after[r_o] != max(leaf_after.values()):
            raise RuntimeError(f"leaf {leaf} lost its best response after re-solving")
        return tuple(sorted(sigma.items()))

    result = dict(solve(graph.player_count, frozenset()))
    profile = tuple(result[v] for v in range(graph.player_count))
    tag = "tree/bfs " + " ".join(f"{k}={cases[k]}" for k in ("case1", "case2", "case3"))
    return _verified(instance, profile, tag)


# -- loops -------------------------------------------------------------------


@dataclass(frozen=True)
class TypeTriple:
    """Best responses with no, one and two characteristic neighbours."""

    a: int
    b: int
    c: int

    @property
    def q(self) -> frozenset[int]:
        return frozenset((self.a, self.b, self.c))


def beta(instance: GameInstance, player: int, neighbours: Iterable[int]) -> int:
    """Tie-broken best response when ``neighbours`` (a multiset) surround ``player``."""
    crowd = Counter(neighbours)
    values = {r: instance.g(player, r, 1 + crowd[r]) for r in instance.resources()}
    return _tie_broken_argmax(values, instance.preferences[player])


def _require_cycle(instance: GameInstance) -> list[int]:
    _require_undirected_monotone(instance)
    order = cycle_order(instance.graph)
    if order is None:
        raise NotApplicable("graph is not a single cycle through all players")
    return order


def type_triple(instance: GameInstance, player: int) -> TypeTriple:
    a = beta(instance, player, ())
    b = beta(instance, player, (a,))
    c = beta(instance, player, (a, b))
    return TypeTriple(a, b, c)


def loop_type_triples(instance: GameInstance) -> tuple[TypeTriple, ...]:
    """Type triple of every player, indexed by player."""
    if cycle_order(instance.graph) is None:
        raise NotApplicable("graph is not a single cycle through all players")
    return tuple(type_triple(instance, i) for i in range(instance.player_count))


def _algorithm_a(types: Sequence[TypeTriple], alpha: int) -> list[int]:
    sigma = [types[0].a if alpha == 0 else types[0].b]
    for t in types[1:]:
        sigma.append(t.b if t.a == sigma[-1] else t.a)
    return sigma


def loop_algorithm_a(instance: GameInstance, alpha: int, order: Sequence[int] | None = None) -> Profile:
    """Sweep the loop in ``order`` giving each player ``a`` unless its
    predecessor already holds it, in which case ``b``.

    The first player in ``order`` gets ``a`` (alpha 0) or ``b`` (alpha 1).
    """
    if alpha not in (0, 1):
        raise ValueError("alpha must be 0 or 1")
    canonical = cycle_order(instance.graph)
    if canonical is None:
        raise NotApplicable("graph is not a single cycle through all players")
    order = canonical if order is None else list(order)
    if sorted(order) != list(range(instance.player_count)):
        raise ValueError("order must list every player once")
    types = loop_type_triples(instance)
    clashes = [i for i, t in enumerate(types) if t.a == t.b]
    if clashes:
        raise ValueError(f"players {clashes} have a(i) = b(i); use the fixed-player line construction")
    by_position = _algorithm_a([types[p] for p in order], alpha)
    profile = [0] * instance.player_count
    for p, r in zip(order, by_position):
        profile[p] = r
    return tuple(profile)


def _plays_best_response(instance: GameInstance, profile: Sequence[int], player: int) -> bool:
    return profile[player] == best_response(instance, profile, player)


def algorithm_a_properties(instance: GameInstance, alpha: int, order: Sequence[int] | None = None) -> dict[str, bool]:
    """Check the five structural properties of the loop sweep directly.

    Positions follow ``order`` (default: around the loop from player 0).
    """
    order = cycle_order(instance.graph) if order is None else list(order)
    sigma = loop_algorithm_a(instance, alpha, order)
    n = len(order)
    at = lambda k: sigma[order[k % n]]  # noqa: E731
    results = {}

    results["adjacent_differ"] = all(at(k) != at(k + 1) for k in range(n - 1))

    prop2 = True
    for k in range(n):
        if alpha == 1 and k == 0:
            continue
        if at(k - 1) != at(k) != at(k + 1):
            prop2 &= _plays_best_response(instance, sigma, order[k])
    results["distinct_neighbours_best_respond"] = prop2

    results["interior_best_respond"] = all(
        _plays_best_response(instance, sigma, order[k]) for k in range(1, n - 1)
    )

    if alpha == 0 and at(n - 1) != at(0):
        results["closing_gap_is_nash"] = bool(is_nash(instance, sigma))
    else:
        results["closing_gap_is_nash"] = True

    prop5 = True
    for k in range(2, n):
        for r in instance.resources():
            if r == at(k - 1):
                continue
            changed = list(sigma)
            changed[order[k]] = r
            prop5 &= _plays_best_response(instance, changed, order[k - 1])
    results["predecessor_stable"] = prop5
    return results


def _fixed_pivot(instance: GameInstance, order: list[int], types: Sequence[TypeTriple], pivot: int) -> ConstructionReport:
    n = instance.player_count
    k = order.index(pivot)
    left, right = order[(k - 1) % n], order[(k + 1) % n]
    held = types[pivot].a

    rest = [i for i in range(n) if i != pivot]
    new_index = {old: new for new, old in enumerate(rest)}
    pairs = [
        (new_index[i], new_index[j])
        for i, j in instance.graph.undirected_pairs()
        if pivot not in (i, j)
    ]
    tables = []
    for old in rest:
        row = list(instance.payoffs[old])
        if old in (left, right):
            shifted = row[held - 1][1:] or row[held - 1][-1:]
            row[held - 1] = shifted
        tables.append(tuple(row))
    line = GameInstance(
        InterferenceGraph.undirected(n - 1, pairs),
        instance.resource_count,
        tuple(tables),
        monotone=True,
        preferences=tuple(instance.preferences[old] for old in rest),
    )
    line_report = construct_tree_ne(line)

    sigma = [0] * n
    for old in rest:
        sigma[old] = line_report.profile[new_index[old]]
    sigma[pivot] = held
    t = types[pivot]
    if t.a == t.b == t.c:
        case = "fixed-forever"
    elif sigma[left] != held or sigma[right] != held:
        case = "neighbour-off-a"
    else:
        sigma[pivot] = best_response(instance, sigma, pivot)
        case = "pivot-switches"
    notes = ("line game NE: first found by the tree construction",)
    return _verified(instance, sigma, f"loop/fixed-pivot pivot={pivot} {case}", notes=notes)


def _rotation_ending_at(order: list[int], last: int) -> list[int]:
    k = order.index(last)
    n = len(order)
    return [order[(k + 1 + m) % n] for m in range(n)]


def _distinct_triple(instance: GameInstance, order: list[int], types: Sequence[TypeTriple], pivot: int) -> ConstructionReport:
    relabel = _rotation_ending_at(order, pivot)
    n = len(relabel)
    sigma = list(loop_algorithm_a(instance, 0, relabel))
    first, before_last = relabel[0], relabel[n - 2]
    t = types[pivot]
    if sigma[pivot] != sigma[first]:
        case = "already-nash"
    elif {sigma[before_last], sigma[first]} == {t.a, t.b}:
        sigma[pivot] = t.c
        case = "pivot-to-c"
    elif sigma[pivot] == t.a:
        sigma[pivot] = t.b
        case = "pivot-to-b"
    else:
        raise RuntimeError("loop sweep reached a configuration the case analysis excludes")
    return _verified(instance, sigma, f"loop/distinct-triple pivot={pivot} {case}", relabeling=tuple(relabel))


def _paired_or_sweep(instance: GameInstance, order: list[int], types: Sequence[TypeTriple]) -> ConstructionReport:
    n = len(order)
    succ = {order[k]: order[(k + 1) % n] for k in range(n)}
    pred = {v: u for u, v in succ.items()}

    def relabel_from(i: int, j: int) -> list[int]:
        # i at position 0, its neighbour j at position n - 1
        step = succ if j == pred[i] else pred
        seq = [i]
        while len(seq) < n:
            seq.append(step[seq[-1]])
        return seq

    for attr, alpha in (("a", 0), ("b", 1)):
        for i in range(n):
            for j in (pred[i], succ[i]):
                if getattr(types[i], attr) not in types[j].q:
                    relabel = relabel_from(i, j)
                    sigma = loop_algorithm_a(instance, alpha, relabel)
                    return _verified(
                        instance,
                        sigma,
                        f"loop/sweep {attr}({i}) not in Q({j}) sweep alpha={alpha}",
                        relabeling=tuple(relabel),
                    )

    pair = sorted(types[0].q)
    if len(pair) != 2 or any(t.q != types[0].q for t in types):
        raise RuntimeError("expected every player to share a two-resource Q set")
    restricted = _restrict_resources(instance, pair)
    start = (pair.index(types[0].a) + 1,) * n
    result = run_dynamics(restricted, start, "round_robin", "better", seed=0, max_steps=2**n + 1)
    if result.status != "converged_to_NE":
        raise RuntimeError(f"two-resource dynamics ended with {result.status}")
    sigma = tuple(pair[r - 1] for r in result.final_state)
    return _verified(
        instance,
        sigma,
        f"loop/sweep two-resource dynamics on Q={tuple(pair)} steps={len(result.trace)}",
    )


def _restrict_resources(instance: GameInstance, keep: Sequence[int]) -> GameInstance:
    tables = tuple(tuple(row[r - 1] for r in keep) for row in instance.payoffs)
    prefs = tuple(
        tuple(keep.index(r) + 1 for r in p if r in keep) for p in instance.preferences
    )
    return GameInstance(instance.graph, len(keep), tables, monotone=instance.monotone, preferences=prefs)


def construct_loop_ne(instance: GameInstance) -> ConstructionReport:
    """NE on a loop via the type-triple case analysis."""
    order = _require_cycle(instance)
    types = loop_type_triples(instance)
    for i, t in enumerate(types):
        if t.a == t.b:
            return _fixed_pivot(instance, order, types, i)
    for i, t in enumerate(types):
        if len({t.a, t.b, t.c}) == 3:
            return _distinct_triple(instance, order, types, i)
    return _paired_or_sweep(instance, order, types)


# -- regular bipartite -------------------------------------------------------


def bipartition(graph: InterferenceGraph) -> list[int] | None:
    """Side (0 or 1) of every vertex, or None if some component has an odd cycle."""
    side: list[int | None] = [None] * graph.player_count
    for part in _components(graph):
        root = part[0]
        side[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in graph.interferers[u]:
                if side[v] is None:
                    side[v] = 1 - side[u]
                    queue.append(v)
                elif side[v] == side[u]:
                    return None
    return side  # type: ignore[return-value]


def construct_bipartite_ne(instance: GameInstance) -> ConstructionReport:
    """NE on a d-regular bipartite graph with shared payoff functions.

    Resources are ranked by g(1); if the top one still pays at least the
    runner-up's g(1) with all d neighbours on it, everyone shares it,
    otherwise the two sides take the top two resources.
    """
    _require_undirected_monotone(instance)
    degrees = {len(k) for k in instance.graph.interferers}
    if len(degrees) != 1:
        raise NotApplicable("graph is not regular")
    side = bipartition(instance.graph)
    if side is None:
        raise NotApplicable("graph is not bipartite")
    if instance.is_user_specific():
        raise NotApplicable("payoffs are user-specific")
    d = degrees.pop()
    ranked = sorted(instance.resources(), key=lambda r: (-instance.g(0, r, 1), r))
    top = ranked[0]
    n = instance.player_count
    if len(ranked) == 1 or instance.g(0, top, d + 1) >= instance.g(0, ranked[1], 1):
        return _verified(instance, (top,) * n, f"bipartite/dominant d={d} resource={top}")
    second = ranked[1]
    profile = tuple(top if s == 0 else second for s in side)
    return _verified(instance, profile, f"bipartite/two-coloring d={d} resources=({top},{second})")


# -- dominant resource -------------------------------------------------------


def find_dominant_resource(instance: GameInstance) -> int | None:
    """First resource whose payoff at full congestion beats every other
    resource's uncongested payoff, for every player."""
    worst = instance.graph.max_degree + 1
    for r in instance.resources():
        if all(
            instance.g(i, r, worst) >= instance.g(i, other, 1)
            for i in range(instance.player_count)
            for other in instance.resources()
            if other != r
        ):
            return r
    return None


def construct_dominant_ne(instance: GameInstance) -> ConstructionReport:
    if not instance.monotone:
        raise NotApplicable("dominance needs non-increasing payoffs")
    r = find_dominant_resource(instance)
    if r is None:
        raise NotApplicable("no dominant resource")
    return _verified(instance, (r,) * instance.player_count, f"dominant resource={r}")


FAMILIES = {
    "tree": construct_tree_ne,
    "loop": construct_loop_ne,
    "bipartite": construct_bipartite_ne,
    "dominant": construct_dominant_ne,
}
