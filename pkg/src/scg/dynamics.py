"""Asynchronous improvement dynamics and exhaustive FIP scanning."""

from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Literal, Sequence, Union

import networkx as nx

from scg.model import GameInstance, Profile, check_cap

Mode = Literal["better", "best"]
Status = Literal["converged_to_NE", "step_limit", "cycle_detected"]
ScheduleEntry = Union[int, tuple[int, int]]

MODES = ("better", "best")


@dataclass(frozen=True)
class ImprovementStep:
    time: int
    mover: int
    from_resource: int
    to_resource: int
    payoff_before: Fraction
    payoff_after: Fraction

    @property
    def improving(self) -> bool:
        return self.payoff_after > self.payoff_before


@dataclass(frozen=True)
class ImprovementTrace:
    initial_state: Profile
    steps: tuple[ImprovementStep, ...] = ()

    def __len__(self) -> int:
        return len(self.steps)

    def states(self) -> Iterator[Profile]:
        """State before each step, then the final state."""
        state = list(self.initial_state)
        yield tuple(state)
        for step in self.steps:
            state[step.mover] = step.to_resource
            yield tuple(state)

    def state_before(self, t: int) -> Profile:
        """Profile at time ``t``- (just before step ``t``, 1-based)."""
        if not 1 <= t <= len(self.steps):
            raise IndexError(f"time {t} outside 1..{len(self.steps)}")
        state = list(self.initial_state)
        for step in self.steps[: t - 1]:
            state[step.mover] = step.to_resource
        return tuple(state)

    @property
    def final_state(self) -> Profile:
        *_, last = self.states()
        return last

    @property
    def is_closed(self) -> bool:
        return bool(self.steps) and self.final_state == self.initial_state

    def moves_of(self, player: int) -> list[int]:
        return [s.time for s in self.steps if s.mover == player]


@dataclass(frozen=True)
class DynamicsResult:
    trace: ImprovementTrace
    status: Status
    cycle_start: int | None = None

    @property
    def final_state(self) -> Profile:
        return self.trace.final_state

    @property
    def cycle(self) -> tuple[ImprovementStep, ...]:
        if self.cycle_start is None:
            return ()
        return self.trace.steps[self.cycle_start :]


def _fraction(ev, value: int) -> Fraction:
    return Fraction(value, ev.scale)


def make_step(instance: GameInstance, state: Sequence[int], time: int, player: int, resource: int) -> ImprovementStep:
    ev = instance._evaluator
    _, values = ev.options(state, player)
    return ImprovementStep(
        time=time,
        mover=player,
        from_resource=state[player],
        to_resource=resource,
        payoff_before=_fraction(ev, values[state[player]]),
        payoff_after=_fraction(ev, values[resource]),
    )


def trace_from_moves(
    instance: GameInstance, start: Sequence[int], moves: Sequence[tuple[int, int]]
) -> ImprovementTrace:
    """Record an arbitrary move sequence, improving or not."""
    initial = instance.check_profile(start)
    state = list(initial)
    steps = []
    for t, (player, resource) in enumerate(moves, start=1):
        instance.check_player(player)
        instance.check_resource(resource)
        if state[player] == resource:
            raise ValueError(f"step {t}: player {player} is already on resource {resource}")
        steps.append(make_step(instance, state, t, player, resource))
        state[player] = resource
    return ImprovementTrace(initial, tuple(steps))


def check_trace(instance: GameInstance, trace: ImprovementTrace, strict: bool = True) -> Profile:
    """Replay ``trace`` and confirm every recorded value.

    With ``strict`` every step must also be a strict improvement. Returns
    the final profile.
    """
    state = list(instance.check_profile(trace.initial_state))
    for expected_t, step in enumerate(trace.steps, start=1):
        if step.time != expected_t:
            raise ValueError(f"step {expected_t}: recorded time {step.time}")
        if state[step.mover] != step.from_resource:
            raise ValueError(
                f"step {step.time}: player {step.mover} is on {state[step.mover]}, "
                f"not {step.from_resource}"
            )
        replayed = make_step(instance, state, step.time, step.mover, step.to_resource)
        if replayed != step:
            raise ValueError(f"step {step.time}: recorded payoffs do not replay")
        if strict and not step.improving:
            raise ValueError(
                f"step {step.time}: player {step.mover} does not strictly improve "
                f"({step.payoff_before} -> {step.payoff_after})"
            )
        state[step.mover] = step.to_resource
    return tuple(state)


def run_dynamics(
    instance: GameInstance,
    start: Sequence[int],
    scheduler: str | Sequence[ScheduleEntry] = "round_robin",
    mode: Mode = "better",
    seed: int = 0,
    max_steps: int = 10_000,
) -> DynamicsResult:
    """Run asynchronous improvement dynamics from ``start``.

    ``scheduler`` is ``"round_robin"``, ``"random"`` or an explicit sequence.
    Explicit entries are either a player index (the player moves per
    ``mode`` if it can improve, otherwise the entry is skipped) or a
    ``(player, resource)`` pair, which must be a strict improvement.
    The run stops with ``cycle_detected`` as soon as a profile recurs.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if max_steps < 0:
        raise ValueError("max_steps must be non-negative")
    ev = instance._evaluator
    rng = random.Random(seed)
    n = instance.player_count
    initial = instance.check_profile(start)
    state = list(initial)
    visited = {tuple(state): 0}
    steps: list[ImprovementStep] = []

    def target_for(player: int, options: list[int]) -> int:
        if mode == "best":
            return ev.best(state, player)
        return rng.choice(options)

    if isinstance(scheduler, str):
        if scheduler not in ("round_robin", "random"):
            raise ValueError(f"unknown scheduler {scheduler!r}")
        explicit = None
    else:
        explicit = iter(list(scheduler))
    pointer = 0

    while True:
        if len(steps) >= max_steps:
            break
        if explicit is not None:
            entry = next(explicit, None)
            if entry is None:
                break
            if isinstance(entry, int):
                player, forced = entry, None
            else:
                player, forced = int(entry[0]), int(entry[1])
            instance.check_player(player)
            options = ev.improvements(state, player)
            if forced is not None:
                if forced not in options:
                    raise ValueError(
                        f"schedule entry {len(steps) + 1}: moving player {player} to "
                        f"{forced} is not a strict improvement"
                    )
                resource = forced
            elif options:
                resource = target_for(player, options)
            else:
                continue
        else:
            candidates = [i for i in range(n) if ev.improvements(state, i)]
            if not candidates:
                return DynamicsResult(ImprovementTrace(initial, tuple(steps)), "converged_to_NE")
            if scheduler == "random":
                player = rng.choice(candidates)
            else:
                player = next(i for i in (*range(pointer, n), *range(pointer)) if i in candidates)
                pointer = (player + 1) % n
            resource = target_for(player, ev.improvements(state, player))

        steps.append(make_step(instance, state, len(steps) + 1, player, resource))
        state[player] = resource
        key = tuple(state)
        if key in visited:
            trace = ImprovementTrace(initial, tuple(steps))
            return DynamicsResult(trace, "cycle_detected", cycle_start=visited[key])
        visited[key] = len(steps)

    trace = ImprovementTrace(initial, tuple(steps))
    status: Status = "converged_to_NE" if ev.is_nash(state) else "step_limit"
    return DynamicsResult(trace, status)


@dataclass(frozen=True)
class FipVerdict:
    acyclic: bool
    states_explored: int
    witness_cycle: tuple[ImprovementStep, ...] = ()
    witness_start: Profile | None = None


class _ProfileSpace:
    """All profiles that vary only ``free`` players around ``base``."""

    def __init__(self, instance: GameInstance, free: Sequence[int] | None, base: Sequence[int] | None):
        n = instance.player_count
        self.instance = instance
        self.free = list(range(n)) if free is None else sorted(set(free))
        for i in self.free:
            instance.check_player(i)
        if base is None:
            if len(self.free) != n:
                raise ValueError("a base profile is required when some players are held fixed")
            base = (1,) * n
        self.base = instance.check_profile(base)
        big_r = instance.resource_count
        k = len(self.free)
        self.weights = [big_r ** (k - 1 - pos) for pos in range(k)]
        self.size = big_r**k

    def profiles(self) -> Iterator[Profile]:
        state = list(self.base)
        for combo in itertools.product(self.instance.resources(), repeat=len(self.free)):
            for i, r in zip(self.free, combo):
                state[i] = r
            yield tuple(state)


def improvement_edges(
    instance: GameInstance,
    mode: Mode = "better",
    free_players: Sequence[int] | None = None,
    base: Sequence[int] | None = None,
) -> Iterator[tuple[Profile, int, int]]:
    """Yield ``(profile, player, new_resource)`` for every improvement edge.

    ``better`` yields every strictly improving deviation; ``best`` yields
    only the tie-broken best response, when it strictly improves.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    space = _ProfileSpace(instance, free_players, base)
    ev = instance._evaluator
    for profile in space.profiles():
        for i in space.free:
            cur_val, values = ev.options(profile, i)
            if mode == "better":
                for r in ev.resources:
                    if values[r] > cur_val:
                        yield profile, i, r
            else:
                r = ev.best(profile, i)
                if values[r] > cur_val:
                    yield profile, i, r


def fip_scan(
    instance: GameInstance,
    mode: Mode = "better",
    free_players: Sequence[int] | None = None,
    base: Sequence[int] | None = None,
    cap: int | None = None,
) -> FipVerdict:
    """Test the improvement digraph over all profiles for a directed cycle.

    When some players are held fixed (``free_players`` with ``base``), the
    scan covers the sub-space in which only the free players move. A cycle
    found there is a cycle of the full game.
    """
    space = _ProfileSpace(instance, free_players, base)
    check_cap(instance.resource_count, len(space.free), cap)
    ev = instance._evaluator
    pos = {p: idx for idx, p in enumerate(space.free)}

    succ: list[list[int]] = [[] for _ in range(space.size)]
    indeg = [0] * space.size
    labels: dict[tuple[int, int], tuple[int, int]] = {}
    profiles: list[Profile] = []
    for u, profile in enumerate(space.profiles()):
        profiles.append(profile)
        for i in space.free:
            cur_val, values = ev.options(profile, i)
            if mode == "best":
                best = ev.best(profile, i)
                targets = [best] if values[best] > cur_val else []
            else:
                targets = [r for r in ev.resources if values[r] > cur_val]
            for r in targets:
                v = u + (r - profile[i]) * space.weights[pos[i]]
                succ[u].append(v)
                indeg[v] += 1
                labels[(u, v)] = (i, r)

    # Kahn's algorithm; anything left over lies on or behind a cycle
    queue = deque(u for u in range(space.size) if indeg[u] == 0)
    removed = 0
    while queue:
        u = queue.popleft()
        removed += 1
        for v in succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    if removed == space.size:
        return FipVerdict(True, space.size)

    remaining = [u for u in range(space.size) if indeg[u] > 0]
    graph = nx.DiGraph()
    graph.add_nodes_from(remaining)
    keep = set(remaining)
    graph.add_edges_from((u, v) for u in remaining for v in succ[u] if v in keep)

    best_cycle: list[int] | None = None
    for component in nx.strongly_connected_components(graph):
        if len(component) < 2:
            continue
        root = min(component)
        cycle = _shortest_cycle_through(root, succ, component)
        if best_cycle is None or (len(cycle), cycle[0]) < (len(best_cycle), best_cycle[0]):
            best_cycle = cycle
    assert best_cycle is not None, "a non-trivial SCC must exist when Kahn's algorithm stalls"

    steps = []
    nodes = best_cycle + [best_cycle[0]]
    for t, (u, v) in enumerate(zip(nodes, nodes[1:]), start=1):
        player, resource = labels[(u, v)]
        steps.append(make_step(instance, profiles[u], t, player, resource))
    return FipVerdict(False, space.size, tuple(steps), profiles[best_cycle[0]])


def _shortest_cycle_through(root: int, succ: list[list[int]], component: set[int]) -> list[int]:
    parent = {root: None}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in sorted(succ[u]):
            if v not in component:
                continue
            if v == root:
                path = [u]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return path[::-1]
            if v not in parent:
                parent[v] = u
                queue.append(v)
    raise AssertionError("root of a strongly connected component must lie on a cycle")


@dataclass(frozen=True)
class ReverseChangeSets:
    """Neighbours of a player classified over a reverse-change pair.

    ``ss``: same colour as the player at both change times; ``oo``: opposite
    at both; ``so``/``os``: same then opposite, opposite then same.
    """

    ss: int
    oo: int
    so: int
    os: int
    members: tuple[tuple[int, str], ...] = ()

    def label_of(self, neighbor: int) -> str | None:
        return dict(self.members).get(neighbor)


def _require_two_resources(instance: GameInstance) -> None:
    if instance.resource_count != 2:
        raise ValueError("reverse-change analysis needs exactly two resources")
    if instance.graph.directed:
        raise ValueError("reverse-change analysis needs an undirected graph")


def reverse_change_sets(
    instance: GameInstance, trace: ImprovementTrace, player: int, t: int, t_prime: int
) -> ReverseChangeSets:
    """Classify ``player``'s neighbours for its changes at ``t`` and ``t_prime``.

    The two steps must be opposite switches by ``player``. ``t_prime`` may
    precede ``t`` (the wrap-around pair of a closed loop).
    """
    _require_two_resources(instance)
    if t == t_prime:
        raise ValueError("a reverse-change pair needs two distinct times")
    first, second = trace.steps[t - 1], trace.steps[t_prime - 1]
    for step, when in ((first, t), (second, t_prime)):
        if step.mover != player:
            raise ValueError(f"step {when} is made by player {step.mover}, not {player}")
    if not (first.from_resource == second.to_resource and first.to_resource == second.from_resource):
        raise ValueError(f"steps {t} and {t_prime} are not reverse changes")

    before_t = trace.state_before(t)
    before_t_prime = trace.state_before(t_prime)
    counts = {"SS": 0, "OO": 0, "SO": 0, "OS": 0}
    members = []
    for k in instance.graph.interferers[player]:
        first_tag = "S" if before_t[k] == before_t[player] else "O"
        second_tag = "S" if before_t_prime[k] == before_t_prime[player] else "O"
        label = first_tag + second_tag
        counts[label] += 1
        members.append((k, label))
    return ReverseChangeSets(counts["SS"], counts["OO"], counts["SO"], counts["OS"], tuple(members))


def reverse_change_pairs(trace: ImprovementTrace, player: int, circular: bool = False) -> list[tuple[int, int]]:
    """Successive change times of ``player``; with ``circular`` on a closed
    loop, the last change is paired with the first."""
    times = trace.moves_of(player)
    pairs = list(zip(times, times[1:]))
    if circular and len(times) >= 2:
        if not trace.is_closed:
            raise ValueError("circular pairing needs a closed loop")
        pairs.append((times[-1], times[0]))
    return pairs


def lemma2_audit(instance: GameInstance, trace: ImprovementTrace, player_a: int, player_b: int) -> tuple[int, int]:
    """Count how often two players land in each other's SS and OO sets.

    Runs over every successive (circular) change pair of both players in a
    closed loop. Returns ``(ss_appearances, oo_appearances)``; the trace
    need not be improvement-valid.
    """
    _require_two_resources(instance)
    if not trace.is_closed:
        raise ValueError("trace must be a closed loop (final state equal to initial state)")
    if player_a == player_b:
        raise ValueError("two distinct players are required")
    if player_b not in instance.graph.interferers[player_a]:
        return 0, 0
    lhs = rhs = 0
    for x, y in ((player_a, player_b), (player_b, player_a)):
        for t, t_prime in reverse_change_pairs(trace, x, circular=True):
            label = reverse_change_sets(instance, trace, x, t, t_prime).label_of(y)
            if label == "SS":
                lhs += 1
            elif label == "OO":
                rhs += 1
    return lhs, rhs
