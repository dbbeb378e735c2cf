"""Built-in instances showing where the positive results stop.

* ``three_color_cycle``: an improvement loop with three resources.
* ``non_monotonic``: no pure NE once payoffs may increase with load.
* ``directed_no_ne``: no pure NE on a directed interference graph.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from scg.dynamics import check_trace, fip_scan, run_dynamics
from scg.model import (
    GameInstance,
    InterferenceGraph,
    Profile,
    congestion,
    enumerate_nash,
    payoffs,
)


class BuildError(RuntimeError):
    """A canonical instance failed its own consistency check."""


@dataclass(frozen=True)
class Expectation:
    no_pure_ne: bool = False
    initial_profile: Profile | None = None
    schedule: tuple[tuple[int, int], ...] = ()


@dataclass(frozen=True)
class CanonicalInstance:
    name: str
    instance: GameInstance
    expected: Expectation
    notes: tuple[str, ...] = field(default=())


def chain_values(chain: Sequence[tuple[int, int]]) -> dict[tuple[int, int], int]:
    """Assign len(chain), ..., 1 to the ``(resource, k)`` terms of a strict chain."""
    if len(set(chain)) != len(chain):
        raise BuildError("chain repeats a term")
    return {term: len(chain) - pos for pos, term in enumerate(chain)}


def fill_table(known: dict[int, int], length: int) -> tuple[int, ...]:
    """Non-increasing table through the ``known`` points ``{k: g(k)}``.

    Positions before the first known point copy it; gaps and the tail
    repeat the last known value to their left.
    """
    points = sorted(known)
    values = []
    for k in range(1, length + 1):
        left = [p for p in points if p <= k]
        values.append(known[left[-1]] if left else known[points[0]])
    if any(a < b for a, b in zip(values, values[1:])):
        raise BuildError(f"known points {known} are not non-increasing")
    return tuple(values)


def chain_holds(instance: GameInstance, player: int, chain: Sequence[tuple[int, int]]) -> bool:
    return all(
        instance.g(player, r1, k1) > instance.g(player, r2, k2)
        for (r1, k1), (r2, k2) in zip(chain, chain[1:])
    )


# -- three colours -----------------------------------------------------------

RED, PURPLE, BLUE = 1, 2, 3
COLOR_NAMES = {RED: "r", PURPLE: "p", BLUE: "b"}
A, B, C, D = 0, 1, 2, 3
CORE_NAMES = "ABCD"

# auxiliary neighbours of each core node, per colour
AUX_GROUP_SIZE = {A: 5, B: 3, C: 7, D: 1}
CORE_EDGES = ((A, C), (B, C), (D, C))

THREE_COLOR_START = (BLUE, PURPLE, PURPLE, BLUE)
THREE_COLOR_SCHEDULE = (
    (A, RED),
    (B, RED),
    (D, RED),
    (C, RED),
    (A, PURPLE),
    (D, BLUE),
    (B, BLUE),
    (C, BLUE),
    (A, BLUE),
    (C, PURPLE),
    (B, PURPLE),
)

# The improvement each step relies on: (step, mover, (to, k_to), (from, k_from)),
# with k written as (group colour, offset) meaning g(group + offset).
THREE_COLOR_STEP_ARGUMENTS = (
    (1, A, (RED, 1), (BLUE, 1)),
    (2, B, (RED, 1), (PURPLE, 2)),
    (3, D, (RED, 1), (BLUE, 1)),
    (4, C, (RED, 4), (PURPLE, 1)),
    (5, A, (PURPLE, 1), (RED, 2)),
    (6, D, (BLUE, 1), (RED, 2)),
    (7, B, (BLUE, 1), (RED, 2)),
    (8, C, (BLUE, 3), (RED, 1)),
    (9, A, (BLUE, 2), (PURPLE, 1)),
    (10, C, (PURPLE, 1), (BLUE, 4)),
    (11, B, (PURPLE, 2), (BLUE, 1)),
)

# The 17 terms in decreasing order once group sizes are substituted.
THREE_COLOR_CHAIN = (
    (RED, 2), (BLUE, 2), (RED, 3), (RED, 4), (PURPLE, 5), (BLUE, 4),
    (RED, 5), (RED, 6), (BLUE, 6), (BLUE, 7), (PURPLE, 6), (RED, 7),
    (BLUE, 10), (RED, 8), (RED, 11), (PURPLE, 8), (BLUE, 11),
)  # fmt: skip


def build_three_color_cycle(resources: int = 3) -> CanonicalInstance:
    """Four core players A-B-C-D (a star on C) plus frozen auxiliary groups.

    Each core node X has ``AUX_GROUP_SIZE[X]`` private neighbours parked on
    each of red, purple and blue; those neighbours strictly prefer their
    colour whatever happens. Extra resources (``resources > 3``) pay zero
    to everyone and leave the loop intact.
    """
    if resources < 3:
        raise ValueError("the loop needs at least three resources")
    edges = list(CORE_EDGES)
    aux_color = []
    next_id = 4
    for core in (A, B, C, D):
        for color in (RED, PURPLE, BLUE):
            for _ in range(AUX_GROUP_SIZE[core]):
                edges.append((core, next_id))
                aux_color.append(color)
                next_id += 1
    graph = InterferenceGraph.undirected(next_id, edges)

    values = chain_values(THREE_COLOR_CHAIN)
    width = graph.max_degree + 1
    shared = []
    for color in (RED, PURPLE, BLUE):
        known = {k: v for (r, k), v in values.items() if r == color}
        shared.append(fill_table(known, width))
    zero = (0,) * width
    shared += [zero] * (resources - 3)

    tables = [tuple(shared) for _ in range(4)]
    for color in aux_color:
        tables.append(tuple((1, 1) if r == color else (0, 0) for r in range(1, resources + 1)))
    instance = GameInstance(graph, resources, tuple(tuple(t) for t in tables))

    start = THREE_COLOR_START + tuple(aux_color)
    canonical = CanonicalInstance(
        "three_color_cycle",
        instance,
        Expectation(initial_profile=start, schedule=THREE_COLOR_SCHEDULE),
        notes=("auxiliary groups are disjoint",),
    )
    problems = certify_three_color_arguments(canonical)
    if problems:
        raise BuildError("; ".join(problems))
    if not all(chain_holds(instance, core, THREE_COLOR_CHAIN) for core in (A, B, C, D)):
        raise BuildError("payoff tables do not satisfy the 17-term chain")
    return canonical


def certify_three_color_arguments(canonical: CanonicalInstance) -> list[str]:
    """Check that every scheduled move sees exactly the congestion its
    inequality assumes, given the star-plus-auxiliaries topology."""
    instance = canonical.instance
    state = list(canonical.expected.initial_profile)
    problems = []
    for (step, mover, (to, off_to), (frm, off_from)), (s_mover, s_to) in zip(
        THREE_COLOR_STEP_ARGUMENTS, canonical.expected.schedule
    ):
        if (mover, to) != (s_mover, s_to) or state[mover] != frm:
            problems.append(f"step {step}: schedule disagrees with the inequality list")
        group = AUX_GROUP_SIZE[mover]
        for r, offset in ((to, off_to), (frm, off_from)):
            seen = congestion(instance, state, mover, r) + 1
            if seen != group + offset:
                problems.append(
                    f"step {step}: {CORE_NAMES[mover]} sees g_{COLOR_NAMES[r]}({seen}), "
                    f"inequality uses g_{COLOR_NAMES[r]}({group + offset})"
                )
        state[mover] = to
    return problems


# -- non-monotonic -----------------------------------------------------------

NON_MONOTONIC_TABLES = ((2, 5, 3), (4, 6, 1))

# rows: player 3's resource; columns: (player 1, player 2) resources
NON_MONOTONIC_MATRIX = {
    1: {(1, 1): (5, 5, 3), (1, 2): (5, 4, 5), (2, 1): (4, 5, 5), (2, 2): (4, 4, 2)},
    2: {(1, 1): (2, 2, 4), (1, 2): (2, 6, 6), (2, 1): (6, 2, 6), (2, 2): (6, 6, 1)},
}


def non_monotonic_cells() -> dict[Profile, tuple[int, int, int]]:
    """The game matrix keyed by full profile (player 1, player 2, player 3)."""
    return {(s1, s2, s3): cell for s3, row in NON_MONOTONIC_MATRIX.items() for (s1, s2), cell in row.items()}


def _shared_game(graph: InterferenceGraph, tables, monotone: bool) -> GameInstance:
    row = tuple(tuple(Fraction(v) for v in t) for t in tables)
    return GameInstance(graph, len(tables), (row,) * graph.player_count, monotone=monotone)


def consistent_three_player_graphs() -> list[frozenset[tuple[int, int]]]:
    """Undirected 3-node graphs under which the shared tables reproduce
    every cell of the game matrix."""
    pairs = [(0, 1), (0, 2), (1, 2)]
    cells = non_monotonic_cells()
    found = []
    for mask in range(8):
        chosen = [p for bit, p in enumerate(pairs) if mask >> bit & 1]
        graph = InterferenceGraph.undirected(3, chosen)
        tables = tuple(t[: graph.max_degree + 1] for t in NON_MONOTONIC_TABLES)
        padded = tuple(t + (t[-1],) * (3 - len(t)) for t in tables)
        game = _shared_game(graph, padded, monotone=False)
        if all(payoffs(game, p) == cell for p, cell in cells.items()):
            found.append(frozenset(chosen))
    return found


def build_non_monotonic() -> CanonicalInstance:
    """Three players on a path with player 3 (index 2) in the middle."""
    graph = InterferenceGraph.undirected(3, [(0, 2), (1, 2)])
    instance = _shared_game(graph, NON_MONOTONIC_TABLES, monotone=False)
    mismatched = [p for p, cell in non_monotonic_cells().items() if payoffs(instance, p) != cell]
    if mismatched:
        raise BuildError(f"game matrix cells not reproduced: {mismatched}")
    return CanonicalInstance("non_monotonic", instance, Expectation(no_pure_ne=True))


# -- directed ----------------------------------------------------------------

DIRECTED_CHAIN = (
    (3, 1), (2, 1), (2, 2), (3, 2), (1, 1), (1, 2),
    (2, 3), (1, 3), (2, 4), (1, 4), (3, 3), (3, 4),
)  # fmt: skip


def directed_tables() -> tuple[tuple[int, ...], ...]:
    values = chain_values(DIRECTED_CHAIN)
    return tuple(tuple(values[(r, k)] for k in range(1, 5)) for r in (1, 2, 3))


def _directed_game(arcs: Sequence[tuple[int, int]]) -> GameInstance:
    return _shared_game(InterferenceGraph.directed_from(4, arcs), directed_tables(), monotone=True)


def _is_symmetric(arcs) -> bool:
    arcs = set(arcs)
    return all((j, i) in arcs for i, j in arcs)


def _weakly_connected(arcs, n: int = 4) -> bool:
    reach, frontier = {0}, [0]
    while frontier:
        u = frontier.pop()
        for i, j in arcs:
            for a, b in ((i, j), (j, i)):
                if a == u and b not in reach:
                    reach.add(b)
                    frontier.append(b)
    return len(reach) == n


def search_directed_witness() -> tuple[tuple[int, int], ...] | None:
    """First weakly connected, genuinely directed 4-node graph with no pure NE.

    Candidates are visited by arc count, then lexicographically by arc list.
    """
    all_arcs = [(i, j) for i in range(4) for j in range(4) if i != j]
    for size in range(1, len(all_arcs) + 1):
        for arcs in itertools.combinations(all_arcs, size):
            if _is_symmetric(arcs) or not _weakly_connected(arcs):
                continue
            game = _directed_game(arcs)
            ev = game._evaluator
            if not any(ev.is_nash(p) for p in game.profiles()):
                return arcs
    return None


def build_directed_no_ne() -> CanonicalInstance:
    arcs = search_directed_witness()
    if arcs is None:
        raise BuildError("no directed 4-node graph admits zero pure NE under the chain payoffs")
    instance = _directed_game(arcs)
    if not all(chain_holds(instance, i, DIRECTED_CHAIN) for i in range(4)):
        raise BuildError("payoff tables do not satisfy the 12-term chain")
    return CanonicalInstance(
        "directed_no_ne",
        instance,
        Expectation(no_pure_ne=True),
        notes=(f"arcs (i interferes with j): {list(arcs)}",),
    )


# -- verification ------------------------------------------------------------


@dataclass(frozen=True)
class VerificationReport:
    name: str
    passed: bool
    lines: tuple[str, ...]

    def __str__(self) -> str:
        head = f"{self.name}: {'PASS' if self.passed else 'FAIL'}"
        return "\n".join((head, *("  " + line for line in self.lines)))


def verify_counterexample(canonical: CanonicalInstance) -> VerificationReport:
    instance, expected = canonical.instance, canonical.expected
    lines = list(canonical.notes)
    passed = True
    if expected.schedule:
        try:
            result = run_dynamics(
                instance,
                expected.initial_profile,
                scheduler=expected.schedule,
                max_steps=len(expected.schedule),
            )
            check_trace(instance, result.trace, strict=True)
        except ValueError as exc:
            return VerificationReport(canonical.name, False, (*lines, f"replay failed: {exc}"))
        improved = sum(step.improving for step in result.trace.steps)
        closed = result.trace.final_state == tuple(expected.initial_profile)
        lines.append(f"{improved} verified improvements of {len(expected.schedule)} scheduled")
        lines.append(f"status {result.status}, period {len(result.cycle)}")
        lines.append(f"final state {'equals' if closed else 'differs from'} initial state")
        passed &= improved == len(expected.schedule) and closed and result.status == "cycle_detected"
    if expected.no_pure_ne:
        found = enumerate_nash(instance)
        total = instance.resource_count**instance.player_count
        lines.append(f"{len(found)} NE / {total} profiles")
        passed &= not found
    return VerificationReport(canonical.name, passed, tuple(lines))


def three_color_fip_scan(canonical: CanonicalInstance | None = None, mode: str = "better"):
    """FIP scan over the four core players with the auxiliaries parked."""
    canonical = canonical or build_three_color_cycle()
    return fip_scan(
        canonical.instance,
        mode=mode,
        free_players=(A, B, C, D),
        base=canonical.expected.initial_profile,
    )


BUILDERS = {
    "three-color": build_three_color_cycle,
    "non-monotonic": build_non_monotonic,
    "directed": build_directed_no_ne,
}
