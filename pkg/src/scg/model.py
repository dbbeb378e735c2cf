"""Games on interference graphs: payoffs, best responses and Nash checks.

Players are 0-indexed; resources are 1-indexed. Payoffs are exact
``Fraction`` values and a payoff table ``g`` for a (player, resource) pair
is read as ``g(k)`` = ``table[k - 1]``, constant beyond the table's end.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

DEFAULT_PROFILE_CAP = 10**7

Profile = tuple[int, ...]


class ResourceLimitError(RuntimeError):
    """Raised when an exhaustive scan would exceed the profile cap."""


def profile_cap() -> int:
    """Brute-force cap on R**N, overridable through ``SCG_PROFILE_CAP``."""
    raw = os.environ.get("SCG_PROFILE_CAP")
    if raw is None:
        return DEFAULT_PROFILE_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"SCG_PROFILE_CAP must be an integer, got {raw!r}") from None
    if cap <= 0:
        raise ValueError("SCG_PROFILE_CAP must be positive")
    return cap


def check_cap(resources: int, players: int, cap: int | None = None) -> int:
    size = resources**players
    limit = profile_cap() if cap is None else cap
    if size > limit:
        raise ResourceLimitError(
            f"{resources}^{players} = {size} profiles exceeds the cap of {limit}"
        )
    return size


@dataclass(frozen=True)
class InterferenceGraph:
    """Interference relation between players.

    ``edges`` holds ordered pairs ``(i, j)`` meaning *i interferes with j*.
    Undirected graphs store both orientations.
    """

    player_count: int
    edges: frozenset[tuple[int, int]]
    directed: bool = False

    def __post_init__(self) -> None:
        if self.player_count < 1:
            raise ValueError("player_count must be positive")
        edges = frozenset((int(i), int(j)) for i, j in self.edges)
        for i, j in edges:
            if i == j:
                raise ValueError(f"self-loop on player {i}")
            if not (0 <= i < self.player_count and 0 <= j < self.player_count):
                raise ValueError(f"edge ({i}, {j}) out of range for {self.player_count} players")
        if not self.directed:
            missing = [(i, j) for i, j in edges if (j, i) not in edges]
            if missing:
                raise ValueError(f"undirected graph is missing reverse of {missing[0]}")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def undirected(cls, n: int, pairs: Iterable[tuple[int, int]]) -> InterferenceGraph:
        both = set()
        for i, j in pairs:
            both.add((i, j))
            both.add((j, i))
        return cls(n, frozenset(both), directed=False)

    @classmethod
    def directed_from(cls, n: int, arcs: Iterable[tuple[int, int]]) -> InterferenceGraph:
        return cls(n, frozenset(arcs), directed=True)

    @cached_property
    def interferers(self) -> tuple[tuple[int, ...], ...]:
        """Interference set of each player (in-neighbours)."""
        ins: list[list[int]] = [[] for _ in range(self.player_count)]
        for i, j in self.edges:
            ins[j].append(i)
        return tuple(tuple(sorted(x)) for x in ins)

    def degree(self, player: int) -> int:
        return len(self.interferers[player])

    @property
    def max_degree(self) -> int:
        return max(len(k) for k in self.interferers)

    def undirected_pairs(self) -> tuple[tuple[int, int], ...]:
        """Edges as sorted pairs ``i < j`` (undirected graphs only)."""
        if self.directed:
            raise ValueError("graph is directed")
        return self._pairs

    @cached_property
    def _pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted((i, j) for i, j in self.edges if i < j))

    def is_complete(self) -> bool:
        n = self.player_count
        return len(self.edges) == n * (n - 1)


def _as_fraction(value) -> Fraction:
    if isinstance(value, float):
        raise TypeError("payoffs must be exact (int, Fraction or 'p/q' string), not float")
    return Fraction(value)


@dataclass(frozen=True)
class GameInstance:
    """A spatial congestion game with singleton strategies.

    ``payoffs[i][r - 1]`` is player *i*'s table for resource *r*; entry
    ``k - 1`` is the payoff with ``k`` users (itself included) on *r* among
    its interference set. ``preferences[i]`` lists resources from most to
    least preferred and breaks best-response ties.
    """

    graph: InterferenceGraph
    resource_count: int
    payoffs: tuple[tuple[tuple[Fraction, ...], ...], ...]
    monotone: bool = True
    preferences: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self) -> None:
        n, big_r = self.graph.player_count, self.resource_count
        if big_r < 1:
            raise ValueError("resource_count must be positive")
        if len(self.payoffs) != n:
            raise ValueError(f"expected payoff tables for {n} players, got {len(self.payoffs)}")
        tables = []
        for i, per_player in enumerate(self.payoffs):
            if len(per_player) != big_r:
                raise ValueError(f"player {i}: expected {big_r} resource tables, got {len(per_player)}")
            row = []
            for r, seq in enumerate(per_player, start=1):
                values = tuple(_as_fraction(v) for v in seq)
                need = self.graph.degree(i) + 1
                if len(values) < need:
                    raise ValueError(
                        f"player {i} resource {r}: table has {len(values)} entries, needs {need}"
                    )
                if self.monotone and any(a < b for a, b in zip(values, values[1:])):
                    raise ValueError(f"player {i} resource {r}: table is not non-increasing")
                row.append(values)
            tables.append(tuple(row))
        object.__setattr__(self, "payoffs", tuple(tables))

        if self.preferences is None:
            prefs = tuple(tuple(range(1, big_r + 1)) for _ in range(n))
        else:
            prefs = tuple(tuple(int(x) for x in p) for p in self.preferences)
            if len(prefs) != n:
                raise ValueError("one preference order per player is required")
            for i, p in enumerate(prefs):
                if sorted(p) != list(range(1, big_r + 1)):
                    raise ValueError(f"player {i}: preference order must permute 1..{big_r}")
        object.__setattr__(self, "preferences", prefs)

    @property
    def player_count(self) -> int:
        return self.graph.player_count

    def g(self, player: int, resource: int, k: int) -> Fraction:
        """Payoff to ``player`` on ``resource`` with ``k`` users (k >= 1)."""
        table = self.payoffs[player][resource - 1]
        return table[min(k, len(table)) - 1]

    def resources(self) -> range:
        return range(1, self.resource_count + 1)

    def profiles(self) -> Iterator[Profile]:
        return itertools.product(self.resources(), repeat=self.player_count)

    def check_profile(self, profile: Sequence[int]) -> Profile:
        profile = tuple(profile)
        if len(profile) != self.player_count:
            raise ValueError(f"profile has {len(profile)} entries, expected {self.player_count}")
        for i, r in enumerate(profile):
            if not 1 <= r <= self.resource_count:
                raise ValueError(f"player {i}: resource {r} out of range 1..{self.resource_count}")
        return profile

    def check_player(self, player: int) -> int:
        if not 0 <= player < self.player_count:
            raise IndexError(f"player {player} out of range 0..{self.player_count - 1}")
        return player

    def check_resource(self, resource: int) -> int:
        if not 1 <= resource <= self.resource_count:
            raise IndexError(f"resource {resource} out of range 1..{self.resource_count}")
        return resource

    def is_user_specific(self) -> bool:
        """False when every player has the same payoff function per resource."""
        return self._user_specific

    def has_identical_resources(self) -> bool:
        """True when each player's tables coincide across resources."""
        return self._identical_resources

    @cached_property
    def _user_specific(self) -> bool:
        depth = self.graph.max_degree + 1
        for r in self.resources():
            first = [self.g(0, r, k) for k in range(1, depth + 1)]
            for i in range(1, self.player_count):
                if [self.g(i, r, k) for k in range(1, depth + 1)] != first:
                    return True
        return False

    @cached_property
    def _identical_resources(self) -> bool:
        for i in range(self.player_count):
            depth = max(len(t) for t in self.payoffs[i])
            first = [self.g(i, 1, k) for k in range(1, depth + 1)]
            for r in range(2, self.resource_count + 1):
                if [self.g(i, r, k) for k in range(1, depth + 1)] != first:
                    return False
        return True

    def replace_tables(self, changes: dict[tuple[int, int], Sequence[Fraction]]) -> GameInstance:
        """Copy with some (player, resource) tables swapped out."""
        tables = [list(row) for row in self.payoffs]
        for (i, r), seq in changes.items():
            tables[i][r - 1] = tuple(seq)
        return GameInstance(
            self.graph,
            self.resource_count,
            tuple(tuple(row) for row in tables),
            monotone=self.monotone,
            preferences=self.preferences,
        )

    @cached_property
    def _evaluator(self) -> _IntEvaluator:
        return _IntEvaluator(self)


class _IntEvaluator:
    """Payoffs rescaled to integers by a common denominator.

    Ordering is preserved exactly; used by the exhaustive scans.
    """

    def __init__(self, game: GameInstance) -> None:
        denom = 1
        for row in game.payoffs:
            for seq in row:
                for v in seq:
                    denom = math.lcm(denom, v.denominator)
        self.scale = denom
        self.neighbors = game.graph.interferers
        self.resources = list(game.resources())
        self.prefs = game.preferences
        # tables[i][r] indexed by congestion count n (payoff g(n + 1)), r 1-based
        self.tables: list[list[list[int]]] = []
        for i, row in enumerate(game.payoffs):
            width = len(self.neighbors[i]) + 1
            per = [[]]
            for r in self.resources:
                per.append([int(game.g(i, r, n + 1) * denom) for n in range(width)])
            self.tables.append(per)

    def counts(self, profile: Sequence[int], player: int) -> list[int]:
        c = [0] * (len(self.resources) + 1)
        for j in self.neighbors[player]:
            c[profile[j]] += 1
        return c

    def payoff(self, profile: Sequence[int], player: int) -> int:
        r = profile[player]
        n = 0
        for j in self.neighbors[player]:
            if profile[j] == r:
                n += 1
        return self.tables[player][r][n]

    def options(self, profile: Sequence[int], player: int) -> tuple[int, list[int]]:
        """Current payoff and the payoff of every resource (index 0 unused)."""
        c = self.counts(profile, player)
        cur = profile[player]
        tab = self.tables[player]
        values = [0] * len(c)
        for r in self.resources:
            values[r] = tab[r][c[r]]
        return values[cur], values

    def improvements(self, profile: Sequence[int], player: int) -> list[int]:
        cur_val, values = self.options(profile, player)
        return [r for r in self.resources if values[r] > cur_val]

    def best(self, profile: Sequence[int], player: int) -> int:
        _, values = self.options(profile, player)
        top = max(values[r] for r in self.resources)
        for r in self.prefs[player]:
            if values[r] == top:
                return r
        raise AssertionError("unreachable")

    def is_nash(self, profile: Sequence[int]) -> bool:
        for i in range(len(profile)):
            cur_val, values = self.options(profile, i)
            for r in self.resources:
                if values[r] > cur_val:
                    return False
        return True


def congestion(instance: GameInstance, profile: Sequence[int], player: int, resource: int) -> int:
    """Number of ``player``'s interferers on ``resource`` under ``profile``."""
    profile = instance.check_profile(profile)
    instance.check_player(player)
    instance.check_resource(resource)
    return sum(1 for j in instance.graph.interferers[player] if profile[j] == resource)


def congestion_view(instance: GameInstance, profile: Sequence[int]) -> tuple[dict[int, int], ...]:
    """Per-player congestion counts for every resource."""
    profile = instance.check_profile(profile)
    view = []
    for i in range(instance.player_count):
        counts = {r: 0 for r in instance.resources()}
        for j in instance.graph.interferers[i]:
            counts[profile[j]] += 1
        view.append(counts)
    return tuple(view)


def deviation_payoff(instance: GameInstance, profile: Sequence[int], player: int, resource: int) -> Fraction:
    """Payoff ``player`` would get on ``resource`` with everyone else fixed."""
    return instance.g(player, resource, congestion(instance, profile, player, resource) + 1)


def payoff(instance: GameInstance, profile: Sequence[int], player: int) -> Fraction:
    profile = instance.check_profile(profile)
    instance.check_player(player)
    return deviation_payoff(instance, profile, player, profile[player])


def payoffs(instance: GameInstance, profile: Sequence[int]) -> tuple[Fraction, ...]:
    return tuple(payoff(instance, profile, i) for i in range(instance.player_count))


def best_response(instance: GameInstance, profile: Sequence[int], player: int) -> int:
    """Payoff-maximising resource, ties broken by the player's preference order."""
    profile = instance.check_profile(profile)
    instance.check_player(player)
    values = {r: deviation_payoff(instance, profile, player, r) for r in instance.resources()}
    top = max(values.values())
    return next(r for r in instance.preferences[player] if values[r] == top)


def improving_moves(instance: GameInstance, profile: Sequence[int], player: int) -> list[int]:
    """Resources giving ``player`` a strict gain, in index order."""
    current = payoff(instance, profile, player)
    return [
        r
        for r in instance.resources()
        if r != profile[player] and deviation_payoff(instance, profile, player, r) > current
    ]


@dataclass(frozen=True)
class NashCheck:
    is_nash: bool
    deviators: tuple[int, ...] = field(default=())

    def __bool__(self) -> bool:
        return self.is_nash


def is_nash(instance: GameInstance, profile: Sequence[int]) -> NashCheck:
    profile = instance.check_profile(profile)
    deviators = tuple(
        i for i in range(instance.player_count) if improving_moves(instance, profile, i)
    )
    return NashCheck(not deviators, deviators)


CHUNK = 1 << 18
_INT64_SAFE = 1 << 62


def enumerate_nash(instance: GameInstance, cap: int | None = None) -> list[Profile]:
    """Every pure Nash equilibrium, by exhaustive scan, in lexicographic order.

    Profiles are scanned in vectorised chunks; lexicographic order matches
    ``itertools.product`` over resources.
    """
    total = check_cap(instance.resource_count, instance.player_count, cap)
    ev = instance._evaluator
    if max((abs(v) for row in ev.tables for per in row for v in per), default=0) >= _INT64_SAFE:
        return [p for p in instance.profiles() if ev.is_nash(p)]
    n, big_r = instance.player_count, instance.resource_count
    place = big_r ** np.arange(n - 1, -1, -1, dtype=np.int64)
    tables = [[np.asarray(per, dtype=np.int64) for per in row] for row in ev.tables]
    found: list[Profile] = []
    for lo in range(0, total, CHUNK):
        idx = np.arange(lo, min(lo + CHUNK, total), dtype=np.int64)
        prof = (idx[:, None] // place[None, :]) % big_r + 1
        stable = np.ones(len(idx), dtype=bool)
        for i in range(n):
            counts = {r: np.zeros(len(idx), dtype=np.int64) for r in ev.resources}
            for j in ev.neighbors[i]:
                for r in ev.resources:
                    counts[r] += prof[:, j] == r
            values = np.stack([tables[i][r][counts[r]] for r in ev.resources], axis=1)
            current = np.take_along_axis(values, prof[:, i : i + 1] - 1, axis=1)[:, 0]
            stable &= values.max(axis=1) <= current
        found.extend(tuple(int(x) for x in row) for row in prof[stable])
    return found
