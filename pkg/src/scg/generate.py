"""Seeded random instances for the graph families the constructions cover."""

from __future__ import annotations

import random

from scg.model import GameInstance, InterferenceGraph

FAMILIES = ("tree", "loop", "bipartite", "random")
MAX_PAYOFF = 20


def random_tree_edges(n: int, rng: random.Random) -> list[tuple[int, int]]:
    return [(rng.randrange(k), k) for k in range(1, n)]


def _relabel(edges, n: int, rng: random.Random) -> list[tuple[int, int]]:
    perm = list(range(n))
    rng.shuffle(perm)
    return [(perm[i], perm[j]) for i, j in edges]


def family_edges(family: str, n: int, rng: random.Random, degree: int | None = None) -> list[tuple[int, int]]:
    if family == "tree":
        return random_tree_edges(n, rng)
    if family == "loop":
        if n < 3:
            raise ValueError("a loop needs at least 3 players")
        return _relabel([(i, (i + 1) % n) for i in range(n)], n, rng)
    if family == "bipartite":
        if n % 2:
            raise ValueError("a regular bipartite graph here needs an even number of players")
        half = n // 2
        d = min(3, half) if degree is None else degree
        if not 0 <= d <= half:
            raise ValueError(f"degree must lie in 0..{half} for {n} players")
        shift = list(range(half))
        rng.shuffle(shift)
        edges = [(i, half + shift[(i + k) % half]) for i in range(half) for k in range(d)]
        return _relabel(edges, n, rng)
    if family == "random":
        edges = set(tuple(sorted(e)) for e in random_tree_edges(n, rng))
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.3:
                    edges.add((i, j))
        return _relabel(sorted(edges), n, rng)
    raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")


def random_table(rng: random.Random, length: int, top: int = MAX_PAYOFF) -> tuple[int, ...]:
    return tuple(sorted((rng.randint(0, top) for _ in range(length)), reverse=True))


def random_payoffs(
    graph: InterferenceGraph,
    resources: int,
    rng: random.Random,
    identical_resources: bool = False,
    non_user_specific: bool = False,
):
    """Sorted-descending integer tables, one per (player, resource) unless
    a flag ties them together."""
    n = graph.player_count
    shared_length = graph.max_degree + 1

    def one_player(length: int):
        if identical_resources:
            table = random_table(rng, length)
            return tuple(table for _ in range(resources))
        return tuple(random_table(rng, length) for _ in range(resources))

    if non_user_specific:
        row = one_player(shared_length)
        return tuple(row for _ in range(n))
    return tuple(one_player(graph.degree(i) + 1) for i in range(n))


def generate_instance(
    family: str,
    n: int,
    resources: int,
    seed: int,
    identical_resources: bool = False,
    non_user_specific: bool = False,
    degree: int | None = None,
) -> GameInstance:
    if n < 1 or resources < 1:
        raise ValueError("players and resources must be positive")
    rng = random.Random(seed)
    graph = InterferenceGraph.undirected(n, family_edges(family, n, rng, degree))
    tables = random_payoffs(graph, resources, rng, identical_resources, non_user_specific)
    return GameInstance(graph, resources, tables)


def random_game_on(
    graph: InterferenceGraph,
    resources: int,
    rng: random.Random,
    identical_resources: bool = False,
    non_user_specific: bool = False,
) -> GameInstance:
    """Random non-increasing payoffs on a fixed graph."""
    tables = random_payoffs(graph, resources, rng, identical_resources, non_user_specific)
    return GameInstance(graph, resources, tables)
