"""Potential functions for the two FIP cases that admit one.

Rosenthal's potential covers the classical (complete-graph,
non-user-specific) game; the monochromatic-edge count covers games whose
resources are identical to each player.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction
from typing import Sequence

from scg.model import GameInstance, congestion, deviation_payoff, payoff


def _require_classical(instance: GameInstance) -> None:
    if instance.graph.directed or not instance.graph.is_complete():
        raise ValueError("Rosenthal's potential needs a complete undirected graph")
    if instance.is_user_specific():
        raise ValueError("Rosenthal's potential needs non-user-specific payoffs")


def rosenthal_potential(instance: GameInstance, profile: Sequence[int]) -> Fraction:
    """Sum over resources of g_r(1) + ... + g_r(n_r), n_r the global load."""
    _require_classical(instance)
    profile = instance.check_profile(profile)
    load = Counter(profile)
    total = Fraction(0)
    for r, n_r in load.items():
        total += sum(instance.g(0, r, k) for k in range(1, n_r + 1))
    return total


def rosenthal_delta_law(
    instance: GameInstance, profile: Sequence[int], player: int, new_resource: int
) -> tuple[Fraction, Fraction]:
    """Change in potential and in the mover's payoff for one deviation.

    The two are equal on every valid instance.
    """
    _require_classical(instance)
    profile = instance.check_profile(profile)
    instance.check_player(player)
    instance.check_resource(new_resource)
    moved = list(profile)
    moved[player] = new_resource
    potential_delta = rosenthal_potential(instance, moved) - rosenthal_potential(instance, profile)
    payoff_delta = payoff(instance, moved, player) - payoff(instance, profile, player)
    return potential_delta, payoff_delta


def _require_identical(instance: GameInstance) -> None:
    if instance.graph.directed:
        raise ValueError("the edge potential needs an undirected graph")
    if not instance.has_identical_resources():
        raise ValueError("the edge potential needs payoffs that do not depend on the resource")


def monochromatic_edges(instance: GameInstance, profile: Sequence[int]) -> int:
    profile = instance.check_profile(profile)
    return sum(1 for i, j in instance.graph.undirected_pairs() if profile[i] == profile[j])


def edge_potential(instance: GameInstance, profile: Sequence[int]) -> int:
    """Number of edges whose endpoints share a resource."""
    _require_identical(instance)
    return monochromatic_edges(instance, profile)


def half_congestion_sum(instance: GameInstance, profile: Sequence[int]) -> Fraction:
    """Half the total same-resource neighbour count; equals the edge potential."""
    profile = instance.check_profile(profile)
    total = sum(congestion(instance, profile, i, profile[i]) for i in range(instance.player_count))
    return Fraction(total, 2)


def edge_potential_decrease(
    instance: GameInstance, profile: Sequence[int], player: int, new_resource: int
) -> tuple[int, int]:
    """Edge potential before and after a strictly improving move."""
    _require_identical(instance)
    profile = instance.check_profile(profile)
    instance.check_player(player)
    instance.check_resource(new_resource)
    before = payoff(instance, profile, player)
    after = deviation_payoff(instance, profile, player, new_resource)
    if new_resource == profile[player] or not after > before:
        raise ValueError(
            f"moving player {player} to resource {new_resource} is not a strict improvement"
        )
    moved = list(profile)
    moved[player] = new_resource
    return monochromatic_edges(instance, profile), monochromatic_edges(instance, moved)
