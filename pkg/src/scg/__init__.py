"""Spatial congestion games on interference graphs."""

from scg.model import (
    GameInstance,
    InterferenceGraph,
    NashCheck,
    ResourceLimitError,
    best_response,
    congestion,
    enumerate_nash,
    is_nash,
    payoff,
    payoffs,
)

__all__ = [
    "GameInstance",
    "InterferenceGraph",
    "NashCheck",
    "ResourceLimitError",
    "best_response",
    "congestion",
    "enumerate_nash",
    "is_nash",
    "payoff",
    "payoffs",
]
