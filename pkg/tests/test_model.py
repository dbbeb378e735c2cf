import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scg.counterexamples import build_non_monotonic
from scg.generate import generate_instance
from scg.model import (
    GameInstance,
    InterferenceGraph,
    ResourceLimitError,
    best_response,
    congestion,
    congestion_view,
    enumerate_nash,
    is_nash,
    payoff,
    payoffs,
)

from support import oracle_count, oracle_deviators, oracle_nash_set, oracle_payoff


@pytest.fixture
def three_path():
    return build_non_monotonic().instance


def single(tables, prefs=None):
    return GameInstance(InterferenceGraph(1, frozenset()), len(tables), (tuple(tables),), preferences=prefs)


class TestGraph:
    def test_self_loop_rejected(self):
        with pytest.raises(ValueError, match="self-loop"):
            InterferenceGraph.undirected(2, [(0, 0)])

    def test_asymmetric_undirected_rejected(self):
        with pytest.raises(ValueError):
            InterferenceGraph(2, frozenset({(0, 1)}), directed=False)

    def test_directed_interferers_are_in_neighbours(self):
        g = InterferenceGraph.directed_from(3, [(0, 1), (2, 1)])
        assert g.interferers == ((), (0, 2), ())


class TestInstance:
    def test_short_table_rejected(self):
        g = InterferenceGraph.undirected(2, [(0, 1)])
        with pytest.raises(ValueError, match="needs 2"):
            GameInstance(g, 1, (((3,),), ((3, 1),)))

    def test_non_monotone_rejected_unless_flag_cleared(self):
        with pytest.raises(ValueError, match="non-increasing"):
            single([(5, 6)])
        GameInstance(InterferenceGraph(1, frozenset()), 1, (((5, 6),),), monotone=False)

    def test_float_payoffs_rejected(self):
        with pytest.raises(TypeError):
            single([(0.5,)])

    def test_table_extends_with_last_entry(self):
        inst = single([(4, 2)])
        assert inst.g(0, 1, 5) == 2

    def test_string_rationals(self):
        inst = single([("7/2", "1/3")])
        assert inst.g(0, 1, 1) == Fraction(7, 2)


class TestCongestion:
    def test_isolated_player(self):
        inst = single([(1,), (2,)])
        assert congestion(inst, (2,), 0, 1) == 0

    def test_center_of_path(self, three_path):
        assert congestion(three_path, (1, 1, 1), 2, 1) == 2

    def test_leaf_of_path(self, three_path):
        assert congestion(three_path, (1, 2, 1), 1, 1) == 1

    def test_index_errors(self, three_path):
        with pytest.raises(IndexError):
            congestion(three_path, (1, 1, 1), 3, 1)
        with pytest.raises(IndexError):
            congestion(three_path, (1, 1, 1), 0, 3)
        with pytest.raises(ValueError):
            congestion(three_path, (1, 1), 0, 1)


class TestPayoff:
    def test_all_on_first(self, three_path):
        assert payoffs(three_path, (1, 1, 1)) == (5, 5, 3)

    def test_all_on_second(self, three_path):
        assert payoffs(three_path, (2, 2, 2)) == (6, 6, 1)

    def test_single_player(self):
        inst = single([(3, 0), (8, 1)])
        assert payoff(inst, (2,), 0) == 8


class TestBestResponse:
    def test_isolated_tie_uses_preference(self):
        inst = single([(5,), (5,), (2,)], prefs=((2, 1, 3),))
        assert best_response(inst, (3,), 0) == 2

    def test_center_moves_to_second(self, three_path):
        assert best_response(three_path, (1, 1, 1), 2) == 2

    def test_identical_resources_avoid_neighbour(self):
        g = InterferenceGraph.undirected(2, [(0, 1)])
        t = (10, 1)
        inst = GameInstance(g, 2, ((t, t), (t, t)))
        assert best_response(inst, (1, 1), 1) == 2


class TestNash:
    def test_isolated_players_on_best(self):
        g = InterferenceGraph(3, frozenset())
        inst = GameInstance(g, 2, (((1,), (2,)),) * 3)
        assert is_nash(inst, (2, 2, 2))

    def test_center_deviates(self, three_path):
        check = is_nash(three_path, (1, 1, 1))
        assert not check
        assert check.deviators == tuple(oracle_deviators(three_path, (1, 1, 1)))
        assert 2 in check.deviators

    def test_dominant_profile(self):
        g = InterferenceGraph.undirected(3, [(0, 1), (1, 2), (0, 2)])
        row = ((9, 8, 7), (6, 5, 1))
        inst = GameInstance(g, 2, (row,) * 3)
        assert is_nash(inst, (1, 1, 1))

    def test_three_path_has_none(self, three_path):
        assert enumerate_nash(three_path) == []

    def test_single_player_argmax(self):
        inst = single([(4,), (7,), (7,)])
        assert enumerate_nash(inst) == [(2,), (3,)]

    def test_trees_have_equilibria(self):
        for seed in range(30):
            inst = generate_instance("tree", 6, 3, seed)
            assert enumerate_nash(inst)

    def test_cap(self, three_path, monkeypatch):
        with pytest.raises(ResourceLimitError):
            enumerate_nash(three_path, cap=7)
        monkeypatch.setenv("SCG_PROFILE_CAP", "4")
        with pytest.raises(ResourceLimitError):
            enumerate_nash(three_path)

    @pytest.mark.parametrize("seed", range(12))
    def test_matches_oracle(self, seed):
        rng = random.Random(seed)
        family = rng.choice(["tree", "random", "loop"])
        inst = generate_instance(family, rng.randint(3, 6), rng.randint(2, 3), seed)
        found = enumerate_nash(inst)
        assert found == oracle_nash_set(inst)
        for p in inst.profiles():
            assert bool(is_nash(inst, p)) == (p in found)


# -- properties ---------------------------------------------------------------

games = st.builds(
    lambda family, n, r, seed: generate_instance(family, n, r, seed),
    st.sampled_from(["tree", "random"]),
    st.integers(2, 7),
    st.integers(1, 4),
    st.integers(0, 10**6),
)


def random_profile(inst, seed):
    rng = random.Random(seed)
    return tuple(rng.randint(1, inst.resource_count) for _ in range(inst.player_count))


@settings(max_examples=60, deadline=None)
@given(games, st.integers(0, 10**6))
def test_congestion_sums_to_degree(inst, seed):
    profile = random_profile(inst, seed)
    view = congestion_view(inst, profile)
    for i in range(inst.player_count):
        assert sum(view[i].values()) == inst.graph.degree(i)
        for r in inst.resources():
            assert view[i][r] == oracle_count(inst, profile, i, r)


@settings(max_examples=60, deadline=None)
@given(games, st.integers(0, 10**6))
def test_payoff_ignores_non_neighbours(inst, seed):
    profile = random_profile(inst, seed)
    rng = random.Random(seed + 1)
    for i in range(inst.player_count):
        before = payoff(inst, profile, i)
        assert before == oracle_payoff(inst, profile, i)
        mutated = list(profile)
        for j in range(inst.player_count):
            if j != i and j not in inst.graph.interferers[i]:
                mutated[j] = rng.randint(1, inst.resource_count)
        assert payoff(inst, mutated, i) == before


@settings(max_examples=60, deadline=None)
@given(games, st.integers(0, 10**6), st.integers(1, 5), st.integers(-20, 20))
def test_best_response_argmax_invariance(inst, seed, scale, shift):
    profile = random_profile(inst, seed)
    # x -> scale*x**3 + shift is strictly increasing on all rationals
    bent = tuple(
        tuple(tuple(scale * v**3 + shift for v in seq) for seq in row) for row in inst.payoffs
    )
    other = GameInstance(inst.graph, inst.resource_count, bent, preferences=inst.preferences)
    for i in range(inst.player_count):
        assert best_response(other, profile, i) == best_response(inst, profile, i)
