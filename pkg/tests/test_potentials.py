import itertools
import random

import pytest

from scg.generate import generate_instance
from scg.model import GameInstance, InterferenceGraph
from scg.potentials import (
    edge_potential,
    edge_potential_decrease,
    half_congestion_sum,
    rosenthal_delta_law,
    rosenthal_potential,
)

from support import complete_graph, cube_graph, oracle_rosenthal, random_rational_game


@pytest.fixture
def pair():
    g = complete_graph(2)
    row = ((3, 1), (2, 2))
    return GameInstance(g, 2, (row, row))


class TestRosenthal:
    def test_split(self, pair):
        assert rosenthal_potential(pair, (1, 2)) == 5

    def test_shared(self, pair):
        assert rosenthal_potential(pair, (1, 1)) == 4

    def test_all_on_one(self):
        g = complete_graph(4)
        row = ((9, 7, 4, 1), (1, 1, 1, 1))
        inst = GameInstance(g, 2, (row,) * 4)
        assert rosenthal_potential(inst, (1,) * 4) == 9 + 7 + 4 + 1

    def test_identity_move(self, pair):
        assert rosenthal_delta_law(pair, (1, 2), 0, 1) == (0, 0)

    def test_three_player_all_moves(self):
        rng = random.Random(17)
        inst = random_rational_game(complete_graph(3), 3, rng, shared=True)
        profile = (rng.randint(1, 3), rng.randint(1, 3), rng.randint(1, 3))
        for i in range(3):
            for r in inst.resources():
                if r == profile[i]:
                    continue
                pot, pay = rosenthal_delta_law(inst, profile, i, r)
                assert pot == pay
                moved = profile[:i] + (r,) + profile[i + 1 :]
                assert pot == oracle_rosenthal(inst, moved) - oracle_rosenthal(inst, profile)

    def test_rejects_path(self):
        inst = generate_instance("tree", 3, 2, 0, non_user_specific=True)
        with pytest.raises(ValueError, match="complete"):
            rosenthal_potential(inst, (1, 1, 1))

    def test_rejects_user_specific(self):
        g = complete_graph(2)
        inst = GameInstance(g, 1, (((3, 1),), ((4, 1),)))
        with pytest.raises(ValueError, match="user-specific"):
            rosenthal_potential(inst, (1, 1))


def star_with_identical_resources():
    g = InterferenceGraph.undirected(5, [(0, k) for k in range(1, 5)])
    centre = (4, 3, 2, 1, 0)
    leaf = (4, 3)
    tables = (tuple(centre for _ in range(2)),) + tuple(tuple(leaf for _ in range(2)) for _ in range(4))
    return GameInstance(g, 2, tables)


class TestEdgePotential:
    def test_proper_colouring(self):
        g = InterferenceGraph.undirected(3, [(0, 1), (1, 2)])
        t = (2, 1, 0)
        inst = GameInstance(g, 2, ((t, t),) * 3)
        assert edge_potential(inst, (1, 2, 1)) == 0

    def test_all_same(self):
        inst = generate_instance("random", 6, 3, 2, identical_resources=True)
        assert edge_potential(inst, (2,) * 6) == len(inst.graph.undirected_pairs())

    def test_cube_bipartition(self):
        g = cube_graph()
        t = (4, 3, 2, 1)
        inst = GameInstance(g, 2, ((t, t),) * 8)
        colouring = tuple(1 + bin(v).count("1") % 2 for v in range(8))
        # networkx labels hypercube vertices in sorted tuple order, i.e. by binary value
        assert edge_potential(inst, colouring) == 0

    def test_decrease_by_two(self):
        inst = star_with_identical_resources()
        before, after = edge_potential_decrease(inst, (1, 1, 1, 1, 2), 0, 2)
        assert (before, after) == (3, 1)

    def test_isolated_move_rejected(self):
        inst = GameInstance(InterferenceGraph(1, frozenset()), 2, (((3,), (3,)),))
        with pytest.raises(ValueError, match="strict improvement"):
            edge_potential_decrease(inst, (1,), 0, 2)

    def test_resource_dependent_rejected(self):
        g = InterferenceGraph.undirected(2, [(0, 1)])
        inst = GameInstance(g, 2, (((3, 1), (2, 2)),) * 2)
        with pytest.raises(ValueError):
            edge_potential(inst, (1, 1))

    @pytest.mark.parametrize("seed", range(15))
    def test_double_count_and_relabel_invariance(self, seed):
        rng = random.Random(seed)
        inst = generate_instance("random", 6, 3, seed, identical_resources=True)
        perm = [0] + rng.sample([1, 2, 3], 3)
        for _ in range(20):
            p = tuple(rng.randint(1, 3) for _ in range(6))
            value = edge_potential(inst, p)
            assert half_congestion_sum(inst, p) == value
            assert edge_potential(inst, tuple(perm[x] for x in p)) == value
            assert 0 <= value <= len(inst.graph.undirected_pairs())

    def test_every_improvement_decreases(self):
        inst = generate_instance("random", 5, 3, 8, identical_resources=True)
        for p in itertools.product(range(1, 4), repeat=5):
            for i in range(5):
                for r in range(1, 4):
                    try:
                        before, after = edge_potential_decrease(inst, p, i, r)
                    except ValueError:
                        continue
                    assert after < before
