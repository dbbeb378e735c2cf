"""Independent oracles and instance generators shared by the tests.

The oracles read only the raw payoff tables and the edge set, so they do not
share code paths with the evaluator inside ``scg.model``.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

import networkx as nx

from scg.model import GameInstance, InterferenceGraph


def raw_g(instance, player, resource, k):
    table = instance.payoffs[player][resource - 1]
    return table[min(k, len(table)) - 1]


def oracle_count(instance, profile, player, resource):
    return sum(1 for i, j in instance.graph.edges if j == player and profile[i] == resource)


def oracle_payoff(instance, profile, player, resource=None):
    """Payoff to ``player`` if it used ``resource`` (default: its own)."""
    r = profile[player] if resource is None else resource
    return raw_g(instance, player, r, oracle_count(instance, profile, player, r) + 1)


def oracle_deviators(instance, profile):
    out = []
    for i in range(instance.player_count):
        cur = oracle_payoff(instance, profile, i)
        if any(oracle_payoff(instance, profile, i, r) > cur for r in range(1, instance.resource_count + 1)):
            out.append(i)
    return out


def oracle_nash_set(instance):
    space = itertools.product(range(1, instance.resource_count + 1), repeat=instance.player_count)
    return [p for p in space if not oracle_deviators(instance, p)]


def oracle_improvement_digraph(instance):
    dg = nx.DiGraph()
    for p in itertools.product(range(1, instance.resource_count + 1), repeat=instance.player_count):
        dg.add_node(p)
        for i in range(instance.player_count):
            cur = oracle_payoff(instance, p, i)
            for r in range(1, instance.resource_count + 1):
                if oracle_payoff(instance, p, i, r) > cur:
                    q = p[:i] + (r,) + p[i + 1 :]
                    dg.add_edge(p, q)
    return dg


def oracle_rosenthal(instance, profile):
    total = Fraction(0)
    for r in range(1, instance.resource_count + 1):
        users = sum(1 for x in profile if x == r)
        total += sum(raw_g(instance, 0, r, k) for k in range(1, users + 1))
    return total


# -- generators ---------------------------------------------------------------


def connected_atlas_graphs(max_nodes):
    """Every connected graph on 1..max_nodes vertices, up to isomorphism."""
    return [g for g in nx.graph_atlas_g()[1:] if g.number_of_nodes() <= max_nodes and nx.is_connected(g)]


def graph_from_nx(g):
    return InterferenceGraph.undirected(g.number_of_nodes(), list(g.edges()))


def rational_table(rng, length, top=30):
    values = [Fraction(rng.randint(0, top), rng.randint(1, 4)) for _ in range(length)]
    return tuple(sorted(values, reverse=True))


def random_rational_game(graph, resources, rng, identical=False, shared=False):
    def row(length):
        if identical:
            t = rational_table(rng, length)
            return tuple(t for _ in range(resources))
        return tuple(rational_table(rng, length) for _ in range(resources))

    if shared:
        one = row(graph.max_degree + 1)
        tables = tuple(one for _ in range(graph.player_count))
    else:
        tables = tuple(row(graph.degree(i) + 1) for i in range(graph.player_count))
    return GameInstance(graph, resources, tables)


def complete_graph(n):
    return InterferenceGraph.undirected(n, itertools.combinations(range(n), 2))


def steep_loop(seed):
    """Cycle instance whose tables drop sharply after one user, which makes
    a(i) differ from b(i) for every player."""
    rng = random.Random(seed)
    n, r = rng.randint(3, 12), rng.randint(2, 4)
    graph = InterferenceGraph.undirected(n, [(i, (i + 1) % n) for i in range(n)])
    tables = []
    for _ in range(n):
        row = []
        for _ in range(r):
            hi, mid = rng.randint(11, 30), rng.randint(0, 10)
            row.append((hi, mid, rng.randint(0, mid)))
        tables.append(tuple(row))
    prefs = tuple(tuple(rng.sample(range(1, r + 1), r)) for _ in range(n))
    return GameInstance(graph, r, tuple(tables), preferences=prefs)


def cube_graph():
    g = nx.convert_node_labels_to_integers(nx.hypercube_graph(3))
    return graph_from_nx(g)


def path_instance(tables, monotone=True):
    n = len(tables)
    graph = InterferenceGraph.undirected(n, [(i, i + 1) for i in range(n - 1)])
    return GameInstance(graph, len(tables[0]), tuple(tables), monotone=monotone)


def paired_loop(seed):
    """Cycle instance where each player values only two of R >= 3 resources,
    so every c(i) falls in {a(i), b(i)} while the pairs differ around the loop."""
    rng = random.Random(seed)
    n, r = rng.randint(3, 10), rng.randint(3, 4)
    graph = InterferenceGraph.undirected(n, [(i, (i + 1) % n) for i in range(n)])
    tables = []
    for _ in range(n):
        first, second = rng.sample(range(1, r + 1), 2)
        mid = rng.randint(6, 10)
        row = [(0, 0, 0)] * r
        row[first - 1] = (rng.randint(11, 20), rng.randint(1, mid - 1), 1)
        row[second - 1] = (mid, rng.randint(1, 5), 1)
        tables.append(tuple(row))
    return GameInstance(graph, r, tuple(tables))
