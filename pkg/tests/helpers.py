"""Shared builders for the test suite."""

import numpy as np

from gridtrace.graphs import Graph

#: Edge list of the five-vertex benchmark network.
FIVE_VERTEX_EDGES = ((1, 4), (1, 5), (2, 3), (2, 4), (2, 5), (3, 4), (4, 5))

#: Edge list of the six-vertex network with a cut vertex at 3.
SIX_VERTEX_EDGES = ((1, 2), (1, 4), (2, 3), (2, 4), (3, 4), (3, 5), (3, 6), (5, 6))


def five_vertex_graph() -> Graph:
    return Graph(5, FIVE_VERTEX_EDGES)


def six_vertex_graph() -> Graph:
    return Graph(6, SIX_VERTEX_EDGES)


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(1, n)])


def cycle_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(1, n)] + [(1, n)])


def star_graph(n: int) -> Graph:
    """Star with center 1 and n-1 leaves."""
    return Graph(n, [(1, i) for i in range(2, n + 1)])


def complete_graph(n: int) -> Graph:
    return Graph(n, [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)])


def random_connected_graph(rng: np.random.Generator, n: int, extra_edge_prob: float = 0.3) -> Graph:
    """Random recursive tree plus Bernoulli extra edges; always connected."""
    edges = set()
    for v in range(2, n + 1):
        u = int(rng.integers(1, v))
        edges.add((u, v))
    for u in range(1, n + 1):
        for v in range(u + 1, n + 1):
            if (u, v) not in edges and rng.random() < extra_edge_prob:
                edges.add((u, v))
    return Graph(n, sorted(edges))
