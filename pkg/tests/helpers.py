"""Small graph builders shared by the tests."""
from __future__ import annotations

import itertools

import networkx as nx

from subdivembed.graph_core import Graph, graph_from_edges


def path(n: int) -> Graph:
    return graph_from_edges([(i, i + 1) for i in range(n - 1)], n)


def cycle(n: int) -> Graph:
    return graph_from_edges([(i, (i + 1) % n) for i in range(n)], n)


def star(k: int) -> Graph:
    return graph_from_edges([(0, i) for i in range(1, k + 1)], k + 1)


def clique(k: int) -> Graph:
    return graph_from_edges(list(itertools.combinations(range(k), 2)), k)


def spider(legs: int, length: int) -> Graph:
    """Center 0; leg j holds vertices 1 + j*length .. (j+1)*length, nearest first."""
    edges = []
    k = 1
    for _ in range(legs):
        prev = 0
        for _ in range(length):
            edges.append((prev, k))
            prev, k = k, k + 1
    return graph_from_edges(edges, k)


def connected_graphs(max_n: int) -> list[Graph]:
    """Every connected graph on 1..max_n vertices up to isomorphism (from the networkx atlas)."""
    out = []
    for a in nx.graph_atlas_g():
        n = a.number_of_nodes()
        if 1 <= n <= max_n and nx.is_connected(a):
            out.append(Graph(n, list(a.edges())))
    return out


def from_nx(a: nx.Graph) -> Graph:
    a = nx.convert_node_labels_to_integers(a)
    return Graph(a.number_of_nodes(), list(a.edges()))
