"""Unweighted simple connected graphs, BFS distances, balls and the local-density filter."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ModelError, ParseError


class Graph:
    """An immutable simple connected graph on vertices 0..n-1.

    Distances are hop counts, computed one BFS row at a time on first use.
    ``labels`` keeps the vertex names of the input file.
    """

    def __init__(self, n: int, edges: Iterable[tuple[int, int]], labels: Sequence[str] | None = None,
                 check_connected: bool = True) -> None:
        if n < 1:
            raise ModelError("a graph needs at least one vertex")
        nbrs: list[set[int]] = [set() for _ in range(n)]
        edge_list = []
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ModelError(f"edge ({u}, {v}) out of range")
            if u == v:
                raise ModelError(f"self-loop at {u}")
            if v in nbrs[u]:
                raise ModelError(f"duplicate edge ({u}, {v})")
            nbrs[u].add(v)
            nbrs[v].add(u)
            edge_list.append((min(u, v), max(u, v)))
        self.n = n
        self.adj: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(s)) for s in nbrs)
        self.edges: tuple[tuple[int, int], ...] = tuple(sorted(edge_list))
        self.labels: tuple[str, ...] = tuple(labels) if labels is not None else tuple(str(i) for i in range(n))
        self._rows: dict[int, list[int]] = {}
        if check_connected and min(self.bfs_row(0)) < 0:
            raise ModelError("graph is disconnected")

    @property
    def m(self) -> int:
        return len(self.edges)

    def bfs_row(self, s: int) -> list[int]:
        """Hop distances from ``s``; -1 marks unreachable vertices."""
        row = self._rows.get(s)
        if row is None:
            row = [-1] * self.n
            row[s] = 0
            queue = deque([s])
            while queue:
                x = queue.popleft()
                for y in self.adj[x]:
                    if row[y] < 0:
                        row[y] = row[x] + 1
                        queue.append(y)
            self._rows[s] = row
        return row

    def dist(self, u: int, v: int) -> int:
        if v in self._rows and u not in self._rows:
            return self._rows[v][u]
        return self.bfs_row(u)[v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def eccentricity(self, v: int) -> int:
        return max(self.bfs_row(v))

    def diameter(self) -> int:
        return max(self.eccentricity(v) for v in range(self.n))

    def induced(self, vertices: Iterable[int]) -> tuple["Graph", list[int]]:
        """Induced subgraph (must be connected) and the map new id -> old id."""
        old = sorted(set(vertices))
        index = {v: i for i, v in enumerate(old)}
        edges = [(index[u], index[v]) for u, v in self.edges if u in index and v in index]
        return Graph(len(old), edges, [self.labels[v] for v in old]), old

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def graph_from_edges(edges: Iterable[tuple[int, int]], n: int | None = None) -> Graph:
    """Convenience constructor; ``n`` defaults to one more than the largest id."""
    edges = list(edges)
    if n is None:
        n = 1 + max((max(e) for e in edges), default=0)
    return Graph(n, edges)


def parse_graph(text: str) -> Graph:
    """Parse an edge list ("u v" per line, '#' comments) into a Graph with ids 0..n-1.

    Vertex ids are renumbered in increasing order of the integers in the file;
    the original ids are kept as labels.
    """
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: expected 'u v', got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: non-integer vertex id") from exc
        if u < 0 or v < 0:
            raise ParseError(f"line {lineno}: negative vertex id")
        pairs.append((u, v))
    if not pairs:
        raise ParseError("no edges")
    ids = sorted({x for p in pairs for x in p})
    index = {x: i for i, x in enumerate(ids)}
    return Graph(len(ids), [(index[u], index[v]) for u, v in pairs], [str(x) for x in ids])


def bfs_layers(g: Graph, v: int) -> list[frozenset[int]]:
    """The BFS layers from ``v``: layer i is the set of vertices at distance exactly i."""
    row = g.bfs_row(v)
    layers: list[set[int]] = [set() for _ in range(max(row) + 1)]
    for x, d in enumerate(row):
        layers[d].add(x)
    return [frozenset(layer) for layer in layers]


def ball(g: Graph, v: int, r: int) -> frozenset[int]:
    """Closed ball of radius ``r`` around ``v``."""
    row = g.bfs_row(v)
    return frozenset(x for x, d in enumerate(row) if d <= r)


def multi_source_dist(g: Graph, sources: Iterable[int], allowed: set[int] | None = None) -> list[int]:
    """Hop distance from a vertex set (-1 if unreachable), optionally inside ``allowed`` only."""
    row = [-1] * g.n
    queue = deque()
    for s in sources:
        if row[s] < 0 and (allowed is None or s in allowed):
            row[s] = 0
            queue.append(s)
    while queue:
        x = queue.popleft()
        for y in g.adj[x]:
            if row[y] < 0 and (allowed is None or y in allowed):
                row[y] = row[x] + 1
                queue.append(y)
    return row


def ball_of_set(g: Graph, sources: Iterable[int], r: int) -> frozenset[int]:
    row = multi_source_dist(g, sources)
    return frozenset(x for x, d in enumerate(row) if 0 <= d <= r)


def components(g: Graph, vertices: Iterable[int]) -> list[list[int]]:
    """Connected components of the induced subgraph, each sorted, ordered by smallest id."""
    todo = set(vertices)
    out = []
    for s in sorted(todo):
        if s not in todo:
            continue
        todo.discard(s)
        comp = [s]
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in g.adj[x]:
                if y in todo:
                    todo.discard(y)
                    comp.append(y)
                    queue.append(y)
        out.append(sorted(comp))
    return out


@dataclass(frozen=True)
class DensityWitness:
    """A ball that is too large to fit any c-embedding: |ball(vertex, radius)| > 4 * radius * c * h."""

    vertex: int
    radius: int
    size: int


def local_density_filter(g: Graph, h: int, c: int) -> DensityWitness | None:
    """Return None if the graph passes, else the first witness ball (by vertex id, then radius).

    A ball with more than 4*r*c*h vertices rules out every non-contracting
    c-embedding into a subdivision of a quasi-subgraph of a pattern with h edges.
    """
    if c < 1 or h < 1:
        raise ValueError("c and h must be at least 1")
    for v in range(g.n):
        row = g.bfs_row(v)
        counts = [0] * (max(row) + 1)
        for d in row:
            counts[d] += 1
        size = counts[0]
        for r in range(1, len(counts)):
            size += counts[r]
            if size > 4 * r * c * h:
                return DensityWitness(v, r, size)
    return None


def to_dot(g: Graph, name: str = "G") -> str:
    """Plain DOT export using the original vertex labels."""
    lines = [f"graph {name} {{"]
    lines += [f'  "{g.labels[v]}";' for v in range(g.n)]
    lines += [f'  "{g.labels[u]}" -- "{g.labels[v]}";' for u, v in g.edges]
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_edge_list(g: Graph) -> str:
    return "".join(f"{g.labels[u]} {g.labels[v]}\n" for u, v in g.edges)
