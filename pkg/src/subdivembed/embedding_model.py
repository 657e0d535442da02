"""Pattern multigraphs, compact weighted subdivisions, embeddings and their exact verifier.

A host is a pattern multigraph whose edges carry positive rational lengths.
Points of the host are either pattern vertices or interior points of an edge
given by their offset from the edge's first endpoint.  Subdivision vertices
that carry no image never change distances, so they are not stored.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import networkx as nx

from .errors import ContractError, DegenerateError, MismatchError, ModelError, ParseError
from .graph_core import Graph


# ---------------------------------------------------------------- patterns

class PatternGraph:
    """A multigraph with labelled vertices; edge ids are positions in ``edges``.

    Loops and parallel edges are allowed.
    """

    def __init__(self, n: int, edges: Iterable[tuple[int, int]], labels: Sequence[str] | None = None) -> None:
        self.n = n
        self.edges: tuple[tuple[int, int], ...] = tuple((int(u), int(v)) for u, v in edges)
        for u, v in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ModelError(f"pattern edge ({u}, {v}) out of range")
        self.labels: tuple[str, ...] = tuple(labels) if labels is not None else tuple(str(i) for i in range(n))
        inc: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for e, (u, v) in enumerate(self.edges):
            inc[u].append((e, 0))
            inc[v].append((e, 1))
        self.incidence: tuple[tuple[tuple[int, int], ...], ...] = tuple(tuple(x) for x in inc)

    @property
    def h(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.incidence[v])

    def is_connected(self) -> bool:
        if self.n == 0:
            return False
        seen = {0}
        stack = [0]
        while stack:
            x = stack.pop()
            for e, _ in self.incidence[x]:
                for y in self.edges[e]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
        return len(seen) == self.n

    def to_networkx(self) -> nx.MultiGraph:
        g = nx.MultiGraph()
        g.add_nodes_from(range(self.n))
        for e, (u, v) in enumerate(self.edges):
            g.add_edge(u, v, key=e)
        return g

    def __repr__(self) -> str:
        return f"PatternGraph(n={self.n}, edges={list(self.edges)})"


def pattern_from_edges(edges: Iterable[tuple[int, int]], n: int | None = None) -> PatternGraph:
    edges = list(edges)
    if n is None:
        n = 1 + max((max(e) for e in edges), default=0)
    return PatternGraph(n, edges)


def complete_pattern(k: int) -> PatternGraph:
    return pattern_from_edges(itertools.combinations(range(k), 2), k)


def star_pattern(leaves: int) -> PatternGraph:
    return pattern_from_edges([(0, i) for i in range(1, leaves + 1)], leaves + 1)


def path_pattern(n: int) -> PatternGraph:
    return pattern_from_edges([(i, i + 1) for i in range(n - 1)], n)


def parse_pattern(text: str) -> PatternGraph:
    """Parse "u v" or "u v multiplicity" lines; a lone "v" declares an isolated vertex."""
    items: list[tuple[int, int, int]] = []
    lone: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            nums = [int(x) for x in parts]
        except ValueError as exc:
            raise ParseError(f"line {lineno}: non-integer token") from exc
        if any(x < 0 for x in nums):
            raise ParseError(f"line {lineno}: negative value")
        if len(nums) == 1:
            lone.append(nums[0])
        elif len(nums) == 2:
            items.append((nums[0], nums[1], 1))
        elif len(nums) == 3:
            if nums[2] < 1:
                raise ParseError(f"line {lineno}: multiplicity must be positive")
            items.append((nums[0], nums[1], nums[2]))
        else:
            raise ParseError(f"line {lineno}: expected 'u v [multiplicity]'")
    ids = sorted({x for u, v, _ in items for x in (u, v)} | set(lone))
    if not ids:
        raise ParseError("empty pattern")
    index = {x: i for i, x in enumerate(ids)}
    edges = [(index[u], index[v]) for u, v, k in items for _ in range(k)]
    p = PatternGraph(len(ids), edges, [str(x) for x in ids])
    if not p.is_connected():
        raise ModelError("pattern is disconnected")
    return p


def pattern_to_text(p: PatternGraph) -> str:
    if not p.edges:
        return "".join(f"{lab}\n" for lab in p.labels)
    return "".join(f"{p.labels[u]} {p.labels[v]}\n" for u, v in p.edges)


# ---------------------------------------------------------------- hosts

@dataclass(frozen=True, order=True)
class Point:
    """A host point: a pattern vertex (edge == -1) or an interior point of an edge."""

    vertex: int = -1
    edge: int = -1
    offset: Fraction = Fraction(0)

    @property
    def is_vertex(self) -> bool:
        return self.edge < 0


def vertex_point(v: int) -> Point:
    return Point(vertex=v)


class WeightedSubdivision:
    """A pattern with a positive rational length per edge."""

    def __init__(self, pattern: PatternGraph, lengths: Sequence[Fraction | int]) -> None:
        if len(lengths) != pattern.h:
            raise ModelError("one length per pattern edge is required")
        self.pattern = pattern
        self.lengths: tuple[Fraction, ...] = tuple(Fraction(x) for x in lengths)
        if any(x <= 0 for x in self.lengths):
            raise ModelError("edge lengths must be positive")
        self._vdist: list[list[Fraction | None]] | None = None

    def point(self, edge: int, offset: Fraction | int) -> Point:
        """The point at ``offset`` along ``edge``; offsets 0 and the length give its endpoints."""
        offset = Fraction(offset)
        length = self.lengths[edge]
        if offset < 0 or offset > length:
            raise ModelError(f"offset {offset} outside edge {edge} of length {length}")
        u, v = self.pattern.edges[edge]
        if offset == 0:
            return vertex_point(u)
        if offset == length:
            return vertex_point(v)
        return Point(edge=edge, offset=offset)

    def check_point(self, p: Point) -> None:
        if p.is_vertex:
            if not 0 <= p.vertex < self.pattern.n:
                raise ModelError(f"no pattern vertex {p.vertex}")
        elif not (0 <= p.edge < self.pattern.h and 0 < p.offset < self.lengths[p.edge]):
            raise ModelError(f"invalid interior point {p}")

    def vertex_distances(self) -> list[list[Fraction | None]]:
        """All-pairs distances between pattern vertices (None if disconnected)."""
        if self._vdist is None:
            k = self.pattern.n
            d: list[list[Fraction | None]] = [[None] * k for _ in range(k)]
            for i in range(k):
                d[i][i] = Fraction(0)
            for (u, v), w in zip(self.pattern.edges, self.lengths):
                if u != v and (d[u][v] is None or w < d[u][v]):
                    d[u][v] = d[v][u] = w
            for m in range(k):
                for i in range(k):
                    if d[i][m] is None:
                        continue
                    for j in range(k):
                        if d[m][j] is None:
                            continue
                        s = d[i][m] + d[m][j]
                        if d[i][j] is None or s < d[i][j]:
                            d[i][j] = s
            self._vdist = d
        return self._vdist

    def exits(self, p: Point) -> list[tuple[int, Fraction]]:
        """Pattern vertices reachable from ``p`` without passing another pattern vertex."""
        if p.is_vertex:
            return [(p.vertex, Fraction(0))]
        u, v = self.pattern.edges[p.edge]
        return [(u, p.offset), (v, self.lengths[p.edge] - p.offset)]

    def total_length(self) -> Fraction:
        return sum(self.lengths, Fraction(0))


def host_distance(h: WeightedSubdivision, p: Point, q: Point) -> Fraction:
    """Exact shortest-path distance between two host points."""
    if p == q:
        return Fraction(0)
    vd = h.vertex_distances()
    best: Fraction | None = None
    if not p.is_vertex and not q.is_vertex and p.edge == q.edge:
        best = abs(p.offset - q.offset)
    for a, da in h.exits(p):
        for b, db in h.exits(q):
            if vd[a][b] is None:
                continue
            s = da + vd[a][b] + db
            if best is None or s < best:
                best = s
    if best is None:
        raise ModelError("points lie in different components of the host")
    return best


class _ScaledHost:
    """Integer-scaled copy of a host for fast exact distance evaluation."""

    def __init__(self, host: WeightedSubdivision, points: Iterable[Point], factor: int = 1) -> None:
        dens = [x.denominator for x in host.lengths] + [p.offset.denominator for p in points]
        self.scale = math.lcm(*dens) * factor if dens else factor
        s = self.scale
        self.host = host
        self.lengths = [int(x * s) for x in host.lengths]
        self.vd = [[None if x is None else int(x * s) for x in row] for row in host.vertex_distances()]

    def locate(self, p: Point) -> tuple[int, int, list[tuple[int, int]]]:
        """(edge, scaled offset, exits) for a point."""
        if p.is_vertex:
            return -1, 0, [(p.vertex, 0)]
        off = int(p.offset * self.scale)
        u, v = self.host.pattern.edges[p.edge]
        return p.edge, off, [(u, off), (v, self.lengths[p.edge] - off)]

    def dist(self, a: tuple[int, int, list], b: tuple[int, int, list]) -> int:
        best = None
        if a[0] >= 0 and a[0] == b[0]:
            best = abs(a[1] - b[1])
        vd = self.vd
        for x, dx in a[2]:
            row = vd[x]
            for y, dy in b[2]:
                mid = row[y]
                if mid is None:
                    continue
                s = dx + mid + dy
                if best is None or s < best:
                    best = s
        if best is None:
            raise ModelError("points lie in different components of the host")
        return best


# ---------------------------------------------------------------- embeddings

@dataclass
class Embedding:
    """A map from the source graph's vertices to host points (one point per vertex)."""

    source: Graph
    host: WeightedSubdivision
    image: tuple[Point, ...]
    notes: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.image = tuple(self.image)
        if len(self.image) != self.source.n:
            raise ModelError("one image point per source vertex is required")
        for p in self.image:
            self.host.check_point(p)

    def host_dist(self, u: int, v: int) -> Fraction:
        return host_distance(self.host, self.image[u], self.image[v])


@dataclass(frozen=True)
class DistortionReport:
    expansion: Fraction
    contraction: Fraction
    distortion: Fraction
    expansion_witness: tuple[int, int] | None
    contraction_witness: tuple[int, int] | None
    non_contracting: bool

    def to_dict(self) -> dict:
        return {
            "expansion": frac_str(self.expansion),
            "contraction": frac_str(self.contraction),
            "distortion": frac_str(self.distortion),
            "expansion_witness": list(self.expansion_witness) if self.expansion_witness else None,
            "contraction_witness": list(self.contraction_witness) if self.contraction_witness else None,
            "non_contracting": self.non_contracting,
        }


def check_injective(e: Embedding) -> None:
    seen: dict[Point, int] = {}
    for v, p in enumerate(e.image):
        if p in seen:
            raise DegenerateError(f"vertices {seen[p]} and {v} share the host point {p}")
        seen[p] = v


def pairwise_host_distances(e: Embedding) -> tuple[list[list[int]], int]:
    """Scaled integer host distances between all image pairs, and the scale."""
    sh = _ScaledHost(e.host, e.image)
    loc = [sh.locate(p) for p in e.image]
    n = len(loc)
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            out[i][j] = out[j][i] = sh.dist(loc[i], loc[j])
    return out, sh.scale


def distortion(e: Embedding) -> DistortionReport:
    """Exact expansion, contraction and distortion over all pairs of source vertices."""
    check_injective(e)
    g = e.source
    if g.n == 1:
        one = Fraction(1)
        return DistortionReport(one, one, one, None, None, True)
    sh = _ScaledHost(e.host, e.image)
    loc = [sh.locate(p) for p in e.image]
    # expansion as host/(scale*d), contraction as (scale*d)/host, compared by cross-multiplication
    ex_num, ex_den, ex_w = -1, 1, None
    co_num, co_den, co_w = -1, 1, None
    for u in range(g.n):
        row = g.bfs_row(u)
        lu = loc[u]
        for v in range(u + 1, g.n):
            hd = sh.dist(lu, loc[v])
            gd = row[v] * sh.scale
            if hd * ex_den > ex_num * gd:
                ex_num, ex_den, ex_w = hd, gd, (u, v)
            if gd * co_den > co_num * hd:
                co_num, co_den, co_w = gd, hd, (u, v)
    expansion = Fraction(ex_num, ex_den)
    contraction = Fraction(co_num, co_den)
    return DistortionReport(expansion, contraction, expansion * contraction, ex_w, co_w, contraction <= 1)


def is_c_embedding(e: Embedding, c: Fraction | int) -> bool:
    """Non-contracting with distortion at most c."""
    rep = distortion(e)
    return rep.non_contracting and rep.distortion <= c


def _edge_sequences(e: Embedding) -> list[list[tuple[Fraction, int]]]:
    """Per pattern edge, the images lying on it (endpoints included) sorted by offset."""
    host = e.host
    at_vertex: dict[int, int] = {}
    seqs: list[list[tuple[Fraction, int]]] = [[] for _ in range(host.pattern.h)]
    for x, p in enumerate(e.image):
        if p.is_vertex:
            at_vertex[p.vertex] = x
        else:
            seqs[p.edge].append((p.offset, x))
    for eid, (u, v) in enumerate(host.pattern.edges):
        if u in at_vertex:
            seqs[eid].append((Fraction(0), at_vertex[u]))
        if v in at_vertex:
            seqs[eid].append((host.lengths[eid], at_vertex[v]))
        seqs[eid].sort()
    return seqs


def is_pushing(e: Embedding) -> tuple[bool, tuple[int, int] | None]:
    """True iff every pair of images consecutive along a pattern edge sits at distance exactly d_G."""
    for seq in _edge_sequences(e):
        for (o1, a), (o2, b) in zip(seq, seq[1:]):
            if a != b and o2 - o1 != e.source.dist(a, b):
                return False, (a, b)
    return True, None


def _candidate_points(e: Embedding) -> list[Point]:
    """Pattern vertices plus one midpoint per maximal image-free open segment."""
    host = e.host
    pts = [vertex_point(v) for v in range(host.pattern.n)]
    interior: list[list[Fraction]] = [[] for _ in range(host.pattern.h)]
    for p in e.image:
        if not p.is_vertex:
            interior[p.edge].append(p.offset)
    for eid in range(host.pattern.h):
        marks = [Fraction(0)] + sorted(interior[eid]) + [host.lengths[eid]]
        for a, b in zip(marks, marks[1:]):
            pts.append(Point(edge=eid, offset=(a + b) / 2))
    return pts


def is_proper(e: Embedding) -> tuple[bool, Point | None]:
    """True iff every host point lies on a shortest path between the images of some edge of G.

    Image points are covered by any incident edge.  Along an image-free open
    segment the covering condition is constant (a concave function that meets
    its lower bound at an interior point is constant), so one midpoint per
    segment decides it.
    """
    g = e.source
    if g.n == 1:
        if e.host.pattern.h == 0:
            return True, None
        return False, vertex_point(0) if e.image[0] != vertex_point(0) else _candidate_points(e)[-1]
    cands = _candidate_points(e)
    sh = _ScaledHost(e.host, list(e.image) + cands)
    loc = [sh.locate(p) for p in e.image]
    edge_len = [sh.dist(loc[u], loc[v]) for u, v in g.edges]
    imaged = set(e.image)
    # fast path: a segment between consecutive images of adjacent vertices, spanned by a shortest path
    covered: set[Point] = set()
    by_edge: dict[int, list[tuple[Fraction, int]]] = {}
    for x, p in enumerate(e.image):
        if not p.is_vertex:
            by_edge.setdefault(p.edge, []).append((p.offset, x))
    for eid, lst in by_edge.items():
        lst.sort()
        for (o1, a), (o2, b) in zip(lst, lst[1:]):
            if g.has_edge(a, b) and sh.dist(loc[a], loc[b]) == int((o2 - o1) * sh.scale):
                covered.add(Point(edge=eid, offset=(o1 + o2) / 2))
    for z in cands:
        if z in imaged or z in covered:
            continue
        lz = sh.locate(z)
        dz = [sh.dist(lz, lp) for lp in loc]
        if not any(dz[u] + dz[v] == d for (u, v), d in zip(g.edges, edge_len)):
            return False, z
    return True, None


# ---------------------------------------------------------------- quasi-subgraphs

@dataclass(frozen=True)
class QuasiSubgraph:
    """A quasi-subgraph with the rule applications that produced it.

    ``vertex_origin[i]`` is the original vertex or -1 for a vertex created by a
    split; ``edge_origin[j]`` is the original edge of edge j.
    """

    pattern: PatternGraph
    provenance: tuple[str, ...]
    vertex_origin: tuple[int, ...]
    edge_origin: tuple[int, ...]


def _multigraph_key(p: PatternGraph) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(p.n), loops=0)
    for u, v in p.edges:
        if u == v:
            g.nodes[u]["loops"] += 1
        elif g.has_edge(u, v):
            g[u][v]["mult"] += 1
        else:
            g.add_edge(u, v, mult=1)
    return g


def isomorphic_patterns(a: PatternGraph, b: PatternGraph) -> bool:
    if a.n != b.n or a.h != b.h:
        return False
    ga, gb = _multigraph_key(a), _multigraph_key(b)
    return nx.is_isomorphic(ga, gb, node_match=lambda x, y: x["loops"] == y["loops"],
                            edge_match=lambda x, y: x["mult"] == y["mult"])


def enumerate_quasi_subgraphs(h: PatternGraph, dedup: bool = True) -> list[QuasiSubgraph]:
    """All connected quasi-subgraphs of ``h``, with rule 3 used at most once per original edge.

    Every rule sequence is equivalent to: keep a subset of original vertices,
    and give each original edge one of the statuses keep / delete / split with
    a subset of its two half-edges kept (a half-edge needs its original end).
    Results are sorted by descending edge count and deduplicated up to
    isomorphism unless ``dedup`` is False.
    """
    results: list[QuasiSubgraph] = []
    for mask in range(1 << h.n):
        kept = [v for v in range(h.n) if mask >> v & 1]
        if not kept:
            continue
        options = []
        for eid, (u, v) in enumerate(h.edges):
            ku, kv = bool(mask >> u & 1), bool(mask >> v & 1)
            opts = [("delete",)]
            if ku and kv:
                opts.append(("keep",))
                opts.append(("split", True, True))
                if u != v:
                    opts.append(("split", True, False))
                    opts.append(("split", False, True))
                else:
                    opts.append(("split", True, False))
            elif ku:
                opts.append(("split", True, False))
            elif kv:
                opts.append(("split", False, True))
            options.append(opts)
        for choice in itertools.product(*options):
            index = {v: i for i, v in enumerate(kept)}
            origin = list(kept)
            edges: list[tuple[int, int]] = []
            eorigin: list[int] = []
            prov = [f"delete-vertex {h.labels[v]}" for v in range(h.n) if not mask >> v & 1]
            for eid, opt in enumerate(choice):
                u, v = h.edges[eid]
                if opt[0] == "keep":
                    edges.append((index[u], index[v]))
                    eorigin.append(eid)
                elif opt[0] == "delete":
                    if mask >> u & 1 and mask >> v & 1:
                        prov.append(f"delete-edge {eid}")
                else:
                    prov.append(f"split-edge {eid}")
                    for end, keep_half in ((u, opt[1]), (v, opt[2])):
                        if keep_half:
                            origin.append(-1)
                            edges.append((index[end], len(origin) - 1))
                            eorigin.append(eid)
            p = PatternGraph(len(origin), edges,
                             [h.labels[o] if o >= 0 else f"s{i}" for i, o in enumerate(origin)])
            if p.is_connected():
                results.append(QuasiSubgraph(p, tuple(prov), tuple(origin), tuple(eorigin)))
    results.sort(key=lambda q: (-q.pattern.h, q.pattern.n, len(q.provenance)))
    if not dedup:
        return results
    unique: list[QuasiSubgraph] = []
    for q in results:
        if not any(isomorphic_patterns(q.pattern, u.pattern) for u in unique):
            unique.append(q)
    return unique


# ---------------------------------------------------------------- normalization

class _Workspace:
    """Mutable host used by the normalization surgery."""

    def __init__(self, e: Embedding) -> None:
        p = e.host.pattern
        self.g = e.source
        self.labels = list(p.labels)
        self.edges = [[u, v, L] for (u, v), L in zip(p.edges, e.host.lengths)]
        self.alive_v = [True] * p.n
        self.alive_e = [True] * p.h
        self.image = [(-1, p_.vertex, Fraction(0)) if p_.is_vertex else (p_.edge, -1, p_.offset)
                      for p_ in e.image]
        self.notes = dict(e.notes)

    def build(self) -> tuple[Embedding, list[int], list[int]]:
        vmap, emap = {}, {}
        labels = []
        for v, alive in enumerate(self.alive_v):
            if alive:
                vmap[v] = len(labels)
                labels.append(self.labels[v])
        edges, lengths = [], []
        for eid, alive in enumerate(self.alive_e):
            if alive:
                u, v, L = self.edges[eid]
                emap[eid] = len(edges)
                edges.append((vmap[u], vmap[v]))
                lengths.append(L)
        host = WeightedSubdivision(PatternGraph(len(labels), edges, labels), lengths)
        image = [vertex_point(vmap[v]) if eid < 0 else Point(edge=emap[eid], offset=off)
                 for eid, v, off in self.image]
        inv_v = [v for v in range(len(self.alive_v)) if self.alive_v[v]]
        inv_e = [e for e in range(len(self.alive_e)) if self.alive_e[e]]
        return Embedding(self.g, host, image, dict(self.notes)), inv_v, inv_e

    def new_vertex(self, label: str) -> int:
        self.labels.append(label)
        self.alive_v.append(True)
        return len(self.labels) - 1

    def new_edge(self, u: int, v: int, L: Fraction) -> int:
        self.edges.append([u, v, L])
        self.alive_e.append(True)
        return len(self.edges) - 1

    def images_on(self, eid: int) -> list[tuple[Fraction, int]]:
        return sorted((off, x) for x, (e, _, off) in enumerate(self.image) if e == eid)

    def cut_vertex(self, z: int) -> None:
        """Delete pattern vertex z and, on each incident edge, the segment up to its first image."""
        for eid, alive in enumerate(self.alive_e):
            if not alive:
                continue
            u, v, L = self.edges[eid]
            if z not in (u, v):
                continue
            imgs = self.images_on(eid)
            if not imgs:
                self.alive_e[eid] = False
                continue
            lo = imgs[0]
            if u == z:
                nu = self.new_vertex(f"{self.labels[z]}'")
                self._rebase(eid, lo[0], nu)
                u, v, L = self.edges[eid]
            if v == z:
                rest = self.images_on(eid)
                if not rest:
                    self.alive_e[eid] = False
                    continue
                nv = self.new_vertex(f"{self.labels[z]}'")
                hi = rest[-1]
                self.edges[eid][1] = nv
                self.edges[eid][2] = hi[0]
                self.image[hi[1]] = (-1, nv, Fraction(0))
        self.alive_v[z] = False

    def _rebase(self, eid: int, start: Fraction, new_u: int) -> None:
        """Drop [0, start) from edge eid; the image at ``start`` moves onto new vertex new_u."""
        u, v, L = self.edges[eid]
        self.edges[eid] = [new_u, v, L - start]
        for x, (e, w, off) in enumerate(self.image):
            if e == eid:
                if off == start:
                    self.image[x] = (-1, new_u, Fraction(0))
                else:
                    self.image[x] = (eid, -1, off - start)

    def cut_segment(self, eid: int, a: Fraction, b: Fraction) -> None:
        """Remove the open segment (a, b) of edge eid, where a and b are marked points."""
        u, v, L = self.edges[eid]
        self.alive_e[eid] = False
        imgs = self.images_on(eid)
        if a > 0:
            nu = self.new_vertex(f"{self.labels[u]}~")
            e1 = self.new_edge(u, nu, a)
            for off, x in imgs:
                if off < a:
                    self.image[x] = (e1, -1, off)
                elif off == a:
                    self.image[x] = (-1, nu, Fraction(0))
        if b < L:
            nv = self.new_vertex(f"{self.labels[v]}~")
            e2 = self.new_edge(nv, v, L - b)
            for off, x in imgs:
                if off > b:
                    self.image[x] = (e2, -1, off - b)
                elif off == b:
                    self.image[x] = (-1, nv, Fraction(0))

    def prune(self) -> None:
        """Keep only the host component holding the images; drop isolated bare vertices."""
        adj: dict[int, list[int]] = {v: [] for v, a in enumerate(self.alive_v) if a}
        for eid, alive in enumerate(self.alive_e):
            if alive:
                u, v, _ = self.edges[eid]
                adj[u].append(v)
                adj[v].append(u)
        seeds = set()
        for e, v, _ in self.image:
            seeds.add(v if e < 0 else self.edges[e][0])
        seen = set(seeds)
        stack = list(seeds)
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        for v in adj:
            if v not in seen:
                self.alive_v[v] = False
        for eid, alive in enumerate(self.alive_e):
            if alive and self.edges[eid][0] not in seen:
                self.alive_e[eid] = False

    def push(self) -> bool:
        """Shrink every slack consecutive gap to d_G; True if anything changed."""
        changed = False
        at_vertex = {v: x for x, (e, v, _) in enumerate(self.image) if e < 0}
        for eid, alive in enumerate(self.alive_e):
            if not alive:
                continue
            u, v, L = self.edges[eid]
            seq = [(off, x) for off, x in self.images_on(eid)]
            if u in at_vertex:
                seq.insert(0, (Fraction(0), at_vertex[u]))
            if v in at_vertex:
                seq.append((L, at_vertex[v]))
            shift = Fraction(0)
            new_off = {}
            for (o1, a), (o2, b) in zip(seq, seq[1:]):
                if a == b:
                    continue
                gap = o2 - o1
                d = self.g.dist(a, b)
                if gap > d:
                    shift += gap - d
                    changed = True
                new_off[b] = o2 - shift
            if shift:
                self.edges[eid][2] = L - shift
                for x, (e, w, off) in enumerate(self.image):
                    if e == eid:
                        self.image[x] = (eid, -1, new_off.get(x, off))
        return changed


def normalize_to_proper_pushing(e: Embedding, max_rounds: int = 100000) -> Embedding:
    """Surgery that turns a non-contracting embedding into a proper, pushing one.

    Repeats: cut away an improper pattern vertex (with the bare segments next to
    it), else cut an improper image-free segment, else shrink slack gaps between
    consecutive images; stop when proper and pushing.  Distances between images
    of G-edges are never increased and no distance drops below d_G, so the
    distortion does not grow.  The resulting host is a quasi-subgraph of the
    input pattern (subdivided).
    """
    rep = distortion(e)
    if not rep.non_contracting:
        raise ContractError(f"input contracts the pair {rep.contraction_witness}")
    ok_p, _ = is_proper(e)
    ok_s, _ = is_pushing(e)
    if ok_p and ok_s:
        return e
    ws = _Workspace(e)
    for _ in range(max_rounds):
        cur, inv_v, inv_e = ws.build()
        proper, z = is_proper(cur)
        if not proper:
            if z.is_vertex:
                ws.cut_vertex(inv_v[z.vertex])
            else:
                eid = inv_e[z.edge]
                marks = [Fraction(0)] + [off for off, _ in ws.images_on(eid)] + [ws.edges[eid][2]]
                a = max(m for m in marks if m < z.offset)
                b = min(m for m in marks if m > z.offset)
                ws.cut_segment(eid, a, b)
            ws.prune()
            continue
        if ws.push():
            continue
        return cur
    raise RuntimeError("normalization did not converge")


# ---------------------------------------------------------------- line hosts and JSON

def line_host_embedding(g: Graph, order: Sequence[int], positions: Sequence[Fraction]) -> Embedding:
    """Embed onto a single segment: order[0] at one end, order[-1] at the other."""
    if len(order) == 1:
        host = WeightedSubdivision(PatternGraph(1, [], ["a"]), [])
        return Embedding(g, host, [vertex_point(0)])
    length = Fraction(positions[-1]) - Fraction(positions[0])
    host = WeightedSubdivision(PatternGraph(2, [(0, 1)], ["a", "b"]), [length])
    image: list[Point | None] = [None] * g.n
    for v, p in zip(order, positions):
        image[v] = host.point(0, Fraction(p) - Fraction(positions[0]))
    return Embedding(g, host, image)


def frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_frac(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational {s!r}") from exc


def embedding_to_json(e: Embedding) -> dict:
    """Serialize; images at pattern vertices are listed on their lowest incident edge at offset 0 or the length."""
    host = e.host
    p = host.pattern
    points: dict[str, list] = {str(i): [] for i in range(p.h)}
    vertex_points: dict[str, str] = {}
    for x, pt in enumerate(e.image):
        lab = e.source.labels[x]
        if pt.is_vertex:
            if p.incidence[pt.vertex]:
                eid, end = min(p.incidence[pt.vertex])
                off = Fraction(0) if end == 0 else host.lengths[eid]
                points[str(eid)].append({"vertex_label": lab, "offset": frac_str(off)})
            else:
                vertex_points[p.labels[pt.vertex]] = lab
        else:
            points[str(pt.edge)].append({"vertex_label": lab, "offset": frac_str(pt.offset)})
    for lst in points.values():
        lst.sort(key=lambda d: parse_frac(d["offset"]))
    out = {
        "pattern": {"vertices": list(p.labels),
                    "edges": [[i, p.labels[u], p.labels[v]] for i, (u, v) in enumerate(p.edges)]},
        "points": points,
        "edge_lengths": {str(i): frac_str(L) for i, L in enumerate(host.lengths)},
    }
    if vertex_points:
        out["vertex_points"] = vertex_points
    return out


def embedding_from_json(data: dict, g: Graph) -> Embedding:
    try:
        labels = [str(x) for x in data["pattern"]["vertices"]]
        lab_index = {lab: i for i, lab in enumerate(labels)}
        raw_edges = data["pattern"]["edges"]
        edges = [(lab_index[str(u)], lab_index[str(v)]) for _, u, v in raw_edges]
        ids = [int(eid) for eid, _, _ in raw_edges]
        if ids != list(range(len(ids))):
            raise ParseError("edge ids must be 0..h-1 in order")
        lengths = [parse_frac(data["edge_lengths"][str(i)]) for i in range(len(edges))]
        host = WeightedSubdivision(PatternGraph(len(labels), edges, labels), lengths)
        gindex = {lab: i for i, lab in enumerate(g.labels)}
        image: list[Point | None] = [None] * g.n
        entries = [(int(eid), d["vertex_label"], parse_frac(d["offset"]))
                   for eid, lst in data["points"].items() for d in lst]
        placed = [(host.point(eid, off), str(lab)) for eid, lab, off in entries]
        placed += [(vertex_point(lab_index[pv]), str(lab)) for pv, lab in data.get("vertex_points", {}).items()]
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"malformed embedding JSON: {exc}") from exc
    for pt, lab in placed:
        if lab not in gindex:
            raise MismatchError(f"embedding mentions unknown vertex {lab}")
        if image[gindex[lab]] is not None:
            raise MismatchError(f"vertex {lab} placed twice")
        image[gindex[lab]] = pt
    if any(p is None for p in image):
        raise MismatchError("embedding does not place every vertex of the graph")
    return Embedding(g, host, image)


def dump_embedding(e: Embedding) -> str:
    return json.dumps(embedding_to_json(e), indent=2, sort_keys=True)


def expanded_graph(e: Embedding) -> tuple[nx.Graph, list]:
    """Materialize the host with image points as explicit nodes (for cross-checking)."""
    host = e.host
    g = nx.MultiGraph()
    for v in range(host.pattern.n):
        g.add_node(("v", v))
    on_edge: list[list[Fraction]] = [[] for _ in range(host.pattern.h)]
    for p in e.image:
        if not p.is_vertex:
            on_edge[p.edge].append(p.offset)
    for eid, (u, v) in enumerate(host.pattern.edges):
        marks = sorted(on_edge[eid])
        nodes = [("v", u)] + [("e", eid, m) for m in marks] + [("v", v)]
        offs = [Fraction(0)] + marks + [host.lengths[eid]]
        for a, b, oa, ob in zip(nodes, nodes[1:], offs, offs[1:]):
            g.add_edge(a, b, weight=ob - oa)
    keys = [("v", p.vertex) if p.is_vertex else ("e", p.edge, p.offset) for p in e.image]
    return g, keys
