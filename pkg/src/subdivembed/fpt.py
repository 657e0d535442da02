"""Exact decision of c-embeddability into subdivisions of a fixed pattern.

The driver walks the quasi-subgraphs H' of the pattern.  Chains (H' of
maximum degree two) are decided exactly by the line and cycle searches.
Branching H' go through the cluster machinery: CLUSTER places vertices on a
cluster of short edges by solving a small exact LP per configuration, and
PATH fills a chain of long edges by a windowed search between two fixed
windows.  A "No" is only reported when every branch that matters for
completeness ran to the end; otherwise BudgetError is raised.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .embedding_model import (
    Embedding,
    PatternGraph,
    Point,
    WeightedSubdivision,
    distortion,
    enumerate_quasi_subgraphs,
    host_distance,
    vertex_point,
)
from .errors import Budget, BudgetError
from .graph_core import Graph, ball, components, local_density_filter
from .line_embed import CycleEmbedding, LineEmbedding, cycle_embed_exact, line_embed_exact, pushed
from .lp import solve_lp

DEFAULT_FPT_BUDGET = 2_000_000
GADGET_MAX_VERTICES = 400  # larger augmented graphs make the final verification too slow


@dataclass(frozen=True)
class FptParams:
    c: int
    short_threshold: int
    delta: int
    window: int
    interesting_cap: int
    component_cap: int


def fpt_params(c: int, hq: PatternGraph, h_edges: int) -> FptParams:
    """Thresholds for one quasi-subgraph; ``h_edges`` is |E(H)| of the original pattern."""
    return FptParams(
        c=c,
        short_threshold=16 * c ** 4,
        delta=pattern_diameter(hq) + 8 * c ** 4,
        window=4 * c * c + 1,
        interesting_cap=8 * c * (pattern_diameter(hq) + 8 * c ** 4) * h_edges,
        component_cap=(4 * c * h_edges) ** 2,
    )


def pattern_diameter(p: PatternGraph) -> int:
    """Hop diameter of a connected pattern."""
    best = 0
    for s in range(p.n):
        seen = {s: 0}
        frontier = [s]
        while frontier:
            nxt = []
            for x in frontier:
                for eid, end in p.incidence[x]:
                    y = p.edges[eid][1 - end]
                    if y not in seen:
                        seen[y] = seen[x] + 1
                        nxt.append(y)
            frontier = nxt
        best = max(best, max(seen.values()))
    return best


@dataclass(frozen=True)
class No:
    """A certified negative answer and the reason it was reached."""

    reason: str
    detail: object = None


@dataclass(frozen=True)
class TooMany:
    size: int
    cap: int


# ---------------------------------------------------------------- interesting vertices

def is_alpha_interesting(g: Graph, v: int, alpha: int, c: int, budget: int | Budget = 1_000_000) -> bool:
    """True iff the radius-alpha ball around v has no c-embedding into the line (all pairs count)."""
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    members = sorted(ball(g, v, alpha))
    matrix = [[g.dist(a, b) for b in members] for a in members]
    return line_embed_exact(matrix, c, budget) is None


def delta_interesting_set(g: Graph, hq: PatternGraph, c: int, h_edges: int | None = None,
                          budget: int | Budget = 1_000_000) -> frozenset[int] | TooMany:
    """All Delta-interesting vertices, or TooMany when there are more than the cap allows."""
    params = fpt_params(c, hq, hq.h if h_edges is None else h_edges)
    counter = budget if isinstance(budget, Budget) else Budget(budget)
    found = frozenset(v for v in range(g.n) if is_alpha_interesting(g, v, params.delta, c, counter))
    if len(found) > params.interesting_cap:
        return TooMany(len(found), params.interesting_cap)
    return found


# ---------------------------------------------------------------- CLUSTER

@dataclass(frozen=True)
class ClusterConfiguration:
    """Vertices of S split over the edges of C, each part ordered from the edge's first end."""

    parts: tuple[tuple[int, ...], ...]


@dataclass
class ClusterSolution:
    configuration: ClusterConfiguration
    alpha: tuple[Fraction, ...]
    beta: tuple[Fraction, ...]
    host: WeightedSubdivision
    image: dict[int, Point]

    @property
    def lengths(self) -> tuple[Fraction, ...]:
        return self.host.lengths

    def along(self, eid: int, from_end: int) -> list[tuple[Fraction, int]]:
        """Images on the closed edge ``eid`` as (distance from the chosen end, vertex), nearest first."""
        length = self.host.lengths[eid]
        u, v = self.host.pattern.edges[eid]
        out = []
        for x, p in self.image.items():
            if p.is_vertex:
                if u == v and p.vertex == u:
                    continue
                if p.vertex == (u, v)[from_end]:
                    out.append((Fraction(0), x))
                elif p.vertex == (u, v)[1 - from_end]:
                    out.append((length, x))
            elif p.edge == eid:
                out.append((p.offset if from_end == 0 else length - p.offset, x))
        return sorted(out)


def cluster_emission_bound(s: int, c_edges: int, c_vertices: int) -> int:
    return c_edges ** s * math.factorial(s) * math.factorial(max(c_vertices - 2, 0))


def simple_paths(p: PatternGraph, s: int, t: int) -> list[tuple[int, ...]]:
    """Vertex-simple paths from s to t as edge-id tuples; the empty path when s == t."""
    out: list[tuple[int, ...]] = []

    def walk(x: int, seen: set[int], path: list[int]) -> None:
        if x == t:
            out.append(tuple(path))
            return
        for eid, end in p.incidence[x]:
            y = p.edges[eid][1 - end]
            if y in seen or y == x:
                continue
            seen.add(y)
            path.append(eid)
            walk(y, seen, path)
            path.pop()
            seen.discard(y)

    walk(s, {s}, [])
    return out


def _orderings(part: Sequence[int], dist, max_gap: int | None) -> Iterator[tuple[int, ...]]:
    if max_gap is None:
        yield from itertools.permutations(part)
        return

    def grow(prefix: list[int], rest: list[int]) -> Iterator[tuple[int, ...]]:
        if not rest:
            yield tuple(prefix)
            return
        for i, x in enumerate(rest):
            if prefix and dist(prefix[-1], x) > max_gap:
                continue
            prefix.append(x)
            yield from grow(prefix, rest[:i] + rest[i + 1:])
            prefix.pop()

    yield from grow([], list(part))


def configurations(S: Sequence[int], C: PatternGraph, dist, max_gap: int | None = None
                   ) -> Iterator[ClusterConfiguration]:
    """Every split of S over E(C) with every ordering of every part."""
    S = sorted(S)
    k = C.h
    for assign in itertools.product(range(k), repeat=len(S)):
        groups: list[list[int]] = [[] for _ in range(k)]
        for x, e in zip(S, assign):
            groups[e].append(x)
        for combo in itertools.product(*(list(_orderings(grp, dist, max_gap)) for grp in groups)):
            yield ClusterConfiguration(tuple(combo))


class _ClusterLP:
    """Linear pieces of one configuration: variables alpha_i = x[2i], beta_i = x[2i+1]."""

    def __init__(self, C: PatternGraph, cfg: ClusterConfiguration, dist, c: int) -> None:
        self.C, self.cfg, self.dist, self.c = C, cfg, dist, c
        self.nv = 2 * C.h
        self.where: dict[int, tuple[int, Fraction]] = {}
        self.span: list[Fraction] = []
        for eid, part in enumerate(cfg.parts):
            pos = Fraction(0)
            for j, x in enumerate(part):
                if j:
                    pos += dist(part[j - 1], x)
                self.where[x] = (eid, pos)
            self.span.append(pos)
        self.paths: dict[tuple[int, int], list[tuple[int, ...]]] = {}

    def _paths(self, s: int, t: int) -> list[tuple[int, ...]]:
        if (s, t) not in self.paths:
            self.paths[(s, t)] = simple_paths(self.C, s, t)
        return self.paths[(s, t)]

    def exits(self, x: int) -> list[tuple[int, dict[int, int], Fraction]]:
        """(pattern vertex, variable coefficients, constant) for leaving x's edge at either end."""
        eid, pos = self.where[x]
        u, v = self.C.edges[eid]
        return [(u, {2 * eid: 1}, pos), (v, {2 * eid + 1: 1}, self.span[eid] - pos)]

    def routes(self, x: int, y: int) -> Iterator[tuple[dict[int, int], Fraction]]:
        """Every exit-path-exit route between the images of x and y as a linear expression."""
        for s, cs, ks in self.exits(x):
            for t, ct, kt in self.exits(y):
                for path in self._paths(s, t):
                    coef: dict[int, int] = {}
                    const = ks + kt
                    for d in (cs, ct):
                        for var, a in d.items():
                            coef[var] = coef.get(var, 0) + a
                    for eid in path:
                        coef[2 * eid] = coef.get(2 * eid, 0) + 1
                        coef[2 * eid + 1] = coef.get(2 * eid + 1, 0) + 1
                        const += self.span[eid]
                    yield coef, const

    def base_constraints(self) -> tuple[list[list[Fraction]], list[Fraction]]:
        rows, rhs = [], []
        extremes = sorted({x for part in self.cfg.parts if part for x in (part[0], part[-1])})
        for x, y in itertools.combinations(extremes, 2):
            d = self.dist(x, y)
            for coef, const in self.routes(x, y):
                rows.append(self._row(coef, -1))
                rhs.append(const - d)
        for eid, part in enumerate(self.cfg.parts):
            if len(part) == 1:
                # a lone image may not stand for both ends of its edge
                row = [Fraction(0)] * self.nv
                row[2 * eid] = row[2 * eid + 1] = Fraction(-1)
                rows.append(row)
                rhs.append(Fraction(-1, 2))
        return rows, rhs

    def _row(self, coef: dict[int, int], sign: int) -> list[Fraction]:
        row = [Fraction(0)] * self.nv
        for var, a in coef.items():
            row[var] = Fraction(sign * a)
        return row

    def upper_route(self, coef: dict[int, int], const: Fraction, bound: Fraction) -> tuple[list[Fraction], Fraction]:
        return self._row(coef, 1), bound - const

    def assemble(self, x: Sequence[Fraction]) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...],
                                                        WeightedSubdivision, dict[int, Point]]:
        alpha = tuple(x[2 * i] for i in range(self.C.h))
        beta = tuple(x[2 * i + 1] for i in range(self.C.h))
        lengths = []
        for i in range(self.C.h):
            L = alpha[i] + self.span[i] + beta[i]
            lengths.append(L if L > 0 else Fraction(1, 2))
        host = WeightedSubdivision(self.C, lengths)
        image = {v: host.point(eid, alpha[eid] + pos) for v, (eid, pos) in self.where.items()}
        return alpha, beta, host, image


def _check_solution(S: Sequence[int], host: WeightedSubdivision, image: dict[int, Point], dist, c: int,
                    cfg: ClusterConfiguration) -> tuple[int, int] | None:
    """First pair breaking the solution conditions, or None; raises nothing."""
    pts = list(image.values())
    if len(set(pts)) != len(pts):
        return (S[0], S[0])
    for x, y in itertools.combinations(sorted(S), 2):
        hd = host_distance(host, image[x], image[y])
        d = dist(x, y)
        if hd < d or hd > c * d:
            return (x, y)
    for part in cfg.parts:
        for x, y in zip(part, part[1:]):
            if host_distance(host, image[x], image[y]) != dist(x, y):
                return (x, y)
    return None


def cluster_solutions(S: Sequence[int], C: PatternGraph, dist, c: int, budget: int | Budget = 1_000_000,
                      max_gap: int | None = None) -> Iterator[ClusterSolution]:
    """Lazily emit at most one verified solution per configuration of (S, C).

    The LP minimizes the total end offsets subject to non-contraction of every
    exit-path-exit route between part extremes.  Stretch is enforced lazily:
    when some pair is stretched beyond c, the search branches on which route
    of that pair is made short enough and re-solves.  ``max_gap`` drops
    orderings with a consecutive pair farther apart than that (valid when S
    holds every vertex of a proper embedding).
    """
    counter = budget if isinstance(budget, Budget) else Budget(budget)
    S = sorted(S)
    for cfg in configurations(S, C, dist, max_gap):
        counter.spend(1, "cluster_solutions")
        model = _ClusterLP(C, cfg, dist, c)
        rows, rhs = model.base_constraints()
        found = _solve_with_stretch(model, S, rows, rhs, counter, depth=len(S) * len(S))
        if found is not None:
            alpha, beta, host, image = found
            yield ClusterSolution(cfg, alpha, beta, host, image)


def _solve_with_stretch(model: _ClusterLP, S, rows, rhs, counter: Budget, depth: int):
    counter.spend(1, "cluster_solutions.lp")
    res = solve_lp([1] * model.nv, rows, rhs)
    if res.status != "optimal":
        return None
    alpha, beta, host, image = model.assemble(res.x)
    bad = _check_solution(S, host, image, model.dist, model.c, model.cfg)
    if bad is None:
        return alpha, beta, host, image
    x, y = bad
    if depth <= 0 or x == y:
        return None
    d = model.dist(x, y)
    if host_distance(host, image[x], image[y]) < d:
        return None  # only possible through the lengths given to empty edges
    same = model.where[x][0] == model.where[y][0]
    if same and abs(model.where[x][1] - model.where[y][1]) <= model.c * d:
        return None
    for coef, const in model.routes(x, y):
        row, b = model.upper_route(coef, const, model.c * d)
        found = _solve_with_stretch(model, S, rows + [row], rhs + [b], counter, depth - 1)
        if found is not None:
            return found
    return None


# ---------------------------------------------------------------- PATH

@dataclass(frozen=True)
class PathCluster:
    """A chain of long edges through degree-two pattern vertices.

    ``vertices`` runs from the start vertex (in an interesting cluster) to the
    end vertex; ``edges[i]`` joins vertices[i] and vertices[i + 1].  ``closed``
    is True when the chain ends in an interesting cluster (possibly the same one).
    """

    vertices: tuple[int, ...]
    edges: tuple[int, ...]
    closed: bool


@dataclass(frozen=True)
class PathFragment:
    order: tuple[int, ...]
    positions: tuple[Fraction, ...]


def z_ell(g: Graph, c: int) -> frozenset[int]:
    """Vertices whose (4c^2+1)c-ball could lie on one segment of a c-embedding."""
    radius = (4 * c * c + 1) * c
    cap = 2 * radius * c + 1
    return frozenset(v for v in range(g.n) if len(ball(g, v, radius)) <= cap)


def path_embed(g: Graph, W: Sequence[int], S: Sequence[int], T: Sequence[int], c: int,
               chain: PathCluster | None = None, budget: int | Budget = 1_000_000) -> PathFragment | None:
    """Lay out S, then all of W, then T (if given) along a chain, pushed, or return None.

    The search walks the succession graph of window states: a state is the
    placed set, the last vertex and the offsets of placed vertices that still
    have unplaced neighbours.  Every consecutive gap must be at most c and
    every edge among the laid-out vertices stretched by at most c.
    """
    counter = budget if isinstance(budget, Budget) else Budget(budget)
    S, T, W = list(S), list(T), sorted(set(W))
    if chain is not None and chain.closed != bool(T):
        raise ValueError("T must be given exactly when the chain ends in an interesting cluster")
    if set(W) & (set(S) | set(T)) or set(S) & set(T) or not S:
        return None
    allowed = z_ell(g, c)
    if any(v not in allowed for v in W):
        return None
    local = S + W + T
    index = {v: i for i, v in enumerate(local)}
    nbrs = [[index[y] for y in g.adj[v] if y in index] for v in local]
    m = len(local)

    def unplaced(i: int, mask: int) -> bool:
        return any(not mask >> j & 1 for j in nbrs[i])

    def place(state, i):
        """Append local vertex i to state=(mask, last, active); None if infeasible."""
        mask, last, active = state
        gap = g.dist(local[last], local[i]) if last >= 0 else 0
        if gap > c:
            return None
        nmask = mask | 1 << i
        nxt = []
        for y, back in active:
            nb = back + gap
            if i in nbrs[y] and nb > c:
                return None
            if unplaced(y, nmask):
                if nb + 1 > c:
                    return None
                nxt.append((y, nb))
        if unplaced(i, nmask):
            nxt.append((i, 0))
        return nmask, i, tuple(sorted(nxt))

    state = (0, -1, ())
    for i in range(len(S)):
        state = place(state, i)
        if state is None:
            return None
    w_idx = list(range(len(S), len(S) + len(W)))
    t_idx = list(range(len(S) + len(W), m))
    dead: set = set()
    path: list[int] = []

    def finish(st) -> bool:
        for i in t_idx:
            st = place(st, i)
            if st is None:
                return False
        return True

    def extend(st) -> bool:
        mask = st[0]
        if all(mask >> i & 1 for i in w_idx):
            return finish(st)
        if st in dead:
            return False
        counter.spend(1, "path_embed")
        for i in w_idx:
            if mask >> i & 1:
                continue
            nst = place(st, i)
            if nst is None:
                continue
            path.append(i)
            if extend(nst):
                return True
            path.pop()
        dead.add(st)
        return False

    if not extend(state):
        return None
    order = S + [local[i] for i in path] + T
    le = pushed(order, g.dist)
    return PathFragment(le.order, le.positions)


# ---------------------------------------------------------------- chain hosts

def _cycle_order(p: PatternGraph) -> tuple[list[int], list[int]]:
    """Vertices and edges of a cycle pattern in walking order."""
    verts, edges = [0], []
    used: set[int] = set()
    x = 0
    while True:
        eid, end = next((e, en) for e, en in p.incidence[x] if e not in used)
        used.add(eid)
        edges.append(eid)
        y = p.edges[eid][1 - end]
        if len(used) == p.h:
            return verts, edges
        verts.append(y)
        x = y


def _path_order(p: PatternGraph) -> tuple[list[int], list[int]]:
    start = next(v for v in range(p.n) if p.degree(v) <= 1)
    verts, edges = [start], []
    x, prev = start, -1
    while len(edges) < p.h:
        eid, end = next((e, en) for e, en in p.incidence[x] if e != prev)
        edges.append(eid)
        prev = eid
        x = p.edges[eid][1 - end]
        verts.append(x)
    return verts, edges


def is_chain(p: PatternGraph) -> bool:
    return p.is_connected() and all(p.degree(v) <= 2 for v in range(p.n))


def is_closed_chain(p: PatternGraph) -> bool:
    return is_chain(p) and p.h == p.n


def _candidates(points: list[Fraction], need: int, total: Fraction | None) -> list[Fraction]:
    """Image positions plus midpoints, bisected until there are at least ``need`` of them."""
    pts = sorted(set(points))
    while len(pts) < need:
        ring = pts + ([pts[0] + total] if total is not None else [])
        mids = [(a + b) / 2 for a, b in zip(ring, ring[1:])]
        if total is not None:
            mids = [m % total for m in mids]
        pts = sorted(set(pts) | set(mids))
    return pts


def chain_embedding(g: Graph, hq: PatternGraph, positions: dict[int, Fraction], total: Fraction | None,
                    anchors: list[Fraction] | None = None) -> Embedding:
    """Map a line layout (total None) or cycle layout of G onto the chain pattern hq.

    Pattern vertices go to ``anchors`` if given, otherwise to evenly spread
    image positions or midpoints; on a line the two ends are the extreme images.
    """
    closed = total is not None
    verts, edges = _cycle_order(hq) if closed else _path_order(hq)
    k = len(verts)
    if anchors is None:
        cand = _candidates(list(positions.values()), k if closed else max(k, 2), total if closed else None)
        if closed:
            anchors = [cand[(i * len(cand)) // k] for i in range(k)]
        else:
            step = (len(cand) - 1) / max(k - 1, 1)
            anchors = [cand[round(i * step)] for i in range(k)] if k > 1 else [cand[0]]
    if not closed:
        base = anchors[0]
        anchors = [a - base for a in anchors]
        positions = {v: p - base for v, p in positions.items()}
    lengths = [Fraction(0)] * hq.h
    for i, eid in enumerate(edges):
        a = anchors[i]
        b = anchors[(i + 1) % k] if closed else anchors[i + 1]
        L = (b - a) % total if closed else b - a
        lengths[eid] = L if L > 0 else total
    host = WeightedSubdivision(hq, lengths)
    image: list[Point] = []
    for v in range(g.n):
        p = positions[v]
        pt = None
        for i, eid in enumerate(edges):
            a = anchors[i]
            off = (p - a) % total if closed else p - a
            if off == 0:
                pt = vertex_point(verts[i])
                break
            if 0 < off < lengths[eid]:
                u, _ = hq.edges[eid]
                pt = host.point(eid, off if u == verts[i] else lengths[eid] - off)
                break
        if pt is None:
            if not closed and p == anchors[-1]:
                pt = vertex_point(verts[-1])
            else:
                raise ValueError(f"position {p} of vertex {v} is off the chain")
        image.append(pt)
    return Embedding(g, host, image)


# ---------------------------------------------------------------- clique gadget

@dataclass(frozen=True)
class GadgetVariant:
    """H with a clique attached: ``attachments`` lists ("v", vertex) or ("e", edge) of H."""

    pattern: PatternGraph
    attachments: tuple[tuple[str, int], ...]
    clique_vertex: int
    connector_edges: tuple[int, ...]
    attach_vertices: tuple[int, ...]


def augment_with_clique_gadget(g: Graph, h: PatternGraph, c: int) -> tuple[Graph, list[GadgetVariant]]:
    """G plus K_k (k = 8c|E(H)|) joined by three paths of length 16c^4+1, and every H_k variant.

    The paths start at the clique vertex n and end at vertices 0, 1, 2 of G.
    Connector vertices for path i are numbered consecutively after the clique,
    nearest the clique first.
    """
    if g.n < 3:
        raise ValueError("the gadget needs at least three vertices in G")
    k = 8 * c * h.h
    plen = 16 * c ** 4 + 1
    edges = list(g.edges)
    clique = list(range(g.n, g.n + k))
    edges += list(itertools.combinations(clique, 2))
    nxt = g.n + k
    for target in (0, 1, 2):
        prev = clique[0]
        for _ in range(plen - 1):
            edges.append((prev, nxt))
            prev = nxt
            nxt += 1
        edges.append((prev, target))
    labels = list(g.labels) + [f"k{i}" for i in range(k)] + [f"p{i}" for i in range(nxt - g.n - k)]
    gp = Graph(nxt, edges, labels)
    elements = [("v", v) for v in range(h.n)] + [("e", e) for e in range(h.h)]
    variants = []
    for trio in itertools.combinations(elements, 3):
        hedges = list(h.edges)
        n = h.n
        labels_h = list(h.labels)
        attach = []
        for kind, x in trio:
            if kind == "v":
                attach.append(x)
            else:
                u, v = h.edges[x]
                hedges[x] = (u, n)
                hedges.append((n, v))
                labels_h.append(f"s{x}")
                attach.append(n)
                n += 1
        base = n
        hedges += [(base + a, base + b) for a, b in itertools.combinations(range(k), 2)]
        labels_h += [f"k{i}" for i in range(k)]
        conn = []
        for a in attach:
            conn.append(len(hedges))
            hedges.append((base, a))
        pat = PatternGraph(base + k, hedges, labels_h)
        variants.append(GadgetVariant(pat, trio, base, tuple(conn), tuple(attach)))
    return gp, variants


def _place_pins(g: Graph, h: PatternGraph, positions: dict[int, Fraction], total: Fraction | None,
                pins: list[tuple[tuple[str, int], int]]) -> Embedding | None:
    """Anchor the chain pattern h so that every pinned G-vertex lands on its vertex or inside its edge."""
    closed = total is not None
    verts, edges = _cycle_order(h) if closed else _path_order(h)
    k = len(verts)
    span = max(positions.values()) if not closed else total
    pool = sorted(set(positions.values()) | {(a + b) / 2 for a, b in itertools.pairwise(sorted(set(positions.values())))})
    if closed:
        ring = sorted(set(positions.values()))
        pool = sorted(set(pool) | {(ring[-1] + ring[0] + total) / 2 % total})
    else:
        pool = sorted(set(pool) | {Fraction(-1), span + 1})
    vindex = {x: i for i, x in enumerate(verts)}
    eindex = {e: i for i, e in enumerate(edges)}
    for anchors in itertools.combinations(pool, k):
        orientations = [list(anchors)]
        if closed:
            orientations = [list(anchors[r:] + anchors[:r]) for r in range(k)]
            orientations += [list(reversed(o)) for o in orientations]
        elif k > 1:
            orientations.append(list(reversed(anchors)))
        for anc in orientations:
            if not closed and anc[0] > anc[-1]:
                continue
            ok = True
            for (kind, x), v in pins:
                p = positions[v]
                if kind == "v":
                    ok = anc[vindex[x]] == p
                else:
                    i = eindex[x]
                    a = anc[i]
                    b = anc[(i + 1) % k] if closed else anc[i + 1]
                    if closed:
                        ok = 0 < (p - a) % total < (b - a) % total if (b - a) % total else p != a
                        if anc != sorted(anc) and not _cyclic_sorted(anc, total):
                            ok = False
                    else:
                        ok = a < p < b
                if not ok:
                    break
            if ok and closed and not _cyclic_sorted(anc, total):
                ok = False
            if ok:
                try:
                    return chain_embedding(g, h, positions, total, anc)
                except ValueError:
                    continue
    return None


def _cyclic_sorted(anc: list[Fraction], total: Fraction) -> bool:
    """True if the anchors appear in increasing cyclic order starting from anc[0]."""
    rel = [(a - anc[0]) % total for a in anc]
    return rel == sorted(rel) and len(set(rel)) == len(rel)


def _split_host_at(e: Embedding, splits: dict[int, int]) -> tuple[WeightedSubdivision, list[Point], dict[int, int]]:
    """Subdivide the host at the images of the given G-vertices (vertex -> new pattern vertex id).

    Returns the new host, new images and the new pattern-vertex id of each split vertex.
    The new pattern vertices are appended in the order of ``splits``.
    """
    p = e.host.pattern
    edges = list(p.edges)
    lengths = list(e.host.lengths)
    labels = list(p.labels)
    images = list(e.image)
    at: dict[int, int] = {}
    n = p.n
    for v in splits:
        pt = images[v]
        if pt.is_vertex:
            at[v] = pt.vertex
            continue
        eid, off = pt.edge, pt.offset
        u, w = edges[eid]
        L = lengths[eid]
        edges[eid] = (u, n)
        lengths[eid] = off
        edges.append((n, w))
        lengths.append(L - off)
        new_eid = len(edges) - 1
        labels.append(f"s{v}")
        for x, q in enumerate(images):
            if not q.is_vertex and q.edge == eid:
                if q.offset == off:
                    images[x] = vertex_point(n)
                elif q.offset > off:
                    images[x] = Point(edge=new_eid, offset=q.offset - off)
        at[v] = n
        n += 1
    host = WeightedSubdivision(PatternGraph(n, edges, labels), lengths)
    return host, images, at


def gadget_route(g: Graph, h: PatternGraph, c: int, counter: Budget, stats: dict) -> Embedding | None:
    """Try to find a c-embedding of G through the clique gadget (YES answers only).

    Supported for chain patterns.  For every variant and assignment of
    v1, v2, v3 to the attachments, a pinned chain layout of G is placed on H,
    the clique and connector paths are added (connectors laid out by PATH
    between their two end windows), the augmented embedding is verified, and
    its restriction to G is verified again.
    """
    if g.n < 3 or not is_chain(h):
        stats["gadget_skipped"] = "needs |V(G)| >= 3 and a chain pattern"
        return None
    k = 8 * c * h.h
    plen = 16 * c ** 4 + 1
    if g.n + k + 3 * (plen - 1) > GADGET_MAX_VERTICES:
        stats["gadget_skipped"] = "augmented graph too large"
        return None
    stats["gadget_attempted"] = True
    gp, variants = augment_with_clique_gadget(g, h, c)
    closed = is_closed_chain(h)
    layouts: dict[tuple, tuple[dict[int, Fraction], Fraction | None] | None] = {}

    def layout(key):
        if key not in layouts:
            if key[0] == "cycle":
                ce = cycle_embed_exact(g, c, counter)
                layouts[key] = None if ce is None else (dict(zip(ce.order, ce.positions)), ce.total)
            else:
                le = line_embed_exact(g, c, counter, first=key[1], last=key[2])
                layouts[key] = None if le is None else (le.position_of(), None)
        return layouts[key]

    w = 4 * c * c + 1
    for var in variants:
        for perm in itertools.permutations((0, 1, 2)):
            counter.spend(1, "gadget_route")
            pins = [(var.attachments[i], perm[i]) for i in range(3)]
            keys = [("line", None, None)]
            if closed:
                keys.insert(0, ("cycle",))
            else:
                ends = [v for (kind, x), v in pins if kind == "v"]
                keys = [("line", a, b) for a in ends for b in ends if a != b] + keys
            for key in keys:
                lay = layout(key)
                if lay is None:
                    continue
                positions, total = lay
                if closed and total is None:
                    total = max(positions.values()) * 2
                emb = _place_pins(g, h, positions, total, pins)
                if emb is None or not _verified(emb, c):
                    continue
                full = _gadget_embedding(gp, g, emb, var, perm, c, w, counter)
                if full is None:
                    continue
                stats["gadget_succeeded"] = True
                emb.notes.update({"route": "gadget", "variant": var.attachments})
                return emb
    return None


def _gadget_embedding(gp: Graph, g: Graph, emb: Embedding, var: GadgetVariant, perm, c: int, w: int,
                      counter: Budget) -> Embedding | None:
    attach_g = {}
    for i, (kind, x) in enumerate(var.attachments):
        attach_g[perm[i]] = (kind, x)
    edge_pins = {v: None for v, (kind, _) in attach_g.items() if kind == "e"}
    host, images, at = _split_host_at(emb, edge_pins)
    p = host.pattern
    # rebuild the clique part on top of the split host
    k = var.pattern.n - var.clique_vertex
    edges = list(p.edges)
    lengths = list(host.lengths)
    labels = list(p.labels)
    base = p.n
    for a, b in itertools.combinations(range(k), 2):
        edges.append((base + a, base + b))
        lengths.append(Fraction(1))
    labels += [f"k{i}" for i in range(k)]
    plen = 16 * c ** 4 + 1
    conn = []
    for v in (0, 1, 2):
        kind, x = attach_g[v]
        target = x if kind == "v" else at[v]
        conn.append(len(edges))
        edges.append((base, target))
        lengths.append(Fraction(plen))
    hostp = WeightedSubdivision(PatternGraph(base + k, edges, labels), lengths)
    image = list(images) + [vertex_point(base + i) for i in range(k)]
    first_conn = g.n + k
    for i in range(3):
        path_vs = list(range(first_conn + i * (plen - 1), first_conn + (i + 1) * (plen - 1)))
        S, T, W = path_vs[:w], path_vs[-w:], path_vs[w:-w]
        frag = path_embed(gp, W, S, T, c, PathCluster((base, 0), (conn[i],), True), counter)
        if frag is None:
            return None
        for v, pos in zip(frag.order, frag.positions):
            image.append(None)
            image[v] = hostp.point(conn[i], 1 + pos)
        image = image[:gp.n]
    full = Embedding(gp, hostp, image)
    return full if _verified(full, c) else None


def _verified(e: Embedding, c: int) -> bool:
    try:
        rep = distortion(e)
    except Exception:
        return False
    return rep.non_contracting and rep.distortion <= c


# ---------------------------------------------------------------- driver

def fpt_embed(g: Graph, h: PatternGraph, c: int, budget: int | Budget = DEFAULT_FPT_BUDGET,
              gadget: bool = True, stats: dict | None = None) -> Embedding | No:
    """A verified non-contracting c-embedding of g into a subdivision of a quasi-subgraph of h, or No.

    Raises BudgetError (with the branch in ``where``) when the search could
    not be completed within the budget.
    """
    if c < 1:
        raise ValueError("c must be at least 1")
    if h.h < 1:
        raise ValueError("the pattern needs at least one edge")
    counter = budget if isinstance(budget, Budget) else Budget(budget)
    stats = {} if stats is None else stats
    stats.update(gadget_attempted=False, gadget_succeeded=False, incomplete=[])
    if g.n == 1:
        host = WeightedSubdivision(PatternGraph(1, [], ["a"]), [])
        return Embedding(g, host, [vertex_point(0)], {"route": "trivial"})
    witness = local_density_filter(g, h.h, c)
    if witness is not None:
        return No("density", witness)
    if gadget:
        emb = gadget_route(g, h, c, counter, stats)
        if emb is not None:
            return emb
    line_cache: list = []
    cycle_cache: list = []
    for qi, q in enumerate(enumerate_quasi_subgraphs(h)):
        hq = q.pattern
        where = f"quasi-subgraph {qi} ({hq.n} vertices, {hq.h} edges)"
        try:
            if hq.h == 0:
                continue
            if is_chain(hq):
                emb = _chain_branch(g, hq, c, counter, line_cache, cycle_cache)
            else:
                emb = _branching(g, hq, h.h, c, counter, stats, where)
        except BudgetError as exc:
            raise BudgetError(f"budget exhausted in {where}: {exc}", f"{where}; {exc.where}") from exc
        if emb is not None:
            emb.notes.setdefault("quasi_subgraph", qi)
            return emb
    if stats["incomplete"]:
        raise BudgetError("search incomplete: " + "; ".join(stats["incomplete"]), stats["incomplete"][0])
    return No("exhausted")


def _chain_branch(g: Graph, hq: PatternGraph, c: int, counter: Budget, line_cache: list,
                  cycle_cache: list) -> Embedding | None:
    if is_closed_chain(hq):
        if not cycle_cache:
            cycle_cache.append(cycle_embed_exact(g, c, counter))
        ce: CycleEmbedding | None = cycle_cache[0]
        if ce is None or g.n < 3:
            return None
        emb = chain_embedding(g, hq, dict(zip(ce.order, ce.positions)), ce.total)
    else:
        if not line_cache:
            line_cache.append(line_embed_exact(g, c, counter))
        le: LineEmbedding | None = line_cache[0]
        if le is None:
            return None
        emb = chain_embedding(g, hq, le.position_of(), None)
    if not _verified(emb, c):
        raise AssertionError("chain layout failed verification")
    emb.notes["route"] = "chain"
    return emb


def _branching(g: Graph, hq: PatternGraph, h_edges: int, c: int, counter: Budget, stats: dict,
               where: str) -> Embedding | None:
    """All short-edge sets of a branching quasi-subgraph, ascending in size.

    The all-short set (one cluster holding every vertex) is an exact search on
    its own, so the long-edge branches only add chances to stop early.
    """
    for size in range(hq.h + 1):
        for short in itertools.combinations(range(hq.h), size):
            short = frozenset(short)
            if len(short) == hq.h:
                for sol in cluster_solutions(range(g.n), hq, g.dist, c, counter, max_gap=c):
                    emb = Embedding(g, sol.host, [sol.image[v] for v in range(g.n)], {"route": "cluster"})
                    if _verified(emb, c):
                        return emb
                continue
            emb = _long_edge_branch(g, hq, short, h_edges, c, counter, stats, where)
            if emb is not None:
                return emb
    return None


def cluster_structure(hq: PatternGraph, short: frozenset[int]) -> tuple[list[list[int]], list[int], list[PathCluster] | None]:
    """Clusters (vertex lists), indices of interesting clusters, and the path clusters.

    Path clusters are None when a chain passes through a boring cluster that
    is not a single degree-two vertex (a shape the assembly does not cover).
    """
    parent = list(range(hq.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for eid in short:
        u, v = hq.edges[eid]
        parent[find(u)] = find(v)
    groups: dict[int, list[int]] = {}
    for v in range(hq.n):
        groups.setdefault(find(v), []).append(v)
    clusters = sorted(groups.values())
    cid = {v: i for i, cl in enumerate(clusters) for v in cl}
    ends = [0] * len(clusters)
    for eid, (u, v) in enumerate(hq.edges):
        if eid not in short:
            ends[cid[u]] += 1
            ends[cid[v]] += 1
    interesting = [i for i in range(len(clusters)) if ends[i] >= 3]
    chains: list[PathCluster] = []
    used: set[int] = set()
    for i in interesting:
        for a in clusters[i]:
            for eid, end in hq.incidence[a]:
                if eid in short or eid in used:
                    continue
                verts, edges = [a], [eid]
                used.add(eid)
                x = hq.edges[eid][1 - end]
                while cid[x] not in interesting:
                    cl = clusters[cid[x]]
                    if len(cl) != 1:
                        return clusters, interesting, None
                    verts.append(x)
                    more = [(e2, en) for e2, en in hq.incidence[x] if e2 not in used and e2 not in short]
                    if not more:
                        break
                    e2, en = more[0]
                    used.add(e2)
                    edges.append(e2)
                    x = hq.edges[e2][1 - en]
                else:
                    verts.append(x)
                    chains.append(PathCluster(tuple(verts), tuple(edges), True))
                    continue
                chains.append(PathCluster(tuple(verts), tuple(edges), False))
    return clusters, interesting, chains


def _long_edge_branch(g: Graph, hq: PatternGraph, short: frozenset[int], h_edges: int, c: int,
                      counter: Budget, stats: dict, where: str) -> Embedding | None:
    params = fpt_params(c, hq, h_edges)
    clusters, interesting, chains = cluster_structure(hq, short)
    label = f"{where}, short edges {sorted(short)}"
    if not interesting:
        return None  # no branching cluster: this short-edge set cannot describe a branching witness
    if chains is None:
        stats["incomplete"].append(f"{label}: boring cluster with short edges")
        return None
    ids = delta_interesting_set(g, hq, c, h_edges, counter)
    if isinstance(ids, TooMany):
        return None
    d_parts = []
    for i in interesting:
        cl = set(clusters[i])
        eids = [e for e, (u, v) in enumerate(hq.edges) if u in cl or v in cl]
        verts = sorted({x for e in eids for x in hq.edges[e]})
        vmap = {x: j for j, x in enumerate(verts)}
        d_parts.append((PatternGraph(len(verts), [(vmap[hq.edges[e][0]], vmap[hq.edges[e][1]]) for e in eids],
                                     [hq.labels[x] for x in verts]), eids, vmap, cl))
    long_ends = [sum(1 for e in eids if e not in short) for _, eids, _, _ in d_parts]
    need = (8 * c * c + 2) * sum(long_ends)
    pool = sorted(ids)
    for size in range(need, len(pool) + 1):
        for chosen in itertools.combinations(pool, size):
            for assign in itertools.product(range(len(interesting)), repeat=size):
                counter.spend(1, "fpt.assignment")
                groups = [[v for v, a in zip(chosen, assign) if a == i] for i in range(len(interesting))]
                emb = _solve_assignment(g, hq, short, c, counter, set(chosen), groups, d_parts, chains, params)
                if emb is not None:
                    return emb
    return None


def _solve_assignment(g, hq, short, c, counter, chosen, groups, d_parts, chains, params):
    per_cluster = []
    for (dp, eids, vmap, _), grp in zip(d_parts, groups):
        sols = []
        for sol in cluster_solutions(grp, dp, g.dist, c, counter):
            if all(len(sol.along(j, 0)) >= 8 * c * c + 2 for j, e in enumerate(eids) if e not in short):
                sols.append(sol)
        if not sols:
            return None
        per_cluster.append(sols)
    rest = [v for v in range(g.n) if v not in chosen]
    comps = components(g, rest)
    if len(comps) > params.component_cap:
        return None
    for pick in itertools.product(*per_cluster):
        for split in itertools.product(range(len(chains)), repeat=len(comps)):
            counter.spend(1, "fpt.path-partition")
            emb = _assemble(g, hq, short, c, counter, pick, d_parts, chains, comps, split, params)
            if emb is not None:
                return emb
    return None


def _assemble(g, hq, short, c, counter, pick, d_parts, chains, comps, split, params):
    """Combine cluster solutions and PATH fragments into one host and verify it."""
    w = params.window
    lengths: dict[int, Fraction] = {}
    image: dict[int, Point] = {}
    home: dict[tuple[int, int], tuple[int, int]] = {}  # (hq edge, hq end vertex) -> (cluster, local edge)
    for ci, (dp, eids, vmap, cl) in enumerate(d_parts):
        sol = pick[ci]
        inv = {j: x for x, j in vmap.items()}
        for j, e in enumerate(eids):
            if e in short:
                lengths[e] = sol.host.lengths[j]
            for x in hq.edges[e]:
                if x in cl:
                    home[(e, x)] = (ci, j)
        for v, pt in sol.image.items():
            if pt.is_vertex and inv[pt.vertex] in cl:
                image[v] = vertex_point(inv[pt.vertex])
            elif not pt.is_vertex and eids[pt.edge] in short:
                image[v] = Point(edge=eids[pt.edge], offset=pt.offset)

    def side(e: int, x: int) -> list[tuple[Fraction, int]]:
        """Images the owning cluster put on long edge e, by distance from its end x (x excluded)."""
        ci, j = home[(e, x)]
        dp = d_parts[ci][0]
        u, v = dp.edges[j]
        from_end = 0 if (u, v)[0] == d_parts[ci][2][x] else 1
        return [(d, y) for d, y in pick[ci].along(j, from_end) if d != 0]

    for k, chain in enumerate(chains):
        W = [v for comp, s in zip(comps, split) if s == k for v in comp]
        near = side(chain.edges[0], chain.vertices[0])
        S = [v for _, v in near[-w:]]
        far: list[tuple[Fraction, int]] = []
        T: list[int] = []
        if chain.closed:
            far = side(chain.edges[-1], chain.vertices[-1])
            T = [v for _, v in reversed(far[-w:])]
        frag = path_embed(g, W, S, T, c, chain, counter)
        if frag is None:
            return None
        pos: dict[int, Fraction] = {v: d for d, v in near}
        start = pos[S[0]]
        for v, p in zip(frag.order, frag.positions):
            pos[v] = start + p
        if chain.closed:
            total = pos[T[-1]] + dict((v, d) for d, v in far)[T[-1]]
            for d, v in far:
                pos.setdefault(v, total - d)
        else:
            total = max(pos.values())
        inner = len(chain.vertices) - 2
        cand = [m for m in _candidates(sorted(set(pos.values()) | {Fraction(0), total}), inner + 2, None)
                if 0 < m < total]
        if len(cand) < inner:
            return None
        anchors = [Fraction(0)] + [cand[(i * len(cand)) // max(inner, 1)] for i in range(inner)] + [total]
        if any(b <= a for a, b in zip(anchors, anchors[1:])):
            return None
        for i, e in enumerate(chain.edges):
            lengths[e] = anchors[i + 1] - anchors[i]
        for v, p in pos.items():
            for i, e in enumerate(chain.edges):
                lo, hi = anchors[i], anchors[i + 1]
                if p == lo and i:
                    image[v] = vertex_point(chain.vertices[i])
                elif lo < p < hi:
                    off = p - lo if hq.edges[e][0] == chain.vertices[i] else hi - p
                    image[v] = Point(edge=e, offset=off)
                elif p == hi and i == len(chain.edges) - 1 and not chain.closed:
                    image[v] = vertex_point(chain.vertices[-1])
    if len(image) != g.n or len(lengths) != hq.h:
        return None
    host = WeightedSubdivision(hq, [lengths[e] for e in range(hq.h)])
    emb = Embedding(g, host, [image[v] for v in range(g.n)], {"route": "cluster+path"})
    return emb if _verified(emb, c) else None
