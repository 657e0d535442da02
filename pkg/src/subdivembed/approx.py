"""Approximate embedding into subdivisions of a fixed pattern.

SEARCH looks for a vertex near a structure that does not fit on a line,
COVER collects such vertices into candidate sets F, and STITCH cuts G into
balls around F and the deep components between them, lays each deep
component on its own host edge with the line approximation, and glues the
pieces together with pushing weights.  Every candidate is normalized and
verified before it can be returned.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .embedding_model import (
    Embedding,
    PatternGraph,
    Point,
    WeightedSubdivision,
    distortion,
    is_pushing,
    is_proper,
    isomorphic_patterns,
    normalize_to_proper_pushing,
)
from .errors import ContractError, SizeError
from .graph_core import Graph, ball_of_set, bfs_layers, components, local_density_filter, multi_source_dist
from .line_embed import CertifiedNo, line_embed_approx
from .lp import solve_lp


@dataclass(frozen=True)
class ApproxParams:
    h: int
    c: int
    ell: int
    r: int
    delta: int
    c_alg: int


def approx_params(h: int, c: int) -> ApproxParams:
    ell = 20 * c ** 3
    r = 5 * ell * h
    return ApproxParams(h=h, c=c, ell=ell, r=r, delta=4 * r, c_alg=64 * 10 ** 6 * c ** 24 * (h + 1) ** 9)


@dataclass(frozen=True)
class NoCEmbedding:
    """No branch produced an embedding within the guaranteed distortion bound."""

    reason: str
    detail: object = None


# ---------------------------------------------------------------- SEARCH

@dataclass
class SearchTrace:
    start: int
    layers: list[dict] = field(default_factory=list)  # {"i", "X", "L", "R"} from layer 2c^2 on
    v_left: int | None = None
    v_right: int | None = None
    outcome: str = "fail"  # "success" or "fail"
    reason: str = ""  # for failures: "near-F" or "exhausted"
    u_hat: int | None = None

    @property
    def success(self) -> bool:
        return self.outcome == "success"

    def to_dict(self) -> dict:
        return {
            "start": self.start,
            "v_left": self.v_left,
            "v_right": self.v_right,
            "outcome": self.outcome,
            "reason": self.reason,
            "u_hat": self.u_hat,
            "layers": self.layers,
        }


def _spread(g: Graph, xs: set[int], bound: int) -> bool:
    """True if two members are more than ``bound`` apart."""
    members = sorted(xs)
    return any(g.dist(a, b) > bound for a, b in itertools.combinations(members, 2))


def search(g: Graph, c: int, F: frozenset[int] | set[int], v: int, r: int,
           dist_f: list[int] | None = None) -> SearchTrace:
    """Breadth-first exploration from v that labels the two sides of a line-like neighbourhood.

    Ties always resolve to the smallest vertex id.
    """
    if dist_f is None:
        dist_f = multi_source_dist(g, F) if F else [-1] * g.n
    if 0 <= dist_f[v] <= r:
        raise ValueError("the start vertex must lie outside ball(F, r)")
    trace = SearchTrace(start=v)
    layers = bfs_layers(g, v)
    k = 2 * c * c
    if len(layers) <= k:
        trace.reason = "exhausted"
        return trace
    X = set(layers[k])
    v_left = min(X)
    far = sorted(x for x in X if g.dist(x, v_left) >= 2 * c + 1)
    v_right = far[0] if far else None
    trace.v_left, trace.v_right = v_left, v_right
    left = {x for x in X if g.dist(x, v_left) <= 2 * c}
    right = {x for x in X if v_right is not None and g.dist(x, v_right) <= 2 * c}
    trace.layers.append({"i": k, "X": sorted(X), "L": sorted(left), "R": sorted(right)})
    if left & right or X - left - right:
        trace.outcome, trace.u_hat = "success", v
        return trace
    for i in range(k + 1, len(layers)):
        X = set(layers[i])
        if any(0 <= dist_f[x] <= r for x in X):
            trace.reason = "near-F"
            return trace
        new_left = {x for x in X if any(y in left for y in g.adj[x])}
        new_right = {x for x in X if any(y in right for y in g.adj[x])}
        trace.layers.append({"i": i, "X": sorted(X), "L": sorted(new_left), "R": sorted(new_right)})
        both = new_left & new_right
        if both:
            trace.outcome, trace.u_hat = "success", min(both)
            return trace
        for side in (new_left, new_right):
            if side and (len(side) > 2 * c * c or _spread(g, side, 2 * c)):
                trace.outcome, trace.u_hat = "success", min(side)
                return trace
        left, right = new_left, new_right
    trace.reason = "exhausted"
    return trace


# ---------------------------------------------------------------- COVER

def cover(g: Graph, h: int, c: int, r: int | None = None) -> list[frozenset[int]]:
    """Every set F produced by some computation path of the staged cover (both choices per stage).

    At each stage SEARCH is started from every vertex outside ball(F, r) in
    id order; the first success offers two choices (the start vertex or the
    returned vertex).  A path that would need stage h+1 yields nothing.
    """
    if r is None:
        r = approx_params(h, c).r
    out: list[frozenset[int]] = []

    def stage(F: frozenset[int], i: int) -> None:
        if i == h + 1:
            return
        dist_f = multi_source_dist(g, F) if F else [-1] * g.n
        for v in range(g.n):
            if 0 <= dist_f[v] <= r:
                continue
            tr = search(g, c, F, v, r, dist_f)
            if tr.success:
                for pick in dict.fromkeys((v, tr.u_hat)):
                    stage(F | {pick}, i + 1)
                return
        if F not in out:
            out.append(F)

    stage(frozenset(), 1)
    return out


# ---------------------------------------------------------------- topological subgraphs

def _suppress(p: PatternGraph) -> tuple[list[int], list[tuple[int, int]]]:
    """Branch vertices of p and the branch edges between them after suppressing degree-2 vertices."""
    deg = [p.degree(v) for v in range(p.n)]
    branch = [v for v in range(p.n) if deg[v] != 2]
    used: set[int] = set()
    out: list[tuple[int, int]] = []

    def trace(start: int, eid: int, end: int) -> int:
        x = p.edges[eid][1 - end]
        used.add(eid)
        while deg[x] == 2 and x not in roots:
            nxt = [(e, en) for e, en in p.incidence[x] if e not in used]
            if not nxt:
                break
            eid, end = nxt[0]
            used.add(eid)
            x = p.edges[eid][1 - end]
        return x

    roots = set(branch)
    for b in branch:
        for eid, end in p.incidence[b]:
            if eid not in used:
                out.append((b, trace(b, eid, end)))
    # components that are plain cycles
    for eid in range(p.h):
        if eid not in used:
            root = p.edges[eid][0]
            roots.add(root)
            branch.append(root)
            out.append((root, trace(root, eid, 0)))
    return branch, out


def topological_subgraph_check(hp: PatternGraph, h: PatternGraph) -> dict[int, int] | None:
    """A map from the branch vertices of hp into V(h) realizing hp as a subdivided subgraph of h, or None."""
    if h.n > 10:
        raise SizeError("topological subgraph search is limited to 10 pattern vertices")
    branch, bedges = _suppress(hp)
    if not branch:
        return {} if hp.n <= h.n else None
    if len(branch) > h.n:
        return None
    bedges.sort(key=lambda e: (e[0] == e[1], e))

    def paths(s: int, t: int, used_e: set[int], used_v: set[int]):
        """Edge-simple paths s -> t in h whose interior avoids used_v; cycles when s == t."""
        def walk(x: int, seen: set[int], path: list[int]):
            for eid, end in h.incidence[x]:
                if eid in used_e or eid in path:
                    continue
                y = h.edges[eid][1 - end]
                if y == t and (path or s != t or h.edges[eid][0] == h.edges[eid][1]):
                    if s == t and not path and h.edges[eid][0] != h.edges[eid][1]:
                        continue
                    yield path + [eid], seen
                    continue
                if y in seen or y in used_v or y == s:
                    continue
                yield from walk(y, seen | {y}, path + [eid])
        yield from walk(s, set(), [])

    for image in itertools.permutations(range(h.n), len(branch)):
        phi = dict(zip(branch, image))
        taken = set(image)

        def place(i: int, used_e: set[int], used_v: set[int]) -> bool:
            if i == len(bedges):
                return True
            a, b = bedges[i]
            for path, interior in paths(phi[a], phi[b], used_e, used_v):
                if place(i + 1, used_e | set(path), used_v | interior):
                    return True
            return False

        if place(0, set(), set(taken)):
            return phi
    return None


# ---------------------------------------------------------------- STITCH

@dataclass(frozen=True)
class ComponentDecomposition:
    radius: int
    ball: frozenset[int]
    b_components: tuple[tuple[int, ...], ...]
    deep: tuple[tuple[int, ...], ...]
    shallow: tuple[tuple[int, ...], ...]


def decompose(g: Graph, F: frozenset[int], r: int) -> ComponentDecomposition:
    """Grow R from 4r in steps of 4r until no pair of F lies at distance in [2R, 2R + 4r]; then split G."""
    delta = 4 * r
    R = 4 * r
    pairs = [g.dist(a, b) for a, b in itertools.combinations(sorted(F), 2)]
    while any(2 * R <= d <= 2 * R + delta for d in pairs):
        R += delta
    B = ball_of_set(g, F, R) if F else frozenset()
    dist_f = multi_source_dist(g, F) if F else [-1] * g.n
    deep, shallow = [], []
    for comp in components(g, set(range(g.n)) - B):
        if not F or any(dist_f[x] >= delta / 2 for x in comp):
            deep.append(tuple(comp))
        else:
            shallow.append(tuple(comp))
    return ComponentDecomposition(R, B, tuple(tuple(x) for x in components(g, B)), tuple(deep), tuple(shallow))


@dataclass
class _Layout:
    """Pattern edges with the ordered images on each (from the first endpoint to the second)."""

    n: int
    edges: list[tuple[int, int]] = field(default_factory=list)
    seqs: list[list[int]] = field(default_factory=list)


def _end_gaps(g: Graph, lay: _Layout) -> list[list[Fraction]] | None:
    """Smallest end offsets so that every route through a pattern vertex is non-contracting."""
    gaps = [[Fraction(0), Fraction(0)] for _ in lay.edges]
    ends: dict[int, list[tuple[int, int, int]]] = {}
    for eid, ((u, v), seq) in enumerate(zip(lay.edges, lay.seqs)):
        if seq:
            ends.setdefault(u, []).append((eid, 0, seq[0]))
            ends.setdefault(v, []).append((eid, 1, seq[-1]))
    for p, lst in ends.items():
        if len(lst) < 2:
            continue
        k = len(lst)
        rows, rhs = [], []
        for i, j in itertools.combinations(range(k), 2):
            row = [0] * k
            row[i] = row[j] = -1
            rows.append(row)
            rhs.append(-g.dist(lst[i][2], lst[j][2]))
        res = solve_lp([1] * k, rows, rhs)
        if res.status != "optimal":
            return None
        for (eid, side, _), val in zip(lst, res.x):
            gaps[eid][side] = val
    return gaps


def _layout_embedding(g: Graph, lay: _Layout, labels: list[str]) -> Embedding | None:
    gaps = _end_gaps(g, lay)
    if gaps is None:
        return None
    lengths: list[Fraction] = []
    image: list[Point | None] = [None] * g.n
    spans = []
    for seq in lay.seqs:
        pos = [Fraction(0)]
        for a, b in zip(seq, seq[1:]):
            pos.append(pos[-1] + g.dist(a, b))
        spans.append(pos)
    for eid, ((u, v), seq) in enumerate(zip(lay.edges, lay.seqs)):
        if not seq:
            lengths.append(Fraction(1))  # widened below once every end gap is known
            continue
        L = gaps[eid][0] + spans[eid][-1] + gaps[eid][1]
        if L == 0:
            gaps[eid][1] = Fraction(1)
            L = Fraction(1)
        lengths.append(L)
    for eid, ((u, v), seq) in enumerate(zip(lay.edges, lay.seqs)):
        if seq:
            continue
        # an empty edge must not shortcut any pair of end images at its two ends
        need = Fraction(1)
        for e1, s1 in ((e, s) for e, (a, b) in enumerate(lay.edges) for s, x in ((0, a), (1, b)) if x == u):
            for e2, s2 in ((e, s) for e, (a, b) in enumerate(lay.edges) for s, x in ((0, a), (1, b)) if x == v):
                if lay.seqs[e1] and lay.seqs[e2]:
                    x = lay.seqs[e1][0 if s1 == 0 else -1]
                    y = lay.seqs[e2][0 if s2 == 0 else -1]
                    need = max(need, g.dist(x, y) - gaps[e1][s1] - gaps[e2][s2])
        lengths[eid] = need
    pattern = PatternGraph(lay.n, lay.edges, labels)
    host = WeightedSubdivision(pattern, lengths)
    for eid, seq in enumerate(lay.seqs):
        for x, p in zip(seq, spans[eid]):
            image[x] = host.point(eid, gaps[eid][0] + p)
    if any(p is None for p in image) or len(set(image)) != g.n:
        return None
    return Embedding(g, host, image)


def _oriented_line(g: Graph, verts: list[int], c: int) -> list[int] | CertifiedNo:
    sub, old = g.induced(verts)
    res = line_embed_approx(sub, c)
    if isinstance(res, CertifiedNo):
        return res
    return [old[x] for x in res.order]


def _dfs_cycle_order(g: Graph, verts: list[int]) -> list[int]:
    allowed = set(verts)
    start = min(verts)
    order, seen, stack = [], set(), [start]
    while stack:
        x = stack.pop()
        if x in seen:
            continue
        seen.add(x)
        order.append(x)
        stack.extend(sorted((y for y in g.adj[x] if y in allowed and y not in seen), reverse=True))
    return order


def stitch(g: Graph, pattern: PatternGraph, c: int, F: frozenset[int] | set[int], r: int | None = None,
           variants: bool = True, normalize: bool = True) -> list[Embedding]:
    """Stitched embeddings for one set F.

    The first entry (when present) follows the plain rule: each ball
    component plus its shallow components is laid out by increasing id on its
    lowest-id incident host edge.  With ``variants`` more layouts are tried:
    a line-approximation order for that set, every incident edge, and a
    single loop when F is empty.  With ``normalize`` every entry is made
    proper and pushing and contracting candidates are dropped; without it
    the raw pushed layouts are returned for the caller to check.  An empty
    list means a deep component had no line embedding.
    """
    F = frozenset(F)
    if r is None:
        r = approx_params(pattern.h, c).r
    dec = decompose(g, F, r)
    has_cycle = pattern.h >= pattern.n
    bid = {x: i for i, comp in enumerate(dec.b_components) for x in comp}
    nb = len(dec.b_components)
    star = [list(comp) for comp in dec.b_components]
    for comp in dec.shallow:
        touching = {bid[y] for x in comp for y in g.adj[x] if y in bid}
        if len(touching) != 1:
            return []
        star[touching.pop()].extend(comp)
    base = _Layout(nb)
    labels = [f"B{i}" for i in range(nb)]
    deep_edges = []  # (edge id, b-component at the near end or -1)
    for comp in dec.deep:
        order = _oriented_line(g, list(comp), c)
        if isinstance(order, CertifiedNo):
            if not F and has_cycle:
                base.n += 1
                labels.append("z")
                base.edges.append((nb, nb))
                base.seqs.append(_dfs_cycle_order(g, list(comp)))
                continue
            return []
        pos = {x: i for i, x in enumerate(order)}
        touch: dict[int, list[int]] = {}
        for x in comp:
            for y in g.adj[x]:
                if y in bid:
                    touch.setdefault(bid[y], []).append(pos[x])
        span = len(order) - 1
        if not touch:
            a, b = base.n, base.n + 1
            base.n += 2
            labels += [f"z{len(deep_edges)}a", f"z{len(deep_edges)}b"]
            base.edges.append((a, b))
            base.seqs.append(order)
            deep_edges.append((len(base.edges) - 1, -1))
            continue
        keys = sorted(touch)
        if len(keys) > 2:
            return []
        if len(keys) == 2:
            i, j = keys
            if sum(touch[i]) / len(touch[i]) > sum(touch[j]) / len(touch[j]):
                order.reverse()
            base.edges.append((i, j))
        else:
            (i,) = keys
            ps = touch[i]
            if span and max(ps) - min(ps) > span / 2:
                base.edges.append((i, i))
            else:
                if sum(ps) / len(ps) > span / 2:
                    order.reverse()
                leaf = base.n
                base.n += 1
                labels.append(f"leaf{len(deep_edges)}")
                base.edges.append((i, leaf))
        base.seqs.append(order)
        deep_edges.append((len(base.edges) - 1, i))

    # how each ball component may be laid out, and on which incident edge end
    choices_per_b = []
    for i in range(nb):
        members = star[i]
        orders = [sorted(members)]
        if variants:
            lo = _oriented_line(g, members, max(c, g.n))
            if not isinstance(lo, CertifiedNo) and lo not in orders:
                orders.append(lo)
        incident = [(eid, side) for eid, (u, v) in enumerate(base.edges) for side, x in ((0, u), (1, v)) if x == i]
        slots = []
        if incident:
            slots = sorted(incident) if variants else [min(incident)]
        else:
            slots = [("stub", None)]
            if has_cycle:
                slots.append(("loop", None))
        choices_per_b.append([(o, s) for s in slots for o in orders])

    results: list[Embedding] = []
    seen_keys = set()
    for pick in itertools.product(*choices_per_b) if nb else [()]:
        lay = _Layout(base.n, list(base.edges), [list(s) for s in base.seqs])
        labs = list(labels)
        for i, (order, slot) in enumerate(pick):
            eid, side = slot
            if eid == "stub":
                lay.edges.append((i, lay.n))
                labs.append(f"stub{i}")
                lay.n += 1
                lay.seqs.append(list(order))
                continue
            if eid == "loop":
                lay.edges.append((i, i))
                lay.seqs.append(_dfs_cycle_order(g, list(order)))
                continue
            seq = lay.seqs[eid]
            o = list(order)
            if seq and len(o) > 1 and g.dist(o[0], seq[0 if side == 0 else -1]) < g.dist(o[-1], seq[0 if side == 0 else -1]):
                o.reverse()  # the end nearest the deep component goes next to it
            lay.seqs[eid] = o + seq if side == 0 else seq + o[::-1]
        key = tuple(map(tuple, lay.seqs))
        if key in seen_keys:
            continue
        seen_keys.add(key)
        emb = _layout_embedding(g, lay, labs)
        if emb is None:
            continue
        emb.notes.update({"F": sorted(F), "R": dec.radius, "r": r})
        results.append(emb)
    if variants and not F and has_cycle and len(dec.deep) == 1 and base.edges[0][0] != base.edges[0][1]:
        # the whole graph also fits around a single cycle of the pattern
        loop = _Layout(1, [(0, 0)], [_dfs_cycle_order(g, list(dec.deep[0]))])
        emb = _layout_embedding(g, loop, ["z"])
        if emb is not None:
            emb.notes.update({"F": [], "R": dec.radius, "r": r})
            results.append(emb)
    if not normalize:
        return results
    out = []
    for emb in results:
        try:
            norm = normalize_to_proper_pushing(emb)
        except ContractError:
            continue
        norm.notes.update(emb.notes)
        out.append(norm)
    return out


# ---------------------------------------------------------------- driver

def connected_subpatterns(h: PatternGraph) -> list[PatternGraph]:
    """Connected subgraphs of h with at least one edge (edge subsets), up to isomorphism."""
    out: list[PatternGraph] = []
    for mask in range(1, 1 << h.h):
        eids = [e for e in range(h.h) if mask >> e & 1]
        verts = sorted({x for e in eids for x in h.edges[e]})
        idx = {v: i for i, v in enumerate(verts)}
        p = PatternGraph(len(verts), [(idx[h.edges[e][0]], idx[h.edges[e][1]]) for e in eids],
                         [h.labels[v] for v in verts])
        if p.is_connected() and not any(isomorphic_patterns(p, q) for q in out):
            out.append(p)
    return out


def _radii(r: int) -> list[int]:
    out = [r]
    while out[-1] > 1:
        out.append(max(1, out[-1] // 4))
    return out


def _finish(e: Embedding, h: PatternGraph, bound: int,
            beat: Fraction | None = None) -> tuple[Fraction, Embedding] | None:
    """Normalize and verify one stitched candidate; None if it fails or cannot beat ``beat``."""
    if h.n <= 10 and topological_subgraph_check(e.host.pattern, h) is None:
        return None
    raw = distortion(e)
    if not raw.non_contracting or (beat is not None and raw.distortion >= beat):
        return None
    try:
        norm = normalize_to_proper_pushing(e)
    except ContractError:
        return None
    if h.n <= 10 and topological_subgraph_check(norm.host.pattern, h) is None:
        return None
    rep = distortion(norm)
    if not rep.non_contracting or rep.distortion > bound:
        return None
    if not is_pushing(norm)[0] or not is_proper(norm)[0]:
        return None
    norm.notes.update(e.notes)
    norm.notes["distortion"] = rep.distortion
    return rep.distortion, norm


def approx_embed(g: Graph, h: PatternGraph, c: int, radius_variants: bool = True,
                 trace: list | None = None) -> Embedding | NoCEmbedding:
    """Best verified embedding over subpattern guesses, cover sets and layouts, or NoCEmbedding.

    The branches with the standard radius are always run, so NoCEmbedding is
    only returned when none of them reaches the guaranteed bound.  With
    ``radius_variants`` the same sets are also stitched with smaller radii,
    which often gives much lower distortion.
    """
    if c < 1:
        raise ValueError("c must be at least 1")
    if h.h < 1:
        raise ValueError("the pattern needs at least one edge")
    params = approx_params(h.h, c)
    witness = local_density_filter(g, h.h, c)
    if witness is not None:
        return NoCEmbedding("density", witness)
    sets: dict[frozenset[int], None] = {}
    radii: dict[int, None] = {}
    for sub in connected_subpatterns(h):
        r = approx_params(sub.h, c).r
        radii[r] = None
        for F in cover(g, sub.h, c, r):
            sets[F] = None
        if trace is not None:
            trace.append({"subpattern_edges": sub.h, "r": r, "family": [sorted(F) for F in sets]})
    if radius_variants:
        for r in list(radii):
            for rk in _radii(r):
                radii[rk] = None
                for F in cover(g, h.h, c, rk):
                    sets[F] = None
    sets.setdefault(frozenset(), None)
    best: tuple[Fraction, Embedding] | None = None
    tried = set()
    for F in sets:
        for r in radii:
            dec_key = (F, decompose(g, F, r).ball)
            if dec_key in tried:
                continue
            tried.add(dec_key)
            for emb in stitch(g, h, c, F, r, variants=radius_variants, normalize=False):
                got = _finish(emb, h, params.c_alg, None if best is None else best[0])
                if got is not None and (best is None or got[0] < best[0]):
                    best = got
                    if best[0] == 1:
                        return best[1]
    if best is None:
        return NoCEmbedding("no branch within the bound")
    return best[1]
