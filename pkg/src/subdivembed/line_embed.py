"""Embeddings into the line: exact search, BFS-order approximation and a brute-force oracle.

Every line embedding here is pushing: consecutive vertices sit exactly d_G
apart.  Pushed orders never contract a pair (the gap sum between two vertices
is at least their distance), so a pushed order is a c-embedding iff every
constrained pair is stretched by at most c.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .embedding_model import Embedding, line_host_embedding
from .errors import Budget, SizeError
from .graph_core import Graph, bfs_layers

DEFAULT_BUDGET = 5_000_000
APPROX_QUALITY = 12  # distortion ceiling 12*c^2 asserted on YES instances


@dataclass(frozen=True)
class LineEmbedding:
    """An ordering of the points with pushed positions (positions[0] == 0)."""

    order: tuple[int, ...]
    positions: tuple[Fraction, ...]

    def to_embedding(self, g: Graph) -> Embedding:
        return line_host_embedding(g, self.order, self.positions)

    def position_of(self) -> dict[int, Fraction]:
        return dict(zip(self.order, self.positions))


@dataclass(frozen=True)
class CertifiedNo:
    """Three vertices of one BFS layer, pairwise more than 2c apart: no c-embedding into the line."""

    root: int
    layer: int
    witnesses: tuple[int, int, int]


def pushed(order: Sequence[int], dist) -> LineEmbedding:
    pos = [Fraction(0)]
    for a, b in zip(order, order[1:]):
        pos.append(pos[-1] + dist(a, b))
    return LineEmbedding(tuple(order), tuple(pos))


def _metric(metric: Graph | Sequence[Sequence[int]]):
    """(n, dist, partner lists) for a graph (edge constraints) or a distance matrix (all pairs)."""
    if isinstance(metric, Graph):
        g = metric
        return g.n, g.dist, True
    mat = [list(map(int, row)) for row in metric]
    n = len(mat)
    for i in range(n):
        if len(mat[i]) != n or mat[i][i] != 0:
            raise ValueError("distance matrix must be square with zero diagonal")
        for j in range(n):
            if mat[i][j] != mat[j][i] or (i != j and mat[i][j] <= 0):
                raise ValueError("distance matrix must be symmetric and positive off the diagonal")
    return n, (lambda a, b: mat[a][b]), False


def line_embed_exact(metric: Graph | Sequence[Sequence[int]], c: int,
                     budget: int | Budget = DEFAULT_BUDGET, first: int | None = None,
                     last: int | None = None) -> LineEmbedding | None:
    """A pushing non-contracting c-embedding into the line, or None if none exists.

    For a graph only its edges are constrained (stretch at most c); for a
    distance matrix every pair is.  The search extends a pushed prefix one
    vertex at a time.  Its state is the placed set together with the offsets
    (back from the current end) of placed vertices that still have unplaced
    constraint partners; states proven dead are memoized.  Raises BudgetError
    when more than ``budget`` states are expanded.  ``first`` and ``last``
    optionally pin the two ends of the order.
    """
    n, dist, graph_mode = _metric(metric)
    counter = budget if isinstance(budget, Budget) else Budget(budget)
    if n == 1:
        return LineEmbedding((0,), (Fraction(0),))
    if first is not None and first == last:
        return None
    if graph_mode:
        g = metric
        partners = [[(y, c) for y in g.adj[x]] for x in range(n)]
    else:
        partners = [[(y, c * dist(x, y)) for y in range(n) if y != x] for x in range(n)]
    bound = [dict(p) for p in partners]
    full = (1 << n) - 1
    dead: set = set()

    def slack_ok(y: int, back: int, mask: int) -> bool:
        # every unplaced partner of y will land at least one unit further right
        return all(back + 1 <= b for z, b in partners[y] if not mask >> z & 1)

    def extend(mask: int, last: int, active: tuple[tuple[int, int], ...], path: list[int]) -> bool:
        if mask == full:
            return True
        key = (mask, last, active)
        if key in dead:
            return False
        counter.spend(1, "line_embed_exact")
        for x in range(n):
            if mask >> x & 1:
                continue
            if x == end and mask | 1 << x != full:
                continue
            gap = dist(last, x)
            if graph_mode and gap > c:
                continue
            ok = True
            for y, back in active:
                b = bound[y].get(x)
                if b is not None and back + gap > b:
                    ok = False
                    break
            if not ok:
                continue
            nmask = mask | 1 << x
            nxt = []
            for y, back in active:
                if any(not nmask >> z & 1 for z, _ in partners[y]):
                    if not slack_ok(y, back + gap, nmask):
                        ok = False
                        break
                    nxt.append((y, back + gap))
            if not ok:
                continue
            if any(not nmask >> z & 1 for z, _ in partners[x]):
                nxt.append((x, 0))
            path.append(x)
            if extend(nmask, x, tuple(sorted(nxt)), path):
                return True
            path.pop()
        dead.add(key)
        return False

    end = last
    for s in (range(n) if first is None else [first]):
        if s == end:
            continue
        path = [s]
        active = ((s, 0),) if partners[s] else ()
        if extend(1 << s, s, active, path):
            return pushed(path, dist)
    return None


def line_distortion(le: LineEmbedding, metric: Graph | Sequence[Sequence[int]]) -> Fraction:
    """Distortion of a pushed line embedding over all pairs (exact)."""
    n, dist, _ = _metric(metric)
    pos = le.position_of()
    best = Fraction(1)
    for a, b in itertools.combinations(range(n), 2):
        r = abs(pos[a] - pos[b]) / dist(a, b)
        if r > best:
            best = r
    return best


def two_sweep_root(g: Graph) -> int:
    """Farthest vertex from vertex 0 (smallest id on ties): a high-eccentricity start."""
    row = g.bfs_row(0)
    far = max(row)
    return min(v for v in range(g.n) if row[v] == far)


def layer_certificate(g: Graph, c: int) -> CertifiedNo | None:
    """Search every BFS layer for three vertices pairwise more than 2c apart.

    In a non-contracting c-embedding into the line, two of any three vertices
    of a layer lie on the same side of the root, and the shortest path from
    the farther one back to the root passes within c of the nearer one, which
    forces the two to be at most 2c apart.  So such a triple is a proof of NO.
    """
    for root in range(g.n):
        for i, layer in enumerate(bfs_layers(g, root)):
            if len(layer) < 3:
                continue
            members = sorted(layer)
            starts = members if len(members) <= 40 else members[:1]
            for s in starts:
                chosen = [s]
                for x in members:
                    if all(g.dist(x, y) > 2 * c for y in chosen):
                        chosen.append(x)
                        if len(chosen) == 3:
                            return CertifiedNo(root, i, tuple(chosen))
    return None


def bfs_order(g: Graph, root: int | None = None) -> list[int]:
    """Layers by increasing distance; each layer sorted by distance to its anchor, then id.

    The anchor of a layer is its member nearest to the last vertex of the
    previous layer's order (smallest id on ties).
    """
    if root is None:
        root = two_sweep_root(g)
    order = [root]
    for layer in bfs_layers(g, root)[1:]:
        prev = order[-1]
        anchor = min(layer, key=lambda x: (g.dist(prev, x), x))
        order.extend(sorted(layer, key=lambda x: (g.dist(anchor, x), x)))
    return order


def line_embed_approx(g: Graph, c: int) -> LineEmbedding | CertifiedNo:
    """Pushed BFS-layer order from a two-sweep root, or a layer certificate that no c-embedding exists."""
    cert = layer_certificate(g, c)
    if cert is not None:
        return cert
    return pushed(bfs_order(g), g.dist)


def min_line_distortion_oracle(g: Graph) -> tuple[Fraction, LineEmbedding]:
    """Exact minimum line distortion by trying every pushed ordering (n <= 9)."""
    if g.n > 9:
        raise SizeError("line oracle is limited to 9 vertices")
    n = g.n
    if n == 1:
        return Fraction(1), LineEmbedding((0,), (Fraction(0),))
    d = [g.bfs_row(v) for v in range(n)]
    best_val: Fraction | None = None
    best_order = None
    for perm in itertools.permutations(range(n)):
        if perm[0] > perm[-1]:
            continue  # reversal gives the same distortion
        pos = [0] * n
        acc = 0
        pos[perm[0]] = 0
        for a, b in zip(perm, perm[1:]):
            acc += d[a][b]
            pos[b] = acc
        worst = Fraction(1)
        for a in range(n):
            for b in range(a + 1, n):
                r = Fraction(abs(pos[a] - pos[b]), d[a][b])
                if r > worst:
                    worst = r
                    if best_val is not None and worst >= best_val:
                        break
            if best_val is not None and worst >= best_val:
                break
        if best_val is None or worst < best_val:
            best_val, best_order = worst, perm
    return best_val, pushed(best_order, g.dist)


@dataclass(frozen=True)
class FeasibleWindow:
    """An ordered window of distinct vertices (slots 0..len-1) with left/right labels for the rest.

    ``left``/``right`` hold the off-window vertices assigned to each side.
    """

    slots: tuple[int, ...]
    left: frozenset[int]
    right: frozenset[int]

    def violations(self, g: Graph, c: int, allowed: frozenset[int] | None = None) -> list[str]:
        """Names of the violated feasibility conditions (empty list when feasible)."""
        out = []
        if len(set(self.slots)) != len(self.slots):
            out.append("distinct")
        if self.left & self.right:
            out.append("sides-disjoint")
        for a, b in zip(self.slots, self.slots[1:]):
            if g.dist(a, b) > c:
                out.append("gap")
                break
        if self.slots and len(self.slots) >= 4 * c * c + 2:
            mid = self.slots[2 * c * c]
            window = set(self.slots)
            if allowed is None:
                allowed = frozenset(range(g.n))
            row = g.bfs_row(mid)
            if any(row[x] <= c and x in allowed and x not in window for x in range(g.n)):
                out.append("middle-ball")
        return out


@dataclass(frozen=True)
class CycleEmbedding:
    """A cyclic order with pushed positions; ``total`` closes the cycle back to order[0]."""

    order: tuple[int, ...]
    positions: tuple[Fraction, ...]
    total: Fraction


def cycle_embed_exact(g: Graph, c: int, budget: int | Budget = DEFAULT_BUDGET) -> CycleEmbedding | None:
    """A pushed c-embedding into a cycle with every cyclic gap at most c, or None.

    Pushed cyclic orders never contract, and expansion is attained on edges,
    so each edge needs its shorter arc to be at most c.  Vertex 0 sits at
    position 0.  An edge whose forward arc is too long must use the closing
    arc, which is only possible from a vertex placed before position c; such
    edges become bounds on the distance from the later endpoint to the end of
    the cycle.  If a c-embedding into a cycle exists but none is proper with
    all gaps at most c, a line embedding exists instead (see line_embed_exact).
    """
    counter = budget if isinstance(budget, Budget) else Budget(budget)
    n = g.n
    if n == 1:
        return CycleEmbedding((0,), (Fraction(0),), Fraction(1))
    adj = [set(a) for a in g.adj]
    full = (1 << n) - 1
    dead: set = set()
    path = [0]

    def unplaced_partner(y: int, mask: int) -> bool:
        return any(not mask >> z & 1 for z in adj[y])

    def extend(mask, last, p_small, active, pending, tail) -> bool:
        if mask == full:
            closing = g.dist(last, 0)
            return closing <= c and all(back + closing <= allow for _, back, allow in tail)
        key = (mask, last, p_small, active, pending, tail)
        if key in dead:
            return False
        counter.spend(1, "cycle_embed_exact")
        for x in range(1, n):
            if mask >> x & 1:
                continue
            gap = g.dist(last, x)
            if gap > c:
                continue
            nmask = mask | 1 << x
            px = p_small + gap if p_small is not None and p_small + gap < c else None
            tails: dict[int, tuple[int, int]] = {}
            ok = True
            for y, back, allow in tail:
                nb = back + gap
                if nb + 1 > allow:
                    ok = False
                    break
                tails[y] = (nb, allow)
            if not ok:
                continue
            x_allow = None
            nactive = []
            moved = []
            for y, back, py in active:
                nb = back + gap
                if x in adj[y] and nb > c:
                    if py is None:
                        ok = False
                        break
                    x_allow = c - py if x_allow is None else min(x_allow, c - py)
                if unplaced_partner(y, nmask):
                    if nb + 1 <= c:
                        nactive.append((y, nb, py))
                    elif py is not None:
                        moved.append((y, c - py))
                    else:
                        ok = False
                        break
            if not ok:
                continue
            npending = []
            for y, allow in pending + tuple(moved):
                if x in adj[y] and (y, allow) not in moved:
                    x_allow = allow if x_allow is None else min(x_allow, allow)
                if unplaced_partner(y, nmask):
                    npending.append((y, allow))
            if x_allow is not None:
                if x_allow < 1:
                    continue
                old = tails.get(x)
                tails[x] = (0, x_allow if old is None else min(old[1], x_allow))
            if unplaced_partner(x, nmask):
                nactive.append((x, 0, px))
            ntail = tuple(sorted((y, b, a) for y, (b, a) in tails.items()))
            path.append(x)
            if extend(nmask, x, px, tuple(sorted(nactive)), tuple(sorted(set(npending))), ntail):
                return True
            path.pop()
        dead.add(key)
        return False

    active0 = ((0, 0, 0),) if adj[0] else ()
    if not extend(1, 0, 0, active0, (), ()):
        return None
    le = pushed(path, g.dist)
    return CycleEmbedding(le.order, le.positions, le.positions[-1] + g.dist(path[-1], 0))
