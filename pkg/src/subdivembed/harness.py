"""Instance generators, brute-force oracles, the verify command and the benchmark driver.

Randomness comes from SplitMix64 (Steele, Lea and Flood), a 64-bit
generator whose whole state is one integer, so instances are reproducible
across languages from (family, params, seed) alone.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .approx import NoCEmbedding, approx_embed
from .embedding_model import (
    Embedding,
    PatternGraph,
    WeightedSubdivision,
    complete_pattern,
    distortion,
    embedding_from_json,
    frac_str,
    is_proper,
    is_pushing,
    parse_pattern,
    star_pattern,
    vertex_point,
)
from .errors import ArtifactError, BudgetError, ParamError, ParseError, SizeError
from .fpt import No, fpt_embed, is_chain, is_closed_chain
from .graph_core import Graph, graph_from_edges, parse_graph
from .line_embed import DEFAULT_BUDGET, line_embed_exact, min_line_distortion_oracle

MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64: state += golden gamma, then a two-round xor-shift-multiply finalizer."""

    GAMMA = 0x9E3779B97F4A7C15

    def __init__(self, seed: int) -> None:
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + self.GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection (no modulo bias)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - (1 << 64) % n
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def random(self) -> float:
        """Uniform float in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) / float(1 << 53)

    def split(self) -> "SplitMix64":
        return SplitMix64(self.next_u64())


FAMILIES = ("subdivided-H-plus-pendants", "cycle", "spider", "caterpillar", "random-tree", "clique")


@dataclass(frozen=True)
class InstanceSpec:
    """A generator family, its parameters (as sorted key/value pairs) and a 64-bit seed.

    Parameters by family (defaults in brackets):
      subdivided-H-plus-pendants: pattern [K13], legs [5], pendants [0.0]
      cycle: n
      spider: k [3], length
      caterpillar: n (spine), pendants [0.5]
      random-tree: n, chords [0]
      clique: k
    Every family also accepts ``pattern`` (edge-list text or a name such as
    K2, K3, K13) to override the pattern that is returned.
    """

    family: str
    params: tuple[tuple[str, object], ...] = ()
    seed: int = 0

    @classmethod
    def make(cls, family: str, seed: int = 0, **params) -> "InstanceSpec":
        return cls(family, tuple(sorted(params.items())), seed)

    def get(self, key: str, default=None):
        return dict(self.params).get(key, default)

    @property
    def label(self) -> str:
        ps = ",".join(f"{k}={v}" for k, v in self.params if k != "pattern" or isinstance(v, str))
        return f"{self.family}[{ps}]#{self.seed}"


def named_pattern(name: str) -> PatternGraph:
    """K<k> (clique), K1<k> (star with k leaves), or edge-list text."""
    if name.startswith("K1") and name[2:].isdigit():
        return star_pattern(int(name[2:]))
    if name.startswith("K") and name[1:].isdigit():
        return complete_pattern(int(name[1:]))
    return parse_pattern(name)


def _pattern(spec: InstanceSpec, default: PatternGraph) -> PatternGraph:
    p = spec.get("pattern")
    if p is None:
        return default
    return p if isinstance(p, PatternGraph) else named_pattern(str(p))


def _int(spec: InstanceSpec, key: str, default: int | None = None, low: int = 1) -> int:
    val = spec.get(key, default)
    if val is None:
        raise ParamError(f"{spec.family} needs parameter {key!r}")
    if not isinstance(val, int) or val < low:
        raise ParamError(f"{key} must be an integer >= {low}, got {val!r}")
    return val


def _rate(spec: InstanceSpec, key: str, default: float) -> float:
    val = spec.get(key, default)
    if not isinstance(val, (int, float)) or not 0 <= val <= 1:
        raise ParamError(f"{key} must be a rate in [0, 1], got {val!r}")
    return float(val)


def subdivide(p: PatternGraph, legs: int) -> list[tuple[int, int]]:
    """Edges of the graph obtained by replacing every pattern edge with a path of ``legs`` edges."""
    edges = []
    k = p.n
    for u, v in p.edges:
        prev = u
        for _ in range(legs - 1):
            edges.append((prev, k))
            prev, k = k, k + 1
        edges.append((prev, v))
    return edges


def _add_pendants(edges: list[tuple[int, int]], n: int, rate: float, rng: SplitMix64) -> int:
    k = n
    for v in range(n):
        if rate > 0 and rng.random() < rate:
            edges.append((v, k))
            k += 1
    return k


def generate(spec: InstanceSpec) -> tuple[Graph, PatternGraph]:
    """Deterministic (graph, pattern) instance for an InstanceSpec; ParamError on bad parameters."""
    rng = SplitMix64(spec.seed)
    fam = spec.family
    if fam in ("subdivided-H-plus-pendants", "subdivided-H"):
        p = _pattern(spec, star_pattern(3))
        legs = _int(spec, "legs", 5)
        if any(u == v for u, v in p.edges) and legs < 3:
            raise ParamError("a loop needs at least 3 subdivision edges")
        if len(set(tuple(sorted(e)) for e in p.edges)) < p.h and legs < 2:
            raise ParamError("parallel edges need at least 2 subdivision edges")
        if not p.is_connected():
            raise ParamError("the pattern must be connected")
        edges = subdivide(p, legs)
        n = max(max(e) for e in edges) + 1 if edges else p.n
        n = _add_pendants(edges, n, _rate(spec, "pendants", 0.0), rng)
        return graph_from_edges(edges, n), p
    if fam == "cycle":
        n = _int(spec, "n", low=3)
        return graph_from_edges([(i, (i + 1) % n) for i in range(n)], n), _pattern(spec, complete_pattern(3))
    if fam == "spider":
        k = _int(spec, "k", 3)
        length = _int(spec, "length")
        return graph_from_edges(subdivide(star_pattern(k), length)), _pattern(spec, star_pattern(k))
    if fam == "caterpillar":
        n = _int(spec, "n")
        edges = [(i, i + 1) for i in range(n - 1)]
        total = _add_pendants(edges, n, _rate(spec, "pendants", 0.5), rng)
        return graph_from_edges(edges, total), _pattern(spec, complete_pattern(2))
    if fam == "random-tree":
        n = _int(spec, "n")
        chords = _int(spec, "chords", 0, low=0)
        edges = {(rng.below(i), i) for i in range(1, n)}
        missing = [e for e in itertools.combinations(range(n), 2) if e not in edges]
        for _ in range(min(chords, len(missing))):
            edges.add(missing.pop(rng.below(len(missing))))
        return graph_from_edges(sorted(edges), n), _pattern(spec, complete_pattern(2))
    if fam == "clique":
        k = _int(spec, "k")
        return graph_from_edges(list(itertools.combinations(range(k), 2)), k), _pattern(spec, complete_pattern(2))
    raise ParamError(f"unknown family {fam!r}; expected one of {', '.join(FAMILIES)}")


# ---------------------------------------------------------------- oracles

def _cycle_embedding(g: Graph, order: tuple[int, ...], pos: list[int], total: int) -> Embedding:
    """Images on a single loop; the first vertex of the order sits on the loop's base vertex."""
    host = WeightedSubdivision(PatternGraph(1, [(0, 0)], ["o"]), [Fraction(total)])
    image = [None] * g.n
    for x, p in zip(order, pos):
        image[x] = host.point(0, Fraction(p)) if p else vertex_point(0)
    return Embedding(g, host, image, {"route": "cycle-oracle"})


def min_cycle_distortion_oracle(g: Graph) -> tuple[Fraction, Embedding]:
    """Exact minimum distortion into a subdivided cycle or a line, by trying every order (n <= 8).

    Cyclic orders get pushed consecutive weights, including the closing pair;
    orders whose cycle metric contracts a pair are discarded.
    """
    if g.n > 8:
        raise SizeError("cycle oracle is limited to 8 vertices")
    best, line = min_line_distortion_oracle(g)
    best_emb = line.to_embedding(g)
    n = g.n
    if n < 3:
        return best, best_emb
    d = [g.bfs_row(v) for v in range(n)]
    for rest in itertools.permutations(range(1, n)):
        if rest[0] > rest[-1]:
            continue  # the reversed cyclic order is equivalent
        order = (0,) + rest
        pos = [0]
        for a, b in zip(order, order[1:]):
            pos.append(pos[-1] + d[a][b])
        total = pos[-1] + d[order[-1]][0]
        worst = Fraction(1)
        ok = True
        for i, j in itertools.combinations(range(n), 2):
            arc = pos[j] - pos[i]
            hd = min(arc, total - arc)
            gd = d[order[i]][order[j]]
            if hd < gd:
                ok = False
                break
            if hd > worst * gd:
                worst = Fraction(hd, gd)
                if worst >= best:
                    ok = False
                    break
        if ok and worst < best:
            best, best_emb = worst, _cycle_embedding(g, order, pos, total)
    return best, best_emb


def _pattern_kind(h: PatternGraph) -> str | None:
    """'line' when h is K2 (or a path), 'cycle' when h is K3; None otherwise."""
    if h.h >= 1 and is_chain(h) and h.is_connected():
        return "cycle" if is_closed_chain(h) else "line"
    return None


def oracle_optimum(g: Graph, h: PatternGraph) -> Fraction | None:
    """Minimum distortion over subdivisions of quasi-subgraphs of h, for path and cycle patterns on small graphs."""
    kind = _pattern_kind(h)
    if kind == "line" and g.n <= 9:
        return min_line_distortion_oracle(g)[0]
    if kind == "cycle" and g.n <= 8:
        return min_cycle_distortion_oracle(g)[0]
    return None


# ---------------------------------------------------------------- verify

def verify_report(e: Embedding) -> dict:
    """Distortion report plus the pushing and proper flags, with rationals as "p/q"."""
    rep = distortion(e).to_dict()
    rep["pushing"] = is_pushing(e)[0]
    rep["proper"] = is_proper(e)[0]
    return rep


def verify_command(embedding_file: str | Path, graph_file: str | Path) -> tuple[dict, int]:
    """Check an embedding file against a graph file; exit status is 1 if the embedding contracts."""
    g = parse_graph(Path(graph_file).read_text())
    try:
        data = json.loads(Path(embedding_file).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"embedding file is not JSON: {exc}") from exc
    e = embedding_from_json(data, g)
    rep = verify_report(e)
    return rep, 0 if rep["non_contracting"] else 1


# ---------------------------------------------------------------- bench

CSV_COLUMNS = ("id", "family", "n", "h", "c", "algo", "verdict", "distortion", "oracle_opt", "micros")
ALGORITHMS = ("approx", "fpt", "line", "oracle")


@dataclass(frozen=True)
class BenchRecord:
    id: str
    family: str
    n: int
    h: int
    c: int
    algo: str
    verdict: str  # EMBED, NO, BUDGET or ERROR
    distortion: Fraction | None
    oracle_opt: Fraction | None
    micros: int
    detail: str = field(default="", compare=False)

    def row(self) -> list[str]:
        return [self.id, self.family, str(self.n), str(self.h), str(self.c), self.algo, self.verdict,
                "" if self.distortion is None else frac_str(self.distortion),
                "" if self.oracle_opt is None else frac_str(self.oracle_opt), str(self.micros)]


def run_algorithm(algo: str, g: Graph, h: PatternGraph, c: int, budget: int) -> tuple[str, Fraction | None]:
    """(verdict, verified distortion) for one algorithm on one instance."""
    if algo == "approx":
        res = approx_embed(g, h, c)
        return ("NO", None) if isinstance(res, NoCEmbedding) else ("EMBED", distortion(res).distortion)
    if algo == "fpt":
        try:
            res = fpt_embed(g, h, c, budget=budget)
        except BudgetError:
            return "BUDGET", None
        return ("NO", None) if isinstance(res, No) else ("EMBED", distortion(res).distortion)
    if algo == "line":
        try:
            res = line_embed_exact(g, c, budget=budget)
        except BudgetError:
            return "BUDGET", None
        return ("NO", None) if res is None else ("EMBED", distortion(res.to_embedding(g)).distortion)
    if algo == "oracle":
        opt = oracle_optimum(g, h)
        if opt is None:
            raise SizeError("no oracle for this pattern or size")
        return ("EMBED", opt) if opt <= c else ("NO", opt)
    raise ValueError(f"unknown algorithm {algo!r}")


def _bench_one(job: tuple[str, InstanceSpec, str, int, int]) -> BenchRecord:
    rid, spec, algo, c, budget = job
    c = spec.get("c", c)
    try:
        g, h = generate(spec)
    except ArtifactError as exc:
        return BenchRecord(rid, spec.family, 0, 0, c, algo, "ERROR", None, None, 0, str(exc))
    try:
        opt = oracle_optimum(g, h)
    except ArtifactError:
        opt = None
    start = time.perf_counter()
    try:
        verdict, dist = run_algorithm(algo, g, h, c, budget)
        detail = ""
    except (ArtifactError, ValueError) as exc:
        verdict, dist, detail = "ERROR", None, str(exc)
    micros = int((time.perf_counter() - start) * 1e6)
    return BenchRecord(rid, spec.family, g.n, h.h, c, algo, verdict, dist, opt, micros, detail)


def bench(specs: list[InstanceSpec], algorithms=ALGORITHMS, c: int = 1, budget: int = DEFAULT_BUDGET,
          workers: int = 1) -> list[BenchRecord]:
    """One record per (instance, algorithm), sorted by id; errors become verdict ERROR rows."""
    jobs = [(f"{i:05d}-{algo}", spec, algo, c, budget) for i, spec in enumerate(specs) for algo in algorithms]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_bench_one, jobs))
    else:
        rows = [_bench_one(j) for j in jobs]
    return sorted(rows, key=lambda r: r.id)


def records_to_csv(records: list[BenchRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


def small_corpus(count: int = 200, seed: int = 20240601) -> list[InstanceSpec]:
    """Seeded instances with at most 7 vertices, pattern K2 or K3 and c in {1, 2, 3} (stored as param c)."""
    rng = SplitMix64(seed)
    out = []
    for i in range(count):
        pat = "K2" if rng.below(2) == 0 else "K3"
        c = 1 + rng.below(3)
        s = rng.next_u64()
        kind = rng.below(10)
        if kind < 5:
            n = 2 + rng.below(6)
            spec = InstanceSpec.make("random-tree", s, n=n, chords=rng.below(n), pattern=pat, c=c)
        elif kind < 7:
            spec = InstanceSpec.make("cycle", s, n=3 + rng.below(5), pattern=pat, c=c)
        elif kind < 8:
            spec = InstanceSpec.make("spider", s, k=3, length=1 + rng.below(2), pattern=pat, c=c)
        elif kind < 9:
            spec = InstanceSpec.make("caterpillar", s, n=2 + rng.below(3), pendants=0.5, pattern=pat, c=c)
        else:
            spec = InstanceSpec.make("clique", s, k=3 + rng.below(5), pattern=pat, c=c)
        out.append(spec)
    return out
