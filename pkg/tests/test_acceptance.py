"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line with its measurements."""
from __future__ import annotations

import itertools
import time
from fractions import Fraction

import networkx as nx
import pytest

from helpers import clique, connected_graphs, cycle, path, star
from subdivembed.approx import NoCEmbedding, approx_embed, approx_params
from subdivembed.embedding_model import (
    Embedding,
    PatternGraph,
    WeightedSubdivision,
    complete_pattern,
    distortion,
    is_proper,
    is_pushing,
    normalize_to_proper_pushing,
    path_pattern,
    pattern_from_edges,
    star_pattern,
    vertex_point,
)
from subdivembed.errors import BudgetError
from subdivembed.fpt import No, cluster_emission_bound, cluster_solutions, fpt_embed
from subdivembed.graph_core import Graph, graph_from_edges, local_density_filter
from subdivembed.harness import SplitMix64, generate, oracle_optimum, small_corpus, subdivide
from subdivembed.line_embed import line_embed_exact, min_line_distortion_oracle


@pytest.fixture
def report(capsys):
    def emit(number: int, title: str, ok: bool, detail: str, seconds: float, limit: float) -> None:
        ok = ok and seconds < limit
        with capsys.disabled():
            print(f"\nACCEPTANCE {number} {title}: {'PASS' if ok else 'FAIL'} ({detail}; {seconds:.1f}s of {limit:.0f}s)")
        assert ok, detail

    return emit


@pytest.fixture(scope="module")
def corpus():
    """The 200 seeded instances with their oracle optima."""
    out = []
    for spec in small_corpus():
        g, h = generate(spec)
        out.append((spec, g, h, spec.get("c"), oracle_optimum(g, h)))
    return out


def test_1_line_exactness(report):
    start = time.perf_counter()
    graphs = connected_graphs(6)
    six = sum(1 for g in graphs if g.n == 6)
    bad = []
    for g in graphs:
        opt = min_line_distortion_oracle(g)[0]
        for c in (1, 2, 3):
            le = line_embed_exact(g, c)
            if (le is not None) != (opt <= c):
                bad.append((g.edges, c))
            elif le is not None:
                rep = distortion(le.to_embedding(g))
                if not (rep.non_contracting and rep.distortion <= c):
                    bad.append((g.edges, c))
    ok = not bad and len(graphs) == 143 and six == 112
    report(1, "line exactness", ok, f"{len(graphs)} graphs ({six} on 6 vertices) x 3 values of c, {len(bad)} mismatches",
           time.perf_counter() - start, 120)


def test_2_named_optima(report):
    start = time.perf_counter()
    checks = [(star(3), Fraction(3))]
    checks += [(cycle(n), Fraction(n - 1)) for n in range(4, 9)]
    checks += [(path(n), Fraction(1)) for n in range(2, 10)]
    wrong = [(g.n, g.m, min_line_distortion_oracle(g)[0], want) for g, want in checks
             if min_line_distortion_oracle(g)[0] != want]
    report(2, "named optima", not wrong, f"{len(checks)} graphs, wrong: {wrong}", time.perf_counter() - start, 10)


def test_3_fpt_agreement(report, corpus):
    start = time.perf_counter()
    mismatches, budget, gadget, unverified = 0, 0, 0, 0
    for spec, g, h, c, opt in corpus:
        stats: dict = {}
        try:
            res = fpt_embed(g, h, c, stats=stats)
        except BudgetError:
            budget += 1
            continue
        finally:
            gadget += bool(stats.get("gadget_attempted"))
        if isinstance(res, No) != (opt > c):
            mismatches += 1
        if not isinstance(res, No):
            rep = distortion(res)
            if not (rep.non_contracting and rep.distortion <= c):
                unverified += 1
    n = len(corpus)
    ok = mismatches == 0 and unverified == 0 and gadget >= 20 and budget < 0.1 * n
    report(3, "fpt agreement", ok,
           f"{n} instances, {mismatches} mismatches, {unverified} unverified, gadget on {gadget}, "
           f"BudgetError rate {budget}/{n}", time.perf_counter() - start, 600)


QUALITY_PATTERNS = [
    ("K2", complete_pattern(2)),
    ("P3", path_pattern(3)),
    ("P4", path_pattern(4)),
    ("K3", complete_pattern(3)),
    ("K13", star_pattern(3)),
    ("double edge", pattern_from_edges([(0, 1), (0, 1)])),
    ("edge plus loop", pattern_from_edges([(0, 1), (1, 1)])),
]


def test_4_approximation(report, corpus):
    start = time.perf_counter()
    false_no, bad_output, yes = 0, 0, 0
    for spec, g, h, c, opt in corpus:
        res = approx_embed(g, h, c)
        yes += opt <= c
        if isinstance(res, NoCEmbedding):
            false_no += opt <= c
            continue
        rep = distortion(res)
        if not (rep.non_contracting and is_pushing(res)[0] and is_proper(res)[0]
                and rep.distortion <= approx_params(h.h, c).c_alg):
            bad_output += 1
    quality = {}
    for name, p in QUALITY_PATTERNS:
        edges = subdivide(p, 100)
        g = graph_from_edges(edges, max(max(e) for e in edges) + 1)
        res = approx_embed(g, p, 1)
        quality[name] = None if isinstance(res, NoCEmbedding) else distortion(res).distortion
    worst = max((q for q in quality.values() if q is not None), default=None)
    ok = false_no == 0 and bad_output == 0 and None not in quality.values() and worst <= 50
    shown = ", ".join(f"{k}={v}" for k, v in quality.items())
    report(4, "approximation", ok,
           f"{false_no} NO answers on {yes} YES instances, {bad_output} bad outputs; legs 100: {shown}",
           time.perf_counter() - start, 300)


def random_host(rng: SplitMix64) -> tuple[PatternGraph, list[int]]:
    """A connected multigraph pattern (loops and parallel edges allowed) with integer lengths."""
    k = 1 + rng.below(4)
    edges = [(rng.below(i), i) for i in range(1, k)]
    for _ in range(rng.below(4)):
        edges.append((rng.below(k), rng.below(k)))
    if not edges:
        edges.append((0, 0))
    lengths = [1 + rng.below(12) for _ in edges]
    if any(u == v for (u, v), L in zip(edges, lengths) if L < 3):
        lengths = [max(L, 3) if u == v else L for (u, v), L in zip(edges, lengths)]
    return pattern_from_edges(edges, k), lengths


def expanded_distances(p: PatternGraph, lengths: list[int], scale: int):
    """Unit-edge expansion of the host at resolution 1/scale; nodes are (edge, step) or ("v", vertex)."""
    x = nx.Graph()
    for v in range(p.n):
        x.add_node(("v", v))
    for eid, ((u, v), L) in enumerate(zip(p.edges, lengths)):
        steps = L * scale
        nodes = [("v", u)] + [(eid, s) for s in range(1, steps)] + [("v", v)]
        for a, b in zip(nodes, nodes[1:]):
            x.add_edge(a, b)
    return x


def test_5_verifier_equivalence(report):
    start = time.perf_counter()
    rng = SplitMix64(5)
    done, mismatches, sizes = 0, 0, []
    while done < 100:
        p, lengths = random_host(rng)
        scale = 2
        x = expanded_distances(p, lengths, scale)
        if x.number_of_nodes() > 200:
            continue
        nodes = sorted(x.nodes, key=str)
        k = 2 + rng.below(min(7, len(nodes) - 1))
        chosen = []
        while len(chosen) < k:
            pick = nodes[rng.below(len(nodes))]
            if pick not in chosen:
                chosen.append(pick)
        tree = [(rng.below(i), i) for i in range(1, k)]
        extra = [(rng.below(k), rng.below(k)) for _ in range(rng.below(k))]
        g = graph_from_edges(sorted({tuple(sorted(e)) for e in tree + extra if e[0] != e[1]}), k)
        host = WeightedSubdivision(p, lengths)
        image = [vertex_point(n[1]) if n[0] == "v" else host.point(n[0], Fraction(n[1], scale)) for n in chosen]
        rep = distortion(Embedding(g, host, image))
        sp = dict(nx.all_pairs_shortest_path_length(x))
        expand = max(Fraction(sp[chosen[a]][chosen[b]], scale * g.dist(a, b))
                     for a, b in itertools.combinations(range(k), 2))
        contract = max(Fraction(scale * g.dist(a, b), sp[chosen[a]][chosen[b]])
                       for a, b in itertools.combinations(range(k), 2))
        if (rep.expansion, rep.contraction, rep.distortion) != (expand, contract, expand * contract):
            mismatches += 1
        sizes.append(x.number_of_nodes())
        done += 1
    report(5, "verifier equivalence", mismatches == 0,
           f"100 embeddings, expanded hosts of {min(sizes)}..{max(sizes)} vertices, {mismatches} mismatches",
           time.perf_counter() - start, 30)


def perturbed_embedding(rng: SplitMix64) -> Embedding:
    """A pushing line embedding with inflated gaps, slack at both ends and an unused pendant edge."""
    n = 2 + rng.below(6)
    tree = [(rng.below(i), i) for i in range(1, n)]
    extra = [(rng.below(n), rng.below(n)) for _ in range(rng.below(n))]
    g = graph_from_edges(sorted({tuple(sorted(e)) for e in tree + extra if e[0] != e[1]}), n)
    order = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.below(i + 1)
        order[i], order[j] = order[j], order[i]
    head = rng.below(3)
    pos = [Fraction(head)]
    for a, b in zip(order, order[1:]):
        pos.append(pos[-1] + g.dist(a, b) + Fraction(rng.below(4), 1 + rng.below(2)))
    length = pos[-1] + rng.below(3)
    pendant = Fraction(1 + rng.below(5)) if rng.below(2) else None
    return _with_slack(g, order, pos, length, pendant)


def _with_slack(g: Graph, order, pos, length, pendant) -> Embedding:
    edges = [(0, 1)] + ([(0, 2)] if pendant else [])
    lengths = [length] + ([pendant] if pendant else [])
    host = WeightedSubdivision(pattern_from_edges(edges), lengths)
    image = [None] * g.n
    for x, p in zip(order, pos):
        image[x] = host.point(0, p)
    return Embedding(g, host, image)


def test_6_normalization(report):
    start = time.perf_counter()
    rng = SplitMix64(6)
    failures = 0
    for _ in range(100):
        e = perturbed_embedding(rng)
        before = distortion(e)
        out = normalize_to_proper_pushing(e)
        after = distortion(out)
        again = normalize_to_proper_pushing(out)
        ok = (is_proper(out)[0] and is_pushing(out)[0] and after.non_contracting
              and after.distortion <= before.distortion
              and again.image == out.image and again.host.lengths == out.host.lengths)
        failures += not ok
    report(6, "normalization", failures == 0, f"100 perturbed embeddings, {failures} failures",
           time.perf_counter() - start, 30)


def test_7_density_filter(report, corpus):
    start = time.perf_counter()
    k2 = complete_pattern(2)
    rejects = [local_density_filter(clique(5), k2.h, 1) is not None,
               local_density_filter(clique(8), k2.h, 1) is not None]
    wrongly = sum(1 for spec, g, h, c, opt in corpus if opt <= c and local_density_filter(g, h.h, c) is not None)
    k = 8 * 1 * k2.h
    k8_opt = min_line_distortion_oracle(clique(k))[0]
    ok = all(rejects) and wrongly == 0 and k8_opt > 1
    report(7, "density filter", ok,
           f"rejects K5 and K8: {rejects}, {wrongly} YES instances rejected, K{k} line optimum {k8_opt}",
           time.perf_counter() - start, 30)


def test_8_cluster_lp(report):
    start = time.perf_counter()
    g = path(3)
    sols = {s.configuration.parts: s for s in cluster_solutions([0, 1, 2], complete_pattern(2), g.dist, 1)}
    s = sols[((0, 1, 2),)]
    gaps = [b - a for (a, _), (b, _) in zip(s.along(0, 0), s.along(0, 0)[1:])]
    hand = (s.alpha == (0,) and s.beta == (0,) and gaps == [1, 1]
            and s.image[0].is_vertex and s.image[2].is_vertex and not s.image[1].is_vertex)
    rng = SplitMix64(8)
    patterns = [complete_pattern(2), path_pattern(3), complete_pattern(3), star_pattern(3)]
    over = 0
    for _ in range(50):
        n = rng.below(4)
        tree = [(rng.below(i), i) for i in range(1, n)]
        dist = graph_from_edges(tree, n).dist if n > 1 else (lambda a, b: 0 if a == b else 1)
        p = patterns[rng.below(len(patterns))]
        count = sum(1 for _ in cluster_solutions(list(range(n)), p, dist, 1 + rng.below(2)))
        over += count > max(1, cluster_emission_bound(n, p.h, p.n))
    report(8, "cluster LP", hand and over == 0,
           f"hand example alpha={[str(a) for a in s.alpha]} beta={[str(b) for b in s.beta]} "
           f"gaps={[str(x) for x in gaps]}; {over} of 50 micro-inputs over the bound",
           time.perf_counter() - start, 30)
