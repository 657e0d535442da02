from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import clique, cycle, path, spider
from subdivembed.approx import (
    NoCEmbedding,
    approx_embed,
    approx_params,
    connected_subpatterns,
    cover,
    decompose,
    search,
    stitch,
    topological_subgraph_check,
)
from subdivembed.embedding_model import (
    PatternGraph,
    complete_pattern,
    distortion,
    is_proper,
    is_pushing,
    isomorphic_patterns,
    path_pattern,
    pattern_from_edges,
    star_pattern,
)
from subdivembed.errors import SizeError
from subdivembed.graph_core import graph_from_edges
from subdivembed.harness import oracle_optimum

K2, K3 = complete_pattern(2), complete_pattern(3)


def test_params():
    p = approx_params(3, 1)
    assert (p.ell, p.r, p.delta) == (20, 300, 1200)
    assert p.c_alg == 64 * 10 ** 6 * 4 ** 9
    assert approx_params(1, 2).ell == 160


def test_search_on_a_path_exhausts():
    g = path(200)
    tr = search(g, 1, frozenset(), 100, approx_params(1, 1).r)
    assert not tr.success and tr.reason == "exhausted"


def test_search_on_a_spider_succeeds_near_the_center():
    g = spider(3, 500)
    tr = search(g, 1, frozenset(), 100, approx_params(3, 1).r)
    assert tr.success
    assert g.dist(tr.u_hat, 0) <= 2 * 20 * 3


def test_search_stops_near_f():
    g = path(50)
    tr = search(g, 1, frozenset({0}), 6, 3)
    assert not tr.success and tr.reason == "near-F"
    with pytest.raises(ValueError):
        search(g, 1, frozenset({0}), 2, 3)


def test_search_trace_is_serializable():
    tr = search(spider(3, 10), 1, frozenset(), 5, 10)
    d = tr.to_dict()
    assert d["outcome"] in ("success", "fail") and d["layers"][0]["i"] == 2


def test_cover_examples():
    assert cover(path(200), 1, 1) == [frozenset()]
    fam = cover(spider(3, 500), 3, 1)
    g = spider(3, 500)
    assert any(any(g.dist(x, 0) <= 2 * 20 * 3 for x in F) for F in fam)


@st.composite
def random_graphs(draw, max_n=14):
    n = draw(st.integers(2, max_n))
    tree = [(draw(st.integers(0, i - 1)), i) for i in range(1, n)]
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=n // 2))
    edges = {tuple(sorted(e)) for e in tree + extra if e[0] != e[1]}
    return graph_from_edges(sorted(edges), n)


@settings(max_examples=60, deadline=None)
@given(random_graphs(), st.integers(1, 4), st.integers(1, 3))
def test_cover_family_shape(g, h, r):
    fam = cover(g, h, 1, r)
    assert len(fam) <= 2 ** h
    for F in fam:
        assert len(F) <= h
        assert all(g.dist(a, b) > r for a, b in itertools.combinations(F, 2))


def test_decompose_separates_balls():
    g = path(400)
    dec = decompose(g, frozenset({0, 399}), 10)
    assert len(dec.b_components) == 2
    a, b = dec.b_components
    assert min(g.dist(x, y) for x in a for y in b) >= 40
    assert len(dec.deep) == 1


def subdivided(p: PatternGraph, legs: int):
    edges, k = [], p.n
    for u, v in p.edges:
        prev = u
        for _ in range(legs - 1):
            edges.append((prev, k))
            prev, k = k, k + 1
        edges.append((prev, v))
    return graph_from_edges(edges, k)


def test_stitch_star_around_its_center():
    claw = star_pattern(3)
    g = subdivided(claw, 100)
    # the standard radius swallows legs of length 100 into the ball, so the host degenerates
    e = stitch(g, claw, 1, {0}, variants=False)[0]
    rep = distortion(e)
    assert rep.non_contracting and rep.distortion <= approx_params(3, 1).c_alg
    assert is_pushing(e)[0] and is_proper(e)[0]
    # with a smaller radius every leg is a deep component and the host is the claw itself
    e = stitch(g, claw, 1, {0}, r=10, variants=False)[0]
    assert isomorphic_patterns(e.host.pattern, claw)
    rep = distortion(e)
    assert rep.non_contracting and rep.distortion <= approx_params(3, 1).c_alg
    assert is_pushing(e)[0] and is_proper(e)[0]


def test_stitch_path_without_centers():
    e = stitch(path(200), K2, 1, frozenset())[0]
    assert e.host.pattern.h == 1 and distortion(e).distortion == 1


def test_approx_examples():
    assert distortion(approx_embed(path(10), K2, 1)).distortion == 1
    res = approx_embed(clique(5), K2, 1)
    assert isinstance(res, NoCEmbedding) and res.reason == "density"
    e = approx_embed(cycle(100), K3, 1)
    rep = distortion(e)
    assert rep.non_contracting and rep.distortion <= approx_params(3, 1).c_alg
    assert is_pushing(e)[0] and is_proper(e)[0]


def test_connected_subpatterns_of_triangle():
    subs = connected_subpatterns(K3)
    assert sorted((p.n, p.h) for p in subs) == [(2, 1), (3, 2), (3, 3)]


def test_topological_check_examples():
    claw = star_pattern(3)
    m = topological_subgraph_check(claw, claw)
    assert m is not None and m[0] == 0
    for h in (K2, K3, claw, path_pattern(4)):
        assert topological_subgraph_check(K2, h) is not None
    k4_sub = pattern_from_edges([(0, 4), (4, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
    assert topological_subgraph_check(k4_sub, K3) is None
    assert topological_subgraph_check(K3, complete_pattern(4)) is not None
    assert topological_subgraph_check(pattern_from_edges([(0, 0)]), K2) is None
    assert topological_subgraph_check(pattern_from_edges([(0, 1), (0, 1)]), K3) is not None
    with pytest.raises(SizeError):
        topological_subgraph_check(K2, complete_pattern(11))


@settings(max_examples=25, deadline=None)
@given(random_graphs(max_n=7), st.sampled_from([K2, K3]), st.integers(1, 3))
def test_approx_is_sound_on_small_graphs(g, h, c):
    opt = oracle_optimum(g, h)
    res = approx_embed(g, h, c)
    if isinstance(res, NoCEmbedding):
        assert opt > c
    else:
        rep = distortion(res)
        assert rep.non_contracting and rep.distortion >= opt
        assert rep.distortion <= approx_params(h.h, c).c_alg
        assert is_pushing(res)[0] and is_proper(res)[0]
        assert topological_subgraph_check(res.host.pattern, h) is not None
