from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import clique, cycle, path, spider, star
from subdivembed.embedding_model import (
    PatternGraph,
    complete_pattern,
    distortion,
    is_pushing,
    path_pattern,
    star_pattern,
)
from subdivembed.errors import BudgetError
from subdivembed.fpt import (
    No,
    TooMany,
    augment_with_clique_gadget,
    cluster_emission_bound,
    cluster_solutions,
    delta_interesting_set,
    fpt_embed,
    is_alpha_interesting,
    path_embed,
    simple_paths,
)
from subdivembed.graph_core import graph_from_edges
from subdivembed.harness import oracle_optimum

K2, K3 = complete_pattern(2), complete_pattern(3)


def test_alpha_interesting_examples():
    assert not is_alpha_interesting(path(9), 4, 3, 1)
    assert not is_alpha_interesting(spider(3, 2), 0, 0, 1)
    assert is_alpha_interesting(spider(3, 2), 0, 2, 1)


def test_delta_interesting_set_examples():
    assert delta_interesting_set(path(30), K2, 1) == frozenset()
    found = delta_interesting_set(spider(3, 40), star_pattern(3), 1)
    assert not isinstance(found, TooMany) and 0 in found


def test_cluster_hand_example():
    g = path(3)  # d(0,1) = d(1,2) = 1, d(0,2) = 2
    sols = {s.configuration.parts: s for s in cluster_solutions([0, 1, 2], K2, g.dist, 1)}
    s = sols[((0, 1, 2),)]
    assert s.alpha == (0,) and s.beta == (0,)
    assert [d for d, _ in s.along(0, 0)] == [0, 1, 2]
    assert s.lengths == (2,)
    assert s.image[0].vertex == 0 and s.image[2].vertex == 1 and not s.image[1].is_vertex


def test_cluster_empty_set():
    sols = list(cluster_solutions([], K2, path(2).dist, 1))
    assert len(sols) == 1 and sols[0].alpha == (0,) and sols[0].beta == (0,) and sols[0].image == {}


def test_simple_paths_in_triangle():
    assert simple_paths(K3, 0, 0) == [()]
    assert sorted(len(p) for p in simple_paths(K3, 0, 1)) == [1, 2]


@st.composite
def micro_inputs(draw):
    n = draw(st.integers(0, 3))
    tree = [(draw(st.integers(0, i - 1)), i) for i in range(1, n)]
    g = graph_from_edges(tree, n) if n > 1 else None
    pattern = draw(st.sampled_from([K2, path_pattern(3), K3, star_pattern(3)]))
    c = draw(st.integers(1, 2))
    return n, g, pattern, c


@settings(max_examples=50, deadline=None)
@given(micro_inputs())
def test_cluster_emission_bound(inp):
    n, g, pattern, c = inp
    dist = g.dist if g is not None else (lambda a, b: 0 if a == b else 1)
    sols = list(cluster_solutions(list(range(n)), pattern, dist, c))
    assert len(sols) <= max(1, cluster_emission_bound(n, pattern.h, pattern.n))
    for s in sols:
        assert all(x > 0 for x in s.lengths)
        assert sorted(s.image) == list(range(n))


def test_path_embed_examples():
    g = path(40)
    frag = path_embed(g, list(range(5, 35)), list(range(5)), [], 1)
    assert frag.order == tuple(range(35)) and frag.positions == tuple(Fraction(i) for i in range(35))
    assert path_embed(g, list(range(5, 35)), [0, 2, 1, 3, 4], [], 1) is None


def test_path_embed_excludes_dense_vertices():
    # a 12-clique hanging off vertex 20 makes the ball around 20 too big
    edges = [(i, i + 1) for i in range(39)] + [(20, 40)] + list(itertools.combinations(range(40, 52), 2))
    g = graph_from_edges(edges, 52)
    assert path_embed(g, list(range(5, 35)), list(range(5)), [], 1) is None


def test_fpt_examples():
    e = fpt_embed(path(6), K2, 1)
    assert distortion(e).distortion == 1
    assert isinstance(fpt_embed(star(3), K2, 2), No)
    assert distortion(fpt_embed(star(3), K2, 3)).distortion == 3
    e = fpt_embed(cycle(8), K3, 1)
    assert distortion(e).distortion == 1 and is_pushing(e)[0]


def test_fpt_density_rejects_cliques():
    res = fpt_embed(clique(8), K2, 1)
    assert isinstance(res, No) and res.reason == "density"


def test_fpt_budget_reports_where():
    with pytest.raises(BudgetError) as info:
        fpt_embed(spider(3, 3), K2, 3, budget=5)
    assert info.value.where


def test_gadget_sizes():
    gp, variants = augment_with_clique_gadget(path(5), K2, 1)
    k = 8 * 1 * K2.h
    assert k == 8
    assert gp.n == 5 + k + 3 * 16  # connectors have 16c^4 + 1 = 17 edges
    assert gp.dist(5, 0) == 17
    assert len(variants) == 1  # the 3-subsets of V(K2) and E(K2)


def test_gadget_route_runs_on_cycles():
    stats = {}
    e = fpt_embed(cycle(8), K3, 1, stats=stats)
    assert stats["gadget_attempted"] and distortion(e).distortion == 1


@st.composite
def small_graphs(draw, max_n=6):
    n = draw(st.integers(2, max_n))
    tree = [(draw(st.integers(0, i - 1)), i) for i in range(1, n)]
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=n))
    edges = {tuple(sorted(e)) for e in tree + extra if e[0] != e[1]}
    return graph_from_edges(sorted(edges), n)


@settings(max_examples=40, deadline=None)
@given(small_graphs(), st.sampled_from([K2, K3]), st.integers(1, 3), st.booleans())
def test_fpt_matches_oracle(g, h, c, gadget):
    opt = oracle_optimum(g, h)
    res = fpt_embed(g, h, c, gadget=gadget)
    assert isinstance(res, No) == (opt > c)
    if not isinstance(res, No):
        rep = distortion(res)
        assert rep.non_contracting and rep.distortion <= c and rep.distortion >= opt


def test_pattern_with_branching_vertex():
    # a subdivided claw embeds into the claw pattern with distortion 1
    g = spider(3, 2)
    e = fpt_embed(g, star_pattern(3), 1)
    assert distortion(e).distortion == 1
    assert isinstance(fpt_embed(g, PatternGraph(2, [(0, 1)]), 1), No)
