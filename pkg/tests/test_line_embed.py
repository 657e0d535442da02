from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import connected_graphs, cycle, path, spider, star
from subdivembed.embedding_model import distortion
from subdivembed.errors import BudgetError, SizeError
from subdivembed.graph_core import graph_from_edges
from subdivembed.harness import min_cycle_distortion_oracle
from subdivembed.line_embed import (
    APPROX_QUALITY,
    CertifiedNo,
    LineEmbedding,
    cycle_embed_exact,
    line_distortion,
    line_embed_approx,
    line_embed_exact,
    min_line_distortion_oracle,
    pushed,
)

SMALL = connected_graphs(6)


def test_exact_examples():
    le = line_embed_exact(path(5), 1)
    assert le.order in ((0, 1, 2, 3, 4), (4, 3, 2, 1, 0))
    assert line_distortion(le, path(5)) == 1
    assert line_embed_exact(star(3), 2) is None
    assert line_distortion(line_embed_exact(star(3), 3), star(3)) == 3
    assert line_embed_exact(cycle(5), 3) is None
    assert line_distortion(line_embed_exact(cycle(5), 4), cycle(5)) == 4


def test_exact_accepts_a_metric_matrix():
    g = cycle(6)
    matrix = [g.bfs_row(v) for v in range(6)]
    assert line_embed_exact(matrix, 4) is None
    assert line_embed_exact(matrix, 5) is not None


def test_exact_pins_ends():
    le = line_embed_exact(path(5), 1, first=4, last=0)
    assert le.order == (4, 3, 2, 1, 0)
    assert line_embed_exact(path(5), 1, first=2) is None
    assert line_embed_exact(path(5), 1, first=1, last=1) is None


def test_budget_is_not_a_no():
    with pytest.raises(BudgetError):
        line_embed_exact(cycle(9), 7, budget=10)


def test_approx_examples():
    assert line_distortion(line_embed_approx(path(7), 3), path(7)) == 1
    cert = line_embed_approx(spider(3, 3), 1)
    assert isinstance(cert, CertifiedNo)
    g = spider(3, 3)
    a, b, c = cert.witnesses
    assert min(g.dist(a, b), g.dist(b, c), g.dist(a, c)) > 2


def test_approx_star_k15():
    g = star(5)
    le = line_embed_approx(g, 3)
    assert isinstance(le, LineEmbedding)
    assert line_distortion(le, g) == 7  # a leaf root puts the center second
    center_first = pushed([0, 1, 2, 3, 4, 5], g.dist)
    assert center_first.positions == (0, 1, 3, 5, 7, 9)
    assert line_distortion(center_first, g) == 9


def test_oracle_values():
    assert min_line_distortion_oracle(path(4))[0] == 1
    assert min_line_distortion_oracle(star(3))[0] == 3
    assert min_line_distortion_oracle(cycle(6))[0] == 5
    with pytest.raises(SizeError):
        min_line_distortion_oracle(path(10))


def test_small_graph_count():
    # connected graphs on 1..6 vertices: 1 + 1 + 2 + 6 + 21 + 112
    assert len(SMALL) == 143
    assert sum(1 for g in SMALL if g.n == 6) == 112


def brute_force_line(g) -> Fraction:
    """Minimum pushed-order distortion, recomputed independently of the oracle."""
    best = None
    for order in itertools.permutations(range(g.n)):
        pos = {order[0]: 0}
        for a, b in zip(order, order[1:]):
            pos[b] = pos[a] + g.dist(a, b)
        worst = max((Fraction(abs(pos[u] - pos[v]), g.dist(u, v)) for u, v in itertools.combinations(range(g.n), 2)),
                    default=Fraction(1))
        best = worst if best is None else min(best, worst)
    return best


@pytest.mark.parametrize("g", [g for g in SMALL if g.n <= 5], ids=lambda g: f"n{g.n}m{g.m}")
def test_oracle_matches_brute_force(g):
    assert min_line_distortion_oracle(g)[0] == brute_force_line(g)


@st.composite
def small_graphs(draw, max_n=7):
    n = draw(st.integers(2, max_n))
    tree = [(draw(st.integers(0, i - 1)), i) for i in range(1, n)]
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=n))
    edges = {tuple(sorted(e)) for e in tree + extra if e[0] != e[1]}
    return graph_from_edges(sorted(edges), n)


@settings(max_examples=80, deadline=None)
@given(small_graphs(), st.integers(1, 4))
def test_exact_decision_matches_oracle(g, c):
    opt = min_line_distortion_oracle(g)[0]
    le = line_embed_exact(g, c)
    assert (le is not None) == (opt <= c)
    if le is not None:
        rep = distortion(le.to_embedding(g))
        assert rep.non_contracting and rep.distortion <= c


@settings(max_examples=80, deadline=None)
@given(small_graphs(), st.integers(1, 3))
def test_approx_certificate_is_sound_and_quality_holds(g, c):
    opt = min_line_distortion_oracle(g)[0]
    res = line_embed_approx(g, c)
    if isinstance(res, CertifiedNo):
        assert opt > c
    else:
        d = line_distortion(res, g)
        assert d >= opt
        if opt <= c:
            assert d <= APPROX_QUALITY * c * c


@settings(max_examples=80, deadline=None)
@given(small_graphs(), st.integers(1, 3))
def test_cycle_search_plus_line_matches_cycle_oracle(g, c):
    opt = min_cycle_distortion_oracle(g)[0]
    ce = cycle_embed_exact(g, c)
    le = line_embed_exact(g, c)
    assert (ce is not None or le is not None) == (opt <= c)
    if ce is not None:
        assert ce.positions[0] == 0 and ce.total == ce.positions[-1] + g.dist(ce.order[-1], ce.order[0])
