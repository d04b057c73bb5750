import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from netreport.graph import Graph
from netreport.na import is_na
from netreport.point import average_degree
from netreport.spectral import (
    ConvergenceError,
    PagerankConfig,
    algebraic_connectivity,
    lanczos_svd,
    pagerank,
    spectral_radius,
    spectral_summary,
    top_k_singular_values,
)

from support import complete_graph, cycle_graph, dense_adjacency, er_graph, graph_from_pairs, star_graph


def dense_pagerank(g: Graph, alpha: float = 0.85) -> np.ndarray:
    a = dense_adjacency(g)
    n = len(a)
    out = a.sum(axis=1)
    m = np.zeros((n, n))
    for u in range(n):
        if out[u] == 0:
            m[:, u] = 1.0 / n
        else:
            m[:, u] = a[u] / out[u]
    return np.linalg.solve(np.eye(n) - alpha * m, np.ones(n))


# ---- spectral radius --------------------------------------------------


@pytest.mark.parametrize("n", [2, 3, 5, 9])
def test_complete_graph_radius(n):
    assert spectral_radius(complete_graph(n)).value == pytest.approx(n - 1, abs=1e-10)


@pytest.mark.parametrize("n", [3, 4, 7, 10])
def test_cycle_radius(n):
    # even cycles are bipartite: ±2 tie in magnitude
    assert spectral_radius(cycle_graph(n)).value == pytest.approx(2.0, abs=1e-10)


def test_radius_edge_cases():
    assert spectral_radius(Graph(3, [], [])).value == 0.0
    assert is_na(spectral_radius(Graph(0, [], [])).value)
    dag = graph_from_pairs(3, [(0, 1), (1, 2)], directed=True)
    assert spectral_radius(dag).value == pytest.approx(0.0, abs=1e-12)


def test_directed_radius_matches_dense():
    g = er_graph(60, 0.08, seed=3, directed=True)
    dense = np.abs(np.linalg.eigvals(dense_adjacency(g))).max()
    assert spectral_radius(g).value == pytest.approx(dense, abs=1e-8)


# ---- algebraic connectivity ------------------------------------------


def test_algebraic_connectivity_examples():
    assert algebraic_connectivity(complete_graph(4)).value == pytest.approx(4.0, abs=1e-10)
    assert algebraic_connectivity(graph_from_pairs(4, [(0, 1), (2, 3)])).value == 0.0
    assert algebraic_connectivity(graph_from_pairs(3, [(0, 1), (1, 2)])).value == pytest.approx(1.0, abs=1e-10)


def test_algebraic_connectivity_not_defined_for_directed():
    est = algebraic_connectivity(graph_from_pairs(2, [(0, 1)], directed=True))
    assert is_na(est.value) and "directed" in est.value.reason


def test_algebraic_connectivity_ignores_self_loops():
    g = graph_from_pairs(3, [(0, 1), (1, 2), (1, 1)])
    assert algebraic_connectivity(g).value == pytest.approx(1.0, abs=1e-10)


# ---- pagerank ---------------------------------------------------------


def test_regular_graph_pagerank_is_uniform():
    for g in (cycle_graph(7), complete_graph(6)):
        assert np.abs(pagerank(g) - 1 / (1 - 0.85)).max() <= 1e-10


def test_two_node_dangling_example():
    g = graph_from_pairs(2, [(0, 1)], directed=True)
    x = pagerank(g)
    assert x == pytest.approx([4.67836, 8.65497], abs=1e-5)
    assert x == pytest.approx(dense_pagerank(g), abs=1e-9)


def test_pagerank_sum_without_dangling():
    g = cycle_graph(11)
    g = graph_from_pairs(11, list(zip(g.src.tolist(), g.dst.tolist())) + [(0, 5)])
    assert pagerank(g).sum() == pytest.approx(11 / 0.15, abs=1e-8)


def test_pagerank_policies():
    g = graph_from_pairs(3, [(0, 1), (1, 2)], directed=True)
    with pytest.raises(ValueError):
        pagerank(g, PagerankConfig(dangling="error"))
    loops = pagerank(g, PagerankConfig(dangling="self-loop"))
    assert loops[2] > loops[1] > loops[0] == pytest.approx(1.0)
    with pytest.raises(ConvergenceError):
        pagerank(cycle_graph(5), PagerankConfig(alpha=0.99, tol=1e-14, max_iter=3))
    with pytest.raises(ValueError):
        PagerankConfig(alpha=1.0)


# ---- singular values --------------------------------------------------


def test_singular_value_examples():
    assert top_k_singular_values(graph_from_pairs(2, [(0, 1)])).values == pytest.approx([1, 1], abs=1e-12)
    assert top_k_singular_values(graph_from_pairs(2, [(0, 1)], directed=True)).values == pytest.approx(
        [1, 0], abs=1e-12
    )
    assert top_k_singular_values(star_graph(3), 1).values[0] == pytest.approx(math.sqrt(3), abs=1e-10)


def test_k_larger_than_n_is_clamped_with_warning():
    sv = top_k_singular_values(cycle_graph(4), 10)
    assert len(sv.values) == 4 and sv.warnings


@pytest.mark.parametrize("block", [1, 3, 8])
def test_lanczos_svd_block_sizes_match_dense(block):
    rng = np.random.default_rng(4)
    a = sp.random(120, 120, density=0.05, random_state=5, format="csr")
    a.data[:] = 1.0
    res = lanczos_svd(a, 15, tol=1e-8, max_restarts=300, block=block)
    dense = np.linalg.svd(a.toarray(), compute_uv=False)[:15]
    assert res.converged
    assert np.max(np.abs(np.array(res.values) - dense) / dense) < 1e-6
    del rng


def test_solvers_are_bit_deterministic():
    g = er_graph(80, 0.06, seed=9)
    a = spectral_summary(g, k=10)
    b = spectral_summary(g, k=10)
    assert a.spectral_radius.value == b.spectral_radius.value
    assert a.algebraic_connectivity.value == b.algebraic_connectivity.value
    assert a.singular_values.values == b.singular_values.values
    assert np.array_equal(pagerank(g), pagerank(g))


# ---- properties -------------------------------------------------------


small = st.integers(2, 14).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), min_size=1, max_size=40),
        st.booleans(),
    )
)


def build(case):
    n, pairs, directed = case
    seen = set()
    keep = []
    for u, v in pairs:
        key = (u, v) if directed else tuple(sorted((u, v)))
        if key not in seen:
            seen.add(key)
            keep.append((u, v))
    return graph_from_pairs(n, keep, directed=directed)


@settings(max_examples=120, deadline=None)
@given(small)
def test_sigma_bounds_rho(case):
    g = build(case)
    rho = spectral_radius(g).value
    sv = top_k_singular_values(g, 1)
    assert sv.values[0] >= rho - 1e-8
    if not g.directed:
        assert rho >= average_degree(g) - 1e-8 or g.self_loop_count


@settings(max_examples=120, deadline=None)
@given(small)
def test_radius_and_connectivity_match_dense(case):
    g = build(case)
    a = dense_adjacency(g)
    dense = np.abs(np.linalg.eigvals(a)).max()
    assert spectral_radius(g).value == pytest.approx(dense, abs=1e-8)
    if not g.directed:
        s = dense_adjacency(g)
        np.fill_diagonal(s, 0)
        lap = np.diag(s.sum(axis=1)) - s
        expected = np.linalg.eigvalsh(lap)[1]
        got = algebraic_connectivity(g).value
        assert got >= 0
        assert got == pytest.approx(expected, abs=1e-8)


@settings(max_examples=120, deadline=None)
@given(small, st.sampled_from([0.5, 0.85, 0.95]))
def test_pagerank_matches_dense_solve(case, alpha):
    g = build(case)
    x = pagerank(g, PagerankConfig(alpha=alpha))
    assert np.abs(x - dense_pagerank(g, alpha)).max() <= 1e-8
    assert x.min() >= 1 - 1e-10
    if (g.out_degrees > 0).all():
        assert x.sum() == pytest.approx(g.node_count / (1 - alpha), abs=g.node_count * 1e-9)


@settings(max_examples=100, deadline=None)
@given(small)
def test_singular_values_match_dense(case):
    g = build(case)
    k = min(20, g.node_count)
    got = top_k_singular_values(g, k).values
    dense = np.linalg.svd(dense_adjacency(g), compute_uv=False)[:k]
    assert got == sorted(got, reverse=True)
    for x, y in zip(got, dense):
        assert abs(x - y) <= 1e-6 * max(y, 1e-12) + 1e-10
