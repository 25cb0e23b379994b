import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from sdmm.similarity import (
    ModelParams,
    QuantaCluster,
    aggregate_discrepancy,
    build_similarity_map,
    cluster_assignments,
    cluster_quanta,
    cluster_weights,
    mann_kendall,
    peer_similarity,
    similarity,
    trend_aware_similarity,
    trend_factor,
    wcss,
)

quanta_lists = st.lists(st.floats(0, 100, allow_nan=False), min_size=1, max_size=25)
tied_lists = st.lists(st.integers(0, 5).map(float), min_size=1, max_size=25)


def brute_s(x):
    return sum((x[j] > x[i]) - (x[j] < x[i]) for i in range(len(x)) for j in range(i + 1, len(x)))


def permutation_var(x):
    """Exact null variance of S over all orderings of the values."""
    vals = [brute_s(p) for p in itertools.permutations(x)]
    return float(np.var(vals))


def optimal_wcss(x, C):
    s = np.sort(np.asarray(x, dtype=float))
    best = math.inf
    for cuts in itertools.combinations(range(1, len(s)), min(C, len(s)) - 1):
        best = min(best, sum(((g - g.mean()) ** 2).sum() for g in np.split(s, cuts)))
    return best


# clustering

@pytest.mark.parametrize("method", ["optimal", "lloyd"])
def test_cluster_examples(method):
    assert cluster_quanta([5, 5, 5, 5], 1, method) == [QuantaCluster(5.0, 0.0, 4)]
    assert cluster_quanta([0, 0, 10, 10], 2, method) == [QuantaCluster(0.0, 0.0, 2), QuantaCluster(10.0, 0.0, 2)]


@pytest.mark.parametrize("method", ["optimal", "lloyd"])
def test_cluster_mixture(method):
    rng = np.random.default_rng(5)
    x = np.concatenate([rng.normal(1, 0.1, 50), rng.normal(9, 0.1, 50)])[rng.permutation(100)]
    cl = cluster_quanta(x, 2, method)
    assert abs(cl[0].c - 1) < 0.2 and abs(cl[1].c - 9) < 0.2
    assert cl[0].m == cl[1].m == 50
    assert wcss(x, cl) == pytest.approx(optimal_wcss(x, 2), rel=1e-9)


def test_cluster_shorter_window_than_c():
    cl = cluster_quanta([3.0, 1.0], 3)
    assert [c.m for c in cl] == [1, 1]


def test_cluster_rejects_empty():
    with pytest.raises(ValueError):
        cluster_quanta([], 2)


@given(quanta_lists | tied_lists, st.integers(1, 4), st.sampled_from(["optimal", "lloyd"]))
@settings(max_examples=200, deadline=None)
def test_cluster_invariants(x, C, method):
    x = np.array(x)
    clusters, labels = cluster_assignments(x, C, method)
    assert sum(cl.m for cl in clusters) == len(x)
    assert len(clusters) <= C
    for k, cl in enumerate(clusters):
        members = x[labels == k]
        assert len(members) == cl.m
        assert members.min() <= cl.c <= members.max()
        assert np.all(np.abs(members - cl.c) <= cl.r + 1e-12)
        assert np.abs(members - cl.c).max() == cl.r
    assert [cl.c for cl in clusters] == sorted(cl.c for cl in clusters)


@given(quanta_lists | tied_lists, st.integers(1, 4))
@settings(max_examples=200, deadline=None)
def test_optimal_method_matches_exhaustive_split(x, C):
    x = x[:12]
    assert wcss(x, cluster_quanta(x, C)) == pytest.approx(optimal_wcss(x, C), rel=1e-9, abs=1e-9)


# aggregation and sigmoid

def test_aggregate_examples():
    assert aggregate_discrepancy([QuantaCluster(0.5, 0.2, 7)]) == 0.5
    assert aggregate_discrepancy([QuantaCluster(1, 1, 5), QuantaCluster(3, 1, 5)]) == 2.0
    two = [QuantaCluster(2, 0.5, 8), QuantaCluster(10, 2, 2)]
    assert abs(aggregate_discrepancy(two) - 42 / 17) <= 1e-12
    np.testing.assert_allclose(cluster_weights(two), [16 / 17, 1 / 17], rtol=1e-12)


def test_aggregate_zero_radius_uses_floor():
    cl = [QuantaCluster(1.0, 0.0, 1), QuantaCluster(5.0, 1.0, 1)]
    w = cluster_weights(cl)
    assert w[0] == pytest.approx(1e6 / (1e6 + 1))


cluster_lists = st.lists(
    st.builds(QuantaCluster, st.floats(0, 1e3), st.floats(0, 1e2), st.integers(1, 100)), min_size=1, max_size=6
)


@given(cluster_lists)
def test_aggregate_in_hull_and_weights_sum(cl):
    b = aggregate_discrepancy(cl)
    assert min(c.c for c in cl) <= b <= max(c.c for c in cl)
    assert abs(cluster_weights(cl).sum() - 1) <= 1e-12


def test_sigmoid_examples():
    assert similarity(17.5, 2.0, 35.0) == 0.5
    assert abs(similarity(0.0) - 1.0) <= 1e-15
    assert similarity(25.0) == pytest.approx(1 / (1 + math.exp(15)), rel=1e-12)
    assert similarity(25.0) == pytest.approx(3.059e-7, rel=1e-3)
    assert similarity(1e6) == 0.0
    assert 0 < similarity(370.0) < 1e-300


@given(st.lists(st.floats(0.1, 50), min_size=3, max_size=20), st.floats(1.01, 10))
def test_scaling_quanta_scales_beta_bar(x, lam):
    b1 = aggregate_discrepancy(cluster_quanta(x, 1))
    b2 = aggregate_discrepancy(cluster_quanta([v * lam for v in x], 1))
    assert b2 == pytest.approx(lam * b1, rel=1e-9)
    assert similarity(b2) <= similarity(b1)


# Mann-Kendall

def test_mk_examples():
    r = mann_kendall([1, 2, 3, 4, 5])
    assert r.S == 10 and r.Z > 0
    r = mann_kendall([4, 4, 4, 4])
    assert (r.S, r.Z) == (0, 0.0)
    x = [3, 1, 4, 1, 5]
    assert mann_kendall(x).S == brute_s(x) == 3


def test_mk_suffix_and_short_window():
    r = mann_kendall([9, 9, 9, 9, 1, 2, 3, 4], eta=0.5)
    assert r.q == 4 and r.S == 6
    with pytest.raises(ValueError):
        mann_kendall([1, 2], eta=1.0)
    with pytest.raises(ValueError):
        mann_kendall([1, 2, 3, 4, 5, 6], eta=0.3)


@given(st.lists(st.integers(0, 4), min_size=3, max_size=7))
@settings(max_examples=40, deadline=None)
def test_mk_variance_matches_permutation_null(x):
    assert mann_kendall(x).var == pytest.approx(permutation_var(x), rel=1e-9, abs=1e-9)


@given(quanta_lists | tied_lists, st.sampled_from([0.3, 0.5, 0.8, 1.0]))
@settings(max_examples=200)
def test_mk_score_and_sign(x, eta):
    q = math.ceil(eta * len(x) - 1e-9)
    assume(q >= 3)
    std = mann_kendall(x, eta)
    lit = mann_kendall(x, eta, literal=True)
    assert std.S == lit.S == brute_s(x[-q:])
    assert abs(std.S) <= q * (q - 1) // 2
    if abs(std.S) >= 2:
        assert np.sign(std.Z) == np.sign(lit.Z) == np.sign(std.S)
    else:
        assert std.Z == lit.Z == 0.0
    if std.S > 1:
        assert std.Z == pytest.approx((std.S - 1) / math.sqrt(std.var))
        assert lit.Z == pytest.approx((std.S - 1) / std.var)


@given(st.lists(st.floats(0, 1e3), min_size=3, max_size=40, unique=True))
def test_mk_monotone_sign(x):
    up = sorted(x)
    assert mann_kendall(up).Z > 0
    assert mann_kendall(up[::-1]).Z < 0
    assert mann_kendall([x[0]] * len(x)).Z == 0


# trend factor and score

def test_trend_factor_examples():
    assert trend_factor(0.0) == 1.0
    assert trend_factor(0.02) == pytest.approx(0.49659, abs=5e-6)
    assert trend_factor(-0.02) == pytest.approx(2.01375, abs=5e-6)
    assert trend_aware_similarity(0.5, 1.0) == 0.5
    assert trend_aware_similarity(0.5, 2.01375) == pytest.approx(1.006875)
    assert trend_aware_similarity(0.0, 1e300) == 0.0


@given(st.floats(-20, 20))
def test_trend_factor_reciprocal(Z):
    assert abs(trend_factor(Z) * trend_factor(-Z) - 1) <= 1e-12


def test_peer_similarity_fields_consistent():
    p = peer_similarity(4, [3.0, 2.5, 2.7, 2.0, 1.0, 1.5, 0.5], ModelParams(W=7))
    assert p.peer == 4
    assert p.beta == similarity(p.beta_bar)
    assert p.epsilon == trend_factor(p.Z)
    assert p.beta_hat == p.epsilon * p.beta
    assert p.score == pytest.approx(math.log(p.beta_hat))


# ranking

P = ModelParams(W=10)


def test_identical_windows_tie_by_id():
    w = [1.0, 2.0, 1.5, 3.0, 2.0, 2.5, 1.0, 2.0, 3.0, 2.0]
    m = build_similarity_map(1, {5: w, 3: list(w), 9: list(w)}, P)
    assert m.peers == [3, 5, 9]
    assert len({p.beta_hat for p in m.ranked}) == 1


def test_constant_windows_rank_by_level():
    m = build_similarity_map(1, {2: [30.0] * 10, 3: [1.0] * 10}, P)
    assert m.peers == [3, 2]
    assert m.get(3).beta == pytest.approx(1.0) and m.get(2).beta < 1e-10
    assert m.get(3).epsilon == m.get(2).epsilon == 1.0


def test_falling_window_beats_rising_window():
    rise = list(np.linspace(1, 30, 10))
    m = build_similarity_map(1, {2: rise, 3: rise[::-1]}, P)
    assert m.peers == [3, 2]
    assert m.get(3).epsilon > 1 > m.get(2).epsilon


def test_far_peers_still_ordered_when_beta_hat_underflows():
    m = build_similarity_map(1, {2: [4000.0] * 10, 3: [3000.0] * 10, 4: [5000.0] * 10}, P)
    assert [p.beta_hat for p in m.ranked] == [0.0, 0.0, 0.0]
    assert m.peers == [3, 2, 4]


def test_cold_peers_left_out():
    m = build_similarity_map(1, {2: [1.0] * 10, 3: [1.0] * 9}, P)
    assert m.peers == [2]


@given(st.dictionaries(st.integers(2, 12), st.lists(st.floats(0, 60), min_size=10, max_size=10), min_size=1))
@settings(max_examples=100, deadline=None)
def test_map_sorted_and_deterministic(windows):
    m1 = build_similarity_map(1, windows, P)
    m2 = build_similarity_map(1, windows, P, cache={})
    assert m1 == m2
    assert sorted(m1.peers) == sorted(windows)
    keys = [(-p.beta_hat, -p.score, p.peer) for p in m1.ranked]
    assert keys == sorted(keys)
    bh = [p.beta_hat for p in m1.ranked]
    assert all(a >= b for a, b in zip(bh, bh[1:]))
