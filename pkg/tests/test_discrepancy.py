import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from sdmm.discrepancy import DiscrepancyWindow, ceil_frac, discrepancy, warm_length
from sdmm.synopsis import Synopsis

vec = arrays(np.float64, 3, elements=st.floats(-1e6, 1e6, allow_nan=False))


@pytest.mark.parametrize(
    "a,b,norm,d",
    [((1, 2, 3), (1, 2, 3), "L1", 0.0), ((1, 0), (0, 1), "L1", 2.0), ((3, 4), (0, 0), "L2", 5.0)],
)
def test_examples(a, b, norm, d):
    assert discrepancy(np.array(a, float), np.array(b, float), norm) == d


def test_accepts_synopses():
    a = Synopsis(np.array([1.0, 1.0]), 1)
    b = Synopsis(np.array([4.0, 5.0]), 1)
    assert discrepancy(a, b, "L2") == 5.0


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        discrepancy(np.zeros(2), np.zeros(3))
    with pytest.raises(ValueError):
        discrepancy(np.zeros(2), np.zeros(2), "Linf")


@given(vec, vec)
def test_symmetric_and_l1_dominates_l2(a, b):
    for norm in ("L1", "L2"):
        assert discrepancy(a, b, norm) == discrepancy(b, a, norm)
    assert discrepancy(a, b, "L1") >= discrepancy(a, b, "L2") * (1 - 1e-12)


@given(vec, vec, vec)
def test_triangle_inequality(a, b, c):
    for norm in ("L1", "L2"):
        lhs = discrepancy(a, c, norm)
        rhs = discrepancy(a, b, norm) + discrepancy(b, c, norm)
        assert lhs <= rhs * (1 + 1e-12) + 1e-9


def test_window_eviction_and_fill():
    w = DiscrepancyWindow(3, quanta=[1, 2, 3]).push(4)
    assert list(w) == [2, 3, 4]
    w = DiscrepancyWindow(3, quanta=[1]).push(2)
    assert list(w) == [1, 2]
    assert not w.full


def test_thousand_pushes():
    rng = np.random.default_rng(0)
    seq = rng.uniform(0, 10, 1000)
    w = DiscrepancyWindow(10)
    for d in seq:
        w.push(d)
    assert w.values.tolist() == seq[-10:].tolist()


@given(st.integers(1, 30), st.lists(st.floats(0, 1e9), max_size=100))
def test_window_holds_last_w(W, seq):
    w = DiscrepancyWindow(W, quanta=seq)
    assert w.values.tolist() == seq[-W:]
    assert len(w) == min(W, len(seq))


@pytest.mark.parametrize("bad", [-1.0, math.nan, math.inf])
def test_window_rejects_bad_quanta(bad):
    with pytest.raises(ValueError):
        DiscrepancyWindow(4).push(bad)


def test_warm_length():
    assert warm_length(100, 1.0) == 100
    assert warm_length(100, 0.5) == 50
    assert warm_length(10, 0.1) == 4
    assert warm_length(10, 0.7) == 7
    assert ceil_frac(0.7, 10) == 7
    w = DiscrepancyWindow(10, quanta=[1.0] * 6)
    assert w.is_warm(0.5) and not w.is_warm(1.0)
