import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import brute_prefix_sums
from wijsum.errors import HorizonExceeded, WijsumError
from wijsum.index_methods import DeferredPair, IndexMethod, lambda_from_expr, t_rows
from wijsum.metric_sets import DistanceTrace
from wijsum.transforms import (
    apply_row_matrix,
    c1,
    c_lambda,
    compensated_cumsum,
    d_lambda,
    deferred,
    identity_residuals,
    relative_residual,
    strong_mean,
)

values = st.lists(
    st.floats(0, 1e6, allow_nan=False) | st.floats(0, 1e-6), min_size=1, max_size=300
)


def _close_to_exact(got, x):
    # compensated sums are faithful up to the final rounding of s + c:
    # error <= ulp(sum) + n * u^2 * sum|x|
    ref = brute_prefix_sums(x)
    mag = brute_prefix_sums([abs(v) for v in x])
    n = len(x)
    for g, r, m in zip(got.tolist(), ref, mag):
        assert abs(g - r) <= math.ulp(r) + n * 2.0**-104 * m


@given(values)
def test_compensated_cumsum_matches_fsum(x):
    _close_to_exact(compensated_cumsum(x), x)


@given(st.lists(st.lists(st.floats(-1e8, 1e8), min_size=7, max_size=7), min_size=1, max_size=4))
def test_compensated_cumsum_rows(rows):
    got = compensated_cumsum(np.array(rows))
    for r, g in zip(rows, got):
        _close_to_exact(g, r)


def test_cumsum_cancellation():
    x = [1e16, 1.0, -1e16, 1.0] * 50
    assert compensated_cumsum(x)[-1] == 100.0
    assert compensated_cumsum([]).tolist() == [0.0]


def _tr(rows, target=None):
    return DistanceTrace.from_values(rows, target)


def test_alternating_clambda_is_exactly_one():
    # zero at even k, 2 at odd k: every even-length prefix averages to 1
    N = 1000
    k = np.arange(1, N + 1)
    tr = _tr([np.where(k % 2 == 0, 0.0, 2.0)])
    cl = c_lambda(tr, lambda_from_expr("2n"))
    assert cl.horizon == 500
    assert np.all(cl.values == 1.0)
    dl = d_lambda(tr, lambda_from_expr("2n"))
    assert np.all(dl.values == 1.0)


@given(st.lists(st.floats(0, 10), min_size=30, max_size=120), st.sampled_from(["n", "2n", "n^2", "2^n"]))
def test_means_match_brute_force(x, expr):
    lam = lambda_from_expr(expr)
    tr = _tr([x], [3.0])
    cl, dl = c_lambda(tr, lam), d_lambda(tr, lam)
    for n in range(1, cl.horizon + 1):
        a, b = lam(n - 1), lam(n)
        assert cl.values[0, n - 1] == pytest.approx(math.fsum(x[:b]) / b, rel=1e-14)
        assert dl.values[0, n - 1] == pytest.approx(math.fsum(x[a:b]) / (b - a), rel=1e-14)
        s = strong_mean(tr, "Clambda", lam, p=2.0).values[0, n - 1]
        assert s == pytest.approx(math.fsum((v - 3) ** 2 for v in x[:b]) / b, rel=1e-12)
        sd = strong_mean(tr, "Dlambda", lam, p=1.0).values[0, n - 1]
        assert sd == pytest.approx(
            math.fsum(abs(v - 3) for v in x[a:b]) / (b - a), rel=1e-12
        )


def test_deferred_brute_force():
    x = list(np.linspace(0, 5, 40))
    pq = DeferredPair(lambda n: n // 2, lambda n: n + 3, "n/2..n+3")
    got = deferred(_tr([x]), pq)
    assert got.horizon == 37
    for n in range(1, 38):
        blk = x[n // 2 : n + 3]
        assert got.values[0, n - 1] == pytest.approx(math.fsum(blk) / len(blk), rel=1e-15)


def test_strong_c1_and_errors():
    tr = _tr([[1.0, 3.0, 5.0]], [3.0])
    assert strong_mean(tr, "C1", p=1).values.tolist() == [[2.0, 1.0, 4 / 3]]
    with pytest.raises(WijsumError):
        strong_mean(tr, "Other")
    with pytest.raises(WijsumError):
        strong_mean(tr, "Clambda")
    with pytest.raises(WijsumError):
        strong_mean(tr, "C1", p=0)


def test_horizon_exceeded():
    tr = _tr([[1.0, 2.0, 3.0]])
    with pytest.raises(HorizonExceeded):
        c_lambda(tr, lambda_from_expr("n^2"), n_max=2)
    with pytest.raises(HorizonExceeded):
        d_lambda(tr, lambda_from_expr("10^n"))
    with pytest.raises(HorizonExceeded):
        deferred(tr, DeferredPair.cesaro(), n_max=4)


def test_c1_label_and_readonly():
    s = c1(_tr([[2.0, 4.0]]))
    assert s.kind == "C1" and s.values.tolist() == [[2.0, 3.0]]
    with pytest.raises(ValueError):
        s.values[0, 0] = 1.0


def test_t_applied_to_d_recovers_c():
    rng = np.random.default_rng(3)
    tr = _tr(rng.uniform(0, 10, (2, 500)))
    lam = lambda_from_expr("n^2")
    got = apply_row_matrix(t_rows(lam), d_lambda(tr, lam))
    assert np.max(relative_residual(got.values, c_lambda(tr, lam).values)) < 1e-14


@pytest.mark.parametrize("expr", ["n", "2n", "n^2", "2^n", "n^2+n", "3^n"])
def test_identity_residuals_small(expr):
    rng = np.random.default_rng(11)
    tr = _tr(rng.uniform(0, 10, (3, 700)))
    res = identity_residuals(tr, lambda_from_expr(expr))
    assert set(res) == {
        "subsequence",
        "t_convex",
        "r_inversion",
        "r_formula",
        "deferred_c1",
        "deferred_dlambda",
        "t_row_sums",
    }
    assert max(res.values()) < 1e-12


def test_relative_residual():
    assert relative_residual([0.0, 1.0], [0.0, 1.0]).tolist() == [0.0, 0.0]
    assert relative_residual([1.0], [2.0]).tolist() == [0.5]
    assert relative_residual([1.0], [2.0], [4.0]).tolist() == [0.25]


def test_list_method_means():
    lam = IndexMethod.from_list([1, 3, 6])
    tr = _tr([[6.0, 0.0, 3.0, 1.0, 1.0, 1.0, 9.0]])
    assert c_lambda(tr, lam).values.tolist() == [[6.0, 3.0, 2.0]]
    assert d_lambda(tr, lam).values.tolist() == [[6.0, 1.5, 1.0]]
