import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import brute_count, is_square
from wijsum.errors import HorizonExceeded, WijsumError
from wijsum.index_methods import lambda_from_expr
from wijsum.metric_sets import DistanceTrace
from wijsum.statistical import (
    bounded_split_check,
    c_lambda_stat_density,
    chebyshev_check,
    exceed_count,
    statistical_density,
)
from wijsum.transforms import strong_mean

row = st.lists(st.floats(0, 10), min_size=20, max_size=200)


@given(row, st.floats(0.01, 5), st.data())
def test_exceed_count_brute(x, eps, data):
    tr = DistanceTrace.from_values([x], [2.0])
    upto = data.draw(st.integers(1, len(x)))
    devs = [abs(v - 2.0) for v in x]
    assert exceed_count(tr, eps, upto)[0] == brute_count(devs, eps, upto)


def test_boundary_counts_as_exceedance():
    tr = DistanceTrace.from_values([[1.5, 1.0]], [1.0])
    assert exceed_count(tr, 0.5, 2)[0] == 1


def test_alternating_density_half():
    k = np.arange(1, 1001)
    tr = DistanceTrace.from_values([np.where(k % 2, 2.0, 0.0)], [0.0])
    d = statistical_density(tr, 1.0)
    assert d.values[0, -1] == 0.5
    assert d.counts[0, -1] == 500


def test_square_spikes_density():
    N = 10_000
    k = np.arange(1, N + 1)
    spikes = np.array([1.0 if is_square(int(i)) else 0.0 for i in k])
    tr = DistanceTrace.from_values([spikes], [0.0])
    d = statistical_density(tr, 0.5)
    assert d.values[0, -1] == 0.01
    sq = c_lambda_stat_density(tr, lambda_from_expr("n^2"), 0.5)
    assert sq.horizon == 100
    assert sq.values[0].tolist() == [n / n**2 for n in range(1, 101)]


def test_density_errors():
    tr = DistanceTrace.from_values([[1.0, 2.0]], [0.0])
    with pytest.raises(WijsumError):
        statistical_density(tr, 0.0)
    with pytest.raises(HorizonExceeded):
        exceed_count(tr, 0.5, 3)
    with pytest.raises(HorizonExceeded):
        c_lambda_stat_density(tr, lambda_from_expr("10^n"), 0.5)


@given(
    st.lists(st.floats(0, 10), min_size=40, max_size=300),
    st.floats(0, 10),
    st.floats(0.05, 3),
    st.sampled_from([1.0, 2.0, 0.5, 3.0]),
    st.sampled_from(["n", "n^2", "2^n", "2n"]),
)
def test_inequalities_hold_pointwise(x, target, eps, p, expr):
    lam = lambda_from_expr(expr)
    tr = DistanceTrace.from_values([x], [target])
    strong = strong_mean(tr, "Clambda", lam, p=p)
    dens = c_lambda_stat_density(tr, lam, eps)
    cheb = chebyshev_check(strong, dens, eps, p)
    assert cheb.ok, cheb.as_dict()
    alpha = float(np.max(np.abs(np.asarray(x) - target)))
    split = bounded_split_check(strong, dens, eps, p, alpha)
    assert split.ok, split.as_dict()


def test_inequality_report_fields():
    tr = DistanceTrace.from_values([[1.0, 0.0, 3.0]], [0.0])
    lam = lambda_from_expr("n")
    strong = strong_mean(tr, "Clambda", lam, p=1.0)
    dens = c_lambda_stat_density(tr, lam, 0.5)
    rep = chebyshev_check(strong, dens, 0.5, 1.0)
    # strong: 1, 0.5, 4/3; density: 1, 0.5, 2/3
    assert np.allclose(rep.slack, [[0.5, 0.25, 1.0]])
    assert rep.first_violation is None
    assert rep.as_dict()["ok"] is True
    with pytest.raises(WijsumError):
        bounded_split_check(strong, dens, 0.5, 1.0, alpha=1.0)
    with pytest.raises(WijsumError):
        chebyshev_check(strong, dens, 0.5, 2.0)
    with pytest.raises(WijsumError):
        chebyshev_check(strong, dens, 0.25, 1.0)
