import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import is_square
from wijsum.errors import HorizonTooSmall, MissingParameter, WijsumError
from wijsum.ideals import (
    Ideal,
    IdealKind,
    Membership,
    Mode,
    Outcome,
    Status,
    bounded_converse_containment,
    chebyshev_containment,
    exceptional_set,
    filter_estimate,
    i_statistical_verdict,
    ideal_verdict,
    implication_suite,
    member_estimate,
    step_margin,
    strong_cd_containment,
)
from wijsum.index_methods import lambda_from_expr
from wijsum.metric_sets import DistanceTrace

FIN = Ideal.fin()
DZ = Ideal.density_zero()
N = 10_000
K = np.arange(1, N + 1)
SQUARES = np.array([is_square(int(k)) for k in K])

masks = st.integers(20, 400).flatmap(
    lambda n: st.lists(st.booleans(), min_size=n, max_size=n).map(np.array)
)
sparse = st.integers(20, 400).flatmap(
    lambda n: st.lists(st.integers(0, 60).map(lambda v: v == 0), min_size=n, max_size=n).map(
        np.array
    )
)
ideals = st.sampled_from([FIN, DZ, Ideal.density_zero(0.2), Ideal.fin(0.25)])


# -- membership examples -------------------------------------------------------

def test_empty_set_is_in_both():
    empty = np.zeros(N, bool)
    assert member_estimate(FIN, empty).status is Membership.IN
    assert member_estimate(DZ, empty).status is Membership.IN


def test_squares():
    assert member_estimate(DZ, SQUARES).status is Membership.IN
    est = member_estimate(FIN, SQUARES)
    assert est.status is Membership.OUT
    assert est.density_full == 0.01 and est.tail_members == 100 - 70


def test_evens():
    evens = K % 2 == 0
    assert member_estimate(DZ, evens).status is Membership.OUT
    assert member_estimate(FIN, evens).status is Membership.OUT
    assert member_estimate(DZ, evens).window_density == (0.5, 0.5)


def test_finitely_many_early_members():
    S = K <= 100
    assert member_estimate(FIN, S).status is Membership.IN
    assert member_estimate(DZ, S).status is Membership.IN


def test_thinning_set_is_inconclusive():
    # dense in the first half of the tail window, empty afterwards
    S = (K > 5000) & (K <= 7500)
    assert member_estimate(DZ, S).status is Membership.INCONCLUSIVE


def test_ideal_validation():
    with pytest.raises(WijsumError):
        Ideal.density_zero(0.0)
    with pytest.raises(WijsumError):
        Ideal.fin(1.0)
    with pytest.raises(ValueError):
        Ideal("Other")
    assert Ideal("Fin").kind is IdealKind.FIN
    with pytest.raises(HorizonTooSmall):
        member_estimate(DZ, np.zeros(19, bool))


# -- ideal axioms on the estimator ----------------------------------------------

@given(ideals, masks, st.data())
def test_subsets_inherit_membership(I, S, data):
    drop = np.array(data.draw(st.lists(st.booleans(), min_size=S.size, max_size=S.size)))
    T = S & ~drop
    if member_estimate(I, S).status is Membership.IN:
        assert member_estimate(I, T).status is Membership.IN
    if member_estimate(I, T).status is Membership.OUT:
        assert member_estimate(I, S).status is Membership.OUT


@given(sparse, st.data())
def test_fin_is_closed_under_union(S, data):
    T = np.array(data.draw(st.lists(st.booleans(), min_size=S.size, max_size=S.size)))
    both = [member_estimate(FIN, X).status is Membership.IN for X in (S, T)]
    if all(both):
        assert member_estimate(FIN, S | T).status is Membership.IN


@given(sparse, sparse, st.sampled_from([0.05, 0.1, 0.3]))
def test_density_zero_union_at_half_threshold(S, T, thr):
    # window densities add, so two sets under thr/2 stay under thr together
    n = min(S.size, T.size)
    S, T = S[:n], T[:n]
    half = Ideal.density_zero(thr / 2)
    if all(member_estimate(half, X).status is Membership.IN for X in (S, T)):
        assert member_estimate(Ideal.density_zero(thr), S | T).status is Membership.IN


@given(masks)
def test_fin_inside_density_zero(S):
    if member_estimate(FIN, S).status is Membership.IN:
        assert member_estimate(DZ, S).status is Membership.IN


@given(ideals, masks)
def test_filter_duality(I, M):
    assert filter_estimate(I, M).status is member_estimate(I, ~M).status


def test_whole_set_in_filter():
    full = np.ones(N, bool)
    assert filter_estimate(FIN, full).status is Membership.IN
    assert filter_estimate(DZ, full).status is Membership.IN
    assert filter_estimate(DZ, K % 2 == 0).status is Membership.OUT


# -- verdicts --------------------------------------------------------------------

def _spike_trace():
    return DistanceTrace.from_values([SQUARES.astype(float)], [0.0])


def test_constant_trace_consistent_everywhere():
    tr = DistanceTrace.from_values(np.full((2, 2000), 3.0), [3.0, 3.0])
    lam = lambda_from_expr("n^2")
    for mode in Mode:
        for I in (FIN, DZ):
            v = ideal_verdict(mode, tr, lam, I, 0.5, delta=0.1, p=2.0)
            assert v.consistent, (mode, I)
            assert v.statuses == (Status.CONSISTENT,) * 2


def test_sparse_spike_iconv():
    tr = _spike_trace()
    assert ideal_verdict("IConv", tr, None, DZ, 0.5).statuses == (Status.CONSISTENT,)
    assert ideal_verdict("IConv", tr, None, FIN, 0.5).statuses == (Status.VIOLATED,)
    v = i_statistical_verdict(tr, DZ, 0.5, 0.05)
    # the density of squares up to n falls below 0.05 once n > 400
    assert v.statuses == (Status.CONSISTENT,)
    assert v.as_dict()["params"]["lambda"] == "n"


def test_exceptional_set_levels():
    tr = DistanceTrace.from_values([[0.0, 1.0, 2.0] * 10], [0.0])
    ex = exceptional_set(Mode.ICONV, tr, None, 1.0)
    assert ex.mask[0, :3].tolist() == [False, True, True]
    per_probe = DistanceTrace.from_values([[1.0] * 30, [1.0] * 30], [0.0, 0.0])
    ex = exceptional_set(Mode.ICONV, per_probe, None, [0.5, 2.0])
    assert ex.mask.sum(axis=1).tolist() == [30, 0]


def test_missing_parameters_and_horizon():
    tr = DistanceTrace.from_values([[1.0] * 30], [0.0])
    lam = lambda_from_expr("n")
    with pytest.raises(MissingParameter):
        exceptional_set(Mode.ICLAMBDA_STAT, tr, lam, 0.5)
    with pytest.raises(MissingParameter):
        exceptional_set(Mode.PSTRONG_ICLAMBDA, tr, lam, 0.5)
    with pytest.raises(MissingParameter):
        exceptional_set(Mode.STRONG_ICLAMBDA, tr, None, 0.5)
    with pytest.raises(HorizonTooSmall):
        ideal_verdict(Mode.STRONG_ICLAMBDA, tr, lambda_from_expr("2^n"), DZ, 0.5)


# -- exact containments ----------------------------------------------------------

traces = st.tuples(
    st.lists(st.floats(0, 10), min_size=64, max_size=300),
    st.floats(0, 10),
)


@given(
    traces,
    st.floats(0.05, 2),
    st.floats(0.01, 0.9),
    st.sampled_from([0.5, 1.0, 2.0]),
    st.sampled_from(["n", "2n", "n^2", "2^n"]),
)
def test_containments_are_exact(tv, eps, delta, p, expr):
    x, target = tv
    tr = DistanceTrace.from_values([x], [target])
    lam = lambda_from_expr(expr)
    cheb = chebyshev_containment(tr, lam, eps, delta, p)
    assert cheb.ok, cheb.as_dict()
    conv = bounded_converse_containment(tr, lam, eps, delta, p, threshold="derived")
    assert conv.ok, conv.as_dict()
    if step_margin(lam, lam.n_horizon(tr.horizon)) > 0:
        scd = strong_cd_containment(tr, lam, eps)
        assert scd.ok, scd.as_dict()


def test_printed_converse_level_can_fail():
    # deviations sit at 0.4 < eps: the strong mean is 0.4 >= delta but no index
    # exceeds eps, so no positive density level can contain it
    tr = DistanceTrace.from_values([[1.4] * 100], [1.0])
    lam = lambda_from_expr("n")
    printed = bounded_converse_containment(tr, lam, 0.5, 0.3, 1.0, threshold="printed")
    derived = bounded_converse_containment(tr, lam, 0.5, 0.3, 1.0, threshold="derived")
    assert not printed.ok and printed.extra == (100,)
    assert derived.ok
    with pytest.raises(WijsumError):
        bounded_converse_containment(tr, lam, 0.5, 0.3, 1.0, threshold="other")


def test_step_margin():
    assert step_margin(lambda_from_expr("2^n"), 10) == 1.0
    # n/(n-1) shrinks to 50/49 at the horizon: the margin is positive but small
    assert step_margin(lambda_from_expr("n"), 50) == pytest.approx(1 / 49)
    tr = DistanceTrace.from_values([[1.0] * 50], [0.0])
    rep = strong_cd_containment(tr, lambda_from_expr("n"), 0.5)
    assert rep.ok and rep.levels["Dlambda"] == pytest.approx(25.0)


# -- implication suite -----------------------------------------------------------

def test_suite_on_constant_trace():
    tr = DistanceTrace.from_values(np.full((2, 2**20), 1.0), [1.0, 1.0])
    for expr in ("2^n", "n^2"):
        rep = implication_suite(tr, lambda_from_expr(expr), DZ, 0.5)
        assert rep.ok and not rep.candidates
        outs = {r.theorem: r.outcomes for r in rep.results}
        assert outs["strong D_lambda => strong C_lambda"] == (Outcome.PASS,) * 2
        assert all(c.ok for c in rep.containments)
    # n^2 has step ratios -> 1, so the first theorem does not apply
    first = rep.results[0]
    assert first.outcomes == (Outcome.NOT_APPLICABLE,) * 2


def test_suite_flags_vacuous_on_violated_antecedent():
    k = np.arange(1, 2**20 + 1)
    tr = DistanceTrace.from_values([np.where(k % 2, 2.0, 0.0)], [0.0])
    rep = implication_suite(tr, lambda_from_expr("2^n"), DZ, 0.5)
    assert rep.ok
    assert rep.results[1].outcomes == (Outcome.VACUOUS,)
    d = rep.as_dict()
    assert d["lambda"] == "2^n" and len(d["results"]) == 5


def test_suite_needs_horizon():
    tr = DistanceTrace.from_values([[1.0] * 10], [1.0])
    with pytest.raises(HorizonTooSmall):
        implication_suite(tr, lambda_from_expr("2^n"), DZ, 0.5)
