import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import (
    ball_params,
    box_params,
    grid_min_distance,
    line_params,
    sphere_params,
)
from wijsum.errors import DimensionMismatch, MissingTarget, NonFiniteError, WijsumError
from wijsum.metric_sets import (
    AxisBox,
    Ball,
    DistanceOracle,
    DistanceTrace,
    FinitePointSet,
    Hyperplane,
    SetSequence,
    Singleton,
    Sphere,
    bounded_estimate,
    distance,
    growth_suspect,
    trace,
)

coord = st.floats(-20, 20, allow_nan=False)
point2 = st.tuples(coord, coord)
radius = st.floats(0.01, 10)


def shapes():
    return st.one_of(
        point2.map(Singleton),
        st.lists(point2, min_size=1, max_size=5).map(lambda p: FinitePointSet(tuple(p))),
        st.builds(Ball, point2, st.floats(0, 10)),
        st.builds(Sphere, point2, radius),
        st.builds(
            lambda a, b: AxisBox(np.minimum(a, b), np.maximum(a, b)), point2, point2
        ),
        st.builds(
            Hyperplane,
            point2.filter(lambda n: math.hypot(*n) > 1e-3),
            st.floats(-10, 10),
        ),
    )


# -- worked examples -----------------------------------------------------------

def test_point_in_singleton_is_zero():
    assert distance((1, 0), Singleton((1, 0))) == 0.0


def test_unit_distance():
    assert distance((0, 0), Singleton((1, 0))) == 1.0


def test_ball_distance_matches_grid_oracle():
    ref = grid_min_distance((0, 0), *ball_params((3, 0), 1))
    assert ref == pytest.approx(2.0, abs=1e-6)
    assert distance((0, 0), Ball((3, 0), 1)) == pytest.approx(ref, abs=1e-6)
    assert distance((0, 0), Ball((3, 0), 1)) == 2.0


# Frozen oracle values (grid search with zooming, computed once by
# tests/oracles.py and rounded to 1e-9).
ORACLE_CASES = [
    (Ball((1.5, -2.0), 0.75), ball_params((1.5, -2.0), 0.75), (4.0, 1.0), 3.155124838),
    (Sphere((0.0, 0.0), 2.0), sphere_params((0, 0), 2.0), (0.5, 0.5), 1.292893219),
    (Sphere((1.0, 1.0), 1.0), sphere_params((1, 1), 1.0), (4.0, 5.0), 4.0),
    (AxisBox((0.0, 0.0), (2.0, 1.0)), box_params((0, 0), (2, 1)), (3.0, 3.0), 2.236067977),
    (AxisBox((0.0, 0.0), (2.0, 1.0)), box_params((0, 0), (2, 1)), (1.0, 0.5), 0.0),
    (Hyperplane((3.0, 4.0), 5.0), line_params((3, 4), 5.0, 50), (0.0, 0.0), 1.0),
    (Hyperplane((1.0, 0.0), 0.0), line_params((1, 0), 0.0, 50), (2.0, 1.0), 2.0),
]


@pytest.mark.parametrize("shape,params,x,frozen", ORACLE_CASES)
def test_closed_forms_match_frozen_oracle(shape, params, x, frozen):
    assert grid_min_distance(x, *params) == pytest.approx(frozen, abs=1e-6)
    assert distance(x, shape) == pytest.approx(frozen, abs=1e-8)


def test_finite_set_is_min_over_points():
    A = FinitePointSet(((0, 0), (3, 4), (-1, 1)))
    assert distance((3, 3), A) == 1.0
    assert distance((0, 0), A) == 0.0


def test_hyperplane_normalizes():
    H = Hyperplane((0.0, 2.0), 4.0)
    assert np.allclose(H.normal, (0, 1))
    assert H.offset == 2.0
    assert distance((7, 5), H) == 3.0


# -- invariants ----------------------------------------------------------------

@given(shapes(), point2, point2)
def test_distance_is_nonnegative_and_1_lipschitz(A, x, y):
    dx, dy = distance(x, A), distance(y, A)
    assert dx >= 0 and dy >= 0
    assert abs(dx - dy) <= math.dist(x, y) + 1e-9


@given(shapes(), point2)
def test_distance_matches_grid_oracle(A, x):
    if isinstance(A, (Singleton, FinitePointSet)):
        pts = np.atleast_2d(A.point if isinstance(A, Singleton) else A.points)
        ref = float(np.min(np.linalg.norm(pts - np.asarray(x), axis=1)))
    elif isinstance(A, Ball):
        ref = grid_min_distance(x, *ball_params(A.center, A.radius))
    elif isinstance(A, Sphere):
        ref = grid_min_distance(x, *sphere_params(A.center, A.radius))
    elif isinstance(A, AxisBox):
        ref = grid_min_distance(x, *box_params(A.lo, A.hi))
    else:
        reach = abs(A.offset) + math.hypot(*x) + 10
        ref = grid_min_distance(x, *line_params(A.normal, A.offset, reach))
    assert distance(x, A) == pytest.approx(ref, abs=1e-6)


@given(point2, radius)
def test_zero_exactly_on_the_set(c, r):
    theta = 0.7
    on = (c[0] + r * math.cos(theta), c[1] + r * math.sin(theta))
    assert distance(on, Sphere(c, r)) == pytest.approx(0, abs=1e-9)
    assert distance(on, Ball(c, r)) == pytest.approx(0, abs=1e-9)
    assert distance(c, Ball(c, r)) == 0.0
    assert distance(c, Sphere(c, r)) == pytest.approx(r)


# -- errors --------------------------------------------------------------------

def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        distance((0, 0, 0), Singleton((1, 0)))


def test_non_finite_coordinates():
    with pytest.raises(NonFiniteError):
        distance((math.nan, 0), Singleton((1, 0)))


@pytest.mark.parametrize(
    "build",
    [
        lambda: Ball((0, 0), -1),
        lambda: Sphere((0, 0), 0),
        lambda: AxisBox((1, 0), (0, 1)),
        lambda: Hyperplane((0, 0), 1),
    ],
)
def test_invalid_shapes(build):
    with pytest.raises(WijsumError):
        build()


def test_oracle_shape_checks_output():
    ok = DistanceOracle(lambda x: abs(x[0]), dim=2)
    assert distance((3, 1), ok) == 3.0
    bad = DistanceOracle(lambda x: -1.0, dim=2)
    with pytest.raises(NonFiniteError):
        distance((0, 0), bad)


# -- traces --------------------------------------------------------------------

def test_constant_trace():
    seq = SetSequence("origin", lambda k: Singleton((0, 0)))
    tr = trace(seq, [(3, 4)], 5)
    assert tr.values.tolist() == [[5.0] * 5]


def test_alternating_trace():
    seq = SetSequence("alt", lambda k: Singleton((1, 0) if k % 2 == 0 else (-1, 0)))
    tr = trace(seq, [(1, 0)], 4)
    assert tr.values.tolist() == [[2.0, 0.0, 2.0, 0.0]]


def test_circle_family_tail_matches_axis_distance():
    seq = SetSequence("circles", lambda k: Sphere((k, 0), k))
    N = 10_000
    tr = trace(seq, [(2, 1)], N, Hyperplane((1, 0), 0))
    k = np.arange(1, N + 1)
    closed = np.abs(np.sqrt((2.0 - k) ** 2 + 1) - k)
    assert np.allclose(tr.values[0], closed, atol=1e-9)
    assert tr.target_row[0] == 2.0
    assert np.all(np.abs(tr.values[0, -10:] - 2.0) <= 1e-3)
    # 1/(2(k-2)) is the leading term of the expansion
    assert abs(2.0 - tr.values[0, -1]) == pytest.approx(1 / (2 * (N - 2)), rel=1e-3)


def test_batch_path_is_used_and_validated():
    calls = []

    def batch(P, ks):
        calls.append(ks.size)
        return np.zeros((P.shape[0], ks.size + 1))

    seq = SetSequence("bad", lambda k: Singleton((0, 0)), batch=batch)
    with pytest.raises(DimensionMismatch):
        trace(seq, [(0, 0)], 3)
    assert calls == [3]


def test_trace_requires_positive_horizon():
    seq = SetSequence("o", lambda k: Singleton((0, 0)))
    with pytest.raises(WijsumError):
        trace(seq, [(0, 0)], 0)
    with pytest.raises(WijsumError):
        seq(0)


def test_trace_validation():
    with pytest.raises(NonFiniteError):
        DistanceTrace.from_values([[1.0, -1.0]])
    with pytest.raises(NonFiniteError):
        DistanceTrace.from_values([[1.0, math.inf]])
    with pytest.raises(DimensionMismatch):
        DistanceTrace(np.zeros((2, 2)), np.ones((3, 4)))
    tr = DistanceTrace.from_values([[1.0, 2.0]])
    with pytest.raises(MissingTarget):
        tr.deviations()
    assert tr.with_target([1.5]).deviations().tolist() == [[0.5, 0.5]]
    with pytest.raises(ValueError):
        tr.values[0, 0] = 3.0


# -- boundedness ---------------------------------------------------------------

def test_bounded_estimate_flags_growth():
    k = np.arange(1, 10_001)
    spike = np.where(np.sqrt(k) % 1 == 0, k, 0.0)
    steady = np.ones_like(k, dtype=float)
    rep = bounded_estimate(np.vstack([spike, steady]))
    assert rep.sup.tolist() == [10_000.0, 1.0]
    assert rep.unbounded_suspect.tolist() == [True, False]
    assert rep.any_suspect


@given(st.lists(st.floats(0, 100), min_size=1, max_size=200))
def test_growth_zero_when_sup_reached_early(vals):
    v = np.array([max(vals)] + vals)
    growth, flagged = growth_suspect(v)
    assert growth[0] == 0 and not flagged[0]
