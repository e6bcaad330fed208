"""Summability diagnostics for sequences of closed sets in Euclidean space.

Distance traces d(x, A_k) feed Cesaro-type means, statistical densities and
finite-horizon ideal convergence verdicts.
"""

from .errors import WijsumError
from .ideals import Ideal, Mode, Status, ideal_verdict, implication_suite, member_estimate
from .index_methods import DeferredPair, IndexMethod, lambda_from_expr, ratio_condition
from .metric_sets import (
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
    trace,
)
from .scenarios import builtin, run
from .statistical import c_lambda_stat_density, statistical_density
from .transforms import c1, c_lambda, d_lambda, deferred, strong_mean

__all__ = [
    "WijsumError",
    "Ideal", "Mode", "Status", "ideal_verdict", "implication_suite", "member_estimate",
    "DeferredPair", "IndexMethod", "lambda_from_expr", "ratio_condition",
    "AxisBox", "Ball", "DistanceOracle", "DistanceTrace", "FinitePointSet", "Hyperplane",
    "SetSequence", "Singleton", "Sphere", "bounded_estimate", "distance", "trace",
    "builtin", "run",
    "c_lambda_stat_density", "statistical_density",
    "c1", "c_lambda", "d_lambda", "deferred", "strong_mean",
]

__version__ = "0.1.0"
