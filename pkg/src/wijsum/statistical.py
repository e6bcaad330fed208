"""Exceedance counts, statistical densities and the two per-n inequalities.

Counts are exact integers (cumulative sums of a boolean mask); densities
divide them by lambda(n).  A deviation exactly equal to eps counts as an
exceedance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import HorizonExceeded, WijsumError
from .index_methods import IndexMethod
from .metric_sets import DistanceTrace
from .transforms import MeanSeries

__all__ = [
    "exceed_count",
    "DensitySeries",
    "c_lambda_stat_density",
    "statistical_density",
    "InequalityReport",
    "chebyshev_check",
    "bounded_split_check",
]

# Absolute slack allowed in the inequality checks.
INEQ_TOL = 1e-12


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not eps > 0:
        raise WijsumError(f"eps must be positive, got {eps}")
    return eps


def exceed_count(trace: DistanceTrace, eps: float, upto: int) -> np.ndarray:
    """Number of k <= upto with |d(x, A_k) - d(x, A)| >= eps, per probe."""
    eps = _check_eps(eps)
    if not 1 <= upto <= trace.horizon:
        raise HorizonExceeded(f"upto = {upto} outside 1..{trace.horizon}")
    return np.count_nonzero(trace.deviations()[:, :upto] >= eps, axis=1)


@dataclass(frozen=True, eq=False)
class DensitySeries:
    eps: float
    values: np.ndarray
    counts: np.ndarray
    upper: np.ndarray
    method: str
    max_deviation: np.ndarray

    @property
    def horizon(self) -> int:
        return self.values.shape[1]

    @property
    def n_probes(self) -> int:
        return self.values.shape[0]


def c_lambda_stat_density(
    trace: DistanceTrace, lam: IndexMethod, eps: float, n_max: Optional[int] = None
) -> DensitySeries:
    """(1/lambda(n)) * #{k <= lambda(n) : |d(x, A_k) - d(x, A)| >= eps}."""
    eps = _check_eps(eps)
    N = trace.horizon
    if n_max is None:
        n_max = lam.n_horizon(N)
        if n_max == 0:
            raise HorizonExceeded(f"lambda(1) exceeds the trace horizon {N}")
    upper = lam.array(n_max)[1:]
    if upper[-1] > N:
        raise HorizonExceeded(f"lambda({n_max}) = {upper[-1]} exceeds the trace horizon {N}")
    dev = trace.deviations()
    hits = np.cumsum(dev >= eps, axis=1, dtype=np.int64)
    counts = hits[:, upper - 1]
    values = counts / upper
    max_dev = np.max(dev[:, : upper[-1]], axis=1)
    return DensitySeries(eps, values, counts, upper, lam.label, max_dev)


def statistical_density(trace: DistanceTrace, eps: float) -> DensitySeries:
    """The lambda(n) = n case: plain statistical density up to every n."""
    return c_lambda_stat_density(trace, IndexMethod.identity(), eps)


@dataclass(frozen=True)
class InequalityReport:
    """Pointwise check lhs(n) <= rhs(n) + tol for every probe and n."""

    name: str
    slack: np.ndarray
    tol: float

    @property
    def holds(self) -> np.ndarray:
        return self.slack >= -self.tol

    @property
    def ok(self) -> bool:
        return bool(np.all(self.holds))

    @property
    def min_slack(self) -> float:
        return float(np.min(self.slack))

    @property
    def first_violation(self) -> Optional[tuple[int, int]]:
        """(probe index, n) of the first failing entry, or None."""
        bad = np.argwhere(~self.holds)
        if bad.size == 0:
            return None
        order = np.lexsort((bad[:, 0], bad[:, 1]))
        p, j = bad[order[0]]
        return int(p), int(j) + 1

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "ok": self.ok,
            "min_slack": self.min_slack,
            "tol": self.tol,
            "first_violation": self.first_violation,
        }


def _match(strong: MeanSeries, density: DensitySeries, p: float) -> None:
    if strong.kind not in ("StrongClambda", "StrongC1"):
        raise WijsumError(f"expected a strong C_lambda series, got {strong.kind}")
    if strong.power is None or not np.isclose(strong.power, p, rtol=0, atol=0):
        raise WijsumError(f"strong series has power {strong.power}, check uses p = {p}")
    if strong.values.shape != density.values.shape or not np.array_equal(
        strong.upper, density.upper
    ):
        raise WijsumError("strong series and density series come from different methods")


def chebyshev_check(
    strong: MeanSeries, density: DensitySeries, eps: float, p: float
) -> InequalityReport:
    """eps**p * density(n) <= strong(n): the counting bound behind p-strong => statistical."""
    eps = _check_eps(eps)
    _match(strong, density, p)
    if not np.isclose(density.eps, eps, rtol=0, atol=0):
        raise WijsumError("density series was built with a different eps")
    slack = strong.values - eps**p * density.values
    return InequalityReport("chebyshev", slack, INEQ_TOL)


def bounded_split_check(
    strong: MeanSeries, density: DensitySeries, eps: float, p: float, alpha
) -> InequalityReport:
    """strong(n) <= alpha**p * density(n) + eps**p for deviations bounded by alpha."""
    eps = _check_eps(eps)
    _match(strong, density, p)
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), (density.n_probes,))
    if np.any(alpha < density.max_deviation):
        raise WijsumError(
            f"alpha {alpha.tolist()} is below the observed deviation "
            f"{density.max_deviation.tolist()}"
        )
    rhs = alpha[:, None] ** p * density.values + eps**p
    return InequalityReport("bounded_split", rhs - strong.values, INEQ_TOL)
