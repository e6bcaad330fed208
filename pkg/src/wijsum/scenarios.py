"""Named, reproducible set-sequence scenarios with expected verdicts.

Every builtin carries a vectorized ``batch`` evaluator so horizons of 2**20
stay cheap; the batch reproduces the per-k generator (see the tests).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import WijsumError
from .ideals import (
    Ideal,
    IdealVerdict,
    ImplicationReport,
    Mode,
    Status,
    ideal_verdict,
    implication_suite,
)
from .index_methods import (
    IndexMethod,
    Quantity,
    lambda_from_expr,
    ratio_condition,
)
from .metric_sets import (
    Ball,
    BoundedReport,
    ClosedSet,
    DistanceTrace,
    FinitePointSet,
    Hyperplane,
    SetSequence,
    Singleton,
    Sphere,
    bounded_estimate,
    trace,
)
from .statistical import (
    DensitySeries,
    InequalityReport,
    bounded_split_check,
    c_lambda_stat_density,
    chebyshev_check,
    statistical_density,
)
from .transforms import MeanSeries, c1, c_lambda, d_lambda, strong_mean

__all__ = [
    "Expectation",
    "Scenario",
    "ScenarioReport",
    "CATALOG",
    "builtin",
    "run",
    "run_all",
    "SweepEntry",
    "implication_sweep",
    "SWEEP_METHODS",
]

IDEALS = (Ideal.fin(), Ideal.density_zero())


@dataclass(frozen=True)
class Expectation:
    """Expected status of one mode under one ideal; ``probe=None`` means every probe."""

    mode: Mode
    ideal: str
    status: Status
    probe: Optional[int] = None
    tag: str = "DERIVED"

    def as_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "ideal": self.ideal,
            "status": self.status.value,
            "probe": self.probe,
            "tag": self.tag,
        }


@dataclass(frozen=True)
class Scenario:
    name: str
    seq: SetSequence
    target: Optional[ClosedSet]
    probes: np.ndarray
    lam: IndexMethod
    mu: Optional[IndexMethod] = None
    eps: float = 0.5
    delta: float = 0.1
    p: float = 2.0
    horizon: int = 10_000
    condition_horizon: int = 1000
    expected: tuple = ()
    description: str = ""

    def with_method(self, lam: IndexMethod, horizon: Optional[int] = None) -> "Scenario":
        """Same sequence under another index method; drops expectations tied to lambda."""
        return replace(
            self, lam=lam, horizon=horizon or self.horizon, expected=(), mu=None
        )

    def config(self) -> dict:
        return {
            "name": self.name,
            "sequence": self.seq.label,
            "target": None if self.target is None else repr(self.target),
            "probes": np.asarray(self.probes).tolist(),
            "lambda": self.lam.label,
            "mu": None if self.mu is None else self.mu.label,
            "eps": self.eps,
            "delta": self.delta,
            "p": self.p,
            "horizon": self.horizon,
            "condition_horizon": self.condition_horizon,
        }


def _norms(P: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # |x_p - c_k| for probes (P, d) and centers (K, d) -> (P, K)
    return np.sqrt(((P[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2))


def _is_square(ks: np.ndarray) -> np.ndarray:
    r = np.floor(np.sqrt(ks.astype(float))).astype(np.int64)
    r += (r + 1) ** 2 <= ks
    r -= r**2 > ks
    return r * r == ks


def _is_square_int(k: int) -> bool:
    from math import isqrt

    return isqrt(k) ** 2 == k


def _all(mode_status: dict, ideals=("Fin", "DensityZero"), probe=None, tag="DERIVED"):
    return tuple(
        Expectation(m, i, s, probe, tag)
        for m, s in mode_status.items()
        for i in ideals
    )


def _every(status: Status) -> dict:
    return {m: status for m in Mode}


# constant: A_k = A = Ball((1, 1), 0.5)
_BALL = Ball((1.0, 1.0), 0.5)


def _constant_batch(P, ks):
    return np.repeat(_BALL.distances(P)[:, None], ks.size, axis=1)


def _constant() -> Scenario:
    seq = SetSequence("A_k = Ball((1,1), 0.5)", lambda k: _BALL, True, _constant_batch)
    return Scenario(
        "constant", seq, _BALL, np.array([[3.0, 4.0], [0.0, 0.0], [1.0, 1.0]]),
        lambda_from_expr("n^2"), eps=0.5, delta=0.1, p=2.0, horizon=10_000,
        expected=_all(_every(Status.CONSISTENT), tag="TRIVIAL"),
        description="every A_k equals the target, so every exceptional set is empty",
    )


# alternating-pair: (1,0) at even k, (-1,0) at odd k
def _alt_set(k: int) -> ClosedSet:
    return Singleton((1.0, 0.0) if k % 2 == 0 else (-1.0, 0.0))


def _alt_batch(P, ks):
    centers = np.zeros((ks.size, 2))
    centers[:, 0] = np.where(ks % 2 == 0, 1.0, -1.0)
    return _norms(P, centers)


def _alternating() -> Scenario:
    seq = SetSequence("(1,0) at even k, (-1,0) at odd k", _alt_set, True, _alt_batch)
    target = FinitePointSet(((1.0, 0.0), (-1.0, 0.0)))
    expected = _all(_every(Status.VIOLATED), probe=0) + _all(
        _every(Status.CONSISTENT), probe=1
    )
    return Scenario(
        "alternating-pair", seq, target, np.array([[1.0, 0.0], [0.0, 0.0]]),
        lambda_from_expr("2n"), eps=0.5, delta=0.1, p=2.0, horizon=1000,
        expected=expected,
        description="at (1,0) the distances run 2,0,2,0,... around a target distance 0; "
        "at the origin every distance is 1",
    )


# sparse-spike: Singleton((k,0)) at perfect squares, origin elsewhere
def _spike_set(k: int) -> ClosedSet:
    return Singleton((float(k), 0.0) if _is_square_int(k) else (0.0, 0.0))


def _spike_batch(P, ks):
    centers = np.zeros((ks.size, 2))
    centers[:, 0] = np.where(_is_square(ks), ks.astype(float), 0.0)
    return _norms(P, centers)


def _sparse_spike() -> Scenario:
    seq = SetSequence("Singleton((k,0)) at squares, origin elsewhere", _spike_set, False,
                      _spike_batch)
    violated = {m: Status.VIOLATED for m in Mode if m is not Mode.ICLAMBDA_STAT}
    expected = (
        (
            Expectation(Mode.ICONV, "DensityZero", Status.CONSISTENT),
            Expectation(Mode.ICONV, "Fin", Status.VIOLATED),
        )
        + _all({m: s for m, s in violated.items() if m is not Mode.ICONV})
        + _all({Mode.ICLAMBDA_STAT: Status.CONSISTENT})
    )
    return Scenario(
        "sparse-spike", seq, Singleton((0.0, 0.0)), np.array([[0.0, 0.0]]),
        lambda_from_expr("n^2"), eps=0.5, delta=0.1, p=2.0, horizon=10_000,
        expected=expected,
        description="deviation k at the perfect squares, 0 elsewhere: statistically "
        "convergent but unbounded",
    )


# circle-to-axis: Sphere((k,0), k) flattens onto the line x1 = 0
def _circle_set(k: int) -> ClosedSet:
    return Sphere((float(k), 0.0), float(k))


def _circle_batch(P, ks):
    k = ks.astype(float)[None, :]
    x, y = P[:, :1], P[:, 1:2]
    r = np.sqrt((x - k) ** 2 + y**2)
    # |r - k| without cancellation: (r^2 - k^2) / (r + k)
    return np.abs((x * x - 2.0 * k * x + y * y) / (r + k))


def _circle() -> Scenario:
    seq = SetSequence("Sphere((k,0), k)", _circle_set, True, _circle_batch)
    return Scenario(
        "circle-to-axis", seq, Hyperplane((1.0, 0.0), 0.0),
        np.array([[2.0, 1.0], [0.0, 3.0], [-1.0, 2.0]]),
        lambda_from_expr("n^2"), eps=0.25, delta=0.1, p=2.0, horizon=10_000,
        expected=_all(_every(Status.CONSISTENT)),
        description="circles through the origin with growing radius; the deviation "
        "decays like b^2 / (2k)",
    )


# square/cube index pair: pulsing ball around Ball(origin, 1), lambda = n^2, mu = n^3
def _pulse_radius(k):
    return 1.0 + 0.5 * np.where(np.asarray(k) % 2 == 0, 1.0, -1.0)


def _pulse_set(k: int) -> ClosedSet:
    return Ball((0.0, 0.0), float(_pulse_radius(k)))


def _pulse_batch(P, ks):
    norm = np.sqrt((P**2).sum(axis=1))[:, None]
    return np.maximum(norm - _pulse_radius(ks)[None, :], 0.0)


def _square_cube_pair() -> Scenario:
    seq = SetSequence("Ball(origin, 1 + (-1)^k / 2)", _pulse_set, True, _pulse_batch)
    status = _every(Status.VIOLATED)
    status[Mode.ICLAMBDA_SUMMABLE] = Status.CONSISTENT
    return Scenario(
        "paper-lambda-pair", seq, Ball((0.0, 0.0), 1.0),
        np.array([[3.0, 0.0], [0.0, 2.0], [-2.0, -2.0]]),
        lambda_from_expr("n^2"), mu=lambda_from_expr("n^3"),
        eps=0.25, delta=0.1, p=2.0, horizon=10_000, condition_horizon=1000,
        expected=_all(status),
        description="radius alternates 0.5, 1.5: Cesaro-type means converge, the "
        "distances and their strong means do not",
    )


# bounded-spike: Singleton((1,0)) at squares, origin elsewhere; lambda = 2^n
def _bspike_set(k: int) -> ClosedSet:
    return Singleton((1.0, 0.0) if _is_square_int(k) else (0.0, 0.0))


def _bspike_batch(P, ks):
    centers = np.zeros((ks.size, 2))
    centers[:, 0] = _is_square(ks).astype(float)
    return _norms(P, centers)


def _bounded_spike() -> Scenario:
    seq = SetSequence("Singleton((1,0)) at squares, origin elsewhere", _bspike_set, True,
                      _bspike_batch)
    status = _every(Status.CONSISTENT)
    expected = (
        Expectation(Mode.ICONV, "Fin", Status.VIOLATED),
        Expectation(Mode.ICONV, "DensityZero", Status.CONSISTENT),
    ) + _all({m: s for m, s in status.items() if m is not Mode.ICONV})
    return Scenario(
        "bounded-spike", seq, Singleton((0.0, 0.0)), np.array([[0.0, 0.0]]),
        lambda_from_expr("2^n"), eps=0.6, delta=0.1, p=2.0, horizon=2**20,
        expected=expected,
        description="deviation 1 at the perfect squares: bounded, statistically "
        "convergent, not convergent",
    )


CATALOG = {
    "constant": _constant,
    "alternating-pair": _alternating,
    "sparse-spike": _sparse_spike,
    "circle-to-axis": _circle,
    "paper-lambda-pair": _square_cube_pair,
    "bounded-spike": _bounded_spike,
}


def builtin(name: str) -> Scenario:
    try:
        return CATALOG[name]()
    except KeyError:
        raise WijsumError(
            f"unknown scenario {name!r}; choose from {', '.join(sorted(CATALOG))}"
        ) from None


@dataclass(frozen=True, eq=False)
class ScenarioReport:
    scenario: Scenario
    trace: DistanceTrace
    series: dict
    densities: dict
    bounded: dict
    conditions: tuple
    verdicts: tuple
    inequalities: tuple
    implications: tuple
    diffs: tuple
    facts: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.diffs

    @property
    def candidates(self) -> list:
        return [c for rep in self.implications for c in rep.candidates]

    def verdict(self, mode: Mode | str, ideal: str) -> IdealVerdict:
        mode = Mode(mode)
        for v in self.verdicts:
            if v.mode is mode and v.ideal.name == ideal:
                return v
        raise KeyError((mode, ideal))

    def as_dict(self) -> dict:
        return {
            "config": self.scenario.config(),
            "facts": self.facts,
            "bounded": {k: v.as_dict() for k, v in self.bounded.items()},
            "conditions": [c.as_dict() for c in self.conditions],
            "verdicts": [v.as_dict() for v in self.verdicts],
            "inequalities": [r.as_dict() for r in self.inequalities],
            "implications": [r.as_dict() for r in self.implications],
            "expected": [e.as_dict() for e in self.scenario.expected],
            "diffs": list(self.diffs),
        }


def _conditions(sc: Scenario) -> tuple:
    Nc = sc.condition_horizon
    out = [
        ratio_condition(sc.lam, Quantity.LIMSUP_NEXT, Nc),
        ratio_condition(sc.lam, Quantity.LIMINF_PREV, Nc),
        ratio_condition(sc.lam, Quantity.LIMSUP_PREV, Nc),
        ratio_condition(sc.lam, Quantity.LIM_N_OVER, Nc),
    ]
    if sc.mu is not None:
        out.append(ratio_condition(sc.mu, Quantity.LIMSUP_NEXT, Nc))
        out.append(ratio_condition(sc.lam, Quantity.LIM_COMPANION, Nc, sc.mu))
    return tuple(out)


def _diff(expected: Sequence[Expectation], verdicts: Sequence[IdealVerdict]) -> tuple:
    table = {(v.mode, v.ideal.name): v for v in verdicts}
    diffs = []
    for e in expected:
        v = table[(e.mode, e.ideal)]
        probes = range(len(v.statuses)) if e.probe is None else [e.probe]
        for p in probes:
            got = v.statuses[p]
            if got is not e.status:
                diffs.append(
                    f"{e.mode.value}/{e.ideal} probe {p}: expected {e.status.value}, "
                    f"got {got.value}"
                )
    return tuple(diffs)


def run(sc: Scenario, ideals: Sequence[Ideal] = IDEALS, implications: bool = True) -> ScenarioReport:
    """Materialize the trace, every series, the verdicts and the implication suite."""
    tr = trace(sc.seq, sc.probes, sc.horizon, sc.target)
    series: dict[str, MeanSeries] = {
        "C1": c1(tr),
        "Clambda": c_lambda(tr, sc.lam),
        "Dlambda": d_lambda(tr, sc.lam),
        "StrongClambda": strong_mean(tr, "Clambda", sc.lam, 1.0),
        "StrongDlambda": strong_mean(tr, "Dlambda", sc.lam, 1.0),
        "StrongC1": strong_mean(tr, "C1", None, 1.0),
        "PStrongClambda": strong_mean(tr, "Clambda", sc.lam, sc.p),
    }
    densities: dict[str, DensitySeries] = {
        "stat": statistical_density(tr, sc.eps),
        "Clambda_stat": c_lambda_stat_density(tr, sc.lam, sc.eps),
    }
    bounded: dict[str, BoundedReport] = {
        "trace": bounded_estimate(tr),
        "deviation": bounded_estimate(tr.deviations()),
        "C1": bounded_estimate(series["C1"]),
    }
    alpha = bounded["deviation"].sup
    dens = densities["Clambda_stat"]
    inequalities: tuple[InequalityReport, ...] = (
        chebyshev_check(series["PStrongClambda"], dens, sc.eps, sc.p),
        bounded_split_check(series["PStrongClambda"], dens, sc.eps, sc.p, alpha),
    )
    verdicts = tuple(
        ideal_verdict(m, tr, sc.lam, I, sc.eps, sc.delta, sc.p)
        for I in ideals
        for m in Mode
    )
    reports: tuple[ImplicationReport, ...] = ()
    if implications:
        reports = tuple(
            implication_suite(tr, sc.lam, I, sc.eps, sc.p, sc.delta) for I in ideals
        )
    facts = {
        "stat_density_at_N": densities["stat"].values[:, -1].tolist(),
        "exceed_count_at_N": densities["stat"].counts[:, -1].tolist(),
        "max_deviation": alpha.tolist(),
        "tail_deviation": np.max(tr.deviations()[:, sc.horizon // 2:], axis=1).tolist(),
    }
    return ScenarioReport(
        sc, tr, series, densities, bounded, _conditions(sc), verdicts, inequalities,
        reports, _diff(sc.expected, verdicts), facts,
    )


def run_all(names: Optional[Sequence[str]] = None) -> list[ScenarioReport]:
    """Run builtins in name order."""
    return [run(builtin(n)) for n in sorted(names or CATALOG)]


# lambda overrides for the implication sweep and their trace horizons
SWEEP_METHODS = (("2^n", 2**20), ("n^2", 10_000))


@dataclass(frozen=True)
class SweepEntry:
    scenario: str
    lam: str
    report: ImplicationReport

    def as_dict(self) -> dict:
        return {"scenario": self.scenario, "lambda": self.lam, **self.report.as_dict()}


def implication_sweep(
    names: Optional[Sequence[str]] = None,
    methods=SWEEP_METHODS,
    ideals: Sequence[Ideal] = IDEALS,
) -> list[SweepEntry]:
    """Run the implication suite on every builtin under every listed method."""
    out = []
    for name in sorted(names or CATALOG):
        base = builtin(name)
        for expr, N in methods:
            sc = base.with_method(lambda_from_expr(expr), max(N, base.horizon))
            tr = trace(sc.seq, sc.probes, sc.horizon, sc.target)
            for I in ideals:
                rep = implication_suite(tr, sc.lam, I, sc.eps, sc.p, sc.delta)
                out.append(SweepEntry(name, expr, rep))
    return out
