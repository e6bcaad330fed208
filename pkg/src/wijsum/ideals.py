"""Computable ideals on the naturals and finite-horizon I-convergence verdicts.

Two ideals are supported: ``Fin`` (finite sets) and ``DensityZero`` (sets of
natural density zero).  Membership of a materialized index set is only ever
*estimated*; every verdict reads "consistent with" at the stated horizon.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import HorizonTooSmall, MissingParameter, WijsumError
from .index_methods import Hint, IndexMethod, Quantity, ratio_condition
from .metric_sets import DistanceTrace, bounded_estimate
from .statistical import c_lambda_stat_density
from .transforms import c_lambda, strong_mean

__all__ = [
    "IdealKind",
    "Ideal",
    "Membership",
    "MembershipEstimate",
    "member_estimate",
    "filter_estimate",
    "Mode",
    "Status",
    "ExceptionalSet",
    "exceptional_set",
    "IdealVerdict",
    "ideal_verdict",
    "i_statistical_verdict",
    "ContainmentReport",
    "step_margin",
    "strong_cd_containment",
    "deviation_bound",
    "Outcome",
    "chebyshev_containment",
    "bounded_converse_containment",
    "ImplicationResult",
    "ImplicationReport",
    "implication_suite",
    "MIN_ENTRIES",
]

# Smallest exceptional-set length a verdict is computed on.
MIN_ENTRIES = 20


class IdealKind(str, Enum):
    FIN = "Fin"
    DENSITY_ZERO = "DensityZero"


@dataclass(frozen=True)
class Ideal:
    kind: IdealKind = IdealKind.DENSITY_ZERO
    density_threshold: float = 0.05
    tail_window: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "kind", IdealKind(self.kind))
        if not 0 < self.density_threshold < 1:
            raise WijsumError("density_threshold must lie in (0, 1)")
        if not 0 < self.tail_window < 1:
            raise WijsumError("tail_window must lie in (0, 1)")

    @classmethod
    def fin(cls, tail_window: float = 0.5) -> "Ideal":
        return cls(IdealKind.FIN, tail_window=tail_window)

    @classmethod
    def density_zero(cls, threshold: float = 0.05) -> "Ideal":
        return cls(IdealKind.DENSITY_ZERO, density_threshold=threshold)

    @property
    def name(self) -> str:
        return self.kind.value

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "density_threshold": self.density_threshold,
            "tail_window": self.tail_window,
        }


class Membership(str, Enum):
    IN = "InIdealConsistent"
    OUT = "NotInIdealConsistent"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class MembershipEstimate:
    """Witness of a membership estimate.

    ``density_full`` / ``density_half`` are the prefix densities
    |S & [1..m]| / m at m = N and m = N // 2.  ``window_density`` holds the
    densities over the two nested tail windows the DensityZero status is read
    from, ``tail_members`` the member count of the outer tail window.
    """

    status: Membership
    density_full: float
    density_half: float
    window_density: tuple
    tail_members: int
    size: int
    growing: bool

    def as_dict(self) -> dict:
        return {
            "status": self.status.value,
            "density_full": self.density_full,
            "density_half": self.density_half,
            "window_density": list(self.window_density),
            "tail_members": self.tail_members,
            "size": self.size,
            "growing": self.growing,
        }


def _indicator(S) -> np.ndarray:
    S = np.asarray(S, dtype=bool).ravel()
    if S.size < MIN_ENTRIES:
        raise HorizonTooSmall(f"membership needs N >= {MIN_ENTRIES}, got {S.size}")
    return S


def _windows(I: Ideal, N: int) -> tuple[int, int]:
    # Outer tail window (a, N] and inner window (b, N], b halfway from a to N.
    a = int(np.floor(N * (1.0 - I.tail_window)))
    b = a + (N - a) // 2
    return a, b


def _counts(I: Ideal, S: np.ndarray):
    N = S.size
    a, b = _windows(I, N)
    outer, inner = int(S[a:].sum()), int(S[b:].sum())
    return (outer, N - a), (inner, N - b)


def _classify(flags) -> Membership:
    if all(flags):
        return Membership.IN
    if not any(flags):
        return Membership.OUT
    return Membership.INCONCLUSIVE


def _estimate(I: Ideal, S: np.ndarray, status: Membership) -> MembershipEstimate:
    N = S.size
    half = N // 2
    (co, wo), (ci, wi) = _counts(I, S)
    dens = (co / wo, ci / wi)
    return MembershipEstimate(
        status, int(S.sum()) / N, int(S[:half].sum()) / half, dens, co, N,
        dens[1] > dens[0],
    )


def member_estimate(I: Ideal, S) -> MembershipEstimate:
    """Estimate whether the index set with indicator ``S`` (over 1..N) lies in I.

    Fin: in iff S has no member in the tail window (N(1 - tail_window), N].
    DensityZero: the density of S is taken over that tail window and over
    its second half; in iff both are below the threshold, out iff both are
    at or above it, inconclusive otherwise.  Reading densities on tail
    windows keeps every set that is in Fin also in DensityZero.
    """
    S = _indicator(S)
    (co, wo), (ci, wi) = _counts(I, S)
    if I.kind is IdealKind.FIN:
        status = Membership.IN if co == 0 else Membership.OUT
    else:
        thr = Fraction(I.density_threshold)
        status = _classify((co < thr * wo, ci < thr * wi))
    return _estimate(I, S, status)


def filter_estimate(I: Ideal, M) -> MembershipEstimate:
    """Estimate whether ``M`` lies in the dual filter {N minus A : A in I}.

    Works on M directly: Fin needs M to cover the whole tail window;
    DensityZero needs the density of M above 1 - threshold on both tail
    windows.  ``status`` IN means "in the filter".
    """
    M = _indicator(M)
    (co, wo), (ci, wi) = _counts(I, M)
    if I.kind is IdealKind.FIN:
        status = Membership.IN if co == wo else Membership.OUT
    else:
        top = 1 - Fraction(I.density_threshold)
        status = _classify((co > top * wo, ci > top * wi))
    return _estimate(I, M, status)


class Mode(str, Enum):
    ICONV = "IConv"
    ICLAMBDA_SUMMABLE = "IClambdaSummable"
    STRONG_ICLAMBDA = "StrongIClambda"
    STRONG_IDLAMBDA = "StrongIDlambda"
    STRONG_IC1 = "StrongIC1"
    ICLAMBDA_STAT = "IClambdaStat"
    PSTRONG_ICLAMBDA = "PStrongIClambda"


class Status(str, Enum):
    CONSISTENT = "Consistent"
    VIOLATED = "Violated"
    INCONCLUSIVE = "Inconclusive"


_STATUS = {
    Membership.IN: Status.CONSISTENT,
    Membership.OUT: Status.VIOLATED,
    Membership.INCONCLUSIVE: Status.INCONCLUSIVE,
}


@dataclass(frozen=True, eq=False)
class ExceptionalSet:
    """Indicator of the indices where a mode's quantity reaches its level.

    ``mask[p, j]`` refers to index j + 1 (k for IConv, n otherwise);
    ``series[p, j]`` is the quantity compared against ``level[p]``.
    """

    mode: Mode
    mask: np.ndarray
    series: np.ndarray
    level: np.ndarray

    @property
    def size(self) -> int:
        return self.mask.shape[1]


def _level(value, P: int) -> np.ndarray:
    return np.broadcast_to(np.asarray(value, dtype=float), (P,)).copy()


def _quantity(mode: Mode, trace: DistanceTrace, lam, eps, p, cache: Optional[dict]):
    key = (mode, float(eps) if mode is Mode.ICLAMBDA_STAT else None, p)
    if cache is not None and key in cache:
        return cache[key]
    if mode is Mode.ICONV:
        q = trace.deviations()
    elif mode is Mode.ICLAMBDA_SUMMABLE:
        q = np.abs(c_lambda(trace, lam).values - _target(trace)[:, None])
    elif mode is Mode.STRONG_ICLAMBDA:
        q = strong_mean(trace, "Clambda", lam, 1.0).values
    elif mode is Mode.STRONG_IDLAMBDA:
        q = strong_mean(trace, "Dlambda", lam, 1.0).values
    elif mode is Mode.STRONG_IC1:
        q = strong_mean(trace, "C1", None, 1.0).values
    elif mode is Mode.ICLAMBDA_STAT:
        q = c_lambda_stat_density(trace, lam, float(eps)).values
    else:
        q = strong_mean(trace, "Clambda", lam, p).values
    if cache is not None:
        cache[key] = q
    return q


def exceptional_set(
    mode: Mode | str,
    trace: DistanceTrace,
    lam: Optional[IndexMethod],
    eps,
    delta=None,
    p: Optional[float] = None,
    _cache: Optional[dict] = None,
) -> ExceptionalSet:
    """Build the mode's exceptional index set from materialized series.

    ``eps`` is the level the mode's quantity is compared with (per probe
    arrays allowed); IClambdaStat additionally compares its density with
    ``delta``.  PStrongIClambda needs p; the other strong modes use p = 1.
    """
    mode = Mode(mode)
    P = trace.n_probes
    if mode not in (Mode.ICONV, Mode.STRONG_IC1) and lam is None:
        raise MissingParameter(f"{mode.value} needs an index method")
    if mode is Mode.ICLAMBDA_STAT and delta is None:
        raise MissingParameter("IClambdaStat needs delta")
    if mode is Mode.PSTRONG_ICLAMBDA and p is None:
        raise MissingParameter("PStrongIClambda needs p")
    q = _quantity(mode, trace, lam, eps, None if mode is not Mode.PSTRONG_ICLAMBDA else float(p),
                  _cache)
    lvl = _level(delta if mode is Mode.ICLAMBDA_STAT else eps, P)
    return ExceptionalSet(mode, q >= lvl[:, None], q, lvl)


def _target(trace: DistanceTrace) -> np.ndarray:
    trace.deviations()  # raises MissingTarget when absent
    return trace.target_row


@dataclass(frozen=True)
class IdealVerdict:
    mode: Mode
    ideal: Ideal
    statuses: tuple
    estimates: tuple
    params: dict
    entries: int

    @property
    def consistent(self) -> bool:
        return all(s is Status.CONSISTENT for s in self.statuses)

    def as_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "ideal": self.ideal.as_dict(),
            "entries": self.entries,
            "params": dict(self.params),
            "statuses": [s.value for s in self.statuses],
            "witness": [e.as_dict() for e in self.estimates],
        }


def ideal_verdict(
    mode: Mode | str,
    trace: DistanceTrace,
    lam: Optional[IndexMethod],
    I: Ideal,
    eps: float,
    delta: Optional[float] = None,
    p: Optional[float] = None,
    min_entries: int = MIN_ENTRIES,
) -> IdealVerdict:
    """Per-probe verdict on whether the mode's exceptional set lies in I."""
    ex = exceptional_set(mode, trace, lam, eps, delta, p)
    return _verdict_from(ex, I, min_entries, lam, eps, delta, p)


def _verdict_from(ex, I, min_entries, lam, eps, delta, p) -> IdealVerdict:
    if ex.size < min_entries:
        raise HorizonTooSmall(
            f"{ex.mode.value}: only {ex.size} entries, need {min_entries}; raise the horizon"
        )
    estimates = tuple(member_estimate(I, row) for row in ex.mask)
    statuses = tuple(_STATUS[e.status] for e in estimates)
    params = {
        "eps": _scalar(eps),
        "delta": delta,
        "p": p,
        "lambda": None if lam is None else lam.label,
        "level": ex.level.tolist(),
    }
    return IdealVerdict(ex.mode, I, statuses, estimates, params, ex.size)


def _scalar(v):
    a = np.asarray(v, dtype=float)
    return float(a) if a.ndim == 0 else a.tolist()


def i_statistical_verdict(
    trace: DistanceTrace, I: Ideal, eps: float, delta: float, min_entries: int = MIN_ENTRIES
) -> IdealVerdict:
    """Wijsman I-statistical convergence: the IClambdaStat mode with lambda(n) = n."""
    return ideal_verdict(
        Mode.ICLAMBDA_STAT, trace, IndexMethod.identity(), I, eps, delta, None, min_entries
    )


@dataclass(frozen=True)
class ContainmentReport:
    """Exact inclusion subset <= superset of two exceptional sets, per probe."""

    name: str
    holds: tuple
    extra: tuple
    subset_sizes: tuple
    superset_sizes: tuple
    levels: dict
    note: str = ""

    @property
    def ok(self) -> bool:
        return all(self.holds)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "ok": self.ok,
            "holds": list(self.holds),
            "extra": list(self.extra),
            "subset_sizes": list(self.subset_sizes),
            "superset_sizes": list(self.superset_sizes),
            "levels": self.levels,
            "note": self.note,
        }


def _containment(name, sub: np.ndarray, sup: np.ndarray, levels, note="") -> ContainmentReport:
    extra = np.count_nonzero(sub & ~sup, axis=1)
    return ContainmentReport(
        name,
        tuple(bool(e == 0) for e in extra),
        tuple(int(e) for e in extra),
        tuple(int(c) for c in sub.sum(axis=1)),
        tuple(int(c) for c in sup.sum(axis=1)),
        levels,
        note,
    )


def chebyshev_containment(
    trace: DistanceTrace, lam: IndexMethod, eps: float, delta: float, p: float,
    _cache: Optional[dict] = None,
) -> ContainmentReport:
    """{n : density_eps(n) >= delta} inside {n : strong_p(n) >= eps**p * delta}."""
    stat = exceptional_set(Mode.ICLAMBDA_STAT, trace, lam, eps, delta, _cache=_cache)
    strong = exceptional_set(
        Mode.PSTRONG_ICLAMBDA, trace, lam, eps**p * delta, p=p, _cache=_cache
    )
    return _containment(
        "chebyshev", stat.mask, strong.mask,
        {"stat": [eps, delta], "pstrong": eps**p * delta, "p": p},
    )


def deviation_bound(trace: DistanceTrace) -> np.ndarray:
    """Per-probe sup of |d(x, A_k) - d(x, A)| over the materialized horizon."""
    return bounded_estimate(trace.deviations()).sup


def bounded_converse_containment(
    trace: DistanceTrace,
    lam: IndexMethod,
    eps: float,
    delta: float,
    p: float,
    alpha=None,
    threshold: str = "printed",
    _cache: Optional[dict] = None,
) -> ContainmentReport:
    """{n : strong_p(n) >= delta} inside {n : density_eps(n) >= t}.

    ``threshold="printed"`` uses t = delta**p / alpha**p; ``"derived"`` uses
    t = (delta - eps**p) / alpha**p, the level that follows from
    strong_p(n) <= alpha**p * density(n) + eps**p.  Only the derived level
    is implied by that bound in general; the printed one is kept so its
    failures can be reported.
    """
    if alpha is None:
        alpha = deviation_bound(trace)
    alpha = _level(alpha, trace.n_probes)
    with np.errstate(divide="ignore"):
        printed = delta**p / alpha**p
        derived = (delta - eps**p) / alpha**p
    if threshold == "printed":
        t = printed
        note = "level delta^p / alpha^p"
    elif threshold == "derived":
        t = derived
        note = "level (delta - eps^p) / alpha^p"
    else:
        raise WijsumError(f"unknown threshold {threshold!r}")
    strong = exceptional_set(Mode.PSTRONG_ICLAMBDA, trace, lam, delta, p=p, _cache=_cache)
    dens = _quantity(Mode.ICLAMBDA_STAT, trace, lam, eps, None, _cache)
    stat_mask = dens >= t[:, None]
    return _containment(
        f"bounded_converse[{threshold}]", strong.mask, stat_mask,
        {"pstrong": delta, "stat": [eps, t.tolist()], "alpha": alpha.tolist(), "p": p},
        note,
    )


def step_margin(lam: IndexMethod, n_max: int) -> float:
    """min over 2 <= n <= n_max of lambda(n)/lambda(n-1), minus one."""
    vals = lam.values(n_max)
    return min(vals[i] / vals[i - 1] for i in range(1, n_max)) - 1.0


def strong_cd_containment(
    trace: DistanceTrace, lam: IndexMethod, eps: float, _cache: Optional[dict] = None
) -> ContainmentReport:
    """{n : strong D_lambda(n) >= (1 + b) / b * eps} inside {n : strong C_lambda(n) >= eps}.

    With b = min lambda(n)/lambda(n-1) - 1 > 0 over the horizon, each block
    mean is at most lambda(n) / (lambda(n) - lambda(n-1)) <= (1 + b) / b times
    the prefix mean, which gives the inclusion.
    """
    n_h = lam.n_horizon(trace.horizon)
    beta = step_margin(lam, n_h)
    if not beta > 0:
        raise WijsumError(f"{lam.label}: step ratios reach 1, no block bound")
    level = (1.0 + beta) / beta * eps
    d = exceptional_set(Mode.STRONG_IDLAMBDA, trace, lam, level, _cache=_cache)
    c = exceptional_set(Mode.STRONG_ICLAMBDA, trace, lam, eps, _cache=_cache)
    return _containment(
        "strong_cd", d.mask, c.mask, {"Dlambda": level, "Clambda": eps, "beta": beta}
    )


class Outcome(str, Enum):
    PASS = "PASS"
    VACUOUS = "PASS-vacuous"
    CANDIDATE = "counterexample-candidate"
    NOT_APPLICABLE = "not-applicable"


@dataclass(frozen=True)
class ImplicationResult:
    theorem: str
    hypothesis: str
    antecedent: IdealVerdict
    consequent: IdealVerdict
    outcomes: tuple

    @property
    def ok(self) -> bool:
        return all(o is not Outcome.CANDIDATE for o in self.outcomes)

    def as_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "hypothesis": self.hypothesis,
            "outcomes": [o.value for o in self.outcomes],
            "antecedent": self.antecedent.as_dict(),
            "consequent": self.consequent.as_dict(),
        }


@dataclass(frozen=True)
class ImplicationReport:
    lam: str
    ideal: Ideal
    conditions: tuple
    results: tuple
    containments: tuple
    params: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    @property
    def candidates(self) -> list[tuple[str, int]]:
        return [
            (r.theorem, i)
            for r in self.results
            for i, o in enumerate(r.outcomes)
            if o is Outcome.CANDIDATE
        ]

    def as_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "ideal": self.ideal.as_dict(),
            "params": dict(self.params),
            "ok": self.ok,
            "conditions": [c.as_dict() for c in self.conditions],
            "results": [r.as_dict() for r in self.results],
            "containments": [c.as_dict() for c in self.containments],
        }


def _outcomes(applicable: Sequence[bool], ante: IdealVerdict, cons: IdealVerdict) -> tuple:
    out = []
    for ok, a, c in zip(applicable, ante.statuses, cons.statuses):
        if not ok:
            out.append(Outcome.NOT_APPLICABLE)
        elif a is not Status.CONSISTENT:
            out.append(Outcome.VACUOUS)
        elif c is Status.CONSISTENT:
            out.append(Outcome.PASS)
        else:
            out.append(Outcome.CANDIDATE)
    return tuple(out)


def implication_suite(
    trace: DistanceTrace,
    lam: IndexMethod,
    I: Ideal,
    eps: float,
    p: float = 2.0,
    delta: float = 0.1,
    eps2: Optional[float] = None,
    min_entries: int = MIN_ENTRIES,
) -> ImplicationReport:
    """Check the strong / statistical implications on one trace.

    For each implication whose hypothesis the finite data supports, a probe
    where the antecedent verdict is Consistent but the consequent is not is
    reported as a counterexample candidate.  Levels:

    * strong C_lambda => strong D_lambda (liminf lambda(n)/lambda(n-1) > 1):
      antecedent at eps, consequent at ((1 + b) eps - eps2) / b with
      b = min lambda(n)/lambda(n-1) - 1 and eps2 defaulting to eps;
    * strong D_lambda => strong C_lambda: both at eps;
    * strong D_lambda => strong C1 (limsup lambda(n)/lambda(n-1) < inf):
      consequent at eps times the limsup estimate;
    * p-strong => statistical: antecedent at eps**p * delta, consequent (eps, delta);
    * statistical => p-strong (bounded deviations): consequent at
      alpha**p * delta + eps**p.
    """
    n_h = lam.n_horizon(trace.horizon)
    if n_h < 4:
        raise HorizonTooSmall(f"{lam.label}: only {n_h} indices within the horizon")
    liminf = ratio_condition(lam, Quantity.LIMINF_PREV, n_h)
    limsup = ratio_condition(lam, Quantity.LIMSUP_PREV, n_h)
    beta = step_margin(lam, n_h)
    eps2 = eps if eps2 is None else eps2
    P = trace.n_probes
    every = [True] * P

    cache: dict = {}

    def verdict(mode, level, delta_=None, p_=None):
        ex = exceptional_set(mode, trace, lam, level, delta_, p_, cache)
        return _verdict_from(ex, I, min_entries, lam, level, delta_, p_)

    results = []
    strong_c = verdict(Mode.STRONG_ICLAMBDA, eps)
    strong_d = verdict(Mode.STRONG_IDLAMBDA, eps)

    if liminf.verdict_hint is Hint.SATISFIES and beta > 0:
        level = ((1 + beta) * eps - eps2) / beta
        if level <= 0:
            raise WijsumError("eps2 too large: the strong D_lambda level is not positive")
        cons = verdict(Mode.STRONG_IDLAMBDA, level)
        applicable = every
    else:
        cons = strong_d
        applicable = [False] * P
    results.append(
        ImplicationResult(
            "strong C_lambda => strong D_lambda",
            f"liminf lambda(n)/lambda(n-1) > 1: {liminf.verdict_hint.value}",
            strong_c, cons, _outcomes(applicable, strong_c, cons),
        )
    )

    results.append(
        ImplicationResult(
            "strong D_lambda => strong C_lambda", "none",
            strong_d, strong_c, _outcomes(every, strong_d, strong_c),
        )
    )

    c1 = verdict(Mode.STRONG_IC1, eps * limsup.estimate)
    applicable = every if limsup.verdict_hint is Hint.SATISFIES else [False] * P
    results.append(
        ImplicationResult(
            "strong D_lambda => strong C1",
            f"limsup lambda(n)/lambda(n-1) < inf: {limsup.verdict_hint.value}",
            strong_d, c1, _outcomes(applicable, strong_d, c1),
        )
    )

    stat = verdict(Mode.ICLAMBDA_STAT, eps, delta)
    pstrong = verdict(Mode.PSTRONG_ICLAMBDA, eps**p * delta, p_=p)
    results.append(
        ImplicationResult(
            "p-strong I-C_lambda => I-C_lambda statistical", "none",
            pstrong, stat, _outcomes(every, pstrong, stat),
        )
    )

    dev_report = bounded_estimate(trace.deviations())
    alpha = dev_report.sup
    bounded = [not f for f in dev_report.unbounded_suspect]
    pstrong_b = verdict(Mode.PSTRONG_ICLAMBDA, alpha**p * delta + eps**p, p_=p)
    results.append(
        ImplicationResult(
            "I-C_lambda statistical => p-strong I-C_lambda",
            "bounded deviations: " + ",".join("yes" if b else "no" for b in bounded),
            stat, pstrong_b, _outcomes(bounded, stat, pstrong_b),
        )
    )

    containments = (
        chebyshev_containment(trace, lam, eps, delta, p, cache),
        bounded_converse_containment(trace, lam, eps, delta, p, alpha, "derived", cache),
        bounded_converse_containment(trace, lam, eps, delta, p, alpha, "printed", cache),
    )
    if beta > 0:
        containments += (strong_cd_containment(trace, lam, eps, cache),)
    return ImplicationReport(
        lam.label, I, (liminf, limsup), tuple(results), containments,
        {"eps": eps, "eps2": eps2, "delta": delta, "p": p, "beta": beta, "n_horizon": n_h},
    )
