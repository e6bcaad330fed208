"""Index subsequences lambda(n), deferred pairs (p, q) and the T / R matrices.

An :class:`IndexMethod` is a strictly increasing sequence of positive
integers with the sentinel lambda(0) = 0.  Values are Python ints so that
fast-growing methods such as 2**n stay exact; ratios are formed by true
division of ints, which rounds correctly.
"""

from __future__ import annotations

import bisect
import functools
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import partial
from typing import Callable, Dict, Optional, Sequence, Union

import numpy as np

from .errors import (
    HorizonExceeded,
    MissingCompanion,
    NonMonotoneError,
    ParseError,
    WijsumError,
)
from .metric_sets import growth_suspect

__all__ = [
    "IndexMethod",
    "DeferredPair",
    "Quantity",
    "Hint",
    "ConditionReport",
    "ratio_condition",
    "t_matrix_row",
    "r_matrix_row",
    "r_abs_row_sum",
    "t_rows",
    "r_rows",
    "sparse_row",
    "RegularityReport",
    "regularity_report",
    "complement_method",
    "lambda_from_expr",
]

# Upper bound for materialized index values; keeps int64 arrays exact.
MAX_INDEX = 2**62

Row = Union[np.ndarray, Dict[int, float]]


@dataclass(frozen=True, eq=False)
class IndexMethod:
    """Strictly increasing positive integers lambda(1) < lambda(2) < ...

    Build one from a generator (``IndexMethod("n^2", lambda n: n * n)``) or
    from an explicit list with :meth:`from_list`.  List-backed methods are
    finite; asking for an index past the end raises
    :class:`~wijsum.errors.HorizonExceeded`.
    """

    label: str
    gen: Optional[Callable[[int], int]] = None
    table: Optional[tuple] = None
    _cache: list = field(default_factory=list, repr=False, compare=False)
    _arrays: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if (self.gen is None) == (self.table is None):
            raise WijsumError("give exactly one of gen or table")
        if self.table is not None:
            _check_monotone(self.table, self.label)
            self._cache.extend(self.table)
        else:
            # Probe a short prefix so obviously broken generators fail early.
            self.values(16)

    @classmethod
    def from_list(cls, values: Sequence[int], label: str = "list", allow_empty: bool = False):
        vals = tuple(int(v) for v in values)
        if not vals and not allow_empty:
            raise WijsumError("an index method needs at least one value")
        return cls(label, table=vals)

    @classmethod
    def identity(cls) -> "IndexMethod":
        """lambda(n) = n; one shared instance so its value cache is reused."""
        return _identity()

    @property
    def finite_length(self) -> Optional[int]:
        return None if self.table is None else len(self.table)

    @property
    def is_empty(self) -> bool:
        return self.table is not None and len(self.table) == 0

    def _extend(self, n_max: int) -> None:
        if self.table is not None:
            if n_max > len(self.table):
                raise HorizonExceeded(
                    f"{self.label} has only {len(self.table)} terms, asked for {n_max}"
                )
            return
        cache = self._cache
        while len(cache) < n_max:
            n = len(cache) + 1
            v = self.gen(n)
            if isinstance(v, float):
                if not v.is_integer():
                    raise WijsumError(f"{self.label}: lambda({n}) = {v} is not an integer")
                v = int(v)
            v = int(v)
            prev = cache[-1] if cache else 0
            if v <= prev:
                raise NonMonotoneError(
                    f"{self.label}: lambda({n}) = {v} <= lambda({n - 1}) = {prev}"
                )
            cache.append(v)

    def __call__(self, n: int) -> int:
        if n < 0:
            raise WijsumError("index methods are defined for n >= 0")
        if n == 0:
            return 0
        self._extend(n)
        return self._cache[n - 1]

    def values(self, n_max: int) -> list:
        """[lambda(1), ..., lambda(n_max)] as Python ints."""
        self._extend(n_max)
        return list(self._cache[:n_max])

    def array(self, n_max: int) -> np.ndarray:
        """lambda(0..n_max) as an int64 array, sentinel included."""
        hit = self._arrays.get(n_max)
        if hit is not None:
            return hit.copy()
        vals = self.values(n_max)
        if vals and vals[-1] > MAX_INDEX:
            raise HorizonExceeded(f"{self.label}: lambda({n_max}) exceeds {MAX_INDEX}")
        arr = np.array([0] + vals, dtype=np.int64)
        self._arrays.clear()
        self._arrays[n_max] = arr
        return arr.copy()

    def n_horizon(self, N: int) -> int:
        """Largest n with lambda(n) <= N (0 if lambda(1) > N)."""
        if self.table is None:
            # lambda(n) >= n, so the answer is at most N; grow by doubling
            m = max(1, len(self._cache))
            while self._cache[-1] <= N and m <= N:
                m *= 2
                self._extend(min(m, N + 1))
        return bisect.bisect_right(self._cache, N)


@functools.lru_cache(maxsize=1)
def _identity() -> IndexMethod:
    return IndexMethod("n", _ident)


def _ident(n: int) -> int:
    return n


def _check_monotone(vals, label):
    prev = 0
    for i, v in enumerate(vals, start=1):
        if v <= prev:
            raise NonMonotoneError(f"{label}: entry {i} = {v} does not exceed {prev}")
        prev = v


@dataclass(frozen=True)
class DeferredPair:
    """Window bounds p(n) < q(n) for the deferred mean over p(n) < k <= q(n)."""

    p: Callable[[int], int]
    q: Callable[[int], int]
    label: str = "p,q"

    @classmethod
    def from_index(cls, lam: IndexMethod) -> "DeferredPair":
        return cls(lambda n: lam(n - 1), lam, f"D[{lam.label}]")

    @classmethod
    def cesaro(cls) -> "DeferredPair":
        return cls(lambda n: 0, lambda n: n, "C1")

    def bounds(self, n_max: int) -> tuple[np.ndarray, np.ndarray]:
        p = np.array([int(self.p(n)) for n in range(1, n_max + 1)], dtype=np.int64)
        q = np.array([int(self.q(n)) for n in range(1, n_max + 1)], dtype=np.int64)
        bad = np.flatnonzero((p < 0) | (p >= q))
        if bad.size:
            n = int(bad[0]) + 1
            raise WijsumError(f"{self.label}: need 0 <= p(n) < q(n), failed at n = {n}")
        return p, q

    def n_horizon(self, N: int) -> int:
        """Largest n such that q(m) <= N for every m <= n."""
        n = 0
        while int(self.q(n + 1)) <= N:
            n += 1
        return n


class Quantity(str, Enum):
    LIMSUP_NEXT = "limsup lambda(n+1)/lambda(n)"
    LIMINF_PREV = "liminf lambda(n)/lambda(n-1)"
    LIM_COMPANION = "lim mu(n)/lambda(n)"
    LIM_N_OVER = "lim n/lambda(n)"
    LIMSUP_PREV = "limsup lambda(n)/lambda(n-1)"


class Hint(str, Enum):
    SATISFIES = "SatisfiesCondition"
    FAILS = "FailsCondition"
    INCONCLUSIVE = "Inconclusive"


# Condition each quantity is compared against, for report text.
_THRESHOLDS = {
    Quantity.LIMSUP_NEXT: "= 1",
    Quantity.LIMINF_PREV: "> 1",
    Quantity.LIM_COMPANION: "= 1",
    Quantity.LIM_N_OVER: "> 0",
    Quantity.LIMSUP_PREV: "< inf",
}


@dataclass(frozen=True)
class ConditionReport:
    quantity: Quantity
    estimate: float
    window: tuple[int, int]
    verdict_hint: Hint
    threshold: str
    tol: float
    half_estimates: tuple[float, float]
    label: str

    def as_dict(self) -> dict:
        return {
            "quantity": self.quantity.value,
            "label": self.label,
            "estimate": self.estimate,
            "window": list(self.window),
            "threshold": self.threshold,
            "tol": self.tol,
            "half_estimates": list(self.half_estimates),
            "verdict_hint": self.verdict_hint.value,
        }


def _ratios(num: list, den: list) -> np.ndarray:
    return np.array([a / b for a, b in zip(num, den)], dtype=float)


def _reduce(q: Quantity, r: np.ndarray) -> float:
    if q in (Quantity.LIMSUP_NEXT, Quantity.LIMSUP_PREV):
        return float(np.max(r))
    if q is Quantity.LIMINF_PREV:
        return float(np.min(r))
    # lim: mean over the final tenth of the window
    m = max(1, r.size // 10)
    return float(np.mean(r[-m:]))


def _hint(q: Quantity, est: float, tol: float) -> Hint:
    if not math.isfinite(est):
        return Hint.INCONCLUSIVE
    if q in (Quantity.LIMSUP_NEXT, Quantity.LIM_COMPANION):
        return Hint.SATISFIES if abs(est - 1.0) <= tol else Hint.FAILS
    if q is Quantity.LIMINF_PREV:
        return Hint.SATISFIES if est >= 1.0 + tol else Hint.FAILS
    if q is Quantity.LIM_N_OVER:
        return Hint.SATISFIES if est >= tol else Hint.FAILS
    raise AssertionError(q)


def ratio_condition(
    lam: IndexMethod,
    which: Quantity | str,
    N: int,
    companion: Optional[IndexMethod] = None,
    tol: float = 1e-2,
) -> ConditionReport:
    """Estimate a ratio condition on the tail window [ceil(N/2), N].

    limsup / liminf are the max / min of the ratio over the window and
    lim is the mean over the last tenth of it.  The same estimate is also
    taken on each half of the window; when the halves disagree on the
    verdict the hint is ``Inconclusive``.  For ``limsup ... < inf`` the
    condition is judged by whether the windowed max keeps growing from the
    first half to the second by more than ``tol`` (relative).
    """
    q = Quantity(which)
    if N < 4:
        raise WijsumError(f"ratio conditions need N >= 4, got {N}")
    if (q is Quantity.LIM_COMPANION) != (companion is not None):
        raise MissingCompanion(
            "a companion method is required exactly for lim mu(n)/lambda(n)"
        )
    lo = (N + 1) // 2
    ns = list(range(lo, N + 1))
    if q is Quantity.LIMSUP_NEXT:
        vals = lam.values(N + 1)
        r = _ratios([vals[n] for n in ns], [vals[n - 1] for n in ns])
    elif q in (Quantity.LIMINF_PREV, Quantity.LIMSUP_PREV):
        vals = lam.values(N)
        ns = [n for n in ns if n >= 2]
        r = _ratios([vals[n - 1] for n in ns], [vals[n - 2] for n in ns])
    elif q is Quantity.LIM_COMPANION:
        vals, mu = lam.values(N), companion.values(N)
        r = _ratios([mu[n - 1] for n in ns], [vals[n - 1] for n in ns])
    else:
        vals = lam.values(N)
        r = _ratios(ns, [vals[n - 1] for n in ns])

    est = _reduce(q, r)
    half = max(1, r.size // 2)
    first, second = _reduce(q, r[:half]), _reduce(q, r[half:] if r.size > 1 else r)
    if q is Quantity.LIMSUP_PREV:
        growing = second > first * (1.0 + tol)
        hint = Hint.FAILS if growing or not math.isfinite(est) else Hint.SATISFIES
    else:
        hint = _hint(q, est, tol)
        if _hint(q, first, tol) is not _hint(q, second, tol):
            hint = Hint.INCONCLUSIVE
    label = lam.label if companion is None else f"{companion.label} / {lam.label}"
    return ConditionReport(
        q, est, (ns[0], ns[-1]), hint, _THRESHOLDS[q], tol, (first, second), label
    )


def t_matrix_row(lam: IndexMethod, n: int) -> np.ndarray:
    """Row n of T: t_nk = (lambda(k) - lambda(k-1)) / lambda(n), k = 1..n."""
    if n < 1:
        raise WijsumError("rows are indexed from 1")
    vals = [0] + lam.values(n)
    ln = vals[n]
    if ln < 2**53:
        return np.diff(np.array(vals, dtype=np.int64)).astype(float) / float(ln)
    return np.array([(vals[k] - vals[k - 1]) / ln for k in range(1, n + 1)], dtype=float)


def r_matrix_row(lam: IndexMethod, n: int) -> Dict[int, float]:
    """Row n of R, the matrix taking C_lambda means to D_lambda means.

    ``{n: lambda(n)/gap, n-1: -lambda(n-1)/gap}`` with gap = lambda(n) - lambda(n-1);
    row 1 is ``{1: 1.0}``.
    """
    if n < 1:
        raise WijsumError("rows are indexed from 1")
    a, b = lam(n), lam(n - 1)
    gap = a - b
    if n == 1:
        return {1: a / gap}
    return {n: a / gap, n - 1: -(b / gap)}


def r_abs_row_sum(lam: IndexMethod, n: int) -> float:
    """Closed form 1 + 2 / (lambda(n)/lambda(n-1) - 1) of the R row's absolute sum.

    The step ratio minus one is formed exactly as (lambda(n) - lambda(n-1)) /
    lambda(n-1); in floats it cancels badly once the ratio is close to 1.
    """
    if n == 1:
        return 1.0
    a, b = lam(n), lam(n - 1)
    return float(1 + 2 / Fraction(a - b, b))


def t_rows(lam: IndexMethod) -> Callable[[int], np.ndarray]:
    return partial(t_matrix_row, lam)


def r_rows(lam: IndexMethod) -> Callable[[int], Dict[int, float]]:
    return partial(r_matrix_row, lam)


def sparse_row(row: Row) -> tuple[np.ndarray, np.ndarray]:
    """Normalize a dense row (entry k-1 is column k) or a {k: w} dict."""
    if isinstance(row, dict):
        cols = np.array(sorted(row), dtype=np.int64)
        return cols, np.array([row[int(k)] for k in cols], dtype=float)
    w = np.asarray(row, dtype=float)
    return np.arange(1, w.size + 1, dtype=np.int64), w


@dataclass(frozen=True)
class RegularityReport:
    horizon: int
    max_abs_row_sum: float
    max_row_sum_deviation: float
    max_column_tail: float
    abs_row_sums: np.ndarray
    abs_row_sum_growth: float
    verdict_hint: str
    tolerances: dict

    @property
    def regular_consistent(self) -> bool:
        return self.verdict_hint == "Regular-consistent"

    def as_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "max_abs_row_sum": self.max_abs_row_sum,
            "max_row_sum_deviation": self.max_row_sum_deviation,
            "max_column_tail": self.max_column_tail,
            "abs_row_sum_growth": self.abs_row_sum_growth,
            "verdict_hint": self.verdict_hint,
            "tolerances": dict(self.tolerances),
        }


def regularity_report(
    rows: Callable[[int], Row],
    N: int,
    sum_tol: float = 1e-9,
    column_tol: float = 1e-3,
    n_columns: int = 10,
    growth_tol: float = 1e-2,
) -> RegularityReport:
    """Check the three Silverman-Toeplitz conditions on rows 1..N.

    * row sums within ``sum_tol`` of 1,
    * absolute row sums not still growing over the last decade of rows
      (same heuristic as :func:`~wijsum.metric_sets.bounded_estimate`),
    * entries of the first ``n_columns`` columns in row N below ``column_tol``.
    """
    if N < 2:
        raise WijsumError("regularity diagnostics need N >= 2")
    abs_sums = np.empty(N)
    dev = np.empty(N)
    last = None
    for n in range(1, N + 1):
        cols, w = sparse_row(rows(n))
        abs_sums[n - 1] = math.fsum(np.abs(w))
        dev[n - 1] = abs(math.fsum(w) - 1.0)
        if n == N:
            last = (cols, w)
    cols, w = last
    fixed = cols <= min(n_columns, N)
    col_tail = float(np.max(np.abs(w[fixed]))) if np.any(fixed) else 0.0
    growth, flagged = growth_suspect(abs_sums, growth_tol)
    ok = (
        float(np.max(dev)) <= sum_tol
        and not bool(flagged[0])
        and col_tail < column_tol
    )
    return RegularityReport(
        N,
        float(np.max(abs_sums)),
        float(np.max(dev)),
        col_tail,
        abs_sums,
        float(growth[0]),
        "Regular-consistent" if ok else "Not-regular-consistent",
        {"sum_tol": sum_tol, "column_tol": column_tol, "n_columns": n_columns,
         "growth_tol": growth_tol},
    )


def complement_method(lam: IndexMethod, N: int) -> IndexMethod:
    """The increasing enumeration of {1..N} minus the range of lambda.

    Returns an empty list-backed method (``is_empty`` true) when lambda
    covers every integer up to N.
    """
    if N < lam(1):
        raise WijsumError(f"need N >= lambda(1) = {lam(1)}")
    taken = set(lam.values(lam.n_horizon(N)))
    rest = [k for k in range(1, N + 1) if k not in taken]
    return IndexMethod.from_list(rest, label=f"complement({lam.label}, N={N})", allow_empty=True)


# lambda-expression grammar: a sum of integer terms c, c*n, c*n^k, c*b^n.
_CONST = re.compile(r"^(\d+)$")
_LINEAR = re.compile(r"^(?:(\d+)\*?)?n$")
_POWER = re.compile(r"^(?:(\d+)\*)?n\^(\d+)$")
_EXP = re.compile(r"^(?:(\d+)\*)?(\d+)\^n$")


def _parse_term(tok: str) -> Callable[[int], int]:
    if m := _CONST.match(tok):
        c = int(m.group(1))
        return lambda n: c
    if m := _LINEAR.match(tok):
        c = int(m.group(1) or 1)
        return lambda n: c * n
    if m := _POWER.match(tok):
        c, k = int(m.group(1) or 1), int(m.group(2))
        return lambda n: c * n**k
    if m := _EXP.match(tok):
        c, b = int(m.group(1) or 1), int(m.group(2))
        return lambda n: c * b**n
    raise ParseError(f"cannot parse term {tok!r}")


def lambda_from_expr(expr: str) -> IndexMethod:
    """Parse expressions such as ``n``, ``2*n``, ``n^2``, ``2^n``, ``n^2+n``."""
    text = expr.replace(" ", "")
    if not text:
        raise ParseError("empty lambda expression")
    parts = re.findall(r"[+-]?[^+-]+", text)
    if "".join(parts) != text:
        raise ParseError(f"cannot parse {expr!r}")
    terms = []
    for part in parts:
        sign = -1 if part.startswith("-") else 1
        f = _parse_term(part.lstrip("+-"))
        terms.append((sign, f))

    def gen(n: int) -> int:
        return sum(s * f(n) for s, f in terms)

    try:
        return IndexMethod(expr.strip(), gen)
    except NonMonotoneError as exc:
        raise NonMonotoneError(f"{expr!r} is not strictly increasing: {exc}") from exc
