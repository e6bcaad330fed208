"""Mean-type transforms of a distance trace.

All transforms return a :class:`MeanSeries` whose ``values[p, n-1]`` is the
n-th mean at probe p.  Prefix means (C1, C_lambda) use a compensated
cumulative sum; block means (D_lambda, deferred) sum each block with
``math.fsum``.  The two routes are independent, which is what the identity
checks at the bottom of this module rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import HorizonExceeded, WijsumError
from .index_methods import DeferredPair, IndexMethod, Row, r_rows, sparse_row, t_rows
from .metric_sets import DistanceTrace

__all__ = [
    "compensated_cumsum",
    "MeanSeries",
    "c1",
    "c_lambda",
    "d_lambda",
    "deferred",
    "strong_mean",
    "apply_row_matrix",
    "relative_residual",
    "identity_residuals",
]


def compensated_cumsum(x) -> np.ndarray:
    """Prefix sums [0, x1, x1+x2, ...] with Neumaier compensation.

    The input is cut into ~sqrt(N) blocks; the running sum inside every
    block is carried in (sum, correction) pairs, vectorized across blocks,
    then block offsets are accumulated the same way and merged with an
    error-free two-sum.  A 2-D input is processed row by row (vectorized
    across rows); the result has N + 1 columns.
    """
    x = np.asarray(x, dtype=float)
    flat = x.ndim == 1
    X0 = np.atleast_2d(x)
    R, N = X0.shape
    if N == 0:
        return np.zeros(1) if flat else np.zeros((R, 1))
    B = max(1, math.isqrt(N))
    nb = -(-N // B)
    X = np.zeros((R, nb * B))
    X[:, :N] = X0
    # layout (row, position in block, block) keeps every step contiguous
    X = np.ascontiguousarray(X.reshape(R, nb, B).transpose(0, 2, 1))

    s = np.zeros((R, nb))
    c = np.zeros((R, nb))
    hi = np.empty((R, B, nb))
    lo = np.empty((R, B, nb))
    for i in range(B):
        xi = X[:, i]
        t = s + xi
        c += np.where(np.abs(s) >= np.abs(xi), (s - t) + xi, (xi - t) + s)
        s = t
        hi[:, i] = s
        lo[:, i] = c

    off_hi = np.zeros((R, nb))
    off_lo = np.zeros((R, nb))
    S = np.zeros(R)
    C = np.zeros(R)
    for b in range(nb):
        off_hi[:, b], off_lo[:, b] = S, C
        for v in (hi[:, -1, b], lo[:, -1, b]):
            t = S + v
            C = C + np.where(np.abs(S) >= np.abs(v), (S - t) + v, (v - t) + S)
            S = t

    a = off_hi[:, None, :]
    t = a + hi
    bp = t - a
    err = (a - (t - bp)) + (hi - bp)
    out = t + (err + (lo + off_lo[:, None, :]))
    out = out.transpose(0, 2, 1).reshape(R, -1)[:, :N]
    out = np.concatenate([np.zeros((R, 1)), out], axis=1)
    return out[0] if flat else out


@dataclass(frozen=True, eq=False)
class MeanSeries:
    """Per-probe sequence of means indexed by n = 1..horizon.

    ``upper[n-1]`` is the last trace index entering entry n (lambda(n) or
    q(n)); ``lower[n-1]`` is the index just before the first one (0 for
    prefix means, lambda(n-1) or p(n) for block means).
    """

    kind: str
    values: np.ndarray
    upper: np.ndarray
    lower: np.ndarray
    method: str
    trace_horizon: int
    power: Optional[float] = None
    scale: Optional[np.ndarray] = None

    @property
    def horizon(self) -> int:
        return self.values.shape[1]

    @property
    def n_probes(self) -> int:
        return self.values.shape[0]

    @property
    def ns(self) -> np.ndarray:
        return np.arange(1, self.horizon + 1)


def _marks(lam: IndexMethod, N: int, n_max: Optional[int]) -> np.ndarray:
    if n_max is None:
        n_max = lam.n_horizon(N)
        if n_max == 0:
            raise HorizonExceeded(f"lambda(1) = {lam(1)} exceeds the trace horizon {N}")
    arr = lam.array(n_max)
    if arr[-1] > N:
        raise HorizonExceeded(f"lambda({n_max}) = {arr[-1]} exceeds the trace horizon {N}")
    return arr


def _prefix_means(V: np.ndarray, upper: np.ndarray) -> np.ndarray:
    return compensated_cumsum(V)[:, upper] / upper


def _block_means(V: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    width = upper - lower
    out = np.empty((V.shape[0], upper.size))
    single = width == 1
    out[:, single] = V[:, upper[single] - 1]
    for j in np.flatnonzero(~single):
        a, b = int(lower[j]), int(upper[j])
        for p in range(V.shape[0]):
            out[p, j] = math.fsum(V[p, a:b].tolist()) / (b - a)
    return out


def _series(kind, values, upper, lower, method, N, power=None):
    values = np.asarray(values, dtype=float)
    values.setflags(write=False)
    return MeanSeries(kind, values, upper, lower, method, N, power)


def c_lambda(trace: DistanceTrace, lam: IndexMethod, n_max: Optional[int] = None) -> MeanSeries:
    """(1/lambda(n)) * sum of d(x, A_k) over k <= lambda(n).

    ``n_max`` defaults to the largest n with lambda(n) <= N.
    """
    arr = _marks(lam, trace.horizon, n_max)
    upper = arr[1:]
    vals = _prefix_means(trace.values, upper)
    kind = "C1" if lam.label == "n" else "Clambda"
    return _series(kind, vals, upper, np.zeros_like(upper), lam.label, trace.horizon)


def c1(trace: DistanceTrace) -> MeanSeries:
    return c_lambda(trace, IndexMethod.identity())


def d_lambda(trace: DistanceTrace, lam: IndexMethod, n_max: Optional[int] = None) -> MeanSeries:
    """Block means over lambda(n-1) < k <= lambda(n), with lambda(0) = 0."""
    arr = _marks(lam, trace.horizon, n_max)
    vals = _block_means(trace.values, arr[:-1], arr[1:])
    return _series("Dlambda", vals, arr[1:], arr[:-1], lam.label, trace.horizon)


def deferred(trace: DistanceTrace, pq: DeferredPair, n_max: Optional[int] = None) -> MeanSeries:
    """Deferred Cesaro mean: average of d(x, A_k) over p(n) < k <= q(n)."""
    N = trace.horizon
    if n_max is None:
        n_max = pq.n_horizon(N)
        if n_max == 0:
            raise HorizonExceeded(f"q(1) exceeds the trace horizon {N}")
    p, q = pq.bounds(n_max)
    if q.max() > N:
        raise HorizonExceeded(f"q reaches {q.max()} beyond the trace horizon {N}")
    vals = _block_means(trace.values, p, q)
    return _series("Deferred", vals, q, p, pq.label, N)


_STRONG = {"Clambda": "StrongClambda", "Dlambda": "StrongDlambda", "C1": "StrongC1"}


def strong_mean(
    trace: DistanceTrace,
    method: str,
    lam: Optional[IndexMethod] = None,
    p: float = 1.0,
    n_max: Optional[int] = None,
) -> MeanSeries:
    """Means of |d(x, A_k) - d(x, A)|**p.

    ``method`` is ``"Clambda"``, ``"Dlambda"`` or ``"C1"``; C1 ignores
    ``lam``.  Needs ``trace.target_row``.
    """
    if method not in _STRONG:
        raise WijsumError(f"unknown strong method {method!r}")
    if not p > 0:
        raise WijsumError(f"power p must be positive, got {p}")
    dev = trace.deviations() ** p
    dev_trace = DistanceTrace(trace.probes, dev, None, trace.label)
    if method == "C1":
        base = c_lambda(dev_trace, IndexMethod.identity(), n_max)
    elif lam is None:
        raise WijsumError(f"{method} needs an index method")
    elif method == "Clambda":
        base = c_lambda(dev_trace, lam, n_max)
    else:
        base = d_lambda(dev_trace, lam, n_max)
    return replace(base, kind=_STRONG[method], power=float(p))


def apply_row_matrix(rows: Callable[[int], Row], series: MeanSeries) -> MeanSeries:
    """entry(n) = sum over k of row_n(k) * series(k), summed with fsum.

    The returned series carries ``scale[p, n-1] = sum_k |row_n(k) * series(k)|``,
    the natural magnitude for judging cancellation in the product.
    """
    H = series.horizon
    out = np.empty((series.n_probes, H))
    scale = np.empty_like(out)
    for n in range(1, H + 1):
        cols, w = sparse_row(rows(n))
        if cols.size and (cols.max() > H or cols.min() < 1):
            raise HorizonExceeded(f"row {n} reaches column {cols.max()} beyond horizon {H}")
        terms = series.values[:, cols - 1] * w
        for p in range(series.n_probes):
            out[p, n - 1] = math.fsum(terms[p].tolist())
        scale[:, n - 1] = np.sum(np.abs(terms), axis=1)
    out.setflags(write=False)
    return replace(series, kind=f"rows({series.kind})", values=out, scale=scale)


def relative_residual(a, b, scale=None) -> np.ndarray:
    """|a - b| / max(|a|, |b|, scale), with 0/0 read as 0."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    den = np.maximum(np.abs(a), np.abs(b))
    if scale is not None:
        den = np.maximum(den, np.asarray(scale, dtype=float))
    diff = np.abs(a - b)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(diff == 0, 0.0, diff / den)


def identity_residuals(trace: DistanceTrace, lam: IndexMethod) -> dict[str, float]:
    """Max relative residual of every exact identity linking the transforms.

    Keys:

    ``subsequence``       C_lambda(n) against C1 at lambda(n) (C1 by blocks)
    ``t_convex``          C_lambda against T applied to D_lambda
    ``r_inversion``       D_lambda against R applied to C_lambda
    ``r_formula``         D_lambda against the two-term closed form
    ``deferred_c1``       deferred(p=0, q=n) against C1
    ``deferred_dlambda``  deferred(lambda(n-1), lambda(n)) against D_lambda
    ``t_row_sums``        |sum_k t_nk - 1|
    """
    cl = c_lambda(trace, lam)
    dl = d_lambda(trace, lam)
    c1_blocks = deferred(trace, DeferredPair.cesaro())
    c1_prefix = c1(trace)
    up = cl.upper

    res = {}
    res["subsequence"] = relative_residual(cl.values, c1_blocks.values[:, up - 1]).max()
    t_list = [t_rows(lam)(n) for n in range(1, cl.horizon + 1)]
    tc = apply_row_matrix(lambda n: t_list[n - 1], dl)
    res["t_convex"] = relative_residual(cl.values, tc.values, tc.scale).max()
    rc = apply_row_matrix(r_rows(lam), cl)
    res["r_inversion"] = relative_residual(dl.values, rc.values, rc.scale).max()

    a = up.astype(float)
    b = dl.lower.astype(float)
    prev = np.concatenate([np.zeros((cl.n_probes, 1)), cl.values[:, :-1]], axis=1)
    first, second = a * cl.values, b * prev
    formula = (first - second) / (a - b)
    res["r_formula"] = relative_residual(
        dl.values, formula, (np.abs(first) + np.abs(second)) / (a - b)
    ).max()

    res["deferred_c1"] = relative_residual(c1_blocks.values, c1_prefix.values).max()
    dd = deferred(trace, DeferredPair.from_index(lam), n_max=dl.horizon)
    res["deferred_dlambda"] = relative_residual(dd.values, dl.values).max()

    res["t_row_sums"] = max(abs(math.fsum(row.tolist()) - 1.0) for row in t_list)
    return {k: float(v) for k, v in res.items()}
