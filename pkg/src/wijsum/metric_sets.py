"""Closed subsets of Euclidean space and the distance functional d(x, A).

Every shape exposes ``distances(X)`` for a stack of points ``X`` of shape
``(m, d)`` and ``distance(x)`` for a single point.  Distances are computed in
closed form; :class:`DistanceOracle` wraps a user callable that is trusted to
be 1-Lipschitz.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatch, MissingTarget, NonFiniteError, WijsumError

__all__ = [
    "as_point",
    "as_points",
    "ClosedSet",
    "Singleton",
    "FinitePointSet",
    "Ball",
    "Sphere",
    "AxisBox",
    "Hyperplane",
    "DistanceOracle",
    "distance",
    "SetSequence",
    "DistanceTrace",
    "trace",
    "BoundedReport",
    "bounded_estimate",
    "growth_suspect",
]


def as_point(coords) -> np.ndarray:
    """Validate a single point and return it as a 1-D float array."""
    x = np.asarray(coords, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.ndim != 1 or x.size == 0:
        raise DimensionMismatch(f"a point must be a non-empty vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteError(f"non-finite coordinates: {x}")
    return x


def as_points(coords) -> np.ndarray:
    X = np.asarray(coords, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] == 0:
        raise DimensionMismatch(f"expected an (m, d) array of points, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise NonFiniteError("non-finite coordinates among points")
    return X


class ClosedSet:
    """A non-empty closed subset of R^d."""

    dim: int

    def _raw(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def distances(self, X) -> np.ndarray:
        X = as_points(X)
        if X.shape[1] != self.dim:
            raise DimensionMismatch(
                f"{type(self).__name__} lives in R^{self.dim}, points have dimension {X.shape[1]}"
            )
        return self._raw(X)

    def distance(self, x) -> float:
        x = as_point(x)
        return float(self.distances(x.reshape(1, -1))[0])


@dataclass(frozen=True, eq=False)
class Singleton(ClosedSet):
    point: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", as_point(self.point))

    @property
    def dim(self) -> int:
        return self.point.size

    def _raw(self, X):
        return np.linalg.norm(X - self.point, axis=1)


@dataclass(frozen=True, eq=False)
class FinitePointSet(ClosedSet):
    points: np.ndarray

    def __post_init__(self):
        P = as_points(self.points)
        object.__setattr__(self, "points", P)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def _raw(self, X):
        diff = X[:, None, :] - self.points[None, :, :]
        return np.min(np.linalg.norm(diff, axis=2), axis=1)


@dataclass(frozen=True, eq=False)
class Ball(ClosedSet):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        r = float(self.radius)
        if not np.isfinite(r) or r < 0:
            raise WijsumError(f"ball radius must be finite and >= 0, got {self.radius}")
        object.__setattr__(self, "radius", r)

    @property
    def dim(self) -> int:
        return self.center.size

    def _raw(self, X):
        return np.maximum(np.linalg.norm(X - self.center, axis=1) - self.radius, 0.0)


@dataclass(frozen=True, eq=False)
class Sphere(ClosedSet):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        r = float(self.radius)
        if not np.isfinite(r) or r <= 0:
            raise WijsumError(f"sphere radius must be finite and > 0, got {self.radius}")
        object.__setattr__(self, "radius", r)

    @property
    def dim(self) -> int:
        return self.center.size

    def _raw(self, X):
        return np.abs(np.linalg.norm(X - self.center, axis=1) - self.radius)


@dataclass(frozen=True, eq=False)
class AxisBox(ClosedSet):
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo, hi = as_point(self.lo), as_point(self.hi)
        if lo.shape != hi.shape:
            raise DimensionMismatch("box corners differ in dimension")
        if np.any(lo > hi):
            raise WijsumError("box requires lo <= hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.size

    def _raw(self, X):
        gap = np.maximum(np.maximum(self.lo - X, X - self.hi), 0.0)
        return np.linalg.norm(gap, axis=1)


@dataclass(frozen=True, eq=False)
class Hyperplane(ClosedSet):
    """The set {y : <normal, y> = offset}; the normal is rescaled to unit length."""

    normal: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        nrm = as_point(self.normal)
        length = np.linalg.norm(nrm)
        if length == 0:
            raise WijsumError("hyperplane normal must be nonzero")
        object.__setattr__(self, "normal", nrm / length)
        object.__setattr__(self, "offset", float(self.offset) / length)

    @property
    def dim(self) -> int:
        return self.normal.size

    def _raw(self, X):
        return np.abs(X @ self.normal - self.offset)


@dataclass(frozen=True, eq=False)
class DistanceOracle(ClosedSet):
    """Distance supplied by a callable, declared 1-Lipschitz by the caller."""

    func: Callable[[np.ndarray], float]
    dim: int = 2
    label: str = "oracle"

    def _raw(self, X):
        out = np.array([float(self.func(x)) for x in X])
        if not np.all(np.isfinite(out)) or np.any(out < 0):
            raise NonFiniteError(f"{self.label} returned a negative or non-finite distance")
        return out


def distance(x, A: ClosedSet) -> float:
    """d(x, A) = inf over a in A of |x - a|."""
    return A.distance(x)


@dataclass(frozen=True)
class SetSequence:
    """An indexed family k -> A_k of closed sets, k = 1, 2, ...

    ``batch``, when given, must return the same numbers as evaluating the
    generator index by index; it takes the probe stack ``(P, d)`` and an
    integer array of indices and returns a ``(P, len(ks))`` array.
    """

    label: str
    generator: Callable[[int], ClosedSet]
    bounded_hint: Optional[bool] = None
    batch: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = field(
        default=None, repr=False
    )

    def __call__(self, k: int) -> ClosedSet:
        if k < 1:
            raise WijsumError(f"set sequences are indexed from 1, got {k}")
        return self.generator(int(k))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DistanceTrace:
    """Matrix of d(x_p, A_k) for probes x_p and k = 1..N.

    ``values[p, k-1]`` holds d(probes[p], A_k); ``target_row[p]`` holds
    d(probes[p], A) when a limit candidate A was supplied.
    """

    probes: np.ndarray
    values: np.ndarray
    target_row: Optional[np.ndarray] = None
    label: str = ""

    def __post_init__(self):
        probes = _frozen(as_points(self.probes))
        values = _frozen(np.atleast_2d(self.values))
        if values.shape[0] != probes.shape[0]:
            raise DimensionMismatch(
                f"{values.shape[0]} value rows for {probes.shape[0]} probes"
            )
        if values.shape[1] < 1:
            raise WijsumError("a trace needs horizon N >= 1")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise NonFiniteError("trace values must be finite and nonnegative")
        object.__setattr__(self, "probes", probes)
        object.__setattr__(self, "values", values)
        if self.target_row is not None:
            tr = _frozen(np.ravel(self.target_row))
            if tr.size != probes.shape[0]:
                raise DimensionMismatch("target_row needs one entry per probe")
            if not np.all(np.isfinite(tr)) or np.any(tr < 0):
                raise NonFiniteError("target distances must be finite and nonnegative")
            object.__setattr__(self, "target_row", tr)

    @classmethod
    def from_values(cls, values, target=None, label: str = "") -> "DistanceTrace":
        """Wrap plain scalar sequences (one row per synthetic probe)."""
        vals = np.atleast_2d(np.asarray(values, dtype=float))
        probes = np.arange(vals.shape[0], dtype=float).reshape(-1, 1)
        tr = None if target is None else np.broadcast_to(
            np.asarray(target, dtype=float), (vals.shape[0],)
        )
        return cls(probes, vals, tr, label)

    @property
    def horizon(self) -> int:
        return self.values.shape[1]

    @property
    def n_probes(self) -> int:
        return self.values.shape[0]

    @property
    def has_target(self) -> bool:
        return self.target_row is not None

    def deviations(self) -> np.ndarray:
        """|d(x, A_k) - d(x, A)| for every probe and k."""
        if self.target_row is None:
            raise MissingTarget("this operation needs a target set A")
        return np.abs(self.values - self.target_row[:, None])

    def with_target(self, target_row) -> "DistanceTrace":
        return DistanceTrace(self.probes, self.values, target_row, self.label)


def trace(seq: SetSequence, probes, N: int, target: Optional[ClosedSet] = None) -> DistanceTrace:
    """Materialize d(x, A_k) for every probe and k = 1..N."""
    if N < 1:
        raise WijsumError(f"horizon must be >= 1, got {N}")
    P = as_points(probes)
    ks = np.arange(1, N + 1)
    if seq.batch is not None:
        values = np.asarray(seq.batch(P, ks), dtype=float)
        if values.shape != (P.shape[0], N):
            raise DimensionMismatch(f"batch evaluator returned shape {values.shape}")
    else:
        values = np.empty((P.shape[0], N))
        for j, k in enumerate(ks):
            values[:, j] = seq(int(k)).distances(P)
    target_row = None if target is None else target.distances(P)
    return DistanceTrace(P, values, target_row, seq.label)


def growth_suspect(values, growth_tol: float = 1e-2) -> tuple[np.ndarray, np.ndarray]:
    """Relative growth of the running sup over the last decade of indices.

    Compares sup over k <= N/10 with sup over k <= N, row by row.  Returns
    ``(growth, flagged)`` where ``flagged = growth > growth_tol``.
    """
    V = np.atleast_2d(np.asarray(values, dtype=float))
    N = V.shape[1]
    m = max(1, N // 10)
    early = np.max(V[:, :m], axis=1)
    full = np.max(V, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        growth = np.where(
            full > early,
            (full - early) / np.maximum(np.abs(early), np.finfo(float).tiny),
            0.0,
        )
    return growth, growth > growth_tol


@dataclass(frozen=True)
class BoundedReport:
    sup: np.ndarray
    growth: np.ndarray
    unbounded_suspect: np.ndarray
    horizon: int
    growth_tol: float

    @property
    def any_suspect(self) -> bool:
        return bool(np.any(self.unbounded_suspect))

    def as_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "sup": self.sup.tolist(),
            "growth": self.growth.tolist(),
            "unbounded_suspect": self.unbounded_suspect.tolist(),
            "growth_tol": self.growth_tol,
        }


def bounded_estimate(trace_like, growth_tol: float = 1e-2) -> BoundedReport:
    """Finite-horizon sup of each row plus an unbounded-growth flag.

    Accepts a :class:`DistanceTrace` or anything with a 2-D ``values``
    attribute (mean series work too).  The flag fires when the running sup
    still grows by more than ``growth_tol`` (relative) between k = N/10
    and k = N.  This is a heuristic, not a proof of boundedness.
    """
    V = np.atleast_2d(np.asarray(getattr(trace_like, "values", trace_like), dtype=float))
    growth, flagged = growth_suspect(V, growth_tol)
    return BoundedReport(np.max(V, axis=1), growth, flagged, V.shape[1], growth_tol)
