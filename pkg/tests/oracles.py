"""Independent reference implementations used by the tests.

Nothing here imports the package's distance or summation code.
"""

import math

import numpy as np


def grid_min_distance(
    x, param_to_points, lo, hi, periodic=None, grid=41, rounds=80, width=1e-11
):
    """min over a parametrized set of |x - point|, by grid search with zooming.

    ``param_to_points`` maps a (K, m) parameter array to (K, d) points; the
    parameter box is [lo, hi].  Each round samples a grid, keeps the best
    sample and shrinks the window around it to a quarter of its width.
    Stops once the window is narrower than ``width``.  Dimensions flagged in
    ``periodic`` are never clipped to [lo, hi].
    """
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    x = np.asarray(x, float)
    a, b = lo.copy(), hi.copy()
    free = np.zeros(lo.size, bool) if periodic is None else np.asarray(periodic, bool)
    lo_c, hi_c = np.where(free, -np.inf, lo), np.where(free, np.inf, hi)
    best, best_u = math.inf, None
    for _ in range(rounds):
        axes = [np.linspace(a[i], b[i], grid) for i in range(lo.size)]
        U = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
        d = np.linalg.norm(param_to_points(U) - x, axis=1)
        j = int(np.argmin(d))
        if d[j] < best:
            best, best_u = float(d[j]), U[j]
        if np.max(b - a) < width:
            break
        half = (b - a) / 8
        a = np.maximum(lo_c, best_u - half)
        b = np.minimum(hi_c, best_u + half)
    return best


def ball_params(center, radius):
    # square [c - r, c + r]^2 pulled radially onto the disk
    c = np.asarray(center, float)

    def f(U):
        v = U - c
        n = np.linalg.norm(v, axis=1, keepdims=True)
        scale = np.where(n > radius, radius / np.maximum(n, 1e-300), 1.0)
        return c + v * scale

    return f, list(c - radius), list(c + radius)


def sphere_params(center, radius):
    c = np.asarray(center, float)

    def f(U):
        return c + radius * np.stack([np.cos(U[:, 0]), np.sin(U[:, 0])], axis=1)

    return f, [0.0], [2 * math.pi], [True]


def box_params(lo, hi):
    return (lambda U: U), list(lo), list(hi)


def line_params(normal, offset, reach):
    n = np.asarray(normal, float)
    n = n / np.linalg.norm(n)
    b = offset / np.linalg.norm(normal)
    t = np.array([-n[1], n[0]])

    def f(U):
        return b * n + U[:, :1] * t

    return f, [-reach], [reach]


def brute_prefix_sums(x):
    return [math.fsum(x[:k]) for k in range(len(x) + 1)]


def brute_count(devs, eps, upto):
    return sum(1 for v in devs[:upto] if v >= eps)


def is_square(k):
    return math.isqrt(k) ** 2 == k
