"""Deterministic point and pair samplers plus a chunked parallel map."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import qmc

from .geometry import Array, Domain

#: rows per work item; fixed so results never depend on the worker count
CHUNK = 4096


def threads() -> int:
    """Worker count from ``BLOCHLIP_THREADS`` (default: all cores)."""
    value = os.environ.get("BLOCHLIP_THREADS")
    if value is None:
        return os.cpu_count() or 1
    n = int(value)
    if n < 1:
        raise ValueError("BLOCHLIP_THREADS must be >= 1")
    return n


def map_chunks(func: Callable[..., Array], *arrays: Array) -> Array:
    """Apply a row-wise *func* over fixed-size chunks, possibly in parallel.

    The output is assembled in chunk order, so it does not depend on how many
    workers ran.
    """
    n = len(arrays[0])
    bounds = [(i, min(i + CHUNK, n)) for i in range(0, n, CHUNK)]
    work = [tuple(a[i:j] for a in arrays) for i, j in bounds]
    workers = min(threads(), len(work))
    if workers <= 1:
        parts = [func(*w) for w in work]
    else:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda w: func(*w), work))
    if not parts:
        return np.empty(0)
    return np.concatenate(parts)


def argmax_lex(values: Array, keys: Array) -> int:
    """Index of the largest finite value; ties go to the lexicographically
    smallest row of *keys*.  Returns -1 when no value is finite or ``+inf``."""
    ok = ~np.isnan(values)
    if not ok.any():
        return -1
    best = np.max(values[ok])
    tied = np.flatnonzero(ok & (values == best))
    if len(tied) == 1:
        return int(tied[0])
    order = np.lexsort(keys[tied].T[::-1])
    return int(tied[order[0]])


def _cube_to_disc(U: Array, radius: float) -> Array:
    """Area-preserving map of ``[0, 1)^m`` (m <= 2) into the ball of *radius*."""
    if U.shape[1] == 1:
        return radius * (2 * U - 1)
    r = radius * np.sqrt(U[:, 0])
    t = 2 * math.pi * U[:, 1]
    return np.column_stack([r * np.cos(t), r * np.sin(t)])


def halton_ball(dim: int, n: int, radius: float, groups: int = 1) -> list[Array]:
    """*groups* arrays of *n* Halton points each in the ball of *radius*.

    Rows are generated jointly (one Halton point of dimension ``groups * dim``
    per row).  In dimensions above two, rows with a point outside the ball are
    rejected.  The all-zero first Halton point is skipped.
    """
    if dim <= 2:
        U = qmc.Halton(groups * dim, scramble=False).random(n + 1)[1:]
        return [_cube_to_disc(U[:, g * dim:(g + 1) * dim], radius) for g in range(groups)]
    sampler = qmc.Halton(groups * dim, scramble=False)
    sampler.fast_forward(1)
    rows = []
    have = 0
    while have < n:
        U = radius * (2 * sampler.random(max(4 * (n - have), 64)) - 1)
        ok = np.all([np.linalg.norm(U[:, g * dim:(g + 1) * dim], axis=1) <= radius
                     for g in range(groups)], axis=0)
        rows.append(U[ok])
        have += int(ok.sum())
    U = np.vstack(rows)[:n]
    return [U[:, g * dim:(g + 1) * dim] for g in range(groups)]


def halton_box(dim: int, n: int, radius: float, groups: int = 1) -> list[Array]:
    U = qmc.Halton(groups * dim, scramble=False).random(n + 1)[1:]
    U = radius * (2 * U - 1)
    return [U[:, g * dim:(g + 1) * dim] for g in range(groups)]


@dataclass(frozen=True)
class PointSampler:
    """Centre plus ``n - 1`` Halton points over the safe region of a domain.

    For balls the region is the closed ball of *radius* (which must stay below
    the domain radius); for other domains it is ``[-radius, radius]^m``.
    """

    domain: Domain
    radius: float
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one sample")
        if self.domain.kind == "ball" and not 0 < self.radius < self.domain.radius:
            raise ValueError(f"safe radius must lie in (0, {self.domain.radius})")

    @property
    def spacing(self) -> float:
        return 2 * self.radius / self.n ** (1.0 / self.domain.dim)

    def inside(self, X: Array) -> Array:
        X = np.atleast_2d(X)
        if self.domain.kind == "ball":
            return np.linalg.norm(X, axis=1) <= self.radius
        return np.all(np.abs(X) <= self.radius, axis=1) & self.domain.contains(X)

    def points(self) -> Array:
        m = self.domain.dim
        make = halton_ball if self.domain.kind == "ball" else halton_box
        (X,) = make(m, self.n - 1, self.radius)
        return np.vstack([np.zeros(m), X])


@dataclass(frozen=True)
class PairSampler:
    """Pairs of distinct points in the safe region.

    A fraction *near* of the pairs sits close to the diagonal: ``y = x + d u``
    with ``d`` log-uniform between ``1e-7`` and ``1e-1`` times the radius and
    ``u`` a random unit vector.  The rest are independent Halton points.
    """

    domain: Domain
    radius: float
    n: int
    seed: int = 0
    near: float = 0.5

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one pair")
        if not 0 <= self.near <= 1:
            raise ValueError("near fraction must lie in [0, 1]")

    @property
    def base(self) -> PointSampler:
        return PointSampler(self.domain, self.radius, max(self.n, 1))

    @property
    def spacing(self) -> float:
        return self.base.spacing

    def inside(self, X: Array) -> Array:
        return self.base.inside(X)

    def pairs(self) -> tuple[Array, Array]:
        m = self.domain.dim
        n_near = int(round(self.near * self.n))
        n_far = self.n - n_near
        rng = np.random.default_rng(self.seed)

        X_near = PointSampler(self.domain, self.radius, max(n_near, 1)).points()[:n_near]
        d = self.radius * 10.0 ** rng.uniform(-7, -1, n_near)
        u = rng.normal(size=(n_near, m))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        Y_near = X_near + d[:, None] * u
        out = ~self.inside(Y_near)
        Y_near[out] = X_near[out] - d[out, None] * u[out]
        out = ~self.inside(Y_near)
        Y_near[out] = X_near[out] * (1 - d[out, None] / self.radius)

        make = halton_ball if self.domain.kind == "ball" else halton_box
        X_far, Y_far = make(m, n_far, self.radius, groups=2)
        return np.vstack([X_near, X_far]), np.vstack([Y_near, Y_far])


def golden_maximize(objective: Callable[[Array], Array], X0: Array, delta: float,
                    inside: Callable[[Array], Array], rounds: int = 4,
                    iterations: int = 40) -> tuple[Array, Array]:
    """Coordinate-wise golden-section ascent of *objective* from every row of
    *X0* at once.

    Each coordinate is searched in ``[-delta, delta]`` around the current point
    (the window halves every round).  Points outside ``inside`` score ``-inf``,
    ``nan`` scores too.  A move is kept only if it improves the row.
    """
    g = (math.sqrt(5.0) - 1.0) / 2.0

    def score(X):
        ok = inside(X)
        v = np.full(len(X), -np.inf)
        if np.any(ok):
            with np.errstate(all="ignore"):
                v[ok] = np.asarray(objective(X[ok]), dtype=float)
        return np.where(np.isnan(v), -np.inf, v)

    X = np.array(X0, dtype=float)
    best = score(X)
    for _ in range(rounds):
        for k in range(X.shape[1]):
            a = np.full(len(X), -delta)
            b = np.full(len(X), delta)
            c, d = b - g * (b - a), a + g * (b - a)

            def at(s):
                Z = X.copy()
                Z[:, k] += s
                return score(Z)

            fc, fd = at(c), at(d)
            for _ in range(iterations):
                left = fc > fd
                b = np.where(left, d, b)
                a = np.where(left, a, c)
                new = np.where(left, b - g * (b - a), a + g * (b - a))
                fn = at(new)
                c, d = np.where(left, new, d), np.where(left, c, new)
                fc, fd = np.where(left, fn, fd), np.where(left, fc, fn)
            s = np.where(fc > fd, c, d)
            trial = at(s)
            up = trial > best
            X[up, k] += s[up]
            best = np.where(up, trial, best)
        delta /= 2
    return X, best
