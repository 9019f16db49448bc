"""Curves, partitions and weighted curve lengths in R^m.

Curves are polylines parameterised over ``[0, 1]``.  Lengths are computed as
suprema of chord sums over nested dyadic partitions, and weighted lengths as
limits of Riemann--Stieltjes sums over the same partitions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

Array = np.ndarray
DistanceFn = Callable[[Array, Array], Array]

#: hard cap on the number of knots used by the refinement loops
MAX_KNOTS = 2**20


class DomainError(ValueError):
    """A point lies outside the domain where an object is defined."""


class ConvergenceError(RuntimeError):
    """A refinement loop hit its budget before reaching the tolerance."""

    def __init__(self, message: str, estimate: "LengthEstimate | None" = None):
        super().__init__(message)
        self.estimate = estimate


def as_points(points, dim: int | None = None) -> Array:
    """Return *points* as a float array of shape ``(n, m)``."""
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError(f"expected points of shape (n, m), got {X.shape}")
    if dim is not None and X.shape[1] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {X.shape[1]}")
    if not np.all(np.isfinite(X)):
        raise ValueError("point coordinates must be finite")
    return X


def euclidean_distance(X, Y) -> Array:
    """Row-wise Euclidean distance between two point arrays."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape[-1] != Y.shape[-1]:
        raise ValueError(f"dimension mismatch: {X.shape[-1]} != {Y.shape[-1]}")
    D = X - Y
    out = np.linalg.norm(D, axis=-1)
    # squares of very small or very large components leave the float range;
    # rescale those rows by their largest component
    scale = np.max(np.abs(D), axis=-1)
    extreme = (scale > 0) & ((scale < 1e-150) | (scale > 1e150))
    if np.any(extreme):
        safe = np.where(extreme, scale, 1.0)[..., None]
        out = np.where(extreme, safe[..., 0] * np.linalg.norm(D / safe, axis=-1), out)
    return out


# {{{ domains

@dataclass(frozen=True)
class Domain:
    """Where points, weights and mappings live.

    ``kind`` is one of ``"ball"`` (open ball of *radius* about the origin),
    ``"space"`` (all of R^m) or ``"box"`` (the open box ``lower < x < upper``).
    For balls, *margin* is the distance kept from the boundary by numerical
    routines, so the safe region is ``|x| <= radius - margin``.
    """

    kind: str
    dim: int
    radius: float = 1.0
    margin: float = 0.05
    lower: tuple[float, ...] | None = None
    upper: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("ball", "space", "box"):
            raise ValueError(f"unknown domain kind: {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if self.kind == "ball" and not 0 < self.margin < self.radius:
            raise ValueError(f"ball margin must lie in (0, {self.radius})")
        if self.kind == "box":
            if self.lower is None or self.upper is None:
                raise ValueError("box domains need lower and upper corners")
            if len(self.lower) != self.dim or len(self.upper) != self.dim:
                raise ValueError("box corners must match the dimension")
            if not all(a < b for a, b in zip(self.lower, self.upper)):
                raise ValueError("box corners must satisfy lower < upper")

    @classmethod
    def ball(cls, dim: int = 2, margin: float = 0.05, radius: float = 1.0) -> "Domain":
        return cls("ball", dim, radius=radius, margin=margin)

    @classmethod
    def space(cls, dim: int = 2) -> "Domain":
        return cls("space", dim)

    @classmethod
    def box(cls, lower, upper) -> "Domain":
        lower = tuple(float(v) for v in lower)
        upper = tuple(float(v) for v in upper)
        return cls("box", len(lower), lower=lower, upper=upper)

    @property
    def convex(self) -> bool:
        return True

    @property
    def safe_radius(self) -> float:
        return self.radius - self.margin if self.kind == "ball" else np.inf

    def with_margin(self, margin: float) -> "Domain":
        return Domain(self.kind, self.dim, self.radius, margin, self.lower, self.upper)

    def contains(self, points, safe: bool = False) -> Array:
        """Boolean mask of the points lying in the (safe) domain."""
        X = np.atleast_2d(np.asarray(points, dtype=float))
        if X.shape[1] != self.dim:
            raise ValueError(f"dimension mismatch: expected {self.dim}, got {X.shape[1]}")
        finite = np.all(np.isfinite(X), axis=1)
        if self.kind == "space":
            return finite
        if self.kind == "box":
            lo, hi = np.array(self.lower), np.array(self.upper)
            return finite & np.all((X > lo) & (X < hi), axis=1)
        r = np.linalg.norm(X, axis=1)
        if safe:
            return finite & (r <= self.safe_radius)
        return finite & (r < self.radius)

    def clearance(self, points) -> Array:
        """Distance from each point to the domain boundary (``inf`` for R^m)."""
        X = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == "space":
            return np.full(len(X), np.inf)
        if self.kind == "box":
            lo, hi = np.array(self.lower), np.array(self.upper)
            return np.minimum(X - lo, hi - X).min(axis=1)
        return self.radius - np.linalg.norm(X, axis=1)

# }}}


# {{{ weights

@dataclass(frozen=True)
class Weight:
    """A positive continuous density on a domain.

    *func* is vectorised: it maps an ``(n, m)`` array to ``n`` values.
    """

    func: Callable[[Array], Array]
    domain: Domain
    name: str = "custom"
    monotone_in_norm: bool = False
    convex_domain: bool = True

    def __call__(self, points) -> Array | float:
        X = np.asarray(points, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        inside = self.domain.contains(X)
        if not inside.all():
            bad = X[~inside][0]
            raise DomainError(f"weight {self.name!r} evaluated outside its domain at {bad}")
        values = np.asarray(self.func(X), dtype=float)
        if not (np.all(np.isfinite(values)) and np.all(values > 0)):
            raise DomainError(f"weight {self.name!r} is not positive and finite on the input")
        return float(values[0]) if single else values

    def unchecked(self, points) -> Array:
        """Evaluate without validation; outside points yield ``inf``."""
        X = np.atleast_2d(np.asarray(points, dtype=float))
        inside = self.domain.contains(X)
        out = np.full(len(X), np.inf)
        if inside.any():
            with np.errstate(all="ignore"):
                out[inside] = self.func(X[inside])
        return out

    def minimum(self, points) -> float:
        return float(np.min(self(np.atleast_2d(points))))


def constant_weight(c: float = 1.0, dim: int = 2, domain: Domain | None = None) -> Weight:
    if not c > 0:
        raise ValueError("constant weight must be positive")
    domain = domain or Domain.space(dim)
    name = "unit" if c == 1.0 else f"constant({c:g})"
    return Weight(lambda X: np.full(len(X), float(c)), domain, name=name,
                  monotone_in_norm=True)


def unit_weight(dim: int = 2, domain: Domain | None = None) -> Weight:
    return constant_weight(1.0, dim, domain)


def hyperbolic_weight(dim: int = 2, margin: float = 0.05) -> Weight:
    """``1 / (1 - |x|^2)`` on the unit ball."""
    return Weight(lambda X: 1.0 / (1.0 - np.einsum("ij,ij->i", X, X)),
                  Domain.ball(dim, margin), name="hyperbolic", monotone_in_norm=True)


def spherical_weight(dim: int = 2) -> Weight:
    """``1 / (1 + |z|^2)`` on the whole space."""
    return Weight(lambda X: 1.0 / (1.0 + np.einsum("ij,ij->i", X, X)),
                  Domain.space(dim), name="spherical", monotone_in_norm=True)

# }}}


# {{{ partitions and curves

@dataclass(frozen=True, eq=False)
class Partition:
    """Knots ``0 = t_0 < ... < t_n = 1`` with optional tags ``t_{i-1} <= s_i <= t_i``."""

    knots: Array
    tags: Array | None = None

    def __post_init__(self):
        t = np.array(self.knots, dtype=float)
        if t.ndim != 1 or len(t) < 2:
            raise ValueError("a partition needs at least two knots")
        if t[0] != 0.0 or t[-1] != 1.0:
            raise ValueError("partition knots must start at 0 and end at 1")
        if not np.all(np.diff(t) > 0):
            raise ValueError("partition knots must be strictly increasing")
        t.flags.writeable = False
        object.__setattr__(self, "knots", t)
        if self.tags is not None:
            s = np.array(self.tags, dtype=float)
            if s.shape != (len(t) - 1,):
                raise ValueError("need exactly one tag per partition interval")
            if np.any(s < t[:-1]) or np.any(s > t[1:]):
                raise ValueError("tags must lie in their intervals")
            s.flags.writeable = False
            object.__setattr__(self, "tags", s)

    @classmethod
    def uniform(cls, n: int) -> "Partition":
        return cls(np.linspace(0.0, 1.0, n + 1))

    def __len__(self) -> int:
        return len(self.knots) - 1

    @property
    def diameter(self) -> float:
        return float(np.max(np.diff(self.knots)))

    def refine(self) -> "Partition":
        """Bisect every interval.  Tags are dropped."""
        t = self.knots
        out = np.empty(2 * len(t) - 1)
        out[::2] = t
        out[1::2] = 0.5 * (t[:-1] + t[1:])
        return Partition(out)

    def with_tags(self, tags) -> "Partition":
        return Partition(self.knots, tags)

    def left_tags(self) -> "Partition":
        return Partition(self.knots, self.knots[:-1])

    def midpoint_tags(self) -> "Partition":
        return Partition(self.knots, 0.5 * (self.knots[:-1] + self.knots[1:]))

    def tagged(self, rule: str) -> "Partition":
        if rule == "left":
            return self.left_tags()
        if rule == "midpoint":
            return self.midpoint_tags()
        raise ValueError(f"unknown tag rule: {rule!r}")

    def is_refinement_of(self, other: "Partition") -> bool:
        return bool(np.all(np.isin(other.knots, self.knots)))


@dataclass(frozen=True, eq=False)
class Curve:
    """Piecewise-linear curve through *vertices* at parameter values *params*."""

    vertices: Array
    params: Array

    def __post_init__(self):
        V = as_points(self.vertices)
        t = np.array(self.params, dtype=float)
        if len(V) < 2:
            raise ValueError("a curve needs at least two vertices")
        if t.shape != (len(V),):
            raise ValueError("need one parameter value per vertex")
        if t[0] != 0.0 or t[-1] != 1.0 or not np.all(np.diff(t) > 0):
            raise ValueError("parameters must increase strictly from 0 to 1")
        V = V.copy()
        V.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "params", t)

    @classmethod
    def from_points(cls, points, params=None) -> "Curve":
        V = as_points(points)
        if params is None:
            params = np.linspace(0.0, 1.0, len(V))
        return cls(V, params)

    @classmethod
    def segment(cls, x, y) -> "Curve":
        return cls.from_points([x, y])

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def start(self) -> Array:
        return self.vertices[0]

    @property
    def end(self) -> Array:
        return self.vertices[-1]

    def __call__(self, t) -> Array:
        t = np.asarray(t, dtype=float)
        if np.any((t < 0) | (t > 1)):
            raise ValueError("curve parameter outside [0, 1]")
        flat = np.atleast_1d(t)
        out = np.column_stack([np.interp(flat, self.params, self.vertices[:, k])
                               for k in range(self.dim)])
        return out[0] if t.ndim == 0 else out

    def reversed(self) -> "Curve":
        return Curve(self.vertices[::-1], 1.0 - self.params[::-1])

    def map(self, f: Callable[[Array], Array]) -> "Curve":
        """Image polyline ``f(vertices)`` with the same parameters."""
        return Curve(np.atleast_2d(f(self.vertices)), self.params)

    def densify(self, per_segment: int) -> "Curve":
        """Insert ``per_segment - 1`` equally spaced points in every segment."""
        if per_segment < 1:
            raise ValueError("per_segment must be >= 1")
        s = np.linspace(0.0, 1.0, per_segment + 1)[:-1]
        t0, t1 = self.params[:-1], self.params[1:]
        t = (t0[:, None] + s[None, :] * (t1 - t0)[:, None]).ravel()
        t = np.append(t, 1.0)
        return Curve(self(t), t)


def concat(first: Curve, second: Curve) -> Curve:
    """Union of two curves: ``first(2t)`` on ``[0, 1/2]``, ``second(2t - 1)`` after."""
    if first.dim != second.dim:
        raise ValueError("cannot concatenate curves of different dimension")
    if not np.array_equal(first.end, second.start):
        raise ValueError(f"endpoint mismatch: {first.end} != {second.start}")
    V = np.vstack([first.vertices, second.vertices[1:]])
    t = np.concatenate([0.5 * first.params, 0.5 + 0.5 * second.params[1:]])
    return Curve(V, t)

# }}}


# {{{ lengths

@dataclass(frozen=True)
class LengthEstimate:
    value: float
    tolerance: float
    knots: int

    def __float__(self) -> float:
        return self.value


def polygonal_length(curve: Curve, partition: Partition,
                     metric: DistanceFn = euclidean_distance) -> float:
    r"""Chord sum :math:`\sum_i d(\gamma(t_{i-1}), \gamma(t_i))`.

    Runs of knots inside one linear piece of the polyline are measured as a
    single chord.  For the Euclidean metric this is the same sum in exact
    arithmetic, and it makes refinement inside a straight piece leave the
    floating-point value unchanged, so refinement monotonicity holds exactly.
    """
    t = partition.knots
    P = curve(t)
    if metric is euclidean_distance:
        params = curve.params
        left = np.searchsorted(params, t[:-1], side="right") - 1
        right = np.searchsorted(params, t[1:], side="left") - 1
        piece = np.where(left == right, left, -1 - np.arange(len(left)))
        keep = np.concatenate([[True], piece[1:] != piece[:-1], [True]])
        P = P[keep]
    return float(np.sum(metric(P[:-1], P[1:])))


def stieltjes_sum(weight: Weight, curve: Curve, partition: Partition,
                  metric: DistanceFn = euclidean_distance) -> float:
    """Riemann--Stieltjes sum of *weight* along *curve* on a tagged partition."""
    if partition.tags is None:
        raise ValueError("stieltjes_sum needs a tagged partition")
    P = curve(partition.knots)
    w = weight(curve(partition.tags))
    return float(np.sum(w * metric(P[:-1], P[1:])))


def _refine_until(total: Callable[[Partition], float], start: Partition,
                  tol: float, max_knots: int) -> LengthEstimate:
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    T = start
    prev = total(T)
    while True:
        if 2 * len(T) + 1 > max_knots:
            raise ConvergenceError(
                f"no convergence to {tol:g} within {max_knots} knots",
                LengthEstimate(prev, np.inf, len(T) + 1))
        T = T.refine()
        value = total(T)
        diff = abs(value - prev)
        if diff < tol:
            return LengthEstimate(value, diff, len(T) + 1)
        prev = value


def curve_length(curve: Curve, tol: float = 1e-9, *,
                 metric: DistanceFn = euclidean_distance,
                 max_knots: int = MAX_KNOTS) -> LengthEstimate:
    """Length of *curve* as the limit of chord sums over bisected partitions.

    The first partition is the curve's own vertex parameters, so polylines are
    measured exactly; every later sum is a refinement and hence no smaller.
    """
    return _refine_until(lambda T: polygonal_length(curve, T, metric),
                         Partition(curve.params), tol, max_knots)


def weighted_length(weight: Weight, curve: Curve, tol: float = 1e-6, *,
                    tags: str = "left", metric: DistanceFn = euclidean_distance,
                    max_knots: int = MAX_KNOTS) -> LengthEstimate:
    """Weighted length of *curve*: Stieltjes sums over bisected partitions
    until two successive sums agree to *tol*."""
    if not weight.domain.contains(curve.vertices).all():
        raise DomainError("curve leaves the weight domain")
    return _refine_until(lambda T: stieltjes_sum(weight, curve, T.tagged(tags), metric),
                         Partition(curve.params), tol, max_knots)


def segment_weighted_length(weight: Weight, x, y, tol: float = 1e-10) -> float:
    """Weighted length of the segment ``[x, y]``: ``|x - y| * int_0^1 w((1-t)x + ty) dt``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("dimension mismatch")
    # both domains are convex, so checking the endpoints covers the segment
    weight(np.vstack([x, y]))
    length = float(np.linalg.norm(x - y))
    if length == 0.0:
        return 0.0
    value, _ = integrate.quad(lambda t: weight((1 - t) * x + t * y), 0.0, 1.0,
                              epsabs=tol / length, epsrel=tol, limit=200)
    return length * value


_GAUSS_CACHE: dict[int, tuple[Array, Array]] = {}


def _gauss_legendre(order: int) -> tuple[Array, Array]:
    if order not in _GAUSS_CACHE:
        s, w = np.polynomial.legendre.leggauss(order)
        _GAUSS_CACHE[order] = (0.5 * (s + 1.0), 0.5 * w)
    return _GAUSS_CACHE[order]


def segment_weighted_lengths(weight: Weight, X, Y, order: int = 8,
                             checked: bool = True) -> Array:
    """Vectorised fixed-order Gauss--Legendre version of
    :func:`segment_weighted_length` for many segments at once.

    With ``checked=False`` segments leaving the domain get ``inf``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    s, w = _gauss_legendre(order)
    Z = X[:, None, :] + s[None, :, None] * (Y - X)[:, None, :]
    flat = Z.reshape(-1, X.shape[1])
    values = weight(flat) if checked else weight.unchecked(flat)
    integral = values.reshape(len(X), order) @ w
    lengths = np.linalg.norm(Y - X, axis=1)
    with np.errstate(invalid="ignore"):
        out = lengths * integral
    out[lengths == 0] = 0.0
    return out

# }}}
