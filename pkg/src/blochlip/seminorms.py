"""Local dilatation, Bloch and Lipschitz numbers, and admissible two-point weights.

For a mapping ``f`` between weighted domains the Bloch number is

.. math::

    B_f = \\sup_x \\frac{\\tilde\\omega(f(x))}{\\omega(x)} d_f(x),

and, for an admissible two-point weight ``W``, the Lipschitz number is

.. math::

    L_f = \\sup_{x \\ne y} W(x, y) \\frac{|f(x) - f(y)|}{|x - y|}.

Both are estimated from below by sampling followed by local golden-section
refinement; :func:`verify_equality` compares the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import (
    Array,
    DistanceFn,
    Domain,
    DomainError,
    Weight,
    as_points,
    euclidean_distance,
    segment_weighted_length,
)
from .sampling import PairSampler, PointSampler, argmax_lex, golden_maximize, map_chunks

#: relative agreement required between exact and finite-difference derivatives
ORACLE_RTOL = 1e-4


# {{{ mappings

@dataclass(frozen=True)
class Mapping:
    """A vectorised map ``(n, m) -> (n, k)`` with an optional exact oracle for
    the operator norm of its differential."""

    func: Callable[[Array], Array]
    domain: Domain
    target_dim: int
    derivative_norm: Callable[[Array], Array] | None = None
    name: str = "custom"

    @property
    def dim(self) -> int:
        return self.domain.dim

    def __call__(self, points) -> Array:
        X = np.asarray(points, dtype=float)
        single = X.ndim == 1
        with np.errstate(over="ignore", invalid="ignore"):
            Y = np.asarray(self.func(np.atleast_2d(X)), dtype=float)
        Y = Y.reshape(len(np.atleast_2d(X)), self.target_dim)
        return Y[0] if single else Y

    def scaled(self, c: float) -> "Mapping":
        """The map ``c * f``."""
        oracle = self.derivative_norm
        return Mapping(lambda X: c * self.func(X), self.domain, self.target_dim,
                       None if oracle is None else (lambda X: abs(c) * oracle(X)),
                       name=f"{c:g}*{self.name}")

    def without_oracle(self) -> "Mapping":
        return Mapping(self.func, self.domain, self.target_dim, None, self.name)


def _to_complex(X: Array) -> Array:
    return X[:, 0] + 1j * X[:, 1]


def _to_plane(z: Array) -> Array:
    return np.column_stack([z.real, z.imag])


def complex_mapping(f: Callable, df: Callable | None, name: str,
                    domain: Domain | None = None) -> Mapping:
    """Wrap a holomorphic ``f`` (with derivative ``df``) as a planar mapping.

    For holomorphic maps the operator norm of the differential is ``|f'(z)|``.
    """
    domain = domain or Domain.ball(2)

    def func(X):
        with np.errstate(over="ignore", invalid="ignore"):
            return _to_plane(f(_to_complex(X)))

    oracle = None
    if df is not None:
        def oracle(X):
            with np.errstate(over="ignore", invalid="ignore"):
                return np.abs(df(_to_complex(X)))
    return Mapping(func, domain, 2, oracle, name)


def linear_mapping(A, b=None, domain: Domain | None = None, name: str = "linear") -> Mapping:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.zeros(A.shape[0]) if b is None else np.asarray(b, dtype=float)
    norm = np.linalg.norm(A, 2)
    domain = domain or Domain.ball(A.shape[1])
    return Mapping(lambda X: X @ A.T + b, domain, A.shape[0],
                   lambda X: np.full(len(X), norm), name)

# }}}


# {{{ local dilatation

def dilatation_radii(r0: float, count: int = 17) -> Array:
    """Geometric schedule ``r0 * 2**-j`` for ``j = 0 .. count - 1``."""
    return r0 * 0.5 ** np.arange(count)


def unit_directions(dim: int, count: int | None = None) -> Array:
    """Deterministic unit vectors: 16 angles in 2-D, a Fibonacci lattice above."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        n = count or 16
        t = 2 * math.pi * np.arange(n) / n
        return np.column_stack([np.cos(t), np.sin(t)])
    n = count or 8 * dim
    G = np.random.default_rng(12345).normal(size=(n, dim))
    if dim == 3:
        k = np.arange(n) + 0.5
        phi = np.arccos(1 - 2 * k / n)
        theta = math.pi * (1 + 5 ** 0.5) * k
        G = np.column_stack([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi),
                             np.cos(phi)])
    return G / np.linalg.norm(G, axis=1, keepdims=True)


def sampled_dilatation(f: Mapping, X, *, shells: int = 3, schedule: int = 17,
                       scale: float = 1e-2, directions: Array | None = None) -> Array:
    """Finite-difference estimate of the local dilatation at each row of *X*.

    The difference quotient ``|f(x + r u) - f(x)| / r`` is sampled over unit
    directions ``u`` and radii ``r_j = r_0 2^-j`` with ``r_0 = scale * clearance``;
    the estimate is the maximum over the last *shells* radii.  Each shell also
    fits a linear map to its quotients and uses its spectral norm, so
    anisotropic differentials are not underestimated between directions.
    """
    X = as_points(X, f.dim)
    clearance = f.domain.clearance(X)
    if np.any(clearance <= 0):
        raise DomainError("local dilatation needs interior points")
    clearance = np.where(np.isfinite(clearance), clearance,
                         np.maximum(1.0, np.linalg.norm(X, axis=1)))
    U = unit_directions(f.dim) if directions is None else directions
    radii = dilatation_radii(1.0, schedule)[-shells:]
    fx = f(X)
    pinv = np.linalg.pinv(U)  # least-squares fit J u_i ~ q_i
    best = np.zeros(len(X))
    for rj in radii:
        r = scale * clearance * rj
        P = X[:, None, :] + r[:, None, None] * U[None, :, :]
        fp = f(P.reshape(-1, f.dim)).reshape(len(X), len(U), f.target_dim)
        Q = (fp - fx[:, None, :]) / r[:, None, None]
        quot = np.linalg.norm(Q, axis=2).max(axis=1)
        finite = np.isfinite(quot)
        if not np.all(finite[np.isfinite(fx).all(axis=1)]):
            raise FloatingPointError("non-finite difference quotient: map not locally Lipschitz")
        shell = quot.copy()
        if finite.any():
            J = np.einsum("dn,xnk->xkd", pinv, Q[finite])
            shell[finite] = np.maximum(quot[finite], np.linalg.norm(J, ord=2, axis=(1, 2)))
        best = np.maximum(best, shell)
    return best


@dataclass(frozen=True)
class Dilatation:
    value: float
    sampled: float
    oracle: float | None

    @property
    def relative_mismatch(self) -> float | None:
        if self.oracle is None:
            return None
        return abs(self.sampled - self.oracle) / max(self.oracle, 1e-300)


def dilatation_estimate(f: Mapping, x, **kwargs) -> Dilatation:
    """Sampled dilatation at *x*, cross-checked against the oracle when present."""
    x = as_points(x, f.dim)
    sampled = float(sampled_dilatation(f, x, **kwargs)[0])
    if f.derivative_norm is None:
        return Dilatation(sampled, sampled, None)
    oracle = float(f.derivative_norm(x)[0])
    return Dilatation(oracle, sampled, oracle)


def local_dilatation(f: Mapping, x, **kwargs) -> float:
    """``limsup_{y -> x} |f(x) - f(y)| / |x - y|``: the oracle when available,
    otherwise the finite-difference estimate."""
    return dilatation_estimate(f, x, **kwargs).value


def dilatation_field(f: Mapping, X: Array, use_oracle: bool = True) -> Array:
    if use_oracle and f.derivative_norm is not None:
        with np.errstate(over="ignore", invalid="ignore"):
            return np.asarray(f.derivative_norm(X), dtype=float)
    return sampled_dilatation(f, X)

# }}}


# {{{ seminorm estimates

@dataclass(frozen=True)
class SeminormEstimate:
    value: float
    witness: Array
    samples: int
    kind: str
    nonfinite: int = 0

    def __float__(self) -> float:
        return self.value


def bloch_quantity(f: Mapping, omega: Weight, target: Weight, X: Array,
                   use_oracle: bool = True) -> Array:
    """``target(f(x)) / omega(x) * d_f(x)`` at each row of *X* (``nan`` where
    the expression cannot be evaluated)."""
    with np.errstate(all="ignore"):
        d = dilatation_field(f, X, use_oracle)
        ratio = target.unchecked(f(X)) / omega.unchecked(X)
        out = ratio * d
    # overflowed derivative with a finite weight ratio is a genuine +inf
    out = np.where((d == np.inf) & (ratio > 0) & np.isfinite(ratio), np.inf, out)
    out[~omega.domain.contains(X)] = np.nan
    return out


def _refine_top(values: Array, keys: Array, objective, delta: float, inside,
                top: int) -> tuple[Array, Array]:
    finite = np.flatnonzero(np.isfinite(values))
    if len(finite) == 0 or top == 0:
        return np.empty((0, keys.shape[1])), np.empty(0)
    order = finite[np.lexsort((*keys[finite].T[::-1], -values[finite]))][:top]
    return golden_maximize(objective, keys[order], delta, inside)


def bloch_number(f: Mapping, omega: Weight, target: Weight, sampler: PointSampler, *,
                 top: int = 8, use_oracle: bool = True) -> SeminormEstimate:
    """Lower estimate of the Bloch number: maximum over the sample plan, then
    golden-section refinement around the *top* best samples."""
    X = sampler.points()
    values = map_chunks(lambda Z: bloch_quantity(f, omega, target, Z, use_oracle), X)
    nonfinite = int(np.sum(np.isnan(values)))
    kind = "grid"
    if np.any(values == np.inf):
        i = argmax_lex(values, X)
        return SeminormEstimate(np.inf, X[i], len(X), kind, nonfinite)
    R, v = _refine_top(values, X, lambda Z: bloch_quantity(f, omega, target, Z, use_oracle),
                       sampler.spacing, sampler.inside, top)
    if len(v):
        X = np.vstack([X, R])
        values = np.concatenate([values, v])
        kind = "refined"
    values = np.where(np.isneginf(values), np.nan, values)
    i = argmax_lex(values, X)
    if i < 0:
        raise FloatingPointError("no sample produced a finite Bloch quantity")
    return SeminormEstimate(float(values[i]), X[i], len(X), kind, nonfinite)


def lipschitz_quotients(f: Mapping, W: "AdmissibleWeight", X: Array, Y: Array, *,
                        source: DistanceFn = euclidean_distance,
                        target: DistanceFn = euclidean_distance,
                        min_separation: float = 1e-10) -> Array:
    """``W(x, y) d(f(x), f(y)) / d(x, y)`` per row; ``nan`` for (near-)coincident
    pairs or where the expression cannot be evaluated."""
    with np.errstate(all="ignore"):
        dx = source(X, Y)
        q = W(X, Y) * target(f(X), f(Y)) / dx
    q = np.where(dx > min_separation, q, np.nan)
    return np.where(np.isfinite(q), q, np.nan)


def lipschitz_number(f: Mapping, W: "AdmissibleWeight", sampler: PairSampler, *,
                     top: int = 8, source: DistanceFn = euclidean_distance,
                     target: DistanceFn = euclidean_distance) -> SeminormEstimate:
    """Lower estimate of the Lipschitz number over sampled pairs, refined
    around the *top* best pairs.  The witness is the pair stacked as ``(2, m)``."""
    m = f.dim
    X, Y = sampler.pairs()
    values = map_chunks(lambda A, B: lipschitz_quotients(f, W, A, B, source=source,
                                                         target=target), X, Y)
    keys = np.hstack([X, Y])

    def objective(Z):
        return lipschitz_quotients(f, W, Z[:, :m], Z[:, m:], source=source, target=target)

    def inside(Z):
        return sampler.inside(Z[:, :m]) & sampler.inside(Z[:, m:])

    R, v = _refine_top(values, keys, objective, sampler.spacing, inside, top)
    kind = "random"
    if len(v):
        keys = np.vstack([keys, R])
        values = np.concatenate([values, np.where(np.isneginf(v), np.nan, v)])
        kind = "refined"
    i = argmax_lex(values, keys)
    if i < 0:
        raise FloatingPointError("no pair produced a finite Lipschitz quotient")
    return SeminormEstimate(float(values[i]), keys[i].reshape(2, m), len(keys), kind,
                            int(np.sum(np.isnan(values))))

# }}}


# {{{ admissible weights

@dataclass(frozen=True)
class AdmissibleWeight:
    """Symmetric positive two-point weight ``W(x, y)``, vectorised over rows."""

    func: Callable[[Array, Array], Array]
    kind: str
    symmetric: bool = True

    def __call__(self, X, Y) -> Array:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        with np.errstate(over="ignore", invalid="ignore"):
            if self.symmetric:
                return self.func(X, Y)
            return np.maximum(self.func(X, Y), self.func(Y, X))

    def scaled(self, c: float) -> "AdmissibleWeight":
        return AdmissibleWeight(lambda X, Y: c * self.func(X, Y), "custom", self.symmetric)


def custom_W(func: Callable[[Array, Array], Array]) -> AdmissibleWeight:
    """Wrap a possibly asymmetric weight; it is symmetrised by ``max{W(x,y), W(y,x)}``."""
    return AdmissibleWeight(func, "custom", symmetric=False)


def _ball_factor(X: Array) -> Array:
    s = 1.0 - np.einsum("ij,ij->i", X, X)
    if np.any(s <= 0):
        raise DomainError("points must lie inside the open unit ball")
    return np.sqrt(s)


def holland_walsh_W() -> AdmissibleWeight:
    """``sqrt(1 - |x|^2) sqrt(1 - |y|^2)``, admissible for every mapping with the
    hyperbolic source weight and unit target weight."""
    return AdmissibleWeight(lambda X, Y: _ball_factor(X) * _ball_factor(Y), "holland_walsh")


@dataclass(frozen=True)
class OperatorMonotoneProfile:
    """A scalar profile ``phi`` on ``(-1, 1)`` with derivative ``dphi``."""

    phi: Callable[[Array], Array]
    dphi: Callable[[Array], Array]
    name: str = "custom"

    def inequality_gap(self, a, b) -> Array:
        """``sqrt(phi'(a) phi'(b)) (b - a) - (phi(b) - phi(a))``; nonnegative for
        operator monotone profiles."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return np.sqrt(self.dphi(a) * self.dphi(b)) * (b - a) - (self.phi(b) - self.phi(a))


def atanh_profile() -> OperatorMonotoneProfile:
    """``phi(t) = 1/2 log((1 + t) / (1 - t))``, so ``phi'(t) = 1 / (1 - t^2)``."""
    return OperatorMonotoneProfile(np.arctanh, lambda t: 1.0 / (1.0 - np.square(t)), "atanh")


def identity_profile() -> OperatorMonotoneProfile:
    return OperatorMonotoneProfile(lambda t: np.asarray(t, dtype=float),
                                   lambda t: np.ones_like(np.asarray(t, dtype=float)),
                                   "identity")


def profile_weight(profile: OperatorMonotoneProfile, dim: int = 2) -> Weight:
    """The source weight ``phi'(|x|)`` on the unit ball."""
    return Weight(lambda X: profile.dphi(np.linalg.norm(X, axis=1)), Domain.ball(dim),
                  name=f"dphi[{profile.name}]", monotone_in_norm=True)


def jocic_W(profile: OperatorMonotoneProfile) -> AdmissibleWeight:
    """``1 / (sqrt(phi'(|x|)) sqrt(phi'(|y|)))`` for the weight ``phi'(|x|)``."""

    def func(X, Y):
        _ball_factor(X), _ball_factor(Y)
        a = profile.dphi(np.linalg.norm(X, axis=1))
        b = profile.dphi(np.linalg.norm(Y, axis=1))
        if np.any(a <= 0) or np.any(b <= 0):
            raise ValueError(f"profile {profile.name!r} has phi' <= 0 on the sample")
        return 1.0 / (np.sqrt(a) * np.sqrt(b))

    return AdmissibleWeight(func, f"jocic({profile.name})")


def minmax_W(omega: Weight, target: Weight, f: Mapping) -> AdmissibleWeight:
    """``min{target(f(x)), target(f(y))} / max{omega(x), omega(y)}``.

    Only claimed admissible for weights monotone in the norm on convex domains.
    """
    for w in (omega, target):
        if not (w.monotone_in_norm and w.convex_domain):
            raise ValueError(f"minmax_W needs a norm-monotone weight on a convex domain; "
                             f"{w.name!r} is not flagged as one")

    def func(X, Y):
        t = np.minimum(target.unchecked(f(X)), target.unchecked(f(Y)))
        return t / np.maximum(omega(X), omega(Y))

    return AdmissibleWeight(func, "minmax")


def normal_W(f: Mapping) -> AdmissibleWeight:
    """``sqrt(1-|x|^2) sqrt(1-|y|^2) / (sqrt(1+|f(x)|^2) sqrt(1+|f(y)|^2))`` for the
    hyperbolic source and spherical target weights."""
    if f.target_dim != 2:
        raise ValueError("normal_W needs a planar target")

    def func(X, Y):
        fx, fy = f(X), f(Y)
        den = np.sqrt(1 + np.einsum("ij,ij->i", fx, fx)) * np.sqrt(1 + np.einsum("ij,ij->i", fy, fy))
        return _ball_factor(X) * _ball_factor(Y) / den

    return AdmissibleWeight(func, "normal_spherical")


def normal_minmax_W(f: Mapping) -> AdmissibleWeight:
    """The min/max variant ``min{1-|x|^2, 1-|y|^2} / max{1+|f(x)|^2, 1+|f(y)|^2}``.

    By ``min{A, B} <= sqrt(A) sqrt(B) <= max{A, B}`` it never exceeds
    :func:`normal_W`, and it has the same diagonal.  Taking square roots inside
    the min and max instead would give a larger function with the wrong
    diagonal ``sqrt(1-|x|^2) / sqrt(1+|f(x)|^2)``.
    """

    def func(X, Y):
        fx, fy = f(X), f(Y)
        _ball_factor(X), _ball_factor(Y)
        num = np.minimum(1 - np.einsum("ij,ij->i", X, X), 1 - np.einsum("ij,ij->i", Y, Y))
        den = np.maximum(1 + np.einsum("ij,ij->i", fx, fx), 1 + np.einsum("ij,ij->i", fy, fy))
        return num / den

    return AdmissibleWeight(func, "normal_minmax")


def canonical_W(f: Mapping, omega: Weight, target: Weight, d_omega: DistanceFn,
                d_target: DistanceFn, *, source: DistanceFn = euclidean_distance,
                target_metric: DistanceFn = euclidean_distance) -> AdmissibleWeight:
    """The admissible weight built from the weighted distances themselves:
    the weight ratio on the diagonal, the ratio of distance quotients when
    ``f(x) != f(y)``, and ``target(f(x)) / (d_omega / d)`` when ``f(x) == f(y)``."""

    def func(X, Y):
        fx, fy = f(X), f(Y)
        out = target.unchecked(fx) / omega(X)
        off = np.any(X != Y, axis=1)
        if not off.any():
            return out
        Xo, Yo, fxo, fyo = X[off], Y[off], fx[off], fy[off]
        source_q = d_omega(Xo, Yo) / source(Xo, Yo)
        dY = target_metric(fxo, fyo)
        same = dY == 0
        val = np.empty(len(Xo))
        with np.errstate(invalid="ignore", divide="ignore"):
            val[~same] = (d_target(fxo[~same], fyo[~same]) / dY[~same]) / source_q[~same]
        val[same] = target.unchecked(fxo[same]) / source_q[same]
        out[off] = val
        return out

    return AdmissibleWeight(func, "canonical")

# }}}


# {{{ checks

@dataclass
class AdmissibilityReport:
    kind: str
    pairs: int
    max_asymmetry: float
    max_diagonal_error: float
    liminf_min_ratio: float
    distance_violations: int
    worst_distance_excess: float
    worst_pair: Array | None
    tolerance: float = 1e-12

    @property
    def symmetry(self) -> bool:
        return self.max_asymmetry <= self.tolerance

    @property
    def diagonal(self) -> bool:
        return self.max_diagonal_error <= self.tolerance

    @property
    def liminf(self) -> bool:
        return self.liminf_min_ratio >= 1 - 1e-6

    @property
    def distance(self) -> bool:
        return self.distance_violations == 0

    @property
    def passed(self) -> bool:
        return self.symmetry and self.diagonal and self.liminf and self.distance

    def conditions(self) -> dict[str, bool]:
        return {"symmetry": self.symmetry, "diagonal": self.diagonal,
                "liminf": self.liminf, "distance": self.distance}


def liminf_envelope(W: AdmissibleWeight, X: Array, domain: Domain, *, shells: int = 3,
                    schedule: int = 17, scale: float = 1e-2) -> Array:
    """Estimated ``liminf_{y -> x} W(x, y) / W(x, x)`` per point.

    The inferior envelope ``min_u W(x, x + r u)`` is sampled on the trailing
    radii of the shrinking schedule.  Because the envelope of a smooth weight
    approaches its limit linearly in ``r``, the estimate is the larger of the
    finest shell and its Richardson extrapolation from the last two shells.
    """
    clearance = domain.clearance(X)
    clearance = np.where(np.isfinite(clearance), clearance, 1.0)
    U = unit_directions(domain.dim)
    diag = W(X, X)
    envelopes = []
    for rj in dilatation_radii(1.0, schedule)[-shells:]:
        r = scale * clearance * rj
        P = (X[:, None, :] + r[:, None, None] * U[None, :, :]).reshape(-1, domain.dim)
        Xr = np.repeat(X, len(U), axis=0)
        envelopes.append(W(Xr, P).reshape(len(X), len(U)).min(axis=1))
    low = envelopes[-1]
    if len(envelopes) > 1:
        low = np.maximum(low, 2 * envelopes[-1] - envelopes[-2])
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(diag > 0, low / diag, np.where(low >= 0, 1.0, -np.inf))


def admissibility_check(W: AdmissibleWeight, f: Mapping, omega: Weight, target: Weight,
                        d_omega: DistanceFn, d_target: DistanceFn, X: Array, Y: Array, *,
                        source: DistanceFn = euclidean_distance,
                        target_metric: DistanceFn = euclidean_distance,
                        distance_rtol: float = 1e-9, tol: float = 1e-12,
                        liminf_points: int = 100) -> AdmissibilityReport:
    """Check the four admissibility conditions of *W* on sampled pairs.

    *distance_rtol* is the relative error allowed in the weighted-distance
    quotient.  The default covers the cancellation in ``|x - y|`` for pairs
    separated by ``1e-7``; pass the solver error for numerical distances.
    """
    X = as_points(X, f.dim)
    Y = as_points(Y, f.dim)
    with np.errstate(all="ignore"):
        wxy, wyx = W(X, Y), W(Y, X)
        asym = float(np.max(np.abs(wxy - wyx)))
        expected = target.unchecked(f(X)) / omega(X)
        diag_err = float(np.max(np.abs(W(X, X) - expected)))

        ratios = liminf_envelope(W, X[:liminf_points], f.domain)
        lim = float(np.min(ratios))

        off = np.any(X != Y, axis=1)
        Xo, Yo = X[off], Y[off]
        fx, fy = f(Xo), f(Yo)
        lhs = wxy[off] * target_metric(fx, fy) / source(Xo, Yo)
        rhs = d_target(fx, fy) / d_omega(Xo, Yo)
        excess = lhs - rhs * (1 + distance_rtol) - tol
    bad = np.flatnonzero(excess > 0)
    worst = None
    worst_excess = float(np.max(excess, initial=-np.inf))
    if len(bad):
        k = bad[np.argmax(excess[bad])]
        worst = np.vstack([Xo[k], Yo[k]])
    return AdmissibilityReport(W.kind, len(X), asym, diag_err, lim, len(bad),
                               worst_excess, worst, tol)


@dataclass
class EqualityReport:
    bloch: SeminormEstimate
    lipschitz: SeminormEstimate
    gap: float
    slack: float
    bound_violations: int
    corollary_violations: int | None
    quotients: Array = field(repr=False)
    pairs: tuple[Array, Array] = field(repr=False)

    @property
    def passed(self) -> bool:
        return self.bound_violations == 0 and not self.corollary_violations


def verify_equality(f: Mapping, omega: Weight, target: Weight, W: AdmissibleWeight,
                    points: PointSampler, pairs: PairSampler, *, slack: float = 0.05,
                    d_omega: DistanceFn | None = None, d_target: DistanceFn | None = None,
                    top: int = 8) -> EqualityReport:
    """Estimate both numbers on matched budgets and compare them.

    Besides the relative gap, counts sampled pairs whose Lipschitz quotient
    exceeds ``B (1 + slack)`` and, when both weighted distances are given,
    pairs breaking ``d_target(f(x), f(y)) <= B (1 + slack) d_omega(x, y)``.
    """
    B = bloch_number(f, omega, target, points, top=top)
    L = lipschitz_number(f, W, pairs, top=top)
    gap = abs(B.value - L.value) / max(B.value, L.value, 1e-300)
    X, Y = pairs.pairs()
    q = map_chunks(lambda A, C: lipschitz_quotients(f, W, A, C), X, Y)
    bound = B.value * (1 + slack)
    violations = int(np.sum(q > bound))
    corollary = None
    if d_omega is not None and d_target is not None:
        off = np.any(X != Y, axis=1)
        with np.errstate(all="ignore"):
            lhs = d_target(f(X[off]), f(Y[off]))
            rhs = bound * d_omega(X[off], Y[off])
        corollary = int(np.sum(lhs > rhs))
    return EqualityReport(B, L, gap, slack, violations, corollary, q, (X, Y))


def scalar_inequality_violations(profile: OperatorMonotoneProfile, a, b,
                                 tol: float = 1e-12) -> int:
    gap = profile.inequality_gap(a, b)
    scale = np.maximum(1.0, np.abs(profile.phi(np.asarray(b)) - profile.phi(np.asarray(a))))
    return int(np.sum(gap < -tol * scale))


def jocic_segment_bound(profile: OperatorMonotoneProfile, x, y, tol: float = 1e-10) -> tuple[float, float]:
    """Weighted length of ``[x, y]`` for ``phi'(|z|)`` and the bound
    ``|x - y| sqrt(phi'(|x|)) sqrt(phi'(|y|))``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = profile_weight(profile, len(x))
    length = segment_weighted_length(w, x, y, tol)
    bound = float(np.linalg.norm(x - y) * np.sqrt(profile.dphi(np.linalg.norm(x))
                                                    * profile.dphi(np.linalg.norm(y))))
    return length, bound

# }}}
