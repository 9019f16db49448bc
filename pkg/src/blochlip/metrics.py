"""Weighted distances: closed forms and a graph-based geodesic solver.

The solver discretises the safe part of a domain with a uniform grid, joins
grid nodes along a fixed stencil of primitive offsets, prices every edge by
its weighted length and runs Dijkstra between the query points.  The graph
path is then smoothed (midpoint insertion, coordinate-wise golden-section
moves, then a conjugate-gradient polish of the whole polyline).  The result is
always a feasible curve, so reported distances are upper bounds of the
infimum.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, sparse
from scipy.sparse import csgraph
from scipy.spatial import cKDTree

from .geometry import (
    Array,
    Curve,
    DistanceFn,
    Domain,
    DomainError,
    Weight,
    as_points,
    euclidean_distance,
    segment_weighted_lengths,
)

DomainDescriptor = Domain

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class DisconnectedError(RuntimeError):
    """The discretisation graph does not connect the query points."""


# {{{ closed forms

def _sq(X: Array) -> Array:
    return np.einsum("...i,...i->...", X, X)


def hyperbolic_distance(x, y) -> Array | float:
    r"""Hyperbolic distance in the unit ball for the density ``1/(1-|x|^2)``.

    .. math::

        D_h(x, y) = \operatorname{asinh}
            \frac{|x - y|}{\sqrt{1 - |x|^2}\sqrt{1 - |y|^2}}
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise ValueError("dimension mismatch")
    sx, sy = 1.0 - _sq(x), 1.0 - _sq(y)
    if np.any(sx <= 0) or np.any(sy <= 0):
        raise DomainError("hyperbolic distance needs points inside the open unit ball")
    d = np.arcsinh(euclidean_distance(x, y) / np.sqrt(sx * sy))
    return float(d) if np.ndim(d) == 0 else d


def chordal_distance(z, w) -> Array | float:
    r"""Chordal distance ``|z - w| / (sqrt(1+|z|^2) sqrt(1+|w|^2))`` in the plane."""
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    if z.shape[-1] != 2 or w.shape[-1] != 2:
        raise ValueError("chordal distance is defined for planar points")
    d = euclidean_distance(z, w) / np.sqrt((1.0 + _sq(z)) * (1.0 + _sq(w)))
    return float(d) if np.ndim(d) == 0 else d


def spherical_distance(z, w) -> Array | float:
    """Geodesic distance for the density ``1/(1+|z|^2)``: ``arcsin`` of the chordal one.

    The density is the round metric of a sphere of diameter 1, whose chords are
    given by :func:`chordal_distance`.
    """
    d = np.arcsin(np.clip(chordal_distance(z, w), 0.0, 1.0))
    return float(d) if np.ndim(d) == 0 else d

# }}}


# {{{ solver

@dataclass(frozen=True)
class SolverConfig:
    """Discretisation settings for :class:`GeodesicSolver`.

    *connectivity* counts the stencil offsets per node (16 in 2-D means all
    primitive offsets of Chebyshev radius 2).  *window* is the half-width of the
    computational box used for unbounded domains.
    """

    resolution: int = 64
    connectivity: int | None = None
    smoothing_passes: int = 4
    tolerance: float = 1e-6
    quadrature_order: int = 8
    window: float | None = None
    polish_iterations: int = 300

    def stencil_size(self, dim: int) -> int:
        if self.connectivity is not None:
            return self.connectivity
        return {1: 2, 2: 16}.get(dim, 26)

    def validate(self, dim: int) -> None:
        if self.resolution < 4:
            raise ValueError("resolution must be >= 4")
        if self.stencil_size(dim) < 2 * dim:
            raise ValueError(f"connectivity must be >= {2 * dim}")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.smoothing_passes < 0:
            raise ValueError("smoothing_passes must be >= 0")


@dataclass(frozen=True)
class GeodesicResult:
    distance: float
    witness: Curve
    graph_distance: float
    nodes: int
    smoothing_passes: int
    error: float


def stencil(dim: int, size: int) -> Array:
    """The *size* shortest primitive integer offsets, closed under negation."""
    if size % 2:
        raise ValueError("stencil size must be even")
    half = []
    for o in itertools.product(range(-3, 4), repeat=dim):
        o = np.array(o)
        nz = np.flatnonzero(o)
        if len(nz) == 0 or o[nz[0]] < 0 or math.gcd(*map(int, np.abs(o))) != 1:
            continue
        half.append(o)
    half.sort(key=lambda o: (float(np.dot(o, o)), tuple(-o)))
    if size // 2 > len(half):
        raise ValueError(f"at most {2 * len(half)} stencil offsets in dimension {dim}")
    half = np.array(half[: size // 2])
    return np.vstack([half, -half])


def _gauss_rule(order: int) -> tuple[Array, Array]:
    s, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (s + 1.0), 0.5 * w


def _weight_gradient(weight: Weight, Z: Array, h: float = 1e-6) -> Array:
    """Central-difference gradient of a weight at the rows of *Z*."""
    G = np.empty_like(Z)
    for k in range(Z.shape[1]):
        e = np.zeros(Z.shape[1])
        e[k] = h
        with np.errstate(invalid="ignore"):
            G[:, k] = (weight.unchecked(Z + e) - weight.unchecked(Z - e)) / (2 * h)
    G[~np.isfinite(G)] = 0.0
    return G


def _resample(V: Array, spacing: float) -> Array:
    """Equally spaced points by arc length along the polyline *V*."""
    arc = np.r_[0.0, np.cumsum(np.linalg.norm(np.diff(V, axis=0), axis=1))]
    if arc[-1] == 0.0:
        return V[[0, -1]]
    n = max(int(np.ceil(arc[-1] / spacing)), 1)
    u = np.linspace(0.0, arc[-1], n + 1)
    keep = np.r_[True, np.diff(arc) > 0]
    out = np.column_stack([np.interp(u, arc[keep], V[keep, k]) for k in range(V.shape[1])])
    out[0], out[-1] = V[0], V[-1]
    return out


def _insert_midpoints(V: Array, max_len: float) -> Array:
    while True:
        seg = np.linalg.norm(np.diff(V, axis=0), axis=1)
        long = seg > max_len
        if not long.any():
            return V
        mids = 0.5 * (V[:-1] + V[1:])[long]
        at = np.flatnonzero(long) + 1
        V = np.insert(V, at, mids, axis=0)


class GeodesicSolver:
    """Grid discretisation of ``(domain, weight)`` answering distance queries.

    A built solver is never mutated; queries copy the base graph.
    """

    def __init__(self, domain: Domain, weight: Weight, config: SolverConfig | None = None):
        config = config or SolverConfig()
        config.validate(domain.dim)
        if domain.kind == "space" and config.window is None:
            raise ValueError("unbounded domains need SolverConfig.window")
        self.domain = domain
        self.weight = weight
        self.config = config

        dim, n = domain.dim, config.resolution
        if domain.kind == "ball":
            R = domain.safe_radius
            lo, hi = np.full(dim, -R), np.full(dim, R)
        elif domain.kind == "box":
            lo, hi = np.array(domain.lower), np.array(domain.upper)
            pad = (hi - lo) / (2 * n)
            lo, hi = lo + pad, hi - pad
        else:
            lo, hi = np.full(dim, -config.window), np.full(dim, config.window)
        axes = [np.linspace(a, b, n) for a, b in zip(lo, hi)]
        self.spacing = float(np.max((hi - lo) / (n - 1)))

        ijk = np.array(list(itertools.product(range(n), repeat=dim)))
        P = np.column_stack([axes[k][ijk[:, k]] for k in range(dim)])
        keep = self.inside(P)
        ijk, P = ijk[keep], P[keep]
        index = np.full((n,) * dim, -1)
        index[tuple(ijk.T)] = np.arange(len(P))
        self.points = P
        self.points.flags.writeable = False

        offsets = stencil(dim, config.stencil_size(dim))
        self.reach = float(np.max(np.linalg.norm(offsets, axis=1))) * self.spacing
        rows, cols = [], []
        for o in offsets[: len(offsets) // 2]:
            nb = ijk + o
            ok = np.all((nb >= 0) & (nb < n), axis=1)
            j = np.full(len(P), -1)
            j[ok] = index[tuple(nb[ok].T)]
            ok = j >= 0
            rows.append(np.flatnonzero(ok))
            cols.append(j[ok])
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        cost = segment_weighted_lengths(weight, P[rows], P[cols],
                                        order=config.quadrature_order, checked=False)
        ok = np.isfinite(cost)
        self._edges = (rows[ok], cols[ok], cost[ok])
        self._tree = cKDTree(P)

    @property
    def nodes(self) -> int:
        return len(self.points)

    def inside(self, X) -> Array:
        X = np.atleast_2d(X)
        if self.domain.kind == "space":
            return np.all(np.abs(X) <= self.config.window, axis=1)
        return self.domain.contains(X, safe=True)

    def _check_queries(self, Q: Array) -> None:
        if not self.inside(Q).all():
            bad = Q[~self.inside(Q)][0]
            raise DomainError(f"query point {bad} is outside the safe domain")

    def _solve(self, Q: Array):
        """Shortest paths from every query point over the augmented graph."""
        n, k = self.nodes, len(Q)
        rows, cols, cost = self._edges
        extra_r, extra_c = [], []
        for q, nbrs in enumerate(self._tree.query_ball_point(Q, self.reach * (1 + 1e-9))):
            extra_r.extend([n + q] * len(nbrs))
            extra_c.extend(nbrs)
        for a, b in itertools.combinations(range(k), 2):
            if np.linalg.norm(Q[a] - Q[b]) <= self.reach:
                extra_r.append(n + a)
                extra_c.append(n + b)
        extra_r = np.array(extra_r, dtype=int)
        extra_c = np.array(extra_c, dtype=int)
        allP = np.vstack([self.points, Q])
        extra_cost = segment_weighted_lengths(self.weight, allP[extra_r], allP[extra_c],
                                              order=self.config.quadrature_order,
                                              checked=False)
        r = np.concatenate([rows, extra_r])
        c = np.concatenate([cols, extra_c])
        v = np.concatenate([cost, extra_cost])
        ok = np.isfinite(v) & (v > 0)
        G = sparse.coo_matrix((v[ok], (r[ok], c[ok])), shape=(n + k, n + k)).tocsr()
        dist, pred = csgraph.dijkstra(G, directed=False, indices=np.arange(n, n + k),
                                      return_predecessors=True)
        return allP, dist, pred

    def graph_distances(self, points) -> Array:
        """Exact shortest-path distances between query points on the graph."""
        Q = as_points(points, self.domain.dim)
        self._check_queries(Q)
        _, dist, _ = self._solve(Q)
        n = self.nodes
        D = dist[:, n:]
        for a in range(len(Q)):
            for b in range(len(Q)):
                if np.array_equal(Q[a], Q[b]):
                    D[a, b] = 0.0
        return 0.5 * (D + D.T)

    def path_cost(self, V: Array, order: int | None = None) -> float:
        order = order or self.config.quadrature_order
        return float(np.sum(segment_weighted_lengths(self.weight, V[:-1], V[1:],
                                                     order=order, checked=False)))

    def distance(self, x, y) -> GeodesicResult:
        x = as_points(x, self.domain.dim)[0]
        y = as_points(y, self.domain.dim)[0]
        Q = np.vstack([x, y])
        self._check_queries(Q)
        if np.array_equal(x, y):
            return GeodesicResult(0.0, Curve.from_points([x, y]), 0.0, self.nodes, 0, 0.0)
        allP, dist, pred = self._solve(Q)
        target = self.nodes + 1
        if not np.isfinite(dist[0, target]):
            raise DisconnectedError(f"no path between {x} and {y} at this resolution")
        path = [target]
        while path[-1] != self.nodes:
            path.append(pred[0, path[-1]])
        V = allP[path[::-1]]
        graph_cost = self.path_cost(V)
        V, last_gain = self.smooth(V)
        fine = self.path_cost(V, order=2 * self.config.quadrature_order)
        coarse = self.path_cost(V)
        error = abs(fine - coarse) + last_gain + self.config.tolerance * fine
        return GeodesicResult(fine, Curve.from_points(V), float(dist[0, target]),
                              self.nodes, self.config.smoothing_passes, error)

    def smooth(self, V: Array) -> tuple[Array, float]:
        """Shorten a path by midpoint insertion and coordinate-wise golden-section
        moves of its interior vertices.  Endpoints stay fixed.

        Returns the smoothed vertices and the gain of the final pass.
        """
        passes = self.config.smoothing_passes
        if passes == 0 or len(V) < 2:
            return V, 0.0
        h = self.spacing
        V = _insert_midpoints(np.array(V, dtype=float), h / 2)
        order = self.config.quadrature_order
        w = self.weight

        def local(prev, cur, nxt):
            c = (segment_weighted_lengths(w, prev, cur, order, checked=False)
                 + segment_weighted_lengths(w, cur, nxt, order, checked=False))
            c[~self.inside(cur)] = np.inf
            return c

        step = h / 2
        cost = self.path_cost(V)
        gain = 0.0
        for p in range(passes):
            if p == passes // 2:
                V = _insert_midpoints(V, h / 4)
            for parity in (1, 0):
                idx = np.arange(1, len(V) - 1)
                idx = idx[idx % 2 == parity]
                if len(idx) == 0:
                    continue
                prev, nxt = V[idx - 1], V[idx + 1]
                for axis in range(V.shape[1]):
                    cur = V[idx]
                    e = np.zeros(V.shape[1])
                    e[axis] = 1.0
                    base = local(prev, cur, nxt)
                    a = np.full(len(idx), -step)
                    b = np.full(len(idx), step)
                    c = b - _GOLDEN * (b - a)
                    d = a + _GOLDEN * (b - a)
                    fc = local(prev, cur + c[:, None] * e, nxt)
                    fd = local(prev, cur + d[:, None] * e, nxt)
                    for _ in range(24):
                        left = fc < fd
                        b = np.where(left, d, b)
                        a = np.where(left, a, c)
                        new_c = b - _GOLDEN * (b - a)
                        new_d = a + _GOLDEN * (b - a)
                        c_next = np.where(left, new_c, d)
                        d_next = np.where(left, c, new_d)
                        f_new = local(prev, cur + np.where(left, new_c, new_d)[:, None] * e, nxt)
                        fc, fd = np.where(left, f_new, fd), np.where(left, fc, f_new)
                        c, d = c_next, d_next
                    s = 0.5 * (a + b)
                    trial = local(prev, cur + s[:, None] * e, nxt)
                    better = trial < base
                    V[idx[better]] = cur[better] + s[better, None] * e
            new_cost = self.path_cost(V)
            gain = max(cost - new_cost, 0.0)
            cost = new_cost
            step *= 0.5
        if self.config.polish_iterations:
            V, gain = self.polish(V)
        return V, gain

    def polish(self, V: Array) -> tuple[Array, float]:
        """Minimise the discrete weighted length over all interior vertices at
        once (nonlinear conjugate gradients), which removes the long-wavelength offsets that local
        moves only diffuse away slowly."""
        V = _resample(V, self.spacing / 2)
        if len(V) < 3:
            return V, 0.0
        eps2 = (1e-9 * self.spacing) ** 2
        s, wq = _gauss_rule(self.config.quadrature_order)
        x0, x1 = V[0], V[-1]
        m = V.shape[1]
        weight = self.weight

        def fun(flat):
            P = np.vstack([x0, flat.reshape(-1, m), x1])
            A, B = P[:-1], P[1:]
            D = B - A
            # regularised norm keeps the objective smooth when vertices collide
            L = np.sqrt(np.einsum("ij,ij->i", D, D) + eps2)
            Z = A[:, None, :] + s[None, :, None] * D[:, None, :]
            om = weight.unchecked(Z.reshape(-1, m)).reshape(len(A), len(s))
            I = om @ wq
            total = float(L @ I)
            if not np.isfinite(total):
                return np.inf, np.zeros_like(flat)
            G = _weight_gradient(weight, Z.reshape(-1, m)).reshape(len(A), len(s), m)
            U = D / L[:, None]
            gA = -U * I[:, None] + L[:, None] * np.einsum("q,sqk->sk", wq * (1 - s), G)
            gB = U * I[:, None] + L[:, None] * np.einsum("q,sqk->sk", wq * s, G)
            grad = np.zeros_like(P)
            grad[:-1] += gA
            grad[1:] += gB
            return total, grad[1:-1].ravel()

        start = self.path_cost(V)
        res = optimize.minimize(fun, V[1:-1].ravel(), jac=True, method="CG",
                                options={"maxiter": self.config.polish_iterations,
                                         "gtol": 1e-10})
        W = np.vstack([x0, res.x.reshape(-1, m), x1])
        end = self.path_cost(W)
        if not (np.isfinite(end) and end <= start and self.weight.domain.contains(W).all()):
            return V, 0.0
        return W, abs(start - end) / max(res.nit, 1)


def default_window(x, y, domain: Domain) -> float:
    """Half-width of the computational box for R^m queries."""
    r = max(float(np.max(np.abs(x))), float(np.max(np.abs(y))), 1.0)
    return 1.5 * r


def weighted_distance(domain: Domain, weight: Weight, x, y,
                      config: SolverConfig | None = None) -> GeodesicResult:
    """Upper bound on the weighted distance between *x* and *y*, with a witness."""
    config = config or SolverConfig()
    if domain.kind == "space" and config.window is None:
        config = dataclasses.replace(config, window=default_window(x, y, domain))
    return GeodesicSolver(domain, weight, config).distance(x, y)

# }}}


# {{{ metric axioms

@dataclass
class AxiomReport:
    triples: int
    symmetry_violations: list[int] = field(default_factory=list)
    triangle_violations: list[int] = field(default_factory=list)
    lower_bound_violations: list[int] = field(default_factory=list)
    max_asymmetry: float = 0.0
    max_triangle_excess: float = 0.0

    @property
    def ok(self) -> bool:
        return not (self.symmetry_violations or self.triangle_violations
                    or self.lower_bound_violations)


def metric_axiom_check(triples, distance: DistanceFn, *, weight_floor: float | None = None,
                       atol: float = 1e-12) -> AxiomReport:
    """Check symmetry, the triangle inequality and ``d(x, y) >= m |x - y|``.

    *triples* has shape ``(n, 3, m)``; *distance* is vectorised over rows.
    """
    T = np.asarray(triples, dtype=float)
    if T.ndim != 3 or T.shape[1] != 3:
        raise ValueError("triples must have shape (n, 3, m)")
    x, y, z = T[:, 0], T[:, 1], T[:, 2]
    dxy, dyx = distance(x, y), distance(y, x)
    dyz, dxz = distance(y, z), distance(x, z)
    report = AxiomReport(len(T))
    asym = np.abs(dxy - dyx)
    report.max_asymmetry = float(np.max(asym, initial=0.0))
    report.symmetry_violations = np.flatnonzero(asym > atol).tolist()
    excess = dxz - (dxy + dyz)
    report.max_triangle_excess = float(np.max(excess, initial=-np.inf))
    report.triangle_violations = np.flatnonzero(excess > atol).tolist()
    if weight_floor is not None:
        low = dxy < weight_floor * euclidean_distance(x, y) - atol
        report.lower_bound_violations = np.flatnonzero(low).tolist()
    return report

# }}}
