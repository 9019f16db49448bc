"""Catalog of mappings with known Bloch/normal behaviour, and a radius-sweep classifier."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Array, Domain, Weight, constant_weight, hyperbolic_weight, unit_weight
from .sampling import PointSampler
from .seminorms import Mapping, bloch_number, bloch_quantity, complex_mapping

CLASSES = ("bloch", "normal", "both", "neither", "unknown")

#: safe radii 1 - 2**-j used by :func:`classify`
SWEEP = tuple(range(3, 11))
PLATEAU_RTOL = 0.05
DIVERGENCE_FACTOR = 1e3


@dataclass(frozen=True)
class CatalogEntry:
    """A mapping on the unit ball with its expected classification.

    *expected_bloch* is the Bloch number for the hyperbolic source weight and
    the unit target weight (``None`` when infinite or unknown); *note* records
    where the expectation comes from.
    """

    name: str
    mapping: Mapping
    expected: str
    expected_bloch: float | None
    note: str
    radius: float = 0.999

    def __post_init__(self):
        if self.expected not in CLASSES:
            raise ValueError(f"unknown classification {self.expected!r}")

    @property
    def domain(self) -> Domain:
        return self.mapping.domain

    @property
    def target_dim(self) -> int:
        return self.mapping.target_dim


def _mobius(a: complex) -> Mapping:
    s = 1 - abs(a) ** 2
    return complex_mapping(lambda z: (z - a) / (1 - np.conj(a) * z),
                           lambda z: s / (1 - np.conj(a) * z) ** 2, "mobius")


def _exp_cayley() -> Mapping:
    def f(z):
        return np.exp((1 + z) / (1 - z))

    def df(z):
        return 2 * f(z) / (1 - z) ** 2

    return complex_mapping(f, df, "exp_cayley")


def _field3() -> Mapping:
    """``(x1 + x2^2/2, x2 + x3^2/2, x3 + x1^2/2)`` on the unit ball of R^3."""

    def func(X):
        x1, x2, x3 = X.T
        return np.column_stack([x1 + 0.5 * x2 ** 2, x2 + 0.5 * x3 ** 2, x3 + 0.5 * x1 ** 2])

    def jac_norm(X):
        n = len(X)
        J = np.zeros((n, 3, 3))
        J[:, [0, 1, 2], [0, 1, 2]] = 1.0
        J[:, 0, 1] = X[:, 1]
        J[:, 1, 2] = X[:, 2]
        J[:, 2, 0] = X[:, 0]
        return np.linalg.norm(J, ord=2, axis=(1, 2))

    return Mapping(func, Domain.ball(3), 3, jac_norm, "field3")


def polynomial_mapping(coefficients, name: str | None = None) -> Mapping:
    """Complex polynomial ``sum c_k z^k`` with coefficients in increasing degree."""
    c = np.asarray(coefficients, dtype=complex)
    if c.ndim != 1 or len(c) == 0:
        raise ValueError("need at least one coefficient")
    p = np.polynomial.Polynomial(c)
    dp = p.deriv()
    return complex_mapping(p, dp, name or "poly")


def catalog() -> list[CatalogEntry]:
    a, b = 1.5 + 0.5j, 0.25
    return [
        CatalogEntry("identity", complex_mapping(lambda z: z, lambda z: np.ones_like(z.real),
                                                 "identity"),
                     "both", 1.0, "sup of 1 - |z|^2, attained at 0"),
        CatalogEntry("linear", complex_mapping(lambda z: a * z + b,
                                               lambda z: np.full(z.shape, abs(a)), "linear"),
                     "both", abs(a), "|a| times sup of 1 - |z|^2"),
        CatalogEntry("log1m", complex_mapping(lambda z: -np.log(1 - z), lambda z: 1 / (1 - z),
                                              "log1m"),
                     "both", 2.0, "(1 - |z|^2)/|1 - z| <= 1 + |z|, approached as z -> 1"),
        CatalogEntry("mobius", _mobius(0.5), "both", 1.0,
                     "(1 - |z|^2)|f'(z)| = 1 - |f(z)|^2, attained at z = a"),
        CatalogEntry("square", complex_mapping(lambda z: z * z, lambda z: 2 * z, "square"),
                     "both", 4 / (3 * math.sqrt(3)), "2r(1 - r^2) maximal at r = 1/sqrt(3)"),
        CatalogEntry("exp_cayley", _exp_cayley(), "normal", None,
                     "spherical quantity u/cosh(u) with u = Re (1+z)/(1-z); "
                     "Bloch quantity 2u e^u on the real axis", radius=0.99),
        CatalogEntry("field3", _field3(), "both", None,
                     "polynomial field with exact Jacobian spectral norm"),
        CatalogEntry("constant", complex_mapping(lambda z: np.full(z.shape, 0.3 - 0.2j),
                                                 lambda z: np.zeros(z.shape), "constant"),
                     "both", 0.0, "zero differential"),
    ]


def lookup(name: str) -> CatalogEntry:
    for entry in catalog():
        if entry.name == name:
            return entry
    raise KeyError(f"no catalog entry named {name!r}; "
                   f"choose from {', '.join(e.name for e in catalog())}")


def spherical_target(dim: int) -> Weight:
    """``1 / (1 + |y|^2)`` on the target space of dimension *dim*."""
    return Weight(lambda Y: 1.0 / (1.0 + np.einsum("ij,ij->i", Y, Y)), Domain.space(dim),
                  name="spherical", monotone_in_norm=True)


@dataclass
class Sweep:
    """Sup estimates of one quantity at the radii ``1 - 2**-j``."""

    quantity: str
    exponents: list[int]
    values: list[float]
    verdict: str
    overflow_radius: float | None = None

    @property
    def radii(self) -> list[float]:
        return [1 - 2.0 ** -j for j in self.exponents]


@dataclass
class Classification:
    entry: str
    bloch: Sweep
    normal: Sweep
    verdict: str
    expected: str
    samples: int

    @property
    def matches(self) -> bool:
        return self.verdict == self.expected


def judge(values: list[float], rtol: float = PLATEAU_RTOL,
          factor: float = DIVERGENCE_FACTOR) -> str:
    """``bounded`` if the last three values agree within *rtol*, ``unbounded``
    if some value is non-finite or exceeds *factor* times the first, else
    ``undecided``."""
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)) or (v[0] > 0 and np.any(v > factor * v[0])):
        return "unbounded"
    tail = v[-3:]
    if tail.max() - tail.min() <= rtol * tail.max():
        return "bounded"
    return "undecided"


def _sweep(entry: CatalogEntry, omega: Weight, target: Weight, quantity: str,
           n: int, exponents) -> Sweep:
    values = []
    overflow = None
    for j in exponents:
        r = 1 - 2.0 ** -j
        est = bloch_number(entry.mapping, omega, target,
                           PointSampler(entry.domain, r, n))
        if not math.isfinite(est.value) or est.nonfinite:
            overflow = r if overflow is None else overflow
        values.append(est.value)
    verdict = judge(values)
    if quantity == "bloch" and overflow is not None and verdict != "bounded":
        verdict = "unbounded"
    return Sweep(quantity, list(exponents), values, verdict, overflow)


def classify(entry: CatalogEntry, n: int = 2000, exponents=SWEEP) -> Classification:
    """Sweep the Bloch quantity (unit target weight) and the spherical quantity
    over the safe radii and turn the plateau/divergence verdicts into a class."""
    m = entry.domain.dim
    omega = hyperbolic_weight(m, margin=2.0 ** -12)
    bloch = _sweep(entry, omega, unit_weight(entry.target_dim, Domain.space(entry.target_dim)),
                   "bloch", n, exponents)
    normal = _sweep(entry, omega, spherical_target(entry.target_dim), "normal", n, exponents)
    is_bloch = bloch.verdict == "bounded"
    is_normal = normal.verdict == "bounded"
    if is_bloch and is_normal:
        verdict = "both"
    elif is_bloch:
        verdict = "bloch"
    elif is_normal:
        verdict = "normal"
    elif bloch.verdict == normal.verdict == "unbounded":
        verdict = "neither"
    else:
        verdict = "unknown"
    return Classification(entry.name, bloch, normal, verdict, entry.expected, n)


def growth_quantities(entry: CatalogEntry, X: Array) -> tuple[Array, Array]:
    """Bloch and spherical quantities at *X* with the exact oracle."""
    m = entry.domain.dim
    omega = hyperbolic_weight(m, margin=2.0 ** -12)
    k = entry.target_dim
    return (bloch_quantity(entry.mapping, omega, constant_weight(1.0, k, Domain.space(k)), X),
            bloch_quantity(entry.mapping, omega, spherical_target(k), X))
