from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from blochlip.geometry import (
    ConvergenceError,
    Curve,
    Domain,
    DomainError,
    Partition,
    Weight,
    concat,
    constant_weight,
    curve_length,
    hyperbolic_weight,
    polygonal_length,
    segment_weighted_length,
    segment_weighted_lengths,
    stieltjes_sum,
    unit_weight,
    weighted_length,
)


def quarter_circle(n):
    t = np.linspace(0, math.pi / 2, n)
    return Curve.from_points(np.column_stack([np.cos(t), np.sin(t)]))


def real_weight():
    """1/(1 - t^2) on the interval (-1, 1)."""
    return hyperbolic_weight(1)


polylines = arrays(np.float64, st.tuples(st.integers(2, 12), st.integers(1, 3)),
                   elements=st.floats(-10, 10, allow_nan=False, width=64))


# polygonal_length

def test_polygonal_length_unit_segment():
    assert polygonal_length(Curve.segment([0, 0], [1, 0]), Partition([0, 1])) == 1.0


def test_polygonal_length_quarter_circle_three_points():
    c = Curve.from_points([[1, 0], [math.sqrt(2) / 2, math.sqrt(2) / 2], [0, 1]])
    value = polygonal_length(c, Partition([0, 0.5, 1]))
    assert value == pytest.approx(2 * math.sqrt(2 - math.sqrt(2)), rel=1e-15)
    assert value == pytest.approx(1.530734, abs=1e-6)


@settings(max_examples=60, deadline=None)
@given(polylines, st.integers(1, 6))
def test_refinement_never_decreases_chord_sum(V, levels):
    # consecutive collinear pieces (including repeated vertices) give equal
    # sums in exact arithmetic, so allow a few ulps per chord and nothing more
    curve = Curve.from_points(V)
    T = Partition.uniform(3)
    prev = polygonal_length(curve, T)
    for _ in range(levels):
        T = T.refine()
        value = polygonal_length(curve, T)
        assert value >= prev - 8 * np.finfo(float).eps * len(T) * max(prev, 1.0)
        prev = value


def test_refinement_strictly_monotone_on_generic_polylines():
    rng = np.random.default_rng(11)
    for _ in range(100):
        curve = Curve.from_points(rng.normal(size=(rng.integers(3, 10), 2)))
        T = Partition.uniform(5)
        prev = polygonal_length(curve, T)
        for _ in range(4):
            T = T.refine()
            value = polygonal_length(curve, T)
            assert value >= prev
            prev = value


def test_partition_validation():
    with pytest.raises(ValueError):
        Partition([0.0])
    with pytest.raises(ValueError):
        Partition([0.0, 0.6, 0.4, 1.0])
    with pytest.raises(ValueError):
        Partition([0.1, 1.0])
    with pytest.raises(ValueError):
        Partition([0.0, 0.5, 1.0], tags=[0.7, 0.8])


def test_refine_is_refinement():
    T = Partition([0, 0.3, 1])
    R = T.refine()
    assert R.is_refinement_of(T)
    assert not T.is_refinement_of(R)
    assert R.diameter == pytest.approx(0.35)


# curve_length

def test_segment_length_is_exact():
    x, y = np.array([0.3, -1.2, 2.0]), np.array([-0.7, 0.4, 1.1])
    est = curve_length(Curve.segment(x, y))
    assert est.value == np.linalg.norm(x - y)


def test_quarter_circle_length():
    est = curve_length(quarter_circle(2001), tol=1e-6)
    assert est.value == pytest.approx(math.pi / 2, abs=1e-4)


def test_full_circle_length():
    t = np.linspace(0, 2 * math.pi, 4001)
    est = curve_length(Curve.from_points(np.column_stack([np.cos(t), np.sin(t)])))
    assert est.value == pytest.approx(2 * math.pi, abs=1e-3)


@settings(max_examples=60, deadline=None)
@given(polylines)
def test_length_at_least_endpoint_distance(V):
    curve = Curve.from_points(V)
    assert curve_length(curve).value >= np.linalg.norm(V[0] - V[-1]) * (1 - 1e-15)


def test_knot_cap_raises_convergence_error():
    # a function that is not a polyline in parameter: hand the refiner a
    # metric whose sums never settle
    def noisy(X, Y):
        return np.linalg.norm(X - Y, axis=1) + len(X) * 1e-3

    with pytest.raises(ConvergenceError) as info:
        curve_length(Curve.segment([0, 0], [1, 0]), tol=1e-9, metric=noisy, max_knots=64)
    assert info.value.estimate is not None


# concat

def test_concat_l_shape():
    c = concat(Curve.segment([0, 0], [1, 0]), Curve.segment([1, 0], [1, 1]))
    assert curve_length(c).value == 2.0
    np.testing.assert_array_equal(c(0.5), [1.0, 0.0])


def test_concat_with_reverse_doubles_length():
    g = quarter_circle(50)
    c = concat(g, g.reversed())
    assert curve_length(c).value == pytest.approx(2 * curve_length(g).value, rel=1e-14)


def test_concat_requires_exact_endpoint():
    with pytest.raises(ValueError):
        concat(Curve.segment([0, 0], [1, 0]), Curve.segment([1, 1e-15], [1, 1]))


@settings(max_examples=40, deadline=None)
@given(polylines, polylines)
def test_concat_additive(A, B):
    if A.shape[1] != B.shape[1]:
        B = np.resize(B, (len(B), A.shape[1]))
    B = B - B[0] + A[-1]
    g1, g2 = Curve.from_points(A), Curve.from_points(B)
    total = curve_length(concat(g1, g2)).value
    assert total == pytest.approx(curve_length(g1).value + curve_length(g2).value,
                                  rel=1e-12, abs=1e-12)


# stieltjes_sum

def test_unit_weight_sum_equals_chord_sum():
    g = quarter_circle(17)
    T = Partition.uniform(8)
    assert stieltjes_sum(unit_weight(2), g, T.left_tags()) == pytest.approx(
        polygonal_length(g, T), rel=1e-15)


def test_constant_weight_scales_sum():
    g = quarter_circle(17)
    T = Partition.uniform(8).midpoint_tags()
    assert stieltjes_sum(constant_weight(2.5), g, T) == pytest.approx(
        2.5 * polygonal_length(g, T), rel=1e-15)


def test_stieltjes_hand_computed_left_sum():
    g = Curve.segment([0.0], [0.5])
    value = stieltjes_sum(real_weight(), g, Partition.uniform(4).left_tags())
    # left tags 0, 1/8, 1/4, 3/8 with step 1/8
    exact = (1 + 64 / 63 + 16 / 15 + 64 / 55) / 8
    assert value == pytest.approx(exact, rel=1e-15)
    assert value == pytest.approx(0.530772, abs=1e-6)


def test_stieltjes_converges_to_atanh():
    g = Curve.segment([0.0], [0.5])
    T = Partition.uniform(4)
    errors = []
    for _ in range(8):
        errors.append(abs(stieltjes_sum(real_weight(), g, T.left_tags()) - math.atanh(0.5)))
        T = T.refine()
    assert all(b < a for a, b in zip(errors, errors[1:]))
    assert errors[-1] < 1e-3


def test_stieltjes_needs_tags():
    with pytest.raises(ValueError):
        stieltjes_sum(unit_weight(1), Curve.segment([0.0], [1.0]), Partition.uniform(2))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 64), st.floats(0.05, 0.9), st.floats(-0.9, -0.05))
def test_tag_choice_bounded_by_modulus(n, b, a):
    # w(t) = 1/(1-t^2) is Lipschitz on [a, b] with constant sup 2t/(1-t^2)^2
    g = Curve.segment([a], [b])
    T = Partition.uniform(n)
    w = real_weight()
    left = stieltjes_sum(w, g, T.left_tags())
    mid = stieltjes_sum(w, g, T.midpoint_tags())
    c = max(abs(a), abs(b))
    lipschitz = 2 * c / (1 - c * c) ** 2
    modulus = lipschitz * T.diameter * (b - a)
    assert abs(left - mid) <= modulus * (b - a) + 1e-14


# weighted_length

def test_weighted_length_unit_matches_length():
    g = quarter_circle(101)
    assert weighted_length(unit_weight(2), g).value == pytest.approx(
        curve_length(g).value, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(polylines, st.floats(0.1, 10))
def test_constant_weight_scales_length(V, c):
    g = Curve.from_points(V)
    w = constant_weight(c, V.shape[1])
    assert weighted_length(w, g).value == pytest.approx(c * curve_length(g).value,
                                                        rel=1e-13, abs=1e-13)


@pytest.mark.parametrize("tags", ["left", "midpoint"])
def test_weighted_length_atanh(tags):
    est = weighted_length(real_weight(), Curve.segment([0.0], [0.5]), tol=1e-6, tags=tags)
    assert est.value == pytest.approx(math.atanh(0.5), abs=2e-6)
    assert est.value == pytest.approx(0.549306, abs=1e-5)


def test_weighted_length_constant_curve_is_zero():
    g = Curve.from_points([[0.2, 0.1], [0.2, 0.1], [0.2, 0.1]])
    assert weighted_length(hyperbolic_weight(2), g).value == 0.0


def test_weighted_length_rejects_curve_outside_domain():
    with pytest.raises(DomainError):
        weighted_length(hyperbolic_weight(2), Curve.segment([0, 0], [1.2, 0]))


# segment_weighted_length

def test_segment_weighted_length_zero_segment():
    assert segment_weighted_length(hyperbolic_weight(2), [0.3, 0.3], [0.3, 0.3]) == 0.0


def test_segment_weighted_length_atanh():
    value = segment_weighted_length(hyperbolic_weight(2), [0, 0], [0.5, 0])
    assert value == pytest.approx(math.atanh(0.5), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (2, 3), elements=st.floats(-5, 5, allow_nan=False, width=64)))
def test_segment_unit_weight_is_euclidean(P):
    value = segment_weighted_length(unit_weight(3), P[0], P[1])
    assert value == pytest.approx(np.linalg.norm(P[0] - P[1]), rel=1e-12, abs=1e-15)


def test_vectorised_segments_match_quadrature():
    rng = np.random.default_rng(3)
    X = rng.uniform(-0.6, 0.6, (20, 2))
    Y = rng.uniform(-0.6, 0.6, (20, 2))
    w = hyperbolic_weight(2)
    fast = segment_weighted_lengths(w, X, Y, order=16)
    slow = [segment_weighted_length(w, x, y) for x, y in zip(X, Y)]
    np.testing.assert_allclose(fast, slow, rtol=1e-9)


# weights and domains

def test_weight_rejects_points_outside_domain():
    w = hyperbolic_weight(2)
    with pytest.raises(DomainError):
        w([[1.0, 0.0]])
    assert np.isinf(w.unchecked(np.array([[1.5, 0.0]])))[0]


def test_weight_rejects_nonpositive_values():
    w = Weight(lambda X: X[:, 0], Domain.space(1))
    with pytest.raises(DomainError):
        w([[-1.0]])


def test_domain_safe_region():
    D = Domain.ball(2, margin=0.1)
    assert D.safe_radius == pytest.approx(0.9)
    np.testing.assert_array_equal(D.contains([[0.95, 0], [0.5, 0]], safe=True), [False, True])
    np.testing.assert_allclose(D.clearance([[0.5, 0]]), [0.5])


def test_curve_map_and_evaluation():
    g = Curve.segment([0, 0], [2, 0])
    np.testing.assert_allclose(g(0.25), [0.5, 0])
    h = g.map(lambda X: 2 * X)
    assert curve_length(h).value == 4.0
    assert curve_length(g.densify(5)).value == pytest.approx(2.0, rel=1e-15)
