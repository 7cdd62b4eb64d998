"""Polynomial curves, affine reparametrizations, boundedness certificates."""

import numpy as np
import pytest

from ergolab.curves import (AffineMap, MappedCurve, PolyCurve, check_bounded,
                            line_segment, quadratic_segment)
from ergolab.maps import make_map


def test_affine_map_image_and_compose():
    aff = AffineMap.onto(-0.5, 0.5)
    assert aff.image == (-0.5, 0.5)
    assert aff(0.0) == 0.0
    assert aff(1.0) == 0.5
    inner = AffineMap.onto(0.0, 0.5)
    comp = aff.compose(inner)
    ts = np.linspace(-1, 1, 7)
    assert np.allclose(comp(ts), aff(inner(ts)))
    assert abs(comp.slope) == abs(aff.slope) * abs(inner.slope)


def test_affine_map_validates():
    with pytest.raises(ValueError):
        AffineMap(0.0, 1.5)
    with pytest.raises(ValueError):
        AffineMap(0.8, 0.5)
    assert AffineMap.identity()(0.37) == 0.37


def test_poly_curve_eval_and_deriv():
    # sigma(t) = (t^2, 1 + 2 t)
    c = PolyCurve(np.array([[0.0, 0.0, 1.0], [1.0, 2.0, 0.0]]))
    ts = np.linspace(-1, 1, 9)
    vals = c(ts)
    assert np.allclose(vals[:, 0], ts ** 2)
    assert np.allclose(vals[:, 1], 1 + 2 * ts)
    d1 = c.deriv(ts, 1)
    assert np.allclose(d1[:, 0], 2 * ts)
    assert np.allclose(d1[:, 1], 2.0)
    d2 = c.deriv(ts, 2)
    assert np.allclose(d2, np.stack([np.full(9, 2.0), np.zeros(9)], axis=1))
    # orders beyond the degree vanish identically
    assert np.allclose(c.deriv(ts, 3), 0.0)


def test_poly_curve_rejects_discontinuity():
    good = PolyCurve([np.array([[0.0, 1.0]]), np.array([[0.0, 1.0]])],
                     knots=(-1.0, 0.0, 1.0))
    assert good.piece_count == 2
    with pytest.raises(ValueError):
        PolyCurve([np.array([[0.0, 1.0]]), np.array([[0.5, 1.0]])],
                  knots=(-1.0, 0.0, 1.0))


def test_sup_deriv_exact_vs_dense():
    rng = np.random.default_rng(0)
    c = PolyCurve(rng.normal(size=(3, 5)))
    ts = np.linspace(-1, 1, 20001)
    for order in (1, 2, 3):
        dense = np.sqrt((c.deriv(ts, order) ** 2).sum(axis=1)).max()
        exact = c.sup_deriv(order)
        assert exact >= dense - 1e-12
        assert exact <= dense + 1e-4


def test_holder_const_degrees():
    seg = line_segment([0.0, 0.0], [1.0, 0.0])
    assert seg.holder_const(1, 1.0) == 0.0
    quad = quadratic_segment([0.0, 0.0], [1.0, 0.0], [0.0, 0.1])
    # D^1 of a quadratic is Lipschitz with constant sup ||D^2||
    assert abs(quad.holder_const(1, 1.0) - 2 * 0.1) < 1e-12


def test_compose_affine_exact():
    rng = np.random.default_rng(1)
    c = PolyCurve(rng.normal(size=(2, 4)))
    aff = AffineMap.onto(-0.3, 0.7)
    sub = c.compose_affine(aff)
    ts = np.linspace(-1, 1, 13)
    assert np.allclose(sub(ts), c(aff(ts)), atol=1e-12)
    # chain rule: derivative scales by the contraction
    assert np.allclose(sub.deriv(ts, 1), aff.slope * c.deriv(aff(ts), 1),
                       atol=1e-12)


def test_compose_affine_splits_at_knots():
    two = PolyCurve([np.array([[0.0, 1.0]]), np.array([[0.0, 1.0, 1.0]])],
                    knots=(-1.0, 0.0, 1.0))
    sub = two.compose_affine(AffineMap.onto(-0.5, 0.5))
    # the interior knot 0 pulls back to an interior knot of the piece
    assert sub.piece_count == 2
    ts = np.linspace(-1, 1, 101)
    assert np.allclose(sub(ts), two(0.5 * ts), atol=1e-12)


def test_scaled_curve():
    c = quadratic_segment([0.1, 0.2], [1.0, 0.0], [0.0, 0.3])
    half = c.scaled(0.5)
    ts = np.linspace(-1, 1, 5)
    assert np.allclose(half(ts), 0.5 * c(ts))


def test_mapped_curve_matches_direct_composition():
    f = make_map("standard", kick=0.8)
    base = quadratic_segment([0.3, 0.4], [0.05, 0.02], [0.0, 0.004])
    mc = MappedCurve(base, (f, f))
    ts = np.linspace(-1, 1, 11)
    direct = f.step(f.step(base(ts)))
    assert np.allclose(mc(ts), direct, atol=1e-12)


def test_mapped_curve_derivs_finite_difference():
    f = make_map("standard", kick=0.8)
    base = quadratic_segment([0.3, 0.4], [0.05, 0.02], [0.0, 0.004])
    mc = MappedCurve(base, (f,))
    ts = np.linspace(-0.9, 0.9, 7)
    h = 1e-6
    d1, d2, d3 = mc.derivs(ts, 3)
    fd1 = (mc(ts + h) - mc(ts - h)) / (2 * h)
    assert np.allclose(d1, fd1, atol=1e-7)
    fd2 = (mc.deriv(ts + h, 1) - mc.deriv(ts - h, 1)) / (2 * h)
    assert np.allclose(d2, fd2, atol=1e-6)
    fd3 = (mc.deriv(ts + h, 2) - mc.deriv(ts - h, 2)) / (2 * h)
    assert np.allclose(d3, fd3, atol=1e-5)


def test_mapped_curve_push_and_affine():
    f = make_map("cat")
    base = line_segment([0.2, 0.5], [0.01, 0.03])
    mc = MappedCurve(base).push(f)
    assert len(mc.maps) == 1
    sub = mc.compose_affine(AffineMap.onto(0.0, 1.0))
    ts = np.linspace(-1, 1, 5)
    assert np.allclose(sub(ts), mc(0.5 + 0.5 * ts), atol=1e-12)


def test_check_bounded_exact_polynomial():
    # straight segment: all higher data vanish, certificate is exact
    seg = line_segment([0.0, 0.0], [0.01, 0.0])
    cert = check_bounded(seg, epsilon=0.02)
    assert cert.bounded
    assert cert.strongly
    assert cert.resolution == 0.0
    assert cert.d1_sup == 0.01
    # too much curvature for the 1/6 rule
    fat = quadratic_segment([0.0, 0.0], [0.06, 0.0], [0.0, 0.05])
    cert_fat = check_bounded(fat)
    assert not cert_fat.bounded
    assert cert_fat.verdict() == "neither"


def test_check_bounded_epsilon_gate():
    seg = line_segment([0.0, 0.0], [0.05, 0.0])
    assert check_bounded(seg, epsilon=0.06).strongly
    assert not check_bounded(seg, epsilon=0.04).strongly
    assert check_bounded(seg, epsilon=0.04).bounded


def test_check_bounded_sampled_composed_curve():
    f = make_map("cat")
    eps = 0.05
    v = np.array([0.22975, 0.97325]) * (0.85 * eps)
    base = quadratic_segment([0.31, 0.62], v, v / 40.0)
    cert = check_bounded(MappedCurve(base), epsilon=eps, margin=1.01)
    assert cert.resolution > 0
    assert cert.strongly
