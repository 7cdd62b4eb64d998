"""Empirical measures, weak-* metric, signature split, discretization."""

import numpy as np
import pytest

import ergolab.measures as ms
from ergolab.maps import make_map
from ergolab.spaces import Box, Torus


def test_measure_normalizes_and_wraps():
    mu = ms.EmpiricalMeasure(space=Torus(2), points=[[1.25, -0.5]],
                             weights=[3.0])
    assert np.allclose(mu.points, [[0.25, 0.5]])
    assert abs(mu.weights.sum() - 1.0) < 1e-15


def test_measure_rejects_bad_weights():
    with pytest.raises(ValueError):
        ms.EmpiricalMeasure(space=Torus(2), points=[[0.1, 0.2]],
                            weights=[-1.0])
    with pytest.raises(ValueError):
        ms.EmpiricalMeasure(space=Torus(2), points=[[0.1, 0.2], [0.3, 0.4]],
                            weights=[0.5])


def test_integrate_callable_and_values():
    mu = ms.EmpiricalMeasure(space=Torus(1), points=[[0.0], [0.5]],
                             weights=[0.25, 0.75])
    assert abs(mu.integrate([2.0, 4.0]) - 3.5) < 1e-15
    assert abs(mu.integrate(lambda p: p[:, 0]) - 0.375) < 1e-15


def test_csv_round_trip():
    rng = np.random.default_rng(0)
    mu = ms.EmpiricalMeasure(space=Torus(2), points=rng.random((20, 2)),
                             weights=rng.random(20))
    nu = ms.EmpiricalMeasure.from_csv(Torus(2), mu.to_csv())
    assert np.allclose(mu.points, nu.points)
    assert np.allclose(mu.weights, nu.weights)


def test_from_orbit_and_ensemble_sizes():
    f = make_map("cat")
    # n counts steps, so the segment has n+1 points
    mu = ms.from_orbit(f, [0.2, 0.3], n=50, burn_in=10)
    assert mu.size == 51
    nu = ms.from_ensemble(f, [[0.2, 0.3], [0.7, 0.1]], n=30)
    assert nu.size == 62
    assert abs(nu.weights.sum() - 1.0) < 1e-12


def test_mixture_mass():
    mu = ms.EmpiricalMeasure(space=Torus(1), points=[[0.1]])
    nu = ms.EmpiricalMeasure(space=Torus(1), points=[[0.6]])
    mix = ms.mixture([(0.3, mu), (0.7, nu)])
    assert mix.size == 2
    assert abs(mix.weights[0] - 0.3) < 1e-15
    assert abs(mix.weights[1] - 0.7) < 1e-15


def test_weak_star_distance_metric_properties():
    rng = np.random.default_rng(1)
    mu = ms.EmpiricalMeasure(space=Torus(2), points=rng.random((40, 2)))
    nu = ms.EmpiricalMeasure(space=Torus(2), points=rng.random((40, 2)))
    assert ms.weak_star_distance(mu, mu) == 0.0
    d = ms.weak_star_distance(mu, nu)
    assert d > 0
    assert abs(d - ms.weak_star_distance(nu, mu)) < 1e-15
    # dictionary functions are bounded by 1, weights are 2^-j
    assert d < 2.0


def test_weak_star_distance_space_mismatch():
    mu = ms.EmpiricalMeasure(space=Torus(2), points=[[0.1, 0.2]])
    nu = ms.EmpiricalMeasure(space=Box([[0, 1], [0, 1]]), points=[[0.1, 0.2]])
    with pytest.raises(ValueError):
        ms.weak_star_distance(mu, nu)


def test_weak_star_separates_far_measures():
    mu = ms.EmpiricalMeasure(space=Torus(1), points=[[0.0]])
    nu = ms.EmpiricalMeasure(space=Torus(1), points=[[0.5]])
    rho = ms.EmpiricalMeasure(space=Torus(1), points=[[0.01]])
    assert ms.weak_star_distance(mu, nu) > ms.weak_star_distance(mu, rho)


def test_signature_decomposition_cat():
    f = make_map("cat")
    rng = np.random.default_rng(2)
    mu = ms.EmpiricalMeasure(space=Torus(2), points=rng.random((64, 2)))
    dec = ms.signature_decomposition(mu, f, n=300)
    assert dec.target_label == "hyperbolic"
    assert dec.beta == 1.0
    assert dec.gamma == 0.0
    assert abs(sum(dec.masses.values()) - 1.0) < 1e-12
    rec = dec.recombined()
    assert ms.weak_star_distance(mu, rec) < 1e-12


def test_signature_decomposition_identity():
    f = make_map("identity", dim=2)
    rng = np.random.default_rng(3)
    mu = ms.EmpiricalMeasure(space=Torus(2), points=rng.random((32, 2)))
    dec = ms.signature_decomposition(mu, f, n=200)
    assert dec.beta == 0.0
    assert dec.gamma == 1.0
    assert dec.counts["other"] == 32


def test_signature_decomposition_3d_two_positive():
    f = make_map("plastic3_inverse")
    rng = np.random.default_rng(4)
    mu = ms.EmpiricalMeasure(space=Torus(3), points=rng.random((24, 3)))
    dec = ms.signature_decomposition(mu, f, n=400)
    assert dec.target_label == "one_positive"
    assert dec.masses["two_positive"] == 1.0
    assert dec.beta == 0.0


def test_discretize_measure_structure():
    f = make_map("cat")
    mu = ms.from_orbit(f, [0.12, 0.37], n=96, burn_in=64)
    # orbit_len must be generous: 16 cells need ~640 blocks for depth 2
    res = ms.discretize_measure(mu, f, level=5, orbit_len=2000,
                                exponent_steps=200)
    assert res.level == 5
    assert len(res.components) >= 1
    assert abs(sum(c.weight for c in res.components) - 1.0) < 1e-12
    approx = res.approximant()
    assert abs(approx.weights.sum() - 1.0) < 1e-12
    for name in ("weak_star", "entropy", "exponent"):
        chk = res.checks[name]
        assert set(chk) == {"value", "bound", "ok"}
        assert chk["value"] >= 0
        assert chk["bound"] > 0
    # merging adjacent bins never increases the component count
    assert len(res.components) <= res.bins_before_merge
