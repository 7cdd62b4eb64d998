"""Exponent estimators: wedge norms, subadditive averages, Benettin."""

import numpy as np
import pytest

import ergolab.lyapunov as lyap
from ergolab.maps import make_map

CAT_TOP = np.log((3.0 + np.sqrt(5.0)) / 2.0)


def test_exterior_norm_diagonal():
    m = np.diag([3.0, 2.0, 0.5])
    assert abs(lyap.exterior_norm(m, 1) - 3.0) < 1e-12
    # top two singular values multiply
    assert abs(lyap.exterior_norm(m, 2) - 6.0) < 1e-12
    assert abs(lyap.exterior_norm(m, 3) - 3.0) < 1e-12


def test_compound2_matches_minors():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(3, 3))
    c = lyap.compound2(a[None])[0]
    # 2x2 minors in lexicographic row/column pair order
    pairs = [(0, 1), (0, 2), (1, 2)]
    for i, (r0, r1) in enumerate(pairs):
        for j, (c0, c1) in enumerate(pairs):
            minor = a[r0, c0] * a[r1, c1] - a[r0, c1] * a[r1, c0]
            assert abs(c[i, j] - minor) < 1e-12


def test_compound2_multiplicative():
    rng = np.random.default_rng(4)
    a = rng.normal(size=(3, 3))
    b = rng.normal(size=(3, 3))
    left = lyap.compound2((a @ b)[None])[0]
    right = lyap.compound2(a[None])[0] @ lyap.compound2(b[None])[0]
    assert np.allclose(left, right, atol=1e-10)


def test_wedge_log_norms_cat():
    f = make_map("cat")
    rng = np.random.default_rng(0)
    pts = rng.random((16, 2))
    recs = lyap.wedge_log_norms(f, pts, [8, 16])
    for k in (8, 16):
        rec = recs[k]
        # top wedge log-norm grows like k * lambda_top
        top = rec[1] / k
        assert np.all(np.abs(top - CAT_TOP) < 0.05)
        # area form is preserved: second wedge log-norm is ~0
        assert np.all(np.abs(rec[2]) < 1e-8)


def test_subadditive_observable_phi():
    f = make_map("cat")
    pts = np.array([[0.2, 0.7], [0.5, 0.1]])
    phi = lyap.subadditive_observable(f, pts, 6)
    assert phi.shape == (2,)
    assert np.all(np.abs(phi / 6 - CAT_TOP) < 1e-6)


def test_positive_exponent_sum_cat():
    f = make_map("cat")
    rng = np.random.default_rng(1)
    pts = rng.random((32, 2))
    est = lyap.positive_exponent_sum(f, pts)
    assert abs(est.estimate - CAT_TOP) < 1e-3
    assert est.argmin_depth in est.depths
    assert est.estimate == min(est.values)
    assert not est.drift_warning


def test_positive_exponent_sum_weights_validate():
    f = make_map("cat")
    pts = np.array([[0.2, 0.3], [0.6, 0.9]])
    with pytest.raises(ValueError):
        lyap.positive_exponent_sum(f, pts, weights=[0.7, 0.7])


def test_benettin_spectrum_cat():
    f = make_map("cat")
    spec = lyap.benettin_spectrum(f, [0.3, 0.4], n=4000)
    assert spec.multiplicities == (1, 1)
    assert abs(spec.exponents[0] - CAT_TOP) < 1e-3
    assert abs(spec.exponents[1] + CAT_TOP) < 1e-3
    assert abs(spec.lambda_plus - CAT_TOP) < 1e-3
    assert abs(spec.raw_sum) < 1e-6


def test_benettin_clustering_merges_ties():
    # the complex contracting pair shares one modulus: multiplicity 2
    f = make_map("plastic3")
    spec = lyap.benettin_spectrum(f, [0.3, 0.4, 0.1], n=4000)
    assert spec.dim == 3
    assert spec.multiplicities == (1, 2)
    top = np.log(np.max(np.abs(np.linalg.eigvals(f.matrix))))
    assert abs(spec.exponents[0] - top) < 5e-3
    assert abs(spec.exponents[1] + top / 2) < 5e-3
    assert abs(lyap.center_exponent(spec) + top / 2) < 5e-3


def test_center_exponent_requires_3d():
    spec = lyap.benettin_spectrum(make_map("cat"), [0.3, 0.4], n=500)
    with pytest.raises(ValueError):
        lyap.center_exponent(spec)


def test_ensemble_exponents_shape_and_order():
    f = make_map("cat")
    rng = np.random.default_rng(2)
    pts = rng.random((5, 2))
    ex = lyap.ensemble_exponents(f, pts, n=800)
    assert ex.shape == (5, 2)
    assert np.all(np.diff(ex, axis=1) <= 0)
    assert np.all(np.abs(ex[:, 0] - CAT_TOP) < 1e-2)


def test_jacobian_identity_residual_cat():
    f = make_map("cat")
    spec = lyap.benettin_spectrum(f, [0.3, 0.4], n=2000)
    rng = np.random.default_rng(5)
    res = lyap.jacobian_identity_residual(spec, f, rng.random((8, 2)))
    # det = 1 everywhere and the spectrum sums to ~0
    assert res < 1e-6


def test_exponent_gap_diagnostic_nonnegative():
    f = make_map("cat")
    rng = np.random.default_rng(6)
    out = lyap.exponent_gap_diagnostic(f, rng.random((8, 2)), q=16)
    assert out["gap"] >= -1e-12
