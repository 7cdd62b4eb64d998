"""Curve subdivision families, Bowen covers, calibrated inequalities."""

import json

import numpy as np
import pytest

import ergolab.reparam as rp
from ergolab.curves import AffineMap, MappedCurve, check_bounded, line_segment
from ergolab.maps import make_map


def test_constants_presets():
    cons = rp.ReparamConstants()
    assert cons.kl_for(1) == 2 and cons.kl_for(2) == 8 and cons.kl_for(3) == 48
    assert cons.comp_for(1) == 4 and cons.comp_for(3) == 28
    assert cons.nu(1, 1.0) >= 1
    strict = rp.ReparamConstants.conservative()
    assert strict.nu(1, 1.0) > cons.nu(1, 1.0)
    # widths shrink with the expansion gap, bound grows
    assert cons.base_width(1, 1.0, 2.0) < cons.base_width(1, 1.0, 0.0)
    assert cons.cardinality_bound(1, 1.0, 2.0) > cons.cardinality_bound(1, 1.0, 0.0)
    assert abs(cons.cardinality_bound(1, 1.0, 2.0)
               - cons.c_ralpha(1, 1.0) * np.exp(2.0)) < 1e-9


def test_selection_cap_cat():
    f = make_map("cat")
    cap = rp.selection_cap(f.space, f.norm_cap)
    expect = 0.5 / (2.0 * (f.norm_cap + 2.0))
    assert abs(cap - expect) < 1e-15
    assert 0.05 < cap < 0.055


def test_point_labels_constant_jacobian():
    f = make_map("cat")
    sigma = line_segment([0.3, 0.4], [0.03, 0.01])
    cp, cc = point_labels = rp.point_labels(f, sigma, np.linspace(-1, 1, 9))
    # log of the top singular value is 0.962, so the ceiling is 1
    assert np.all(cp == 1)
    assert np.all(cc <= cp)


def test_reparametrize_step_covers_class():
    f = make_map("cat")
    eps = 0.05
    sigma = line_segment([0.31, 0.62], np.array([0.22975, 0.97325]) * 0.04)
    cp, cc = rp.point_labels(f, sigma, np.array([0.0]))
    fam = rp.reparametrize_step(f, sigma, int(cp[0]), int(cc[0]), eps)
    assert len(fam) > 0
    assert len(fam) <= fam.bound + 1e-9
    misses, total = rp.coverage_misses(f, sigma, fam, samples=500)
    assert total > 0
    assert misses == 0
    # every composed piece is bounded at a small sampling margin
    for th in fam.thetas[:5]:
        piece = MappedCurve(sigma.compose_affine(th), (f,))
        assert check_bounded(piece, margin=1.01).bounded


def test_reparametrize_step_validations():
    f = make_map("cat")
    sigma = line_segment([0.3, 0.4], [0.03, 0.01])
    with pytest.raises(ValueError):
        rp.reparametrize_step(f, sigma, 0, 1, 0.05)
    with pytest.raises(ValueError):
        rp.reparametrize_step(f, sigma, 1, 1, 0.2)
    bad = line_segment([0.3, 0.4], [0.03, 0.01], r=4)
    with pytest.raises(ValueError):
        rp.reparametrize_step(f, bad, 1, 1, 0.05)


def test_family_record_round_trip():
    f = make_map("cat")
    sigma = line_segment([0.31, 0.62], [0.01, 0.04])
    cp, cc = rp.point_labels(f, sigma, np.array([0.0]))
    fam = rp.reparametrize_step(f, sigma, int(cp[0]), int(cc[0]), 0.05)
    rec = json.loads(json.dumps(fam.to_record()))
    back = rp.family_from_record(rec)
    assert len(back) == len(fam)
    ts = np.linspace(-1, 1, 101)
    assert np.array_equal(back.covers_many(ts), fam.covers_many(ts))


def test_family_rejects_oversized():
    thetas = tuple(AffineMap.onto(-1 + k * 0.2, -1 + (k + 1) * 0.2)
                   for k in range(10))
    with pytest.raises(ValueError):
        rp.ReparamFamily(thetas, 1, 1, 0.05, bound=5.0)


def test_bowen_cover_and_growth():
    f = make_map("cat")
    eps = 1e-3
    v = np.array([0.22975, 0.97325]) * (0.85 * eps)
    sigma = line_segment([0.31, 0.62], v)
    rec = rp.bowen_cover(f, sigma, y=[0.31, 0.62], n=10, q=10, epsilon=eps)
    assert rec.q == 10 and rec.n == 10
    counts = rec.counts()
    assert counts[0] == (0, 1)
    times = [t for t, _ in counts]
    assert times == sorted(times)
    rep = rp.growth_rate(rec)
    assert not np.isnan(rep.ceiling)
    assert rep.within_ceiling
    assert rep.measured <= rep.ceiling + 1e-6
    # record survives JSON round trip with the family intact
    blob = json.loads(json.dumps(rec.to_record()))
    fam = rp.family_from_record(blob["family"])
    assert len(fam) == len(rec.family)


def test_growth_rate_bare_history():
    rep = rp.growth_rate([(0, 1), (1, 3), (2, 9)])
    assert abs(rep.measured - np.log(3)) < 1e-12
    assert np.isnan(rep.ceiling)
    assert rep.within_ceiling
    rep2 = rp.growth_rate([(0, 1), (2, 9)], q=2, rho=1.0, upsilon=3.0,
                          c_ralpha=10.0)
    assert abs(rep2.measured - np.log(3)) < 1e-12
    assert abs(rep2.ceiling - np.log(2 * 2 * 3.0 * 10.0) / 2) < 1e-12


def test_calibration_suite_small():
    rep = rp.calculus_inequality_suite(1, 1.0, trials=100, seed=0)
    assert rep.all_hold
    assert rep.kl_minimal <= rep.kl_used
    assert rep.comp_minimal <= rep.comp_used
    assert rep.taylor_minimal <= rep.taylor_used * (1 + 1e-9)
    assert rep.trials == 100
    with pytest.raises(ValueError):
        rp.calculus_inequality_suite(4, 1.0, trials=10)
