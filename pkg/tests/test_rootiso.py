"""Descartes-bisection root isolation and band decomposition."""

import numpy as np

from ergolab.rootiso import band_intervals, isolate_roots


def _covers(intervals, x, tol=1e-8):
    return any(a - tol <= x <= b + tol for a, b in intervals)


def test_isolate_simple_roots():
    # (t - 0.25)(t + 0.5) = t^2 + 0.25 t - 0.125, coeffs low-to-high
    coeffs = [-0.125, 0.25, 1.0]
    ivs = isolate_roots(coeffs, -1.0, 1.0)
    assert len(ivs) == 2
    assert _covers(ivs, -0.5)
    assert _covers(ivs, 0.25)
    for a, b in ivs:
        assert b - a < 1e-6


def test_isolate_root_at_endpoint_and_midpoint():
    # root exactly at 0.5, a dyadic bisection point
    ivs = isolate_roots([-0.5, 1.0], 0.0, 1.0)
    assert len(ivs) == 1
    assert _covers(ivs, 0.5)
    # root at the right endpoint
    ivs = isolate_roots([-1.0, 1.0], 0.0, 1.0)
    assert _covers(ivs, 1.0)


def test_isolate_no_roots():
    assert isolate_roots([1.0, 0.0, 1.0], -1.0, 1.0) == []


def test_isolate_double_root():
    # (t - 0.3)^2 has no sign change; the cluster is still reported
    coeffs = [0.09, -0.6, 1.0]
    ivs = isolate_roots(coeffs, -1.0, 1.0)
    assert _covers(ivs, 0.3, tol=1e-6)


def test_isolate_cubic_three_roots():
    # roots at -0.7, 0.1, 0.8
    r = [-0.7, 0.1, 0.8]
    coeffs = np.polynomial.polynomial.polyfromroots(r)
    ivs = isolate_roots(coeffs, -1.0, 1.0)
    assert len(ivs) == 3
    for root in r:
        assert _covers(ivs, root)
    # intervals are disjoint and sorted
    for (a0, b0), (a1, b1) in zip(ivs[:-1], ivs[1:]):
        assert b0 < a1


def test_band_intervals_parabola():
    # Q(t) = t^2, band 0.04 < Q < 0.25 over [-1, 1]
    ivs = band_intervals([0.0, 0.0, 1.0], 0.04, 0.25)
    assert len(ivs) == 2
    (a0, b0), (a1, b1) = ivs
    assert abs(a0 + 0.5) < 1e-6 and abs(b0 + 0.2) < 1e-6
    assert abs(a1 - 0.2) < 1e-6 and abs(b1 - 0.5) < 1e-6


def test_band_intervals_cover_midpoints_only():
    rng = np.random.default_rng(0)
    for _ in range(50):
        coeffs = rng.normal(size=4)
        lo, hi = sorted(rng.normal(size=2))
        ivs = band_intervals(coeffs, lo, hi)
        ts = np.linspace(-1, 1, 401)
        q = np.polynomial.polynomial.polyval(ts, coeffs)
        inside = (q > lo) & (q < hi)
        for t, flag in zip(ts, inside):
            if flag and not _covers(ivs, t, tol=1e-6):
                # only boundary-grazing points may be excluded
                assert min(abs(q[np.searchsorted(ts, t)] - lo),
                           abs(q[np.searchsorted(ts, t)] - hi)) < 1e-3
        for a, b in ivs:
            mid = 0.5 * (a + b)
            val = np.polynomial.polynomial.polyval(mid, coeffs)
            assert lo - 1e-9 < val < hi + 1e-9


def test_band_intervals_constant_polynomial():
    assert band_intervals([0.5], 0.0, 1.0) == [(-1.0, 1.0)]
    assert band_intervals([2.0], 0.0, 1.0) == []


def test_band_intervals_whole_domain():
    ivs = band_intervals([0.0, 1.0], -5.0, 5.0)
    assert len(ivs) == 1
    a, b = ivs[0]
    assert a <= -1.0 + 1e-9 and b >= 1.0 - 1e-9
