"""Real root isolation for low-degree polynomials by Descartes'-rule
bisection, plus decomposition of a band set {lo < Q < hi} into maximal
intervals.

Intervals are bisected at float midpoints (exact dyadic arithmetic) down
to width 1e-9; reported intervals are snapped outward so downstream
coverage can only grow.  Everything is deterministic.
"""

from __future__ import annotations

import numpy as np

WIDTH = 1e-9
SNAP = 1e-12


def _trim(coeffs) -> np.ndarray:
    c = np.asarray(coeffs, dtype=float)
    nz = np.nonzero(c)[0]
    return c[: nz[-1] + 1] if nz.size else c[:1]


def _eval(coeffs, x):
    return np.polynomial.polynomial.polyval(x, coeffs)


def _restrict_to_unit(coeffs, a, b) -> np.ndarray:
    """Coefficients of q(t) = p(a + (b - a) t), so [a, b] becomes [0, 1]."""
    p = np.polynomial.polynomial.Polynomial(coeffs)
    q = p(np.polynomial.polynomial.Polynomial([a, b - a]))
    return q.coef


def _sign_variations(coeffs) -> int:
    signs = np.sign(coeffs[np.nonzero(coeffs)[0]])
    return int(np.sum(signs[1:] != signs[:-1]))


def _descartes_unit_count(coeffs) -> int:
    """Upper bound on roots in (0, 1): sign variations of
    (1 + t)^n q(1/(1 + t))."""
    c = _trim(coeffs)
    n = len(c) - 1
    out = np.zeros(n + 1)
    row = np.array([1.0])                     # binomial row for (1 + t)^m
    for k in range(n, -1, -1):
        # add c[k] * (1 + t)^(n - k); iterate m = n - k upward
        m = n - k
        while len(row) < m + 1:
            row = np.convolve(row, [1.0, 1.0])
        out[: m + 1] += c[k] * row[: m + 1]
    return _sign_variations(out)


def isolate_roots(coeffs, lo: float, hi: float, width: float = WIDTH):
    """Disjoint intervals in [lo, hi], each containing at least one root
    (or an unresolved cluster narrower than `width`); no roots outside.

    Values within 1e-12 of zero relative to the coefficient scale count
    as roots, so roots sitting on dyadic bisection points are not lost to
    rounding.  Returned intervals are snapped outward by SNAP.
    """
    c = _trim(coeffs)
    if len(c) == 1:
        # constant polynomial: zero everywhere or nowhere; callers treat
        # the all-zero case through the degenerate path
        return []
    tol = 1e-12 * float(np.sum(np.abs(c)))
    span = max(1.0, abs(lo), abs(hi)) ** (len(c) - 1)
    tol *= span

    def sgn(v):
        return 0 if abs(v) <= tol else (1 if v > 0 else -1)

    found = []
    stack = [(float(lo), float(hi))]
    while stack:
        a, b = stack.pop()
        qa, qb = _eval(c, a), _eval(c, b)
        if sgn(qa) == 0:
            found.append((a - SNAP, a + SNAP))
        if b - a <= width:
            if sgn(qb) == 0 or _descartes_unit_count(_restrict_to_unit(c, a, b)) > 0:
                found.append((a - SNAP, b + SNAP))
            continue
        count = _descartes_unit_count(_restrict_to_unit(c, a, b))
        if count == 0:
            continue
        if count == 1 and sgn(qa) * sgn(qb) < 0:
            while b - a > width:
                mid = 0.5 * (a + b)
                qm = _eval(c, mid)
                if sgn(qm) == 0:
                    a, b = mid, mid
                    break
                if sgn(qm) == sgn(qa):
                    a, qa = mid, qm
                else:
                    b = mid
            found.append((a - SNAP, b + SNAP))
            continue
        mid = 0.5 * (a + b)
        if sgn(_eval(c, mid)) == 0:
            found.append((mid - SNAP, mid + SNAP))
        stack.append((a, mid))
        stack.append((mid, b))
    if sgn(_eval(c, hi)) == 0:
        found.append((hi - SNAP, hi + SNAP))
    found.sort()
    merged = []
    for iv in found:
        if merged and iv[0] <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], iv[1]))
        else:
            merged.append(iv)
    return merged


def band_intervals(coeffs, lower: float, upper: float,
                   domain=(-1.0, 1.0)):
    """Maximal intervals of {t in domain : lower < Q(t) < upper}.

    Breakpoints come from isolated roots of Q - lower and Q - upper;
    segments are kept by a midpoint test and adjacent kept segments are
    merged, so an unresolved non-crossing cluster cannot inflate the
    interval count.
    """
    lo_dom, hi_dom = domain
    c = _trim(coeffs)
    if len(c) == 1:
        return [(lo_dom, hi_dom)] if lower < c[0] < upper else []
    cuts = {lo_dom, hi_dom}
    for shift in (lower, upper):
        shifted = c.copy()
        shifted[0] -= shift
        for a, b in isolate_roots(shifted, lo_dom, hi_dom):
            cuts.add(min(max(a, lo_dom), hi_dom))
            cuts.add(min(max(b, lo_dom), hi_dom))
    pts = sorted(cuts)
    kept = []
    for a, b in zip(pts[:-1], pts[1:]):
        if b - a <= 0:
            continue
        mid = 0.5 * (a + b)
        if lower < _eval(c, mid) < upper:
            kept.append((a, b))
    merged = []
    for iv in kept:
        if merged and abs(iv[0] - merged[-1][1]) <= 2 * SNAP:
            merged[-1] = (merged[-1][0], iv[1])
        else:
            merged.append(iv)
    return merged
