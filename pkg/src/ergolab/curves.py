"""Parametrized curves over [-1, 1]: exact piecewise-polynomial curves,
their images under map compositions, affine reparametrizations, and the
boundedness certificates used by the subdivision machinery.

A curve is "bounded" when its higher derivatives and the Hölder constant
of the top derivative are at most one sixth of the first-derivative sup
norm; "strongly eps-bounded" additionally caps the first derivative at
eps.  Polynomial curves get exact norms (critical-point enumeration);
composed curves are certified on a sampling grid whose resolution is
recorded in the certificate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .derivatives import curve_chain

BOUND_FRACTION = 1.0 / 6.0


@dataclass(frozen=True)
class AffineMap:
    """t -> offset + slope * t on [-1, 1], image inside [-1, 1]."""

    offset: float
    slope: float

    def __post_init__(self):
        if abs(self.slope) > 1.0 + 1e-12:
            raise ValueError(f"contraction {self.slope} exceeds 1")
        lo, hi = self.offset - abs(self.slope), self.offset + abs(self.slope)
        if lo < -1.0 - 1e-9 or hi > 1.0 + 1e-9:
            raise ValueError(f"image [{lo}, {hi}] leaves [-1, 1]")

    def __call__(self, ts):
        return self.offset + self.slope * np.asarray(ts, dtype=float)

    def compose(self, other: "AffineMap") -> "AffineMap":
        """self after other: t -> self(other(t)); contractions multiply."""
        return AffineMap(self.offset + self.slope * other.offset,
                        self.slope * other.slope)

    @property
    def image(self):
        return (self.offset - abs(self.slope), self.offset + abs(self.slope))

    def contains(self, t: float, pad: float = 0.0) -> bool:
        lo, hi = self.image
        return lo - pad <= t <= hi + pad

    @staticmethod
    def identity() -> "AffineMap":
        return AffineMap(0.0, 1.0)

    @staticmethod
    def onto(u: float, v: float) -> "AffineMap":
        """The affine map sending [-1, 1] onto [u, v]."""
        return AffineMap(0.5 * (u + v), 0.5 * (v - u))


class PolyCurve:
    """Piecewise-polynomial curve [-1, 1] -> R^d with exact derivatives.

    coeffs[i] has shape (d, deg_i + 1), power basis in the global
    parameter, valid on [knots[i], knots[i + 1]].
    """

    def __init__(self, coeffs, knots=(-1.0, 1.0), r: int = 1,
                 alpha: float = 1.0, label: str = "curve"):
        if isinstance(coeffs, np.ndarray) and coeffs.ndim == 2:
            coeffs = [coeffs]
        self.coeffs = [np.atleast_2d(np.asarray(c, dtype=float)) for c in coeffs]
        self.knots = np.asarray(knots, dtype=float)
        if len(self.knots) != len(self.coeffs) + 1:
            raise ValueError("knots must have one more entry than pieces")
        if np.any(np.diff(self.knots) <= 0):
            raise ValueError("knots must increase")
        self.dim = self.coeffs[0].shape[0]
        if any(c.shape[0] != self.dim for c in self.coeffs):
            raise ValueError("pieces disagree on dimension")
        self.r = int(r)
        self.alpha = float(alpha)
        self.label = label
        for i in range(len(self.coeffs) - 1):
            t = self.knots[i + 1]
            left = npoly.polyval(t, self.coeffs[i].T)
            right = npoly.polyval(t, self.coeffs[i + 1].T)
            if np.max(np.abs(left - right)) > 1e-12:
                raise ValueError(f"discontinuity at knot {t}")

    @property
    def piece_count(self) -> int:
        return len(self.coeffs)

    def _piece_index(self, ts):
        idx = np.searchsorted(self.knots, ts, side="right") - 1
        return np.clip(idx, 0, len(self.coeffs) - 1)

    def _eval_coeffs(self, coeff_list, ts):
        ts = np.asarray(ts, dtype=float)
        flat = np.atleast_1d(ts)
        idx = self._piece_index(flat)
        out = np.empty((flat.shape[0], self.dim))
        for i, c in enumerate(coeff_list):
            mask = idx == i
            if mask.any():
                out[mask] = npoly.polyval(flat[mask], c.T).T
        return out if ts.ndim else out[0]

    def __call__(self, ts):
        return self._eval_coeffs(self.coeffs, ts)

    def deriv_coeffs(self, order: int):
        return [npoly.polyder(c, m=order, axis=1) if c.shape[1] > order
                else np.zeros((self.dim, 1)) for c in self.coeffs]

    def deriv(self, ts, order: int = 1):
        return self._eval_coeffs(self.deriv_coeffs(order), ts)

    def derivs(self, ts, max_order: int):
        return [self.deriv(ts, k) for k in range(1, max_order + 1)]

    def sup_deriv(self, order: int) -> float:
        """Exact sup over [-1, 1] of ||D^order sigma|| via critical points
        of the squared norm."""
        best = 0.0
        dcs = self.deriv_coeffs(order)
        for i, dc in enumerate(dcs):
            a, b = self.knots[i], self.knots[i + 1]
            sq = np.zeros(1)
            for comp in dc:
                sq = npoly.polyadd(sq, npoly.polymul(comp, comp))
            cands = [a, b]
            if len(sq) > 2:
                dsq = npoly.polyder(sq)
                roots = npoly.polyroots(dsq)
                cands += [float(z.real) for z in roots
                          if abs(z.imag) < 1e-9 and a <= z.real <= b]
            vals = npoly.polyval(np.asarray(cands), sq)
            best = max(best, float(np.sqrt(max(0.0, vals.max()))))
        return best

    def holder_const(self, r: int = None, alpha: float = None) -> float:
        """Upper bound on the alpha-Hölder constant of D^r sigma:
        sup ||D^(r+1)|| * 2^(1 - alpha), exactly 0 for degree <= r."""
        r = self.r if r is None else r
        alpha = self.alpha if alpha is None else alpha
        if all(c.shape[1] - 1 <= r for c in self.coeffs):
            return 0.0
        return self.sup_deriv(r + 1) * 2.0 ** (1.0 - alpha)

    def compose_affine(self, aff: AffineMap) -> "PolyCurve":
        """Exact coefficients of sigma(aff(t)) on [-1, 1]."""
        a, b = aff.offset, aff.slope
        if b == 0.0:
            point = self(np.array([a]))[0]
            return PolyCurve([point[:, None]], (-1.0, 1.0), self.r, self.alpha,
                             label=self.label + "|aff")
        sub = npoly.Polynomial([a, b])
        lo, hi = aff.image
        cut = [-1.0]
        interior = [(k - a) / b for k in self.knots if lo < k < hi]
        cut += sorted(interior) + [1.0]
        cut = [t for i, t in enumerate(cut) if i == 0 or t > cut[i - 1] + 1e-15]
        new_coeffs = []
        for u, v in zip(cut[:-1], cut[1:]):
            comps = []
            piece = int(self._piece_index(np.array([a + b * 0.5 * (u + v)]))[0])
            for comp in self.coeffs[piece]:
                composed = npoly.Polynomial(comp)(sub)
                comps.append(composed.coef)
            deg = max(len(c) for c in comps)
            arr = np.zeros((self.dim, deg))
            for j, c in enumerate(comps):
                arr[j, :len(c)] = c
            new_coeffs.append(arr)
        return PolyCurve(new_coeffs, np.asarray(cut), self.r, self.alpha,
                         label=self.label + "|aff")

    def scaled(self, c: float) -> "PolyCurve":
        return PolyCurve([c * arr for arr in self.coeffs], self.knots, self.r,
                         self.alpha, label=self.label + f"*{c:g}")


def line_segment(point, velocity, r: int = 1, alpha: float = 1.0,
                 label: str = "segment") -> PolyCurve:
    p = np.asarray(point, dtype=float)
    v = np.asarray(velocity, dtype=float)
    return PolyCurve([np.stack([p, v], axis=1)], (-1.0, 1.0), r, alpha, label)


def quadratic_segment(point, velocity, curvature, r: int = 2,
                      alpha: float = 1.0, label: str = "quad") -> PolyCurve:
    p = np.asarray(point, dtype=float)
    v = np.asarray(velocity, dtype=float)
    w = np.asarray(curvature, dtype=float)
    return PolyCurve([np.stack([p, v, w], axis=1)], (-1.0, 1.0), r, alpha, label)


class MappedCurve:
    """Composition f_k o ... o f_1 o sigma of a polynomial curve with map
    steps, with exact chain-rule derivatives up to order 3."""

    def __init__(self, base: PolyCurve, maps=(), label: str = None):
        self.base = base
        self.maps = tuple(maps)
        self.r = base.r
        self.alpha = base.alpha
        self.dim = base.dim
        self.label = label or (base.label + f"|{len(self.maps)}maps")

    def __call__(self, ts):
        x = np.atleast_2d(self.base(ts))
        for f in self.maps:
            x = f.step(x)
        return x

    def derivs(self, ts, max_order: int):
        if max_order > 3:
            raise ValueError("chain-rule derivatives implemented to order 3")
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        x = np.atleast_2d(self.base(ts))
        cur = [np.atleast_2d(d) for d in self.base.derivs(ts, max_order)]
        for f in self.maps:
            stack = f.deriv_stack(x, max_order)
            cur = curve_chain(stack, cur)
            x = f.step(x)
        return cur

    def deriv(self, ts, order: int = 1):
        return self.derivs(ts, order)[order - 1]

    def push(self, f) -> "MappedCurve":
        return MappedCurve(self.base, self.maps + (f,), label=self.label)

    def compose_affine(self, aff: AffineMap) -> "MappedCurve":
        return MappedCurve(self.base.compose_affine(aff), self.maps,
                           label=self.label + "|aff")

    def sampled_sup_deriv(self, order: int, ts) -> float:
        vals = self.derivs(ts, order)[order - 1]
        return float(np.sqrt((vals ** 2).sum(axis=1)).max())


@dataclass
class BoundednessCertificate:
    curve_label: str
    r: int
    alpha: float
    d1_sup: float
    higher_sup: float          # sup over 2 <= s <= r of ||D^s||_0
    holder: float              # ||D^r sigma||_alpha bound
    epsilon: float             # None/nan when not requested
    resolution: float          # 0.0 for exact polynomial norms
    margin: float
    bounded: bool
    strongly: bool

    def verdict(self) -> str:
        if self.strongly:
            return "strongly-eps-bounded"
        return "bounded" if self.bounded else "neither"


def _grid(resolution: float) -> np.ndarray:
    n = max(2, int(np.ceil(2.0 / resolution)))
    return np.linspace(-1.0, 1.0, n + 1)


def check_bounded(curve, epsilon: float = None, r: int = None,
                  alpha: float = None, resolution: float = None,
                  margin: float = 1.0) -> BoundednessCertificate:
    """Certificate for the 1/6 boundedness inequalities.

    Polynomial curves are measured exactly unless a resolution is forced;
    composed curves are sampled at `resolution` (default 1e-3).  The
    margin factor loosens the right-hand sides, absorbing grid error when
    certifying sampled curves.
    """
    r = curve.r if r is None else int(r)
    alpha = curve.alpha if alpha is None else float(alpha)
    exact = isinstance(curve, PolyCurve) and resolution is None
    if exact:
        d1 = curve.sup_deriv(1)
        higher = max((curve.sup_deriv(s) for s in range(2, r + 1)), default=0.0)
        holder = curve.holder_const(r, alpha)
        res = 0.0
    else:
        res = 1e-3 if resolution is None else float(resolution)
        ts = _grid(res)
        need = min(3, r + 1)
        stack = curve.derivs(ts, need)
        norms = [np.sqrt((v ** 2).sum(axis=1)) for v in stack]
        d1 = float(norms[0].max())
        higher = max((float(norms[s - 1].max()) for s in range(2, r + 1)),
                     default=0.0)
        if r + 1 <= 3:
            holder = float(norms[r].max()) * 2.0 ** (1.0 - alpha)
        else:
            dr = stack[r - 1]
            sub = dr[::max(1, len(ts) // 512)]
            tt = ts[::max(1, len(ts) // 512)]
            diff = np.sqrt(((sub[:, None, :] - sub[None, :, :]) ** 2).sum(-1))
            gaps = np.abs(tt[:, None] - tt[None, :]) ** alpha
            np.fill_diagonal(gaps, np.inf)
            holder = float((diff / gaps).max())
    allow = margin * BOUND_FRACTION * d1
    bounded = bool(higher <= allow + 1e-15 and holder <= allow + 1e-15)
    strongly = bool(bounded and epsilon is not None
                    and d1 <= margin * epsilon + 1e-15)
    return BoundednessCertificate(
        curve_label=getattr(curve, "label", "curve"), r=r, alpha=alpha,
        d1_sup=d1, higher_sup=higher, holder=holder,
        epsilon=float("nan") if epsilon is None else float(epsilon),
        resolution=res, margin=margin, bounded=bounded, strongly=strongly)
