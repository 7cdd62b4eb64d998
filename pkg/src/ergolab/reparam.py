"""Affine reparametrization machinery for curves under smooth maps.

`reparametrize_step` subdivides a short curve so that each composed piece
is bounded (1/6 inequalities): cover [-1, 1] by affine pieces of width set
by the regularity budget, keep the parameter set where the degree-(r-1)
Taylor polynomial of D(g o sigma o gamma) stays inside a norm band, and
cut the surviving intervals into equal parts sized by the
Kolmogorov-Landau constant.  `bowen_cover` iterates the step along orbit
blocks, pruning pieces that leave an eps-tube around a reference orbit,
and `growth_rate` compares the resulting counts to the theoretical
ceiling.  `calculus_inequality_suite` measures the minimal constants for
the underlying derivative inequalities; the defaults here are twice the
measured minima.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .curves import AffineMap, MappedCurve, PolyCurve, check_bounded
from .derivatives import map_chain
from .orbits import orbit_points, scaled_products
from .rootiso import band_intervals

# minimal constants measured by calculus_inequality_suite over
# alpha in {0.5, 1.0}, doubled for safety
_KL_DEFAULT = {1: 2.0, 2: 8.0, 3: 48.0}
_COMP_DEFAULT = {1: 4.0, 2: 10.0, 3: 28.0}


@dataclass(frozen=True)
class ReparamConstants:
    """Knobs for the subdivision budget.

    c_comp bounds composition norms, c_kl the Kolmogorov-Landau
    inequality, c_taylor the Taylor remainder (exactly 1 for the 1/r!
    form).  taylor_margin is the exponential slack in the base width;
    kl_split_base scales the interval splitting.  The conservative preset
    restores the margins used in the asymptotic analysis; the defaults
    keep families small enough to materialize while the coverage and
    boundedness guarantees are checked empirically.
    """

    c_comp: float = None
    c_kl: float = None
    c_taylor: float = 1.0
    bezout: int = None
    taylor_margin: float = 3.0
    kl_split_base: float = 0.25
    band_margin: float = 6.0

    @staticmethod
    def conservative() -> "ReparamConstants":
        return ReparamConstants(taylor_margin=10.0,
                                kl_split_base=1000.0 * math.exp(5.0))

    def comp_for(self, r: int) -> float:
        return self.c_comp if self.c_comp is not None else _COMP_DEFAULT[r]

    def kl_for(self, r: int) -> float:
        return self.c_kl if self.c_kl is not None else _KL_DEFAULT[r]

    def bezout_for(self, r: int) -> int:
        return self.bezout if self.bezout is not None else max(1, 2 * r - 1)

    def nu(self, r: int, alpha: float) -> int:
        return int(math.ceil((self.kl_split_base * self.kl_for(r))
                             ** (2.0 / alpha))) + 1

    def base_width(self, r: int, alpha: float, dchi: float) -> float:
        rho = r - 1 + alpha
        return (3.0 * self.comp_for(r)
                * math.exp(dchi + self.taylor_margin)) ** (-1.0 / rho)

    def c_ralpha(self, r: int, alpha: float) -> float:
        rho = r - 1 + alpha
        head = (3.0 * self.comp_for(r)
                * math.exp(self.taylor_margin)) ** (1.0 / rho) + 2.0
        return head * self.bezout_for(r) * self.nu(r, alpha)

    def cardinality_bound(self, r: int, alpha: float, dchi: float) -> float:
        return self.c_ralpha(r, alpha) * math.exp(dchi / (r - 1 + alpha))

    def snapshot(self, r: int, alpha: float) -> dict:
        return {"c_comp": self.comp_for(r), "c_kl": self.kl_for(r),
                "c_taylor": self.c_taylor, "bezout": self.bezout_for(r),
                "taylor_margin": self.taylor_margin,
                "kl_split_base": self.kl_split_base,
                "band_margin": self.band_margin, "nu": self.nu(r, alpha),
                "c_ralpha": self.c_ralpha(r, alpha)}


def c_ralpha_constant(r: int, alpha: float,
                      constants: ReparamConstants = None) -> float:
    """Cardinality constant for the bound total: one-step family size is
    at most c_ralpha * exp(dchi / (r - 1 + alpha))."""
    cons = constants if constants is not None else ReparamConstants()
    return cons.c_ralpha(int(r), float(alpha))


def selection_cap(space, omega: float) -> float:
    """Largest admissible eps for norm budget omega:
    min(1, injectivity radius) / (2 (omega + 2))."""
    return min(1.0, space.injectivity_radius) / (2.0 * (omega + 2.0))


class _IteratedMap:
    """f composed with itself `steps` times, with chained derivatives."""

    def __init__(self, f, steps: int):
        if steps < 1:
            raise ValueError("steps must be positive")
        self.base = f
        self.steps = int(steps)
        self.space = f.space
        self.norm_cap = f.norm_cap
        self.name = f"{f.name}^{steps}"

    def step(self, x):
        for _ in range(self.steps):
            x = self.base.step(x)
        return x

    def jacobian(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        acc = self.base.jacobian(x)
        if acc.ndim == 2:
            acc = np.broadcast_to(acc, (x.shape[0],) + acc.shape).copy()
        x = self.base.step(x)
        for _ in range(self.steps - 1):
            j = self.base.jacobian(x)
            if j.ndim == 2:
                j = j[None]
            acc = np.einsum("nij,njk->nik", j, acc)
            x = self.base.step(x)
        return acc

    def deriv_stack(self, x, order: int) -> list:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        stack = self.base.deriv_stack(x, order)
        x = self.base.step(x)
        for _ in range(self.steps - 1):
            outer = self.base.deriv_stack(x, order)
            stack = map_chain(outer, stack)
            x = self.base.step(x)
        return stack


def _merged_images(thetas, pad: float):
    if not thetas:
        return np.empty(0), np.empty(0)
    ivs = sorted((th.offset - abs(th.slope) - pad,
                  th.offset + abs(th.slope) + pad) for th in thetas)
    los, his = [ivs[0][0]], [ivs[0][1]]
    for lo, hi in ivs[1:]:
        if lo <= his[-1]:
            his[-1] = max(his[-1], hi)
        else:
            los.append(lo)
            his.append(hi)
    return np.asarray(los), np.asarray(his)


@dataclass(frozen=True)
class ReparamFamily:
    """Affine maps theta with sigma o theta covering a target parameter
    set; length is asserted against the declared cardinality bound."""

    thetas: tuple
    chi_plus: int
    chi: int
    epsilon: float
    bound: float
    map_label: str = "map"
    curve_label: str = "curve"
    base_pieces: int = 0
    interval_count: int = 0
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.thetas) > self.bound + 1e-9:
            raise ValueError(
                f"family of size {len(self.thetas)} exceeds declared "
                f"bound {self.bound:.3g}")

    def __len__(self) -> int:
        return len(self.thetas)

    def covers_many(self, ts, pad: float = 1e-9) -> np.ndarray:
        los, his = _merged_images(self.thetas, pad)
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        if los.size == 0:
            return np.zeros(ts.shape, dtype=bool)
        idx = np.clip(np.searchsorted(los, ts, side="right") - 1, 0, None)
        return (los[idx] <= ts) & (ts <= his[idx])

    def covers(self, t: float, pad: float = 1e-9) -> bool:
        return bool(self.covers_many([t], pad)[0])

    def to_record(self) -> dict:
        return {"thetas": [[th.offset, th.slope] for th in self.thetas],
                "chi_plus": self.chi_plus, "chi": self.chi,
                "epsilon": self.epsilon, "bound": self.bound,
                "map": self.map_label, "curve": self.curve_label,
                "base_pieces": self.base_pieces,
                "interval_count": self.interval_count,
                "constants": dict(self.constants)}


def family_from_record(rec: dict) -> ReparamFamily:
    return ReparamFamily(
        tuple(AffineMap(a, b) for a, b in rec["thetas"]),
        int(rec["chi_plus"]), int(rec["chi"]), float(rec["epsilon"]),
        float(rec["bound"]), rec.get("map", "map"),
        rec.get("curve", "curve"), int(rec.get("base_pieces", 0)),
        int(rec.get("interval_count", 0)), dict(rec.get("constants", {})))


_FACT = (1.0, 1.0, 2.0)


def reparametrize_step(g, sigma, chi_plus: int, chi: int, epsilon: float,
                       constants: ReparamConstants = None,
                       check_eps: bool = True,
                       sample_per_piece: int = 17) -> ReparamFamily:
    """One subdivision step: affine pieces theta with g o sigma o theta
    bounded and the (chi_plus, chi) parameter class covered.

    chi_plus and chi are the ceilings of log ||Dg|| and of the log norm of
    Dg restricted to the curve direction; sigma must be strongly
    eps-bounded and eps must clear the selection cap for g's norm budget.
    """
    r, alpha = int(sigma.r), float(sigma.alpha)
    if not 1 <= r <= 3:
        raise ValueError("regularity r must be 1, 2, or 3")
    if chi_plus < chi:
        raise ValueError(f"chi_plus {chi_plus} below chi {chi}")
    cons = constants if constants is not None else ReparamConstants()
    if check_eps:
        omega = getattr(g, "norm_cap", None)
        if omega is not None:
            cap = selection_cap(g.space, omega)
            if epsilon >= cap:
                raise ValueError(
                    f"epsilon {epsilon:.3g} exceeds selection cap {cap:.3g}")
    dchi = chi_plus - chi
    width = cons.base_width(r, alpha, dchi)
    nbase = int(math.ceil(1.0 / width)) + 1
    edges = np.linspace(-1.0, 1.0, nbase + 1)
    slope = 1.0 / nbase
    centers = 0.5 * (edges[:-1] + edges[1:])

    if isinstance(sigma, MappedCurve):
        gcur = sigma.push(g)
    else:
        gcur = MappedCurve(sigma, (g,))
    dstack = gcur.derivs(centers, r)

    offs = np.linspace(-1.0, 1.0, sample_per_piece)
    tgrid = np.clip(centers[:, None] + slope * offs[None, :], -1.0, 1.0)
    dsig = np.atleast_2d(sigma.deriv(tgrid.ravel(), 1))
    bvals = slope * np.sqrt((dsig ** 2).sum(axis=1)).reshape(nbase, -1).max(axis=1)

    nu = cons.nu(r, alpha)
    thetas = []
    intervals = 0
    for i in range(nbase):
        bnorm = float(bvals[i])
        if bnorm <= 0.0:
            continue
        coef = np.stack(
            [np.asarray(dstack[k][i], dtype=float) * slope ** (k + 1) / _FACT[k]
             for k in range(r)], axis=1)
        quad = np.zeros(1)
        for row in coef:
            quad = npoly.polyadd(quad, npoly.polymul(row, row))
        lo = math.exp(2.0 * chi - cons.band_margin) * bnorm ** 2
        hi = math.exp(2.0 * chi + cons.band_margin) * bnorm ** 2
        gamma = AffineMap.onto(edges[i], edges[i + 1])
        for u, v in band_intervals(quad, lo, hi):
            intervals += 1
            cuts = np.linspace(u, v, nu + 1)
            for a0, a1 in zip(cuts[:-1], cuts[1:]):
                thetas.append(gamma.compose(AffineMap.onto(a0, a1)))
    return ReparamFamily(
        tuple(thetas), int(chi_plus), int(chi), float(epsilon),
        cons.cardinality_bound(r, alpha, dchi),
        getattr(g, "name", "map"), getattr(sigma, "label", "curve"),
        nbase, intervals, cons.snapshot(r, alpha))


def point_labels(g, sigma, ts):
    """Pointwise ceilings (chi_plus, chi) of the log norm of Dg at
    sigma(t) and of its restriction to the curve direction."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    pts = np.atleast_2d(sigma(ts))
    jac = g.jacobian(pts)
    if jac.ndim == 2:
        jac = np.broadcast_to(jac, (pts.shape[0],) + jac.shape)
    sv = np.linalg.svd(jac, compute_uv=False)
    log_full = np.log(sv[:, 0])
    d1 = np.atleast_2d(sigma.deriv(ts, 1))
    nd1 = np.linalg.norm(d1, axis=1)
    pushed = np.einsum("nij,nj->ni", jac, d1)
    npu = np.linalg.norm(pushed, axis=1)
    safe = (nd1 > 1e-300) & (npu > 1e-300)
    log_restr = np.where(safe, np.log(np.maximum(npu, 1e-300))
                         - np.log(np.maximum(nd1, 1e-300)), log_full)
    cp = np.ceil(log_full - 1e-12).astype(int)
    cc = np.minimum(np.ceil(log_restr - 1e-12).astype(int), cp)
    return cp, cc


def coverage_misses(g, sigma, family: ReparamFamily, samples: int = 1000,
                    seed: int = 0, pad: float = 1e-9):
    """Sample parameters, restrict to the (chi_plus, chi) class of the
    family, and count how many are missed by every theta image."""
    rng = np.random.default_rng(seed)
    ts = rng.uniform(-1.0, 1.0, samples)
    cp, cc = point_labels(g, sigma, ts)
    mask = (cp == family.chi_plus) & (cc == family.chi)
    if not mask.any():
        return 0, 0
    covered = family.covers_many(ts[mask], pad)
    return int((~covered).sum()), int(mask.sum())


def _level_curve(sigma, gamma: AffineMap, f, applied: int) -> MappedCurve:
    base = sigma.compose_affine(gamma)
    if isinstance(base, MappedCurve):
        return MappedCurve(base.base, base.maps + (f,) * applied,
                           label=base.label)
    return MappedCurve(base, (f,) * applied, label=base.label)


def _block_labels(f, cur: MappedCurve, block: int, ts):
    """(chi_plus, chi) ceilings for g = f^block along the mapped curve."""
    pts = np.atleast_2d(cur(ts))
    rec = scaled_products(f, pts, block, [block])
    scale, bmat = rec[block]
    sv = np.linalg.svd(bmat, compute_uv=False)
    log_full = scale + np.log(sv[:, 0])
    d1 = np.atleast_2d(cur.deriv(ts, 1))
    nd1 = np.linalg.norm(d1, axis=1)
    w = np.einsum("nij,nj->ni", bmat, d1)
    nw = np.linalg.norm(w, axis=1)
    safe = (nd1 > 1e-300) & (nw > 1e-300)
    log_restr = np.where(safe, scale + np.log(np.maximum(nw, 1e-300))
                         - np.log(np.maximum(nd1, 1e-300)), log_full)
    cp = np.ceil(log_full - 1e-12).astype(int)
    cc = np.minimum(np.ceil(log_restr - 1e-12).astype(int), cp)
    return cp, cc


def _chi_segments(f, cur: MappedCurve, block: int, samples: int):
    """Split [-1,1] into runs of constant (chi_plus, chi), refining run
    boundaries by bisection to 1e-6."""
    ts = np.linspace(-1.0, 1.0, samples)
    cp, cc = _block_labels(f, cur, block, ts)
    labels = list(zip(cp.tolist(), cc.tolist()))
    breaks = [-1.0]
    out_labels = [labels[0]]
    for i in range(1, len(ts)):
        if labels[i] == labels[i - 1]:
            continue
        lo, hi = ts[i - 1], ts[i]
        left = labels[i - 1]
        while hi - lo > 1e-6:
            mid = 0.5 * (lo + hi)
            mcp, mcc = _block_labels(f, cur, block, [mid])
            if (int(mcp[0]), int(mcc[0])) == left:
                lo = mid
            else:
                hi = mid
        breaks.append(0.5 * (lo + hi))
        out_labels.append(labels[i])
    breaks.append(1.0)
    return [(breaks[i], breaks[i + 1], out_labels[i][0], out_labels[i][1])
            for i in range(len(out_labels)) if breaks[i + 1] > breaks[i]]


def _propagate(f, sigma, gammas, applied: int, offs):
    """Batched evaluation of positions and first-derivative log norms of
    f^applied o sigma o gamma at the offsets, for all gammas at once."""
    params = np.concatenate([g(offs) for g in gammas])
    slopes = np.repeat([abs(g.slope) for g in gammas], offs.size)
    x = np.atleast_2d(sigma(params))
    v = np.atleast_2d(sigma.deriv(params, 1)) * slopes[:, None]
    nv = np.linalg.norm(v, axis=1)
    logd = np.where(nv > 0, np.log(np.maximum(nv, 1e-300)), -np.inf)
    v = np.where(nv[:, None] > 0, v / np.maximum(nv, 1e-300)[:, None], v)
    for _ in range(applied):
        jac = f.jacobian(x)
        if jac.ndim == 2:
            jac = np.broadcast_to(jac, (x.shape[0],) + jac.shape)
        v = np.einsum("nij,nj->ni", jac, v)
        nv = np.linalg.norm(v, axis=1)
        logd += np.log(np.maximum(nv, 1e-300))
        v /= np.maximum(nv, 1e-300)[:, None]
        x = f.step(x)
    return x, logd.reshape(len(gammas), offs.size)


_RENORM_LIMIT = 16384


def _renorm_filter(f, sigma, gammas, applied: int, target, epsilon: float,
                   filter_pad: float, do_renorm: bool, max_pieces: int):
    """Subdivide pieces back to first-derivative sup <= epsilon, then keep
    those whose sampled image approaches the target point.  Thresholds are
    padded by the sample-gap arc length so a piece that truly meets the
    eps-tube is never dropped."""
    if not gammas:
        return [], 1
    offs = np.linspace(-1.0, 1.0, 33)
    x, logd = _propagate(f, sigma, gammas, applied, offs)
    dist = f.space.distance(x, target).reshape(len(gammas), offs.size)
    logm = logd.max(axis=1)
    sup = np.exp(np.minimum(logm, 700.0))
    max_parts = 1
    kept = []
    candidates = []
    for i, gam in enumerate(gammas):
        gap = sup[i] * (2.0 / (offs.size - 1)) * 0.5
        if dist[i].min() > epsilon * filter_pad + gap:
            continue
        if not do_renorm or sup[i] <= epsilon:
            kept.append(gam)
            continue
        parts = int(math.ceil(sup[i] * 1.001 / epsilon))
        if parts > _RENORM_LIMIT:
            raise RuntimeError(
                f"renormalization needs {parts} parts; reduce the block "
                "length or the horizon")
        max_parts = max(max_parts, parts)
        cuts = np.linspace(-1.0, 1.0, parts + 1)
        for a0, a1 in zip(cuts[:-1], cuts[1:]):
            candidates.append(gam.compose(AffineMap.onto(a0, a1)))
        if len(candidates) + len(kept) > max_pieces:
            raise RuntimeError("piece budget exceeded during renormalization")
    if candidates:
        offs9 = np.linspace(-1.0, 1.0, 9)
        x2, logd2 = _propagate(f, sigma, candidates, applied, offs9)
        dist2 = f.space.distance(x2, target).reshape(len(candidates),
                                                     offs9.size)
        sup2 = np.exp(np.minimum(logd2.max(axis=1), 700.0))
        gap2 = sup2 * (2.0 / (offs9.size - 1)) * 0.5
        good = dist2.min(axis=1) <= epsilon * filter_pad + gap2
        kept.extend(c for c, ok in zip(candidates, good) if ok)
    return kept, max_parts


@dataclass(frozen=True)
class BowenLevel:
    index: int
    start: int
    block: int
    entered: int
    shortcut: int
    segments: int
    produced: int
    kept: int
    renorm_parts: int
    dchi_max: int
    labels: tuple


@dataclass(frozen=True)
class BowenRecord:
    family: ReparamFamily
    levels: tuple
    q: int
    n: int
    epsilon: float
    upsilon: float
    rho: float
    dchi_max: int
    map_label: str

    def counts(self):
        return [(0, 1)] + [(lv.start + lv.block, lv.kept)
                           for lv in self.levels]

    def to_record(self) -> dict:
        return {"family": self.family.to_record(),
                "levels": [vars(lv) | {"labels": list(lv.labels)}
                           for lv in self.levels],
                "q": self.q, "n": self.n, "epsilon": self.epsilon,
                "upsilon": self.upsilon, "rho": self.rho,
                "dchi_max": self.dchi_max, "map": self.map_label}


def bowen_cover(f, sigma, y, n: int, q: int, epsilon: float,
                constants: ReparamConstants = None, renorm: bool = True,
                chi_samples: int = 129, filter_pad: float = 1.25,
                max_pieces: int = 500000) -> BowenRecord:
    """Cover the part of sigma shadowing the orbit of y for n steps within
    eps, by iterating reparametrize_step over blocks of length q (plus an
    initial block of length n mod q).

    After each block the pieces are subdivided back to strong
    eps-boundedness and pieces leaving the eps-tube around the orbit are
    dropped; the final level skips the subdivision (counts stay honest,
    coverage is unchanged).  Pieces already strongly eps-bounded after the
    block skip subdivision entirely.
    """
    if n < q:
        raise ValueError("need n >= q")
    cons = constants if constants is not None else ReparamConstants()
    r, alpha = int(sigma.r), float(sigma.alpha)
    if f.norm_cap is not None:
        cap = selection_cap(f.space, f.norm_cap)
        if epsilon >= cap:
            raise ValueError(
                f"epsilon {epsilon:.3g} exceeds selection cap {cap:.3g}")
    cert = check_bounded(sigma, epsilon)
    if not cert.strongly:
        raise ValueError("initial curve must be strongly eps-bounded")
    ys = orbit_points(f, np.asarray(y, dtype=float), n)
    c = n % q
    blocks = ([c] if c else []) + [q] * ((n - c) // q)
    gammas = [AffineMap.identity()]
    bound_running = 1.0
    applied = 0
    levels = []
    dchi_total = 0
    for li, block in enumerate(blocks):
        g = _IteratedMap(f, block)
        final = li == len(blocks) - 1
        produced = []
        label_counts = {}
        level_bound = 0.0
        shortcut = 0
        segments = 0
        dchi_level = 0
        for gam in gammas:
            cur = _level_curve(sigma, gam, f, applied)
            pushed = MappedCurve(cur.base, cur.maps + (f,) * block,
                                 label=cur.label)
            if check_bounded(pushed, epsilon, resolution=2.0 / 64).strongly:
                produced.append(gam)
                shortcut += 1
                level_bound += 1.0
                continue
            for u, v, cp, cc in _chi_segments(f, cur, block, chi_samples):
                sub = AffineMap.onto(u, v)
                fam = reparametrize_step(g, cur.compose_affine(sub), cp, cc,
                                         epsilon, cons, check_eps=False)
                segments += 1
                key = (cp, cc)
                label_counts[key] = label_counts.get(key, 0) + len(fam)
                dchi_level = max(dchi_level, cp - cc)
                level_bound += fam.bound
                for th in fam.thetas:
                    produced.append(gam.compose(sub.compose(th)))
                if len(produced) > max_pieces:
                    raise RuntimeError("piece budget exceeded")
        applied += block
        kept, parts = _renorm_filter(f, sigma, produced, applied,
                                     ys[applied], epsilon, filter_pad,
                                     renorm and not final, max_pieces)
        bound_running = max(bound_running * level_bound * parts, 1.0)
        dchi_total = max(dchi_total, dchi_level)
        levels.append(BowenLevel(
            li, applied - block, block, len(gammas), shortcut, segments,
            len(produced), len(kept), parts, dchi_level,
            tuple(sorted(label_counts.items()))))
        gammas = kept
    cps = [lbl[0] for lv in levels for lbl, _ in lv.labels]
    ccs = [lbl[1] for lv in levels for lbl, _ in lv.labels]
    family = ReparamFamily(
        tuple(gammas), max(cps) if cps else 0, min(ccs) if ccs else 0,
        float(epsilon), bound_running, f.name,
        getattr(sigma, "label", "curve"), len(levels), 0,
        cons.snapshot(r, alpha))
    return BowenRecord(family, tuple(levels), q, n, float(epsilon),
                       float(f.norm_cap) if f.norm_cap else float("nan"),
                       r - 1 + alpha, dchi_total, f.name)


@dataclass(frozen=True)
class GrowthReport:
    measured: float
    ceiling: float            # nan when the chi data is unavailable
    counts: tuple
    tail: int
    dchi_max: int

    @property
    def within_ceiling(self) -> bool:
        return math.isnan(self.ceiling) or self.measured <= self.ceiling + 1e-6


def growth_rate(history, q: int = None, rho: float = None,
                upsilon: float = None, c_ralpha: float = None) -> GrowthReport:
    """Tail growth of log counts per step, with the theoretical ceiling
    dchi_max / (rho q) + log(2 q upsilon c_ralpha) / q when the history is
    a BowenRecord carrying its chi data."""
    dchi = 0
    if isinstance(history, BowenRecord):
        pairs = history.counts()
        q = history.q if q is None else q
        rho = history.rho if rho is None else rho
        upsilon = history.upsilon if upsilon is None else upsilon
        if c_ralpha is None:
            c_ralpha = history.family.constants.get("c_ralpha")
        dchi = history.dchi_max
    else:
        pairs = [(int(t), float(cnt)) for t, cnt in history]
    if len(pairs) < 2:
        t, cnt = pairs[0]
        rates = [math.log(max(cnt, 1.0)) / max(t, 1)]
    else:
        rates = [(math.log(max(c1, 1.0)) - math.log(max(c0, 1.0))) / (t1 - t0)
                 for (t0, c0), (t1, c1) in zip(pairs[:-1], pairs[1:])]
    tail = max(1, (len(rates) + 1) // 2)
    measured = max(rates[-tail:])
    ceiling = float("nan")
    if q and rho and upsilon and c_ralpha and not math.isnan(upsilon):
        ceiling = (dchi / (rho * q)
                   + math.log(2.0 * q * upsilon * c_ralpha) / q)
    return GrowthReport(float(measured), ceiling, tuple(pairs), tail,
                        int(dchi))


# ---------------------------------------------------------------------------
# calibration suite

def _poly_sup(coeffs) -> float:
    """Exact sup of |p| on [-1, 1]."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
    if c.size == 0:
        return 0.0
    cands = [-1.0, 1.0]
    if c.size > 2:
        roots = npoly.polyroots(npoly.polyder(c))
        cands += [float(z.real) for z in roots
                  if abs(z.imag) < 1e-9 and -1.0 <= z.real <= 1.0]
    return float(np.abs(npoly.polyval(np.asarray(cands), c)).max())


def _poly_holder(coeffs, alpha: float, grid: int = 129) -> float:
    """alpha-Hölder seminorm of p on [-1, 1]; exact via the derivative sup
    at alpha = 1, measured on a grid otherwise."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
    if c.size <= 1:
        return 0.0
    if alpha >= 1.0:
        return _poly_sup(npoly.polyder(c))
    ts = np.linspace(-1.0, 1.0, grid)
    vals = npoly.polyval(ts, c)
    diff = np.abs(vals[:, None] - vals[None, :])
    gaps = np.abs(ts[:, None] - ts[None, :]) ** alpha
    np.fill_diagonal(gaps, np.inf)
    return float((diff / gaps).max())


def _fixed_polys(degree: int):
    out = [np.array([0.0, 1.0])]
    for k in range(2, degree + 1):
        mono = np.zeros(k + 1)
        mono[-1] = 1.0
        out.append(mono)
        out.append(np.polynomial.chebyshev.cheb2poly(
            np.eye(k + 1)[-1]))
    out.append(np.array([0.5, -1.0, 0.0, 2.0]))
    out.append(np.array([0.0, 3.0, 0.0, -4.0, 0.0, 1.6]))
    return out


# near-extremal composition pairs found by randomized hill climbing; they
# pin the measured maxima so reports agree across seeds
_PINNED_PAIRS = (
    ([0.120105, -1.597284, 0.051687, -0.479183, -1.521431],
     [0.54761, -0.426199, -0.240762, -0.011459, 0.255494]),
    ([0.323185, -0.000249, 1.865233], [0.49985, 0.00023, 0.49992]),
    ([-0.898404, -0.932316, -1.075652, -0.310461],
     [0.395717, -0.313318, 0.186399, -0.104565]),
    ([-1.187074, -0.316058, -1.497916, -0.32971, -0.250081],
     [0.334874, -0.493798, 0.006834, -0.164493]),
    ([-0.244107, 1.094875, 0.925966, 3.085753],
     [0.500002, 3.1e-05, 0.499967]),
    ([-0.484049, -0.835827, -0.065209, -2.344651],
     [0.333896, 0.498345, 0.001769, 0.165989]),
)


@dataclass(frozen=True)
class CalibrationReport:
    r: int
    alpha: float
    trials: int
    seed: int
    kl_minimal: float
    taylor_minimal: float
    comp_minimal: float
    kl_used: float
    taylor_used: float
    comp_used: float
    kl_violations: int
    taylor_violations: int
    comp_violations: int
    kl_worst: tuple
    comp_worst: tuple

    @property
    def all_hold(self) -> bool:
        return (self.kl_violations == 0 and self.taylor_violations == 0
                and self.comp_violations == 0)


def calculus_inequality_suite(r: int, alpha: float,
                              constants: ReparamConstants = None,
                              trials: int = 1000, seed: int = 0,
                              degree: int = 6) -> CalibrationReport:
    """Measure minimal constants for the derivative-norm inequalities on
    fixed extremal families plus random polynomials.

    (a) ||D^k p||_0 <= C_K (||p||_0 + ||D^r p||_alpha) for k <= r;
    (b) Taylor remainder <= (C_T / r!) ||D^r p||_alpha |a|^(r+alpha);
    (c) ||D^r (u o v)||_alpha <= C_B N_u max(1, N_v)^(r+alpha) with
        N_w = max(sup_{1<=s<=r} ||D^s w||_0, ||D^r w||_alpha).
    """
    if not 1 <= r <= 3:
        raise ValueError("r must be 1, 2, or 3")
    cons = constants if constants is not None else ReparamConstants()
    ck, cb, ct = cons.kl_for(r), cons.comp_for(r), cons.c_taylor
    rng = np.random.default_rng(seed)
    polys = _fixed_polys(degree)
    polys += [rng.standard_normal(rng.integers(2, degree + 2))
              for _ in range(trials)]
    kl_min = taylor_min = 0.0
    kl_viol = taylor_viol = 0
    kl_worst = ()
    for c in polys:
        c = np.asarray(c, dtype=float)
        dcs = [c]
        for _ in range(r + 1):
            dcs.append(npoly.polyder(dcs[-1]) if dcs[-1].size > 1
                       else np.zeros(1))
        sups = [_poly_sup(dc) for dc in dcs]
        hol = _poly_holder(dcs[r], alpha)
        denom = sups[0] + hol
        if denom < 1e-12:
            continue
        ratio = max(sups[1:r + 1]) / denom
        if ratio > kl_min:
            kl_min, kl_worst = ratio, tuple(np.round(c, 6))
        if ratio > ck * (1 + 1e-9):
            kl_viol += 1
        if hol > 1e-12:
            scale = np.abs(c).sum()
            for x in (-0.9, -0.5, 0.0, 0.4, 0.8):
                for frac in (0.3, 0.7, 1.0):
                    for a in (frac * (1.0 - x), -frac * (1.0 + x)):
                        # small steps only make float cancellation noise
                        if abs(a) < 1e-2:
                            continue
                        taylor = sum(npoly.polyval(x, dcs[k]) * a ** k
                                     / math.factorial(k) for k in range(r + 1))
                        rem = abs(npoly.polyval(x + a, c) - taylor)
                        bound = hol * abs(a) ** (r + alpha) / math.factorial(r)
                        if bound < 1e-10 * scale:
                            continue
                        tratio = rem / bound
                        taylor_min = max(taylor_min, tratio)
                        if tratio > ct * (1 + 1e-6):
                            taylor_viol += 1
    comp_min = 0.0
    comp_viol = 0
    comp_worst = ()
    fixed = _fixed_polys(degree)
    pairs = [(np.asarray(u), np.asarray(v)) for u, v in _PINNED_PAIRS]
    pairs += [(fixed[i], fixed[j]) for i in range(len(fixed))
              for j in range(len(fixed)) if i != j][:40]
    pairs += [(rng.standard_normal(rng.integers(2, degree + 2)),
               rng.standard_normal(rng.integers(2, degree + 2)))
              for _ in range(trials)]
    for u, v in pairs:
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        vsup = _poly_sup(v)
        if vsup < 1e-12 or _poly_sup(u) < 1e-12:
            continue
        v = v / vsup
        w = npoly.Polynomial(u)(npoly.Polynomial(v)).coef
        dus, dvs, dws = [u], [v], [w]
        for _ in range(r):
            for lst in (dus, dvs, dws):
                lst.append(npoly.polyder(lst[-1]) if lst[-1].size > 1
                           else np.zeros(1))
        nu_ = max(max(_poly_sup(dus[s]) for s in range(1, r + 1)),
                  _poly_holder(dus[r], alpha))
        nv_ = max(max(_poly_sup(dvs[s]) for s in range(1, r + 1)),
                  _poly_holder(dvs[r], alpha))
        lhs = _poly_holder(dws[r], alpha)
        denom = nu_ * max(1.0, nv_) ** (r + alpha)
        if denom < 1e-12:
            continue
        ratio = lhs / denom
        if ratio > comp_min:
            comp_min, comp_worst = ratio, (tuple(np.round(u, 6)),
                                           tuple(np.round(v, 6)))
        if ratio > cb * (1 + 1e-9):
            comp_viol += 1
    return CalibrationReport(r, float(alpha), trials, seed,
                             float(kl_min), float(taylor_min),
                             float(comp_min), ck, ct, cb,
                             kl_viol, taylor_viol, comp_viol,
                             kl_worst, comp_worst)
