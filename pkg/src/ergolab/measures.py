"""Empirical measures, a weak-* test dictionary, measure discretization,
and decomposition by exponent signature.

All measures here are finite weighted point clouds.  Weak-* proximity is
scored against a fixed 64-function dictionary with geometrically decaying
weights, so it is a metric on the supported spaces.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .lyapunov import ensemble_exponents
from .orbits import ensemble_orbits, orbit_points, scaled_products
from .spaces import Box, Torus

DICTIONARY_SIZE = 64


@dataclass
class EmpiricalMeasure:
    """Weighted point cloud on a torus or box, normalized to mass one."""

    space: object
    points: np.ndarray
    weights: np.ndarray = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.shape[1] != self.space.dim:
            raise ValueError("points do not match the space dimension")
        self.points = self.space.wrap(pts)
        if self.weights is None:
            self.weights = np.full(pts.shape[0], 1.0 / pts.shape[0])
        else:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (pts.shape[0],):
                raise ValueError("weights must align with points")
            if np.any(w < 0):
                raise ValueError("weights must be nonnegative")
            total = w.sum()
            if total <= 0:
                raise ValueError("total mass must be positive")
            self.weights = w / total

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    def integrate(self, values) -> float:
        """Integral of a function given by per-point values or a callable
        on point batches."""
        vals = values(self.points) if callable(values) else np.asarray(values, dtype=float)
        return float(np.sum(self.weights * vals))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"x{i}" for i in range(self.space.dim)] + ["weight"])
        for p, w in zip(self.points, self.weights):
            writer.writerow([f"{v:.17g}" for v in p] + [f"{w:.17g}"])
        return buf.getvalue()

    @staticmethod
    def from_csv(space, text: str) -> "EmpiricalMeasure":
        rows = list(csv.reader(io.StringIO(text)))
        data = np.array([[float(v) for v in row] for row in rows[1:]])
        return EmpiricalMeasure(space=space, points=data[:, :-1], weights=data[:, -1])


def from_orbit(f, x0, n: int, burn_in: int = 0) -> EmpiricalMeasure:
    """Uniform measure on an orbit segment after a burn-in."""
    x0 = np.asarray(x0, dtype=float)
    pts = orbit_points(f, x0, burn_in + n)[burn_in:]
    return EmpiricalMeasure(space=f.space, points=pts,
                            provenance={"kind": "orbit", "map": f.name,
                                        "start": [float(v) for v in x0],
                                        "length": n, "burn_in": burn_in})


def from_ensemble(f, starts, n: int, burn_in: int = 0,
                  weights=None) -> EmpiricalMeasure:
    """Pooled measure over an ensemble of orbit segments; per-orbit
    weights spread uniformly along each orbit."""
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    orbits = ensemble_orbits(f, starts, burn_in + n)[:, burn_in:]
    m, t, d = orbits.shape
    if weights is None:
        w = np.full(m * t, 1.0 / (m * t))
    else:
        w = np.repeat(np.asarray(weights, dtype=float) / t, t)
    return EmpiricalMeasure(space=f.space, points=orbits.reshape(m * t, d), weights=w,
                            provenance={"kind": "ensemble", "map": f.name,
                                        "orbits": m, "length": n, "burn_in": burn_in})


def mixture(components) -> EmpiricalMeasure:
    """Convex combination of (weight, measure) pairs on one space."""
    comps = list(components)
    if not comps:
        raise ValueError("empty mixture")
    space = comps[0][1].space
    total = sum(w for w, _ in comps)
    pts = np.concatenate([mu.points for _, mu in comps])
    wts = np.concatenate([(w / total) * mu.weights for w, mu in comps])
    return EmpiricalMeasure(space=space, points=pts, weights=wts,
                            provenance={"kind": "mixture", "parts": len(comps)})


def _torus_frequencies(dim: int, count: int) -> np.ndarray:
    """First `count` nonzero integer frequency vectors, ordered by |k|_1
    then lexicographically, first nonzero component positive."""
    found = []
    total = 1
    while len(found) < count:
        for vec in _vectors_with_l1(dim, total):
            nz = next(v for v in vec if v != 0)
            if nz > 0:
                found.append(vec)
                if len(found) == count:
                    break
        total += 1
    return np.array(found, dtype=int)


def _vectors_with_l1(dim: int, total: int):
    """Integer vectors with |k|_1 == total, lexicographically descending in
    the first coordinate."""
    if dim == 1:
        yield (total,)
        yield (-total,)
        return
    for head in range(total, -total - 1, -1):
        rem = total - abs(head)
        for tail in _vectors_with_l1(dim - 1, rem) if rem > 0 else [(0,) * (dim - 1)]:
            yield (head,) + tail


def dictionary_values(space, points, count: int = DICTIONARY_SIZE) -> np.ndarray:
    """Values of the first `count` dictionary functions at each point,
    shape (m, count).

    Torus: cos/sin of 2 pi k.x over the first frequency vectors ordered by
    |k|_1.  Box: tensor Chebyshev polynomials over rescaled coordinates,
    ordered by total degree.  All functions have sup norm at most 1.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    d = space.dim
    if isinstance(space, Torus):
        freqs = _torus_frequencies(d, (count + 1) // 2)
        phase = 2.0 * np.pi * pts @ freqs.T
        out = np.empty((pts.shape[0], 2 * freqs.shape[0]))
        out[:, 0::2] = np.cos(phase)
        out[:, 1::2] = np.sin(phase)
        return out[:, :count]
    lo = np.array([b[0] for b in space.bounds])
    sides = np.asarray(space.sides)
    z = np.clip(2.0 * (pts - lo) / sides - 1.0, -1.0, 1.0)
    theta = np.arccos(z)
    idxs = _cheb_indices(d, count)
    out = np.empty((pts.shape[0], count))
    for j, multi in enumerate(idxs):
        vals = np.ones(pts.shape[0])
        for axis, k in enumerate(multi):
            if k:
                vals = vals * np.cos(k * theta[:, axis])
        out[:, j] = vals
    return out


def _cheb_indices(dim: int, count: int):
    found = []
    total = 1
    while len(found) < count:
        for multi in _compositions(dim, total):
            found.append(multi)
            if len(found) == count:
                break
        total += 1
    return found


def _compositions(dim: int, total: int):
    """Nonnegative integer multi-indices with given sum, lexicographic."""
    if dim == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for tail in _compositions(dim - 1, total - head):
            yield (head,) + tail


def dictionary_integrals(mu: EmpiricalMeasure) -> np.ndarray:
    vals = dictionary_values(mu.space, mu.points)
    return vals.T @ mu.weights


def weak_star_distance(mu: EmpiricalMeasure, nu: EmpiricalMeasure) -> float:
    """Sum over the dictionary of 2^-j |mu(g_j) - nu(g_j)|."""
    if type(mu.space) is not type(nu.space) or mu.space.dim != nu.space.dim:
        raise ValueError("measures live on different spaces")
    diff = np.abs(dictionary_integrals(mu) - dictionary_integrals(nu))
    decay = 0.5 ** np.arange(1, DICTIONARY_SIZE + 1)
    return float(np.sum(decay * diff))


@dataclass
class SignatureDecomposition:
    """Split of a measure by the sign pattern of per-point exponents."""

    beta: float                      # mass with the target signature
    gamma: float                     # remainder mass
    target_label: str
    components: dict                 # label -> EmpiricalMeasure or None
    masses: dict                     # label -> mass
    counts: dict
    zero_threshold: float

    def recombined(self) -> EmpiricalMeasure:
        parts = [(self.masses[label], comp)
                 for label, comp in self.components.items()
                 if comp is not None and self.masses[label] > 0]
        return mixture(parts)


def signature_decomposition(mu: EmpiricalMeasure, f, n: int = 500,
                            zero_threshold: float = 0.02) -> SignatureDecomposition:
    """Classify each support point by the signs of its finite-time
    exponents and split the measure accordingly.

    2D: target signature is one positive and one negative exponent
    ("hyperbolic").  3D: "one_positive" (the target) and "two_positive"
    (exactly two positive, one negative) are tracked separately; anything
    else lands in "other".
    """
    d = mu.space.dim
    if d not in (2, 3):
        raise ValueError("signature decomposition expects dimension 2 or 3")
    lams = ensemble_exponents(f, mu.points, n)
    zt = zero_threshold
    npos = np.sum(lams > zt, axis=1)
    nneg = np.sum(lams < -zt, axis=1)
    if d == 2:
        labels = {"hyperbolic": (npos == 1) & (nneg == 1)}
        target = "hyperbolic"
    else:
        labels = {"one_positive": (npos == 1) & (nneg >= 1),
                  "two_positive": (npos == 2) & (nneg == 1)}
        target = "one_positive"
    taken = np.zeros(mu.size, dtype=bool)
    components, counts, mass = {}, {}, {}
    for label, mask in labels.items():
        mask = mask & ~taken
        taken |= mask
        counts[label] = int(mask.sum())
        mass[label] = float(mu.weights[mask].sum())
        components[label] = (EmpiricalMeasure(space=mu.space, points=mu.points[mask],
                                              weights=mu.weights[mask])
                             if mask.any() else None)
    counts["other"] = int((~taken).sum())
    mass["other"] = float(mu.weights[~taken].sum())
    components["other"] = (EmpiricalMeasure(space=mu.space, points=mu.points[~taken],
                                            weights=mu.weights[~taken])
                           if (~taken).any() else None)
    beta = min(1.0, mass[target])
    return SignatureDecomposition(beta=beta, gamma=max(0.0, 1.0 - beta),
                                  target_label=target, components=components,
                                  masses=mass, counts=counts, zero_threshold=zt)


@dataclass
class DiscretizedComponent:
    weight: float
    representative: EmpiricalMeasure
    rep_start: np.ndarray
    entropy: float
    lambda_plus: float
    bin_key: tuple


@dataclass
class DiscretizationResult:
    """Finite approximation of a measure by representative orbit measures
    chosen per (entropy, exponent, dictionary-integral) bin."""

    components: list
    level: int                 # L
    r0: float
    dictionary_count: int      # K rounded dictionary integrals
    checks: dict
    dropped_mass: float
    bins_before_merge: int

    def approximant(self) -> EmpiricalMeasure:
        return mixture([(c.weight, c.representative) for c in self.components])


def _union_find_merge(keys):
    """Group bin keys whose coordinates all differ by at most one."""
    keys = list(keys)
    parent = list(range(len(keys)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(keys)):
        for j in range(i + 1, len(keys)):
            if all(abs(a - b) <= 1 for a, b in zip(keys[i], keys[j])):
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri
    groups = {}
    for i in range(len(keys)):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def discretize_measure(mu: EmpiricalMeasure, f, level: int,
                       orbit_len: int = 2000, n_max: int = 5,
                       exponent_steps: int = 500,
                       partition_dims=None, weak_star_scale: float = 2.0,
                       guard_ratio: float = 10.0,
                       merge_adjacent: bool = True) -> DiscretizationResult:
    """Approximate mu by finitely many orbit measures, one per occupied
    bin of (entropy, top exponent, rounded dictionary integrals).

    Support points are binned by per-point estimates: entropy rate of a
    length-orbit_len orbit on a coarse grid, top finite-time exponent, and
    the first K = ceil(log2(4 L)) dictionary integrals rounded to 1/(2 L).
    Estimator noise can split one ergodic component across adjacent bins,
    so adjacent occupied bins are merged before representatives are drawn.
    The weak-*, entropy, and exponent deviations of the approximant are
    computed and checked against their target bounds (scale/L, d R0/L,
    2 R0/L)."""
    from . import entropy as ent
    from .partitions import FinitePartition, orbit_codes

    d = mu.space.dim
    m = mu.size
    big = 32
    probe = scaled_products(f, mu.points, big, [big])[big]
    top = probe[0] + np.log(np.linalg.svd(probe[1], compute_uv=False)[:, 0])
    r0 = float(np.floor(max(top.max() / big, 1e-9)) + 1.0)

    dims = partition_dims or (4,) * d
    part = FinitePartition(mu.space, tuple(dims))
    orbits = ensemble_orbits(f, mu.points, orbit_len - 1)
    codes = orbit_codes(part, orbits)
    h_pts = ent.per_point_entropy_rates(codes, n_max, guard_ratio)
    lam_pts = ensemble_exponents(f, mu.points, exponent_steps)[:, 0]

    k_dict = int(np.ceil(np.log2(4 * level)))
    dict_pts = np.empty((m, k_dict))
    for lo_i in range(0, m, 256):
        chunk = orbits[lo_i:lo_i + 256]
        vals = dictionary_values(mu.space, chunk.reshape(-1, d), k_dict)
        dict_pts[lo_i:lo_i + 256] = vals.reshape(chunk.shape[0], orbit_len,
                                                 k_dict).mean(axis=1)

    keep = ~np.isnan(h_pts)
    dropped = float(mu.weights[~keep].sum())
    delta = 1.0 / (2.0 * level)
    h_safe = np.nan_to_num(h_pts, nan=0.0)
    h_bin = np.clip((h_safe / (d * r0 / level)).astype(np.int64), 0, level - 1)
    lam_bin = np.clip(((lam_pts + r0) / (2.0 * r0 / level)).astype(np.int64),
                      0, level - 1)
    dict_bin = np.floor(dict_pts / delta).astype(np.int64)

    bins = {}
    for i in range(m):
        if not keep[i]:
            continue
        key = (int(h_bin[i]), int(lam_bin[i])) + tuple(int(v) for v in dict_bin[i])
        bins.setdefault(key, []).append(i)
    n_raw = len(bins)
    keys = list(bins)
    groups = _union_find_merge(keys) if merge_adjacent else [[k] for k in range(len(keys))]

    components = []
    for group in groups:
        idx = np.concatenate([bins[keys[g]] for g in group]).astype(int)
        weight = float(mu.weights[idx].sum())
        rep_local = idx[int(np.argmax(mu.weights[idx]))]
        rep_measure = EmpiricalMeasure(
            space=mu.space, points=orbits[rep_local],
            provenance={"kind": "discretization_rep", "map": f.name})
        components.append(DiscretizedComponent(
            weight=weight, representative=rep_measure,
            rep_start=mu.points[rep_local].copy(),
            entropy=float(h_pts[rep_local]), lambda_plus=float(lam_pts[rep_local]),
            bin_key=keys[group[0]]))
    total = sum(c.weight for c in components)
    for c in components:
        c.weight /= total

    approx = mixture([(c.weight, c.representative) for c in components])
    kept = EmpiricalMeasure(space=mu.space, points=mu.points[keep],
                            weights=mu.weights[keep])
    wsd = weak_star_distance(kept, approx)
    h_mu = float(np.nansum(mu.weights[keep] * h_pts[keep]) / mu.weights[keep].sum())
    h_tilde = sum(c.weight * c.entropy for c in components)
    lam_mu = float(np.sum(mu.weights[keep] * lam_pts[keep]) / mu.weights[keep].sum())
    lam_tilde = sum(c.weight * c.lambda_plus for c in components)
    checks = {
        "weak_star": {"value": wsd, "bound": weak_star_scale / level,
                      "ok": bool(wsd <= weak_star_scale / level)},
        "entropy": {"value": abs(h_mu - h_tilde), "bound": d * r0 / level,
                    "ok": bool(abs(h_mu - h_tilde) <= d * r0 / level)},
        "exponent": {"value": abs(lam_mu - lam_tilde), "bound": 2.0 * r0 / level,
                     "ok": bool(abs(lam_mu - lam_tilde) <= 2.0 * r0 / level)},
    }
    return DiscretizationResult(components=components, level=level, r0=r0,
                                dictionary_count=k_dict, checks=checks,
                                dropped_mass=dropped, bins_before_merge=n_raw)
