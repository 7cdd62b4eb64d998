"""Entropy-rate estimation from symbolic itineraries and the entropy
bound reports that combine partition entropy with cocycle data.

Block entropies use fixed block starts 0..S-1 so every shallower depth is
an exact marginal of the deeper one; the reported rate is the minimum
conditional increment over a trusted tail window, where "trusted" means
the number of distinct blocks stays under sample_count / guard_ratio.
No extrapolation beyond the window is attempted.
"""

from __future__ import annotations

import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import measures as ms
from .lyapunov import ensemble_exponents, positive_exponent_sum
from .orbits import ensemble_orbits, scaled_products
from .partitions import FinitePartition, distribution_entropy, orbit_codes


class UndersampledError(RuntimeError):
    """Raised when no depth of at least min_depth is trusted."""

    def __init__(self, message: str, max_trusted_depth: int):
        super().__init__(message)
        self.max_trusted_depth = max_trusted_depth


@dataclass
class EntropyEstimate:
    depths: tuple
    levels: tuple            # H_n / n
    increments: tuple        # H_n - H_{n-1}, H_0 = 0
    rate: float              # min increment over the trusted tail window
    level_rate: float        # min H_n/n over the same window
    window: tuple            # (low, high) depths
    cap_depth: int           # deepest trusted depth
    requested_depth: int
    capped: bool
    distinct: tuple
    block_samples: int
    stderr: float

    def summary(self) -> dict:
        return {"rate": self.rate, "level_rate": self.level_rate,
                "cap_depth": self.cap_depth, "capped": self.capped,
                "stderr": self.stderr, "block_samples": self.block_samples}


def block_entropy_curve(codes: np.ndarray, n_max: int, weights=None):
    """H_n for n = 1..n_max from code rows (m, T), using the fixed block
    starts 0..T-n_max.  Returns (entropies, distinct_counts, n_blocks)."""
    arr = np.asarray(codes)
    if arr.ndim == 1:
        arr = arr[None]
    m, t = arr.shape
    if t < n_max:
        raise ValueError("orbit shorter than requested block depth")
    s = t - n_max + 1
    if weights is None:
        w = np.full(m * s, 1.0 / (m * s))
    else:
        w = np.repeat(np.asarray(weights, dtype=float) / s, s)
    ids = np.zeros(m * s, dtype=np.int64)
    ents, distinct = [], []
    for depth in range(1, n_max + 1):
        col = arr[:, depth - 1:depth - 1 + s].reshape(m * s)
        stacked = np.stack([ids, col], axis=1)
        uniq, ids = np.unique(stacked, axis=0, return_inverse=True)
        ents.append(distribution_entropy(np.bincount(ids, weights=w)))
        distinct.append(uniq.shape[0])
    return np.array(ents), np.array(distinct), m * s


def _rate_from_curve(ents, distinct, n_blocks, n_max, guard_ratio, min_depth):
    trusted = [k + 1 for k in range(len(ents)) if distinct[k] <= n_blocks / guard_ratio]
    cap = max(trusted) if trusted else 0
    if cap < min_depth:
        raise UndersampledError(
            f"only depth {cap} is trusted with {n_blocks} blocks", cap)
    lo = max(2, int(np.ceil(cap / 2)))
    incs = np.diff(np.concatenate([[0.0], ents]))
    rate = float(incs[lo - 1:cap].min())
    level_rate = float(min(ents[k - 1] / k for k in range(lo, cap + 1)))
    return rate, level_rate, (lo, cap), cap


def entropy_from_codes(codes: np.ndarray, n_max: int, weights=None,
                       guard_ratio: float = 10.0,
                       min_depth: int = 2) -> EntropyEstimate:
    arr = np.asarray(codes)
    if arr.ndim == 1:
        arr = arr[None]
    ents, distinct, n_blocks = block_entropy_curve(arr, n_max, weights)
    rate, level_rate, window, cap = _rate_from_curve(
        ents, distinct, n_blocks, n_max, guard_ratio, min_depth)
    incs = np.diff(np.concatenate([[0.0], ents]))
    stderr = _group_rate_stderr(arr, n_max, weights, guard_ratio, window)
    return EntropyEstimate(
        depths=tuple(range(1, n_max + 1)), levels=tuple(ents / np.arange(1, n_max + 1)),
        increments=tuple(incs), rate=rate, level_rate=level_rate, window=window,
        cap_depth=cap, requested_depth=n_max, capped=cap < n_max,
        distinct=tuple(int(v) for v in distinct), block_samples=n_blocks,
        stderr=stderr)


def _group_rate_stderr(arr, n_max, weights, guard_ratio, window) -> float:
    """Dispersion of the rate across 4 subgroups of the ensemble (or 4
    contiguous segments of a single orbit)."""
    m, t = arr.shape
    if m >= 4:
        groups = np.array_split(np.arange(m), 4)
        parts = [(arr[g], None if weights is None else np.asarray(weights)[g])
                 for g in groups]
    elif t >= 4 * (n_max + 4):
        seg = t // 4
        parts = [(arr[:, i * seg:(i + 1) * seg], None) for i in range(4)]
    else:
        return float("nan")
    rates = []
    for sub, w in parts:
        try:
            ents, distinct, nb = block_entropy_curve(sub, n_max, w)
            r, _, _, _ = _rate_from_curve(ents, distinct, nb, n_max,
                                          guard_ratio * 0.25, 2)
            rates.append(r)
        except (UndersampledError, ValueError):
            continue
    if len(rates) < 2:
        return float("nan")
    return float(np.std(rates, ddof=1) / np.sqrt(len(rates)))


def partition_entropy_rate(f, partition: FinitePartition, starts, orbit_len: int,
                           n_max: int = 8, weights=None, burn_in: int = 0,
                           guard_ratio: float = 10.0) -> EntropyEstimate:
    """Entropy rate of the partition under the orbit-ensemble empirical
    distribution."""
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    orbits = ensemble_orbits(f, starts, burn_in + orbit_len - 1)[:, burn_in:]
    codes = orbit_codes(partition, orbits)
    return entropy_from_codes(codes, n_max, weights, guard_ratio)


def per_point_entropy_rates(codes: np.ndarray, n_max: int,
                            guard_ratio: float = 10.0) -> np.ndarray:
    """Entropy rate for each code row separately; NaN where undersampled."""
    arr = np.asarray(codes)
    out = np.empty(arr.shape[0])
    for i in range(arr.shape[0]):
        try:
            ents, distinct, nb = block_entropy_curve(arr[i:i + 1], n_max)
            out[i], _, _, _ = _rate_from_curve(ents, distinct, nb, n_max,
                                               guard_ratio, 2)
        except UndersampledError:
            out[i] = np.nan
    return out


class SignatureError(RuntimeError):
    pass


class PartitionTooCoarseError(RuntimeError):
    pass


@dataclass
class BoundReport:
    """One side of the entropy upper bound

        h <= h(f, Q) + (1/(r-1+alpha)) * (bracket + 1/q) + log(2 q Y C)/q

    where bracket = (1/q) E log||Df^q|| - lambda^+ for the forward
    direction and (1/q) E log||Df^-q|| + lambda^- for the inverse one.
    """

    direction: str
    q: int
    r: int
    alpha: float
    upsilon: float
    c_ralpha: float
    partition_entropy: float
    bracket: float
    regularity_factor: float
    inv_q: float
    constant_term: float
    total: float
    lhs: float
    bound_holds: bool
    margin: float
    lambda_plus: float
    lambda_minus: float
    norm_average: float
    epsilon_mode: str
    epsilon_cap: float
    powered_epsilon_cap: float
    partition_diameter: float
    entropy_details: dict = field(default_factory=dict)

    def parts_total(self) -> float:
        return (self.partition_entropy
                + self.regularity_factor * (self.bracket + self.inv_q)
                + self.constant_term)


def epsilon_cap(space, upsilon: float, q: int, r: int, alpha: float,
                mode: str = "one_step") -> float:
    """Largest scale passing 2 (Omega + 2) eps < min(1, r(M)).

    one_step uses Omega = Y (per-step norm cap); powered uses the pessimistic
    Omega = q Y^(q (r + alpha)), which collapses to absurdly small scales
    already for moderate q and is kept as a diagnostic."""
    if mode == "one_step":
        omega = upsilon
    elif mode == "powered":
        log_omega = np.log(q) + q * (r + alpha) * np.log(max(upsilon, 1.0))
        if log_omega > 700:
            return 0.0
        omega = float(np.exp(log_omega))
    else:
        raise ValueError(f"unknown epsilon mode {mode!r}")
    return min(1.0, space.injectivity_radius) / (2.0 * (omega + 2.0))


def _ensemble_edge_exponents(f, points, n: int = 2000):
    """(mean top, mean bottom) finite-time exponents over the sample."""
    lams = ensemble_exponents(f, points, n)
    return float(lams[:, 0].mean()), float(lams[:, -1].mean())


def _norm_average(f, points, weights, q: int) -> float:
    """(1/q) weighted mean of log ||Df^q|| over the sample."""
    rec = scaled_products(f, points, q, [q])
    scale, b = rec[q]
    top = scale + np.log(np.linalg.svd(b, compute_uv=False)[:, 0])
    return float(np.sum(weights * top) / q)


def entropy_bound_report(f, sample: ms.EmpiricalMeasure, partition: FinitePartition,
                         q: int, r: int, alpha: float, direction: str = "forward",
                         upsilon: float = None, c_ralpha: float = None,
                         orbit_len: int = 2048, n_max: int = 8,
                         ensemble_size: int = 128, exponent_steps: int = 2000,
                         epsilon_mode: str = "one_step",
                         zero_threshold: float = 0.02,
                         check_signature: bool = True,
                         guard_ratio: float = 10.0) -> BoundReport:
    """Evaluate one direction of the entropy upper bound on a sampled
    measure.  Requires every sampled point to carry the one-positive
    exponent signature (finite-time check) unless disabled."""
    if direction not in ("forward", "inverse"):
        raise ValueError("direction must be forward or inverse")
    if r < 1 or not 0 < alpha <= 1:
        raise ValueError("regularity requires r >= 1 and alpha in (0, 1]")
    if upsilon is None:
        upsilon = f.norm_cap
    if c_ralpha is None:
        from .reparam import ReparamConstants, c_ralpha_constant
        c_ralpha = c_ralpha_constant(r, alpha, ReparamConstants())

    if check_signature:
        sub = sample.points[:512]
        lams = ensemble_exponents(f, sub, min(500, exponent_steps))
        npos = np.sum(lams > zero_threshold, axis=1)
        nneg = np.sum(lams < -zero_threshold, axis=1)
        good = (npos == 1) & (nneg >= 1)
        if not np.all(good):
            raise SignatureError(
                f"{int((~good).sum())}/{len(good)} sampled points lack the "
                "one-positive exponent signature")

    cap = epsilon_cap(f.space, upsilon, q, r, alpha, "one_step")
    cap_used = epsilon_cap(f.space, upsilon, q, r, alpha, epsilon_mode)
    powered_cap = epsilon_cap(f.space, upsilon, q, r, alpha, "powered")
    if partition.diameter >= cap_used:
        raise PartitionTooCoarseError(
            f"partition diameter {partition.diameter:.3g} is not below the "
            f"scale cap {cap_used:.3g} (mode {epsilon_mode})")

    g = f if direction == "forward" else f.inverse_map()
    lam_top, lam_bot = _ensemble_edge_exponents(f, sample.points, exponent_steps)
    lam_plus, lam_minus = max(0.0, lam_top), min(0.0, lam_bot)
    norm_avg = _norm_average(g, sample.points, sample.weights, q)
    bracket = norm_avg - lam_plus if direction == "forward" else norm_avg + lam_minus

    step = max(1, sample.size // ensemble_size)
    starts = sample.points[::step][:ensemble_size]
    est = partition_entropy_rate(g, partition, starts, orbit_len, n_max,
                                 guard_ratio=guard_ratio)
    h_q = est.rate
    lhs = h_q
    finer = FinitePartition(partition.space, tuple(2 * m for m in partition.dims),
                            partition.offset)
    try:
        est_fine = partition_entropy_rate(g, finer, starts, orbit_len, n_max,
                                          guard_ratio=guard_ratio)
        lhs = max(lhs, est_fine.rate)
    except UndersampledError:
        pass

    factor = 1.0 / (r - 1 + alpha)
    const = float(np.log(2.0 * q * upsilon * c_ralpha) / q)
    total = h_q + factor * (bracket + 1.0 / q) + const
    return BoundReport(
        direction=direction, q=q, r=r, alpha=alpha, upsilon=float(upsilon),
        c_ralpha=float(c_ralpha), partition_entropy=h_q, bracket=float(bracket),
        regularity_factor=factor, inv_q=1.0 / q, constant_term=const,
        total=float(total), lhs=float(lhs), bound_holds=bool(lhs <= total + 1e-9),
        margin=float(total - lhs), lambda_plus=lam_plus, lambda_minus=lam_minus,
        norm_average=norm_avg, epsilon_mode=epsilon_mode, epsilon_cap=float(cap),
        powered_epsilon_cap=float(powered_cap),
        partition_diameter=partition.diameter,
        entropy_details=est.summary())


def entropy_bound_forward(f, sample, partition, q, r, alpha, **kw) -> BoundReport:
    return entropy_bound_report(f, sample, partition, q, r, alpha,
                                direction="forward", **kw)


def entropy_bound_inverse(f, sample, partition, q, r, alpha, **kw) -> BoundReport:
    return entropy_bound_report(f, sample, partition, q, r, alpha,
                                direction="inverse", **kw)


def ruelle_check(entropy_rate: float, positive_sum: float,
                 slack: float = 0.05) -> dict:
    """Ruelle inequality residual: sum of positive exponents minus the
    entropy estimate.  Estimator noise is absorbed by the slack."""
    residual = positive_sum - entropy_rate
    return {"entropy": float(entropy_rate), "positive_sum": float(positive_sum),
            "residual": float(residual), "ok": bool(residual >= -slack),
            "slack": slack}


@dataclass
class YoungDimension:
    value: float
    raw: float
    clamped: bool
    entropy: float
    lambda_plus: float
    lambda_minus: float


def young_dimension(entropy_rate: float, lambda_plus: float,
                    lambda_minus: float) -> YoungDimension:
    """Dimension h (1/lambda^+ - 1/lambda^-) for a hyperbolic surface
    measure, clamped to [0, 2]."""
    if lambda_plus <= 0 or lambda_minus >= 0:
        raise ValueError("requires lambda_plus > 0 and lambda_minus < 0")
    raw = entropy_rate * (1.0 / lambda_plus - 1.0 / lambda_minus)
    value = min(2.0, max(0.0, raw))
    return YoungDimension(value=float(value), raw=float(raw),
                          clamped=bool(value != raw), entropy=entropy_rate,
                          lambda_plus=lambda_plus, lambda_minus=lambda_minus)


@dataclass
class SemicontinuityConfig:
    n_orbits: int = 64
    orbit_len: int = 2000
    burn_in: int = 100
    partition_dims: tuple = (16, 16)
    n_max: int = 8
    exponent_schedule: tuple = (2, 4, 8, 16, 32, 64)
    exponent_sample: int = 256
    tail_threshold: float = 0.02
    tolerance_entropy: float = 0.05
    tolerance_exponent: float = 0.02
    guard_ratio: float = 10.0
    weak_star_orbits: int = 32
    weak_star_len: int = 500


def semicontinuity_experiment(family, ts, config: SemicontinuityConfig = None,
                              seed: int = 0, workers: int = 1) -> dict:
    """Entropy and exponent estimates along a family f_t as t -> 0.

    family(t) must return the map for parameter t; ts must contain 0.
    Row RNG streams are spawned per index from the master seed, so rows
    are reproducible independently of each other; with workers > 1 the
    non-reference rows run on a thread pool and the numbers are identical
    to a sequential run.
    """
    cfg = config or SemicontinuityConfig()
    ts = list(ts)
    if not any(t == 0 for t in ts):
        raise ValueError("ts must include 0 as the reference row")
    order = sorted(range(len(ts)), key=lambda i: (ts[i] != 0, ts[i]))
    streams = np.random.SeedSequence(seed).spawn(len(ts))

    def compute(pos):
        t = ts[pos]
        rng = np.random.default_rng(streams[pos])
        f = family(t)
        t0 = time.perf_counter()
        part = FinitePartition(f.space, tuple(cfg.partition_dims))
        starts = f.space.sample(rng, cfg.n_orbits)
        est = partition_entropy_rate(f, part, starts, cfg.orbit_len, cfg.n_max,
                                     burn_in=cfg.burn_in,
                                     guard_ratio=cfg.guard_ratio)
        sub = starts[:cfg.weak_star_orbits]
        mu = ms.from_ensemble(f, sub, cfg.weak_star_len, burn_in=cfg.burn_in)
        exp_pts = f.space.sample(rng, cfg.exponent_sample)
        pos_est = positive_exponent_sum(f, exp_pts, schedule=cfg.exponent_schedule)
        dec = ms.signature_decomposition(mu_subsample(mu, 256), f)
        comp = dec.components[dec.target_label]
        comp_lam = (positive_exponent_sum(f, comp.points, weights=comp.weights,
                                          schedule=cfg.exponent_schedule).estimate
                    if comp is not None else float("nan"))
        row = {
            "t": float(t),
            "entropy_rate": est.rate,
            "entropy_level_rate": est.level_rate,
            "entropy_stderr": est.stderr,
            "entropy_cap_depth": est.cap_depth,
            "lambda_sum_plus": pos_est.estimate,
            "lambda_sum_converged": pos_est.converged,
            "component_lambda": comp_lam,
            "component_mass": dec.beta,
            "runtime_s": time.perf_counter() - t0,
            "map": f.name,
        }
        return row, mu

    rows = [None] * len(ts)
    measures = [None] * len(ts)
    ref_pos = order[0]
    rows[ref_pos], measures[ref_pos] = compute(ref_pos)
    rest = order[1:]
    if workers > 1 and rest:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for pos, (row, mu) in zip(rest, pool.map(compute, rest)):
                rows[pos], measures[pos] = row, mu
    else:
        for pos in rest:
            rows[pos], measures[pos] = compute(pos)
    ref_measure = measures[ref_pos]
    ref = {"h": rows[ref_pos]["entropy_rate"],
           "lam": rows[ref_pos]["lambda_sum_plus"],
           "comp_lam": rows[ref_pos]["component_lambda"]}
    for pos in range(len(ts)):
        rows[pos]["weak_star_to_ref"] = ms.weak_star_distance(
            measures[pos], ref_measure)
    tail = [r for r in rows if 0 < r["t"] <= cfg.tail_threshold]
    h0, lam0 = ref["h"], ref["lam"]
    if tail:
        max_tail_h = max(r["entropy_rate"] for r in tail)
        max_drift = max(abs(r["lambda_sum_plus"] - lam0) for r in tail)
        comp_drift = max(abs(r["component_lambda"] - ref["comp_lam"]) for r in tail)
    else:
        warnings.warn("no family rows inside the tail threshold", RuntimeWarning)
        max_tail_h, max_drift, comp_drift = h0, 0.0, 0.0
    margin = h0 - max_tail_h
    verdicts = {
        "entropy_tail_ok": bool(max_tail_h <= h0 + cfg.tolerance_entropy),
        "exponent_tail_ok": bool(max_drift <= cfg.tolerance_exponent),
        "component_drift": float(comp_drift),
        "semicontinuity_margin": float(margin),
        "reference_entropy": float(h0),
        "reference_lambda": float(lam0),
        "max_tail_entropy": float(max_tail_h),
        "max_exponent_drift": float(max_drift),
    }
    verdicts["pass"] = bool(verdicts["entropy_tail_ok"] and verdicts["exponent_tail_ok"])
    return {"rows": rows, "verdicts": verdicts, "seed": seed,
            "config": cfg.__dict__.copy()}


def mu_subsample(mu: ms.EmpiricalMeasure, size: int) -> ms.EmpiricalMeasure:
    if mu.size <= size:
        return mu
    step = mu.size // size
    pts = mu.points[::step][:size]
    w = mu.weights[::step][:size]
    return ms.EmpiricalMeasure(space=mu.space, points=pts, weights=w)
