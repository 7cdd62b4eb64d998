"""Orbit generation and derivative-cocycle accumulation.

Everything here is batched over an ensemble of starting points.  Two
log-scaled representations of D f^n are maintained:

* QR re-orthonormalization (per-step triangular log-diagonals), the
  Benettin route to the exponent spectrum;
* scaled raw products (Frobenius-renormalized each step), which give the
  exact singular values of the finite-time cocycle as long as the
  condition number stays inside float range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .maps import Diffeomorphism


class CocycleOverflowError(ArithmeticError):
    """Scaled product lost rank: depth too large for float64 range."""


def orbit_points(f: Diffeomorphism, x0, n: int) -> np.ndarray:
    """Points x0, f(x0), ..., f^n(x0), shape (n+1, d)."""
    x0 = np.asarray(x0, dtype=float)
    out = np.empty((n + 1, x0.shape[-1]))
    out[0] = f.space.wrap(x0)
    x = out[0]
    for k in range(n):
        x = f.step(x)
        out[k + 1] = x
    return out


def ensemble_orbits(f: Diffeomorphism, starts, n: int) -> np.ndarray:
    """Orbits for a batch of starts, shape (m, n+1, d)."""
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    m, d = starts.shape
    out = np.empty((m, n + 1, d))
    out[:, 0] = f.space.wrap(starts)
    x = out[:, 0]
    for k in range(n):
        x = f.step(x)
        out[:, k + 1] = x
    return out


def stream_orbit(f: Diffeomorphism, starts, n: int, visit) -> np.ndarray:
    """Call visit(t, points) for t = 0..n without storing the history."""
    x = f.space.wrap(np.atleast_2d(np.asarray(starts, dtype=float)))
    visit(0, x)
    for t in range(1, n + 1):
        x = f.step(x)
        visit(t, x)
    return x


def _qr_positive(mats: np.ndarray):
    """Batched QR with positive diagonal of R."""
    q, r = np.linalg.qr(mats)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    s = np.where(diag < 0, -1.0, 1.0)
    q = q * s[..., None, :]
    r = r * s[..., :, None]
    return q, r


def _qr_single_small(jacs: np.ndarray, record_every: int = 0):
    """Scalar Gram-Schmidt over one orbit's jacobians, d in {2, 3}.

    Pure-python floats beat per-step LAPACK dispatch by ~10x for small d,
    which is what keeps the 1e5-step spectrum runs around a second.
    """
    from math import hypot, log, sqrt

    d = jacs.shape[1]
    snaps = []
    if d == 2:
        q00, q01, q10, q11 = 1.0, 0.0, 0.0, 1.0
        s0 = s1 = 0.0
        for k, ((j00, j01), (j10, j11)) in enumerate(jacs.tolist(), start=1):
            m00 = j00 * q00 + j01 * q10
            m10 = j10 * q00 + j11 * q10
            m01 = j00 * q01 + j01 * q11
            m11 = j10 * q01 + j11 * q11
            r0 = hypot(m00, m10)
            if r0 == 0.0:
                raise CocycleOverflowError("degenerate cocycle step")
            q00, q10 = m00 / r0, m10 / r0
            proj = q00 * m01 + q10 * m11
            v0, v1 = m01 - proj * q00, m11 - proj * q10
            r1 = hypot(v0, v1)
            if r1 == 0.0:
                raise CocycleOverflowError("degenerate cocycle step")
            q01, q11 = v0 / r1, v1 / r1
            s0 += log(r0)
            s1 += log(r1)
            if record_every and k % record_every == 0:
                snaps.append((k, np.array([[s0, s1]])))
        sums = np.array([[s0, s1]])
    else:
        q = np.eye(d)
        sums_v = np.zeros(d)
        for k in range(jacs.shape[0]):
            m = jacs[k] @ q
            for c in range(d):
                v = m[:, c].copy()
                for p in range(c):
                    v -= (q[:, p] @ v) * q[:, p]
                r = sqrt(float(v @ v))
                if r == 0.0:
                    raise CocycleOverflowError("degenerate cocycle step")
                q[:, c] = v / r
                sums_v[c] += log(r)
            if record_every and (k + 1) % record_every == 0:
                snaps.append((k + 1, sums_v[None].copy()))
        sums = sums_v[None]
    return sums, snaps


def qr_cocycle(f: Diffeomorphism, starts, n: int, record_every: int = 0):
    """Benettin accumulation along orbits of the starts.

    Returns (log_sums, points_end) where log_sums[(m, d)] holds the
    cumulative log |R_ii|.  With record_every > 0 a third element is
    returned: a list of (step, log_sums copy) snapshots.
    """
    x = f.space.wrap(np.atleast_2d(np.asarray(starts, dtype=float)))
    m, d = x.shape
    if m == 1 and d in (2, 3):
        pts = orbit_points(f, x[0], n)
        jacs = f.jacobian(pts[:-1])
        if jacs.ndim == 2:
            jacs = jacs[None]
        sums, snaps = _qr_single_small(jacs, record_every)
        end = pts[-1][None]
        if record_every:
            return sums, end, snaps
        return sums, end
    q = np.broadcast_to(np.eye(d), (m, d, d)).copy()
    sums = np.zeros((m, d))
    snaps = []
    for k in range(1, n + 1):
        j = f.jacobian(x)
        if j.ndim == 2:
            j = j[None]
        z = np.einsum("nij,njk->nik", j, q)
        q, r = _qr_positive(z)
        diag = np.abs(np.diagonal(r, axis1=-2, axis2=-1))
        if np.any(diag == 0):
            raise CocycleOverflowError("degenerate cocycle step (zero R diagonal)")
        sums += np.log(diag)
        x = f.step(x)
        if record_every and k % record_every == 0:
            snaps.append((k, sums.copy()))
    if record_every:
        return sums, x, snaps
    return sums, x


def scaled_products(f: Diffeomorphism, starts, n: int, record: list[int]):
    """Scaled cocycle products D f^k at the recorded depths.

    Returns {k: (scale (m,), B (m,d,d))} with D f^k = exp(scale) * B and
    ||B||_F = 1.  Raises CocycleOverflowError when B loses rank, i.e. the
    condition number of the product exceeded float range.
    """
    record = sorted(set(int(k) for k in record))
    if record and record[-1] > n:
        raise ValueError("recorded depth exceeds orbit length")
    x = f.space.wrap(np.atleast_2d(np.asarray(starts, dtype=float)))
    m, d = x.shape
    b = np.broadcast_to(np.eye(d), (m, d, d)).copy()
    scale = np.full(m, 0.0)
    out = {}
    want = set(record)
    for k in range(1, n + 1):
        j = f.jacobian(x)
        if j.ndim == 2:
            j = j[None]
        b = np.einsum("nij,njk->nik", j, b)
        norm = np.linalg.norm(b, axis=(1, 2))
        if np.any(norm == 0):
            raise CocycleOverflowError("cocycle product underflowed to zero")
        b /= norm[:, None, None]
        scale += np.log(norm)
        x = f.step(x)
        if k in want:
            out[k] = (scale.copy(), b.copy())
    return out


def log_singular_values(scale, b) -> np.ndarray:
    """Descending log singular values of exp(scale) * B, shape (m, d)."""
    s = np.linalg.svd(b, compute_uv=False)
    if np.any(s[..., -1] == 0):
        raise CocycleOverflowError(
            "smallest singular value underflowed; reduce the depth")
    return np.log(s) + np.asarray(scale)[..., None]


@dataclass
class Orbit:
    """A single cached orbit with per-step QR log-diagonals.

    points[k+1] equals map.step(points[k]) bit-for-bit (the cache is
    produced by exactly that call sequence).
    """

    map: Diffeomorphism
    points: np.ndarray   # (n+1, d)
    qr_logs: np.ndarray  # (n, d) per-step log |R_ii|

    @property
    def length(self) -> int:
        return self.points.shape[0] - 1

    @property
    def base_point(self) -> np.ndarray:
        return self.points[0]

    def exponent_sums(self, upto: int | None = None) -> np.ndarray:
        upto = self.length if upto is None else upto
        return self.qr_logs[:upto].sum(axis=0)


def make_orbit(f: Diffeomorphism, x0, n: int) -> Orbit:
    x0 = np.asarray(x0, dtype=float)
    d = x0.shape[-1]
    pts = np.empty((n + 1, d))
    pts[0] = f.space.wrap(x0)
    logs = np.empty((n, d))
    x = pts[0][None]
    q = np.eye(d)[None].copy()
    for k in range(n):
        j = f.jacobian(x)
        if j.ndim == 2:
            j = j[None]
        z = np.einsum("nij,njk->nik", j, q)
        q, r = _qr_positive(z)
        logs[k] = np.log(np.abs(np.diagonal(r, axis1=-2, axis2=-1)))[0]
        x = f.step(x)
        pts[k + 1] = x[0]
    return Orbit(map=f, points=pts, qr_logs=logs)
