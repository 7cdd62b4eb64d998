"""Finite grid partitions and symbolic coding of orbits.

A partition assigns each point a flat integer cell code; dynamical
refinements are handled as code sequences (itineraries) so that joins
never materialize product cells explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spaces import Box, Torus


@dataclass(frozen=True)
class FinitePartition:
    """Axis-aligned grid partition of a torus or box.

    dims[i] cells along axis i; offset shifts the grid (torus only, where
    it wraps).  Codes are flat row-major indices.
    """

    space: object
    dims: tuple
    offset: tuple = None

    def __post_init__(self):
        if len(self.dims) != self.space.dim:
            raise ValueError("dims must match the space dimension")
        if any(int(m) < 1 for m in self.dims):
            raise ValueError("dims must be positive")
        object.__setattr__(self, "dims", tuple(int(m) for m in self.dims))
        off = self.offset if self.offset is not None else (0.0,) * self.space.dim
        object.__setattr__(self, "offset", tuple(float(o) for o in off))

    @property
    def cell_count(self) -> int:
        return int(np.prod(self.dims))

    @property
    def diameter(self) -> float:
        """Euclidean diameter of a single cell."""
        if isinstance(self.space, Torus):
            sides = 1.0 / np.asarray(self.dims, dtype=float)
        else:
            sides = np.asarray(self.space.sides) / np.asarray(self.dims, dtype=float)
        return float(np.linalg.norm(sides))

    def codes(self, points) -> np.ndarray:
        """Flat cell codes for a batch of points, shape (m,)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        dims = np.asarray(self.dims)
        if isinstance(self.space, Torus):
            rel = np.mod(pts - np.asarray(self.offset), 1.0)
            idx = np.floor(rel * dims).astype(np.int64)
        else:
            lo = np.array([b[0] for b in self.space.bounds])
            sides = np.asarray(self.space.sides)
            rel = (pts - lo) / sides
            idx = np.floor(rel * dims).astype(np.int64)
        # boundary points land in the last cell along each axis
        idx = np.clip(idx, 0, dims - 1)
        return np.ravel_multi_index(tuple(idx.T), self.dims).astype(np.int64)

    def cell_center(self, code: int) -> np.ndarray:
        idx = np.array(np.unravel_index(int(code), self.dims), dtype=float)
        dims = np.asarray(self.dims, dtype=float)
        if isinstance(self.space, Torus):
            return np.mod((idx + 0.5) / dims + np.asarray(self.offset), 1.0)
        lo = np.array([b[0] for b in self.space.bounds])
        return lo + (idx + 0.5) / dims * np.asarray(self.space.sides)

    def serialize(self) -> dict:
        kind = "torus" if isinstance(self.space, Torus) else "box"
        rec = {"kind": kind, "dims": list(self.dims), "offset": list(self.offset),
               "diameter": self.diameter}
        if kind == "box":
            rec["bounds"] = [list(b) for b in self.space.bounds]
        return rec


def partition_from_dict(rec: dict) -> FinitePartition:
    if rec["kind"] == "torus":
        space = Torus(len(rec["dims"]))
    else:
        space = Box(tuple(tuple(b) for b in rec["bounds"]))
    return FinitePartition(space=space, dims=tuple(rec["dims"]),
                           offset=tuple(rec["offset"]))


def grid_for_diameter(space, diameter: float, offset=None) -> FinitePartition:
    """Coarsest uniform grid whose cells have Euclidean diameter at most
    the target."""
    if diameter <= 0:
        raise ValueError("diameter must be positive")
    d = space.dim
    if isinstance(space, Torus):
        sides = np.ones(d)
    else:
        sides = np.asarray(space.sides)
    # per-axis count so the cell diagonal sqrt(sum (s_i/m_i)^2) fits
    dims = tuple(max(1, int(np.ceil(np.sqrt(d) * s / diameter))) for s in sides)
    part = FinitePartition(space=space, dims=dims, offset=offset)
    assert part.diameter <= diameter + 1e-12
    return part


def itinerary(partition: FinitePartition, f, point, length: int) -> tuple:
    """Cell codes along the first `length` orbit points of `point`."""
    x = np.atleast_2d(np.asarray(point, dtype=float))
    codes = []
    for _ in range(length):
        codes.append(int(partition.codes(x)[0]))
        x = f.step(x)
    return tuple(codes)


def orbit_codes(partition: FinitePartition, orbits: np.ndarray) -> np.ndarray:
    """Codes for an orbit ensemble of shape (m, T, d), returned (m, T)."""
    arr = np.asarray(orbits, dtype=float)
    if arr.ndim == 2:
        arr = arr[None]
    m, t, d = arr.shape
    flat = partition.codes(arr.reshape(m * t, d))
    return flat.reshape(m, t)


def distribution_entropy(weights: np.ndarray) -> float:
    """Shannon entropy (nats) of a nonnegative weight vector after
    normalization."""
    w = np.asarray(weights, dtype=float)
    w = w[w > 0]
    if w.size == 0:
        return 0.0
    p = w / w.sum()
    return float(-np.sum(p * np.log(p)))


def static_entropy(partition: FinitePartition, points, weights=None) -> float:
    """Entropy of the partition under the empirical distribution of the
    points."""
    codes = partition.codes(points)
    m = codes.shape[0]
    w = np.full(m, 1.0 / m) if weights is None else np.asarray(weights, dtype=float)
    mass = np.bincount(codes, weights=w, minlength=partition.cell_count)
    return distribution_entropy(mass)


def joint_codes(codes_a: np.ndarray, codes_b: np.ndarray) -> np.ndarray:
    """Codes of the join of two codings, relabeled to 0..K-1."""
    stacked = np.stack([np.ravel(codes_a), np.ravel(codes_b)], axis=1)
    _, inv = np.unique(stacked, axis=0, return_inverse=True)
    return inv.reshape(np.shape(codes_a))


def conditional_entropy(codes_a, codes_b, weights=None) -> float:
    """H(A | B) = H(A join B) - H(B) from per-sample codes."""
    a = np.ravel(np.asarray(codes_a))
    b = np.ravel(np.asarray(codes_b))
    if a.shape != b.shape:
        raise ValueError("code arrays must align")
    m = a.shape[0]
    w = np.full(m, 1.0 / m) if weights is None else np.ravel(np.asarray(weights, dtype=float))
    ab = joint_codes(a, b)
    h_ab = distribution_entropy(np.bincount(ab, weights=w))
    _, b_inv = np.unique(b, return_inverse=True)
    h_b = distribution_entropy(np.bincount(b_inv, weights=w))
    return max(0.0, h_ab - h_b)
