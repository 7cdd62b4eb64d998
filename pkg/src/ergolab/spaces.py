"""Phase spaces: flat tori T^d and rectangular boxes in R^d, d <= 3.

Points are plain float64 arrays of shape (d,) or (n, d); the space object
carries the geometry (wrapping, metric, uniform sampling).  Maps hold a
reference to their space and validate point shapes against it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DomainError(ValueError):
    """Point does not belong to the space a map is defined on."""


def _as_points(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != dim:
        raise DomainError(f"expected points in dimension {dim}, got shape {x.shape}")
    return x


@dataclass(frozen=True)
class Torus:
    """Flat torus [0,1)^d with the quotient metric."""

    dim: int

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError("supported dimensions are 1, 2, 3")

    @property
    def name(self) -> str:
        return f"torus{self.dim}"

    @property
    def periodic(self) -> bool:
        return True

    def wrap(self, x) -> np.ndarray:
        x = _as_points(x, self.dim)
        return np.mod(x, 1.0)

    def contains(self, x) -> bool:
        x = _as_points(x, self.dim)
        return bool(np.all(x >= 0.0) and np.all(x < 1.0))

    def displacement(self, x, y) -> np.ndarray:
        """Shortest representative of x - y, coordinates in [-1/2, 1/2)."""
        d = np.mod(_as_points(x, self.dim) - _as_points(y, self.dim), 1.0)
        return np.where(d >= 0.5, d - 1.0, d)

    def distance(self, x, y) -> np.ndarray:
        return np.linalg.norm(self.displacement(x, y), axis=-1)

    @property
    def diameter(self) -> float:
        return 0.5 * np.sqrt(self.dim)

    @property
    def injectivity_radius(self) -> float:
        # r(M) for the quotient metric: balls of this radius are isometric
        # to Euclidean balls.
        return 0.5

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.random((n, self.dim))

    def grid(self, per_side: int) -> np.ndarray:
        """Regular lattice with per_side points per coordinate.

        Grids for per_side and 2*per_side are nested, which keeps
        sampled-sup norm estimates monotone under refinement.
        """
        axes = [np.arange(per_side) / per_side for _ in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box given by bounds[d, 2] = [(lo, hi), ...]."""

    bounds: tuple

    def __post_init__(self):
        b = np.asarray(self.bounds, dtype=float)
        if b.ndim != 2 or b.shape[1] != 2 or b.shape[0] not in (1, 2, 3):
            raise ValueError("bounds must be (d, 2) with d in 1..3")
        if not np.all(b[:, 1] > b[:, 0]):
            raise ValueError("each bound pair must satisfy lo < hi")
        object.__setattr__(self, "bounds", tuple(map(tuple, b)))

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def name(self) -> str:
        return f"box{self.dim}"

    @property
    def periodic(self) -> bool:
        return False

    @property
    def _arr(self) -> np.ndarray:
        return np.asarray(self.bounds, dtype=float)

    def wrap(self, x) -> np.ndarray:
        # Boxes do not identify points; wrap is the identity.
        return _as_points(x, self.dim)

    def contains(self, x) -> bool:
        x = _as_points(x, self.dim)
        b = self._arr
        return bool(np.all(x >= b[:, 0]) and np.all(x <= b[:, 1]))

    def displacement(self, x, y) -> np.ndarray:
        return _as_points(x, self.dim) - _as_points(y, self.dim)

    def distance(self, x, y) -> np.ndarray:
        return np.linalg.norm(self.displacement(x, y), axis=-1)

    @property
    def sides(self) -> np.ndarray:
        b = self._arr
        return b[:, 1] - b[:, 0]

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.sides))

    @property
    def injectivity_radius(self) -> float:
        return float(0.5 * np.min(self.sides))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        b = self._arr
        return b[:, 0] + rng.random((n, self.dim)) * self.sides

    def grid(self, per_side: int) -> np.ndarray:
        b = self._arr
        axes = [
            b[i, 0] + (np.arange(per_side + 1) / per_side) * self.sides[i]
            for i in range(self.dim)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


def space_from_config(cfg: dict):
    kind = cfg.get("kind", "torus")
    if kind == "torus":
        return Torus(int(cfg.get("dim", 2)))
    if kind == "box":
        return Box(tuple(map(tuple, cfg["bounds"])))
    raise ValueError(f"unknown space kind {kind!r}")
