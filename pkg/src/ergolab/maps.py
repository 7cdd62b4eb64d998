"""Smooth maps with exact derivative rules, plus a few classical families.

Every map operates on batches: step/inverse_step take (n, d) or (d,) arrays
and return the same shape; jacobian returns (n, d, d); deriv(x, order)
returns the order-th derivative tensor batch (n, d, ..., d).  Built-in
families carry exact rules up to order 3.  Maps without an inverse rule
(e.g. the doubling map) report invertible = False and inverse-requiring
operations raise.
"""

from __future__ import annotations

import numpy as np

from .derivatives import map_chain
from .spaces import Box, DomainError, Torus

_FD_STEP = 1e-5  # central-difference fallback step


def _batch(x, dim):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        if x.shape[0] != dim:
            raise DomainError(f"point has dimension {x.shape[0]}, map expects {dim}")
        return x[None, :], True
    if x.ndim != 2 or x.shape[1] != dim:
        raise DomainError(f"points have shape {x.shape}, map expects (*, {dim})")
    return x, False


class Diffeomorphism:
    """Base class; subclasses provide _step and derivative rules."""

    name = "map"
    max_order = 1

    def __init__(self, space, regularity=(1, 1.0), norm_cap=None, params=None):
        self.space = space
        self.r, self.alpha = int(regularity[0]), float(regularity[1])
        if self.r < 1 or not (0.0 < self.alpha <= 1.0):
            raise ValueError("regularity must have r >= 1 and alpha in (0, 1]")
        self.norm_cap = norm_cap
        self.params = dict(params or {})

    # -- evaluation ------------------------------------------------------

    def _step(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _inverse_step(self, x: np.ndarray):
        return None

    @property
    def invertible(self) -> bool:
        probe = self._inverse_step(np.zeros((1, self.space.dim)) + 0.25)
        return probe is not None

    def step(self, x):
        x2, single = _batch(x, self.space.dim)
        y = self.space.wrap(self._step(x2))
        return y[0] if single else y

    def inverse_step(self, x):
        x2, single = _batch(x, self.space.dim)
        y = self._inverse_step(x2)
        if y is None:
            raise DomainError(f"map {self.name!r} has no inverse rule")
        y = self.space.wrap(y)
        return y[0] if single else y

    # -- derivatives -----------------------------------------------------

    def jacobian(self, x):
        x2, single = _batch(x, self.space.dim)
        j = self._jacobian(x2)
        return j[0] if single else j

    def _jacobian(self, x: np.ndarray) -> np.ndarray:
        # finite-difference fallback; exact rules override
        n, d = x.shape
        out = np.empty((n, d, d))
        for a in range(d):
            e = np.zeros(d)
            e[a] = _FD_STEP
            fp = self._step(x + e)
            fm = self._step(x - e)
            diff = fp - fm
            if self.space.periodic:
                diff = np.mod(diff + 0.5, 1.0) - 0.5
            out[:, :, a] = diff / (2 * _FD_STEP)
        return out

    def deriv(self, x, order: int):
        """Order-th derivative tensor batch; orders above max_order raise."""
        x2, single = _batch(x, self.space.dim)
        if order == 1:
            t = self._jacobian(x2)
        elif order <= self.max_order:
            t = self._deriv_high(x2, order)
        else:
            raise ValueError(f"map {self.name!r} has exact rules up to order {self.max_order}")
        return t[0] if single else t

    def _deriv_high(self, x: np.ndarray, order: int) -> np.ndarray:
        raise NotImplementedError

    def deriv_stack(self, x, order: int) -> list:
        """[D f, ..., D^order f] at x, batched."""
        return [self.deriv(x, k) for k in range(1, order + 1)]

    def log_abs_det(self, x):
        j = self.jacobian(x)
        if j.ndim == 2:
            j = j[None]
            return float(np.linalg.slogdet(j)[1][0])
        return np.linalg.slogdet(j)[1]

    def inverse_map(self) -> "Diffeomorphism":
        if not self.invertible:
            raise DomainError(f"map {self.name!r} has no inverse rule")
        return _InverseView(self)

    def describe(self) -> dict:
        return {
            "name": self.name,
            "space": self.space.name,
            "r": self.r,
            "alpha": self.alpha,
            "params": dict(self.params),
        }


class _InverseView(Diffeomorphism):
    """f^{-1} as a map in its own right; derivatives via implicit rules."""

    def __init__(self, base: Diffeomorphism):
        super().__init__(base.space, (base.r, base.alpha), base.norm_cap,
                         {"base": base.name})
        self.base = base
        self.name = base.name + "^-1"
        self.max_order = min(base.max_order, 2)

    def _step(self, x):
        return self.base._inverse_step(x)

    def _inverse_step(self, x):
        return self.base._step(x)

    def _jacobian(self, x):
        pre = self.space.wrap(self.base._inverse_step(x))
        return np.linalg.inv(self.base._jacobian(pre))

    def _deriv_high(self, x, order):
        if order != 2:
            raise ValueError("inverse views carry exact rules up to order 2")
        pre = self.space.wrap(self.base._inverse_step(x))
        a = np.linalg.inv(self.base._jacobian(pre))  # (n,d,d) = D(f^-1)(x)
        d2 = self.base.deriv(pre, 2)
        # D^2(f^-1)[u,v] = -A . D^2f[A u, A v],  A = (Df)^{-1} at the preimage
        return -np.einsum("nij,njkl,nka,nlb->niab", a, d2, a, a)

    def inverse_map(self):
        return self.base


# ---------------------------------------------------------------------------
# families


class ToralAutomorphism(Diffeomorphism):
    """x -> A x (mod 1) for an integer matrix with |det A| = 1."""

    max_order = 3

    def __init__(self, matrix, name=None):
        m = np.asarray(matrix)
        if not np.allclose(m, np.round(m)):
            raise ValueError("matrix must be integer")
        m = np.round(m).astype(np.int64)
        det = int(round(np.linalg.det(m.astype(float))))
        if abs(det) != 1:
            raise ValueError(f"matrix must be unimodular, det = {det}")
        d = m.shape[0]
        super().__init__(Torus(d), regularity=(1, 1.0),
                         params={"matrix": m.tolist()})
        self.matrix = m.astype(float)
        # exact unimodular inverse: adjugate over det stays integer
        self.inv_matrix = np.round(np.linalg.inv(self.matrix) * det).astype(float) / det
        self.name = name or f"toral_auto{d}"
        self.norm_cap = max(np.linalg.norm(self.matrix, 2),
                            np.linalg.norm(self.inv_matrix, 2))

    def _step(self, x):
        return x @ self.matrix.T

    def _inverse_step(self, x):
        return x @ self.inv_matrix.T

    def _jacobian(self, x):
        return np.broadcast_to(self.matrix, (x.shape[0],) + self.matrix.shape).copy()

    def _deriv_high(self, x, order):
        d = self.space.dim
        return np.zeros((x.shape[0],) + (d,) * (order + 1))

    def inverse_map(self):
        return ToralAutomorphism(self.inv_matrix, name=self.name + "^-1")


def cat_map() -> ToralAutomorphism:
    return ToralAutomorphism([[2, 1], [1, 1]], name="cat")


class StandardMap(Diffeomorphism):
    """Chirikov map (x, y) -> (x + y + k(x), y + k(x)), k(x) = (K/2pi) sin(2pi x)."""

    max_order = 3

    def __init__(self, kick: float):
        super().__init__(Torus(2), regularity=(1, 1.0), params={"kick": kick})
        self.kick = float(kick)
        self.name = "standard"
        self.norm_cap = 2.0 + abs(self.kick) + abs(self.kick) * 2 * np.pi

    def _step(self, x):
        s = (self.kick / (2 * np.pi)) * np.sin(2 * np.pi * x[:, 0])
        return np.stack([x[:, 0] + x[:, 1] + s, x[:, 1] + s], axis=-1)

    def _inverse_step(self, x):
        x0 = np.mod(x[:, 0] - x[:, 1], 1.0)
        s = (self.kick / (2 * np.pi)) * np.sin(2 * np.pi * x0)
        return np.stack([x0, x[:, 1] - s], axis=-1)

    def _kick_deriv(self, x0, order):
        # order-th derivative of k(x) = (K/2pi) sin(2pi x)
        w = 2 * np.pi
        amp = (self.kick / w) * w**order
        return amp * np.sin(w * x0 + order * np.pi / 2)

    def _jacobian(self, x):
        c = self._kick_deriv(x[:, 0], 1)
        j = np.empty((x.shape[0], 2, 2))
        j[:, 0, 0] = 1.0 + c
        j[:, 0, 1] = 1.0
        j[:, 1, 0] = c
        j[:, 1, 1] = 1.0
        return j

    def _deriv_high(self, x, order):
        n = x.shape[0]
        t = np.zeros((n,) + (2,) * (order + 1))
        kd = self._kick_deriv(x[:, 0], order)
        # only the pure d^k/dx_0^k entries are nonzero
        t[(slice(None), 0) + (0,) * order] = kd
        t[(slice(None), 1) + (0,) * order] = kd
        return t


class HenonMap(Diffeomorphism):
    """(x, y) -> (1 - a x^2 + y, b x) on a box."""

    max_order = 3

    def __init__(self, a: float = 1.4, b: float = 0.3):
        space = Box(((-2.0, 2.0), (-0.6, 0.6)))
        super().__init__(space, regularity=(1, 1.0), params={"a": a, "b": b})
        self.a, self.b = float(a), float(b)
        self.name = "henon"
        # forward cap 2a*xmax + 1; inverse jacobian [[0,1/b],[1,2ay/b^2]]
        ymax = 0.6
        self.norm_cap = max(2 * self.a * 2.0 + 1.0,
                            1.0 / abs(self.b) + 2 * self.a * ymax / self.b**2 + 1.0)

    def _step(self, x):
        return np.stack([1.0 - self.a * x[:, 0] ** 2 + x[:, 1],
                         self.b * x[:, 0]], axis=-1)

    def _inverse_step(self, x):
        xp = x[:, 1] / self.b
        return np.stack([xp, x[:, 0] - 1.0 + self.a * xp**2], axis=-1)

    def _jacobian(self, x):
        j = np.empty((x.shape[0], 2, 2))
        j[:, 0, 0] = -2.0 * self.a * x[:, 0]
        j[:, 0, 1] = 1.0
        j[:, 1, 0] = self.b
        j[:, 1, 1] = 0.0
        return j

    def _deriv_high(self, x, order):
        n = x.shape[0]
        t = np.zeros((n,) + (2,) * (order + 1))
        if order == 2:
            t[:, 0, 0, 0] = -2.0 * self.a
        return t


class DoublingMap(Diffeomorphism):
    """x -> 2x mod 1; not invertible (used for entropy/exponent estimation)."""

    max_order = 3

    def __init__(self):
        super().__init__(Torus(1), regularity=(1, 1.0))
        self.name = "doubling"
        self.norm_cap = 2.0

    def _step(self, x):
        return 2.0 * x

    def _jacobian(self, x):
        return np.full((x.shape[0], 1, 1), 2.0)

    def _deriv_high(self, x, order):
        return np.zeros((x.shape[0],) + (1,) * (order + 1))


class CircleRotation(Diffeomorphism):
    max_order = 3

    def __init__(self, rho: float):
        super().__init__(Torus(1), regularity=(1, 1.0), params={"rho": rho})
        self.rho = float(rho)
        self.name = "rotation"
        self.norm_cap = 1.0

    def _step(self, x):
        return x + self.rho

    def _inverse_step(self, x):
        return x - self.rho

    def _jacobian(self, x):
        return np.ones((x.shape[0], 1, 1))

    def _deriv_high(self, x, order):
        return np.zeros((x.shape[0],) + (1,) * (order + 1))


class TorusRotation(Diffeomorphism):
    """Rigid translation on T^d (zero entropy, zero exponents)."""

    max_order = 3

    def __init__(self, shifts):
        shifts = np.asarray(shifts, dtype=float)
        super().__init__(Torus(len(shifts)), regularity=(1, 1.0),
                         params={"shifts": shifts.tolist()})
        self.shifts = shifts
        self.name = f"rotation{len(shifts)}"
        self.norm_cap = 1.0

    def _step(self, x):
        return x + self.shifts

    def _inverse_step(self, x):
        return x - self.shifts

    def _jacobian(self, x):
        d = self.space.dim
        return np.broadcast_to(np.eye(d), (x.shape[0], d, d)).copy()

    def _deriv_high(self, x, order):
        d = self.space.dim
        return np.zeros((x.shape[0],) + (d,) * (order + 1))


class ProductWithRotation(Diffeomorphism):
    """(base 2D map) x (circle rotation) on T^3."""

    def __init__(self, base: Diffeomorphism, rho: float):
        if base.space.dim != 2 or not base.space.periodic:
            raise ValueError("base must live on T^2")
        super().__init__(Torus(3), regularity=(base.r, base.alpha),
                         params={"base": base.name, "rho": rho})
        self.base = base
        self.rho = float(rho)
        self.name = base.name + "_x_rot"
        self.max_order = base.max_order
        self.norm_cap = base.norm_cap

    def _step(self, x):
        y2 = self.base._step(x[:, :2])
        return np.concatenate([y2, x[:, 2:] + self.rho], axis=-1)

    def _inverse_step(self, x):
        y2 = self.base._inverse_step(x[:, :2])
        if y2 is None:
            return None
        return np.concatenate([y2, x[:, 2:] - self.rho], axis=-1)

    def _jacobian(self, x):
        n = x.shape[0]
        j = np.zeros((n, 3, 3))
        j[:, :2, :2] = self.base._jacobian(x[:, :2])
        j[:, 2, 2] = 1.0
        return j

    def _deriv_high(self, x, order):
        n = x.shape[0]
        t = np.zeros((n,) + (3,) * (order + 1))
        sub = self.base.deriv(x[:, :2], order)
        block = (slice(None), slice(0, 2)) + (slice(0, 2),) * order
        t[block] = sub
        return t


class TrigBumpField:
    """Periodic vector field, component i = amp_i sin(2pi freq_i . x + phase_i)."""

    def __init__(self, dim: int, amps, freqs, phases):
        self.dim = dim
        self.amps = np.asarray(amps, dtype=float)
        self.freqs = np.asarray(freqs, dtype=float)  # (d, d) integer rows
        self.phases = np.asarray(phases, dtype=float)
        if self.freqs.shape != (dim, dim):
            raise ValueError("freqs must be (dim, dim)")
        if not np.allclose(self.freqs, np.round(self.freqs)):
            raise ValueError("frequencies must be integer for periodicity")
        # Lipschitz bound sum_i |amp_i| 2pi |k_i|
        self.lip = float(np.sum(np.abs(self.amps) * 2 * np.pi
                                * np.linalg.norm(self.freqs, axis=1)))

    def value(self, x):
        ph = 2 * np.pi * (x @ self.freqs.T) + self.phases
        return self.amps * np.sin(ph)

    def deriv(self, x, order):
        """Order-th derivative tensor batch of the field, (n, d, d^order)."""
        n = x.shape[0]
        d = self.dim
        ph = 2 * np.pi * (x @ self.freqs.T) + self.phases + order * np.pi / 2
        vals = self.amps * (2 * np.pi) ** order * np.sin(ph)  # (n, d)
        out = np.zeros((n,) + (d,) * (order + 1))
        for i in range(d):
            k = self.freqs[i]
            tens = k
            for _ in range(order - 1):
                tens = np.multiply.outer(tens, k)
            out[:, i, ...] = vals[:, i][(slice(None),) + (None,) * order] * tens
        return out


def default_bump(dim: int) -> TrigBumpField:
    """A fixed divergence-leaning bump used by the perturbation scenarios."""
    if dim == 2:
        return TrigBumpField(2, amps=[0.5, 0.5],
                             freqs=[[0, 1], [1, 0]], phases=[0.0, np.pi / 3])
    if dim == 3:
        return TrigBumpField(3, amps=[0.4, 0.4, 0.3],
                             freqs=[[0, 1, 0], [0, 0, 1], [1, 0, 0]],
                             phases=[0.0, np.pi / 3, np.pi / 5])
    return TrigBumpField(1, amps=[0.5], freqs=[[1]], phases=[0.0])


class PerturbedMap(Diffeomorphism):
    """f_t = (id + t b) o f for a base map f and periodic bump field b.

    Invertibility requires |t| Lip(b) < 1; the near-identity factor is
    inverted by fixed-point iteration to ~1e-14.
    """

    def __init__(self, base: Diffeomorphism, t: float, bump: TrigBumpField | None = None):
        bump = bump or default_bump(base.space.dim)
        if abs(t) * bump.lip >= 0.9:
            raise ValueError("perturbation too large to stay a diffeomorphism")
        super().__init__(base.space, regularity=(base.r, base.alpha),
                         params={"base": base.name, "t": t})
        self.base = base
        self.t = float(t)
        self.bump = bump
        self.name = f"{base.name}+bump"
        self.max_order = min(base.max_order, 3)
        if base.norm_cap is not None:
            self.norm_cap = base.norm_cap * (1.0 + abs(t) * bump.lip) + abs(t) * bump.lip

    def _shift(self, y):
        return y + self.t * self.bump.value(y)

    def _unshift(self, z):
        y = z.copy()
        for _ in range(100):
            y_next = z - self.t * self.bump.value(y)
            if np.max(np.abs(y_next - y)) < 1e-15:
                y = y_next
                break
            y = y_next
        return y

    def _step(self, x):
        return self._shift(self.base._step(x))

    def _inverse_step(self, x):
        y = self._unshift(x)
        return self.base._inverse_step(self.space.wrap(y))

    def _shift_derivs(self, y, order):
        d = self.space.dim
        n = y.shape[0]
        eye = np.broadcast_to(np.eye(d), (n, d, d)).copy()
        out = [eye + self.t * self.bump.deriv(y, 1)]
        for k in range(2, order + 1):
            out.append(self.t * self.bump.deriv(y, k))
        return out

    def _jacobian(self, x):
        y = self.space.wrap(self.base._step(x))
        return np.einsum("nij,njk->nik", self._shift_derivs(y, 1)[0],
                         self.base._jacobian(x))

    def _deriv_high(self, x, order):
        y = self.space.wrap(self.base._step(x))
        outer = self._shift_derivs(y, order)
        inner = self.base.deriv_stack(x, order)
        return map_chain(outer, inner)[order - 1]


class MapPower:
    """g = f^k evaluated stepwise (wrap each step keeps float precision).

    Provides the interfaces the reparametrization pipeline needs: step,
    scaled jacobian products, and sequential derivative chaining.  Not a
    Diffeomorphism subclass on purpose; norms of f^k can exceed float
    range, so jacobians are exposed in log-scaled form.
    """

    def __init__(self, base: Diffeomorphism, power: int):
        if power < 1:
            raise ValueError("power must be >= 1")
        self.base = base
        self.power = int(power)
        self.space = base.space
        self.name = f"{base.name}^{power}"

    def step(self, x):
        for _ in range(self.power):
            x = self.base.step(x)
        return x

    def scaled_jacobian(self, x):
        """(log_scale, B) with D(f^k)(x) = exp(log_scale)[:, None, None] * B."""
        x2, single = _batch(x, self.space.dim)
        n, d = x2.shape
        b = np.broadcast_to(np.eye(d), (n, d, d)).copy()
        scale = np.zeros(n)
        pts = x2
        for _ in range(self.power):
            j = self.base.jacobian(pts)
            if j.ndim == 2:
                j = j[None]
            b = np.einsum("nij,njk->nik", j, b)
            m = np.linalg.norm(b, axis=(1, 2))
            m = np.where(m == 0, 1.0, m)
            b /= m[:, None, None]
            scale += np.log(m)
            pts = self.base.step(pts)
        if single:
            return float(scale[0]), b[0]
        return scale, b

    def log_jacobian_norm(self, x):
        scale, b = self.scaled_jacobian(x)
        norm = np.linalg.norm(b, 2, axis=(-2, -1)) if np.ndim(b) == 3 \
            else np.linalg.norm(b, 2)
        return scale + np.log(norm)


# ---------------------------------------------------------------------------
# registry for scenario construction

def make_map(name: str, **params) -> Diffeomorphism:
    if name == "cat":
        return cat_map()
    if name == "toral_auto":
        return ToralAutomorphism(params["matrix"])
    if name == "standard":
        return StandardMap(params.get("kick", 1.0))
    if name == "henon":
        return HenonMap(params.get("a", 1.4), params.get("b", 0.3))
    if name == "doubling":
        return DoublingMap()
    if name == "rotation":
        return TorusRotation(params.get("shifts", [0.61803398875]))
    if name == "cat_x_rotation":
        return ProductWithRotation(cat_map(), params.get("rho", 0.61803398875))
    if name == "plastic3":
        # companion matrix of x^3 - x - 1: one expanding direction,
        # complex contracting pair; its inverse has two positive exponents
        return ToralAutomorphism([[0, 0, 1], [1, 0, 1], [0, 1, 0]], name="plastic3")
    if name == "plastic3_inverse":
        return make_map("plastic3").inverse_map()
    if name == "perturbed_cat":
        return PerturbedMap(cat_map(), params.get("t", 0.0))
    if name == "identity":
        dim = params.get("dim", 2)
        return TorusRotation([0.0] * dim)
    raise ValueError(f"unknown map family {name!r}")


# ---------------------------------------------------------------------------
# sampled C^{r,alpha} norm


def _stack_op_norms(t: np.ndarray) -> np.ndarray:
    """Largest singular value of each tensor flattened to (d, -1)."""
    flat = t.reshape(t.shape[0], t.shape[1], -1)
    return np.linalg.svd(flat, compute_uv=False)[:, 0]


def _holder_direction(g: Diffeomorphism, per_side: int):
    """Sup norms of D^j g (j <= r) and dyadic-lag Hoelder quotients of D^r g."""
    space = g.space
    r, alpha = g.r, g.alpha
    grid = space.grid(per_side)
    sups = {}
    tensors = None
    for j in range(1, r + 1):
        t = g.deriv(grid, j)
        sups[f"sup_D{j}"] = float(np.max(_stack_op_norms(t)))
        if j == r:
            tensors = t
    # reshape to grid layout for neighbor differencing
    pts_per_axis = per_side if space.periodic else per_side + 1
    dim = space.dim
    tgrid = tensors.reshape((pts_per_axis,) * dim + tensors.shape[1:])
    flat_axis = tuple(range(dim, tgrid.ndim))
    quot = 0.0
    lag = 1
    while lag <= per_side // 2:
        for axis in range(dim):
            if space.periodic:
                other = np.roll(tgrid, -lag, axis=axis)
                diff = np.sqrt(np.sum((tgrid - other) ** 2, axis=flat_axis))
                h = lag / per_side
            else:
                sl_lo = [slice(None)] * dim
                sl_hi = [slice(None)] * dim
                sl_lo[axis] = slice(0, pts_per_axis - lag)
                sl_hi[axis] = slice(lag, pts_per_axis)
                diff = np.sqrt(np.sum(
                    (tgrid[tuple(sl_lo)] - tgrid[tuple(sl_hi)]) ** 2,
                    axis=flat_axis))
                h = lag * space.sides[axis] / per_side
            quot = max(quot, float(np.max(diff)) / h**alpha)
        lag *= 2
    sups[f"holder_D{r}"] = quot
    return sups


def holder_norm(f: Diffeomorphism, per_side: int = 64):
    """Sampled lower estimate of the full C^{r,alpha} norm of f.

    Takes the max of sup ||D^j f||, sup ||D^j f^{-1}|| (j <= r) and the
    Hoelder quotients of D^r in both directions, all sampled on a regular
    grid with dyadic-lag difference pairs.  Nested grids (doubling
    per_side) make the estimate monotone nondecreasing under refinement.
    """
    parts = {}
    for label, g in (("fwd", f), ("inv", f.inverse_map() if f.invertible else None)):
        if g is None:
            continue
        for key, val in _holder_direction(g, per_side).items():
            parts[f"{label}_{key}"] = val
    return {
        "value": max(parts.values()),
        "parts": parts,
        "per_side": per_side,
        "r": f.r,
        "alpha": f.alpha,
    }
