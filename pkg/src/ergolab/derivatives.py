"""Exact chain-rule helpers for derivative tensors up to order 3.

Convention: the order-k derivative of a map g: R^d -> R^d at a point is an
array of shape (d,)*(k+1), entry [i, j1, ..., jk] = d^k g_i / dx_{j1}..dx_{jk},
symmetric in the j indices.  Batched variants carry a leading axis.
"""

from __future__ import annotations

import numpy as np


def curve_chain(map_derivs: list, curve_derivs: list) -> list:
    """Derivatives of t -> g(c(t)) from those of g (at c(t)) and c.

    map_derivs: [Dg, D2g, D3g, ...] evaluated at c(t), batched over a
    leading axis n (shapes (n,d,d), (n,d,d,d), ...).
    curve_derivs: [c', c'', c''', ...] with shapes (n, d).
    Returns the same number of orders as min(len(map_derivs),
    len(curve_derivs)) for the composition, shapes (n, d).
    """
    order = min(len(map_derivs), len(curve_derivs))
    dg = map_derivs[0]
    c1 = curve_derivs[0]
    out = [np.einsum("nij,nj->ni", dg, c1)]
    if order >= 2:
        d2g = map_derivs[1]
        c2 = curve_derivs[1]
        h2 = np.einsum("nijk,nj,nk->ni", d2g, c1, c1)
        h2 += np.einsum("nij,nj->ni", dg, c2)
        out.append(h2)
    if order >= 3:
        d3g = map_derivs[2]
        c3 = curve_derivs[2]
        h3 = np.einsum("nijkl,nj,nk,nl->ni", d3g, c1, c1, c1)
        h3 += 3.0 * np.einsum("nijk,nj,nk->ni", d2g, c2, c1)
        h3 += np.einsum("nij,nj->ni", dg, c3)
        out.append(h3)
    return out


def map_chain(outer: list, inner: list) -> list:
    """Derivative tensors of g o f from tensors of g (at f(x)) and f (at x).

    Tensors are batched over a leading axis ([Dg, D2g, D3g] with shapes
    (n,d,d), (n,d,d,d), (n,d,d,d,d)); unbatched input is promoted and the
    output is stripped back.  Orders beyond the shorter list are dropped.
    """
    squeeze = outer[0].ndim == 2
    if squeeze:
        outer = [t[None] for t in outer]
        inner = [t[None] for t in inner]
    order = min(len(outer), len(inner))
    dg, df = outer[0], inner[0]
    out = [np.einsum("nij,nja->nia", dg, df)]
    if order >= 2:
        d2g, d2f = outer[1], inner[1]
        t = np.einsum("nijk,nja,nkb->niab", d2g, df, df)
        t += np.einsum("nij,njab->niab", dg, d2f)
        out.append(t)
    if order >= 3:
        d3g, d3f = outer[2], inner[2]
        t = np.einsum("nijkl,nja,nkb,nlc->niabc", d3g, df, df, df)
        m = np.einsum("nijk,njab,nkc->niabc", d2g, d2f, df)
        # symmetrize the mixed term over which pair of slots hits D2f
        t += m + m.transpose(0, 1, 2, 4, 3) + m.transpose(0, 1, 4, 2, 3)
        t += np.einsum("nij,njabc->niabc", dg, d3f)
        out.append(t)
    if squeeze:
        out = [t[0] for t in out]
    return out


def tensor_sup_norm(t: np.ndarray) -> float:
    """Operator-style norm bound for a symmetric derivative tensor.

    For order 1 this is the spectral norm; for higher orders we use the
    Frobenius norm of the flattening, an upper bound for the multilinear
    operator norm (adequate for the sup-norm bookkeeping here).
    """
    t = np.asarray(t, dtype=float)
    if t.ndim == 2:
        return float(np.linalg.norm(t, 2))
    return float(np.linalg.norm(t.reshape(t.shape[0], -1), 2))
