"""Shared finite-volume pieces: grid edges, face coefficients, stiffness matrices."""

import numpy as np
import scipy.sparse as sp


def edges(shape):
    """All 4-neighbour edges of the node grid.

    Returns ``(p, q, w)``: flat endpoint indices and the dual-face length in
    units of ``h`` (0.5 for edges running along the frame, 1 otherwise).
    """
    ny, nx = shape
    idx = np.arange(ny * nx).reshape(shape)
    # horizontal edges (x-direction)
    hp, hq = idx[:, :-1].ravel(), idx[:, 1:].ravel()
    hw = np.ones((ny, nx - 1))
    hw[[0, -1], :] = 0.5
    # vertical edges (y-direction)
    vp, vq = idx[:-1, :].ravel(), idx[1:, :].ravel()
    vw = np.ones((ny - 1, nx))
    vw[:, [0, -1]] = 0.5
    return (
        np.concatenate([hp, vp]),
        np.concatenate([hq, vq]),
        np.concatenate([hw.ravel(), vw.ravel()]),
    )


def face_coefficients(a, known, p, q):
    """Diffusivity on each edge.

    Harmonic mean of the endpoint values between two unknown nodes; the
    unknown endpoint's value on edges into the known region (the weight of
    Ω_K is not a diffusivity of Ω∖Ω_K). Edges between two known nodes get
    NaN and must be dropped by the caller.
    """
    a = np.asarray(a, dtype=float).ravel()
    ap, aq = a[p], a[q]
    with np.errstate(divide="ignore", invalid="ignore"):
        hm = np.where(ap + aq > 0, 2.0 * ap * aq / (ap + aq), 0.0)
    if known is None:
        return hm
    kn = np.asarray(known, dtype=bool).ravel()
    kp, kq = kn[p], kn[q]
    out = hm.copy()
    out[kp & ~kq] = aq[kp & ~kq]
    out[kq & ~kp] = ap[kq & ~kp]
    out[kp & kq] = np.nan
    return out


def stiffness(shape, a=None, known=None):
    """Full-grid stiffness ``sum_e w_e a_e (e_p - e_q)(e_p - e_q)^T``.

    With ``a`` omitted the diffusivity is 1 and every edge is kept, which
    gives ``-vol * Laplacian`` with mirrored Neumann ghosts on the frame.
    """
    n = shape[0] * shape[1]
    p, q, w = edges(shape)
    if a is None:
        k = w.copy()
        if known is not None:
            kn = np.asarray(known, dtype=bool).ravel()
            k[kn[p] & kn[q]] = np.nan
    else:
        k = w * face_coefficients(a, known, p, q)
    keep = ~np.isnan(k)
    p, q, k = p[keep], q[keep], k[keep]
    rows = np.concatenate([p, q, p, q])
    cols = np.concatenate([p, q, q, p])
    data = np.concatenate([k, k, -k, -k])
    return sp.csr_matrix(sp.coo_matrix((data, (rows, cols)), shape=(n, n)))


def _shift(a, s, axis):
    """``out[i] = a[i + s]`` along ``axis``; NaN where out of range."""
    out = np.full(a.shape, np.nan)
    n = a.shape[axis]
    src = [slice(None)] * a.ndim
    dst = [slice(None)] * a.ndim
    if s > 0:
        src[axis], dst[axis] = slice(s, n), slice(0, n - s)
    else:
        src[axis], dst[axis] = slice(0, n + s), slice(-s, n)
    out[tuple(dst)] = a[tuple(src)]
    return out


def masked_derivative(values, usable, h, axis):
    """Second-order derivative along ``axis`` using only ``usable`` nodes.

    Central where both neighbours are usable, one-sided second order where
    only one side offers two nodes, one-sided first order with a single
    neighbour, and 0 for isolated nodes. With every node usable this is
    ``np.gradient(values, h, edge_order=2)`` up to rounding.
    """
    v = np.where(usable, values, np.nan)
    r1, r2 = _shift(v, 1, axis), _shift(v, 2, axis)
    l1, l2 = _shift(v, -1, axis), _shift(v, -2, axis)
    ok = lambda x: ~np.isnan(x)  # noqa: E731
    central = (r1 - l1) / (2 * h)
    # difference form so that constant data give exact zeros
    fwd2 = (4 * (r1 - v) - (r2 - v)) / (2 * h)
    bwd2 = (4 * (v - l1) - (v - l2)) / (2 * h)
    fwd1 = (r1 - v) / h
    bwd1 = (v - l1) / h
    out = np.zeros(values.shape)
    done = np.zeros(values.shape, dtype=bool)
    for cond, val in (
        (ok(r1) & ok(l1), central),
        (ok(r1) & ok(r2), fwd2),
        (ok(l1) & ok(l2), bwd2),
        (ok(r1), fwd1),
        (ok(l1), bwd1),
    ):
        sel = cond & ~done
        out[sel] = val[sel]
        done |= sel
    return out
