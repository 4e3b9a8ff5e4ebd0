"""Sparse linear systems for the three inpainting formulations.

All rows are scaled by the dual-cell area, which makes the pure diffusion
operator symmetric including the mirrored Neumann rows on the frame.

* ``dirichlet``   -- ``-Δu = 0`` on Ω∖Ω_K, ``u = f`` on Ω_K (eliminated).
* ``collocation`` -- ``c (u - f) - (1 - c) Δu = 0`` at every node.
* ``weak``        -- the divergence form in ``v = u - f``:
  ``-div((1-c)∇v) - ∇c·∇v + c v = (1-c)Δf`` with ``v = 0`` on Ω_K and
  ``∂_n v = -∂_n f`` on the frame.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import _fv
from .exceptions import NoDirichletDataError
from .grid import ScalarField, cell_volumes

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class SparseSystem:
    """Assembled system ``matrix @ x = rhs`` plus what is needed to map ``x`` back to an image.

    ``unknowns`` are the flat grid indices of the entries of ``x``. The full
    field is ``base`` with ``x`` written (``offset=False``) or added
    (``offset=True``) at those indices.
    """

    matrix: sp.csr_matrix
    rhs: np.ndarray
    symmetric_hint: bool
    origin: str
    unknowns: np.ndarray
    shape: tuple
    base: np.ndarray
    offset: bool = False
    notes: tuple = field(default=())

    def __post_init__(self):
        A = sp.csr_matrix(self.matrix)
        A.sum_duplicates()
        A.sort_indices()
        object.__setattr__(self, "matrix", A)
        n = A.shape[0]
        if A.shape != (n, n) or self.rhs.shape != (n,):
            raise ValueError(f"inconsistent system sizes: matrix {A.shape}, rhs {self.rhs.shape}")
        if np.any(np.diff(A.indptr) < 0):
            raise ValueError("row offsets must be monotone")
        if A.nnz and (A.indices.min() < 0 or A.indices.max() >= n):
            raise ValueError("column index out of range")
        if self.symmetric_hint:
            asym = symmetry_defect(A)
            scale = max(abs(A).max() if A.nnz else 0.0, 1.0)
            if asym > SYMMETRY_TOL * scale:
                raise ValueError(f"matrix flagged symmetric but |A - A^T| = {asym:.3e}")

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def indptr(self):
        return self.matrix.indptr

    @property
    def indices(self):
        return self.matrix.indices

    @property
    def data(self):
        return self.matrix.data

    def to_field(self, x):
        """Full-grid image for a solution vector ``x``."""
        u = np.array(self.base, dtype=float).ravel()
        if self.offset:
            u[self.unknowns] += x
        else:
            u[self.unknowns] = x
        return u.reshape(self.shape)


def symmetry_defect(A, samples=4000, seed=0):
    """Max ``|A_ij - A_ji|``; exact for n <= 2000, sampled over stored entries otherwise."""
    n = A.shape[0]
    if n <= 2000:
        D = A - A.T
        return float(abs(D).max()) if D.nnz else 0.0
    coo = A.tocoo()
    rng = np.random.default_rng(seed)
    pick = rng.choice(coo.nnz, size=min(samples, coo.nnz), replace=False)
    r, c, v = coo.row[pick], coo.col[pick], coo.data[pick]
    vt = np.asarray(A[c, r]).ravel()
    return float(np.max(np.abs(v - vt))) if pick.size else 0.0


def _field_values(f, shape):
    v = f.values if isinstance(f, ScalarField) else np.asarray(f, dtype=float)
    if v.shape != tuple(shape):
        raise ValueError(f"field shape {v.shape} does not match grid {tuple(shape)}")
    return v


def assemble_dirichlet(domain, f):
    """Five-point Laplacian on Ω∖Ω_K with ``f`` imposed on the known nodes.

    Raises
    ------
    NoDirichletDataError
        If there is no known node next to an unknown one (the Neumann
        Laplacian alone has constant functions in its kernel).
    """
    fv = _field_values(f, domain.shape)
    if not domain.has_dirichlet:
        raise NoDirichletDataError("no known pixel borders the unknown region; the system is singular")
    K = _fv.stiffness(domain.shape)
    u = domain.unknowns
    k = np.flatnonzero(np.asarray(domain.known).ravel())
    A = K[u][:, u]
    rhs = -(K[u][:, k] @ fv.ravel()[k])
    return SparseSystem(A, np.asarray(rhs, dtype=float), True, "dirichlet", u, domain.shape, fv.copy())


def assemble_collocation(domain, weight, f):
    """Pointwise ``c (u - f) - (1 - c) Δu = 0`` on the whole grid.

    Nodes with ``c = 1`` reduce to ``u = f``. The system is symmetric only
    for constant ``c``. A weight that vanishes everywhere yields the pure
    Neumann Laplacian, which is singular; the system is still returned (with
    a note and a ``RuntimeWarning``) so the singularity can be diagnosed.
    """
    fv = _field_values(f, domain.shape)
    c = weight.c.values
    if c.shape != tuple(domain.shape):
        raise ValueError("weight and domain shapes differ")
    vol = cell_volumes(domain.shape, domain.spacing).ravel()
    cf = c.ravel()
    K = _fv.stiffness(domain.shape)
    A = sp.diags(vol * cf) + sp.diags(1.0 - cf) @ K
    rhs = vol * cf * fv.ravel()
    notes = ()
    if not np.any(cf > 0):
        notes = ("all-zero weight: constant nullspace",)
        warnings.warn("weight is zero everywhere; collocation system is singular", RuntimeWarning, stacklevel=2)
    symmetric = bool(np.ptp(cf) == 0.0)
    n = domain.size
    return SparseSystem(A, rhs, symmetric, "collocation", np.arange(n), domain.shape, fv.copy(), notes=notes)


def laplacian_and_gradient(f):
    """Five-point Laplacian and gradient of ``f`` with quadratic ghost extrapolation.

    On the frame the ghost value is extrapolated quadratically, so the
    Laplacian uses one-sided second differences there and the gradient the
    second-order one-sided first difference.

    Returns ``(lap, dfdx, dfdy)`` as arrays.
    """
    v = f.values
    h = f.spacing
    dfdy, dfdx = np.gradient(v, h, edge_order=2)

    def second(a, axis):
        a = np.moveaxis(a, axis, 0)
        out = np.empty_like(a)
        out[1:-1] = a[:-2] - 2 * a[1:-1] + a[2:]
        out[0] = a[0] - 2 * a[1] + a[2]
        out[-1] = a[-1] - 2 * a[-2] + a[-3]
        return np.moveaxis(out, 0, axis) / h**2

    return second(v, 1) + second(v, 0), dfdx, dfdy


def weak_data(domain, weight, f):
    """Right-hand-side data of the weak problem on the grid.

    Returns a dict with ``g = (1-c)Δf``, ``lap_f``, ``dfdx``, ``dfdy``.
    """
    fv = f if isinstance(f, ScalarField) else ScalarField(f, domain.spacing)
    lap, dfdx, dfdy = laplacian_and_gradient(fv)
    return {"g": (1.0 - weight.c.values) * lap, "lap_f": lap, "dfdx": dfdx, "dfdy": dfdy}


def _first_order(domain, weight, dfdx, dfdy):
    """Matrix and rhs shift of the ``-vol ∇c·∇v`` term.

    Central differences; known neighbours carry ``v = 0``; at frame nodes the
    normal derivative is the Neumann datum ``-∂f`` and moves to the rhs.
    """
    ny, nx = domain.shape
    h = domain.spacing
    idx = np.asarray(domain.unknown_index)
    vol = cell_volumes(domain.shape, h)
    rows, cols, vals = [], [], []
    shift = np.zeros(domain.size)
    for grad, dfd, axis in ((weight.grad_x.values, dfdx, 1), (weight.grad_y.values, dfdy, 0)):
        coef = -vol * grad
        I, J = np.nonzero(idx >= 0)
        pos = J if axis == 1 else I
        last = (nx if axis == 1 else ny) - 1
        inner = (pos > 0) & (pos < last)
        for step, sign in ((1, 1.0), (-1, -1.0)):
            In, Jn = (I, J + step) if axis == 1 else (I + step, J)
            ok = inner.copy()
            ok[ok] &= idx[In[ok], Jn[ok]] >= 0
            rows.append(idx[I[ok], J[ok]])
            cols.append(idx[In[ok], Jn[ok]])
            vals.append(sign * coef[I[ok], J[ok]] / (2 * h))
        edge = ~inner
        # ∂v = -∂f on the frame (∂u vanishes in the normal direction)
        flat = I[edge] * nx + J[edge]
        shift[flat] -= coef[I[edge], J[edge]] * (-dfd[I[edge], J[edge]])
    n = domain.n_unknowns
    G = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    return sp.csr_matrix(G), shift


def _neumann_flux(domain, a, dfdx, dfdy):
    """Boundary term ``∫ (1-c) h φ`` with ``h = -∂_n f``, lumped per frame node."""
    ny, nx = domain.shape
    h = domain.spacing
    wy = np.ones(ny)
    wy[[0, -1]] = 0.5
    wx = np.ones(nx)
    wx[[0, -1]] = 0.5
    out = np.zeros(domain.shape)
    # left/right edges: outward normal -x/+x, segment length h*wy
    out[:, 0] += a[:, 0] * h * wy * dfdx[:, 0]
    out[:, -1] -= a[:, -1] * h * wy * dfdx[:, -1]
    # top/bottom rows (y = y0 and y = y_max): outward normal -y/+y
    out[0, :] += a[0, :] * h * wx * dfdy[0, :]
    out[-1, :] -= a[-1, :] * h * wx * dfdy[-1, :]
    return out


def weak_parts(domain, weight, f):
    """Pieces of the weak system: stiffness, mass-like term, first-order term, rhs."""
    fv = _field_values(f, domain.shape)
    fs = ScalarField(fv, domain.spacing)
    c = weight.c.values
    if c.shape != tuple(domain.shape):
        raise ValueError("weight and domain shapes differ")
    a = 1.0 - c
    u = domain.unknowns
    vol = cell_volumes(domain.shape, domain.spacing)
    data = weak_data(domain, weight, fs)
    K = _fv.stiffness(domain.shape, a, domain.known)[u][:, u]
    C = sp.diags((vol * c).ravel()[u])
    G, shift = _first_order(domain, weight, data["dfdx"], data["dfdy"])
    rhs_full = vol * data["g"] + _neumann_flux(domain, a, data["dfdx"], data["dfdy"])
    rhs = rhs_full.ravel()[u] + shift[u]
    return {"stiffness": sp.csr_matrix(K), "reaction": sp.csr_matrix(C), "advection": G, "rhs": rhs, **data}


def assemble_weak(domain, weight, f):
    """Finite-volume discretisation of the weak form, unknown ``v = u - f``.

    Face diffusivities are harmonic means of ``1 - c``; the first-order term
    uses central differences. ``system.to_field(v)`` returns ``u = v + f``.
    """
    fv = _field_values(f, domain.shape)
    parts = weak_parts(domain, weight, fv)
    A = parts["stiffness"] + parts["reaction"] + parts["advection"]
    notes = ()
    cu = weight.c.values.ravel()[domain.unknowns]
    if not domain.has_dirichlet and not np.any(cu > 0):
        notes = ("all-zero weight: constant nullspace",)
        warnings.warn("weight is zero on every unknown and there is no Dirichlet data; system is singular",
                      RuntimeWarning, stacklevel=2)
    symmetric = parts["advection"].count_nonzero() == 0
    return SparseSystem(A, parts["rhs"], bool(symmetric), "weak", domain.unknowns, domain.shape, fv.copy(),
                        offset=True, notes=notes)


def assemble(form, domain, f, weight=None):
    """Dispatch on ``form`` in {'dirichlet', 'collocation', 'weak'}."""
    if form == "dirichlet":
        return assemble_dirichlet(domain, f)
    if weight is None:
        raise ValueError(f"form {form!r} needs a weight")
    if form == "collocation":
        return assemble_collocation(domain, weight, f)
    if form == "weak":
        return assemble_weak(domain, weight, f)
    raise ValueError(f"unknown form {form!r}; expected dirichlet, collocation or weak")
