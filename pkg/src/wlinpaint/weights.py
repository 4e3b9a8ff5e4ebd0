"""Weight fields, the weighted V-norm, and the admissibility checks on ``c``.

The checks mirror the conditions a weight must meet for the weak problem
to be well posed: ``c`` maps into [0, 1], the gradient is controlled by
``sqrt(c(1-c))`` (growth constant ``kappa``), the pointwise ternary form is
coercive relative to its diagonal (constant ``kappa_prime``), and the
non-compactness numbers ``A_k`` stay below 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy import ndimage

from . import _fv
from ._eigen import largest_generalized_eig
from .exceptions import ExhaustionEmptyError
from .grid import ScalarField, cell_volumes, frame_mask, full_domain

TOL_DEG = 1e-12


def tol_grad(h):
    return 1e-8 / h


@dataclass(frozen=True)
class WeightField:
    """The weight ``c`` together with its gradient."""

    c: ScalarField
    grad_x: ScalarField
    grad_y: ScalarField
    gradient_source: str = "central-difference"

    def __post_init__(self):
        v = self.c.values
        if not np.all(np.isfinite(v)):
            raise ValueError("weight contains non-finite values")
        if v.min() < 0.0 or v.max() > 1.0:
            raise ValueError(f"weight must map into [0, 1]; got range [{v.min()}, {v.max()}]")
        if self.grad_x.shape != self.c.shape or self.grad_y.shape != self.c.shape:
            raise ValueError("gradient fields must match the weight's shape")
        if self.gradient_source not in ("analytic-supplied", "central-difference"):
            raise ValueError(f"unknown gradient source {self.gradient_source!r}")

    @property
    def spacing(self):
        return self.c.spacing

    @property
    def shape(self):
        return self.c.shape

    @classmethod
    def from_values(cls, c, spacing=None, domain=None, grad=None):
        """Build a weight from raw values (array or :class:`ScalarField`).

        With ``grad=(gx, gy)`` the gradient is taken as supplied; otherwise
        :func:`compute_gradient` is used, restricted to Ω∖Ω_K if ``domain``
        is given.
        """
        if not isinstance(c, ScalarField):
            c = ScalarField(c, 1.0 if spacing is None else spacing)
        if grad is not None:
            gx, gy = (g if isinstance(g, ScalarField) else c.with_values(g) for g in grad)
            return cls(c, gx, gy, "analytic-supplied")
        gx, gy = compute_gradient(c, domain)
        return cls(c, gx, gy, "central-difference")

    def saturated_unknowns(self, domain):
        """Unknown nodes where ``c >= 1`` (these should belong to Ω_K)."""
        bad = (~domain.known) & (self.c.values >= 1.0)
        return [tuple(int(t) for t in ij) for ij in np.argwhere(bad)]


def compute_gradient(c, domain=None):
    """Discrete gradient of a field.

    Second-order central differences inside, second-order one-sided at the
    frame. When ``domain`` is given, differences at unknown nodes never reach
    into Ω_K, so a weight that jumps to 1 on the known set has no spurious
    gradient next to it.

    Returns
    -------
    (ScalarField, ScalarField)
        ``(d/dx, d/dy)``; x runs along columns, y along rows.
    """
    v = c.values
    h = c.spacing
    if min(v.shape) < 3:
        raise ValueError(f"gradient needs at least 3x3 nodes, got {v.shape}")
    everywhere = np.ones(v.shape, dtype=bool)
    gx = _fv.masked_derivative(v, everywhere, h, axis=1)
    gy = _fv.masked_derivative(v, everywhere, h, axis=0)
    if domain is not None:
        if tuple(domain.shape) != v.shape:
            raise ValueError("domain and field shapes differ")
        usable = ~domain.known
        gx = np.where(usable, _fv.masked_derivative(v, usable, h, axis=1), gx)
        gy = np.where(usable, _fv.masked_derivative(v, usable, h, axis=0), gy)
    return c.with_values(gx), c.with_values(gy)


@dataclass(frozen=True)
class CoefficientField:
    """Per-node coefficients of the ternary quadratic form.

    ``diag_val`` multiplies the value-value product, ``diag_grad`` both
    derivative-derivative products, ``cross_x``/``cross_y`` the products of
    the value with the x/y derivative. All other pairs are zero.
    """

    diag_val: np.ndarray
    diag_grad: np.ndarray
    cross_x: np.ndarray
    cross_y: np.ndarray
    spacing: float = 1.0

    @classmethod
    def from_weight(cls, weight, y_sign=-1.0):
        c = weight.c.values
        return cls(
            diag_val=c,
            diag_grad=1.0 - c,
            cross_x=-weight.grad_x.values,
            cross_y=y_sign * weight.grad_y.values,
            spacing=weight.spacing,
        )


def _unknown_mask(domain, shape):
    if domain is None:
        return np.ones(shape, dtype=bool)
    return ~np.asarray(domain.known)


def growth_kappa(weight, domain=None):
    """Smallest ``kappa`` with ``|d c| <= kappa sqrt(c (1 - c))`` on Ω∖Ω_K.

    Where ``c(1-c)`` is numerically zero the bound forces the gradient to
    vanish; such nodes give ratio 0 if it does and ``inf`` otherwise.

    Returns
    -------
    kappa_min : float
    violations : list of ((row, col), ratio)
        Nodes with infinite ratio.
    """
    c = weight.c.values
    sel = _unknown_mask(domain, c.shape)
    if not sel.any():
        return 0.0, []
    cc = c * (1.0 - c)
    g = np.maximum(np.abs(weight.grad_x.values), np.abs(weight.grad_y.values))
    deg = cc <= TOL_DEG
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(deg, np.where(g <= tol_grad(weight.spacing), 0.0, np.inf), g / np.sqrt(cc))
    ratio = np.where(sel, ratio, 0.0)
    bad = np.argwhere(np.isinf(ratio))
    violations = [((int(i), int(j)), float("inf")) for i, j in bad]
    return float(ratio.max()), violations


def _kappa_prime_field(coeffs, sel):
    c = coeffs.diag_val
    a = coeffs.diag_grad
    h = coeffs.spacing
    out = np.ones(c.shape)
    dd = c * a
    deg = dd <= TOL_DEG
    gnorm = np.maximum(np.abs(coeffs.cross_x), np.abs(coeffs.cross_y))
    out[deg & (gnorm > tol_grad(h))] = 0.0

    nd = sel & ~deg
    if nd.any():
        cv, av = c[nd], a[nd]
        # xi = (value, d/dy, d/dx); symmetric part of the form, then scale by D^{-1/2}
        M = np.zeros((cv.size, 3, 3))
        M[:, 0, 0] = cv
        M[:, 1, 1] = av
        M[:, 2, 2] = av
        M[:, 0, 1] = M[:, 1, 0] = 0.5 * coeffs.cross_y[nd]
        M[:, 0, 2] = M[:, 2, 0] = 0.5 * coeffs.cross_x[nd]
        s = 1.0 / np.sqrt(np.stack([cv, av, av], axis=1))
        N = M * s[:, :, None] * s[:, None, :]
        out[nd] = np.linalg.eigvalsh(N)[:, 0]
    return np.where(sel, out, np.inf)


def quadratic_kappa_prime(coeffs, domain=None):
    """Largest ``kappa'`` with ``Q(xi) >= kappa' * sum_g a_gg xi_g**2`` on Ω∖Ω_K.

    Per node this is the smallest eigenvalue of the pencil (M, D), M the
    symmetric matrix of the form and D its diagonal. Where D is singular the
    form must not couple D's kernel to its range; if it does, the node
    contributes 0.

    Accepts a :class:`CoefficientField` or a :class:`WeightField`. For a
    weight, both sign conventions of the y cross coefficient are evaluated and
    the smaller value returned.
    """
    if isinstance(coeffs, WeightField):
        return min(
            quadratic_kappa_prime(CoefficientField.from_weight(coeffs, s), domain) for s in (-1.0, 1.0)
        )
    sel = _unknown_mask(domain, coeffs.diag_val.shape)
    if not sel.any():
        return 1.0
    return float(_kappa_prime_field(coeffs, sel).min())


def kappa_prime_field(weight, domain=None, y_sign=-1.0):
    """Per-node values behind :func:`quadratic_kappa_prime` (``inf`` off Ω∖Ω_K)."""
    coeffs = CoefficientField.from_weight(weight, y_sign)
    return _kappa_prime_field(coeffs, _unknown_mask(domain, weight.shape))


# -- weighted inner product ---------------------------------------------------


def _as_values(u):
    return u.values if isinstance(u, ScalarField) else np.asarray(u, dtype=float)


def _gradient_term(u, v, weight, domain):
    shape = weight.shape
    p, q, w = _fv.edges(shape)
    known = None if domain is None else domain.known
    a = 1.0 - weight.c.values
    k = w * _fv.face_coefficients(a, known, p, q)
    keep = ~np.isnan(k)
    uf, vf = _as_values(u).ravel(), _as_values(v).ravel()
    du = uf[q[keep]] - uf[p[keep]]
    dv = vf[q[keep]] - vf[p[keep]]
    return float(np.sum(k[keep] * du * dv))


def _mass_term(u, v, weight, domain):
    vol = cell_volumes(weight.shape, weight.spacing)
    sel = _unknown_mask(domain, weight.shape)
    return float(np.sum((vol * _as_values(u) * _as_values(v))[sel]))


def v_inner(u, v, weight, domain=None):
    """Weighted inner product ``int (1-c) grad u . grad v + u v`` over Ω∖Ω_K.

    Gradient terms use edge differences (face-centred gradients) on every
    edge with at least one unknown endpoint; mass terms use the dual-cell
    areas of the unknown nodes.
    """
    return _gradient_term(u, v, weight, domain) + _mass_term(u, v, weight, domain)


def v_norm(u, weight, domain=None):
    return float(np.sqrt(max(v_inner(u, u, weight, domain), 0.0)))


def v_seminorm(u, weight, domain=None):
    return float(np.sqrt(max(_gradient_term(u, u, weight, domain), 0.0)))


def l2_norm(u, domain, spacing=None):
    """Discrete L2 norm over the unknown nodes."""
    vals = _as_values(u)
    h = spacing if spacing is not None else domain.spacing
    vol = cell_volumes(vals.shape, h)
    sel = _unknown_mask(domain, vals.shape)
    return float(np.sqrt(np.sum((vol * vals**2)[sel])))


def stiffness_matrix(weight, domain):
    """Gram matrix of the seminorm, restricted to the unknowns."""
    K = _fv.stiffness(weight.shape, 1.0 - weight.c.values, domain.known)
    u = domain.unknowns
    return sp.csr_matrix(K[u][:, u])


def mass_matrix(domain):
    return sp.diags(domain.volumes().ravel()[domain.unknowns]).tocsr()


def gram_matrix(weight, domain):
    """Gram matrix of the V inner product on the unknowns."""
    return (stiffness_matrix(weight, domain) + mass_matrix(domain)).tocsr()


# -- non-compactness numbers --------------------------------------------------


def boundary_distance(domain):
    """4-neighbour graph distance of each node from ∂(Ω∖Ω_K).

    Frame nodes are at distance 0, unknown nodes next to Ω_K at 1.
    """
    sources = frame_mask(domain.shape) | np.asarray(domain.known)
    return ndimage.distance_transform_cdt(~sources, metric="taxicab").astype(float)


def estimate_A(domain, weight, levels=4, tol=1e-12):
    """Finite sequence ``A_1, ..., A_levels`` of non-compactness numbers.

    ``X_k`` holds the unknown nodes farther than ``d_k`` from ∂(Ω∖Ω_K), with
    ``d_1`` the largest distance present (so ``X_1`` is empty) and ``d_k``
    halving per level. ``A_k**2`` is the largest eigenvalue of the mass
    matrix restricted to the layer ``X^k = (Ω∖Ω_K) minus X_k`` against the
    V Gram matrix.

    Raises
    ------
    ExhaustionEmptyError
        If some level ``k >= 2`` has ``d_k < 1``: the grid holds no node
        between ``X_{k-1}`` and the boundary layer, so the level is empty.
    """
    if levels < 1:
        raise ValueError("levels must be positive")
    dist = boundary_distance(domain).ravel()[domain.unknowns]
    if dist.size == 0:
        raise ExhaustionEmptyError("domain has no unknowns")
    dmax = dist.max()
    G = gram_matrix(weight, domain)
    vol = domain.volumes().ravel()[domain.unknowns]
    seq = []
    for k in range(1, levels + 1):
        d_k = dmax / 2 ** (k - 1)
        inner = dist > d_k
        if k >= 2 and (d_k < 1.0 or not inner.any()):
            raise ExhaustionEmptyError(
                f"level {k} needs a layer of width {d_k:g} < 1 node spacing "
                f"(max boundary distance {dmax:g} nodes); grid too coarse for {levels} levels"
            )
        Mk = sp.diags(np.where(inner, 0.0, vol)).tocsr()
        lam, _, _ = largest_generalized_eig(Mk, G, tol=tol)
        seq.append(float(np.sqrt(min(max(lam, 0.0), 1.0))))
    return seq


# -- report -------------------------------------------------------------------


@dataclass
class AdmissibilityReport:
    kappa_min: float
    kappa_prime_max: float
    growth_violations: list
    a_sequence: list
    a_limit_estimate: float
    a_monotone: bool
    saturated: list = field(default_factory=list)

    @property
    def passed(self):
        return (
            np.isfinite(self.kappa_min)
            and self.kappa_prime_max > 0
            and self.a_limit_estimate < 1
        )

    def lines(self):
        seq = ",".join(f"{a:.10g}" for a in self.a_sequence)
        return [
            f"kappa_min={self.kappa_min:.10g}",
            f"kappa_prime_max={self.kappa_prime_max:.10g}",
            f"growth_violations={len(self.growth_violations)}",
            f"saturated_unknowns={len(self.saturated)}",
            f"A_k={seq}",
            f"A_limit={self.a_limit_estimate:.10g}",
            f"A_monotone={str(self.a_monotone).lower()}",
            f"passed={str(bool(self.passed)).lower()}",
        ]


def check_admissibility(weight, domain=None, levels=4):
    """Run every check on ``weight`` and collect the verdicts."""
    if domain is None:
        domain = full_domain(weight.shape, weight.spacing)
    kappa, violations = growth_kappa(weight, domain)
    kprime = quadratic_kappa_prime(weight, domain)
    seq = estimate_A(domain, weight, levels)
    monotone = all(b <= a + 1e-9 for a, b in zip(seq, seq[1:]))
    return AdmissibilityReport(
        kappa_min=kappa,
        kappa_prime_max=kprime,
        growth_violations=violations,
        a_sequence=seq,
        a_limit_estimate=seq[-1],
        a_monotone=monotone,
        saturated=weight.saturated_unknowns(domain),
    )
