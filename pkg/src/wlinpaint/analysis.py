"""Model problems and constant estimates: annulus, capacity, Friedrichs, stability, mask sparsification."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from . import _fv
from ._eigen import largest_generalized_eig
from .discretization import SparseSystem, assemble_dirichlet, assemble_weak, weak_data
from .grid import ScalarField, build_domain, cell_volumes, grid_coords
from .solvers import solve
from .weights import (
    TOL_DEG,
    growth_kappa,
    l2_norm,
    mass_matrix,
    quadratic_kappa_prime,
    stiffness_matrix,
    tol_grad,
    v_norm,
)

log = logging.getLogger(__name__)


# -- annulus ------------------------------------------------------------------


def annulus_exact(epsilon, point):
    """Harmonic function on ``B_1 \\ B_eps`` equal to 1 on the inner and 0 on the outer circle.

    ``point`` is ``(x, y)``; arrays broadcast.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    x, y = (np.asarray(t, dtype=float) for t in point)
    r2 = x * x + y * y
    slack = 1e-12
    if np.any(r2 < (epsilon * (1 - slack)) ** 2) or np.any(r2 > (1 + slack) ** 2):
        raise ValueError("point outside the annulus eps <= r <= 1")
    val = np.log(r2) / (2.0 * np.log(epsilon))
    return float(val) if val.ndim == 0 else val


def _annulus_field(epsilon, r):
    with np.errstate(divide="ignore"):
        return np.log(r * r) / (2.0 * np.log(epsilon))


def annulus_grid(resolution, margin=4):
    """Square node grid holding the unit disk with ``margin`` nodes of slack to the frame.

    Returns ``(h, L, r)``: spacing, half-width and radius of every node.
    """
    n = int(resolution)
    h = 2.0 / (n - 1 - 2 * margin)
    L = (n - 1) * h / 2.0
    X, Y = grid_coords((n, n), h, (-L, -L))
    return h, L, np.hypot(X, Y)


@dataclass
class AnnulusRow:
    resolution: int
    h: float
    max_error: float
    iterations: int
    residual: float


@dataclass
class AnnulusTable:
    epsilon: float
    boundary: str
    rows: list

    def ratios(self):
        e = [r.max_error for r in self.rows]
        return [a / b for a, b in zip(e, e[1:])]

    def lines(self):
        out = [f"epsilon={self.epsilon:g}", f"boundary={self.boundary}"]
        if self.epsilon <= 0.5:
            out.append(f"exact_r0.5={annulus_exact(self.epsilon, (0.5, 0.0)):.6g}")
        for row in self.rows:
            out.append(
                f"resolution={row.resolution} h={row.h:.6g} max_error={row.max_error:.6e} "
                f"iterations={row.iterations} residual={row.residual:.3e}"
            )
        for (a, b), q in zip(zip(self.rows, self.rows[1:]), self.ratios()):
            out.append(f"ratio_{a.resolution}_{b.resolution}={q:.4f}")
        return out


def annulus_solve(epsilon, resolution, boundary="staircase", tolerance=1e-12):
    """Dirichlet solve of the annulus problem on a masked square grid.

    Nodes with ``r <= eps`` form the inner known disk; a ring of nodes with
    ``1 <= r <= 1 + 1.5h`` forms the outer known layer, sealing the annulus
    off from the remaining nodes, which only see the Neumann frame. With
    ``boundary='staircase'`` the known values are 1 (inner) and 0 (outer);
    with ``boundary='exact'`` the closed form is imposed on the known nodes
    instead, which removes the geometric error of the staircase.

    Returns ``(u, r, h, report)``.
    """
    h, L, r = annulus_grid(resolution)
    inner = r <= epsilon * (1 + 1e-12)
    ring = (r >= 1.0 - 1e-12) & (r <= 1.0 + 1.5 * h)
    if boundary == "staircase":
        f = np.where(inner, 1.0, 0.0)
    elif boundary == "exact":
        ex = _annulus_field(epsilon, np.maximum(r, h * 1e-3))
        f = np.where(inner | ring, ex, 0.0)
    else:
        raise ValueError(f"boundary must be 'staircase' or 'exact', got {boundary!r}")
    domain = build_domain(inner | ring, h, (-L, -L))
    system = assemble_dirichlet(domain, f)
    rep = solve(system, tolerance=tolerance)
    return system.to_field(rep.solution), r, h, rep


def annulus_convergence(epsilon, resolutions, boundary="staircase", tolerance=1e-12):
    """Max-norm error against the closed form, per resolution.

    The error is taken over annulus nodes farther than ``2h`` from both circles.
    """
    resolutions = [int(n) for n in resolutions]
    if any(n < 33 for n in resolutions):
        raise ValueError("each resolution must be at least 33")
    if any(b <= a for a, b in zip(resolutions, resolutions[1:])):
        raise ValueError("resolutions must be increasing")
    rows = []
    for n in resolutions:
        u, r, h, rep = annulus_solve(epsilon, n, boundary, tolerance)
        band = (r > epsilon + 2 * h) & (r < 1 - 2 * h)
        err = float(np.abs(u - _annulus_field(epsilon, r))[band].max())
        rows.append(AnnulusRow(n, h, err, rep.iterations, rep.final_residual))
    return AnnulusTable(epsilon, boundary, rows)


def degeneracy_table(epsilons, resolution=65, radius=0.5):
    """Closed-form values at ``radius`` and discrete solvability for shrinking inner disks.

    Returns a list of dicts with ``epsilon``, ``exact``, ``discrete`` (value
    at the grid node closest to ``(radius, 0)``), ``residual`` and
    ``known_inner`` (number of inner known nodes).
    """
    out = []
    for eps in epsilons:
        u, r, h, rep = annulus_solve(eps, resolution)
        n = r.shape[0]
        c = (n - 1) // 2
        j = c + int(round(radius / h))
        out.append(
            {
                "epsilon": eps,
                "exact": annulus_exact(eps, (radius, 0.0)),
                "discrete": float(u[c, j]),
                "residual": rep.final_residual,
                "converged": rep.converged,
                "known_inner": int(np.count_nonzero(r <= eps * (1 + 1e-12))),
            }
        )
    return out


# -- alpha-capacity -----------------------------------------------------------


@dataclass
class CapacityResult:
    value: float
    alpha: float
    minimizer: ScalarField
    resolution: int


def capacity_grid(resolution, geometry="square"):
    """Grid for capacity problems.

    ``square``: D = (0,1)^2 with the frame as ∂D. ``disk``: D is the unit disk
    on ``[-L, L]^2`` with two nodes of slack; nodes with ``r >= 1`` are ∂D.

    Returns ``(X, Y, h, outside)`` where ``outside`` marks nodes pinned to 0.
    """
    n = int(resolution)
    if geometry == "square":
        h = 1.0 / (n - 1)
        X, Y = grid_coords((n, n), h)
        outside = np.zeros((n, n), dtype=bool)
        outside[0, :] = outside[-1, :] = outside[:, 0] = outside[:, -1] = True
    elif geometry == "disk":
        h = 2.0 / (n - 1 - 4)
        L = (n - 1) * h / 2
        X, Y = grid_coords((n, n), h, (-L, -L))
        outside = np.hypot(X, Y) >= 1.0
    else:
        raise ValueError(f"geometry must be 'square' or 'disk', got {geometry!r}")
    return X, Y, h, outside


def capacity_energy(u, h, alpha):
    """Discrete ``int |grad u|^2 + alpha u^2`` over the whole grid."""
    u = np.asarray(u, dtype=float)
    K = _fv.stiffness(u.shape)
    vol = cell_volumes(u.shape, h).ravel()
    x = u.ravel()
    return float(x @ (K @ x) + alpha * np.sum(vol * x * x))


def alpha_capacity(resolution, region_E, alpha, geometry="square", tolerance=1e-12):
    """Discrete alpha-capacity of ``E`` inside ``D``.

    Minimises the quadratic energy subject to ``u = 1`` on E and ``u = 0`` on
    ∂D. The minimiser of the equality-constrained problem stays in [0, 1]
    (discrete maximum principle), so it also solves the ``u >= 1`` version.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    E = np.asarray(region_E, dtype=bool)
    n = int(resolution)
    if E.shape != (n, n):
        raise ValueError(f"region must have shape ({n}, {n}), got {E.shape}")
    if not E.any():
        raise ValueError("region E is empty")
    X, Y, h, outside = capacity_grid(n, geometry)
    if np.any(E & outside):
        raise ValueError("region E must lie strictly inside D")

    K = _fv.stiffness((n, n))
    vol = cell_volumes((n, n), h).ravel()
    A = (K + sp.diags(alpha * vol)).tocsr()
    fixed = (E | outside).ravel()
    free = np.flatnonzero(~fixed)
    e_idx = np.flatnonzero(E.ravel())
    rhs = -np.asarray(A[free][:, e_idx].sum(axis=1)).ravel()
    base = np.where(E, 1.0, 0.0)
    system = SparseSystem(A[free][:, free], rhs, True, "capacity", free, (n, n), base)
    rep = solve(system, method="cg", tolerance=tolerance)
    u = system.to_field(rep.solution)
    value = capacity_energy(u, h, alpha)
    return CapacityResult(value, float(alpha), ScalarField(u, h), n)


# -- Friedrichs constant ------------------------------------------------------


@dataclass
class FriedrichsResult:
    kappa0: float
    bounded: bool
    null_vector: np.ndarray = None
    iterations: int = 0
    detail: str = ""


def _unanchored_components(K):
    """Components of the positive-coefficient graph that never touch Dirichlet data."""
    A = sp.csr_matrix(K)
    off = A - sp.diags(A.diagonal())
    off.data[np.abs(off.data) == 0] = 0
    off.eliminate_zeros()
    ncomp, labels = connected_components(off, directed=False)
    anchor = np.asarray(A.sum(axis=1)).ravel() > 0
    anchored = np.zeros(ncomp, dtype=bool)
    np.logical_or.at(anchored, labels, anchor)
    return [np.flatnonzero(labels == k) for k in range(ncomp) if not anchored[k]]


def friedrichs_constant(domain, weight, tol=1e-12):
    """Smallest ``kappa0`` with ``||u||^2 <= kappa0 |||u|||^2`` on the discrete space.

    Computed as the largest eigenvalue of (mass, weighted stiffness). When
    some group of unknowns is cut off from the Dirichlet data by faces of
    zero diffusivity, its indicator has zero seminorm and the constant is
    unbounded; that case is reported with the indicator as evidence.
    """
    K = stiffness_matrix(weight, domain)
    M = mass_matrix(domain)
    loose = _unanchored_components(K)
    if loose:
        vec = np.zeros(domain.n_unknowns)
        comp = max(loose, key=len)
        vec[comp] = 1.0
        return FriedrichsResult(
            np.inf,
            False,
            vec,
            0,
            f"{len(loose)} group(s) of unknowns without Dirichlet anchoring (largest: {len(comp)} nodes)",
        )
    lam, _, it = largest_generalized_eig(M, K, tol=tol)
    return FriedrichsResult(float(lam), True, None, it)


# -- stability ----------------------------------------------------------------


@dataclass
class ConstantEstimates:
    kappa: float
    kappa_prime: float
    kappa0: float
    stability_factor: float
    f_norm_bound: float = float("nan")

    def lines(self):
        return [
            f"kappa={self.kappa:.10g}",
            f"kappa_prime={self.kappa_prime:.10g}",
            f"kappa0={self.kappa0:.10g}",
            f"stability_factor={self.stability_factor:.10g}",
            f"f_norm_bound={self.f_norm_bound:.10g}",
        ]


def data_bound(domain, weight, f):
    """Three-term bound ``||g|| + ||Δf|| + ||∇f / sqrt(1-c)||`` over Ω∖Ω_K.

    Returns ``(total, parts)``; the last term is infinite when ``1 - c``
    vanishes at a node where ``∇f`` does not.
    """
    fs = f if isinstance(f, ScalarField) else ScalarField(f, domain.spacing)
    data = weak_data(domain, weight, fs)
    a = 1.0 - weight.c.values
    gmag = np.hypot(data["dfdx"], data["dfdy"])
    unknown = ~np.asarray(domain.known)
    deg = a <= TOL_DEG
    blown = unknown & deg & (gmag > tol_grad(domain.spacing))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(deg, 0.0, gmag / np.sqrt(np.where(deg, 1.0, a)))
    parts = {
        "g": l2_norm(data["g"], domain),
        "lap_f": l2_norm(data["lap_f"], domain),
        "grad_ratio": float("inf") if blown.any() else l2_norm(ratio, domain),
        "blown_nodes": int(np.count_nonzero(blown)),
    }
    return parts["g"] + parts["lap_f"] + parts["grad_ratio"], parts


def constant_estimates(domain, weight, f=None):
    kappa, _ = growth_kappa(weight, domain)
    kprime = quadratic_kappa_prime(weight, domain)
    k0 = friedrichs_constant(domain, weight).kappa0
    factor = (1.0 + k0) / kprime if kprime > 0 else float("inf")
    bound = data_bound(domain, weight, f)[0] if f is not None else float("nan")
    return ConstantEstimates(kappa, kprime, k0, factor, bound)


@dataclass
class StabilityReport:
    v_norm: float
    bound: float
    surrogate: float
    constants: ConstantEstimates
    parts: dict = field(default_factory=dict)
    solve_converged: bool = True

    @property
    def holds(self):
        return bool(self.v_norm <= self.bound * (1 + 1e-10) + 1e-14)

    @property
    def margin(self):
        return self.bound - self.v_norm

    @property
    def surrogate_finite(self):
        return bool(np.isfinite(self.surrogate))

    def lines(self):
        return self.constants.lines() + [
            f"v_norm={self.v_norm:.10g}",
            f"surrogate={self.surrogate:.10g}",
            f"bound={self.bound:.10g}",
            f"margin={self.margin:.10g}",
            f"holds={str(self.holds).lower()}",
        ]


def stability_check(domain, weight, f, tolerance=1e-12):
    """Solve the weak problem and compare ``||v||_V`` with the a-priori bound.

    The bound is ``(1 + kappa0) / kappa' * S`` where ``S`` is the three-term
    data bound from :func:`data_bound` (an upper bound of the dual norm of
    the right-hand side).
    """
    fs = f if isinstance(f, ScalarField) else ScalarField(f, domain.spacing)
    consts = constant_estimates(domain, weight, fs)
    surrogate, parts = data_bound(domain, weight, fs)
    system = assemble_weak(domain, weight, fs.values)
    rep = solve(system, tolerance=tolerance)
    v = np.zeros(domain.size)
    v[domain.unknowns] = rep.solution
    vn = v_norm(v.reshape(domain.shape), weight, domain)
    bound = consts.stability_factor * surrogate
    if not np.isfinite(surrogate):
        log.warning("data bound is infinite: 1-c vanishes where grad f does not (%d nodes)", parts["blown_nodes"])
    return StabilityReport(vn, bound, surrogate, consts, parts, rep.converged)


# -- mask sparsification ------------------------------------------------------


def reconstruct(image, mask, spacing=1.0, tolerance=1e-10):
    """Homogeneous diffusion inpainting of ``image`` from ``mask``."""
    image = np.asarray(image, dtype=float)
    if mask.all():
        return image.copy()
    system = assemble_dirichlet(build_domain(mask, spacing), image)
    return system.to_field(solve(system, tolerance=tolerance).solution)


def mse(a, b):
    return float(np.mean((np.asarray(a) - np.asarray(b)) ** 2))


@dataclass
class SparsifyResult:
    mask: np.ndarray
    mse: float
    initial_mse: float
    accepted: int
    trials: int


def optimize_mask(image, density, seed=0, trials=50, swap_fraction=0.05):
    """Random-swap search for a sparse mask with small reconstruction error.

    Starts from a uniformly random mask of the requested density (frame
    pixels excluded, since known data may not touch the image border). Each
    trial exchanges a fraction of the mask pixels for random non-mask pixels
    and keeps the candidate only if the reconstruction MSE drops.
    """
    img = image.values if isinstance(image, ScalarField) else np.asarray(image, dtype=float)
    if not 0.0 < density <= 1.0:
        raise ValueError("density must lie in (0, 1]")
    total = img.size
    if density * total < 1:
        raise ValueError("density too small: fewer than one pixel would be kept")
    if density >= 1.0:
        full = np.ones(img.shape, dtype=bool)
        return SparsifyResult(full, 0.0, 0.0, 0, 0)

    rng = np.random.default_rng(seed)
    interior = np.zeros(img.shape, dtype=bool)
    interior[1:-1, 1:-1] = True
    cand = np.flatnonzero(interior.ravel())
    n_keep = int(min(max(1, round(density * total)), cand.size))
    chosen = rng.choice(cand, size=n_keep, replace=False)

    def build(idx):
        m = np.zeros(total, dtype=bool)
        m[idx] = True
        return m.reshape(img.shape)

    mask = build(chosen)
    best = mse(reconstruct(img, mask), img)
    initial = best
    accepted = 0
    k = max(1, int(round(swap_fraction * n_keep)))
    for _ in range(trials):
        in_mask = np.flatnonzero(mask.ravel())
        out_mask = np.setdiff1d(cand, in_mask, assume_unique=True)
        if out_mask.size == 0:
            break
        drop = rng.choice(in_mask, size=k, replace=False)
        add = rng.choice(out_mask, size=min(k, out_mask.size), replace=False)
        trial_idx = np.concatenate([np.setdiff1d(in_mask, drop, assume_unique=True), add])
        trial = build(trial_idx)
        err = mse(reconstruct(img, trial), img)
        if err < best:
            mask, best = trial, err
            accepted += 1
    return SparsifyResult(mask, best, initial, accepted, trials)


def sparsify_mask(image, density, seed=0, trials=50):
    """Boolean mask (True = kept pixel) found by :func:`optimize_mask`."""
    return optimize_mask(image, density, seed, trials).mask


def synthetic_image(n=64):
    """Smooth synthetic image with a few edges, values in [0, 1]."""
    X, Y = grid_coords((n, n), 1.0 / (n - 1))
    img = 0.35 + 0.25 * np.sin(3 * np.pi * X) * np.cos(2 * np.pi * Y)
    img += 0.3 * (np.hypot(X - 0.6, Y - 0.4) < 0.22)
    img += 0.15 * np.exp(-((X - 0.25) ** 2 + (Y - 0.75) ** 2) / 0.01)
    return np.clip(img, 0.0, 1.0)
