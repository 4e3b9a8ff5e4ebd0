"""Iterative and direct solvers for :class:`SparseSystem`, plus singularity diagnosis."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, onenormest, splu

from .exceptions import BreakdownError, MethodMismatchError

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DIRECT_MAX_N = 5000


@dataclass
class SolveReport:
    solution: np.ndarray
    iterations: int
    final_residual: float
    method: str
    converged: bool
    tolerance: float = DEFAULT_TOL


def residual(system, x):
    """Euclidean norm of ``b - A x``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (system.n,):
        raise ValueError(f"expected vector of length {system.n}, got shape {x.shape}")
    return float(np.linalg.norm(system.rhs - system.matrix @ x))


def _jacobi(A):
    d = A.diagonal().astype(float)
    inv = np.ones_like(d)
    nz = d != 0
    inv[nz] = 1.0 / d[nz]
    return inv


def _cg(A, b, x0, tol, maxiter, precondition=True, history=None):
    """Jacobi-preconditioned conjugate gradients.

    Stops on the true residual ``||b - A x|| <= tol * (1 + ||b||)``.
    ``history``, if a list, receives ``(iteration, x)`` every 10 iterations.
    """
    Minv = _jacobi(A) if precondition else np.ones(A.shape[0])
    target = tol * (1.0 + np.linalg.norm(b))
    x = x0.copy()
    r = b - A @ x
    it = 0
    while it < maxiter:
        if np.linalg.norm(r) <= target:
            r = b - A @ x
            if np.linalg.norm(r) <= target:
                break
        z = Minv * r
        p = z.copy()
        rz = r @ z
        restart = False
        while it < maxiter:
            Ap = A @ p
            pAp = p @ Ap
            if pAp <= 0:
                log.debug("cg: non-positive curvature at iteration %d", it)
                return x, it
            alpha = rz / pAp
            x += alpha * p
            r -= alpha * Ap
            it += 1
            if history is not None and it % 10 == 0:
                history.append((it, x.copy()))
            if np.linalg.norm(r) <= target:
                restart = True
                r = b - A @ x
                break
            z = Minv * r
            rz_new = r @ z
            p = z + (rz_new / rz) * p
            rz = rz_new
        if not restart:
            break
    return x, it


def _bicgstab(A, b, x0, tol, maxiter):
    """Right-preconditioned BiCGSTAB with Jacobi; raises :class:`BreakdownError` on zero denominators."""
    Minv = _jacobi(A)
    target = tol * (1.0 + np.linalg.norm(b))
    x = x0.copy()
    r = b - A @ x
    best, best_res = x.copy(), np.linalg.norm(r)
    if best_res <= target:
        return x, 0
    r_hat = r.copy()
    rho = alpha = omega = 1.0
    v = np.zeros_like(b)
    p = np.zeros_like(b)
    tiny = np.finfo(float).tiny
    for it in range(1, maxiter + 1):
        rho_new = r_hat @ r
        if abs(rho_new) < tiny or abs(omega) < tiny:
            raise BreakdownError(f"bicgstab breakdown (rho={rho_new:.3e}, omega={omega:.3e})", best, it)
        beta = (rho_new / rho) * (alpha / omega)
        rho = rho_new
        p = r + beta * (p - omega * v)
        phat = Minv * p
        v = A @ phat
        denom = r_hat @ v
        if abs(denom) < tiny:
            raise BreakdownError("bicgstab breakdown (r_hat . v = 0)", best, it)
        alpha = rho / denom
        s = r - alpha * v
        if np.linalg.norm(s) <= target:
            x = x + alpha * phat
            if np.linalg.norm(b - A @ x) <= target:
                return x, it
        shat = Minv * s
        t = A @ shat
        tt = t @ t
        if tt < tiny:
            raise BreakdownError("bicgstab breakdown (t . t = 0)", best, it)
        omega = (t @ s) / tt
        x = x + alpha * phat + omega * shat
        r = s - omega * t
        res = np.linalg.norm(r)
        if res < best_res:
            best, best_res = x.copy(), res
        if res <= target:
            true = np.linalg.norm(b - A @ x)
            if true <= target:
                return x, it
            r = b - A @ x
    return best, maxiter


def _direct(A, b):
    n = A.shape[0]
    if n > DIRECT_MAX_N:
        raise ValueError(f"dense LU is limited to n <= {DIRECT_MAX_N} (got {n})")
    lu = sla.lu_factor(A.toarray(), check_finite=True)
    return sla.lu_solve(lu, b)


def solve(system, method="auto", tolerance=DEFAULT_TOL, max_iterations=None, x0=None):
    """Solve an assembled system.

    Parameters
    ----------
    method : {'auto', 'cg', 'bicgstab', 'direct'}
        ``auto`` picks CG for symmetric systems and BiCGSTAB otherwise,
        falling back to dense LU on breakdown when ``n`` allows it.
    tolerance : float
        Relative target: converged when ``||b - A x|| <= tol * (1 + ||b||)``.
    max_iterations : int, optional
        Defaults to ``10 * n``.

    Returns
    -------
    SolveReport
        Non-convergence is reported, not raised; the best iterate is kept.

    Raises
    ------
    MethodMismatchError
        CG on a system not flagged symmetric.
    BreakdownError
        BiCGSTAB breakdown when ``method='bicgstab'`` was asked for explicitly.
    """
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    A, b, n = system.matrix, system.rhs, system.n
    if n == 0:
        return SolveReport(np.zeros(0), 0, 0.0, "direct", True, tolerance)
    maxit = 10 * n if max_iterations is None else int(max_iterations)
    x0 = np.zeros(n) if x0 is None else np.array(x0, dtype=float)

    if method == "auto":
        if system.symmetric_hint:
            method = "cg"
        else:
            try:
                rep = solve(system, "bicgstab", tolerance, maxit, x0)
            except BreakdownError as exc:
                log.info("bicgstab broke down (%s); falling back to dense LU", exc)
                rep = None
            if rep is not None and rep.converged:
                return rep
            if n <= DIRECT_MAX_N:
                return solve(system, "direct", tolerance)
            return rep if rep is not None else SolveReport(x0, 0, residual(system, x0), "bicgstab", False, tolerance)

    if method == "cg":
        if not system.symmetric_hint:
            raise MethodMismatchError("cg requires a symmetric system (symmetric_hint is False)")
        x, it = _cg(A, b, x0, tolerance, maxit)
    elif method == "bicgstab":
        x, it = _bicgstab(A, b, x0, tolerance, maxit)
    elif method == "direct":
        x, it = _direct(A, b), 1
    else:
        raise ValueError(f"unknown method {method!r}")
    res = residual(system, x)
    converged = bool(res <= tolerance * (1.0 + np.linalg.norm(b)))
    return SolveReport(x, it, res, method, converged, tolerance)


@dataclass
class Diagnosis:
    status: str  # 'ok' | 'constant-nullspace' | 'ill-conditioned'
    null_residual: float
    matrix_norm: float
    condition_estimate: float
    evidence: str = ""

    @property
    def ok(self):
        return self.status == "ok"


def condition_estimate(A):
    """1-norm condition number estimate ``||A||_1 ||A^{-1}||_1`` (inf if singular)."""
    A = sp.csc_matrix(A)
    norm = float(abs(A).sum(axis=0).max())
    try:
        lu = splu(A)
    except RuntimeError:
        return np.inf
    n = A.shape[0]
    inv = LinearOperator((n, n), matvec=lu.solve, rmatvec=lambda y: lu.solve(y, trans="T"), dtype=float)
    est = onenormest(inv) if n > 4 else np.abs(np.linalg.inv(A.toarray())).sum(axis=0).max()
    if not np.isfinite(est):
        return np.inf
    return norm * float(est)


def detect_singularity(system, domain=None, weight=None, cond_limit=1e12):
    """Classify a system as ok, singular with a constant nullspace, or ill-conditioned.

    The constant vector is tested first: ``||A 1|| < 1e-12 ||A||`` means the
    weight gives no anchoring anywhere. Otherwise a 1-norm condition estimate
    above ``cond_limit`` flags the system as ill-conditioned.
    """
    A = system.matrix
    n = system.n
    if n == 0:
        return Diagnosis("ok", 0.0, 0.0, 1.0, "empty system")
    norm = float(abs(A).sum(axis=0).max())
    ones = np.ones(n)
    null_res = float(np.linalg.norm(A @ ones) / np.sqrt(n))
    if null_res < 1e-12 * max(norm, np.finfo(float).tiny):
        ev = "A @ 1 = 0"
        if weight is not None and domain is not None:
            cu = weight.c.values.ravel()[domain.unknowns]
            if not np.any(cu > 0):
                ev += "; weight vanishes on every unknown"
        return Diagnosis("constant-nullspace", null_res, norm, np.inf, ev)
    cond = condition_estimate(A)
    if cond > cond_limit:
        return Diagnosis("ill-conditioned", null_res, norm, cond, f"condition estimate {cond:.3e} > {cond_limit:.0e}")
    return Diagnosis("ok", null_res, norm, cond)
