"""Independent reference computations used by the tests.

Nothing here imports the package's numerics: each oracle is a separate,
deliberately naive implementation (loops, dense linear algebra, 1D models).
"""

import numpy as np
import scipy.linalg as sla


def radial_capacity(rho, alpha, m=4000, R=1.0):
    """Capacity of the disk of radius ``rho`` in the disk of radius ``R``, from a 1D model.

    Minimises ``2 pi int_rho^R (u'^2 + alpha u^2) r dr`` with ``u(rho) = 1``,
    ``u(R) = 0`` by linear finite elements on a grid uniform in ``log r``
    (which resolves the ``log r`` profile well).
    """
    s = np.linspace(np.log(rho), np.log(R), m + 1)
    r = np.exp(s)
    hr = np.diff(r)
    rm = 0.5 * (r[:-1] + r[1:])
    # element stiffness (r u')^2 / r and lumped mass alpha r u^2
    k = rm / hr
    mass = np.zeros(m + 1)
    mass[:-1] += 0.5 * alpha * rm * hr
    mass[1:] += 0.5 * alpha * rm * hr
    main = np.zeros(m + 1)
    main[:-1] += k
    main[1:] += k
    main += mass
    off = -k
    # unknowns 1..m-1
    ab = np.zeros((3, m - 1))
    ab[0, 1:] = off[1:-1]
    ab[1] = main[1:-1]
    ab[2, :-1] = off[1:-1]
    b = np.zeros(m - 1)
    b[0] = -off[0] * 1.0
    inner = sla.solve_banded((1, 1), ab, b)
    u = np.concatenate([[1.0], inner, [0.0]])
    du = np.diff(u)
    energy = np.sum(k * du**2) + np.sum(mass * u**2)
    return 2 * np.pi * energy


def dense_largest_generalized(A, B):
    """Largest eigenvalue of ``A x = lam B x`` (B SPD) by a dense solver."""
    A = A.toarray() if hasattr(A, "toarray") else np.asarray(A)
    B = B.toarray() if hasattr(B, "toarray") else np.asarray(B)
    return float(sla.eigh(A, B, eigvals_only=True)[-1])


def dense_smallest_sym(A):
    A = A.toarray() if hasattr(A, "toarray") else np.asarray(A)
    return float(np.linalg.eigvalsh(0.5 * (A + A.T))[0])


def bisection_kappa_prime(c, gx, gy, lo=-2.0, hi=1.0, iters=80):
    """Largest ``t`` with ``M - t D`` positive semidefinite, by bisection on its smallest eigenvalue.

    ``M`` is the symmetric matrix of the pointwise form in ``(value, d/dx,
    d/dy)``, ``D`` its diagonal. Only meant for ``0 < c < 1``.
    """
    a = 1.0 - c
    M = np.array([[c, -gx / 2, -gy / 2], [-gx / 2, a, 0.0], [-gy / 2, 0.0, a]])
    D = np.diag([c, a, a])

    def ok(t):
        return np.linalg.eigvalsh(M - t * D)[0] >= -1e-15

    if not ok(lo):
        return lo
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def brute_classify(known):
    """Per-node kinds by explicit loops over the 4-neighbourhood."""
    ny, nx = known.shape
    out = np.empty(known.shape, dtype=object)
    for i in range(ny):
        for j in range(nx):
            if known[i, j]:
                nb = [(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)]
                touches = any(0 <= a < ny and 0 <= b < nx and not known[a, b] for a, b in nb)
                out[i, j] = "known-boundary" if touches else "known-interior"
            elif i in (0, ny - 1) or j in (0, nx - 1):
                out[i, j] = "outer-boundary"
            else:
                out[i, j] = "interior-unknown"
    return out


def loop_laplacian_dirichlet(known, f):
    """Dense 5-point Laplacian with mirrored Neumann frame, built by loops.

    Returns the solution of the hard-constraint problem on the full grid.
    """
    ny, nx = known.shape
    idx = -np.ones(known.shape, dtype=int)
    unk = [(i, j) for i in range(ny) for j in range(nx) if not known[i, j]]
    for k, (i, j) in enumerate(unk):
        idx[i, j] = k
    n = len(unk)
    A = np.zeros((n, n))
    b = np.zeros(n)
    for k, (i, j) in enumerate(unk):
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            a, c = i + di, j + dj
            if not (0 <= a < ny and 0 <= c < nx):
                continue
            # edge weight: half along the frame
            along = (i == a and i in (0, ny - 1)) or (j == c and j in (0, nx - 1))
            w = 0.5 if along else 1.0
            A[k, k] += w
            if known[a, c]:
                b[k] += w * f[a, c]
            else:
                A[k, idx[a, c]] -= w
    u = np.array(f, dtype=float)
    sol = np.linalg.solve(A, b)
    for k, (i, j) in enumerate(unk):
        u[i, j] = sol[k]
    return u
