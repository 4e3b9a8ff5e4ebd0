"""One-call reconstruction: assemble the chosen formulation and solve it."""

import numpy as np

from .discretization import assemble
from .grid import ScalarField, build_domain
from .solvers import DEFAULT_TOL, solve
from .weights import WeightField


def domain_from_weight(c, spacing=1.0):
    """Ω_K is where the weight equals 1."""
    vals = c.values if isinstance(c, ScalarField) else np.asarray(c, dtype=float)
    return build_domain(vals >= 1.0, spacing)


def inpaint(f, mask=None, weight=None, form=None, spacing=1.0, method="auto", tolerance=DEFAULT_TOL):
    """Reconstruct ``f`` from its values on the known set.

    Exactly one of ``mask`` (bool, True = known) or ``weight`` (values in
    [0, 1]) must be given. ``form`` defaults to ``'dirichlet'`` for a mask and
    ``'collocation'`` for a weight; a mask used with the weighted forms is
    turned into the binary weight.

    Returns
    -------
    u : ndarray
        Reconstructed image.
    report : SolveReport
    """
    fv = f.values if isinstance(f, ScalarField) else np.asarray(f, dtype=float)
    if (mask is None) == (weight is None):
        raise ValueError("give exactly one of mask or weight")
    if mask is not None:
        known = np.asarray(mask, dtype=bool)
        if known.shape != fv.shape:
            raise ValueError(f"mask shape {known.shape} does not match image {fv.shape}")
        form = form or "dirichlet"
        domain = build_domain(known, spacing)
        wf = None if form == "dirichlet" else WeightField.from_values(known.astype(float), spacing, domain)
    else:
        wv = weight.values if isinstance(weight, ScalarField) else np.asarray(weight, dtype=float)
        if wv.shape != fv.shape:
            raise ValueError(f"weight shape {wv.shape} does not match image {fv.shape}")
        form = form or "collocation"
        domain = domain_from_weight(wv, spacing)
        wf = WeightField.from_values(wv, spacing, domain)
    system = assemble(form, domain, fv, wf)
    report = solve(system, method=method, tolerance=tolerance)
    return system.to_field(report.solution), report
