"""Estimator front-end in the scikit-learn style.

``fit`` takes the weight (or mask) and assembles nothing yet; ``transform``
reconstructs images against the fitted known set.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .grid import ScalarField, build_domain
from .inpainting import domain_from_weight
from .discretization import assemble
from .solvers import DEFAULT_TOL, solve
from .weights import WeightField, check_admissibility

_FORMS = ("weak", "collocation", "dirichlet")
_METHODS = ("auto", "cg", "bicgstab", "direct")


def check_field(x, name="field", ndim=2, min_size=3):
    """Return ``x`` as a finite float array of shape ``(H, W)`` with ``H, W >= min_size``."""
    arr = x.values if isinstance(x, ScalarField) else np.asarray(x, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    if min(arr.shape) < min_size:
        raise ValueError(f"{name} must be at least {min_size}x{min_size}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return np.array(arr, dtype=float)


def check_weight(c, name="weight"):
    arr = check_field(c, name)
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError(f"{name} must take values in [0, 1]; got [{arr.min():g}, {arr.max():g}]")
    return arr


def check_same_shape(a, b, names=("image", "weight")):
    if a.shape != b.shape:
        raise ValueError(f"{names[0]} shape {a.shape} does not match {names[1]} shape {b.shape}")


class WeightedLaplaceInpainter(TransformerMixin, BaseEstimator):
    """Reconstruct images from a weight field ``c``.

    Parameters
    ----------
    form : {'collocation', 'weak', 'dirichlet'}
        Discretisation. ``dirichlet`` uses only the known set ``c == 1``.
    spacing : float
        Grid spacing ``h``.
    method : {'auto', 'cg', 'bicgstab', 'direct'}
    tol : float
        Relative residual target of the linear solve.

    Attributes
    ----------
    weight_ : WeightField
    domain_ : DomainSpec
    n_unknowns_ : int
    reports_ : list of SolveReport
        One per image passed to the last :meth:`transform` call.
    """

    def __init__(self, form="collocation", spacing=1.0, method="auto", tol=DEFAULT_TOL):
        self.form = form
        self.spacing = spacing
        self.method = method
        self.tol = tol

    def _validate_params(self):
        if self.form not in _FORMS:
            raise ValueError(f"form must be one of {_FORMS}, got {self.form!r}")
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}, got {self.method!r}")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    def fit(self, c, y=None):
        """Fix the weight. A boolean array is read as a mask (True = known)."""
        self._validate_params()
        c = check_weight(c)
        self.domain_ = domain_from_weight(c, self.spacing)
        self.weight_ = WeightField.from_values(c, self.spacing, self.domain_)
        self.n_unknowns_ = self.domain_.n_unknowns
        return self

    def _one(self, img):
        check_same_shape(img, self.weight_.c.values)
        wf = None if self.form == "dirichlet" else self.weight_
        system = assemble(self.form, self.domain_, img, wf)
        rep = solve(system, method=self.method, tolerance=self.tol)
        return system.to_field(rep.solution), rep

    def transform(self, X):
        """Inpaint one image ``(H, W)`` or a stack ``(N, H, W)``."""
        check_is_fitted(self, "weight_")
        arr = X.values if isinstance(X, ScalarField) else np.asarray(X, dtype=float)
        stack = arr.ndim == 3
        imgs = arr if stack else arr[None]
        out, self.reports_ = [], []
        for k, img in enumerate(imgs):
            u, rep = self._one(check_field(img, f"image[{k}]" if stack else "image"))
            out.append(u)
            self.reports_.append(rep)
        return np.stack(out) if stack else out[0]

    def fit_transform(self, X, y=None, weight=None):
        """Shorthand for ``fit(weight).transform(X)``."""
        if weight is None:
            raise ValueError("fit_transform needs the weight: fit_transform(image, weight=c)")
        return self.fit(weight).transform(X)


class MaskInpainter(WeightedLaplaceInpainter):
    """Homogeneous diffusion from a binary mask (hard Dirichlet data)."""

    def __init__(self, spacing=1.0, method="auto", tol=DEFAULT_TOL):
        super().__init__(form="dirichlet", spacing=spacing, method=method, tol=tol)

    def fit(self, mask, y=None):
        m = np.asarray(mask)
        if m.dtype != bool:
            m = m > 0
        self._validate_params()
        self.domain_ = build_domain(m, self.spacing)
        self.weight_ = WeightField.from_values(m.astype(float), self.spacing, self.domain_)
        self.n_unknowns_ = self.domain_.n_unknowns
        return self


class AdmissibilityChecker(BaseEstimator):
    """Run the admissibility checks on a weight.

    ``fit(c)`` stores :class:`AdmissibilityReport` in ``report_``;
    ``score(c)`` returns 1.0 when every check passes, else 0.0.
    """

    def __init__(self, spacing=1.0, levels=4):
        self.spacing = spacing
        self.levels = levels

    def fit(self, c, y=None):
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        if int(self.levels) < 1:
            raise ValueError("levels must be positive")
        c = check_weight(c)
        domain = domain_from_weight(c, self.spacing)
        self.weight_ = WeightField.from_values(c, self.spacing, domain)
        self.report_ = check_admissibility(self.weight_, domain, int(self.levels))
        self.passed_ = bool(self.report_.passed)
        return self

    def score(self, c, y=None):
        return 1.0 if self.fit(c).passed_ else 0.0
