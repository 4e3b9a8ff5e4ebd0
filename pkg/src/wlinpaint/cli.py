"""Command-line interface.

Every command prints ``key=value`` lines. Exit status: 0 on success, 1 when
a check fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import analysis
from .exceptions import DomainError, FieldFormatError, NoDirichletDataError
from .inpainting import domain_from_weight, inpaint
from .io import read_field, write_field
from .solvers import DEFAULT_TOL
from .weights import WeightField, check_admissibility

COMMANDS = ("inpaint", "check", "constants", "capacity", "annulus", "sparsify")
log = logging.getLogger("wlinpaint")


class UsageError(Exception):
    def __init__(self, flag, message):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


@dataclass
class RunConfig:
    command: str
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    tolerance: float = DEFAULT_TOL
    spacing: float = 1.0
    form: str | None = None
    method: str = "auto"
    resolution: int | None = None
    resolutions: tuple = ()
    epsilon: float | None = None
    alpha: float | None = None
    geometry: str = "square"
    boundary: str = "staircase"
    density: float | None = None
    seed: int = 0
    trials: int = 50
    levels: int = 4
    maxval: int = 255

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError("command", f"unknown command {self.command!r}")
        for flag, path in self.inputs.items():
            if path is not None and not (path.startswith("disk:") or path == "pixel") and not os.path.isfile(path):
                raise UsageError(f"--{flag}", f"no such file: {path}")
        for flag, path in self.outputs.items():
            parent = os.path.dirname(os.path.abspath(path))
            if not os.path.isdir(parent):
                raise UsageError(f"--{flag}", f"directory does not exist: {parent}")
        if not self.tolerance > 0:
            raise UsageError("--tolerance", "must be positive")
        if not self.spacing > 0:
            raise UsageError("--spacing", "must be positive")
        return self


def _read(flag, path, spacing=1.0):
    try:
        return read_field(path, spacing)
    except (FieldFormatError, ValueError) as exc:
        raise UsageError(f"--{flag}", str(exc)) from exc


def _fmt(key, value):
    if isinstance(value, bool):
        value = str(value).lower()
    elif isinstance(value, float):
        value = f"{value:.10g}"
    return f"{key}={value}"


def _weight_and_domain(cfg, flag="weight"):
    c = _read(flag, cfg.inputs[flag], cfg.spacing).values
    if c.min() < 0 or c.max() > 1:
        raise UsageError(f"--{flag}", f"values must lie in [0, 1], got [{c.min():g}, {c.max():g}]")
    try:
        domain = domain_from_weight(c, cfg.spacing)
    except DomainError as exc:
        raise UsageError(f"--{flag}", str(exc)) from exc
    return WeightField.from_values(c, cfg.spacing, domain), domain


def cmd_inpaint(cfg):
    image = _read("image", cfg.inputs["image"], cfg.spacing).values
    kw = {}
    if cfg.inputs.get("mask"):
        m = _read("mask", cfg.inputs["mask"]).values
        kw["mask"] = m > 0
        src = "mask"
    else:
        kw["weight"] = _read("weight", cfg.inputs["weight"]).values
        src = "weight"
    if kw[src].shape != image.shape:
        raise UsageError(f"--{src}", f"shape {kw[src].shape} does not match image {image.shape}")
    try:
        u, rep = inpaint(image, form=cfg.form, spacing=cfg.spacing, method=cfg.method, tolerance=cfg.tolerance, **kw)
    except (DomainError, NoDirichletDataError) as exc:
        raise UsageError(f"--{src}", str(exc)) from exc
    write_field(u, cfg.outputs["out"], cfg.maxval)
    lines = [
        _fmt("form", cfg.form or ("dirichlet" if src == "mask" else "collocation")),
        _fmt("method", rep.method),
        _fmt("iterations", rep.iterations),
        f"residual={rep.final_residual:.3e}",
        _fmt("converged", rep.converged),
        _fmt("out", cfg.outputs["out"]),
    ]
    return (0 if rep.converged else 1), lines


def cmd_check(cfg):
    weight, domain = _weight_and_domain(cfg)
    try:
        report = check_admissibility(weight, domain, cfg.levels)
    except ValueError as exc:
        raise UsageError("--levels", str(exc)) from exc
    return (0 if report.passed else 1), report.lines()


def cmd_constants(cfg):
    weight, domain = _weight_and_domain(cfg)
    f = _read("image", cfg.inputs["image"], cfg.spacing) if cfg.inputs.get("image") else None
    if f is not None and f.shape != weight.shape:
        raise UsageError("--image", f"shape {f.shape} does not match weight {weight.shape}")
    est = analysis.constant_estimates(domain, weight, f)
    ok = np.isfinite(est.stability_factor)
    return (0 if ok else 1), est.lines()


def _region(cfg):
    spec = cfg.inputs["region"]
    if spec.startswith("disk:") or spec == "pixel":
        n = cfg.resolution
        if n is None:
            raise UsageError("--resolution", "required with a built-in region")
        X, Y, h, outside = analysis.capacity_grid(n, cfg.geometry)
        if spec == "pixel":
            E = np.zeros((n, n), dtype=bool)
            E[n // 2, n // 2] = True
            return E, n
        try:
            rho = float(spec[5:])
        except ValueError:
            raise UsageError("--region", f"bad radius in {spec!r}") from None
        cx, cy = (X.max() + X.min()) / 2, (Y.max() + Y.min()) / 2
        return np.hypot(X - cx, Y - cy) <= rho + 1e-12, n
    E = _read("region", spec).values > 0
    if E.shape[0] != E.shape[1]:
        raise UsageError("--region", f"region must be square, got {E.shape}")
    if cfg.resolution is not None and cfg.resolution != E.shape[0]:
        raise UsageError("--resolution", f"{cfg.resolution} does not match region size {E.shape[0]}")
    return E, E.shape[0]


def cmd_capacity(cfg):
    if cfg.alpha is None or not cfg.alpha > 0:
        raise UsageError("--alpha", "a positive value is required")
    E, n = _region(cfg)
    try:
        res = analysis.alpha_capacity(n, E, cfg.alpha, cfg.geometry, tolerance=min(cfg.tolerance, 1e-10))
    except ValueError as exc:
        raise UsageError("--region", str(exc)) from exc
    u = res.minimizer.values
    lines = [
        _fmt("resolution", res.resolution),
        _fmt("geometry", cfg.geometry),
        _fmt("alpha", res.alpha),
        _fmt("capacity", res.value),
        _fmt("minimizer_min", float(u.min())),
        _fmt("minimizer_max", float(u.max())),
    ]
    if cfg.outputs.get("out"):
        write_field(res.minimizer, cfg.outputs["out"], cfg.maxval)
        lines.append(_fmt("out", cfg.outputs["out"]))
    return 0, lines


def cmd_annulus(cfg):
    if cfg.epsilon is None or not 0 < cfg.epsilon < 1:
        raise UsageError("--epsilon", "must lie in (0, 1)")
    if not cfg.resolutions:
        raise UsageError("--resolutions", "give a comma-separated list such as 65,129")
    try:
        table = analysis.annulus_convergence(cfg.epsilon, cfg.resolutions, cfg.boundary)
    except ValueError as exc:
        raise UsageError("--resolutions", str(exc)) from exc
    lines = table.lines()
    if cfg.epsilon > 0.5:
        lines.insert(2, "exact_r0.5=outside")
    return 0, lines


def cmd_sparsify(cfg):
    image = _read("image", cfg.inputs["image"], cfg.spacing).values
    if cfg.density is None or not 0 < cfg.density <= 1:
        raise UsageError("--density", "must lie in (0, 1]")
    if cfg.trials < 0:
        raise UsageError("--trials", "must be non-negative")
    try:
        res = analysis.optimize_mask(image, cfg.density, cfg.seed, cfg.trials)
    except (ValueError, DomainError) as exc:
        raise UsageError("--density", str(exc)) from exc
    lines = [
        _fmt("density", cfg.density),
        _fmt("seed", cfg.seed),
        _fmt("trials", res.trials),
        _fmt("kept", int(res.mask.sum())),
        _fmt("initial_mse", res.initial_mse),
        _fmt("mse", res.mse),
        _fmt("accepted", res.accepted),
    ]
    if cfg.outputs.get("out"):
        write_field(res.mask.astype(float), cfg.outputs["out"], cfg.maxval)
        lines.append(_fmt("out", cfg.outputs["out"]))
    return 0, lines


_DISPATCH = {
    "inpaint": cmd_inpaint,
    "check": cmd_check,
    "constants": cmd_constants,
    "capacity": cmd_capacity,
    "annulus": cmd_annulus,
    "sparsify": cmd_sparsify,
}


def run(config):
    """Execute a validated :class:`RunConfig`; returns ``(status, lines)``."""
    try:
        config.validate()
        return _DISPATCH[config.command](config)
    except UsageError as exc:
        return 2, [f"error={exc}"]


def _int_list(text):
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser():
    p = argparse.ArgumentParser(prog="wlinpaint", description=__doc__.splitlines()[0])
    p.add_argument("--verbose", "-v", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--tolerance", type=float, default=DEFAULT_TOL)
        sp.add_argument("--spacing", type=float, default=1.0, help="grid spacing h")

    s = sub.add_parser("inpaint", help="reconstruct an image from a mask or weight")
    s.add_argument("--image", required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--mask", help="PGM/CSV; sample > 0 marks a known pixel")
    g.add_argument("--weight", help="PGM/CSV with values in [0, 1]")
    s.add_argument("--out", required=True)
    s.add_argument("--form", choices=("weak", "collocation", "dirichlet"))
    s.add_argument("--method", choices=("auto", "cg", "bicgstab", "direct"), default="auto")
    s.add_argument("--maxval", type=int, choices=(255, 65535), default=255)
    common(s)

    s = sub.add_parser("check", help="admissibility checks on a weight")
    s.add_argument("--weight", required=True)
    s.add_argument("--levels", type=int, default=4)
    common(s)

    s = sub.add_parser("constants", help="continuity, coercivity and Friedrichs constants")
    s.add_argument("--weight", required=True)
    s.add_argument("--image", help="data f, enables f_norm_bound")
    common(s)

    s = sub.add_parser("capacity", help="discrete alpha-capacity of a region")
    s.add_argument("--region", required=True, help="PGM/CSV (sample > 0 is E), 'disk:RHO' or 'pixel'")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--resolution", type=int)
    s.add_argument("--geometry", choices=("square", "disk"), default="square")
    s.add_argument("--out")
    s.add_argument("--maxval", type=int, choices=(255, 65535), default=255)
    common(s)

    s = sub.add_parser("annulus", help="annulus convergence table")
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--resolutions", type=_int_list, required=True)
    s.add_argument("--boundary", choices=("staircase", "exact"), default="staircase")
    common(s)

    s = sub.add_parser("sparsify", help="random-swap mask optimisation")
    s.add_argument("--image", required=True)
    s.add_argument("--density", type=float, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=int, default=50)
    s.add_argument("--out")
    s.add_argument("--maxval", type=int, choices=(255, 65535), default=255)
    common(s)
    return p


def config_from_args(ns):
    d = vars(ns)
    in_keys = ("image", "mask", "weight", "region")
    return RunConfig(
        command=ns.command,
        inputs={k: d[k] for k in in_keys if d.get(k) is not None},
        outputs={"out": d["out"]} if d.get("out") else {},
        tolerance=d.get("tolerance", DEFAULT_TOL),
        spacing=d.get("spacing", 1.0),
        form=d.get("form"),
        method=d.get("method", "auto"),
        resolution=d.get("resolution"),
        resolutions=d.get("resolutions") or (),
        epsilon=d.get("epsilon"),
        alpha=d.get("alpha"),
        geometry=d.get("geometry", "square"),
        boundary=d.get("boundary", "staircase"),
        density=d.get("density"),
        seed=d.get("seed", 0),
        trials=d.get("trials", 50),
        levels=d.get("levels", 4),
        maxval=d.get("maxval", 255),
    )


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    status, lines = run(config_from_args(ns))
    stream = sys.stderr if status == 2 else sys.stdout
    for line in lines:
        print(line, file=stream)
    return status


if __name__ == "__main__":
    sys.exit(main())
