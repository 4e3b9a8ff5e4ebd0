import subprocess
import sys

import numpy as np
import pytest

from wlinpaint.analysis import synthetic_image
from wlinpaint.cli import RunConfig, main, run
from wlinpaint.io import read_field, write_field


def lines_of(capsys):
    out = capsys.readouterr()
    return out.out.splitlines(), out.err.splitlines()


def as_dict(lines):
    return dict(line.split("=", 1) for line in lines)


def test_check_constant_weight(tmp_path, capsys):
    p = tmp_path / "c.csv"
    write_field(np.full((17, 17), 0.5), p)
    assert main(["check", "--weight", str(p), "--levels", "2"]) == 0
    out = as_dict(lines_of(capsys)[0])
    assert float(out["kappa_min"]) == 0 and float(out["kappa_prime_max"]) == pytest.approx(1.0)
    assert out["passed"] == "true"


def test_check_failing_weight_exit_one(tmp_path, capsys):
    n = 17
    c = np.tile(np.linspace(0, 0.95, n), (n, 1))
    p = tmp_path / "ramp.csv"
    write_field(c, p)
    assert main(["check", "--weight", str(p), "--levels", "1"]) == 1
    assert as_dict(lines_of(capsys)[0])["passed"] == "false"


def test_annulus_table(capsys):
    assert main(["annulus", "--epsilon", "0.1", "--resolutions", "65,129"]) == 0
    out = lines_of(capsys)[0]
    d = as_dict(out)
    assert d["epsilon"] == "0.1" and d["exact_r0.5"] == "0.30103"
    assert "ratio_65_129" in d


def test_annulus_outside_marker(capsys):
    assert main(["annulus", "--epsilon", "0.6", "--resolutions", "33"]) == 0
    assert as_dict(lines_of(capsys)[0])["exact_r0.5"] == "outside"


def test_inpaint_binary_weight_matches_dirichlet(tmp_path, capsys):
    n = 32
    rng = np.random.default_rng(0)
    mask = np.zeros((n, n))
    mask[1:-1, 1:-1] = rng.random((n - 2, n - 2)) < 0.1
    img = rng.random((n, n))
    for name, arr in (("m.csv", mask), ("f.csv", img)):
        write_field(arr, tmp_path / name)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["inpaint", "--image", str(tmp_path / "f.csv"), "--weight", str(tmp_path / "m.csv"), "--out", str(a)]) == 0
    assert main(["inpaint", "--image", str(tmp_path / "f.csv"), "--mask", str(tmp_path / "m.csv"),
                 "--form", "dirichlet", "--out", str(b)]) == 0
    assert np.abs(read_field(a).values - read_field(b).values).max() < 1e-8
    assert as_dict(lines_of(capsys)[0][:6])["converged"] == "true"


def test_missing_file_names_flag(tmp_path, capsys):
    code = main(["check", "--weight", str(tmp_path / "nope.csv")])
    out, err = lines_of(capsys)
    assert code == 2 and out == []
    assert err[0].startswith("error=--weight")


def test_missing_output_dir(tmp_path, capsys):
    write_field(np.zeros((5, 5)), tmp_path / "f.csv")
    code = main(["inpaint", "--image", str(tmp_path / "f.csv"), "--mask", str(tmp_path / "f.csv"),
                 "--out", str(tmp_path / "no" / "u.csv")])
    assert code == 2 and "--out" in lines_of(capsys)[1][0]


def test_inpaint_without_data_is_usage_error(tmp_path, capsys):
    write_field(np.zeros((6, 6)), tmp_path / "z.csv")
    code = main(["inpaint", "--image", str(tmp_path / "z.csv"), "--mask", str(tmp_path / "z.csv"),
                 "--out", str(tmp_path / "u.csv")])
    assert code == 2 and lines_of(capsys)[1][0].startswith("error=--mask")


def test_constants_with_and_without_data(tmp_path, capsys):
    n = 17
    c = np.full((n, n), 0.4)
    c[7:10, 7:10] = 1.0
    write_field(c, tmp_path / "c.csv")
    write_field(np.full((n, n), 0.3), tmp_path / "f.csv")
    assert main(["constants", "--weight", str(tmp_path / "c.csv"), "--image", str(tmp_path / "f.csv")]) == 0
    d = as_dict(lines_of(capsys)[0])
    assert np.isfinite(float(d["kappa0"])) and np.isfinite(float(d["f_norm_bound"]))
    write_field(np.full((n, n), 0.4), tmp_path / "free.csv")
    assert main(["constants", "--weight", str(tmp_path / "free.csv")]) == 1


def test_capacity_builtin_regions(tmp_path, capsys):
    out = tmp_path / "u.pgm"
    assert main(["capacity", "--region", "disk:0.2", "--alpha", "1", "--resolution", "33", "--out", str(out)]) == 0
    d = as_dict(lines_of(capsys)[0])
    assert float(d["capacity"]) > 0 and out.exists()
    assert main(["capacity", "--region", "pixel", "--alpha", "1"]) == 2
    assert "--resolution" in lines_of(capsys)[1][0]


def test_sparsify_deterministic(tmp_path, capsys):
    write_field(synthetic_image(32), tmp_path / "img.csv")
    args = ["sparsify", "--image", str(tmp_path / "img.csv"), "--density", "0.1", "--seed", "5", "--trials", "20"]
    assert main(args + ["--out", str(tmp_path / "m1.pgm")]) == 0
    first = lines_of(capsys)[0]
    assert main(args + ["--out", str(tmp_path / "m2.pgm")]) == 0
    second = lines_of(capsys)[0]
    assert first[:-1] == second[:-1]
    assert (tmp_path / "m1.pgm").read_bytes() == (tmp_path / "m2.pgm").read_bytes()
    d = as_dict(first)
    assert float(d["mse"]) <= float(d["initial_mse"])


def test_run_reports_bad_tolerance(tmp_path):
    write_field(np.zeros((5, 5)), tmp_path / "c.csv")
    cfg = RunConfig(command="check", inputs={"weight": str(tmp_path / "c.csv")}, tolerance=-1.0)
    status, lines = run(cfg)
    assert status == 2 and lines[0].startswith("error=--tolerance")


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "wlinpaint", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for cmd in ("inpaint", "check", "constants", "capacity", "annulus", "sparsify"):
        assert cmd in res.stdout
