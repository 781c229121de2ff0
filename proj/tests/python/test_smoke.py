import json
import math
import os
import subprocess

import numpy as np
import pytest

import ltlab


def gaussian(box, sigma=1.0):
    x = np.asarray(box.coords(0))
    return ltlab.GridFunction(box, np.exp(-x**2 / (2 * sigma**2)).astype(complex))


def test_constants():
    assert ltlab.hardy_constant(1.0, 3) == pytest.approx(0.25, abs=1e-12)
    assert ltlab.hardy_constant(0.5, 3) == pytest.approx(2 / math.pi, abs=1e-12)
    assert ltlab.gn_reference_1d() == pytest.approx(math.pi**2 / 4, rel=1e-12)


def test_plane_wave_roundtrip():
    box = ltlab.BoxSpec.centered(1, 2 * math.pi, 32)
    x = np.asarray(box.coords(0))
    u = ltlab.GridFunction(box, np.exp(3j * x))
    v = ltlab.frac_laplacian_apply(u, 0.5)
    np.testing.assert_allclose(v.values, 3.0 * u.values, atol=1e-10)
    assert ltlab.seminorm_global(u, 1.0) == pytest.approx(9.0 * u.norm2(), rel=1e-10)


def test_gaussian_quotient_and_minimizer():
    box = ltlab.BoxSpec.centered(1, 40.0, 512)
    u = gaussian(box)
    assert ltlab.gn_quotient(u, 1.0) >= ltlab.gn_reference_1d() * (1 - 1e-3)
    r = ltlab.minimize_gn(1.0, 1, box, restarts=1)
    assert r["value"] == pytest.approx(math.pi**2 / 4, rel=1e-3)
    assert r["minimizer"].shape == (512,)


def test_certificate_arithmetic():
    gn = ltlab.gn_reference_1d()
    assert ltlab.certificate_factor(0.1, 1.0, 1, 2.0, gn) == pytest.approx(0.81 / 1.21 * gn, rel=1e-14)
    c = ltlab.exclusion_conversion_constant(0.1, 2, 1.0, 1)
    assert ltlab.lambda_threshold(0.1, 2, 1.0, 1, 1.5, 0.0) == pytest.approx(c * 0.15)


def test_errors_map_to_python_exceptions():
    with pytest.raises(ltlab.ConfigError):
        ltlab.BoxSpec.centered(1, 1.0, 3)
    with pytest.raises(ValueError):
        ltlab.hardy_constant(2.0, 3)


def test_run_cli_in_process(tmp_path):
    code, out, err = ltlab.run_cli(["constants", "--out-dir", str(tmp_path)])
    assert code == 0, err
    report = json.loads((tmp_path / "constants.report.json").read_text())
    assert report["command"] == "constants"
    code, _, err = ltlab.run_cli(["gn", "--s", "-1"])
    assert code == 2
    assert err.startswith("error code=2 kind=config")


@pytest.mark.skipif("LTLAB_CLI" not in os.environ, reason="CLI binary path not provided")
def test_cli_binary(tmp_path):
    exe = os.environ["LTLAB_CLI"]
    res = subprocess.run([exe, "gn", "--s", "1", "--d", "1", "--points", "512", "--box", "40", "--restarts", "1",
                          "--out-dir", str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    value = json.loads((tmp_path / "gn.report.json").read_text())["result"]["value"]
    assert value == pytest.approx(math.pi**2 / 4, rel=1e-2)
