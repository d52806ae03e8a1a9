import math

import numpy as np
import pytest

import homoglab


def test_kernel_mass_and_value():
    assert abs(homoglab.kernel_mass("QuarticBump", 0.25) - 1.0) < 1e-4
    assert homoglab.kernel_value("UniformBall", 0.3, 0.1) == pytest.approx(1 / (math.pi * 0.09))
    with pytest.raises(homoglab.InvalidSpec):
        homoglab.kernel_value("Cauchy", 1.0, 0.0)


def test_partition_mask():
    p = homoglab.partition("LocalInHoles", 4, 8)
    assert p["in_a"].shape == (16, 16)
    assert p["in_a"].sum() == p["n_a"]
    assert p["x_fraction"] == pytest.approx(p["n_a"] / 256)
    s = homoglab.partition("Strips", 3, 16)
    assert s["x_fraction"] == 0.5


def test_solve_constraint_and_regions():
    r = homoglab.solve("NonlocalInHoles", 2, 8)
    u, v, mask = r["u"], r["v"], r["in_a"].astype(bool)
    assert np.isnan(u[~mask]).all() and np.isfinite(u[mask]).all()
    assert np.isnan(v[mask]).all() and np.isfinite(v[~mask]).all()
    h2 = 1.0 / u.size
    assert abs((np.nansum(u) + np.nansum(v)) * h2) < 1e-12
    assert r["energy"] < 0


def test_zero_source_gives_zero():
    r = homoglab.solve("LocalInHoles", 2, 8, source="zero")
    assert np.nanmax(np.abs(r["u"])) == 0.0


def test_cell_tensor():
    plain = homoglab.cell_tensor(None, 16)
    assert np.allclose(plain["q"], np.eye(2), atol=1e-10)
    disk = homoglab.cell_tensor(0.5, 32)
    q = disk["q"]
    assert abs(q[0, 0] - q[1, 1]) < 1e-8 and abs(q[0, 1]) < 1e-8
    assert disk["defect"] < 1e-6


def test_limit_and_spectral():
    lim = homoglab.solve_limit("Strips", 0.5, 32)
    assert lim["u"].shape == (32, 32)
    assert max(lim["residual_u"], lim["residual_v"]) < 1e-8
    lim = homoglab.solve_limit("NonlocalInHoles", 0.8, 16, tensor=np.diag([0.7, 0.7]))
    assert abs(lim["constraint"]) < 1e-12
    assert homoglab.lambda_min("LocalInHoles", 2) > 0
    assert homoglab.poincare_constant(2) > 0


def test_run_experiment_and_config_errors():
    out = homoglab.run_experiment({"scenario": "CellOnly", "hole": "none", "cell_grid": 16})
    assert out["all_pass"]
    assert out["tensor"]["q"][0][0] == pytest.approx(1.0)
    with pytest.raises(homoglab.ConfigError, match="n-list not increasing"):
        homoglab.run_experiment({"scenario": "Strips", "hole": "none", "n_list": [4, 2]})
