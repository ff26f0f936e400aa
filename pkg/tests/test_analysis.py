import numpy as np
import pytest

from floqres.analysis import (DiffusionFit, GapScan, diffusion_fit,
                              diffusion_point, fit_arrhenius, fit_power_law,
                              heisenberg_check, k_scan,
                              prethermalization_time, tau_scan)
from floqres.models import ModelSpec


def _synthetic_scan(parameter, values, gaps):
    lam = (1.0 - np.asarray(gaps, float)).astype(complex)
    return GapScan(parameter, np.asarray(values, float), lam, r=4)


def test_prethermalization_time():
    assert prethermalization_time(1e-4) == 1e4
    with pytest.raises(ValueError):
        prethermalization_time(0.0)


def test_heisenberg_check_verdicts():
    assert heisenberg_check(10.0, 20)["verdict"] == "TDL-valid"
    assert heisenberg_check(2.0 ** 30, 10)["verdict"] == \
        "finite-size-dominated"
    assert heisenberg_check(100.0, 10)["verdict"] == "marginal"
    assert heisenberg_check(8.0, 3)["t_heisenberg"] == 8.0
    with pytest.raises(ValueError):
        heisenberg_check(-1.0, 10)


def test_fit_arrhenius_recovers_slope():
    # T = c * exp(a / tau) with known a
    a, c = 30.0, 1e-8
    taus = np.linspace(0.9, 1.3, 9)
    gaps = 1.0 / (c * np.exp(a / taus))
    scan = _synthetic_scan("tau", taus, gaps)
    fit = fit_arrhenius(scan)
    assert abs(fit["a"] - a) < 1e-8
    assert abs(fit["ln_prefactor"] - np.log(c)) < 1e-7
    assert fit["r_squared"] > 1 - 1e-12


def test_fit_arrhenius_rejects_narrow_span():
    taus = np.linspace(0.9, 1.3, 5)
    scan = _synthetic_scan("tau", taus, 1e-4 * np.ones(5))
    with pytest.raises(ValueError):
        fit_arrhenius(scan)


def test_fit_power_law_recovers_exponent():
    x = np.geomspace(0.05, 0.5, 12)
    T = 7.3 * x ** (-2.0)
    fit = fit_power_law(x, T)
    assert abs(fit["exponent"] - 2.0) < 1e-10
    assert fit["r_squared"] > 1 - 1e-12


def test_diffusion_fit_quadratic_synthetic():
    # Delta(k) = Delta0 + D k^2 above the onset
    D, gap0, tau = 1.45, 1e-6, 0.05
    ks = np.concatenate([[0.0], np.linspace(0.005, 0.3, 30)])
    gaps = gap0 + D * ks ** 2
    scan = _synthetic_scan("k", ks, gaps)
    fit = diffusion_fit(scan, tau)
    assert abs(fit.D_step - D) < 1e-9
    assert abs(fit.D_physical - D / tau) < 1e-8
    assert fit.r_squared > 1 - 1e-12
    assert fit.k_window[0] == pytest.approx(3.0 * np.sqrt(gap0))


def test_diffusion_fit_window_too_narrow():
    ks = np.array([0.0, 0.01, 0.02])
    scan = _synthetic_scan("k", ks, 0.25 + 0.0 * ks)  # onset above grid
    with pytest.raises(ValueError):
        diffusion_fit(scan, 0.05)


def test_gap_scan_rows_schema():
    scan = _synthetic_scan("tau", [0.5, 1.0], [1e-3, 1e-2])
    rows = list(scan.rows())
    assert rows[0] == (0.5, 1.0 - 1e-3, 0.0, pytest.approx(1e-3),
                       pytest.approx(1e3))
    assert len(rows[0]) == 5


def test_tau_scan_matches_direct_gap():
    spec = ModelSpec(model="kicked_ising_1d", tau=1.0)
    scan = tau_scan(spec, [0.8, 2.9], r=4, tol=1e-11)
    assert scan.parameter == "tau"
    assert scan.gaps.shape == (2,)
    assert np.all(scan.gaps > 0)
    assert np.all(scan.gaps < 1)


def test_k_scan_gap_grows_with_k():
    spec = ModelSpec(model="kicked_ising_1d", tau=2.9)
    scan = k_scan(spec, [0.0, 0.4, 1.2], r=4, tol=1e-11)
    gaps = scan.gaps
    assert gaps[0] < gaps[1] < gaps[2]


def test_diffusion_point_mode():
    spec = ModelSpec(model="kicked_ising_1d", tau=2.9)
    fit = diffusion_point(spec, 0.1, r=4, tol=1e-11)
    assert isinstance(fit, DiffusionFit)
    assert fit.mode == "point"
    assert fit.D_step > 0
    assert fit.D_physical == pytest.approx(fit.D_step / spec.tau)
