"""Parity between the compiled kernels and the NumPy fallback."""

import numpy as np
import pytest

from toricdist import _core_py
from toricdist.backend import available_backends

compiled = pytest.importorskip("toricdist._core")


@pytest.fixture(scope="module")
def orbit_case(rng):
    D, m, G = 17, 3, 211
    points = rng.integers(0, 6, size=(D, m)).astype(np.float64)
    log_w = rng.normal(size=D)
    rho = rng.uniform(-6, 6, size=(G, m))
    return rho, points, log_w


def test_orbit_logk_parity(orbit_case):
    rho, points, log_w = orbit_case
    a = compiled.orbit_logk(rho, points, log_w)
    b = _core_py.orbit_logk(rho, points, log_w)
    assert a == pytest.approx(b, rel=1e-13, abs=1e-13)


def test_orbit_moments_parity(orbit_case):
    rho, points, log_w = orbit_case
    la, ma = compiled.orbit_moments(rho, points, log_w)
    lb, mb = _core_py.orbit_moments(rho, points, log_w)
    assert la == pytest.approx(lb, rel=1e-13)
    assert ma == pytest.approx(mb, rel=1e-12, abs=1e-13)


def test_orbit_hessian_parity(orbit_case):
    rho, points, log_w = orbit_case
    la, ma, ha = compiled.orbit_hessian(rho, points, log_w)
    lb, mb, hb = _core_py.orbit_hessian(rho, points, log_w)
    assert la == pytest.approx(lb, rel=1e-13)
    assert ha == pytest.approx(hb, rel=1e-11, abs=1e-12)


@pytest.fixture(scope="module")
def chart_case(rng):
    D, r, mr, G = 13, 2, 1, 97
    mu_exp = rng.integers(0, 4, size=(D, r))
    mu_exp[0] = 0                       # the chart always contains the origin
    nu_exp = rng.integers(0, 5, size=(D, mr)).astype(np.float64)
    log_a = rng.normal(size=D)
    t = rng.uniform(0, 2.5, size=(G, r))
    t[:7, 0] = 0.0                      # exercise the t = 0 plane
    t[3:5, 1] = 0.0
    rho = rng.uniform(-3, 3, size=(G, mr))
    return t, rho, log_a, mu_exp, nu_exp


def test_chart_logk_parity(chart_case):
    a = compiled.chart_logk(*chart_case)
    b = _core_py.chart_logk(*chart_case)
    assert a == pytest.approx(b, rel=1e-13)


def test_chart_density_parity(chart_case):
    la, ca = compiled.chart_density(*chart_case)
    lb, cb = _core_py.chart_density(*chart_case)
    assert la == pytest.approx(lb, rel=1e-13)
    assert ca == pytest.approx(cb, rel=1e-10, abs=1e-12)
    # determinants (the actual density) agree too
    assert np.linalg.det(ca) == pytest.approx(np.linalg.det(cb),
                                              rel=1e-9, abs=1e-12)


def test_available_backends_lists_both():
    assert set(available_backends()) == {"compiled", "python"}
