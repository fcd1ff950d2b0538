import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import toricdist as td
from toricdist import projective as pj
from toricdist.errors import MarginTooSmall, PointNotInterior

LOG3 = math.log(3.0)


def test_character_segment(segment, segment_w):
    assert td.character_k(segment, segment_w, [0.0]) == pytest.approx(math.log(2))
    assert td.character_k(segment, segment_w, [LOG3]) == pytest.approx(math.log(4))


def test_character_binomial_closed_form():
    # multinomial weights collapse the character to p*log(1 + sum e^rho)
    for p, m in ((2, 1), (3, 2), (7, 2)):
        P, w = pj.simplex_setup(p, m)
        rng = np.random.default_rng(7)
        for rho in rng.uniform(-3, 3, size=(8, m)):
            want = p * math.log1p(np.exp(rho).sum())
            assert td.character_k(P, w, rho) == pytest.approx(want, abs=1e-12)


def test_f_value(segment, segment_w):
    assert td.f_value(segment, segment_w, [0.5], [0.0]) == pytest.approx(math.log(2))
    assert td.f_value(segment, segment_w, [0.5], [LOG3]) == \
        pytest.approx(math.log(4) - LOG3 / 2)
    # at rho = 0, f = log sum w for any x
    P, w = pj.simplex_setup(3, 2)
    assert td.f_value(P, w, [1.0, 1.0], [0.0, 0.0]) == \
        pytest.approx(math.log(np.exp(w.log_w).sum()))


def test_moment_map_values(segment, segment_w):
    assert td.moment_map(segment, segment_w, [0.0])[0] == pytest.approx(0.5)
    assert td.moment_map(segment, segment_w, [LOG3])[0] == pytest.approx(0.75)


def test_moment_map_binomial_scaling():
    # at rho = 0 (all moduli 1) the image is p/(1+m) * ones
    for p, m in ((2, 2), (7, 2)):
        P, w = pj.simplex_setup(p, m)
        mu = td.moment_map(P, w, np.zeros(m))
        assert mu == pytest.approx(np.full(m, p / (1 + m)))


def test_hessian_value(segment, segment_w):
    assert td.hessian_A(segment, segment_w, [0.0])[0, 0] == pytest.approx(0.25)


def test_hessian_binomial_closed_form():
    # A(p Sigma, alpha)_ij = alpha_j delta_ij - alpha_i alpha_j / p
    p = 7
    P, w = pj.simplex_setup(p, 2)
    alpha = np.array([2.0, 3.0])
    rho = td.invert_moment_map(P, w, alpha)
    A = td.hessian_A(P, w, rho)
    want = np.diag(alpha) - np.outer(alpha, alpha) / p
    assert A == pytest.approx(want, abs=1e-9)


def test_gradient_hessian_match_finite_differences(sim7, sim7_w, rng):
    h = 1e-5
    for rho in rng.uniform(-4, 4, size=(12, 2)):
        mu = td.moment_map(sim7, sim7_w, rho)
        A = td.hessian_A(sim7, sim7_w, rho)
        for d in range(2):
            e = np.zeros(2)
            e[d] = h
            fd_grad = (td.character_k(sim7, sim7_w, rho + e)
                       - td.character_k(sim7, sim7_w, rho - e)) / (2 * h)
            assert fd_grad == pytest.approx(mu[d], abs=1e-6)
            fd_col = (td.moment_map(sim7, sim7_w, rho + e)
                      - td.moment_map(sim7, sim7_w, rho - e)) / (2 * h)
            assert fd_col == pytest.approx(A[:, d], abs=1e-6)


def test_hessian_positive_definite_batch(sim7, sim7_w, rng):
    rho = rng.uniform(-6, 6, size=(300, 2))
    A = td.hessian_A(sim7, sim7_w, rho)
    np.linalg.cholesky(A)  # raises if any draw is not positive definite


def test_invert_moment_map_values(segment, segment_w):
    assert td.invert_moment_map(segment, segment_w, [0.5])[0] == \
        pytest.approx(0.0, abs=1e-10)
    assert td.invert_moment_map(segment, segment_w, [0.75])[0] == \
        pytest.approx(LOG3, abs=1e-10)


def test_invert_moment_map_binomial_peak():
    # e^{rho_alpha} = alpha / (p - |alpha|) componentwise
    p = 7
    P, w = pj.simplex_setup(p, 2)
    alpha = np.array([2.0, 3.0])
    rho = td.invert_moment_map(P, w, alpha)
    assert np.exp(rho) == pytest.approx(alpha / (p - alpha.sum()), abs=1e-10)


def test_invert_rejects_boundary(segment, segment_w):
    with pytest.raises(PointNotInterior):
        td.invert_moment_map(segment, segment_w, [1.0])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=2))
def test_moment_roundtrip_2d(rho):
    # near the corners of the box the image sits ~e^{-9} from the boundary
    # and the Hessian is ill-conditioned, so the 1e-9 roundtrip needs the
    # gradient driven below the default 1e-12
    P = td.standard_simplex(2, 2)
    w = pj.binomial_weights(2, 2)
    rho = np.asarray(rho)
    x = td.moment_map(P, w, rho)
    back = td.invert_moment_map(P, w, x, tol=1e-13)
    assert np.linalg.norm(back - rho) <= 1e-9


def test_b_function(segment, segment_w):
    peak = td.peak_data(segment, segment_w, [0.5])
    assert td.b_function(segment, segment_w, peak, peak.rho) == \
        pytest.approx(0.0, abs=1e-12)
    # b(rho) = log cosh(rho/2) for the symmetric segment
    got = td.b_function(segment, segment_w, peak, np.array([LOG3]))
    assert got == pytest.approx(math.log(2 / math.sqrt(3)), abs=1e-12)
    grid = np.linspace(-4, 4, 33)[:, None]
    b = td.b_function(segment, segment_w, peak, grid)
    assert (b >= -1e-14).all()
    assert b == pytest.approx(np.log(np.cosh(grid[:, 0] / 2)), abs=1e-12)


def test_b_closed_form_matches_orbit():
    p, m = 7, 2
    P, w = pj.simplex_setup(p, m)
    alpha = [2, 3]
    peak = td.peak_data(P, w, np.array(alpha, dtype=float))
    rng = np.random.default_rng(3)
    for rho in rng.uniform(-2, 2, size=(41, m)):
        want = pj.b_closed_form(p, m, alpha, np.exp(rho / 2))
        got = td.b_function(P, w, peak, rho)
        assert got == pytest.approx(want, abs=1e-10)


def test_peak_data_values(segment, segment_w, sim7, sim7_w):
    pk = td.peak_data(segment, segment_w, [0.5])
    assert pk.A[0, 0] == pytest.approx(0.25, abs=1e-12)
    assert pk.c == pytest.approx(2.0, abs=1e-12)
    pk7 = td.peak_data(sim7, sim7_w, [2.0, 3.0])
    assert pk7.det_A == pytest.approx(12 / 7, abs=1e-10)
    assert pk7.c == pytest.approx(math.sqrt(7 / 12), abs=1e-10)


def test_volume_density_decay(sim7, sim7_w):
    assert td.volume_density(sim7, sim7_w, np.array([30.0, 30.0])) < 1e-8


def test_tail_bound(segment, segment_w, sim7, sim7_w):
    M, c0 = td.tail_bound(segment, segment_w, [[0.5]])
    assert M == pytest.approx(0.5)
    assert c0 == 1.0
    M7, c07 = td.tail_bound(sim7, sim7_w, [[2.0, 3.0]])
    assert M7 > 0
    # the bound must hold on samples: f >= log c0 + |rho| M
    rng = np.random.default_rng(5)
    for rho in rng.uniform(-6, 6, size=(50, 2)):
        f = td.f_value(sim7, sim7_w, [2.0, 3.0], rho)
        assert f >= math.log(c07) + np.linalg.norm(rho) * M7 - 1e-9


def test_tail_bound_margin_error(segment, segment_w):
    with pytest.raises(MarginTooSmall):
        td.tail_bound(segment, segment_w, [[1.0]])
