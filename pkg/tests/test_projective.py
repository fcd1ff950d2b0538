import math

import numpy as np
import pytest

import toricdist as td
from toricdist import projective as pj


def test_homogenize_bookkeeping():
    h = pj.homogenize(7, [2, 3])
    assert h.alpha_hat == (2, 2, 3)
    assert h.r == 0 and h.d == 2
    hv = pj.homogenize(1, [1])       # vertex of the segment
    assert hv.alpha_hat == (0, 1)
    assert hv.r == 1 and hv.d == 2
    hf = pj.homogenize(7, [0, 3])    # facet point
    assert hf.r == 1 and hf.d == 3


def test_binomial_weights_values():
    w = pj.binomial_weights(1, 1)
    assert np.exp(w.log_w) == pytest.approx([1.0, 1.0])
    w7 = pj.binomial_weights(7, 2)
    assert math.exp(w7.log_for_points([[2, 3]])[0]) == pytest.approx(210.0)


def test_lq_norm_exact_values():
    # q = 2 is the normalization for any parameters
    for (p, m, N, alpha) in ((1, 1, 1, [1]), (2, 1, 3, [1]), (3, 2, 2, [1, 1])):
        assert pj.lq_norm_exact(p, m, N, alpha, 2.0) == pytest.approx(1.0, abs=1e-12)
    assert pj.lq_norm_exact(1, 1, 1, [1], 4.0) == pytest.approx(4 / 3, abs=1e-10)


def test_l2_norm_closed_vs_hand_values():
    # ||chi_gamma||^2 = p^m gamma_hat! / (Np+m)!
    assert math.exp(pj.log_norm_sq_closed(1, 1, 2, [1])) == pytest.approx(1 / 6)
    assert math.exp(pj.log_norm_sq_closed(1, 1, 2, [2])) == pytest.approx(1 / 3)
    assert math.exp(pj.log_norm_sq_closed(1, 1, 5, [5])) == pytest.approx(1 / 6)


def test_stirling_interior_matches_l2k_branch():
    # for even q = 2k the 2q-power law must square the L^{2k} peak law
    p, m, alpha, k = 7, 2, [2, 3], 2
    N = 64
    det_A = pj.detA_closed_form(p, alpha)
    c = 1 / math.sqrt(det_A)
    l2k = c ** (k - 1) / k ** (m / 2) * (N / (2 * math.pi)) ** ((k - 1) * m / 2)
    norm2q, sup2 = pj.stirling_asymptotics(p, m, alpha, 2 * k, N)
    assert norm2q == pytest.approx(l2k ** 2, rel=1e-12)
    assert sup2 == pytest.approx(c * (N / (2 * math.pi)) ** (m / 2), rel=1e-12)


def test_stirling_vertex_matches_vertex_law():
    # segment vertex: d = 2, prediction N for the squared sup norm
    _, sup2 = pj.stirling_asymptotics(1, 1, [1], 4.0, 50)
    assert sup2 == pytest.approx(50.0, rel=1e-12)


def test_stirling_tracks_exact_q_norm():
    p, m, alpha, q = 2, 1, [1], 3.0
    devs = []
    for N in (64, 128):
        exact_2q = pj.lq_norm_exact(p, m, N, alpha, q) ** 2
        pred, _ = pj.stirling_asymptotics(p, m, alpha, q, N)
        devs.append(abs(exact_2q / pred - 1.0))
    assert devs[1] < devs[0]
    assert devs[1] < 0.02


def test_detA_closed_form_values():
    assert pj.detA_closed_form(7, [2, 3]) == pytest.approx(12 / 7)
    assert pj.detA_closed_form(2, [1]) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        pj.detA_closed_form(3, [0, 1])


def test_detA_closed_form_vs_numeric_full_sweep():
    for m in (1, 2):
        for p in range(2, 8):
            P, w = pj.simplex_setup(p, m)
            for alpha in P.lattice_points:
                if np.min(P.slacks(alpha)) <= 0:
                    continue
                rho = td.invert_moment_map(P, w, alpha.astype(float))
                got = float(np.linalg.det(td.hessian_A(P, w, rho)))
                assert got == pytest.approx(pj.detA_closed_form(p, alpha),
                                            abs=1e-10)


def test_b_closed_form_values():
    # at the peak torus |z|^2 = alpha/(p - |alpha|) the exponent vanishes
    p, m, alpha = 7, 2, np.array([2, 3])
    z_peak = np.sqrt(alpha / (p - alpha.sum()))
    assert pj.b_closed_form(p, m, alpha, z_peak) == pytest.approx(0.0, abs=1e-12)
    # hand value at |z| = (1, 1)
    want = 7 * math.log(3) + (2 * math.log(2) + 2 * math.log(2)
                              + 3 * math.log(3)) - 7 * math.log(7)
    assert pj.b_closed_form(p, m, alpha, [1.0, 1.0]) == pytest.approx(want)


def test_gaussian_profile_peak_and_quadratic():
    p, alpha = 7, [2, 3]
    N = 32
    at_peak = pj.gaussian_profile(p, alpha, N, [0.0, 0.0])
    c = 1 / math.sqrt(pj.detA_closed_form(p, alpha))
    assert at_peak == pytest.approx(c * (N / (2 * math.pi)), rel=1e-12)
    # quadratic form equals the interior Hessian A(p Sigma, alpha)
    A = np.diag([2.0, 3.0]) - np.outer([2, 3], [2, 3]) / 7
    u = np.array([0.7, -0.4])
    want = at_peak * math.exp(-0.5 * float(u @ A @ u))
    assert pj.gaussian_profile(p, alpha, N, u) == pytest.approx(want, rel=1e-12)


def test_gaussian_profile_tracks_exact():
    # |phi|^2 at z = e^{(rho_alpha + u/sqrt N)/2} approaches the profile
    p, m, alpha = 7, 2, np.array([2, 3])
    P, w = pj.simplex_setup(p, m)
    devs = []
    for N in (64, 256):
        ctx = td.monomial_context(P, w, N * alpha, N, rel_tol=1e-10)
        rng = np.random.default_rng(2)
        dev = 0.0
        for u in rng.uniform(-2, 2, size=(10, m)):
            rho = ctx.peak.rho + u / math.sqrt(N)
            exact = math.exp(float(ctx.log_eigen_sq_orbit(rho[None, :])[0]))
            pred = pj.gaussian_profile(p, alpha, N, u)
            dev = max(dev, abs(exact / pred - 1.0))
        devs.append(dev)
    assert devs[1] < devs[0]
    assert devs[1] < 0.2
