"""NumPy implementation of the batched evaluation kernels.

These are the hot inner loops of every quadrature in the package: weighted
exponential sums over the lattice points of a polytope (the character, its
gradient = moment map, its Hessian) and the chart-coordinate analogues where
some variables enter through squared moduli t_j >= 0 instead of exponentials.

A Cython twin of this module (``toricdist._core``) provides the same five
functions; :mod:`toricdist.backend` selects whichever is available.  Both
backends use identical max-shifted summation so results agree to rounding.

Conventions
-----------
* ``points``/``nu_exp`` rows are lattice vectors, ``log_w``/``log_a`` the
  logarithms of the positive weights attached to them.
* ``rho`` has one row per evaluation point; ``t`` holds the nonnegative
  moduli of the chart coordinates (``t[g, j] = |xi_j|``).
* ``mu_exp[d, j]`` is the exponent of ``t_j**2`` in term ``d``; terms whose
  modulus factor vanishes at ``t_j = 0`` are dropped exactly (no NaNs).
"""

from __future__ import annotations

import numpy as np

_NEG_INF = -np.inf


def _as_f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def orbit_logk(rho, points, log_w):
    """log sum_d w_d exp(<rho, beta_d>) for each row of rho. Returns (G,)."""
    rho = _as_f64(rho)
    points = _as_f64(points)
    log_w = _as_f64(log_w)
    ex = rho @ points.T + log_w
    shift = ex.max(axis=1)
    return shift + np.log(np.exp(ex - shift[:, None]).sum(axis=1))


def orbit_moments(rho, points, log_w):
    """Character and its gradient (the moment map). Returns (logk (G,), mu (G, m))."""
    rho = _as_f64(rho)
    points = _as_f64(points)
    log_w = _as_f64(log_w)
    ex = rho @ points.T + log_w
    shift = ex.max(axis=1)
    w = np.exp(ex - shift[:, None])
    s = w.sum(axis=1)
    mu = (w @ points) / s[:, None]
    return shift + np.log(s), mu


def orbit_hessian(rho, points, log_w):
    """Character, moment map, and Hessian of log k. Returns (logk, mu, hess (G, m, m))."""
    rho = _as_f64(rho)
    points = _as_f64(points)
    log_w = _as_f64(log_w)
    ex = rho @ points.T + log_w
    shift = ex.max(axis=1)
    w = np.exp(ex - shift[:, None])
    s = w.sum(axis=1)
    wn = w / s[:, None]
    mu = wn @ points
    hess = np.einsum("gd,di,dj->gij", wn, points, points)
    hess -= mu[:, :, None] * mu[:, None, :]
    return shift + np.log(s), mu, hess


def _chart_term_log(base, lt, zero, exp_t, valid):
    """Log of one family of chart terms: base + sum_j exp_t[d, j] * log t_j.

    Terms with a positive t-exponent at t_j = 0, or flagged invalid, are -inf.
    """
    pw = lt @ exp_t.T
    ex = base + pw
    bad = (zero.astype(np.float64) @ (exp_t > 0).T.astype(np.float64)) > 0.5
    if bad.any():
        ex = np.where(bad, _NEG_INF, ex)
    if not valid.all():
        ex[:, ~valid] = _NEG_INF
    return ex


def chart_logk(t, rho, log_a, mu_exp, nu_exp):
    """log K(t, rho) = log sum_d a_d prod_j t_j**(2 mu_dj) exp(<rho, nu_d>)."""
    t = _as_f64(t)
    rho = _as_f64(rho)
    log_a = _as_f64(log_a)
    mu_exp = np.ascontiguousarray(mu_exp, dtype=np.int64)
    nu_exp = _as_f64(nu_exp)
    base = rho @ nu_exp.T + log_a
    lt = np.where(t > 0.0, np.log(np.where(t > 0.0, t, 1.0)), 0.0)
    zero = t <= 0.0
    ex = _chart_term_log(base, lt, zero, 2 * mu_exp, np.ones(len(log_a), dtype=bool))
    shift = ex.max(axis=1)
    return shift + np.log(np.exp(ex - shift[:, None]).sum(axis=1))


def chart_density(t, rho, log_a, mu_exp, nu_exp):
    """log K and the scaled mixed Hessian matrix whose determinant is the
    chart volume density L(t, rho).

    The matrix is the covariance of the lattice vector under the term weights,
    with row/column j <= r divided by t_j; every entry stays finite down to
    t = 0, where the block structure diag(f_j / k_F) + face covariance is
    recovered exactly.

    Returns (logk (G,), cmat (G, m, m)) with L = det(cmat).
    """
    t = _as_f64(t)
    rho = _as_f64(rho)
    log_a = _as_f64(log_a)
    mu_exp = np.ascontiguousarray(mu_exp, dtype=np.int64)
    nu_exp = _as_f64(nu_exp)

    n_grid = t.shape[0] if t.ndim == 2 else rho.shape[0]
    r = mu_exp.shape[1]
    mr = nu_exp.shape[1]
    m = r + mr

    base = rho @ nu_exp.T + log_a
    lt = np.where(t > 0.0, np.log(np.where(t > 0.0, t, 1.0)), 0.0)
    zero = t <= 0.0
    all_valid = np.ones(len(log_a), dtype=bool)

    exp_full = 2 * mu_exp
    ex_full = _chart_term_log(base, lt, zero, exp_full, all_valid)
    ex_red = []
    for j in range(r):
        e = exp_full.copy()
        e[:, j] -= 2
        ex_red.append(_chart_term_log(base, lt, zero, np.maximum(e, 0),
                                      mu_exp[:, j] >= 1))
    ex_pair = {}
    for j in range(r):
        for k in range(j + 1, r):
            e = exp_full.copy()
            e[:, j] -= 1
            e[:, k] -= 1
            valid = (mu_exp[:, j] >= 1) & (mu_exp[:, k] >= 1)
            ex_pair[(j, k)] = _chart_term_log(base, lt, zero, np.maximum(e, 0), valid)

    shift = ex_full.max(axis=1)
    for e in ex_red:
        shift = np.maximum(shift, e.max(axis=1))
    for e in ex_pair.values():
        shift = np.maximum(shift, e.max(axis=1))

    w_full = np.exp(ex_full - shift[:, None])
    s = w_full.sum(axis=1)
    logk = shift + np.log(s)

    cmat = np.empty((n_grid, m, m))
    if mr:
        mu_nu = (w_full @ nu_exp) / s[:, None]
        cov = np.einsum("gd,di,dj->gij", w_full, nu_exp, nu_exp) / s[:, None, None]
        cov -= mu_nu[:, :, None] * mu_nu[:, None, :]
        cmat[:, r:, r:] = cov

    mu_f = mu_exp.astype(np.float64)
    rj = np.empty((n_grid, r))
    for j in range(r):
        w_red = np.exp(ex_red[j] - shift[:, None])
        col = mu_f[:, j]
        rj[:, j] = (w_red @ col) / s
        cmat[:, j, j] = (w_red @ (col * col)) / s - (t[:, j] * rj[:, j]) ** 2
        if mr:
            rv = ((w_red * col) @ nu_exp) / s[:, None]
            mixed = t[:, j, None] * (rv - rj[:, j, None] * mu_nu)
            cmat[:, j, r:] = mixed
            cmat[:, r:, j] = mixed
    for (j, k), ex in ex_pair.items():
        w_pair = np.exp(ex - shift[:, None])
        rjk = (w_pair @ (mu_f[:, j] * mu_f[:, k])) / s
        val = rjk - t[:, j] * t[:, k] * rj[:, j] * rj[:, k]
        cmat[:, j, k] = val
        cmat[:, k, j] = val

    return logk, cmat
