# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twin of :mod:`toricdist._core_py`.

Same five kernels, same max-shifted summation; loops are fused per grid
point so large quadrature batches avoid the (grid x terms) temporaries of
the NumPy fallback.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, INFINITY

cnp.import_array()


def orbit_logk(rho, points, log_w):
    """log sum_d w_d exp(<rho, beta_d>) for each row of rho. Returns (G,)."""
    cdef const double[:, ::1] R = np.ascontiguousarray(rho, dtype=np.float64)
    cdef const double[:, ::1] B = np.ascontiguousarray(points, dtype=np.float64)
    cdef const double[::1] lw = np.ascontiguousarray(log_w, dtype=np.float64)
    cdef Py_ssize_t G = R.shape[0], m = R.shape[1], D = B.shape[0]
    out_np = np.empty(G)
    cdef double[::1] out = out_np
    cdef double[::1] ex = np.empty(D)
    cdef Py_ssize_t g, d, i
    cdef double acc, mx, s
    for g in range(G):
        mx = -INFINITY
        for d in range(D):
            acc = lw[d]
            for i in range(m):
                acc += R[g, i] * B[d, i]
            ex[d] = acc
            if acc > mx:
                mx = acc
        s = 0.0
        for d in range(D):
            s += exp(ex[d] - mx)
        out[g] = mx + log(s)
    return out_np


def orbit_moments(rho, points, log_w):
    """Character and its gradient (the moment map). Returns (logk (G,), mu (G, m))."""
    cdef const double[:, ::1] R = np.ascontiguousarray(rho, dtype=np.float64)
    cdef const double[:, ::1] B = np.ascontiguousarray(points, dtype=np.float64)
    cdef const double[::1] lw = np.ascontiguousarray(log_w, dtype=np.float64)
    cdef Py_ssize_t G = R.shape[0], m = R.shape[1], D = B.shape[0]
    logk_np = np.empty(G)
    mu_np = np.zeros((G, m))
    cdef double[::1] logk = logk_np
    cdef double[:, ::1] mu = mu_np
    cdef double[::1] ex = np.empty(D)
    cdef Py_ssize_t g, d, i
    cdef double acc, mx, s, w
    for g in range(G):
        mx = -INFINITY
        for d in range(D):
            acc = lw[d]
            for i in range(m):
                acc += R[g, i] * B[d, i]
            ex[d] = acc
            if acc > mx:
                mx = acc
        s = 0.0
        for d in range(D):
            w = exp(ex[d] - mx)
            s += w
            for i in range(m):
                mu[g, i] += w * B[d, i]
        for i in range(m):
            mu[g, i] /= s
        logk[g] = mx + log(s)
    return logk_np, mu_np


def orbit_hessian(rho, points, log_w):
    """Character, moment map, and Hessian of log k. Returns (logk, mu, hess (G, m, m))."""
    cdef const double[:, ::1] R = np.ascontiguousarray(rho, dtype=np.float64)
    cdef const double[:, ::1] B = np.ascontiguousarray(points, dtype=np.float64)
    cdef const double[::1] lw = np.ascontiguousarray(log_w, dtype=np.float64)
    cdef Py_ssize_t G = R.shape[0], m = R.shape[1], D = B.shape[0]
    logk_np = np.empty(G)
    mu_np = np.zeros((G, m))
    h_np = np.zeros((G, m, m))
    cdef double[::1] logk = logk_np
    cdef double[:, ::1] mu = mu_np
    cdef double[:, :, ::1] hess = h_np
    cdef double[::1] ex = np.empty(D)
    cdef Py_ssize_t g, d, i, j
    cdef double acc, mx, s, w, wn
    for g in range(G):
        mx = -INFINITY
        for d in range(D):
            acc = lw[d]
            for i in range(m):
                acc += R[g, i] * B[d, i]
            ex[d] = acc
            if acc > mx:
                mx = acc
        s = 0.0
        for d in range(D):
            s += exp(ex[d] - mx)
        for d in range(D):
            wn = exp(ex[d] - mx) / s
            for i in range(m):
                mu[g, i] += wn * B[d, i]
                for j in range(i, m):
                    hess[g, i, j] += wn * B[d, i] * B[d, j]
        for i in range(m):
            for j in range(i, m):
                hess[g, i, j] -= mu[g, i] * mu[g, j]
                hess[g, j, i] = hess[g, i, j]
        logk[g] = mx + log(s)
    return logk_np, mu_np, h_np


cdef inline double _term_log(double base, const long* mu_row, const double* lt,
                             const unsigned char* tzero, Py_ssize_t r,
                             int dj, int dk, int j, int k) nogil:
    """base + sum_i e_i log t_i with e = 2*mu - dj*e_j - dk*e_k; -inf if some
    t_i = 0 carries a positive exponent."""
    cdef double acc = base
    cdef Py_ssize_t i
    cdef long e
    for i in range(r):
        e = 2 * mu_row[i]
        if i == j:
            e -= dj
        if i == k:
            e -= dk
        if e > 0:
            if tzero[i]:
                return -INFINITY
            acc += e * lt[i]
    return acc


def chart_logk(t, rho, log_a, mu_exp, nu_exp):
    """log K(t, rho) = log sum_d a_d prod_j t_j**(2 mu_dj) exp(<rho, nu_d>)."""
    cdef const double[:, ::1] T = np.ascontiguousarray(t, dtype=np.float64)
    cdef const double[:, ::1] R = np.ascontiguousarray(rho, dtype=np.float64)
    cdef const double[::1] la = np.ascontiguousarray(log_a, dtype=np.float64)
    cdef const long[:, ::1] MU = np.ascontiguousarray(mu_exp, dtype=np.int64)
    cdef const double[:, ::1] NU = np.ascontiguousarray(nu_exp, dtype=np.float64)
    cdef Py_ssize_t G = T.shape[0], r = MU.shape[1], mr = NU.shape[1], D = la.shape[0]
    out_np = np.empty(G)
    cdef double[::1] out = out_np
    cdef double[::1] lt = np.empty(max(r, 1))
    cdef unsigned char[::1] tz = np.zeros(max(r, 1), dtype=np.uint8)
    cdef double[::1] ex = np.empty(D)
    cdef Py_ssize_t g, d, i
    cdef double base, mx, s, v
    for g in range(G):
        for i in range(r):
            if T[g, i] > 0.0:
                lt[i] = log(T[g, i])
                tz[i] = 0
            else:
                lt[i] = 0.0
                tz[i] = 1
        mx = -INFINITY
        for d in range(D):
            base = la[d]
            for i in range(mr):
                base += R[g, i] * NU[d, i]
            v = _term_log(base, &MU[d, 0], &lt[0], &tz[0], r, 0, 0, -1, -1)
            ex[d] = v
            if v > mx:
                mx = v
        s = 0.0
        for d in range(D):
            if ex[d] > -INFINITY:
                s += exp(ex[d] - mx)
        out[g] = mx + log(s)
    return out_np


def chart_density(t, rho, log_a, mu_exp, nu_exp):
    """log K and the scaled mixed-Hessian matrix; see the NumPy twin for the
    entry-by-entry definition. Returns (logk (G,), cmat (G, m, m))."""
    cdef const double[:, ::1] T = np.ascontiguousarray(t, dtype=np.float64)
    cdef const double[:, ::1] R = np.ascontiguousarray(rho, dtype=np.float64)
    cdef const double[::1] la = np.ascontiguousarray(log_a, dtype=np.float64)
    cdef const long[:, ::1] MU = np.ascontiguousarray(mu_exp, dtype=np.int64)
    cdef const double[:, ::1] NU = np.ascontiguousarray(nu_exp, dtype=np.float64)
    cdef Py_ssize_t G = T.shape[0], r = MU.shape[1], mr = NU.shape[1]
    cdef Py_ssize_t D = la.shape[0], m = r + mr
    logk_np = np.empty(G)
    c_np = np.zeros((G, m, m))
    cdef double[::1] logk = logk_np
    cdef double[:, :, ::1] C = c_np
    cdef double[::1] lt = np.empty(max(r, 1))
    cdef unsigned char[::1] tz = np.zeros(max(r, 1), dtype=np.uint8)
    cdef double[::1] base = np.empty(D)
    # per-point accumulators
    cdef double[::1] mu_nu = np.zeros(max(mr, 1))
    cdef double[:, ::1] cov = np.zeros((max(mr, 1), max(mr, 1)))
    cdef double[::1] rj = np.zeros(max(r, 1))
    cdef double[::1] rjj = np.zeros(max(r, 1))
    cdef double[:, ::1] rv = np.zeros((max(r, 1), max(mr, 1)))
    cdef double[:, ::1] rpair = np.zeros((max(r, 1), max(r, 1)))
    cdef Py_ssize_t g, d, i, j, k
    cdef double mx, s, v, w, c_jl
    for g in range(G):
        for i in range(r):
            if T[g, i] > 0.0:
                lt[i] = log(T[g, i])
                tz[i] = 0
            else:
                lt[i] = 0.0
                tz[i] = 1
        # shared shift: max over all term families
        mx = -INFINITY
        for d in range(D):
            v = la[d]
            for i in range(mr):
                v += R[g, i] * NU[d, i]
            base[d] = v
            v = _term_log(base[d], &MU[d, 0], &lt[0], &tz[0], r, 0, 0, -1, -1)
            if v > mx:
                mx = v
            for j in range(r):
                if MU[d, j] >= 1:
                    v = _term_log(base[d], &MU[d, 0], &lt[0], &tz[0], r, 2, 0, j, -1)
                    if v > mx:
                        mx = v
                    for k in range(j + 1, r):
                        if MU[d, k] >= 1:
                            v = _term_log(base[d], &MU[d, 0], &lt[0], &tz[0],
                                          r, 1, 1, j, k)
                            if v > mx:
                                mx = v
        s = 0.0
        for i in range(mr):
            mu_nu[i] = 0.0
            for j in range(mr):
                cov[i, j] = 0.0
        for j in range(r):
            rj[j] = 0.0
            rjj[j] = 0.0
            for i in range(mr):
                rv[j, i] = 0.0
            for k in range(r):
                rpair[j, k] = 0.0
        for d in range(D):
            v = _term_log(base[d], &MU[d, 0], &lt[0], &tz[0], r, 0, 0, -1, -1)
            if v > -INFINITY:
                w = exp(v - mx)
                s += w
                for i in range(mr):
                    mu_nu[i] += w * NU[d, i]
                    for j in range(i, mr):
                        cov[i, j] += w * NU[d, i] * NU[d, j]
            for j in range(r):
                if MU[d, j] >= 1:
                    v = _term_log(base[d], &MU[d, 0], &lt[0], &tz[0], r, 2, 0, j, -1)
                    if v > -INFINITY:
                        w = exp(v - mx)
                        rj[j] += w * MU[d, j]
                        rjj[j] += w * MU[d, j] * MU[d, j]
                        for i in range(mr):
                            rv[j, i] += w * MU[d, j] * NU[d, i]
                    for k in range(j + 1, r):
                        if MU[d, k] >= 1:
                            v = _term_log(base[d], &MU[d, 0], &lt[0], &tz[0],
                                          r, 1, 1, j, k)
                            if v > -INFINITY:
                                rpair[j, k] += exp(v - mx) * MU[d, j] * MU[d, k]
        logk[g] = mx + log(s)
        for i in range(mr):
            mu_nu[i] /= s
        for i in range(mr):
            for j in range(i, mr):
                v = cov[i, j] / s - mu_nu[i] * mu_nu[j]
                C[g, r + i, r + j] = v
                C[g, r + j, r + i] = v
        for j in range(r):
            rj[j] /= s
        for j in range(r):
            C[g, j, j] = rjj[j] / s - (T[g, j] * rj[j]) * (T[g, j] * rj[j])
            for i in range(mr):
                c_jl = T[g, j] * (rv[j, i] / s - rj[j] * mu_nu[i])
                C[g, j, r + i] = c_jl
                C[g, r + i, j] = c_jl
            for k in range(j + 1, r):
                v = rpair[j, k] / s - T[g, j] * T[g, k] * rj[j] * rj[k]
                C[g, j, k] = v
                C[g, k, j] = v
    return logk_np, c_np
