"""Distribution functions of |phi|^2 under three scalings and their limits.

The superlevel volume D(t) = Vol{|phi|^2 > t} is computed as an indicator
region integral against the pushforward density (det A on the open orbit,
the chart density with radial measure on boundary charts).  Three regimes:

* no scaling: D decays like (log N / N)^{d/2} with an explicit constant;
* power scaling (N/2pi)^{d/2}: a universal log-power limit on (0, c];
* exponential scaling t -> e^{-Nt}: a geometric limit, the sublevel volume
  of the localization exponent.

Here d = m + r is the codimension of the peak torus and c the peak constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import chart_geometry as cg
from . import orbit_geometry as og
from .backend import kernels
from .errors import RegionTouchesBoundary
from .norms import MonomialContext, monomial_context
from .polytope import Polytope
from .quadrature import QuadratureSpec, region_volume

__all__ = [
    "DistributionCurve",
    "distribution_exact",
    "rescaled_distribution",
    "rescaled_limit",
    "limit_density",
    "limit_density_moment",
    "moment_check",
    "exp_rescaled_limit",
    "unrescaled_asymptotic",
    "default_tgrid",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class DistributionCurve:
    """Sampled (t, value) pairs of one scaling regime, with metadata."""

    scaling: str                     # "none" | "power" | "exponential"
    samples: tuple[tuple[float, float], ...]
    N: int
    gamma: tuple[int, ...]
    limit_overlay: tuple[tuple[float, float], ...] | None = None


def default_tgrid(c: float, n: int = 40, lo_frac: float = 0.05,
                  hi_frac: float = 1.0) -> np.ndarray:
    """Geometric t-grid in (lo_frac*c, hi_frac*c]; the limits live in log(c/t)."""
    return c * np.geomspace(lo_frac, hi_frac, n)


# ---------------------------------------------------------------------------
# superlevel volumes
# ---------------------------------------------------------------------------

def _superlevel_interior(ctx: MonomialContext, t_eff: float, rel_tol: float):
    P, w = ctx.P, ctx.w
    peak = ctx.peak
    B = P.lattice_points.astype(np.float64)
    lw = w.log_for_points(P.lattice_points)
    x, f_lim = ctx.x, peak.f_peak + t_eff

    def condition(pts):
        logk = kernels.orbit_logk(pts, B, lw)
        return (logk - pts @ x) < f_lim

    def weight(pts):
        _, _, hess = kernels.orbit_hessian(pts, B, lw)
        return np.linalg.det(hess)

    lam_min = float(np.linalg.eigvalsh(peak.A).min())
    gauss = 6.0 * math.sqrt(2.0 * t_eff / lam_min)
    rigorous = (peak.f_peak + t_eff - ctx.log_c0) / ctx.margin * 1.05 \
        + float(np.linalg.norm(peak.rho))
    radius = min(gauss, rigorous)
    for _ in range(8):
        spec = QuadratureSpec(center=peak.rho,
                              half_widths=np.full(ctx.m, radius),
                              base_points_per_dim=64, refinement_limit=14,
                              rel_tol=rel_tol, rule="trapezoid")
        try:
            return region_volume(condition, weight, spec).value
        except RegionTouchesBoundary:
            radius *= 1.6
    raise RegionTouchesBoundary("superlevel region kept reaching the box")


def _superlevel_chart(ctx: MonomialContext, t_eff: float, rel_tol: float):
    chart, log_a, cp = ctx.chart, ctx.log_a, ctx.cpeak
    r = chart.split_r
    mu, nu = cg._split(chart)
    at = cp.alpha_tilde
    s_lim = cp.s_peak + t_eff

    def condition(pts):
        t = pts[:, :r]
        rho = pts[:, r:]
        logk = kernels.chart_logk(t, rho, log_a, mu, nu)
        s = logk - (rho @ at if at.size else 0.0)
        return s < s_lim

    def weight(pts):
        t = pts[:, :r]
        rho = pts[:, r:]
        _, cmat = kernels.chart_density(t, rho, log_a, mu, nu)
        L = np.linalg.det(cmat)
        return (2.0 ** r) * L * np.prod(t, axis=1)

    lam_min = float(np.linalg.eigvalsh(cg.assemble_Hs(cp)).min())
    radius = 4.0 * math.sqrt(2.0 * t_eff / lam_min)
    mr = len(cp.rho_F)
    touch = np.zeros((r + mr, 2), dtype=bool)
    touch[:r, 0] = True  # t = 0 is a true domain edge, not a truncation
    for _ in range(10):
        center = np.concatenate([np.full(r, 0.5 * radius), cp.rho_F])
        half = np.concatenate([np.full(r, 0.5 * radius), np.full(mr, radius)])
        spec = QuadratureSpec(center=center, half_widths=half,
                              base_points_per_dim=48, refinement_limit=12,
                              rel_tol=rel_tol, rule="trapezoid")
        try:
            return region_volume(condition, weight, spec,
                                 allowed_touch=touch).value
        except RegionTouchesBoundary:
            radius *= 1.6
    raise RegionTouchesBoundary("superlevel region kept reaching the box")


def distribution_exact(P: Polytope, w: og.WeightSet, gamma, N: int, t: float,
                       *, rel_tol: float = 1e-4,
                       ctx: MonomialContext | None = None) -> float:
    """D_gamma(t) = Vol{ |phi_gamma|^2 > t } for t > 0."""
    if t <= 0:
        raise ValueError("threshold must be positive")
    ctx = ctx or monomial_context(P, w, gamma, N)
    t_eff = (ctx.sup_log_peak() - math.log(t)) / ctx.N
    if t_eff <= 0:
        return 0.0
    if ctx.r == 0:
        return _superlevel_interior(ctx, t_eff, rel_tol)
    return _superlevel_chart(ctx, t_eff, rel_tol)


def rescaled_distribution(P, w, gamma, N, t, *, rel_tol=1e-4,
                          ctx: MonomialContext | None = None) -> float:
    """F^r(t) = (N/2pi)^{d/2} D((N/2pi)^{d/2} t), d = m + codim."""
    ctx = ctx or monomial_context(P, w, gamma, N)
    factor = (N / _TWO_PI) ** (ctx.d / 2.0)
    return factor * distribution_exact(P, w, gamma, N, factor * t,
                                       rel_tol=rel_tol, ctx=ctx)


def rescaled_limit(c: float, d: int, t) -> np.ndarray | float:
    """Limit of the power-rescaled distribution: (log(c/t))^{d/2}/(c Gamma(d/2+1)).

    Zero above the cutoff c; raises on t <= 0.
    """
    t_arr = np.asarray(t, dtype=np.float64)
    if (t_arr <= 0).any():
        raise ValueError("t must be positive")
    out = np.zeros_like(t_arr)
    inside = t_arr <= c
    out[inside] = (np.log(c / t_arr[inside]) ** (d / 2.0)
                   / (c * math.exp(gammaln(d / 2.0 + 1.0))))
    return float(out) if np.ndim(t) == 0 else out


def limit_density(c: float, h: int, x) -> np.ndarray | float:
    """Log-power probability density on (0, c): (log(c/x))^{h/2-1}/(c Gamma(h/2))."""
    x_arr = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x_arr)
    inside = (x_arr > 0) & (x_arr < c)
    out[inside] = (np.log(c / x_arr[inside]) ** (h / 2.0 - 1.0)
                   / (c * math.exp(gammaln(h / 2.0))))
    return float(out) if np.ndim(x) == 0 else out


def limit_density_moment(c: float, h: int, k: int, *, n_nodes: int = 256) -> float:
    """k-th moment of the log-power density by quadrature.

    Substitutes x = c e^{-u^2} (regularizing both endpoints) and integrates
    the density itself with Gauss-Legendre; the closed-form reference is
    c^k / (k+1)^{h/2}.
    """
    u_max = math.sqrt((60.0 + 10.0 * h) / max(k + 1, 1))
    xg, wg = np.polynomial.legendre.leggauss(n_nodes)
    u = 0.5 * u_max * (xg + 1.0)
    wu = 0.5 * u_max * wg
    x = c * np.exp(-u * u)
    jac = 2.0 * c * u * np.exp(-u * u)
    vals = (x ** k) * limit_density(c, h, x) * jac
    return float(math.fsum(vals * wu))


def moment_check(P, w, gamma, N, k, *, rel_tol=1e-9,
                 ctx: MonomialContext | None = None) -> tuple[float, float]:
    """(empirical k-th moment of the rescaled value measure, its limit).

    The empirical moment is the L^{2k} norm of the rescaled eigenfunction
    against the rescaled volume; the limit is c^{k-1} / k^{(m+r)/2}.
    """
    ctx = ctx or monomial_context(P, w, gamma, N, rel_tol=rel_tol)
    k = int(k)
    log_l2k = ctx.log_chi_integral(float(k * ctx.N)) - k * ctx.log_norm_sq()
    log_emp = log_l2k - (ctx.d * (k - 1) / 2.0) * math.log(ctx.N / _TWO_PI)
    limit = ctx.peak_constant() ** (k - 1) / k ** (ctx.d / 2.0)
    return math.exp(log_emp), limit


def exp_rescaled_limit(P, w, target, t, *, rel_tol=1e-7) -> float:
    """lim_N D(e^{-Nt}): the sublevel volume of the localization exponent.

    ``target`` is an interior point x (sublevel of b_x against det A) or a
    lattice point on a face (sublevel of Psi against the chart density).
    """
    if t <= 0:
        return 0.0
    target = np.asarray(target, dtype=np.float64)
    is_interior = np.min(P.slacks(target)) > 0
    if is_interior:
        peak = og.peak_data(P, w, target)
        M, c0 = og.tail_bound(P, w, target)
        B = P.lattice_points.astype(np.float64)
        lw = w.log_for_points(P.lattice_points)
        f_lim = peak.f_peak + t

        def condition(pts):
            logk = kernels.orbit_logk(pts, B, lw)
            return (logk - pts @ target) < f_lim

        def weight(pts):
            _, _, hess = kernels.orbit_hessian(pts, B, lw)
            return np.linalg.det(hess)

        radius = (peak.f_peak + t - math.log(c0)) / M * 1.05 \
            + float(np.linalg.norm(peak.rho))
        spec = QuadratureSpec(center=peak.rho,
                              half_widths=np.full(P.dim, radius),
                              base_points_per_dim=64, refinement_limit=14,
                              rel_tol=rel_tol, rule="trapezoid")
        return region_volume(condition, weight, spec).value

    # lattice point on a proper face: chart sublevel with artificial N
    gamma_int = np.asarray(np.rint(target), dtype=np.int64)
    ctx = monomial_context(P, w, gamma_int, 1)
    return _superlevel_chart(ctx, t, rel_tol)


def unrescaled_asymptotic(c: float, d: int, N) -> float:
    """(pi d)^{d/2} / (c Gamma(d/2+1)) * (log N / N)^{d/2}."""
    N_arr = np.asarray(N, dtype=np.float64)
    out = ((math.pi * d) ** (d / 2.0)
           / (c * math.exp(gammaln(d / 2.0 + 1.0)))
           * (np.log(N_arr) / N_arr) ** (d / 2.0))
    return float(out) if np.ndim(N) == 0 else out


# ---------------------------------------------------------------------------
# curve builders (CLI surface)
# ---------------------------------------------------------------------------

def power_curve(P, w, gamma, N, tgrid=None, *, rel_tol=1e-4) -> DistributionCurve:
    """Rescaled distribution curve with its limit overlay."""
    ctx = monomial_context(P, w, gamma, N)
    c = ctx.peak_constant()
    tgrid = default_tgrid(c) if tgrid is None else np.asarray(tgrid)
    samples = tuple((float(t), rescaled_distribution(P, w, gamma, N, t,
                                                     rel_tol=rel_tol, ctx=ctx))
                    for t in tgrid)
    overlay = tuple((float(t), float(rescaled_limit(c, ctx.d, t)))
                    for t in tgrid)
    return DistributionCurve("power", samples, N, tuple(ctx.index.gamma), overlay)


def exponential_curve(P, w, gamma, N, tgrid, *, rel_tol=1e-4) -> DistributionCurve:
    """D(e^{-Nt}) curve with the geometric limit overlay."""
    ctx = monomial_context(P, w, gamma, N)
    samples = []
    overlay = []
    target = ctx.x if ctx.r == 0 else np.asarray(gamma, dtype=np.float64) / N
    for t in np.asarray(tgrid, dtype=np.float64):
        thr = math.exp(-N * t)
        samples.append((float(t), distribution_exact(P, w, gamma, N, thr,
                                                     rel_tol=rel_tol, ctx=ctx)))
        overlay.append((float(t), exp_rescaled_limit(P, w, target, float(t),
                                                     rel_tol=max(rel_tol, 1e-6))))
    return DistributionCurve("exponential", tuple(samples), N,
                             tuple(ctx.index.gamma), tuple(overlay))


def unrescaled_curve(P, w, gamma, N, tgrid, *, rel_tol=1e-4) -> DistributionCurve:
    """Raw D(t) curve with the (log N / N)^{d/2} law as overlay."""
    ctx = monomial_context(P, w, gamma, N)
    c = ctx.peak_constant()
    samples = tuple((float(t), distribution_exact(P, w, gamma, N, float(t),
                                                  rel_tol=rel_tol, ctx=ctx))
                    for t in np.asarray(tgrid, dtype=np.float64))
    law = float(unrescaled_asymptotic(c, ctx.d, N))
    overlay = tuple((float(t), law) for t, _ in samples)
    return DistributionCurve("none", samples, N, tuple(ctx.index.gamma), overlay)
