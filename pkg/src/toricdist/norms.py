"""Exact and asymptotic evaluation of the normalized monomials.

Exact values come from Laplace quadrature of the squared-norm integral: over
the open orbit for interior weights and over a vertex chart (radially
reduced) when the weight ray sits on a proper face, where the open-orbit
integrand decays only polynomially.  Asymptotic values are the closed-form
peak laws, switching branch on the codimension r of the face carrying the
ray (interior / face / vertex).

A :class:`MonomialContext` bundles everything attached to one (polytope,
weights, gamma, N): the route, the peak data, the normalization, and the
integrand callables reused by the distribution-function module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import chart_geometry as cg
from . import orbit_geometry as og
from .backend import kernels
from .errors import PointOutsidePolytope
from .polytope import (
    Polytope,
    VertexChart,
    build_vertex_chart,
    default_vertex_for_face,
    face_of_rational,
)
from .quadrature import IntegralResult, QuadratureSpec, laplace_integral, \
    linear_integral

__all__ = [
    "MonomialIndex",
    "MonomialContext",
    "NormReport",
    "monomial_context",
    "norm_sq_exact",
    "log_norm_sq_exact",
    "eigenfunction_sq",
    "pointwise_asymptotic",
    "pointwise_asymptotic_boundary",
    "pointwise_asymptotic_vertex",
    "l2k_norm",
    "sup_norm",
    "localization_integral",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class MonomialIndex:
    """A weight gamma in N*P with its face classification."""

    N: int
    gamma: tuple[int, ...]
    kind: str          # "interior" | "face" | "vertex"
    codim: int         # r
    d: int             # m + r, the scaling exponent


@dataclass(frozen=True)
class NormReport:
    """Exact vs asymptotic norm value for one (N, k)."""

    N: int
    k: int
    exact: float
    asymptotic: float
    ratio: float
    provenance_exact: str
    provenance_asymptotic: str
    log_exact: float


def _geom_panel_breaks(lo: float, hi: float, center: float, w0: float):
    """Interior breakpoints: width-w0 panel at the center, growing x3 outward."""
    if hi - lo <= 4.0 * w0:
        return None
    pts = []
    step = w0
    x = center + w0
    while x < hi - 0.25 * step:
        pts.append(x)
        step *= 3.0
        x = center + step
    step = w0
    x = center - w0
    while x > lo + 0.25 * step:
        pts.append(x)
        step *= 3.0
        x = center - step
    pts = sorted(p for p in pts if lo < p < hi)
    return tuple(pts) if pts else None


@dataclass
class MonomialContext:
    """Everything needed to evaluate one monomial ray numerically."""

    P: Polytope
    w: og.WeightSet
    gamma: np.ndarray
    N: int
    index: MonomialIndex
    x: np.ndarray                      # gamma / N
    rel_tol: float = 1e-10
    # interior route
    peak: og.PeakData | None = None
    margin: float | None = None        # directional margin M({x})
    log_c0: float = 0.0
    # chart route (also built for interior when chart cross-checks are wanted)
    chart: VertexChart | None = None
    log_a: np.ndarray | None = None
    cpeak: cg.ChartPeakData | None = None
    _log_chi_cache: dict = field(default_factory=dict)

    # -- classification shortcuts ------------------------------------------
    @property
    def r(self) -> int:
        return self.index.codim

    @property
    def d(self) -> int:
        return self.index.d

    @property
    def m(self) -> int:
        return self.P.dim

    def peak_constant(self) -> float:
        """c(P, .) for the matching branch (interior / face / vertex)."""
        if self.r == 0:
            return self.peak.c
        return self.cpeak.c

    # -- exact route --------------------------------------------------------
    def _orbit_integrand(self, scale: float):
        B = self.P.lattice_points.astype(np.float64)
        lw = self.w.log_for_points(self.P.lattice_points)
        x = self.x

        def log_f(pts):
            logk, _, hess = kernels.orbit_hessian(pts, B, lw)
            det = np.linalg.det(hess)
            return -scale * (logk - pts @ x) + np.log(np.maximum(det, 1e-300))

        return log_f

    def _orbit_spec(self, scale: float, widen: float = 1.0) -> QuadratureSpec:
        peak = self.peak
        tol = self.rel_tol
        radius = (peak.f_peak - self.log_c0 + math.log(1.0 / tol) / scale) \
            / self.margin
        radius = 1.25 * widen * (radius + float(np.linalg.norm(peak.rho)))
        lam_min = float(np.linalg.eigvalsh(peak.A).min())
        w0 = min(radius, 6.0 / math.sqrt(scale * lam_min))
        breaks = tuple(
            _geom_panel_breaks(peak.rho[d] - radius, peak.rho[d] + radius,
                               peak.rho[d], w0)
            for d in range(self.m)
        )
        return QuadratureSpec(
            center=peak.rho, half_widths=np.full(self.m, radius),
            base_points_per_dim=32 if self.m >= 2 else 64,
            refinement_limit=5, rel_tol=tol, breaks=breaks,
        )

    def _chart_integrand(self, scale: float):
        chart, log_a = self.chart, self.log_a
        r = chart.split_r
        mu, nu = cg._split(chart)
        at = self.cpeak.alpha_tilde

        def log_f(pts):
            t = pts[:, :r]
            rho = pts[:, r:]
            logk, cmat = kernels.chart_density(t, rho, log_a, mu, nu)
            L = np.linalg.det(cmat)
            s = logk - (rho @ at if at.size else 0.0)
            radial = np.where(t > 0.0, np.log(np.maximum(t, 1e-300)), -np.inf) \
                .sum(axis=1) if r else 0.0
            return (-scale * s + np.log(np.maximum(L, 1e-300))
                    + radial + r * math.log(2.0))

        return log_f

    def _chart_spec(self, scale: float, widen: float = 1.0) -> QuadratureSpec:
        cp = self.cpeak
        r = cp.r
        mr = len(cp.rho_F)
        lam_min = float(np.linalg.eigvalsh(cg.assemble_Hs(cp)).min())
        c0q = lam_min / 4.0
        rad = math.sqrt((math.log(1.0 / self.rel_tol) + 12.0) / (scale * c0q))
        rad *= 1.25 * widen
        center = np.concatenate([np.full(r, 0.5 * rad), cp.rho_F])
        half = np.concatenate([np.full(r, 0.5 * rad), np.full(mr, rad)])
        w0 = min(rad, 6.0 / math.sqrt(scale * lam_min))
        breaks = []
        for dd in range(r):
            breaks.append(_geom_panel_breaks(0.0, rad, 0.0, w0))
        for dd in range(mr):
            c = cp.rho_F[dd]
            breaks.append(_geom_panel_breaks(c - rad, c + rad, c, w0))
        return QuadratureSpec(
            center=center, half_widths=half,
            base_points_per_dim=32 if (r + mr) >= 2 else 64,
            refinement_limit=5, rel_tol=self.rel_tol, breaks=tuple(breaks),
        )

    def log_chi_integral(self, scale: float) -> float:
        """log of the squared-norm-type Laplace integral at the given scale.

        scale = N gives log ||chi_gamma||^2; scale = k*N is the numerator of
        the L^{2k} norm of the normalized monomial.
        """
        key = float(scale)
        if key in self._log_chi_cache:
            return self._log_chi_cache[key]
        if self.r == 0:
            log_f = self._orbit_integrand(scale)
            peak_log = float(log_f(self.peak.rho[None, :])[0])
            make_spec = self._orbit_spec
        else:
            log_f = self._chart_integrand(scale)
            cp = self.cpeak
            # magnitude at the peak ridge (t at the radial maximum)
            t_typ = np.sqrt(np.exp(cp.log_kF_peak) / (2.0 * scale * cp.f_k)) \
                if cp.r else np.zeros(0)
            probe = np.concatenate([t_typ, cp.rho_F])[None, :]
            peak_log = float(log_f(probe)[0])
            make_spec = self._chart_spec
        widen = 1.0
        res: IntegralResult | None = None
        for _ in range(12):
            spec = make_spec(scale, widen)
            res = laplace_integral(log_f, spec, scale=scale)
            # a-posteriori: the (conservative) boundary tail estimate must be
            # negligible relative to the integral
            if res.tail_bound <= 0.1 * self.rel_tol:
                break
            widen *= 2.0
        self._log_chi_cache[key] = res.value
        return res.value

    def log_norm_sq(self) -> float:
        return self.log_chi_integral(float(self.N))

    # -- pointwise ----------------------------------------------------------
    def log_eigen_sq_orbit(self, rho) -> np.ndarray:
        """log |phi|^2 at open-orbit points rho (rows)."""
        R = np.atleast_2d(np.asarray(rho, dtype=np.float64))
        fvals = og.f_value(self.P, self.w, self.x, R)
        return -self.N * fvals - self.log_norm_sq()

    def log_eigen_sq_chart(self, t, rho) -> np.ndarray:
        """log |phi|^2 at chart points (t rows, rho rows)."""
        s = cg.s_value(self.chart, self.log_a, self.cpeak.alpha_tilde, t, rho)
        return -self.N * np.asarray(s) - self.log_norm_sq()

    def sup_log_peak(self) -> float:
        """log of the peak (= sup) of |phi|^2."""
        if self.r == 0:
            return -self.N * self.peak.f_peak - self.log_norm_sq()
        return -self.N * self.cpeak.s_peak - self.log_norm_sq()


def _ensure_chart(ctx: MonomialContext, v0=None):
    face = face_of_rational(ctx.P, ctx.gamma, ctx.N)
    chart = build_vertex_chart(ctx.P, face,
                               default_vertex_for_face(ctx.P, face)
                               if v0 is None else v0)
    log_a = cg.chart_log_weights(chart, ctx.w)
    image = (ctx.gamma @ chart.gamma.T - ctx.N * (chart.gamma @ chart.v0)) \
        / float(ctx.N)
    alpha_tilde = image[chart.split_r:]
    cpeak = cg.chart_peak_from_tilde(chart, log_a, alpha_tilde)
    ctx.chart, ctx.log_a, ctx.cpeak = chart, log_a, cpeak


def monomial_context(P: Polytope, w: og.WeightSet, gamma, N: int, *,
                     v0=None, rel_tol: float = 1e-10,
                     force_chart: bool = False) -> MonomialContext:
    """Classify gamma in N*P and prepare the matching evaluation route.

    ``force_chart`` additionally builds a chart route for interior gamma
    (used for the chart-vs-orbit agreement checks).
    """
    gamma = np.asarray(gamma, dtype=np.int64)
    if int(N) != N or N < 1:
        raise ValueError("N must be a positive integer")
    N = int(N)
    face = face_of_rational(P, gamma, N)
    r = face.codim
    kind = "interior" if r == 0 else ("vertex" if r == P.dim else "face")
    idx = MonomialIndex(N=N, gamma=tuple(int(g) for g in gamma), kind=kind,
                        codim=r, d=P.dim + r)
    ctx = MonomialContext(P=P, w=w, gamma=gamma, N=N, index=idx,
                          x=gamma / float(N), rel_tol=rel_tol)
    if r == 0:
        ctx.peak = og.peak_data(P, w, ctx.x)
        M, c0 = og.tail_bound(P, w, ctx.x)
        ctx.margin = M
        ctx.log_c0 = math.log(c0)
        if force_chart:
            _ensure_chart(ctx, v0)
    else:
        _ensure_chart(ctx, v0)
    return ctx


# ---------------------------------------------------------------------------
# spec-surface operations
# ---------------------------------------------------------------------------

def log_norm_sq_exact(P, w, gamma, N, *, rel_tol=1e-10, v0=None,
                      force_chart=False) -> float:
    """log ||chi_gamma||^2 by quadrature (orbit or chart route by codim)."""
    ctx = monomial_context(P, w, gamma, N, v0=v0, rel_tol=rel_tol,
                           force_chart=force_chart)
    if force_chart and ctx.index.codim == 0:
        # evaluate through the chart even though gamma is interior
        return _chart_route_log_norm(ctx)
    return ctx.log_norm_sq()


def _chart_route_log_norm(ctx: MonomialContext) -> float:
    saved_r = ctx.index.codim
    assert saved_r == 0 and ctx.chart is not None
    sub = MonomialContext(P=ctx.P, w=ctx.w, gamma=ctx.gamma, N=ctx.N,
                          index=ctx.index, x=ctx.x, rel_tol=ctx.rel_tol,
                          chart=ctx.chart, log_a=ctx.log_a, cpeak=ctx.cpeak)
    log_f = sub._chart_integrand(float(ctx.N))
    spec = sub._chart_spec(float(ctx.N))
    res = laplace_integral(log_f, spec, scale=float(ctx.N))
    return res.value


def norm_sq_exact(P, w, gamma, N, **kw) -> float:
    """||chi_gamma||^2 (may underflow for large N; prefer the log form)."""
    return math.exp(log_norm_sq_exact(P, w, gamma, N, **kw))


def eigenfunction_sq(P, w, gamma, N, point, *, chart_ctx: MonomialContext | None = None,
                     rel_tol=1e-10):
    """|phi_gamma|^2 at an open-orbit rho or a ChartPoint."""
    ctx = chart_ctx or monomial_context(P, w, gamma, N, rel_tol=rel_tol)
    if isinstance(point, cg.ChartPoint):
        if ctx.chart is None:
            _ensure_chart(ctx)
        out = np.exp(ctx.log_eigen_sq_chart(point.t, point.rho))
    else:
        if ctx.index.codim != 0:
            raise PointOutsidePolytope(
                "open-orbit evaluation requires an interior ray; pass a ChartPoint"
            )
        out = np.exp(ctx.log_eigen_sq_orbit(point))
    return float(out[0]) if np.ndim(out) and len(np.atleast_1d(out)) == 1 else out


def pointwise_asymptotic(P, w, peak: og.PeakData, N, rho):
    """Interior peak law: c(P,x) (N/2pi)^{m/2} e^{-N b_x(rho)}."""
    b = og.b_function(P, w, peak, rho)
    m = P.dim
    return peak.c * (N / _TWO_PI) ** (m / 2.0) * np.exp(-N * np.asarray(b))


def pointwise_asymptotic_boundary(cpeak: cg.ChartPeakData, N, psi):
    """Face peak law: (2pi)^r (N/2pi)^{(m+r)/2} e^{-N Psi} / sqrt(det A_F)."""
    r = cpeak.r
    m = cpeak.dim
    pref = (_TWO_PI ** r) * (N / _TWO_PI) ** ((m + r) / 2.0) \
        / math.sqrt(cpeak.det_A_F)
    return pref * np.exp(-N * np.asarray(psi))


def pointwise_asymptotic_vertex(cpeak: cg.ChartPeakData, N, log_K):
    """Vertex law: (N/|c_v|^2)^m e^{-N(log K - log |c_v|^2)}."""
    m = cpeak.dim
    log_a0 = cpeak.log_kF_peak
    return np.exp(m * (math.log(N) - log_a0)
                  - N * (np.asarray(log_K) - log_a0))


def l2k_asymptotic(ctx: MonomialContext, k: int) -> float:
    """Closed-form branch of the L^{2k} law for the context's kind."""
    N, m, r = ctx.N, ctx.m, ctx.r
    if r == 0:
        c = ctx.peak.c
        return c ** (k - 1) / k ** (m / 2.0) * (N / _TWO_PI) ** ((k - 1) * m / 2.0)
    if r < m:
        c = ctx.cpeak.c
        return (c ** (k - 1) / k ** ((m + r) / 2.0)
                * (N / _TWO_PI) ** ((k - 1) * (m + r) / 2.0))
    log_a0 = ctx.cpeak.log_kF_peak
    return math.exp(-m * math.log(k) + (k - 1) * m * (math.log(N) - log_a0))


def l2k_norm(P, w, gamma, N, k, *, rel_tol=1e-9,
             ctx: MonomialContext | None = None) -> NormReport:
    """||phi_gamma||_{2k}^{2k}: quadrature at scale k*N vs the peak law."""
    k = int(k)
    ctx = ctx or monomial_context(P, w, gamma, N, rel_tol=rel_tol)
    log_exact = ctx.log_chi_integral(float(k * N)) - k * ctx.log_norm_sq()
    exact = math.exp(log_exact)
    asym = l2k_asymptotic(ctx, k)
    route = "orbit" if ctx.r == 0 else f"chart[r={ctx.r}]"
    branch = {0: "interior"}.get(ctx.r, "vertex" if ctx.r == ctx.m else "face")
    return NormReport(N=N, k=k, exact=exact, asymptotic=asym,
                      ratio=exact / asym,
                      provenance_exact=f"laplace-quadrature:{route}",
                      provenance_asymptotic=f"peak-law:{branch}",
                      log_exact=log_exact)


def sup_norm(P, w, gamma, N, *, rel_tol=1e-10,
             ctx: MonomialContext | None = None):
    """(sup |phi|^2, argmax location, scaling-limit prediction)."""
    ctx = ctx or monomial_context(P, w, gamma, N, rel_tol=rel_tol)
    m, r = ctx.m, ctx.r
    value = math.exp(ctx.sup_log_peak())
    if r == 0:
        argmax = ctx.peak.rho
        prediction = (N / _TWO_PI) ** (m / 2.0) / math.sqrt(ctx.peak.det_A)
    elif r < m:
        argmax = cg.ChartPoint(np.zeros(r), ctx.cpeak.rho_F)
        prediction = ((N / _TWO_PI) ** ((m + r) / 2.0) * _TWO_PI ** r
                      / math.sqrt(ctx.cpeak.det_A_F))
    else:
        argmax = cg.ChartPoint(np.zeros(m), np.zeros(0))
        prediction = math.exp(m * (math.log(N) - ctx.cpeak.log_kF_peak))
    return value, argmax, prediction


def localization_integral(P, w, gamma, N, sigma, *, rel_tol=1e-8,
                          ctx: MonomialContext | None = None):
    """(integral of sigma(mu) |phi|^2 dVol, sigma at the target, |difference|).

    ``sigma`` is evaluated at the moment-map image (action variables) and
    should be polynomial there; the integral then converges to sigma at the
    classical value gamma/N.
    """
    ctx = ctx or monomial_context(P, w, gamma, N, rel_tol=max(rel_tol, 1e-10))
    if ctx.r != 0:
        raise PointOutsidePolytope(
            "localization integral is computed on the open orbit; "
            "gamma/N must be interior"
        )
    B = P.lattice_points.astype(np.float64)
    lw = w.log_for_points(P.lattice_points)
    log_norm = ctx.log_norm_sq()
    x = ctx.x
    N = ctx.N

    def integrand(pts):
        logk, mu, hess = kernels.orbit_hessian(pts, B, lw)
        det = np.linalg.det(hess)
        log_phi2 = -N * (logk - pts @ x) - log_norm
        return np.asarray(sigma(mu)) * np.exp(log_phi2) * det

    spec = ctx._orbit_spec(float(N))
    spec = QuadratureSpec(center=spec.center, half_widths=spec.half_widths,
                          base_points_per_dim=spec.base_points_per_dim,
                          refinement_limit=spec.refinement_limit,
                          rel_tol=max(rel_tol, 1e-11), breaks=spec.breaks)
    res = linear_integral(integrand, spec)
    target = float(np.asarray(sigma(x[None, :])).ravel()[0])
    return res.value, target, abs(res.value - target)
