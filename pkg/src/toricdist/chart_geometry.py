"""Boundary-chart analytics at lattice points of faces.

In the unimodular chart of :func:`toricdist.polytope.build_vertex_chart` the
weighted character becomes K(xi, rho) = sum over transformed lattice points
(mu, nu) of a * |xi^mu|^2 * e^{<rho, nu>}, where the first r coordinates are
squared moduli t_j = |xi_j| and the last m - r stay exponential.  This module
provides K, the face character k_F and face moment map mu_F with its Newton
inverse, the quadratic coefficients f_k, the localization exponent
Psi = s - s(peak) with s(xi, rho) = log K - <rho, alpha~>, the block Hessian
at the peak, and the chart volume density L (a scaled covariance
determinant, finite down to t = 0).

All peak quantities are assembled uniformly for 0 <= r <= m; r = 0 is the
open orbit in transformed coordinates and r = m the vertex case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .errors import EmptyFaceLattice, NotAVertex, ToricDistError
from .orbit_geometry import WeightSet, newton_minimize
from .polytope import VertexChart

__all__ = [
    "ChartPoint",
    "ChartPeakData",
    "chart_log_weights",
    "chart_log_K",
    "face_character_and_moment",
    "invert_face_moment",
    "f_k_values",
    "ell_F",
    "s_value",
    "s_and_Psi",
    "chart_peak",
    "vertex_peak",
    "L_density",
    "assemble_Hs",
]


@dataclass(frozen=True)
class ChartPoint:
    """Moduli of the first r chart coordinates plus log-coordinates of the rest."""

    t: np.ndarray    # (r,) >= 0
    rho: np.ndarray  # (m - r,)

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.t, dtype=np.float64))
        rho = np.atleast_1d(np.asarray(self.rho, dtype=np.float64)) \
            if np.asarray(self.rho).size else np.zeros(0)
        if (t < 0).any():
            raise ValueError("chart moduli must be nonnegative")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "rho", rho)
        t.setflags(write=False)
        rho.setflags(write=False)


@dataclass(frozen=True)
class ChartPeakData:
    """All peak quantities of the exponent s on a chart (any 0 <= r <= m)."""

    alpha_tilde: np.ndarray  # (m - r,)
    rho_F: np.ndarray        # (m - r,)
    A_F: np.ndarray          # (m - r, m - r)
    det_A_F: float
    f_k: np.ndarray          # (r,) f_k(rho_F) > 0
    log_kF_peak: float
    det_Hs: float
    L0: float                # chart density at (0, rho_F)
    c: float                 # sup-norm / distribution constant c(P, alpha)
    s_peak: float            # s(0, rho_F)
    r: int
    det_Hs_residual: float   # closed form vs direct determinant
    L0_residual: float       # closed form vs density kernel

    def __post_init__(self):
        for arr in (self.alpha_tilde, self.rho_F, self.A_F, self.f_k):
            arr.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.r + len(self.rho_F)


# ---------------------------------------------------------------------------
# splitting and weights
# ---------------------------------------------------------------------------

def chart_log_weights(chart: VertexChart, w: WeightSet) -> np.ndarray:
    """Log-weights transported to the chart, parallel to chart.Q_points."""
    return w.log_for_points(chart.source_points)


def _split(chart: VertexChart):
    r = chart.split_r
    Q = chart.Q_points
    return (np.ascontiguousarray(Q[:, :r], dtype=np.int64),
            np.ascontiguousarray(Q[:, r:], dtype=np.float64))


def _face_rows(chart: VertexChart):
    mu, _ = _split(chart)
    return np.all(mu == 0, axis=1)


def _pt_rows(t, rho, r, mr):
    t = np.asarray(t, dtype=np.float64)
    rho = np.asarray(rho, dtype=np.float64)
    single = (t.ndim <= 1) and (rho.ndim <= 1)
    if r:
        t2 = t.reshape(-1, r)
        rho2 = rho.reshape(-1, mr) if mr else np.zeros((t2.shape[0], 0))
    else:
        rho2 = rho.reshape(-1, mr)
        t2 = np.zeros((rho2.shape[0], 0))
    return t2, rho2, single


# ---------------------------------------------------------------------------
# characters, moments, densities
# ---------------------------------------------------------------------------

def chart_log_K(chart: VertexChart, log_a, t, rho):
    """log K(t, rho); vectorized over rows."""
    mu, nu = _split(chart)
    t2, rho2, single = _pt_rows(t, rho, mu.shape[1], nu.shape[1])
    out = kernels.chart_logk(t2, rho2, log_a, mu, nu)
    return float(out[0]) if single else out


def face_character_and_moment(chart: VertexChart, log_a, rho):
    """(log k_F, mu_F, A_F) of the face character at rho (batched)."""
    mu, nu = _split(chart)
    rows = _face_rows(chart)
    nu_face = nu[rows]
    mr = nu.shape[1]
    if mr == 0:
        raise EmptyFaceLattice("zero-dimensional face has no moment map")
    if len(nu_face) < mr + 1 or np.linalg.matrix_rank(nu_face[1:] - nu_face[0]) < mr:
        raise EmptyFaceLattice("face lattice does not span the face")
    la = np.asarray(log_a)[rows]
    R = np.atleast_2d(np.asarray(rho, dtype=np.float64))
    single = np.asarray(rho).ndim == 1
    logk, muF, AF = kernels.orbit_hessian(R.reshape(-1, mr), nu_face, la)
    if single:
        return float(logk[0]), muF[0], AF[0]
    return logk, muF, AF


def invert_face_moment(chart: VertexChart, log_a, alpha_tilde, *, tol=1e-12,
                       max_iter=100) -> np.ndarray:
    """rho with mu_F(rho) = alpha_tilde, by damped Newton on the face exponent."""
    mu, nu = _split(chart)
    mr = nu.shape[1]
    if mr == 0:
        return np.zeros(0)
    alpha_tilde = np.asarray(alpha_tilde, dtype=np.float64)
    rows = _face_rows(chart)
    nu_face = nu[rows]
    la = np.asarray(log_a)[rows]

    def vgh(rho):
        logk, muF, AF = kernels.orbit_hessian(rho[None, :], nu_face, la)
        return (float(logk[0]) - float(rho @ alpha_tilde),
                muF[0] - alpha_tilde, AF[0])

    return newton_minimize(vgh, np.zeros(mr), tol=tol, max_iter=max_iter,
                           what="face moment inversion")


def f_k_values(chart: VertexChart, log_a, rho) -> np.ndarray:
    """The r quadratic coefficients f_k(rho) = sum over (e_k, nu) terms."""
    mu, nu = _split(chart)
    r = mu.shape[1]
    la = np.asarray(log_a)
    rho = np.asarray(rho, dtype=np.float64).reshape(nu.shape[1])
    out = np.empty(r)
    for k in range(r):
        rows = (mu[:, k] == 1) & np.all(np.delete(mu, k, axis=1) == 0, axis=1)
        ex = la[rows] + nu[rows] @ rho
        shift = ex.max()
        out[k] = np.exp(shift) * np.exp(ex - shift).sum()
    return out


def ell_F(chart: VertexChart, log_a, t, rho):
    """K - k_F, the off-face part of the character (cancellation-safe)."""
    mu, nu = _split(chart)
    rows = _face_rows(chart)
    la = np.asarray(log_a)
    t2, rho2, single = _pt_rows(t, rho, mu.shape[1], nu.shape[1])
    logK = kernels.chart_logk(t2, rho2, la, mu, nu)
    if nu.shape[1]:
        logkF = kernels.orbit_logk(rho2, nu[rows], la[rows])
    else:
        shift = la[rows].max()
        logkF = np.full(t2.shape[0], shift + np.log(np.exp(la[rows] - shift).sum()))
    out = np.exp(logkF) * np.expm1(logK - logkF)
    return float(out[0]) if single else out


def s_value(chart: VertexChart, log_a, alpha_tilde, t, rho):
    """s(t, rho) = log K - <rho, alpha~>."""
    alpha_tilde = np.asarray(alpha_tilde, dtype=np.float64)
    mu, nu = _split(chart)
    t2, rho2, single = _pt_rows(t, rho, mu.shape[1], nu.shape[1])
    out = kernels.chart_logk(t2, rho2, log_a, mu, nu) - rho2 @ alpha_tilde
    return float(out[0]) if single else out


def s_and_Psi(chart: VertexChart, log_a, peak: ChartPeakData, pt: ChartPoint
              ) -> tuple[float, float]:
    """(s, Psi) at a chart point; Psi >= 0 with equality only at the peak."""
    s = s_value(chart, log_a, peak.alpha_tilde, pt.t, pt.rho)
    return s, s - peak.s_peak


def L_density(chart: VertexChart, log_a, t, rho):
    """Chart volume density L(t, rho) (det of the scaled mixed Hessian)."""
    mu, nu = _split(chart)
    t2, rho2, single = _pt_rows(t, rho, mu.shape[1], nu.shape[1])
    _, cmat = kernels.chart_density(t2, rho2, log_a, mu, nu)
    L = np.linalg.det(cmat)
    return float(L[0]) if single else L


def assemble_Hs(peak: ChartPeakData) -> np.ndarray:
    """Block Hessian of s at the peak in coordinates (x_j, y_j, rho)."""
    r = peak.r
    mr = len(peak.rho_F)
    n = 2 * r + mr
    H = np.zeros((n, n))
    diag = 2.0 * peak.f_k * np.exp(-peak.log_kF_peak)
    for j in range(r):
        H[j, j] = diag[j]
        H[r + j, r + j] = diag[j]
    H[2 * r:, 2 * r:] = peak.A_F
    return H


# ---------------------------------------------------------------------------
# peak assembly
# ---------------------------------------------------------------------------

def chart_peak_from_tilde(chart: VertexChart, log_a, alpha_tilde,
                          *, tol=1e-12) -> ChartPeakData:
    """Assemble peak data for a (possibly rational) face-interior target."""
    mu, nu = _split(chart)
    r = chart.split_r
    m = chart.dim
    log_a = np.asarray(log_a, dtype=np.float64)
    alpha_tilde = np.asarray(alpha_tilde, dtype=np.float64).reshape(m - r)

    rho_F = invert_face_moment(chart, log_a, alpha_tilde, tol=tol)
    if m - r:
        log_kF, _, A_F = face_character_and_moment(chart, log_a, rho_F)
        det_A_F = float(np.linalg.det(A_F))
    else:
        rows = _face_rows(chart)
        la = log_a[rows]
        shift = la.max()
        log_kF = float(shift + np.log(np.exp(la - shift).sum()))
        A_F = np.zeros((0, 0))
        det_A_F = 1.0
    f_k = f_k_values(chart, log_a, rho_F) if r else np.zeros(0)
    kF = np.exp(log_kF)

    det_Hs = det_A_F / kF ** (2 * r) * float(np.prod(2.0 * f_k)) ** 2
    L0 = det_A_F / kF ** r * float(np.prod(f_k))
    s_peak = s_value(chart, log_a, alpha_tilde, np.zeros(r), rho_F)

    if r == m:
        c = (2.0 * np.pi) ** m * np.exp(-m * log_kF)  # k_F == a_0 at a vertex
    else:
        c = (2.0 * np.pi) ** r / np.sqrt(det_A_F)

    peak = ChartPeakData(
        alpha_tilde=alpha_tilde, rho_F=rho_F, A_F=A_F, det_A_F=det_A_F,
        f_k=f_k, log_kF_peak=float(log_kF), det_Hs=det_Hs, L0=L0, c=float(c),
        s_peak=float(s_peak), r=r, det_Hs_residual=0.0, L0_residual=0.0,
    )
    direct = float(np.linalg.det(assemble_Hs(peak)))
    res_hs = abs(direct - det_Hs) / max(abs(det_Hs), 1e-300)
    L0_direct = L_density(chart, log_a, np.zeros(r), rho_F)
    res_l0 = abs(L0_direct - L0) / max(abs(L0), 1e-300)
    if res_hs > 1e-6 or res_l0 > 1e-6:
        raise ToricDistError(
            f"chart peak identities violated (Hs residual {res_hs:.2e}, "
            f"L0 residual {res_l0:.2e})"
        )
    object.__setattr__(peak, "det_Hs_residual", res_hs)
    object.__setattr__(peak, "L0_residual", res_l0)
    return peak


def chart_peak(chart: VertexChart, log_a, alpha, *, tol=1e-12) -> ChartPeakData:
    """Peak data for a lattice point on the chart's face (codim r <= m - 1)."""
    if chart.split_r >= chart.dim:
        raise NotAVertex("use vertex_peak for the codimension-m case")
    image = chart.transform(np.asarray(alpha, dtype=np.int64))
    if np.any(image[: chart.split_r] != 0):
        raise ToricDistError(
            f"lattice point {tuple(np.asarray(alpha))} is not on the chart's face"
        )
    return chart_peak_from_tilde(chart, log_a, image[chart.split_r:], tol=tol)


def vertex_peak(chart: VertexChart, log_a, alpha, *, tol=1e-12) -> ChartPeakData:
    """Peak data at a vertex (r = m); k_F degenerates to the vertex weight."""
    image = chart.transform(np.asarray(alpha, dtype=np.int64))
    if chart.split_r != chart.dim or np.any(image != 0):
        raise NotAVertex(
            f"{tuple(np.asarray(alpha))} is not the center of a full vertex chart"
        )
    return chart_peak_from_tilde(chart, log_a, np.zeros(0), tol=tol)
