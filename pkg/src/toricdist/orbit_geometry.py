"""Open-orbit analytic layer: character, moment map, Hessian, peaks, tails.

Everything is a function of the log-coordinates rho (the torus angles are
already averaged out) and is computed in the log domain through the shared
evaluation kernels, so dilation levels N up to ~10^4 stay in range.

The character is k(rho) = sum_beta w_beta e^{<rho, beta>} over the lattice
points of the polytope; its gradient is the moment map (a diffeomorphism
onto the open polytope), its Hessian A(rho) is positive definite and equals
the volume density of the pulled-back Fubini-Study structure.  The convex
exponent f(x, rho) = log k(rho) - <rho, x> controls the localization of the
normalized monomials: b_x(rho) = f(x, rho) - f(x, rho_x) vanishes exactly on
the peak fiber.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .errors import MarginTooSmall, NoConvergence, PointNotInterior
from .polytope import Polytope

__all__ = [
    "WeightSet",
    "PeakData",
    "character_k",
    "f_value",
    "moment_map",
    "hessian_A",
    "invert_moment_map",
    "b_function",
    "peak_data",
    "volume_density",
    "tail_bound",
]


@dataclass(frozen=True)
class WeightSet:
    """Positive squared moduli w_beta indexed by lattice points (log-stored).

    Only |c_beta|^2 enters any downstream formula, so phases are never kept.
    """

    points: np.ndarray  # (D, m) int64
    log_w: np.ndarray   # (D,) float64

    def __post_init__(self):
        self.points.setflags(write=False)
        self.log_w.setflags(write=False)
        object.__setattr__(
            self,
            "_index",
            {tuple(int(x) for x in p): i for i, p in enumerate(self.points)},
        )

    @classmethod
    def unit(cls, P: Polytope) -> "WeightSet":
        return cls(P.lattice_points.copy(), np.zeros(len(P.lattice_points)))

    @classmethod
    def from_dict(cls, mapping) -> "WeightSet":
        pts = np.array(sorted(mapping.keys()), dtype=np.int64)
        w = np.array([mapping[tuple(p)] for p in pts], dtype=np.float64)
        if (w <= 0).any():
            raise ValueError("all weights must be strictly positive")
        return cls(pts, np.log(w))

    def log_for_points(self, pts) -> np.ndarray:
        """Log-weights aligned with the given point rows; raises on a miss."""
        idx = self._index
        try:
            return self.log_w[[idx[tuple(int(x) for x in p)] for p in pts]]
        except KeyError as exc:
            raise KeyError(f"no weight for lattice point {exc}") from exc

    def min_weight(self) -> float:
        return float(np.exp(self.log_w.min()))


@dataclass(frozen=True)
class PeakData:
    """Peak of |phi|^2 over the fiber of an interior point x."""

    x: np.ndarray        # (m,)
    rho: np.ndarray      # (m,) rho_x, moment-map preimage of x
    A: np.ndarray        # (m, m) Hessian of log k at rho_x
    det_A: float
    c: float             # 1 / sqrt(det A)
    f_peak: float        # f(x, rho_x)

    def __post_init__(self):
        for arr in (self.x, self.rho, self.A):
            arr.setflags(write=False)


def _aligned(P: Polytope, w: WeightSet) -> tuple[np.ndarray, np.ndarray]:
    if len(w.points) != len(P.lattice_points):
        raise ValueError(
            f"weight set has {len(w.points)} points, polytope has "
            f"{len(P.lattice_points)} lattice points"
        )
    return P.lattice_points.astype(np.float64), w.log_for_points(P.lattice_points)


def _rows(rho, m):
    rho = np.asarray(rho, dtype=np.float64)
    single = rho.ndim == 1
    return np.atleast_2d(rho), single


def character_k(P: Polytope, w: WeightSet, rho):
    """log k(rho); vectorized over rows of rho."""
    B, lw = _aligned(P, w)
    R, single = _rows(rho, P.dim)
    out = kernels.orbit_logk(R, B, lw)
    return float(out[0]) if single else out


def f_value(P: Polytope, w: WeightSet, x, rho):
    """f(x, rho) = log k(rho) - <rho, x>; convex in rho, finite for any x in P."""
    x = np.asarray(x, dtype=np.float64)
    R, single = _rows(rho, P.dim)
    out = character_k(P, w, R) - R @ x
    return float(out[0]) if single else out


def moment_map(P: Polytope, w: WeightSet, rho):
    """Weighted average of lattice points; lies in the open polytope."""
    B, lw = _aligned(P, w)
    R, single = _rows(rho, P.dim)
    _, mu = kernels.orbit_moments(R, B, lw)
    return mu[0] if single else mu


def hessian_A(P: Polytope, w: WeightSet, rho):
    """A(rho) = Hess log k = sum k_beta beta x beta - mu x mu (positive definite)."""
    B, lw = _aligned(P, w)
    R, single = _rows(rho, P.dim)
    _, _, hess = kernels.orbit_hessian(R, B, lw)
    return hess[0] if single else hess


def volume_density(P: Polytope, w: WeightSet, rho):
    """det A(rho): the density of the pushforward of the volume to rho-space."""
    A = hessian_A(P, w, rho)
    return float(np.linalg.det(A)) if A.ndim == 2 else np.linalg.det(A)


def newton_minimize(value_grad_hess, rho0, *, tol=1e-12, max_iter=100,
                    what="newton"):
    """Damped Newton with Armijo backtracking for smooth convex objectives.

    ``value_grad_hess(rho) -> (f, grad, hess)``; stops when |grad| <= tol.
    """
    rho = np.asarray(rho0, dtype=np.float64).copy()
    if rho.size == 0:
        return rho
    f, g, H = value_grad_hess(rho)
    for _ in range(max_iter):
        gnorm = float(np.linalg.norm(g))
        if gnorm <= tol:
            return rho
        step = np.linalg.solve(H, -g)
        slope = float(g @ step)
        # rounding slack keeps the Armijo test meaningful once f-progress
        # falls below double resolution near the minimum
        slack = 8.0 * np.finfo(float).eps * max(1.0, abs(f))
        tstep = 1.0
        for _ in range(60):
            cand = rho + tstep * step
            fc, gc, Hc = value_grad_hess(cand)
            if fc <= f + 1e-4 * tstep * slope + slack:
                rho, f, g, H = cand, fc, gc, Hc
                break
            tstep *= 0.5
        else:
            raise NoConvergence(what, max_iter, gnorm)
    gnorm = float(np.linalg.norm(g))
    if gnorm <= tol:
        return rho
    raise NoConvergence(what, max_iter, gnorm)


def invert_moment_map(P: Polytope, w: WeightSet, x, *, tol=1e-12,
                      max_iter=100) -> np.ndarray:
    """rho_x with moment_map(rho_x) = x, for x strictly inside the polytope.

    Newton on the convex exponent f(x, .); the gradient is exactly
    moment_map(rho) - x, so the stopping rule bounds the moment residual.
    """
    x = np.asarray(x, dtype=np.float64)
    if np.min(P.slacks(x)) <= 0:
        raise PointNotInterior(
            f"point {tuple(x)} is not strictly inside the polytope"
        )
    B, lw = _aligned(P, w)

    def vgh(rho):
        logk, mu, H = kernels.orbit_hessian(rho[None, :], B, lw)
        return float(logk[0]) - float(rho @ x), mu[0] - x, H[0]

    return newton_minimize(vgh, np.zeros(P.dim), tol=tol, max_iter=max_iter,
                           what="moment-map inversion")


def peak_data(P: Polytope, w: WeightSet, x, *, tol=1e-12) -> PeakData:
    """Bundle rho_x, A(P, x), det A, c(P, x) = 1/sqrt(det A), f(x, rho_x)."""
    x = np.asarray(x, dtype=np.float64)
    rho = invert_moment_map(P, w, x, tol=tol)
    A = hessian_A(P, w, rho)
    det_A = float(np.linalg.det(A))
    return PeakData(x=x, rho=rho, A=A, det_A=det_A, c=1.0 / np.sqrt(det_A),
                    f_peak=f_value(P, w, x, rho))


def b_function(P: Polytope, w: WeightSet, peak: PeakData, rho):
    """b_x(rho) = f(x, rho) - f(x, rho_x) >= 0, zero exactly at rho_x."""
    return f_value(P, w, peak.x, rho) - peak.f_peak


def _unit_directions(m: int, n_azimuth: int = 360, n_polar: int = 64):
    if m == 1:
        return np.array([[1.0], [-1.0]])
    if m == 2:
        th = np.linspace(0.0, 2 * np.pi, n_azimuth, endpoint=False)
        return np.column_stack([np.cos(th), np.sin(th)])
    if m == 3:
        th = np.linspace(0.0, 2 * np.pi, n_polar, endpoint=False)
        ph = np.linspace(0.0, np.pi, n_polar)
        T, Ph = np.meshgrid(th, ph, indexing="ij")
        return np.column_stack([
            (np.sin(Ph) * np.cos(T)).ravel(),
            (np.sin(Ph) * np.sin(T)).ravel(),
            np.cos(Ph).ravel(),
        ])
    raise ValueError("direction grids implemented for dim <= 3")


def tail_bound(P: Polytope, w: WeightSet, K) -> tuple[float, float]:
    """(M_K, c0) with e^{f(x, rho)} >= c0 e^{|rho| M_K} for x in K.

    M_K = min over x in K and unit directions of max_beta <dir, beta - x>,
    estimated on a direction grid; c0 = min_beta w_beta.  Raises
    :class:`MarginTooSmall` when K is not separated from the boundary.
    """
    K = np.atleast_2d(np.asarray(K, dtype=np.float64))
    dirs = _unit_directions(P.dim)
    B = P.lattice_points.astype(np.float64)
    # inner max over lattice points, outer min over (x, direction)
    proj = dirs @ B.T                       # (n_dirs, D)
    offs = dirs @ K.T                       # (n_dirs, n_x)
    M = float((proj.max(axis=1)[:, None] - offs).min())
    if M <= 1e-12:
        raise MarginTooSmall(
            f"directional margin {M:.3e} is not positive; move K off the boundary"
        )
    return M, w.min_weight()
