"""Closed-form ground truth for the scaled simplex with multinomial weights.

With weights w_alpha = multinomial(p, alpha) the character collapses to
(1 + sum e^{rho_j})^p, the moment map scales linearly, and every L^q norm of
a normalized monomial is a ratio of Gamma functions.  These formulas are the
oracle that the quadrature pipeline is validated against; everything is
evaluated in log-Gamma arithmetic so dilation levels in the hundreds stay
exact to rounding.

Index bookkeeping: alpha_hat = (p - |alpha|, alpha_1, ..., alpha_m) is the
homogenization; J indexes its nonzero entries, r = m + 1 - #J counts the
vanishing ones (= the codimension of the face carrying alpha), and the
scaling exponent is d = m + r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .orbit_geometry import WeightSet
from .polytope import Polytope, standard_simplex

__all__ = [
    "HomogenizedIndex",
    "homogenize",
    "binomial_weights",
    "simplex_setup",
    "log_multinomial",
    "log_norm_sq_closed",
    "lq_norm_exact",
    "log_lq_norm_exact",
    "log_lq_norm_weight",
    "stirling_asymptotics",
    "detA_closed_form",
    "b_closed_form",
    "gaussian_profile",
]


@dataclass(frozen=True)
class HomogenizedIndex:
    """alpha_hat with its support bookkeeping."""

    alpha_hat: tuple[int, ...]
    J: tuple[int, ...]   # indices of nonzero entries of alpha_hat
    r: int               # m + 1 - #J, codim of the carrying face
    d: int               # m + r

    @property
    def support_product(self) -> float:
        return float(np.prod([self.alpha_hat[j] for j in self.J]))


def homogenize(p: int, alpha) -> HomogenizedIndex:
    alpha = np.asarray(alpha, dtype=np.int64)
    m = len(alpha)
    total = int(alpha.sum())
    if total > p or (alpha < 0).any():
        raise ValueError(f"{tuple(alpha)} is not in {p}*simplex")
    hat = (p - total, *tuple(int(a) for a in alpha))
    J = tuple(j for j, a in enumerate(hat) if a != 0)
    r = m + 1 - len(J)
    return HomogenizedIndex(hat, J, r, m + r)


def log_multinomial(p: int, alpha) -> float:
    """log of p! / ((p - |alpha|)! alpha_1! ... alpha_m!)."""
    hat = homogenize(p, alpha).alpha_hat
    return float(gammaln(p + 1) - sum(gammaln(a + 1) for a in hat))


def binomial_weights(p: int, m: int) -> WeightSet:
    """Multinomial weights on the lattice points of p*simplex in R^m."""
    P = standard_simplex(m, p)
    log_w = np.array([log_multinomial(p, a) for a in P.lattice_points])
    return WeightSet(P.lattice_points.copy(), log_w)


def simplex_setup(p: int, m: int) -> tuple[Polytope, WeightSet]:
    """(p*simplex, multinomial weights) ready for the generic pipeline."""
    return standard_simplex(m, p), binomial_weights(p, m)


# ---------------------------------------------------------------------------
# exact norms
# ---------------------------------------------------------------------------

def log_norm_sq_closed(p: int, m: int, N: int, gamma) -> float:
    """log ||chi_gamma||^2 at level N: p^m * gamma_hat! / (Np + m)!.

    gamma is any weight in N*p*simplex; gamma_hat = (Np - |gamma|, gamma).
    """
    gamma = np.asarray(gamma, dtype=np.int64)
    total = int(gamma.sum())
    if total > N * p or (gamma < 0).any():
        raise ValueError("gamma outside the dilated simplex")
    hat = (N * p - total, *tuple(int(g) for g in gamma))
    return float(m * math.log(p) + sum(gammaln(h + 1) for h in hat)
                 - gammaln(N * p + m + 1))


def log_lq_norm_weight(p: int, m: int, N: int, gamma, q: float) -> float:
    """log ||phi_gamma||_q^q for any weight gamma in N*p*simplex.

    Homogenizes at level N: lambda = (Np - |gamma|, gamma), |lambda| = Np.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    gamma = np.asarray(gamma, dtype=np.int64)
    total = int(gamma.sum())
    if total > N * p or (gamma < 0).any():
        raise ValueError("gamma outside the dilated simplex")
    lam = (N * p - total, *tuple(int(g) for g in gamma))
    log_chi_sq = log_norm_sq_closed(p, m, N, gamma)
    log_chi_q = float(m * math.log(p)
                      + sum(gammaln(q * h / 2.0 + 1.0) for h in lam)
                      - gammaln(N * p * q / 2.0 + m + 1.0))
    return log_chi_q - (q / 2.0) * log_chi_sq


def log_lq_norm_exact(p: int, m: int, N: int, alpha, q: float) -> float:
    """log ||phi_{N alpha}||_q^q via the Gamma-ratio formula (any real q >= 1)."""
    return log_lq_norm_weight(p, m, N, N * np.asarray(alpha, dtype=np.int64), q)


def lq_norm_exact(p: int, m: int, N: int, alpha, q: float) -> float:
    """||phi_{N alpha}||_q^q, exact up to rounding."""
    return math.exp(log_lq_norm_exact(p, m, N, alpha, q))


def stirling_asymptotics(p: int, m: int, alpha, q: float, N: int
                         ) -> tuple[float, float]:
    """(prediction for ||phi||_q^{2q}, prediction for ||phi||_inf^2).

    Large-N laws: the q-norm power behaves like
    (N/2pi)^{(q/2-1)d} p^{q/2-1} (2pi)^{r(q-2)} / ((q/2)^d (prod_J alpha_hat)^{q/2-1})
    and the squared sup norm like
    (2pi)^r (p / prod_J alpha_hat)^{1/2} (N/2pi)^{d/2}.
    """
    h = homogenize(p, alpha)
    prod_j = h.support_product
    norm2q = ((N / (2 * math.pi)) ** ((q / 2.0 - 1.0) * h.d)
              * p ** (q / 2.0 - 1.0) * (2 * math.pi) ** (h.r * (q - 2.0))
              / ((q / 2.0) ** h.d * prod_j ** (q / 2.0 - 1.0)))
    sup2 = ((2 * math.pi) ** h.r * math.sqrt(p / prod_j)
            * (N / (2 * math.pi)) ** (h.d / 2.0))
    return norm2q, sup2


# ---------------------------------------------------------------------------
# interior closed forms
# ---------------------------------------------------------------------------

def detA_closed_form(p: int, alpha) -> float:
    """det A(p*simplex, alpha) = (p - |alpha|) alpha_1 ... alpha_m / p."""
    alpha = np.asarray(alpha, dtype=np.int64)
    total = int(alpha.sum())
    if total >= p or (alpha <= 0).any():
        raise ValueError("closed form requires an interior lattice point")
    return float((p - total) * np.prod(alpha.astype(np.float64)) / p)


def b_closed_form(p: int, m: int, alpha, z_moduli) -> float:
    """Localization exponent at |z_j| given: p log(1+|z|^2) - log|z^alpha|^2
    + <alpha_hat, log alpha_hat> - p log p (interior alpha only)."""
    alpha = np.asarray(alpha, dtype=np.float64)
    z = np.asarray(z_moduli, dtype=np.float64)
    if (z <= 0).any():
        raise ValueError("moduli must be positive")
    hat = np.asarray(homogenize(p, alpha.astype(np.int64)).alpha_hat, dtype=np.float64)
    if (hat == 0).any():
        raise ValueError("closed form requires an interior lattice point")
    z2 = z * z
    return float(p * math.log1p(z2.sum()) - (alpha * np.log(z2)).sum()
                 + (hat * np.log(hat)).sum() - p * math.log(p))


def gaussian_profile(p: int, alpha, N: int, u) -> float:
    """Peak-zoom prediction at z = e^{(rho_alpha + u/sqrt N)/2}.

    (N/2pi)^{m/2} sqrt(p) e^{-(<Delta(alpha) u, u> - <alpha, u>^2 / p)/2}
    / sqrt((p - |alpha|) prod alpha).
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    m = len(alpha)
    total = alpha.sum()
    if total >= p or (alpha <= 0).any():
        raise ValueError("profile requires an interior lattice point")
    quad = float((alpha * u * u).sum() - (alpha @ u) ** 2 / p)
    pref = ((N / (2 * math.pi)) ** (m / 2.0) * math.sqrt(p)
            / math.sqrt((p - total) * np.prod(alpha)))
    return pref * math.exp(-0.5 * quad)
