"""Exponential curvature energy  Theta_mu(gamma) = int exp(mu * kappa) ds.

Critical curves satisfy

    (exp(mu k))_ss + (k^2 - k/mu + rho) exp(mu k) = 0

with first integral

    d = exp(2 mu k) (mu^4 k_s^2 + (mu k - 1)^2 + rho mu^2).

Library internals always work with mu > 0; :func:`canonical` folds a negative
index onto a positive one by reversing the curve orientation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import DegenerateEnergyError, DomainError, ValidationError

# |1 - 4 rho mu^2| below this counts as the double-root (degenerate) regime
DISCRIMINANT_TOL = 1e-12


@dataclass(frozen=True)
class EnergyProblem:
    mu: float
    rho: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.rho)):
            raise ValidationError("mu and rho must be finite")
        if self.mu == 0:
            raise DegenerateEnergyError(
                "mu = 0 is degenerate to length functional; critical curves are geodesics"
            )

    @property
    def discriminant(self) -> float:
        """1 - 4 rho mu^2; its sign selects the phase-plane regime."""
        return 1.0 - 4.0 * self.rho * self.mu**2

    @property
    def regime(self) -> str:
        disc = self.discriminant
        if abs(disc) <= DISCRIMINANT_TOL:
            return "degenerate"
        return "two-points" if disc > 0 else "none"


class CurvatureState(NamedTuple):
    kappa: float
    kappa_s: float = 0.0
    kappa_ss: float | None = None


class ConstantKind(str, Enum):
    GEODESIC = "Geodesic"
    CIRCLE = "Circle"
    PARALLEL = "Parallel"
    HYPERCYCLE = "Hypercycle"


class ConstantSolution(NamedTuple):
    kappa0: float
    kind: ConstantKind


class PrincipalCurvatures(NamedTuple):
    k1: float
    k2: float


def reverse_orientation(prob: EnergyProblem) -> EnergyProblem:
    """Index of the reversed curve: kappa~(s) = -kappa(-s) is critical for -mu."""
    return EnergyProblem(-prob.mu, prob.rho)


def canonical(prob: EnergyProblem) -> tuple[EnergyProblem, bool]:
    """Return the mu > 0 problem plus whether the orientation was flipped."""
    if prob.mu > 0:
        return prob, False
    return reverse_orientation(prob), True


def dilate(prob: EnergyProblem, lam: float) -> EnergyProblem:
    """Euclidean dilation by ``lam`` maps critical curves of mu to those of lam*mu (same d)."""
    if prob.rho != 0:
        raise DomainError("dilations are only similarities of the Euclidean plane (rho = 0)")
    if not lam > 0:
        raise DomainError(f"dilation ratio must be positive, got {lam!r}")
    return EnergyProblem(prob.mu * lam, 0.0)


def el_residual(state: CurvatureState, prob: EnergyProblem) -> float:
    if state.kappa_ss is None:
        raise ValidationError("el_residual needs kappa_ss")
    mu, rho = prob.mu, prob.rho
    k, ks, kss = state.kappa, state.kappa_s, state.kappa_ss
    return math.exp(mu * k) * (mu * kss + mu**2 * ks**2 + k**2 - k / mu + rho)


def first_integral_level(state: CurvatureState, prob: EnergyProblem):
    mu, rho = prob.mu, prob.rho
    k = np.asarray(state.kappa, dtype=float)
    ks = np.asarray(state.kappa_s, dtype=float)
    out = np.exp(2 * mu * k) * (mu**4 * ks**2 + (mu * k - 1) ** 2 + rho * mu**2)
    return float(out) if out.ndim == 0 else out


def constant_solutions(prob: EnergyProblem) -> list[ConstantSolution]:
    """Constant-curvature critical curves, roots of k^2 - k/mu + rho = 0.

    Returned in increasing curvature order. The smaller root is evaluated in
    the cancellation-free form 2 rho mu / (1 + sqrt(disc)).
    """
    mu, rho = prob.mu, prob.rho
    disc = prob.discriminant
    if prob.regime == "none":
        return []
    if prob.regime == "degenerate":
        k0 = 1.0 / (2.0 * mu)
        # rho > 0 here: one circle of curvature sqrt(rho)
        return [ConstantSolution(k0, ConstantKind.CIRCLE)]
    sq = math.sqrt(disc)
    k_plus = (1.0 + sq) / (2.0 * mu)
    k_minus = 2.0 * rho * mu / (1.0 + sq)
    lo, hi = sorted((k_minus, k_plus))
    if rho == 0:
        return [
            ConstantSolution(lo, ConstantKind.GEODESIC if lo == 0 else ConstantKind.CIRCLE),
            ConstantSolution(hi, ConstantKind.GEODESIC if hi == 0 else ConstantKind.CIRCLE),
        ]
    if rho > 0:
        return [ConstantSolution(lo, ConstantKind.PARALLEL), ConstantSolution(hi, ConstantKind.PARALLEL)]

    def kind(k):
        return ConstantKind.CIRCLE if k * k > -rho else ConstantKind.HYPERCYCLE

    return [ConstantSolution(lo, kind(lo)), ConstantSolution(hi, kind(hi))]


def principal_curvatures_from_profile(kappa, prob: EnergyProblem) -> PrincipalCurvatures:
    """Principal curvatures of the binormal evolution surface along a profile.

    k1 is the meridian curvature -kappa; k2 follows from h22 with
    G = mu exp(mu kappa), which collapses to -kappa + 1/mu.
    """
    k1 = -np.asarray(kappa, dtype=float)
    k2 = k1 + 1.0 / prob.mu
    if k1.ndim == 0:
        return PrincipalCurvatures(float(k1), float(k2))
    return PrincipalCurvatures(k1, k2)


def h22_from_flow(kappa, G, G_ss, rho: float):
    """Second fundamental form coefficient (1/kappa)(G_ss/G + rho)."""
    return (np.asarray(G_ss) / np.asarray(G) + rho) / np.asarray(kappa)


def gauss_codazzi_density(kappa, G, G_ss, rho: float):
    """(1/kappa)(G_ss + G(kappa^2 + rho)); its s-derivative must equal kappa_s * G."""
    kappa = np.asarray(kappa)
    return (np.asarray(G_ss) + np.asarray(G) * (kappa**2 + rho)) / kappa


# -- finite-difference helpers --------------------------------------------------

_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


def central_diff(f: np.ndarray, h: float, order: int) -> np.ndarray:
    """4th-order central difference of uniformly spaced samples.

    The two samples at each end have no full stencil and come back as NaN.
    """
    f = np.asarray(f, dtype=float)
    w = _D1 if order == 1 else _D2
    out = np.full_like(f, np.nan)
    if f.size >= 5:
        acc = sum(w[k] * f[k : f.size - 4 + k] for k in range(5))
        out[2:-2] = acc / (h if order == 1 else h * h)
    return out


def el_residual_samples(kappa: np.ndarray, h: float, prob: EnergyProblem) -> np.ndarray:
    """Euler-Lagrange residual from uniformly spaced samples.

    Since (exp(mu k))_ss = exp(mu k)(mu k_ss + mu^2 k_s^2), the residual is
    x_ss + (k^2 - k/mu + rho) x with x = exp(mu kappa). Differentiating x
    rather than kappa stays accurate where kappa runs off to -infinity near
    the rotation axis.
    """
    kappa = np.asarray(kappa, dtype=float)
    x = np.exp(prob.mu * kappa)
    x_ss = central_diff(x, h, 2)
    with np.errstate(invalid="ignore"):
        return x_ss + np.where(x > 0, (kappa**2 - kappa / prob.mu + prob.rho) * x, 0.0)
