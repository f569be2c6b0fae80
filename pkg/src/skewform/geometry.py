"""Models of the 2-space forms M^2(rho) inside affine 3-space.

    rho = 0   the plane x3 = 0
    rho > 0   the sphere  x1^2 + x2^2 + x3^2 = 1/rho
    rho < 0   the sheet   x1^2 + x2^2 - x3^2 = 1/rho, x3 > 0 (Lorentzian metric)

The two distinguished geodesics are alpha = {x2 = 0} (symmetry axis of every
profile curve) and beta = {x1 = 0} (the rotation axis).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError

# relative slack allowed on d - rho*u^2 < 0 before the sphere chart rejects u
_CHART_SLACK = 1e-12


@dataclass(frozen=True)
class SpaceForm:
    rho: float

    def __post_init__(self):
        if not math.isfinite(self.rho):
            raise ValidationError(f"curvature must be finite, got {self.rho!r}")

    @property
    def model(self) -> str:
        if self.rho == 0:
            return "plane"
        return "sphere-quadric" if self.rho > 0 else "hyperboloid-sheet"

    def residual(self, p) -> float | np.ndarray:
        return model_residual(p, self.rho)

    def pole(self) -> np.ndarray:
        """Centre of the (u, v) polar chart on the sphere, (1/sqrt(rho), 0, 0)."""
        if self.rho <= 0:
            raise DomainError("only the sphere model has a chart pole")
        return np.array([1.0 / math.sqrt(self.rho), 0.0, 0.0])


def _check_d(d: float) -> None:
    if not d > 0:
        raise DomainError(f"level d must be positive, got {d!r}")


def _radial_factor(u, rho: float, d: float):
    """sqrt(d - rho*u^2), clamping tiny negative round-off on the sphere."""
    w = d - rho * np.square(u)
    if rho > 0:
        bad = w < -_CHART_SLACK * d
        if np.any(bad):
            raise DomainError(
                f"point outside the sphere chart: rho*u^2 > d (d={d!r}, rho={rho!r})"
            )
        w = np.maximum(w, 0.0)
    return np.sqrt(w)


def embed_phi(u, v, rho: float, d: float) -> np.ndarray:
    """Evaluate the chart Phi(u, v) into the model of M^2(rho).

    Accepts scalars or equal-length arrays; the last axis of the result holds
    the three model coordinates. Negative ``u`` gives the mirror image across
    beta, which is how reflected profile halves are embedded.
    """
    _check_d(d)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if rho == 0:
        sd = math.sqrt(d)
        out = np.stack(np.broadcast_arrays(u / sd, d * v / sd, np.zeros_like(u * v)), axis=-1)
        return out
    r = _radial_factor(u, rho, d)
    scale = 1.0 / math.sqrt(abs(rho) * d)
    ang = math.sqrt(abs(rho) * d) * v
    if rho > 0:
        s, c = np.sin(ang), np.cos(ang)
    else:
        s, c = np.sinh(ang), np.cosh(ang)
    first = math.sqrt(abs(rho)) * u
    return scale * np.stack(np.broadcast_arrays(first, r * s, r * c), axis=-1)


def embed_phi_tangent(u, v, du, dv, rho: float, d: float) -> np.ndarray:
    """Differential of Phi applied to (du, dv); used for tangent directions."""
    _check_d(d)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if rho == 0:
        sd = math.sqrt(d)
        zero = np.zeros_like(u * v)
        return np.stack(np.broadcast_arrays(du / sd, d * dv / sd, zero), axis=-1)
    k = math.sqrt(abs(rho) * d)
    r = _radial_factor(u, rho, d)
    ang = k * v
    if rho > 0:
        s, c = np.sin(ang), np.cos(ang)
        ds_, dc_ = c, -s
    else:
        s, c = np.sinh(ang), np.cosh(ang)
        ds_, dc_ = c, s
    with np.errstate(divide="ignore", invalid="ignore"):
        dr = np.where(r > 0, -rho * u / r, 0.0)
    first = math.sqrt(abs(rho)) * np.asarray(du, dtype=float)
    second = dr * du * s + r * ds_ * k * dv
    third = dr * du * c + r * dc_ * k * dv
    return np.stack(np.broadcast_arrays(first, second, third), axis=-1) / k


def quadratic_form(p, rho: float):
    """Ambient form restricted to the model: Euclidean for rho >= 0, Lorentz for rho < 0.

    Works for 3-vectors and for the 4-vectors used by surfaces, whose extra
    coordinate is positive definite and comes first.
    """
    p = np.asarray(p, dtype=float)
    if rho < 0:
        return np.sum(np.square(p[..., :-1]), axis=-1) - np.square(p[..., -1])
    return np.sum(np.square(p), axis=-1)


def model_residual(p, rho: float):
    """Distance of ``p`` from the model constraint of M(rho)."""
    p = np.asarray(p, dtype=float)
    if rho == 0:
        return np.abs(p[..., -1])
    return np.abs(quadratic_form(p, rho) - 1.0 / rho)


def model_tolerance(rho: float) -> float:
    return 1e-12 * max(1.0, 1.0 / abs(rho)) if rho != 0 else 1e-12


def on_alpha(p, tol: float = 1e-12):
    """True where p lies on the geodesic alpha = {x2 = 0}."""
    return np.abs(np.asarray(p)[..., 1]) <= tol


def on_beta(p, tol: float = 1e-12):
    """True where p lies on the rotation axis beta = {x1 = 0}."""
    return np.abs(np.asarray(p)[..., 0]) <= tol
