"""Phase plane of the critical-curve equation.

With x = exp(mu kappa) and y = x_s the Euler-Lagrange equation becomes the
autonomous system

    x_s = y
    y_s = -(x / mu^2) (log^2 x - log x + rho mu^2)

whose orbits are the level sets F(x, y) = d of

    F(x, y) = mu^2 y^2 + (log x - 1)^2 x^2 + rho mu^2 x^2.

Every connected piece of a level set is one profile curve (a "branch").
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Literal, NamedTuple

import numpy as np
from scipy.optimize import brentq

from .energy import EnergyProblem
from .errors import DomainError

BranchKind = Literal["axis", "loop", "separatrix-inner", "separatrix-outer"]
BRANCH_KINDS = ("axis", "loop", "separatrix-inner", "separatrix-outer")

# |d - F(x-)| < SEPARATRIX_TOL * max(1, F(x-)) is treated as the separatrix level
SEPARATRIX_TOL = 1e-10
ROOT_RTOL = 1e-13


class PhaseState(NamedTuple):
    x: float
    y: float = 0.0


class StationaryPoint(NamedTuple):
    x_star: float
    type: str  # "Centre" | "Saddle" | "Degenerate"
    eigenvalues: tuple[complex, complex]


@dataclass(frozen=True)
class StationaryAnalysis:
    regime: str  # "two-points" | "degenerate" | "none"
    points: tuple[StationaryPoint, ...]

    @property
    def saddle(self) -> StationaryPoint | None:
        return next((p for p in self.points if p.type == "Saddle"), None)

    @property
    def centre(self) -> StationaryPoint | None:
        return next((p for p in self.points if p.type == "Centre"), None)


class FhatRoot(NamedTuple):
    x: float
    multiplicity: int = 1


@dataclass(frozen=True)
class BranchDescriptor:
    kind: BranchKind
    x0: float
    x_lo: float | None = None

    def __post_init__(self):
        if self.kind not in BRANCH_KINDS:
            raise DomainError(f"unknown branch kind {self.kind!r}")

    @property
    def touches_axis(self) -> bool:
        return self.kind in ("axis", "separatrix-inner")

    def to_dict(self) -> dict:
        return asdict(self)


def F(state: PhaseState, prob: EnergyProblem):
    x = np.asarray(state[0], dtype=float)
    y = np.asarray(state[1], dtype=float)
    out = prob.mu**2 * y**2 + fhat(x, prob)
    return float(out) if out.ndim == 0 else out


def fhat(x, prob: EnergyProblem):
    """F(x, 0) = x^2 ((log x - 1)^2 + rho mu^2), extended by 0 at x = 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("fhat needs x >= 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        L = np.log(x)
        out = np.where(x > 0, x**2 * ((L - 1.0) ** 2 + prob.rho * prob.mu**2), 0.0)
    return float(out) if out.ndim == 0 else out


def vector_field(x, y, prob: EnergyProblem):
    """Right-hand side of the autonomous system."""
    L = np.log(x)
    return y, -(x / prob.mu**2) * (L * L - L + prob.rho * prob.mu**2)


def log_stationary(prob: EnergyProblem) -> tuple[float, float] | None:
    """(log x-, log x+), the roots of t^2 - t + rho mu^2; None without real roots."""
    disc = prob.discriminant
    if prob.regime == "none":
        return None
    if prob.regime == "degenerate":
        return 0.5, 0.5
    sq = math.sqrt(disc)
    # small root in cancellation-free form
    return 2.0 * prob.rho * prob.mu**2 / (1.0 + sq), 0.5 * (1.0 + sq)


def stationary_points(prob: EnergyProblem) -> StationaryAnalysis:
    """Stationary points x± with their linearized type.

    The Jacobian at (x*, 0) is [[0, 1], [-(2 log x* - 1)/mu^2, 0]], and
    2 log x± - 1 = ±sqrt(1 - 4 rho mu^2).
    """
    logs = log_stationary(prob)
    if logs is None:
        return StationaryAnalysis("none", ())
    if prob.regime == "degenerate":
        pt = StationaryPoint(math.exp(0.5), "Degenerate", (0j, 0j))
        return StationaryAnalysis("degenerate", (pt,))
    t_minus, t_plus = logs
    lam2 = math.sqrt(prob.discriminant) / prob.mu**2
    lam = math.sqrt(lam2)
    saddle = StationaryPoint(math.exp(t_minus), "Saddle", (complex(lam, 0), complex(-lam, 0)))
    centre = StationaryPoint(math.exp(t_plus), "Centre", (complex(0, lam), complex(0, -lam)))
    return StationaryAnalysis("two-points", (saddle, centre))


def _upper_bracket(d: float, prob: EnergyProblem, start: float) -> float:
    hi = max(start, math.e * (1.0 + d))
    while fhat(hi, prob) <= d:
        hi *= 2.0
    return hi


def _solve(d: float, prob: EnergyProblem, lo: float, hi: float) -> float:
    return brentq(lambda t: fhat(t, prob) - d, lo, hi, xtol=1e-300, rtol=ROOT_RTOL, maxiter=500)


def separatrix_level(prob: EnergyProblem) -> float | None:
    """F(x-) = x-^2 log x+ when the saddle exists."""
    logs = log_stationary(prob)
    if logs is None or prob.regime == "degenerate":
        return None
    t_minus, t_plus = logs
    return math.exp(2 * t_minus) * t_plus


def centre_level(prob: EnergyProblem) -> float | None:
    logs = log_stationary(prob)
    if logs is None or prob.regime == "degenerate":
        return None
    t_minus, t_plus = logs
    return math.exp(2 * t_plus) * t_minus


def is_separatrix(d: float, prob: EnergyProblem) -> bool:
    lev = separatrix_level(prob)
    return lev is not None and abs(d - lev) < SEPARATRIX_TOL * max(1.0, lev)


def fhat_roots(d: float, prob: EnergyProblem) -> list[FhatRoot]:
    """All solutions of F(x, 0) = d, increasing.

    Double roots (saddle or centre on the level) are reported once with
    multiplicity 2; the degenerate inflection point gets multiplicity 3.
    """
    if not d > 0:
        raise DomainError(f"level d must be positive, got {d!r}")
    st = stationary_points(prob)
    if st.regime != "two-points":
        if st.regime == "degenerate":
            xs = st.points[0].x_star
            lev = fhat(xs, prob)
            if abs(d - lev) < SEPARATRIX_TOL * max(1.0, lev):
                return [FhatRoot(xs, 3)]
        hi = _upper_bracket(d, prob, 1.0)
        return [FhatRoot(_solve(d, prob, 0.0, hi))]

    xm, xp = st.saddle.x_star, st.centre.x_star
    f_minus, f_plus = separatrix_level(prob), centre_level(prob)
    tol_m = SEPARATRIX_TOL * max(1.0, abs(f_minus))
    tol_p = SEPARATRIX_TOL * max(1.0, abs(f_plus))
    roots: list[FhatRoot] = []
    # (0, x-): increasing from 0 to F(x-)
    if abs(d - f_minus) < tol_m:
        roots.append(FhatRoot(xm, 2))
    elif d < f_minus:
        roots.append(FhatRoot(_solve(d, prob, 0.0, xm)))
    # (x-, x+): decreasing from F(x-) to F(x+)
    if abs(d - f_plus) < tol_p:
        roots.append(FhatRoot(xp, 2))
    elif f_plus < d < f_minus and abs(d - f_minus) >= tol_m:
        roots.append(FhatRoot(_solve(d, prob, xm, xp)))
    # (x+, inf): increasing from F(x+)
    if d > f_plus and abs(d - f_plus) >= tol_p:
        hi = _upper_bracket(d, prob, 2.0 * xp)
        roots.append(FhatRoot(_solve(d, prob, xp, hi)))
    return roots


def components(d: float, prob: EnergyProblem) -> list[BranchDescriptor]:
    """Connected pieces of the level set F = d, ordered by x0.

    A centre lying on the level is a constant-curvature solution and is not
    reported as a branch.
    """
    roots = fhat_roots(d, prob)
    simple = [r.x for r in roots if r.multiplicity == 1]
    double = [r for r in roots if r.multiplicity > 1]
    if double and double[0].multiplicity == 3:
        return [BranchDescriptor("separatrix-inner", double[0].x)]
    st = stationary_points(prob)
    if double and st.saddle is not None and double[0].x == st.saddle.x_star:
        xm = st.saddle.x_star
        return [
            BranchDescriptor("separatrix-inner", xm),
            BranchDescriptor("separatrix-outer", simple[-1], xm),
        ]
    if len(simple) == 3:
        return [BranchDescriptor("axis", simple[0]), BranchDescriptor("loop", simple[2], simple[1])]
    return [BranchDescriptor("axis", simple[0])]


def find_branch(d: float, prob: EnergyProblem, kind: str) -> BranchDescriptor:
    for b in components(d, prob):
        if b.kind == kind:
            return b
    have = ", ".join(b.kind for b in components(d, prob))
    raise DomainError(f"no {kind} branch at d={d!r} (level has: {have})")


def level_y(x, d: float, prob: EnergyProblem):
    """Non-negative y on the level set at abscissa x (0 where round-off goes negative)."""
    return np.sqrt(np.maximum(d - fhat(x, prob), 0.0)) / prob.mu


def orbit_polyline(d: float, branch: BranchDescriptor, prob: EnergyProblem, samples: int = 512):
    """Closed (loop) or open polyline of one branch in the (x, y) plane.

    Abscissae are Chebyshev-clustered toward the turning points, where the
    level set has vertical tangents.
    """
    n = max(4, samples // 2)
    lo = branch.x_lo if branch.kind in ("loop", "separatrix-outer") else 0.0
    hi = branch.x0
    t = 0.5 * (1 - np.cos(np.linspace(0.0, math.pi, n)))
    xs = lo + (hi - lo) * t
    ys = level_y(xs, d, prob)
    x_all = np.concatenate([xs, xs[-2::-1]])
    y_all = np.concatenate([ys, -ys[-2::-1]])
    return x_all, y_all


def portrait(prob: EnergyProblem, levels, samples: int = 512) -> dict:
    """Plain-data phase portrait: stationary points plus every branch of each level."""
    st = stationary_points(prob)
    doc = {
        "rho": prob.rho,
        "mu": prob.mu,
        "regime": st.regime,
        "stationary": [
            {
                "x": p.x_star,
                "y": 0.0,
                "type": p.type,
                "eigenvalues": [[e.real, e.imag] for e in p.eigenvalues],
            }
            for p in st.points
        ],
        "separatrix_level": separatrix_level(prob),
        "levels": [],
    }
    for d in levels:
        entry = {"d": float(d), "branches": []}
        for b in components(float(d), prob):
            xs, ys = orbit_polyline(float(d), b, prob, samples)
            entry["branches"].append(
                {**b.to_dict(), "polyline": {"x": xs.tolist(), "y": ys.tolist()}}
            )
        doc["levels"].append(entry)
    return doc
