"""Curve-type decision procedure and solvers for the special levels.

Types of non-constant-curvature branches:

    loop              -> OrbitLike
    separatrix-outer  -> Borderline
    separatrix-inner  -> Oval (separatrix-limit)
    axis, x0 < e      -> Oval
    axis, x0 > e      -> sign of psi(0): NonSimpleBiconcave / FigureEight / SimpleBiconcave

On the sphere, a branch on the level d = rho mu^2 e^2 with x0 = e passes through
the chart pole and carries the pole-passing qualifier; its axis-branch type
uses the limit of psi(0) from levels just above (see trace.psi_at_zero).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .energy import ConstantSolution, EnergyProblem, canonical
from .errors import DomainError, InconsistentBranchError, NoSignChangeError, SkewformError
from .phase import BranchDescriptor, components, fhat, log_stationary, separatrix_level
from .trace import is_pole_branch, pole_level, pole_psi, psi_at_zero

E = math.e
FIGURE_EIGHT_TOL = 1e-10

TAGS = (
    "Oval",
    "SimpleBiconcave",
    "FigureEight",
    "NonSimpleBiconcave",
    "Borderline",
    "OrbitLike",
    "Geodesic",
    "Circle",
    "Parallel",
    "Hypercycle",
)
QUALIFIERS = ("separatrix-limit", "pole-passing")


class CurveType(NamedTuple):
    tag: str
    qualifier: str | None = None

    def to_dict(self) -> dict:
        return {"tag": self.tag, "qualifier": self.qualifier}

    def __str__(self):
        return self.tag if self.qualifier is None else f"{self.tag}({self.qualifier})"


def constant_type(sol: ConstantSolution) -> CurveType:
    return CurveType(sol.kind.value)


def _matching_branch(prob: EnergyProblem, d: float, branch: BranchDescriptor) -> BranchDescriptor:
    for b in components(d, prob):
        if b.kind == branch.kind and math.isclose(b.x0, branch.x0, rel_tol=1e-8):
            return b
    raise InconsistentBranchError(
        f"{branch.kind} branch with x0={branch.x0!r} is not a component of level d={d!r}"
    )


def psi_sign_type(psi0: float) -> str:
    if abs(psi0) < FIGURE_EIGHT_TOL:
        return "FigureEight"
    return "NonSimpleBiconcave" if psi0 > 0 else "SimpleBiconcave"


def classify_with_psi(
    prob: EnergyProblem, d: float, branch: BranchDescriptor
) -> tuple[CurveType, float | None]:
    """Like :func:`classify`, also returning psi(0) when it was needed."""
    if not d > 0:
        raise DomainError(f"level d must be positive, got {d!r}")
    prob, _ = canonical(prob)
    branch = _matching_branch(prob, d, branch)
    pole = prob.rho > 0 and is_pole_branch(prob, d, branch)
    qual = "pole-passing" if pole else None
    if branch.kind == "loop":
        return CurveType("OrbitLike", qual), None
    if branch.kind == "separatrix-outer":
        return CurveType("Borderline", qual), None
    if branch.kind == "separatrix-inner":
        return CurveType("Oval", "separatrix-limit"), None
    if branch.x0 < E and not pole:
        return CurveType("Oval"), None
    psi0 = psi_at_zero(prob, d)
    return CurveType(psi_sign_type(psi0), qual), psi0


def classify(prob: EnergyProblem, d: float, branch: BranchDescriptor) -> CurveType:
    """Curve type of one branch of the level F = d.

    Examples
    --------
    >>> from skewform.phase import components
    >>> p = EnergyProblem(1.0, 0.0)
    >>> [str(classify(p, 0.5, b)) for b in components(0.5, p)]
    ['Oval', 'OrbitLike']
    """
    return classify_with_psi(prob, d, branch)[0]


def classify_level(prob: EnergyProblem, d: float) -> list[tuple[BranchDescriptor, CurveType]]:
    return [(b, classify(prob, d, b)) for b in components(d, prob)]


# -- special levels -------------------------------------------------------------------


def borderline_level(prob: EnergyProblem) -> float | None:
    """F(x-) = x-^2 log x+, or None when there is no saddle (4 rho mu^2 >= 1)."""
    return separatrix_level(canonical(prob)[0])


def find_figure_eight(prob: EnergyProblem, max_doublings: int = 60) -> float:
    """Level d* with psi(0) = 0 on the axis branch.

    The bracket starts just above the larger of the borderline level and the
    level where x0 = e, and its upper end doubles until psi(0) < 0.

    Raises
    ------
    NoSignChangeError
        psi(0) is already negative at the lower end, or never turns negative.
    """
    prob, _ = canonical(prob)
    lows = []
    border = borderline_level(prob)
    if border is not None:
        lows.append(border * (1 + 1e-6))
    if prob.rho > 0:
        lows.append(pole_level(prob))
    if not lows:
        raise NoSignChangeError("no axis branch with x0 > e")
    lo = max(lows)
    f_lo = psi_at_zero(prob, lo)
    if f_lo <= 0:
        raise NoSignChangeError(
            f"psi(0) = {f_lo:.6g} <= 0 already at the lower end d = {lo:.6g}; "
            "no figure-eight level for this (rho, mu)"
        )
    hi = 2 * lo
    for _ in range(max_doublings):
        f_hi = psi_at_zero(prob, hi)
        if f_hi < 0:
            break
        lo, hi = hi, 2 * hi
    else:
        raise NoSignChangeError(f"psi(0) stayed positive up to d = {hi:.6g}")
    d_star = brentq(lambda d: psi_at_zero(prob, d), lo, hi, xtol=1e-300, rtol=1e-15, maxiter=200)
    return d_star


def _pole_problem(m: float, rho: float) -> EnergyProblem:
    return EnergyProblem(math.sqrt(m / rho), rho)


def pole_borderline_mu(rho: float = 1.0) -> float:
    """mu at which the borderline level equals the pole level rho mu^2 e^2.

    Both levels depend on (rho, mu) only through m = rho mu^2, so the root
    is found in m on (0, 1/4) and mapped back.
    """
    if rho <= 0:
        raise DomainError("pole-passing curves need rho > 0")

    def gap(m):
        t_minus, t_plus = log_stationary(_pole_problem(m, rho))
        return math.exp(2 * t_minus) * t_plus - m * E * E

    m = brentq(gap, 1e-8, 0.25 * (1 - 1e-9), xtol=1e-300, rtol=1e-15)
    return math.sqrt(m / rho)


def pole_figure_eight_mu(rho: float = 1.0) -> float:
    """mu at which the pole-passing axis curve is of figure-eight type.

    Solves sqrt(rho d) pole_psi = pi / 2 at d = rho mu^2 e^2, with m = rho mu^2
    bracketed between the borderline-pole value and geometric growth.
    """
    if rho <= 0:
        raise DomainError("pole-passing curves need rho > 0")
    m_lo = rho * pole_borderline_mu(rho) ** 2 * (1 + 1e-4)

    def excess(m):
        p = _pole_problem(m, rho)
        return math.sqrt(rho * pole_level(p)) * pole_psi(p) - 0.5 * math.pi

    if excess(m_lo) <= 0:
        raise NoSignChangeError("pole-passing axis curves are never non-simple here")
    m_hi = 2 * m_lo
    for _ in range(60):
        if excess(m_hi) < 0:
            break
        m_lo, m_hi = m_hi, 2 * m_hi
    else:
        raise NoSignChangeError("no pole-passing figure-eight found")
    m = brentq(excess, m_lo, m_hi, xtol=1e-300, rtol=1e-15)
    return math.sqrt(m / rho)


def special_level(prob: EnergyProblem, kind: str) -> float:
    """figure-eight, borderline or pole level of d for the given problem."""
    prob, _ = canonical(prob)
    if kind == "figure-eight":
        return find_figure_eight(prob)
    if kind == "borderline":
        lev = borderline_level(prob)
        if lev is None:
            raise DomainError("no borderline level: 4 rho mu^2 >= 1 leaves no saddle")
        return lev
    if kind == "pole":
        return pole_level(prob)
    raise DomainError(f"unknown special level {kind!r}")


# -- sweeps ------------------------------------------------------------------------------

SWEEP_HEADER = "rho,mu,d,branch,type,qualifier,x0,psi0"


def _sweep_row(args) -> list[tuple]:
    rho, mu, d = args
    prob = EnergyProblem(mu, rho)
    rows = []
    try:
        branches = components(d, prob)
    except SkewformError as exc:
        return [(rho, mu, d, "", "Error", exc.code, math.nan, math.nan)]
    for b in branches:
        try:
            ct, psi0 = classify_with_psi(prob, d, b)
            rows.append((rho, mu, d, b.kind, ct.tag, ct.qualifier or "", b.x0, psi0))
        except SkewformError as exc:
            rows.append((rho, mu, d, b.kind, "Error", exc.code, b.x0, math.nan))
    return rows


def sweep(rho: float, mus, ds, workers: int = 1) -> list[tuple]:
    """Classify every branch on a (mu, d) grid.

    Rows are (rho, mu, d, branch, tag, qualifier, x0, psi0), ordered by mu,
    then d, then branch, whatever the worker count.
    """
    cells = [(float(rho), float(mu), float(d)) for mu in mus for d in ds]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_sweep_row, cells, chunksize=max(1, len(cells) // (4 * workers))))
    else:
        parts = [_sweep_row(c) for c in cells]
    return [row for part in parts for row in part]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "" if math.isnan(v) else "%.17g" % v
    return str(v)


def write_sweep(rows, path) -> str:
    with open(path, "w") as fh:
        fh.write(SWEEP_HEADER + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return str(path)


def parse_range(text: str) -> np.ndarray:
    """``a:b:n`` -> n evenly spaced values from a to b inclusive."""
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError as exc:
        raise DomainError(f"range must look like a:b:n, got {text!r}") from exc
    if n < 1:
        raise DomainError("range needs n >= 1")
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("range ends must be finite")
    return np.linspace(a, b, n)


def x0_at_e_level(prob: EnergyProblem) -> float:
    """F(e) = rho mu^2 e^2: axis branches have x0 > e exactly above this level."""
    return float(fhat(E, canonical(prob)[0]))
