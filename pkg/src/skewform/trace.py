"""Arc-length tracing of a single critical-curve branch.

The state (x, y, psi) is integrated with an adaptive Dormand-Prince 5(4)
scheme, where

    psi_s = x (log x - 1) / (d - rho mu^2 x^2),

and the curve in the model space is gamma(s) = Phi(mu x(s), psi(s)).

Conventions: s = 0 sits at (x0, 0) with psi = 0. The y > 0 half (s < 0) is
integrated and the y < 0 half comes from s -> -s (x even, y and psi odd).
On the sphere with d = rho mu^2 e^2 the curve runs through the chart pole
at every visit to x = e. There psi_s is a removable 0/0, and the chart angle
jumps by pi / sqrt(rho d) (the embedded curve itself stays smooth).
"""

from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import IntegrationWarning, quad, solve_ivp

from .energy import EnergyProblem, canonical, central_diff, el_residual_samples
from .errors import (
    BudgetExceededError,
    DivergenceError,
    DomainError,
    InconsistentBranchError,
    PoleSingularityError,
    ToleranceError,
)
from .geometry import embed_phi, embed_phi_tangent, model_residual, model_tolerance, quadratic_form
from .phase import BranchDescriptor, F, components, fhat, is_separatrix, stationary_points

E = math.e
# relative distance to rho mu^2 e^2 at which d is snapped onto the pole level
POLE_TOL = 1e-10


def default_tol() -> float:
    env = os.environ.get("SKEWFORM_TOL")
    return float(env) if env else 1e-13


@dataclass(frozen=True)
class TraceOptions:
    """Integrator and sampling controls.

    ``ds`` is the target sample spacing in arc length; ``samples`` (per half)
    overrides it. When neither is given the spacing is 0.003 min(1, mu),
    which keeps finite differences on the samples accurate for small mu.
    """

    rtol: float = field(default_factory=default_tol)
    atol: float = field(default_factory=default_tol)
    ds: float | None = None
    samples: int | None = None
    x_cutoff: float = 1e-8
    budget: float = 50.0  # arc length allowed on asymptotic branches
    saddle_stop: float = 1e-5  # relative distance to the saddle ending a separatrix trace
    max_span: float = 1e4  # runaway guard for axis branches
    periods: int = 1
    drift_tol: float = 1e-7

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise DomainError("integrator tolerances must be positive")
        if self.ds is not None and not self.ds > 0:
            raise DomainError("ds must be positive")
        if self.samples is not None and self.samples < 4:
            raise DomainError("need at least 4 samples per half")
        if self.periods < 1:
            raise DomainError("periods must be >= 1")
        if not 0 < self.x_cutoff < 1e-2:
            raise DomainError("x_cutoff must lie in (0, 1e-2)")
        if not self.budget > 0:
            raise DomainError("budget must be positive")


@dataclass(frozen=True)
class CurveSample:
    s: float
    x: float
    y: float
    kappa: float
    psi: float
    point: np.ndarray


@dataclass
class ProfileCurve:
    """Sampled critical curve, stored column-wise.

    ``side`` is +1 on the traced curve and -1 on a mirror image across beta
    added by :func:`reflect_complete`. ``meta`` carries truncation lengths,
    pole passages and the C^2 breaks at axis junctions.
    """

    problem: EnergyProblem
    d: float
    branch: BranchDescriptor
    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    kappa: np.ndarray
    psi: np.ndarray
    points: np.ndarray
    completion: str
    period: float | None = None
    side: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.side is None:
            self.side = np.ones_like(self.s)

    def __len__(self):
        return self.s.size

    @property
    def samples(self) -> list[CurveSample]:
        return [
            CurveSample(self.s[i], self.x[i], self.y[i], self.kappa[i], self.psi[i], self.points[i])
            for i in range(len(self))
        ]

    @property
    def mu(self) -> float:
        return self.problem.mu

    @property
    def rho(self) -> float:
        return self.problem.rho

    @property
    def uniform(self) -> slice:
        """Index range on the uniform arc-length grid (excludes appended axis limit points)."""
        return slice(*self.meta.get("uniform", (0, len(self))))

    @property
    def h(self) -> float:
        return self.meta["ds"]

    def drift(self) -> np.ndarray:
        """Relative first-integral drift |F(x, y) - d| / d per sample."""
        prob, _ = canonical(self.problem)
        return np.abs(F((self.x, self.y), prob) - self.d) / self.d

    def el_residual(self) -> np.ndarray:
        """Finite-difference Euler-Lagrange residual on the uniform grid (NaN elsewhere)."""
        prob, flipped = canonical(self.problem)
        out = np.full(len(self), np.nan)
        sl = self.uniform
        kappa = -self.kappa[sl] if flipped else self.kappa[sl]
        out[sl] = el_residual_samples(kappa, self.h, prob)
        return out

    def interior(self, frac: float = 0.2, floor: float = 0.1) -> np.ndarray:
        """Mask of samples whose 5-point stencil is uniform and stays at x >= max(frac x0, floor).

        Near the axis x(s) behaves like x log^2 x and finite differences lose
        accuracy, so those samples are left out of residual checks.
        """
        mask = np.zeros(len(self), dtype=bool)
        lo, hi = self.meta["uniform"]
        if hi - lo < 5:
            return mask
        xs = self.x[lo:hi]
        low = np.min(np.lib.stride_tricks.sliding_window_view(xs, 5), axis=1)
        mask[lo + 2 : hi - 2] = low >= max(frac * self.branch.x0, floor)
        mask &= self.side > 0
        return mask

    def tangents(self) -> np.ndarray:
        """Unit tangents d gamma/ds from the chart differential (traced side only)."""
        prob, flipped = canonical(self.problem)
        sgn = -1.0 if flipped else 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            psi_s = psi_rate(self.x, prob, self.d, self.meta.get("pole", False), sgn * self.y)
        return embed_phi_tangent(
            prob.mu * self.x, self.psi, sgn * prob.mu * self.y, sgn * psi_s, prob.rho, self.d
        )


# -- vector field -----------------------------------------------------------------


def _pole_g(x):
    """(log x - 1)/(x - e), evaluated without cancellation near x = e."""
    x = np.asarray(x, dtype=float)
    t = (x - E) / E
    small = np.abs(t) < 1e-6
    ts = np.where(small, 1.0, t)
    series = (1.0 - t / 2 + t * t / 3) / E
    return np.where(small, series, np.log1p(ts) / (E * ts))


def psi_rate(x, prob: EnergyProblem, d: float, pole: bool = False, y=None):
    """psi_s as a function of x (and y when available).

    With y given, the denominator d - rho mu^2 x^2 is evaluated through the
    level identity as mu^2 y^2 + x^2 (log x - 1)^2, which avoids cancellation
    when a curve passes close to the sphere chart pole. In the pole case the
    common factor (e - x) is cancelled, leaving -x g(x) / (rho mu^2 (e + x)).
    """
    x = np.asarray(x, dtype=float)
    m = prob.rho * prob.mu**2
    if pole:
        return -x * _pole_g(x) / (m * (E + x))
    with np.errstate(divide="ignore", invalid="ignore"):
        L = np.log(x)
        if y is None:
            den = d - m * x * x
        else:
            den = prob.mu**2 * np.square(y) + np.square(x * (L - 1.0))
        return np.where(x > 0, x * (L - 1.0) / den, 0.0)


def _make_rhs(prob: EnergyProblem, d: float, pole: bool):
    mu2 = prob.mu**2
    m = prob.rho * mu2
    if pole:

        def psi_s(x, y, L):
            t = (x - E) / E
            g = (1.0 - t / 2 + t * t / 3) / E if abs(t) < 1e-6 else math.log1p(t) / (E * t)
            return -x * g / (m * (E + x))

    else:

        def psi_s(x, y, L):
            w = x * (L - 1.0)
            return w / (mu2 * y * y + w * w)

    def rhs(s, z):
        x, y = z[0], z[1]
        if x <= 0.0:
            # limit values at the axis: x log^2 x -> 0
            return [y, 0.0, 0.0]
        L = math.log(x)
        return [y, -(x / mu2) * (L * L - L + m), psi_s(x, y, L)]

    return rhs


# -- level classification helpers ---------------------------------------------------


def pole_level(prob: EnergyProblem) -> float:
    """rho mu^2 e^2, the only level whose curves can reach the sphere chart pole."""
    if prob.rho <= 0:
        raise DomainError("the pole level exists only for rho > 0")
    return prob.rho * prob.mu**2 * E * E


def is_pole_level(prob: EnergyProblem, d: float) -> bool:
    if prob.rho <= 0:
        return False
    return abs(d - pole_level(prob)) <= POLE_TOL * d


def is_pole_branch(prob: EnergyProblem, d: float, branch: BranchDescriptor) -> bool:
    """True when the branch reaches the pole: d on the pole level and x0 = e."""
    return is_pole_level(prob, d) and branch.x0 >= E * (1 - 1e-8)


# -- psi(0) by quadrature ---------------------------------------------------------------


def _axis_x0(prob: EnergyProblem, d: float) -> float:
    if is_separatrix(d, prob):
        raise DivergenceError(
            "psi(0) does not exist on the separatrix level (infinite length to the saddle)"
        )
    for b in components(d, prob):
        if b.kind == "axis":
            return b.x0
    raise DomainError(f"no axis branch at d={d!r}")


def _psi_integral(prob: EnergyProblem, d: float, x0: float, pole: bool) -> float:
    """mu * int_0^x0 r (1 - log r) / (D(r) sqrt(d - F(r))) dr with D = d - rho mu^2 r^2.

    (0, x0/2] is integrated directly (the integrand vanishes like r log r at
    0); [x0/2, x0] uses r = x0 - t^2 to remove the square-root singularity.
    """
    mu = prob.mu
    m = prob.rho * mu**2
    L0 = math.log(x0)
    # derivatives of F at x0 for the Taylor form of d - F(x0 - h)
    f1 = 2 * x0 * (L0 * L0 - L0 + m)
    f2 = 2 * (L0 * L0 + L0 - 1 + m)
    f3 = 2 * (2 * L0 + 1) / x0
    f4 = 2 * (1 - 2 * L0) / x0**2

    def gap(r, h):
        # h = x0 - r passed exactly; x0 is taken as the exact root, since its
        # rounding residual d - F(x0) would swamp f1 h for h below ~1e-15
        if h < 1e-2 * x0:
            return h * (f1 - h * (f2 / 2 - h * (f3 / 6 - h * f4 / 24)))
        return d - fhat(r, prob)

    def coef(r, g):
        # r (1 - log r) / D(r), with D = gap + r^2 (log r - 1)^2 on the level
        if pole:
            return r * float(_pole_g(r)) / (m * (E + r))
        w = math.log(r / E) if abs(r - E) < 0.1 else math.log(r) - 1.0
        return -r * w / (g + (r * w) ** 2)

    def f_r(r):
        if r <= 0.0:
            return 0.0
        g = max(gap(r, x0 - r), 1e-300)
        return coef(r, g) / math.sqrt(g)

    def f_t(t):
        h = t * t
        r = x0 - h
        if t == 0.0:
            # d - F(x0 - t^2) ~ F'(x0) t^2
            return 2.0 * coef(x0, 0.0) / math.sqrt(f1) if (pole or L0 != 1.0) else 0.0
        g = gap(r, h)
        if g <= 0.0:
            g = f1 * h
        return 2.0 * t * coef(r, g) / math.sqrt(g)

    half = 0.5 * x0
    pts_r = [E] if 0 < E < half else None
    t_max = math.sqrt(x0 - half)
    kw = dict(limit=400, epsabs=1e-14, epsrel=1e-13)
    # quad reports roundoff when it cannot certify epsabs near r log r at 0;
    # the result is still good to ~1e-12 (checked against the ODE trace)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        a, _ = quad(f_r, 0.0, half, points=pts_r, **kw)
    # just above the pole level the integrand peaks sharply at r = e; split
    # geometrically around it so every piece sees a resolved profile
    cuts = {0.0, t_max}
    if half < E < x0 and not pole:
        te = math.sqrt(x0 - E)
        tp = x0 * abs(L0 - 1.0) / math.sqrt(f1)  # width where D ~ x0^2 (log x0 - 1)^2
        cuts.update(c for c in (tp / 4, tp, 4 * tp, 16 * tp, te / 2, te, 2 * te, 8 * te) if c < t_max)
    cuts = sorted(cuts)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        b = sum(quad(f_t, lo, hi, **kw)[0] for lo, hi in zip(cuts[:-1], cuts[1:]))
    return mu * (a + b)


def pole_psi(prob: EnergyProblem) -> float:
    """psi at the axis on the y > 0 half of the pole-level axis branch.

    The angle is continued through the removable singularity at x = e,
    so the jump of pi / sqrt(rho d) at the pole is not included.
    """
    d = pole_level(prob)
    return _psi_integral(prob, d, E, pole=True)


def psi_at_zero(prob: EnergyProblem, d: float) -> float:
    """psi in the limit x -> 0 along the y > 0 half of the axis branch.

    On the sphere at d = rho mu^2 e^2 with x0 = e, this returns the
    limit from levels just above the pole level:
    pole_psi - pi / (2 sqrt(rho d)).
    """
    prob, _ = canonical(prob)
    if not d > 0:
        raise DomainError(f"level d must be positive, got {d!r}")
    x0 = _axis_x0(prob, d)
    if is_pole_level(prob, d) and x0 >= E * (1 - 1e-8):
        d = pole_level(prob)
        return pole_psi(prob) - math.pi / (2.0 * math.sqrt(prob.rho * d))
    return _psi_integral(prob, d, x0, pole=False)


# -- tracing --------------------------------------------------------------------------


def _check_branch(prob: EnergyProblem, d: float, branch: BranchDescriptor) -> BranchDescriptor:
    for b in components(d, prob):
        if b.kind == branch.kind and math.isclose(b.x0, branch.x0, rel_tol=1e-8):
            return b
    raise InconsistentBranchError(
        f"{branch.kind} branch with x0={branch.x0!r} is not a component of level d={d!r}"
    )


def _integrate(rhs, z0, span, opts: TraceOptions, events):
    sol = solve_ivp(
        rhs, (0.0, span), z0, method="RK45", rtol=opts.rtol, atol=opts.atol,
        dense_output=True, events=events,
    )
    if sol.status < 0:
        raise ToleranceError(f"integrator failed: {sol.message}")
    return sol


def _grid(length: float, prob: EnergyProblem, opts: TraceOptions) -> np.ndarray:
    if opts.samples is not None:
        n = opts.samples
    else:
        ds = opts.ds if opts.ds is not None else 0.003 * min(1.0, prob.mu)
        n = max(4, math.ceil(length / ds))
    if n > 5_000_000:
        raise BudgetExceededError(f"{n} samples per half exceeds the sampling budget")
    return np.linspace(0.0, length, n + 1)


def integrate_profile(
    prob: EnergyProblem,
    d: float,
    branch: BranchDescriptor,
    opts: TraceOptions | None = None,
) -> ProfileCurve:
    """Trace one branch of the level F = d as an arc-length sampled curve.

    Parameters
    ----------
    prob : EnergyProblem
        mu < 0 is traced as the mu > 0 curve with reversed orientation.
    d : float
        First-integral level, positive.
    branch : BranchDescriptor
        One entry of ``phase.components(d, prob)``.
    opts : TraceOptions, optional

    Returns
    -------
    ProfileCurve
        ``completion`` is "open" for axis branches (reflect to close them),
        "periodic" for loops and "asymptotic" for separatrix branches.
    """
    opts = opts or TraceOptions()
    if not d > 0:
        raise DomainError(f"level d must be positive, got {d!r}")
    orig = prob
    prob, flipped = canonical(prob)
    branch = _check_branch(prob, d, branch)
    pole = prob.rho > 0 and is_pole_branch(prob, d, branch)
    if pole:
        d = pole_level(prob)
        branch = replace(branch, x0=E)

    if branch.kind == "separatrix-inner":
        curve = _trace_inner(prob, d, branch, opts)
    else:
        curve = _trace_symmetric(prob, d, branch, opts, pole)

    drift = curve.drift()
    curve.meta["drift_max"] = float(np.nanmax(drift))
    if curve.meta["drift_max"] > opts.drift_tol:
        raise ToleranceError(
            f"first-integral drift {curve.meta['drift_max']:.3e} exceeds {opts.drift_tol:.1e}"
        )
    if flipped:
        curve = _flip(curve, orig)
    return curve


def _trace_symmetric(prob, d, branch, opts: TraceOptions, pole: bool) -> ProfileCurve:
    rhs = _make_rhs(prob, d, pole)
    z0 = [branch.x0, 0.0, 0.0]
    meta: dict = {"pole": pole, "x_cutoff": None, "truncation": None}
    period = None
    limit_point = False

    if branch.kind == "axis":
        ev = lambda s, z: z[0] - opts.x_cutoff  # noqa: E731
        ev.terminal = True
        sol = _integrate(rhs, z0, -opts.max_span, opts, [ev])
        if sol.t_events[0].size == 0:
            raise BudgetExceededError(f"axis branch did not reach x={opts.x_cutoff} within s={opts.max_span}")
        length = -sol.t_events[0][0]
        meta["x_cutoff"] = opts.x_cutoff
        completion = "open"
        limit_point = True
    elif branch.kind == "loop":
        ev = lambda s, z: z[1]  # noqa: E731
        ev.terminal = True
        ev.direction = -1
        sol = _integrate(rhs, z0, -opts.max_span, opts, [ev])
        if sol.t_events[0].size == 0:
            raise BudgetExceededError("loop branch did not return to y = 0")
        period = -2.0 * sol.t_events[0][0]
        length = 0.5 * period * opts.periods
        if opts.periods > 1:
            sol = _integrate(rhs, z0, -length, opts, None)
        meta["periods"] = opts.periods
        completion = "periodic"
    else:  # separatrix-outer
        xm = stationary_points(prob).saddle.x_star

        def ev(s, z):
            return math.hypot(z[0] / xm - 1.0, prob.mu * z[1] / xm) - opts.saddle_stop

        ev.terminal = True
        sol = _integrate(rhs, z0, -opts.budget, opts, [ev])
        length = -sol.t_events[0][0] if sol.t_events[0].size else opts.budget
        meta["truncation"] = length
        meta["saddle_distance"] = float(
            math.hypot(sol.y[0, -1] / xm - 1.0, prob.mu * sol.y[1, -1] / xm)
        )
        completion = "asymptotic"

    grid = _grid(length, prob, opts)
    z = sol.sol(-grid)
    xh, yh, ph = z[0], z[1], z[2]
    xh[0], yh[0], ph[0] = branch.x0, 0.0, 0.0

    s = np.concatenate([-grid[::-1], grid[1:]])
    x = np.concatenate([xh[::-1], xh[1:]])
    y = np.concatenate([yh[::-1], -yh[1:]])
    psi = np.concatenate([ph[::-1], -ph[1:]])
    uniform = (0, s.size)

    if limit_point:
        # close the trace with the x -> 0 limit; the remaining arc is O(x_cutoff)
        extra = opts.x_cutoff * prob.mu / math.sqrt(d)
        y_axis = math.sqrt(d) / prob.mu
        s = np.concatenate([[s[0] - extra], s, [s[-1] + extra]])
        x = np.concatenate([[0.0], x, [0.0]])
        y = np.concatenate([[y_axis], y, [-y_axis]])
        psi = np.concatenate([[psi[0]], psi, [psi[-1]]])
        uniform = (1, s.size - 1)

    if pole:
        jump = math.pi / math.sqrt(prob.rho * d)
        T = period if period is not None else math.inf
        k = np.floor(s / T) if math.isfinite(T) else np.where(s < 0, -1.0, 0.0)
        psi = psi + jump * (k + 0.5)
        psi[s.size // 2] = 0.0  # s = 0 sits on the pole, where the angle is arbitrary
        nk = int(math.floor(length / T + 1e-9)) if math.isfinite(T) else 0
        meta["pole_passages"] = [float(k * T) for k in range(-nk, nk + 1)]
        if not np.all(np.isfinite(psi)):
            raise PoleSingularityError("angle continuation through the pole failed")

    with np.errstate(divide="ignore"):
        kappa = np.log(x) / prob.mu
    points = embed_phi(prob.mu * x, psi, prob.rho, d)
    meta.update(uniform=uniform, ds=float(grid[1] - grid[0]), half_length=float(length))
    meta["c2_breaks"] = []
    return ProfileCurve(prob, d, branch, s, x, y, kappa, psi, points, completion, period, meta=meta)


def _trace_inner(prob, d, branch, opts: TraceOptions) -> ProfileCurve:
    """Inner separatrix branch: from next to the saddle down to the axis.

    The branch has no turning point, so s = 0 is placed at the start point
    x = x-(1 - saddle_stop), on the y < 0 side of the level.
    """
    xm = branch.x0
    x_start = xm * (1.0 - opts.saddle_stop)
    y_start = -math.sqrt(max(d - fhat(x_start, prob), 0.0)) / prob.mu
    rhs = _make_rhs(prob, d, False)
    ev = lambda s, z: z[0] - opts.x_cutoff  # noqa: E731
    ev.terminal = True
    sol = _integrate(rhs, [x_start, y_start, 0.0], opts.max_span, opts, [ev])
    if sol.t_events[0].size == 0:
        raise BudgetExceededError("inner separatrix branch did not reach the axis")
    length = sol.t_events[0][0]
    grid = _grid(length, prob, opts)
    z = sol.sol(grid)
    extra = opts.x_cutoff * prob.mu / math.sqrt(d)
    s = np.concatenate([grid, [length + extra]])
    x = np.concatenate([z[0], [0.0]])
    y = np.concatenate([z[1], [-math.sqrt(d) / prob.mu]])
    psi = np.concatenate([z[2], [z[2][-1]]])
    with np.errstate(divide="ignore"):
        kappa = np.log(x) / prob.mu
    points = embed_phi(prob.mu * x, psi, prob.rho, d)
    meta = {
        "pole": False, "x_cutoff": opts.x_cutoff, "truncation": float(length),
        "uniform": (0, s.size - 1), "ds": float(grid[1] - grid[0]),
        "half_length": float(length), "c2_breaks": [],
    }
    return ProfileCurve(prob, d, branch, s, x, y, kappa, psi, points, "asymptotic", meta=meta)


def _flip(curve: ProfileCurve, orig: EnergyProblem) -> ProfileCurve:
    """Re-express a mu > 0 trace for index -mu: same points, reversed orientation."""
    r = slice(None, None, -1)
    n = len(curve)
    meta = dict(curve.meta)
    lo, hi = meta["uniform"]
    meta["uniform"] = (n - hi, n - lo)
    meta["flipped"] = True
    return ProfileCurve(
        orig, curve.d, curve.branch, -curve.s[r], curve.x[r], -curve.y[r], -curve.kappa[r],
        curve.psi[r], curve.points[r], curve.completion, curve.period, curve.side[r], meta,
    )


def reflect_complete(curve: ProfileCurve) -> ProfileCurve:
    """Close an axis-branch trace with its mirror image across beta.

    The mirrored half runs back from the last axis point to the first, so
    the result is a closed polyline. kappa keeps its values (reflection and
    reversal both flip its sign), y changes sign, and the mirrored points
    are Phi(-mu x, psi). The two axis junctions are C^1 but kappa -> -inf
    there, and they are listed in ``meta['c2_breaks']``.
    """
    if curve.completion == "reflected-closed":
        return curve
    if curve.branch.kind != "axis":
        raise DomainError(f"only axis branches can be reflected, got {curve.branch.kind}")
    if curve.completion != "open":
        raise DomainError("curve is not an open axis trace")
    prob, _ = canonical(curve.problem)
    n = len(curve)
    L0, L1 = curve.s[0], curve.s[-1]
    r = slice(n - 2, None, -1)  # mirrored samples, skipping the shared end point
    mirrored = embed_phi(-prob.mu * curve.x[r], curve.psi[r], prob.rho, curve.d)
    meta = dict(curve.meta)
    meta["c2_breaks"] = [n - 1, 2 * n - 2]
    meta["uniform"] = curve.meta["uniform"]
    return ProfileCurve(
        curve.problem,
        curve.d,
        curve.branch,
        np.concatenate([curve.s, 2 * L1 - curve.s[r]]),
        np.concatenate([curve.x, curve.x[r]]),
        np.concatenate([curve.y, -curve.y[r]]),
        np.concatenate([curve.kappa, curve.kappa[r]]),
        np.concatenate([curve.psi, curve.psi[r]]),
        np.concatenate([curve.points, mirrored]),
        "reflected-closed",
        curve.period,
        np.concatenate([curve.side, -curve.side[r]]),
        meta,
    )


# -- diagnostics ------------------------------------------------------------------------


def symmetry_error(curve: ProfileCurve) -> float:
    """max |p(s) - R p(-s)| with R negating the second coordinate."""
    side = curve.side > 0
    s, pts = curve.s[side], curve.points[side]
    n = s.size
    if not np.allclose(s, -s[::-1], rtol=0, atol=1e-12 * max(1.0, abs(s[0]))):
        raise DomainError("samples are not symmetric in s")
    mirror = pts[::-1] * np.array([1.0, -1.0, 1.0])
    return float(np.max(np.abs(pts - mirror))) if n else 0.0


def axis_angle(curve: ProfileCurve) -> float:
    """Angle between the tangent at the axis end and the beta-normal direction e1.

    Tangents at the first two uniform samples (x near x_cutoff) are linearly
    extrapolated to the appended limit point.
    """
    if curve.meta.get("x_cutoff") is None:
        raise DomainError("curve has no axis end")
    lo = curve.meta["uniform"][0]
    t = curve.tangents()[lo : lo + 2]
    s0, s1 = curve.s[lo], curve.s[lo + 1]
    s_lim = curve.s[lo - 1] if lo > 0 else s0
    tan = t[0] + (s_lim - s0) / (s1 - s0) * (t[1] - t[0])
    norm = math.sqrt(abs(quadratic_form(tan, curve.rho)))
    return math.acos(min(1.0, abs(tan[0]) / norm))


def winding_number(points: np.ndarray) -> float:
    """Total turning of a closed planar polyline (first two coordinates) in turns."""
    p = points[:, :2]
    seg = np.diff(p, axis=0)
    seg = seg[np.hypot(seg[:, 0], seg[:, 1]) > 0]
    ang = np.arctan2(seg[:, 1], seg[:, 0])
    turn = np.diff(np.concatenate([ang, ang[:1]]))
    turn = (turn + np.pi) % (2 * np.pi) - np.pi
    return float(turn.sum() / (2 * np.pi))


# -- export --------------------------------------------------------------------------------

CSV_HEADER = "s,x,y,kappa,psi,px,py,pz"


def curve_metadata(curve: ProfileCurve, curve_type=None) -> dict:
    tag = None
    if curve_type is not None:
        tag = {"tag": curve_type.tag, "qualifier": curve_type.qualifier}
    meta = {k: v for k, v in curve.meta.items() if k not in ("uniform",)}
    return {
        "rho": curve.rho,
        "mu": curve.mu,
        "d": curve.d,
        "branch": curve.branch.to_dict(),
        "type": tag,
        "completion": curve.completion,
        "period": curve.period,
        "drift_max": curve.meta.get("drift_max"),
        "samples": len(curve),
        "uniform": list(curve.meta["uniform"]),
        **{k: meta[k] for k in sorted(meta) if k != "drift_max"},
    }


def write_curve(curve: ProfileCurve, path, curve_type=None) -> tuple[str, str]:
    """Write the CSV trace plus a ``.json`` sidecar next to it."""
    path = str(path)
    table = np.column_stack([curve.s, curve.x, curve.y, curve.kappa, curve.psi, curve.points])
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in table:
            fh.write(",".join("%.17g" % v for v in row) + "\n")
    side = os.path.splitext(path)[0] + ".json"
    with open(side, "w") as fh:
        json.dump(curve_metadata(curve, curve_type), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path, side


def read_curve(path) -> tuple[np.ndarray, dict | None]:
    """Load a trace CSV as an (n, 8) array plus its sidecar, if present."""
    path = str(path)
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise DomainError(f"unexpected CSV header {header!r}")
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    side = os.path.splitext(path)[0] + ".json"
    meta = None
    if os.path.exists(side):
        with open(side) as fh:
            meta = json.load(fh)
    return table, meta



def load_curve(path) -> ProfileCurve:
    """Rebuild a :class:`ProfileCurve` from a trace CSV and its sidecar."""
    table, meta = read_curve(path)
    if meta is None:
        raise DomainError(f"{path}: missing .json sidecar (rho, mu, d are needed)")
    try:
        prob = EnergyProblem(float(meta["mu"]), float(meta["rho"]))
        d = float(meta["d"])
        br = meta["branch"]
        branch = BranchDescriptor(br["kind"], float(br["x0"]), br.get("x_lo"))
    except (KeyError, TypeError) as exc:
        raise DomainError(f"{path}: incomplete sidecar ({exc})") from exc
    n = table.shape[0]
    side = np.ones(n)
    breaks = meta.get("c2_breaks") or []
    if meta.get("completion") == "reflected-closed" and breaks:
        side[breaks[0] + 1 :] = -1.0
    extra = {k: v for k, v in meta.items() if k not in ("rho", "mu", "d", "branch", "type", "completion", "period", "samples")}
    extra["uniform"] = tuple(meta["uniform"])
    return ProfileCurve(
        prob, d, branch, table[:, 0], table[:, 1], table[:, 2], table[:, 3], table[:, 4],
        table[:, 5:8], meta["completion"], meta.get("period"), side, extra,
    )


# default bounds used by check_invariants
INVARIANT_TOLS = {
    "drift": 1e-8,
    "kappa": 1e-14,
    "embedding": 1e-12,
    "el_residual": 1e-6,
    "symmetry": 1e-9,
    "axis_angle": 1e-4,
}


def check_invariants(curve: ProfileCurve, tols: dict | None = None) -> dict:
    """Recompute the trace invariants; returns values, bounds and a pass flag.

    Checks first-integral drift, kappa = log(x)/mu, the embedding identity
    point = Phi(mu x, psi) (mirror half: Phi(-mu x, psi)), the model
    constraint, the interior Euler-Lagrange residual, the mirror symmetry of
    symmetric branches and the orthogonal meeting with beta of axis branches.
    """
    tols = {**INVARIANT_TOLS, **(tols or {})}
    prob, flipped = canonical(curve.problem)
    out: dict = {}
    out["drift"] = float(np.nanmax(curve.drift()))
    fin = curve.x > 0
    k_ref = np.log(curve.x[fin]) / prob.mu * (-1.0 if flipped else 1.0)
    k_err = np.abs(curve.kappa[fin] - k_ref) / np.maximum(1.0, np.abs(k_ref))
    out["kappa"] = float(np.max(k_err)) if k_err.size else 0.0
    ref = embed_phi(prob.mu * curve.x * curve.side, curve.psi, prob.rho, curve.d)
    out["embedding"] = float(np.max(np.abs(ref - curve.points)))
    out["model"] = float(np.max(model_residual(curve.points, curve.rho)))
    tols.setdefault("model", 1e3 * model_tolerance(curve.rho))
    el = curve.el_residual()
    mask = curve.interior()
    out["el_residual"] = float(np.max(np.abs(el[mask]))) if mask.any() else math.nan
    if curve.branch.kind != "separatrix-inner":
        out["symmetry"] = symmetry_error(curve)
    if curve.branch.kind == "axis":
        out["axis_angle"] = axis_angle(curve)
    failed = [k for k, v in out.items() if k in tols and not (v <= tols[k] or math.isnan(v))]
    return {"values": out, "tolerances": {k: tols[k] for k in out if k in tols}, "failed": failed, "passed": not failed}
