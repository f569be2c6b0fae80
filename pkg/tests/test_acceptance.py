"""Acceptance suite: one test and one PASS/FAIL line per criterion.

Each test asserts at the stated tolerance. A criterion that cannot be met is
reported and left failing rather than loosened.
"""

from __future__ import annotations

import math
import time

import numpy as np

from skewform.classify import borderline_level, classify, find_figure_eight, sweep
from skewform.energy import (
    ConstantKind,
    CurvatureState,
    EnergyProblem,
    central_diff,
    constant_solutions,
    dilate,
    first_integral_level,
)
from skewform.phase import find_branch
from skewform.presets import expand
from skewform.surface import discrete_principal_curvatures, oracle_mask, revolve, verify_surface
from skewform.trace import TraceOptions, axis_angle, integrate_profile, psi_at_zero, symmetry_error

E = math.e


def test_criterion_01_borderline_levels(acceptance):
    cases = [((1.0, 0.0), 1.0, 0.0), ((0.25, 1.0), 1.067, 1e-3), ((1.0, -1.0), 0.470, 5e-3)]
    ok, parts, worst = True, [], 0.0
    for (mu, rho), target, tol in cases:
        prob = EnergyProblem(mu, rho)
        t0 = time.perf_counter()
        lev = borderline_level(prob)
        dt = time.perf_counter() - t0
        worst = max(worst, dt)
        good = abs(lev - target) <= tol and dt < 1e-3
        ok &= good
        parts.append(f"rho={rho:g},mu={mu:g}: {lev:.6f} (want {target}±{tol:g}, {dt * 1e6:.0f} us)")
    acceptance(1, ok, "; ".join(parts), worst)
    assert ok


def test_criterion_02_figure_eight_levels(acceptance):
    cases = [((1.0, 0.0), 2.9), ((0.25, 1.0), 2.9), ((1.0, -1.0), 4.5)]
    ok, parts, total = True, [], 0.0
    for (mu, rho), target in cases:
        prob = EnergyProblem(mu, rho)
        t0 = time.perf_counter()
        d_star = find_figure_eight(prob)
        dt = time.perf_counter() - t0
        total += dt
        psi0 = psi_at_zero(prob, d_star)
        good = abs(d_star - target) <= 0.1 and abs(psi0) < 1e-10 and dt < 5.0
        ok &= good
        parts.append(
            f"rho={rho:g},mu={mu:g}: d*={d_star:.6f} (want {target}±0.1) |psi0|={abs(psi0):.1e}"
            f" {'ok' if good else 'MISS'}"
        )
    acceptance(2, ok, "; ".join(parts), total)
    assert ok, "figure-eight levels outside the published windows"


def test_criterion_03_classification(acceptance):
    t0 = time.perf_counter()
    misses, n = [], 0
    for name in ("fig3", "fig4", "fig6", "fig5"):
        for p in expand(name):
            prob = EnergyProblem(p.mu, p.rho)
            ct = classify(prob, p.d, find_branch(p.d, prob, p.branch))
            n += 1
            if ct.tag != p.expected or ct.qualifier != p.qualifier:
                misses.append(f"{name}/{p.label} (mu={p.mu:g}, d={p.d:.6g}): got {ct}, expected {p.expected}")
    dt = time.perf_counter() - t0
    ok = not misses and dt < 30.0
    detail = f"{n - len(misses)}/{n} published types reproduced"
    if misses:
        detail += "; " + "; ".join(misses)
    acceptance(3, ok, detail, dt)
    assert ok, detail


def test_criterion_04_conservation(acceptance, preset_traces):
    t0 = time.perf_counter()
    drifts = {k: float(np.max(v["curve"].drift())) for k, v in preset_traces.items()}
    worst = max(drifts, key=drifts.get)
    ok = drifts[worst] < 1e-8
    acceptance(4, ok, f"max drift {drifts[worst]:.2e} over {len(drifts)} curves (worst {'/'.join(worst)}), tol 1e-8",
               time.perf_counter() - t0)
    assert ok


def test_criterion_05_euler_lagrange(acceptance, preset_traces):
    t0 = time.perf_counter()
    res = {}
    for k, v in preset_traces.items():
        c = v["curve"]
        mask = c.interior()
        res[k] = float(np.max(np.abs(c.el_residual()[mask])))
    worst = max(res, key=res.get)
    ok = res[worst] < 1e-6
    acceptance(5, ok, f"max interior residual {res[worst]:.2e} (worst {'/'.join(worst)}), tol 1e-6",
               time.perf_counter() - t0)
    assert ok


def test_criterion_06_skew_identity(acceptance, preset_traces):
    t0 = time.perf_counter()
    skew = hk = 0.0
    for v in preset_traces.values():
        rep = verify_surface(revolve(v["curve"], 64, rings=400))
        skew = max(skew, rep.max_skew_residual)
        hk = max(hk, rep.max_hk_residual)
    oracle = {}
    for p in expand("fig3"):
        prob = EnergyProblem(p.mu, p.rho)
        c = integrate_profile(prob, p.d, find_branch(p.d, prob, p.branch), TraceOptions(samples=1024))
        m = revolve(c, 512)
        lo, hi = discrete_principal_curvatures(m)
        mask = oracle_mask(m) & np.isfinite(lo)
        k_lo, k_hi = np.minimum(m.k1, m.k2), np.maximum(m.k1, m.k2)
        oracle[p.label] = float(max(np.max(np.abs(lo - k_lo)[mask]), np.max(np.abs(hi - k_hi)[mask])))
        res_rings = m.rings
    worst = max(oracle, key=oracle.get)
    ok = skew < 1e-8 and hk < 1e-10 and oracle[worst] < 1e-2
    acceptance(
        6, ok,
        f"skew {skew:.1e} (tol 1e-8), H^2-K+rho {hk:.1e} (tol 1e-10), "
        f"discrete oracle {oracle[worst]:.1e} at {res_rings}x512 (worst {worst}, tol 1e-2)",
        time.perf_counter() - t0,
    )
    assert ok


def test_criterion_07_constant_solutions(acceptance):
    t0 = time.perf_counter()
    grid = [(rho, mu) for rho in np.linspace(-2.0, 2.0, 10) for mu in np.linspace(0.2, 2.0, 10)]
    grid += [(1.0, 0.5), (4.0, 0.25), (1.0, 1.0)]  # 4 rho mu^2 = 1 twice, > 1 once
    err, bad = 0.0, []
    for rho, mu in grid:
        prob = EnergyProblem(float(mu), float(rho))
        sols = constant_solutions(prob)
        disc = 1 - 4 * rho * mu * mu
        if disc < -1e-12:
            if sols:
                bad.append((rho, mu))
            continue
        if abs(disc) <= 1e-12:
            if len(sols) != 1 or sols[0].kind != ConstantKind.CIRCLE:
                bad.append((rho, mu))
                continue
            err = max(err, abs(sols[0].kappa0 - 1 / (2 * mu)))
            err = max(err, abs(sols[0].kappa0 - math.sqrt(rho)))
            continue
        ref = sorted([(1 - math.sqrt(disc)) / (2 * mu), (1 + math.sqrt(disc)) / (2 * mu)])
        got = [s.kappa0 for s in sols]
        err = max(err, max(abs(a - b) / max(1.0, abs(b)) for a, b in zip(got, ref)))
        lo, hi = sols
        if rho == 0:
            want = [ConstantKind.GEODESIC, ConstantKind.CIRCLE]
        elif rho > 0:
            want = [ConstantKind.PARALLEL, ConstantKind.PARALLEL]
        else:
            want = [ConstantKind.HYPERCYCLE, ConstantKind.CIRCLE]
        if [lo.kind, hi.kind] != want:
            bad.append((rho, mu))
    ok = err < 1e-14 and not bad
    acceptance(7, ok, f"{len(grid)} (rho, mu) points, max root error {err:.1e} (tol 1e-14), kind mismatches {len(bad)}",
               time.perf_counter() - t0)
    assert ok


def test_criterion_08_symmetry_and_axis(acceptance, preset_traces):
    t0 = time.perf_counter()
    sym, ang = 0.0, 0.0
    for v in preset_traces.values():
        c = v["curve"]
        if c.branch.kind == "separatrix-inner":
            continue
        sym = max(sym, symmetry_error(c))
        if c.branch.kind == "axis":
            ang = max(ang, axis_angle(c))
    ok = sym < 1e-9 and ang < 1e-4
    acceptance(8, ok, f"mirror symmetry {sym:.1e} (tol 1e-9), axis angle {ang:.1e} rad (tol 1e-4)",
               time.perf_counter() - t0)
    assert ok


def test_criterion_09_dilation(acceptance):
    t0 = time.perf_counter()
    lam = 2.0
    prob = EnergyProblem(1.0, 0.0)
    c = integrate_profile(prob, 0.5, find_branch(0.5, prob, "axis"), TraceOptions(ds=1e-3))
    prob2 = dilate(prob, lam)
    sl = c.uniform
    mask = c.interior()[sl]
    # rescaled curve: points times lam, arc-length step times lam, curvature over lam
    pts = lam * c.points[sl, :2]
    h2 = lam * c.h
    kappa2 = c.kappa[sl] / lam
    d2 = first_integral_level(CurvatureState(kappa2[mask], central_diff(kappa2, h2, 1)[mask]), prob2)
    err = float(np.max(np.abs(d2 - 0.5)))
    # the rescaled points carry that curvature
    v1 = np.stack([central_diff(pts[:, i], h2, 1) for i in (0, 1)], axis=1)
    v2 = np.stack([central_diff(pts[:, i], h2, 2) for i in (0, 1)], axis=1)
    k_geom = v1[:, 0] * v2[:, 1] - v1[:, 1] * v2[:, 0]
    k_err = float(np.max(np.abs(k_geom - kappa2)[mask]))
    ok = err < 1e-7
    acceptance(9, ok, f"mu=2 level of the lam=2 oval: max |d-0.5| = {err:.1e} (tol 1e-7), "
               f"curvature of rescaled points vs kappa/lam {k_err:.1e}", time.perf_counter() - t0)
    assert ok
    assert k_err < 1e-6


def test_criterion_10_regime_exclusion(acceptance):
    t0 = time.perf_counter()
    mus = np.linspace(0.5, 2.0, 50)
    ds = np.linspace(0.1, 10.0, 100)
    rows = sweep(1.0, mus, ds)
    dt = time.perf_counter() - t0
    tags = {}
    for r in rows:
        tags[r[4]] = tags.get(r[4], 0) + 1
    forbidden = tags.get("Borderline", 0) + tags.get("OrbitLike", 0)
    errors = tags.get("Error", 0)
    ok = forbidden == 0 and errors == 0 and dt < 60.0
    summary = ", ".join(f"{k} {v}" for k, v in sorted(tags.items()))
    acceptance(10, ok, f"50x100 sweep, rho=1: {summary}; Borderline/OrbitLike {forbidden}", dt)
    assert ok
