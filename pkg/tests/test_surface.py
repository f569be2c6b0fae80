from __future__ import annotations

import json
import math

import numpy as np
import pytest

from skewform.energy import EnergyProblem, central_diff
from skewform.errors import DomainError
from skewform.geometry import quadratic_form
from skewform.phase import find_branch
from skewform.surface import (
    discrete_principal_curvatures,
    flow_velocity,
    oracle_mask,
    orbit_curvature_sq,
    project,
    revolve,
    verify_surface,
    write_obj,
)
from skewform.trace import TraceOptions, integrate_profile, reflect_complete

E = math.e


def _trace(mu, rho, d, kind, **kw):
    prob = EnergyProblem(mu, rho)
    return integrate_profile(prob, d, find_branch(d, prob, kind), TraceOptions(**kw))


@pytest.fixture(scope="module")
def oval_mesh(oval_plane):
    return revolve(oval_plane, 32, rings=200)


def _euler_characteristic(mesh):
    edges = set()
    for f in mesh.faces:
        for a, b in zip(f, f[1:] + f[:1]):
            edges.add((min(a, b), max(a, b)))
    return len(mesh.vertices) - len(edges) + len(mesh.faces)


@pytest.mark.parametrize(
    "kappa, mu, rho, d, expected",
    [(0.0, 1.0, 0.0, 1.0, 1.0), (1.0, 1.0, 0.0, E * E, 1.0), (0.0, 2.0, -1.0, 4.0, 2.0)],
)
def test_orbit_curvature_sq(kappa, mu, rho, d, expected):
    assert orbit_curvature_sq(kappa, EnergyProblem(mu, rho), d) == pytest.approx(expected, rel=1e-15)


def test_orbit_curvature_rejects_level():
    with pytest.raises(DomainError):
        orbit_curvature_sq(0.0, EnergyProblem(1.0), 0.0)


@pytest.mark.parametrize("kappa, mu, expected", [(0.0, 1.0, 1.0), (0.5, 2.0, 2 * E)])
def test_flow_velocity(kappa, mu, expected):
    assert flow_velocity(kappa, EnergyProblem(mu)) == pytest.approx(expected, rel=1e-15)


def test_oval_mesh_is_a_sphere(oval_mesh):
    assert _euler_characteristic(oval_mesh) == 2
    assert len(oval_mesh.axis_rings) == 2
    assert all(len(f) in (3, 4) for f in oval_mesh.faces)


def test_oval_report(oval_mesh):
    rep = verify_surface(oval_mesh)
    assert rep.skew == 1.0
    assert rep.max_skew_residual < 1e-8
    assert rep.max_hk_residual < 1e-10
    assert rep.umbilic_vertices == 0
    assert rep.min_orbit_curvature_shifted > 0
    assert rep.passed()
    for info in rep.axis_rings:
        assert info["k1_finite"] is False
        assert info["normal_deviation"] < 1e-3


def test_axis_distance_and_rotation_invariance(oval_mesh):
    m = oval_mesh
    c = m.profile
    radius = np.hypot(m.vertices[:, 0], m.vertices[:, 1])
    expected = m.mu * c["x"][m.ring_index] / math.sqrt(m.d)
    np.testing.assert_allclose(radius, expected, atol=1e-14)
    g = m.grid
    for arr in (m.k1, m.k2):
        rows = arr[g]
        finite = np.isfinite(rows[:, 0])
        np.testing.assert_array_equal(rows[finite], np.repeat(rows[finite, :1], g.shape[1], axis=1))
    rows = radius[g]
    np.testing.assert_allclose(rows, np.repeat(rows[:, :1], g.shape[1], axis=1), rtol=1e-14, atol=1e-16)


@pytest.mark.parametrize("mu, rho, d, kind", [(0.25, 1.0, 4.0, "axis"), (1.0, -1.0, 0.3, "loop"), (0.6, 1.0, 0.36 * E * E, "axis")])
def test_vertices_on_four_dimensional_model(mu, rho, d, kind):
    m = revolve(_trace(mu, rho, d, kind), 24, rings=150)
    res = np.abs(quadratic_form(m.vertices, rho) - 1.0 / rho)
    assert np.max(res) < 1e-10
    if rho < 0:
        assert np.all(m.vertices[:, 3] > 0)
    rep = verify_surface(m)
    assert rep.max_skew_residual < 1e-8 and rep.max_hk_residual < 1e-10


def test_reflected_curve_gives_same_surface(oval_plane):
    a = revolve(oval_plane, 16, rings=100)
    b = revolve(reflect_complete(oval_plane), 16, rings=100)
    np.testing.assert_array_equal(a.vertices, b.vertices)


def test_orbit_like_tube_is_periodic():
    assert revolve(_trace(1.0, 0.0, 0.5, "loop", periods=3), 8).profile["periods"] == 3
    # with two periods the sample grid also divides one period
    c = _trace(1.0, 0.0, 0.5, "loop", periods=2)
    m = revolve(c, 16)
    assert m.axis_rings == []
    n = (len(c) - 1) // 2
    p = m.vertices[m.grid[:, 0]]
    r = np.hypot(p[:, 0], p[:, 1])
    np.testing.assert_allclose(r[n:], r[:-n], atol=1e-9)
    shift = p[n:, 2] - p[:-n, 2]
    assert np.ptp(shift) < 1e-9 and abs(shift[0]) > 0.1


def test_flow_velocity_equation(oval_plane):
    rep = verify_surface(revolve(oval_plane, 8))
    assert rep.max_flow_residual < 1e-7


def test_flow_velocity_equation_on_preset_curves(preset_traces):
    # V_ss + (kappa^2 - kappa/mu + rho) V = 0, scaled by max(1, size of the two terms)
    worst = 0.0
    for v in preset_traces.values():
        c, prob = v["curve"], v["prob"]
        sl = c.uniform
        k = c.kappa[sl]
        V = flow_velocity(k, prob)
        a = central_diff(V, c.h, 2)
        b = (k * k - k / prob.mu + prob.rho) * V
        m = c.interior()[sl]
        worst = max(worst, float(np.max(np.abs(a + b)[m] / np.maximum(1.0, np.abs(a) + np.abs(b))[m])))
    assert worst < 1e-7


def test_discrete_oracle_converges(oval_plane):
    errs = []
    for n in (256, 512):
        c = _trace(1.0, 0.0, 0.5, "axis", samples=n)
        m = revolve(c, n // 2, rings=n)
        lo, hi = discrete_principal_curvatures(m)
        mask = oracle_mask(m) & np.isfinite(lo)
        k_lo, k_hi = np.minimum(m.k1, m.k2), np.maximum(m.k1, m.k2)
        errs.append(max(np.max(np.abs(lo - k_lo)[mask]), np.max(np.abs(hi - k_hi)[mask])))
    assert errs[1] < 1e-3
    # second order in the grid spacing
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.15)


def test_discrete_oracle_plane_only():
    m = revolve(_trace(1.0, -1.0, 0.3, "axis"), 8, rings=50)
    with pytest.raises(DomainError):
        discrete_principal_curvatures(m)


def test_revolve_rejects_bad_input(oval_plane):
    with pytest.raises(DomainError):
        revolve(oval_plane, 2)
    bad = _trace(1.0, 1.0 / 16, 0.5, "axis")
    bad.points = bad.points * 1.001
    with pytest.raises(DomainError):
        revolve(bad, 8)


def test_projection():
    R = 2.0
    v = np.array([[0.0, 0.0, 0.0, R], [R, 0.0, 0.0, 0.0]])
    np.testing.assert_allclose(project(v, 0.25, "stereo"), [[0, 0, 0], [R, 0, 0]])
    np.testing.assert_array_equal(project(v, 0.25, "drop"), v[:, :3])
    # the hyperboloid lands inside the ball of radius R
    m = revolve(_trace(1.0, -0.25, 0.3, "axis"), 8, rings=40)
    q = project(m.vertices, -0.25, "stereo")
    assert np.max(np.linalg.norm(q, axis=1)) < R
    with pytest.raises(DomainError):
        project(v, 0.25, "orthographic")


def test_write_obj(tmp_path, oval_mesh):
    path, side = write_obj(oval_mesh, tmp_path / "oval.obj")
    lines = open(path).read().splitlines()
    vs = [ln for ln in lines if ln.startswith("v ")]
    fs = [ln for ln in lines if ln.startswith("f ")]
    assert len(vs) == len(oval_mesh.vertices) and len(fs) == len(oval_mesh.faces)
    idx = [int(t) for ln in fs for t in ln.split()[1:]]
    assert min(idx) == 1 and max(idx) == len(vs)
    meta = json.load(open(side))
    for key in ("rho", "mu", "d", "type", "skew", "resolution", "max_residuals", "projection"):
        assert key in meta
    assert meta["max_residuals"]["skew"] < 1e-8
