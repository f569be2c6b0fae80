"""Rotational surfaces swept by critical curves, and their curvature checks.

A profile point p = (p1, p2, p3) of the model of M^2(rho) is rotated about
the geodesic beta = {p1 = 0}:

    rho != 0   (p1 cos t, p1 sin t, p2, p3)       in R^4 (Euclidean or Lorentz)
    rho == 0   (p1 cos t, p1 sin t, p2, 0)

The principal curvatures are k1 = -kappa along the meridian and
k2 = -kappa + 1/mu along the parallels, so the skew curvature k2 - k1 is the
constant 1/mu. The unit normal is nu = -N with N the rotated profile normal.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .energy import EnergyProblem, canonical, central_diff, principal_curvatures_from_profile
from .errors import DomainError
from .geometry import model_residual, model_tolerance, quadratic_form
from .trace import ProfileCurve

PROJECTIONS = ("drop", "stereo")


@dataclass
class SurfaceMesh:
    """Vertices in R^4 with per-vertex curvature data.

    ``grid[i, j]`` is the vertex index of ring i (profile sample) and slice j
    (rotation angle). A ring on the rotation axis collapses to one vertex, so
    every entry of such a row is the same index. ``profile`` keeps the source
    curve columns used by :func:`verify_surface`.
    """

    rho: float
    mu: float
    d: float
    vertices: np.ndarray
    faces: list[tuple[int, ...]]
    k1: np.ndarray
    k2: np.ndarray
    skew_residual: np.ndarray
    orbit_curvature_sq: np.ndarray
    normals: np.ndarray
    grid: np.ndarray
    ring_index: np.ndarray
    axis_rings: list[int]
    profile: dict = field(default_factory=dict)

    @property
    def rings(self) -> int:
        return self.grid.shape[0]

    @property
    def slices(self) -> int:
        return self.grid.shape[1]


@dataclass
class VerificationReport:
    skew: float
    max_skew_residual: float
    max_hk_residual: float
    max_model_residual: float
    max_flow_residual: float
    min_orbit_curvature_shifted: float
    umbilic_vertices: int
    axis_rings: list[dict]
    mean_curvature: np.ndarray = field(repr=False)
    gauss_curvature: np.ndarray = field(repr=False)

    def max_residuals(self) -> dict:
        return {
            "skew": self.max_skew_residual,
            "h2_minus_k": self.max_hk_residual,
            "model": self.max_model_residual,
            "flow": self.max_flow_residual,
        }

    def passed(self, skew_tol: float = 1e-8, hk_tol: float = 1e-10) -> bool:
        return (
            self.max_skew_residual < skew_tol
            and self.max_hk_residual < hk_tol
            and self.umbilic_vertices == 0
            and self.min_orbit_curvature_shifted > 0
        )

    def to_dict(self) -> dict:
        return {
            "skew": self.skew,
            "max_residuals": self.max_residuals(),
            "min_orbit_curvature_shifted": self.min_orbit_curvature_shifted,
            "umbilic_vertices": self.umbilic_vertices,
            "axis_rings": self.axis_rings,
        }


def orbit_curvature_sq(kappa, prob: EnergyProblem, d: float):
    """Squared curvature d / (mu^2 exp(2 mu kappa)) - rho of the rotation orbits."""
    if not d > 0:
        raise DomainError(f"level d must be positive, got {d!r}")
    k = np.asarray(kappa, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        out = d / (prob.mu**2 * np.exp(2 * prob.mu * k)) - prob.rho
    return float(out) if out.ndim == 0 else out


def flow_velocity(kappa, prob: EnergyProblem):
    """Speed |mu| exp(mu kappa) of the rotation flow along the profile."""
    k = np.asarray(kappa, dtype=float)
    out = abs(prob.mu) * np.exp(prob.mu * k)
    return float(out) if out.ndim == 0 else out


# -- construction ----------------------------------------------------------------------


def _lift(p, theta):
    """Rotate 3-vectors about beta into R^4 (one row per angle)."""
    c, s = np.cos(theta), np.sin(theta)
    p = np.asarray(p, dtype=float)
    return np.stack(
        [p[..., 0] * c, p[..., 0] * s, np.broadcast_to(p[..., 1], c.shape), np.broadcast_to(p[..., 2], c.shape)],
        axis=-1,
    )


def _model_normals(points, tangents, rho: float) -> np.ndarray:
    """Unit N orthogonal to the position and tangent in the model, with N = J T in the plane."""
    if rho == 0:
        t = tangents[:, :2]
        n = np.stack([-t[:, 1], t[:, 0], np.zeros(len(t))], axis=1)
    else:
        # N = P x T with P scaled to unit length; in Lorentz signature the
        # last component of the cross product changes sign
        P = points * math.sqrt(abs(rho))
        n = np.cross(P, tangents)
        if rho < 0:
            n[:, 2] *= -1.0
    norm = np.sqrt(np.abs(quadratic_form(n, rho)))
    with np.errstate(invalid="ignore", divide="ignore"):
        return n / norm[:, None]


def _pick_rings(n: int, rings: int | None) -> np.ndarray:
    """Every k-th sample with the smallest k giving at most ``rings`` rings, plus the last.

    A constant stride keeps the ring spacing uniform in arc length, which the
    discrete curvature oracle needs.
    """
    if rings is None or rings >= n:
        return np.arange(n)
    if rings < 2:
        raise DomainError("need at least 2 rings")
    stride = -(-(n - 1) // (rings - 1))
    idx = np.arange(0, n, stride)
    if idx[-1] != n - 1:
        idx = np.append(idx[:-1] if idx.size >= rings else idx, n - 1)
    return idx


def revolve(curve: ProfileCurve, angular_samples: int = 64, rings: int | None = None) -> SurfaceMesh:
    """Sweep a traced profile around beta.

    Only the traced side of the curve is used; a mirror half added by
    ``trace.reflect_complete`` sweeps the same surface. ``rings`` subsamples
    the profile evenly by index (endpoints kept) so every ring still carries
    exact curvature data.
    """
    if angular_samples < 3:
        raise DomainError("angular_samples must be >= 3")
    rho, d = curve.rho, curve.d
    prob = curve.problem
    keep = curve.side > 0
    pts = curve.points[keep]
    res = model_residual(pts, rho)
    if np.any(res > 1e3 * model_tolerance(rho)):
        raise DomainError(f"profile leaves the model of M^2({rho}): residual {np.max(res):.3e}")

    x_all, kappa_all = curve.x[keep], curve.kappa[keep]
    idx = _pick_rings(pts.shape[0], rings)
    if rings is not None and idx.size > 3:
        # keep the sample next to each axis point so the apex fan closes on
        # the near-axis ring and not on an arbitrary subsampled one
        near = [k for k, j in ((1, 0), (x_all.size - 2, x_all.size - 1)) if x_all[j] == 0]
        idx = np.union1d(idx, near).astype(int)
    x, kappa, p = x_all[idx], kappa_all[idx], pts[idx]

    with np.errstate(invalid="ignore", divide="ignore"):
        tan = curve.tangents()[keep][idx]
    nrm = _model_normals(p, tan, rho)

    theta = 2 * math.pi * np.arange(angular_samples) / angular_samples
    on_axis = x == 0
    verts, normals, ring_of = [], [], []
    grid = np.empty((idx.size, angular_samples), dtype=np.int64)
    count = 0
    for i in range(idx.size):
        if on_axis[i]:
            v = np.array([[0.0, 0.0, p[i, 1], p[i, 2]]])
            # limit normal along the axis: the in-plane component vanishes
            nv = np.array([[0.0, 0.0, 0.0, 0.0]])
            grid[i, :] = count
        else:
            v = _lift(p[i], theta)
            nv = -_lift(nrm[i], theta)
            grid[i, :] = count + np.arange(angular_samples)
        verts.append(v)
        normals.append(nv)
        ring_of.append(np.full(v.shape[0], i))
        count += v.shape[0]
    verts = np.concatenate(verts)
    normals = np.concatenate(normals)
    ring_of = np.concatenate(ring_of)
    faces: list[tuple[int, ...]] = []
    nxt = np.roll(np.arange(angular_samples), -1)
    for i in range(idx.size - 1):
        a, b = grid[i], grid[i + 1]
        if on_axis[i] and on_axis[i + 1]:
            continue
        if on_axis[i]:
            faces.extend(zip(a, b[nxt], b))
        elif on_axis[i + 1]:
            faces.extend(zip(a, a[nxt], b))
        else:
            faces.extend(zip(a, a[nxt], b[nxt], b))
    faces = [tuple(int(k) for k in f) for f in faces]

    k = kappa[ring_of]
    with np.errstate(invalid="ignore"):
        pc = principal_curvatures_from_profile(k, prob)
        skew_res = np.abs((pc.k2 - pc.k1) - 1.0 / prob.mu)
    eta = orbit_curvature_sq(k, prob, d)

    return SurfaceMesh(
        rho=rho,
        mu=prob.mu,
        d=d,
        vertices=verts,
        faces=faces,
        k1=pc.k1,
        k2=pc.k2,
        skew_residual=skew_res,
        orbit_curvature_sq=eta,
        normals=normals,
        grid=grid,
        ring_index=ring_of,
        axis_rings=[int(i) for i in np.flatnonzero(on_axis)],
        profile={
            "x": x,
            "kappa": kappa,
            "ring_source": idx,
            "in_plane_normal": nrm[:, 0],
            "curve": curve,
            "periods": curve.meta.get("periods", 1),
        },
    )


# -- verification ----------------------------------------------------------------------


def _flow_residual(curve: ProfileCurve) -> float:
    """max |V_ss + (k^2 - k/mu + rho) V| over interior samples, V = |mu| exp(mu kappa)."""
    if "uniform" not in curve.meta:
        return math.nan
    prob, flipped = canonical(curve.problem)
    mask = curve.interior()
    if not mask.any():
        return math.nan
    sl = curve.uniform
    kappa = -curve.kappa[sl] if flipped else curve.kappa[sl]
    V = flow_velocity(kappa, prob)
    res = central_diff(V, curve.h, 2) + (kappa**2 - kappa / prob.mu + prob.rho) * V
    full = np.full(len(curve), np.nan)
    full[sl] = res
    return float(np.nanmax(np.abs(full[mask])))


def verify_surface(mesh: SurfaceMesh, prob: EnergyProblem | None = None) -> VerificationReport:
    """Recompute the curvature identities on a mesh.

    Axis rings (kappa -> -infinity) are excluded from the maxima and listed
    separately with the angle between the surface normals on opposite sides
    of the axis at the nearest finite ring. A smooth surface gives ~0 there,
    a cone point would not.
    """
    if prob is None:
        prob = EnergyProblem(mesh.mu, mesh.rho)
    finite = np.isfinite(mesh.k1) & np.isfinite(mesh.k2)
    k1, k2 = mesh.k1[finite], mesh.k2[finite]
    H = 0.5 * (mesh.k1 + mesh.k2)
    K = mesh.k1 * mesh.k2 + prob.rho
    hk = np.abs(H[finite] ** 2 - K[finite] + prob.rho - 0.25 / prob.mu**2)
    umbilic = int(np.count_nonzero(np.abs(k2 - k1) < 1e-12))

    axis_info = []
    nip = mesh.profile.get("in_plane_normal")
    for i in mesh.axis_rings:
        nb = i + 1 if i + 1 < mesh.rings and i + 1 not in mesh.axis_rings else i - 1
        dev = math.nan
        if nip is not None and 0 <= nb < mesh.rings:
            dev = 2.0 * math.asin(min(1.0, abs(float(nip[nb]))))
        axis_info.append(
            {"ring": int(i), "vertex": int(mesh.grid[i, 0]), "k1_finite": False, "normal_deviation": dev}
        )

    curve = mesh.profile.get("curve")
    flow = _flow_residual(curve) if curve is not None else math.nan
    return VerificationReport(
        skew=1.0 / prob.mu,
        max_skew_residual=float(np.max(mesh.skew_residual[finite])) if finite.any() else math.nan,
        max_hk_residual=float(np.max(hk)) if hk.size else math.nan,
        max_model_residual=float(np.max(_vertex_model_residual(mesh.vertices, mesh.rho))),
        max_flow_residual=flow,
        min_orbit_curvature_shifted=float(np.min(mesh.orbit_curvature_sq[finite] + prob.rho))
        if finite.any()
        else math.nan,
        umbilic_vertices=umbilic,
        axis_rings=axis_info,
        mean_curvature=H,
        gauss_curvature=K,
    )


def _vertex_model_residual(v: np.ndarray, rho: float) -> np.ndarray:
    if rho == 0:
        return np.abs(v[:, 3])
    return np.abs(quadratic_form(v, rho) - 1.0 / rho)


# -- discrete oracle (rho = 0) -------------------------------------------------------------

def _vertex_normals(P: np.ndarray, g: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Unit normals P_theta x P_s from central differences on the grid rows."""
    Ps = P[g[rows + 1]] - P[g[rows - 1]]
    c = P[g[rows]]
    Pt = np.roll(c, -1, axis=1) - np.roll(c, 1, axis=1)
    nu = np.cross(Pt, Ps)
    return nu / np.linalg.norm(nu, axis=-1, keepdims=True)


def discrete_principal_curvatures(mesh: SurfaceMesh, chunk: int = 128) -> tuple[np.ndarray, np.ndarray]:
    """Principal curvatures from the mesh vertices alone.

    Vertex normals come from central differences (P_theta x P_s, the same
    orientation as the analytic nu). The shape operator S is then the 2x2
    map with d nu = -S dP along the two grid directions, both taken as
    central differences and expressed in an orthonormal tangent frame. Its
    symmetrized eigenvalues, sorted, are returned per vertex; rings within
    two of an axis ring or a profile end come back as NaN.
    Euclidean (rho = 0) meshes only.
    """
    if mesh.rho != 0:
        raise DomainError("the discrete oracle works on Euclidean meshes only")
    P = mesh.vertices[:, :3]
    g = mesh.grid
    nr = g.shape[0]
    lo = np.full(len(P), np.nan)
    hi = np.full(len(P), np.nan)
    bad = np.zeros(nr, dtype=bool)
    for i in mesh.axis_rings:
        bad[max(0, i - 2) : i + 3] = True
    bad[:2] = bad[-2:] = True
    rows = np.flatnonzero(~bad)
    for start in range(0, rows.size, chunk):
        r = rows[start : start + chunk]
        nu = _vertex_normals(P, g, r)
        nu_up = _vertex_normals(P, g, r + 1)
        nu_dn = _vertex_normals(P, g, r - 1)
        c = P[g[r]]
        dPu = P[g[r + 1]] - P[g[r - 1]]
        dNu = nu_up - nu_dn
        dPv = np.roll(c, -1, axis=1) - np.roll(c, 1, axis=1)
        dNv = np.roll(nu, -1, axis=1) - np.roll(nu, 1, axis=1)
        e1 = dPu - np.sum(dPu * nu, axis=-1, keepdims=True) * nu
        e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
        e2 = np.cross(nu, e1)

        def frame(w):
            return np.stack([np.sum(w * e1, axis=-1), np.sum(w * e2, axis=-1)], axis=-1)

        X = np.stack([frame(dPu), frame(dPv)], axis=-1)  # columns are dP
        Y = -np.stack([frame(dNu), frame(dNv)], axis=-1)
        S = Y @ np.linalg.inv(X)
        S = 0.5 * (S + np.swapaxes(S, -1, -2))
        ev = np.linalg.eigvalsh(S)
        idx = g[r]
        lo[idx] = ev[..., 0]
        hi[idx] = ev[..., 1]
    return lo, hi


def oracle_mask(mesh: SurfaceMesh, frac: float = 0.2, floor: float = 0.1) -> np.ndarray:
    """Vertices away from axis rings: profile x >= max(frac x0, floor)."""
    x = mesh.profile["x"]
    x0 = float(np.max(x))
    ok_ring = x >= max(frac * x0, floor)
    return ok_ring[mesh.ring_index]


# -- export --------------------------------------------------------------------------------


def project(vertices: np.ndarray, rho: float, projection: str = "drop") -> np.ndarray:
    """3-space coordinates for viewing.

    ``drop`` removes the last coordinate; ``stereo`` projects the 3-sphere
    from (0, 0, 0, -R) or the hyperboloid into the Poincare ball,
    q = R X[:3] / (R + X4) with R = 1/sqrt|rho| in both cases.
    """
    if projection not in PROJECTIONS:
        raise DomainError(f"unknown projection {projection!r}")
    if rho == 0 or projection == "drop":
        return vertices[:, :3].copy()
    R = 1.0 / math.sqrt(abs(rho))
    den = R + vertices[:, 3]
    if np.any(np.abs(den) < 1e-9 * R):
        raise DomainError("a vertex sits at the stereographic projection point")
    return R * vertices[:, :3] / den[:, None]


def mesh_metadata(mesh: SurfaceMesh, report: VerificationReport, curve_type=None, projection="drop") -> dict:
    tag = None
    if curve_type is not None:
        tag = {"tag": curve_type.tag, "qualifier": curve_type.qualifier}
    return {
        "rho": mesh.rho,
        "mu": mesh.mu,
        "d": mesh.d,
        "type": tag,
        "skew": 1.0 / mesh.mu,
        "resolution": {"rings": mesh.rings, "slices": mesh.slices, "vertices": len(mesh.vertices)},
        "max_residuals": report.max_residuals(),
        "projection": projection if mesh.rho != 0 else "none",
        "axis_rings": report.axis_rings,
        "umbilic_vertices": report.umbilic_vertices,
        "periods": mesh.profile.get("periods", 1),
    }


def write_obj(mesh: SurfaceMesh, path, report: VerificationReport | None = None, curve_type=None,
              projection: str = "drop") -> tuple[str, str]:
    """OBJ file (1-based faces, %.9g) plus a ``.json`` sidecar."""
    path = str(path)
    if report is None:
        report = verify_surface(mesh)
    xyz = project(mesh.vertices, mesh.rho, projection)
    with open(path, "w") as fh:
        for v in xyz:
            fh.write("v %.9g %.9g %.9g\n" % tuple(v))
        for f in mesh.faces:
            fh.write("f " + " ".join(str(k + 1) for k in f) + "\n")
    side = os.path.splitext(path)[0] + ".json"
    with open(side, "w") as fh:
        json.dump(mesh_metadata(mesh, report, curve_type, projection), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path, side
