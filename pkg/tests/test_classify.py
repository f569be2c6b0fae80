from __future__ import annotations

import math

import numpy as np
import pytest

from skewform.classify import (
    SWEEP_HEADER,
    CurveType,
    borderline_level,
    classify,
    classify_level,
    constant_type,
    find_figure_eight,
    parse_range,
    pole_borderline_mu,
    pole_figure_eight_mu,
    psi_sign_type,
    special_level,
    sweep,
    write_sweep,
    x0_at_e_level,
)
from skewform.energy import EnergyProblem, constant_solutions, dilate
from skewform.errors import DomainError, InconsistentBranchError, NoSignChangeError
from skewform.phase import BranchDescriptor, components, find_branch
from skewform.trace import pole_level, psi_at_zero

E = math.e

# figure-eight levels from a 30-digit mpmath root of psi(0; d) = 0
D_STAR_ORACLE = [
    (1.0, 0.0, 2.851238145174002),
    (0.25, 1.0, 2.730862559396474),
    (1.0, -1.0, 4.358441681198580),
]


def _tag(mu, rho, d, kind):
    prob = EnergyProblem(mu, rho)
    return classify(prob, d, find_branch(d, prob, kind))


@pytest.mark.parametrize(
    "mu, rho, d, kind, tag",
    [
        (1.0, 0.0, 0.5, "axis", "Oval"),
        (1.0, 0.0, 3.5, "axis", "SimpleBiconcave"),
        (1.0, 0.0, 1.5, "axis", "NonSimpleBiconcave"),
        (1.0, 0.0, 1.0, "separatrix-outer", "Borderline"),
        (1.0, 0.0, 0.5, "loop", "OrbitLike"),
        (0.25, 1.0, 0.95, "axis", "Oval"),
        (0.25, 1.0, 0.95, "loop", "OrbitLike"),
        (0.25, 1.0, 1.066772923567195, "separatrix-outer", "Borderline"),
        (0.25, 1.0, 4.0, "axis", "SimpleBiconcave"),
        (1.0, -1.0, 0.3, "axis", "Oval"),
        (1.0, -1.0, 8.0, "axis", "SimpleBiconcave"),
        (1.0, -1.0, 0.4700782294735448, "separatrix-outer", "Borderline"),
        (1.0, -1.0, 0.3, "loop", "OrbitLike"),
    ],
)
def test_published_examples(mu, rho, d, kind, tag):
    assert _tag(mu, rho, d, kind) == CurveType(tag)


def test_separatrix_inner_is_limit_oval():
    assert _tag(1.0, 0.0, 1.0, "separatrix-inner") == CurveType("Oval", "separatrix-limit")


def test_pole_qualifier():
    ct = _tag(0.6, 1.0, 0.36 * E * E, "axis")
    assert ct == CurveType("SimpleBiconcave", "pole-passing")
    assert str(ct) == "SimpleBiconcave(pole-passing)"
    # the other component of the pole level does not reach the pole
    prob = EnergyProblem(0.35, 1.0)
    d = pole_level(prob)
    tags = {b.kind: classify(prob, d, b) for b in components(d, prob)}
    assert tags["loop"] == CurveType("OrbitLike", "pole-passing")
    assert tags["axis"] == CurveType("Oval")


def test_level_and_branch_must_match():
    prob = EnergyProblem(1.0, 0.0)
    with pytest.raises(InconsistentBranchError):
        classify(prob, 0.5, BranchDescriptor("axis", 3.0))
    with pytest.raises(DomainError):
        classify(prob, -1.0, BranchDescriptor("axis", 3.0))


@pytest.mark.parametrize(
    "mu, rho, expected",
    [(1.0, 0.0, 1.0), (0.25, 1.0, 1.066772923567195), (1.0, -1.0, 0.4700782294735448)],
)
def test_borderline_level(mu, rho, expected):
    assert borderline_level(EnergyProblem(mu, rho)) == pytest.approx(expected, rel=1e-14)


def test_borderline_level_absent_without_saddle():
    assert borderline_level(EnergyProblem(0.5, 1.0)) is None
    assert borderline_level(EnergyProblem(1.0, 1.0)) is None


@pytest.mark.parametrize("mu, rho, expected", D_STAR_ORACLE)
def test_find_figure_eight_oracle(mu, rho, expected):
    prob = EnergyProblem(mu, rho)
    d_star = find_figure_eight(prob)
    assert d_star == pytest.approx(expected, rel=1e-9)
    assert abs(psi_at_zero(prob, d_star)) < 1e-10
    assert classify(prob, d_star, find_branch(d_star, prob, "axis")) == CurveType("FigureEight")


def test_figure_eight_independent_of_index_in_plane():
    a = find_figure_eight(EnergyProblem(1.0, 0.0))
    b = find_figure_eight(EnergyProblem(3.0, 0.0))
    assert b == pytest.approx(a, rel=1e-9)


def test_no_figure_eight_beyond_pole_value():
    with pytest.raises(NoSignChangeError):
        find_figure_eight(EnergyProblem(1.0, 1.0))


def test_single_sign_change_in_plane():
    prob = EnergyProblem(1.0, 0.0)
    d_star = D_STAR_ORACLE[0][2]
    coarse = np.arange(1.01, 6.0, 1e-2)
    fine = np.arange(d_star - 0.2, d_star + 0.2, 1e-3)
    ds = np.unique(np.concatenate([coarse, fine]))
    signs = np.sign([psi_at_zero(prob, d) for d in ds])
    assert np.count_nonzero(np.diff(signs)) == 1
    assert signs[0] > 0 and signs[-1] < 0


@pytest.mark.parametrize("d", [0.5, 1.5, 3.5])
def test_classify_dilation_invariant(d):
    p = EnergyProblem(1.0, 0.0)
    q = dilate(p, 2.5)
    assert [c for _, c in classify_level(p, d)] == [c for _, c in classify_level(q, d)]


def test_pole_mu_values():
    assert pole_borderline_mu(1.0) == pytest.approx(0.4023711712747059, rel=1e-12)
    m = pole_figure_eight_mu(1.0)
    prob = EnergyProblem(m, 1.0)
    assert abs(psi_at_zero(prob, pole_level(prob))) < 1e-10
    assert abs(m - 0.54) < 0.005
    with pytest.raises(DomainError):
        pole_borderline_mu(-1.0)


def test_special_levels():
    prob = EnergyProblem(1.0, 0.0)
    assert special_level(prob, "borderline") == 1.0
    assert special_level(EnergyProblem(1.0, 1.0), "pole") == pytest.approx(E * E)
    with pytest.raises(DomainError):
        special_level(EnergyProblem(1.0, 1.0), "borderline")
    with pytest.raises(DomainError):
        special_level(prob, "pole")
    with pytest.raises(DomainError):
        special_level(prob, "cusp")


def test_no_saddle_regime():
    prob = EnergyProblem(0.75, 1.0)
    for b, ct in classify_level(prob, 5.0):
        assert ct.tag in ("SimpleBiconcave", "NonSimpleBiconcave", "FigureEight")


def test_oval_window_above_borderline():
    # levels in (F(x-), F(e)] still give axis branches with x0 <= e
    prob = EnergyProblem(0.45, 1.0)
    lev = x0_at_e_level(prob)
    assert lev == pytest.approx(0.2025 * E * E)
    assert borderline_level(prob) < 1.4 < lev
    axis = find_branch(1.4, prob, "axis")
    assert axis.x0 < E
    assert classify(prob, 1.4, axis) == CurveType("Oval")


def test_psi_sign_type():
    assert psi_sign_type(1e-11) == "FigureEight"
    assert psi_sign_type(1e-3) == "NonSimpleBiconcave"
    assert psi_sign_type(-1e-3) == "SimpleBiconcave"


def test_constant_types():
    tags = [constant_type(s).tag for s in constant_solutions(EnergyProblem(1.0, -1.0))]
    assert tags == ["Hypercycle", "Circle"]


def test_sweep_order_and_workers(tmp_path):
    mus, ds = parse_range("0.5:1:3"), parse_range("0.5:4:4")
    rows = sweep(0.0, mus, ds)
    assert rows == sweep(0.0, mus, ds, workers=2)
    assert [r[1] for r in rows] == sorted(r[1] for r in rows)
    path = write_sweep(rows, tmp_path / "s.csv")
    lines = open(path).read().splitlines()
    assert lines[0] == SWEEP_HEADER
    assert len(lines) == len(rows) + 1


@pytest.mark.parametrize("text", ["1:2", "a:b:3", "0:1:0", "0:inf:3"])
def test_parse_range_rejects(text):
    with pytest.raises(DomainError):
        parse_range(text)
