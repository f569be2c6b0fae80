"""Parameter sets of the published figure panels.

Exact published levels are kept verbatim. Levels given only approximately
(figure-eight, borderline, the pole-passing mu values) are solved for at
expansion time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .classify import (
    borderline_level,
    find_figure_eight,
    pole_borderline_mu,
    pole_figure_eight_mu,
)
from .energy import EnergyProblem
from .errors import DomainError
from .phase import components

PRESET_NAMES = ("fig1", "fig3", "fig4", "fig5", "fig6")


@dataclass(frozen=True)
class Panel:
    label: str
    rho: float
    mu: float
    d: float
    branch: str
    expected: str  # published tag
    qualifier: str | None = None
    periods: int = 1


# (label, d or solver key, branch, published tag) in panel order
_PLANE_ORDER = [
    ("oval", "d_oval", "axis", "Oval"),
    ("simple-biconcave", "d_simple", "axis", "SimpleBiconcave"),
    ("figure-eight", "figure-eight", "axis", "FigureEight"),
    ("non-simple-biconcave", "d_nonsimple", "axis", "NonSimpleBiconcave"),
    ("borderline", "borderline", "separatrix-outer", "Borderline"),
    ("orbit-like", "d_oval", "loop", "OrbitLike"),
]

_PANEL_LEVELS = {
    "fig3": dict(rho=0.0, mu=1.0, d_oval=0.5, d_simple=3.5, d_nonsimple=1.5),
    "fig4": dict(rho=1.0, mu=0.25, d_oval=0.95, d_simple=4.0, d_nonsimple=1.5),
    "fig6": dict(rho=-1.0, mu=1.0, d_oval=0.3, d_simple=8.0, d_nonsimple=0.6),
}

# fig1 surface names for the plane profiles of fig3
SURFACE_NAMES = {
    "oval": "ovaloid",
    "simple-biconcave": "vesicle",
    "figure-eight": "pinched-spheroid",
    "non-simple-biconcave": "immersed-spheroid",
    "borderline": "cylindrical-anti-nodoid",
    "orbit-like": "anti-nodoid",
}


def _plane_panels(name: str) -> list[Panel]:
    lv = _PANEL_LEVELS[name]
    prob = EnergyProblem(lv["mu"], lv["rho"])
    out = []
    for label, key, branch, tag in _PLANE_ORDER:
        if key == "figure-eight":
            d = find_figure_eight(prob)
        elif key == "borderline":
            d = borderline_level(prob)
        else:
            d = lv[key]
        out.append(Panel(label, lv["rho"], lv["mu"], d, branch, tag))
    return out


def _pole_panels() -> list[Panel]:
    entries = [
        ("orbit-like-a", 0.15, "OrbitLike"),
        ("orbit-like-b", 0.35, "OrbitLike"),
        ("borderline", pole_borderline_mu(1.0), "Borderline"),
        ("non-simple-biconcave-a", 0.42, "NonSimpleBiconcave"),
        ("non-simple-biconcave-b", 0.499, "NonSimpleBiconcave"),
        ("figure-eight", pole_figure_eight_mu(1.0), "FigureEight"),
        ("simple-biconcave", 0.6, "SimpleBiconcave"),
        ("oval", 1.0, "Oval"),
    ]
    out = []
    for label, mu, tag in entries:
        prob = EnergyProblem(mu, 1.0)
        d = mu * mu * math.e**2
        # the pole is reached by the component with the largest x0 (x0 = e)
        branch = max(components(d, prob), key=lambda b: b.x0).kind
        out.append(Panel(label, 1.0, mu, d, branch, tag, "pole-passing"))
    return out


def expand(name: str) -> list[Panel]:
    """Panels of a preset, left to right."""
    if name in _PANEL_LEVELS:
        return _plane_panels(name)
    if name == "fig5":
        return _pole_panels()
    if name == "fig1":
        return [
            Panel(SURFACE_NAMES[p.label], p.rho, p.mu, p.d, p.branch, p.expected,
                  periods=3 if p.branch == "loop" else 1)
            for p in _plane_panels("fig3")
        ]
    raise DomainError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
