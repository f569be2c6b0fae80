from __future__ import annotations

import pytest

from skewform.energy import EnergyProblem
from skewform.phase import find_branch
from skewform.presets import expand
from skewform.trace import TraceOptions, integrate_profile

PRESET_SETS = ("fig3", "fig4", "fig6", "fig5")


def _trace_panel(panel):
    prob = EnergyProblem(panel.mu, panel.rho)
    branch = find_branch(panel.d, prob, panel.branch)
    curve = integrate_profile(prob, panel.d, branch, TraceOptions())
    return {"panel": panel, "prob": prob, "branch": branch, "curve": curve}


@pytest.fixture(scope="session")
def preset_panels():
    """Every curve preset panel as (set name, Panel), in panel order."""
    return [(name, p) for name in PRESET_SETS for p in expand(name)]


@pytest.fixture(scope="session")
def preset_traces(preset_panels):
    """Traced curves for every preset panel, keyed by (set name, label)."""
    return {(name, p.label): _trace_panel(p) for name, p in preset_panels}


@pytest.fixture(scope="session")
def oval_plane():
    prob = EnergyProblem(1.0, 0.0)
    branch = find_branch(0.5, prob, "axis")
    return integrate_profile(prob, 0.5, branch, TraceOptions())


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    lines = request.config.stash[_ACCEPTANCE]

    def record(number: int, ok: bool, detail: str, seconds: float):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {detail} [{seconds:.2f} s]"
        lines.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
