"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 I/O error.
Every failure prints one JSON object ``{"error": code, "message": ...}`` to
stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .classify import classify, classify_with_psi, parse_range, special_level, sweep, write_sweep
from .energy import EnergyProblem
from .errors import DomainError, NumericalError, SkewformError, ValidationError
from .phase import BRANCH_KINDS, components, find_branch, portrait
from .presets import PRESET_NAMES, expand
from .surface import PROJECTIONS, revolve, verify_surface, write_obj
from .trace import (
    TraceOptions,
    check_invariants,
    integrate_profile,
    load_curve,
    reflect_complete,
    write_curve,
)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

BRANCH_ALIASES = {"sep-inner": "separatrix-inner", "sep-outer": "separatrix-outer"}
BRANCH_CHOICES = ("axis", "loop", "sep-inner", "sep-outer", "separatrix-inner", "separatrix-outer")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


def _real(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be finite: {text!r}")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return v


def _branch(text: str) -> str:
    return BRANCH_ALIASES.get(text, text)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="skewform", description="Critical curves of the exponential curvature energy "
                "and the rotational surfaces of constant skew curvature they generate.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def problem_args(q, need_d=True):
        q.add_argument("--rho", type=_real, default=0.0, help="ambient curvature (default 0)")
        q.add_argument("--mu", type=_real, required=True, help="energy index, nonzero")
        if need_d:
            q.add_argument("--d", type=_real, required=True, help="first-integral level, > 0")

    q = sub.add_parser("phase", help="export the phase portrait as JSON")
    problem_args(q, need_d=False)
    q.add_argument("--d", type=_real, nargs="*", default=[], help="levels to include")
    q.add_argument("--samples", type=_positive_int, default=512)
    q.add_argument("--out", required=True)

    q = sub.add_parser("classify", help="curve type of each branch of a level")
    problem_args(q)
    q.add_argument("--branch", type=_branch, choices=BRANCH_KINDS, metavar="{" + ",".join(BRANCH_CHOICES) + "}")

    q = sub.add_parser("trace", help="trace one branch to CSV (+ JSON sidecar)")
    problem_args(q)
    q.add_argument("--branch", type=_branch, choices=BRANCH_KINDS, required=True,
                   metavar="{" + ",".join(BRANCH_CHOICES) + "}")
    q.add_argument("--samples", type=_positive_int, help="samples per half (overrides spacing)")
    q.add_argument("--budget", type=_real, help="arc length allowed on asymptotic branches")
    q.add_argument("--periods", type=_positive_int, default=1)
    q.add_argument("--reflect", action="store_true", help="close axis branches across beta")
    q.add_argument("--out", required=True)

    q = sub.add_parser("special", help="figure-eight, borderline or pole level")
    problem_args(q, need_d=False)
    q.add_argument("--kind", choices=("figure-eight", "borderline", "pole"), required=True)

    q = sub.add_parser("surface", help="rotational surface mesh as OBJ (+ JSON sidecar)")
    problem_args(q)
    q.add_argument("--branch", type=_branch, choices=BRANCH_KINDS, required=True,
                   metavar="{" + ",".join(BRANCH_CHOICES) + "}")
    q.add_argument("--rings", type=_positive_int, default=400)
    q.add_argument("--slices", type=_positive_int, default=64)
    q.add_argument("--periods", type=_positive_int, default=1)
    q.add_argument("--projection", choices=PROJECTIONS, default="drop")
    q.add_argument("--out", required=True)

    q = sub.add_parser("sweep", help="classification map over a (mu, d) grid")
    q.add_argument("--rho", type=_real, default=0.0)
    q.add_argument("--mu-range", required=True, help="a:b:n")
    q.add_argument("--d-range", required=True, help="a:b:n")
    q.add_argument("--workers", type=_positive_int, default=1)
    q.add_argument("--out", required=True)

    q = sub.add_parser("verify", help="recheck the invariants of a stored trace")
    q.add_argument("--in", dest="path", required=True)

    q = sub.add_parser("preset", help="regenerate the data of a figure")
    q.add_argument("--name", choices=PRESET_NAMES, required=True)
    q.add_argument("--out", required=True, help="output directory")
    q.add_argument("--workers", type=_positive_int, default=1)
    return p


# -- helpers --------------------------------------------------------------------------------


def _problem(args) -> EnergyProblem:
    return EnergyProblem(args.mu, args.rho)


def _check_level(d: float) -> None:
    if not d > 0:
        raise DomainError(f"--d must be positive, got {d!r}")


def _check_env() -> None:
    env = os.environ.get("SKEWFORM_TOL")
    if env:
        try:
            v = float(env)
        except ValueError:
            raise ValidationError(f"SKEWFORM_TOL is not a number: {env!r}") from None
        if not (math.isfinite(v) and v > 0):
            raise ValidationError(f"SKEWFORM_TOL must be positive, got {env!r}")


def _emit(doc) -> None:
    sys.stdout.write(json.dumps(doc, sort_keys=True) + "\n")


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise FileNotFoundError(f"output directory does not exist: {parent}")


def _trace(prob, d, kind, samples=None, budget=None, periods=1, reflect=False):
    branch = find_branch(d, prob, kind)
    opts = {"periods": periods}
    if samples is not None:
        opts["samples"] = samples
    if budget is not None:
        opts["budget"] = budget
    curve = integrate_profile(prob, d, branch, TraceOptions(**opts))
    ctype = classify(prob, d, branch)
    if reflect and kind == "axis":
        curve = reflect_complete(curve)
    return curve, ctype


# -- commands -------------------------------------------------------------------------------


def cmd_phase(args):
    prob = _problem(args)
    for d in args.d:
        _check_level(d)
    _ensure_parent(args.out)
    doc = portrait(prob, args.d, args.samples)
    with open(args.out, "w") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")
    _emit({"out": args.out, "regime": doc["regime"], "levels": len(args.d)})


def cmd_classify(args):
    prob = _problem(args)
    _check_level(args.d)
    branches = components(args.d, prob)
    if args.branch:
        branches = [find_branch(args.d, prob, args.branch)]
    rows = []
    for b in branches:
        ct, psi0 = classify_with_psi(prob, args.d, b)
        rows.append({"branch": b.kind, "x0": b.x0, **ct.to_dict(), "psi0": psi0})
    _emit(rows[0] if args.branch else rows)


def cmd_trace(args):
    prob = _problem(args)
    _check_level(args.d)
    if args.budget is not None and not args.budget > 0:
        raise DomainError("--budget must be positive")
    _ensure_parent(args.out)
    curve, ctype = _trace(prob, args.d, args.branch, args.samples, args.budget, args.periods, args.reflect)
    csv, side = write_curve(curve, args.out, ctype)
    _emit({"out": csv, "sidecar": side, "samples": len(curve), **ctype.to_dict(),
           "completion": curve.completion, "drift_max": curve.meta["drift_max"]})


def cmd_special(args):
    prob = _problem(args)
    value = special_level(prob, args.kind)
    sys.stdout.write("%.17g\n" % value)


def cmd_surface(args):
    prob = _problem(args)
    _check_level(args.d)
    if args.slices < 3:
        raise DomainError("--slices must be >= 3")
    if args.rings < 2:
        raise DomainError("--rings must be >= 2")
    _ensure_parent(args.out)
    curve, ctype = _trace(prob, args.d, args.branch, periods=args.periods)
    mesh = revolve(curve, args.slices, rings=args.rings)
    report = verify_surface(mesh, prob)
    obj, side = write_obj(mesh, args.out, report, ctype, args.projection)
    _emit({"out": obj, "sidecar": side, "vertices": len(mesh.vertices), "faces": len(mesh.faces),
           **ctype.to_dict(), "max_residuals": report.max_residuals()})


def cmd_sweep(args):
    mus = parse_range(args.mu_range)
    ds = parse_range(args.d_range)
    if any(m == 0 for m in mus):
        raise DomainError("mu range contains 0")
    if any(not d > 0 for d in ds):
        raise DomainError("d range must be positive")
    _ensure_parent(args.out)
    rows = sweep(args.rho, mus, ds, workers=args.workers)
    write_sweep(rows, args.out)
    tags: dict[str, int] = {}
    for r in rows:
        tags[r[4]] = tags.get(r[4], 0) + 1
    _emit({"out": args.out, "rows": len(rows), "tags": tags})


def cmd_verify(args):
    curve = load_curve(args.path)
    report = check_invariants(curve)
    _emit(report)
    if not report["passed"]:
        raise NumericalError(f"invariants failed: {', '.join(report['failed'])}")


def _preset_panel(job):
    name, i, panel, outdir = job
    prob = EnergyProblem(panel.mu, panel.rho)
    stem = os.path.join(outdir, f"{name}_{i + 1}_{panel.label}")
    if name == "fig1":
        curve, ctype = _trace(prob, panel.d, panel.branch, periods=panel.periods)
        mesh = revolve(curve, 64, rings=400)
        report = verify_surface(mesh, prob)
        files = write_obj(mesh, stem + ".obj", report, ctype)
    else:
        curve, ctype = _trace(prob, panel.d, panel.branch, periods=panel.periods, reflect=True)
        files = write_curve(curve, stem + ".csv", ctype)
    return {
        "panel": i + 1,
        "label": panel.label,
        "rho": panel.rho,
        "mu": panel.mu,
        "d": panel.d,
        "branch": panel.branch,
        "expected": panel.expected,
        **ctype.to_dict(),
        "match": ctype.tag == panel.expected and ctype.qualifier == panel.qualifier,
        "files": [os.path.basename(f) for f in files],
    }


def cmd_preset(args):
    os.makedirs(args.out, exist_ok=True)
    panels = expand(args.name)
    jobs = [(args.name, i, p, args.out) for i, p in enumerate(panels)]
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as ex:
            rows = list(ex.map(_preset_panel, jobs))
    else:
        rows = [_preset_panel(j) for j in jobs]
    manifest = os.path.join(args.out, f"{args.name}_manifest.json")
    with open(manifest, "w") as fh:
        json.dump({"preset": args.name, "panels": rows}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _emit({"out": args.out, "manifest": manifest, "panels": len(rows),
           "mismatches": [r["label"] for r in rows if not r["match"]]})


COMMANDS = {
    "phase": cmd_phase,
    "classify": cmd_classify,
    "trace": cmd_trace,
    "special": cmd_special,
    "surface": cmd_surface,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "preset": cmd_preset,
}


def _fail(code: int, err: dict) -> int:
    sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _check_env()
        COMMANDS[args.command](args)
    except ValidationError as exc:
        return _fail(EXIT_VALIDATION, exc.to_dict())
    except NumericalError as exc:
        return _fail(EXIT_NUMERIC, exc.to_dict())
    except SkewformError as exc:
        return _fail(EXIT_NUMERIC, exc.to_dict())
    except OSError as exc:
        return _fail(EXIT_IO, {"error": "io", "message": str(exc)})
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
