"""Command-line front end: ``blochlip {length,distance,verify,classify,admissible-check}``.

Every command writes one JSON report (to ``--out`` or standard output).
Numbers carry 12 significant digits and reports contain no timestamps, so a
fixed seed gives byte-identical output.

Exit codes: 0 success, 2 invalid input, 3 numerical non-convergence,
4 violated mathematical property.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .geometry import (
    Array,
    ConvergenceError,
    Curve,
    Domain,
    DomainError,
    Weight,
    curve_length,
    euclidean_distance,
    hyperbolic_weight,
    spherical_weight,
    unit_weight,
    weighted_length,
)
from .metrics import (
    DisconnectedError,
    SolverConfig,
    hyperbolic_distance,
    spherical_distance,
    weighted_distance,
)
from .sampling import PairSampler, PointSampler
from .seminorms import (
    AdmissibleWeight,
    Mapping,
    admissibility_check,
    atanh_profile,
    canonical_W,
    holland_walsh_W,
    jocic_W,
    minmax_W,
    normal_W,
    verify_equality,
)
from .testbed import classify, lookup, polynomial_mapping, spherical_target

SCHEMA = "blochlip.report/1"
EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_PROPERTY = 0, 2, 3, 4
WEIGHTS = ("unit", "hyperbolic", "spherical")
ADMISSIBLE = ("holland_walsh", "jocic", "minmax", "normal", "canonical")


class PropertyViolation(Exception):
    def __init__(self, message: str, report: dict):
        super().__init__(message)
        self.report = report


# {{{ formatting

def _num(x: float):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.12g}")


def _clean(obj):
    """Round every float to 12 significant digits, recursively."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def render(command: str, config: dict, result: dict) -> str:
    doc = {"schema": SCHEMA, "version": __version__, "command": command,
           "config": config, "result": result}
    return json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def write_vertices(path: str, V) -> None:
    lines = [" ".join(f"{c:.12g}" for c in row) for row in np.atleast_2d(V)]
    Path(path).write_text("\n".join(lines) + "\n")


def write_csv(path: str, X, Y, q) -> None:
    m = X.shape[1]
    header = ",".join([f"x{i}" for i in range(m)] + [f"y{i}" for i in range(m)] + ["quotient"])
    rows = [header]
    for x, y, v in zip(X, Y, q):
        rows.append(",".join(f"{c:.12g}" for c in (*x, *y, v)))
    Path(path).write_text("\n".join(rows) + "\n")

# }}}


# {{{ input parsing

def read_vertices(path: str) -> Array:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValueError(f"cannot read vertex file: {exc}") from None
    rows = [line.split() for line in text.splitlines() if line.strip()
            and not line.lstrip().startswith("#")]
    if not rows:
        raise ValueError(f"vertex file {path!r} contains no points")
    if len({len(r) for r in rows}) != 1:
        raise ValueError("vertex rows must all have the same number of coordinates")
    try:
        V = np.array([[float(c) for c in r] for r in rows])
    except ValueError:
        raise ValueError("vertex file contains a non-numeric coordinate") from None
    if not np.all(np.isfinite(V)):
        raise ValueError("vertex coordinates must be finite")
    return V


def parse_point(text: str) -> Array:
    try:
        p = np.array([float(c) for c in text.replace(",", " ").split()])
    except ValueError:
        raise ValueError(f"malformed point {text!r}") from None
    if p.size == 0 or not np.all(np.isfinite(p)):
        raise ValueError(f"malformed point {text!r}")
    return p


def make_weight(name: str, dim: int, radius: float | None = None) -> Weight:
    if name == "unit":
        return unit_weight(dim, Domain.space(dim))
    if name == "hyperbolic":
        margin = 0.05 if radius is None else min(0.05, (1 - radius) / 2)
        return hyperbolic_weight(dim, margin)
    if name == "spherical":
        if dim != 2:
            raise ValueError("the spherical weight lives on the plane")
        return spherical_weight(dim)
    raise ValueError(f"unknown weight {name!r}; choose from {', '.join(WEIGHTS)}")


def closed_form(name: str):
    return {"unit": euclidean_distance, "hyperbolic": hyperbolic_distance,
            "spherical": spherical_distance}[name]


def make_mapping(name: str) -> tuple[Mapping, str]:
    """Catalog name or ``poly:c0,c1,...`` with complex coefficients."""
    if name.startswith("poly:"):
        try:
            coeffs = [complex(c.strip().replace(" ", "")) for c in name[5:].split(",")]
        except ValueError:
            raise ValueError(f"malformed polynomial {name!r}") from None
        return polynomial_mapping(coeffs, name), name
    try:
        return lookup(name).mapping, name
    except KeyError as exc:
        raise ValueError(exc.args[0]) from None


def _check_radius(radius: float) -> None:
    if not 0 < radius < 1:
        raise ValueError("--radius must lie in (0, 1)")


def _check_positive(**values) -> None:
    for name, v in values.items():
        if not v > 0:
            raise ValueError(f"--{name} must be positive")

# }}}


# {{{ campaigns

@dataclass
class Setup:
    f: Mapping
    omega: Weight
    target: Weight
    target_name: str
    W: AdmissibleWeight
    d_target: object


def build_setup(args) -> Setup:
    f, _ = make_mapping(args.function)
    m, k = f.dim, f.target_dim
    omega = hyperbolic_weight(m, min(0.05, (1 - args.radius) / 2))
    target_name = args.target or ("spherical" if args.admissible == "normal" else "unit")
    if target_name == "spherical":
        if k != 2:
            raise ValueError("the spherical target weight needs a planar target")
        target, d_target = spherical_target(k), spherical_distance
    elif target_name == "unit":
        target, d_target = unit_weight(k, Domain.space(k)), euclidean_distance
    else:
        raise ValueError("--target must be unit or spherical")
    if args.admissible == "holland_walsh":
        W = holland_walsh_W()
    elif args.admissible == "jocic":
        W = jocic_W(atanh_profile())
    elif args.admissible == "minmax":
        W = minmax_W(omega, target, f)
    elif args.admissible == "normal":
        W = normal_W(f)
    elif args.admissible == "canonical":
        W = canonical_W(f, omega, target, hyperbolic_distance, d_target)
    else:
        raise ValueError(f"unknown admissible weight {args.admissible!r}")
    if args.scale != 1.0:
        W = W.scaled(args.scale)
    if target_name == "unit" and args.admissible == "normal":
        raise ValueError("normal_W pairs with the spherical target weight")
    return Setup(f, omega, target, target_name, W, d_target)


def _admissibility(setup: Setup, args) -> dict:
    sampler = PairSampler(setup.f.domain, args.radius, args.check_pairs, seed=args.seed)
    X, Y = sampler.pairs()
    rep = admissibility_check(setup.W, setup.f, setup.omega, setup.target,
                              hyperbolic_distance, setup.d_target, X, Y)
    out = {"kind": rep.kind, "pairs": rep.pairs, "passed": rep.passed,
           "conditions": rep.conditions(), "max_asymmetry": rep.max_asymmetry,
           "max_diagonal_error": rep.max_diagonal_error,
           "liminf_min_ratio": rep.liminf_min_ratio,
           "distance_violations": rep.distance_violations,
           "worst_distance_excess": rep.worst_distance_excess}
    if rep.worst_pair is not None:
        out["violating_pair"] = rep.worst_pair
    return out


def _common(args) -> dict:
    return {"function": args.function, "admissible": args.admissible,
            "target": args.target, "radius": args.radius, "seed": args.seed,
            "check_pairs": args.check_pairs, "scale": args.scale}


def cmd_length(args) -> tuple[dict, dict]:
    _check_positive(tol=args.tol)
    V = read_vertices(args.vertices)
    if len(V) < 2:
        raise ValueError("a curve needs at least two vertices")
    curve = Curve.from_points(V)
    weight = make_weight(args.weight, curve.dim)
    L = curve_length(curve, args.tol)
    Lw = weighted_length(weight, curve, args.tol, tags=args.tags)
    config = {"vertices": len(V), "weight": args.weight, "tol": args.tol, "tags": args.tags}
    result = {"curve_length": L.value, "curve_length_tolerance": L.tolerance,
              "curve_length_knots": L.knots, "weighted_length": Lw.value,
              "weighted_length_tolerance": Lw.tolerance, "weighted_length_knots": Lw.knots}
    return config, result


def cmd_distance(args) -> tuple[dict, dict]:
    x, y = parse_point(args.x), parse_point(args.y)
    if x.shape != y.shape:
        raise ValueError("points must have the same dimension")
    weight = make_weight(args.weight, len(x))
    domain = weight.domain
    if not (domain.contains(x[None], safe=True)[0] and domain.contains(y[None], safe=True)[0]):
        raise ValueError("points must lie in the safe part of the domain")
    res = weighted_distance(domain, weight, x, y, SolverConfig(resolution=args.resolution,
                                                               tolerance=args.tol))
    exact = float(closed_form(args.weight)(x[None], y[None])[0])
    deviation = abs(res.distance - exact) / exact if exact > 0 else abs(res.distance)
    if args.witness:
        write_vertices(args.witness, res.witness.vertices)
    config = {"weight": args.weight, "x": x, "y": y, "resolution": args.resolution,
              "tol": args.tol}
    result = {"distance": res.distance, "closed_form": exact, "relative_deviation": deviation,
              "graph_distance": res.graph_distance, "error_estimate": res.error,
              "nodes": res.nodes, "witness_vertices": len(res.witness.vertices)}
    return config, result


def cmd_admissible_check(args) -> tuple[dict, dict]:
    _check_radius(args.radius)
    setup = build_setup(args)
    check = _admissibility(setup, args)
    config = _common(args)
    if not check["passed"]:
        raise PropertyViolation("admissibility check failed", {"config": config,
                                                              "admissibility": check})
    return config, {"admissibility": check}


def cmd_verify(args) -> tuple[dict, dict]:
    _check_radius(args.radius)
    setup = build_setup(args)
    check = _admissibility(setup, args)
    config = {**_common(args), "grid": args.grid, "pairs": args.pairs, "slack": args.slack}
    if not check["passed"]:
        raise PropertyViolation("admissibility check failed", {"config": config,
                                                              "admissibility": check})
    domain = setup.f.domain
    rep = verify_equality(setup.f, setup.omega, setup.target, setup.W,
                          PointSampler(domain, args.radius, args.grid),
                          PairSampler(domain, args.radius, args.pairs, seed=args.seed),
                          slack=args.slack, d_omega=hyperbolic_distance,
                          d_target=setup.d_target)
    if args.csv:
        X, Y = rep.pairs
        write_csv(args.csv, X, Y, rep.quotients)
    result = {
        "bloch": {"value": rep.bloch.value, "witness": rep.bloch.witness,
                  "samples": rep.bloch.samples, "kind": rep.bloch.kind,
                  "nonfinite": rep.bloch.nonfinite},
        "lipschitz": {"value": rep.lipschitz.value, "witness": rep.lipschitz.witness,
                      "samples": rep.lipschitz.samples, "kind": rep.lipschitz.kind,
                      "nonfinite": rep.lipschitz.nonfinite},
        "gap": rep.gap,
        "bound_violations": rep.bound_violations,
        "corollary_violations": rep.corollary_violations,
        "passed": rep.passed,
        "admissibility": check,
    }
    if not rep.passed:
        raise PropertyViolation("sampled quotients exceed the Bloch bound",
                                {"config": config, **result})
    return config, result


def cmd_classify(args) -> tuple[dict, dict]:
    try:
        entry = lookup(args.function)
    except KeyError as exc:
        raise ValueError(exc.args[0]) from None
    c = classify(entry, n=args.grid)

    def table(s):
        return {"radii": s.radii, "values": s.values, "verdict": s.verdict,
                "overflow_radius": s.overflow_radius}

    config = {"function": args.function, "grid": args.grid}
    result = {"verdict": c.verdict, "expected": c.expected, "matches": c.matches,
              "expected_bloch": entry.expected_bloch, "note": entry.note,
              "bloch": table(c.bloch), "normal": table(c.normal)}
    return config, result

# }}}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="blochlip",
                                description="Weighted lengths, distances and Bloch/Lipschitz "
                                            "number campaigns.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def out(sp):
        sp.add_argument("--out", help="report path (default: standard output)")

    sp = sub.add_parser("length", help="Euclidean and weighted length of a polyline")
    sp.add_argument("vertices", help="text file, one point per line")
    sp.add_argument("--weight", default="unit", choices=WEIGHTS)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--tags", default="left", choices=("left", "midpoint"))
    out(sp)
    sp.set_defaults(run=cmd_length)

    sp = sub.add_parser("distance", help="numerical weighted distance with closed-form check")
    sp.add_argument("x", help="first point, e.g. '0,0'")
    sp.add_argument("y", help="second point")
    sp.add_argument("--weight", default="hyperbolic", choices=WEIGHTS)
    sp.add_argument("--resolution", type=int, default=64)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--witness", help="write the witness polyline to this vertex file")
    out(sp)
    sp.set_defaults(run=cmd_distance)

    def campaign(sp):
        sp.add_argument("--function", default="identity",
                        help="catalog name or poly:c0,c1,... (complex coefficients)")
        sp.add_argument("--admissible", default="holland_walsh", choices=ADMISSIBLE)
        sp.add_argument("--target", choices=("unit", "spherical"),
                        help="target weight (default: spherical for normal, else unit)")
        sp.add_argument("--radius", type=float, default=0.9)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--check-pairs", type=int, default=1000)
        sp.add_argument("--scale", type=float, default=1.0,
                        help="multiply the admissible weight (negative controls)")
        out(sp)

    sp = sub.add_parser("verify", help="compare Bloch and Lipschitz numbers")
    campaign(sp)
    sp.add_argument("--grid", type=int, default=2000)
    sp.add_argument("--pairs", type=int, default=20000)
    sp.add_argument("--slack", type=float, default=0.05)
    sp.add_argument("--csv", help="write all sampled quotients to this CSV file")
    sp.set_defaults(run=cmd_verify)

    sp = sub.add_parser("admissible-check", help="check the four admissibility conditions")
    campaign(sp)
    sp.set_defaults(run=cmd_admissible_check)

    sp = sub.add_parser("classify", help="Bloch/normal verdict from a radius sweep")
    sp.add_argument("--function", required=True, help="catalog name")
    sp.add_argument("--grid", type=int, default=2000)
    out(sp)
    sp.set_defaults(run=cmd_classify)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    for name in ("grid", "pairs", "check_pairs", "resolution"):
        if getattr(args, name, 1) is not None and getattr(args, name, 1) < 1:
            print(f"error: --{name.replace('_', '-')} must be >= 1", file=sys.stderr)
            return EXIT_INPUT
    try:
        config, result = args.run(args)
    except PropertyViolation as exc:
        _emit(render(args.command, exc.report.pop("config", {}), exc.report), args.out)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROPERTY
    except (ConvergenceError, DisconnectedError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _emit(render(args.command, config, result), args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
