"""Command-line front end: space ingestion, runs, sweeps and report emission.

Exit codes: 0 success, 2 validation or configuration failure, 3 undetermined
classification, 4 file input/output failure.  All emitted files are
plot-ready CSV or JSON with deterministic formatting; nothing is rendered.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .blowup import soliton_limit
from .classify import classify_trajectory, predicted_report, regime_of
from .einstein import (
    critical_directions,
    einstein_roots,
    scalar_zero_directions,
)
from .errors import (
    HrflowError,
    InsufficientHorizon,
    OnEinsteinRoot,
    SpaceModelError,
)
from .flow import (
    Direction,
    IntegrationOptions,
    MetricState,
    integrate,
    make_rhs,
)
from .spaces import (
    MaxCoeffs,
    TwoSummandSpace,
    catalog,
    derive_coeffs,
    get_space,
    load_space,
    space_to_dict,
    validate,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_UNDETERMINED = 3
EXIT_IO = 4


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _resolve_space(ref: str):
    """Catalog name or path to a JSON space definition."""
    if ref.endswith(".json") or os.sep in ref:
        return load_space(ref)
    return get_space(ref)


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--space", required=True,
                   help="catalog name or path to a space JSON file")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--abs-tol", type=float, default=1e-14)
    p.add_argument("--collapse-eps", type=float, default=1e-8)
    p.add_argument("--horizon", type=float, default=1e3)
    p.add_argument("--max-steps", type=int, default=500_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", default="csv,json",
                   help="comma list of output formats to write")


def _options_from(args, direction: Direction) -> IntegrationOptions:
    return IntegrationOptions(
        direction=direction,
        rel_tol=args.rel_tol,
        abs_tol=args.abs_tol,
        collapse_epsilon=args.collapse_eps,
        max_time=args.horizon,
        max_steps=args.max_steps,
    )


def _initial_state(args, space) -> MetricState:
    if args.y0 is not None:
        if args.y0 <= 0 or args.scale <= 0:
            raise SpaceModelError("y0 and scale must be positive")
        return MetricState(t=0.0, x1=args.y0 * args.scale, x2=args.scale)
    if args.x1 is None or args.x2 is None:
        raise SpaceModelError("provide either --y0 or both --x1 and --x2")
    if args.x1 <= 0 or args.x2 <= 0:
        raise SpaceModelError("initial coefficients must be positive")
    return MetricState(t=0.0, x1=args.x1, x2=args.x2)


def _slug(space, args) -> str:
    tag = space.name.replace("(", "").replace(")", "").replace("/", "-")
    if getattr(args, "y0", None) is not None:
        return f"{tag}_y0_{args.y0:g}"
    if getattr(args, "x1", None) is not None:
        return f"{tag}_x1_{args.x1:g}_x2_{args.x2:g}"
    return tag


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_catalog(args) -> int:
    spaces = catalog()
    if args.json:
        print(json.dumps({n: space_to_dict(s) for n, s in spaces.items()},
                         indent=2, sort_keys=True))
    else:
        for name, s in sorted(spaces.items()):
            kind = s.kind.value if isinstance(s, TwoSummandSpace) else "Irreducible"
            print(f"{name:10s} l={s.l} d={list(s.d)} {kind}")
    return EXIT_OK


def cmd_validate(args) -> int:
    space = _resolve_space(args.space)
    report = validate(space)
    payload = {
        "space": space.name,
        "ok": report.ok,
        "violations": [
            {"rule": v.rule, "message": v.message, "magnitude": v.magnitude}
            for v in report.violations
        ],
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_einstein(args) -> int:
    space = _resolve_space(args.space)
    if not isinstance(space, TwoSummandSpace):
        print("one-summand space: the unique direction is Einstein",
              file=sys.stderr)
        return EXIT_INVALID
    c = derive_coeffs(space)
    es = einstein_roots(c)
    sz = scalar_zero_directions(c)
    payload = {
        "space": space.name,
        "kind": space.kind.value,
        "case": es.case_label,
        "roots": [{"value": r, "multiplicity": m} for r, m in es.roots],
        "scalar_zero": {
            "positive_roots": list(sz.positive_roots),
            "negative_roots": list(sz.negative_roots),
            "has_zero_root": sz.has_zero_root,
        },
    }
    if isinstance(c, MaxCoeffs):
        cd = critical_directions(c)
        payload["critical_directions"] = [cd.y_tilde_1, cd.y_tilde_2]
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_flow(args) -> int:
    space = _resolve_space(args.space)
    if not isinstance(space, TwoSummandSpace):
        print("flow runs need a two-summand space", file=sys.stderr)
        return EXIT_INVALID
    report = validate(space)
    if not report.ok:
        print(f"space {space.name} failed validation", file=sys.stderr)
        return EXIT_INVALID
    coeffs = derive_coeffs(space)
    init = _initial_state(args, space)
    formats = set(args.format.split(","))
    os.makedirs(args.out, exist_ok=True)
    slug = _slug(space, args)

    fwd = integrate(coeffs, init, _options_from(args, Direction.FORWARD))
    if "csv" in formats:
        fwd.to_csv(os.path.join(args.out, f"{slug}_forward.csv"))
    bwd = None
    if args.backward:
        bwd = integrate(coeffs, init, _options_from(args, Direction.BACKWARD))
        if "csv" in formats:
            bwd.to_csv(os.path.join(args.out, f"{slug}_backward.csv"))

    try:
        rep = classify_trajectory(fwd, bwd, coeffs)
    except InsufficientHorizon as exc:
        print(f"undetermined: {exc}", file=sys.stderr)
        return EXIT_UNDETERMINED
    if "json" in formats:
        _write_json(os.path.join(args.out, f"{slug}_report.json"),
                    rep.to_dict())
    print(f"{slug}: {rep.forward_outcome.value} ({rep.singular_type.value}), "
          f"T ~ {rep.T_estimate}, ancient = {rep.ancient_exists}")
    if rep.singular_type.value == "Undetermined":
        return EXIT_UNDETERMINED
    return EXIT_OK


def cmd_portrait(args) -> int:
    space = _resolve_space(args.space)
    if not isinstance(space, TwoSummandSpace):
        print("portraits need a two-summand space", file=sys.stderr)
        return EXIT_INVALID
    try:
        nx, ny = (int(v) for v in args.grid.lower().split("x"))
        x1_lo, x1_hi = (float(v) for v in args.x1_range.split(","))
        x2_lo, x2_hi = (float(v) for v in args.x2_range.split(","))
        if min(x1_lo, x2_lo) <= 0 or nx < 2 or ny < 2:
            raise ValueError("grid must be positive")
    except ValueError as exc:
        print(f"bad grid specification: {exc}", file=sys.stderr)
        return EXIT_INVALID
    coeffs = derive_coeffs(space)
    f = make_rhs(coeffs)
    es = einstein_roots(coeffs)
    maximal = isinstance(coeffs, MaxCoeffs)
    os.makedirs(args.out, exist_ok=True)
    slug = _slug(space, args)

    lines: dict = {
        "einstein_roots": [r for r, _ in es.roots],
        "scalar_zero_positive": list(
            scalar_zero_directions(coeffs).positive_roots),
    }
    if maximal:
        cd = critical_directions(coeffs)
        lines["critical_directions"] = [cd.y_tilde_1, cd.y_tilde_2]
        bands = (cd.y_tilde_1, cd.y_tilde_2)
    else:
        db = float(coeffs.D) / float(coeffs.B)
        lines["stationary_x2_ray"] = db

    from .flow import _scalar_curvature_arrays

    path = os.path.join(args.out, f"{slug}_portrait.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x1,x2,dx1,dx2,R_sign,region\n")
        for u1 in np.linspace(x1_lo, x1_hi, nx):
            for u2 in np.linspace(x2_lo, x2_hi, ny):
                d1v, d2v = f(u1, u2)
                R = float(_scalar_curvature_arrays(
                    np.asarray(u1), np.asarray(u2), coeffs))
                sign = "0" if R == 0.0 else ("+" if R > 0 else "-")
                yv = u1 / u2
                if maximal:
                    region = ("X1" if yv < bands[0]
                              else "X2" if yv < bands[1] else "X3")
                else:
                    region = "below_DB" if yv < db else "above_DB"
                fh.write(",".join([_fmt(u1), _fmt(u2), _fmt(d1v), _fmt(d2v),
                                   sign, region]) + "\n")
    _write_json(os.path.join(args.out, f"{slug}_portrait_lines.json"), lines)
    print(f"portrait written to {path}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    space = _resolve_space(args.space)
    if not isinstance(space, TwoSummandSpace):
        print("sweeps need a two-summand space", file=sys.stderr)
        return EXIT_INVALID
    if args.count < 1:
        print("count must be at least 1", file=sys.stderr)
        return EXIT_INVALID
    lo, hi = (float(v) for v in args.y0_range.split(","))
    if lo <= 0 or hi <= lo:
        print("y0 range must be positive and increasing", file=sys.stderr)
        return EXIT_INVALID
    coeffs = derive_coeffs(space)
    es = einstein_roots(coeffs)
    critical = critical_directions(coeffs) if isinstance(coeffs, MaxCoeffs) else None
    if args.mode == "grid":
        y0s = np.geomspace(lo, hi, args.count) if args.count > 1 else np.array([lo])
    else:
        rng = np.random.default_rng(args.seed)
        y0s = np.exp(rng.uniform(np.log(lo), np.log(hi), args.count))
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"{_slug(space, args)}_sweep.csv")
    header = ("index,y0,regime,outcome,T_estimate,ancient_exists,"
              "ancient_type,forward_y_limit,backward_y_limit,matches_prediction")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for i, y0 in enumerate(y0s):
            row = _sweep_row(coeffs, es, critical, float(y0), args)
            fh.write(f"{i}," + row + "\n")
    print(f"sweep written to {path}")
    return EXIT_OK


def _sweep_row(coeffs, es, critical, y0: float, args) -> str:
    init = MetricState(t=0.0, x1=y0, x2=1.0)
    try:
        regime = regime_of(coeffs, es, critical, y0)
    except OnEinsteinRoot:
        return f"{_fmt(y0)},fixed,,,,,,"
    fwd = integrate(coeffs, init, _options_from(args, Direction.FORWARD))
    bwd = integrate(coeffs, init, _options_from(args, Direction.BACKWARD))
    rep = classify_trajectory(fwd, bwd, coeffs, es, critical)
    pred = predicted_report(regime, es, coeffs)
    matches = (
        rep.forward_outcome is pred.outcome
        and rep.ancient_exists == pred.ancient_exists
        and (pred.forward_y_limit is None
             or abs(rep.forward_y_limit - pred.forward_y_limit)
             <= 1e-2 * (1 + abs(pred.forward_y_limit)))
    )
    return ",".join([
        _fmt(y0), str(regime), rep.forward_outcome.value,
        _fmt(rep.T_estimate) if rep.T_estimate is not None else "",
        str(rep.ancient_exists),
        rep.ancient_type.value if rep.ancient_type else "",
        _fmt(rep.forward_y_limit) if rep.forward_y_limit is not None else "",
        _fmt(rep.backward_y_limit) if rep.backward_y_limit is not None else "",
        str(bool(matches)),
    ])


def cmd_blowup(args) -> int:
    space = _resolve_space(args.space)
    if not isinstance(space, TwoSummandSpace):
        print("blow-up analysis needs a two-summand space", file=sys.stderr)
        return EXIT_INVALID
    coeffs = derive_coeffs(space)
    init = _initial_state(args, space)
    fwd = integrate(coeffs, init, _options_from(args, Direction.FORWARD))
    es = einstein_roots(coeffs)
    limit = soliton_limit(fwd, es)
    os.makedirs(args.out, exist_ok=True)
    payload = limit.to_dict() | {"space": space.name,
                                 "T_estimate": fwd.T_estimate}
    _write_json(os.path.join(args.out, f"{_slug(space, args)}_blowup.json"),
                payload)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hrflow",
        description="Flow laboratory for invariant metrics on homogeneous "
                    "spaces with one or two isotropy summands",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", help="list the built-in space fixtures")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("validate", help="check a space table for consistency")
    _common_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("einstein", help="homothety directions and sign rays")
    _common_flags(p)
    p.set_defaults(func=cmd_einstein)

    p = sub.add_parser("flow", help="integrate one initial condition")
    _common_flags(p)
    p.add_argument("--y0", type=float, default=None)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--x1", type=float, default=None)
    p.add_argument("--x2", type=float, default=None)
    p.add_argument("--backward", action="store_true",
                   help="also probe ancient existence")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("portrait", help="sample the vector field on a grid")
    _common_flags(p)
    p.add_argument("--grid", default="50x50")
    p.add_argument("--x1-range", default="0.04,2.0")
    p.add_argument("--x2-range", default="0.04,2.0")
    p.set_defaults(func=cmd_portrait)

    p = sub.add_parser("sweep", help="classify a family of initial conditions")
    _common_flags(p)
    p.add_argument("--y0-range", default="0.1,10")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--mode", choices=("grid", "random"), default="grid")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("blowup", help="rescaled limit near the singular time")
    _common_flags(p)
    p.add_argument("--y0", type=float, default=None)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--x1", type=float, default=None)
    p.add_argument("--x2", type=float, default=None)
    p.set_defaults(func=cmd_blowup)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"input/output failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except SpaceModelError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except HrflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
