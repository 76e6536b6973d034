"""Command-line entry point.

Exit codes: 0 success (bound satisfied for ``verify-stability``), 1 bound
violated, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import foliation, harness, matching, persistence
from .grid_domain import PGMError, adjacency_graph, grid_graph, read_pgm, write_pgm
from .set_encodings import (ScalarField, centroid, distance_transform,
                            field_from_csv, field_to_csv, local_density,
                            radial_field, stack)


def _center(text):
    try:
        x, y = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y, got {text!r}")
    return (x, y)


def _schedule(text):
    try:
        pairs = [tuple(float(t) for t in item.split(":")) for item in text.split(",") if item]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected alpha:beta[,alpha:beta...], got {text!r}")
    if any(len(p) != 2 for p in pairs):
        raise argparse.ArgumentTypeError(f"expected alpha:beta pairs, got {text!r}")
    return pairs


def _write(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _read_field(path) -> ScalarField:
    return field_from_csv(Path(path).read_text(encoding="utf-8"))


def _phis(args, extent, default_center):
    center = args.center or default_center
    phi1 = _read_field(args.phi) if args.phi else radial_field(extent, center)
    phi2 = _read_field(args.phi2) if args.phi2 else phi1
    return phi1, phi2, center


def _leaves(args, F, G):
    return harness.default_leaves(F, G, args.angles, args.offsets)


def _report_inputs(args, **kw):
    d = {"files": [str(f) for f in args.inputs]}
    d.update(kw)
    return d


# --- commands ----------------------------------------------------------------

def cmd_encode(args):
    grid = read_pgm(args.image, args.threshold)
    if args.kind == "distance":
        f = distance_transform(grid)
    elif args.kind == "density":
        f = local_density(grid, args.eps, clip=not args.no_clip)
    else:
        f = radial_field(grid.extent, args.center or centroid(grid))
    _write(field_to_csv(f), args.output)
    return 0


def cmd_diagram(args):
    f = _read_field(args.field)
    dgm = persistence.sublevel_diagram_0(grid_graph(*f.extent), f)
    if args.format == "json":
        _write(persistence.diagram_to_json(dgm) + "\n", args.output)
    elif args.format == "csv":
        _write(persistence.diagram_to_csv(dgm), args.output)
    else:
        _write(harness.diagram_svg(dgm, title=Path(args.field).name), args.output)
    return 0


def _load_diagram(path):
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        return persistence.diagram_from_json(text)
    return persistence.diagram_from_csv(text)


def cmd_dmatch(args):
    d = matching.dmatch_1d(_load_diagram(args.a), _load_diagram(args.b))
    print("inf" if d == matching.INF else format(d, ".17g"))
    return 0


def cmd_dmatch_multi(args):
    g1, g2 = (read_pgm(p, args.threshold) for p in args.inputs)
    phi1, phi2, center = _phis(args, g1.extent, centroid(g1))
    F = stack([distance_transform(g1), phi1])
    G = stack([distance_transform(g2), phi2])
    leaves = _leaves(args, F, G)
    results = matching.dmatch_per_leaf(adjacency_graph(g1), F, G, leaves)
    if args.leaf_csv:
        Path(args.leaf_csv).write_text(matching.leaf_table_csv(results), encoding="utf-8")
    report = {
        "inputs": _report_inputs(args, center=list(center), angles=args.angles, offsets=args.offsets),
        "dmatch_lower_bound": max(r.weighted for r in results),
    }
    _write(json.dumps(harness._jsonable(report), indent=2) + "\n", args.output)
    return 0


def cmd_perturb(args):
    grid = read_pgm(args.image, args.threshold)
    out = harness.perturb_salt_pepper(grid, args.radius, args.p_add, args.p_remove, args.seed)
    write_pgm(out, args.output)
    return 0


def cmd_verify(args):
    mode = args.mode
    if mode == "fuzzy":
        p1, p2 = (_read_field(p) for p in args.inputs)
        phi1, phi2, center = _phis(args, p1.extent, ((p1.extent[0] - 1) / 2, (p1.extent[1] - 1) / 2))
        F, G = stack([-p1, phi1]), stack([-p2, phi2])
        inputs = _report_inputs(args, center=list(center))
        report = harness.verify_stability_fuzzy(p1, p2, phi1, phi2, _leaves(args, F, G), inputs)
    else:
        g1, g2 = (read_pgm(p, args.threshold) for p in args.inputs)
        phi1, phi2, center = _phis(args, g1.extent, centroid(g1))
        inputs = _report_inputs(args, center=list(center), threshold=args.threshold,
                                angles=args.angles, offsets=args.offsets)
        if mode == "hausdorff":
            F = stack([distance_transform(g1), phi1])
            G = stack([distance_transform(g2), phi2])
            report = harness.verify_stability_hausdorff(g1, g2, phi1, phi2, _leaves(args, F, G), inputs)
        else:
            F = stack([-local_density(g1, args.eps, clip=False), phi1])
            G = stack([-local_density(g2, args.eps, clip=False), phi2])
            report = harness.verify_stability_symdiff(g1, g2, args.eps, phi1, phi2, _leaves(args, F, G), inputs)
    if args.seed is not None:
        report.inputs["seed"] = args.seed
    _write(report.to_json() + "\n", args.output)
    if args.leaf_csv:
        Path(args.leaf_csv).write_text(report.leaf_csv(), encoding="utf-8")
    return 0 if report.bound_satisfied else 1


def cmd_recover(args):
    grid = read_pgm(args.image, args.threshold)
    phi = _read_field(args.phi) if args.phi else radial_field(grid.extent, args.center or centroid(grid))
    table = harness.recovery_sweep(grid, phi, args.u, args.v, args.schedule or harness.DEFAULT_SCHEDULE)
    _write(table.to_csv(), args.output)
    return 0


def cmd_leaf(args):
    p = foliation.leaf_params(args.alpha, args.u, args.beta, args.v)
    out = {"l": list(p.pair.l), "b": list(p.pair.b), "s": p.s, "t": p.t,
           "boundary_proximate": p.boundary_proximate}
    print(json.dumps(out))
    return 0


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rankstab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, threshold=True):
        if threshold:
            p.add_argument("--threshold", type=int, default=128, help="gray values below this are foreground")
        p.add_argument("-o", "--output", default=None, help="output file (default stdout)")

    def leaves_opts(p):
        p.add_argument("--angles", type=int, default=harness.DEFAULT_ANGLES)
        p.add_argument("--offsets", type=int, default=harness.DEFAULT_OFFSETS)
        p.add_argument("--center", type=_center, default=None, help="x,y centre of the radial function")
        p.add_argument("--phi", default=None, help="CSV field used as phi (overrides --center)")
        p.add_argument("--phi2", default=None, help="CSV field for the second input (default: same as --phi)")
        p.add_argument("--leaf-csv", default=None, help="write the per-leaf table here")

    p = sub.add_parser("encode", help="image -> field CSV")
    p.add_argument("image")
    p.add_argument("--kind", choices=["distance", "density", "radial"], default="distance")
    p.add_argument("--eps", type=float, default=2.0)
    p.add_argument("--no-clip", action="store_true", help="density denominator = full disk size")
    p.add_argument("--center", type=_center, default=None)
    common(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("diagram", help="field CSV -> persistence diagram")
    p.add_argument("field")
    p.add_argument("--format", choices=["json", "csv", "svg"], default="json")
    common(p, threshold=False)
    p.set_defaults(func=cmd_diagram)

    p = sub.add_parser("dmatch", help="bottleneck distance between two diagrams (JSON or CSV)")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_dmatch)

    p = sub.add_parser("dmatch-multi", help="sampled multi-parameter matching distance of two images")
    p.add_argument("inputs", nargs=2, metavar="IMAGE")
    leaves_opts(p)
    common(p)
    p.set_defaults(func=cmd_dmatch_multi)

    p = sub.add_parser("perturb", help="salt & pepper noise near the foreground")
    p.add_argument("image")
    p.add_argument("--radius", type=float, default=3.0)
    p.add_argument("--p-add", type=float, default=0.1)
    p.add_argument("--p-remove", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=int, default=128)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("verify-stability", help="check a stability bound on sampled leaves")
    p.add_argument("mode", choices=["hausdorff", "symdiff", "fuzzy"])
    p.add_argument("inputs", nargs=2, metavar="INPUT", help="two PGM images, or two density CSVs for fuzzy")
    p.add_argument("--eps", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=None, help="recorded in the report")
    leaves_opts(p)
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("recover", help="rank recovery sweep over (alpha, beta)")
    p.add_argument("image")
    p.add_argument("--u", type=float, required=True)
    p.add_argument("--v", type=float, required=True)
    p.add_argument("--schedule", type=_schedule, default=None, help="alpha:beta,... (default: the built-in schedule)")
    p.add_argument("--center", type=_center, default=None)
    p.add_argument("--phi", default=None)
    common(p)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("leaf", help="(alpha, u, beta, v) -> l, b, s, t")
    for name in ("alpha", "u", "beta", "v"):
        p.add_argument(name, type=float)
    p.set_defaults(func=cmd_leaf)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, PGMError, OSError) as exc:
        print(f"rankstab {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
