"""Command-line front end.

Subcommands: generate, analyze, boundary-graph, isotopy-check,
enumerate-trees, shrinker-graph.  Exit codes: 0 success, 1 usage or input
parse errors, 2 validation failures.  All JSON output carries
"schema": "unknot-kit/1" and runs are reproducible for a fixed --seed.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .analysis import (
    HYPOTHESIS_NOTE,
    BallDomain,
    InvalidSurfaceError,
    genus_and_boundary,
    isotopy_signature,
    validate_properly_embedded,
)
from .arrangement import (
    CurveError,
    LoopGeometryError,
    read_loops_jsonl,
    sphere_boundary_graph,
)
from .mesh import MeshTopologyError, read_obj, write_obj
from .modelsurface import (
    GenerationError,
    ModelSurfaceSpec,
    generate_with_report,
)
from .shrinkers import (
    TransversalityError,
    builtin_shrinker,
    default_steps,
    graph_at_infinity,
)
from .trees import (
    InvalidTreeError,
    Multigraph,
    TreeFormatError,
    ahu_code,
    as_tree,
    cayley_lower_bound,
    enumerate_free_trees,
    is_tree,
    parse_tree,
    to_dot,
)

SCHEMA = "unknot-kit/1"

USAGE_ERROR = 1
VALIDATION_ERROR = 2

_PARSE_ERRORS = (TreeFormatError, MeshTopologyError, json.JSONDecodeError)
_VALIDATION_ERRORS = (
    InvalidSurfaceError,
    InvalidTreeError,
    LoopGeometryError,
    CurveError,
    GenerationError,
    TransversalityError,
)


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _emit(payload: dict, as_json: bool, text: str) -> None:
    if as_json:
        payload = {"schema": SCHEMA, **payload}
        print(json.dumps(payload, indent=2))
    else:
        print(text)


def _graph_json(g: Multigraph) -> dict:
    data = {
        "vertex_count": g.vertex_count,
        "edges": [list(e) for e in g.edges],
        "is_tree": is_tree(g),
    }
    if data["is_tree"]:
        data["canonical_code"] = ahu_code(g)
    return data


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="unknot-kit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"unknot-kit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="build a model surface mesh for (tree, genus)")
    g.add_argument("--tree", required=True, help="tree in nested-parenthesis form, e.g. (()())")
    g.add_argument("--genus", type=int, default=0)
    g.add_argument("--root", type=int, default=None, help="root vertex (default: a center)")
    g.add_argument("--resolution", type=int, default=64)
    g.add_argument("--shrink", type=float, default=0.35)
    g.add_argument("--no-symmetric", action="store_true",
                   help="do not keep the vertex set mirror-symmetric across {y=0}")
    g.add_argument("-o", "--output", required=True, metavar="OBJ")
    g.add_argument("--json", action="store_true")

    a = sub.add_parser("analyze", help="validate a mesh and print its isotopy signature")
    a.add_argument("mesh", metavar="OBJ")
    a.add_argument("--ball-radius", type=float, default=1.0)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--json", action="store_true")

    b = sub.add_parser("boundary-graph",
                       help="boundary graph of a surface (.obj) or loop set (.jsonl)")
    b.add_argument("input", metavar="OBJ|JSONL")
    b.add_argument("--ball-radius", type=float, default=1.0)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--dot", metavar="PATH", help="also write the graph as DOT")
    b.add_argument("--json", action="store_true")

    i = sub.add_parser("isotopy-check", help="compare the isotopy signatures of two meshes")
    i.add_argument("mesh_a", metavar="OBJ")
    i.add_argument("mesh_b", metavar="OBJ")
    i.add_argument("--ball-radius", type=float, default=1.0)
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--json", action="store_true")

    e = sub.add_parser("enumerate-trees", help="all tree classes on n vertices")
    e.add_argument("n", type=int)
    e.add_argument("--json", action="store_true")

    s = sub.add_parser("shrinker-graph", help="graph at infinity of a surface with ends")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--builtin", choices=["plane", "sphere2", "cylinder2"])
    src.add_argument("--mesh", metavar="OBJ")
    s.add_argument("--rmin", type=float, required=True)
    s.add_argument("--rmax", type=float, required=True)
    s.add_argument("--steps", type=int, default=None,
                   help="number of slice radii (default: ratio-1.3 spacing)")
    s.add_argument("--extent", type=float, default=16.0, help="builtin truncation radius")
    s.add_argument("--resolution", type=int, default=64, help="builtin mesh resolution")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--json", action="store_true")

    for sp in (g, a, b, i, e, s):
        sp.add_argument("--threads", type=int, default=1,
                        help="worker cap (accepted for compatibility; computation is single-threaded)")
    return p


def _cmd_generate(args) -> int:
    tree = parse_tree(args.tree)
    spec = ModelSurfaceSpec(
        tree=tree,
        genus=args.genus,
        root_vertex=args.root,
        resolution=args.resolution,
        shrink=args.shrink,
        symmetric=not args.no_symmetric,
    )
    mesh, report = generate_with_report(spec)
    write_obj(mesh, args.output)
    sidecar = args.output + ".json"
    with open(sidecar, "w", newline="\n") as f:
        json.dump({"schema": SCHEMA, **report}, f, indent=2)
        f.write("\n")
    _emit(
        {"output": args.output, "sidecar": sidecar, **report},
        args.json,
        f"wrote {args.output} ({report['vertices']} vertices, {report['triangles']} triangles); "
        f"spec tree {report['tree']}, genus {report['genus']}",
    )
    return 0


def _cmd_analyze(args) -> int:
    mesh = read_obj(args.mesh)
    ball = BallDomain(args.ball_radius)
    rep = validate_properly_embedded(mesh, ball)
    if not rep.properly_embedded:
        _emit(
            {"validation": rep.to_json(), "signature": None},
            args.json,
            "NOT properly embedded; offending items: "
            + ", ".join(sorted({k for k, _ in rep.offending_items})),
        )
        return VALIDATION_ERROR
    sig = isotopy_signature(mesh, ball, seed=args.seed)
    genus, b = genus_and_boundary(mesh)
    _emit(
        {"validation": rep.to_json(), "signature": sig.to_json(),
         "genus": genus, "boundary_components": b},
        args.json,
        f"properly embedded; genus {genus}, {b} boundary components, signature {sig.display()}",
    )
    return 0


def _cmd_boundary_graph(args) -> int:
    if args.input.endswith((".jsonl", ".loops")):
        loops = read_loops_jsonl(args.input)
        graph: Multigraph = sphere_boundary_graph(loops, seed=args.seed)
    else:
        mesh = read_obj(args.input)
        ball = BallDomain(args.ball_radius)
        from .analysis import boundary_graph_of_surface

        graph = boundary_graph_of_surface(mesh, ball, seed=args.seed)
    if args.dot:
        with open(args.dot, "w", newline="\n") as f:
            f.write(to_dot(graph))
    data = _graph_json(graph)
    text = (
        f"{data['vertex_count']} regions, {len(data['edges'])} curves; "
        + (f"tree {data['canonical_code']}" if data["is_tree"] else "not a tree")
    )
    _emit(data, args.json, text)
    return 0


def _cmd_isotopy_check(args) -> int:
    ball = BallDomain(args.ball_radius)
    sig_a = isotopy_signature(read_obj(args.mesh_a), ball, seed=args.seed)
    sig_b = isotopy_signature(read_obj(args.mesh_b), ball, seed=args.seed)
    equivalent = sig_a == sig_b
    verdict = "equivalent" if equivalent else "NOT equivalent"
    _emit(
        {
            "equivalent": equivalent,
            "signatures": [sig_a.to_json(), sig_b.to_json()],
            "note": HYPOTHESIS_NOTE,
        },
        args.json,
        f"{verdict}: {sig_a.display()} vs {sig_b.display()}\nnote: {HYPOTHESIS_NOTE}",
    )
    return 0


def _cmd_enumerate_trees(args) -> int:
    codes = enumerate_free_trees(args.n)
    bound = cayley_lower_bound(args.n)
    _emit(
        {
            "n": args.n,
            "count": len(codes),
            "codes": codes,
            "labelled_tree_lower_bound": [bound.numerator, bound.denominator],
        },
        args.json,
        "\n".join(codes) + f"\n{len(codes)} classes on {args.n} vertices "
        f"(labelled-tree lower bound {bound.numerator}/{bound.denominator})",
    )
    return 0


def _cmd_shrinker_graph(args) -> int:
    if args.builtin:
        mesh = builtin_shrinker(args.builtin, extent=args.extent, resolution=args.resolution)
        source = f"builtin:{args.builtin}"
    else:
        mesh = read_obj(args.mesh)
        source = args.mesh
    steps = args.steps if args.steps is not None else default_steps(args.rmin, args.rmax)
    rep = graph_at_infinity(mesh, args.rmin, args.rmax, steps, seed=args.seed)
    data = {"source": source, **rep.to_json()}
    if rep.stabilized:
        text = (
            f"stabilized from R~{rep.r0_estimate:.4g}: tree {rep.graph_at_infinity} "
            f"({len(rep.radii_tested)} slices in [{args.rmin:.4g}, {args.rmax:.4g}])"
        )
    else:
        text = f"NOT stabilized over {len(rep.radii_tested)} slices; report: {data}"
    _emit(data, args.json, text)
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "analyze": _cmd_analyze,
    "boundary-graph": _cmd_boundary_graph,
    "isotopy-check": _cmd_isotopy_check,
    "enumerate-trees": _cmd_enumerate_trees,
    "shrinker-graph": _cmd_shrinker_graph,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    try:
        return _COMMANDS[args.command](args)
    except _PARSE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return VALIDATION_ERROR
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
