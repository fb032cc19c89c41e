"""Command-line interface.

Subcommands emit JSON on standard output (``brg --dot`` emits the DOT
text itself, since DOT is the named exchange format for graphs). Exit
codes: 0 success, 2 schema/validation problems, 1 any other error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import brg, pointing
from .errors import SchemaError, ShelfPlanError, ValidationError
from .scene import (
    ALL,
    DEFAULT_PALETTE,
    export_scene,
    generate_scene,
    parse_scene,
    validate_scene,
)
from .service import replay_events

DEFAULT_PORT = 7711


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2))


def _load_graph(scene_path: str):
    scene = parse_scene(_read(scene_path))
    dep = brg.build_dependency_dictionary(scene)
    return scene, dep, brg.build_graph(dep)


def _cmd_validate(args) -> int:
    try:
        scene = parse_scene(_read(args.scene))
    except ValidationError as exc:
        _emit({"valid": False, "violations": list(exc.violations)})
        return 2
    report = validate_scene(scene)
    _emit({"valid": report.ok, "violations": list(report.violations)})
    return 0 if report.ok else 2


def _cmd_generate(args) -> int:
    palette = DEFAULT_PALETTE
    if args.palette:
        try:
            raw = json.loads(args.palette)
            palette = tuple(tuple(float(v) for v in entry) for entry in raw)
            if not palette or any(len(p) != 3 for p in palette):
                raise ValueError
        except (ValueError, TypeError) as exc:
            raise SchemaError("--palette: expected JSON like [[w,d,h], ...]") from exc
    scene = generate_scene(args.seed, args.boxes, palette=palette)
    document = export_scene(scene)
    if args.out:
        Path(args.out).write_text(document, encoding="utf-8")
    sys.stdout.write(document)
    return 0


def _cmd_brg(args) -> int:
    _, _, graph = _load_graph(args.scene)
    if args.dot:
        sys.stdout.write(brg.export_dot(graph))
    else:
        _emit(graph.to_document())
    return 0


def _cmd_plan(args) -> int:
    _, dep, graph = _load_graph(args.scene)
    if args.target == ALL:
        plan = brg.full_clear_sequence(graph)
    else:
        plan = brg.safe_sequence(graph, args.target)
    split = brg.divide_tasks(plan, dep, policy=args.policy)
    _emit({"plan": plan.to_document(), "split": split.to_document()})
    return 0


def _cmd_divide(args) -> int:
    _, dep, graph = _load_graph(args.scene)
    if args.target == ALL:
        plan = brg.full_clear_sequence(graph)
    else:
        plan = brg.safe_sequence(graph, args.target)
    split = brg.divide_tasks(plan, dep, policy=args.policy)
    _emit(split.to_document())
    return 0


def _cmd_support(args) -> int:
    _, _, graph = _load_graph(args.scene)
    candidates = brg.support_candidates(graph, args.target, args.k, ranking=args.ranking)
    _emit(candidates.to_document())
    return 0


def _cmd_point(args) -> int:
    scene = parse_scene(_read(args.scene))
    cloud, pose = pointing.parse_cloud(_read(args.cloud))
    params = pointing.ClusterParams(eps=args.eps, min_pts=args.min_pts,
                                    min_cluster_size=args.min_cluster)
    result = pointing.resolve_pointing(cloud, scene, params=params, camera_pose=pose,
                                       fraction=args.fraction, farthest=not args.nearest)
    _emit(result.to_document())
    return 0


def _cmd_replay(args) -> int:
    with open(args.events, encoding="utf-8") as fh:
        state = replay_events(fh)
    _emit(state)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app
    from .service import ServiceCore

    app = create_app(ServiceCore(state_dir=args.state_dir))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shelfplan",
                                     description="Collapse-safe shelf extraction planning")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a scene document")
    p.add_argument("--scene", required=True)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("generate", help="generate a seeded random stable scene")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--boxes", type=int, required=True)
    p.add_argument("--palette", help="JSON list of [w,d,h] box sizes in meters")
    p.add_argument("--out", help="also write the document to this path")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("brg", help="build the box relations graph")
    p.add_argument("--scene", required=True)
    p.add_argument("--dot", action="store_true", help="emit DOT text instead of JSON")
    p.set_defaults(func=_cmd_brg)

    p = sub.add_parser("plan", help="compute a safe extraction plan and task split")
    p.add_argument("--scene", required=True)
    p.add_argument("--target", required=True, help=f"box id or {ALL}")
    p.add_argument("--policy", choices=["literal", "independence"], default="literal")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("divide", help="split a plan into robot and human tasks")
    p.add_argument("--scene", required=True)
    p.add_argument("--target", required=True, help=f"box id or {ALL}")
    p.add_argument("--policy", choices=["literal", "independence"], default="literal")
    p.set_defaults(func=_cmd_divide)

    p = sub.add_parser("support", help="rank support candidates for a target")
    p.add_argument("--scene", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--ranking", choices=["literal", "at_risk"], default="literal")
    p.set_defaults(func=_cmd_support)

    p = sub.add_parser("point", help="resolve a pointing gesture to a box")
    p.add_argument("--scene", required=True)
    p.add_argument("--cloud", required=True)
    p.add_argument("--eps", type=float, default=0.03)
    p.add_argument("--min-pts", type=int, default=8)
    p.add_argument("--min-cluster", type=int, default=30)
    p.add_argument("--fraction", type=float, default=0.02)
    p.add_argument("--nearest", action="store_true",
                   help="read 'top depth' as nearest-to-camera instead of deepest")
    p.set_defaults(func=_cmd_point)

    p = sub.add_parser("replay", help="rebuild a session from its event log")
    p.add_argument("--events", required=True)
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--port", type=int, default=DEFAULT_PORT)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--state-dir", default="sessions",
                   help="directory for append-only session event logs")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, ValidationError) as exc:
        body = {"error": type(exc).__name__, "detail": str(exc)}
        if isinstance(exc, ValidationError):
            body["violations"] = list(exc.violations)
        _emit(body)
        return 2
    except ShelfPlanError as exc:
        _emit({"error": type(exc).__name__, "detail": str(exc)})
        return 1
    except ValueError as exc:
        _emit({"error": "ValueError", "detail": str(exc)})
        return 1


if __name__ == "__main__":
    sys.exit(main())
