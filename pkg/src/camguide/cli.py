"""Command-line entry points: scene generation, single runs, batch
evaluation, standalone rank aggregation, and the live service.

Exit codes: 0 success, 2 usage/config/I-O error, 3 guidance failure.
"""

from __future__ import annotations

import argparse
import json
import socket
import sys

from camguide.planner import Status

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GUIDANCE = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="camguide")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-scene", help="generate a synthetic scene file")
    g.add_argument("--out", required=True)
    g.add_argument("--n-points", type=int, default=400)
    g.add_argument("--n-cameras", type=int, default=60)
    g.add_argument("--layout", choices=["one_sided_arc", "ring"], default="one_sided_arc")
    g.add_argument("--arc-span", type=float, default=140.0)
    g.add_argument("--fov", type=float, default=60.0)
    g.add_argument("--depth-near", type=float, default=8.0)
    g.add_argument("--depth-far", type=float, default=12.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--pixel-sigma", type=float, default=1.0)
    g.add_argument("--confusion-rate", type=float, default=0.05)
    g.add_argument("--dropout-rate", type=float, default=0.1)
    g.add_argument("--moving-fraction", type=float, default=0.02)
    g.add_argument("--actuation-sigma", type=float, default=0.01)
    g.add_argument("--noise-seed", type=int, default=None)

    r = sub.add_parser("run", help="run one guidance session on a scene file")
    r.add_argument("--scene", required=True)
    r.add_argument("--initial", type=int, required=True)
    r.add_argument("--dest", type=int, required=True)
    r.add_argument("--auto", action="store_true", default=True)
    r.add_argument("--transcript", default=None, help="write the step transcript JSON here")
    r.add_argument("--seed", type=int, default=0)

    b = sub.add_parser("batch", help="batch-evaluate a scenario")
    b.add_argument("--scenario", default=None, help="scenario JSON (defaults apply if omitted)")
    b.add_argument("--runs", type=int, required=True)
    b.add_argument("--out", default=None, help="metrics CSV path (stdout if omitted)")
    b.add_argument("--seed", type=int, default=None, help="override the scenario seed")

    k = sub.add_parser("rank", help="aggregate one axis ranking from a track dump")
    k.add_argument("--tracks", required=True, help="JSONL track dump")
    k.add_argument("--axis", choices=["x", "y"], required=True)
    k.add_argument("--out", default=None)
    k.add_argument("--damping", type=float, default=0.05)

    s = sub.add_parser("serve", help="host the live session service")
    s.add_argument("--port", type=int, default=8000)
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--scenes", default=None, help="directory of scene JSON files")
    return parser


def _cmd_gen_scene(args) -> int:
    from camguide.simulator import NoiseModel, SceneConfig, generate_scene, save_scene

    try:
        cfg = SceneConfig(
            n_points=args.n_points,
            n_cameras=args.n_cameras,
            layout=args.layout,
            arc_span_deg=args.arc_span,
            depth_range=(args.depth_near, args.depth_far),
            fov_deg=args.fov,
            seed=args.seed,
        )
        noise = NoiseModel(
            pixel_sigma=args.pixel_sigma,
            confusion_rate=args.confusion_rate,
            dropout_rate=args.dropout_rate,
            moving_fraction=args.moving_fraction,
            actuation_sigma=args.actuation_sigma,
            seed=args.seed if args.noise_seed is None else args.noise_seed,
        )
    except ValueError as exc:
        print(f"invalid scene config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    scene = generate_scene(cfg, noise)
    try:
        save_scene(scene, args.out)
    except OSError as exc:
        print(f"cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"wrote {args.out}: {len(scene.points)} points, {len(scene.cameras)} cameras")
    return EXIT_OK


def _cmd_run(args) -> int:
    from camguide.errors import UnknownView
    from camguide.simulator import GuidanceRun, RunConfig, load_scene

    try:
        scene = load_scene(args.scene)
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        print(f"cannot load scene {args.scene}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        run = GuidanceRun(scene, args.initial, args.dest, RunConfig(seed=args.seed))
    except UnknownView as exc:
        print(f"bad view ids: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report = run.run()
    doc = {
        "run_id": report.run_id,
        "status": report.status,
        "steps": report.steps,
        "waypoints": report.waypoints,
        "oracle_final_error_px": report.oracle_final_error_px,
        "offline_ms": report.offline_ms,
        "online_ms": report.online_ms,
    }
    print(json.dumps(doc, sort_keys=True))
    if args.transcript:
        try:
            with open(args.transcript, "w") as fp:
                json.dump(report.transcript, fp, sort_keys=True, indent=1)
        except OSError as exc:
            print(f"cannot write transcript: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    return EXIT_OK if report.status == Status.SUCCESS.value else EXIT_GUIDANCE


def _cmd_batch(args) -> int:
    from dataclasses import replace

    from camguide.simulator import batch_evaluate, metrics_csv, scenario_from_dict

    try:
        if args.scenario:
            with open(args.scenario) as fp:
                scenario = scenario_from_dict(json.load(fp))
        else:
            scenario = scenario_from_dict({})
        if args.seed is not None:
            scenario = replace(scenario, seed=args.seed)
        if args.runs < 1:
            raise ValueError("--runs must be >= 1")
    except (OSError, TypeError, ValueError, json.JSONDecodeError) as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    reports = batch_evaluate(scenario, args.runs)
    csv_text = metrics_csv(reports)
    if args.out:
        try:
            with open(args.out, "w") as fp:
                fp.write(csv_text)
        except OSError as exc:
            print(f"cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(csv_text.rstrip().splitlines()[-1])  # echo the summary line
    else:
        print(csv_text, end="")
    return EXIT_OK


def _cmd_rank(args) -> int:
    from camguide.correspondence import load_tracks
    from camguide.sofa import aggregate_ranks, build_vote_graph, extract_partial_orders, image_intervals

    try:
        with open(args.tracks) as fp:
            tracks = load_tracks(fp)
        if not tracks:
            raise ValueError("track dump is empty")
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        print(f"cannot load tracks {args.tracks}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    views = sorted({o.view_id for t in tracks for o in t.observations})
    partials = [p for p in extract_partial_orders(tracks, views) if p.axis == args.axis]
    graph = build_vote_graph(partials)
    order = aggregate_ranks(graph, damping=args.damping)
    intervals = image_intervals(order, partials)
    doc = {
        "axis": args.axis,
        "order": [int(b) for b in order],
        "intervals": {str(v): [int(iv[0]), int(iv[1])] for v, iv in intervals.items()},
    }
    text = json.dumps(doc, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fp:
            fp.write(text)
    else:
        print(text)
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from camguide.service import create_app

    # surface bind errors as a config failure before uvicorn takes over
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((args.host, args.port))
    except OSError as exc:
        print(f"cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    finally:
        probe.close()
    app = create_app(scenes_dir=args.scenes)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "gen-scene": _cmd_gen_scene,
        "run": _cmd_run,
        "batch": _cmd_batch,
        "rank": _cmd_rank,
        "serve": _cmd_serve,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
