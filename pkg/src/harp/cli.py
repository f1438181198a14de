"""Command line front end: serve, inspect, simon, resize, align."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional

from .alignment import MarkerPose, RigidFrame, frame_from_anchors, frame_from_marker
from .apps.engine import SimonEngine
from .apps.inspector import inspector_run
from .apps.resize import biased_controller, ideal_controller, resize_report
from .apps.rounds import simon_round_run
from .device import DeviceDescriptor, HandScript, PerceptionParams
from .geometry import PRIMITIVE_KINDS
from .model import Vec3
from .render import RepresentationSpec, STRATEGIES


def _parse_host_port(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    if not host or not port.isdigit():
        raise argparse.ArgumentTypeError(f"expected host:port, got {value!r}")
    return host, int(port)


def _parse_grid(value: str) -> tuple[int, int, int]:
    parts = value.lower().split("x")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected NxNxN, got {value!r}")
    return tuple(int(p) for p in parts)


def _parse_floats(value: str, n: Optional[int] = None) -> list[float]:
    parts = [float(p) for p in value.split(",") if p != ""]
    if n is not None and len(parts) != n:
        raise argparse.ArgumentTypeError(f"expected {n} numbers, got {len(parts)}")
    return parts


def _emit(report: dict, out: Optional[str]) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def cmd_serve(args) -> int:
    from .transport import run_server

    logging.basicConfig(level=getattr(logging, args.log_level.upper()))
    host, ws_port = args.listen
    tcp_port = args.tcp_listen[1] if args.tcp_listen else None
    run_server(host, ws_port, tcp_port)
    return 0


def cmd_inspect(args) -> int:
    figures = args.figures.split(",") if args.figures else list(PRIMITIVE_KINDS)
    sigma, tau, radius = args.perception
    device = DeviceDescriptor(tick_rate=args.tick_rate)
    params = PerceptionParams(sigma=sigma, tau=tau, palm_radius=radius)
    spec = RepresentationSpec(strategy=args.strategy, grid_dims=args.grid)
    script = None
    if args.script:
        script = HandScript.from_json(json.loads(Path(args.script).read_text()))
    report = inspector_run(figures, spec, script=script, device=device, params=params)
    report["seed"] = args.seed
    _emit(report, args.out)
    return 0


def cmd_simon(args) -> int:
    if args.connect:
        return _simon_live(args)
    report = simon_round_run(duration=args.duration, seed=args.seed,
                             policy=args.policy, mode=args.mode,
                             n_players=args.players, start_length=args.start_length)
    _emit(report, args.out)
    return 0


def _simon_live(args) -> int:
    """Host a live round on a served session (players join over the wire)."""
    from .transport import TcpServiceClient

    host, port = args.connect
    client = TcpServiceClient(host, port, "simon-engine", kind="observer")
    try:
        session_id = args.session or client.create_session()
        client.join(session_id)
        players = tuple(args.turn_players.split(",")) if args.turn_players else ()
        engine = SimonEngine(client, seed=args.seed, duration=args.duration,
                             mode="turn_taking" if players else "solo",
                             players=players, start_length=args.start_length)
        engine.setup()
        print(f"simon session: {session_id} (round of {args.duration:.0f}s)")
        print("join with a browser client using this session id")
        engine.run_live(duration=args.duration)
        print(json.dumps({"correct_sequences": engine.game.correct,
                          "fails": engine.game.fails}, indent=2))
    finally:
        client.close()
    return 0


def cmd_resize(args) -> int:
    figures = args.figures.split(",") if args.figures else None
    targets = _parse_floats(args.targets) if args.targets else None
    controllers = {"ideal": ideal_controller}
    if args.bias_cm:
        controllers[f"bias{args.bias_cm:+g}cm"] = biased_controller(args.bias_cm / 100.0)
    kwargs = {}
    if figures:
        kwargs["figures"] = figures
    if targets:
        kwargs["targets"] = targets
    report = resize_report(controllers, **kwargs)
    _emit(report, args.out)
    return 0


def cmd_align(args) -> int:
    if args.anchors:
        coords = _parse_floats(args.anchors, 9)
        frame = frame_from_anchors(Vec3(*coords[0:3]), Vec3(*coords[3:6]),
                                   Vec3(*coords[6:9]))
    elif args.marker_pose:
        data = json.loads(Path(args.marker_pose).read_text()
                          if Path(args.marker_pose).exists() else args.marker_pose)
        frame = frame_from_marker(MarkerPose.from_json(data))
    else:
        print("align needs --anchors or --marker-pose", file=sys.stderr)
        return 2
    print(json.dumps(frame.to_json(), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="harp",
        description="Shared haptic/AR sessions against a simulated mid-air device.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the session service")
    p.add_argument("--listen", type=_parse_host_port, default=("127.0.0.1", 8700),
                   help="WebSocket listen address (default 127.0.0.1:8700)")
    p.add_argument("--tcp-listen", type=_parse_host_port, default=None,
                   help="length-prefixed TCP address (default: WebSocket port + 1)")
    p.add_argument("--log-level", default="info",
                   choices=["debug", "info", "warning", "error"])
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("inspect", help="haptic shape inspection report")
    p.add_argument("--figures", help="comma-separated figure names (default: all)")
    p.add_argument("--strategy", default="volume_based", choices=list(STRATEGIES))
    p.add_argument("--grid", type=_parse_grid, default=(16, 16, 16),
                   help="voxel grid dims, e.g. 16x16x16")
    p.add_argument("--script", help="hand script JSON file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tick-rate", type=float, default=100.0)
    p.add_argument("--perception", type=lambda v: _parse_floats(v, 3),
                   default=[0.01, 0.01, 0.05], help="sigma,tau,palm_radius")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("simon", help="run a Simon round (headless or live)")
    p.add_argument("--duration", type=float, default=150.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--policy", default="perfect", choices=["perfect", "always-red"])
    p.add_argument("--mode", default="solo", choices=["solo", "turn_taking"])
    p.add_argument("--players", type=int, default=1,
                   help="scripted players (headless mode)")
    p.add_argument("--start-length", type=int, default=1)
    p.add_argument("--connect", type=_parse_host_port,
                   help="host a live round on a served session (TCP host:port)")
    p.add_argument("--session", help="existing session id to host the round in")
    p.add_argument("--turn-players", help="comma-separated client ids for turns (live)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simon)

    p = sub.add_parser("resize", help="resize-to-height task report")
    p.add_argument("--figures", help="comma-separated figure names (default task set)")
    p.add_argument("--targets", help="comma-separated target heights in meters")
    p.add_argument("--bias-cm", type=float, default=None,
                   help="also run a controller with this bias in cm")
    p.add_argument("--out")
    p.set_defaults(func=cmd_resize)

    p = sub.add_parser("align", help="compute the device frame")
    p.add_argument("--anchors", help="x0,y0,z0,x1,y1,z1,x2,y2,z2")
    p.add_argument("--marker-pose", help="marker pose JSON (inline or a file path)")
    p.set_defaults(func=cmd_align)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
