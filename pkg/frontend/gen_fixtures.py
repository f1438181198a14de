"""Regenerate the web client's conformance fixtures from the real service.

Runs a deterministic session (Simon buttons, an exhibit node that comes and
goes, one full press over the wire) and records every message a joining
web client received, plus the service's final canonical status. The web
client's replica must reproduce that status byte for byte.

Usage: python3 frontend/gen_fixtures.py
"""

import json
import pathlib

from harp.apps.engine import BUTTON_GRID, SimonEngine
from harp.model import (HandState, Node, NodeDelta, Transform, Vec3, canonical_json)
from harp.geometry import make_primitive
from harp.service import LocalClient, SessionService

OUT = pathlib.Path(__file__).parent / "test" / "fixtures" / "session_log.json"


def build_session_fixture() -> dict:
    service = SessionService(clock=lambda: 0.0)
    engine_client = LocalClient(service, "simon-engine", "observer")
    sid = engine_client.create_session("fixture")
    engine_client.join(sid)
    engine = SimonEngine(engine_client, seed=1, duration=150.0)
    engine.setup()

    web = LocalClient(service, "webby", "ar-view")  # the captured viewpoint
    web.join(sid)
    hand = LocalClient(service, "hand-1", "haptic")
    hand.join(sid)

    engine_client.submit_delta(NodeDelta.add(Node(
        id="exhibit", mesh=make_primitive("octahedron"),
        transform=Transform(position=Vec3(0.0, 0.0, 0.25),
                            scale=Vec3(0.05, 0.05, 0.05)))))

    # one full press over the first expected color, through the wire
    color = engine.game.sequence[0]
    x, y = BUTTON_GRID[color]
    fsm = engine.fsm_template
    zs = [fsm.rest_z + 0.05, fsm.rest_z, fsm.rest_z - fsm.press_depth - 0.002,
          fsm.rest_z + 0.05]
    for i, z in enumerate(zs):
        hand.publish_hand(HandState(palm_position=Vec3(x, y, z), timestamp=i * 0.2))
        engine.pump(now=i * 0.2)

    engine_client.submit_delta(NodeDelta.remove("exhibit"))

    status = service.session_status(sid)
    return {
        "messages": web.inbox,
        "expected_canonical_status": canonical_json(status.to_json()),
        "expected_event_ids": [e.event_id for e in web.events],
        "expected_last_seq": web.last_seq,
        "expected_score": status.nodes[status.root].metadata["simon_correct"],
    }


def build_gap_fixture() -> dict:
    service = SessionService(clock=lambda: 0.0)
    owner = LocalClient(service, "owner", "ar-view")
    sid = owner.create_session("gap")
    owner.join(sid)
    watcher = LocalClient(service, "watcher", "observer")
    watcher.join(sid)

    for name in ("a", "b", "c"):
        owner.submit_delta(NodeDelta.add(Node(id=name)))
    deltas = [m for m in watcher.inbox if m["type"] == "node_delta"]
    assert len(deltas) == 3
    # watcher's gapless stream (snapshot, its own join event, the deltas),
    # with the middle delta dropped to force recovery on the third
    played = [m for m in watcher.inbox
              if m["type"] != "hello" and m is not deltas[1]]

    watcher.request_snapshot()
    final_snapshot = [m for m in watcher.inbox if m["type"] == "snapshot"][-1]

    return {
        "messages": played,
        "resnapshot": final_snapshot,
        "expected_canonical_status": canonical_json(
            service.session_status(sid).to_json()),
    }


def main() -> None:
    fixture = {
        "generator": "frontend/gen_fixtures.py",
        "session": build_session_fixture(),
        "gap": build_gap_fixture(),
    }
    text = json.dumps(fixture, indent=1, sort_keys=True)
    if not text.isascii():
        raise SystemExit("fixtures must stay ASCII for canonical-JSON parity")
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(text + "\n")
    print(f"wrote {OUT} ({len(text)} bytes, "
          f"{len(fixture['session']['messages'])} messages)")


if __name__ == "__main__":
    main()
