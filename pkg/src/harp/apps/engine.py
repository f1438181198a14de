"""Simon game engine: buttons in the session tree, presses through the wire.

The engine owns the game state and the four button state machines. It never
shortcuts in-process: hands and presses arrive as session messages, presses
are re-broadcast as interaction events, and the HUD (sequence, score, turn,
countdown) is replicated as root-node metadata, so any client that can read
the session can render the game, and a press is a press whether it came from
a steered virtual hand or a tap on a screen.
"""

from __future__ import annotations

import time
from dataclasses import replace
from typing import Optional

from ..geometry import make_primitive
from ..model import (HandState, InteractionEvent, ModelError, Node, NodeDelta,
                     Transform, Vec3)
from ..render import render_feature_based
from .buttons import ButtonFsm, button_step
from .simon import COLORS, FAIL, SEQUENCE_COMPLETE, SimonError, SimonState, simon_check, simon_new

BUTTON_REST_Z = 0.17  # the virtual ground doubles as the button rest height
BUTTON_GRID = {
    "red": (-0.04, -0.04),
    "green": (0.04, -0.04),
    "blue": (-0.04, 0.04),
    "yellow": (0.04, 0.04),
}


class EngineError(ModelError):
    pass


class SimonEngine:
    """Drives one Simon round over a session client.

    The client only needs the small surface LocalClient and TcpServiceClient
    share: ``submit_delta`` / ``publish_event`` and a ``state`` replica.
    """

    def __init__(self, client, seed: int = 0, duration: float = 150.0,
                 mode: str = "solo", players: tuple[str, ...] = (),
                 rest_z: float = BUTTON_REST_Z, fsm: Optional[ButtonFsm] = None,
                 start_length: int = 1):
        self.client = client
        self.game: SimonState = simon_new(seed, length=start_length,
                                          duration=duration, mode=mode,
                                          players=players)
        self.rest_z = rest_z
        self.fsm_template = fsm if fsm is not None else ButtonFsm(rest_z=rest_z)
        # one FSM set per tracked hand: concurrent hands must not share state
        self.fsms: dict[str, dict[str, ButtonFsm]] = {}
        self.anchors: dict[str, Vec3] = {}
        self.now = 0.0
        self.over = False
        self._event_cursor = 0
        self._hand_cursor = 0
        self._event_counter = 0
        self._last_intensity: dict[tuple[str, str], float] = {}

    # -- session wiring ------------------------------------------------------

    def setup(self) -> None:
        """Create the four buttons and publish the initial HUD."""
        mesh = make_primitive("cylinder", segments=12)
        for color, (x, y) in BUTTON_GRID.items():
            node = Node(
                id=f"btn-{color}",
                mesh=mesh,
                transform=Transform(position=Vec3(x, y, self.rest_z),
                                    scale=Vec3(0.03, 0.03, 0.01)),
                metadata={"color": color, "role": "simon-button"},
            )
            self.client.submit_delta(NodeDelta.add(node))
            self.anchors[color] = render_feature_based(mesh, node.transform)[0].position
        self._publish_hud()

    def button_node_id(self, color: str) -> str:
        return f"btn-{color}"

    # -- main loop -----------------------------------------------------------

    def pump(self, now: Optional[float] = None) -> None:
        """Process everything that arrived since the last call."""
        if now is not None:
            self.now = now
        hands = self.client.state.hands
        while self._hand_cursor < len(hands):
            source, hand = hands[self._hand_cursor]
            self._hand_cursor += 1
            self._handle_hand(source, hand)
        events = self.client.state.events
        while self._event_cursor < len(events):
            event = events[self._event_cursor]
            self._event_cursor += 1
            self._handle_event(event)

    def run_live(self, duration: Optional[float] = None, poll: float = 0.02) -> None:
        """Wall-clock loop for a served session (blocks until the round ends)."""
        end = duration if duration is not None else self.game.deadline
        start = time.monotonic()
        while not self.over:
            elapsed = time.monotonic() - start
            if elapsed > end:
                self.finish()
                break
            self.pump(now=elapsed)
            time.sleep(poll)

    # -- internals -----------------------------------------------------------

    def _handle_hand(self, source: str, hand: HandState) -> None:
        if self.over or not hand.valid:
            return
        palm = hand.palm_position
        fsms = self.fsms.setdefault(source, {c: self.fsm_template for c in COLORS})
        for color, anchor in self.anchors.items():
            lateral = ((palm.x - anchor.x) ** 2 + (palm.y - anchor.y) ** 2) ** 0.5
            fsm, intensity, event = button_step(fsms[color], palm.z, lateral)
            fsms[color] = fsm
            if event is not None:
                self._publish(self.button_node_id(color), event,
                              {"color": color, "player": source})
            if abs(intensity - self._last_intensity.get((source, color), -1.0)) > 1e-9:
                self._last_intensity[(source, color)] = intensity
                self._publish(self.button_node_id(color), "custom",
                              {"intensity": f"{intensity:.6f}", "color": color,
                               "player": source})

    def _handle_event(self, event: InteractionEvent) -> None:
        if self.over or event.kind != "press":
            return
        color = event.payload.get("color")
        if color is None:
            node = (self.client.state.status.nodes.get(event.target_node_id)
                    if self.client.state.status else None)
            color = node.metadata.get("color") if node else None
        if color not in COLORS:
            return
        player = event.payload.get("player", event.source_client_id)
        try:
            self.game, result = simon_check(self.game, color, client=player, now=self.now)
        except SimonError as exc:
            if exc.code == "game-over":
                self.finish()
            else:
                self._publish(event.target_node_id, "custom",
                              {"game": exc.code, "player": player})
            return
        self._publish(event.target_node_id, "custom",
                      {"game": result, "player": player, "color": color})
        self._publish_hud()

    def finish(self) -> None:
        if not self.over:
            self.over = True
            self._publish_hud()

    def _publish(self, target: str, kind: str, payload: dict) -> None:
        self._event_counter += 1
        self.client.publish_event(InteractionEvent(
            event_id=f"simon-{self._event_counter}",
            session_id=self.client.state.session_id or "",
            source_client_id=getattr(self.client, "client_id", "simon-engine"),
            target_node_id=target,
            kind=kind,
            timestamp=self.now * 1000.0,
            payload=payload,
        ))

    def _publish_hud(self) -> None:
        status = self.client.state.status
        if status is None:
            return
        root = status.nodes[status.root]
        hud = dict(root.metadata)
        hud.update({
            "simon_sequence": ",".join(self.game.sequence),
            "simon_cursor": str(self.game.cursor),
            "simon_correct": str(self.game.correct),
            "simon_fails": str(self.game.fails),
            "simon_turn": self.game.current_player() or "",
            "simon_mode": self.game.mode,
            "simon_deadline": f"{self.game.deadline:.3f}",
            "simon_over": "true" if self.over else "false",
        })
        self.client.submit_delta(NodeDelta.update(replace(root, metadata=hud)))


def read_hud(status) -> dict:
    """Extract the Simon HUD from a replicated status."""
    root = status.nodes[status.root]
    return {k: v for k, v in root.metadata.items() if k.startswith("simon_")}
