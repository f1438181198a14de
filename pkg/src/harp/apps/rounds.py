"""Headless Simon rounds with scripted players.

Players steer a virtual hand through the same wire path a live client would
use: publish hand updates, let the engine's button machines fire the press
events, read the HUD back from the replica. Everything runs on a logical
clock, so a (seed, policy) pair reproduces the identical round every time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..model import HandState, Vec3
from ..service import LocalClient, SessionService
from .buttons import ButtonFsm
from .engine import BUTTON_GRID, SimonEngine, read_hud

PLAYER_TICK = 0.12  # s; spaced wider than the 10 Hz hand gate so nothing drops


@dataclass
class PressPlan:
    color: str
    step: int = 0  # 6 steps: 2 above, 2 pressed, 2 above


class ScriptedPlayer:
    """Steers the hand to press buttons; what it presses is the policy."""

    def __init__(self, client: LocalClient, policy: str = "perfect",
                 fsm: Optional[ButtonFsm] = None):
        self.client = client
        self.policy = policy
        fsm = fsm if fsm is not None else ButtonFsm()
        self.high_z = fsm.rest_z + 0.05
        self.low_z = fsm.rest_z - fsm.press_depth - 0.005
        self.plan: Optional[PressPlan] = None
        self.park = Vec3(0.0, 0.09, self.high_z)  # off the 2x2 grid

    def _my_turn(self, hud: dict) -> bool:
        turn = hud.get("simon_turn", "")
        return turn == "" or turn == self.client.client_id

    def _next_color(self, hud: dict) -> Optional[str]:
        sequence = [c for c in hud.get("simon_sequence", "").split(",") if c]
        cursor = int(hud.get("simon_cursor", "0"))
        if self.policy == "always-red":
            return "red"
        if cursor < len(sequence):
            return sequence[cursor]
        return None

    def tick(self, now: float) -> None:
        """Publish one hand sample."""
        hud = read_hud(self.client.replica) if self.client.replica else {}
        if hud.get("simon_over") == "true":
            self._move(self.park, now)
            return
        if self.plan is None:
            if self._my_turn(hud):
                color = self._next_color(hud)
                if color is not None:
                    self.plan = PressPlan(color)
        if self.plan is None:
            self._move(self.park, now)
            return
        x, y = BUTTON_GRID[self.plan.color]
        z = self.high_z if self.plan.step in (0, 1, 4, 5) else self.low_z
        self._move(Vec3(x, y, z), now)
        self.plan.step += 1
        if self.plan.step >= 6:
            self.plan = None

    def _move(self, pos: Vec3, now: float) -> None:
        self.client.publish_hand(HandState(palm_position=pos, timestamp=now))


def simon_round_run(duration: float = 150.0, seed: int = 0,
                    policy: str = "perfect", mode: str = "solo",
                    n_players: int = 1, start_length: int = 1) -> dict:
    """Run one full round in process and score it.

    Returns ``{"correct_sequences", "fails", "duration", "seed", "mode",
    "players", "hud"}``; deterministic for fixed inputs.
    """
    service = SessionService(clock=lambda: 0.0)
    engine_client = LocalClient(service, "simon-engine", "observer")
    session_id = engine_client.create_session()
    engine_client.join(session_id)

    player_ids = tuple(f"player-{i + 1}" for i in range(n_players))
    players = []
    for pid in player_ids:
        c = LocalClient(service, pid, "haptic")
        c.join(session_id)
        players.append(ScriptedPlayer(c, policy=policy))

    engine = SimonEngine(engine_client, seed=seed, duration=duration, mode=mode,
                         players=player_ids if mode == "turn_taking" else (),
                         start_length=start_length)
    engine.setup()

    t = 0.0
    step = 0
    while t <= duration and not engine.over:
        for player in players:
            player.tick(t)
        engine.pump(now=t)
        step += 1
        t = step * PLAYER_TICK
    engine.pump(now=min(t, duration))
    if not engine.over:
        engine.finish()

    return {
        "correct_sequences": engine.game.correct,
        "fails": engine.game.fails,
        "duration": duration,
        "seed": seed,
        "mode": mode,
        "players": list(player_ids),
        "hud": read_hud(engine_client.replica),
    }
