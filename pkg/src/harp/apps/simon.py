"""Simon game state machine: repeat the growing color sequence.

A hit advances the cursor; completing the sequence scores and grows it by
one color; a miss counts a fail and regenerates a fresh sequence of the same
length that differs from the failed one. In turn-taking mode the registered
players must alternate inputs and an out-of-turn press is rejected without
touching the game.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Optional

from ..model import ModelError

COLORS = ("red", "green", "blue", "yellow")

PROGRESS = "progress"
SEQUENCE_COMPLETE = "sequence_complete"
FAIL = "fail"


class SimonError(ModelError):
    pass


@dataclass(frozen=True)
class SimonState:
    sequence: tuple[str, ...]
    cursor: int = 0
    correct: int = 0
    fails: int = 0
    deadline: float = 150.0  # seconds from round start
    mode: str = "solo"       # or "turn_taking"
    players: tuple[str, ...] = ()
    turn: int = 0            # index into players (turn_taking only)
    rng: random.Random = field(default_factory=random.Random, compare=False, repr=False)

    def current_player(self) -> Optional[str]:
        if self.mode == "turn_taking" and self.players:
            return self.players[self.turn % len(self.players)]
        return None


def simon_new(seed: int, length: int = 1, duration: float = 150.0,
              mode: str = "solo", players: tuple[str, ...] = ()) -> SimonState:
    """Fresh game with a seeded sequence of the given length."""
    if mode == "turn_taking" and len(players) < 2:
        raise SimonError("invalid-game", "turn_taking needs at least two players")
    rng = random.Random(seed)
    seq = tuple(rng.choice(COLORS) for _ in range(length))
    return SimonState(sequence=seq, deadline=duration, mode=mode,
                      players=tuple(players), rng=rng)


def simon_new_sequence(state: SimonState, grew: bool) -> SimonState:
    """Next sequence: one longer on success, same length but different on failure."""
    rng = state.rng
    if grew:
        seq = tuple(rng.choice(COLORS) for _ in range(len(state.sequence) + 1))
    else:
        while True:
            seq = tuple(rng.choice(COLORS) for _ in range(len(state.sequence)))
            if seq != state.sequence:
                break
    return replace(state, sequence=seq, cursor=0, turn=0)


def simon_check(state: SimonState, color: str, client: Optional[str] = None,
                now: float = 0.0) -> tuple[SimonState, str]:
    """Compare an input color against the next expected one.

    Rejected inputs (wrong turn, expired round) raise without any state
    change. Completing the sequence already returns the grown follow-up;
    failing returns the regenerated same-length sequence.
    """
    if now > state.deadline:
        raise SimonError("game-over", f"round ended at {state.deadline}s")
    if color not in COLORS:
        raise SimonError("invalid-color", color)
    if state.mode == "turn_taking":
        expected = state.current_player()
        if client != expected:
            raise SimonError("out-of-turn", f"{client} played, {expected}'s turn")

    if color == state.sequence[state.cursor]:
        advanced = replace(state, cursor=state.cursor + 1, turn=state.turn + 1)
        if advanced.cursor == len(advanced.sequence):
            scored = replace(advanced, correct=advanced.correct + 1)
            return simon_new_sequence(scored, grew=True), SEQUENCE_COMPLETE
        return advanced, PROGRESS

    failed = replace(state, fails=state.fails + 1)
    return simon_new_sequence(failed, grew=False), FAIL
