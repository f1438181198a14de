"""Virtual pressable button: depth-driven intensity ramp with hysteresis.

The button resists like a physical one: feedback starts at a hover level the
moment the palm reaches the rest height and ramps to full intensity as the
hand pushes down. The press fires once at full depth; the release fires once
when the hand has come back up past the hysteresis band, so jitter around
the threshold cannot double-fire.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from ..model import ModelError

IDLE = "idle"
HOVER = "hover"
PRESSED = "pressed"


class ButtonError(ModelError):
    pass


@dataclass(frozen=True)
class ButtonFsm:
    rest_z: float = 0.17        # resting height of the button face (m)
    press_depth: float = 0.03   # travel needed to fire a press (m)
    hysteresis: float = 0.01    # release rearming distance (m)
    hover_intensity: float = 0.4
    max_intensity: float = 1.0
    palm_radius: float = 0.05   # lateral reach; farther than this is off-button
    state: str = IDLE

    def __post_init__(self):
        if not (0.0 < self.hysteresis < self.press_depth):
            raise ButtonError("invalid-button", "need 0 < hysteresis < press_depth")
        if not (0.0 <= self.hover_intensity < self.max_intensity <= 1.0):
            raise ButtonError("invalid-button", "need hover < max <= 1")
        if self.state not in (IDLE, HOVER, PRESSED):
            raise ButtonError("invalid-button", f"state {self.state!r}")


def button_step(fsm: ButtonFsm, hand_z: float,
                lateral_dist: float = 0.0) -> tuple[ButtonFsm, float, Optional[str]]:
    """Advance the button with one hand sample.

    Returns the new state, the intensity to drive the haptic point with, and
    "press" / "release" on the single step where the transition happens.
    Leaving the button laterally while pressed releases it.
    """
    if lateral_dist > fsm.palm_radius:
        event = "release" if fsm.state == PRESSED else None
        return replace(fsm, state=IDLE), 0.0, event

    depth = max(0.0, fsm.rest_z - hand_z)
    intensity = fsm.hover_intensity + (
        (fsm.max_intensity - fsm.hover_intensity) * min(depth / fsm.press_depth, 1.0))

    if fsm.state == PRESSED:
        if depth <= fsm.press_depth - fsm.hysteresis:
            return replace(fsm, state=HOVER), intensity, "release"
        return fsm, intensity, None

    if depth >= fsm.press_depth:
        return replace(fsm, state=PRESSED), intensity, "press"
    return replace(fsm, state=HOVER), intensity, None
