"""Deterministic stand-in for the ultrasound array and its hand tracker.

Enforces the simultaneous focal-point limit, models how a focal point is
actually felt (a diffuse lateral falloff around the point, only near the palm
plane, and nothing when the palm occludes the point from below), and replays
scripted hand trajectories on a fixed tick clock so application runs are
reproducible bit for bit.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

from .geometry import Aabb
from .model import HandState, ModelError, Vec3
from .render import HapticFrame, HapticPoint


class DeviceError(ModelError):
    pass


def default_working_volume() -> Aabb:
    return Aabb(Vec3(-0.1, -0.1, 0.05), Vec3(0.1, 0.1, 0.35))


@dataclass(frozen=True)
class DeviceDescriptor:
    """Capacity, reachable volume and tick rate of the simulated array."""

    capacity: int = 4
    working_volume: Aabb = field(default_factory=default_working_volume)
    tick_rate: float = 100.0  # Hz

    def __post_init__(self):
        if self.capacity < 1:
            raise DeviceError("invalid-device", "capacity must be >= 1")
        ext = self.working_volume.extent()
        if not (ext.x > 0 and ext.y > 0 and ext.z > 0):
            raise DeviceError("invalid-device", "degenerate working volume")
        if not self.tick_rate > 0:
            raise DeviceError("invalid-device", "tick rate must be > 0")

    def to_json(self) -> dict:
        return {
            "capacity": self.capacity,
            "working_volume": self.working_volume.to_json(),
            "tick_rate": self.tick_rate,
        }


@dataclass(frozen=True)
class PerceptionParams:
    """Diffuse-point model: lateral Gaussian falloff, palm-plane band, palm reach."""

    sigma: float = 0.01   # lateral falloff scale (m)
    tau: float = 0.01     # half thickness of the perceivable band around the palm (m)
    palm_radius: float = 0.05  # lateral reach of the palm (m)

    def __post_init__(self):
        if not (self.sigma > 0 and self.tau > 0 and self.palm_radius > 0):
            raise DeviceError("invalid-perception", "all parameters must be > 0")

    def to_json(self) -> dict:
        return {"sigma": self.sigma, "tau": self.tau, "palm_radius": self.palm_radius}


@dataclass(frozen=True)
class Waypoint:
    time: float
    position: Vec3
    valid: bool = True


@dataclass(frozen=True)
class HandScript:
    """Piecewise-linear palm trajectory; times must strictly increase.

    Samples between waypoints interpolate the position; validity holds only
    while both bracketing waypoints are valid, which is how tracking-loss
    intervals are injected.
    """

    waypoints: tuple[Waypoint, ...]

    def __post_init__(self):
        if not self.waypoints:
            raise DeviceError("invalid-script", "script needs at least one waypoint")
        times = [w.time for w in self.waypoints]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise DeviceError("invalid-script", "waypoint times must strictly increase")

    @classmethod
    def from_points(cls, points: Sequence[tuple[float, Vec3]]) -> "HandScript":
        return cls(tuple(Waypoint(t, p) for t, p in points))

    def duration(self) -> float:
        return self.waypoints[-1].time

    def sample(self, t: float) -> HandState:
        ws = self.waypoints
        if t <= ws[0].time:
            w = ws[0]
            return HandState(palm_position=w.position, valid=w.valid, timestamp=t)
        if t >= ws[-1].time:
            w = ws[-1]
            return HandState(palm_position=w.position, valid=w.valid, timestamp=t)
        i = bisect_right([w.time for w in ws], t) - 1
        a, b = ws[i], ws[i + 1]
        u = (t - a.time) / (b.time - a.time)
        pos = a.position + (b.position - a.position) * u
        return HandState(palm_position=pos, valid=a.valid and b.valid, timestamp=t)

    def to_json(self) -> dict:
        return {"waypoints": [
            {"t": w.time, "position": w.position.to_json(), "valid": w.valid}
            for w in self.waypoints
        ]}

    @classmethod
    def from_json(cls, data: Mapping) -> "HandScript":
        return cls(tuple(
            Waypoint(float(w["t"]), Vec3.from_json(w["position"]), bool(w.get("valid", True)))
            for w in data["waypoints"]
        ))


def emit(frame: HapticFrame, device: DeviceDescriptor) -> HapticFrame:
    """Gate a frame through the device: too many or out-of-volume points fail.

    The device never clamps: a point outside the working volume is an error
    listing the offending indices, and rejected frames are left untouched.
    """
    if len(frame.points) > device.capacity:
        raise DeviceError(
            "capacity-exceeded",
            f"{len(frame.points)} points > capacity {device.capacity}")
    bad = [i for i, p in enumerate(frame.points)
           if not device.working_volume.contains_point(p.position)]
    if bad:
        raise DeviceError("out-of-volume", f"points {bad} outside working volume")
    return frame


def perceived_intensity(hand: HandState, frame: HapticFrame,
                        params: PerceptionParams) -> tuple[list[float], float]:
    """Per-point perceived contribution and their max.

    A point registers only when its height is within ``tau`` of the palm
    plane and laterally within ``palm_radius``; the felt strength falls off
    as a Gaussian of the lateral distance. Points more than ``tau`` above the
    palm are occluded (the array is below, the palm blocks them) and
    contribute nothing.
    """
    if not hand.valid:
        raise DeviceError("invalid-hand", "hand tracking lost")
    palm = hand.palm_position
    per_point = []
    for p in frame.points:
        dz = p.position.z - palm.z
        d_lat = math.hypot(p.position.x - palm.x, p.position.y - palm.y)
        if abs(dz) <= params.tau and d_lat <= params.palm_radius:
            value = p.intensity * math.exp(-(d_lat ** 2) / (2.0 * params.sigma ** 2))
        else:
            value = 0.0
        per_point.append(value)
    return per_point, max(per_point, default=0.0)


@dataclass(frozen=True)
class TickRecord:
    time: float
    hand: HandState
    frame: HapticFrame
    per_point: tuple[float, ...]
    aggregate: float

    def to_json(self) -> dict:
        return {
            "time": self.time,
            "hand": self.hand.to_json(),
            "frame": self.frame.to_json(),
            "per_point": list(self.per_point),
            "aggregate": self.aggregate,
        }


PointSource = Callable[[HandState, int], Sequence[HapticPoint]]


def run(script: HandScript, point_source: PointSource, device: DeviceDescriptor,
        params: PerceptionParams, duration: Optional[float] = None) -> list[TickRecord]:
    """Replay a hand script through the device at its tick rate.

    Each tick interpolates the hand, asks the point source for that tick's
    points (e.g. slice at the palm, then schedule), gates them through
    :func:`emit` and evaluates perception. Ticks with invalid hand tracking
    produce an empty frame and zero perception. The log is a pure function of
    its inputs.
    """
    if duration is None:
        duration = script.duration()
    ticks = int(math.floor(duration * device.tick_rate)) + 1
    log: list[TickRecord] = []
    for i in range(ticks):
        t = i / device.tick_rate
        hand = script.sample(t)
        if hand.valid:
            points = tuple(point_source(hand, i))
            frame = emit(HapticFrame(i, points), device)
            per_point, aggregate = perceived_intensity(hand, frame, params)
        else:
            frame = HapticFrame(i, ())
            per_point, aggregate = [], 0.0
        log.append(TickRecord(t, hand, frame, tuple(per_point), aggregate))
    return log


def log_to_jsonl(log: Sequence[TickRecord]) -> str:
    """One canonical-JSON record per line."""
    from .model import canonical_json

    return "\n".join(canonical_json(rec.to_json()) for rec in log) + "\n"
