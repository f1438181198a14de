"""Rigid alignment between the world (AR) frame and the device frame.

The device frame can be established manually, from three anchor points the
user drops on the device corners, or automatically from a detected fiducial
marker whose offset to the device is known. Both produce a
:class:`RigidFrame` that maps points between the two spaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .model import ModelError, Quat, Vec3

MIN_ANCHOR_AREA = 1e-9  # m^2


class AlignmentError(ModelError):
    pass


@dataclass(frozen=True)
class RigidFrame:
    """Device pose in world space: origin plus world-to-device orientation.

    ``rotation`` maps the world basis onto the device basis, so columns of
    its matrix are the device axes expressed in world coordinates.
    """

    origin: Vec3 = field(default_factory=Vec3)
    rotation: Quat = field(default_factory=Quat)

    @classmethod
    def identity(cls) -> "RigidFrame":
        return cls()

    def compose(self, other: "RigidFrame") -> "RigidFrame":
        """Frame of ``other`` expressed through ``self`` (self then other)."""
        return RigidFrame(
            origin=self.origin + self.rotation.rotate(other.origin),
            rotation=(self.rotation * other.rotation).normalized(),
        )

    def validate(self) -> list[str]:
        problems = []
        if not self.origin.is_finite():
            problems.append("frame-origin-not-finite")
        if abs(self.rotation.norm() - 1.0) > 1e-9:
            problems.append("frame-rotation-not-unit")
        return problems

    def to_json(self) -> dict:
        return {"origin": self.origin.to_json(), "rotation": self.rotation.to_json()}

    @classmethod
    def from_json(cls, data: Mapping) -> "RigidFrame":
        return cls(Vec3.from_json(data["origin"]), Quat.from_json(data["rotation"]))


@dataclass(frozen=True)
class MarkerPose:
    """Detected fiducial pose plus the fixed marker-to-device offset."""

    pose: RigidFrame
    device_offset: RigidFrame = field(default_factory=RigidFrame)

    def to_json(self) -> dict:
        return {"pose": self.pose.to_json(), "device_offset": self.device_offset.to_json()}

    @classmethod
    def from_json(cls, data: Mapping) -> "MarkerPose":
        return cls(RigidFrame.from_json(data["pose"]),
                   RigidFrame.from_json(data["device_offset"]))


def frame_from_anchors(p0: Vec3, p1: Vec3, p2: Vec3) -> RigidFrame:
    """Device frame from three anchor points placed on the device corners.

    p0 is the origin corner, p1 the +x corner and p2 the +y corner: x runs
    along p1-p0, z is the plane normal (p1-p0) x (p2-p0), y completes the
    right-handed basis. Collinear anchors are rejected.
    """
    ex = p1 - p0
    ey_raw = p2 - p0
    n = ex.cross(ey_raw)
    if 0.5 * n.norm() <= MIN_ANCHOR_AREA:
        raise AlignmentError("collinear-anchors",
                             f"anchor triangle area {0.5 * n.norm():.3e} m^2")
    x = ex.normalized()
    z = n.normalized()
    y = z.cross(x)
    # Basis vectors become the columns of the rotation matrix.
    m = [[x.x, y.x, z.x],
         [x.y, y.y, z.y],
         [x.z, y.z, z.z]]
    return RigidFrame(origin=p0, rotation=Quat.from_matrix(m))


def frame_from_marker(marker: MarkerPose) -> RigidFrame:
    """Device frame from a marker detection composed with its fixed offset."""
    return marker.pose.compose(marker.device_offset)


def world_to_device(p: Vec3, frame: RigidFrame) -> Vec3:
    """Express a world-space point in device coordinates."""
    return frame.rotation.conjugate().rotate(p - frame.origin)


def device_to_world(p: Vec3, frame: RigidFrame) -> Vec3:
    """Express a device-space point in world coordinates."""
    return frame.rotation.rotate(p) + frame.origin
