"""Anchoring virtual content to the physical device.

Manual alignment: the user drops three anchors on the device corners; the
frame is rebuilt from those three points. Automatic alignment: a fiducial
marker is detected at a known offset from the device. Both give the same
rigid map between world and device space.
"""

import math

from harp import (MarkerPose, Quat, RigidFrame, Vec3, device_to_world,
                  frame_from_anchors, frame_from_marker, world_to_device)

# the device sits rotated 30 degrees on the table, origin corner at (2, 1, 0.8)
truth = RigidFrame(origin=Vec3(2.0, 1.0, 0.8),
                   rotation=Quat.from_axis_angle(Vec3(0, 0, 1), math.radians(30)))

anchors = [device_to_world(p, truth)
           for p in (Vec3(0, 0, 0), Vec3(0.2, 0, 0), Vec3(0, 0.16, 0))]
manual = frame_from_anchors(*anchors)
print("manual frame   :", {k: [round(c, 6) for c in v]
                           for k, v in manual.to_json().items()})

marker = MarkerPose(pose=truth, device_offset=RigidFrame(origin=Vec3(-0.05, 0, 0)))
auto = frame_from_marker(marker)
print("marker frame   :", {k: [round(c, 6) for c in v]
                           for k, v in auto.to_json().items()})

p_world = Vec3(2.1, 1.1, 1.0)
p_dev = world_to_device(p_world, manual)
back = device_to_world(p_dev, manual)
print(f"\nworld {p_world} -> device {p_dev} -> world {back}")
print(f"round-trip error: {(back - p_world).norm():.2e} m")
