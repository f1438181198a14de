"""Time multiplexing: more points than the device can emit at once.

The device drives at most 4 focal points simultaneously, so larger point
sets are split into stride groups and cycled frame by frame; across one full
cycle every point is emitted exactly once.
"""

from harp import HapticPoint, Vec3, schedule

points = [HapticPoint(Vec3(0, 0, 0.1 + 0.01 * i)) for i in range(9)]
print(f"{len(points)} points, capacity 4 -> groups of indices per frame:")
for frame_index in range(6):
    frame = schedule(points, 4, frame_index)
    idx = [round((p.position.z - 0.1) / 0.01) for p in frame.points]
    print(f"  frame {frame_index}: {idx}")

print("\nwith 8 points the classic even/odd split falls out:")
points = [HapticPoint(Vec3(0, 0, 0.1 + 0.01 * i)) for i in range(8)]
for frame_index in range(2):
    frame = schedule(points, 4, frame_index)
    idx = [round((p.position.z - 0.1) / 0.01) for p in frame.points]
    print(f"  frame {frame_index}: {idx}")
