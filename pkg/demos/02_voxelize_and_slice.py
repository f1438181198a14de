"""Voxelize a figure into the device volume and look at palm-height slices.

The device only ever renders the single slice under the palm; sweeping the
hand up and down is how a person reads the shape. Each panel below is one
z layer: '#' marks cells the device would emit as focal points.
"""

from harp import (DeviceDescriptor, HandState, RepresentationSpec, Transform, Vec3,
                  VoxelGrid, fit_to_volume, make_primitive, slice_for_hand, voxelize)

device = DeviceDescriptor()
spec = RepresentationSpec("volume_based", grid_dims=(10, 10, 10))

mesh = make_primitive("house")
pose = fit_to_volume(mesh, Transform.identity(), device.working_volume)
grid = voxelize(mesh, pose, VoxelGrid.empty(device.working_volume, spec.grid_dims),
                spec.voxel_mode())
print(f"house: {len(grid.occupied())} of {10 ** 3} cells occupied\n")

lo = device.working_volume.min.z
hi = device.working_volume.max.z
for frac in (0.15, 0.45, 0.8):
    palm_z = lo + frac * (hi - lo)
    points = slice_for_hand(grid, HandState(palm_position=Vec3(0, 0, palm_z)))
    layer = grid.cell_of(Vec3(0, 0, palm_z))[2]
    print(f"palm at z={palm_z:.3f} m -> layer {layer}, {len(points)} focal points")
    marked = {(grid.cell_of(p.position)[0], grid.cell_of(p.position)[1])
              for p in points}
    for iy in reversed(range(grid.dims[1])):
        print("   " + "".join("#" if (ix, iy) in marked else "."
                              for ix in range(grid.dims[0])))
    print()
