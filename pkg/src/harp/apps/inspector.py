"""Shape inspector harness: fit a figure to the device, voxelize, replay a hand.

For each requested figure the mesh is fitted into the working volume,
converted to the requested representation, and a scripted hand is replayed
through the device simulator; the report collects per-tick slice sizes and
perception so different representations can be compared offline.
"""

from __future__ import annotations

import time
from typing import Optional, Sequence

from ..device import DeviceDescriptor, PerceptionParams, run
from ..geometry import PRIMITIVE_KINDS, fit_to_volume, make_primitive
from ..model import ModelError, Transform
from ..render import (RepresentationSpec, VoxelGrid, render_feature_based,
                      render_vertex_based, schedule, slice_for_hand, voxelize)
from ..device import HandScript


class InspectorError(ModelError):
    pass


def default_sweep(device: DeviceDescriptor, sweeps: int = 1,
                  seconds_per_sweep: float = 2.0) -> HandScript:
    """Bottom-to-top palm sweeps through the working volume."""
    from ..model import Vec3

    lo = device.working_volume.min.z
    hi = device.working_volume.max.z
    center_x = (device.working_volume.min.x + device.working_volume.max.x) / 2
    center_y = (device.working_volume.min.y + device.working_volume.max.y) / 2
    points = []
    for s in range(sweeps + 1):
        z = hi if s % 2 else lo
        points.append((s * seconds_per_sweep, Vec3(center_x, center_y, z)))
    return HandScript.from_points(points)


def inspect_figure(figure: str, spec: RepresentationSpec, script: HandScript,
                   device: DeviceDescriptor, params: PerceptionParams) -> dict:
    if figure not in PRIMITIVE_KINDS:
        raise InspectorError("unknown-figure", figure)
    started = time.perf_counter()
    mesh = make_primitive(figure)
    transform = fit_to_volume(mesh, Transform.identity(), device.working_volume)

    grid: Optional[VoxelGrid] = None
    static_points = None
    if spec.strategy == "feature_based":
        static_points = render_feature_based(mesh, transform, spec.base_intensity)
    elif spec.strategy == "vertex_based":
        static_points = render_vertex_based(mesh, transform, spec.base_intensity)
    else:
        grid = voxelize(mesh, transform, VoxelGrid.empty(device.working_volume,
                                                         spec.grid_dims),
                        spec.voxel_mode())

    def source(hand, frame_index):
        if grid is not None:
            points = slice_for_hand(grid, hand, spec.base_intensity)
        else:
            points = static_points
        return schedule(points, device.capacity, frame_index).points

    log = run(script, source, device, params)
    wall_clock = time.perf_counter() - started

    felt = [rec for rec in log if rec.aggregate > 0]
    return {
        "figure": figure,
        "strategy": spec.strategy,
        "grid_dims": list(spec.grid_dims) if grid is not None else None,
        "occupied_cells": len(grid.occupied()) if grid is not None else None,
        "static_points": len(static_points) if static_points is not None else None,
        "ticks": len(log),
        "ticks_felt": len(felt),
        "max_perceived": max((rec.aggregate for rec in log), default=0.0),
        "felt_z_range": ([min(r.hand.palm_position.z for r in felt),
                          max(r.hand.palm_position.z for r in felt)] if felt else None),
        "wall_clock_s": wall_clock,
    }


def inspector_run(figures: Sequence[str], spec: RepresentationSpec,
                  script: Optional[HandScript] = None,
                  device: Optional[DeviceDescriptor] = None,
                  params: Optional[PerceptionParams] = None) -> dict:
    """Inspect several figures; the report is JSON-ready."""
    device = device if device is not None else DeviceDescriptor()
    params = params if params is not None else PerceptionParams()
    script = script if script is not None else default_sweep(device)
    return {
        "representation": spec.to_json(),
        "device": device.to_json(),
        "perception": params.to_json(),
        "figures": [inspect_figure(f, spec, script, device, params) for f in figures],
    }
