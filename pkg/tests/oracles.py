"""Independent brute-force oracles used to pin expected values.

These deliberately avoid the library's voxelizer/scheduler internals: plain
Python loops over the same documented contracts (per-vertex cell assignment,
segment-plane enumeration, +x ray-parity with the lexicographic tie-break).
They take already-posed vertices so the pose step itself is shared, while the
logic under test is recomputed from scratch.
"""

from __future__ import annotations

import math


def cell_index(c: float, origin: float, cell: float, n: int) -> int:
    i = math.floor((c - origin) / cell)
    if i < 0:
        i = 0
    if i > n - 1:
        i = n - 1
    return i


def cell_of(p, grid) -> tuple[int, int, int]:
    return (
        cell_index(p[0], grid.origin.x, grid.cell_size.x, grid.dims[0]),
        cell_index(p[1], grid.origin.y, grid.cell_size.y, grid.dims[1]),
        cell_index(p[2], grid.origin.z, grid.cell_size.z, grid.dims[2]),
    )


def unique_edges(triangles) -> list[tuple[int, int]]:
    seen = set()
    out = []
    for a, b, c in triangles:
        for i, j in ((a, b), (b, c), (c, a)):
            key = (min(i, j), max(i, j))
            if key not in seen:
                seen.add(key)
                out.append(key)
    return out


def vertex_cells(verts, grid) -> set[tuple[int, int, int]]:
    """Per-vertex cell assignment."""
    return {cell_of(v, grid) for v in verts}


def edge_plane_points(verts, triangles, plane_z: float) -> list[tuple[float, float, float]]:
    """All edge/plane intersection points (no dedup); in-plane edges give endpoints."""
    pts = []
    for i, j in unique_edges(triangles):
        a, b = verts[i], verts[j]
        az, bz = a[2], b[2]
        if az == plane_z and bz == plane_z:
            pts.append((a[0], a[1], a[2]))
            pts.append((b[0], b[1], b[2]))
        elif min(az, bz) <= plane_z <= max(az, bz) and az != bz:
            t = (plane_z - az) / (bz - az)
            pts.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), plane_z))
    return pts


def edge_cells(verts, triangles, grid) -> set[tuple[int, int, int]]:
    """Vertex cells plus edge crossings with every cell-center slice plane."""
    cells = vertex_cells(verts, grid)
    for k in range(grid.dims[2]):
        plane_z = grid.origin.z + (k + 0.5) * grid.cell_size.z
        for p in edge_plane_points(verts, triangles, plane_z):
            cells.add(cell_of(p, grid))
    return cells


def point_inside(point, verts, triangles) -> bool:
    """+x ray parity with the (y, z) lexicographic tie-break for zero orients."""
    px, py, pz = point
    crossings = 0
    for tri in triangles:
        a, b, c = verts[tri[0]], verts[tri[1]], verts[tri[2]]
        area2 = (c[1] - b[1]) * (a[2] - b[2]) - (c[2] - b[2]) * (a[1] - b[1])
        if area2 == 0.0:
            continue
        signs = []
        ws = []
        degenerate = False
        for u, v in ((b, c), (c, a), (a, b)):
            w = (v[1] - u[1]) * (pz - u[2]) - (v[2] - u[2]) * (py - u[1])
            if w > 0.0:
                s = 1
            elif w < 0.0:
                s = -1
            else:
                tie = -(v[2] - u[2])
                if tie == 0.0:
                    tie = v[1] - u[1]
                s = 1 if tie > 0.0 else (-1 if tie < 0.0 else 0)
            if s == 0:
                degenerate = True
            signs.append(s)
            ws.append(w)
        if degenerate or not (signs[0] == signs[1] == signs[2]):
            continue
        x_hit = (ws[0] * a[0] + ws[1] * b[0] + ws[2] * c[0]) / (ws[0] + ws[1] + ws[2])
        if x_hit > px:
            crossings += 1
    return crossings % 2 == 1


def interior_cells(verts, triangles, grid) -> set[tuple[int, int, int]]:
    """Edge cells plus every cell whose center passes the parity test."""
    cells = edge_cells(verts, triangles, grid)
    for ix in range(grid.dims[0]):
        for iy in range(grid.dims[1]):
            for iz in range(grid.dims[2]):
                center = (
                    grid.origin.x + (ix + 0.5) * grid.cell_size.x,
                    grid.origin.y + (iy + 0.5) * grid.cell_size.y,
                    grid.origin.z + (iz + 0.5) * grid.cell_size.z,
                )
                if point_inside(center, verts, triangles):
                    cells.add((ix, iy, iz))
    return cells


def parity_fill_only(verts, triangles, grid) -> set[tuple[int, int, int]]:
    """Just the inside-center cells, without vertex/edge marks."""
    cells = set()
    for ix in range(grid.dims[0]):
        for iy in range(grid.dims[1]):
            for iz in range(grid.dims[2]):
                center = (
                    grid.origin.x + (ix + 0.5) * grid.cell_size.x,
                    grid.origin.y + (iy + 0.5) * grid.cell_size.y,
                    grid.origin.z + (iz + 0.5) * grid.cell_size.z,
                )
                if point_inside(center, verts, triangles):
                    cells.add((ix, iy, iz))
    return cells


def brute_force_dedup(vertices, eps: float):
    """Greedy earliest-match merge by pairwise distance; returns keep + remap."""
    kept = []
    remap = []
    for v in vertices:
        target = -1
        for k, kv in enumerate(kept):
            d = math.dist((v.x, v.y, v.z), (kv.x, kv.y, kv.z))
            if d <= eps:
                target = k
                break
        if target < 0:
            target = len(kept)
            kept.append(v)
        remap.append(target)
    return kept, remap


def multiplex_groups(n: int, capacity: int) -> list[list[int]]:
    """Stride grouping: member i joins group i mod ceil(n / capacity)."""
    groups = max(1, math.ceil(n / capacity))
    return [[i for i in range(n) if i % groups == g] for g in range(groups)]
