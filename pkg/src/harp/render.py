"""Conversion of posed meshes into device focal points.

Four strategies are supported: a single centroid point (feature based), one
point per vertex, edge crossings on horizontal slice planes, and a filled
volume. The grid strategies discretize the working volume into a boolean
voxel matrix; at runtime only the slice at the user's palm height is emitted,
and the emitted point set is time-multiplexed to honor the device's
simultaneous-point capacity.

Interior fill predicate
-----------------------
A cell center P is inside when a ray along +x crosses the mesh an odd number
of times. Per triangle (A, B, C), in the (y, z) projection:

    w0 = (C.y-B.y)*(P.z-B.z) - (C.z-B.z)*(P.y-B.y)
    w1 = (A.y-C.y)*(P.z-C.z) - (A.z-C.z)*(P.y-C.y)
    w2 = (B.y-A.y)*(P.z-A.z) - (B.z-A.z)*(P.y-A.y)

A zero w is resolved by the sign of -(V.z-U.z), then (V.y-U.y), for the edge
(U, V) it belongs to (equivalent to nudging P by (+eps, +eps^2) in (y, z),
so rays through shared edges or vertices are counted consistently). The
triangle is crossed when all three resolved signs agree and
x_hit = (w0*A.x + w1*B.x + w2*C.x) / (w0+w1+w2) is strictly greater than P.x.
Triangles with zero projected area are skipped. Any independent checker that
follows this predicate reproduces the fill bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .geometry import (Aabb, aabb, dedup_vertices, mesh_edges, transform_points,
                       vec_from, vertex_array)
from .model import HandState, Mesh, ModelError, Transform, Vec3

STRATEGIES = ("feature_based", "vertex_based", "edge_based", "volume_based")

POINT_DEDUP_EPS = 1e-6


class RenderError(ModelError):
    pass


@dataclass(frozen=True)
class RepresentationSpec:
    """How a mesh should be turned into haptic points."""

    strategy: str = "volume_based"
    grid_dims: tuple[int, int, int] = (16, 16, 16)
    include_interior: bool = False
    base_intensity: float = 1.0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise RenderError("invalid-strategy", self.strategy)
        if any(n < 2 for n in self.grid_dims):
            raise RenderError("invalid-grid", f"dims {self.grid_dims} must all be >= 2")
        if not (0.0 < self.base_intensity <= 1.0):
            raise RenderError("invalid-intensity", str(self.base_intensity))

    def voxel_mode(self) -> str:
        if self.strategy == "volume_based" or self.include_interior:
            return "interior"
        return "edges"

    def to_json(self) -> dict:
        return {
            "strategy": self.strategy,
            "grid_dims": list(self.grid_dims),
            "include_interior": self.include_interior,
            "base_intensity": self.base_intensity,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "RepresentationSpec":
        return cls(
            strategy=data["strategy"],
            grid_dims=tuple(data["grid_dims"]),
            include_interior=bool(data.get("include_interior", False)),
            base_intensity=float(data.get("base_intensity", 1.0)),
        )


@dataclass(frozen=True)
class HapticPoint:
    position: Vec3
    intensity: float = 1.0

    def to_json(self) -> dict:
        return {"position": self.position.to_json(), "intensity": self.intensity}

    @classmethod
    def from_json(cls, data: Mapping) -> "HapticPoint":
        return cls(Vec3.from_json(data["position"]), float(data["intensity"]))


@dataclass(frozen=True)
class HapticFrame:
    frame_index: int
    points: tuple[HapticPoint, ...] = ()

    def to_json(self) -> dict:
        return {"frame_index": self.frame_index, "points": [p.to_json() for p in self.points]}

    @classmethod
    def from_json(cls, data: Mapping) -> "HapticFrame":
        return cls(int(data["frame_index"]),
                   tuple(HapticPoint.from_json(p) for p in data["points"]))


class VoxelGrid:
    """Boolean discretization of a box volume; immutable once built.

    Cells are indexed (ix, iy, iz); a coordinate maps to
    floor((c - origin) / cell_size), with values exactly on the upper face
    clamped into the last cell so closed meshes spanning the grid keep their
    far corners.
    """

    def __init__(self, origin: Vec3, cell_size: Vec3, dims: tuple[int, int, int],
                 occupancy: Optional[np.ndarray] = None):
        if any(n < 1 for n in dims):
            raise RenderError("invalid-grid", f"dims {dims}")
        if not (cell_size.x > 0 and cell_size.y > 0 and cell_size.z > 0):
            raise RenderError("invalid-grid", "cell size must be positive")
        self.origin = origin
        self.cell_size = cell_size
        self.dims = tuple(int(n) for n in dims)
        if occupancy is None:
            occupancy = np.zeros(self.dims, dtype=bool)
        occupancy = np.asarray(occupancy, dtype=bool).reshape(self.dims)
        occupancy.setflags(write=False)
        self.occupancy = occupancy

    @classmethod
    def empty(cls, volume: Aabb, dims: tuple[int, int, int]) -> "VoxelGrid":
        ext = volume.extent()
        cell = Vec3(ext.x / dims[0], ext.y / dims[1], ext.z / dims[2])
        return cls(volume.min, cell, dims)

    def bounds(self) -> Aabb:
        ext = Vec3(self.cell_size.x * self.dims[0],
                   self.cell_size.y * self.dims[1],
                   self.cell_size.z * self.dims[2])
        return Aabb(self.origin, self.origin + ext)

    def cell_of(self, p: Vec3, tol: float = 1e-9) -> tuple[int, int, int]:
        out = []
        for c, o, s, n in ((p.x, self.origin.x, self.cell_size.x, self.dims[0]),
                           (p.y, self.origin.y, self.cell_size.y, self.dims[1]),
                           (p.z, self.origin.z, self.cell_size.z, self.dims[2])):
            hi = o + s * n
            if c < o - tol or c > hi + tol:
                raise RenderError("out-of-grid", f"{p} outside {self.bounds()}")
            i = math.floor((c - o) / s)
            out.append(min(max(i, 0), n - 1))
        return tuple(out)

    def center_of(self, ix: int, iy: int, iz: int) -> Vec3:
        return Vec3(self.origin.x + (ix + 0.5) * self.cell_size.x,
                    self.origin.y + (iy + 0.5) * self.cell_size.y,
                    self.origin.z + (iz + 0.5) * self.cell_size.z)

    def occupied(self) -> list[tuple[int, int, int]]:
        return [(int(a), int(b), int(c)) for a, b, c in np.argwhere(self.occupancy)]

    def occupied_set(self) -> set[tuple[int, int, int]]:
        return set(self.occupied())

    def with_occupancy(self, occupancy: np.ndarray) -> "VoxelGrid":
        return VoxelGrid(self.origin, self.cell_size, self.dims, occupancy)

    def __eq__(self, other) -> bool:
        return (isinstance(other, VoxelGrid)
                and self.origin == other.origin
                and self.cell_size == other.cell_size
                and self.dims == other.dims
                and bool(np.array_equal(self.occupancy, other.occupancy)))

    def to_json(self) -> dict:
        flat = self.occupancy.ravel(order="C")
        runs: list[int] = []
        current = False
        count = 0
        for v in flat:
            if bool(v) == current:
                count += 1
            else:
                runs.append(count)
                current = bool(v)
                count = 1
        runs.append(count)
        return {
            "dims": list(self.dims),
            "origin": self.origin.to_json(),
            "cell_size": self.cell_size.to_json(),
            "rle": runs,  # alternating false/true run lengths, starts with false
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "VoxelGrid":
        dims = tuple(data["dims"])
        total = dims[0] * dims[1] * dims[2]
        flat = np.zeros(total, dtype=bool)
        pos = 0
        value = False
        for run in data["rle"]:
            if value:
                flat[pos:pos + run] = True
            pos += run
            value = not value
        if pos != total:
            raise RenderError("invalid-grid", f"rle covers {pos} of {total} cells")
        return cls(Vec3.from_json(data["origin"]), Vec3.from_json(data["cell_size"]),
                   dims, flat.reshape(dims))


# ---------------------------------------------------------------------------
# point strategies


def render_feature_based(mesh: Mesh, transform: Transform,
                         intensity: float = 1.0) -> list[HapticPoint]:
    """Collapse the whole mesh to one point at its transformed centroid."""
    from .geometry import centroid

    c = transform.apply(centroid(mesh))
    return [HapticPoint(c, intensity)]


def render_vertex_based(mesh: Mesh, transform: Transform,
                        intensity: float = 1.0) -> list[HapticPoint]:
    """One point per unique transformed vertex, in vertex order."""
    deduped = dedup_vertices(mesh)
    if not deduped.vertices:
        raise RenderError("empty-mesh", "no vertices to render")
    pts = transform_points(transform, vertex_array(deduped))
    return [HapticPoint(vec_from(p), intensity) for p in pts]


def edge_slice_intersections(mesh: Mesh, transform: Transform,
                             plane_z: float) -> list[Vec3]:
    """Unique intersections of triangle edges with the plane z = plane_z.

    Edges lying in the plane contribute both endpoints; results are deduped
    at 1e-6 m, first occurrence kept.
    """
    verts = transform_points(transform, vertex_array(mesh))
    hits: list[Vec3] = []
    for i, j in mesh_edges(mesh):
        az, bz = verts[i][2], verts[j][2]
        if az == plane_z and bz == plane_z:
            hits.append(vec_from(verts[i]))
            hits.append(vec_from(verts[j]))
        elif min(az, bz) <= plane_z <= max(az, bz) and az != bz:
            t = (plane_z - az) / (bz - az)
            p = verts[i] + t * (verts[j] - verts[i])
            hits.append(Vec3(float(p[0]), float(p[1]), float(plane_z)))
    unique: list[Vec3] = []
    for p in hits:
        if all((p - q).norm() > POINT_DEDUP_EPS for q in unique):
            unique.append(p)
    return unique


def _interior_mask(verts: np.ndarray, tris: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Ray-parity inside test along +x for each center (see module docstring)."""
    inside = np.zeros(len(centers), dtype=bool)
    px, py, pz = centers[:, 0], centers[:, 1], centers[:, 2]
    for tri in tris:
        a, b, c = verts[tri[0]], verts[tri[1]], verts[tri[2]]
        area2 = ((c[1] - b[1]) * (a[2] - b[2]) - (c[2] - b[2]) * (a[1] - b[1]))
        if area2 == 0.0:
            continue
        signs = []
        ws = []
        for u, v in ((b, c), (c, a), (a, b)):
            w = (v[1] - u[1]) * (pz - u[2]) - (v[2] - u[2]) * (py - u[1])
            s = np.sign(w)
            tie = -(v[2] - u[2])
            if tie == 0.0:
                tie = v[1] - u[1]
            s = np.where(w == 0.0, np.sign(tie), s)
            signs.append(s)
            ws.append(w)
        covered = (signs[0] == signs[1]) & (signs[1] == signs[2]) & (signs[0] != 0)
        # uncovered points may have exactly cancelling orients; they are
        # masked away, so silence the resulting division warnings
        with np.errstate(divide="ignore", invalid="ignore"):
            x_hit = (ws[0] * a[0] + ws[1] * b[0] + ws[2] * c[0]) / (ws[0] + ws[1] + ws[2])
            inside ^= covered & (x_hit > px)
    return inside


def voxelize(mesh: Mesh, transform: Transform, grid: VoxelGrid, mode: str) -> VoxelGrid:
    """Mark grid cells touched by the posed mesh.

    Modes are cumulative: ``vertices`` marks the cell under each vertex;
    ``edges`` additionally marks edge crossings with every cell-center slice
    plane z = origin.z + (k + 0.5) * cell.z; ``interior`` additionally fills
    cells whose center is inside the mesh (+x ray parity). The transformed
    mesh must already fit the grid (fit it first); anything outside raises
    ``out-of-grid``.
    """
    if mode not in ("vertices", "edges", "interior"):
        raise RenderError("invalid-mode", mode)
    if not mesh.vertices:
        raise RenderError("empty-mesh", "cannot voxelize an empty mesh")
    box = aabb(mesh, transform)
    if not grid.bounds().contains_aabb(box, tol=1e-9):
        raise RenderError("out-of-grid", f"mesh bounds {box.to_json()} exceed grid")

    verts = transform_points(transform, vertex_array(mesh))
    occ = np.zeros(grid.dims, dtype=bool)

    for p in verts:
        occ[grid.cell_of(Vec3(*p))] = True

    if mode in ("edges", "interior"):
        nz = grid.dims[2]
        planes = [grid.origin.z + (k + 0.5) * grid.cell_size.z for k in range(nz)]
        for i, j in mesh_edges(mesh):
            az, bz = verts[i][2], verts[j][2]
            lo, hi = (az, bz) if az <= bz else (bz, az)
            for plane_z in planes:
                if az == plane_z and bz == plane_z:
                    occ[grid.cell_of(Vec3(*verts[i]))] = True
                    occ[grid.cell_of(Vec3(*verts[j]))] = True
                elif lo <= plane_z <= hi and az != bz:
                    t = (plane_z - az) / (bz - az)
                    p = verts[i] + t * (verts[j] - verts[i])
                    occ[grid.cell_of(Vec3(p[0], p[1], plane_z))] = True

    if mode == "interior":
        nx, ny, nz = grid.dims
        ix, iy, iz = np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nz),
                                 indexing="ij")
        centers = np.stack([
            grid.origin.x + (ix.ravel() + 0.5) * grid.cell_size.x,
            grid.origin.y + (iy.ravel() + 0.5) * grid.cell_size.y,
            grid.origin.z + (iz.ravel() + 0.5) * grid.cell_size.z,
        ], axis=1)
        from .geometry import triangle_array

        inside = _interior_mask(verts, triangle_array(mesh), centers)
        occ |= inside.reshape(grid.dims)

    return grid.with_occupancy(occ)


def slice_for_hand(grid: VoxelGrid, hand: HandState,
                   intensity: float = 1.0) -> list[HapticPoint]:
    """Occupied cell centers of the single z layer at the palm height.

    A palm exactly on a layer boundary selects the lower layer; a palm more
    than one layer outside the grid z range yields no points, closer misses
    clamp to the nearest layer.
    """
    if not hand.valid:
        raise RenderError("invalid-hand", "hand tracking lost")
    nz = grid.dims[2]
    t = (hand.palm_position.z - grid.origin.z) / grid.cell_size.z
    if t < -1.0 or t > nz + 1.0:
        return []
    k = math.floor(t)
    if t == k:
        k -= 1
    k = min(max(k, 0), nz - 1)
    points = []
    layer = grid.occupancy[:, :, k]
    for ix, iy in np.argwhere(layer):
        points.append(HapticPoint(grid.center_of(int(ix), int(iy), k), intensity))
    return points


def schedule(points: Sequence[HapticPoint], capacity: int, frame_index: int) -> HapticFrame:
    """Time-multiplex a point set into one frame of at most ``capacity`` points.

    Points are split into G = ceil(N / capacity) stride groups (member i goes
    to group i mod G) and frame f emits group f mod G, so every point appears
    exactly once per G consecutive frames. With N <= capacity there is a
    single group holding every point.
    """
    if capacity < 1:
        raise RenderError("invalid-capacity", str(capacity))
    n = len(points)
    groups = max(1, math.ceil(n / capacity))
    g = frame_index % groups
    return HapticFrame(frame_index,
                       tuple(p for i, p in enumerate(points) if i % groups == g))


def render_representation(mesh: Mesh, transform: Transform, spec: RepresentationSpec,
                          volume: Aabb) -> tuple[list[HapticPoint], Optional[VoxelGrid]]:
    """Dispatch a representation strategy; grid strategies also return the grid."""
    if spec.strategy == "feature_based":
        return render_feature_based(mesh, transform, spec.base_intensity), None
    if spec.strategy == "vertex_based":
        return render_vertex_based(mesh, transform, spec.base_intensity), None
    grid = voxelize(mesh, transform, VoxelGrid.empty(volume, spec.grid_dims),
                    spec.voxel_mode())
    points = [HapticPoint(grid.center_of(*idx), spec.base_intensity)
              for idx in grid.occupied()]
    return points, grid
