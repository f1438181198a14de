"""Mesh construction, cleanup, measurement and sizing.

Covers the shape catalog used by the reference applications, vertex
de-duplication (exported meshes routinely duplicate corners per face),
bounding/fitting against the device working volume, and a small Wavefront
OBJ reader/writer for arbitrary models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .model import Mesh, ModelError, Node, Transform, Vec3

DEFAULT_DEDUP_EPS = 1e-6

PRIMITIVE_KINDS = (
    "cube",
    "sphere",
    "hemisphere",
    "cone",
    "cylinder",
    "pyramid",
    "octahedron",
    "torus",
    "house",
    "arrow",
)


class GeometryError(ModelError):
    pass


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned box; ``min`` must not exceed ``max`` on any axis."""

    min: Vec3
    max: Vec3

    def __post_init__(self):
        if (self.min.x > self.max.x or self.min.y > self.max.y
                or self.min.z > self.max.z):
            raise GeometryError("invalid-aabb", f"min {self.min} exceeds max {self.max}")

    def extent(self) -> Vec3:
        return self.max - self.min

    def center(self) -> Vec3:
        return (self.min + self.max) * 0.5

    def contains_point(self, p: Vec3, tol: float = 0.0) -> bool:
        return (self.min.x - tol <= p.x <= self.max.x + tol
                and self.min.y - tol <= p.y <= self.max.y + tol
                and self.min.z - tol <= p.z <= self.max.z + tol)

    def contains_aabb(self, other: "Aabb", tol: float = 0.0) -> bool:
        return self.contains_point(other.min, tol) and self.contains_point(other.max, tol)

    def to_json(self) -> dict:
        return {"min": self.min.to_json(), "max": self.max.to_json()}

    @classmethod
    def from_json(cls, data) -> "Aabb":
        return cls(Vec3.from_json(data["min"]), Vec3.from_json(data["max"]))


# ---------------------------------------------------------------------------
# array helpers


def vec_from(row) -> Vec3:
    """Vec3 from any 3-sequence, coerced to plain floats (JSON-safe)."""
    return Vec3(float(row[0]), float(row[1]), float(row[2]))


def vertex_array(mesh: Mesh) -> np.ndarray:
    """Mesh vertices as an (N, 3) float64 array."""
    if not mesh.vertices:
        return np.zeros((0, 3))
    return np.array([[v.x, v.y, v.z] for v in mesh.vertices], dtype=np.float64)


def triangle_array(mesh: Mesh) -> np.ndarray:
    if not mesh.triangles:
        return np.zeros((0, 3), dtype=np.int64)
    return np.array(mesh.triangles, dtype=np.int64)


def transform_points(transform: Transform, pts: np.ndarray) -> np.ndarray:
    """Apply scale, then rotation, then translation to an (N, 3) array."""
    rot = np.array(transform.rotation.to_matrix(), dtype=np.float64)
    scale = np.array([transform.scale.x, transform.scale.y, transform.scale.z])
    pos = np.array([transform.position.x, transform.position.y, transform.position.z])
    return (pts * scale) @ rot.T + pos


def mesh_edges(mesh: Mesh) -> list[tuple[int, int]]:
    """Unique undirected edges in first-occurrence order."""
    seen = set()
    edges = []
    for a, b, c in mesh.triangles:
        for i, j in ((a, b), (b, c), (c, a)):
            key = (i, j) if i < j else (j, i)
            if key not in seen:
                seen.add(key)
                edges.append(key)
    return edges


def mesh_volume(mesh: Mesh) -> float:
    """Signed volume via the divergence theorem; positive for outward winding."""
    verts = vertex_array(mesh)
    tris = triangle_array(mesh)
    if len(tris) == 0:
        return 0.0
    a = verts[tris[:, 0]]
    b = verts[tris[:, 1]]
    c = verts[tris[:, 2]]
    return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)


# ---------------------------------------------------------------------------
# primitive catalog


def _quad(a: int, b: int, c: int, d: int) -> list[tuple[int, int, int]]:
    return [(a, b, c), (a, c, d)]


def _require(cond: bool, what: str):
    if not cond:
        raise GeometryError("invalid-parameter", what)


def _cube() -> Mesh:
    v = [
        (-0.5, -0.5, 0.0), (0.5, -0.5, 0.0), (0.5, 0.5, 0.0), (-0.5, 0.5, 0.0),
        (-0.5, -0.5, 1.0), (0.5, -0.5, 1.0), (0.5, 0.5, 1.0), (-0.5, 0.5, 1.0),
    ]
    t = (_quad(0, 3, 2, 1) + _quad(4, 5, 6, 7) + _quad(0, 1, 5, 4)
         + _quad(1, 2, 6, 5) + _quad(2, 3, 7, 6) + _quad(3, 0, 4, 7))
    return Mesh.build(v, t)


def _sphere(segments: int, rings: int) -> Mesh:
    _require(segments >= 3, "sphere segments >= 3")
    _require(rings >= 2, "sphere rings >= 2")
    verts = [(0.0, 0.0, 0.0)]  # south pole sits on the base plane
    for i in range(1, rings):
        phi = math.pi * i / rings
        rho = 0.5 * math.sin(phi)
        z = 0.5 * (1.0 - math.cos(phi))
        for j in range(segments):
            a = 2.0 * math.pi * j / segments
            verts.append((rho * math.cos(a), rho * math.sin(a), z))
    verts.append((0.0, 0.0, 1.0))
    top = len(verts) - 1

    def ring(i: int, j: int) -> int:
        return 1 + (i - 1) * segments + (j % segments)

    tris = []
    for j in range(segments):
        tris.append((0, ring(1, j + 1), ring(1, j)))
    for i in range(1, rings - 1):
        for j in range(segments):
            tris.extend(_quad(ring(i, j), ring(i, j + 1), ring(i + 1, j + 1), ring(i + 1, j)))
    for j in range(segments):
        tris.append((top, ring(rings - 1, j), ring(rings - 1, j + 1)))
    return Mesh.build(verts, tris)


def _hemisphere(segments: int, rings: int) -> Mesh:
    _require(segments >= 3, "hemisphere segments >= 3")
    _require(rings >= 1, "hemisphere rings >= 1")
    verts = [(0.0, 0.0, 0.0)]  # base disk center
    for i in range(rings):
        phi = (math.pi / 2.0) * i / rings
        rho = math.cos(phi)
        z = math.sin(phi)
        for j in range(segments):
            a = 2.0 * math.pi * j / segments
            verts.append((rho * math.cos(a), rho * math.sin(a), z))
    verts.append((0.0, 0.0, 1.0))
    top = len(verts) - 1

    def ring(i: int, j: int) -> int:
        return 1 + i * segments + (j % segments)

    tris = []
    for j in range(segments):
        tris.append((0, ring(0, j + 1), ring(0, j)))
    for i in range(rings - 1):
        for j in range(segments):
            tris.extend(_quad(ring(i, j), ring(i, j + 1), ring(i + 1, j + 1), ring(i + 1, j)))
    for j in range(segments):
        tris.append((top, ring(rings - 1, j), ring(rings - 1, j + 1)))
    return Mesh.build(verts, tris)


def _cone(segments: int, radius: float) -> Mesh:
    _require(segments >= 3, "cone segments >= 3")
    _require(radius > 0, "cone radius > 0")
    verts = [(0.0, 0.0, 0.0)]
    for j in range(segments):
        a = 2.0 * math.pi * j / segments
        verts.append((radius * math.cos(a), radius * math.sin(a), 0.0))
    verts.append((0.0, 0.0, 1.0))
    apex = len(verts) - 1
    rim = lambda j: 1 + (j % segments)
    tris = []
    for j in range(segments):
        tris.append((0, rim(j + 1), rim(j)))
        tris.append((rim(j), rim(j + 1), apex))
    return Mesh.build(verts, tris)


def _cylinder(segments: int, radius: float) -> Mesh:
    _require(segments >= 3, "cylinder segments >= 3")
    _require(radius > 0, "cylinder radius > 0")
    verts = [(0.0, 0.0, 0.0)]
    for j in range(segments):
        a = 2.0 * math.pi * j / segments
        verts.append((radius * math.cos(a), radius * math.sin(a), 0.0))
    for j in range(segments):
        a = 2.0 * math.pi * j / segments
        verts.append((radius * math.cos(a), radius * math.sin(a), 1.0))
    verts.append((0.0, 0.0, 1.0))
    topc = len(verts) - 1
    bot = lambda j: 1 + (j % segments)
    top = lambda j: 1 + segments + (j % segments)
    tris = []
    for j in range(segments):
        tris.append((0, bot(j + 1), bot(j)))
        tris.extend(_quad(bot(j), bot(j + 1), top(j + 1), top(j)))
        tris.append((topc, top(j), top(j + 1)))
    return Mesh.build(verts, tris)


def _pyramid() -> Mesh:
    v = [(-0.5, -0.5, 0.0), (0.5, -0.5, 0.0), (0.5, 0.5, 0.0), (-0.5, 0.5, 0.0),
         (0.0, 0.0, 1.0)]
    tris = _quad(0, 3, 2, 1)
    for j in range(4):
        tris.append((j, (j + 1) % 4, 4))
    return Mesh.build(v, tris)


def _octahedron() -> Mesh:
    # Canonical +-axes solid, halved and lifted so the base vertex sits at z=0.
    v = [(0.5, 0.0, 0.5), (0.0, 0.5, 0.5), (-0.5, 0.0, 0.5), (0.0, -0.5, 0.5),
         (0.0, 0.0, 0.0), (0.0, 0.0, 1.0)]
    tris = []
    for j in range(4):
        tris.append((4, (j + 1) % 4, j))
        tris.append((5, j, (j + 1) % 4))
    return Mesh.build(v, tris)


def _torus(segments: int, tube_segments: int, major_radius: float, minor_radius: float) -> Mesh:
    _require(segments >= 3, "torus segments >= 3")
    _require(tube_segments >= 3, "torus tube_segments >= 3")
    _require(minor_radius > 0, "torus minor_radius > 0")
    _require(major_radius > minor_radius, "torus major_radius > minor_radius")
    verts = []
    for i in range(segments):
        u = 2.0 * math.pi * i / segments
        for j in range(tube_segments):
            v = 2.0 * math.pi * j / tube_segments
            rho = major_radius + minor_radius * math.cos(v)
            verts.append((rho * math.cos(u), rho * math.sin(u),
                          minor_radius + minor_radius * math.sin(v)))
    at = lambda i, j: (i % segments) * tube_segments + (j % tube_segments)
    tris = []
    for i in range(segments):
        for j in range(tube_segments):
            tris.extend(_quad(at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)))
    return Mesh.build(verts, tris)


def _house(eave_height: float) -> Mesh:
    _require(0.0 < eave_height < 1.0, "house eave_height in (0, 1)")
    h = eave_height
    v = [
        (-0.5, -0.5, 0.0), (0.5, -0.5, 0.0), (0.5, 0.5, 0.0), (-0.5, 0.5, 0.0),
        (-0.5, -0.5, h), (0.5, -0.5, h), (0.5, 0.5, h), (-0.5, 0.5, h),
        (0.0, -0.5, 1.0), (0.0, 0.5, 1.0),  # ridge runs along y
    ]
    tris = (_quad(0, 3, 2, 1)
            + _quad(0, 1, 5, 4) + _quad(1, 2, 6, 5)
            + _quad(2, 3, 7, 6) + _quad(3, 0, 4, 7)
            + _quad(5, 6, 9, 8) + _quad(7, 4, 8, 9))
    tris.append((4, 5, 8))
    tris.append((6, 7, 9))
    return Mesh.build(v, tris)


def _arrow(shaft_half_width: float, head_half_width: float, shaft_top: float) -> Mesh:
    _require(0 < shaft_half_width < head_half_width, "arrow shaft narrower than head")
    _require(0.0 < shaft_top < 1.0, "arrow shaft_top in (0, 1)")
    s, w, zt = shaft_half_width, head_half_width, shaft_top
    corners = [(-1, -1), (1, -1), (1, 1), (-1, 1)]
    v = [(cx * s, cy * s, 0.0) for cx, cy in corners]          # shaft base
    v += [(cx * s, cy * s, zt) for cx, cy in corners]          # shaft top
    v += [(cx * w, cy * w, zt) for cx, cy in corners]          # head base
    v.append((0.0, 0.0, 1.0))                                  # tip
    sb = lambda j: j % 4
    st = lambda j: 4 + j % 4
    hb = lambda j: 8 + j % 4
    tip = 12
    tris = _quad(sb(0), sb(3), sb(2), sb(1))
    for j in range(4):
        tris.extend(_quad(sb(j), sb(j + 1), st(j + 1), st(j)))
        tris.extend(_quad(hb(j), st(j), st(j + 1), hb(j + 1)))  # underside of the head
        tris.append((hb(j), hb(j + 1), tip))
    return Mesh.build(v, tris)


def make_primitive(kind: str, **params) -> Mesh:
    """Build one of the catalog shapes.

    All shapes are watertight, centered on the z axis with their base at z=0
    and a nominal height of 1. Proportions beyond that (segment counts, radii,
    eave height, shaft width) are keyword parameters with the defaults below.
    """
    kind = kind.lower()
    if kind == "cube":
        return _cube()
    if kind == "sphere":
        return _sphere(params.get("segments", 16), params.get("rings", 16))
    if kind == "hemisphere":
        return _hemisphere(params.get("segments", 16), params.get("rings", 8))
    if kind == "cone":
        return _cone(params.get("segments", 16), params.get("radius", 0.5))
    if kind == "cylinder":
        return _cylinder(params.get("segments", 16), params.get("radius", 0.5))
    if kind == "pyramid":
        return _pyramid()
    if kind == "octahedron":
        return _octahedron()
    if kind == "torus":
        return _torus(params.get("segments", 16), params.get("tube_segments", 12),
                      params.get("major_radius", 1.0), params.get("minor_radius", 0.5))
    if kind == "house":
        return _house(params.get("eave_height", 0.6))
    if kind == "arrow":
        return _arrow(params.get("shaft_half_width", 0.15),
                      params.get("head_half_width", 0.3),
                      params.get("shaft_top", 0.6))
    raise GeometryError("invalid-parameter", f"unknown primitive kind {kind!r}")


# ---------------------------------------------------------------------------
# cleanup and measurement


def dedup_vertices(mesh: Mesh, eps: float = DEFAULT_DEDUP_EPS) -> Mesh:
    """Merge vertices closer than ``eps`` (greedy, in input order).

    Each vertex merges into the earliest kept vertex within ``eps``, so kept
    vertices end up pairwise farther than ``eps`` apart and the operation is
    exactly idempotent. Triangles are remapped; triangles that collapse to
    fewer than three distinct corners are dropped.
    """
    if eps < 0:
        raise GeometryError("invalid-parameter", "eps must be >= 0")
    kept: list[Vec3] = []
    kept_normals: list[Vec3] = []
    remap: list[int] = []
    cells: dict[tuple[int, int, int], list[int]] = {}
    inv = 1.0 / eps if eps > 0 else 0.0

    def cell_of(v: Vec3) -> tuple[int, int, int]:
        return (math.floor(v.x * inv), math.floor(v.y * inv), math.floor(v.z * inv))

    for idx, v in enumerate(mesh.vertices):
        target = -1
        if eps == 0.0:
            for k, kv in enumerate(kept):
                if kv == v:
                    target = k
                    break
        else:
            cx, cy, cz = cell_of(v)
            best = None
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    for dz in (-1, 0, 1):
                        for k in cells.get((cx + dx, cy + dy, cz + dz), ()):
                            if (kept[k] - v).norm() <= eps and (best is None or k < best):
                                best = k
            if best is not None:
                target = best
        if target < 0:
            target = len(kept)
            kept.append(v)
            kept_normals.append(mesh.normals[idx] if idx < len(mesh.normals) else Vec3())
            if eps > 0.0:
                cells.setdefault(cell_of(v), []).append(target)
        remap.append(target)

    tris = []
    for a, b, c in mesh.triangles:
        ra, rb, rc = remap[a], remap[b], remap[c]
        if ra != rb and rb != rc and ra != rc:
            tris.append((ra, rb, rc))
    return Mesh(tuple(kept), tuple(kept_normals), tuple(tris))


def centroid(mesh: Mesh, eps: float = DEFAULT_DEDUP_EPS) -> Vec3:
    """Arithmetic mean of the deduplicated vertices."""
    deduped = dedup_vertices(mesh, eps)
    if not deduped.vertices:
        raise GeometryError("empty-mesh", "centroid of a mesh with no vertices")
    sx = sy = sz = 0.0
    for v in deduped.vertices:
        sx += v.x
        sy += v.y
        sz += v.z
    n = len(deduped.vertices)
    return Vec3(sx / n, sy / n, sz / n)


def aabb(mesh: Mesh, transform: Transform = Transform()) -> Aabb:
    """Tight axis-aligned bounds of the transformed vertices."""
    if not mesh.vertices:
        raise GeometryError("empty-mesh", "aabb of a mesh with no vertices")
    pts = transform_points(transform, vertex_array(mesh))
    return Aabb(vec_from(pts.min(axis=0)), vec_from(pts.max(axis=0)))


def fit_to_volume(mesh: Mesh, transform: Transform, volume: Aabb) -> Transform:
    """Shrink (never enlarge) and recenter so the mesh AABB fits the volume.

    The scale is multiplied by the largest factor <= 1 that makes the bounds
    fit; the result is centered in x/y and rests on ``volume.min.z``.
    """
    ve = volume.extent()
    if not (ve.x > 0 and ve.y > 0 and ve.z > 0):
        raise GeometryError("invalid-parameter", "degenerate target volume")
    box = aabb(mesh, transform)
    ext = box.extent()
    if ext.x == 0 and ext.y == 0 and ext.z == 0:
        raise GeometryError("degenerate-mesh", "mesh has zero extent on all axes")

    factor = 1.0
    for e, v in ((ext.x, ve.x), (ext.y, ve.y), (ext.z, ve.z)):
        if e > 0:
            factor = min(factor, v / e)

    scaled = replace(transform,
                     scale=transform.scale * factor,
                     position=Vec3())
    base = aabb(mesh, scaled)
    c = base.center()
    vc = volume.center()
    position = Vec3(vc.x - c.x, vc.y - c.y, volume.min.z - base.min.z)
    return replace(scaled, position=position)


def resize_to_height(node: Node, target_height: float, ground_z: float) -> Transform:
    """Uniformly rescale a node so its bounds span [ground_z, ground_z+height] in z."""
    if node.mesh is None or not node.mesh.vertices:
        raise GeometryError("empty-mesh", f"node {node.id} has no mesh")
    if target_height <= 0:
        raise GeometryError("invalid-parameter", "target_height must be > 0")
    box = aabb(node.mesh, node.transform)
    h = box.max.z - box.min.z
    if h <= 0:
        raise GeometryError("zero-height-mesh", f"node {node.id} has zero z extent")
    factor = target_height / h
    scaled = replace(node.transform,
                     scale=node.transform.scale * factor,
                     position=Vec3())
    base = aabb(node.mesh, scaled)
    old_c = box.center()
    new_c = base.center()
    position = Vec3(old_c.x - new_c.x, old_c.y - new_c.y, ground_z - base.min.z)
    return replace(scaled, position=position)


# ---------------------------------------------------------------------------
# Wavefront OBJ subset


class ObjParseError(ModelError):
    def __init__(self, line: int, message: str):
        super().__init__("parse-error", f"line {line}: {message}")
        self.line = line


def load_obj(text: str) -> Mesh:
    """Parse the `v` / `vn` / `f` subset of Wavefront OBJ.

    Faces with more than three corners are fan-triangulated from the first
    corner; negative indices count back from the vertices defined so far;
    every other record type (vt, o, g, s, usemtl, ...) is ignored.
    """
    verts: list[tuple[float, float, float]] = []
    file_normals: list[Vec3] = []
    per_vertex_normal: dict[int, Vec3] = {}
    tris: list[tuple[int, int, int]] = []

    def resolve(idx: int, count: int, lineno: int) -> int:
        if idx < 0:
            r = count + idx
        elif idx > 0:
            r = idx - 1
        else:
            raise ObjParseError(lineno, "index 0 is not allowed")
        if r < 0 or r >= count:
            raise ObjParseError(lineno, f"index {idx} out of range")
        return r

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        tag = tokens[0]
        if tag == "v":
            if len(tokens) < 4:
                raise ObjParseError(lineno, "v needs three coordinates")
            try:
                verts.append((float(tokens[1]), float(tokens[2]), float(tokens[3])))
            except ValueError:
                raise ObjParseError(lineno, "bad vertex coordinate") from None
        elif tag == "vn":
            if len(tokens) < 4:
                raise ObjParseError(lineno, "vn needs three components")
            try:
                n = Vec3(float(tokens[1]), float(tokens[2]), float(tokens[3]))
            except ValueError:
                raise ObjParseError(lineno, "bad normal component") from None
            file_normals.append(n.normalized() if n.norm() > 0 else n)
        elif tag == "f":
            if len(tokens) < 4:
                raise ObjParseError(lineno, "face needs at least three corners")
            corner_v: list[int] = []
            for tok in tokens[1:]:
                parts = tok.split("/")
                try:
                    vi = resolve(int(parts[0]), len(verts), lineno)
                except ValueError:
                    raise ObjParseError(lineno, f"bad face corner {tok!r}") from None
                if len(parts) >= 3 and parts[2]:
                    try:
                        ni = resolve(int(parts[2]), len(file_normals), lineno)
                    except ValueError:
                        raise ObjParseError(lineno, f"bad face corner {tok!r}") from None
                    per_vertex_normal[vi] = file_normals[ni]
                corner_v.append(vi)
            for i in range(2, len(corner_v)):
                tris.append((corner_v[0], corner_v[i - 1], corner_v[i]))
        # every other record type is outside the supported subset

    normals = tuple(per_vertex_normal.get(i, Vec3()) for i in range(len(verts)))
    return Mesh(tuple(Vec3(*v) for v in verts), normals, tuple(tris))


def save_obj(mesh: Mesh) -> str:
    """Serialize to the same OBJ subset that :func:`load_obj` reads."""
    lines = []
    has_normals = any(n.norm() > 0 for n in mesh.normals)
    for v in mesh.vertices:
        lines.append(f"v {v.x!r} {v.y!r} {v.z!r}")
    if has_normals:
        for n in mesh.normals:
            lines.append(f"vn {n.x!r} {n.y!r} {n.z!r}")
        for a, b, c in mesh.triangles:
            lines.append(f"f {a + 1}//{a + 1} {b + 1}//{b + 1} {c + 1}//{c + 1}")
    else:
        for a, b, c in mesh.triangles:
            lines.append(f"f {a + 1} {b + 1} {c + 1}")
    return "\n".join(lines) + "\n"
