"""Shared scene data model replicated between every client and the session service.

Everything here is plain immutable data: values are safe to copy across
threads and over the wire, and session state only changes by constructing a
new value through :func:`apply_node_delta`.  The JSON encodings defined by
``to_json`` / ``from_json`` on each type are the canonical wire and file
format used by all other modules.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Mapping, Optional, Sequence

UNIT_TOL = 1e-9

CLIENT_KINDS = ("ar-view", "haptic", "observer")
EVENT_KINDS = ("touch", "press", "release", "custom")


class ModelError(Exception):
    """Base error for model violations; ``code`` is a stable machine tag."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


class DeltaError(ModelError):
    """A node delta could not be applied (the status is left untouched)."""


# ---------------------------------------------------------------------------
# geometry carriers


@dataclass(frozen=True)
class Vec3:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __mul__(self, s: float) -> "Vec3":
        return Vec3(self.x * s, self.y * s, self.z * s)

    __rmul__ = __mul__

    def __neg__(self) -> "Vec3":
        return Vec3(-self.x, -self.y, -self.z)

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def cross(self, other: "Vec3") -> "Vec3":
        return Vec3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def normalized(self) -> "Vec3":
        n = self.norm()
        if n == 0.0:
            raise ModelError("zero-vector", "cannot normalize a zero vector")
        return self * (1.0 / n)

    def is_finite(self) -> bool:
        return all(math.isfinite(c) for c in (self.x, self.y, self.z))

    def to_json(self) -> list[float]:
        # coerced so whole values still serialize as floats ("0.0", not "0")
        return [float(self.x), float(self.y), float(self.z)]

    @classmethod
    def from_json(cls, data: Sequence[float]) -> "Vec3":
        return cls(float(data[0]), float(data[1]), float(data[2]))


@dataclass(frozen=True)
class Quat:
    """Unit quaternion, stored and serialized as [x, y, z, w]."""

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    w: float = 1.0

    @classmethod
    def identity(cls) -> "Quat":
        return cls()

    def norm(self) -> float:
        return math.sqrt(self.x**2 + self.y**2 + self.z**2 + self.w**2)

    def normalized(self) -> "Quat":
        n = self.norm()
        if n == 0.0:
            raise ModelError("zero-quaternion", "cannot normalize a zero quaternion")
        return Quat(self.x / n, self.y / n, self.z / n, self.w / n)

    def conjugate(self) -> "Quat":
        return Quat(-self.x, -self.y, -self.z, self.w)

    def __mul__(self, other: "Quat") -> "Quat":
        ax, ay, az, aw = self.x, self.y, self.z, self.w
        bx, by, bz, bw = other.x, other.y, other.z, other.w
        return Quat(
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
            aw * bw - ax * bx - ay * by - az * bz,
        )

    def rotate(self, v: Vec3) -> Vec3:
        # q v q* expanded via the cross-product form: v + 2 w (u x v) + 2 u x (u x v)
        u = Vec3(self.x, self.y, self.z)
        t = u.cross(v) * 2.0
        return v + t * self.w + u.cross(t)

    @classmethod
    def from_axis_angle(cls, axis: Vec3, angle: float) -> "Quat":
        a = axis.normalized()
        h = 0.5 * angle
        s = math.sin(h)
        return cls(a.x * s, a.y * s, a.z * s, math.cos(h))

    @classmethod
    def from_matrix(cls, m: Sequence[Sequence[float]]) -> "Quat":
        """Quaternion from a 3x3 rotation matrix (rows), largest-pivot form."""
        tr = m[0][0] + m[1][1] + m[2][2]
        if tr > 0.0:
            s = math.sqrt(tr + 1.0) * 2.0
            return cls(
                (m[2][1] - m[1][2]) / s,
                (m[0][2] - m[2][0]) / s,
                (m[1][0] - m[0][1]) / s,
                0.25 * s,
            ).normalized()
        if m[0][0] >= m[1][1] and m[0][0] >= m[2][2]:
            s = math.sqrt(1.0 + m[0][0] - m[1][1] - m[2][2]) * 2.0
            return cls(
                0.25 * s,
                (m[0][1] + m[1][0]) / s,
                (m[0][2] + m[2][0]) / s,
                (m[2][1] - m[1][2]) / s,
            ).normalized()
        if m[1][1] >= m[2][2]:
            s = math.sqrt(1.0 + m[1][1] - m[0][0] - m[2][2]) * 2.0
            return cls(
                (m[0][1] + m[1][0]) / s,
                0.25 * s,
                (m[1][2] + m[2][1]) / s,
                (m[0][2] - m[2][0]) / s,
            ).normalized()
        s = math.sqrt(1.0 + m[2][2] - m[0][0] - m[1][1]) * 2.0
        return cls(
            (m[0][2] + m[2][0]) / s,
            (m[1][2] + m[2][1]) / s,
            0.25 * s,
            (m[1][0] - m[0][1]) / s,
        ).normalized()

    def to_matrix(self) -> list[list[float]]:
        x, y, z, w = self.x, self.y, self.z, self.w
        return [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]

    def to_json(self) -> list[float]:
        return [float(self.x), float(self.y), float(self.z), float(self.w)]

    @classmethod
    def from_json(cls, data: Sequence[float]) -> "Quat":
        return cls(float(data[0]), float(data[1]), float(data[2]), float(data[3]))


@dataclass(frozen=True)
class Transform:
    """Position, rotation and uniform-signature scale of a node."""

    position: Vec3 = field(default_factory=Vec3)
    rotation: Quat = field(default_factory=Quat)
    scale: Vec3 = field(default_factory=lambda: Vec3(1.0, 1.0, 1.0))

    @classmethod
    def identity(cls) -> "Transform":
        return cls()

    def apply(self, p: Vec3) -> Vec3:
        """Scale, then rotate, then translate."""
        scaled = Vec3(p.x * self.scale.x, p.y * self.scale.y, p.z * self.scale.z)
        return self.rotation.rotate(scaled) + self.position

    def validate(self) -> list[str]:
        problems = []
        if not self.position.is_finite():
            problems.append("transform-position-not-finite")
        if abs(self.rotation.norm() - 1.0) > UNIT_TOL:
            problems.append("transform-rotation-not-unit")
        for c in (self.scale.x, self.scale.y, self.scale.z):
            if not (math.isfinite(c) and c > 0.0):
                problems.append("transform-scale-not-positive")
                break
        return problems

    def to_json(self) -> dict:
        return {
            "position": self.position.to_json(),
            "rotation": self.rotation.to_json(),
            "scale": self.scale.to_json(),
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Transform":
        return cls(
            position=Vec3.from_json(data["position"]),
            rotation=Quat.from_json(data["rotation"]),
            scale=Vec3.from_json(data["scale"]),
        )


# ---------------------------------------------------------------------------
# scene graph


@dataclass(frozen=True)
class Mesh:
    """Minimal triangle mesh: vertices, per-vertex normals, index triples.

    Normals travel with the mesh but nothing downstream consumes them; a
    zero normal is legal and means "not provided".
    """

    vertices: tuple[Vec3, ...] = ()
    normals: tuple[Vec3, ...] = ()
    triangles: tuple[tuple[int, int, int], ...] = ()

    @classmethod
    def build(
        cls,
        vertices: Iterable[Sequence[float]],
        triangles: Iterable[Sequence[int]],
        normals: Optional[Iterable[Sequence[float]]] = None,
    ) -> "Mesh":
        verts = tuple(Vec3(float(v[0]), float(v[1]), float(v[2])) for v in vertices)
        if normals is None:
            norms = tuple(Vec3() for _ in verts)
        else:
            norms = tuple(Vec3(float(n[0]), float(n[1]), float(n[2])) for n in normals)
        tris = tuple((int(t[0]), int(t[1]), int(t[2])) for t in triangles)
        return cls(verts, norms, tris)

    def validate(self) -> list[str]:
        problems = []
        if len(self.normals) != len(self.vertices):
            problems.append("mesh-normal-count")
        for v in self.vertices:
            if not v.is_finite():
                problems.append("mesh-vertex-not-finite")
                break
        for n in self.normals:
            ln = n.norm()
            if not (ln == 0.0 or abs(ln - 1.0) <= 1e-6):
                problems.append("mesh-normal-not-unit")
                break
        nv = len(self.vertices)
        for t in self.triangles:
            if any(i < 0 or i >= nv for i in t):
                problems.append("mesh-index-out-of-range")
                break
        for t in self.triangles:
            if t[0] == t[1] or t[1] == t[2] or t[0] == t[2]:
                problems.append("mesh-degenerate-triangle")
                break
        return problems

    def to_json(self) -> dict:
        return {
            "vertices": [v.to_json() for v in self.vertices],
            "normals": [n.to_json() for n in self.normals],
            "triangles": [list(t) for t in self.triangles],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Mesh":
        return cls.build(data["vertices"], data["triangles"], data["normals"])


@dataclass(frozen=True)
class Node:
    """One element of the session tree; ``metadata`` carries app extras."""

    id: str
    mesh: Optional[Mesh] = None
    transform: Transform = field(default_factory=Transform)
    parent: Optional[str] = None
    children: tuple[str, ...] = ()
    metadata: Mapping[str, str] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "mesh": self.mesh.to_json() if self.mesh is not None else None,
            "transform": self.transform.to_json(),
            "parent": self.parent,
            "children": list(self.children),
            "metadata": dict(self.metadata),
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Node":
        return cls(
            id=data["id"],
            mesh=Mesh.from_json(data["mesh"]) if data.get("mesh") is not None else None,
            transform=Transform.from_json(data["transform"]),
            parent=data.get("parent"),
            children=tuple(data.get("children", ())),
            metadata=dict(data.get("metadata", {})),
        )


@dataclass(frozen=True)
class SessionStatus:
    """The replicated node tree: a root id, the node table and a revision.

    The revision increases by exactly one per applied mutation, which is what
    lets replicas prove they converged.
    """

    root: str
    nodes: Mapping[str, Node]
    revision: int = 0

    @classmethod
    def new(cls, root_id: str = "root") -> "SessionStatus":
        return cls(root=root_id, nodes={root_id: Node(id=root_id)}, revision=0)

    def node(self, node_id: str) -> Node:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise ModelError("unknown-node", node_id) from None

    def to_json(self) -> dict:
        return {
            "root": self.root,
            "nodes": {nid: n.to_json() for nid, n in self.nodes.items()},
            "revision": self.revision,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "SessionStatus":
        return cls(
            root=data["root"],
            nodes={nid: Node.from_json(nd) for nid, nd in data["nodes"].items()},
            revision=int(data["revision"]),
        )


@dataclass(frozen=True)
class ClientInfo:
    id: str
    kind: str  # one of CLIENT_KINDS

    def to_json(self) -> dict:
        return {"id": self.id, "kind": self.kind}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "ClientInfo":
        return cls(id=data["id"], kind=data["kind"])


@dataclass(frozen=True)
class Session:
    id: str
    clients: tuple[ClientInfo, ...] = ()
    status: SessionStatus = field(default_factory=SessionStatus.new)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "clients": [c.to_json() for c in self.clients],
            "status": self.status.to_json(),
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Session":
        return cls(
            id=data["id"],
            clients=tuple(ClientInfo.from_json(c) for c in data["clients"]),
            status=SessionStatus.from_json(data["status"]),
        )


@dataclass(frozen=True)
class InteractionEvent:
    """Broadcast record that a client acted on a node."""

    event_id: str
    session_id: str
    source_client_id: str
    target_node_id: str
    kind: str  # one of EVENT_KINDS
    timestamp: float  # ms since service start
    payload: Mapping[str, str] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "event_id": self.event_id,
            "session_id": self.session_id,
            "source_client_id": self.source_client_id,
            "target_node_id": self.target_node_id,
            "kind": self.kind,
            "timestamp": float(self.timestamp),
            "payload": dict(self.payload),
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "InteractionEvent":
        return cls(
            event_id=data["event_id"],
            session_id=data["session_id"],
            source_client_id=data["source_client_id"],
            target_node_id=data["target_node_id"],
            kind=data["kind"],
            timestamp=float(data["timestamp"]),
            payload=dict(data.get("payload", {})),
        )


@dataclass(frozen=True)
class HandState:
    """Tracked palm sample in the device frame; ``valid=False`` marks tracking loss."""

    palm_position: Vec3 = field(default_factory=Vec3)
    palm_normal: Vec3 = field(default_factory=lambda: Vec3(0.0, 0.0, 1.0))
    valid: bool = True
    timestamp: float = 0.0  # seconds

    def validate(self) -> list[str]:
        if self.valid and abs(self.palm_normal.norm() - 1.0) > 1e-6:
            return ["hand-normal-not-unit"]
        return []

    def to_json(self) -> dict:
        return {
            "palm_position": self.palm_position.to_json(),
            "palm_normal": self.palm_normal.to_json(),
            "valid": self.valid,
            "timestamp": float(self.timestamp),
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "HandState":
        return cls(
            palm_position=Vec3.from_json(data["palm_position"]),
            palm_normal=Vec3.from_json(data["palm_normal"]),
            valid=bool(data["valid"]),
            timestamp=float(data["timestamp"]),
        )


# ---------------------------------------------------------------------------
# deltas and validation


@dataclass(frozen=True)
class NodeDelta:
    """add / update / remove mutation of one node."""

    op: str
    node: Optional[Node] = None
    node_id: Optional[str] = None

    @classmethod
    def add(cls, node: Node) -> "NodeDelta":
        return cls(op="add", node=node)

    @classmethod
    def update(cls, node: Node) -> "NodeDelta":
        return cls(op="update", node=node)

    @classmethod
    def remove(cls, node_id: str) -> "NodeDelta":
        return cls(op="remove", node_id=node_id)

    def to_json(self) -> dict:
        out: dict[str, Any] = {"op": self.op}
        if self.node is not None:
            out["node"] = self.node.to_json()
        if self.node_id is not None:
            out["node_id"] = self.node_id
        return out

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "NodeDelta":
        return cls(
            op=data["op"],
            node=Node.from_json(data["node"]) if data.get("node") is not None else None,
            node_id=data.get("node_id"),
        )


def validate_status(status: SessionStatus) -> list[str]:
    """Return one entry per invariant violation, empty when the tree is sound.

    Total function: never raises, reports dangling parent/child links, cycles,
    unreachable nodes and per-node mesh/transform problems.
    """
    problems: list[str] = []
    nodes = status.nodes

    if status.root not in nodes:
        problems.append(f"missing-root: {status.root}")

    for nid, node in nodes.items():
        if node.id != nid:
            problems.append(f"id-mismatch: {nid}")
        if node.parent is not None:
            if node.parent not in nodes or nid not in nodes[node.parent].children:
                problems.append(f"dangling-parent: {nid}")
        elif nid != status.root:
            problems.append(f"orphan: {nid}")
        for child in node.children:
            if child not in nodes or nodes[child].parent != nid:
                problems.append(f"dangling-child: {nid}→{child}")
        if nid == status.root and node.parent is not None:
            problems.append(f"root-has-parent: {nid}")
        for problem in node.transform.validate():
            problems.append(f"{problem}: {nid}")
        if node.mesh is not None:
            for problem in node.mesh.validate():
                problems.append(f"{problem}: {nid}")

    # Cycle detection along parent links.
    state: dict[str, int] = {}  # 0 = in progress, 1 = done
    for nid in nodes:
        if nid in state:
            continue
        path = []
        cur: Optional[str] = nid
        while cur is not None and cur in nodes and cur not in state:
            state[cur] = 0
            path.append(cur)
            cur = nodes[cur].parent
        if cur is not None and cur in nodes and state.get(cur) == 0:
            cycle = path[path.index(cur):] + [cur]
            problems.append("cycle: " + "→".join(cycle))
        for p in path:
            state[p] = 1

    # Reachability from the root through children links.
    if status.root in nodes:
        seen = set()
        stack = [status.root]
        while stack:
            cur = stack.pop()
            if cur in seen or cur not in nodes:
                continue
            seen.add(cur)
            stack.extend(nodes[cur].children)
        for nid in nodes:
            if nid not in seen:
                problems.append(f"unreachable: {nid}")

    return problems


def apply_node_delta(status: SessionStatus, delta: NodeDelta) -> SessionStatus:
    """Apply one add/update/remove delta, returning a new status at revision+1.

    Rejected deltas raise :class:`DeltaError` and leave ``status`` untouched.
    Removal detaches the whole subtree: children of a removed node are removed
    recursively rather than reparented.
    """
    nodes = dict(status.nodes)

    if delta.op == "add":
        node = delta.node
        if node is None:
            raise DeltaError("invalid-delta", "add requires a node")
        if node.id in nodes:
            raise DeltaError("duplicate-id", node.id)
        parent_id = node.parent if node.parent is not None else status.root
        if parent_id not in nodes:
            raise DeltaError("unknown-target", f"parent {parent_id}")
        node = replace(node, parent=parent_id, children=())
        parent = nodes[parent_id]
        nodes[parent_id] = replace(parent, children=parent.children + (node.id,))
        nodes[node.id] = node

    elif delta.op == "update":
        node = delta.node
        if node is None:
            raise DeltaError("invalid-delta", "update requires a node")
        if node.id not in nodes:
            raise DeltaError("unknown-target", node.id)
        old = nodes[node.id]
        # Structure (parent/children) is owned by add/remove; an update only
        # carries content.
        nodes[node.id] = replace(
            old, mesh=node.mesh, transform=node.transform, metadata=dict(node.metadata)
        )

    elif delta.op == "remove":
        node_id = delta.node_id
        if node_id is None:
            raise DeltaError("invalid-delta", "remove requires a node_id")
        if node_id == status.root:
            raise DeltaError("remove-root", node_id)
        if node_id not in nodes:
            raise DeltaError("unknown-target", node_id)
        doomed = [node_id]
        i = 0
        while i < len(doomed):
            doomed.extend(nodes[doomed[i]].children)
            i += 1
        parent_id = nodes[node_id].parent
        if parent_id is not None and parent_id in nodes:
            parent = nodes[parent_id]
            nodes[parent_id] = replace(
                parent, children=tuple(c for c in parent.children if c != node_id)
            )
        for nid in doomed:
            nodes.pop(nid, None)

    else:
        raise DeltaError("invalid-delta", f"unknown op {delta.op!r}")

    return SessionStatus(root=status.root, nodes=nodes, revision=status.revision + 1)


def canonical_json(data: Any) -> str:
    """Deterministic JSON text: sorted keys, no whitespace.

    Replica convergence is checked by comparing these strings byte for byte.
    """
    return json.dumps(data, sort_keys=True, separators=(",", ":"), allow_nan=False)
