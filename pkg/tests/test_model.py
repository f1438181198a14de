import math

import pytest
from hypothesis import given, settings, strategies as st

from harp.model import (
    DeltaError,
    HandState,
    InteractionEvent,
    Mesh,
    Node,
    NodeDelta,
    Quat,
    Session,
    ClientInfo,
    SessionStatus,
    Transform,
    Vec3,
    apply_node_delta,
    canonical_json,
    validate_status,
)


def make_status(*nodes: Node, root: str = "root") -> SessionStatus:
    table = {root: Node(id=root, children=tuple(n.id for n in nodes if n.parent == root))}
    for n in nodes:
        table[n.id] = n
    return SessionStatus(root=root, nodes=table, revision=0)


class TestValidateStatus:
    def test_single_root_is_valid(self):
        assert validate_status(SessionStatus.new()) == []

    def test_dangling_parent(self):
        # n2 names root as parent but root does not list it as a child
        status = SessionStatus(
            root="root",
            nodes={"root": Node(id="root"), "n2": Node(id="n2", parent="root")},
        )
        problems = validate_status(status)
        assert "dangling-parent: n2" in problems

    def test_parent_cycle(self):
        n1 = Node(id="n1", parent="n2", children=("n2",))
        n2 = Node(id="n2", parent="n1", children=("n1",))
        status = SessionStatus(root="root", nodes={"root": Node(id="root"), "n1": n1, "n2": n2})
        problems = validate_status(status)
        assert any(p.startswith("cycle:") for p in problems)

    def test_unreachable_node_reported(self):
        lost = Node(id="lost", parent="nowhere")
        status = SessionStatus(root="root", nodes={"root": Node(id="root"), "lost": lost})
        problems = validate_status(status)
        assert any(p.startswith("unreachable: lost") for p in problems)

    def test_missing_root(self):
        status = SessionStatus(root="ghost", nodes={"a": Node(id="a")})
        assert any(p.startswith("missing-root") for p in validate_status(status))


class TestApplyNodeDelta:
    def test_add_under_root(self):
        status = SessionStatus.new()
        after = apply_node_delta(status, NodeDelta.add(Node(id="n", parent="root")))
        assert "n" in after.nodes
        assert after.nodes["root"].children == ("n",)
        assert (status.revision, after.revision) == (0, 1)
        assert validate_status(after) == []

    def test_add_defaults_to_root_parent(self):
        after = apply_node_delta(SessionStatus.new(), NodeDelta.add(Node(id="n")))
        assert after.nodes["n"].parent == "root"

    def test_remove_is_recursive(self):
        status = SessionStatus.new()
        status = apply_node_delta(status, NodeDelta.add(Node(id="a", parent="root")))
        status = apply_node_delta(status, NodeDelta.add(Node(id="b", parent="a")))
        after = apply_node_delta(status, NodeDelta.remove("a"))
        assert "a" not in after.nodes and "b" not in after.nodes
        assert after.nodes["root"].children == ()
        assert validate_status(after) == []

    def test_update_unknown_target(self):
        with pytest.raises(DeltaError) as err:
            apply_node_delta(SessionStatus.new(), NodeDelta.update(Node(id="ghost")))
        assert err.value.code == "unknown-target"

    def test_duplicate_add_rejected(self):
        status = apply_node_delta(SessionStatus.new(), NodeDelta.add(Node(id="n")))
        with pytest.raises(DeltaError) as err:
            apply_node_delta(status, NodeDelta.add(Node(id="n")))
        assert err.value.code == "duplicate-id"

    def test_remove_root_rejected(self):
        with pytest.raises(DeltaError) as err:
            apply_node_delta(SessionStatus.new(), NodeDelta.remove("root"))
        assert err.value.code == "remove-root"

    def test_rejected_delta_leaves_status_identical(self):
        status = apply_node_delta(SessionStatus.new(), NodeDelta.add(Node(id="n")))
        before = canonical_json(status.to_json())
        with pytest.raises(DeltaError):
            apply_node_delta(status, NodeDelta.add(Node(id="n")))
        assert canonical_json(status.to_json()) == before

    def test_update_preserves_structure(self):
        status = apply_node_delta(SessionStatus.new(), NodeDelta.add(Node(id="n")))
        status = apply_node_delta(status, NodeDelta.add(Node(id="kid", parent="n")))
        moved = Node(id="n", transform=Transform(position=Vec3(1, 2, 3)),
                     parent="kid", children=("bogus",))
        after = apply_node_delta(status, NodeDelta.update(moved))
        assert after.nodes["n"].parent == "root"
        assert after.nodes["n"].children == ("kid",)
        assert after.nodes["n"].transform.position == Vec3(1, 2, 3)
        assert validate_status(after) == []


# -- property: random delta sequences keep the tree valid -------------------


@st.composite
def delta_sequences(draw):
    n_ops = draw(st.integers(min_value=1, max_value=40))
    return [draw(st.tuples(st.sampled_from(["add", "remove", "update"]),
                           st.integers(min_value=0, max_value=10**6)))
            for _ in range(n_ops)]


@given(delta_sequences())
@settings(max_examples=60, deadline=None)
def test_random_delta_sequences_keep_invariants(ops):
    status = SessionStatus.new()
    counter = 0
    for op, pick in ops:
        ids = sorted(status.nodes)
        if op == "add":
            counter += 1
            parent = ids[pick % len(ids)]
            new = NodeDelta.add(Node(id=f"n{counter}", parent=parent))
            before = status.revision
            status = apply_node_delta(status, new)
            assert status.revision == before + 1
        elif op == "remove":
            target = ids[pick % len(ids)]
            if target == status.root:
                continue
            status = apply_node_delta(status, NodeDelta.remove(target))
        else:
            target = ids[pick % len(ids)]
            node = status.nodes[target]
            moved = Node(id=target, transform=Transform(position=Vec3(1.0, 0.0, 0.0)),
                         mesh=node.mesh, metadata={"touched": "yes"})
            status = apply_node_delta(status, NodeDelta.update(moved))
        assert validate_status(status) == [], validate_status(status)


# -- serialization round trips ----------------------------------------------

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


def vec3s():
    return st.builds(Vec3, finite, finite, finite)


def quats():
    def normed(parts):
        x, y, z, w = parts
        n = math.sqrt(x * x + y * y + z * z + w * w)
        return Quat(x / n, y / n, z / n, w / n)
    nonzero = st.tuples(finite, finite, finite, finite).filter(
        lambda p: math.sqrt(sum(c * c for c in p)) > 1e-3)
    return nonzero.map(normed)


def transforms():
    positive = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)
    return st.builds(Transform, vec3s(), quats(), st.builds(Vec3, positive, positive, positive))


def meshes():
    @st.composite
    def build(draw):
        nv = draw(st.integers(min_value=3, max_value=12))
        verts = [draw(vec3s()) for _ in range(nv)]
        nt = draw(st.integers(min_value=0, max_value=12))
        tris = []
        for _ in range(nt):
            i = draw(st.integers(min_value=0, max_value=nv - 1))
            j = draw(st.integers(min_value=0, max_value=nv - 1))
            k = draw(st.integers(min_value=0, max_value=nv - 1))
            if i != j and j != k and i != k:
                tris.append((i, j, k))
        return Mesh(tuple(verts), tuple(Vec3() for _ in verts), tuple(tris))
    return build()


@given(vec3s())
@settings(max_examples=50)
def test_vec3_roundtrip(v):
    assert Vec3.from_json(v.to_json()) == v


@given(transforms())
@settings(max_examples=50)
def test_transform_roundtrip(t):
    assert Transform.from_json(t.to_json()) == t


@given(meshes())
@settings(max_examples=50)
def test_mesh_roundtrip(m):
    assert Mesh.from_json(m.to_json()) == m


@given(meshes(), transforms())
@settings(max_examples=30)
def test_node_and_status_roundtrip(mesh, transform):
    node = Node(id="n1", mesh=mesh, transform=transform, parent="root",
                metadata={"color": "blue"})
    status = SessionStatus(root="root",
                           nodes={"root": Node(id="root", children=("n1",)), "n1": node},
                           revision=7)
    again = SessionStatus.from_json(status.to_json())
    assert again == status
    assert canonical_json(again.to_json()) == canonical_json(status.to_json())


def test_session_and_event_and_hand_roundtrip():
    session = Session(id="s1", clients=(ClientInfo("c1", "haptic"),),
                      status=SessionStatus.new())
    assert Session.from_json(session.to_json()) == session

    event = InteractionEvent(event_id="e1", session_id="s1", source_client_id="c1",
                             target_node_id="root", kind="press", timestamp=12.5,
                             payload={"color": "blue"})
    assert InteractionEvent.from_json(event.to_json()) == event

    hand = HandState(palm_position=Vec3(0.01, 0.02, 0.2), valid=True, timestamp=1.25)
    assert HandState.from_json(hand.to_json()) == hand


def test_quaternion_rotation_against_matrix():
    q = Quat.from_axis_angle(Vec3(0, 0, 1), math.pi / 2)
    v = q.rotate(Vec3(1, 0, 0))
    assert abs(v.x) < 1e-12 and abs(v.y - 1) < 1e-12 and abs(v.z) < 1e-12
    # matrix and quaternion rotation must agree
    m = q.to_matrix()
    mv = Vec3(
        m[0][0] * 1 + m[0][1] * 0 + m[0][2] * 0,
        m[1][0] * 1 + m[1][1] * 0 + m[1][2] * 0,
        m[2][0] * 1 + m[2][1] * 0 + m[2][2] * 0,
    )
    assert (mv - v).norm() < 1e-12


@given(quats())
@settings(max_examples=50)
def test_quaternion_matrix_roundtrip(q):
    back = Quat.from_matrix(q.to_matrix())
    # q and -q encode the same rotation
    d1 = math.sqrt((back.x - q.x) ** 2 + (back.y - q.y) ** 2
                   + (back.z - q.z) ** 2 + (back.w - q.w) ** 2)
    d2 = math.sqrt((back.x + q.x) ** 2 + (back.y + q.y) ** 2
                   + (back.z + q.z) ** 2 + (back.w + q.w) ** 2)
    assert min(d1, d2) < 1e-9
