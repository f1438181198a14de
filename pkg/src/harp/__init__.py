"""Shared-session scene replication and mid-air haptic rendering.

The package splits into a shared data model (`model`), mesh tooling
(`geometry`), focal-point generation (`render`), world/device alignment
(`alignment`), a deterministic device simulator (`device`), the wire protocol
and session service (`wire`, `service`, `transport`) and the reference
applications (`apps`, `cli`).
"""

from .model import (
    HandState,
    InteractionEvent,
    Mesh,
    Node,
    NodeDelta,
    Quat,
    Session,
    SessionStatus,
    Transform,
    Vec3,
    apply_node_delta,
    canonical_json,
    validate_status,
)
from .geometry import (
    Aabb,
    PRIMITIVE_KINDS,
    aabb,
    centroid,
    dedup_vertices,
    fit_to_volume,
    load_obj,
    make_primitive,
    resize_to_height,
    save_obj,
)
from .render import (
    HapticFrame,
    HapticPoint,
    RepresentationSpec,
    VoxelGrid,
    edge_slice_intersections,
    render_feature_based,
    render_vertex_based,
    schedule,
    slice_for_hand,
    voxelize,
)
from .alignment import (
    MarkerPose,
    RigidFrame,
    device_to_world,
    frame_from_anchors,
    frame_from_marker,
    world_to_device,
)
from .device import (
    DeviceDescriptor,
    HandScript,
    PerceptionParams,
    emit,
    perceived_intensity,
    run,
)
from .service import LocalClient, SessionService

__version__ = "0.1.0"
