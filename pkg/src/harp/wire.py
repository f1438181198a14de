"""Wire protocol "harp/1": message framing, schemas and validation.

Every message is a JSON object {v, seq, type, payload}. ``seq`` is assigned
by the service per session and is gapless over the broadcast stream; direct
replies carry the current stream position (snapshots) or 0. Unknown message
types are rejected; unknown payload fields are ignored so the protocol can
grow without breaking old clients.
"""

from __future__ import annotations

import json
from typing import Any, Mapping, Optional

from .model import CLIENT_KINDS, EVENT_KINDS, ModelError, canonical_json

PROTOCOL_VERSION = "harp/1"

MESSAGE_TYPES = (
    "hello",
    "create_session",
    "join_session",
    "snapshot",
    "node_delta",
    "interaction_event",
    "hand_update",
    "heartbeat",
    "error",
)


class WireError(ModelError):
    pass


def make_message(msg_type: str, payload: Optional[dict] = None, seq: int = 0) -> dict:
    return {"v": PROTOCOL_VERSION, "seq": seq, "type": msg_type,
            "payload": payload if payload is not None else {}}


def _is_vec3(value: Any) -> bool:
    return (isinstance(value, (list, tuple)) and len(value) == 3
            and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in value))


def _is_quat(value: Any) -> bool:
    return (isinstance(value, (list, tuple)) and len(value) == 4
            and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in value))


def _check_transform(t: Any, where: str, problems: list[str]):
    if not isinstance(t, Mapping):
        problems.append(f"{where}: transform must be an object")
        return
    if not _is_vec3(t.get("position")):
        problems.append(f"{where}: bad position")
    if not _is_quat(t.get("rotation")):
        problems.append(f"{where}: bad rotation")
    if not _is_vec3(t.get("scale")):
        problems.append(f"{where}: bad scale")


def _check_node(node: Any, where: str, problems: list[str]):
    if not isinstance(node, Mapping):
        problems.append(f"{where}: node must be an object")
        return
    if not isinstance(node.get("id"), str) or not node["id"]:
        problems.append(f"{where}: node id must be a non-empty string")
    _check_transform(node.get("transform"), f"{where}.transform", problems)
    mesh = node.get("mesh")
    if mesh is not None:
        if not isinstance(mesh, Mapping):
            problems.append(f"{where}: mesh must be an object or null")
        else:
            for key in ("vertices", "normals", "triangles"):
                if not isinstance(mesh.get(key), list):
                    problems.append(f"{where}.mesh: missing {key}")
    children = node.get("children")
    if not (isinstance(children, list) and all(isinstance(c, str) for c in children)):
        problems.append(f"{where}: children must be a list of node ids")
    metadata = node.get("metadata")
    if not (isinstance(metadata, Mapping)
            and all(isinstance(k, str) and isinstance(v, str) for k, v in metadata.items())):
        problems.append(f"{where}: metadata must map strings to strings")


def _check_status(status: Any, where: str, problems: list[str]):
    if not isinstance(status, Mapping):
        problems.append(f"{where}: status must be an object")
        return
    if not isinstance(status.get("root"), str):
        problems.append(f"{where}: missing root")
    nodes = status.get("nodes")
    if not isinstance(nodes, Mapping):
        problems.append(f"{where}: missing nodes table")
    else:
        for nid, node in nodes.items():
            _check_node(node, f"{where}.nodes[{nid}]", problems)
    if not isinstance(status.get("revision"), int):
        problems.append(f"{where}: missing revision")


def _check_hand(hand: Any, where: str, problems: list[str]):
    if not isinstance(hand, Mapping):
        problems.append(f"{where}: hand must be an object")
        return
    if not _is_vec3(hand.get("palm_position")):
        problems.append(f"{where}: bad palm_position")
    if not _is_vec3(hand.get("palm_normal")):
        problems.append(f"{where}: bad palm_normal")
    if not isinstance(hand.get("valid"), bool):
        problems.append(f"{where}: bad valid flag")
    if not isinstance(hand.get("timestamp"), (int, float)):
        problems.append(f"{where}: bad timestamp")


def _check_event(event: Any, where: str, problems: list[str]):
    if not isinstance(event, Mapping):
        problems.append(f"{where}: event must be an object")
        return
    for key in ("event_id", "session_id", "source_client_id", "target_node_id"):
        if not isinstance(event.get(key), str):
            problems.append(f"{where}: {key} must be a string")
    if event.get("kind") not in EVENT_KINDS:
        problems.append(f"{where}: kind must be one of {EVENT_KINDS}")
    if not isinstance(event.get("timestamp"), (int, float)):
        problems.append(f"{where}: bad timestamp")
    payload = event.get("payload", {})
    if not (isinstance(payload, Mapping)
            and all(isinstance(k, str) and isinstance(v, str) for k, v in payload.items())):
        problems.append(f"{where}: payload must map strings to strings")


def _check_delta(delta: Any, where: str, problems: list[str]):
    if not isinstance(delta, Mapping):
        problems.append(f"{where}: delta must be an object")
        return
    op = delta.get("op")
    if op not in ("add", "update", "remove"):
        problems.append(f"{where}: op must be add/update/remove")
        return
    if op in ("add", "update"):
        _check_node(delta.get("node"), f"{where}.node", problems)
    else:
        if not isinstance(delta.get("node_id"), str):
            problems.append(f"{where}: remove needs node_id")


def validate_message(msg: Any) -> list[str]:
    """Structural problems with a wire message; empty when conformant."""
    problems: list[str] = []
    if not isinstance(msg, Mapping):
        return ["message must be a JSON object"]
    if msg.get("v") != PROTOCOL_VERSION:
        problems.append(f"bad-version: expected {PROTOCOL_VERSION!r}, got {msg.get('v')!r}")
    seq = msg.get("seq")
    if not isinstance(seq, int) or isinstance(seq, bool) or seq < 0:
        problems.append("bad-seq: must be a non-negative integer")
    msg_type = msg.get("type")
    if msg_type not in MESSAGE_TYPES:
        problems.append(f"unknown-type: {msg_type!r}")
        return problems
    payload = msg.get("payload")
    if not isinstance(payload, Mapping):
        problems.append("bad-payload: must be an object")
        return problems

    where = f"payload({msg_type})"
    if msg_type == "hello":
        if not isinstance(payload.get("client_id"), str) or not payload["client_id"]:
            problems.append(f"{where}: client_id must be a non-empty string")
        # the service's hello reply carries no kind; clients must send one
        # (enforced by the service), and when present it must be known
        if "kind" in payload and payload["kind"] not in CLIENT_KINDS:
            problems.append(f"{where}: kind must be one of {CLIENT_KINDS}")
    elif msg_type == "create_session":
        sid = payload.get("session_id")
        if sid is not None and not isinstance(sid, str):
            problems.append(f"{where}: session_id must be a string when present")
    elif msg_type == "join_session":
        if not isinstance(payload.get("session_id"), str):
            problems.append(f"{where}: session_id must be a string")
    elif msg_type == "snapshot":
        if "session_id" in payload and not isinstance(payload["session_id"], str):
            problems.append(f"{where}: session_id must be a string")
        if "status" in payload:
            _check_status(payload["status"], where, problems)
            clients = payload.get("clients")
            if not isinstance(clients, list):
                problems.append(f"{where}: missing clients list")
    elif msg_type == "node_delta":
        _check_delta(payload.get("delta"), where, problems)
        if "revision" in payload and not isinstance(payload["revision"], int):
            problems.append(f"{where}: revision must be an integer")
    elif msg_type == "interaction_event":
        _check_event(payload.get("event"), where, problems)
    elif msg_type == "hand_update":
        _check_hand(payload.get("hand"), where, problems)
    elif msg_type == "heartbeat":
        t = payload.get("t")
        if t is not None and not isinstance(t, (int, float)):
            problems.append(f"{where}: t must be a number when present")
    elif msg_type == "error":
        if not isinstance(payload.get("code"), str):
            problems.append(f"{where}: code must be a string")
        if not isinstance(payload.get("message"), str):
            problems.append(f"{where}: message must be a string")
    return problems


def encode_message(msg: Mapping) -> str:
    return canonical_json(msg)


def decode_message(text: str | bytes) -> dict:
    """Parse and validate a wire message; raises WireError with the problems."""
    try:
        msg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WireError("bad-json", str(exc)) from None
    problems = validate_message(msg)
    if problems:
        raise WireError("bad-message", "; ".join(problems))
    return msg
