"""Client-side session replica.

Applies snapshots and then node deltas in sequence order; when a gap shows up
in the broadcast stream it asks for a fresh snapshot (messages between the
gap and the snapshot are already folded into it). Interaction events and hand
updates are collected in arrival order.
"""

from __future__ import annotations

from typing import Callable, Optional

from .model import (HandState, InteractionEvent, ModelError, NodeDelta, SessionStatus,
                    apply_node_delta, canonical_json)


class SessionReplica:
    def __init__(self, request_snapshot: Optional[Callable[[], None]] = None):
        self._request_snapshot = request_snapshot
        self.inbox: list[dict] = []
        self.status: Optional[SessionStatus] = None
        self.session_id: Optional[str] = None
        self.last_seq: Optional[int] = None
        self.events: list[InteractionEvent] = []
        self.hands: list[tuple[str, HandState]] = []
        self.errors: list[dict] = []

    def ingest(self, msg: dict) -> None:
        self.inbox.append(msg)
        msg_type = msg["type"]
        seq = msg["seq"]
        if msg_type == "snapshot":
            self.session_id = msg["payload"]["session_id"]
            self.status = SessionStatus.from_json(msg["payload"]["status"])
            self.last_seq = seq
            return
        if msg_type == "error":
            self.errors.append(msg["payload"])
            return
        if msg_type not in ("node_delta", "interaction_event", "hand_update"):
            return
        if self.last_seq is not None and seq != self.last_seq + 1:
            if self._request_snapshot is not None:
                self._request_snapshot()
            return
        self.last_seq = seq
        if msg_type == "node_delta":
            if self.status is not None:
                self.status = apply_node_delta(
                    self.status, NodeDelta.from_json(msg["payload"]["delta"]))
        elif msg_type == "interaction_event":
            self.events.append(InteractionEvent.from_json(msg["payload"]["event"]))
        else:
            self.hands.append((msg["payload"].get("source_client_id", ""),
                               HandState.from_json(msg["payload"]["hand"])))

    def canonical(self) -> str:
        if self.status is None:
            raise ModelError("no-replica", "no session snapshot received yet")
        return canonical_json(self.status.to_json())

    def last_of(self, msg_type: str) -> dict:
        for msg in reversed(self.inbox):
            if msg["type"] == msg_type:
                return msg
        raise ModelError("no-reply", f"no {msg_type} message received")
