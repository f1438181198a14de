"""The communication service: sessions, membership, deltas and event fan-out.

Transport agnostic: connections attach with a send callback and push decoded
wire messages into :meth:`SessionService.handle_message`. All mutations of
one session are applied under a single lock in arrival order, which gives the
per-session total order the protocol promises, and every broadcast consumes
exactly one sequence number so receivers can detect gaps and re-snapshot.

The clock is injectable so tests and headless runs are deterministic.
"""

from __future__ import annotations

import logging
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Callable, Optional

from .model import (CLIENT_KINDS, DeltaError, HandState, InteractionEvent, ModelError,
                    NodeDelta, SessionStatus, apply_node_delta, canonical_json,
                    validate_status)
from .replica import SessionReplica
from .wire import PROTOCOL_VERSION, WireError, make_message, validate_message

log = logging.getLogger(__name__)

HEARTBEAT_INTERVAL = 1.0     # seconds
MISSED_HEARTBEAT_LIMIT = 2   # disconnect after this many silent intervals
HAND_THROTTLE_HZ = 10.0

SendFn = Callable[[dict], None]


class ServiceError(ModelError):
    pass


@dataclass
class ClientConn:
    """Book-keeping for one attached connection."""

    conn_id: str
    send: SendFn
    client_id: Optional[str] = None
    kind: Optional[str] = None
    session_id: Optional[str] = None
    last_heard: float = 0.0
    last_hand_forwarded: Optional[float] = None  # HandState timestamp gate

    def hello_done(self) -> bool:
        return self.client_id is not None


@dataclass
class _SessionState:
    id: str
    status: SessionStatus
    members: list[str] = field(default_factory=list)  # conn ids, join order
    seq: int = 0
    event_count: int = 0


class SessionService:
    """In-memory hub for any number of sessions and clients."""

    def __init__(self, clock: Callable[[], float] = time.monotonic,
                 heartbeat_interval: float = HEARTBEAT_INTERVAL,
                 hand_throttle_hz: float = HAND_THROTTLE_HZ):
        self._clock = clock
        self._start = clock()
        self._heartbeat_interval = heartbeat_interval
        self._hand_min_dt = 1.0 / hand_throttle_hz if hand_throttle_hz > 0 else 0.0
        self._lock = threading.RLock()
        self._conns: dict[str, ClientConn] = {}
        self._sessions: dict[str, _SessionState] = {}

    # -- connection lifecycle ------------------------------------------------

    def attach(self, conn_id: str, send: SendFn) -> None:
        with self._lock:
            if conn_id in self._conns:
                raise ServiceError("duplicate-connection", conn_id)
            self._conns[conn_id] = ClientConn(conn_id=conn_id, send=send,
                                              last_heard=self._now())

    def detach(self, conn_id: str) -> None:
        """Remove a connection, announcing the leave to its session."""
        with self._lock:
            conn = self._conns.pop(conn_id, None)
            if conn is None:
                return
            self._leave_session(conn)

    def tick(self, now: Optional[float] = None) -> None:
        """Expire clients silent for more than the missed-heartbeat budget."""
        with self._lock:
            if now is None:
                now = self._now()
            budget = MISSED_HEARTBEAT_LIMIT * self._heartbeat_interval
            dead = [c.conn_id for c in self._conns.values()
                    if now - c.last_heard > budget]
            for conn_id in dead:
                log.info("client %s timed out", conn_id)
                self.detach(conn_id)

    def heartbeat_messages(self) -> list[tuple[str, dict]]:
        """(conn_id, heartbeat) pairs the transport should send now."""
        with self._lock:
            msg = make_message("heartbeat", {"t": self._now()})
            return [(conn_id, msg) for conn_id in self._conns]

    # -- message handling ----------------------------------------------------

    def handle_message(self, conn_id: str, msg: dict) -> None:
        """Process one decoded client message, replying via send callbacks."""
        with self._lock:
            conn = self._conns.get(conn_id)
            if conn is None:
                raise ServiceError("unknown-connection", conn_id)
            conn.last_heard = self._now()
            problems = validate_message(msg)
            if problems:
                self._reply_error(conn, "bad-message", "; ".join(problems))
                return
            msg_type = msg["type"]
            payload = msg["payload"]
            if msg_type == "hello":
                self._on_hello(conn, payload)
                return
            if msg_type == "heartbeat":
                return
            if not conn.hello_done():
                self._reply_error(conn, "not-hello", "handshake required first")
                return
            handler = {
                "create_session": self._on_create_session,
                "join_session": self._on_join_session,
                "snapshot": self._on_snapshot_request,
                "node_delta": self._on_node_delta,
                "interaction_event": self._on_interaction_event,
                "hand_update": self._on_hand_update,
                "error": self._on_client_error,
            }.get(msg_type)
            if handler is None:
                self._reply_error(conn, "unknown-type", msg_type)
                return
            handler(conn, payload)

    # -- direct API (thin wrappers used by in-process apps and tests) --------

    def create_session(self, session_id: Optional[str] = None) -> str:
        with self._lock:
            sid = session_id or f"session-{uuid.uuid4().hex[:12]}"
            if sid in self._sessions:
                raise ServiceError("duplicate-session", sid)
            self._sessions[sid] = _SessionState(id=sid, status=SessionStatus.new())
            log.info("session %s created", sid)
            return sid

    def session_status(self, session_id: str) -> SessionStatus:
        with self._lock:
            return self._session(session_id).status

    def session_seq(self, session_id: str) -> int:
        with self._lock:
            return self._session(session_id).seq

    def session_ids(self) -> list[str]:
        with self._lock:
            return sorted(self._sessions)

    # -- handlers --------------------------------------------------------

    def _on_hello(self, conn: ClientConn, payload: dict) -> None:
        client_id = payload["client_id"]
        if "kind" not in payload:
            self._reply_error(conn, "missing-kind", "clients must declare a kind")
            return
        for other in self._conns.values():
            if other is not conn and other.client_id == client_id:
                self._reply_error(conn, "duplicate-client", client_id)
                return
        conn.client_id = client_id
        conn.kind = payload["kind"]
        self._send(conn, make_message("hello", {
            "client_id": client_id,
            "heartbeat_interval": self._heartbeat_interval,
        }))

    def _on_create_session(self, conn: ClientConn, payload: dict) -> None:
        try:
            sid = self.create_session(payload.get("session_id"))
        except ServiceError as exc:
            self._reply_error(conn, exc.code, str(exc))
            return
        self._send(conn, make_message("create_session", {"session_id": sid}))

    def _on_join_session(self, conn: ClientConn, payload: dict) -> None:
        sid = payload["session_id"]
        sess = self._sessions.get(sid)
        if sess is None:
            self._reply_error(conn, "unknown-session", sid)
            return
        self._leave_session(conn)
        sess.members.append(conn.conn_id)
        conn.session_id = sid
        self._send(conn, self._snapshot_message(sess))
        self._broadcast_system_event(sess, "join", conn)

    def _on_snapshot_request(self, conn: ClientConn, payload: dict) -> None:
        sess = self._member_session(conn)
        if sess is None:
            return
        self._send(conn, self._snapshot_message(sess))

    def _on_node_delta(self, conn: ClientConn, payload: dict) -> None:
        sess = self._member_session(conn)
        if sess is None:
            return
        delta = NodeDelta.from_json(payload["delta"])
        try:
            new_status = apply_node_delta(sess.status, delta)
        except DeltaError as exc:
            self._reply_error(conn, exc.code, str(exc), in_reply_to="node_delta")
            return
        violations = validate_status(new_status)
        if violations:  # defense in depth; apply_node_delta preserves invariants
            self._reply_error(conn, "invalid-status", "; ".join(violations),
                              in_reply_to="node_delta")
            return
        sess.status = new_status
        self._broadcast(sess, "node_delta", {
            "session_id": sess.id,
            "delta": delta.to_json(),
            "revision": new_status.revision,
            "source_client_id": conn.client_id,
        })

    def _on_interaction_event(self, conn: ClientConn, payload: dict) -> None:
        sess = self._member_session(conn)
        if sess is None:
            return
        event = InteractionEvent.from_json(payload["event"])
        if event.target_node_id not in sess.status.nodes:
            self._reply_error(conn, "unknown-node", event.target_node_id,
                              in_reply_to="interaction_event")
            return
        sess.event_count += 1
        stamped = InteractionEvent(
            event_id=event.event_id,
            session_id=sess.id,
            source_client_id=conn.client_id or event.source_client_id,
            target_node_id=event.target_node_id,
            kind=event.kind,
            timestamp=self._now_ms(),
            payload=dict(event.payload),
        )
        self._broadcast(sess, "interaction_event", {"event": stamped.to_json()})

    def _on_hand_update(self, conn: ClientConn, payload: dict) -> None:
        sess = self._member_session(conn)
        if sess is None:
            return
        if conn.kind != "haptic":
            self._reply_error(conn, "wrong-kind",
                              f"hand updates require a haptic client, not {conn.kind}")
            return
        hand = HandState.from_json(payload["hand"])
        last = conn.last_hand_forwarded
        if last is not None and hand.timestamp < last + self._hand_min_dt:
            return  # dropped: latest-wins throttling, never reordered
        conn.last_hand_forwarded = hand.timestamp
        self._broadcast(sess, "hand_update", {
            "hand": hand.to_json(),
            "source_client_id": conn.client_id,
        })

    def _on_client_error(self, conn: ClientConn, payload: dict) -> None:
        log.warning("client %s reported error: %s", conn.client_id, payload)

    # -- internals -------------------------------------------------------

    def _send(self, conn: ClientConn, msg: dict) -> None:
        """Send to one client; a broken callback detaches only that client."""
        try:
            conn.send(msg)
        except Exception:
            log.exception("send to %s failed; detaching", conn.conn_id)
            self.detach(conn.conn_id)

    def _now(self) -> float:
        return self._clock()

    def _now_ms(self) -> float:
        return (self._clock() - self._start) * 1000.0

    def _session(self, session_id: str) -> _SessionState:
        sess = self._sessions.get(session_id)
        if sess is None:
            raise ServiceError("unknown-session", session_id)
        return sess

    def _member_session(self, conn: ClientConn) -> Optional[_SessionState]:
        if conn.session_id is None:
            self._reply_error(conn, "not-joined", "join a session first")
            return None
        return self._sessions[conn.session_id]

    def _snapshot_message(self, sess: _SessionState) -> dict:
        clients = []
        for conn_id in sess.members:
            member = self._conns[conn_id]
            clients.append({"id": member.client_id, "kind": member.kind})
        return make_message("snapshot", {
            "session_id": sess.id,
            "status": sess.status.to_json(),
            "clients": clients,
        }, seq=sess.seq)

    def _broadcast(self, sess: _SessionState, msg_type: str, payload: dict) -> None:
        sess.seq += 1
        msg = make_message(msg_type, payload, seq=sess.seq)
        for conn_id in list(sess.members):
            member = self._conns.get(conn_id)
            if member is None:
                continue
            self._send(member, msg)  # one broken client must not block the others

    def _broadcast_system_event(self, sess: _SessionState, what: str,
                                subject: ClientConn) -> None:
        sess.event_count += 1
        event = InteractionEvent(
            event_id=f"sys-{sess.id}-{sess.event_count}",
            session_id=sess.id,
            source_client_id="service",
            target_node_id=sess.status.root,
            kind="custom",
            timestamp=self._now_ms(),
            payload={"system": what,
                     "client_id": subject.client_id or "",
                     "client_kind": subject.kind or ""},
        )
        self._broadcast(sess, "interaction_event", {"event": event.to_json()})

    def _leave_session(self, conn: ClientConn) -> None:
        if conn.session_id is None:
            return
        sess = self._sessions.get(conn.session_id)
        conn.session_id = None
        if sess is None:
            return
        if conn.conn_id in sess.members:
            sess.members.remove(conn.conn_id)
            self._broadcast_system_event(sess, "leave", conn)

    def _reply_error(self, conn: ClientConn, code: str, message: str,
                     in_reply_to: Optional[str] = None) -> None:
        payload = {"code": code, "message": message}
        if in_reply_to:
            payload["in_reply_to"] = in_reply_to
        self._send(conn, make_message("error", payload))


class LocalClient:
    """In-process client: a session replica wired straight into the service.

    Message handling is synchronous, so replies are visible immediately after
    ``send`` returns; the replica can be compared byte for byte with the
    service state at any time.
    """

    def __init__(self, service: SessionService, client_id: str, kind: str = "observer"):
        if kind not in CLIENT_KINDS:
            raise ServiceError("invalid-kind", kind)
        self.service = service
        self.client_id = client_id
        self.kind = kind
        self.state = SessionReplica(request_snapshot=self.request_snapshot)
        service.attach(client_id, self.state.ingest)
        self.send(make_message("hello", {"client_id": client_id, "kind": kind}))

    # -- outgoing ----------------------------------------------------------

    def send(self, msg: dict) -> None:
        self.service.handle_message(self.client_id, msg)

    def create_session(self, session_id: Optional[str] = None) -> str:
        payload = {"session_id": session_id} if session_id else {}
        self.send(make_message("create_session", payload))
        return self.state.last_of("create_session")["payload"]["session_id"]

    def join(self, session_id: str) -> None:
        self.send(make_message("join_session", {"session_id": session_id}))

    def submit_delta(self, delta: NodeDelta) -> None:
        self.send(make_message("node_delta", {"delta": delta.to_json()}))

    def publish_event(self, event: InteractionEvent) -> None:
        self.send(make_message("interaction_event", {"event": event.to_json()}))

    def publish_hand(self, hand: HandState) -> None:
        self.send(make_message("hand_update", {"hand": hand.to_json()}))

    def request_snapshot(self) -> None:
        self.send(make_message("snapshot", {}))

    def close(self) -> None:
        self.service.detach(self.client_id)

    # -- replica access ------------------------------------------------------

    @property
    def inbox(self) -> list[dict]:
        return self.state.inbox

    @property
    def replica(self) -> Optional[SessionStatus]:
        return self.state.status

    @property
    def session_id(self) -> Optional[str]:
        return self.state.session_id

    @property
    def last_seq(self) -> Optional[int]:
        return self.state.last_seq

    @property
    def events(self) -> list[InteractionEvent]:
        return self.state.events

    @property
    def hands(self) -> list[tuple[str, HandState]]:
        return self.state.hands

    @property
    def errors(self) -> list[dict]:
        return self.state.errors

    def replica_canonical(self) -> str:
        return self.state.canonical()

    def _receive(self, msg: dict) -> None:  # kept for tests that inject messages
        self.state.ingest(msg)
