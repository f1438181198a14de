"""Socket transports for the session service.

Two framings carry the same JSON messages: WebSocket (for browsers) and
4-byte big-endian length-prefixed TCP (for native clients). The TCP listener
sits one port above the WebSocket listener unless configured otherwise.

Outbound messages are queued per connection and written by a dedicated task,
so a slow or dead peer never blocks the service loop; the heartbeat task
expires peers the service has not heard from.
"""

from __future__ import annotations

import asyncio
import itertools
import json
import logging
import queue
import socket
import struct
import threading
from typing import Callable, Optional

from websockets.asyncio.server import serve as ws_serve
from websockets.exceptions import ConnectionClosed

from .model import ModelError
from .replica import SessionReplica
from .service import SessionService
from .wire import WireError, decode_message, encode_message, make_message

log = logging.getLogger(__name__)

LENGTH_PREFIX = struct.Struct(">I")
MAX_MESSAGE_BYTES = 16 * 1024 * 1024


class TransportError(ModelError):
    pass


class ServiceServer:
    """Async server exposing one SessionService over WebSocket and TCP."""

    def __init__(self, service: Optional[SessionService] = None,
                 host: str = "127.0.0.1", ws_port: int = 8700,
                 tcp_port: Optional[int] = None, heartbeat: bool = True):
        self.service = service if service is not None else SessionService()
        self.host = host
        self._ws_port = ws_port
        self._tcp_port = tcp_port if tcp_port is not None else (
            ws_port + 1 if ws_port else 0)
        self._heartbeat = heartbeat
        self._conn_counter = itertools.count(1)
        self._queues: dict[str, asyncio.Queue] = {}
        self._ws_server = None
        self._tcp_server = None
        self._heartbeat_task: Optional[asyncio.Task] = None

    # -- lifecycle -----------------------------------------------------------

    async def start(self) -> None:
        self._ws_server = await ws_serve(self._handle_ws, self.host, self._ws_port)
        self._tcp_server = await asyncio.start_server(
            self._handle_tcp, self.host, self._tcp_port)
        if self._heartbeat:
            self._heartbeat_task = asyncio.create_task(self._heartbeat_loop())
        log.info("listening ws=%s tcp=%s", self.ws_address, self.tcp_address)

    async def stop(self) -> None:
        if self._heartbeat_task:
            self._heartbeat_task.cancel()
            self._heartbeat_task = None
        if self._ws_server:
            self._ws_server.close()
            await self._ws_server.wait_closed()
        if self._tcp_server:
            self._tcp_server.close()
            await self._tcp_server.wait_closed()

    async def __aenter__(self) -> "ServiceServer":
        await self.start()
        return self

    async def __aexit__(self, *exc) -> None:
        await self.stop()

    @property
    def ws_port(self) -> int:
        return self._ws_server.sockets[0].getsockname()[1]

    @property
    def tcp_port(self) -> int:
        return self._tcp_server.sockets[0].getsockname()[1]

    @property
    def ws_address(self) -> str:
        return f"ws://{self.host}:{self.ws_port}"

    @property
    def tcp_address(self) -> str:
        return f"{self.host}:{self.tcp_port}"

    # -- shared plumbing -------------------------------------------------------

    def _open_conn(self, label: str) -> tuple[str, asyncio.Queue]:
        conn_id = f"{label}-{next(self._conn_counter)}"
        outbox: asyncio.Queue = asyncio.Queue()
        self._queues[conn_id] = outbox
        self.service.attach(conn_id, outbox.put_nowait)
        return conn_id, outbox

    def _close_conn(self, conn_id: str) -> None:
        self.service.detach(conn_id)
        self._queues.pop(conn_id, None)

    def _feed(self, conn_id: str, raw: str | bytes) -> None:
        try:
            msg = decode_message(raw)
        except WireError as exc:
            q = self._queues.get(conn_id)
            if q is not None:
                q.put_nowait(make_message("error", {"code": exc.code, "message": str(exc)}))
            return
        self.service.handle_message(conn_id, msg)

    async def _heartbeat_loop(self) -> None:
        interval = self.service._heartbeat_interval
        while True:
            await asyncio.sleep(interval)
            self.service.tick()
            for conn_id, msg in self.service.heartbeat_messages():
                q = self._queues.get(conn_id)
                if q is not None:
                    q.put_nowait(msg)

    # -- websocket ---------------------------------------------------------

    async def _handle_ws(self, websocket) -> None:
        conn_id, outbox = self._open_conn("ws")

        async def writer():
            while True:
                msg = await outbox.get()
                await websocket.send(encode_message(msg))

        writer_task = asyncio.create_task(writer())
        try:
            async for raw in websocket:
                self._feed(conn_id, raw)
        except ConnectionClosed:
            pass
        finally:
            writer_task.cancel()
            self._close_conn(conn_id)

    # -- length-prefixed tcp -------------------------------------------------

    async def _handle_tcp(self, reader: asyncio.StreamReader,
                          writer: asyncio.StreamWriter) -> None:
        conn_id, outbox = self._open_conn("tcp")

        async def pump():
            while True:
                msg = await outbox.get()
                payload = encode_message(msg).encode("utf-8")
                writer.write(LENGTH_PREFIX.pack(len(payload)) + payload)
                await writer.drain()

        writer_task = asyncio.create_task(pump())
        try:
            while True:
                header = await reader.readexactly(LENGTH_PREFIX.size)
                (length,) = LENGTH_PREFIX.unpack(header)
                if length > MAX_MESSAGE_BYTES:
                    raise TransportError("frame-too-large", str(length))
                raw = await reader.readexactly(length)
                self._feed(conn_id, raw)
        except (asyncio.IncompleteReadError, ConnectionResetError, TransportError):
            pass
        finally:
            writer_task.cancel()
            self._close_conn(conn_id)
            writer.close()


def run_server(host: str, ws_port: int, tcp_port: Optional[int] = None,
               service: Optional[SessionService] = None) -> None:
    """Blocking entry point used by the CLI: serve until interrupted."""

    async def main():
        server = ServiceServer(service, host=host, ws_port=ws_port, tcp_port=tcp_port)
        async with server:
            print(f"session service: ws://{server.host}:{server.ws_port} "
                  f"(browser) / tcp {server.host}:{server.tcp_port} (native)")
            await asyncio.Event().wait()

    try:
        asyncio.run(main())
    except KeyboardInterrupt:
        pass


class ThreadedServer:
    """ServiceServer running on its own event loop thread.

    Lets blocking code (tests, the CLI applications) host a live service
    without going async itself.
    """

    def __init__(self, service: Optional[SessionService] = None,
                 host: str = "127.0.0.1", ws_port: int = 0,
                 tcp_port: Optional[int] = 0, heartbeat: bool = True):
        self.server = ServiceServer(service, host=host, ws_port=ws_port,
                                    tcp_port=tcp_port, heartbeat=heartbeat)
        self.service = self.server.service
        self.loop = asyncio.new_event_loop()
        self._started = threading.Event()
        self._thread = threading.Thread(target=self._run, daemon=True)

    def _run(self) -> None:
        asyncio.set_event_loop(self.loop)
        self.loop.run_until_complete(self.server.start())
        self._started.set()
        self.loop.run_forever()
        self.loop.run_until_complete(self.server.stop())
        self.loop.close()

    def start(self) -> "ThreadedServer":
        self._thread.start()
        if not self._started.wait(timeout=10.0):
            raise TransportError("startup-timeout", "server did not start")
        return self

    def stop(self) -> None:
        self.loop.call_soon_threadsafe(self.loop.stop)
        self._thread.join(timeout=10.0)

    def __enter__(self) -> "ThreadedServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    @property
    def ws_address(self) -> str:
        return self.server.ws_address

    @property
    def tcp_port(self) -> int:
        return self.server.tcp_port

    @property
    def host(self) -> str:
        return self.server.host


class TcpServiceClient:
    """Blocking length-prefixed TCP client with a background reader thread.

    Keeps the same :class:`SessionReplica` a local client would, so remote
    sessions can be inspected and compared identically.
    """

    def __init__(self, host: str, port: int, client_id: str, kind: str = "observer",
                 timeout: float = 5.0):
        self.client_id = client_id
        self.kind = kind
        self.timeout = timeout
        self.state = SessionReplica(request_snapshot=self.request_snapshot)
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._incoming: "queue.Queue[dict]" = queue.Queue()
        self._closed = threading.Event()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        self.send(make_message("hello", {"client_id": client_id, "kind": kind}))
        self.wait_for("hello")

    # -- outgoing ----------------------------------------------------------

    def send(self, msg: dict) -> None:
        payload = encode_message(msg).encode("utf-8")
        self._sock.sendall(LENGTH_PREFIX.pack(len(payload)) + payload)

    def create_session(self, session_id: Optional[str] = None) -> str:
        self.send(make_message("create_session",
                               {"session_id": session_id} if session_id else {}))
        return self.wait_for("create_session")["payload"]["session_id"]

    def join(self, session_id: str) -> None:
        self.send(make_message("join_session", {"session_id": session_id}))
        self.wait_for("snapshot")

    def submit_delta(self, delta) -> None:
        self.send(make_message("node_delta", {"delta": delta.to_json()}))

    def publish_event(self, event) -> None:
        self.send(make_message("interaction_event", {"event": event.to_json()}))

    def publish_hand(self, hand) -> None:
        self.send(make_message("hand_update", {"hand": hand.to_json()}))

    def request_snapshot(self) -> None:
        self.send(make_message("snapshot", {}))

    # -- incoming ----------------------------------------------------------

    def _read_loop(self) -> None:
        sock_file = self._sock.makefile("rb")
        try:
            while not self._closed.is_set():
                header = sock_file.read(LENGTH_PREFIX.size)
                if len(header) < LENGTH_PREFIX.size:
                    break
                (length,) = LENGTH_PREFIX.unpack(header)
                raw = sock_file.read(length)
                if len(raw) < length:
                    break
                msg = json.loads(raw)
                self.state.ingest(msg)
                self._incoming.put(msg)
        except OSError:
            pass

    def wait_for(self, msg_type: str, timeout: Optional[float] = None) -> dict:
        """Block until a message of the given type arrives."""
        deadline = timeout if timeout is not None else self.timeout
        while True:
            msg = self._incoming.get(timeout=deadline)
            if msg["type"] == msg_type:
                return msg
            if msg["type"] == "error":
                raise TransportError(msg["payload"]["code"], msg["payload"]["message"])

    def drain(self) -> None:
        """Discard queued messages (they remain in the replica state)."""
        while True:
            try:
                self._incoming.get_nowait()
            except queue.Empty:
                return

    def close(self) -> None:
        self._closed.set()
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()
