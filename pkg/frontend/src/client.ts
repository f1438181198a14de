/** Live connection: join a session, steer the virtual hand, touch nodes.
 *
 * Every outbound message passes the protocol validator before it leaves;
 * the builders are pure so tests can check emissions without a socket.
 * Hand updates are rate limited (default 30 Hz) and clamped to the device
 * working volume; clamping is surfaced on the view state so the UI can flag
 * it.
 */

import { EventJson, HandJson, StatusJson } from "./model.js";
import { makeMessage, PROTOCOL_VERSION, validateMessage, WireMessage } from "./protocol.js";
import { SessionReplica } from "./replica.js";

/** Device working volume (the simulator's default), in meters. */
export const WORKING_VOLUME = {
  min: { x: -0.1, y: -0.1, z: 0.05 },
  max: { x: 0.1, y: 0.1, z: 0.35 },
};

export const HAND_RATE_HZ = 30;

export interface Vec3Like {
  x: number;
  y: number;
  z: number;
}

export function clampToVolume(p: Vec3Like): { pos: Vec3Like; clamped: boolean } {
  const lo = WORKING_VOLUME.min;
  const hi = WORKING_VOLUME.max;
  const pos = {
    x: Math.min(Math.max(p.x, lo.x), hi.x),
    y: Math.min(Math.max(p.y, lo.y), hi.y),
    z: Math.min(Math.max(p.z, lo.z), hi.z),
  };
  const clamped = pos.x !== p.x || pos.y !== p.y || pos.z !== p.z;
  return { pos, clamped };
}

export function buildHello(clientId: string, kind: string): WireMessage {
  return makeMessage("hello", { client_id: clientId, kind });
}

export function buildJoin(sessionId: string): WireMessage {
  return makeMessage("join_session", { session_id: sessionId });
}

export function buildSnapshotRequest(): WireMessage {
  return makeMessage("snapshot", {});
}

export function buildHandUpdate(pos: Vec3Like, timestamp: number): WireMessage {
  const hand: HandJson = {
    palm_position: [pos.x, pos.y, pos.z],
    palm_normal: [0, 0, 1],
    valid: true,
    timestamp,
  };
  return makeMessage("hand_update", { hand });
}

let eventCounter = 0;

export function buildTouchEvents(
  clientId: string,
  sessionId: string,
  nodeId: string,
  timestamp: number,
  color?: string,
): WireMessage[] {
  // the screen-tap path emits the same press/release pair the haptic path does
  const common = {
    session_id: sessionId,
    source_client_id: clientId,
    target_node_id: nodeId,
    timestamp,
  };
  const payload: Record<string, string> = color ? { color, player: clientId } : { player: clientId };
  const press: EventJson = { ...common, event_id: `touch-${++eventCounter}`, kind: "press", payload };
  const release: EventJson = { ...common, event_id: `touch-${++eventCounter}`, kind: "release", payload };
  return [
    makeMessage("interaction_event", { event: press }),
    makeMessage("interaction_event", { event: release }),
  ];
}

/** Timestamp gate: at most one accepted sample per 1/rate seconds. */
export class RateGate {
  private last: number | null = null;

  constructor(private rateHz: number) {}

  accept(t: number): boolean {
    if (this.last !== null && t < this.last + 1 / this.rateHz) return false;
    this.last = t;
    return true;
  }
}

export type ConnectionState = "connecting" | "joined" | "error" | "closed";

export interface ViewState {
  connection: ConnectionState;
  banner: string;
  sessionId: string | null;
  status: StatusJson | null;
  hand: Vec3Like;
  handClamped: boolean;
  intensity: number;
  lastRejection: string;
}

export interface HarpClientOptions {
  url: string;
  sessionId: string;
  clientId: string;
  kind: string;
  onChange: (view: ViewState) => void;
  /** injectable for tests; defaults to the browser WebSocket */
  socketFactory?: (url: string) => WebSocket;
  now?: () => number;
}

export class HarpClient {
  view: ViewState;
  replica: SessionReplica;
  private ws: WebSocket | null = null;
  private gate = new RateGate(HAND_RATE_HZ);
  private now: () => number;

  constructor(private opts: HarpClientOptions) {
    this.now = opts.now ?? (() => performance.now() / 1000);
    this.view = {
      connection: "connecting",
      banner: "connecting...",
      sessionId: null,
      status: null,
      hand: { x: 0, y: 0, z: 0.2 },
      handClamped: false,
      intensity: 0,
      lastRejection: "",
    };
    this.replica = new SessionReplica(() => this.send(buildSnapshotRequest()));
  }

  connect(): void {
    const factory = this.opts.socketFactory ?? ((url: string) => new WebSocket(url));
    this.ws = factory(this.opts.url);
    this.ws.onopen = () => this.send(buildHello(this.opts.clientId, this.opts.kind));
    this.ws.onmessage = (ev) => this.receive(String(ev.data));
    this.ws.onclose = () => this.update({ connection: "closed", banner: "disconnected" });
    this.ws.onerror = () => this.update({ connection: "error", banner: "connection error" });
  }

  send(msg: WireMessage): void {
    const problems = validateMessage(msg);
    if (problems.length) {
      throw new Error(`refusing to emit a non-conformant message: ${problems.join("; ")}`);
    }
    this.ws?.send(JSON.stringify(msg));
  }

  receive(raw: string): void {
    let msg: WireMessage;
    try {
      msg = JSON.parse(raw);
    } catch {
      return;
    }
    if (msg.v !== PROTOCOL_VERSION) {
      this.update({ connection: "error", banner: `protocol mismatch: ${msg.v}` });
      this.ws?.close();
      return;
    }
    if (msg.type === "hello") {
      this.send(buildJoin(this.opts.sessionId));
      return;
    }
    if (msg.type === "heartbeat") {
      this.send(makeMessage("heartbeat", { t: this.now() }));
      return;
    }
    if (msg.type === "error") {
      const code = (msg.payload.code as string) ?? "error";
      if (code === "unknown-session") {
        this.update({ connection: "error", banner: `unknown session: ${this.opts.sessionId}` });
        return;
      }
      this.replica.ingest(msg);
      this.update({ lastRejection: `${code}: ${msg.payload.message}` });
      return;
    }
    this.replica.ingest(msg);
    const updates: Partial<ViewState> = {
      status: this.replica.status,
      sessionId: this.replica.sessionId,
    };
    if (msg.type === "snapshot") {
      updates.connection = "joined";
      updates.banner = `session ${this.replica.sessionId}`;
    }
    if (msg.type === "interaction_event") {
      const event = msg.payload.event as EventJson;
      if (event.payload.intensity !== undefined && event.payload.player === this.opts.clientId) {
        updates.intensity = parseFloat(event.payload.intensity);
      }
      if (event.payload.game === "out-of-turn" && event.payload.player === this.opts.clientId) {
        updates.lastRejection = "not your turn";
      }
    }
    this.update(updates);
  }

  /** Move the virtual hand; emits a rate-limited, clamped hand update. */
  steerHand(p: Vec3Like): void {
    const { pos, clamped } = clampToVolume(p);
    this.update({ hand: pos, handClamped: clamped });
    if (this.view.connection !== "joined" || this.opts.kind !== "haptic") return;
    const t = this.now();
    if (!this.gate.accept(t)) return;
    this.send(buildHandUpdate(pos, t));
  }

  /** Tap a node: the press/release pair takes the same path as a real press. */
  touchNode(nodeId: string): void {
    if (this.view.connection !== "joined" || !this.replica.sessionId) return;
    const color = this.replica.status?.nodes[nodeId]?.metadata?.color;
    for (const msg of buildTouchEvents(
      this.opts.clientId, this.replica.sessionId, nodeId, this.now() * 1000, color,
    )) {
      this.send(msg);
    }
  }

  private update(partial: Partial<ViewState>): void {
    this.view = { ...this.view, ...partial };
    this.opts.onChange(this.view);
  }
}
