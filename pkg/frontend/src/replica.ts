/** Client-side session replica: snapshot first, then deltas in sequence order.
 *
 * A sequence gap means messages were missed; the replica asks for a fresh
 * snapshot and skips the out-of-order message (its effect is folded into
 * the snapshot it requested).
 */

import { applyNodeDelta, DeltaJson, EventJson, HandJson, StatusJson } from "./model.js";
import { WireMessage } from "./protocol.js";

export class SessionReplica {
  inbox: WireMessage[] = [];
  status: StatusJson | null = null;
  sessionId: string | null = null;
  lastSeq: number | null = null;
  events: EventJson[] = [];
  hands: { source: string; hand: HandJson }[] = [];
  errors: Record<string, unknown>[] = [];

  constructor(private requestSnapshot?: () => void) {}

  ingest(msg: WireMessage): void {
    this.inbox.push(msg);
    const { type, seq, payload } = msg;
    if (type === "snapshot") {
      this.sessionId = payload.session_id as string;
      this.status = payload.status as StatusJson;
      this.lastSeq = seq;
      return;
    }
    if (type === "error") {
      this.errors.push(payload);
      return;
    }
    if (type !== "node_delta" && type !== "interaction_event" && type !== "hand_update") {
      return;
    }
    if (this.lastSeq !== null && seq !== this.lastSeq + 1) {
      this.requestSnapshot?.();
      return;
    }
    this.lastSeq = seq;
    if (type === "node_delta") {
      if (this.status !== null) {
        this.status = applyNodeDelta(this.status, payload.delta as DeltaJson);
      }
    } else if (type === "interaction_event") {
      this.events.push(payload.event as EventJson);
    } else {
      this.hands.push({
        source: (payload.source_client_id as string) ?? "",
        hand: payload.hand as HandJson,
      });
    }
  }
}
