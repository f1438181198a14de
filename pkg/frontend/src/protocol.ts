/** Wire protocol "harp/1": message shapes and structural validation.
 *
 * This mirrors the service's validator; both sides are held to the same
 * conformance vectors in ../protocol/vectors.json. Unknown payload fields
 * are ignored, unknown message types are rejected.
 */

export const PROTOCOL_VERSION = "harp/1";

export const MESSAGE_TYPES = [
  "hello",
  "create_session",
  "join_session",
  "snapshot",
  "node_delta",
  "interaction_event",
  "hand_update",
  "heartbeat",
  "error",
] as const;

export type MessageType = (typeof MESSAGE_TYPES)[number];

export const CLIENT_KINDS = ["ar-view", "haptic", "observer"] as const;
export const EVENT_KINDS = ["touch", "press", "release", "custom"] as const;

export interface WireMessage {
  v: string;
  seq: number;
  type: MessageType;
  payload: Record<string, unknown>;
}

export function makeMessage(
  type: MessageType,
  payload: Record<string, unknown> = {},
  seq = 0,
): WireMessage {
  return { v: PROTOCOL_VERSION, seq, type, payload };
}

type Obj = Record<string, unknown>;

function isObj(v: unknown): v is Obj {
  return typeof v === "object" && v !== null && !Array.isArray(v);
}

function isNum(v: unknown): v is number {
  return typeof v === "number" && isFinite(v);
}

function isVec3(v: unknown): boolean {
  return Array.isArray(v) && v.length === 3 && v.every(isNum);
}

function isQuat(v: unknown): boolean {
  return Array.isArray(v) && v.length === 4 && v.every(isNum);
}

function isStrMap(v: unknown): boolean {
  return isObj(v) && Object.values(v).every((x) => typeof x === "string");
}

function checkTransform(t: unknown, where: string, problems: string[]): void {
  if (!isObj(t)) {
    problems.push(`${where}: transform must be an object`);
    return;
  }
  if (!isVec3(t.position)) problems.push(`${where}: bad position`);
  if (!isQuat(t.rotation)) problems.push(`${where}: bad rotation`);
  if (!isVec3(t.scale)) problems.push(`${where}: bad scale`);
}

function checkNode(node: unknown, where: string, problems: string[]): void {
  if (!isObj(node)) {
    problems.push(`${where}: node must be an object`);
    return;
  }
  if (typeof node.id !== "string" || !node.id) {
    problems.push(`${where}: node id must be a non-empty string`);
  }
  checkTransform(node.transform, `${where}.transform`, problems);
  const mesh = node.mesh;
  if (mesh !== null && mesh !== undefined) {
    if (!isObj(mesh)) {
      problems.push(`${where}: mesh must be an object or null`);
    } else {
      for (const key of ["vertices", "normals", "triangles"]) {
        if (!Array.isArray(mesh[key])) problems.push(`${where}.mesh: missing ${key}`);
      }
    }
  }
  if (!Array.isArray(node.children) || !node.children.every((c) => typeof c === "string")) {
    problems.push(`${where}: children must be a list of node ids`);
  }
  if (!isStrMap(node.metadata)) {
    problems.push(`${where}: metadata must map strings to strings`);
  }
}

function checkStatus(status: unknown, where: string, problems: string[]): void {
  if (!isObj(status)) {
    problems.push(`${where}: status must be an object`);
    return;
  }
  if (typeof status.root !== "string") problems.push(`${where}: missing root`);
  if (!isObj(status.nodes)) {
    problems.push(`${where}: missing nodes table`);
  } else {
    for (const [nid, node] of Object.entries(status.nodes)) {
      checkNode(node, `${where}.nodes[${nid}]`, problems);
    }
  }
  if (!Number.isInteger(status.revision)) problems.push(`${where}: missing revision`);
}

function checkHand(hand: unknown, where: string, problems: string[]): void {
  if (!isObj(hand)) {
    problems.push(`${where}: hand must be an object`);
    return;
  }
  if (!isVec3(hand.palm_position)) problems.push(`${where}: bad palm_position`);
  if (!isVec3(hand.palm_normal)) problems.push(`${where}: bad palm_normal`);
  if (typeof hand.valid !== "boolean") problems.push(`${where}: bad valid flag`);
  if (!isNum(hand.timestamp)) problems.push(`${where}: bad timestamp`);
}

function checkEvent(event: unknown, where: string, problems: string[]): void {
  if (!isObj(event)) {
    problems.push(`${where}: event must be an object`);
    return;
  }
  for (const key of ["event_id", "session_id", "source_client_id", "target_node_id"]) {
    if (typeof event[key] !== "string") problems.push(`${where}: ${key} must be a string`);
  }
  if (!EVENT_KINDS.includes(event.kind as never)) {
    problems.push(`${where}: kind must be one of ${EVENT_KINDS.join(",")}`);
  }
  if (!isNum(event.timestamp)) problems.push(`${where}: bad timestamp`);
  const payload = event.payload ?? {};
  if (!isStrMap(payload)) problems.push(`${where}: payload must map strings to strings`);
}

function checkDelta(delta: unknown, where: string, problems: string[]): void {
  if (!isObj(delta)) {
    problems.push(`${where}: delta must be an object`);
    return;
  }
  const op = delta.op;
  if (op !== "add" && op !== "update" && op !== "remove") {
    problems.push(`${where}: op must be add/update/remove`);
    return;
  }
  if (op === "add" || op === "update") {
    checkNode(delta.node, `${where}.node`, problems);
  } else if (typeof delta.node_id !== "string") {
    problems.push(`${where}: remove needs node_id`);
  }
}

/** Structural problems with a wire message; empty when conformant. */
export function validateMessage(msg: unknown): string[] {
  const problems: string[] = [];
  if (!isObj(msg)) return ["message must be a JSON object"];
  if (msg.v !== PROTOCOL_VERSION) {
    problems.push(`bad-version: expected "${PROTOCOL_VERSION}", got ${JSON.stringify(msg.v)}`);
  }
  const seq = msg.seq;
  if (!Number.isInteger(seq) || (seq as number) < 0) {
    problems.push("bad-seq: must be a non-negative integer");
  }
  const type = msg.type as string;
  if (!MESSAGE_TYPES.includes(type as MessageType)) {
    problems.push(`unknown-type: ${JSON.stringify(type)}`);
    return problems;
  }
  const payload = msg.payload;
  if (!isObj(payload)) {
    problems.push("bad-payload: must be an object");
    return problems;
  }
  const where = `payload(${type})`;
  switch (type as MessageType) {
    case "hello":
      if (typeof payload.client_id !== "string" || !payload.client_id) {
        problems.push(`${where}: client_id must be a non-empty string`);
      }
      // the service's hello reply carries no kind; when present it must be known
      if (payload.kind !== undefined && !CLIENT_KINDS.includes(payload.kind as never)) {
        problems.push(`${where}: kind must be one of ${CLIENT_KINDS.join(",")}`);
      }
      break;
    case "create_session":
      if (payload.session_id !== undefined && typeof payload.session_id !== "string") {
        problems.push(`${where}: session_id must be a string when present`);
      }
      break;
    case "join_session":
      if (typeof payload.session_id !== "string") {
        problems.push(`${where}: session_id must be a string`);
      }
      break;
    case "snapshot":
      if (payload.session_id !== undefined && typeof payload.session_id !== "string") {
        problems.push(`${where}: session_id must be a string`);
      }
      if (payload.status !== undefined) {
        checkStatus(payload.status, where, problems);
        if (!Array.isArray(payload.clients)) {
          problems.push(`${where}: missing clients list`);
        }
      }
      break;
    case "node_delta":
      checkDelta(payload.delta, where, problems);
      if (payload.revision !== undefined && !Number.isInteger(payload.revision)) {
        problems.push(`${where}: revision must be an integer`);
      }
      break;
    case "interaction_event":
      checkEvent(payload.event, where, problems);
      break;
    case "hand_update":
      checkHand(payload.hand, where, problems);
      break;
    case "heartbeat":
      if (payload.t !== undefined && !isNum(payload.t)) {
        problems.push(`${where}: t must be a number when present`);
      }
      break;
    case "error":
      if (typeof payload.code !== "string") problems.push(`${where}: code must be a string`);
      if (typeof payload.message !== "string") problems.push(`${where}: message must be a string`);
      break;
  }
  return problems;
}
