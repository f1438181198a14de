/** Session-tree JSON shapes, delta application and canonical serialization.
 *
 * applyNodeDelta mirrors the service semantics exactly: adds default to the
 * root parent and append to the parent's child list, updates replace content
 * only (mesh/transform/metadata), removes take the whole subtree. Canonical
 * serialization must match the service byte for byte, which pins key order
 * (sorted), separators, and float formatting (every number in a status is a
 * float except the revision and triangle indices).
 */

export interface TransformJson {
  position: number[];
  rotation: number[];
  scale: number[];
}

export interface MeshJson {
  vertices: number[][];
  normals: number[][];
  triangles: number[][];
}

export interface NodeJson {
  id: string;
  mesh: MeshJson | null;
  transform: TransformJson;
  parent: string | null;
  children: string[];
  metadata: Record<string, string>;
}

export interface StatusJson {
  root: string;
  nodes: Record<string, NodeJson>;
  revision: number;
}

export interface DeltaJson {
  op: "add" | "update" | "remove";
  node?: NodeJson;
  node_id?: string;
}

export interface EventJson {
  event_id: string;
  session_id: string;
  source_client_id: string;
  target_node_id: string;
  kind: string;
  timestamp: number;
  payload: Record<string, string>;
}

export interface HandJson {
  palm_position: number[];
  palm_normal: number[];
  valid: boolean;
  timestamp: number;
}

export class DeltaError extends Error {
  constructor(public code: string, detail: string) {
    super(`${code}: ${detail}`);
  }
}

function cloneNode(node: NodeJson): NodeJson {
  return {
    id: node.id,
    mesh: node.mesh,
    transform: node.transform,
    parent: node.parent,
    children: [...node.children],
    metadata: { ...node.metadata },
  };
}

export function applyNodeDelta(status: StatusJson, delta: DeltaJson): StatusJson {
  const nodes: Record<string, NodeJson> = {};
  for (const [k, v] of Object.entries(status.nodes)) nodes[k] = v;

  if (delta.op === "add") {
    const node = delta.node;
    if (!node) throw new DeltaError("invalid-delta", "add requires a node");
    if (nodes[node.id]) throw new DeltaError("duplicate-id", node.id);
    const parentId = node.parent ?? status.root;
    const parent = nodes[parentId];
    if (!parent) throw new DeltaError("unknown-target", `parent ${parentId}`);
    const added = cloneNode(node);
    added.parent = parentId;
    added.children = [];
    const newParent = cloneNode(parent);
    newParent.children.push(node.id);
    nodes[parentId] = newParent;
    nodes[node.id] = added;
  } else if (delta.op === "update") {
    const node = delta.node;
    if (!node) throw new DeltaError("invalid-delta", "update requires a node");
    const old = nodes[node.id];
    if (!old) throw new DeltaError("unknown-target", node.id);
    const updated = cloneNode(old);
    updated.mesh = node.mesh;
    updated.transform = node.transform;
    updated.metadata = { ...node.metadata };
    nodes[node.id] = updated;
  } else if (delta.op === "remove") {
    const nodeId = delta.node_id;
    if (!nodeId) throw new DeltaError("invalid-delta", "remove requires a node_id");
    if (nodeId === status.root) throw new DeltaError("remove-root", nodeId);
    if (!nodes[nodeId]) throw new DeltaError("unknown-target", nodeId);
    const doomed = [nodeId];
    for (let i = 0; i < doomed.length; i++) {
      doomed.push(...nodes[doomed[i]].children);
    }
    const parentId = nodes[nodeId].parent;
    if (parentId !== null && nodes[parentId]) {
      const parent = cloneNode(nodes[parentId]);
      parent.children = parent.children.filter((c) => c !== nodeId);
      nodes[parentId] = parent;
    }
    for (const nid of doomed) delete nodes[nid];
  } else {
    throw new DeltaError("invalid-delta", `unknown op ${(delta as DeltaJson).op}`);
  }

  return { root: status.root, nodes, revision: status.revision + 1 };
}

/** Python-repr-compatible float text (shortest round trip, "1.0" for whole). */
export function pyFloat(x: number): string {
  if (!isFinite(x)) throw new Error("canonical JSON cannot hold non-finite numbers");
  if (Object.is(x, -0)) return "-0.0";
  if (Number.isInteger(x) && Math.abs(x) < 1e16) return x.toFixed(1);
  const pad = (s: string) => {
    const [mant, exp] = s.split("e");
    const sign = exp.startsWith("-") ? "-" : "+";
    let digits = exp.replace(/^[+-]/, "");
    if (digits.length < 2) digits = "0" + digits;
    return `${mant}e${sign}${digits}`;
  };
  const ax = Math.abs(x);
  const s = String(x);
  if (s.includes("e")) return pad(s);
  if (ax !== 0 && (ax < 1e-4 || ax >= 1e16)) return pad(x.toExponential());
  return s;
}

type IntPredicate = (path: string[]) => boolean;

function canonicalValue(value: unknown, path: string[], isInt: IntPredicate): string {
  if (value === null) return "null";
  if (typeof value === "boolean") return value ? "true" : "false";
  if (typeof value === "string") {
    const encoded = JSON.stringify(value);
    if (!/^[\x20-\x7e]*$/.test(encoded)) {
      throw new Error("canonical JSON here is ASCII-only");
    }
    return encoded;
  }
  if (typeof value === "number") {
    return isInt(path) ? String(value) : pyFloat(value);
  }
  if (Array.isArray(value)) {
    return "[" + value.map((v, i) => canonicalValue(v, [...path, String(i)], isInt)).join(",") + "]";
  }
  const obj = value as Record<string, unknown>;
  const keys = Object.keys(obj).sort();
  const body = keys.map(
    (k) => `${JSON.stringify(k)}:${canonicalValue(obj[k], [...path, k], isInt)}`,
  );
  return "{" + body.join(",") + "}";
}

/** Canonical JSON of a session status, byte-identical to the service's. */
export function canonicalStatus(status: StatusJson): string {
  const isInt: IntPredicate = (path) =>
    path[path.length - 1] === "revision" || path.includes("triangles");
  return canonicalValue(status, [], isInt);
}
