/** Two-pane scene view: orthographic top view (x/y) and side elevation (x/z).
 *
 * Enough to see where the buttons sit, where the virtual hand is, and how
 * deep a press goes; full 3D is deliberately out of scope.
 */

import { ViewState, WORKING_VOLUME } from "./client.js";
import { StatusJson } from "./model.js";

const COLORS: Record<string, string> = {
  red: "#e04b3a",
  green: "#3ec764",
  blue: "#3d7bde",
  yellow: "#e8c33a",
};

interface Pane {
  x0: number;
  y0: number;
  w: number;
  h: number;
}

function mapTop(pane: Pane, x: number, y: number): [number, number] {
  const vol = WORKING_VOLUME;
  const px = pane.x0 + ((x - vol.min.x) / (vol.max.x - vol.min.x)) * pane.w;
  const py = pane.y0 + pane.h - ((y - vol.min.y) / (vol.max.y - vol.min.y)) * pane.h;
  return [px, py];
}

function mapSide(pane: Pane, x: number, z: number): [number, number] {
  const vol = WORKING_VOLUME;
  const px = pane.x0 + ((x - vol.min.x) / (vol.max.x - vol.min.x)) * pane.w;
  const py = pane.y0 + pane.h - ((z - vol.min.z) / (vol.max.z - vol.min.z)) * pane.h;
  return [px, py];
}

export function topViewPane(canvas: { width: number; height: number }): Pane {
  const w = canvas.width / 2 - 30;
  return { x0: 10, y0: 30, w, h: canvas.height - 50 };
}

export function sideViewPane(canvas: { width: number; height: number }): Pane {
  const w = canvas.width / 2 - 30;
  return { x0: canvas.width / 2 + 20, y0: 30, w, h: canvas.height - 50 };
}

/** Hit test in the top view: which node did a canvas point land on? */
export function pickNode(status: StatusJson | null, canvas: { width: number; height: number },
                         cx: number, cy: number): string | null {
  if (!status) return null;
  const pane = topViewPane(canvas);
  for (const node of Object.values(status.nodes)) {
    if (node.id === status.root || !node.mesh) continue;
    const [px, py] = mapTop(pane, node.transform.position[0], node.transform.position[1]);
    if (Math.hypot(cx - px, cy - py) < 18) return node.id;
  }
  return null;
}

export function canvasToWorld(canvas: { width: number; height: number },
                              cx: number, cy: number): { x: number; y: number } | null {
  const pane = topViewPane(canvas);
  if (cx < pane.x0 || cx > pane.x0 + pane.w || cy < pane.y0 || cy > pane.y0 + pane.h) {
    return null;
  }
  const vol = WORKING_VOLUME;
  return {
    x: vol.min.x + ((cx - pane.x0) / pane.w) * (vol.max.x - vol.min.x),
    y: vol.min.y + ((pane.y0 + pane.h - cy) / pane.h) * (vol.max.y - vol.min.y),
  };
}

export function draw(ctx: CanvasRenderingContext2D, view: ViewState): void {
  const canvas = ctx.canvas;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.font = "12px system-ui, sans-serif";
  ctx.fillStyle = "#889";
  ctx.fillText("top view (x/y)", 10, 18);
  ctx.fillText("side elevation (x/z)", canvas.width / 2 + 20, 18);

  const top = topViewPane(canvas);
  const side = sideViewPane(canvas);
  ctx.strokeStyle = "#445";
  ctx.strokeRect(top.x0, top.y0, top.w, top.h);
  ctx.strokeRect(side.x0, side.y0, side.w, side.h);

  const status = view.status;
  if (status) {
    for (const node of Object.values(status.nodes)) {
      if (node.id === status.root || !node.mesh) continue;
      const color = COLORS[node.metadata.color ?? ""] ?? "#9aa";
      const [tx, ty] = mapTop(top, node.transform.position[0], node.transform.position[1]);
      ctx.fillStyle = color;
      ctx.beginPath();
      ctx.arc(tx, ty, 14, 0, Math.PI * 2);
      ctx.fill();

      const [sx, sy] = mapSide(side, node.transform.position[0], node.transform.position[2]);
      const h = Math.max(4, node.transform.scale[2] * side.h / 0.3);
      ctx.fillRect(sx - 12, sy - h, 24, h);
    }
  }

  // virtual hand: cross in both panes
  ctx.strokeStyle = view.handClamped ? "#e04b3a" : "#eef";
  ctx.lineWidth = 2;
  const [hx, hy] = mapTop(top, view.hand.x, view.hand.y);
  ctx.beginPath();
  ctx.moveTo(hx - 8, hy);
  ctx.lineTo(hx + 8, hy);
  ctx.moveTo(hx, hy - 8);
  ctx.lineTo(hx, hy + 8);
  ctx.stroke();
  const [px, pz] = mapSide(side, view.hand.x, view.hand.z);
  ctx.beginPath();
  ctx.moveTo(px - 10, pz);
  ctx.lineTo(px + 10, pz);
  ctx.stroke();
  ctx.lineWidth = 1;
}
