/** Browser entry point: DOM wiring for the live session view.
 *
 * URL parameters: ?session=<id>&client=<id>&kind=<ar-view|haptic|observer>
 * and optionally &ws=<websocket url> (defaults to ws://127.0.0.1:8700).
 */

import { HarpClient, ViewState } from "./client.js";
import { readHud } from "./hud.js";
import { canvasToWorld, draw, pickNode } from "./render2d.js";

const params = new URLSearchParams(location.search);
const sessionId = params.get("session") ?? "demo";
const clientId = params.get("client") ?? `web-${Math.random().toString(36).slice(2, 8)}`;
const kind = params.get("kind") ?? "haptic";
const url = params.get("ws") ?? "ws://127.0.0.1:8700";

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const banner = document.getElementById("banner")!;
const meterFill = document.getElementById("meter-fill")!;
const meterText = document.getElementById("meter-text")!;
const hudBox = document.getElementById("hud")!;
const toast = document.getElementById("toast")!;
const zSlider = document.getElementById("z-slider") as HTMLInputElement;
const eventLog = document.getElementById("events")!;

let view: ViewState | null = null;
let lastRejection = "";
let loggedEvents = 0;

const client = new HarpClient({
  url,
  sessionId,
  clientId,
  kind,
  onChange: (v) => {
    view = v;
  },
});
client.connect();

canvas.addEventListener("pointermove", (ev) => {
  const rect = canvas.getBoundingClientRect();
  const world = canvasToWorld(canvas, ev.clientX - rect.left, ev.clientY - rect.top);
  if (world && view) {
    client.steerHand({ x: world.x, y: world.y, z: view.hand.z });
  }
});

canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  if (!view) return;
  const z = view.hand.z - Math.sign(ev.deltaY) * 0.005;
  client.steerHand({ ...view.hand, z });
  zSlider.value = String(z);
}, { passive: false });

canvas.addEventListener("click", (ev) => {
  const rect = canvas.getBoundingClientRect();
  const node = pickNode(view?.status ?? null, canvas,
                        ev.clientX - rect.left, ev.clientY - rect.top);
  if (node) client.touchNode(node);
});

zSlider.addEventListener("input", () => {
  if (!view) return;
  client.steerHand({ ...view.hand, z: parseFloat(zSlider.value) });
});

function redraw(): void {
  requestAnimationFrame(redraw);
  if (!view) return;
  draw(ctx, view);
  banner.textContent = view.banner;
  banner.className = view.connection;

  meterFill.setAttribute("style", `width:${Math.round(view.intensity * 100)}%`);
  meterText.textContent = `felt intensity ${view.intensity.toFixed(2)}`;

  const hud = readHud(view.status);
  if (hud.present) {
    const prompt = hud.sequence
      .map((c, i) => (i < hud.cursor ? `(${c})` : c))
      .join(" ");
    hudBox.innerHTML =
      `<b>sequence:</b> ${prompt}<br>` +
      `<b>score:</b> ${hud.correct} &nbsp; <b>fails:</b> ${hud.fails}<br>` +
      `<b>turn:</b> ${hud.turn || "anyone"} ${hud.turn === clientId ? "(you)" : ""}<br>` +
      `<b>round:</b> ${hud.over ? "over" : `${hud.deadline.toFixed(0)} s`}`;
  } else {
    hudBox.textContent = "no game running in this session";
  }

  if (view.lastRejection && view.lastRejection !== lastRejection) {
    lastRejection = view.lastRejection;
    toast.textContent = lastRejection;
    toast.className = "show";
    setTimeout(() => (toast.className = ""), 1800);
  }

  const events = client.replica.events;
  for (; loggedEvents < events.length; loggedEvents++) {
    const e = events[loggedEvents];
    if (e.kind === "custom" && e.payload.intensity !== undefined) continue;
    const li = document.createElement("li");
    li.textContent = `${e.kind} ${e.target_node_id} ${JSON.stringify(e.payload)}`;
    eventLog.prepend(li);
    while (eventLog.children.length > 12) eventLog.lastChild?.remove();
  }
}

redraw();
