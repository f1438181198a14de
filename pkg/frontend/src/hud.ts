/** Simon HUD: the game replicates its state as root-node metadata. */

import { StatusJson } from "./model.js";

export interface SimonHud {
  present: boolean;
  sequence: string[];
  cursor: number;
  correct: number;
  fails: number;
  turn: string;
  mode: string;
  deadline: number;
  over: boolean;
}

export function readHud(status: StatusJson | null): SimonHud {
  const empty: SimonHud = {
    present: false, sequence: [], cursor: 0, correct: 0, fails: 0,
    turn: "", mode: "solo", deadline: 0, over: false,
  };
  if (!status) return empty;
  const meta = status.nodes[status.root]?.metadata ?? {};
  if (!("simon_sequence" in meta)) return empty;
  return {
    present: true,
    sequence: meta.simon_sequence ? meta.simon_sequence.split(",") : [],
    cursor: parseInt(meta.simon_cursor ?? "0", 10),
    correct: parseInt(meta.simon_correct ?? "0", 10),
    fails: parseInt(meta.simon_fails ?? "0", 10),
    turn: meta.simon_turn ?? "",
    mode: meta.simon_mode ?? "solo",
    deadline: parseFloat(meta.simon_deadline ?? "0"),
    over: meta.simon_over === "true",
  };
}
