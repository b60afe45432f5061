/** Layered left-to-right layout: a pure function of a snapshot.
 *
 * Columns follow breadth-first distance from the graph inputs (inputs on
 * the left, outputs drifting right); feedback wires simply draw
 * right-to-left. Goal nodes become chips riding on their wires, built
 * one-to-one from the snapshot's goal_positions.
 */

import type { GraphJson, Snapshot } from "./protocol.js";

export interface NodeView {
  id: string;
  kind: "wire" | "tactic" | "merge";
  label: string;
  x: number;
  y: number;
  w: number;
  h: number;
  isBoundary: boolean;
  highlighted: boolean;
}

export interface EdgeView {
  from: string;
  to: string;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  port: string | null;
}

export interface ChipView {
  node: string;
  goals: string[];
  sequents: string[];
  wiretype: string;
  onOutput: boolean;
  x: number;
  y: number;
  highlighted: boolean;
}

export interface ViewModel {
  nodes: NodeView[];
  edges: EdgeView[];
  chips: ChipView[];
  width: number;
  height: number;
}

const MARGIN = 40;
const COL_GAP = 150;
const ROW_GAP = 80;

const SIZES: Record<string, [number, number]> = {
  tactic: [96, 36],
  merge: [14, 14],
  wire: [8, 8],
  goal: [84, 26],
};

function distances(graph: GraphJson): Map<string, number> {
  const dist = new Map<string, number>();
  const queue: string[] = [];
  for (const v of graph.inputs) {
    dist.set(v, 0);
    queue.push(v);
  }
  const out = new Map<string, string[]>();
  for (const e of graph.edges) {
    const lst = out.get(e.source) ?? [];
    lst.push(e.target);
    out.set(e.source, lst);
  }
  while (queue.length) {
    const v = queue.shift()!;
    for (const n of out.get(v) ?? []) {
      if (!dist.has(n)) {
        dist.set(n, dist.get(v)! + 1);
        queue.push(n);
      }
    }
  }
  return dist;
}

export function layoutSnapshot(snap: Snapshot): ViewModel {
  const graph = snap.graph;
  const dist = distances(graph);
  let maxKnown = 0;
  for (const d of dist.values()) maxKnown = Math.max(maxKnown, d);

  const layerOf = new Map<string, number>();
  for (const v of graph.vertices) {
    layerOf.set(v.id, dist.get(v.id) ?? maxKnown + 1);
  }

  const columns = new Map<number, string[]>();
  for (const v of graph.vertices) {
    const layer = layerOf.get(v.id)!;
    const col = columns.get(layer) ?? [];
    col.push(v.id);
    columns.set(layer, col);
  }

  const pos = new Map<string, [number, number]>();
  let maxRows = 1;
  for (const [layer, ids] of columns) {
    ids.sort();
    maxRows = Math.max(maxRows, ids.length);
    ids.forEach((id, row) => {
      pos.set(id, [MARGIN + layer * COL_GAP, MARGIN + row * ROW_GAP]);
    });
  }

  const lastSite = snap.trace_tail.length
    ? snap.trace_tail[snap.trace_tail.length - 1].site
    : null;
  const highlightIds = new Set<string>();
  if (lastSite) {
    highlightIds.add(lastSite.goal_node);
    if (lastSite.node) highlightIds.add(lastSite.node);
  }

  const boundary = new Set([...graph.inputs, ...graph.outputs]);
  const byId = new Map(graph.vertices.map((v) => [v.id, v]));

  const nodes: NodeView[] = [];
  for (const v of graph.vertices) {
    if (v.kind === "goal") continue; // rendered as chips below
    const [x, y] = pos.get(v.id)!;
    const [w, h] = SIZES[v.kind];
    const label =
      v.kind === "tactic" ? v.tactic ?? v.id
      : v.kind === "wire" ? v.wiretype ?? ""
      : "";
    nodes.push({
      id: v.id, kind: v.kind, label, x, y, w, h,
      isBoundary: boundary.has(v.id),
      highlighted: highlightIds.has(v.id),
    });
  }

  const edges: EdgeView[] = graph.edges.map((e) => {
    const [x1, y1] = pos.get(e.source)!;
    const [x2, y2] = pos.get(e.target)!;
    return { from: e.source, to: e.target, x1, y1, x2, y2, port: e.port };
  });

  const chips: ChipView[] = snap.goal_positions.map((p) => {
    const [x, y] = pos.get(p.node) ?? [MARGIN, MARGIN];
    const vertex = byId.get(p.node);
    return {
      node: p.node,
      goals: [...p.goals],
      sequents: p.goals.map((g) => snap.goals[g]?.sequent ?? g),
      wiretype: p.wiretype ?? vertex?.wiretype ?? "",
      onOutput: p.on_output,
      x, y,
      highlighted: highlightIds.has(p.node),
    };
  });

  let maxLayer = 0;
  for (const l of layerOf.values()) maxLayer = Math.max(maxLayer, l);
  return {
    nodes, edges, chips,
    width: 2 * MARGIN + (maxLayer + 1) * COL_GAP,
    height: 2 * MARGIN + maxRows * ROW_GAP,
  };
}

/** Goal detail for the inspector panel: the sequent plus the chain of
 * (ancestor goal, tactic) steps that produced it. */
export interface GoalDetail {
  id: string;
  sequent: string;
  hyps: string[];
  concl: string;
  open: boolean;
  trail: { goal: string; rule: string }[];
}

export function inspectGoal(snap: Snapshot, goalId: string): GoalDetail | null {
  const info = snap.goals[goalId];
  if (!info) return null;
  const trail: { goal: string; rule: string }[] = [];
  let cur = info.parent;
  while (cur) {
    const [parentId, rule] = cur;
    trail.push({ goal: parentId, rule });
    cur = snap.goals[parentId]?.parent ?? null;
  }
  return {
    id: goalId,
    sequent: info.sequent,
    hyps: [...info.hyps],
    concl: info.concl,
    open: info.open,
    trail,
  };
}
