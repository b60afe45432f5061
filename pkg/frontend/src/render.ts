/** SVG text rendering of a view model (no DOM dependency, usable from
 * tests and the browser alike). */

import type { ChipView, EdgeView, NodeView, ViewModel } from "./layout.js";

function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function renderEdge(e: EdgeView): string {
  const label = e.port
    ? `<text class="port" x="${(e.x1 + e.x2) / 2}" y="${(e.y1 + e.y2) / 2 - 4}">${esc(e.port)}</text>`
    : "";
  return `<line class="wire" x1="${e.x1}" y1="${e.y1}" x2="${e.x2}" y2="${e.y2}"/>` + label;
}

function renderNode(n: NodeView): string {
  const cls = n.highlighted ? `${n.kind} hot` : n.kind;
  if (n.kind === "tactic") {
    return (
      `<g class="${cls}" data-id="${esc(n.id)}">` +
      `<rect x="${n.x - n.w / 2}" y="${n.y - n.h / 2}" width="${n.w}" height="${n.h}" rx="4"/>` +
      `<text x="${n.x}" y="${n.y + 5}" text-anchor="middle">${esc(n.label)}</text></g>`
    );
  }
  if (n.kind === "merge") {
    return `<circle class="${cls}" data-id="${esc(n.id)}" cx="${n.x}" cy="${n.y}" r="${n.w / 2}"/>`;
  }
  const dot = `<circle class="${cls}" data-id="${esc(n.id)}" cx="${n.x}" cy="${n.y}" r="${n.isBoundary ? 5 : 3}"/>`;
  const label = n.label
    ? `<text class="wtype" x="${n.x}" y="${n.y - 8}" text-anchor="middle">${esc(n.label)}</text>`
    : "";
  return dot + label;
}

function renderChip(c: ChipView): string {
  const cls = ["chip", c.onOutput ? "done" : "", c.highlighted ? "hot" : ""]
    .filter(Boolean)
    .join(" ");
  const label = c.goals.length ? c.goals.join(",") : "[]";
  const title = c.sequents.join(" ; ");
  return (
    `<g class="${cls}" data-node="${esc(c.node)}" data-goals="${esc(c.goals.join(","))}">` +
    `<title>${esc(title)}</title>` +
    `<rect x="${c.x - 42}" y="${c.y - 13}" width="84" height="26" rx="12"/>` +
    `<text x="${c.x}" y="${c.y + 4}" text-anchor="middle">${esc(label)}</text></g>`
  );
}

export function renderSvg(vm: ViewModel): string {
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${vm.width} ${vm.height}" width="${vm.width}" height="${vm.height}">`,
    ...vm.edges.map(renderEdge),
    ...vm.nodes.map(renderNode),
    ...vm.chips.map(renderChip),
    "</svg>",
  ];
  return parts.join("\n");
}
