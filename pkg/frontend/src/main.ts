/** Browser entry point: connect to the bridge, render, wire up the
 * step / backtrack / finish controls and the goal inspector. */

import { SessionController } from "./controller.js";
import { renderSvg } from "./render.js";
import { WebSocketTransport } from "./transport.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

let controller: SessionController | null = null;

function setStatus(text: string, isError = false): void {
  const banner = el<HTMLDivElement>("status");
  banner.textContent = text;
  banner.className = isError ? "error" : "";
}

function redraw(): void {
  if (!controller || !controller.snapshot) return;
  const vm = controller.view()!;
  el<HTMLDivElement>("canvas").innerHTML = renderSvg(vm);
  const snap = controller.snapshot;
  setStatus(
    `step ${snap.trace_len} | branches ${snap.open_branches} | ` +
    `history ${snap.history_depth}${snap.is_enf ? " | ENF" : ""}`,
  );
  const sel = el<HTMLSelectElement>("branch");
  sel.innerHTML = "";
  const count = Math.max(snap.open_branches, 1);
  for (let i = 0; i < count; i++) {
    const opt = document.createElement("option");
    opt.value = String(i);
    opt.textContent = `branch ${i}`;
    sel.appendChild(opt);
  }
  sel.disabled = snap.open_branches <= 1;

  for (const chip of el<HTMLDivElement>("canvas").querySelectorAll(".chip")) {
    chip.addEventListener("click", () => {
      const goals = (chip.getAttribute("data-goals") ?? "").split(",").filter(Boolean);
      showInspector(goals);
    });
  }
  if (snap.finished && snap.remaining_subgoals) {
    const lines = snap.remaining_subgoals.map((g) => `${g.id}: ${g.sequent}`);
    el<HTMLPreElement>("inspector").textContent =
      "Remaining subgoals:\n" + (lines.join("\n") || "(none)");
  }
}

function showInspector(goalIds: string[]): void {
  if (!controller) return;
  const parts: string[] = [];
  for (const gid of goalIds) {
    const detail = controller.inspect(gid);
    if (!detail) continue;
    parts.push(`${detail.id}  ${detail.sequent}${detail.open ? "" : "  (closed)"}`);
    for (const step of detail.trail) {
      parts.push(`  from ${step.goal} via ${step.rule}`);
    }
  }
  el<HTMLPreElement>("inspector").textContent = parts.join("\n") || "(no detail)";
}

function guard(action: () => Promise<unknown>): void {
  if (!controller || controller.busy || controller.finished) return;
  setControls(true);
  action()
    .then(() => {
      if (controller?.lastError) setStatus(controller.lastError, true);
      redraw();
    })
    .catch((err) => setStatus(String(err), true))
    .finally(() => setControls(false));
}

function setControls(disabled: boolean): void {
  for (const id of ["step", "backtrack", "finish"]) {
    el<HTMLButtonElement>(id).disabled = disabled;
  }
}

export function boot(): void {
  el<HTMLButtonElement>("connect").addEventListener("click", () => {
    const url = el<HTMLInputElement>("url").value;
    WebSocketTransport.connect(url)
      .then((transport) => {
        controller?.close();
        controller = new SessionController(transport);
        setStatus(`connected to ${url}`);
        guard(() => controller!.refresh());
      })
      .catch((err) => setStatus(String(err), true));
  });
  el<HTMLButtonElement>("step").addEventListener("click", () => {
    const branch = Number(el<HTMLSelectElement>("branch").value || "0");
    guard(() => controller!.step(branch));
  });
  el<HTMLButtonElement>("backtrack").addEventListener("click", () =>
    guard(() => controller!.backtrack()),
  );
  el<HTMLButtonElement>("finish").addEventListener("click", () =>
    guard(() => controller!.finish()),
  );
}

if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", boot);
}
