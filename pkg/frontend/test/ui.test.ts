/** Live-session test: drives a real engine server over TCP, steps the
 * intro-v2 strategy to ENF, and checks the rendered view against every
 * snapshot along the way. */

import { spawn, type ChildProcess } from "node:child_process";
import * as path from "node:path";
import * as readline from "node:readline";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { SessionController } from "../src/controller.js";
import { renderSvg } from "../src/render.js";
import { TcpTransport } from "../src/transport_node.js";

const REPO_ROOT = path.resolve(__dirname, "..", "..");

let server: ChildProcess;
let port: number;

function startServer(): Promise<number> {
  server = spawn(
    "python3",
    ["-m", "strategraph.cli", "serve",
     "--strategy", "intro-v2", "--goal", "A --> B & C", "--port", "0"],
    { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "inherit"] },
  );
  const rl = readline.createInterface({ input: server.stdout! });
  return new Promise((resolve, reject) => {
    const timer = setTimeout(() => reject(new Error("server did not start")), 15000);
    rl.once("line", (line) => {
      clearTimeout(timer);
      const m = /^LISTENING (\d+)$/.exec(line.trim());
      if (m) resolve(Number(m[1]));
      else reject(new Error(`unexpected banner: ${line}`));
    });
  });
}

beforeAll(async () => {
  port = await startServer();
}, 20000);

afterAll(() => {
  server?.kill();
});

async function connect(): Promise<SessionController> {
  const transport = await TcpTransport.connect("127.0.0.1", port);
  return new SessionController(transport);
}

describe("live debugger session on intro-v2 / A --> B & C", () => {
  it("steps to ENF with rendered goal positions matching every snapshot", async () => {
    const session = await connect();
    try {
      let snap = await session.refresh();
      expect(snap).not.toBeNull();
      expect(snap!.is_enf).toBe(false);

      let steps = 0;
      while (!snap!.is_enf) {
        expect(steps++).toBeLessThan(100);
        snap = await session.step(0);
        expect(snap, session.lastError ?? "").not.toBeNull();

        const vm = session.view()!;
        // rendered chips are exactly the snapshot's goal positions
        expect(vm.chips.map((c) => c.node)).toEqual(
          snap!.goal_positions.map((p) => p.node),
        );
        expect(vm.chips.map((c) => c.goals)).toEqual(
          snap!.goal_positions.map((p) => p.goals),
        );
        const svg = renderSvg(vm);
        for (const p of snap!.goal_positions) {
          expect(svg).toContain(`data-node="${p.node}"`);
        }
      }

      // at ENF both subgoals sit on the single output wire
      const sequents = snap!.goal_positions
        .flatMap((p) => p.goals)
        .map((g) => snap!.goals[g].sequent)
        .sort();
      expect(sequents).toEqual(["A |- B", "A |- C"]);
      expect(snap!.goal_positions.every((p) => p.on_output)).toBe(true);
    } finally {
      session.close();
    }
  }, 30000);

  it("restores the previous rendered view on backtrack", async () => {
    const session = await connect();
    try {
      await session.refresh();
      await session.step(0);
      const before = renderSvg(session.view()!);
      const depthBefore = session.historyDepth;

      await session.step(0);
      expect(renderSvg(session.view()!)).not.toBe(before);

      const snap = await session.backtrack();
      expect(snap).not.toBeNull();
      expect(renderSvg(session.view()!)).toBe(before);
      expect(session.historyDepth).toBe(depthBefore);
    } finally {
      session.close();
    }
  }, 30000);

  it("rejects backtrack at the initial state", async () => {
    const session = await connect();
    try {
      await session.refresh();
      const resp = await session.backtrack();
      expect(resp).toBeNull();
      expect(session.lastError).toBe("history_empty");
    } finally {
      session.close();
    }
  }, 30000);

  it("reports remaining subgoals on finish", async () => {
    const session = await connect();
    try {
      await session.refresh();
      await session.step(0);
      const snap = await session.finish();
      expect(snap).not.toBeNull();
      expect(snap!.finished).toBe(true);
      expect(snap!.remaining_subgoals!.length).toBeGreaterThan(0);
      for (const g of snap!.remaining_subgoals!) {
        expect(typeof g.sequent).toBe("string");
      }
      expect(session.finished).toBe(true);
    } finally {
      session.close();
    }
  }, 30000);
});
