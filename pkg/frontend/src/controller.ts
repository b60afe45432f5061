/** Session controller: one live protocol session, strictly one request
 * in flight, with the latest snapshot and the last protocol error.
 */

import { LineClient } from "./client.js";
import { inspectGoal, layoutSnapshot, type GoalDetail, type ViewModel } from "./layout.js";
import { isError, type Request, type Snapshot } from "./protocol.js";
import type { Transport } from "./transport.js";

export class SessionController {
  snapshot: Snapshot | null = null;
  busy = false;
  lastError: string | null = null;
  finished = false;

  private client: LineClient;

  constructor(transport: Transport) {
    this.client = new LineClient(transport);
  }

  /** The current rendered model; a pure function of the snapshot. */
  view(): ViewModel | null {
    return this.snapshot ? layoutSnapshot(this.snapshot) : null;
  }

  inspect(goalId: string): GoalDetail | null {
    return this.snapshot ? inspectGoal(this.snapshot, goalId) : null;
  }

  get historyDepth(): number {
    return this.snapshot?.history_depth ?? 0;
  }

  get openBranches(): number {
    return this.snapshot?.open_branches ?? 0;
  }

  private async exec(req: Request): Promise<Snapshot | null> {
    if (this.busy) throw new Error("request already in flight");
    this.busy = true;
    try {
      const resp = await this.client.request(req);
      if (isError(resp)) {
        this.lastError = resp.error;
        return null;
      }
      this.lastError = null;
      this.snapshot = resp;
      if (resp.finished) this.finished = true;
      return resp;
    } finally {
      this.busy = false;
    }
  }

  refresh(): Promise<Snapshot | null> {
    return this.exec({ cmd: "snapshot" });
  }

  step(branch = 0): Promise<Snapshot | null> {
    return this.exec({ cmd: "step", branch });
  }

  backtrack(): Promise<Snapshot | null> {
    return this.exec({ cmd: "backtrack" });
  }

  finish(): Promise<Snapshot | null> {
    return this.exec({ cmd: "finish" });
  }

  close(): void {
    this.client.close();
  }
}
