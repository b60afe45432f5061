/** Serial request/response client over a line transport.
 *
 * The protocol is strictly one response per request; requests issued
 * while one is in flight queue up behind it.
 */

import type { Request, Response } from "./protocol.js";
import type { Transport } from "./transport.js";

interface Pending {
  resolve: (resp: Response) => void;
  reject: (err: Error) => void;
}

export class LineClient {
  private pending: Pending[] = [];
  private closed = false;

  constructor(private transport: Transport) {
    transport.onLine((line) => {
      const waiter = this.pending.shift();
      if (!waiter) return; // unsolicited line; protocol violation, ignore
      try {
        waiter.resolve(JSON.parse(line) as Response);
      } catch (err) {
        waiter.reject(err as Error);
      }
    });
    transport.onClose(() => {
      this.closed = true;
      for (const waiter of this.pending.splice(0)) {
        waiter.reject(new Error("connection closed"));
      }
    });
  }

  get inFlight(): number {
    return this.pending.length;
  }

  request(req: Request): Promise<Response> {
    if (this.closed) {
      return Promise.reject(new Error("connection closed"));
    }
    return new Promise((resolve, reject) => {
      this.pending.push({ resolve, reject });
      this.transport.send(JSON.stringify(req));
    });
  }

  close(): void {
    this.transport.close();
  }
}
