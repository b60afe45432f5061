/** Line-oriented transports for the stepping protocol.
 *
 * The browser build uses a WebSocket to a local bridge that pipes frames
 * to the server's TCP socket one line per message; tests use the node
 * TCP transport from transport_node.ts directly.
 */

export interface Transport {
  send(line: string): void;
  onLine(cb: (line: string) => void): void;
  onClose(cb: () => void): void;
  close(): void;
}

export class WebSocketTransport implements Transport {
  private lineCb: ((line: string) => void) | null = null;
  private closeCb: (() => void) | null = null;

  constructor(private ws: WebSocket) {
    ws.onmessage = (ev) => {
      for (const line of String(ev.data).split("\n")) {
        if (line.trim() && this.lineCb) this.lineCb(line);
      }
    };
    ws.onclose = () => this.closeCb?.();
  }

  static connect(url: string): Promise<WebSocketTransport> {
    return new Promise((resolve, reject) => {
      const ws = new WebSocket(url);
      ws.onopen = () => resolve(new WebSocketTransport(ws));
      ws.onerror = () => reject(new Error(`cannot connect to ${url}`));
    });
  }

  send(line: string): void {
    this.ws.send(line + "\n");
  }

  onLine(cb: (line: string) => void): void {
    this.lineCb = cb;
  }

  onClose(cb: () => void): void {
    this.closeCb = cb;
  }

  close(): void {
    this.ws.close();
  }
}
