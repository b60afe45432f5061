"""Interactive stepping service over newline-delimited JSON.

One session drives one evaluation of one strategy/goal pair. Requests::

    {"cmd": "snapshot"}
    {"cmd": "step", "branch": 0}
    {"cmd": "backtrack"}
    {"cmd": "finish"}

Every successful response carries the current snapshot: the graph, the
goal positions, the number of open branches at the next step site,
whether the state is in ENF, and the tail of the trace (whose records
match the batch evaluator's byte for byte). Errors come back as
``{"error": "no_step"}`` / ``{"error": "history_empty"}`` /
``{"error": "bad_request"}``. `finish` reports the goals still held in
the graph as the remaining subgoals and ends the session.

The same protocol runs over a TCP socket (one session per connection,
served serially) or stdin/stdout.
"""

from __future__ import annotations

import json
import socket
import sys
from typing import Optional

from .engine import (
    HistoryEmpty, NoStep, Stepper, initial_state, is_enf, on_output_wire,
)
from .kernel import parse_goal, term_str
from .strategy import Strategy, graph_to_json

TRACE_TAIL = 5


class DebugSession:
    def __init__(self, strategy: Strategy, goal_text: str,
                 order: Optional[str] = None) -> None:
        goal = parse_goal(goal_text)
        state = initial_state(strategy.graph, strategy.ctx, goal)
        self.stepper = Stepper(state, order=order)
        self.finished = False

    # -- snapshot ------------------------------------------------------------

    def snapshot(self) -> dict:
        state = self.stepper.state
        g = state.graph
        positions = []
        for gn in g.goal_nodes():
            d = g.data(gn)
            outs = g.out_edges(gn)
            positions.append({
                "node": gn,
                "goals": list(d.goals),
                "wire": outs[0].tgt if outs else None,
                "wiretype": d.wiretype,
                "on_output": on_output_wire(g, gn),
            })
        goals = {}
        for gid in sorted(state.proof.goals):
            goal = state.proof.goals[gid]
            parent = state.proof.parent.get(gid)
            goals[gid] = {
                "sequent": goal.sequent_str(),
                "hyps": [term_str(h) for h in goal.hyps],
                "concl": term_str(goal.concl),
                "parent": list(parent) if parent else None,
                "open": gid in state.proof.open,
            }
        return {
            "graph": graph_to_json(g),
            "goal_positions": positions,
            "open_branches": len(self.stepper.branches()),
            "is_enf": is_enf(state),
            "trace_tail": list(state.trace[-TRACE_TAIL:]),
            "trace_len": len(state.trace),
            "history_depth": len(self.stepper.history),
            "goals": goals,
        }

    # -- commands --------------------------------------------------------------

    def handle(self, request: dict) -> dict:
        try:
            return self._handle(request)
        except NoStep:
            return {"error": "no_step"}
        except HistoryEmpty:
            return {"error": "history_empty"}
        except Exception as exc:  # engine errors must not kill the session
            return {"error": f"engine: {exc}"}

    def _handle(self, request: dict) -> dict:
        cmd = request.get("cmd")
        if self.finished:
            return {"error": "session_finished"}
        if cmd == "snapshot":
            return self.snapshot()
        if cmd == "step":
            branch = request.get("branch", 0)
            if not isinstance(branch, int) or branch < 0:
                return {"error": "bad_request"}
            try:
                self.stepper.step(branch)
            except NoStep:
                return {"error": "no_step"}
            return self.snapshot()
        if cmd == "backtrack":
            try:
                self.stepper.backtrack()
            except HistoryEmpty:
                return {"error": "history_empty"}
            return self.snapshot()
        if cmd == "finish":
            state = self.stepper.state
            remaining = [{"id": gid, "sequent": state.proof.goals[gid].sequent_str()}
                         for gid in state.goal_ids_in_graph()]
            self.finished = True
            resp = self.snapshot()
            resp["finished"] = True
            resp["remaining_subgoals"] = remaining
            return resp
        return {"error": "bad_request"}


def _serve_lines(session: DebugSession, rfile, wfile) -> None:
    for line in rfile:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError:
            response = {"error": "bad_request"}
        else:
            response = session.handle(request)
        wfile.write(json.dumps(response, sort_keys=True) + "\n")
        wfile.flush()
        if session.finished:
            break


def serve_stdio(strategy: Strategy, goal_text: str,
                order: Optional[str] = None) -> None:
    session = DebugSession(strategy, goal_text, order)
    _serve_lines(session, sys.stdin, sys.stdout)


def serve_tcp(strategy: Strategy, goal_text: str, port: int,
              order: Optional[str] = None, host: str = "127.0.0.1",
              max_sessions: Optional[int] = None) -> None:
    """Accept connections serially, one fresh session per connection.

    Prints ``LISTENING <port>`` once bound so callers can discover an
    ephemeral port. `max_sessions` bounds the number of connections
    served (None = run until interrupted).
    """
    srv = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    srv.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    srv.bind((host, port))
    srv.listen(1)
    print(f"LISTENING {srv.getsockname()[1]}", flush=True)
    served = 0
    try:
        while max_sessions is None or served < max_sessions:
            conn, _ = srv.accept()
            served += 1
            with conn:
                rfile = conn.makefile("r", encoding="utf-8")
                wfile = conn.makefile("w", encoding="utf-8")
                try:
                    session = DebugSession(strategy, goal_text, order)
                    _serve_lines(session, rfile, wfile)
                except (BrokenPipeError, ConnectionResetError):
                    pass
                except Exception as exc:
                    wfile.write(json.dumps({"error": f"session: {exc}"}) + "\n")
                    wfile.flush()
    finally:
        srv.close()
