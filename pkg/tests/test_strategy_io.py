from __future__ import annotations

import json
import socket
import subprocess
import sys

import pytest

from strategraph.cli import main
from strategraph.debugserver import DebugSession
from strategraph.engine import (
    eval_to_enf, initial_state, output_goal_lists, trace_json,
)
from strategraph.graph import check_well_formed
from strategraph.kernel import parse_goal
from strategraph.strategy import (
    Loader, StrategyFormatError, UnknownStrategy, graph_from_json,
    graph_to_json, load_strategy_data, resolve_strategy, run_strategy,
    save_strategy, export_dot,
)


FIXTURES = ["intro-v1", "intro-v2", "intro-v3", "induct-example"]


# ---------------------------------------------------------------------------
# Loading and round-trips

def test_bundled_fixtures_load_well_formed():
    for name in FIXTURES:
        strat = resolve_strategy(name)
        assert strat.name == name
        assert check_well_formed(strat.graph, strat.ctx.signature) == []


def test_load_save_load_roundtrip():
    for name in FIXTURES:
        first = resolve_strategy(name)
        data = save_strategy(first)
        second = load_strategy_data(data, name)
        assert second.graph == first.graph
        third = load_strategy_data(save_strategy(second), name)
        assert third.graph == second.graph


def test_graph_json_roundtrip_preserves_goal_nodes(intro_v1):
    state = initial_state(intro_v1.graph, intro_v1.ctx, parse_goal("A --> B"))
    data = graph_to_json(state.graph)
    back = graph_from_json(data)
    assert back == state.graph


def test_version_gate(tmp_path):
    bad = {"psgraph_version": 99, "name": "x", "graph": {}}
    with pytest.raises(StrategyFormatError):
        load_strategy_data(bad, "x")


def test_malformed_graph_rejected_on_load(tmp_path):
    data = {
        "psgraph_version": 1, "name": "broken", "goaltypes": [], "tactics": [],
        "graph": {
            "vertices": [
                {"id": "w", "kind": "wire", "wiretype": "any"},
                {"id": "t1", "kind": "tactic", "tactic": "ghost"},
            ],
            "edges": [{"source": "t1", "target": "w", "port": "out_1"},
                      {"source": "t1", "target": "w", "port": "out_2"}],
        },
    }
    with pytest.raises(StrategyFormatError) as exc:
        load_strategy_data(data, "broken")
    assert "fan_in" in str(exc.value)


def test_unknown_strategy():
    with pytest.raises(UnknownStrategy):
        resolve_strategy("does-not-exist")


def test_graph_reference_tactic(tmp_path):
    wrapper = {
        "psgraph_version": 1,
        "name": "wrapper",
        "goaltypes": [
            {"name": "other", "features": [
                {"ftype": "top_level_symbol", "args": ["imp"], "polarity": "negative"},
                {"ftype": "top_level_symbol", "args": ["conj"], "polarity": "negative"}]},
        ],
        "tactics": [
            {"name": "v2", "inputs": ["any"], "outputs": ["other"],
             "impl": "graph:intro-v2"},
        ],
        "graph": {
            "vertices": [
                {"id": "w_in", "kind": "wire", "wiretype": "any"},
                {"id": "t", "kind": "tactic", "tactic": "v2"},
                {"id": "w_out", "kind": "wire", "wiretype": "other"},
            ],
            "edges": [
                {"source": "w_in", "target": "t", "port": "in_1"},
                {"source": "t", "target": "w_out", "port": "out_1"},
            ],
            "inputs": ["w_in"], "outputs": ["w_out"],
        },
    }
    path = tmp_path / "wrapper.json"
    path.write_text(json.dumps(wrapper))
    strat = Loader([tmp_path]).load(path)
    result = run_strategy(strat, "A --> B & C")
    assert result.succeeded
    [(_, goals)] = output_goal_lists(result.enf_states[0])
    assert sorted(g.sequent_str() for g in goals) == ["A |- B", "A |- C"]


def test_reference_cycle_detected(tmp_path):
    loop = {
        "psgraph_version": 1, "name": "loop", "goaltypes": [],
        "tactics": [{"name": "self", "inputs": ["any"], "outputs": ["any"],
                     "impl": "graph:loop"}],
        "graph": {"vertices": [{"id": "w", "kind": "wire", "wiretype": "any"}],
                  "edges": [], "inputs": ["w"], "outputs": ["w"]},
    }
    path = tmp_path / "loop.json"
    path.write_text(json.dumps(loop))
    with pytest.raises(StrategyFormatError) as exc:
        Loader([tmp_path]).load(path)
    assert "cycle" in str(exc.value)


# ---------------------------------------------------------------------------
# CLI

def test_cli_run_success_and_failure(capsys):
    assert main(["run", "--strategy", "intro-v1", "--goal", "A --> B"]) == 0
    out = capsys.readouterr().out
    assert "A |- B" in out

    assert main(["run", "--strategy", "intro-v1", "--goal", "A --> B & C"]) == 1
    assert "no ENF" in capsys.readouterr().err


def test_cli_run_goal_parse_error(capsys):
    assert main(["run", "--strategy", "intro-v1", "--goal", "A --> "]) == 2
    assert "error" in capsys.readouterr().err


def test_cli_check(tmp_path, capsys):
    good = resolve_strategy("intro-v2")
    path = tmp_path / "ok.json"
    path.write_text(json.dumps(save_strategy(good)))
    assert main(["check", str(path)]) == 0
    assert "ok" in capsys.readouterr().out

    bad = save_strategy(good)
    bad["graph"]["edges"].append({"source": "t_split", "target": "w_ms",
                                  "port": "out_3"})
    bad_path = tmp_path / "bad.json"
    bad_path.write_text(json.dumps(bad))
    assert main(["check", str(bad_path)]) == 2
    assert "fan_in" in capsys.readouterr().err


def test_cli_unknown_strategy(capsys):
    assert main(["run", "--strategy", "nope", "--goal", "A"]) == 2
    assert "nope" in capsys.readouterr().err


def test_cli_export_dot(capsys):
    assert main(["export-dot", "intro-v1"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("digraph")
    assert "split" in out and "impI" in out


def test_export_dot_mentions_every_tactic(intro_v3):
    text = export_dot(intro_v3)
    for name in ("split", "impI", "conjI"):
        assert name in text


# ---------------------------------------------------------------------------
# Debug sessions (in-process)

def _session(name: str, goal: str) -> DebugSession:
    return DebugSession(resolve_strategy(name), goal)


def test_debug_step_sequence_matches_batch_trace():
    strat = resolve_strategy("intro-v2")
    goal = "A --> B & C"
    state = initial_state(strat.graph, strat.ctx, parse_goal(goal))
    batch = next(eval_to_enf(state, fuel=10_000))
    batch_lines = [trace_json(e) for e in batch.trace]

    session = _session("intro-v2", goal)
    got_lines = []
    while True:
        resp = session.handle({"cmd": "step", "branch": 0})
        if "error" in resp:
            break
        got_lines.append(trace_json(resp["trace_tail"][-1]))
        if resp["is_enf"]:
            break
    assert got_lines == batch_lines


def test_debug_snapshot_graphs_stay_well_formed():
    strat = resolve_strategy("intro-v2")
    session = _session("intro-v2", "A --> B & C")
    for _ in range(40):
        resp = session.handle({"cmd": "step"})
        if "error" in resp or resp["is_enf"]:
            break
        back = graph_from_json(resp["graph"])
        assert check_well_formed(back, strat.ctx.signature) == []


def test_debug_backtrack_restores_previous_snapshot():
    session = _session("intro-v1", "A --> B")
    before = session.handle({"cmd": "snapshot"})
    session.handle({"cmd": "step"})
    after = session.handle({"cmd": "backtrack"})
    before.pop("history_depth"), after.pop("history_depth")
    assert json.dumps(before, sort_keys=True) == json.dumps(after, sort_keys=True)


def test_debug_backtrack_at_root_errors():
    session = _session("intro-v1", "A --> B")
    assert session.handle({"cmd": "backtrack"}) == {"error": "history_empty"}


def test_debug_no_step_at_enf():
    session = _session("intro-v1", "A --> B")
    while True:
        resp = session.handle({"cmd": "step"})
        assert "error" not in resp
        if resp["is_enf"]:
            break
    assert session.handle({"cmd": "step"}) == {"error": "no_step"}


def test_debug_finish_reports_remaining_subgoals():
    session = _session("intro-v1", "A --> B")
    session.handle({"cmd": "step"})  # split has run; goal in flight
    resp = session.handle({"cmd": "finish"})
    assert resp["finished"] is True
    assert [g["sequent"] for g in resp["remaining_subgoals"]] == ["|- A --> B"]
    assert session.handle({"cmd": "snapshot"}) == {"error": "session_finished"}


def test_debug_goal_positions_match_graph():
    session = _session("intro-v2", "A --> B & C")
    for _ in range(6):
        resp = session.handle({"cmd": "step"})
        graph = graph_from_json(resp["graph"])
        in_graph = {v for v in graph.vertices()
                    for d in [graph.data(v)] if type(d).__name__ == "GoalData"}
        assert {p["node"] for p in resp["goal_positions"]} == in_graph


def test_debug_bad_request():
    session = _session("intro-v1", "A")
    assert session.handle({"cmd": "frobnicate"}) == {"error": "bad_request"}
    assert session.handle({"cmd": "step", "branch": -1}) == {"error": "bad_request"}


# ---------------------------------------------------------------------------
# Protocol transports

def _readline_json(stream) -> dict:
    line = stream.readline()
    assert line, "server closed the stream unexpectedly"
    return json.loads(line)


def test_protocol_over_stdio():
    proc = subprocess.Popen(
        [sys.executable, "-m", "strategraph.cli", "serve", "--stdio",
         "--strategy", "intro-v1", "--goal", "A --> B"],
        stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True)
    try:
        def send(cmd: dict) -> dict:
            proc.stdin.write(json.dumps(cmd) + "\n")
            proc.stdin.flush()
            return _readline_json(proc.stdout)

        snap = send({"cmd": "snapshot"})
        assert snap["is_enf"] is False and snap["trace_len"] == 0
        for _ in range(30):
            resp = send({"cmd": "step"})
            if resp.get("is_enf"):
                break
        assert resp["is_enf"] is True
        fin = send({"cmd": "finish"})
        assert fin["finished"] is True
        proc.wait(timeout=10)
    finally:
        proc.kill()


def test_protocol_over_tcp():
    proc = subprocess.Popen(
        [sys.executable, "-m", "strategraph.cli", "serve",
         "--strategy", "intro-v1", "--goal", "A --> B",
         "--port", "0", "--max-sessions", "1"],
        stdout=subprocess.PIPE, text=True)
    try:
        banner = proc.stdout.readline().strip()
        assert banner.startswith("LISTENING ")
        port = int(banner.split()[1])
        with socket.create_connection(("127.0.0.1", port), timeout=10) as conn:
            conn.settimeout(10)
            rfile = conn.makefile("r")
            wfile = conn.makefile("w")

            def send(cmd: dict) -> dict:
                wfile.write(json.dumps(cmd) + "\n")
                wfile.flush()
                return _readline_json(rfile)

            snap = send({"cmd": "snapshot"})
            assert snap["open_branches"] >= 1
            stepped = send({"cmd": "step"})
            assert stepped["trace_len"] == 1
            back = send({"cmd": "backtrack"})
            assert back["trace_len"] == 0
            fin = send({"cmd": "finish"})
            assert fin["finished"] is True
        proc.wait(timeout=10)
    finally:
        proc.kill()
