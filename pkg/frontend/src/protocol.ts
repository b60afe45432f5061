/** Wire types for the JSON-lines stepping protocol. */

export interface GraphVertex {
  id: string;
  kind: "wire" | "tactic" | "merge" | "goal";
  wiretype?: string;
  tactic?: string;
  goals?: string[];
}

export interface GraphEdge {
  source: string;
  target: string;
  port: string | null;
}

export interface GraphJson {
  vertices: GraphVertex[];
  edges: GraphEdge[];
  inputs: string[];
  outputs: string[];
}

export interface GoalPosition {
  node: string;
  goals: string[];
  wire: string | null;
  wiretype: string;
  on_output: boolean;
}

export interface GoalInfo {
  sequent: string;
  hyps: string[];
  concl: string;
  parent: [string, string] | null;
  open: boolean;
}

export interface TraceSite {
  kind: "eval" | "unfold" | "merge";
  goal_node: string;
  node: string | null;
  port: number | null;
}

export interface TraceEntry {
  step_no: number;
  site: TraceSite;
  tactic: string | null;
  branch_index: number;
  new_goals: string[];
}

export interface Snapshot {
  graph: GraphJson;
  goal_positions: GoalPosition[];
  open_branches: number;
  is_enf: boolean;
  trace_tail: TraceEntry[];
  trace_len: number;
  history_depth: number;
  goals: Record<string, GoalInfo>;
  finished?: boolean;
  remaining_subgoals?: { id: string; sequent: string }[];
}

export interface ProtocolError {
  error: string;
}

export type Response = Snapshot | ProtocolError;

export type Request =
  | { cmd: "snapshot" }
  | { cmd: "step"; branch?: number }
  | { cmd: "backtrack" }
  | { cmd: "finish" };

export function isError(resp: Response): resp is ProtocolError {
  return (resp as ProtocolError).error !== undefined;
}
