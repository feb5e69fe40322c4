// Message schema of the console's WebSocket bridge.
//
// The server pushes an initial scene description, then state snapshots
// (no "type" field) at the loop rate, plus a one-shot summary when a
// trial finishes. Anything that doesn't validate is dropped by the
// caller; the view must never change on a malformed message.

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number];

export interface StateMessage {
  t: number;
  ring: { p: Vec3; q: Quat };
  arm: { shoulder: Vec3; elbow: Vec3; wrist: Vec3; fingertip: Vec3 } | null;
  pos_err_mm: number;
  ori_err_deg: number;
  collision: boolean;
  trial: { phase: string; elapsed_s: number | null; progress_s: number };
  stale: boolean;
}

export interface SceneMessage {
  type: 'scene';
  wire: { name: string; polyline: Vec3[]; tube_radius: number; length: number };
  ring: { inner_radius: number; outer_radius: number };
  threshold_mm: number;
  loop_rate: number;
}

export interface SummaryMessage {
  type: 'summary';
  completed: boolean;
  completion_time_s: number;
  mean_position_error_mm: number;
  mean_orientation_error_deg: number;
  non_collision_pct: number;
}

export type ServerMessage =
  | { kind: 'state'; state: StateMessage }
  | { kind: 'scene'; scene: SceneMessage }
  | { kind: 'summary'; summary: SummaryMessage };

function isVec3(v: unknown): v is Vec3 {
  return Array.isArray(v) && v.length === 3 && v.every((c) => typeof c === 'number' && isFinite(c));
}

function isQuat(v: unknown): v is Quat {
  return Array.isArray(v) && v.length === 4 && v.every((c) => typeof c === 'number' && isFinite(c));
}

export function parseServerMessage(text: string): ServerMessage | null {
  let msg: any;
  try {
    msg = JSON.parse(text);
  } catch {
    return null;
  }
  if (msg === null || typeof msg !== 'object') return null;

  if (msg.type === 'scene') {
    const w = msg.wire;
    if (!w || !Array.isArray(w.polyline) || !w.polyline.every(isVec3)) return null;
    if (typeof msg.threshold_mm !== 'number') return null;
    return { kind: 'scene', scene: msg as SceneMessage };
  }
  if (msg.type === 'summary') {
    if (typeof msg.non_collision_pct !== 'number' || typeof msg.completed !== 'boolean') return null;
    return { kind: 'summary', summary: msg as SummaryMessage };
  }
  if (msg.type !== undefined) return null; // unknown tagged message

  if (!msg.ring || !isVec3(msg.ring.p) || !isQuat(msg.ring.q)) return null;
  if (typeof msg.pos_err_mm !== 'number' || typeof msg.ori_err_deg !== 'number') return null;
  if (typeof msg.collision !== 'boolean' || !msg.trial || typeof msg.trial.phase !== 'string') return null;
  return { kind: 'state', state: msg as StateMessage };
}

export interface InputPoseMessage {
  type: 'input_pose';
  p: Vec3;
  q: Quat;
}

export interface InputJointsMessage {
  type: 'input_joints';
  q: [number, number, number, number, number];
}

export type ControlMessage =
  | { type: 'start' }
  | { type: 'stop' }
  | { type: 'clutch'; engaged: boolean }
  | InputPoseMessage
  | InputJointsMessage;
