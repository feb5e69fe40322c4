// Local input models for the two steering modes.
//
// The pointer target is the operator's "hand": an absolute input pose the
// server maps onto the ring (identity quaternion; the flat view has no
// natural rotation gesture). It deliberately never re-syncs from the ring
// pose, because after a clutch cycle the server's mapping rebases and the
// two frames differ by design.

import type { InputJointsMessage, InputPoseMessage, Vec3 } from './protocol.js';

export class PointerSteering {
  target: Vec3 = [0, 0, 0];

  moveBy(delta: Vec3): void {
    this.target = [
      this.target[0] + delta[0],
      this.target[1] + delta[1],
      this.target[2] + delta[2],
    ];
  }

  message(): InputPoseMessage {
    return { type: 'input_pose', p: [...this.target] as Vec3, q: [1, 0, 0, 0] };
  }
}

const Q4_MAX = (150 * Math.PI) / 180;
const Q_MAX = Math.PI;

// key -> [joint index, sign]
export const JOINT_KEYS: Record<string, [number, number]> = {
  q: [0, 1], a: [0, -1],
  w: [1, 1], s: [1, -1],
  e: [2, 1], d: [2, -1],
  r: [3, 1], f: [3, -1],
  t: [4, 1], g: [4, -1],
};

export class JointSteering {
  joints: [number, number, number, number, number] = [0, 0, 0, 0, 0];
  stepRad = (2 * Math.PI) / 180;

  adjust(index: number, direction: number): void {
    const next = this.joints[index] + direction * this.stepRad;
    const limit = index === 3 ? [0, Q4_MAX] : [-Q_MAX, Q_MAX];
    this.joints[index] = Math.min(Math.max(next, limit[0]), limit[1]);
  }

  handleKey(key: string): boolean {
    const hit = JOINT_KEYS[key.toLowerCase()];
    if (!hit) return false;
    this.adjust(hit[0], hit[1]);
    return true;
  }

  message(): InputJointsMessage {
    return { type: 'input_joints', q: [...this.joints] as JointSteering['joints'] };
  }
}
