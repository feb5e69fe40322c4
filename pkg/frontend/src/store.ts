// Console state: a pure fold over server messages plus local UI mode.
// The view renders from this store only; every metric shown comes from
// the server (the console computes nothing itself).

import type { SceneMessage, ServerMessage, StateMessage, SummaryMessage } from './protocol.js';

export type Connection = 'connecting' | 'open' | 'closed';
export type InputMode = 'pointer' | 'keyboard';

export interface ConsoleState {
  connection: Connection;
  scene: SceneMessage | null;
  state: StateMessage | null;
  summary: SummaryMessage | null;
  inputMode: InputMode;
}

export function initialState(): ConsoleState {
  return {
    connection: 'connecting',
    scene: null,
    state: null,
    summary: null,
    inputMode: 'pointer',
  };
}

export function applyServerMessage(ui: ConsoleState, msg: ServerMessage): ConsoleState {
  switch (msg.kind) {
    case 'scene':
      return { ...ui, scene: msg.scene };
    case 'summary':
      return { ...ui, summary: msg.summary };
    case 'state': {
      // A fresh trial clears the previous end-of-trial overlay.
      const startedNew =
        ui.state?.trial.phase !== 'running' && msg.state.trial.phase === 'running';
      return { ...ui, state: msg.state, summary: startedNew ? null : ui.summary };
    }
  }
}

export function setConnection(ui: ConsoleState, connection: Connection): ConsoleState {
  return connection === 'open'
    ? { ...ui, connection, state: null, summary: null }
    : { ...ui, connection };
}

export function startEnabled(ui: ConsoleState): boolean {
  return ui.connection === 'open' && ui.state?.trial.phase !== 'running';
}

export function stopEnabled(ui: ConsoleState): boolean {
  const phase = ui.state?.trial.phase;
  return ui.connection === 'open' && (phase === 'running' || phase === 'done');
}

export function timerText(ui: ConsoleState): string {
  const trial = ui.state?.trial;
  if (!trial || trial.phase === 'idle' || trial.elapsed_s === null) return '';
  return `${trial.elapsed_s.toFixed(1)} s`;
}

export function collisionLit(ui: ConsoleState): boolean {
  // Server truth only: lit exactly when the server says the threshold is crossed.
  return ui.state?.collision === true;
}
