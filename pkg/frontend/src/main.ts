// Console entry point: socket lifecycle, rendering, and input wiring.

import { StripChart } from './chart.js';
import { Camera, depthCue, dragToWorld, fitCamera, project, wheelToWorld } from './projection.js';
import { ControlMessage, parseServerMessage, Vec3 } from './protocol.js';
import { JointSteering, PointerSteering } from './steering.js';
import {
  applyServerMessage,
  collisionLit,
  ConsoleState,
  initialState,
  setConnection,
  startEnabled,
  stopEnabled,
  timerText,
} from './store.js';

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const sceneCanvas = $('scene') as unknown as HTMLCanvasElement;
const armCanvas = $('armview') as unknown as HTMLCanvasElement;
const chartCanvas = $('chart') as unknown as HTMLCanvasElement;

let ui: ConsoleState = initialState();
const chart = new StripChart(30);
const pointer = new PointerSteering();
const joints = new JointSteering();
let panDeg = 15;
let clutchEngaged = false;
let socket: WebSocket | null = null;
let retryMs = 500;

function wsEndpoint(): string {
  const params = new URLSearchParams(window.location.search);
  const explicit = params.get('ws');
  if (explicit) return explicit;
  const proto = window.location.protocol === 'https:' ? 'wss' : 'ws';
  return `${proto}://${window.location.host}/ws`;
}

function send(msg: ControlMessage): void {
  if (socket && socket.readyState === WebSocket.OPEN) {
    socket.send(JSON.stringify(msg));
  }
}

function connect(): void {
  ui = setConnection(ui, 'connecting');
  const ws = new WebSocket(wsEndpoint());
  socket = ws;
  ws.onopen = () => {
    ui = setConnection(ui, 'open');
    retryMs = 500;
    chart.clear();
  };
  ws.onmessage = (ev: MessageEvent) => {
    const msg = parseServerMessage(String(ev.data));
    if (!msg) {
      console.warn('ignoring malformed server message');
      return;
    }
    ui = applyServerMessage(ui, msg);
    if (msg.kind === 'state') {
      chart.push(msg.state.t, msg.state.pos_err_mm, msg.state.ori_err_deg);
    }
  };
  ws.onclose = () => {
    if (socket === ws) {
      ui = setConnection(ui, 'closed');
      socket = null;
      setTimeout(connect, retryMs);
      retryMs = Math.min(retryMs * 2, 5000);
    }
  };
  ws.onerror = () => ws.close();
}

// ---------------------------------------------------------------------
// Input: pointer steering (drag in-plane, wheel for depth) and keyboard
// joint mode. Messages stream at 30 Hz while the input is active.
// ---------------------------------------------------------------------

let dragging = false;
let lastPx: [number, number] | null = null;
let activeUntil = 0;

function markActive(): void {
  activeUntil = performance.now() + 250;
}

function camera(): Camera {
  const poly = ui.scene?.wire.polyline ?? [[-0.2, 0, -0.1], [0.2, 0, 0.1]] as Vec3[];
  return fitCamera(poly, sceneCanvas.width, sceneCanvas.height, panDeg);
}

sceneCanvas.addEventListener('pointerdown', (ev) => {
  if (ui.inputMode !== 'pointer') return;
  dragging = true;
  lastPx = [ev.offsetX, ev.offsetY];
  sceneCanvas.setPointerCapture(ev.pointerId);
});

sceneCanvas.addEventListener('pointermove', (ev) => {
  if (!dragging || !lastPx || ui.inputMode !== 'pointer') return;
  const delta = dragToWorld(camera(), ev.offsetX - lastPx[0], ev.offsetY - lastPx[1]);
  lastPx = [ev.offsetX, ev.offsetY];
  pointer.moveBy(delta);
  markActive();
});

sceneCanvas.addEventListener('pointerup', () => {
  dragging = false;
  lastPx = null;
});

sceneCanvas.addEventListener('wheel', (ev) => {
  if (ui.inputMode !== 'pointer') return;
  ev.preventDefault();
  pointer.moveBy(wheelToWorld(ev.deltaY));
  markActive();
});

window.addEventListener('keydown', (ev) => {
  if (ui.inputMode !== 'keyboard') return;
  if (joints.handleKey(ev.key)) {
    markActive();
    ev.preventDefault();
  }
});

setInterval(() => {
  if (performance.now() > activeUntil) return;
  send(ui.inputMode === 'pointer' ? pointer.message() : joints.message());
}, 1000 / 30);

// ---------------------------------------------------------------------
// Control panel.
// ---------------------------------------------------------------------

const startBtn = $('start') as unknown as HTMLButtonElement;
const stopBtn = $('stop') as unknown as HTMLButtonElement;
const clutchBtn = $('clutch') as unknown as HTMLButtonElement;
const panSlider = $('pan') as unknown as HTMLInputElement;

startBtn.onclick = () => send({ type: 'start' });
stopBtn.onclick = () => send({ type: 'stop' });
clutchBtn.onclick = () => {
  clutchEngaged = !clutchEngaged;
  send({ type: 'clutch', engaged: clutchEngaged });
};
panSlider.oninput = () => {
  panDeg = Number(panSlider.value);
  $('pan-value').textContent = `${panDeg}°`;
};
for (const mode of ['pointer', 'keyboard'] as const) {
  ($(`mode-${mode}`) as unknown as HTMLInputElement).onchange = () => {
    ui = { ...ui, inputMode: mode };
  };
}

// ---------------------------------------------------------------------
// Rendering.
// ---------------------------------------------------------------------

function drawScene(): void {
  const ctx = sceneCanvas.getContext('2d')!;
  const w = sceneCanvas.width;
  const h = sceneCanvas.height;
  ctx.clearRect(0, 0, w, h);
  if (!ui.scene) return;
  const cam = camera();

  // wire: centerline stroked at tube width
  const tubePx = Math.max(2, 2 * ui.scene.wire.tube_radius * cam.pxPerM);
  ctx.lineWidth = tubePx;
  ctx.lineCap = 'round';
  ctx.lineJoin = 'round';
  ctx.strokeStyle = '#8a7f6a';
  ctx.beginPath();
  ui.scene.wire.polyline.forEach((p, i) => {
    const q = project(cam, p);
    if (i === 0) ctx.moveTo(q.x, q.y);
    else ctx.lineTo(q.x, q.y);
  });
  ctx.stroke();

  if (!ui.state) return;
  const ring = ui.state.ring;
  const q = project(cam, ring.p);
  const cue = depthCue(q.depth);
  const rInner = ui.scene.ring.inner_radius * cam.pxPerM * cue.scale;
  const rOuter = ui.scene.ring.outer_radius * cam.pxPerM * cue.scale;
  const lit = collisionLit(ui);
  const tone = Math.round(200 * cue.shade);
  ctx.lineWidth = rOuter - rInner;
  ctx.strokeStyle = lit ? '#e5484d' : `rgb(${tone * 0.4}, ${tone}, ${tone * 0.9})`;
  ctx.beginPath();
  ctx.arc(q.x, q.y, (rInner + rOuter) / 2, 0, 2 * Math.PI);
  ctx.stroke();

  // ring axis hint
  const axis = rotateX(ring.q);
  const tip = project(cam, [
    ring.p[0] + axis[0] * 0.06,
    ring.p[1] + axis[1] * 0.06,
    ring.p[2] + axis[2] * 0.06,
  ]);
  ctx.lineWidth = 2;
  ctx.strokeStyle = '#f0f0f0';
  ctx.beginPath();
  ctx.moveTo(q.x, q.y);
  ctx.lineTo(tip.x, tip.y);
  ctx.stroke();

  if (ui.state.stale) {
    ctx.fillStyle = '#e5484d';
    ctx.font = '14px sans-serif';
    ctx.fillText('input stale', 12, 20);
  }
}

// Apply quaternion (w,x,y,z) to the +x axis.
function rotateX(qr: [number, number, number, number]): Vec3 {
  const [w, x, y, z] = qr;
  return [1 - 2 * (y * y + z * z), 2 * (x * y + w * z), 2 * (x * z - w * y)];
}

function drawArm(): void {
  const ctx = armCanvas.getContext('2d')!;
  const w = armCanvas.width;
  const h = armCanvas.height;
  ctx.clearRect(0, 0, w, h);
  ctx.fillStyle = '#777';
  ctx.font = '11px sans-serif';
  ctx.fillText('arm', 8, 14);
  const arm = ui.state?.arm;
  if (!arm) {
    ctx.fillText('(pose input: no joint data)', 8, h / 2);
    return;
  }
  const pts = [arm.shoulder, arm.elbow, arm.wrist, arm.fingertip];
  const cam = fitCamera(pts, w, h, panDeg, 0.2);
  ctx.strokeStyle = '#9ecbff';
  ctx.lineWidth = 4;
  ctx.beginPath();
  pts.forEach((p, i) => {
    const q = project(cam, p);
    if (i === 0) ctx.moveTo(q.x, q.y);
    else ctx.lineTo(q.x, q.y);
  });
  ctx.stroke();
  ctx.fillStyle = '#fff';
  for (const p of pts) {
    const q = project(cam, p);
    ctx.beginPath();
    ctx.arc(q.x, q.y, 3, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function drawChart(): void {
  const ctx = chartCanvas.getContext('2d')!;
  const w = chartCanvas.width;
  const h = chartCanvas.height;
  ctx.clearRect(0, 0, w, h);
  const samples = chart.samples();
  const threshold = ui.scene?.threshold_mm ?? 17.5;
  const maxErr = Math.max(threshold * 1.5, ...samples.map((s) => s.posErrMm));
  const [t0, t1] = chart.span();
  const px = (t: number) => ((t - t0) / (t1 - t0 || 1)) * w;
  const py = (v: number) => h - (v / maxErr) * (h - 10) - 5;

  // threshold line
  ctx.strokeStyle = '#e5484d';
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.moveTo(0, py(threshold));
  ctx.lineTo(w, py(threshold));
  ctx.stroke();
  ctx.setLineDash([]);

  if (samples.length > 1) {
    ctx.strokeStyle = '#53b1fd';
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    samples.forEach((s, i) => {
      if (i === 0) ctx.moveTo(px(s.t), py(s.posErrMm));
      else ctx.lineTo(px(s.t), py(s.posErrMm));
    });
    ctx.stroke();
  }
  ctx.fillStyle = '#888';
  ctx.font = '10px sans-serif';
  ctx.fillText(`pos err, last ${chart.windowS}s (red: ${threshold.toFixed(1)} mm)`, 6, 12);
}

function render(): void {
  drawScene();
  drawArm();
  drawChart();

  $('banner').hidden = ui.connection === 'open';
  $('banner').textContent =
    ui.connection === 'connecting' ? 'connecting…' : 'connection lost — retrying';

  startBtn.disabled = !startEnabled(ui);
  stopBtn.disabled = !stopEnabled(ui);
  clutchBtn.textContent = clutchEngaged ? 'clutch: engaged' : 'clutch: off';
  clutchBtn.classList.toggle('engaged', clutchEngaged);

  const st = ui.state;
  $('pos-err').textContent = st ? `${st.pos_err_mm.toFixed(1)} mm` : '--';
  $('ori-err').textContent = st ? `${st.ori_err_deg.toFixed(1)}°` : '--';
  $('phase').textContent = st ? st.trial.phase : '--';
  $('timer').textContent = timerText(ui);
  const lamp = $('collision-lamp');
  lamp.classList.toggle('lit', collisionLit(ui));

  const overlay = $('summary');
  if (ui.summary && st?.trial.phase === 'done') {
    overlay.hidden = false;
    $('summary-body').innerHTML = [
      `completed: ${ui.summary.completed ? 'yes' : 'no'}`,
      `time: ${ui.summary.completion_time_s.toFixed(2)} s`,
      `mean position error: ${ui.summary.mean_position_error_mm.toFixed(2)} mm`,
      `mean orientation error: ${ui.summary.mean_orientation_error_deg.toFixed(2)}°`,
      `non-collision: ${ui.summary.non_collision_pct.toFixed(1)}%`,
    ].join('<br>');
  } else {
    overlay.hidden = true;
  }

  requestAnimationFrame(render);
}

connect();
requestAnimationFrame(render);
