// Console entry point: websocket session, canvas painting, status chrome.

import { encodePress, parseServerMessage, Snapshot } from './protocol.js';
import {
  buildDrawList,
  CellPatch,
  ConsoleOptions,
  DrawItem,
  robotFrameHandler,
} from './render_model.js';
import { PressDispatcher } from './input.js';

const PX_PER_M = 90;
const RETRY_MS = 1500;

const canvas = document.getElementById('view') as HTMLCanvasElement;
const ctx = canvas.getContext('2d')!;
const statusEl = document.getElementById('status')!;
const warnEl = document.getElementById('warnings')!;
const blindfoldEl = document.getElementById('blindfold') as HTMLInputElement;

let socket: WebSocket | null = null;
let connected = false;
let latest: Snapshot | null = null;
let drawQueued = false;
let skipped = 0;

const options: ConsoleOptions = { blindfold: false };

const dispatcher = new PressDispatcher(
  (button) => {
    if (!connected || socket === null) return false;
    socket.send(encodePress(button, Date.now()));
    flashButton(button);
    return true;
  },
  (message) => { warnEl.textContent = message; },
);

function connect(): void {
  const url = new URLSearchParams(location.search).get('ws')
    ?? 'ws://127.0.0.1:8765';
  statusEl.textContent = `connecting to ${url} ...`;
  socket = new WebSocket(url);

  socket.onopen = () => {
    connected = true;
    warnEl.textContent = '';
  };
  socket.onmessage = (event: MessageEvent) => {
    const msg = parseServerMessage(String(event.data));
    if (msg === null) {
      skipped += 1;
      warnEl.textContent = `skipped ${skipped} malformed message(s)`;
      return;
    }
    if (msg.type === 'hello') {
      statusEl.textContent = `connected (proto ${msg.proto}) scenario=${msg.scenario}`;
    } else if (msg.type === 'error') {
      warnEl.textContent = `server: ${msg.message}`;
    } else {
      latest = msg;               // coalesce: render only the newest snapshot
      if (!drawQueued) {
        drawQueued = true;
        requestAnimationFrame(paint);
      }
    }
  };
  socket.onclose = () => {
    connected = false;
    statusEl.textContent = 'disconnected - retrying';
    setTimeout(connect, RETRY_MS);
  };
  socket.onerror = () => {
    statusEl.textContent = 'connection error - retrying';
  };
}

function paint(): void {
  drawQueued = false;
  if (latest === null) return;
  const items = buildDrawList(latest, options);
  ctx.fillStyle = '#10141c';
  ctx.fillRect(0, 0, canvas.width, canvas.height);

  // robot frame -> screen: +x (forward) up, +y (left) to the left
  const originX = canvas.width / 2;
  const originY = canvas.height - 110;
  const toScreen = (x: number, y: number): [number, number] =>
    [originX - y * PX_PER_M, originY - x * PX_PER_M];

  for (const item of items) paintItem(item, toScreen);
  paintHud(latest, items);
}

function paintItem(item: DrawItem, toScreen: (x: number, y: number) => [number, number]): void {
  if (item.kind === 'cells') {
    paintCells(item, toScreen);
  } else if (item.kind === 'polyline') {
    ctx.strokeStyle = item.role === 'chosen' ? '#ff4545' : '#3fba4f';
    ctx.lineWidth = item.role === 'chosen' ? 2.5 : 1;
    ctx.beginPath();
    item.points.forEach(([x, y], i) => {
      const [sx, sy] = toScreen(x, y);
      if (i === 0) ctx.moveTo(sx, sy);
      else ctx.lineTo(sx, sy);
    });
    ctx.stroke();
  } else if (item.kind === 'box') {
    const [x0, x1, y0, y1] = item.region;
    const [sx, sy] = toScreen(x1, y1);
    const [ex, ey] = toScreen(x0, y0);
    ctx.strokeStyle = item.hot ? '#ff3030' : '#d8c94a';
    ctx.lineWidth = item.hot ? 2.5 : 1;
    ctx.strokeRect(sx, sy, ex - sx, ey - sy);
  } else if (item.kind === 'footprint') {
    const [cx, cy] = toScreen(item.center[0], item.center[1]);
    ctx.strokeStyle = item.shape === 'robot' ? '#7fb4ff' : '#ffb763';
    ctx.lineWidth = 1.5;
    if (item.shape === 'robot') {
      const halfL = (item.length! / 2) * PX_PER_M;
      const halfW = (item.width! / 2) * PX_PER_M;
      ctx.strokeRect(cx - halfW, cy - halfL, 2 * halfW, 2 * halfL);
    } else {
      ctx.beginPath();
      ctx.arc(cx, cy, item.radius! * PX_PER_M, 0, 2 * Math.PI);
      ctx.stroke();
    }
  }
}

function paintCells(patch: CellPatch, toScreen: (x: number, y: number) => [number, number]): void {
  const cell = patch.resolution * PX_PER_M;
  for (let r = 0; r < patch.rows; r++) {
    for (let c = 0; c < patch.cols; c++) {
      const v = patch.values[r * patch.cols + c];
      if (v === 0) continue;
      ctx.fillStyle = v === 255 ? 'rgba(90,90,110,0.35)'
        : `rgba(235,235,245,${0.15 + 0.75 * (v / 200)})`;
      const x = patch.xMin + (r + 1) * patch.resolution;
      const y = patch.yMin + (c + 1) * patch.resolution;
      const [sx, sy] = toScreen(x, y);
      ctx.fillRect(sx, sy, cell + 0.5, cell + 0.5);
    }
  }
}

function paintHud(snap: Snapshot, items: DrawItem[]): void {
  const speedEl = document.getElementById('speed')!;
  speedEl.textContent = `${snap.speed.toFixed(2)} m/s`;
  document.getElementById('clock')!.textContent = `t = ${snap.t.toFixed(2)} s`;
  setLit('bias-left', snap.bias.direction === 'left');
  setLit('bias-right', snap.bias.direction === 'right');

  const banner = document.getElementById('banner')!;
  const bannerItem = items.find((i) => i.kind === 'banner');
  if (bannerItem && bannerItem.kind === 'banner') {
    banner.textContent = bannerItem.text;
    banner.className = bannerItem.severity;
  } else {
    banner.textContent = '';
    banner.className = '';
  }

  if (!options.blindfold) {
    const [hx, hy] = robotFrameHandler(snap);
    document.getElementById('detail')!.textContent =
      `plan k=${snap.plan.kappa.toFixed(2)} free=${snap.plan.free.toFixed(1)} m | ` +
      `handler at (${hx.toFixed(2)}, ${hy.toFixed(2)})`;
  } else {
    document.getElementById('detail')!.textContent = 'blindfold mode';
  }
}

function setLit(id: string, lit: boolean): void {
  document.getElementById(id)!.classList.toggle('lit', lit);
}

function flashButton(button: 'up' | 'down'): void {
  const el = document.getElementById(`btn-${button}`);
  if (el === null) return;
  el.classList.add('pressed');
  setTimeout(() => el.classList.remove('pressed'), 150);
}

document.getElementById('btn-up')!.addEventListener('click', () => dispatcher.press('up'));
document.getElementById('btn-down')!.addEventListener('click', () => dispatcher.press('down'));
window.addEventListener('keydown', (ev) => {
  if (dispatcher.keydown(ev.key, ev.repeat)) ev.preventDefault();
});
blindfoldEl.addEventListener('change', () => {
  options.blindfold = blindfoldEl.checked;
  if (latest !== null) requestAnimationFrame(paint);
});

connect();
