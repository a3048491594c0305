// Pure view-model: turn one snapshot into a flat draw list so the painting
// code stays trivial and the interesting logic stays testable without a DOM.

import { Snapshot } from './protocol.js';
import { rleDecode, UNKNOWN_SENTINEL } from './rle.js';

export interface CellPatch {
  kind: 'cells';
  source: 'front' | 'left';
  rows: number;
  cols: number;
  resolution: number;
  xMin: number;
  yMin: number;
  values: Uint8Array;            // 0..200 cost, 255 unknown
}

export interface Polyline {
  kind: 'polyline';
  points: [number, number][];    // robot-frame meters
  role: 'candidate' | 'chosen';
}

export interface BoxOutline {
  kind: 'box';
  region: [number, number, number, number];
  source: 'front' | 'left';
  hot: boolean;                  // occupancy at/над threshold
  occupancy: number;
}

export interface Footprint {
  kind: 'footprint';
  shape: 'robot' | 'handler';
  length?: number;
  width?: number;
  radius?: number;
  center: [number, number];
}

export interface Banner {
  kind: 'banner';
  text: string;
  severity: 'stop' | 'caution';
}

export interface Indicator {
  kind: 'indicator';
  name: 'bias-left' | 'bias-right' | 'speed';
  value: string;
  lit: boolean;
}

export type DrawItem = CellPatch | Polyline | BoxOutline | Footprint | Banner | Indicator;

export interface ConsoleOptions {
  blindfold: boolean;            // hide maps/paths, keep speed + flags only
}

export function buildDrawList(snap: Snapshot, options: ConsoleOptions): DrawItem[] {
  const items: DrawItem[] = [];

  if (!options.blindfold) {
    for (const source of ['front', 'left'] as const) {
      const grid = snap.maps[source];
      items.push({
        kind: 'cells',
        source,
        rows: grid.rows,
        cols: grid.cols,
        resolution: grid.resolution,
        xMin: grid.x_min,
        yMin: grid.y_min,
        values: rleDecode(grid.rle, grid.rows, grid.cols),
      });
    }

    snap.trajectories.forEach((points, index) => {
      items.push({
        kind: 'polyline',
        points,
        role: index === snap.chosen_index ? 'chosen' : 'candidate',
      });
    });

    for (const box of snap.boxes) {
      items.push({
        kind: 'box',
        region: box.region,
        source: box.source,
        hot: box.occupancy >= box.threshold,
        occupancy: box.occupancy,
      });
    }

    items.push({
      kind: 'footprint',
      shape: 'robot',
      length: snap.robot.length,
      width: snap.robot.width,
      center: [0, 0],
    });
    const [hx, hy] = robotFrameHandler(snap);
    items.push({
      kind: 'footprint',
      shape: 'handler',
      radius: snap.robot.handler_radius,
      center: [hx, hy],
    });
  }

  items.push({
    kind: 'indicator',
    name: 'speed',
    value: `${snap.speed.toFixed(2)} m/s`,
    lit: snap.speed > 0,
  });
  items.push({
    kind: 'indicator',
    name: 'bias-left',
    value: 'LEFT',
    lit: snap.bias.direction === 'left',
  });
  items.push({
    kind: 'indicator',
    name: 'bias-right',
    value: 'RIGHT',
    lit: snap.bias.direction === 'right',
  });

  if (snap.flags.estop) {
    items.push({ kind: 'banner', text: 'EMERGENCY STOP', severity: 'stop' });
  } else if (snap.flags.sidestep) {
    items.push({ kind: 'banner', text: 'SIDE-STEPPING RIGHT', severity: 'caution' });
  }
  return items;
}

// handler world position -> robot frame, using the pose in the snapshot
export function robotFrameHandler(snap: Snapshot): [number, number] {
  const [rx, ry, theta] = snap.pose;
  const dx = snap.handler[0] - rx;
  const dy = snap.handler[1] - ry;
  const c = Math.cos(-theta);
  const s = Math.sin(-theta);
  return [c * dx - s * dy, s * dx + c * dy];
}

export function countPolylines(items: DrawItem[]): { candidates: number; chosen: number } {
  let candidates = 0;
  let chosen = 0;
  for (const item of items) {
    if (item.kind === 'polyline') {
      if (item.role === 'chosen') chosen += 1;
      else candidates += 1;
    }
  }
  return { candidates, chosen };
}

export function unknownFraction(patch: CellPatch): number {
  let unknown = 0;
  for (const v of patch.values) if (v === UNKNOWN_SENTINEL) unknown += 1;
  return unknown / patch.values.length;
}
