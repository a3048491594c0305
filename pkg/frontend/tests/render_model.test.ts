import { readFileSync } from 'node:fs';
import { describe, expect, it } from 'vitest';
import { Snapshot, parseServerMessage } from '../src/protocol.js';
import {
  buildDrawList,
  CellPatch,
  countPolylines,
  robotFrameHandler,
  unknownFraction,
} from '../src/render_model.js';

const fixture = readFileSync(new URL('./fixtures/snapshot.json', import.meta.url), 'utf8');
const snapshot = parseServerMessage(fixture) as Snapshot;

describe('buildDrawList', () => {
  it('draws 40 candidate polylines with exactly one chosen', () => {
    const items = buildDrawList(snapshot, { blindfold: false });
    const { candidates, chosen } = countPolylines(items);
    expect(candidates + chosen).toBe(40);
    expect(chosen).toBe(1);
  });

  it('renders both cost grids with the unknown sentinel preserved', () => {
    const items = buildDrawList(snapshot, { blindfold: false });
    const cells = items.filter((i): i is CellPatch => i.kind === 'cells');
    expect(cells.map((c) => c.source).sort()).toEqual(['front', 'left']);
    const left = cells.find((c) => c.source === 'left')!;
    expect(left.values.length).toBe(left.rows * left.cols);
    expect(unknownFraction(left)).toBeGreaterThan(0);   // frustum edges exist
  });

  it('marks a box hot only at/above its threshold', () => {
    const cool = buildDrawList(snapshot, { blindfold: false })
      .filter((i) => i.kind === 'box');
    expect(cool.every((b) => b.kind === 'box' && !b.hot)).toBe(true);

    const hotSnap: Snapshot = JSON.parse(fixture);
    hotSnap.boxes[0].occupancy = hotSnap.boxes[0].threshold;
    const hot = buildDrawList(hotSnap, { blindfold: false })
      .filter((i) => i.kind === 'box' && i.hot);
    expect(hot).toHaveLength(1);
  });

  it('shows the stop banner when e-stopped', () => {
    const stopped: Snapshot = JSON.parse(fixture);
    stopped.flags = { estop: true, sidestep: false };
    const items = buildDrawList(stopped, { blindfold: false });
    const banner = items.find((i) => i.kind === 'banner');
    expect(banner).toMatchObject({ text: 'EMERGENCY STOP', severity: 'stop' });
  });

  it('lights the matching bias indicator', () => {
    const items = buildDrawList(snapshot, { blindfold: false });
    const right = items.find((i) => i.kind === 'indicator' && i.name === 'bias-right');
    const left = items.find((i) => i.kind === 'indicator' && i.name === 'bias-left');
    expect(right).toMatchObject({ lit: true });
    expect(left).toMatchObject({ lit: false });
  });

  it('blindfold mode drops maps and paths but keeps speed and flags', () => {
    const items = buildDrawList(snapshot, { blindfold: true });
    expect(items.some((i) => i.kind === 'cells')).toBe(false);
    expect(items.some((i) => i.kind === 'polyline')).toBe(false);
    const speed = items.find((i) => i.kind === 'indicator' && i.name === 'speed');
    expect(speed).toMatchObject({ lit: true });
  });

  it('is render-pure: building the list twice gives identical output', () => {
    const a = buildDrawList(snapshot, { blindfold: false });
    const b = buildDrawList(snapshot, { blindfold: false });
    expect(a).toEqual(b);
  });
});

describe('robotFrameHandler', () => {
  it('keeps the handler on the left at the attachment offsets', () => {
    const [hx, hy] = robotFrameHandler(snapshot);
    expect(hx).toBeCloseTo(-0.30, 1);
    expect(hy).toBeCloseTo(0.55, 1);
  });
});
