import { readFileSync } from 'node:fs';
import { describe, expect, it } from 'vitest';
import { encodePress, parseServerMessage, Snapshot } from '../src/protocol.js';

const fixture = readFileSync(new URL('./fixtures/snapshot.json', import.meta.url), 'utf8');

describe('parseServerMessage', () => {
  it('accepts a real snapshot from the simulator', () => {
    const msg = parseServerMessage(fixture);
    expect(msg).not.toBeNull();
    expect(msg!.type).toBe('snapshot');
    const snap = msg as Snapshot;
    expect(snap.trajectories).toHaveLength(40);
    expect(snap.maps.front.rows).toBe(80);
    expect(snap.maps.front.cols).toBe(60);
    expect(snap.maps.left.rows).toBe(40);
  });

  it('accepts hello and error frames', () => {
    expect(parseServerMessage('{"type":"hello","proto":1,"scenario":"x"}'))
      .toMatchObject({ type: 'hello', proto: 1 });
    expect(parseServerMessage('{"type":"error","message":"nope"}'))
      .toMatchObject({ type: 'error' });
  });

  it('rejects malformed payloads without throwing', () => {
    expect(parseServerMessage('not json')).toBeNull();
    expect(parseServerMessage('42')).toBeNull();
    expect(parseServerMessage('{"type":"snapshot","proto":9}')).toBeNull();
    expect(parseServerMessage('{"type":"mystery"}')).toBeNull();
  });

  it('rejects snapshots from a different protocol version', () => {
    const stale = JSON.parse(fixture);
    stale.proto = 2;
    expect(parseServerMessage(JSON.stringify(stale))).toBeNull();
  });
});

describe('encodePress', () => {
  it('produces the wire shape the bridge expects', () => {
    const raw = encodePress('up', 1234);
    expect(JSON.parse(raw)).toEqual({ type: 'press', button: 'up', client_time: 1234 });
  });
});
