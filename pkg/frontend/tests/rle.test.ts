import { describe, expect, it } from 'vitest';
import { rleDecode } from '../src/rle.js';

describe('rleDecode', () => {
  it('expands runs row-major', () => {
    const out = rleDecode([[0, 3], [200, 2], [255, 1]], 2, 3);
    expect(Array.from(out)).toEqual([0, 0, 0, 200, 200, 255]);
  });

  it('handles a single full-grid run', () => {
    const out = rleDecode([[200, 12]], 3, 4);
    expect(out.length).toBe(12);
    expect(out.every((v) => v === 200)).toBe(true);
  });

  it('rejects undersized payloads', () => {
    expect(() => rleDecode([[0, 5]], 2, 3)).toThrow(/covers 5/);
  });

  it('rejects oversized payloads', () => {
    expect(() => rleDecode([[0, 7]], 2, 3)).toThrow(/covers 7/);
  });

  it('rejects negative run lengths', () => {
    expect(() => rleDecode([[0, -1]], 1, 1)).toThrow(/negative/);
  });
});
