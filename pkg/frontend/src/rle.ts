// Run-length decoding for the cost grids carried in snapshots.
// Cells hold 0..200 cost; 255 marks cells the camera cannot see.

export const UNKNOWN_SENTINEL = 255;

export function rleDecode(pairs: [number, number][], rows: number, cols: number): Uint8Array {
  const out = new Uint8Array(rows * cols);
  let at = 0;
  for (const [value, count] of pairs) {
    if (count < 0) throw new Error(`negative run length ${count}`);
    out.fill(value, at, at + count);
    at += count;
  }
  if (at !== rows * cols) {
    throw new Error(`RLE covers ${at} cells, grid needs ${rows * cols}`);
  }
  return out;
}
