// Wire protocol shared with the simulator's live bridge (proto 1).

export const PROTO = 1;

export interface GridMessage {
  rows: number;
  cols: number;
  resolution: number;
  x_min: number;
  y_min: number;
  rle: [number, number][];
}

export interface BoxMessage {
  source: 'front' | 'left';
  region: [number, number, number, number];   // x_min, x_max, y_min, y_max
  occupancy: number;
  threshold: number;
}

export interface Snapshot {
  type: 'snapshot';
  proto: number;
  t: number;
  pose: [number, number, number];
  handler: [number, number];
  speed: number;
  flags: { estop: boolean; sidestep: boolean };
  bias: { direction: 'left' | 'right' | 'none'; magnitude: number; expires_at: number };
  plan: { kappa: number; total: number; free: number; blocked: boolean; index: number };
  boxes: BoxMessage[];
  maps: { front: GridMessage; left: GridMessage };
  trajectories: [number, number][][];
  chosen_index: number;
  robot: { length: number; width: number; handler_radius: number };
}

export interface Hello {
  type: 'hello';
  proto: number;
  scenario: string;
}

export interface ErrorMessage {
  type: 'error';
  message: string;
}

export type ServerMessage = Snapshot | Hello | ErrorMessage;

export interface PressMessage {
  type: 'press';
  button: 'up' | 'down';
  client_time: number;
}

export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== 'object' || data === null) return null;
  const msg = data as Record<string, unknown>;
  switch (msg.type) {
    case 'hello':
      return typeof msg.proto === 'number' ? (msg as unknown as Hello) : null;
    case 'error':
      return typeof msg.message === 'string' ? (msg as unknown as ErrorMessage) : null;
    case 'snapshot': {
      const snap = msg as unknown as Snapshot;
      if (snap.proto !== PROTO) return null;
      if (!Array.isArray(snap.trajectories) || !snap.maps?.front || !snap.maps?.left) {
        return null;
      }
      return snap;
    }
    default:
      return null;
  }
}

export function encodePress(button: 'up' | 'down', clientTime: number): string {
  const msg: PressMessage = { type: 'press', button, client_time: clientTime };
  return JSON.stringify(msg);
}
