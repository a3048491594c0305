// Handler button input: two on-screen buttons mirrored by the arrow keys.
// Presses are fire-and-forget; the server decodes singles vs doubles on its
// own clock, the client never debounces.

export type Button = 'up' | 'down';
export type PressSink = (button: Button) => boolean;   // false = not delivered

export const KEY_BINDINGS: Record<string, Button> = {
  ArrowUp: 'up',
  ArrowRight: 'up',      // single up = turn right
  ArrowDown: 'down',
  ArrowLeft: 'down',     // single down = turn left
};

export function buttonForKey(key: string): Button | null {
  return KEY_BINDINGS[key] ?? null;
}

export class PressDispatcher {
  private warnings = 0;

  constructor(private sink: PressSink,
              private onWarning: (message: string) => void = () => {}) {}

  press(button: Button): boolean {
    const delivered = this.sink(button);
    if (!delivered) {
      this.warnings += 1;
      this.onWarning(`press '${button}' dropped: not connected`);
    }
    return delivered;
  }

  keydown(key: string, repeat: boolean): boolean {
    if (repeat) return false;           // held keys are not repeated presses
    const button = buttonForKey(key);
    if (button === null) return false;
    return this.press(button);
  }

  get droppedPresses(): number {
    return this.warnings;
  }
}
