"""Two-button handle protocol decoder.

Single press = direction cue (up -> TurnRight, down -> TurnLeft), double
press of the same button within the window = speed change (up -> SpeedUp,
down -> SlowDown).  A single press can only be disambiguated once its
double-press window has passed or a different button follows it, so
direction commands are emitted with up to one window of delay.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

UP = "up"
DOWN = "down"

_SINGLE = {UP: "TurnRight", DOWN: "TurnLeft"}
_DOUBLE = {UP: "SpeedUp", DOWN: "SlowDown"}


@dataclass(frozen=True)
class ButtonEvent:
    button: str                 # "up" | "down"
    timestamp: float

    def __post_init__(self):
        if self.button not in (UP, DOWN):
            raise ValueError(f"unknown button {self.button!r}")


@dataclass(frozen=True)
class Command:
    kind: str                   # TurnRight | TurnLeft | SpeedUp | SlowDown
    issued_at: float


class ButtonDecoder:
    """Buffers timestamped presses and decodes them into commands.

    Each press is consumed by exactly one command; a double press consumes
    two.  Presses must arrive in timestamp order (single input stream).
    """

    def __init__(self, double_press_window: float = 0.4):
        if double_press_window <= 0:
            raise ValueError("double_press_window must be > 0")
        self.window = double_press_window
        self._buffer: deque[ButtonEvent] = deque()
        self._last_t = -float("inf")

    def record_press(self, event: ButtonEvent) -> None:
        if event.timestamp < self._last_t:
            raise ValueError(
                f"press at t={event.timestamp} arrived after t={self._last_t}")
        self._last_t = event.timestamp
        self._buffer.append(event)

    @property
    def pending(self) -> int:
        return len(self._buffer)

    def decode(self, now: float) -> Command | None:
        """Emit at most one command; call repeatedly until None to drain."""
        if not self._buffer:
            return None
        head = self._buffer[0]
        if len(self._buffer) >= 2:
            second = self._buffer[1]
            if second.button == head.button \
                    and second.timestamp - head.timestamp <= self.window:
                self._buffer.popleft()
                self._buffer.popleft()
                return Command(_DOUBLE[head.button], now)
            # a different button (or a late same-button press) ends the group:
            # the head press is a single, resolved immediately
            self._buffer.popleft()
            return Command(_SINGLE[head.button], now)
        if now - head.timestamp > self.window:
            self._buffer.popleft()
            return Command(_SINGLE[head.button], now)
        return None

    def decode_all(self, now: float) -> list[Command]:
        out = []
        while (cmd := self.decode(now)) is not None:
            out.append(cmd)
        return out
