"""Live bridge: a local websocket server pairing the episode loop with the
browser console.

Wire protocol (text JSON, versioned by `proto`):
  server -> client   {"type": "hello", "proto": 1, ...}
                     {"type": "snapshot", "proto": 1, ...}   (see harness)
                     {"type": "error", "message": str}
  client -> server   {"type": "press", "button": "up"|"down", "client_time": ms}

Snapshots are coalesced per client (drop-oldest, latest wins) so a slow
consumer never stalls the loop; presses are timestamped on receipt by the
harness clock when drained.
"""
from __future__ import annotations

import asyncio
import json
import threading
from collections import deque

import websockets

from .harness import PROTO_VERSION

_QUEUE_DEPTH = 4


class LiveBridge:
    """Runs a websocket server on a background thread.

    The sim loop calls publish() and poll_presses(); everything network-side
    happens on the bridge's own asyncio loop.
    """

    def __init__(self, host: str = "127.0.0.1", port: int = 8765,
                 scenario_name: str = ""):
        self.host = host
        self.requested_port = port
        self.scenario_name = scenario_name
        self.port: int | None = None
        self.abort_requested = False
        self._presses: deque[str] = deque()
        self._lock = threading.Lock()
        self._clients: set = set()
        self._loop: asyncio.AbstractEventLoop | None = None
        self._thread: threading.Thread | None = None
        self._started = threading.Event()
        self._stop: asyncio.Event | None = None

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> "LiveBridge":
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()
        if not self._started.wait(timeout=5.0):
            raise RuntimeError("bridge failed to start")
        return self

    def stop(self) -> None:
        if self._loop is not None and self._stop is not None:
            self._loop.call_soon_threadsafe(self._stop.set)
        if self._thread is not None:
            self._thread.join(timeout=5.0)

    def _run(self) -> None:
        asyncio.run(self._serve())

    async def _serve(self) -> None:
        self._loop = asyncio.get_running_loop()
        self._stop = asyncio.Event()
        async with websockets.serve(self._handle, self.host,
                                    self.requested_port) as server:
            sockets = server.sockets or []
            self.port = sockets[0].getsockname()[1] if sockets else self.requested_port
            self._started.set()
            await self._stop.wait()

    # -- connection handling -------------------------------------------------

    async def _handle(self, websocket) -> None:
        queue: asyncio.Queue = asyncio.Queue(maxsize=_QUEUE_DEPTH)
        self._clients.add(queue)
        hello = {"type": "hello", "proto": PROTO_VERSION,
                 "scenario": self.scenario_name}
        try:
            await websocket.send(json.dumps(hello, sort_keys=True))
            sender = asyncio.create_task(self._pump(websocket, queue))
            try:
                async for raw in websocket:
                    await self._on_message(websocket, raw)
            finally:
                sender.cancel()
        except websockets.ConnectionClosed:
            pass
        finally:
            self._clients.discard(queue)

    async def _pump(self, websocket, queue: asyncio.Queue) -> None:
        while True:
            message = await queue.get()
            await websocket.send(message)

    async def _on_message(self, websocket, raw) -> None:
        try:
            msg = json.loads(raw)
            kind = msg.get("type")
        except (json.JSONDecodeError, AttributeError):
            kind = None
            msg = {}
        if kind == "press" and msg.get("button") in ("up", "down"):
            with self._lock:
                self._presses.append(msg["button"])
        elif kind == "abort":
            self.abort_requested = True
        else:
            err = {"type": "error", "message": f"unrecognized message {raw[:80]!r}"}
            await websocket.send(json.dumps(err))

    # -- loop-facing API -----------------------------------------------------

    def publish(self, snapshot: dict) -> None:
        if self._loop is None:
            return
        message = json.dumps(snapshot, sort_keys=True, separators=(",", ":"))
        self._loop.call_soon_threadsafe(self._broadcast, message)

    def _broadcast(self, message: str) -> None:
        for queue in list(self._clients):
            while queue.full():
                try:
                    queue.get_nowait()      # drop-oldest under backpressure
                except asyncio.QueueEmpty:
                    break
            queue.put_nowait(message)

    def poll_presses(self) -> list[str]:
        with self._lock:
            drained = list(self._presses)
            self._presses.clear()
        return drained
