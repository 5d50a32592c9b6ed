"""Line-oriented TCP telemetry collector with append-only per-device logs.

Wire protocol: clients send newline-delimited ndjson sample records and the
server answers each with one ack line, ``OK`` or ``ERR <reason>``, in
lockstep. Records land in ``<data_dir>/<device>/<UTC date>.ndjson`` exactly
as the batch ingest module reads them.

Durability: every record is flushed to the OS on append; fsync runs every
100 records or 1 second per device, whichever comes first, and on orderly
shutdown. A slow disk therefore delays acks (clients buffer and retry);
delivery is at-least-once.
"""

from __future__ import annotations

import asyncio
import json
import math
import os
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import IO

from .core import PollutantKind, PollutantSample, validate_sample
from .errors import BindFailure, DataError, StorageFailure
from .ingest import write_sample_ndjson


@dataclass(frozen=True)
class CollectorConfig:
    data_dir: str | Path
    host: str = "127.0.0.1"
    port: int = 7007
    max_line_length: int = 4096
    strict: bool = False
    fsync_every: int = 100
    fsync_interval: float = 1.0

    def __post_init__(self) -> None:
        if not 0 <= self.port <= 65535:
            raise DataError(f"port {self.port} outside [0, 65535]")


@dataclass(frozen=True)
class Ack:
    status: str                 # "ok" | "err"
    reason: str | None = None   # present iff status == "err"

    def wire(self) -> bytes:
        if self.status == "ok":
            return b"OK\n"
        return f"ERR {self.reason}\n".encode()


OK = Ack("ok")


class _ParseFailure(Exception):
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


def parse_telemetry_line(text: str, strict: bool = False) -> PollutantSample:
    """Parse one ndjson record line into a sample.

    Structural problems (bad json, wrong types, no readings, non-finite
    values) always fail; range checks (negative concentrations, humidity
    bounds) apply only in strict mode.
    """
    try:
        obj = json.loads(text)
    except ValueError:
        raise _ParseFailure("parse_error") from None
    if not isinstance(obj, dict):
        raise _ParseFailure("parse_error")
    ts = obj.get("ts")
    if not isinstance(ts, (int, float)) or isinstance(ts, bool) or not math.isfinite(ts):
        raise _ParseFailure("parse_error")
    dev = obj.get("dev")
    if not isinstance(dev, str) or not dev:
        raise _ParseFailure("parse_error")
    if len(dev) > 32 or any(c in dev for c in "/\\") or dev in (".", ".."):
        raise _ParseFailure("validation_error(dev)")
    readings: dict[PollutantKind, float] = {}
    for kind in PollutantKind:
        raw = obj.get(kind.token)
        if raw is None:
            continue
        if not isinstance(raw, (int, float)) or isinstance(raw, bool):
            raise _ParseFailure("parse_error")
        if not math.isfinite(raw):
            raise _ParseFailure(f"validation_error({kind.token})")
        readings[kind] = float(raw)
    if not readings:
        raise _ParseFailure("validation_error(readings)")
    sample = PollutantSample(ts=float(ts), device=dev, readings=readings)
    if strict:
        try:
            validate_sample(sample)
        except DataError as exc:
            field_name = getattr(exc, "field", "sample")
            raise _ParseFailure(f"validation_error({field_name})") from None
    return sample


class _DeviceLog:
    """Append-only daily files for one device; guarded by its own lock."""

    def __init__(self, root: Path, device: str, fsync_every: int, fsync_interval: float):
        self.dir = root / device
        self.fsync_every = fsync_every
        self.fsync_interval = fsync_interval
        self.lock = threading.Lock()
        self.offset = 0
        self._file: IO[bytes] | None = None
        self._date: str | None = None
        self._unsynced = 0
        self._last_sync = time.monotonic()

    def append(self, sample: PollutantSample) -> int:
        date = datetime.fromtimestamp(sample.ts, tz=timezone.utc).date().isoformat()
        with self.lock:
            if self._file is None or date != self._date:
                self._roll(date)
            assert self._file is not None
            self._file.write(write_sample_ndjson([sample]).encode())
            self._file.flush()
            self._unsynced += 1
            now = time.monotonic()
            if self._unsynced >= self.fsync_every or now - self._last_sync >= self.fsync_interval:
                os.fsync(self._file.fileno())
                self._unsynced = 0
                self._last_sync = now
            offset = self.offset
            self.offset += 1
            return offset

    def _roll(self, date: str) -> None:
        if self._file is not None:
            os.fsync(self._file.fileno())
            self._file.close()
        self.dir.mkdir(parents=True, exist_ok=True)
        self._file = open(self.dir / f"{date}.ndjson", "ab")
        self._date = date
        self._unsynced = 0

    def close(self) -> None:
        with self.lock:
            if self._file is not None:
                self._file.flush()
                os.fsync(self._file.fileno())
                self._file.close()
                self._file = None


class SampleStore:
    """Per-device append-only storage rooted at one data directory."""

    def __init__(self, cfg: CollectorConfig):
        self.cfg = cfg
        self.root = Path(cfg.data_dir)
        self._logs: dict[str, _DeviceLog] = {}
        self._logs_lock = threading.Lock()

    def open(self) -> None:
        try:
            self.root.mkdir(parents=True, exist_ok=True)
            probe = self.root / ".write-probe"
            probe.write_bytes(b"")
            probe.unlink()
        except OSError as exc:
            raise StorageFailure(f"data directory {self.root} not writable: {exc}") from exc

    def _log(self, device: str) -> _DeviceLog:
        with self._logs_lock:
            log = self._logs.get(device)
            if log is None:
                log = _DeviceLog(
                    self.root, device, self.cfg.fsync_every, self.cfg.fsync_interval
                )
                self._logs[device] = log
            return log

    def append(self, sample: PollutantSample) -> int:
        try:
            return self._log(sample.device).append(sample)
        except OSError as exc:
            raise StorageFailure(str(exc)) from exc

    def close(self) -> None:
        with self._logs_lock:
            for log in self._logs.values():
                log.close()


def append_sample(store: SampleStore, sample: PollutantSample) -> int:
    """Append one sample; offsets increase strictly per device."""
    return store.append(sample)


class Collector:
    """The TCP service; one handler per connection, lockstep request/ack."""

    def __init__(self, cfg: CollectorConfig):
        self.cfg = cfg
        self.store = SampleStore(cfg)
        self._server: asyncio.AbstractServer | None = None
        self._handlers: set[asyncio.Task] = set()

    @property
    def port(self) -> int:
        assert self._server is not None and self._server.sockets
        return self._server.sockets[0].getsockname()[1]

    def ingest_line(self, text: str) -> Ack:
        """Parse and persist one record line; never raises on bad input."""
        try:
            sample = parse_telemetry_line(text.rstrip("\r"), self.cfg.strict)
        except _ParseFailure as exc:
            return Ack("err", exc.reason)
        try:
            self.store.append(sample)
        except StorageFailure:
            return Ack("err", "storage")
        return OK

    async def start(self) -> None:
        self.store.open()
        try:
            self._server = await asyncio.start_server(
                self._handle, self.cfg.host, self.cfg.port
            )
        except OSError as exc:
            raise BindFailure(
                f"cannot bind {self.cfg.host}:{self.cfg.port}: {exc}"
            ) from exc

    async def stop(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
        for task in list(self._handlers):
            task.cancel()
        if self._handlers:
            await asyncio.gather(*self._handlers, return_exceptions=True)
        self.store.close()

    async def _handle(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        task = asyncio.current_task()
        if task is not None:
            self._handlers.add(task)
        buf = bytearray()
        overlong = False
        try:
            while True:
                chunk = await reader.read(65536)
                if not chunk:
                    break
                buf.extend(chunk)
                while True:
                    nl = buf.find(b"\n")
                    if nl < 0:
                        if len(buf) > self.cfg.max_line_length:
                            overlong = True
                            buf.clear()
                        break
                    raw = bytes(buf[:nl])
                    del buf[:nl + 1]
                    if overlong or len(raw) > self.cfg.max_line_length:
                        ack = Ack("err", "line_too_long")
                        overlong = False
                    else:
                        ack = self.ingest_line(raw.decode("utf-8", errors="replace"))
                    writer.write(ack.wire())
                    await writer.drain()
        except (asyncio.CancelledError, ConnectionResetError):
            pass
        finally:
            if task is not None:
                self._handlers.discard(task)
            writer.close()
            try:
                await writer.wait_closed()
            except (ConnectionResetError, BrokenPipeError):
                pass


async def _serve(cfg: CollectorConfig, ready: threading.Event | None = None) -> None:
    import signal

    collector = Collector(cfg)
    await collector.start()
    if ready is not None:
        ready.set()
    stop = asyncio.Event()
    loop = asyncio.get_running_loop()
    for sig in (signal.SIGINT, signal.SIGTERM):
        try:
            loop.add_signal_handler(sig, stop.set)
        except NotImplementedError:  # non-unix
            pass
    try:
        await stop.wait()
    finally:
        await collector.stop()


def serve(cfg: CollectorConfig) -> None:
    """Run the collector until SIGINT/SIGTERM; flushes stores on the way out."""
    asyncio.run(_serve(cfg))
