"""Resource telemetry: CPU/memory sampling and exact network byte accounting.

Network traffic is metered at the gateway itself (every request and response
that passes through the byte-counting middleware) rather than from OS
interface counters, so the numbers are exact and test-reproducible. CPU and
memory come from the process-statistics facility; when that facility is
unavailable the sample carries explicit nulls, never fabricated zeros.
"""

from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Callable

try:
    import psutil
except ImportError:  # pragma: no cover - psutil is a declared dependency
    psutil = None

DEFAULT_INTERVAL_S = 5.0
DEFAULT_RING_SIZE = 720  # one dashboard hour at the 5 s interval
DEFAULT_COMPONENT = "gateway"


class NetMeter:
    """Monotone rx/tx byte accumulators shared with the gateway middleware."""

    def __init__(self):
        self._lock = threading.Lock()
        self._rx = 0
        self._tx = 0

    def add_rx(self, n: int) -> None:
        with self._lock:
            self._rx += n

    def add_tx(self, n: int) -> None:
        with self._lock:
            self._tx += n

    def totals(self) -> tuple[int, int]:
        with self._lock:
            return self._rx, self._tx


@dataclass(frozen=True)
class ResourceSample:
    timestamp: float  # epoch seconds, UTC
    component: str
    cpu_percent: float | None
    mem_bytes: int | None
    net_rx_bytes: int
    net_tx_bytes: int

    def to_dict(self) -> dict:
        return {
            "timestamp": datetime.fromtimestamp(self.timestamp, timezone.utc).isoformat(),
            "component": self.component,
            "cpu_percent": self.cpu_percent,
            "mem_bytes": self.mem_bytes,
            "net_rx_bytes": self.net_rx_bytes,
            "net_tx_bytes": self.net_tx_bytes,
        }


class Monitor:
    """Periodic sampler feeding a fixed-capacity ring buffer.

    ``sample_now`` records and returns one sample; the background thread just
    calls it on the interval. One writer, any number of ``window`` readers.
    """

    def __init__(
        self,
        meter: NetMeter,
        *,
        component: str = DEFAULT_COMPONENT,
        interval_s: float = DEFAULT_INTERVAL_S,
        ring_size: int = DEFAULT_RING_SIZE,
        now_fn: Callable[[], float] = time.time,
    ):
        if interval_s <= 0 or ring_size < 1:
            raise ValueError("interval must be positive and ring size at least 1")
        self.meter = meter
        self.component = component
        self.interval_s = interval_s
        self.ring_size = ring_size
        self._now = now_fn
        self._lock = threading.Lock()
        self._samples: deque[ResourceSample] = deque(maxlen=ring_size)
        self._process = None
        if psutil is not None:
            try:
                self._process = psutil.Process()
                self._process.cpu_percent(None)  # prime the cpu_percent baseline
            except Exception:
                self._process = None
        self._thread: threading.Thread | None = None
        self._stop = threading.Event()

    def _read_process(self) -> tuple[float | None, int | None]:
        if self._process is None:
            return None, None
        try:
            return self._process.cpu_percent(None), self._process.memory_info().rss
        except Exception:
            return None, None

    def sample_now(self) -> ResourceSample:
        cpu, mem = self._read_process()
        rx, tx = self.meter.totals()
        with self._lock:
            ts = self._now()
            if self._samples and ts <= self._samples[-1].timestamp:
                ts = self._samples[-1].timestamp + 1e-6
            sample = ResourceSample(
                timestamp=ts,
                component=self.component,
                cpu_percent=cpu,
                mem_bytes=mem,
                net_rx_bytes=rx,
                net_tx_bytes=tx,
            )
            self._samples.append(sample)
        return sample

    def window(self, duration_s: float) -> list[ResourceSample]:
        if duration_s <= 0:
            raise ValueError("window duration must be positive")
        cutoff = self._now() - duration_s
        with self._lock:
            return [s for s in self._samples if s.timestamp >= cutoff]

    # background sampling

    def start(self) -> None:
        if self._thread is not None:
            return
        self._stop.clear()
        self._thread = threading.Thread(target=self._loop, name="monitor-sampler", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        if self._thread is None:
            return
        self._stop.set()
        self._thread.join(timeout=self.interval_s + 1.0)
        self._thread = None

    def _loop(self) -> None:
        self.sample_now()
        while not self._stop.wait(self.interval_s):
            self.sample_now()
