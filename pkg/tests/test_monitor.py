import threading
import time

import pytest

from qgateway.monitor import Monitor, NetMeter, ResourceSample


def test_netmeter_accumulates():
    meter = NetMeter()
    meter.add_rx(100)
    meter.add_tx(40)
    meter.add_rx(1)
    assert meter.totals() == (101, 40)


def test_netmeter_concurrent_adds_do_not_drop():
    meter = NetMeter()

    def worker():
        for _ in range(10_000):
            meter.add_rx(1)
            meter.add_tx(2)

    threads = [threading.Thread(target=worker) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert meter.totals() == (80_000, 160_000)


def test_sample_to_dict_iso_timestamp():
    sample = ResourceSample(1_700_000_000.0, "gateway", 1.5, 1024, 10, 20)
    assert sample.to_dict() == {
        "timestamp": "2023-11-14T22:13:20+00:00",
        "component": "gateway",
        "cpu_percent": 1.5,
        "mem_bytes": 1024,
        "net_rx_bytes": 10,
        "net_tx_bytes": 20,
    }


def test_null_markers_serialize():
    sample = ResourceSample(0.0, "gateway", None, None, 0, 0)
    d = sample.to_dict()
    assert d["cpu_percent"] is None and d["mem_bytes"] is None


def test_sample_now_records_and_returns():
    clock = [100.0]
    monitor = Monitor(NetMeter(), now_fn=lambda: clock[0])
    sample = monitor.sample_now()
    assert sample.timestamp == 100.0
    assert sample.component == "gateway"
    assert monitor.window(10) == [sample]


def test_samples_reflect_meter_totals():
    meter = NetMeter()
    clock = [100.0]
    monitor = Monitor(meter, now_fn=lambda: clock[0])
    meter.add_rx(5)
    meter.add_tx(7)
    sample = monitor.sample_now()
    assert (sample.net_rx_bytes, sample.net_tx_bytes) == (5, 7)


def test_counters_monotone():
    meter = NetMeter()
    clock = [100.0]
    monitor = Monitor(meter, now_fn=lambda: clock[0])
    previous = (0, 0)
    for i in range(5):
        meter.add_rx(i * 10)
        meter.add_tx(i)
        clock[0] += 1
        sample = monitor.sample_now()
        current = (sample.net_rx_bytes, sample.net_tx_bytes)
        assert current >= previous
        previous = current


def test_ring_caps_at_size():
    clock = [0.0]
    monitor = Monitor(NetMeter(), ring_size=5, now_fn=lambda: clock[0])
    for _ in range(12):
        clock[0] += 1
        monitor.sample_now()
    samples = monitor.window(10_000)
    assert len(samples) == 5
    assert [s.timestamp for s in samples] == [8.0, 9.0, 10.0, 11.0, 12.0]


def test_window_filters_by_duration_oldest_first():
    clock = [100.0]
    monitor = Monitor(NetMeter(), now_fn=lambda: clock[0])
    for _ in range(4):
        monitor.sample_now()
        clock[0] += 10
    # now=140; samples at 100,110,120,130
    recent = monitor.window(25)
    assert [s.timestamp for s in recent] == [120.0, 130.0]
    assert [s.timestamp for s in monitor.window(1_000)] == [100.0, 110.0, 120.0, 130.0]
    assert monitor.window(1) == []


def test_window_rejects_nonpositive():
    monitor = Monitor(NetMeter())
    with pytest.raises(ValueError):
        monitor.window(0)
    with pytest.raises(ValueError):
        monitor.window(-5)


def test_equal_clock_ticks_get_distinct_timestamps():
    monitor = Monitor(NetMeter(), now_fn=lambda: 50.0)
    first = monitor.sample_now()
    second = monitor.sample_now()
    assert first.timestamp == 50.0
    assert second.timestamp > first.timestamp


def test_unreadable_process_yields_null_markers():
    monitor = Monitor(NetMeter(), now_fn=lambda: 1.0)

    class Broken:
        def cpu_percent(self, interval=None):
            raise RuntimeError("gone")

        def memory_info(self):
            raise RuntimeError("gone")

    monitor._process = Broken()
    sample = monitor.sample_now()
    assert sample.cpu_percent is None and sample.mem_bytes is None


def test_background_thread_samples_on_interval():
    monitor = Monitor(NetMeter(), interval_s=0.02)
    monitor.start()
    try:
        deadline = time.monotonic() + 2.0
        while time.monotonic() < deadline and len(monitor.window(60)) < 3:
            time.sleep(0.01)
    finally:
        monitor.stop()
    assert len(monitor.window(60)) >= 3
    count = len(monitor.window(60))
    time.sleep(0.05)
    assert len(monitor.window(60)) == count  # stopped for real


def test_start_twice_is_idempotent():
    monitor = Monitor(NetMeter(), interval_s=10)
    monitor.start()
    monitor.start()
    monitor.stop()
    monitor.stop()
