import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from flutterbench.records import (RecordError, RunRecord, record_metrics, spectrum, window_peak,
                                  window_rms, write_json)


def make_record(n=100, dt=0.01):
    t = dt * np.arange(n)
    y = 1e-3 * np.sin(2 * np.pi * 5 * t)
    return RunRecord(t, np.zeros(n), y, -y, dt, {"peak": 1.0}, {"config_hash": "x"})


def test_sinusoid_on_bin_reads_its_amplitude_and_frequency():
    dt, n = 1e-3, 1000
    y = 0.3 * np.sin(2 * np.pi * 10 * dt * np.arange(n))
    for window in ("hann", "rect"):
        s = spectrum(y, dt, window)
        assert s.dominant() == pytest.approx(10.0)
        assert s.magnitude.max() == pytest.approx(0.3, rel=1e-10)
        assert s.resolution == pytest.approx(1.0)


def test_zero_signal_spectrum():
    s = spectrum(np.zeros(64), 0.1)
    assert not np.any(s.magnitude) and s.dominant() == 0.0


def test_detrend_removes_offset():
    s = spectrum(np.full(32, 5.0), 1.0)
    assert s.magnitude[0] == pytest.approx(0.0, abs=1e-12)
    assert spectrum(np.full(32, 5.0), 1.0, "rect", detrend=False).magnitude[0] == pytest.approx(5.0)


def test_spectrum_validation():
    with pytest.raises(RecordError):
        spectrum([1.0], 1.0)
    with pytest.raises(RecordError):
        spectrum([1.0, 2.0], 0.0)
    with pytest.raises(RecordError):
        spectrum([1.0, 2.0], 1.0, "kaiser")


@given(st.integers(4, 200), st.floats(0.1, 10.0))
def test_parseval_rectangular(n, amp):
    y = amp * np.random.default_rng(n).standard_normal(n)
    y -= y.mean()
    s = spectrum(y, 1.0, "rect")
    X = np.fft.rfft(y)
    np.testing.assert_allclose(s.magnitude[1:-1 if n % 2 == 0 else None] * n / 2,
                               np.abs(X[1:-1 if n % 2 == 0 else None]), rtol=1e-12)


def test_window_metrics():
    t = np.arange(10.0)
    y = np.r_[np.full(5, 9.0), 1.0, -3.0, 1.0, 1.0, 1.0]
    assert window_peak(t, y, 5.0) == 3.0
    assert window_rms(t, y, 5.0) == pytest.approx(np.sqrt(13 / 5))
    with pytest.raises(RecordError):
        window_peak(t, y, 11.0)
    m = record_metrics(t, y, 1.0, 5.0)
    assert m["peak"] == 3.0 and m["metric_start"] == 5.0


def test_record_csv_roundtrip_is_exact(tmp_path):
    r = make_record()
    r.write(tmp_path / "r.csv")
    back = RunRecord.from_csv(tmp_path / "r.csv")
    for name in ("t", "w", "y", "u"):
        np.testing.assert_array_equal(getattr(back, name), getattr(r, name))
    assert back.metrics == {"peak": 1.0} and back.provenance == {"config_hash": "x"}
    header = (tmp_path / "r.csv").read_text().splitlines()[0]
    assert header == "k,t,w_k,y_k,u_k"


def test_record_rejects_bad_files(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(RecordError):
        RunRecord.from_csv(p)
    p.write_text("k,t,w_k,y_k,u_k\n0,0,0,0,0\n1,0.1,0,0,0\n2,0.3,0,0,0\n")
    with pytest.raises(RecordError, match="nonuniform"):
        RunRecord.from_csv(p)
    with pytest.raises(RecordError):
        RunRecord(np.arange(3.0), np.zeros(2), np.zeros(3), np.zeros(3), 1.0)


def test_json_is_deterministic_and_handles_nonfinite(tmp_path):
    obj = {"b": np.float64(np.inf), "a": [np.int64(1), np.nan], "c": np.bool_(True)}
    write_json(tmp_path / "x.json", obj)
    data = json.loads((tmp_path / "x.json").read_text())
    assert data == {"a": [1, "nan"], "b": "inf", "c": True}
    assert list(data) == ["a", "b", "c"]
