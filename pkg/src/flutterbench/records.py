"""Run records, derived metrics, spectra and artifact files.

Every metric stored with a record is a pure function of the stored series,
so an independent reader can recompute it from the CSV alone.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__

__all__ = [
    "RecordError",
    "RunRecord",
    "Spectrum",
    "spectrum",
    "window_peak",
    "window_rms",
    "record_metrics",
    "write_json",
    "write_table",
]

SERIES_COLUMNS = ("k", "t", "w_k", "y_k", "u_k")


class RecordError(ValueError):
    """Malformed or nonuniform series."""


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _window(t, y, start: float):
    mask = np.asarray(t) >= start - 1e-12
    if not np.any(mask):
        raise RecordError(f"no samples at or after t = {start}")
    return np.asarray(y)[mask]


def window_peak(t, y, start: float) -> float:
    """``max |y|`` over samples with ``t >= start``."""
    return float(np.max(np.abs(_window(t, y, start))))


def window_rms(t, y, start: float) -> float:
    seg = _window(t, y, start)
    return float(np.sqrt(np.mean(seg**2)))


@dataclass(frozen=True)
class Spectrum:
    """Single-sided amplitude spectrum.

    Magnitudes are scaled by the window's coherent gain so a sinusoid of
    amplitude ``a`` on a bin centre reads ``a``.
    """

    frequency_hz: np.ndarray
    magnitude: np.ndarray
    window: str
    dt: float
    n: int

    @property
    def resolution(self) -> float:
        return 1.0 / (self.n * self.dt)

    def dominant(self) -> float:
        """Frequency of the largest non-DC bin (0 for an all-zero signal)."""
        if self.magnitude.size < 2 or not np.any(self.magnitude[1:] > 0):
            return 0.0
        return float(self.frequency_hz[1 + int(np.argmax(self.magnitude[1:]))])

    def write_csv(self, path) -> None:
        write_table(path, ("frequency_hz", "magnitude"),
                    zip(self.frequency_hz, self.magnitude))


def spectrum(y, dt: float, window: str = "hann", detrend: bool = True) -> Spectrum:
    """Windowed FFT magnitude of a uniformly sampled real signal."""
    y = np.asarray(y, dtype=float).ravel()
    if y.size < 2:
        raise RecordError("need at least two samples for a spectrum")
    if not dt > 0:
        raise RecordError("sample period must be positive")
    if window == "hann":
        w = np.hanning(y.size + 1)[:-1]  # periodic Hann
    elif window in ("rect", "rectangular", "boxcar"):
        w = np.ones(y.size)
        window = "rect"
    else:
        raise RecordError(f"unknown window {window!r}")
    x = y - y.mean() if detrend else y
    X = np.fft.rfft(x * w)
    mag = np.abs(X) / w.sum()
    mag[1:] *= 2.0
    if y.size % 2 == 0:
        mag[-1] /= 2.0
    return Spectrum(np.fft.rfftfreq(y.size, dt), mag, window, float(dt), y.size)


def record_metrics(t, y, dt: float, metric_start: float) -> dict:
    """Peak, RMS and dominant frequency of ``y`` over ``t >= metric_start``."""
    seg = _window(t, y, metric_start)
    return {
        "peak": float(np.max(np.abs(seg))),
        "rms": float(np.sqrt(np.mean(seg**2))),
        "dominant_frequency_hz": spectrum(seg, dt).dominant() if seg.size > 1 else 0.0,
        "metric_start": float(metric_start),
    }


@dataclass
class RunRecord:
    """Controller-rate series of one simulation plus metrics and provenance."""

    t: np.ndarray
    w: np.ndarray
    y: np.ndarray
    u: np.ndarray
    dt: float
    metrics: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.t)
        for name in ("w", "y", "u"):
            if len(getattr(self, name)) != n:
                raise RecordError(f"series {name} has length {len(getattr(self, name))} != {n}")

    @property
    def k(self) -> np.ndarray:
        return np.arange(len(self.t))

    def to_csv(self, path) -> None:
        """Columns ``k, t, w_k, y_k, u_k`` at 17 significant digits."""
        write_table(path, SERIES_COLUMNS, zip(self.k, self.t, self.w, self.y, self.u))

    @classmethod
    def from_csv(cls, path) -> "RunRecord":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(header) != SERIES_COLUMNS:
                raise RecordError(f"{path}: expected header {','.join(SERIES_COLUMNS)}")
            rows = [[float(v) for v in r] for r in reader if r]
        if len(rows) < 2:
            raise RecordError(f"{path}: need at least two samples")
        a = np.array(rows)
        t = a[:, 1]
        dts = np.diff(t)
        dt = float(dts[0])
        if not dt > 0 or not np.allclose(dts, dt, rtol=1e-9, atol=1e-15):
            raise RecordError(f"{path}: nonuniform sampling")
        sidecar = Path(path).with_suffix(".json")
        meta = json.loads(sidecar.read_text()) if sidecar.exists() else {}
        return cls(t, a[:, 2], a[:, 3], a[:, 4], dt, meta.get("metrics", {}),
                   meta.get("provenance", {}))

    def write(self, csv_path) -> None:
        """Series CSV plus a JSON sidecar holding metrics and provenance."""
        self.to_csv(csv_path)
        write_json(Path(csv_path).with_suffix(".json"),
                   {"metrics": self.metrics, "provenance": self.provenance})


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, obj) -> None:
    """Deterministic JSON (sorted keys; non-finite floats written as strings)."""
    Path(path).write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


def write_table(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) if isinstance(v, (int, float, np.integer, np.floating, np.bool_))
                        else v for v in r])


def provenance(config_hash: str, **extra) -> dict:
    return {"config_hash": config_hash, "code_version": __version__, **extra}
