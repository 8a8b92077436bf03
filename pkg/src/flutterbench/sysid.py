"""Least-squares ARX identification of SISO sampled models.

The model is

    y[k+n] = a_{n-1} y[k+n-1] + ... + a_0 y[k] + b_{n-1} u[k+n-1] + ... + b_0 u[k],

i.e. ``theta = [a_{n-1} .. a_0, b_{n-1} .. b_0]`` and the induced transfer
function is ``(b_{n-1} q^{n-1} + ... + b_0) / (q^n - a_{n-1} q^{n-1} - ... - a_0)``.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import lti
from .lti import DiscreteTf

log = logging.getLogger(__name__)

__all__ = [
    "IdentificationError",
    "RankDeficientError",
    "IoDataset",
    "ArxModel",
    "SweepResult",
    "build_regression",
    "fit_arx",
    "order_sweep",
    "excite_and_record",
]


class IdentificationError(ValueError):
    """Invalid data or no acceptable model."""


class RankDeficientError(IdentificationError):
    """The regressor matrix does not have full column rank."""

    def __init__(self, msg, rank: int, n_columns: int):
        super().__init__(msg)
        self.rank = rank
        self.n_columns = n_columns


@dataclass(frozen=True)
class IoDataset:
    """Synchronously sampled input ``u`` and output ``y`` at period ``dt``."""

    u: np.ndarray
    y: np.ndarray
    dt: float
    description: dict = field(default_factory=dict)

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if u.shape != y.shape:
            raise IdentificationError(f"input and output lengths differ ({u.size} vs {y.size})")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(y))):
            raise IdentificationError("dataset contains non-finite samples")
        if not self.dt > 0:
            raise IdentificationError("sample period must be positive")
        u.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.u.size

    def to_csv(self, path) -> None:
        """Write columns ``k, t, u_k, y_k`` with 17 significant digits."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "t", "u_k", "y_k"])
            for k, (uk, yk) in enumerate(zip(self.u, self.y)):
                w.writerow([k, f"{k * self.dt:.17g}", f"{uk:.17g}", f"{yk:.17g}"])

    @classmethod
    def from_csv(cls, path, description: dict | None = None) -> "IoDataset":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise IdentificationError(f"{path}: no samples")
        missing = {"k", "t", "u_k", "y_k"} - set(rows[0])
        if missing:
            raise IdentificationError(f"{path}: missing columns {sorted(missing)}")
        t = np.array([float(r["t"]) for r in rows])
        dt = float(t[1] - t[0]) if t.size > 1 else 1.0
        if t.size > 2 and not np.allclose(np.diff(t), dt, rtol=1e-9, atol=0):
            raise IdentificationError(f"{path}: nonuniform sampling")
        return cls(np.array([float(r["u_k"]) for r in rows]),
                   np.array([float(r["y_k"]) for r in rows]), dt, dict(description or {}))


@dataclass(frozen=True)
class ArxModel:
    n: int
    theta: np.ndarray
    dt: float
    rmse: float
    stable: bool
    rank: int = -1

    @property
    def a(self) -> np.ndarray:
        return self.theta[:self.n]

    @property
    def b(self) -> np.ndarray:
        return self.theta[self.n:]

    @property
    def tf(self) -> DiscreteTf:
        return DiscreteTf.from_arx(self.a, self.b, self.dt)

    def predict(self, data: IoDataset, N: int | None = None) -> np.ndarray:
        """One-step-ahead predictions of ``y[n:n+N]``."""
        Phi, _ = build_regression(data, self.n, N)
        return Phi @ self.theta

    def to_dict(self) -> dict:
        return {"n": self.n, "a": self.a.tolist(), "b": self.b.tolist(), "dt": self.dt,
                "rmse": self.rmse, "stable": self.stable}

    @classmethod
    def from_dict(cls, d: dict) -> "ArxModel":
        theta = np.r_[np.asarray(d["a"], float), np.asarray(d["b"], float)]
        return cls(int(d["n"]), theta, float(d["dt"]), float(d["rmse"]), bool(d["stable"]))


def build_regression(data: IoDataset, n: int, N: int | None = None):
    """Regressor matrix ``Phi`` (N x 2n) and target ``Y`` (N).

    Row ``i`` is ``[y[i+n-1] .. y[i], u[i+n-1] .. u[i]]`` and ``Y[i] = y[i+n]``.
    ``N`` defaults to all available rows.
    """
    if n < 1:
        raise IdentificationError("model order must be at least 1")
    L = len(data)
    if N is None:
        N = L - n
    if N < 2 * n:
        raise IdentificationError(f"need N >= 2n regression rows (N={N}, n={n})")
    if L < n + N:
        raise IdentificationError(f"dataset has {L} samples; n + N = {n + N} required")
    # column j holds the sample lagged by j (j = 0 is the most recent)
    lags = np.arange(n - 1, -1, -1)
    idx = np.arange(N)[:, None] + lags[None, :]
    Phi = np.hstack([data.y[idx], data.u[idx]])
    Y = data.y[n:n + N].copy()
    return Phi, Y


def fit_arx(data: IoDataset, n: int, N: int | None = None,
            allow_rank_deficient: bool = False) -> ArxModel:
    """Least-squares ARX fit by an orthogonal factorization.

    Raises
    ------
    RankDeficientError
        If ``Phi`` is numerically rank deficient, unless ``allow_rank_deficient``
        is set, in which case the minimum-norm solution is returned.
    """
    Phi, Y = build_regression(data, n, N)
    theta, _, rank, sv = np.linalg.lstsq(Phi, Y, rcond=None)
    if rank < 2 * n and not allow_rank_deficient:
        raise RankDeficientError(
            f"regressor has numerical rank {rank} < {2 * n} (order {n})", int(rank), 2 * n)
    resid = Y - Phi @ theta
    rmse = float(np.sqrt(np.mean(resid**2)))
    tf = DiscreteTf.from_arx(theta[:n], theta[n:], data.dt)
    stable = lti.is_stable(lti.tf_to_ss(tf))[0]
    return ArxModel(n, theta, data.dt, rmse, stable, int(rank))


@dataclass(frozen=True)
class SweepResult:
    best: ArxModel
    table: list  # rows (n, rmse, stable, cost)
    models: dict

    def to_rows(self):
        return [{"n": n, "rmse": r, "stable": s, "cost": c} for n, r, s, c in self.table]


def order_sweep(data: IoDataset, n_range: Sequence[int], N: int | None = None,
                rtol: float = 0.01, reject_unstable: bool = True,
                workers: int = 1) -> SweepResult:
    """Fit every order in ``n_range`` and pick the cheapest stable model.

    Every order uses the same ``N`` (default: all rows available to the
    largest order) so the RMSE values are comparable. Unstable models cost
    infinity when ``reject_unstable``. Among models whose cost is within
    ``rtol`` of the minimum (or below round-off, ``1e-10`` times the output
    RMS) the smallest order wins.
    """
    n_range = sorted(set(int(n) for n in n_range))
    if not n_range:
        raise IdentificationError("empty order range")
    if N is None:
        N = len(data) - n_range[-1]

    def one(n):
        try:
            return n, fit_arx(data, n, N)
        except RankDeficientError as exc:
            log.info("order %d skipped: %s", n, exc)
            return n, None

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            fitted = list(ex.map(one, n_range))
    else:
        fitted = [one(n) for n in n_range]

    table, models = [], {}
    for n, m in fitted:
        if m is None:
            table.append((n, float("nan"), False, float("inf")))
            continue
        models[n] = m
        cost = m.rmse if (m.stable or not reject_unstable) else float("inf")
        table.append((n, m.rmse, m.stable, cost))
    costs = np.array([row[3] for row in table])
    if not np.any(np.isfinite(costs)):
        raise IdentificationError("every candidate model is unstable or rank deficient")
    cmin = float(np.min(costs))
    floor = 1e-10 * float(np.sqrt(np.mean(data.y**2)))
    chosen = next(row[0] for row in table if row[3] <= max(cmin * (1 + rtol), floor))
    return SweepResult(models[chosen], table, models)


def excite_and_record(runner: Callable[[np.ndarray], np.ndarray], dt: float, n_samples: int,
                      amplitude: float = 1e-3, seed: int = 0,
                      description: dict | None = None) -> IoDataset:
    """Drive ``runner`` with seeded Gaussian input and collect the output.

    ``runner(u)`` must apply ``u[k]`` over ``[k dt, (k+1) dt)`` and return
    the output sampled at ``k dt`` (before ``u[k]`` acts). The input is
    ``amplitude`` times standard normal draws from numpy's PCG64 generator.
    """
    if n_samples < 1:
        raise IdentificationError("need at least one sample")
    u = amplitude * np.random.default_rng(seed).standard_normal(n_samples)
    y = np.asarray(runner(u), dtype=float)
    desc = {"seed": seed, "amplitude": amplitude, "generator": "numpy PCG64 standard_normal"}
    desc.update(description or {})
    return IoDataset(u, y, dt, desc)
