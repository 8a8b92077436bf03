"""Sampled-data co-simulation of a discrete controller and the beam model.

At every tick ``k`` the tip displacement ``y_k = w(L, k Ts)`` is sampled,
the controller returns ``u_k`` from its current state (it has no
feedthrough) and then updates, and the actuator force ``p_c = u_k`` and the
disturbance are held over ``[k Ts, (k+1) Ts)`` while the integrator takes
``substeps`` steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fem import AeroPressureError, AeroParams, FemSystem, measure_tip
from .integrator import BeamState, GenAlphaConfig, IntegrationError, initial_state, step
from .lti import StateSpace

__all__ = [
    "SampledController",
    "DisturbanceSpec",
    "LoopRecord",
    "controller_step",
    "run_closed_loop",
    "run_input_sequence",
    "make_io_runner",
    "amplitude_metric",
    "attenuation",
]


class SampledController:
    """Discrete strictly proper controller ``x+ = A x + B y``, ``u = C x``."""

    def __init__(self, A, B, C, dt: float, x0=None):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.B = np.atleast_2d(np.asarray(B, dtype=float)).reshape(self.A.shape[0], -1)
        self.C = np.atleast_2d(np.asarray(C, dtype=float)).reshape(-1, self.A.shape[0])
        if self.A.shape[0] != self.A.shape[1]:
            raise ValueError("controller A must be square")
        if self.B.shape[1] != 1 or self.C.shape[0] != 1:
            raise ValueError("controller must be SISO")
        if not dt > 0:
            raise ValueError("sample period must be positive")
        self.dt = float(dt)
        n = self.A.shape[0]
        self.x0 = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).reshape(n)
        self.x = self.x0.copy()

    @classmethod
    def from_statespace(cls, sys: StateSpace) -> "SampledController":
        if not sys.is_discrete:
            raise ValueError("controller must be discrete")
        if np.any(sys.D != 0):
            raise ValueError("controller must be strictly proper (D = 0)")
        return cls(sys.A, sys.B, sys.C, sys.dt)

    @property
    def nstates(self) -> int:
        return self.A.shape[0]

    def reset(self) -> None:
        self.x = self.x0.copy()

    def step(self, y: float) -> float:
        return controller_step(self, y)


def controller_step(ctrl: SampledController, y_k: float) -> float:
    """Output from the current state, then advance the state with ``y_k``."""
    if not np.isfinite(y_k):
        raise ValueError("non-finite measurement")
    u = float(ctrl.C[0] @ ctrl.x)
    ctrl.x = ctrl.A @ ctrl.x + ctrl.B[:, 0] * y_k
    return u


@dataclass(frozen=True)
class DisturbanceSpec:
    """Exogenous load.

    ``harmonic``: ``w_k = amplitude * sin(frequency * k)`` (frequency in
    rad/sample) applied as the patch pressure ``p_e`` and held per tick.
    ``impulse``: a rectangular force of area ``impulse`` over one integrator
    step, applied through the control channel at ``impulse_time``.
    """

    kind: str = "harmonic"
    amplitude: float = 1e-3
    frequency: float = np.pi / 3
    patch: tuple = (0.7, 0.8)
    impulse: float = 1e-2
    impulse_time: float = 0.0

    def __post_init__(self):
        if self.kind not in ("harmonic", "impulse", "none"):
            raise ValueError(f"unknown disturbance kind {self.kind!r}")
        if not 0 <= self.frequency <= np.pi:
            raise ValueError("discrete frequency must lie in [0, pi] rad/sample")
        l1, l2 = self.patch
        if not l1 <= l2:
            raise ValueError("patch must satisfy l1 <= l2")
        if self.impulse_time < 0:
            raise ValueError("impulse time must be nonnegative")

    def sequence(self, n: int) -> np.ndarray:
        """Held values ``w_k`` for ``k = 0 .. n-1`` (zero unless harmonic)."""
        if self.kind != "harmonic":
            return np.zeros(n)
        return self.amplitude * np.sin(self.frequency * np.arange(n))


@dataclass
class LoopRecord:
    """Controller-rate log of a co-simulation."""

    k: np.ndarray
    t: np.ndarray
    w: np.ndarray
    y: np.ndarray
    u: np.ndarray
    dt: float
    newton_iterations: np.ndarray
    fine_t: np.ndarray | None = None
    fine_y: np.ndarray | None = None
    final_state: BeamState | None = None
    meta: dict = field(default_factory=dict)


Policy = Callable[[int, float], float]


def _cosimulate(fem: FemSystem, aero: AeroParams | None, n_ticks: int, Ts: float,
                substeps: int, policy: Policy, dist: DisturbanceSpec, rho_inf: float,
                record_fine: bool, state: BeamState | None = None, truncate: bool = False):
    if substeps < 1 or int(substeps) != substeps:
        raise ValueError("substep ratio must be a positive integer")
    cfg = GenAlphaConfig(dt=Ts / substeps, rho_inf=rho_inf)
    w = dist.sequence(n_ticks)
    y = np.empty(n_ticks)
    u = np.empty(n_ticks)
    iters = np.zeros(n_ticks, dtype=int)
    fine_t, fine_y = ([], []) if record_fine else (None, None)
    impulse_step = None
    if dist.kind == "impulse":
        impulse_step = int(round(dist.impulse_time / cfg.dt))
    s = initial_state(fem, aero) if state is None else state
    failure = None
    for k in range(n_ticks):
        try:
            y[k] = measure_tip(fem, s.u)
            u[k] = policy(k, y[k])
            for j in range(substeps):
                p_c = u[k]
                if impulse_step is not None and k * substeps + j == impulse_step:
                    p_c = p_c + dist.impulse / cfg.dt
                s, info = step(fem, aero, s, w[k], p_c, cfg)
                iters[k] = max(iters[k], info.iterations)
                if record_fine:
                    fine_t.append(s.t)
                    fine_y.append(measure_tip(fem, s.u))
        except (IntegrationError, AeroPressureError, ValueError, np.linalg.LinAlgError) as exc:
            if not truncate:
                raise
            # keep what was computed; the rest of the series is undefined
            failure = {"tick": k, "time": k * Ts, "error": f"{type(exc).__name__}: {exc}"}
            y[k:] = np.nan
            u[k:] = np.nan
            break
    ks = np.arange(n_ticks)
    rec = LoopRecord(ks, ks * Ts, w, y, u, Ts, iters,
                     np.asarray(fine_t) if record_fine else None,
                     np.asarray(fine_y) if record_fine else None, s)
    if failure is not None:
        rec.meta["failure"] = failure
    return rec


def _fem_for(fem: FemSystem, dist: DisturbanceSpec, x_c: float | None) -> FemSystem:
    patch = tuple(float(p) for p in dist.patch)
    if x_c is not None and not np.isclose(x_c, fem.x_c):
        fem = fem.with_actuator(x_c)
    if dist.kind == "harmonic" and patch != tuple(fem.patch):
        fem = fem.with_patch(patch)
    return fem


def run_closed_loop(fem: FemSystem, aero: AeroParams | None, ctrl: SampledController | None,
                    dist: DisturbanceSpec, t_end: float, Ts: float, substeps: int,
                    x_c: float | None = None, rho_inf: float = 0.8,
                    controller_off_time: float | None = None,
                    record_fine: bool = False, truncate_on_failure: bool = False) -> LoopRecord:
    """Co-simulate ``ctrl`` (or the open loop when ``None``) for ``t_end`` seconds.

    The controller state is reset first. After ``controller_off_time`` the
    actuator force is zero. With ``truncate_on_failure`` a numerical failure
    ends the run early instead of raising: the remaining samples are NaN and
    ``meta["failure"]`` describes what happened.
    """
    n_ticks = int(round(t_end / Ts))
    if n_ticks < 1 or not np.isclose(n_ticks * Ts, t_end, rtol=1e-9):
        raise ValueError("t_end must be a whole number of sample periods")
    if ctrl is not None:
        if not np.isclose(ctrl.dt, Ts, rtol=1e-12):
            raise ValueError(f"controller period {ctrl.dt} differs from Ts = {Ts}")
        ctrl.reset()
    k_off = n_ticks if controller_off_time is None else int(round(controller_off_time / Ts))

    def policy(k, yk):
        if ctrl is None or k >= k_off:
            return 0.0
        return controller_step(ctrl, yk)

    fem = _fem_for(fem, dist, x_c)
    rec = _cosimulate(fem, aero, n_ticks, Ts, substeps, policy, dist, rho_inf, record_fine,
                      truncate=truncate_on_failure)
    rec.meta.update({"x_c": fem.x_c, "patch": list(fem.patch), "closed_loop": ctrl is not None,
                     "controller_off_time": controller_off_time})
    return rec


def run_input_sequence(fem: FemSystem, aero: AeroParams | None, u_seq, Ts: float,
                       substeps: int, dist: DisturbanceSpec | None = None,
                       rho_inf: float = 0.8) -> LoopRecord:
    """Apply a prescribed input sequence through the control channel."""
    u_seq = np.asarray(u_seq, dtype=float)
    dist = DisturbanceSpec(kind="none") if dist is None else dist
    fem = _fem_for(fem, dist, None)
    return _cosimulate(fem, aero, u_seq.size, Ts, substeps, lambda k, yk: u_seq[k], dist,
                       rho_inf, False)


def make_io_runner(fem: FemSystem, aero: AeroParams | None, Ts: float, substeps: int,
                   dist: DisturbanceSpec | None = None, rho_inf: float = 0.8):
    """Callable ``u -> y`` suitable for :func:`flutterbench.sysid.excite_and_record`."""
    def runner(u):
        return run_input_sequence(fem, aero, u, Ts, substeps, dist, rho_inf).y
    return runner


def amplitude_metric(y, window: float = 0.3):
    """Peak ``max |y|`` and RMS over the final ``window`` fraction of ``y``."""
    y = np.asarray(getattr(y, "y", y), dtype=float)
    if not 0 < window <= 1:
        raise ValueError("window must be a fraction in (0, 1]")
    n = int(np.floor(window * y.size))
    if n < 1:
        raise ValueError("empty window")
    tail = y[-n:]
    return float(np.max(np.abs(tail))), float(np.sqrt(np.mean(tail**2)))


def attenuation(open_loop, closed_loop, window: float = 0.3) -> float:
    """Ratio of open-loop to closed-loop peak over the final window."""
    ol, _ = amplitude_metric(open_loop, window)
    cl, _ = amplitude_metric(closed_loop, window)
    return ol / cl if cl > 0 else float("inf")
