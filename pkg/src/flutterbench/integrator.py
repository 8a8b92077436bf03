"""Generalized-alpha time integration of the nonlinear beam.

The residual is evaluated at the generalized midpoints,

    M a_m + K(u_f) u_f + C v_f - f_aero(u_f, v_f) - f_e p_e - f_c p_c = 0,

with ``a_m = (1 - am) a1 + am a0`` and ``u_f, v_f`` interpolated with ``af``.
Newton iterates on the end-of-step acceleration with the analytic tangent.
External loads are held constant over each step.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .fem import (AeroParams, FemSystem, aero_jacobian, aero_load, internal_force,
                  measure_tip, strain_energy, tangent_stiffness)

log = logging.getLogger(__name__)

__all__ = [
    "IntegrationError",
    "GenAlphaConfig",
    "BeamState",
    "StepInfo",
    "Trajectory",
    "initial_state",
    "step",
    "simulate",
    "total_energy",
]


class IntegrationError(ArithmeticError):
    """Newton failed to converge within the iteration budget."""

    def __init__(self, msg, residual=None, t=None):
        super().__init__(msg)
        self.residual = residual
        self.t = t


@dataclass(frozen=True)
class GenAlphaConfig:
    """Chung-Hulbert parameters derived from the high-frequency spectral radius."""

    dt: float
    rho_inf: float = 0.8
    newton_tol: float = 1e-10
    newton_max_iter: int = 25

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("time step must be positive")
        if not 0.0 <= self.rho_inf <= 1.0:
            raise ValueError("spectral radius must lie in [0, 1]")
        if self.newton_max_iter < 1:
            raise ValueError("need at least one Newton iteration")

    @property
    def alpha_m(self) -> float:
        return (2.0 * self.rho_inf - 1.0) / (self.rho_inf + 1.0)

    @property
    def alpha_f(self) -> float:
        return self.rho_inf / (self.rho_inf + 1.0)

    @property
    def gamma(self) -> float:
        return 0.5 - self.alpha_m + self.alpha_f

    @property
    def beta(self) -> float:
        return 0.25 * (1.0 - self.alpha_m + self.alpha_f) ** 2


@dataclass(frozen=True)
class BeamState:
    u: np.ndarray
    v: np.ndarray
    a: np.ndarray
    t: float = 0.0

    @classmethod
    def zeros(cls, n_dof: int, t: float = 0.0) -> "BeamState":
        z = np.zeros(n_dof)
        return cls(z, z.copy(), z.copy(), t)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v))
                    and np.all(np.isfinite(self.a)))


@dataclass(frozen=True)
class StepInfo:
    iterations: int
    residual: float


def _forces(sys, aero, u, v, p_e, p_c):
    """Net load ``f - K(u) u`` (everything except inertia)."""
    return (aero_load(sys, aero, u, v) - sys.C_d @ v - internal_force(sys, u)
            + sys.f_e * p_e + sys.f_c * p_c)


def initial_state(sys: FemSystem, aero: AeroParams | None, u0=None, v0=None,
                  p_e: float = 0.0, p_c: float = 0.0, t: float = 0.0) -> BeamState:
    """State with acceleration consistent with the equation of motion.

    The two penalized root DOFs of ``u0`` are replaced by their static
    equilibrium values for the given free DOFs, and the root velocities are
    zeroed. Otherwise a shape built for the clamped limit would start with
    penalty forces of order ``kappa * 0`` residuals amplified into enormous
    root accelerations.
    """
    n = sys.n_dof
    u0 = np.zeros(n) if u0 is None else np.asarray(u0, dtype=float).copy()
    v0 = np.zeros(n) if v0 is None else np.asarray(v0, dtype=float).copy()
    r, f = slice(0, 2), slice(2, None)
    u0[r] = -np.linalg.solve(sys.K0[r, r], sys.K0[r, f] @ u0[f])
    v0[r] = 0.0
    a0 = np.linalg.solve(sys.M, _forces(sys, aero, u0, v0, p_e, p_c))
    return BeamState(u0, v0, a0, t)


def step(sys: FemSystem, aero: AeroParams | None, state: BeamState, p_e: float, p_c: float,
         cfg: GenAlphaConfig) -> tuple[BeamState, StepInfo]:
    """Advance one step of size ``cfg.dt`` with loads held at ``(p_e, p_c)``.

    Raises
    ------
    IntegrationError
        If the Newton residual does not drop below ``newton_tol`` times the
        reference force within ``newton_max_iter`` iterations.
    AeroPressureError
        Propagated from the aerodynamic model.
    """
    dt = cfg.dt
    am, af, g, b = cfg.alpha_m, cfg.alpha_f, cfg.gamma, cfg.beta
    u0, v0, a0 = state.u, state.v, state.a
    M = sys.M
    u_pred = u0 + dt * v0 + dt * dt * (0.5 - b) * a0
    v_pred = v0 + dt * (1.0 - g) * a0
    aero_on = aero is not None and aero.enabled
    absK0 = np.abs(sys.K0)

    a1 = a0.copy()
    it = 0
    rnorm = np.inf
    while True:
        u1 = u_pred + dt * dt * b * a1
        v1 = v_pred + dt * g * a1
        uf = (1.0 - af) * u1 + af * u0
        vf = (1.0 - af) * v1 + af * v0
        inertia = M @ ((1.0 - am) * a1 + am * a0)
        load = _forces(sys, aero, uf, vf, p_e, p_c)
        r = inertia - load
        rnorm = float(np.linalg.norm(r))
        ref = max(np.linalg.norm(inertia), np.linalg.norm(load), 1e-300)
        # the root penalty makes K0 u carry round-off far above tol * ref
        mag = np.abs(u_pred) + dt * dt * b * np.abs(a1) + np.abs(u0)
        floor = 1e2 * np.finfo(float).eps * np.linalg.norm(absK0 @ mag)
        if rnorm <= cfg.newton_tol * ref + floor:
            break
        if it >= cfg.newton_max_iter:
            raise IntegrationError(
                f"Newton did not converge at t = {state.t + dt:.6g} s "
                f"(residual {rnorm:.3e}, reference {ref:.3e})", rnorm, state.t + dt)
        KT = tangent_stiffness(sys, uf)
        CT = sys.C_d
        if aero_on:
            dfu, dfv = aero_jacobian(sys, aero, uf, vf)
            KT = KT - dfu
            CT = CT - dfv
        J = (1.0 - am) * M + (1.0 - af) * (b * dt * dt * KT + g * dt * CT)
        da = sla.lu_solve(sla.lu_factor(J, check_finite=False), -r, check_finite=False)
        a1 = a1 + da
        it += 1
        if np.linalg.norm(da) <= 1e-13 * np.linalg.norm(a1):
            # the correction is at round-off level; so is the residual
            u1 = u_pred + dt * dt * b * a1
            v1 = v_pred + dt * g * a1
            break

    new = BeamState(u1, v1, a1, state.t + dt)
    if not new.is_finite():
        raise IntegrationError(f"non-finite state at t = {new.t:.6g} s", rnorm, new.t)
    return new, StepInfo(it, rnorm)


@dataclass
class Trajectory:
    """Uniformly sampled output of :func:`simulate`."""

    t: np.ndarray
    tip: np.ndarray
    newton_iterations: np.ndarray
    final: BeamState
    states: list = field(default_factory=list)


Forcing = Callable[[float], tuple[float, float]]


def simulate(sys: FemSystem, aero: AeroParams | None, initial: BeamState,
             forcing: Forcing | None, t_end: float, cfg: GenAlphaConfig,
             keep_states: bool = False) -> Trajectory:
    """Integrate from ``initial.t`` to ``t_end`` at the fixed step ``cfg.dt``.

    ``forcing(t)`` returns ``(p_e, p_c)`` and is sampled at the start of each
    step. The tip displacement is recorded at every step, including the
    initial one.
    """
    n_steps = int(round((t_end - initial.t) / cfg.dt))
    if n_steps < 0 or not np.isclose(initial.t + n_steps * cfg.dt, t_end, rtol=1e-9, atol=1e-12):
        raise ValueError("t_end must be reachable from the initial time in whole steps")
    t = initial.t + cfg.dt * np.arange(n_steps + 1)
    tip = np.empty(n_steps + 1)
    iters = np.zeros(n_steps + 1, dtype=int)
    tip[0] = measure_tip(sys, initial.u)
    states = [initial] if keep_states else []
    s = initial
    for k in range(n_steps):
        p_e, p_c = forcing(s.t) if forcing is not None else (0.0, 0.0)
        s, info = step(sys, aero, s, p_e, p_c, cfg)
        tip[k + 1] = measure_tip(sys, s.u)
        iters[k + 1] = info.iterations
        if keep_states:
            states.append(s)
    if n_steps:
        log.debug("simulate: %d steps, max Newton iterations %d", n_steps, iters.max())
    return Trajectory(t, tip, iters, s, states)


def total_energy(sys: FemSystem, state: BeamState) -> float:
    """Kinetic plus elastic energy (including the quartic membrane term)."""
    return 0.5 * float(state.v @ sys.M @ state.v) + strain_energy(sys, state.u)
