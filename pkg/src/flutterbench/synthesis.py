"""Frequency-weighted generalized plant and H-infinity output-feedback synthesis.

The disturbance is assumed to enter where the control acts (``Gzw = Gzu``,
``Gyw = Gyu``). The controller output is shaped by ``Wu`` before reaching the
plant, and the output weight defines ``y_f = Wy y``::

    y   = G (w + Wu u_c)
    y_f = Wy y
    z   = y_f  (performance="filtered", default)   or  y  (performance="output")
    m   = y_f  (measurement="filtered", default)   or  y  (measurement="raw")

Penalizing ``y_f`` concentrates the attenuation where ``Wy`` peaks. Feeding
the controller ``y_f`` as well gives the textbook weighted loop, but ``Wy``
has a zero at ``z = 1`` which the design then inverts, producing a
controller pole on the unit circle that tolerates no model error. With
``measurement="raw"`` the weight acts only on the objective and that pole
never appears.

Synthesis maps the discrete plant to continuous time with the bilinear map
(which preserves the H-infinity norm), solves the two-Riccati central
controller for general feedthrough terms, and maps the
controller back. The returned discrete controller is strictly proper because
the design plant carries a one-sample delay on the measurement.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import lti
from .lti import DiscreteTf, StateSpace
from .riccati import RiccatiError, solve_hamiltonian_are

log = logging.getLogger(__name__)

__all__ = [
    "SynthesisError",
    "WeightPair",
    "GeneralizedPlant",
    "SynthesisResult",
    "WEIGHT_PRESETS",
    "weight_preset",
    "design_weights",
    "build_generalized_plant",
    "hinf_synthesize",
    "h2_cost",
]


class SynthesisError(RuntimeError):
    """No controller meeting the requested bound was found."""


@dataclass(frozen=True)
class WeightPair:
    """Output weight ``Wy`` and control weight ``Wu``; both proper and stable."""

    Wy: DiscreteTf
    Wu: DiscreteTf

    def __post_init__(self):
        if not np.isclose(self.Wy.dt, self.Wu.dt, rtol=1e-12, atol=0):
            raise lti.LtiError("weights must share the sample period")
        for name, w in (("Wy", self.Wy), ("Wu", self.Wu)):
            if w.order >= 1 and np.max(np.abs(w.poles())) >= 1.0:
                raise lti.LtiError(f"weight {name} is not stable")

    @property
    def dt(self) -> float:
        return self.Wy.dt


def _weight_ss(tf: DiscreteTf) -> StateSpace:
    if tf.order == 0:
        return lti.static_gain([[tf.num[0] / tf.den[0]]], tf.dt)
    return lti.tf_to_ss(tf)


# Filter pairs used in the two reference campaigns, coefficient-exact.
WEIGHT_PRESETS = {
    "harmonic": dict(
        dt=5e-3,
        Wy=([7.75, -7.75], [1.0, -0.99, 0.98]),
        Wu=([1.0], [1.0, 0.01]),
    ),
    "flutter": dict(
        dt=1e-3,
        Wy=([0.0042, -0.0042], [1.0, -1.806, 0.995]),
        Wu=([0.566, -0.987, 0.52], [1.0, -0.987, 0.087]),
    ),
}


def weight_preset(name: str) -> WeightPair:
    """Named filter pair (``"harmonic"`` or ``"flutter"``)."""
    try:
        p = WEIGHT_PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown weight preset {name!r}; choose from {sorted(WEIGHT_PRESETS)}") from None
    return WeightPair(DiscreteTf(*p["Wy"], dt=p["dt"]), DiscreteTf(*p["Wu"], dt=p["dt"]))


def design_weights(peak_frequency: float, dt: float, pole_radius: float = 0.99,
                   gain_y: float = 1.0, gain_u: float = 1.0, u_pole: float = -0.01) -> WeightPair:
    """Resonant output weight and first-order control weight.

    ``Wy(q) = gain_y (q - 1) / (q^2 - 2 r cos(wT) q + r^2)`` peaks at
    ``peak_frequency`` (rad/s) with sharpness set by ``pole_radius``;
    ``Wu(q) = gain_u / (q - u_pole)``.
    """
    nyq = np.pi / dt
    if not 0 < peak_frequency < nyq:
        raise ValueError(f"peak frequency {peak_frequency:.6g} rad/s outside (0, Nyquist={nyq:.6g})")
    if not 0 < pole_radius < 1:
        raise ValueError("pole radius must lie in (0, 1)")
    theta = peak_frequency * dt
    Wy = DiscreteTf([gain_y, -gain_y],
                    [1.0, -2 * pole_radius * np.cos(theta), pole_radius**2], dt)
    Wu = DiscreteTf([gain_u], [1.0, -u_pole], dt)
    return WeightPair(Wy, Wu)


@dataclass(frozen=True)
class GeneralizedPlant:
    """Partitioned plant with inputs ``[w, u_c]`` and outputs ``[z, m]``.

    ``z`` and ``m`` are ``y_f`` or ``y`` according to ``performance`` and
    ``measurement``. State ordering is ``[x_G, x_Wu, x_Wy]``.
    """

    system: StateSpace
    G: StateSpace
    weights: WeightPair
    performance: str = "filtered"
    measurement: str = "filtered"
    n_w: int = 1
    n_u: int = 1
    n_z: int = 1
    n_y: int = 1

    @property
    def block_sizes(self) -> tuple[int, int, int]:
        return (self.G.nstates, _weight_ss(self.weights.Wu).nstates,
                _weight_ss(self.weights.Wy).nstates)


def build_generalized_plant(G, weights: WeightPair, performance: str = "filtered",
                            measurement: str = "filtered") -> GeneralizedPlant:
    """Assemble the weighted plant from one shared realization of ``G``.

    Parameters
    ----------
    G : DiscreteTf or StateSpace
        Identified SISO plant.
    weights : WeightPair
        Output and control weights at the plant's sample period.
    performance : {"filtered", "output"}
        Whether the performance channel is the weighted output ``y_f`` or
        the raw output ``y``.
    measurement : {"filtered", "raw"}
        Whether the controller is fed ``y_f`` or the raw sampled output.
    """
    if performance not in ("filtered", "output"):
        raise ValueError(f"unknown performance channel {performance!r}")
    if measurement not in ("filtered", "raw"):
        raise ValueError(f"unknown measurement channel {measurement!r}")
    Gss = lti.tf_to_ss(G) if isinstance(G, DiscreteTf) else G
    if not Gss.is_discrete:
        raise lti.LtiError("plant must be discrete")
    if not np.isclose(Gss.dt, weights.dt, rtol=1e-12, atol=0):
        raise lti.LtiError(f"plant sample period {Gss.dt} differs from weights {weights.dt}")
    if Gss.ninputs != 1 or Gss.noutputs != 1:
        raise lti.LtiError("plant must be SISO")
    Wu = _weight_ss(weights.Wu)
    Wy = _weight_ss(weights.Wy)
    ng, nu, ny = Gss.nstates, Wu.nstates, Wy.nstates
    Ag, Bg, Cg, Dg = Gss.A, Gss.B, Gss.C, Gss.D
    Au, Bu, Cu, Du = Wu.A, Wu.B, Wu.C, Wu.D
    Ay, By, Cy, Dy = Wy.A, Wy.B, Wy.C, Wy.D

    # v = w + Cu xu + Du uc  feeds G; y = Cg xg + Dg v; y_f = Cy xy + Dy y
    A = np.zeros((ng + nu + ny,) * 2)
    g, u, y = slice(0, ng), slice(ng, ng + nu), slice(ng + nu, ng + nu + ny)
    A[g, g] = Ag
    A[g, u] = Bg @ Cu
    A[u, u] = Au
    A[y, g] = By @ Cg
    A[y, u] = By @ Dg @ Cu
    A[y, y] = Ay
    B = np.zeros((ng + nu + ny, 2))
    B[g, 0:1] = Bg
    B[g, 1:2] = Bg @ Du
    B[u, 1:2] = Bu
    B[y, 0:1] = By @ Dg
    B[y, 1:2] = By @ Dg @ Du
    C = np.zeros((2, ng + nu + ny))
    C[0:1, g] = Cg
    C[0:1, u] = Dg @ Cu
    C[1:2, g] = Dy @ Cg
    C[1:2, u] = Dy @ Dg @ Cu
    C[1:2, y] = Cy
    D = np.array([
        [Dg[0, 0], (Dg @ Du)[0, 0]],
        [(Dy @ Dg)[0, 0], (Dy @ Dg @ Du)[0, 0]],
    ])
    raw_row, filt_row = (C[0].copy(), D[0].copy()), (C[1].copy(), D[1].copy())
    C[0], D[0] = filt_row if performance == "filtered" else raw_row
    C[1], D[1] = filt_row if measurement == "filtered" else raw_row
    return GeneralizedPlant(StateSpace(A, B, C, D, Gss.dt), Gss, weights, performance,
                            measurement)


@dataclass
class SynthesisResult:
    """Outcome of :func:`hinf_synthesize`.

    ``controller`` maps the design measurement (``y_f`` or ``y``) to ``u_c``
    and has zero feedthrough. ``implemented`` is the map from the raw
    sampled output to the actuator force that runs against the beam:
    ``Wu * controller`` for a raw measurement and ``Wu * controller * Wy``
    for a filtered one.
    """

    controller: StateSpace
    implemented: StateSpace
    gamma: float
    hinf_closed_loop: float
    h2_cost: float
    stability_margin: float
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "controller": self.controller.to_dict(),
            "implemented": self.implemented.to_dict(),
            "gamma": self.gamma,
            "hinf_closed_loop": self.hinf_closed_loop,
            "h2_cost": self.h2_cost,
            "stability_margin": self.stability_margin,
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SynthesisResult":
        return cls(StateSpace.from_dict(d["controller"]), StateSpace.from_dict(d["implemented"]),
                   d["gamma"], d["hinf_closed_loop"], d["h2_cost"], d["stability_margin"],
                   d.get("diagnostics", {}))


# ---------------------------------------------------------------------------
# continuous-time central controller for general feedthrough


def _chol_lower(M):
    if M.size == 0:
        return M
    return np.linalg.cholesky(0.5 * (M + M.T))


def _inv(M):
    return np.linalg.inv(M) if M.size else M


def _central_controller(P: StateSpace, n_y: int, n_u: int, gamma: float):
    """Central H-infinity controller at level ``gamma`` or ``None`` if infeasible.

    Requires ``D12`` full column rank and ``D21`` full row rank; ``D22`` may
    be nonzero and is removed by loop shifting.
    """
    n = P.nstates
    p, m = P.noutputs, P.ninputs
    p1, m1 = p - n_y, m - n_u
    p2, m2 = n_y, n_u
    A = P.A
    B1, B2 = P.B[:, :m1], P.B[:, m1:]
    C1, C2 = P.C[:p1], P.C[p1:]
    D11, D12 = P.D[:p1, :m1], P.D[:p1, m1:]
    D21, D22 = P.D[p1:, :m1], P.D[p1:, m1:]

    # normalize D12 -> [0; I]
    qz, rz = np.linalg.qr(D12, mode="complete")
    Ru = rz[:m2, :m2]
    perm_z = np.r_[m2:p1, 0:m2]
    Tz = qz.T[perm_z]
    C1n, D11n = Tz @ C1, Tz @ D11
    Rui = np.linalg.inv(Ru)
    B2n = B2 @ Rui
    D12n = Tz @ D12 @ Rui
    # normalize D21 -> [0 I]
    qw, rw = np.linalg.qr(D21.T, mode="complete")
    Ly = rw[:p2, :p2].T
    perm_w = np.r_[p2:m1, 0:p2]
    Tw = qw[:, perm_w]
    Lyi = np.linalg.inv(Ly)
    B1n, D11n = B1 @ Tw, D11n @ Tw
    C2n = Lyi @ C2
    D21n = Lyi @ D21 @ Tw

    q1, r1 = p1 - m2, m1 - p2
    D1111, D1112 = D11n[:q1, :r1], D11n[:q1, r1:]
    D1121, D1122 = D11n[q1:, :r1], D11n[q1:, r1:]
    lower = max(np.linalg.norm(np.hstack([D1111, D1112]), 2) if q1 else 0.0,
                np.linalg.norm(np.vstack([D1111, D1121]), 2) if r1 else 0.0)
    if gamma <= lower * (1 + 1e-12):
        return None, {"reason": "gamma below feedthrough bound", "bound": lower}

    g2 = gamma**2
    Bn = np.hstack([B1n, B2n])
    Cn = np.vstack([C1n, C2n])
    D1dot = np.hstack([D11n, D12n])
    Ddot1 = np.vstack([D11n, D21n])
    R = D1dot.T @ D1dot - np.diag(np.r_[np.full(m1, g2), np.zeros(m2)])
    Rt = Ddot1 @ Ddot1.T - np.diag(np.r_[np.full(p1, g2), np.zeros(p2)])
    Ri, Rti = np.linalg.inv(R), np.linalg.inv(Rt)

    Hx = (np.block([[A, np.zeros((n, n))], [-C1n.T @ C1n, -A.T]])
          - np.vstack([Bn, -C1n.T @ D1dot]) @ Ri @ np.hstack([D1dot.T @ C1n, Bn.T]))
    Hy = (np.block([[A.T, np.zeros((n, n))], [-B1n @ B1n.T, -A]])
          - np.vstack([Cn.T, -B1n @ Ddot1.T]) @ Rti @ np.hstack([Ddot1 @ B1n.T, Cn]))
    try:
        xs = solve_hamiltonian_are(Hx)
        ys = solve_hamiltonian_are(Hy)
    except RiccatiError as exc:
        return None, {"reason": str(exc)}
    X, Y = xs.X, ys.X
    sx = max(1.0, np.max(np.abs(X)))
    sy = max(1.0, np.max(np.abs(Y)))
    if np.min(np.linalg.eigvalsh(X)) < -1e-9 * sx or np.min(np.linalg.eigvalsh(Y)) < -1e-9 * sy:
        return None, {"reason": "Riccati solution not positive semidefinite"}
    rho = float(np.max(np.abs(np.linalg.eigvals(X @ Y))))
    if rho >= g2 * (1 - 1e-9):
        return None, {"reason": "spectral radius coupling violated", "rho": rho}

    F = -Ri @ (D1dot.T @ C1n + Bn.T @ X)
    Lg = -(B1n @ Ddot1.T + Y @ Cn.T) @ Rti
    F2 = F[m1:]
    F12 = F[r1:m1]
    L2 = Lg[:, p1:]
    L12 = Lg[:, q1:p1]

    Dh11 = -D1121 @ D1111.T @ _inv(g2 * np.eye(q1) - D1111 @ D1111.T) @ D1112 - D1122
    Dh12 = _chol_lower(np.eye(m2) - D1121 @ _inv(g2 * np.eye(r1) - D1111.T @ D1111) @ D1121.T)
    Dh21 = _chol_lower(np.eye(p2) - D1112.T @ _inv(g2 * np.eye(q1) - D1111 @ D1111.T) @ D1112).T
    Z = np.linalg.inv(np.eye(n) - Y @ X / g2)
    Bh2 = Z @ (B2n + L12) @ Dh12
    Ch2 = -Dh21 @ (C2n + F12)
    Bh1 = -Z @ L2 + Bh2 @ np.linalg.solve(Dh12, Dh11)
    Ch1 = F2 + Dh11 @ np.linalg.solve(Dh21, Ch2)
    Ah = A + Bn @ F + Bh1 @ np.linalg.solve(Dh21, Ch2)

    # undo the normalizations: u = Ru^-1 u~, y~ = Ly^-1 y
    Ak, Bk, Ck, Dk = Ah, Bh1 @ Lyi, Rui @ Ch1, Rui @ Dh11 @ Lyi
    # undo the D22 loop shift
    W = np.linalg.inv(np.eye(n_u) + Dk @ D22)
    Ak2 = Ak - Bk @ D22 @ W @ Ck
    Bk2 = Bk @ (np.eye(n_y) - D22 @ W @ Dk)
    Ck2 = W @ Ck
    Dk2 = W @ Dk
    info = {
        "rho_XY": rho,
        "x_residual": xs.residual,
        "y_residual": ys.residual,
        "x_newton_iterations": xs.newton_iterations,
        "y_newton_iterations": ys.newton_iterations,
        "cond_Z": float(np.linalg.cond(Z)),
    }
    return StateSpace(Ak2, Bk2, Ck2, Dk2, None), info


def _regularize(P: StateSpace, n_y: int, n_u: int, rho: float, sigma: float) -> StateSpace:
    """Append a ``rho``-weighted control penalty and a ``sigma``-weighted sensor noise."""
    p, m = P.noutputs, P.ninputs
    p1, m1 = p - n_y, m - n_u
    B = np.hstack([P.B[:, :m1], np.zeros((P.nstates, n_y)), P.B[:, m1:]])
    C = np.vstack([P.C[:p1], np.zeros((n_u, P.nstates)), P.C[p1:]])
    D = np.zeros((p + n_u, m + n_y))
    D[:p1, :m1] = P.D[:p1, :m1]
    D[:p1, m1 + n_y:] = P.D[:p1, m1:]
    D[p1:p1 + n_u, m1 + n_y:] = rho * np.eye(n_u)
    D[p1 + n_u:, :m1] = P.D[p1:, :m1]
    D[p1 + n_u:, m1:m1 + n_y] = sigma * np.eye(n_y)
    D[p1 + n_u:, m1 + n_y:] = P.D[p1:, m1:]
    return StateSpace(P.A, B, C, D, P.dt)


def _delay_measurement(P: StateSpace, n_y: int) -> StateSpace:
    """Plant whose measurement is the original one delayed by one sample."""
    n, p = P.nstates, P.noutputs
    p1 = p - n_y
    A = np.block([[P.A, np.zeros((n, n_y))], [P.C[p1:], np.zeros((n_y, n_y))]])
    B = np.vstack([P.B, P.D[p1:]])
    C = np.block([[P.C[:p1], np.zeros((p1, n_y))], [np.zeros((n_y, n)), np.eye(n_y)]])
    D = np.vstack([P.D[:p1], np.zeros((n_y, P.ninputs))])
    return StateSpace(A, B, C, D, P.dt)


def _to_unit_bilinear(P: StateSpace) -> StateSpace:
    return lti.d2c_bilinear(StateSpace(P.A, P.B, P.C, P.D, 2.0))


def _from_unit_bilinear(K: StateSpace, dt: float) -> StateSpace:
    Kd = lti.c2d_bilinear(K, 2.0)
    return StateSpace(Kd.A, Kd.B, Kd.C, Kd.D, dt)


def _balance(P: StateSpace) -> StateSpace:
    """Diagonal state scaling that balances ``A``."""
    _, (s, _) = sla.matrix_balance(P.A, permute=False, separate=True)
    return StateSpace(P.A / s[:, None] * s[None, :], P.B / s[:, None], P.C * s[None, :],
                      P.D, P.dt)


def _closed_loop_ok(P: StateSpace, K: StateSpace, n_y: int, n_u: int) -> bool:
    try:
        cl = lti.feedback_lower(P, K, n_y, n_u)
    except lti.IllPosedLoopError:
        return False
    return cl.stable


def hinf_synthesize(plant: GeneralizedPlant, gamma_target: float | None = None,
                    control_weight: float = 0.1, noise_weight: float = 0.1,
                    rel_gap: float = 0.01,
                    measurement_delay: bool = True, max_iter: int = 60) -> SynthesisResult:
    """Discrete output-feedback controller minimizing the weighted H-infinity norm.

    Bisection over ``gamma`` between 0 and twice the open-loop norm plus one,
    stopped at ``rel_gap`` relative width. Each candidate level is decided by
    the two-Riccati solvability conditions and a stability check of the
    resulting central controller. The final controller is certified on the
    unregularized discrete closed loop.

    Parameters
    ----------
    plant : GeneralizedPlant
    gamma_target : float, optional
        Skip the bisection and design at this level.
    control_weight, noise_weight : float
        Weights of the auxiliary control-penalty output and sensor-noise
        input added for regularity. They are not small perturbations: the
        identified model omits the lightly damped high modes that alias into
        the band, and these penalties keep the loop gain low enough there
        to tolerate them. Both must be positive.
    rel_gap : float
        Relative width at which the bisection stops.
    measurement_delay : bool
        Design against a one-sample delayed measurement so that the
        controller needs no feedthrough.

    Raises
    ------
    SynthesisError
        If no controller is found at the upper bound (or at ``gamma_target``).
    """
    P = plant.system
    n_y, n_u = plant.n_y, plant.n_u
    dt = P.dt
    Pd = _delay_measurement(P, n_y) if measurement_delay else P
    if control_weight <= 0 or noise_weight <= 0:
        raise ValueError("control_weight and noise_weight must be positive")
    Preg = _regularize(Pd, n_y, n_u, control_weight, noise_weight)
    Pc = _balance(_to_unit_bilinear(Preg))
    n_yr = n_y
    n_ur = n_u

    open_loop = P.subsystem(slice(0, plant.n_z), slice(0, plant.n_w))
    ol_stable = lti.is_stable(open_loop)[0]
    gamma_ol = lti.hinf_norm(open_loop) if ol_stable else None

    history = []

    def attempt(gamma):
        K, info = _central_controller(Pc, n_yr, n_ur, gamma)
        ok = K is not None
        if ok:
            Kd = _from_unit_bilinear(K, dt)
            ok = _closed_loop_ok(Pd, Kd, n_y, n_u)
            if not ok:
                info = dict(info, reason="central controller does not stabilize the plant")
        else:
            Kd = None
        history.append({"gamma": float(gamma), "feasible": bool(ok),
                        **{k: v for k, v in info.items() if isinstance(v, (int, float, str))}})
        return (Kd, info) if ok else (None, info)

    if gamma_target is not None:
        gamma = float(gamma_target)
        Kd, info = attempt(gamma)
        if Kd is None:
            raise SynthesisError(f"no controller found at gamma = {gamma:.6g}: {info.get('reason')}")
    else:
        hi = 2.0 * (gamma_ol if gamma_ol is not None else 1.0) + 1.0
        Kd, info = attempt(hi)
        grow = 0
        while Kd is None and gamma_ol is None and grow < 20:
            hi *= 4.0
            grow += 1
            Kd, info = attempt(hi)
        if Kd is None:
            raise SynthesisError(f"no controller found at the bisection upper bound {hi:.6g}: "
                                 f"{info.get('reason')}")
        lo = 0.0
        best = (hi, Kd, info)
        for _ in range(max_iter):
            if (hi - lo) <= rel_gap * hi:
                break
            mid = 0.5 * (lo + hi)
            Kd_mid, info_mid = attempt(mid)
            if Kd_mid is None:
                lo = mid
            else:
                hi = mid
                best = (mid, Kd_mid, info_mid)
        gamma, Kd, info = best

    K_yf = lti.series(Kd, lti.delay(dt, n_y)) if measurement_delay else Kd
    if np.any(K_yf.D != 0):
        log.info("truncating controller feedthrough of norm %.3g", np.linalg.norm(K_yf.D))
        K_yf = StateSpace(K_yf.A, K_yf.B, K_yf.C, np.zeros_like(K_yf.D), dt)
    cl = lti.feedback_lower(P, K_yf, n_y, n_u)
    if not cl.stable:
        raise SynthesisError("synthesized controller does not stabilize the weighted plant")
    hinf_cl = lti.hinf_norm(cl)
    cost = lti.h2_norm(cl) ** 2
    Wy = _weight_ss(plant.weights.Wy)
    Wu = _weight_ss(plant.weights.Wu)
    implemented = lti.series(Wu, lti.series(K_yf, Wy) if plant.measurement == "filtered" else K_yf)
    diagnostics = {
        "gamma_open_loop": gamma_ol,
        "bisection": history,
        "riccati": {k: v for k, v in info.items() if isinstance(v, (int, float))},
        "control_weight": control_weight,
        "noise_weight": noise_weight,
        "performance": plant.performance,
        "measurement": plant.measurement,
        "measurement_delay": measurement_delay,
        "certificate_ratio": hinf_cl / gamma,
    }
    log.info("synthesis: gamma=%.6g, certified %.6g, H2 cost %.6g", gamma, hinf_cl, cost)
    return SynthesisResult(K_yf, implemented, float(gamma), float(hinf_cl), float(cost),
                           float(cl.stability_margin), diagnostics)


def h2_cost(plant: GeneralizedPlant, controller: StateSpace) -> float:
    """Squared H2 norm of the weighted closed loop; raises if it is unstable."""
    cl = lti.feedback_lower(plant.system, controller, plant.n_y, plant.n_u)
    return lti.h2_norm(cl) ** 2
