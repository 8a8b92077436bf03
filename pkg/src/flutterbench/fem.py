"""Hermite finite-element model of a moderately deflecting cantilever.

The beam carries four load channels: a distributed excitation over a patch
``(l1, l2)``, a point control force at ``x_c``, mass-proportional damping and
first-order-accurate piston-theory aerodynamic pressure. Degrees of freedom are
ordered ``[w_0, w'_0, w_1, w'_1, ...]`` from the root to the tip; the root is
clamped by a penalty on ``w_0`` and ``w'_0``.

The semi-discrete system is ``M u'' + K(u) u = f(u, u', t)`` with
``K(u) = K_L + K_b + K_N(u)`` and

    K_N(u) = c_N (u' G u) G,   G = int phi_x phi_x^T dx,

so the membrane force is uniform along the span.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as sla

__all__ = [
    "FemError",
    "AeroPressureError",
    "BeamProperties",
    "AeroParams",
    "FemSystem",
    "ModalData",
    "build_fem",
    "hermite_basis",
    "nonlinear_stiffness",
    "internal_force",
    "tangent_stiffness",
    "aero_load",
    "aero_jacobian",
    "total_force",
    "measure_tip",
    "linearized_modes",
    "strain_energy",
]

N_GAUSS = 7
PENALTY_FACTOR = 1e7


class FemError(ValueError):
    """Invalid beam, load or measurement specification."""


class AeroPressureError(ArithmeticError):
    """The piston-theory pressure base became nonpositive (slope or velocity too large)."""

    def __init__(self, msg, max_mach_normal=None):
        super().__init__(msg)
        self.max_mach_normal = max_mach_normal


@dataclass(frozen=True)
class BeamProperties:
    """Material and geometric constants of a unit-width beam.

    Parameters
    ----------
    E, nu, rho : float
        Young's modulus (Pa), Poisson ratio and density (kg/m^3).
    zeta : float
        Damping ratio imposed on the first bending mode.
    h, L : float
        Thickness and length (m).
    n_elements : int
        Number of Hermite elements.
    bending_model : {"plate", "beam"}
        ``plate`` uses ``E h^3 / (12 (1 - nu^2))``, ``beam`` uses ``E h^3 / 12``.
    membrane : {"flexural", "von_karman"}
        Coefficient of the axial force ``N = c_N int w_x^2 dx``: ``E I`` for
        ``flexural`` and ``E h / (2 L)`` for ``von_karman``.
    """

    E: float = 1e9
    nu: float = 0.3
    rho: float = 1.0
    zeta: float = 0.05
    h: float = 0.002
    L: float = 1.0
    n_elements: int = 20
    bending_model: str = "plate"
    membrane: str = "flexural"

    def __post_init__(self):
        if min(self.E, self.rho, self.h, self.L) <= 0:
            raise FemError("E, rho, h and L must be positive")
        if not 0 <= self.nu < 0.5:
            raise FemError(f"Poisson ratio {self.nu} outside [0, 0.5)")
        if self.zeta < 0:
            raise FemError("damping ratio must be nonnegative")
        if int(self.n_elements) != self.n_elements or self.n_elements < 2:
            raise FemError("need at least two elements")
        if self.bending_model not in ("plate", "beam"):
            raise FemError(f"unknown bending model {self.bending_model!r}")
        if self.membrane not in ("flexural", "von_karman"):
            raise FemError(f"unknown membrane model {self.membrane!r}")

    @property
    def D_bend(self) -> float:
        EI = self.E * self.h**3 / 12.0
        return EI / (1.0 - self.nu**2) if self.bending_model == "plate" else EI

    @property
    def m(self) -> float:
        """Mass per unit length and width."""
        return self.rho * self.h

    @property
    def membrane_coefficient(self) -> float:
        if self.membrane == "flexural":
            return self.E * self.h**3 / 12.0
        return self.E * self.h / (2.0 * self.L)

    @property
    def n_dof(self) -> int:
        return 2 * (self.n_elements + 1)


@dataclass(frozen=True)
class AeroParams:
    """Piston-theory parameters.

    ``a_inf`` defaults to the closure ``sqrt(lam D / (rho_inf M L^3))`` with
    ``rho_inf = mu m / L``. When ``p_inf`` is ``None`` the static pressure is
    taken consistent with the flow parameter, ``p_inf = lam D / (gamma M L^3)``,
    which makes the linear aerodynamic stiffness equal ``lam D / L^3``.
    """

    mach: float = 8.0
    lam: float = 600.0
    mu: float = 0.1
    gamma: float = 1.4
    p_inf: float | None = 1.88
    a_inf: float | None = None
    enabled: bool = True

    def __post_init__(self):
        if self.gamma <= 1:
            raise FemError("specific heat ratio must exceed 1")
        if self.mach <= 1:
            raise FemError("piston theory needs a supersonic Mach number")
        if self.p_inf is not None and self.p_inf <= 0:
            raise FemError("static pressure must be positive")
        if self.lam <= 0 or self.mu <= 0:
            raise FemError("flow parameter and mass ratio must be positive")
        if self.a_inf is not None and self.a_inf <= 0:
            raise FemError("speed of sound must be positive")

    def rho_inf(self, props: BeamProperties) -> float:
        return self.mu * props.m / props.L

    def speed_of_sound(self, props: BeamProperties) -> float:
        if self.a_inf is not None:
            return float(self.a_inf)
        return float(np.sqrt(self.lam * props.D_bend
                             / (self.rho_inf(props) * self.mach * props.L**3)))

    def pressure(self, props: BeamProperties) -> float:
        if self.p_inf is not None:
            return float(self.p_inf)
        return self.lam * props.D_bend / (self.gamma * self.mach * props.L**3)

    def effective_lambda(self, props: BeamProperties) -> float:
        """Nondimensional aerodynamic stiffness ``gamma p M L^3 / D``."""
        return self.gamma * self.pressure(props) * self.mach * props.L**3 / props.D_bend


def hermite_basis(xi, l: float, deriv: int = 0) -> np.ndarray:
    """Cubic Hermite functions (or derivatives in x) at local coordinates ``xi``.

    Returns an array of shape ``(len(xi), 4)`` ordered ``[w_a, w'_a, w_b, w'_b]``.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if deriv == 0:
        cols = [1 - 3 * xi**2 + 2 * xi**3, l * (xi - 2 * xi**2 + xi**3),
                3 * xi**2 - 2 * xi**3, l * (-xi**2 + xi**3)]
    elif deriv == 1:
        cols = [(-6 * xi + 6 * xi**2) / l, 1 - 4 * xi + 3 * xi**2,
                (6 * xi - 6 * xi**2) / l, -2 * xi + 3 * xi**2]
    elif deriv == 2:
        cols = [(-6 + 12 * xi) / l**2, (-4 + 6 * xi) / l,
                (6 - 12 * xi) / l**2, (-2 + 6 * xi) / l]
    else:
        raise ValueError("deriv must be 0, 1 or 2")
    return np.stack(cols, axis=-1)


def _element_mass(m, l):
    return m * l / 420.0 * np.array([
        [156, 22 * l, 54, -13 * l],
        [22 * l, 4 * l * l, 13 * l, -3 * l * l],
        [54, 13 * l, 156, -22 * l],
        [-13 * l, -3 * l * l, -22 * l, 4 * l * l],
    ])


def _element_stiffness(D, l):
    return D / l**3 * np.array([
        [12, 6 * l, -12, 6 * l],
        [6 * l, 4 * l * l, -6 * l, 2 * l * l],
        [-12, -6 * l, 12, -6 * l],
        [6 * l, 2 * l * l, -6 * l, 4 * l * l],
    ])


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FemSystem:
    """Assembled operators of the beam model (immutable).

    ``Phi_q`` and ``dPhi_q`` hold the global shape functions and their slopes
    at the ``7 * n_elements`` Gauss points, with weights ``w_q``, so any
    integral ``int g(x) phi dx`` becomes ``Phi_q.T @ (w_q * g(x_q))``.
    """

    props: BeamProperties
    nodes: np.ndarray
    M: np.ndarray
    K_L: np.ndarray
    K_b: np.ndarray
    C_d: np.ndarray
    G: np.ndarray
    f_e: np.ndarray
    f_c: np.ndarray
    x_q: np.ndarray
    w_q: np.ndarray
    Phi_q: np.ndarray
    dPhi_q: np.ndarray
    patch: tuple[float, float]
    x_c: float
    omega1: float
    penalty: float
    K0: np.ndarray = field(repr=False, default=None)

    @property
    def n_dof(self) -> int:
        return self.M.shape[0]

    @property
    def element_length(self) -> float:
        return self.props.L / self.props.n_elements

    @cached_property
    def tip_row(self) -> np.ndarray:
        return shape_row(self, self.props.L)

    def with_actuator(self, x_c: float) -> "FemSystem":
        return build_fem(self.props, x_c=x_c, patch=self.patch)

    def with_patch(self, patch) -> "FemSystem":
        return build_fem(self.props, x_c=self.x_c, patch=patch)


def _locate(props: BeamProperties, x: float):
    """Element index and local coordinate of ``x``; nodes snap to exact values."""
    le = props.L / props.n_elements
    s = x / le
    r = round(s)
    if abs(s - r) < 1e-10:
        s = float(r)
    e = min(int(np.floor(s)), props.n_elements - 1)
    return e, s - e


def shape_row(sys: FemSystem, x: float, deriv: int = 0) -> np.ndarray:
    """Global row vector ``phi(x)`` (or its slope) so that ``w(x) = row @ u``."""
    props = sys.props
    if not -1e-12 <= x <= props.L * (1 + 1e-12):
        raise FemError(f"location {x} outside the beam [0, {props.L}]")
    e, xi = _locate(props, min(max(x, 0.0), props.L))
    row = np.zeros(sys.n_dof)
    row[2 * e:2 * e + 4] = hermite_basis([xi], sys.element_length, deriv)[0]
    return row


def build_fem(props: BeamProperties = BeamProperties(), x_c: float | None = None,
              patch=(0.7, 0.8)) -> FemSystem:
    """Assemble mass, stiffness, penalty, damping and load operators.

    Parameters
    ----------
    props : BeamProperties
    x_c : float, optional
        Control force location in ``(0, L]``; defaults to the tip.
    patch : (float, float)
        Excitation patch ``(l1, l2)`` with ``0 <= l1 <= l2 <= L``. An empty
        patch gives a zero excitation vector.
    """
    L, ne = props.L, int(props.n_elements)
    x_c = L if x_c is None else float(x_c)
    l1, l2 = (float(v) for v in patch)
    if not (0.0 <= l1 <= l2 <= L):
        raise FemError(f"patch ({l1}, {l2}) must satisfy 0 <= l1 <= l2 <= L")
    if not 0.0 < x_c <= L:
        raise FemError(f"actuator location {x_c} must lie in (0, {L}]")

    le = L / ne
    nd = 2 * (ne + 1)
    nodes = np.linspace(0.0, L, ne + 1)

    # assembly: every element contributes to the 4x4 block starting at 2e
    idx = 2 * np.arange(ne)[:, None] + np.arange(4)[None, :]
    rows = np.repeat(idx, 4, axis=1).ravel()
    cols = np.tile(idx, (1, 4)).ravel()
    Me = _element_mass(props.m, le)
    Ke = _element_stiffness(props.D_bend, le)
    M = np.zeros((nd, nd))
    K_L = np.zeros((nd, nd))
    np.add.at(M, (rows, cols), np.tile(Me.ravel(), ne))
    np.add.at(K_L, (rows, cols), np.tile(Ke.ravel(), ne))

    gp, gw = np.polynomial.legendre.leggauss(N_GAUSS)
    xi = 0.5 * (gp + 1.0)
    wl = 0.5 * gw * le
    N0 = hermite_basis(xi, le, 0)
    N1 = hermite_basis(xi, le, 1)
    nq = ne * N_GAUSS
    x_q = (nodes[:-1, None] + le * xi[None, :]).ravel()
    w_q = np.tile(wl, ne)
    Phi_q = np.zeros((nq, nd))
    dPhi_q = np.zeros((nq, nd))
    for e in range(ne):
        q = slice(e * N_GAUSS, (e + 1) * N_GAUSS)
        Phi_q[q, 2 * e:2 * e + 4] = N0
        dPhi_q[q, 2 * e:2 * e + 4] = N1
    G = dPhi_q.T @ (w_q[:, None] * dPhi_q)
    G = 0.5 * (G + G.T)  # exact symmetry; the product above is symmetric only to round-off

    kappa = PENALTY_FACTOR * np.max(np.diag(K_L))
    K_b = np.zeros((nd, nd))
    K_b[0, 0] = K_b[1, 1] = kappa
    K0 = K_L + K_b

    # excitation: int over the patch of phi, element-wise Gauss on the overlap
    f_e = np.zeros(nd)
    if l2 > l1:
        for e in range(ne):
            a, b = max(l1, nodes[e]), min(l2, nodes[e + 1])
            if b <= a:
                continue
            xs = 0.5 * (a + b) + 0.5 * (b - a) * gp
            f_e[2 * e:2 * e + 4] += (0.5 * (b - a) * gw) @ hermite_basis((xs - nodes[e]) / le, le)
    e_c, xi_c = _locate(props, x_c)
    f_c = np.zeros(nd)
    f_c[2 * e_c:2 * e_c + 4] = hermite_basis([xi_c], le)[0]

    # modal quantities use the clamped limit: the penalty would put the
    # stiffness matrix at condition ~1e16 and spoil the low eigenvalues
    w2 = sla.eigh(K_L[2:, 2:], M[2:, 2:], eigvals_only=True, subset_by_index=[0, 0])
    omega1 = float(np.sqrt(w2[0]))
    C_d = 2.0 * props.zeta * omega1 * M

    return FemSystem(props, _readonly(nodes), _readonly(M), _readonly(K_L), _readonly(K_b),
                     _readonly(C_d), _readonly(G), _readonly(f_e), _readonly(f_c),
                     _readonly(x_q), _readonly(w_q), _readonly(Phi_q), _readonly(dPhi_q),
                     (l1, l2), x_c, omega1, float(kappa), _readonly(K0))


def nonlinear_stiffness(sys: FemSystem, u) -> np.ndarray:
    """``K_N(u) = c_N (u^T G u) G``; symmetric positive semidefinite."""
    u = np.asarray(u, dtype=float)
    return sys.props.membrane_coefficient * float(u @ sys.G @ u) * sys.G


def internal_force(sys: FemSystem, u) -> np.ndarray:
    """Elastic restoring force ``K(u) u``."""
    u = np.asarray(u, dtype=float)
    Gu = sys.G @ u
    return sys.K0 @ u + sys.props.membrane_coefficient * float(u @ Gu) * Gu


def tangent_stiffness(sys: FemSystem, u) -> np.ndarray:
    """Jacobian of :func:`internal_force`: ``K0 + c_N [(u'Gu) G + 2 (Gu)(Gu)^T]``."""
    u = np.asarray(u, dtype=float)
    Gu = sys.G @ u
    c = sys.props.membrane_coefficient
    return sys.K0 + c * (float(u @ Gu) * sys.G + 2.0 * np.outer(Gu, Gu))


def strain_energy(sys: FemSystem, u) -> float:
    """Elastic energy ``u'K0u/2 + c_N (u'Gu)^2 / 4`` whose gradient is the internal force."""
    u = np.asarray(u, dtype=float)
    s = float(u @ sys.G @ u)
    return 0.5 * float(u @ sys.K0 @ u) + 0.25 * sys.props.membrane_coefficient * s * s


def _mach_normal(sys, aero, props, u, v):
    a_inf = aero.speed_of_sound(props)
    return aero.mach * (sys.dPhi_q @ u) + (sys.Phi_q @ v) / a_inf, a_inf


def aero_load(sys: FemSystem, aero: AeroParams | None, u, v) -> np.ndarray:
    """Consistent load vector of the piston-theory pressure.

    The pressure pushes against positive ``w`` when the local normal Mach
    number is positive, so the returned vector is ``-int phi p_a dx``.

    Raises
    ------
    AeroPressureError
        If ``1 + (gamma - 1) M_n / 2 <= 0`` at any quadrature point.
    """
    if aero is None or not aero.enabled:
        return np.zeros(sys.n_dof)
    props = sys.props
    Mn, _ = _mach_normal(sys, aero, props, np.asarray(u, float), np.asarray(v, float))
    g = aero.gamma
    base = 1.0 + 0.5 * (g - 1.0) * Mn
    if np.any(base <= 0):
        raise AeroPressureError(
            f"piston-theory base nonpositive (min normal Mach {Mn.min():.4g}); "
            "slope or velocity too large", float(np.max(np.abs(Mn))))
    # log1p/expm1 keep full relative accuracy for small normal Mach numbers
    p = aero.pressure(props) * np.expm1(2.0 * g / (g - 1.0) * np.log1p(0.5 * (g - 1.0) * Mn))
    return -(sys.Phi_q.T @ (sys.w_q * p))


def aero_jacobian(sys: FemSystem, aero: AeroParams | None, u, v):
    """Derivatives of :func:`aero_load` with respect to ``u`` and ``v``."""
    nd = sys.n_dof
    if aero is None or not aero.enabled:
        return np.zeros((nd, nd)), np.zeros((nd, nd))
    props = sys.props
    Mn, a_inf = _mach_normal(sys, aero, props, np.asarray(u, float), np.asarray(v, float))
    g = aero.gamma
    base = 1.0 + 0.5 * (g - 1.0) * Mn
    if np.any(base <= 0):
        raise AeroPressureError("piston-theory base nonpositive", float(np.max(np.abs(Mn))))
    # dp/dMn = p_inf * gamma * base^(2g/(g-1) - 1)
    dp = aero.pressure(props) * g * base ** (2.0 * g / (g - 1.0) - 1.0)
    W = sys.w_q * dp
    PW = sys.Phi_q.T * W[None, :]
    return -aero.mach * (PW @ sys.dPhi_q), -(PW @ sys.Phi_q) / a_inf


def total_force(sys: FemSystem, aero: AeroParams | None, u, v, p_e: float = 0.0,
                p_c: float = 0.0) -> np.ndarray:
    """Right-hand side ``f_1(u, v) + f_e p_e + f_c p_c`` with damping and aero in ``f_1``."""
    v = np.asarray(v, dtype=float)
    return -(sys.C_d @ v) + aero_load(sys, aero, u, v) + sys.f_e * p_e + sys.f_c * p_c


def measure_tip(sys: FemSystem, u, x: float | None = None) -> float:
    """Displacement ``phi(x)^T u``; the tip when ``x`` is omitted."""
    row = sys.tip_row if x is None else shape_row(sys, x)
    return float(row @ np.asarray(u, dtype=float))


@dataclass(frozen=True)
class ModalData:
    """Linearized modes sorted by frequency."""

    frequencies_hz: np.ndarray
    damping_ratios: np.ndarray
    eigenvalues: np.ndarray

    @property
    def unstable(self) -> bool:
        return bool(np.any(self.eigenvalues.real > 0))

    @property
    def max_growth_rate(self) -> float:
        return float(np.max(self.eigenvalues.real))


def linearized_modes(sys: FemSystem, aero: AeroParams | None = None) -> ModalData:
    """Eigen-analysis of the first-order form linearized about ``u = 0``.

    The two penalized root DOFs are eliminated (the infinite-penalty limit),
    which keeps the eigenproblem well conditioned.
    """
    nd = sys.n_dof
    dfdu, dfdv = aero_jacobian(sys, aero, np.zeros(nd), np.zeros(nd))
    f = slice(2, None)
    K = (sys.K_L - dfdu)[f, f]
    C = (sys.C_d - dfdv)[f, f]
    Mf = sys.M[f, f]
    n = nd - 2
    A = np.block([[np.zeros((n, n)), np.eye(n)],
                  [-np.linalg.solve(Mf, K), -np.linalg.solve(Mf, C)]])
    lam = np.linalg.eigvals(A)
    lam = lam[lam.imag >= 0]
    mag = np.abs(lam)
    order = np.argsort(mag)
    lam, mag = lam[order], mag[order]
    with np.errstate(invalid="ignore", divide="ignore"):
        zeta = np.where(mag > 0, -lam.real / mag, 0.0)
    return ModalData(mag / (2 * np.pi), zeta, lam)
