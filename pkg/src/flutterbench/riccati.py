"""Algebraic Riccati equation solvers.

Both solvers compute the stabilizing solution from an ordered Schur (or QZ)
decomposition and then polish it with Newton steps whose inner problems are
Lyapunov equations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

__all__ = ["RiccatiError", "RiccatiSolution", "solve_dare", "solve_hamiltonian_are"]


class RiccatiError(ArithmeticError):
    """No stabilizing solution could be computed."""

    def __init__(self, msg, eigenvalues=None):
        super().__init__(msg)
        self.eigenvalues = eigenvalues


@dataclass
class RiccatiSolution:
    X: np.ndarray
    residual: float
    newton_iterations: int
    closed_loop_eigenvalues: np.ndarray


def _sym(X):
    return 0.5 * (X + X.T)


def _dare_residual(A, B, Q, R, S, X):
    G = R + B.T @ X @ B
    K = np.linalg.solve(G, B.T @ X @ A + S.T)
    res = A.T @ X @ A - X - (A.T @ X @ B + S) @ K + Q
    return res, K


def solve_dare(A, B, Q, R, S=None, tol: float = 1e-9, max_newton: int = 20) -> RiccatiSolution:
    """Stabilizing solution of the discrete algebraic Riccati equation.

    Solves ``X = A'XA - (A'XB + S)(R + B'XB)^-1 (B'XA + S') + Q``.

    The extended symplectic pencil is reduced by ordered QZ, picking the
    generalized eigenvalues inside the unit circle. Hewer's Newton iteration
    then refines ``X`` until the residual is below ``tol * max(1, ||X||)``.

    Raises
    ------
    RiccatiError
        If the pencil has eigenvalues on the unit circle or the refined
        solution does not stabilize ``A - B K``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    R = np.atleast_2d(np.asarray(R, dtype=float))
    n, m = B.shape
    S = np.zeros((n, m)) if S is None else np.atleast_2d(np.asarray(S, dtype=float))

    # pencil  lambda * Mm - Lm  on the stacked vector [x; costate; u]
    Lm = np.block([
        [A, np.zeros((n, n)), B],
        [-Q, np.eye(n), -S],
        [S.T, np.zeros((m, n)), R],
    ])
    Mm = np.block([
        [np.eye(n), np.zeros((n, n)), np.zeros((n, m))],
        [np.zeros((n, n)), A.T, np.zeros((n, m))],
        [np.zeros((m, n)), -B.T, np.zeros((m, m))],
    ])
    # compress the input block away so only the 2n finite/infinite pair remains
    q, _ = np.linalg.qr(Lm[:, 2 * n:], mode="complete")
    q2 = q[:, m:]
    L2 = q2.T @ Lm[:, :2 * n]
    M2 = q2.T @ Mm[:, :2 * n]
    try:
        AA, BB, alpha, beta, Qz, Z = sla.ordqz(L2, M2, sort="iuc", output="real")
    except ValueError as exc:  # reordering failed for eigenvalues on the circle
        raise RiccatiError(f"ordered QZ failed: {exc}") from exc
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = alpha / beta
    n_stable = int(np.sum(np.abs(lam) < 1.0))
    near_circle = np.abs(np.abs(lam) - 1.0) < 1e-10
    if n_stable != n or np.any(near_circle):
        raise RiccatiError("symplectic pencil has no n-dimensional stable deflating subspace", lam)
    U1, U2 = Z[:n, :n], Z[n:, :n]
    X = _sym(np.linalg.solve(U1.T, U2.T).T)

    it = 0
    res, K = _dare_residual(A, B, Q, R, S, X)
    rnorm = np.linalg.norm(res)
    while rnorm > tol * max(1.0, np.linalg.norm(X)) and it < max_newton:
        Acl = A - B @ K
        W = Q - S @ K - K.T @ S.T + K.T @ R @ K
        Xn = _sym(sla.solve_discrete_lyapunov(Acl.T, _sym(W)))
        res_n, K_n = _dare_residual(A, B, Q, R, S, Xn)
        it += 1
        if np.linalg.norm(res_n) >= rnorm:
            break
        X, res, K, rnorm = Xn, res_n, K_n, np.linalg.norm(res_n)

    eig_cl = np.linalg.eigvals(A - B @ K)
    if np.max(np.abs(eig_cl)) >= 1.0:
        raise RiccatiError("Riccati solution is not stabilizing", eig_cl)
    return RiccatiSolution(X, float(rnorm), it, eig_cl)


def solve_hamiltonian_are(H: np.ndarray, tol: float = 1e-9, max_newton: int = 8,
                          axis_tol: float = 1e-8) -> RiccatiSolution:
    """Stabilizing solution ``X = Ric(H)`` of a Hamiltonian matrix.

    ``H = [[F, -G], [-Q, -F']]`` corresponds to ``F'X + XF - XGX + Q = 0``
    with ``G`` and ``Q`` symmetric but possibly indefinite.

    Raises
    ------
    RiccatiError
        If ``H`` has eigenvalues on (or numerically near) the imaginary
        axis, or the stable invariant subspace is not complementary to
        ``span([0; I])``.
    """
    H = np.asarray(H, dtype=float)
    n = H.shape[0] // 2
    F = H[:n, :n]
    G = -H[:n, n:]
    Q = -H[n:, :n]
    try:
        T, U, sdim = sla.schur(H, output="real", sort="lhp")
    except ValueError as exc:  # eigenvalues too close to the axis to reorder
        raise RiccatiError(f"ordered Schur failed: {exc}") from exc
    ev = np.linalg.eigvals(T)
    scale = max(1.0, np.max(np.abs(ev)))
    if sdim != n or np.min(np.abs(ev.real)) < axis_tol * scale:
        raise RiccatiError("Hamiltonian has eigenvalues on the imaginary axis", ev)
    U1, U2 = U[:n, :n], U[n:, :n]
    if np.linalg.cond(U1) > 1e13:
        raise RiccatiError("stable subspace is not complementary (Ric undefined)", ev)
    X = _sym(np.linalg.solve(U1.T, U2.T).T)

    def residual(X):
        return F.T @ X + X @ F - X @ G @ X + Q

    res = residual(X)
    rnorm = np.linalg.norm(res)
    it = 0
    while rnorm > tol * max(1.0, np.linalg.norm(X)) and it < max_newton:
        Acl = F - G @ X
        Xn = _sym(sla.solve_continuous_lyapunov(Acl.T, -(Q + X @ G @ X)))
        res_n = residual(Xn)
        it += 1
        if np.linalg.norm(res_n) >= rnorm:
            break
        X, res, rnorm = Xn, res_n, np.linalg.norm(res_n)

    eig_cl = np.linalg.eigvals(F - G @ X)
    if np.max(eig_cl.real) >= 0:
        raise RiccatiError("Riccati solution is not stabilizing", eig_cl)
    return RiccatiSolution(X, float(rnorm), it, eig_cl)
