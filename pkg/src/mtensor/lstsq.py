"""Least-squares and regularized solutions of ``A *_M X *_M B = C``.

Here ``A`` is ``m x k x p``, ``B`` is ``s x n x p`` and the unknown is
``k x s x p``; nothing needs to be square or invertible.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import core
from .core import (
    DimensionError,
    _hat,
    _pinv_slice,
    _unhat,
    block2x2,
    frobenius_norm,
    hconcat,
    identity_tensor,
    m_chain,
    mp_inverse,
    vconcat,
    zeros_like,
)

CONSISTENCY_TOL = 1e-9


class InconsistentSystemError(core.TensorError):
    pass


@dataclass(frozen=True)
class RegularizationParams:
    lam: float
    mu: float

    def __post_init__(self):
        if not (self.lam > 0 and self.mu > 0):
            raise ValueError(f"regularization parameters must be positive, got {self.lam}, {self.mu}")


def _check_general(A, B, C):
    if A.m != C.m or B.n != C.n or not (A.p == B.p == C.p):
        raise DimensionError(f"incompatible shapes A{A.shape} B{B.shape} C{C.shape}")


def is_consistent(A, B, C, T, tol=CONSISTENCY_TOL):
    """Whether ``A A^+ C B^+ B = C`` holds, i.e. the equation has a solution."""
    _check_general(A, B, C)
    proj = m_chain(T, A, mp_inverse(A, T), C, mp_inverse(B, T), B)
    return frobenius_norm(proj - C) <= tol * max(1.0, frobenius_norm(C))


def general_solution(A, B, C, Z, T, check=True):
    """``A^+ C B^+ + Z - A^+ A Z B B^+``: every solution arises for some ``Z``.

    The Moore-Penrose inverse serves as the inner inverse.
    """
    _check_general(A, B, C)
    if Z.shape != (A.n, B.m, A.p):
        raise DimensionError(f"Z must have shape {(A.n, B.m, A.p)}, got {Z.shape}")
    if check and not is_consistent(A, B, C, T):
        raise InconsistentSystemError("A *_M X *_M B = C has no solution")
    Ap, Bp = mp_inverse(A, T), mp_inverse(B, T)
    return m_chain(T, Ap, C, Bp) + Z - m_chain(T, Ap, A, Z, B, Bp)


def min_norm_lstsq(A, B, C, T):
    """Minimum-norm least-squares solution ``A^+ *_M C *_M B^+``."""
    _check_general(A, B, C)
    return m_chain(T, mp_inverse(A, T), C, mp_inverse(B, T))


def _shifted_pinv(a, shift):
    """``(a* a + shift I)^-1 a*`` without forming ``a* a``.

    The QR factor ``R`` of ``[a; sqrt(shift) I]`` is the Cholesky factor of
    ``a* a + shift I``, so the operator is ``R^-1 Q_top*``. Working with
    ``R`` keeps the condition number at the square root of the normal
    equations' one.
    """
    m, k = a.shape
    Q, R = np.linalg.qr(np.vstack([a, np.sqrt(shift) * np.eye(k)]))
    return scipy.linalg.solve_triangular(R, Q[:m].conj().T)


def tikhonov_solve(A, B, C, reg, T):
    """Two-sided Tikhonov solution

    ``(A* A + lam I)^-1 A* C B* (B B* + mu I)^-1``

    Both shifted operators are Hermitian positive definite in every hat
    slice; their Cholesky factors come from a QR of the stacked matrices
    ``[A; sqrt(lam) I]`` and ``[B*; sqrt(mu) I]``. Tends to
    :func:`min_norm_lstsq` as ``lam, mu -> 0``.
    """
    if not isinstance(reg, RegularizationParams):
        reg = RegularizationParams(*reg)
    _check_general(A, B, C)
    Ah, Bh, Ch = _hat(A, T), _hat(B, T), _hat(C, T)
    out = np.empty((A.p, A.n, B.m), dtype=np.complex128)
    for i in range(A.p):
        left = _shifted_pinv(Ah[i], reg.lam)
        # B* (B B* + mu I)^-1 = ((B B* + mu I)^-1 B)*
        right = _shifted_pinv(Bh[i].conj().T, reg.mu).conj().T
        out[i] = left @ Ch[i] @ right
    return _unhat(out, T)


# --------------------------------------------------------------------------
# Sylvester equations A1 Y + Y B1 = C1


def sylvester_embed(A1, B1, C1, T):
    """Write ``A1 *_M Y + Y *_M B1 = C1`` as ``A *_M X *_M B = C``.

    Returns ``(A, B, C, lift)`` with ``A = [A1, I]``, ``B = [I; B1]`` and
    ``lift(Y) = [[Y, O], [O, Y]]``, so that ``A *_M lift(Y) *_M B`` equals
    ``A1 *_M Y + Y *_M B1``.
    """
    m, n = A1.m, B1.m
    if A1.m != A1.n or B1.m != B1.n:
        raise DimensionError("A1 and B1 must have square slices")
    if C1.shape != (m, n, A1.p) or B1.p != A1.p:
        raise DimensionError(f"C1 must have shape {(m, n, A1.p)}, got {C1.shape}")
    A = hconcat(A1, identity_tensor(m, T))
    B = vconcat(identity_tensor(n, T), B1)

    def lift(Y):
        if Y.shape != C1.shape:
            raise DimensionError(f"Y must have shape {C1.shape}")
        O = zeros_like(Y)
        return block2x2(Y, O, O, Y)

    return A, B, C1, lift


def sylvester_solve(A1, B1, C1, T):
    """Solve ``A1 *_M Y + Y *_M B1 = C1`` through the block embedding.

    The embedded operator ``Y -> A *_M lift(Y) *_M B`` is restricted to the
    block-diagonal unknowns ``lift(Y)``. In each hat slice that restriction
    is ``sum_j kron(B_j^T, A_j)`` over the two diagonal blocks ``j`` and is
    solved in the minimum-norm least-squares sense.
    """
    A, B, C, _ = sylvester_embed(A1, B1, C1, T)
    m, n = A1.m, B1.m
    Ah, Bh, Ch = _hat(A, T), _hat(B, T), _hat(C, T)
    out = np.empty((A.p, m, n), dtype=np.complex128)
    for i in range(A.p):
        K = np.zeros((m * n, m * n), dtype=np.complex128)
        for j in range(2):
            Aj = Ah[i][:, j * m:(j + 1) * m]
            Bj = Bh[i][j * n:(j + 1) * n, :]
            K += np.kron(Bj.T, Aj)
        # column-major vec: vec(A Y B) = kron(B^T, A) vec(Y)
        rhs = Ch[i].reshape(-1, order="F")
        y = _pinv_slice(K) @ rhs
        out[i] = y.reshape((m, n), order="F")
    return _unhat(out, T)


def sylvester_residual(A1, B1, C1, Y, T):
    return frobenius_norm(m_chain(T, A1, Y) + m_chain(T, Y, B1) - C1)
