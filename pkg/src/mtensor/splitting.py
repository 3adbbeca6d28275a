"""Tensor splittings ``A = F - G`` and the AOR family."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import core
from .core import (
    DimensionError,
    Tensor3,
    _hat,
    diag_part,
    frobenius_norm,
    inverse,
    is_nonnegative,
    m_product,
    spectral_radius,
    strict_lower_part,
    strict_upper_part,
)

SPLIT_TOL = 1e-12


class ZeroDiagonalError(core.TensorError):
    """A transform-domain diagonal entry of the splitting matrix vanishes."""

    def __init__(self, slice_index, row):
        self.slice_index = slice_index
        self.row = row
        super().__init__(f"zero diagonal entry at hat slice {slice_index}, row {row}")


class InconsistentSplittingError(core.TensorError):
    pass


class SplittingClass(enum.Flag):
    """Sign classes of a splitting; a regular splitting carries all three flags.

    ``UNCLASSIFIED`` is the empty flag. Use membership to ask whether a
    splitting belongs to a class, and :attr:`strongest` for the single most
    specific label.
    """

    UNCLASSIFIED = 0
    NONNEGATIVE = enum.auto()
    WEAK_REGULAR = enum.auto()
    REGULAR = enum.auto()

    @property
    def strongest(self):
        for label in (SplittingClass.REGULAR, SplittingClass.WEAK_REGULAR, SplittingClass.NONNEGATIVE):
            if label in self:
                return label
        return SplittingClass.UNCLASSIFIED

    @property
    def label(self):
        return self.strongest.name.lower()


@dataclass(frozen=True)
class AorParams:
    omega: float = 1.0
    kappa: float = 0.0

    def __post_init__(self):
        if self.omega == 0:
            raise ValueError("omega must be nonzero")
        if not 0 < self.omega <= 2:
            raise ValueError(f"omega must lie in (0, 2], got {self.omega}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be nonnegative, got {self.kappa}")


JACOBI = AorParams(1.0, 0.0)
GAUSS_SEIDEL = AorParams(1.0, 1.0)


@dataclass(frozen=True)
class Splitting:
    F: Tensor3
    G: Tensor3
    kind: SplittingClass = SplittingClass.UNCLASSIFIED

    @property
    def label(self):
        return self.kind.label


def extract_dlu(A):
    """Split each original-domain slice into diagonal, strictly lower and strictly upper parts."""
    if A.m != A.n:
        raise DimensionError(f"splitting requires square slices, got {A.shape}")
    return diag_part(A), strict_lower_part(A), strict_upper_part(A)


def _check_hat_diagonal(D, T):
    Dh = _hat(D, T)
    diag = np.abs(np.diagonal(Dh, axis1=1, axis2=2))
    scale = max(np.abs(Dh).max(), 1.0)
    bad = np.argwhere(diag <= 1e-14 * scale)
    if bad.size:
        i, j = bad[0]
        raise ZeroDiagonalError(int(i), int(j))


def aor_splitting(A, params, T, classify_kind=True):
    """AOR splitting ``F = (D + kappa L) / omega``, ``G = F - A``.

    ``omega = 1, kappa = 0`` is Jacobi, ``omega = kappa = 1`` Gauss-Seidel,
    ``omega = kappa`` SOR. ``F`` is lower triangular in every hat slice, so it
    is invertible exactly when the hat-domain diagonal of ``A`` has no zeros.
    """
    if isinstance(params, tuple):
        params = AorParams(*params)
    D, L, _ = extract_dlu(A)
    _check_hat_diagonal(D, T)
    if params.kappa == 0:
        F = D
    elif params.kappa == 1:
        F = D + L
    else:
        F = D + params.kappa * L
    if params.omega != 1:
        F = F / params.omega
    G = F - A
    kind = classify(A, F, G, T) if classify_kind else SplittingClass.UNCLASSIFIED
    return Splitting(F, G, kind)


def jacobi_splitting(A, T):
    return aor_splitting(A, JACOBI, T)


def gauss_seidel_splitting(A, T):
    return aor_splitting(A, GAUSS_SEIDEL, T)


def splitting_from(A, F, T):
    """Splitting with the given ``F`` and ``G = F - A``, classified."""
    G = F - A
    return Splitting(F, G, classify(A, F, G, T))


def classify(A, F, G, T):
    """Sign class of ``A = F - G``, with all nonnegativity tested on hat entries.

    regular: ``F^-1 >= 0`` and ``G >= 0``; weak regular: ``F^-1 >= 0`` and
    ``F^-1 *_M G >= 0``; nonnegative: ``F^-1 *_M G >= 0``.
    """
    diff = frobenius_norm(F - G - A)
    if diff > SPLIT_TOL * max(1.0, frobenius_norm(A)):
        raise InconsistentSplittingError(f"F - G differs from A by {diff:.3e}")
    F_inv = inverse(F, T)
    finv_nonneg = is_nonnegative(F_inv, T)
    iter_nonneg = is_nonnegative(m_product(F_inv, G, T), T)
    kind = SplittingClass.UNCLASSIFIED
    if iter_nonneg:
        kind |= SplittingClass.NONNEGATIVE
        if finv_nonneg:
            kind |= SplittingClass.WEAK_REGULAR
    if finv_nonneg and is_nonnegative(G, T):
        kind |= SplittingClass.REGULAR | SplittingClass.WEAK_REGULAR | SplittingClass.NONNEGATIVE
    return kind


def iteration_tensor(split, T):
    """``F^-1 *_M G``."""
    return m_product(inverse(split.F, T), split.G, T)


def convergence_radius(split, T):
    """``rho(F^-1 *_M G)``."""
    return spectral_radius(iteration_tensor(split, T), T)


def nonnegative_splitting_check(A, split, T):
    """Return ``(A^-1 *_M F >= 0, rho(F^-1 *_M G) < 1)``.

    For a nonnegative splitting the two entries agree.
    """
    lhs = is_nonnegative(m_product(inverse(A, T), split.F, T), T)
    return lhs, convergence_radius(split, T) < 1.0


def alpha_bound(split, T=None, radius=None):
    """Open upper bound ``2 / (1 + rho)`` on the step parameter."""
    if radius is None:
        radius = convergence_radius(split, T)
    return 2.0 / (1.0 + radius)
