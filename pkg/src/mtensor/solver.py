"""Two-step parameterized iterations for ``A *_M X *_M B = C``.

The left recurrence drives ``Y -> A^-1 *_M C`` and the right one turns ``Y``
into ``X``::

    Y_{k+1} = (I - alpha F1^-1 A) Y_k + alpha F1^-1 C
    X_{k+1} = X_k (I - beta B F2^-1) + beta Y_{k+1} F2^-1

Both iteration tensors and the constant term are formed once, in the hat
domain, where each step is a batch of small matrix products.
"""
from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field

import numpy as np

from .core import (
    DimensionError,
    Tensor3,
    _eye_stack,
    _hat,
    _unhat,
    frobenius_norm,
    identity_tensor,
    inverse,
    m_chain,
)
from .splitting import AorParams, aor_splitting, jacobi_splitting

STOP_RULES = ("relative_residual", "absolute_residual")
STOP_REASONS = ("tolerance_met", "max_iter", "precheck_failed")


@dataclass(frozen=True)
class SolverConfig:
    alpha: float = 1.0
    beta: float = 1.0
    tol: float = 1e-10
    max_iter: int = 10000
    stop_rule: str = "relative_residual"
    precheck: bool = False
    check_every: int = 1

    def __post_init__(self):
        if not self.alpha > 0 or not self.beta > 0:
            raise ValueError("alpha and beta must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.stop_rule not in STOP_RULES:
            raise ValueError(f"stop_rule must be one of {STOP_RULES}")
        if self.check_every < 1:
            raise ValueError("check_every must be at least 1")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass
class SolveReport:
    X: Tensor3
    iterations: int
    residual_history: list = field(default_factory=list)
    converged: bool = False
    stop_reason: str = "max_iter"
    elapsed: float = 0.0
    radii: tuple = None

    @property
    def residual(self):
        return self.residual_history[-1] if self.residual_history else float("nan")

    def summary(self):
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "stop_reason": self.stop_reason,
            "final_residual": self.residual,
            "elapsed": self.elapsed,
        }


def _check_system(A, B, C):
    if A.m != A.n or B.m != B.n:
        raise DimensionError("A and B must have square frontal slices")
    if C.m != A.m or C.n != B.m or not (A.p == B.p == C.p):
        raise DimensionError(f"incompatible shapes A{A.shape} B{B.shape} C{C.shape}")


def residual(A, X, B, C, T, relative=False):
    """``||C - A *_M X *_M B||_F``; relative divides by ``||C||_F`` unless C = 0."""
    _check_system(A, B, C)
    if X.shape != C.shape:
        raise DimensionError(f"X has shape {X.shape}, expected {C.shape}")
    r = frobenius_norm(C - m_chain(T, A, X, B))
    if relative:
        nc = frobenius_norm(C)
        if nc > 0:
            r /= nc
    return r


def direct_solve(A, B, C, T):
    """``A^-1 *_M C *_M B^-1``; reference solution for the iterative paths."""
    _check_system(A, B, C)
    return m_chain(T, inverse(A, T), C, inverse(B, T))


def _slice_radius(H):
    return float(max(np.max(np.abs(np.linalg.eigvals(S))) for S in H))


def _iterate(A, B, C, T, F1, F2, cfg, X0, P1=None, P2=None):
    """Shared loop; ``P1``/``P2`` are None for the unpreconditioned scheme."""
    start = time.perf_counter()
    _check_system(A, B, C)
    m, n, p = A.m, B.m, A.p
    Ah, Bh, Ch = _hat(A, T), _hat(B, T), _hat(C, T)
    F1_inv_h = _hat(inverse(F1, T), T)
    F2_inv_h = _hat(inverse(F2, T), T)

    left = Ah if P1 is None else _hat(P1, T) @ Ah
    right = Bh if P2 is None else Bh @ _hat(P2, T)
    rhs = Ch
    if P1 is not None:
        rhs = _hat(P1, T) @ rhs
    if P2 is not None:
        rhs = rhs @ _hat(P2, T)

    alpha, beta = cfg.alpha, cfg.beta
    TY = _eye_stack(m, p) - alpha * (F1_inv_h @ left)
    cY = alpha * (F1_inv_h @ rhs)
    TX = _eye_stack(n, p) - beta * (right @ F2_inv_h)
    bF2 = beta * F2_inv_h

    radii = None
    if cfg.precheck:
        radii = (_slice_radius(TY), _slice_radius(TX))
        if not (radii[0] < 1.0 and radii[1] < 1.0):
            X = X0 if X0 is not None else Tensor3.zeros(m, n, p)
            return SolveReport(
                X=X, iterations=0, residual_history=[], converged=False,
                stop_reason="precheck_failed", elapsed=time.perf_counter() - start, radii=radii,
            )

    if X0 is None:
        Xh = np.zeros((p, m, n), dtype=np.complex128)
    else:
        if X0.shape != C.shape:
            raise DimensionError(f"X0 has shape {X0.shape}, expected {C.shape}")
        Xh = _hat(X0, T)
    Yh = Xh @ right

    norm_c = frobenius_norm(C)
    scale = norm_c if (cfg.stop_rule == "relative_residual" and norm_c > 0) else 1.0
    M_inv = T.M_inv

    def measure(Xh):
        Rh = Ch - Ah @ Xh @ Bh
        return float(np.linalg.norm(np.tensordot(M_inv, Rh, axes=(1, 0)).ravel())) / scale

    history = [measure(Xh)]
    converged = history[0] <= cfg.tol
    k = 0
    while not converged and k < cfg.max_iter:
        Yh = TY @ Yh + cY
        Xh = Xh @ TX + Yh @ bF2
        k += 1
        if k % cfg.check_every == 0 or k == cfg.max_iter:
            history.append(measure(Xh))
            converged = history[-1] <= cfg.tol

    return SolveReport(
        X=_unhat(Xh, T),
        iterations=k,
        residual_history=history,
        converged=converged,
        stop_reason="tolerance_met" if converged else "max_iter",
        elapsed=time.perf_counter() - start,
        radii=radii,
    )


def two_step_solve(A, B, C, s1, s2, T, cfg=None, X0=None):
    """Two-step parameterized iteration with splittings ``s1`` of A and ``s2`` of B.

    Starts from ``X0`` (zero by default) with ``Y0 = X0 *_M B``. With
    ``cfg.precheck`` the spectral radii of both iteration tensors are checked
    first and the run stops with ``stop_reason == "precheck_failed"`` if
    either is at least 1.
    """
    cfg = cfg or SolverConfig()
    return _iterate(A, B, C, T, s1.F, s2.F, cfg, X0)


PRESETS = {
    "hoj-tsi": dict(alpha=1.0, beta=1.0, omega1=1.0, omega2=1.0, kappa1=0.0, kappa2=0.0),
    "hoj-tspi": dict(omega1=1.0, omega2=1.0, kappa1=0.0, kappa2=0.0),
    "hogs-tsi": dict(alpha=1.0, beta=1.0, omega1=1.0, omega2=1.0, kappa1=1.0, kappa2=1.0),
    "hogs-tspi": dict(omega1=1.0, omega2=1.0, kappa1=1.0, kappa2=1.0),
    # SOR ties kappa to omega; filled in by preset_parameters
    "hosor-tspi": dict(),
}


def preset_parameters(name, alpha=1.0, beta=1.0, omega1=1.0, omega2=1.0):
    """Resolve a named AOR method into ``(alpha, beta, omega1, omega2, kappa1, kappa2)``."""
    key = name.lower()
    if key not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    params = dict(alpha=alpha, beta=beta, omega1=omega1, omega2=omega2, kappa1=omega1, kappa2=omega2)
    params.update(PRESETS[key])
    return params


def aor_tspi_solve(A, B, C, T, cfg=None, *, alpha=None, beta=None,
                   omega1=1.0, omega2=1.0, kappa1=0.0, kappa2=0.0, X0=None):
    """AOR two-step iteration; ``alpha``/``beta`` override the values in ``cfg``."""
    cfg = cfg or SolverConfig()
    changes = {k: v for k, v in (("alpha", alpha), ("beta", beta)) if v is not None}
    if changes:
        cfg = cfg.replace(**changes)
    s1 = aor_splitting(A, AorParams(omega1, kappa1), T, classify_kind=False)
    s2 = aor_splitting(B, AorParams(omega2, kappa2), T, classify_kind=False)
    return two_step_solve(A, B, C, s1, s2, T, cfg, X0)


def preset_solve(preset, A, B, C, T, cfg=None, *, omega1=1.0, omega2=1.0, X0=None):
    """Run one of the named AOR methods (HOJ-TSI, HOGS-TSPI, ...)."""
    cfg = cfg or SolverConfig()
    p = preset_parameters(preset, cfg.alpha, cfg.beta, omega1, omega2)
    return aor_tspi_solve(
        A, B, C, T, cfg, alpha=p["alpha"], beta=p["beta"], omega1=p["omega1"],
        omega2=p["omega2"], kappa1=p["kappa1"], kappa2=p["kappa2"], X0=X0,
    )


def ptspi_solve(A, B, C, P1, P2, T, s1=None, s2=None, cfg=None, X0=None):
    """Preconditioned two-step iteration.

    Iterates on ``P1 A X B P2 = P1 C P2`` with ``s1`` a splitting of
    ``P1 *_M A`` and ``s2`` of ``B *_M P2`` (Jacobi splittings by default);
    the returned ``X`` solves the original equation. ``Y0 = X0 *_M B *_M P2``.
    """
    cfg = cfg or SolverConfig()
    if s1 is None:
        s1 = jacobi_splitting(m_chain(T, P1, A), T)
    if s2 is None:
        s2 = jacobi_splitting(m_chain(T, B, P2), T)
    return _iterate(A, B, C, T, s1.F, s2.F, cfg, X0, P1=P1, P2=P2)


def iteration_radii(A, B, s1, s2, cfg, T):
    """``(rho(I - alpha F1^-1 A), rho(I - beta B F2^-1))``."""
    m, n = A.m, B.m
    F1_inv, F2_inv = inverse(s1.F, T), inverse(s2.F, T)
    TY = identity_tensor(m, T) - cfg.alpha * m_chain(T, F1_inv, A)
    TX = identity_tensor(n, T) - cfg.beta * m_chain(T, B, F2_inv)
    return _slice_radius(_hat(TY, T)), _slice_radius(_hat(TX, T))
