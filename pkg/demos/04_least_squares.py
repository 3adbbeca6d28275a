"""Least squares for A *M X *M B = C when A or B is singular.

The minimum-norm solution is the slicewise pseudoinverse sandwich.
Tikhonov regularization approaches it as lambda and mu go to zero, and
Sylvester equations reduce to the same two-sided form.
"""
import numpy as np

from mtensor import (
    RegularizationParams,
    Tensor3,
    Transform,
    frobenius_norm,
    m_chain,
    min_norm_lstsq,
    sylvester_residual,
    sylvester_solve,
    tikhonov_solve,
)

rng = np.random.default_rng(4)
T = Transform.dft(3)


def low_rank(m, n, r):
    return T.from_hat_array(np.stack([rng.standard_normal((m, r)) @ rng.standard_normal((r, n)) for _ in range(3)]))


A, B = low_rank(6, 4, 2), low_rank(3, 5, 2)
C = Tensor3(rng.standard_normal((3, 6, 5)))
X = min_norm_lstsq(A, B, C, T)
print(f"rank-deficient system: residual {frobenius_norm(C - m_chain(T, A, X, B)):.4f}, "
      f"|X| = {frobenius_norm(X):.4f}")

print("\nlambda = mu     |X_reg - X_min|")
A = Tensor3(rng.standard_normal((3, 6, 4)))
B = Tensor3(rng.standard_normal((3, 3, 5)))
X = min_norm_lstsq(A, B, C, T)
for lam in (1e-1, 1e-3, 1e-5, 1e-7, 1e-10):
    Xr = tikhonov_solve(A, B, C, RegularizationParams(lam, lam), T)
    print(f"{lam:<14g} {frobenius_norm(Xr - X):.3e}")

A1 = Tensor3(rng.standard_normal((3, 5, 5)))
B1 = Tensor3(rng.standard_normal((3, 4, 4)))
Y = Tensor3(rng.standard_normal((3, 5, 4)))
C1 = m_chain(T, A1, Y) + m_chain(T, Y, B1)
Ys = sylvester_solve(A1, B1, C1, T)
print(f"\nSylvester A1 Y + Y B1 = C1: residual {sylvester_residual(A1, B1, C1, Ys, T):.2e}, "
      f"error {frobenius_norm(Ys - Y):.2e}")
