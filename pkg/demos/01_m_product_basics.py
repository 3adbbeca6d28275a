"""Tensor algebra under the M-product.

Every operation is a transform along the tubes, an ordinary matrix
operation on each frontal slice, and the inverse transform. This script
walks through the product, inverses and ranks with a random transform.
"""
import numpy as np

from mtensor import (
    Tensor3,
    Transform,
    frobenius_norm,
    identity_tensor,
    inverse,
    m_chain,
    m_product,
    mp_inverse,
    tubal_rank,
)

rng = np.random.default_rng(1)
T = Transform(rng.random((3, 3)))
print(f"transform M (cond {np.linalg.cond(T.M):.1f}):\n{np.round(T.M.real, 3)}\n")

A = Tensor3(rng.standard_normal((3, 4, 4)))
B = Tensor3(rng.standard_normal((3, 4, 2)))
AB = m_product(A, B, T)
print(f"A is {A.shape}, B is {B.shape}, A *M B is {AB.shape}")

# the product is facewise in the transformed domain
hat = T.to_hat(A).data @ T.to_hat(B).data
print(f"facewise check: {frobenius_norm(T.from_hat_array(hat) - AB):.2e}")

I = identity_tensor(4, T)
print(f"I *M A == A:    {frobenius_norm(m_product(I, A, T) - A):.2e}")
Ainv = inverse(A, T)
print(f"A^-1 *M A == I: {frobenius_norm(m_product(Ainv, A, T) - I):.2e}\n")

# a tensor whose transformed slices have ranks 1, 2 and 1
slices = [rng.standard_normal((4, r)) @ rng.standard_normal((r, 3)) for r in (1, 2, 1)]
L = T.from_hat_array(np.stack(slices))
rank, per_slice = tubal_rank(L, T)
print(f"tubal rank {rank}, slice ranks {per_slice}")
Lp = mp_inverse(L, T)
penrose = [
    frobenius_norm(m_chain(T, L, Lp, L) - L),
    frobenius_norm(m_chain(T, Lp, L, Lp) - Lp),
]
print(f"Moore-Penrose residuals: {penrose[0]:.2e}, {penrose[1]:.2e}")
