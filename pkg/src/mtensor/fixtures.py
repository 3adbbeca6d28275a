"""Reference instances: the 3x3x2 preconditioning example and random systems."""
from __future__ import annotations

from fractions import Fraction as Fr

import numpy as np

from .core import Tensor3, Transform

# Example data, exact fractions, original-domain frontal slices.
EXAMPLE_M = [[1, 0], [0, 2]]

EXAMPLE_A = [
    [[2, -1, -1], [-2, Fr(7, 2), Fr(-1, 2)], [Fr(-5, 2), Fr(-3, 2), Fr(7, 2)]],
    [[2, -2, 0], [-3, 5, -2], [-1, -2, 9]],
]
EXAMPLE_B = [
    [[Fr(5, 2), -1, 0], [-1, Fr(5, 2), -1], [Fr(-3, 2), -2, 2]],
    [[5, -2, 0], [-2, 5, -2], [-3, -4, 4]],
]
EXAMPLE_C = [
    [[1, 1, 1], [0, 1, -1], [2, -3, 0]],
    [[-1, -1, -1], [0, 2, -1], [0, -3, 0]],
]
EXAMPLE_P = [
    [[1, 0, 0], [Fr(1, 2), 1, 0], [Fr(5, 4), Fr(1, 2), 1]],
    [[Fr(1, 4), 0, 0], [Fr(1, 8), Fr(1, 4), 0], [Fr(5, 16), Fr(1, 8), Fr(1, 4)]],
]

# Published transform-domain slices of the inverses.
EXAMPLE_INV_A_HAT = [
    [[Fr(23, 6), Fr(5, 3), Fr(4, 3)], [Fr(11, 4), Fr(3, 2), 1], [Fr(47, 12), Fr(11, 6), Fr(5, 3)]],
    [[Fr(41, 48), Fr(3, 8), Fr(1, 12)], [Fr(29, 48), Fr(3, 8), Fr(1, 12)], [Fr(11, 48), Fr(1, 8), Fr(1, 12)]],
]
EXAMPLE_INV_B_HAT = [
    [[Fr(3, 4), Fr(1, 2), Fr(1, 4)], [Fr(7, 8), Fr(5, 4), Fr(5, 8)], [Fr(23, 16), Fr(13, 8), Fr(21, 16)]],
    [[Fr(3, 16), Fr(1, 8), Fr(1, 16)], [Fr(7, 32), Fr(5, 16), Fr(5, 32)], [Fr(23, 64), Fr(13, 32), Fr(21, 64)]],
]
EXAMPLE_INV_PA_HAT = [
    [[Fr(5, 3), 1, Fr(4, 3)], [1, 1, 1], [Fr(4, 3), 1, Fr(5, 3)]],
    [[Fr(7, 6), Fr(2, 3), Fr(1, 6)], [Fr(2, 3), Fr(2, 3), Fr(1, 6)], [Fr(1, 6), Fr(1, 6), Fr(1, 6)]],
]
EXAMPLE_INV_BP_HAT = [
    [[Fr(3, 4), Fr(1, 2), Fr(1, 4)], [Fr(1, 2), 1, Fr(1, 2)], [Fr(1, 4), Fr(1, 2), Fr(3, 4)]],
    [[Fr(3, 8), Fr(1, 4), Fr(1, 8)], [Fr(1, 4), Fr(1, 2), Fr(1, 4)], [Fr(1, 8), Fr(1, 4), Fr(3, 8)]],
]

# Published spectral radii (4 decimals).
EXAMPLE_RADII = {
    "F1G1": 0.9424,
    "Fp1Gp1": 0.8792,
    "F2G2": 0.8385,
    "Fp2Gp2": 0.7071,
}


def _to_float(slices):
    return np.array([[[float(x) for x in row] for row in S] for S in slices])


def example_tensor(slices):
    return Tensor3(_to_float(slices))


class Example:
    """The 3x3x2 example system with its preconditioner."""

    def __init__(self):
        self.T = Transform(EXAMPLE_M)
        self.A = example_tensor(EXAMPLE_A)
        self.B = example_tensor(EXAMPLE_B)
        self.C = example_tensor(EXAMPLE_C)
        self.P = example_tensor(EXAMPLE_P)


def example_system():
    return Example()


# --------------------------------------------------------------------------
# random instances


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_transform(rng, p, kind="uniform"):
    """Random invertible transform; ``uniform`` mirrors ``M = rand(p)``."""
    while True:
        if kind == "uniform":
            M = rng.random((p, p))
        elif kind == "complex":
            M = random_complex(rng, (p, p))
        else:
            raise ValueError(f"unknown transform kind {kind!r}")
        if np.linalg.cond(M) < 1e6:
            return Transform(M)


def dominant_hat_slices(rng, n, p, margin=0.5, complex_entries=True):
    """Hat-domain slices with strictly dominant diagonals.

    Off-diagonal entries are standard (complex) Gaussian; each diagonal entry
    has modulus ``(1 + margin)`` times its row's off-diagonal absolute sum,
    with a random phase when ``complex_entries``.
    """
    if complex_entries:
        H = random_complex(rng, (p, n, n))
    else:
        H = rng.standard_normal((p, n, n)).astype(np.complex128)
    idx = np.arange(n)
    H[:, idx, idx] = 0.0
    rows = np.abs(H).sum(axis=2)
    if complex_entries:
        phase = np.exp(2j * np.pi * rng.random((p, n)))
    else:
        phase = np.sign(rng.standard_normal((p, n)))
    H[:, idx, idx] = (1.0 + margin) * np.maximum(rows, 1e-3) * phase
    return H


def random_dominant_system(rng, m, n, p, T=None, margin=0.5, complex_entries=True):
    """Return ``(A, B, C, T)`` with hat-domain strictly diagonally dominant A, B."""
    if T is None:
        T = random_transform(rng, p)
    A = T.from_hat_array(dominant_hat_slices(rng, m, p, margin, complex_entries))
    B = T.from_hat_array(dominant_hat_slices(rng, n, p, margin, complex_entries))
    if complex_entries:
        C = Tensor3(random_complex(rng, (p, m, n)))
    else:
        C = Tensor3(rng.standard_normal((p, m, n)))
    return A, B, C, T
