"""Third-order tensors under the M-product.

A tensor ``A`` of shape ``(m, n, p)`` is stored slice-major: ``A.data`` has
shape ``(p, m, n)`` so that ``A.data[k]`` is the frontal slice ``A(:, :, k)``.
Frontal slice indices are 0-based throughout the Python API.

All slicewise algebra happens in the transform ("hat") domain
``A_hat = A x_3 M``, where the M-product reduces to independent matrix
products of corresponding frontal slices.
"""
from __future__ import annotations

import warnings
from typing import NamedTuple

import numpy as np
import scipy.linalg

EPS = np.finfo(np.float64).eps

# inverse() refuses slices whose 2-norm condition number exceeds this
SINGULAR_COND = 1e-3 / EPS

NONNEG_REAL_TOL = 1e-12
NONNEG_IMAG_TOL = 1e-10
HERMITIAN_TOL = 1e-10


class TensorError(ValueError):
    """Base class for tensor algebra errors."""


class DimensionError(TensorError):
    pass


class SingularTransformError(TensorError):
    pass


class SingularSliceError(TensorError):
    """A transform-domain frontal slice is numerically singular."""

    def __init__(self, index, cond=None):
        self.index = index
        self.cond = cond
        msg = f"transform-domain slice {index} is numerically singular"
        if cond is not None:
            msg += f" (condition number {cond:.3e})"
        super().__init__(msg)


class _SliceStack:
    """Shared storage and elementwise arithmetic for slice-major tensors."""

    __slots__ = ("data",)

    def __init__(self, data):
        data = np.array(data, dtype=np.complex128, copy=True)
        if data.ndim != 3:
            raise DimensionError(f"expected a 3-d slice stack, got ndim={data.ndim}")
        data.setflags(write=False)
        self.data = data

    @property
    def shape(self):
        p, m, n = self.data.shape
        return (m, n, p)

    @property
    def m(self):
        return self.data.shape[1]

    @property
    def n(self):
        return self.data.shape[2]

    @property
    def p(self):
        return self.data.shape[0]

    def slice(self, k):
        """Return frontal slice ``k`` (0-based) as an ``m x n`` array."""
        return self.data[k]

    def to_array(self):
        """Return a writable copy indexed as ``[i, j, k]``."""
        return np.moveaxis(self.data, 0, -1).copy()

    def is_real(self, tol=0.0):
        return bool(np.all(np.abs(self.data.imag) <= tol))

    def _wrap(self, data):
        return type(self)(data)

    def _check_same(self, other):
        if type(other) is not type(self):
            return NotImplemented
        if other.data.shape != self.data.shape:
            raise DimensionError(f"shape mismatch {self.shape} vs {other.shape}")
        return None

    def __add__(self, other):
        if self._check_same(other) is NotImplemented:
            return NotImplemented
        return self._wrap(self.data + other.data)

    def __sub__(self, other):
        if self._check_same(other) is NotImplemented:
            return NotImplemented
        return self._wrap(self.data - other.data)

    def __neg__(self):
        return self._wrap(-self.data)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return self._wrap(self.data * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return self._wrap(self.data / scalar)

    def __repr__(self):
        m, n, p = self.shape
        return f"{type(self).__name__}({m}x{n}x{p})"


class Tensor3(_SliceStack):
    """Dense complex third-order tensor in the original domain.

    Construct from a slice-major ``(p, m, n)`` stack, or use
    :meth:`from_array` for an ``(m, n, p)`` array indexed ``[i, j, k]``.
    """

    __slots__ = ()

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3:
            raise DimensionError("expected an (m, n, p) array")
        return cls(np.moveaxis(arr, -1, 0))

    @classmethod
    def from_slices(cls, slices):
        return cls(np.stack([np.asarray(s) for s in slices]))

    @classmethod
    def zeros(cls, m, n, p):
        return cls(np.zeros((p, m, n)))

    def conj(self):
        """Entrywise complex conjugate (not the M-product adjoint)."""
        return Tensor3(self.data.conj())


class HatTensor(_SliceStack):
    """A tensor living in the transform domain, ``A x_3 M`` for some M."""

    __slots__ = ()


class Transform:
    """Invertible ``p x p`` matrix ``M`` defining the M-product.

    The inverse is computed once by LU with partial pivoting. ``M`` is
    rejected when the smallest pivot magnitude falls below
    ``p * eps * max pivot`` or when ``M @ M_inv`` misses the identity by more
    than ``1e-10 * ||M||_F``.
    """

    __slots__ = ("M", "M_inv")

    def __init__(self, M):
        M = np.array(M, dtype=np.complex128, copy=True)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
            raise DimensionError(f"transform must be a non-empty square matrix, got {M.shape}")
        p = M.shape[0]
        if not np.all(np.isfinite(M)):
            raise SingularTransformError("transform matrix has non-finite entries")
        with warnings.catch_warnings():
            # exact zero pivots are reported below as SingularTransformError
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
        pivots = np.abs(np.diag(lu))
        if pivots.max() == 0.0 or pivots.min() < p * EPS * pivots.max():
            raise SingularTransformError("transform matrix is numerically singular")
        M_inv = scipy.linalg.lu_solve((lu, piv), np.eye(p, dtype=np.complex128))
        resid = np.linalg.norm(M @ M_inv - np.eye(p))
        if resid > 1e-10 * np.linalg.norm(M):
            raise SingularTransformError(
                f"transform inverse check failed: ||M M^-1 - I|| = {resid:.3e}"
            )
        M.setflags(write=False)
        M_inv.setflags(write=False)
        self.M = M
        self.M_inv = M_inv

    @property
    def p(self):
        return self.M.shape[0]

    @classmethod
    def identity(cls, p):
        return cls(np.eye(p))

    @classmethod
    def dft(cls, p):
        """Unnormalized DFT matrix; the M-product becomes the t-product."""
        k = np.arange(p)
        return cls(np.exp(-2j * np.pi * np.outer(k, k) / p))

    def to_hat(self, A):
        _check_order(A, self)
        return HatTensor(_mode3(A.data, self.M))

    def from_hat(self, H):
        _check_order(H, self)
        return Tensor3(_mode3(H.data, self.M_inv))

    def from_hat_array(self, data):
        """Tensor whose hat slices are the given ``(p, m, n)`` stack."""
        data = np.asarray(data, dtype=np.complex128)
        if data.ndim != 3 or data.shape[0] != self.p:
            raise DimensionError(f"expected a ({self.p}, m, n) stack, got {data.shape}")
        return Tensor3(_mode3(data, self.M_inv))

    def __repr__(self):
        return f"Transform(p={self.p})"


def _check_order(A, T):
    if A.p != T.p:
        raise DimensionError(f"tensor has {A.p} frontal slices but transform has order {T.p}")


def _mode3(data, M):
    # result[k] = sum_l M[k, l] * data[l]
    return np.tensordot(M, data, axes=(1, 0))


def _hat(A, T):
    _check_order(A, T)
    return _mode3(A.data, T.M)


def _unhat(data, T):
    return Tensor3(_mode3(data, T.M_inv))


def _eye_stack(m, p):
    return np.broadcast_to(np.eye(m, dtype=np.complex128), (p, m, m))


def _as_matrix(M):
    if isinstance(M, Transform):
        return M.M
    return np.asarray(M, dtype=np.complex128)


# --------------------------------------------------------------------------
# products


def mode3_product(A, M):
    """Return ``A x_3 M`` with ``result(i,j,k) = sum_l A(i,j,l) M(k,l)``.

    ``M`` may be any ``p x p`` matrix (or a :class:`Transform`, in which case
    its forward matrix is used). The result keeps the type of ``A``.
    """
    M = _as_matrix(M)
    if M.ndim != 2 or M.shape != (A.p, A.p):
        raise DimensionError(f"mode-3 matrix must be {A.p}x{A.p}, got {M.shape}")
    return type(A)(_mode3(A.data, M))


def face_product(A, B):
    """Slicewise matrix product ``(A Δ B)(:,:,i) = A(:,:,i) B(:,:,i)``."""
    if A.p != B.p:
        raise DimensionError(f"slice counts differ: {A.p} vs {B.p}")
    if A.n != B.m:
        raise DimensionError(f"inner dimensions differ: {A.shape} vs {B.shape}")
    return type(A)(A.data @ B.data)


def m_product(A, B, T):
    """M-product ``((A x_3 M) Δ (B x_3 M)) x_3 M^{-1}``."""
    if A.n != B.m or A.p != B.p:
        raise DimensionError(f"cannot form M-product of {A.shape} and {B.shape}")
    return _unhat(_hat(A, T) @ _hat(B, T), T)


def m_chain(T, *tensors):
    """M-product of several tensors, evaluated left to right in one hat pass."""
    if not tensors:
        raise ValueError("need at least one tensor")
    acc = _hat(tensors[0], T)
    for X in tensors[1:]:
        if acc.shape[2] != X.m:
            raise DimensionError(f"cannot chain inner dimension {acc.shape[2]} with {X.shape}")
        acc = acc @ _hat(X, T)
    return _unhat(acc, T)


def m_power(A, k, T):
    """``A *_M A *_M ... *_M A`` (k factors); ``k = 0`` gives the identity."""
    if A.m != A.n:
        raise DimensionError("power of a non-square tensor")
    if k < 0:
        raise ValueError("negative power; use inverse()")
    H = _hat(A, T)
    return _unhat(np.stack([np.linalg.matrix_power(s, k) for s in H]), T)


def conj_transpose(A, T):
    """Adjoint under the M-product: hat slices are conjugate-transposed."""
    H = _hat(A, T)
    return _unhat(np.conj(np.swapaxes(H, 1, 2)), T)


def identity_tensor(m, T):
    """Tensor whose every transform-domain slice is ``I_m``."""
    if m < 1:
        raise ValueError("m must be positive")
    return _unhat(np.array(_eye_stack(m, T.p)), T)


def zeros_like(A):
    return Tensor3(np.zeros_like(A.data))


# --------------------------------------------------------------------------
# inverses


def inverse(A, T):
    """Inverse under the M-product, computed slice by slice in the hat domain.

    Raises
    ------
    SingularSliceError
        If some transform-domain slice has 2-norm condition number above
        ``1e-3 / eps``.
    """
    if A.m != A.n:
        raise DimensionError(f"inverse requires square slices, got {A.shape}")
    H = _hat(A, T)
    out = np.empty_like(H)
    for i, S in enumerate(H):
        cond = np.linalg.cond(S)
        if not np.isfinite(cond) or cond > SINGULAR_COND:
            raise SingularSliceError(i, cond)
        out[i] = np.linalg.inv(S)
    return _unhat(out, T)


def _pinv_slice(S):
    U, s, Vh = np.linalg.svd(S, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((S.shape[1], S.shape[0]), dtype=np.complex128)
    tol = max(S.shape) * EPS * s[0]
    s_inv = np.where(s > tol, 1.0 / np.where(s > tol, s, 1.0), 0.0)
    return (Vh.conj().T * s_inv) @ U.conj().T


def mp_inverse(A, T):
    """Moore-Penrose inverse under the M-product.

    Each hat slice is pseudo-inverted by SVD; singular values at or below
    ``max(m, n) * eps * sigma_max`` are treated as zero.
    """
    H = _hat(A, T)
    return _unhat(np.stack([_pinv_slice(S) for S in H]), T)


# --------------------------------------------------------------------------
# norms and spectra


def frobenius_norm(A):
    """Frobenius norm of the original-domain entries."""
    return float(np.linalg.norm(A.data.ravel()))


def tubal_norm(A, T):
    """Largest hat-slice spectral norm."""
    H = _hat(A, T)
    return float(max(np.linalg.norm(S, 2) for S in H))


def spectral_radius(A, T):
    """Largest eigenvalue modulus over all hat slices (dense eigensolver)."""
    if A.m != A.n:
        raise DimensionError("spectral radius of a non-square tensor")
    H = _hat(A, T)
    return float(max(np.max(np.abs(scipy.linalg.eigvals(S, check_finite=False))) for S in H))


def tubal_rank(A, T):
    """Return ``(max_rank, per_slice_ranks)`` of the hat slices."""
    H = _hat(A, T)
    ranks = []
    for S in H:
        s = np.linalg.svd(S, compute_uv=False)
        tol = max(S.shape) * EPS * (s[0] if s.size else 0.0)
        ranks.append(int(np.sum(s > tol)))
    return max(ranks), ranks


# --------------------------------------------------------------------------
# structure


class Structure(NamedTuple):
    nonnegative: bool
    strictly_diag_dominant: bool
    hermitian_positive_definite: bool


def _nonneg(H):
    return bool(np.all(H.real >= -NONNEG_REAL_TOL) and np.all(np.abs(H.imag) <= NONNEG_IMAG_TOL))


def is_nonnegative(A, T):
    """Every hat entry is (numerically) a nonnegative real number."""
    return _nonneg(_hat(A, T))


def _strictly_dominant(S):
    d = np.abs(np.diag(S))
    off = np.abs(S).sum(axis=1) - d
    return bool(np.all(d > off))


def _hpd(S):
    if np.linalg.norm(S - S.conj().T) > HERMITIAN_TOL * max(1.0, np.linalg.norm(S)):
        return False
    try:
        np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        return False
    return True


def structural_predicates(A, T):
    """Nonnegativity, strict diagonal dominance and HPD, all in the hat domain."""
    H = _hat(A, T)
    square = A.m == A.n
    return Structure(
        nonnegative=_nonneg(H),
        strictly_diag_dominant=square and all(_strictly_dominant(S) for S in H),
        hermitian_positive_definite=square and all(_hpd(S) for S in H),
    )


# --------------------------------------------------------------------------
# block tensors


def hconcat(B, C):
    """Row block tensor ``[B C]``."""
    if B.m != C.m or B.p != C.p:
        raise DimensionError(f"hconcat needs equal row counts, got {B.shape} and {C.shape}")
    return Tensor3(np.concatenate([B.data, C.data], axis=2))


def vconcat(B, C):
    """Column block tensor ``[B; C]``."""
    if B.n != C.n or B.p != C.p:
        raise DimensionError(f"vconcat needs equal column counts, got {B.shape} and {C.shape}")
    return Tensor3(np.concatenate([B.data, C.data], axis=1))


def block2x2(B, C, D, E):
    """``[[B, C], [D, E]]`` assembled slice by slice."""
    return vconcat(hconcat(B, C), hconcat(D, E))


# --------------------------------------------------------------------------
# slice masks (original domain)


def diag_part(A):
    return Tensor3(A.data * np.eye(A.m, A.n))


def strict_lower_part(A):
    return Tensor3(np.tril(A.data, -1))


def strict_upper_part(A):
    return Tensor3(np.triu(A.data, 1))
