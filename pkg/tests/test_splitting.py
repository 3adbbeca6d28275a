import numpy as np
import pytest

from mtensor.core import Tensor3, Transform, frobenius_norm, inverse, is_nonnegative, m_product
from mtensor.fixtures import EXAMPLE_RADII, example_system, random_complex, random_transform
from mtensor.splitting import (
    GAUSS_SEIDEL,
    JACOBI,
    AorParams,
    InconsistentSplittingError,
    SplittingClass,
    ZeroDiagonalError,
    alpha_bound,
    aor_splitting,
    classify,
    convergence_radius,
    extract_dlu,
    gauss_seidel_splitting,
    jacobi_splitting,
    nonnegative_splitting_check,
    splitting_from,
)

import oracles


def m_matrix_tensor(rng, n, p, T, flip_slice=None):
    return T.from_hat_array(oracles.m_matrix_hat_slices(rng, n, p, flip_slice))


def test_extract_dlu_example():
    ex = example_system()
    D, L, U = extract_dlu(ex.A)
    np.testing.assert_allclose(D.slice(0), np.diag([2.0, 3.5, 3.5]))
    np.testing.assert_allclose(D.slice(1), np.diag([2.0, 5.0, 9.0]))
    np.testing.assert_array_equal((D + L + U).data, ex.A.data)


def test_extract_dlu_diagonal_input():
    A = Tensor3(np.stack([np.diag([1.0, 2.0]), np.diag([3.0, 4.0])]))
    _, L, U = extract_dlu(A)
    assert frobenius_norm(L) == 0.0 and frobenius_norm(U) == 0.0


def test_aor_formulas():
    rng = np.random.default_rng(0)
    T = random_transform(rng, 3)
    A = Tensor3(random_complex(rng, (3, 4, 4)) + 8 * np.eye(4))
    D, L, U = extract_dlu(A)
    for omega, kappa in ((1.0, 0.0), (1.0, 1.0), (1.3, 1.3), (0.7, 0.4), (2.0, 0.0)):
        s = aor_splitting(A, AorParams(omega, kappa), T)
        np.testing.assert_allclose(s.F.data, ((D + L * kappa) / omega).data, atol=1e-15)
        G_ref = (D * (1 - omega) + L * (kappa - omega) - U * omega) / omega
        np.testing.assert_allclose(s.G.data, G_ref.data, atol=1e-13)
        assert frobenius_norm(s.F - s.G - A) <= 1e-12 * frobenius_norm(A)


def test_named_splittings_match_aor():
    rng = np.random.default_rng(1)
    T = random_transform(rng, 2)
    A = Tensor3(rng.standard_normal((2, 3, 3)) + 5 * np.eye(3))
    np.testing.assert_array_equal(jacobi_splitting(A, T).F.data, aor_splitting(A, JACOBI, T).F.data)
    np.testing.assert_array_equal(gauss_seidel_splitting(A, T).F.data, aor_splitting(A, GAUSS_SEIDEL, T).F.data)


def test_gauss_seidel_of_lower_triangular_has_zero_g():
    rng = np.random.default_rng(2)
    A = Tensor3(np.tril(rng.standard_normal((2, 4, 4))) + 3 * np.eye(4))
    s = gauss_seidel_splitting(A, Transform.identity(2))
    assert frobenius_norm(s.G) == 0.0


def test_example_jacobi_f():
    ex = example_system()
    s = jacobi_splitting(ex.A, ex.T)
    np.testing.assert_allclose(s.F.slice(0), np.diag([2.0, 3.5, 3.5]))
    np.testing.assert_allclose(s.F.slice(1), np.diag([2.0, 5.0, 9.0]))


def test_aor_params_validation():
    for bad in ((0.0, 0.0), (2.5, 0.0), (-1.0, 0.0), (1.0, -0.1)):
        with pytest.raises(ValueError):
            AorParams(*bad)


def test_zero_hat_diagonal_is_reported():
    # original diagonal (1, -1) along the tube becomes 0 in the first hat slice
    T = Transform([[1.0, 1.0], [1.0, -1.0]])
    data = np.zeros((2, 2, 2))
    data[:, 0, 0] = [1.0, -1.0]
    data[:, 1, 1] = [1.0, 1.0]
    data[:, 0, 1] = [0.5, 0.5]
    with pytest.raises(ZeroDiagonalError) as info:
        jacobi_splitting(Tensor3(data), T)
    assert (info.value.slice_index, info.value.row) == (0, 0)


def test_example_radii_and_bound():
    ex = example_system()
    T, A, B, P = ex.T, ex.A, ex.B, ex.P
    radii = {
        "F1G1": convergence_radius(jacobi_splitting(A, T), T),
        "Fp1Gp1": convergence_radius(jacobi_splitting(m_product(P, A, T), T), T),
        "F2G2": convergence_radius(jacobi_splitting(B, T), T),
        "Fp2Gp2": convergence_radius(jacobi_splitting(m_product(B, P, T), T), T),
    }
    for key, value in radii.items():
        assert value == pytest.approx(EXAMPLE_RADII[key], abs=5e-4)
    # 1.0297 follows from the rounded radius; the unrounded one gives 1.02964
    assert round(alpha_bound(None, radius=EXAMPLE_RADII["F1G1"]), 4) == 1.0297
    assert alpha_bound(jacobi_splitting(A, T), T) == pytest.approx(2 / (1 + radii["F1G1"]), rel=1e-14)
    assert alpha_bound(jacobi_splitting(A, T), T) == pytest.approx(1.0297, abs=2e-4)
    assert alpha_bound(None, radius=0.0) == 2.0
    assert alpha_bound(None, radius=1.0) == 1.0


def test_example_classification():
    ex = example_system()
    s = jacobi_splitting(ex.A, ex.T)
    assert SplittingClass.WEAK_REGULAR in s.kind
    assert is_nonnegative(m_product(inverse(s.F, ex.T), s.G, ex.T), ex.T)
    # G is hat-nonnegative too, so the strongest label is regular
    assert s.label == "regular"


def test_classify_trivial_cases():
    rng = np.random.default_rng(3)
    T = random_transform(rng, 3)
    A = m_matrix_tensor(rng, 3, 3, T)
    assert is_nonnegative(inverse(A, T), T)
    exact = splitting_from(A, A, T)
    assert exact.kind.strongest == SplittingClass.REGULAR
    assert convergence_radius(exact, T) == pytest.approx(0.0, abs=1e-14)


def test_classify_negated_splitting():
    # F = -A, G = -2A: F^-1 G = 2I is nonnegative while F^-1 = -A^-1 is not
    rng = np.random.default_rng(4)
    T = random_transform(rng, 2)
    A = m_matrix_tensor(rng, 3, 2, T)
    kind = classify(A, -A, A * -2.0, T)
    assert kind == SplittingClass.NONNEGATIVE
    assert SplittingClass.WEAK_REGULAR not in kind


def test_classify_rejects_inconsistent_pair():
    rng = np.random.default_rng(5)
    T = random_transform(rng, 2)
    A = m_matrix_tensor(rng, 3, 2, T)
    with pytest.raises(InconsistentSplittingError):
        classify(A, A, A, T)


def test_regular_implies_weaker_classes():
    rng = np.random.default_rng(6)
    for _ in range(10):
        T = random_transform(rng, 3)
        A = m_matrix_tensor(rng, 4, 3, T)
        kind = jacobi_splitting(A, T).kind
        assert SplittingClass.REGULAR in kind
        assert SplittingClass.WEAK_REGULAR in kind
        assert SplittingClass.NONNEGATIVE in kind


def test_nonnegative_splitting_equivalence():
    rng = np.random.default_rng(7)
    for trial in range(10):
        T = random_transform(rng, 3)
        A = m_matrix_tensor(rng, 4, 3, T)
        s = jacobi_splitting(A, T)
        assert nonnegative_splitting_check(A, s, T) == (True, True)
    T = random_transform(rng, 3)
    A = m_matrix_tensor(rng, 4, 3, T, flip_slice=1)
    s = jacobi_splitting(A, T)
    assert convergence_radius(s, T) >= 1.0
    assert nonnegative_splitting_check(A, s, T) == (False, False)


def test_weak_regular_with_nonnegative_inverse_converges():
    rng = np.random.default_rng(8)
    for _ in range(10):
        T = random_transform(rng, 2)
        A = m_matrix_tensor(rng, 5, 2, T)
        s = gauss_seidel_splitting(A, T)
        assert SplittingClass.WEAK_REGULAR in s.kind
        assert convergence_radius(s, T) < 1.0
