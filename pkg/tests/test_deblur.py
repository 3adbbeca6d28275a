import math
import warnings

import numpy as np
import pytest

from mtensor.core import Tensor3, Transform, identity_tensor, m_chain
from mtensor.deblur import (
    BlurModel,
    build_blur_pair,
    blur_matrix,
    deblur_experiment,
    image_to_tensor,
    psnr,
    reconstruct,
    relative_error,
    synthesize_observation,
    synthetic_image,
    tensor_to_image,
    tune_regularization,
)
from mtensor.fixtures import random_transform
from mtensor.lstsq import RegularizationParams, tikhonov_solve

import oracles

# the default weights do not sum to 1; that warning is checked once below
pytestmark = pytest.mark.filterwarnings("ignore:blur weights:UserWarning")

GRID9 = tuple(10.0 ** k for k in range(-8, 1))


def test_blur_matrix_entries():
    G = blur_matrix(40, 4.0, 30)
    assert G[0, 0] == pytest.approx(1 / (4 * math.sqrt(2 * math.pi)), rel=1e-15)
    assert G[0, 0] == pytest.approx(0.0997356, abs=5e-8)
    assert G[3, 5] == pytest.approx(math.exp(-4 / 32) / (4 * math.sqrt(2 * math.pi)), rel=1e-15)
    np.testing.assert_array_equal(G, G.T)
    d = np.subtract.outer(np.arange(40), np.arange(40))
    assert np.all(G[np.abs(d) <= 30] > 0)
    assert np.all(G[np.abs(d) > 30] == 0)


def test_zero_bandwidth_is_diagonal():
    G = blur_matrix(8, 2.0, 0)
    np.testing.assert_array_equal(G, np.diag(np.diag(G)))


def test_blur_pair_structure():
    model = BlurModel(12, 2.0, 5)
    A, B = build_blur_pair(model)
    G = blur_matrix(12, 2.0, 5)
    for k, d in enumerate(model.deltas):
        np.testing.assert_array_equal(A.slice(k), d * G)
    np.testing.assert_array_equal(B.slice(0), A.slice(0).T)
    assert not B.slice(1).any() and not B.slice(2).any()
    A, B = build_blur_pair(BlurModel(12, 2.0, 5, (1.0, 0.0, 0.0)))
    assert not A.slice(1).any() and not A.slice(2).any()


def test_blur_pair_rectangular_image():
    A, B = build_blur_pair(BlurModel(10, 2.0, 9), n=6)
    assert A.shape == (10, 10, 3) and B.shape == (6, 6, 3)
    np.testing.assert_array_equal(B.slice(0), 0.75 * blur_matrix(6, 2.0, 5))


def test_model_validation():
    for args in ((0,), (8, 0.0), (8, 2.0, 8), (8, 2.0, -1)):
        with pytest.raises(ValueError):
            BlurModel(*args)
    with pytest.raises(ValueError):
        BlurModel(8, 2.0, 3, (0.5, 0.5))
    assert BlurModel.clipped(16).bandwidth == 15


def test_unnormalized_deltas_warn():
    with pytest.warns(UserWarning, match="sum to"):
        BlurModel(8, 2.0, 3, (1.0, 1.0, 1.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        BlurModel(8, 2.0, 3, (0.5, 0.25, 0.25))


def test_noise_statistics():
    X = Tensor3.zeros(128, 128, 3)
    I = identity_tensor(128, Transform.identity(3))
    for seed in range(3):
        for var in (1e-3, 0.5):
            C = synthesize_observation(X, I, I, Transform.identity(3), var, seed)
            assert abs(C.data.real.mean()) <= 5 * math.sqrt(var / C.data.size)
            assert C.data.real.var() == pytest.approx(var, rel=0.05)


def test_noise_is_reproducible():
    X = synthetic_image(16)
    A, B = build_blur_pair(BlurModel.clipped(16))
    T = Transform.identity(3)
    C1 = synthesize_observation(X, A, B, T, 1e-3, seed=11)
    C2 = synthesize_observation(X, A, B, T, 1e-3, seed=11)
    C3 = synthesize_observation(X, A, B, T, 1e-3, seed=12)
    np.testing.assert_array_equal(C1.data, C2.data)
    assert not np.array_equal(C1.data, C3.data)


def test_zero_noise_is_exact_product():
    rng = np.random.default_rng(0)
    T = random_transform(rng, 3)
    X = synthetic_image(10)
    A, B = build_blur_pair(BlurModel.clipped(10, sigma=1.5))
    np.testing.assert_array_equal(synthesize_observation(X, A, B, T, 0.0).data, m_chain(T, A, X, B).data)
    np.testing.assert_array_equal(synthesize_observation(X, A, None, T, 0.0).data, m_chain(T, A, X).data)
    with pytest.raises(ValueError):
        synthesize_observation(X, A, B, T, -1.0)


def test_near_exact_reconstruction():
    X = synthetic_image(16)
    A, _ = build_blur_pair(BlurModel(16, 0.8, 2))
    for T in (Transform.identity(3), Transform.dft(3)):
        C = synthesize_observation(X, A, None, T, 0.0)
        rec = reconstruct(C, A, None, T, RegularizationParams(1e-10, 1e-10))
        assert relative_error(rec.X, X) <= 1e-4
        assert rec.imag_ok


def test_heavy_regularization_gives_zero():
    X = synthetic_image(12)
    A, B = build_blur_pair(BlurModel.clipped(12))
    T = Transform.identity(3)
    C = synthesize_observation(X, A, B, T, 1e-3)
    rec = reconstruct(C, A, B, T, RegularizationParams(1e6, 1e6))
    assert np.max(np.abs(rec.X.data)) <= 1e-6


def test_identity_transform_decouples_channels():
    X = synthetic_image(14, 9)
    A, B = build_blur_pair(BlurModel(14, 1.5, 4), n=9)
    T = Transform.identity(3)
    C = synthesize_observation(X, A, B, T, 1e-4, seed=3)
    for lam, mu in ((1e-3, 1e-3), (1e-2, 1e-4)):
        reg = RegularizationParams(lam, mu)
        got = tikhonov_solve(A, B, C, reg, T)
        for k in range(3):
            ref = oracles.dense_tikhonov(A.slice(k), B.slice(k), C.slice(k), lam, mu)
            np.testing.assert_allclose(got.slice(k), ref, atol=1e-8)
        # one-sided: right operator is the identity
        got = tikhonov_solve(A, identity_tensor(9, T), C, reg, T)
        for k in range(3):
            ref = oracles.dense_tikhonov(A.slice(k), np.eye(9), C.slice(k), lam, mu)
            np.testing.assert_allclose(got.slice(k), ref, atol=1e-8)


def test_psnr_values():
    X = Tensor3(np.full((3, 4, 4), 0.2))
    assert psnr(X, X) == math.inf
    assert psnr(X, Tensor3(X.data + 0.1)) == pytest.approx(20.0, abs=1e-9)
    rng = np.random.default_rng(2)
    for _ in range(5):
        Y = Tensor3(rng.random((3, 4, 4)))
        assert psnr(X, Y) == psnr(Y, X)
    with pytest.raises(ValueError):
        psnr(X, Tensor3.zeros(4, 3, 3))


def test_reconstruction_improves_psnr_over_seeds():
    X = synthetic_image(32)
    model = BlurModel.clipped(32)
    T = Transform.identity(3)
    A, _ = build_blur_pair(model)
    for seed in range(5):
        for var in (1e-3, 1e-4):
            C = synthesize_observation(X, A, None, T, var, seed)
            _, _, score = tune_regularization(C, A, None, T, X, GRID9)
            observed = Tensor3(np.clip(C.data.real, 0, 1))
            assert score > psnr(observed, X)


def test_experiment_report():
    out = deblur_experiment(synthetic_image(32), noise_var=1e-3, seed=0)
    assert out["psnr_reconstructed"] > out["psnr_blurred"]
    assert out["relative_error_reconstructed"] < out["relative_error_blurred"]
    assert out["reg"].lam == out["reg"].mu
    assert out["imag_residue"] <= 1e-8
    with pytest.raises(ValueError):
        deblur_experiment(synthetic_image(8), mode="sideways")


def test_image_round_trip():
    rng = np.random.default_rng(3)
    img = rng.integers(0, 256, (5, 7, 3), dtype=np.uint8)
    X = image_to_tensor(img)
    assert X.shape == (5, 7, 3)
    np.testing.assert_array_equal(tensor_to_image(X), img)
    assert synthetic_image(8).data.min() >= 0 and synthetic_image(8).data.max() <= 1
