import numpy as np
import pytest

from fsgcc.lowrank import (BandWeights, RankOneFactors, default_exclusion, estimate_band_weights,
                           recover_gcc, svd_rank1_extract, window_noise_stats, wsvd_rank1_extract)
from fsgcc.spectral import make_spectral_window
from fsgcc.subband import FsGccMatrix, ideal_fsgcc, synthesize_noisy_fsgcc

from oracles import als_rank1


@pytest.fixture(scope="module")
def win():
    return make_spectral_window("hann", 64, 32, 512)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class TestSvd:
    def test_matches_dense_svd(self, rng):
        R = crandn(rng, 40, 6)
        f = svd_rank1_extract(R)
        U, s, Vh = np.linalg.svd(R, full_matrices=False)
        np.testing.assert_allclose(f.sigmas, s, rtol=1e-10)
        np.testing.assert_allclose(f.target(), s[0] * np.outer(U[:, 0], Vh[0]), atol=1e-10)
        assert np.linalg.norm(f.b1) == pytest.approx(1.0)
        assert np.linalg.norm(f.a1) == pytest.approx(s[0])

    def test_phase_convention(self, rng):
        f = svd_rank1_extract(crandn(rng, 20, 4))
        k = np.argmax(np.abs(f.a1))
        assert f.a1[k].imag == pytest.approx(0, abs=1e-12) and f.a1[k].real > 0

    def test_rank_two_approximation(self, rng):
        R = crandn(rng, 30, 5)
        f = svd_rank1_extract(R, rank=2)
        U, s, Vh = np.linalg.svd(R, full_matrices=False)
        np.testing.assert_allclose(f.approximation(), (U[:, :2] * s[:2]) @ Vh[:2], atol=1e-10)

    def test_errors(self):
        with pytest.raises(ValueError, match="empty"):
            svd_rank1_extract(np.zeros((8, 3)))
        with pytest.raises(ValueError, match="two sub-bands"):
            svd_rank1_extract(np.ones((8, 1)))

    def test_ideal_factor_is_window_response(self, win):
        ideal = ideal_fsgcc(40, win)
        f = svd_rank1_extract(ideal.matrix)
        # a1 = sqrt(L) phi0 up to the real-positive phase convention
        np.testing.assert_allclose(f.a1, np.sqrt(ideal.matrix.L) * ideal.phi0, atol=1e-12)


class TestWsvd:
    @pytest.mark.parametrize("shape", [(4, 2), (8, 3), (16, 5)])
    def test_weighted_residual_matches_als(self, shape):
        rng = np.random.default_rng(sum(shape))
        R = crandn(rng, *shape)
        w = rng.uniform(0.05, 1, shape[1])
        f = wsvd_rank1_extract(R, w)
        W = np.ones(shape[0])[:, None] * w[None, :]
        ours = np.linalg.norm((R - f.target()) * W)
        best, _, _ = als_rank1(R, W)
        assert ours == pytest.approx(best, abs=1e-6)

    def test_unit_weights_give_svd_target(self, rng):
        R = crandn(rng, 32, 5)
        a = wsvd_rank1_extract(R, np.ones(5))
        b = svd_rank1_extract(R)
        np.testing.assert_allclose(a.target(), b.target(), atol=1e-10)
        # factor scaling differs: sqrt(sigma1) on both sides
        assert np.linalg.norm(a.a1) == pytest.approx(np.sqrt(b.sigmas[0]))

    def test_zero_weight_band_is_ignored(self, rng):
        R = crandn(rng, 16, 4)
        R2 = R.copy()
        R2[:, 3] = 100 * crandn(rng, 16)
        w = np.array([1.0, 0.5, 0.7, 0.0])
        np.testing.assert_allclose(wsvd_rank1_extract(R, w).a1, wsvd_rank1_extract(R2, w).a1)

    def test_insufficient_bands(self, rng):
        with pytest.raises(ValueError, match="insufficient reliable bands"):
            wsvd_rank1_extract(crandn(rng, 8, 4), [1, 0, 0, 1e-4])
        with pytest.raises(ValueError, match="match"):
            wsvd_rank1_extract(crandn(rng, 8, 4), [1, 1])

    def test_noise_bands_suppressed(self, win):
        # half the bands pure noise: weighting keeps the peak on tau0
        ideal = ideal_fsgcc(92, win)
        L = ideal.matrix.L
        alphas = np.r_[np.ones(L // 2), np.zeros(L - L // 2)]
        mat, _ = synthesize_noisy_fsgcc(ideal, alphas, 0)
        f = wsvd_rank1_extract(mat, estimate_band_weights(mat))
        assert recover_gcc(f).tau_hat == 92


class TestWeights:
    def test_noise_stats(self, win):
        perfect, noise = window_noise_stats(win)
        assert perfect == pytest.approx(np.mean(np.abs(win.phi_lag)))
        assert noise > perfect

    def test_ideal_bands_score_one(self, win):
        w = estimate_band_weights(ideal_fsgcc(17, win).matrix)
        np.testing.assert_allclose(w.w, 1.0, atol=1e-12)

    def test_weights_clamped(self):
        assert np.array_equal(BandWeights([-0.5, 0.3, 2.0]).w, [0.0, 0.3, 1.0])

    def test_noise_bands_score_low(self, win):
        ideal = ideal_fsgcc(0, win)
        mat, _ = synthesize_noisy_fsgcc(ideal, np.zeros(ideal.matrix.L), 1)
        assert np.mean(estimate_band_weights(mat).w) < 0.15


class TestRecover:
    @pytest.mark.parametrize("tau0", [-200, -1, 0, 92, 255])
    def test_exact_on_ideal(self, win, tau0):
        mat = ideal_fsgcc(tau0, win).matrix
        r = recover_gcc(svd_rank1_extract(mat), default_exclusion(win))
        assert r.tau_hat == tau0
        assert r.phi0_hat.max() > 0

    def test_sign_flip_is_undone(self, win):
        mat = ideal_fsgcc(5, win).matrix
        f = svd_rank1_extract(FsGccMatrix(-mat.R, win))
        assert recover_gcc(f).tau_hat == 5

    def test_default_exclusion(self, win):
        assert default_exclusion(win) == 2 * 512 / 64

    def test_imaginary_factor_is_flagged(self, win):
        phi = ideal_fsgcc(5, win).phi0
        f = RankOneFactors(1j * phi, np.ones(2), np.array([1.0, 0.0]), "svd")
        with pytest.warns(RuntimeWarning, match="near-zero real part"):
            assert recover_gcc(f).ill_conditioned
        assert not recover_gcc(svd_rank1_extract(ideal_fsgcc(5, win).matrix)).ill_conditioned
