import numpy as np
import pytest

from fsgcc.spectral import PhatSpectrum, conventional_gcc, make_spectral_window
from fsgcc.subband import (band_limited_reference, build_fsgcc_matrix, cola_coverage,
                           cola_reconstruct, ideal_fsgcc, num_bands, subband_gcc, subband_noise,
                           synthesize_noisy_fsgcc)

from oracles import subband_direct


def random_phat(rng, N):
    x = rng.standard_normal(N)
    X = np.fft.fft(x)
    return X / np.abs(X)


@pytest.mark.parametrize("N, B, M, L", [
    (2048, 64, 32, 32),     # figure-scenario configuration
    (2048, 128, 32, 31),    # evaluation configuration
    (256, 32, 32, 4),       # tiling B = M: N / (2M)
    (64, 64, 64, 1),
])
def test_num_bands(N, B, M, L):
    assert num_bands(N, B, M) == L


def test_subband_matches_direct_sum(rng):
    N = 64
    win = make_spectral_window("hann", 16, 8, N)
    psi = random_phat(rng, N)
    for l in (0, 1, num_bands(N, 16, 8) - 1):
        np.testing.assert_allclose(subband_gcc(psi, win, l),
                                   subband_direct(psi, win.phi_freq, 8, l), atol=1e-12)


def test_matrix_columns_are_subband_gccs(rng):
    N = 128
    win = make_spectral_window("rectangular", 32, 16, N)
    psi = random_phat(rng, N)
    mat = build_fsgcc_matrix(psi, win)
    assert mat.R.shape == (N, num_bands(N, 32, 16))
    for l in range(mat.L):
        np.testing.assert_allclose(mat.R[:, l], subband_gcc(psi, win, l), atol=1e-13)


def test_band_zero_with_full_window_is_conventional_gcc(rng):
    N = 64
    psi = random_phat(rng, N)
    win = make_spectral_window("rectangular", N, N, N)
    r0 = subband_gcc(psi, win, 0)
    np.testing.assert_allclose(r0.real, conventional_gcc(psi).values, atol=1e-13)


def test_subband_errors(rng):
    win = make_spectral_window("hann", 16, 8, 64)
    with pytest.raises(ValueError, match="out of range"):
        subband_gcc(np.ones(64), win, 99)
    with pytest.raises(ValueError, match="does not match"):
        build_fsgcc_matrix(np.ones(32), win)


class TestIdeal:
    @pytest.mark.parametrize("tau0", [-100, 0, 40, 92])
    def test_closed_form_matches_linear_phase(self, tau0):
        win = make_spectral_window("hann", 64, 32, 512)
        ideal = ideal_fsgcc(tau0, win)
        built = build_fsgcc_matrix(PhatSpectrum.linear_phase(tau0, 512), win)
        np.testing.assert_allclose(built.R, ideal.matrix.R, atol=1e-13)

    def test_rank_one(self):
        win = make_spectral_window("hann", 128, 32, 2048)
        s = np.linalg.svd(ideal_fsgcc(92, win).matrix.R, compute_uv=False)
        assert s[1] / s[0] < 1e-10
        # sigma1^2 = L ||phi||^2 since |e_l| = 1
        assert s[0] ** 2 == pytest.approx(31 * win.energy, rel=1e-10)

    def test_rejects_out_of_range_delay(self):
        win = make_spectral_window("hann", 16, 8, 64)
        with pytest.raises(ValueError):
            ideal_fsgcc(32, win)


class TestNoise:
    def test_columns_have_window_norm(self, rng):
        win = make_spectral_window("hann", 64, 32, 512)
        cols = subband_noise(win, 7, rng)
        np.testing.assert_allclose(np.linalg.norm(cols, axis=0) ** 2, win.energy, rtol=1e-12)

    def test_noise_is_band_limited(self, rng):
        win = make_spectral_window("hann", 32, 16, 256)
        cols = subband_noise(win, 3, rng)
        spec = np.fft.fft(np.fft.ifftshift(cols, axes=0), axis=0)
        outside = win.phi_freq == 0
        assert np.max(np.abs(spec[outside])) < 1e-12

    def test_mixture(self):
        win = make_spectral_window("hann", 64, 32, 512)
        ideal = ideal_fsgcc(10, win)
        alphas = np.linspace(0, 1, ideal.matrix.L)
        mat, model = synthesize_noisy_fsgcc(ideal, alphas, 3)
        expect = ideal.matrix.R * alphas + model.noise_cols * (1 - alphas)
        np.testing.assert_allclose(mat.R, expect)
        np.testing.assert_array_equal(np.diag(model.G), alphas)
        # the same seed reproduces the draw
        again, _ = synthesize_noisy_fsgcc(ideal, alphas, 3)
        np.testing.assert_array_equal(again.R, mat.R)

    def test_alpha_validation(self):
        ideal = ideal_fsgcc(0, make_spectral_window("hann", 64, 32, 512))
        with pytest.raises(ValueError):
            synthesize_noisy_fsgcc(ideal, np.full(ideal.matrix.L, 1.5))
        with pytest.raises(ValueError):
            synthesize_noisy_fsgcc(ideal, np.ones(3))


class TestCola:
    @pytest.mark.parametrize("kind, B, M, const", [("rectangular", 32, 32, 1.0), ("hann", 64, 32, 1.0),
                                                    ("hann", 64, 16, 2.0)])
    def test_coverage_constant(self, kind, B, M, const):
        N = 1024
        win = make_spectral_window(kind, B, M, N)
        L = num_bands(N, B, M)
        cov = cola_coverage(win, L)
        lo, hi = max(0, B // 2 - M), L * M - B // 2
        np.testing.assert_allclose(cov[lo:hi], const, atol=1e-12)

    @pytest.mark.parametrize("kind, B, M", [("rectangular", 32, 32), ("hann", 64, 32), ("hann", 64, 16)])
    def test_reconstruction_matches_band_limited_gcc(self, rng, kind, B, M):
        N = 512
        win = make_spectral_window(kind, B, M, N)
        psi = random_phat(rng, N)
        g, covered = cola_reconstruct(build_fsgcc_matrix(psi, win))
        ref = band_limited_reference(psi, covered)
        assert np.max(np.abs(g.values - ref.values)) < 1e-9

    def test_rect_tiling_covers_everything(self, rng):
        N = 256
        psi = random_phat(rng, N)
        g, covered = cola_reconstruct(build_fsgcc_matrix(psi, make_spectral_window("rect", 32, 32, N)))
        # L = N / (2M) tiles reach bin (L-1)M + B/2, whose weight is halved
        np.testing.assert_array_equal(covered, np.arange(3 * 32 + 16))
        mask = np.zeros(N)
        mask[covered] = 1
        mask[-covered[1:]] = 1
        ref = conventional_gcc(psi * mask).values
        np.testing.assert_allclose(g.values, ref, atol=1e-12)

    def test_violation_reports_ripple(self, rng):
        win = make_spectral_window("hann", 64, 24, 512)
        with pytest.raises(ValueError, match="COLA violated"):
            cola_reconstruct(build_fsgcc_matrix(random_phat(rng, 512), win))


def test_csv_round_trip(tmp_path, rng):
    win = make_spectral_window("hann", 16, 8, 32)
    mat = build_fsgcc_matrix(random_phat(rng, 32), win)
    path = tmp_path / "m.csv"
    mat.to_csv(path)
    data = np.genfromtxt(path, delimiter=",", names=True)
    R = np.zeros_like(mat.R)
    R[(data["lag"] + 16).astype(int), data["band"].astype(int)] = data["re"] + 1j * data["im"]
    np.testing.assert_array_equal(R, mat.R)
