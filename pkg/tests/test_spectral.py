import numpy as np
import pytest

from fsgcc.spectral import (FramePair, PhatSpectrum, conventional_gcc, first_argmax, frame_signal,
                            from_lag_order, lag_index, lags, main_lobe_width, make_spectral_window,
                            phat_cross_spectrum, real_ifft_lagged, to_lag_order)

from oracles import idft, lag_ordered


def test_lag_order_roundtrip():
    x = np.arange(8.0)
    y = to_lag_order(x)
    # index 0 holds lag -4, index 4 holds lag 0
    assert y[4] == x[0] and y[0] == x[4]
    np.testing.assert_array_equal(from_lag_order(y), x)
    np.testing.assert_array_equal(lags(8), np.arange(-4, 4))
    assert lag_index(-4, 8) == 0 and lag_index(3, 8) == 7


def test_first_argmax_prefers_smallest_lag():
    assert first_argmax(np.array([0, 3, 1, 3])) == 1


class TestFraming:
    def test_frames_match_manual_slicing(self, rng):
        x = rng.standard_normal(1000)
        fr = frame_signal(x, 256, 64, taper="rect")
        assert fr.shape == ((1000 - 256) // 64 + 1, 256)
        for i in (0, 3, len(fr) - 1):
            np.testing.assert_array_equal(fr[i], x[i * 64:i * 64 + 256])

    def test_hann_taper_overlap_adds_to_constant(self):
        N, hop = 256, 64
        fr = frame_signal(np.ones(N * 6), N, hop)
        acc = np.zeros(N * 6)
        for i, f in enumerate(fr):
            acc[i * hop:i * hop + N] += f
        # 75% overlap periodic Hann sums to 2 away from the edges
        np.testing.assert_allclose(acc[N:-N], 2.0, atol=1e-12)

    @pytest.mark.parametrize("kw, msg", [
        (dict(N=255, hop=10), "even"),
        (dict(N=256, hop=0), "hop"),
        (dict(N=256, hop=300), "hop"),
        (dict(N=2048, hop=512), "too short"),
    ])
    def test_rejects_bad_arguments(self, kw, msg):
        with pytest.raises(ValueError, match=msg):
            frame_signal(np.zeros(1000), **kw)


class TestPhat:
    def test_unit_magnitude_and_floor(self, rng):
        X1 = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        X2 = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        X2[5] = 0
        p = phat_cross_spectrum(FramePair(X1, X2))
        mag = np.abs(p.psi)
        assert p.psi[5] == 0 and 5 in p.floored_bins
        np.testing.assert_allclose(np.delete(mag, 5), 1.0, atol=1e-12)

    def test_explicit_floor_zeroes_weak_bins(self, rng):
        X1 = np.ones(16, complex)
        X2 = np.ones(16, complex)
        X2[:4] = 1e-3
        p = phat_cross_spectrum(FramePair(X1, X2), eps_floor=1e-2)
        assert p.floored_bins == frozenset(range(4))

    def test_delayed_frame_gives_delta(self):
        # circular delay: X1 = X2 exp(-j 2 pi k tau / N)
        N, tau = 128, 9
        x2 = np.random.default_rng(1).standard_normal(N)
        x1 = np.roll(x2, tau)
        g = conventional_gcc(phat_cross_spectrum(FramePair.from_frames(x1, x2)))
        assert g.peak_lag == tau
        assert g.peak_value == pytest.approx(1.0)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            FramePair(np.ones(8), np.ones(10))


class TestGcc:
    def test_matches_slow_idft(self, rng):
        N = 64
        x = rng.standard_normal(N)
        psi = np.fft.fft(x)
        psi /= np.abs(psi)
        ours = conventional_gcc(psi).values
        ref = lag_ordered(idft(psi).real)
        np.testing.assert_allclose(ours, ref, atol=1e-12)

    def test_linear_phase_peaks_at_delay(self):
        for tau in (-31, 0, 17):
            g = conventional_gcc(PhatSpectrum.linear_phase(tau, 64))
            assert g.peak_lag == tau

    def test_non_hermitian_spectrum_raises(self):
        with pytest.raises(ValueError, match="non-Hermitian"):
            real_ifft_lagged(np.exp(1j * np.arange(16.0)))


class TestSpectralWindow:
    @pytest.mark.parametrize("B", [8, 64, 128])
    def test_hann_support_and_symmetry(self, B):
        w = make_spectral_window("hann", B, B // 2, 1024)
        # endpoints of the Hann profile are zero
        assert np.count_nonzero(w.phi_freq) == B - 1
        np.testing.assert_allclose(w.phi_freq[1:], w.phi_freq[1:][::-1])
        assert w.phi_freq[0] == 1.0
        # even profile -> real, even lag response about lag 0
        c = 512
        np.testing.assert_allclose(w.phi_lag[c + 1:], w.phi_lag[1:c][::-1], atol=1e-15)

    def test_rect_half_weight_edges(self):
        w = make_spectral_window("rectangular", 16, 16, 128)
        assert np.count_nonzero(w.phi_freq) == 17
        assert w.phi_freq[8] == 0.5 and w.phi_freq[-8] == 0.5
        assert make_spectral_window("rect", 16, 16, 128).kind == "rectangular"

    def test_lag_response_is_idft_of_profile(self):
        w = make_spectral_window("hann", 16, 8, 64)
        np.testing.assert_allclose(w.phi_lag, lag_ordered(idft(w.phi_freq).real), atol=1e-14)
        assert w.energy == pytest.approx(np.sum(w.phi_freq ** 2) / 64)

    def test_hann_main_lobe_nulls(self):
        # continuous-window nulls at +-2N/B lags
        N, B = 2048, 64
        w = make_spectral_window("hann", B, 32, N)
        null = 2 * N // B
        assert abs(w.phi_lag[N // 2 + null]) < 1e-12 * w.phi_lag[N // 2]
        assert main_lobe_width(w) == 2 * null

    def test_rect_with_B_equal_N_is_all_ones(self):
        w = make_spectral_window("rectangular", 64, 64, 64)
        np.testing.assert_array_equal(w.phi_freq, np.ones(64))

    @pytest.mark.parametrize("args, msg", [
        (("hann", 7, 2, 64), "even"),
        (("hann", 128, 2, 64), "exceeds"),
        (("hann", 16, 17, 64), "hop"),
        (("hann", 16, 0, 64), "hop"),
        (("kaiser", 16, 8, 64), "kind"),
    ])
    def test_invalid(self, args, msg):
        with pytest.raises(ValueError, match=msg):
            make_spectral_window(*args)
