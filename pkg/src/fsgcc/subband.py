"""Frequency-sliding GCC matrix: sub-band GCCs stacked column-wise.

Column ``l`` is the inverse DFT of the PHAT spectrum seen through the
spectral window centred on bin ``l*M`` and shifted back to baseband.
"""

from dataclasses import dataclass

import numpy as np

from .spectral import Gcc, PhatSpectrum, SpectralWindow, from_lag_order, real_ifft_lagged, to_lag_order

COLA_TOL = 1e-9


def num_bands(N, B, M):
    """Number of sub-bands that fit below Nyquist."""
    L = (N // 2 - B // 2 + M) // M
    if L < 1:
        raise ValueError(f"window wider than Nyquist range (N={N}, B={B}, M={M})")
    return int(L)


@dataclass(frozen=True)
class FsGccMatrix:
    """Complex ``N x L`` matrix of sub-band GCCs (rows lag-ordered)."""

    R: np.ndarray
    window: SpectralWindow

    @property
    def N(self):
        return self.R.shape[0]

    @property
    def L(self):
        return self.R.shape[1]

    @property
    def band_center_bins(self):
        return np.arange(self.L) * self.window.M

    def to_csv(self, path):
        """Dump as ``lag,band,re,im`` rows."""
        N, L = self.R.shape
        with open(path, "w") as fh:
            fh.write("lag,band,re,im\n")
            for l in range(L):
                for i in range(N):
                    z = self.R[i, l]
                    fh.write(f"{i - N // 2},{l},{z.real:.17g},{z.imag:.17g}\n")


def _psi_array(psi):
    return psi.psi if isinstance(psi, PhatSpectrum) else np.asarray(psi, dtype=complex)


def _check_shapes(psi, win):
    if len(psi) != win.N:
        raise ValueError(f"spectrum length {len(psi)} does not match window N={win.N}")


def subband_gcc(psi, win, l):
    """Complex sub-band GCC ``r_l`` (lag-ordered) for band index ``l``."""
    p = _psi_array(psi)
    _check_shapes(p, win)
    L = num_bands(win.N, win.B, win.M)
    if not 0 <= l < L:
        raise ValueError(f"band index {l} out of range [0, {L})")
    shifted = np.roll(p, -l * win.M)
    return to_lag_order(np.fft.ifft(shifted * win.phi_freq))


def build_fsgcc_matrix(psi, win):
    """Stack all sub-band GCCs into an :class:`FsGccMatrix`."""
    p = _psi_array(psi)
    _check_shapes(p, win)
    N = win.N
    L = num_bands(N, win.B, win.M)
    # only the window's non-zero bins contribute
    support = win.support
    taps = win.phi_freq[support % N]
    spec = np.zeros((N, L), dtype=complex)
    src = (support[:, None] + win.M * np.arange(L)[None, :]) % N
    spec[support % N, :] = p[src] * taps[:, None]
    R = to_lag_order(np.fft.ifft(spec, axis=0))
    return FsGccMatrix(R, win)


@dataclass(frozen=True)
class IdealFsGcc:
    """Noiseless single-path FS-GCC: the outer product ``phi0 e^H``."""

    tau0: int
    matrix: FsGccMatrix
    phi0: np.ndarray
    e: np.ndarray


def shifted_window_response(win, tau0):
    """``phi[n - tau0]`` in lag order (circular shift)."""
    return np.roll(win.phi_lag, int(tau0))


def ideal_fsgcc(tau0, win, N=None):
    """Closed-form FS-GCC matrix for an ideal delay ``tau0``."""
    N = win.N if N is None else N
    if N != win.N:
        raise ValueError("N does not match window")
    if not -(N // 2) <= tau0 < N // 2:
        raise ValueError(f"tau0={tau0} outside [-N/2, N/2)")
    L = num_bands(N, win.B, win.M)
    phi0 = shifted_window_response(win, tau0)
    e = np.exp(2j * np.pi * win.M * np.arange(L) * tau0 / N)
    R = np.outer(phi0, np.conj(e))
    return IdealFsGcc(int(tau0), FsGccMatrix(R, win), phi0, e)


@dataclass(frozen=True)
class NoisySubbandModel:
    """Per-band mixing coefficients and the noise columns that were mixed in."""

    alphas: np.ndarray
    noise_cols: np.ndarray

    @property
    def G(self):
        return np.diag(self.alphas)


def subband_noise(win, L, rng):
    """``L`` noise GCC columns shaped by the window, each with norm ``||phi||``.

    Bins are circularly-symmetric complex Gaussian; the result is
    lag-ordered like every other sub-band GCC.
    """
    N = win.N
    z = (rng.standard_normal((N, L)) + 1j * rng.standard_normal((N, L))) / np.sqrt(2)
    cols = to_lag_order(np.fft.ifft(z * win.phi_freq[:, None], axis=0))
    norms = np.linalg.norm(cols, axis=0)
    return cols * (np.sqrt(win.energy) / norms)


def synthesize_noisy_fsgcc(ideal, alphas, rng_seed=None):
    """Mix ideal columns with synthetic band noise: ``R~ G + N (I - G)``.

    Returns the noisy matrix and the model that produced it.
    """
    rng = np.random.default_rng(rng_seed)
    R0 = ideal.matrix.R
    win = ideal.matrix.window
    L = R0.shape[1]
    alphas = np.asarray(alphas, dtype=float)
    if alphas.shape != (L,):
        raise ValueError(f"expected {L} alphas, got shape {alphas.shape}")
    if np.any(alphas < 0) or np.any(alphas > 1):
        raise ValueError("alphas must lie in [0, 1]")
    noise = subband_noise(win, L, rng)
    R = R0 * alphas[None, :] + noise * (1 - alphas)[None, :]
    return FsGccMatrix(R, win), NoisySubbandModel(alphas, noise)


def cola_coverage(win, L):
    """Sum of all shifted window copies, per DFT bin."""
    N = win.N
    cov = np.zeros(N)
    for l in range(L):
        cov += np.roll(win.phi_freq, l * win.M)
    return cov


def cola_reconstruct(mat, tol=COLA_TOL):
    """Recover the full-band GCC over the bins the sub-bands cover.

    Each column is taken back to the frequency domain, shifted up to its
    band, accumulated and divided by the overlap-add constant. The
    positive-frequency result is mirrored so the output GCC is real.

    Returns
    -------
    gcc : Gcc
    covered : ndarray of int
        Positive-frequency bins included in the reconstruction.
    """
    win = mat.window
    N, L, M = mat.N, mat.L, win.M
    spectra = np.fft.fft(from_lag_order(mat.R), axis=0)
    acc = np.zeros(N, dtype=complex)
    for l in range(L):
        acc += np.roll(spectra[:, l], l * M)
    cov = cola_coverage(win, L)

    # bins every overlapping copy can reach: below B/2 - M the band at
    # centre -M is missing, above L*M - B/2 the band at centre L*M is
    interior = np.arange(max(0, win.B // 2 - M), min(N // 2 + 1, L * M - win.B // 2))
    const = float(np.mean(cov[interior]))
    ripple = float(np.max(np.abs(cov[interior] - const)))
    if const <= 0 or ripple > tol * const:
        raise ValueError(f"COLA violated: ripple {ripple:.3g} around {const:.6g}")

    pos = np.arange(N // 2 + 1)
    covered = pos[np.abs(cov[pos] - const) <= tol * const]
    full = np.zeros(N, dtype=complex)
    full[covered] = acc[covered] / const
    mirror = covered[(covered > 0) & (covered < N // 2)]
    full[N - mirror] = np.conj(full[mirror])
    for k in (0, N // 2):
        if k in covered:
            full[k] = full[k].real
    return Gcc.from_values(real_ifft_lagged(full)), covered


def band_limited_reference(psi, covered):
    """Conventional GCC of ``psi`` restricted to ``covered`` bins and their mirrors."""
    p = _psi_array(psi)
    N = len(p)
    mask = np.zeros(N, dtype=bool)
    mask[covered] = True
    mask[(N - covered) % N] = True
    return Gcc.from_values(real_ifft_lagged(np.where(mask, p, 0)))
