"""STFT framing, spectral windows, PHAT cross-power spectrum and GCC-PHAT.

All correlation vectors in this package are stored lag-ordered: index ``i``
holds lag ``i - N // 2``, so the vector covers lags ``-N/2 ... N/2 - 1``.
"""

from dataclasses import dataclass, field

import numpy as np

HANN = "hann"
RECTANGULAR = "rectangular"
WINDOW_KINDS = (HANN, RECTANGULAR)

# imaginary residue of an inverse DFT that is tolerated / rejected
_IMAG_WARN = 1e-9
_IMAG_FAIL = 1e-6


def lags(N):
    """Lag axis matching the lag-ordered storage convention."""
    return np.arange(-(N // 2), N - N // 2)


def to_lag_order(x):
    """Reorder an inverse-DFT output (lag 0 first) into lag order."""
    return np.fft.fftshift(x, axes=0)


def from_lag_order(x):
    """Inverse of :func:`to_lag_order`."""
    return np.fft.ifftshift(x, axes=0)


def lag_index(lag, N):
    """Array index of ``lag`` in a lag-ordered vector of length ``N``."""
    return int(lag) + N // 2


def first_argmax(values):
    """Index of the maximum; ties go to the smallest index (smallest lag)."""
    return int(np.argmax(values))


def frame_signal(x, N, hop, taper="hann"):
    """Cut a signal into overlapping, tapered frames.

    Parameters
    ----------
    x : array_like
        Real sample vector.
    N : int
        Frame length in samples (even).
    hop : int
        Frame advance in samples, ``0 < hop <= N``.
    taper : {'hann', 'rect'}
        Time-domain analysis window applied to every frame.

    Returns
    -------
    frames : ndarray, shape (n_frames, N)
        Frame ``i`` holds samples ``[i*hop, i*hop + N)`` times the taper.
    """
    x = np.asarray(x, dtype=float)
    if N <= 0 or N % 2:
        raise ValueError(f"frame length must be even and positive, got {N}")
    if not 0 < hop <= N:
        raise ValueError(f"hop must satisfy 0 < hop <= N, got {hop}")
    if x.ndim != 1:
        raise ValueError("expected a 1-D signal")
    if len(x) < N:
        raise ValueError(f"signal too short: {len(x)} samples < frame length {N}")
    if taper in ("hann", HANN):
        # periodic Hann, so 75% overlap sums to a constant
        w = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(N) / N)
    elif taper in ("rect", RECTANGULAR):
        w = np.ones(N)
    else:
        raise ValueError(f"unknown taper {taper!r}")
    n_frames = (len(x) - N) // hop + 1
    idx = np.arange(N)[None, :] + hop * np.arange(n_frames)[:, None]
    return x[idx] * w


@dataclass(frozen=True)
class FramePair:
    """DFT coefficients of one frame from each of two sensors."""

    X1: np.ndarray
    X2: np.ndarray
    fs: float = 1.0
    frame_index: int = 0

    def __post_init__(self):
        X1 = np.asarray(self.X1, dtype=complex)
        X2 = np.asarray(self.X2, dtype=complex)
        if X1.shape != X2.shape or X1.ndim != 1:
            raise ValueError(f"spectrum length mismatch: {X1.shape} vs {X2.shape}")
        if len(X1) % 2:
            raise ValueError("frame length must be even")
        object.__setattr__(self, "X1", X1)
        object.__setattr__(self, "X2", X2)

    @property
    def N(self):
        return len(self.X1)

    @classmethod
    def from_frames(cls, x1, x2, fs=1.0, frame_index=0):
        """Build a pair from two (already tapered) time-domain frames."""
        return cls(np.fft.fft(x1), np.fft.fft(x2), fs=fs, frame_index=frame_index)


@dataclass(frozen=True)
class PhatSpectrum:
    """Unit-magnitude cross-power spectrum; floored bins hold exactly 0."""

    psi: np.ndarray
    eps_floor: float = 0.0
    floored_bins: frozenset = field(default_factory=frozenset)

    @property
    def N(self):
        return len(self.psi)

    @classmethod
    def linear_phase(cls, tau0, N):
        """Ideal anechoic spectrum ``exp(-j 2 pi k tau0 / N)``."""
        k = np.arange(N)
        return cls(np.exp(-2j * np.pi * k * tau0 / N))


def default_eps_floor(pair):
    """Magnitude floor proportional to the frame's mean cross-spectral level."""
    return 1e-12 * float(np.mean(np.abs(pair.X1 * np.conj(pair.X2))))


def phat_cross_spectrum(pair, eps_floor=None):
    """PHAT-weighted cross-power spectrum of a frame pair.

    Bins whose cross-spectral magnitude does not exceed ``eps_floor`` carry
    no phase information and are set to zero.
    """
    if not isinstance(pair, FramePair):
        raise TypeError("expected a FramePair")
    if eps_floor is None:
        eps_floor = default_eps_floor(pair)
    if eps_floor < 0:
        raise ValueError("eps_floor must be non-negative")
    cross = pair.X1 * np.conj(pair.X2)
    mag = np.abs(cross)
    keep = mag > eps_floor
    psi = np.zeros_like(cross)
    psi[keep] = cross[keep] / mag[keep]
    floored = frozenset(int(k) for k in np.flatnonzero(~keep))
    return PhatSpectrum(psi, float(eps_floor), floored)


@dataclass(frozen=True)
class Gcc:
    """Real correlation function, lag-ordered."""

    values: np.ndarray
    peak_lag: int
    peak_value: float

    @property
    def N(self):
        return len(self.values)

    @property
    def lags(self):
        return lags(self.N)

    @classmethod
    def from_values(cls, values):
        values = np.asarray(values, dtype=float)
        i = first_argmax(values)
        return cls(values, i - len(values) // 2, float(values[i]))


def real_ifft_lagged(spectrum):
    """Inverse DFT of a Hermitian spectrum, lag-ordered, imaginary part dropped."""
    r = np.fft.ifft(spectrum)
    resid = float(np.max(np.abs(r.imag))) if len(r) else 0.0
    if resid > _IMAG_FAIL:
        raise ValueError(f"non-Hermitian spectrum: imaginary residue {resid:.3g}")
    return to_lag_order(r.real)


def conventional_gcc(psi):
    """Full-band GCC-PHAT: inverse DFT of the PHAT spectrum."""
    spectrum = psi.psi if isinstance(psi, PhatSpectrum) else np.asarray(psi)
    return Gcc.from_values(real_ifft_lagged(spectrum))


@dataclass(frozen=True)
class SpectralWindow:
    """Frequency-domain analysis window sliding over the PHAT spectrum.

    ``phi_freq`` is centred on bin 0 with wrap-around; ``phi_lag`` is its
    inverse DFT in lag order.
    """

    kind: str
    B: int
    M: int
    N: int
    phi_freq: np.ndarray
    phi_lag: np.ndarray

    @property
    def energy(self):
        """Squared norm of the lag response, ``||phi||^2``."""
        return float(np.sum(self.phi_lag ** 2))

    @property
    def support(self):
        """Offsets (in bins, relative to the centre) where the window is non-zero."""
        k = np.flatnonzero(self.phi_freq)
        return np.where(k > self.N // 2, k - self.N, k)


def _window_profile(kind, B, N):
    # samples of the continuous window at integer offsets k' in [-B/2, B/2]
    half = B // 2
    kp = np.arange(-half, half + 1)
    if kind == HANN:
        w = 0.5 * (1 + np.cos(2 * np.pi * kp / B))
        w[0] = w[-1] = 0.0
    else:
        # half weight at the discontinuity keeps the window even and makes
        # hop == B tile exactly
        w = np.ones(len(kp))
        w[0] = w[-1] = 0.5
    phi = np.zeros(N)
    np.add.at(phi, kp % N, w)
    return phi


def make_spectral_window(kind, B, M, N):
    """Build a Hann or rectangular spectral window of support ``B`` bins.

    Parameters
    ----------
    kind : {'hann', 'rectangular'}
    B : int
        Support in bins; even, ``0 < B <= N``.
    M : int
        Hop between sub-bands in bins, ``0 < M <= B``.
    N : int
        DFT length.
    """
    if kind == "rect":
        kind = RECTANGULAR
    if kind not in WINDOW_KINDS:
        raise ValueError(f"unknown window kind {kind!r}")
    if N <= 0 or N % 2:
        raise ValueError(f"N must be even and positive, got {N}")
    if B <= 0 or B % 2:
        raise ValueError(f"window support B must be even and positive, got {B}")
    if B > N:
        raise ValueError(f"window support B={B} exceeds N={N}")
    if not 0 < M <= B:
        raise ValueError(f"hop must satisfy 0 < M <= B, got M={M}, B={B}")
    phi_freq = _window_profile(kind, B, N)
    phi_lag = real_ifft_lagged(phi_freq)
    phi_freq.setflags(write=False)
    phi_lag.setflags(write=False)
    return SpectralWindow(kind, int(B), int(M), int(N), phi_freq, phi_lag)


def main_lobe_width(win):
    """Nominal main-lobe width of ``phi_lag`` in lags (null to null)."""
    factor = 4 if win.kind == HANN else 2
    return factor * win.N / win.B
