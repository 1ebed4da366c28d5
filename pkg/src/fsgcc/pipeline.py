"""Frame-by-frame TDE over a sensor pair for each estimation method."""

from dataclasses import dataclass, field

import numpy as np

from . import lowrank
from .roomsim import active_frames
from .spectral import FramePair, conventional_gcc, frame_signal, make_spectral_window, phat_cross_spectrum
from .subband import build_fsgcc_matrix, num_bands
from .tde import METHODS, fspr


@dataclass(frozen=True)
class AnalysisConfig:
    """STFT and sub-band parameters; defaults follow the evaluation setup."""

    N: int = 2048
    hop: int = 512
    B: int = 128
    M: int = 32
    window: str = "hann"
    taper: str = "hann"
    eps_floor: float = None
    methods: tuple = METHODS
    vad: bool = True

    def __post_init__(self):
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise ValueError(f"unknown method(s): {sorted(bad)}")
        if not 0 < self.hop <= self.N:
            raise ValueError(f"hop must satisfy 0 < hop <= N, got {self.hop}")
        # raises on invalid window parameters
        make_spectral_window(self.window, self.B, self.M, self.N)
        num_bands(self.N, self.B, self.M)

    def spectral_window(self):
        return make_spectral_window(self.window, self.B, self.M, self.N)


@dataclass
class FrameResult:
    frame: int
    correlations: dict = field(default_factory=dict)
    tau_hat: dict = field(default_factory=dict)
    fspr_db: dict = field(default_factory=dict)
    weights: np.ndarray = None
    wsvd_fallback: bool = False


class FrameProcessor:
    """Turns one frame pair into a correlation function per method."""

    def __init__(self, config=AnalysisConfig()):
        self.config = config
        self.window = config.spectral_window()
        self.exclusion = lowrank.default_exclusion(self.window)

    def process(self, pair, frame=0):
        cfg = self.config
        psi = phat_cross_spectrum(pair, cfg.eps_floor)
        res = FrameResult(frame)
        if "gcc" in cfg.methods:
            res.correlations["gcc"] = conventional_gcc(psi).values
        if "fs_svd" in cfg.methods or "fs_wsvd" in cfg.methods:
            mat = build_fsgcc_matrix(psi, self.window)
            if "fs_svd" in cfg.methods:
                f = lowrank.svd_rank1_extract(mat)
                res.correlations["fs_svd"] = lowrank.recover_gcc(f).phi0_hat
            if "fs_wsvd" in cfg.methods:
                w = lowrank.estimate_band_weights(mat)
                res.weights = w.w
                try:
                    f = lowrank.wsvd_rank1_extract(mat, w)
                except ValueError:
                    # no reliable band: fall back to the unweighted factorisation
                    f = lowrank.svd_rank1_extract(mat)
                    res.wsvd_fallback = True
                res.correlations["fs_wsvd"] = lowrank.recover_gcc(f).phi0_hat
        N = cfg.N
        for m, r in res.correlations.items():
            tau = int(np.argmax(r)) - N // 2
            res.tau_hat[m] = tau
            res.fspr_db[m] = fspr(r, tau, self.exclusion)
        return res


def frame_pairs(x1, x2, config, fs=1.0):
    """Yield ``FramePair`` objects for the (active) frames of two signals."""
    f1 = frame_signal(x1, config.N, config.hop, config.taper)
    f2 = frame_signal(x2, config.N, config.hop, config.taper)
    n = min(len(f1), len(f2))
    f1, f2 = f1[:n], f2[:n]
    keep = np.ones(n, dtype=bool)
    if config.vad:
        keep = active_frames(f1) & active_frames(f2)
    X1 = np.fft.fft(f1, axis=1)
    X2 = np.fft.fft(f2, axis=1)
    for i in np.flatnonzero(keep):
        yield FramePair(X1[i], X2[i], fs=fs, frame_index=int(i))


def process_pair(x1, x2, config=AnalysisConfig(), fs=1.0):
    """Run every configured method on every active frame of a signal pair."""
    proc = FrameProcessor(config)
    return [proc.process(p, p.frame_index) for p in frame_pairs(x1, x2, config, fs)]
