"""Frequency-sliding GCC: sub-band GCC matrices, low-rank TDOA recovery, M-SRP localisation."""

from importlib.metadata import PackageNotFoundError, version as _version

try:
    __version__ = _version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .spectral import (FramePair, Gcc, PhatSpectrum, SpectralWindow, conventional_gcc,
                       frame_signal, make_spectral_window, phat_cross_spectrum)
from .subband import FsGccMatrix, build_fsgcc_matrix, cola_reconstruct, ideal_fsgcc, subband_gcc
from .lowrank import estimate_band_weights, recover_gcc, svd_rank1_extract, wsvd_rank1_extract
from .tde import MetricsReport, aggregate_metrics, correlation_time, estimate_tdoa, fspr
from .pipeline import AnalysisConfig, FrameProcessor, process_pair
from .roomsim import SimScene, TestSignalSpec, image_source_rir, synthesize_pair
from .srp import make_grid, msrp_map

__all__ = [
    "AnalysisConfig", "FramePair", "FrameProcessor", "FsGccMatrix", "Gcc", "MetricsReport",
    "PhatSpectrum", "SimScene", "SpectralWindow", "TestSignalSpec", "aggregate_metrics",
    "build_fsgcc_matrix", "cola_reconstruct", "conventional_gcc", "correlation_time",
    "estimate_band_weights", "estimate_tdoa", "frame_signal", "fspr", "ideal_fsgcc",
    "image_source_rir", "make_grid", "make_spectral_window", "msrp_map", "phat_cross_spectrum",
    "process_pair", "recover_gcc", "subband_gcc", "svd_rank1_extract", "synthesize_pair",
    "wsvd_rank1_extract", "__version__",
]
