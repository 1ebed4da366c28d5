"""Experiment drivers: band-noise frame scenarios, TDE sweeps and localisation runs.

Everything here is deterministic given a root seed; per-scene and
per-noise-realisation streams are split off with ``numpy.random.SeedSequence``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .pipeline import AnalysisConfig, FrameProcessor, frame_pairs, process_pair
from .roomsim import (SimScene, TestSignalSpec, _brickwall, gen_test_signal, image_source_rir,
                      synthesize_array, synthesize_pair)
from .spectral import FramePair, frame_signal
from .srp import all_pairs, error_summary, localize, make_grid, msrp_map
from .tde import METHODS, aggregate_metrics, correlation_time

ROOM = (6.0, 7.0, 3.0)
PLANE_Z = 1.25
ARRAY_SPACING = 0.5
# reference correlation time used when the source is white (Tc of white noise
# is below one sample, which would make every off-by-one pick anomalous)
REFERENCE_TC = 24.0

# noise bands per figure panel, cycles/sample; the signal itself is full band
FIG1_NOISE_BANDS = {
    "fig1a": (),
    "fig1b": ((0.2, 0.5),),
    "fig1c": ((0.0, 0.17), (0.2, 0.5)),
}

# six microphones on the walls and in the corners of the default room; every
# pair is closer than N/2 = 1024 samples of travel at 44.1 kHz
WALL_MICS = (
    (0.6, 0.6, 1.1), (5.4, 0.6, 1.4), (0.6, 6.4, 1.4),
    (5.4, 6.4, 1.1), (0.3, 3.5, 1.25), (5.7, 3.5, 1.25),
)


def spawn(seed, *keys):
    """Child generator for a (seed, keys...) path."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *[int(k) for k in keys]]))


def fig1_frames(panel="fig1c", n_frames=1, N=2048, tau0=40, snr_db=-15.0, seed=0):
    """Tapered frame pairs: white source, noise confined to the panel's bands.

    ``x1[n] = x2[n - tau0]`` for the source part, so the true TDOA is ``tau0``.
    """
    bands = FIG1_NOISE_BANDS[panel]
    taper = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(N) / N)
    pad = abs(tau0)
    out = []
    for f in range(n_frames):
        rng = spawn(seed, f)
        s = rng.standard_normal(N + pad)
        if tau0 >= 0:
            x1, x2 = s[:N], s[tau0:tau0 + N]
        else:
            x1, x2 = s[-tau0:-tau0 + N], s[:N]
        frames = []
        for x in (x1, x2):
            y = x.copy()
            if bands:
                n = _brickwall(rng.standard_normal(4 * N), bands)[:N]
                n *= math.sqrt(np.mean(x ** 2) / np.mean(n ** 2) / 10 ** (snr_db / 10))
                y = y + n
            frames.append(y * taper)
        out.append(FramePair.from_frames(*frames, frame_index=f))
    return out


def fig1_trial(panel="fig1c", n_frames=500, config=None, seed=0, t_c=REFERENCE_TC, tau0=40):
    """Per-method metrics over independent band-noise frames."""
    config = config or AnalysisConfig(B=64, M=32, vad=False)
    proc = FrameProcessor(config)
    recs = {m: [] for m in config.methods}
    for pair in fig1_frames(panel, n_frames, config.N, tau0, seed=seed):
        r = proc.process(pair, pair.frame_index)
        for m in config.methods:
            recs[m].append((r.tau_hat[m], tau0, r.fspr_db[m]))
    return {m: aggregate_metrics(v, t_c) for m, v in recs.items()}


def random_pair_scene(rng, refl, snr_db, signal, room=ROOM, spacing=ARRAY_SPACING, fs=44100.0,
                      margin=0.5, seed=0):
    """Two-microphone array at a random position/orientation plus a random source."""
    room = np.asarray(room, dtype=float)
    centre = np.array([rng.uniform(margin + spacing, room[0] - margin - spacing),
                       rng.uniform(margin + spacing, room[1] - margin - spacing), PLANE_Z])
    theta = rng.uniform(0, np.pi)
    half = spacing / 2 * np.array([np.cos(theta), np.sin(theta), 0.0])
    while True:
        src = np.array([rng.uniform(margin, room[0] - margin),
                        rng.uniform(margin, room[1] - margin), PLANE_Z])
        if np.linalg.norm(src - centre) > 0.5:
            break
    return SimScene(tuple(room), tuple(src), (tuple(centre + half), tuple(centre - half)),
                    refl=refl, fs=fs, snr_db=snr_db, signal=signal, seed=seed)


@dataclass(frozen=True)
class SweepConfig:
    snrs: tuple = (-10.0, 0.0, 10.0, 20.0)
    refls: tuple = (0.0, 0.8)
    n_scenes: int = 5
    n_noise: int = 5
    signal: TestSignalSpec = field(default_factory=lambda: TestSignalSpec("speechlike", 2.0, seed=0))
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    fs: float = 44100.0
    seed: int = 0


def run_tde_sweep(sweep, progress=None):
    """Metrics for every (method, snr, refl) cell.

    Returns ``(rows, t_c)`` where rows are ``(method, snr, refl, report)``
    sorted by key; a report is ``None`` when a cell produced no frames.
    """
    source = gen_test_signal(sweep.signal, sweep.fs)
    t_c = correlation_time(source)
    methods = sweep.analysis.methods
    proc = FrameProcessor(sweep.analysis)
    records = {}
    for ri, refl in enumerate(sweep.refls):
        scenes = [random_pair_scene(spawn(sweep.seed, ri, k), refl, math.inf, sweep.signal,
                                    fs=sweep.fs, seed=k) for k in range(sweep.n_scenes)]
        rirs = [[image_source_rir(s, 0), image_source_rir(s, 1)] for s in scenes]
        for snr in sweep.snrs:
            cell = {m: [] for m in methods}
            for k, scene in enumerate(scenes):
                for q in range(sweep.n_noise):
                    noise_seed = int(spawn(sweep.seed, ri, k, q, 7).integers(2 ** 31))
                    x1, x2, tt = synthesize_pair(scene.with_snr(snr), source=source, rirs=rirs[k],
                                                 noise_seed=noise_seed)
                    for pair in frame_pairs(x1, x2, sweep.analysis, sweep.fs):
                        r = proc.process(pair, pair.frame_index)
                        for m in methods:
                            cell[m].append((r.tau_hat[m], tt, r.fspr_db[m]))
            for m in methods:
                records[(m, float(snr), float(refl))] = (
                    aggregate_metrics(cell[m], t_c) if cell[m] else None)
            if progress:
                progress(refl, snr)
    rows = [(m, snr, refl, rep) for (m, snr, refl), rep in sorted(records.items())]
    return rows, t_c


@dataclass(frozen=True)
class LocalizationConfig:
    snrs: tuple = (math.inf, 20.0, 10.0, 0.0)
    refls: tuple = (0.0, 0.8)
    n_scenes: int = 5
    frames_per_scene: int = 5
    mics: tuple = WALL_MICS
    room: tuple = ROOM
    resolution: float = 0.15
    methods: tuple = ("gcc", "fs_wsvd")
    signal: TestSignalSpec = field(default_factory=lambda: TestSignalSpec("speechlike", 2.0, seed=0))
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    fs: float = 44100.0
    seed: int = 0


def localization_scenes(cfg, refl, ri):
    room = np.asarray(cfg.room, dtype=float)
    scenes = []
    for k in range(cfg.n_scenes):
        rng = spawn(cfg.seed, 100 + ri, k)
        src = (rng.uniform(1.0, room[0] - 1.0), rng.uniform(1.0, room[1] - 1.0), PLANE_Z)
        scenes.append(SimScene(tuple(room), src, cfg.mics, refl=refl, fs=cfg.fs,
                               signal=cfg.signal, seed=k))
    return scenes


def frame_correlations(signals, frame_index, proc, pairs):
    """Per-method list of pair correlations for one frame index."""
    cfg = proc.config
    out = {m: [] for m in cfg.methods}
    spectra = [np.fft.fft(frame_signal(x, cfg.N, cfg.hop, cfg.taper)[frame_index]) for x in signals]
    for i, j in pairs:
        r = proc.process(FramePair(spectra[i], spectra[j]))
        for m in cfg.methods:
            out[m].append(r.correlations[m])
    return out


def run_localization(cfg, keep_maps=False, progress=None):
    """Localisation errors per (method, snr, refl).

    Returns ``(errors, maps)``: ``errors[(method, snr, refl)]`` is a list of
    metres; ``maps`` holds the first frame's maps per condition when
    ``keep_maps`` is set.
    """
    from dataclasses import replace

    analysis = replace(cfg.analysis, methods=tuple(cfg.methods))
    proc = FrameProcessor(analysis)
    source = gen_test_signal(cfg.signal, cfg.fs)
    grid = make_grid(cfg.room, cfg.resolution, z=PLANE_Z)
    pairs = all_pairs(len(cfg.mics))
    n_frames = (len(source) - analysis.N) // analysis.hop + 1
    picks = np.linspace(1, n_frames - 1, cfg.frames_per_scene).astype(int) if n_frames > 1 else [0]
    errors, maps = {}, {}
    for ri, refl in enumerate(cfg.refls):
        scenes = localization_scenes(cfg, refl, ri)
        rirs = [[image_source_rir(s, m) for m in range(len(cfg.mics))] for s in scenes]
        for snr in cfg.snrs:
            for m in cfg.methods:
                errors[(m, float(snr), float(refl))] = []
            for k, scene in enumerate(scenes):
                noise_seed = int(spawn(cfg.seed, 200 + ri, k, 7).integers(2 ** 31))
                xs = synthesize_array(scene.with_snr(snr), source=source, rirs=rirs[k],
                                      noise_seed=noise_seed)
                for fi in picks:
                    corr = frame_correlations(xs, int(fi), proc, pairs)
                    for m in cfg.methods:
                        srp_map = msrp_map(corr[m], cfg.mics, grid, cfg.fs, scene.c, pairs, m)
                        errors[(m, float(snr), float(refl))].append(localize(srp_map, scene.source))
                        if keep_maps and (m, float(snr), float(refl)) not in maps:
                            maps[(m, float(snr), float(refl))] = (srp_map, scene)
            if progress:
                progress(refl, snr)
    return errors, maps


def localization_table(errors):
    """Rows ``(method, snr, refl, mean, median, n)`` sorted by key."""
    rows = []
    for key in sorted(errors):
        m, snr, refl = key
        mean, median = error_summary(errors[key])
        rows.append((m, snr, refl, mean, median, len(errors[key])))
    return rows


__all__ = [
    "FIG1_NOISE_BANDS", "LocalizationConfig", "METHODS", "REFERENCE_TC", "SweepConfig",
    "WALL_MICS", "fig1_frames", "fig1_trial", "localization_table", "process_pair",
    "random_pair_scene", "run_localization", "run_tde_sweep", "spawn",
]
