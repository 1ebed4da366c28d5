"""Synthetic ground truth: shoebox image-source RIRs, test signals, noisy pairs."""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.io import wavfile
from scipy.signal import fftconvolve, lfilter

SPEED_OF_SOUND = 343.0
KERNEL_TAPS = 81
VAD_THRESHOLD_DB = -40.0
# speech-like source
FORMANT_RANGES = ((300, 800), (900, 2200), (2200, 3000), (3000, 4000), (4000, 4800))
GLOTTAL_TILT = 0.97
FRICATIVE_GAIN = 0.2
UNVOICED_FRACTION = 0.3
NOISELESS = math.inf


@dataclass(frozen=True)
class TestSignalSpec:
    """Source signal description.

    ``kind`` is one of ``white``, ``bandlimited``, ``speechlike`` or ``wav``.
    ``bands`` are ``(lo, hi)`` intervals in cycles/sample, within [0, 0.5].
    """

    __test__ = False  # not a pytest class

    kind: str = "speechlike"
    duration_s: float = 2.0
    seed: int = 0
    bands: tuple = ()
    ar_order: int = 10
    burst_rate: float = 4.0
    path: str = None

    def __post_init__(self):
        if self.kind not in ("white", "bandlimited", "speechlike", "wav"):
            raise ValueError(f"unknown signal kind {self.kind!r}")
        for lo, hi in self.bands:
            if not 0 <= lo < hi <= 0.5:
                raise ValueError(f"band ({lo}, {hi}) outside [0, 0.5]")
        if self.kind == "bandlimited" and not self.bands:
            raise ValueError("bandlimited signal needs at least one band")
        if self.kind == "wav" and not self.path:
            raise ValueError("wav signal needs a path")
        if self.kind != "wav" and self.duration_s <= 0:
            raise ValueError("duration must be positive")


@dataclass(frozen=True)
class SimScene:
    room_dims: tuple
    source_pos: tuple
    mic_positions: tuple
    refl: float = 0.0
    c: float = SPEED_OF_SOUND
    fs: float = 44100.0
    max_order: int = None
    snr_db: float = NOISELESS
    signal: TestSignalSpec = field(default_factory=TestSignalSpec)
    seed: int = 0

    def __post_init__(self):
        room = np.asarray(self.room_dims, dtype=float)
        if room.shape != (3,) or np.any(room <= 0):
            raise ValueError("room_dims must be three positive lengths")
        if not 0 <= self.refl < 1:
            raise ValueError("reflection coefficient must be in [0, 1)")
        mics = np.atleast_2d(np.asarray(self.mic_positions, dtype=float))
        if mics.shape[0] < 2 or mics.shape[1] != 3:
            raise ValueError("need at least two 3-D microphone positions")
        for p in [np.asarray(self.source_pos, float), *mics]:
            if np.any(p <= 0) or np.any(p >= room):
                raise ValueError(f"position {tuple(p)} is not strictly inside the room")
        if self.max_order is not None and self.max_order < 0:
            raise ValueError("max_order must be non-negative")

    @property
    def mics(self):
        return np.atleast_2d(np.asarray(self.mic_positions, dtype=float))

    @property
    def source(self):
        return np.asarray(self.source_pos, dtype=float)

    @property
    def order(self):
        """Image order used for the RIR (explicit or from the -60 dB rule)."""
        if self.max_order is not None:
            return int(self.max_order)
        return default_max_order(self.refl)

    def with_snr(self, snr_db):
        return replace(self, snr_db=snr_db)


def default_max_order(refl, floor_db=-60.0):
    """Smallest order whose reflection loss alone is below ``floor_db``."""
    if refl <= 0:
        return 0
    return int(math.ceil((floor_db / 20) / math.log10(refl)))


def true_tdoa(scene, mic_i, mic_j):
    """Rounded TDOA in samples; positive when ``mic_i`` is farther from the source."""
    s, m = scene.source, scene.mics
    d = np.linalg.norm(s - m[mic_i]) - np.linalg.norm(s - m[mic_j])
    return int(round(d / scene.c * scene.fs))


@dataclass(frozen=True)
class Rir:
    taps: np.ndarray
    fs: float
    direct_delay_samples: float


def image_sources(room_dims, source, max_order):
    """Image positions and reflection counts of a shoebox room.

    Along each axis the image index ``i`` places the source at
    ``i*L + s`` (even ``i``) or ``(i+1)*L - s`` (odd ``i``) after ``|i|``
    wall reflections.
    """
    room = np.asarray(room_dims, dtype=float)
    src = np.asarray(source, dtype=float)
    K = int(max_order)
    idx = np.arange(-K, K + 1)
    per_axis = []
    for ax in range(3):
        even = idx % 2 == 0
        pos = np.where(even, idx * room[ax] + src[ax], (idx + 1) * room[ax] - src[ax])
        per_axis.append(pos)
    ix, iy, iz = np.meshgrid(idx, idx, idx, indexing="ij")
    order = np.abs(ix) + np.abs(iy) + np.abs(iz)
    keep = order <= K
    pos = np.stack([per_axis[0][ix[keep] + K], per_axis[1][iy[keep] + K],
                    per_axis[2][iz[keep] + K]], axis=1)
    return pos, order[keep]


def fractional_delay_kernel(frac, taps=KERNEL_TAPS):
    """Hann-windowed sinc for a delay of ``frac`` in [0, 1), unit DC gain.

    Tap ``m`` (``m = -(taps//2) ... taps//2``) sits at sample offset ``m``.
    """
    half = taps // 2
    m = np.arange(-half, half + 1)
    t = m - np.asarray(frac, dtype=float)[..., None]
    win = 0.5 * (1 + np.cos(np.pi * t / (half + 1)))
    h = np.sinc(t) * win
    return h / h.sum(axis=-1, keepdims=True)


def image_source_rir(scene, mic_index, taps=KERNEL_TAPS):
    """Room impulse response from the source to microphone ``mic_index``."""
    mic = scene.mics[mic_index]
    pos, order = image_sources(scene.room_dims, scene.source, scene.order)
    if scene.refl == 0:
        pos, order = pos[order == 0], order[order == 0]
    dist = np.linalg.norm(pos - mic, axis=1)
    if np.min(dist) < 1e-9:
        raise ValueError("source coincides with microphone")
    amp = scene.refl ** order / (4 * np.pi * dist)
    delay = dist / scene.c * scene.fs
    whole = np.floor(delay).astype(int)
    h = fractional_delay_kernel(delay - whole, taps)
    half = taps // 2
    length = int(whole.max()) + half + 2
    out = np.zeros(length + half)
    cols = whole[:, None] + np.arange(-half, half + 1)[None, :] + half
    np.add.at(out, cols.ravel(), (h * amp[:, None]).ravel())
    # index `half` corresponds to time zero; the acausal head is dropped
    taps_out = out[half:]
    direct = float(delay[np.argmin(dist)])
    return Rir(taps_out, float(scene.fs), direct)


def schroeder_t60(rir, lo_db=-5.0, hi_db=-25.0):
    """T60 from a line fit of the Schroeder decay between ``lo_db`` and ``hi_db``."""
    h = np.asarray(getattr(rir, "taps", rir), dtype=float)
    fs = getattr(rir, "fs", 1.0)
    edc = np.cumsum(h[::-1] ** 2)[::-1]
    edc_db = 10 * np.log10(edc / edc[0] + 1e-300)
    sel = np.flatnonzero((edc_db <= lo_db) & (edc_db >= hi_db))
    if len(sel) < 2:
        return float("nan")
    t = sel / fs
    slope, _ = np.polyfit(t, edc_db[sel], 1)
    return float(-60.0 / slope)


def _brickwall(x, bands):
    X = np.fft.rfft(x)
    f = np.fft.rfftfreq(len(x))
    mask = np.zeros(len(f), dtype=bool)
    for lo, hi in bands:
        mask |= (f >= lo) & (f <= hi)
    return np.fft.irfft(X * mask, len(x))


def _speechlike(n, fs, rng, ar_order, burst_rate):
    # glottal-like pulse train plus breath noise through a random stable
    # all-pole vocal tract, with some syllables replaced by fricative noise;
    # syllable-rate amplitude modulation without silent gaps (non-activity
    # already removed)
    t = np.arange(n) / fs
    f0 = 110 * (1 + 0.1 * np.sin(2 * np.pi * 3.0 * t + rng.uniform(0, 2 * np.pi)))
    phase = np.cumsum(f0 / fs)
    pulses = np.diff(np.floor(phase), prepend=0.0)
    excitation = pulses + 0.05 * rng.standard_normal(n)
    n_res = max(1, ar_order // 2)
    lo, hi = np.array(FORMANT_RANGES[:n_res] + ((200, 4800),) * (n_res - len(FORMANT_RANGES))).T
    freqs = rng.uniform(lo, hi) / fs
    poles = rng.uniform(0.90, 0.98, n_res) * np.exp(2j * np.pi * freqs)
    a = np.real(np.poly(np.concatenate([poles, np.conj(poles)])))
    voiced = lfilter([1.0], a, excitation)
    # net glottal/radiation tilt; sets Tc near 24 samples at 44.1 kHz
    voiced = lfilter([1.0], [1.0, -GLOTTAL_TILT], voiced)
    voiced /= np.std(voiced)
    # fricatives: noise through one high resonance, 14 dB below voiced
    fr = rng.uniform(4000, 7000) / fs
    p = 0.85 * np.exp(2j * np.pi * fr)
    fric = lfilter([1.0], np.real(np.poly([p, np.conj(p)])), rng.standard_normal(n))
    fric *= FRICATIVE_GAIN / np.std(fric)
    # voiced/unvoiced decision per syllable slot, 5 ms crossfades
    slot = max(1, int(round(fs / burst_rate)))
    unvoiced = (rng.random(n // slot + 1) < UNVOICED_FRACTION).astype(float)
    mix = np.repeat(unvoiced, slot)[:n]
    ramp = max(1, int(0.005 * fs))
    mix = np.convolve(mix, np.ones(ramp) / ramp, mode="same")
    env = 0.3 + 0.7 * 0.5 * (1 + np.sin(2 * np.pi * burst_rate * t + rng.uniform(0, 2 * np.pi)))
    y = ((1 - mix) * voiced + mix * fric) * env
    return y / np.max(np.abs(y))


def read_wav(path):
    """Mono float samples and rate from a PCM16 or float32 WAV file."""
    fs, data = wavfile.read(path)
    data = np.asarray(data)
    if data.ndim > 1:
        data = data[:, 0]
    if data.dtype == np.int16:
        data = data.astype(float) / 32768.0
    elif data.dtype.kind == "f":
        data = data.astype(float)
    else:
        raise ValueError(f"unsupported WAV sample type {data.dtype}")
    return data, float(fs)


def write_wav(path, x, fs):
    """Write float32 mono WAV."""
    wavfile.write(path, int(round(fs)), np.asarray(x, dtype=np.float32))


def gen_test_signal(spec, fs=44100.0):
    """Deterministic test signal for ``spec`` at rate ``fs``."""
    if spec.kind == "wav":
        x, _ = read_wav(spec.path)
        return x
    n = int(round(spec.duration_s * fs))
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "white":
        return rng.standard_normal(n)
    if spec.kind == "bandlimited":
        return _brickwall(rng.standard_normal(n), spec.bands)
    return _speechlike(n, fs, rng, spec.ar_order, spec.burst_rate)


def signal_for(scene):
    """Source samples for a scene (WAV rate must match the scene rate)."""
    if scene.signal.kind == "wav":
        x, fs = read_wav(scene.signal.path)
        if fs != scene.fs:
            raise ValueError(f"sample rate mismatch: wav {fs} Hz vs scene {scene.fs} Hz")
        return x
    return gen_test_signal(scene.signal, scene.fs)


def add_noise(x, snr_db, rng):
    """Add white Gaussian noise scaled to exactly ``snr_db`` against ``x``."""
    if math.isinf(snr_db) and snr_db > 0:
        return np.array(x, dtype=float)
    noise = rng.standard_normal(len(x))
    p_sig = np.mean(np.square(x))
    p_noise = np.mean(np.square(noise))
    scale = math.sqrt(p_sig / (p_noise * 10 ** (snr_db / 10)))
    return x + scale * noise


def convolve_rirs(scene, source=None, rirs=None):
    """Noiseless microphone signals, trimmed to the source length."""
    s = signal_for(scene) if source is None else source
    if rirs is None:
        rirs = [image_source_rir(scene, m) for m in range(len(scene.mics))]
    return [fftconvolve(s, r.taps)[: len(s)] for r in rirs]


def synthesize_pair(scene, mic_i=0, mic_j=1, source=None, rirs=None, noise_seed=None):
    """Two noisy microphone signals and their rounded true TDOA.

    ``rirs`` may carry precomputed responses for ``(mic_i, mic_j)`` so SNR
    sweeps reuse one geometry.
    """
    if rirs is None:
        rirs = [image_source_rir(scene, mic_i), image_source_rir(scene, mic_j)]
    clean = convolve_rirs(scene, source, rirs)
    seed = scene.seed if noise_seed is None else noise_seed
    rng = np.random.default_rng([seed, 1])
    x1 = add_noise(clean[0], scene.snr_db, rng)
    x2 = add_noise(clean[1], scene.snr_db, rng)
    return x1, x2, true_tdoa(scene, mic_i, mic_j)


def synthesize_array(scene, source=None, rirs=None, noise_seed=None):
    """All microphone signals of a scene, each with independent noise."""
    clean = convolve_rirs(scene, source, rirs)
    seed = scene.seed if noise_seed is None else noise_seed
    rng = np.random.default_rng([seed, 1])
    return [add_noise(c, scene.snr_db, rng) for c in clean]


def active_frames(frames, threshold_db=VAD_THRESHOLD_DB):
    """Mask of frames whose energy is within ``threshold_db`` of the median."""
    e = np.sum(np.square(frames), axis=-1)
    med = np.median(e)
    if med <= 0:
        return e > 0
    return 10 * np.log10(np.maximum(e, 1e-300) / med) > threshold_db
