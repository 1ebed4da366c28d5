"""Run configuration: INI scene/run files, validation and provenance.

File schema (every section and key optional)::

    [run]
    seed = 0
    method = fs_wsvd            ; gcc | fs_svd | fs_wsvd

    [analysis]
    N = 2048
    hop = 512
    B = 128
    M = 32
    window = hann               ; hann | rectangular
    eps_floor =                 ; empty: relative default

    [scene]
    room = 6, 7, 3
    refl = 0.0
    source = 2.0, 3.5, 1.25
    mics = 1.0, 1.0, 1.25; 1.5, 1.0, 1.25
    c = 343
    fs = 44100
    max_order =                 ; empty: -60 dB rule
    snr_db = inf
    seed = 0

    [signal]
    kind = speechlike           ; white | bandlimited | speechlike | wav
    duration_s = 2.0
    seed = 0
    bands = 0.0:0.17, 0.2:0.5   ; cycles/sample
    burst_rate = 4.0
    path =

    [sweep]                     ; benchmark
    snrs = -10, 0, 10, 20
    refls = 0, 0.8
    n_scenes = 5
    n_noise = 5

    [localize]
    snrs = inf, 20, 10, 0
    refls = 0, 0.8
    n_scenes = 5
    frames_per_scene = 5
    resolution = 0.15
"""

import configparser
import hashlib
import json
import math
from dataclasses import dataclass, field, fields, is_dataclass

from . import __version__
from .pipeline import AnalysisConfig
from .roomsim import SimScene, TestSignalSpec
from .tde import METHODS


class ConfigError(ValueError):
    """Invalid configuration (maps to exit code 2)."""


def _floats(text):
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


def _points(text):
    pts = []
    for chunk in text.split(";"):
        if chunk.strip():
            p = _floats(chunk)
            if len(p) != 3:
                raise ConfigError(f"expected x, y, z triples, got {chunk.strip()!r}")
            pts.append(p)
    return tuple(pts)


def _bands(text):
    out = []
    for chunk in text.split(","):
        if chunk.strip():
            lo, _, hi = chunk.partition(":")
            out.append((float(lo), float(hi)))
    return tuple(out)


def _opt(sec, key, conv):
    if sec is None or key not in sec or not sec[key].strip():
        return None
    try:
        return conv(sec[key].strip())
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{sec.name}] {key}: {exc}") from None


@dataclass(frozen=True)
class RunConfig:
    """Resolved parameters of one CLI invocation."""

    command: str
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    scene: SimScene = None
    signal: TestSignalSpec = field(default_factory=TestSignalSpec)
    method: str = "fs_wsvd"
    seed: int = 0
    snrs: tuple = ()
    refls: tuple = ()
    n_scenes: int = 5
    n_noise: int = 5
    frames_per_scene: int = 5
    resolution: float = 0.15
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        for name in ("n_scenes", "n_noise", "frames_per_scene"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if self.resolution <= 0:
            raise ConfigError("grid resolution must be positive")
        for r in self.refls:
            if not 0 <= r < 1:
                raise ConfigError(f"reflection coefficient {r} outside [0, 1)")
        for s in self.snrs:
            if math.isnan(s):
                raise ConfigError("SNR may not be NaN")

    def as_dict(self):
        return _plain(self)

    def digest(self):
        """SHA-256 of the canonical JSON form of the resolved configuration."""
        blob = json.dumps(self.as_dict(), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()

    def provenance(self):
        return {"version": __version__, "seed": self.seed, "config_sha256": self.digest(),
                "config": self.as_dict()}


def _plain(obj):
    if is_dataclass(obj):
        return {f.name: _plain(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def read_ini(path):
    """Parse a config file; missing or unreadable files raise ``OSError``."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str  # keep N, B, M case
    with open(path) as fh:
        try:
            cp.read_file(fh)
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return cp


def _section(cp, name):
    return cp[name] if cp is not None and cp.has_section(name) else None


def analysis_from(cp, overrides=None):
    sec = _section(cp, "analysis")
    kw = {}
    for key, conv in (("N", int), ("hop", int), ("B", int), ("M", int), ("window", str),
                      ("taper", str), ("eps_floor", float)):
        v = _opt(sec, key, conv)
        if v is not None:
            kw[key] = v
    kw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return AnalysisConfig(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def signal_from(cp, overrides=None):
    sec = _section(cp, "signal")
    kw = {}
    for key, conv in (("kind", str), ("duration_s", float), ("seed", int), ("bands", _bands),
                      ("ar_order", int), ("burst_rate", float), ("path", str)):
        v = _opt(sec, key, conv)
        if v is not None:
            kw[key] = v
    kw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return TestSignalSpec(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def scene_from(cp, signal, overrides=None):
    """Scene from the ``[scene]`` section, or ``None`` if there is none."""
    sec = _section(cp, "scene")
    if sec is None:
        return None
    kw = {"signal": signal}
    for key, attr, conv in (("room", "room_dims", _floats), ("source", "source_pos", _floats),
                            ("mics", "mic_positions", _points), ("refl", "refl", float),
                            ("c", "c", float), ("fs", "fs", float), ("max_order", "max_order", int),
                            ("snr_db", "snr_db", float), ("seed", "seed", int)):
        v = _opt(sec, key, conv)
        if v is not None:
            kw[attr] = v
    missing = [k for k in ("room_dims", "source_pos", "mic_positions") if k not in kw]
    if missing:
        raise ConfigError(f"[scene] missing {', '.join(missing)}")
    kw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return SimScene(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def run_config(command, cp=None, *, seed=None, method=None, analysis=None, signal=None,
               scene=None, section=None, **extra):
    """Merge file values and CLI overrides into a validated :class:`RunConfig`."""
    run = _section(cp, "run")
    sec = _section(cp, section) if section else None
    sig = signal_from(cp, signal)
    kw = dict(
        command=command,
        analysis=analysis_from(cp, analysis),
        signal=sig,
        scene=scene_from(cp, sig, scene),
        method=method or _opt(run, "method", str) or "fs_wsvd",
        seed=seed if seed is not None else (_opt(run, "seed", int) or 0),
    )
    for key, conv in (("snrs", _floats), ("refls", _floats), ("n_scenes", int), ("n_noise", int),
                      ("frames_per_scene", int), ("resolution", float)):
        v = extra.pop(key, None)
        if v is None:
            v = _opt(sec, key, conv)
        if v is not None:
            kw[key] = tuple(v) if isinstance(v, list) else v
    kw["extra"] = {k: v for k, v in extra.items() if v is not None}
    return RunConfig(**kw)


def write_provenance(path, cfg):
    with open(path, "w") as fh:
        json.dump(cfg.provenance(), fh, indent=2, sort_keys=True)
        fh.write("\n")


__all__ = ["ConfigError", "RunConfig", "analysis_from", "read_ini", "run_config", "scene_from",
           "signal_from", "write_provenance"]
