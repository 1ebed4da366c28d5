"""``fsgcc`` command line: tde, benchmark, localize, figures, simulate.

Exit codes: 0 success, 1 I/O failure, 2 invalid configuration or usage.
All outputs are computed before the output directory is touched, so a
failing run leaves no partial files behind.
"""

import argparse
import math
import os
import sys
from dataclasses import replace

import numpy as np

from .config import ConfigError, read_ini, run_config, write_provenance
from .pipeline import FrameProcessor, frame_pairs
from .roomsim import image_source_rir, read_wav, signal_for, synthesize_array, true_tdoa, write_wav
from .spectral import lags, phat_cross_spectrum
from .subband import build_fsgcc_matrix
from .tde import METHODS, MetricsReport, aggregate_metrics, correlation_time

EXIT_OK, EXIT_IO, EXIT_CONFIG = 0, 1, 2

ESTIMATES_HEADER = "frame,tau_hat,fspr_db,w_mean,w_min,w_max,tau_true"
BENCHMARK_HEADER = "method,snr_db,refl,status," + ",".join(MetricsReport.FIELDS)
LOCALIZATION_HEADER = "method,snr_db,refl,mean_err_m,median_err_m,n"


def _num(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def _write_text(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def _provenance_text(cfg):
    p = cfg.provenance()
    return f"# version = {p['version']}\n# seed = {p['seed']}\n# config_sha256 = {p['config_sha256']}\n"


def _commit(out_dir, files, cfg):
    """Write prepared outputs; ``files`` maps name -> text or writer callable."""
    os.makedirs(out_dir, exist_ok=True)
    for name, content in files.items():
        path = os.path.join(out_dir, name)
        if callable(content):
            content(path)
        else:
            _write_text(path, content)
    write_provenance(os.path.join(out_dir, "provenance.json"), cfg)


def _noise_seed(cfg, *keys):
    from .scenarios import spawn

    return int(spawn(cfg.seed, *keys).integers(2 ** 31))


# ---------------------------------------------------------------- tde

def cmd_tde(args, cfg):
    analysis = replace(cfg.analysis, methods=(cfg.method,))
    tau_true = t_c = None
    if args.wav1 or args.wav2:
        if not (args.wav1 and args.wav2):
            raise ConfigError("tde needs both --wav1 and --wav2")
        x1, fs1 = read_wav(args.wav1)
        x2, fs2 = read_wav(args.wav2)
        if fs1 != fs2:
            raise ConfigError(f"sample rate mismatch: {fs1:g} Hz vs {fs2:g} Hz")
        fs = fs1
    elif cfg.scene is not None:
        scene = cfg.scene
        i, j = args.pair
        if max(i, j) >= len(scene.mics) or i == j:
            raise ConfigError(f"invalid microphone pair {i}, {j}")
        source = signal_for(scene)
        rirs = [image_source_rir(scene, m) for m in range(len(scene.mics))]
        xs = synthesize_array(scene, source=source, rirs=rirs, noise_seed=_noise_seed(cfg, scene.seed))
        x1, x2, fs = xs[i], xs[j], scene.fs
        tau_true = true_tdoa(scene, i, j)
        t_c = correlation_time(source)
    else:
        raise ConfigError("tde needs --wav1/--wav2 or a [scene] section in --config")

    proc = FrameProcessor(analysis)
    lines = [ESTIMATES_HEADER]
    records = []
    for pair in frame_pairs(x1, x2, analysis, fs):
        r = proc.process(pair, pair.frame_index)
        tau, f = r.tau_hat[cfg.method], r.fspr_db[cfg.method]
        w = r.weights
        wstats = ("", "", "") if w is None else (_num(float(w.mean())), _num(float(w.min())),
                                                 _num(float(w.max())))
        lines.append(",".join([str(r.frame), str(tau), _num(f), *wstats, _num(tau_true)]))
        records.append((tau, tau_true, f))
    if not records:
        raise ConfigError("no active frames in the input")

    summary = [_provenance_text(cfg), f"method = {cfg.method}\n", f"frames = {len(records)}\n"]
    taus = np.array([t for t, _, _ in records])
    summary.append(f"median_tau_hat = {int(np.median(taus))}\n")
    if tau_true is not None:
        summary.append(f"tau_true = {tau_true}\n")
        summary.append(aggregate_metrics(records, t_c).to_text())
    files = {"estimates.csv": "\n".join(lines) + "\n", "summary.txt": "".join(summary)}
    _commit(args.out_dir, files, cfg)
    return EXIT_OK


# ---------------------------------------------------------------- benchmark

def _progress(refl, snr):
    print(f"refl={refl:g} snr={snr:g} done", file=sys.stderr)


def cmd_benchmark(args, cfg):
    from .plots import plot_metric_lines
    from .scenarios import SweepConfig, run_tde_sweep

    sweep = SweepConfig(snrs=cfg.snrs or (-10.0, 0.0, 10.0, 20.0), refls=cfg.refls or (0.0, 0.8),
                        n_scenes=cfg.n_scenes, n_noise=cfg.n_noise, signal=cfg.signal,
                        analysis=replace(cfg.analysis, methods=METHODS), seed=cfg.seed)
    rows, t_c = run_tde_sweep(sweep, _progress if args.verbose else None)
    lines = [BENCHMARK_HEADER]
    for m, snr, refl, rep in rows:
        if rep is None:
            lines.append(f"{m},{_num(snr)},{_num(refl)},absent" + "," * len(MetricsReport.FIELDS))
        else:
            lines.append(f"{m},{_num(snr)},{_num(refl)},ok,{rep.csv_row()}")
    summary = _provenance_text(cfg) + f"t_c = {t_c:.6g}\n" + "".join(
        f"{m:8s} snr={snr:6g} refl={refl:4g} "
        + ("absent" if rep is None else f"P_anom={rep.p_anomalous:.3f} FSPR={_num(rep.fspr_na_db)} "
           f"MAE={_num(rep.mae_na)} SDAE={_num(rep.sdae_na)}") + "\n"
        for m, snr, refl, rep in rows)
    files = {"benchmark.csv": "\n".join(lines) + "\n", "summary.txt": summary}
    for metric, label in (("p_anomalous", "anomalous fraction"), ("fspr_na_db", "FSPR [dB]"),
                          ("mae_na", "MAE [samples]"), ("sdae_na", "SDAE [samples]")):
        files[f"{metric}.svg"] = (lambda path, metric=metric, label=label:
                                  plot_metric_lines(path, rows, metric, label))
    _commit(args.out_dir, files, cfg)
    return EXIT_OK


# ---------------------------------------------------------------- localize

def cmd_localize(args, cfg):
    from .plots import plot_srp_map
    from .scenarios import WALL_MICS, ROOM, LocalizationConfig, localization_table, run_localization

    methods = ("gcc",) if cfg.method == "gcc" else ("gcc", cfg.method)
    mics, room = WALL_MICS, ROOM
    if cfg.scene is not None:
        mics, room = tuple(map(tuple, cfg.scene.mics)), tuple(cfg.scene.room_dims)
    if len(mics) < 3:
        raise ConfigError(f"localization needs at least 3 microphones, got {len(mics)}")
    lc = LocalizationConfig(
        snrs=cfg.snrs or (math.inf, 20.0, 10.0, 0.0), refls=cfg.refls or (0.0, 0.8),
        n_scenes=cfg.n_scenes, frames_per_scene=cfg.frames_per_scene, mics=mics, room=room,
        resolution=cfg.resolution, methods=methods, signal=cfg.signal, analysis=cfg.analysis,
        seed=cfg.seed)
    errors, maps = run_localization(lc, args.maps, _progress if args.verbose else None)
    lines = [LOCALIZATION_HEADER]
    for m, snr, refl, mean, median, n in localization_table(errors):
        lines.append(f"{m},{_num(snr)},{_num(refl)},{mean:.6f},{median:.6f},{n}")
    files = {"localization.csv": "\n".join(lines) + "\n",
             "summary.txt": _provenance_text(cfg) + "\n".join(lines[1:]) + "\n"}
    for (m, snr, refl), (srp_map, scene) in sorted(maps.items()):
        stem = f"map_{m}_snr{snr:g}_refl{refl:g}"
        files[stem + ".csv"] = srp_map.to_csv
        files[stem + ".svg"] = (lambda path, srp_map=srp_map, scene=scene, m=m, snr=snr:
                                plot_srp_map(path, srp_map, scene.mics, scene.source,
                                             f"{m}, SNR {snr:g} dB"))
    _commit(args.out_dir, files, cfg)
    return EXIT_OK


# ---------------------------------------------------------------- figures

def _figure_analysis(cfg, args):
    # figure scenarios use B = 64, M = 32 unless overridden
    kw = {"vad": False}
    if args.B is None and not args.file_sets_B:
        kw["B"] = 64
    return replace(cfg.analysis, **kw)


def cmd_figures(args, cfg):
    from .plots import plot_matrix, plot_traces
    from .scenarios import fig1_frames

    analysis = _figure_analysis(cfg, args)
    win = analysis.spectral_window()
    N = analysis.N
    lag = lags(N)
    files = {}
    panels = ("fig1a", "fig1b", "fig1c") if args.scenario == "fig3" else (args.scenario,)
    for panel in panels:
        pair = fig1_frames(panel, 1, N, 40, seed=cfg.seed)[0]
        if args.scenario == "fig3":
            mat = build_fsgcc_matrix(phat_cross_spectrum(pair, analysis.eps_floor), win)
            stem = "fig3" + panel[-1]
            files[stem + ".csv"] = mat.to_csv
            files[stem + ".svg"] = (lambda path, mat=mat, panel=panel:
                                    plot_matrix(path, mat.R, lag, f"{panel}: L = {mat.L}", 256))
        else:
            r = FrameProcessor(replace(analysis, methods=METHODS)).process(pair)
            cols = [r.correlations[m] for m in METHODS]
            csv = ["lag," + ",".join(METHODS)]
            csv += [f"{k}," + ",".join(f"{c[i]:.10g}" for c in cols) for i, k in enumerate(lag)]
            files[panel + ".csv"] = "\n".join(csv) + "\n"
            files[panel + ".svg"] = (lambda path, r=r, panel=panel:
                                     plot_traces(path, lag, r.correlations, 40, panel, (-300, 300)))
    _commit(args.out_dir, files, cfg)
    return EXIT_OK


# ---------------------------------------------------------------- simulate

def cmd_simulate(args, cfg):
    scene = cfg.scene
    if scene is None:
        raise ConfigError("simulate needs a [scene] section in --config")
    source = signal_for(scene)
    rirs = [image_source_rir(scene, m) for m in range(len(scene.mics))]
    xs = synthesize_array(scene, source=source, rirs=rirs, noise_seed=_noise_seed(cfg, scene.seed))
    files = {}
    for k, (x, h) in enumerate(zip(xs, rirs)):
        files[f"mic{k}.wav"] = lambda path, x=x: write_wav(path, x, scene.fs)
        files[f"rir{k}.wav"] = lambda path, h=h: write_wav(path, h.taps, scene.fs)
    n = len(scene.mics)
    truth = ["mic_i,mic_j,tau_true"] + [f"{i},{j},{true_tdoa(scene, i, j)}"
                                        for i in range(n) for j in range(i + 1, n)]
    files["truth.csv"] = "\n".join(truth) + "\n"
    _commit(args.out_dir, files, cfg)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI run/scene file")
    common.add_argument("--seed", type=int, help="root seed (default 0)")
    common.add_argument("--out-dir", default="out", help="output directory (default: out)")
    common.add_argument("--method", choices=METHODS, help="estimator (default fs_wsvd)")
    common.add_argument("--N", type=int, help="frame length")
    common.add_argument("--hop", type=int, help="frame hop")
    common.add_argument("--B", type=int, help="spectral window length in bins")
    common.add_argument("--M", type=int, help="spectral window hop in bins")
    common.add_argument("--window", choices=("hann", "rectangular"), help="spectral window kind")
    common.add_argument("--eps-floor", type=float, help="absolute PHAT magnitude floor")
    common.add_argument("--signal", choices=("white", "bandlimited", "speechlike"),
                        help="synthetic source kind")
    common.add_argument("--duration", type=float, help="synthetic source length [s]")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="fsgcc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("tde", parents=[common], help="per-frame TDOA of a signal pair")
    t.add_argument("--wav1")
    t.add_argument("--wav2")
    t.add_argument("--pair", type=int, nargs=2, default=(0, 1), metavar=("I", "J"),
                   help="microphone pair of a simulated scene")

    for name, helptext in (("benchmark", "TDE sweep over SNR and reflection"),
                           ("localize", "M-SRP localisation sweep")):
        b = sub.add_parser(name, parents=[common], help=helptext)
        b.add_argument("--snrs", type=_float_list, help="comma-separated SNRs [dB]")
        b.add_argument("--refls", type=_float_list, help="comma-separated reflection coefficients")
        b.add_argument("--scenes", type=int, dest="n_scenes", help="random scenes per condition")
        if name == "benchmark":
            b.add_argument("--noise-seeds", type=int, dest="n_noise", help="noise draws per scene")
        else:
            b.add_argument("--frames", type=int, dest="frames_per_scene", help="frames per scene")
            b.add_argument("--resolution", type=float, help="grid resolution [m]")
            b.add_argument("--maps", action="store_true", help="write one SRP map per condition")

    f = sub.add_parser("figures", parents=[common], help="scenario data tables and SVG plots")
    f.add_argument("scenario", choices=("fig1a", "fig1b", "fig1c", "fig3"))

    sub.add_parser("simulate", parents=[common], help="render a scene to WAV files")
    return p


def _resolve(args):
    cp = read_ini(args.config) if args.config else None
    analysis = {"N": args.N, "hop": args.hop, "B": args.B, "M": args.M, "window": args.window,
                "eps_floor": args.eps_floor}
    signal = {"kind": args.signal, "duration_s": args.duration}
    extra = {}
    for key in ("snrs", "refls", "n_scenes", "n_noise", "frames_per_scene", "resolution"):
        if getattr(args, key, None) is not None:
            extra[key] = getattr(args, key)
    section = {"benchmark": "sweep", "localize": "localize"}.get(args.command)
    args.file_sets_B = bool(cp is not None and cp.has_option("analysis", "B"))
    return run_config(args.command, cp, seed=args.seed, method=args.method, analysis=analysis,
                      signal=signal, section=section, **extra)


COMMANDS = {"tde": cmd_tde, "benchmark": cmd_benchmark, "localize": cmd_localize,
            "figures": cmd_figures, "simulate": cmd_simulate}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"fsgcc: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"fsgcc: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # precondition failures raised by the numerical modules
        print(f"fsgcc: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
