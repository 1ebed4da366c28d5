"""TDOA picking from correlation functions and the evaluation metrics."""

import math
from dataclasses import asdict, dataclass

import numpy as np

from .spectral import first_argmax, lags

METHODS = ("gcc", "fs_svd", "fs_wsvd")


@dataclass(frozen=True)
class TdoaEstimate:
    tau_hat: int
    tau_hat_frac: float = None
    fspr_db: float = None
    method: str = "gcc"


def parabolic_offset(y_prev, y_peak, y_next):
    """Vertex offset of the parabola through three equally spaced samples."""
    denom = y_prev - 2 * y_peak + y_next
    if denom == 0:
        return 0.0
    return 0.5 * (y_prev - y_next) / denom


def estimate_tdoa(gcc, refine=False, method="gcc"):
    """Lag of the correlation peak, optionally refined by parabolic fit.

    ``gcc`` is a lag-ordered real vector; ties resolve to the smallest lag.
    """
    values = np.asarray(getattr(gcc, "values", gcc), dtype=float)
    if not np.any(values):
        raise ValueError("cannot estimate a delay from an all-zero correlation")
    N = len(values)
    i = first_argmax(values)
    tau_hat = int(i - N // 2)
    frac = None
    if refine:
        # circular neighbours: the correlation is periodic in lag
        d = parabolic_offset(values[(i - 1) % N], values[i], values[(i + 1) % N])
        frac = tau_hat + float(np.clip(d, -1.0, 1.0))
    return TdoaEstimate(tau_hat, frac, None, method)


def local_maxima(values):
    """Indices of circular local maxima (left edge of a plateau counts)."""
    v = np.asarray(values)
    prev = np.roll(v, 1)
    nxt = np.roll(v, -1)
    return np.flatnonzero((v > prev) & (v >= nxt))


def fspr(gcc, tau_hat, exclusion_halfwidth):
    """First-to-second peak ratio in dB, or ``None`` when there is no rival peak.

    The rival is the largest local maximum more than ``exclusion_halfwidth``
    lags (circular distance) away from ``tau_hat``. A non-positive rival
    gives no finite ratio and is reported as absent too.
    """
    v = np.asarray(getattr(gcc, "values", gcc), dtype=float)
    N = len(v)
    peaks = local_maxima(v)
    d = np.abs(lags(N)[peaks] - tau_hat)
    d = np.minimum(d, N - d)
    rivals = peaks[d > exclusion_halfwidth]
    if len(rivals) == 0:
        return None
    second = float(np.max(v[rivals]))
    first = float(v[tau_hat + N // 2])
    if second <= 0 or first <= 0:
        return None
    return 20 * math.log10(first / second)


def correlation_time(signal):
    """Width (samples) of the autocorrelation main lobe between -3 dB points."""
    x = np.asarray(signal, dtype=float)
    energy = float(np.dot(x, x))
    if energy == 0:
        raise ValueError("zero-energy signal has no correlation time")
    n = len(x)
    nfft = 1 << (2 * n - 1).bit_length()
    X = np.fft.rfft(x, nfft)
    ac = np.fft.irfft(np.abs(X) ** 2, nfft)[:n] / energy
    thr = 1 / math.sqrt(2)
    below = np.flatnonzero(ac < thr)
    if len(below) == 0:
        return float(2 * (n - 1))
    k = int(below[0])
    t = (k - 1) + (ac[k - 1] - thr) / (ac[k - 1] - ac[k])
    return float(2 * t)


def classify_anomalous(e_i, t_c):
    """An estimate is anomalous when its absolute error exceeds ``t_c / 2``."""
    return e_i > t_c / 2


@dataclass(frozen=True)
class MetricsReport:
    """Aggregate TDE statistics; nonanomalous statistics are ``None`` when empty."""

    n_total: int
    n_anomalous: int
    n_nonanomalous: int
    p_anomalous: float
    mae_na: float
    sdae_na: float
    fspr_na_db: float
    t_c: float

    FIELDS = ("n_total", "n_anomalous", "n_nonanomalous", "p_anomalous",
              "mae_na", "sdae_na", "fspr_na_db", "t_c")

    def as_dict(self):
        return asdict(self)

    def csv_header(self):
        return ",".join(self.FIELDS)

    def csv_row(self):
        return ",".join(_fmt(getattr(self, k)) for k in self.FIELDS)

    def to_text(self):
        return "".join(f"{k} = {_fmt(getattr(self, k))}\n" for k in self.FIELDS)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def aggregate_metrics(estimates, t_c):
    """Fold ``(tau_hat, tau_true, fspr_db)`` records into a :class:`MetricsReport`."""
    estimates = list(estimates)
    if not estimates:
        raise ValueError("no estimates to aggregate")
    errors = []
    fsprs = []
    n_anom = 0
    for tau_hat, tau_true, fspr_db in estimates:
        e = abs(tau_true - tau_hat)
        if classify_anomalous(e, t_c):
            n_anom += 1
            continue
        errors.append(e)
        if fspr_db is not None and math.isfinite(fspr_db):
            fsprs.append(fspr_db)
    n_total = len(estimates)
    n_na = len(errors)
    mae = sdae = None
    if n_na:
        err = np.asarray(errors, dtype=float)
        mae = float(err.mean())
        sdae = float(np.sqrt(np.mean((err - mae) ** 2)))
    fspr_mean = float(np.mean(fsprs)) if fsprs else None
    return MetricsReport(n_total, n_anom, n_na, n_anom / n_total, mae, sdae, fspr_mean, float(t_c))
