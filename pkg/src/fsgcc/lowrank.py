"""Rank-one extraction of the direct-path component from an FS-GCC matrix.

Two routes are provided: a plain truncated SVD and a column-weighted SVD
in which each sub-band is scaled by a confidence weight before
factorisation. Both end in :func:`recover_gcc`, which turns the left
factor into a real, positively peaked correlation function.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .spectral import first_argmax, lags, main_lobe_width
from .tde import fspr

WEIGHT_FLOOR = 1e-3
# ||Re a1||^2 / ||a1||^2 below this marks the recovery as ill-conditioned
REAL_ENERGY_TOL = 1e-6


@dataclass(frozen=True)
class BandWeights:
    w: np.ndarray

    def __post_init__(self):
        w = np.clip(np.asarray(self.w, dtype=float), 0.0, 1.0)
        object.__setattr__(self, "w", w)

    def __len__(self):
        return len(self.w)


@dataclass(frozen=True)
class RankOneFactors:
    """Target factors with ``R_target = a1 b1^H``.

    ``A`` and ``B`` hold the first ``rank`` factor columns; column 0 is
    ``a1``/``b1``.
    """

    a1: np.ndarray
    b1: np.ndarray
    sigmas: np.ndarray
    method: str
    A: np.ndarray = field(default=None, repr=False)
    B: np.ndarray = field(default=None, repr=False)

    @property
    def N(self):
        return len(self.a1)

    def target(self):
        return np.outer(self.a1, np.conj(self.b1))

    def approximation(self):
        """Rank-``r`` approximation ``A B^H`` (``r`` = number of kept columns)."""
        return self.A @ np.conj(self.B).T


@dataclass(frozen=True)
class RecoveredGcc:
    phi0_hat: np.ndarray
    gamma: int
    tau_hat: int
    fspr_db: float = None
    # real part carries a negligible share of the factor's energy
    ill_conditioned: bool = False


def window_noise_stats(win):
    """Mean |r_l| expected for a perfect band and for a pure-noise band."""
    phi = win.phi_lag
    N = len(phi)
    perfect = float(np.mean(np.abs(phi)))
    noise = float(np.sqrt(win.energy / (2 * N)) * np.sqrt(np.pi / 2))
    return perfect, noise


def estimate_band_weights(mat):
    """Confidence weight per sub-band from the mean column magnitude.

    A column whose mean magnitude matches that of the bare window response
    scores 1, one matching the Rayleigh mean of band-limited noise scores 0.
    """
    perfect, noise = window_noise_stats(mat.window)
    if np.isclose(noise, perfect, rtol=1e-12, atol=0):
        raise ValueError("degenerate window: noise and perfect-band means coincide")
    col_mean = np.mean(np.abs(mat.R), axis=0)
    g = (noise - col_mean) / (noise - perfect)
    return BandWeights(g)


def _fix_phase(A, B):
    # rotate each factor pair so the largest-magnitude entry of A is real
    # positive; A B^H is unchanged
    idx = np.argmax(np.abs(A), axis=0)
    pivot = A[idx, np.arange(A.shape[1])]
    mag = np.abs(pivot)
    rot = np.where(mag > 0, np.conj(pivot) / np.where(mag > 0, mag, 1), 1)
    return A * rot[None, :], B * rot[None, :]


def _dominant_triples(R, rank):
    """Leading singular triples via the small ``L x L`` Gram matrix.

    Only the right vectors come from ``eigh``; singular values are taken
    as ``||R v_k||`` rather than ``sqrt(lambda_k)``, which would square the
    roundoff (an exactly rank-one matrix would show ``sigma2 ~ 1e-8 sigma1``).
    """
    G = np.conj(R).T @ R
    evals, V = np.linalg.eigh(G)
    V = V[:, np.argsort(evals)[::-1]]
    RV = R @ V
    sigmas = np.linalg.norm(RV, axis=0)
    if sigmas[0] == 0:
        raise ValueError("empty spectrum: matrix is identically zero")
    r = min(rank, len(sigmas))
    s = sigmas[:r]
    U = RV[:, :r] / np.where(s > 0, s, 1)[None, :]
    return U, s, V[:, :r], sigmas


def svd_rank1_extract(mat, rank=1):
    """Dominant singular triple of the FS-GCC matrix.

    Returns factors with ``a1 = sigma1 u1`` and ``b1 = v1``.
    """
    R = getattr(mat, "R", mat)
    if R.shape[1] < 2:
        raise ValueError("need at least two sub-bands")
    U, s, V, sigmas = _dominant_triples(R, rank)
    A, B = _fix_phase(U * s[None, :], V)
    return RankOneFactors(A[:, 0], B[:, 0], sigmas, "svd", A, B)


def wsvd_rank1_extract(mat, weights, rank=1, floor=WEIGHT_FLOOR):
    """Rank-one factors minimising the column-weighted Frobenius error.

    With ``W = 1 w^T`` the weighted problem reduces to a plain SVD of
    ``R diag(w)``. The right factor is mapped back through ``diag(w)^-1``
    using weights floored at ``floor``; the left factor never needs the
    inversion.
    """
    R = getattr(mat, "R", mat)
    w = weights.w if isinstance(weights, BandWeights) else np.clip(np.asarray(weights, float), 0, 1)
    if R.shape[1] < 2 or len(w) != R.shape[1]:
        raise ValueError("weights must match the number of sub-bands (>= 2)")
    if np.count_nonzero(w >= floor) < 2:
        raise ValueError("insufficient reliable bands")
    Rw = R * w[None, :]
    U, s, V, sigmas = _dominant_triples(Rw, rank)
    root = np.sqrt(s)
    A = U * root[None, :]
    Bw = V * root[None, :]
    B = Bw / np.maximum(w, floor)[:, None]
    A, B = _fix_phase(A, B)
    return RankOneFactors(A[:, 0], B[:, 0], sigmas, "wsvd", A, B)


def recover_gcc(f, exclusion_halfwidth=None):
    """Real denoised GCC from the left target factor, with positive peak.

    If ``exclusion_halfwidth`` is given, the first-to-second peak ratio of
    the result is attached. When the factor is almost purely imaginary the
    real part is dominated by roundoff; the result is then flagged
    ``ill_conditioned`` and a ``RuntimeWarning`` is issued.
    """
    re = np.real(f.a1)
    total = float(np.vdot(f.a1, f.a1).real)
    ill = total > 0 and float(re @ re) < REAL_ENERGY_TOL * total
    if ill:
        warnings.warn("rank-one factor has a near-zero real part; recovered GCC is unreliable",
                      RuntimeWarning, stacklevel=2)
    gamma = int(np.argmax(np.abs(re)))
    s = np.sign(re[gamma])
    phi = re * (s if s != 0 else 1.0)
    i = first_argmax(phi)
    tau_hat = int(lags(len(phi))[i])
    fspr_db = None
    if exclusion_halfwidth is not None:
        fspr_db = fspr(phi, tau_hat, exclusion_halfwidth)
    return RecoveredGcc(phi, gamma, tau_hat, fspr_db, ill)


def default_exclusion(win):
    """Half the nominal main-lobe width of the window, in lags."""
    return main_lobe_width(win) / 2
