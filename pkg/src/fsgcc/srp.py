"""Grid-based M-SRP localisation from per-pair correlation functions.

Each grid point owns a cell; for every microphone pair the cell maps to a
range of TDOAs, and the point's score accumulates the pair's correlation
over that whole range instead of sampling a single lag.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

SAFETY_LAGS = 1


@dataclass(frozen=True)
class SrpGrid:
    resolution: float
    points: np.ndarray
    half_extent: np.ndarray

    def __len__(self):
        return len(self.points)


def make_grid(room_dims, resolution=0.15, z=None):
    """Cell centres covering the room, planar at height ``z`` or full volume."""
    room = np.asarray(room_dims, dtype=float)
    axes = [np.arange(resolution / 2, room[k], resolution) for k in range(3)]
    half = np.full(3, resolution / 2)
    if z is not None:
        axes[2] = np.array([float(z)])
        half[2] = 0.0
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    return SrpGrid(float(resolution), pts, half)


@dataclass(frozen=True)
class SrpMap:
    scores: np.ndarray
    argmax_point: np.ndarray
    gcc_source: str
    grid: SrpGrid = None

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("x,y,z,score\n")
            for p, s in zip(self.grid.points, self.scores):
                fh.write(f"{p[0]:.6f},{p[1]:.6f},{p[2]:.6f},{s:.10g}\n")


def all_pairs(n_mics):
    return list(combinations(range(n_mics), 2))


def tdoa_field(points, mic_i, mic_j, fs, c):
    """Unrounded TDOA (samples) and its spatial gradient at ``points``."""
    pts = np.atleast_2d(points)
    di = pts - mic_i
    dj = pts - mic_j
    ni = np.linalg.norm(di, axis=1)
    nj = np.linalg.norm(dj, axis=1)
    tau = (ni - nj) / c * fs
    grad = (di / ni[:, None] - dj / nj[:, None]) * (fs / c)
    return tau, grad


def pairwise_lag_interval(mic_i, mic_j, points, half_extent, fs, c, safety=SAFETY_LAGS):
    """Integer TDOA interval ``[lo, hi]`` spanned by each cell.

    The spread is bounded to first order by ``sum_k |grad_k| h_k``; cells
    with non-zero extent are widened by ``safety`` lags on each side.
    """
    tau, grad = tdoa_field(points, np.asarray(mic_i, float), np.asarray(mic_j, float), fs, c)
    spread = np.abs(grad) @ np.asarray(half_extent, dtype=float)
    pad = np.where(spread > 0, safety, 0)
    lo = np.floor(tau - spread).astype(int) - pad
    hi = np.ceil(tau + spread).astype(int) + pad
    return lo, hi


def interval_sums(values, lo, hi):
    """Sum of a lag-ordered vector over closed lag intervals (clipped)."""
    v = np.asarray(values, dtype=float)
    N = len(v)
    csum = np.concatenate([[0.0], np.cumsum(v)])
    a = np.clip(lo + N // 2, 0, N)
    b = np.clip(hi + N // 2 + 1, 0, N)
    return csum[np.maximum(b, a)] - csum[a]


def msrp_map(gccs, mics, grid, fs, c=343.0, pairs=None, gcc_source="gcc", safety=SAFETY_LAGS):
    """M-SRP score of every grid point.

    Parameters
    ----------
    gccs : sequence of array_like
        One lag-ordered correlation per pair, in the order of ``pairs``.
    mics : array_like, shape (n_mics, 3)
    grid : SrpGrid
    pairs : list of (i, j), optional
        Defaults to all microphone pairs; correlation ``k`` relates to the
        TDOA of ``pairs[k][0]`` relative to ``pairs[k][1]``.
    """
    if len(grid) == 0:
        raise ValueError("grid is empty")
    mics = np.asarray(mics, dtype=float)
    pairs = all_pairs(len(mics)) if pairs is None else list(pairs)
    if len(gccs) != len(pairs) or not pairs:
        raise ValueError("need one correlation per microphone pair (at least one)")
    scores = np.zeros(len(grid))
    for (i, j), r in zip(pairs, gccs):
        lo, hi = pairwise_lag_interval(mics[i], mics[j], grid.points, grid.half_extent, fs, c, safety)
        scores += interval_sums(r, lo, hi)
    best = int(np.argmax(scores))
    return SrpMap(scores, grid.points[best].copy(), gcc_source, grid)


def localize(srp_map, true_pos):
    """Euclidean distance between the map's peak and the true position."""
    return float(np.linalg.norm(np.asarray(srp_map.argmax_point) - np.asarray(true_pos, dtype=float)))


def error_summary(errors):
    """Mean and median of a batch of localisation errors."""
    e = np.asarray(errors, dtype=float)
    return float(np.mean(e)), float(np.median(e))
