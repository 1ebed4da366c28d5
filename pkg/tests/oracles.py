"""Slow, independent reference implementations used as test oracles."""

import numpy as np


def idft(X):
    """O(N^2) inverse DFT by explicit summation."""
    X = np.asarray(X, dtype=complex)
    N = len(X)
    n = np.arange(N)
    return np.exp(2j * np.pi * np.outer(n, n) / N) @ X / N


def lag_ordered(x):
    """Reorder a natural-order DFT-domain lag vector so index i <-> lag i - N/2."""
    N = len(x)
    return np.array([x[(i - N // 2) % N] for i in range(N)])


def subband_direct(psi, phi_freq, M, l):
    """Sub-band GCC by direct summation over bins.

    r_l[n] = 1/N sum_k psi[k + lM] Phi[k] exp(j 2 pi k n / N), n = -N/2..N/2-1.
    """
    N = len(psi)
    out = np.zeros(N, dtype=complex)
    for i, n in enumerate(range(-N // 2, N // 2)):
        acc = 0j
        for k in range(N):
            if phi_freq[k] != 0:
                acc += psi[(k + l * M) % N] * phi_freq[k] * np.exp(2j * np.pi * k * n / N)
        out[i] = acc / N
    return out


def als_rank1(R, W, restarts=8, iters=500, seed=0):
    """Best rank-one fit under element weights: min ||(R - a b^H) * W||_F.

    Alternating least squares from several random starts; returns the
    smallest residual found and its factors.
    """
    rng = np.random.default_rng(seed)
    W2 = np.asarray(W, dtype=float) ** 2
    N, L = R.shape
    best = (np.inf, None, None)
    for _ in range(restarts):
        b = rng.standard_normal(L) + 1j * rng.standard_normal(L)
        for _ in range(iters):
            # a_n = sum_l w2 R b / sum_l w2 |b|^2
            den = W2 @ np.abs(b) ** 2
            a = (W2 * R) @ b / np.where(den > 0, den, 1)
            # conj(b_l) = sum_n w2 conj(a) R / sum_n w2 |a|^2
            den = np.abs(a) ** 2 @ W2
            bc = np.conj(a) @ (W2 * R) / np.where(den > 0, den, 1)
            b = np.conj(bc)
        res = np.linalg.norm((R - np.outer(a, np.conj(b))) * W)
        if res < best[0]:
            best = (res, a, b)
    return best


def mirror_images(room, src, max_order):
    """Image sources by repeated wall reflection (breadth-first), with orders.

    Independent of the closed-form index mapping: every image is produced
    by literally mirroring a lower-order image across one of the six walls.
    """
    room = np.asarray(room, dtype=float)
    seen = {tuple(np.round(src, 9)): 0}
    frontier = [np.asarray(src, dtype=float)]
    for order in range(1, max_order + 1):
        nxt = []
        for p in frontier:
            for ax in range(3):
                for wall in (0.0, room[ax]):
                    q = p.copy()
                    q[ax] = 2 * wall - p[ax]
                    key = tuple(np.round(q, 9))
                    if key not in seen:
                        seen[key] = order
                        nxt.append(q)
        frontier = nxt
    pts = np.array(list(seen.keys()))
    orders = np.array(list(seen.values()))
    return pts, orders
