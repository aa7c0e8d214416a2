"""Vectorized decoders for many independent channel realizations at once.

These compute exactly the same ML decision as the per-instance decoders in
:mod:`stbc.decoders`, but instead of a sphere search they evaluate every
outer hypothesis for a whole batch of trials with numpy. That makes the
metric-computation count equal to the worst-case bound on every trial.
"""

import itertools

import numpy as np

from .codes import StbcCode
from .constellation import Constellation, hard_limit_pam
from .decoders import CONDITIONAL_STRUCTURE, ConstellationMismatch, _symbol_table

__all__ = ["batch_equivalent_channel", "batch_gram_schmidt", "decode_batch"]

_WORK = 2 ** 22  # floats per chunk


def batch_equivalent_channel(code: StbcCode, h: np.ndarray) -> np.ndarray:
    """``H_eq`` for a stack of channels ``h`` of shape ``(N, n_r, n_t)``."""
    n, n_r, n_t = h.shape
    hc = np.empty((n, 2 * n_r, 2 * n_t))
    hc[:, 0::2, 0::2] = h.real
    hc[:, 0::2, 1::2] = -h.imag
    hc[:, 1::2, 0::2] = h.imag
    hc[:, 1::2, 1::2] = h.real
    g = code.generator.reshape(code.T, 2 * n_t, -1)
    # block t of H_eq is check(H) @ (rows of G for time t)
    return np.einsum("nab,tbk->ntak", hc, g).reshape(n, code.T * 2 * n_r, -1)


def batch_gram_schmidt(a: np.ndarray):
    """Modified Gram-Schmidt on each matrix of a stack; returns ``(Q, R)``."""
    a = np.array(a, dtype=float)
    n, p, m = a.shape
    q = np.zeros_like(a)
    r = np.zeros((n, m, m))
    for i in range(m):
        v = a[:, :, i].copy()
        for j in range(i):
            r[:, j, i] = np.einsum("np,np->n", q[:, :, j], v)
            v -= r[:, j, i, None] * q[:, :, j]
        norm = np.linalg.norm(v, axis=1)
        r[:, i, i] = norm
        q[:, :, i] = v / norm[:, None]
    return q, r


def _exhaustive(code, constellation, y, h):
    total = constellation.size ** code.k
    sym = _symbol_table(constellation, code.k, 0, total)
    cw = code.encode_batch(sym).transpose(0, 2, 1).reshape(total, -1)
    n = len(y)
    yv = y.transpose(0, 2, 1).reshape(n, -1)
    eye = np.eye(code.T)
    lift = np.einsum("ts,nab->ntasb", eye, h).reshape(n, code.T * h.shape[1], -1)
    step = max(1, _WORK // (total * yv.shape[1]))
    best = np.empty(n, dtype=int)
    for s in range(0, n, step):
        e = slice(s, s + step)
        d = yv[e, None, :] - np.einsum("nab,kb->nka", lift[e], cw)
        best[e] = np.argmin(np.sum(d.real ** 2 + d.imag ** 2, axis=2), axis=1)
    return sym[best], np.full(n, total, dtype=np.int64)


def _fast(code, constellation, y, h):
    info = CONDITIONAL_STRUCTURE.get(code.name)
    if info is None:
        raise ConstellationMismatch(f"no conditional decoder for {code.name}")
    square = constellation.is_square
    if not square and code.name == "golden":
        raise ConstellationMismatch("Golden code needs square QAM for conditional decoding")
    n = len(y)
    heq = batch_equivalent_channel(code, h)
    q, r = batch_gram_schmidt(heq)
    yt = np.empty((n, y.shape[1] * y.shape[2] * 2))
    yv = y.transpose(0, 2, 1).reshape(n, -1)
    yt[:, 0::2], yt[:, 1::2] = yv.real, yv.imag
    yp = np.einsum("npk,np->nk", q, yt)
    o = info["outer_start"]
    dim = 2 * code.k

    if square:
        levels = constellation.pam_levels
        outer = np.array(list(itertools.product(levels, repeat=dim - o)))
    else:
        n_outer = (dim - o) // 2
        pts = constellation.points
        sym = pts[np.array(list(itertools.product(range(len(pts)), repeat=n_outer)))]
        outer = np.empty((len(sym), dim - o))
        outer[:, 0::2], outer[:, 1::2] = sym.real, sym.imag
    n_hyp = len(outer)
    step = max(1, _WORK // (n_hyp * dim * (len(constellation.points) if not square else 4)))
    x_best = np.empty((n, dim))
    for s in range(0, n, step):
        e = slice(s, s + step)
        rr, yy = r[e], yp[e]
        tail = yy[:, None, o:] - np.einsum("nij,kj->nki", rr[:, o:, o:], outer)
        cost = np.sum(tail ** 2, axis=2)
        z = yy[:, None, :o] - np.einsum("nij,kj->nki", rr[:, :o, o:], outer)
        inner = np.empty(cost.shape + (o,))
        if square:
            for scan, hl in info["pairs"]:
                r_ss = rr[:, scan, scan, None]
                r_hs = rr[:, hl, scan, None]
                r_hh = rr[:, hl, hl, None]
                best_c = np.full(cost.shape, np.inf)
                best_a = np.zeros(cost.shape)
                best_b = np.zeros(cost.shape)
                for a in levels:
                    e1 = z[..., scan] - r_ss * a
                    rest = z[..., hl] - r_hs * a
                    b = hard_limit_pam(rest / r_hh, levels)
                    e2 = rest - r_hh * b
                    c = e1 * e1 + e2 * e2
                    better = c < best_c
                    best_c = np.where(better, c, best_c)
                    best_a = np.where(better, a, best_a)
                    best_b = np.where(better, b, best_b)
                cost += best_c
                inner[..., scan], inner[..., hl] = best_a, best_b
        else:
            pts = constellation.points
            for sidx in range(o // 2):
                c0 = 2 * sidx
                e0 = (z[..., c0, None] - rr[:, c0, c0, None, None] * pts.real
                      - rr[:, c0, c0 + 1, None, None] * pts.imag)
                e1 = z[..., c0 + 1, None] - rr[:, c0 + 1, c0 + 1, None, None] * pts.imag
                c = e0 * e0 + e1 * e1
                j = np.argmin(c, axis=-1)
                cost += np.take_along_axis(c, j[..., None], axis=-1)[..., 0]
                inner[..., c0], inner[..., c0 + 1] = pts.real[j], pts.imag[j]
        k = np.argmin(cost, axis=1)
        rows = np.arange(len(k))
        x_best[e, :o] = inner[rows, k]
        x_best[e, o:] = outer[k]
    if square:
        per_hyp = len(info["pairs"]) * len(constellation.pam_levels)
    else:
        per_hyp = (o // 2) * constellation.size
    x_hat = x_best[:, 0::2] + 1j * x_best[:, 1::2]
    return x_hat, np.full(n, n_hyp * per_hyp, dtype=np.int64)


def decode_batch(code: StbcCode, constellation: Constellation, y, h,
                 decoder: str = "fast"):
    """Decode ``N`` observations.

    Parameters
    ----------
    y : array_like, shape (N, n_r, T)
    h : array_like, shape (N, n_r, n_t)
    decoder : {"fast", "exhaustive"}

    Returns
    -------
    x_hat : np.ndarray, shape (N, k)
    computations : np.ndarray, shape (N,)
        Metric computations spent per trial.
    """
    y = np.asarray(y, dtype=complex)
    h = np.asarray(h, dtype=complex)
    if decoder == "exhaustive":
        return _exhaustive(code, constellation, y, h)
    if decoder == "fast":
        return _fast(code, constellation, y, h)
    raise ValueError(f"unknown batch decoder {decoder!r}")
