"""Minimum determinant, coding gain and rank analysis of linear STBCs.

All searches run over codeword *differences*: for a linear code
``S(x) - S(x') = S(x - x')``, and ``x - x'`` ranges over the product of the
per-symbol difference sets of the constellation. Values are reported on the
unnormalized integer-lattice scale.
"""

import itertools
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .codes import StbcCode, get_code
from .constellation import Constellation

__all__ = [
    "MinDetReport",
    "SearchBudgetExceeded",
    "RankDeficientCode",
    "difference_alphabet",
    "min_det_search",
    "min_det_sampled",
    "coding_gain",
    "normalized_min_det",
    "theoretical_min_det_zj",
    "rank_profile",
    "format_table",
]

DEFAULT_CAP = 10 ** 8


class SearchBudgetExceeded(ValueError):
    pass


class RankDeficientCode(ValueError):
    pass


@dataclass(frozen=True)
class MinDetReport:
    code_name: str
    M: int
    delta_min: float
    argmin_difference: list
    full_rank: bool
    evaluations: int
    exhaustive: bool = True

    def to_dict(self) -> dict:
        d = asdict(self)
        d["argmin_difference"] = [[float(z.real), float(z.imag)] for z in self.argmin_difference]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def difference_alphabet(constellation: Constellation) -> np.ndarray:
    """Distinct pairwise differences ``p - q`` of the constellation points."""
    p = constellation.points
    d = (p[:, None] - p[None, :]).ravel()
    d = np.round(d.real, 9) + 1j * np.round(d.imag, 9)
    d = np.unique(d)
    return d[np.lexsort((d.imag, d.real))]


def _positive_half(d: np.ndarray) -> np.ndarray:
    return d[(d.real > 0) | ((d.real == 0) & (d.imag > 0))]


def _sq_abs_det(batch: np.ndarray) -> np.ndarray:
    """``det(dS dS^H)`` for a batch of difference matrices."""
    n, t = batch.shape[1:]
    if n != t:
        batch = batch @ batch.conj().transpose(0, 2, 1)
        return np.abs(np.linalg.det(batch))
    if n == 2:
        det = batch[:, 0, 0] * batch[:, 1, 1] - batch[:, 0, 1] * batch[:, 1, 0]
    else:
        det = np.linalg.det(batch)
    return det.real ** 2 + det.imag ** 2


def _contributions(code: StbcCode, alphabet: np.ndarray) -> np.ndarray:
    """``C[i, a] = Re(d_a) A_{2i-1} + Im(d_a) A_{2i}``, shape (k, |D|, n_t, T)."""
    w = code.weights
    return (alphabet.real[None, :, None, None] * w[0::2, None]
            + alphabet.imag[None, :, None, None] * w[1::2, None])


def _table(contrib: np.ndarray, symbols: list[int]) -> np.ndarray:
    """Sum of contributions over every combination of the given symbols
    (first symbol slowest)."""
    n_t, T = contrib.shape[2:]
    out = np.zeros((1, n_t, T), dtype=complex)
    for s in symbols:
        out = (out[:, None] + contrib[s][None, :]).reshape(-1, n_t, T)
    return out


def _iter_differences(code: StbcCode, alphabet: np.ndarray, inner_size: int = 60000):
    """Yield ``(batch, decode)`` over all nonzero differences modulo sign.

    ``decode(i)`` rebuilds the complex difference vector of batch row ``i``.
    The leading nonzero symbol is restricted to the positive half of the
    alphabet, which visits exactly one of each ``+-dx`` pair.
    """
    k = code.k
    contrib = _contributions(code, alphabet)
    half = _positive_half(alphabet)
    half_idx = [int(np.flatnonzero(alphabet == h)[0]) for h in half]
    nd = len(alphabet)
    for lead in range(k):
        tail = list(range(lead + 1, k))
        n_inner = 0
        while n_inner < len(tail) and nd ** (n_inner + 1) <= inner_size:
            n_inner += 1
        inner_syms = tail[len(tail) - n_inner:]
        outer_syms = tail[:len(tail) - n_inner]
        inner = _table(contrib, inner_syms)
        for hi in half_idx:
            for combo in itertools.product(range(nd), repeat=len(outer_syms)):
                base = contrib[lead, hi].copy()
                for s, a in zip(outer_syms, combo):
                    base += contrib[s, a]

                def decode(i, hi=hi, combo=combo, lead=lead, inner_syms=inner_syms,
                           outer_syms=outer_syms):
                    dx = np.zeros(k, dtype=complex)
                    dx[lead] = alphabet[hi]
                    for s, a in zip(outer_syms, combo):
                        dx[s] = alphabet[a]
                    for s in reversed(inner_syms):
                        dx[s] = alphabet[i % nd]
                        i //= nd
                    return dx

                yield base[None] + inner, decode


def _search_size(code: StbcCode, alphabet: np.ndarray) -> int:
    return (len(alphabet) ** code.k - 1) // 2


def min_det_search(code: StbcCode, constellation: Constellation, cap: int = DEFAULT_CAP,
                   zero_tol: float = 1e-9) -> MinDetReport:
    """Exhaustive minimum of ``det(dS dS^H)`` over nonzero codeword differences.

    Raises
    ------
    SearchBudgetExceeded
        If the number of differences to evaluate exceeds ``cap``.
    """
    alphabet = difference_alphabet(constellation)
    size = _search_size(code, alphabet)
    if size > cap:
        raise SearchBudgetExceeded(
            f"{size} difference vectors exceed the budget of {cap}; use min_det_sampled")
    best = math.inf
    best_dx = None
    evaluations = 0
    for batch, decode in _iter_differences(code, alphabet):
        vals = _sq_abs_det(batch)
        evaluations += len(vals)
        i = int(np.argmin(vals))
        if vals[i] < best:
            best = float(vals[i])
            best_dx = decode(i)
    return MinDetReport(code.name, constellation.size, best, list(best_dx),
                        full_rank=best > zero_tol, evaluations=evaluations)


def min_det_sampled(code: StbcCode, constellation: Constellation, samples: int = 10 ** 6,
                    seed: int = 0, batch: int = 50000) -> MinDetReport:
    """Randomized upper bound on the minimum determinant (not exhaustive).

    Each sample picks how many symbols are nonzero uniformly in ``1..k``,
    then draws those symbols uniformly from the nonzero differences; sparse
    differences are where small determinants live.
    """
    rng = np.random.default_rng(seed)
    alphabet = difference_alphabet(constellation)
    nonzero = alphabet[alphabet != 0]
    k = code.k
    w = code.weights
    best = math.inf
    best_dx = None
    done = 0
    while done < samples:
        n = min(batch, samples - done)
        support = rng.integers(1, k + 1, size=n)
        mask = np.argsort(rng.random((n, k)), axis=1) < support[:, None]
        dx = np.where(mask, nonzero[rng.integers(0, len(nonzero), size=(n, k))], 0)
        ds = (np.einsum("nk,kab->nab", dx.real, w[0::2])
              + np.einsum("nk,kab->nab", dx.imag, w[1::2]))
        vals = _sq_abs_det(ds)
        i = int(np.argmin(vals))
        if vals[i] < best:
            best, best_dx = float(vals[i]), dx[i]
        done += n
    return MinDetReport(code.name, constellation.size, best, list(best_dx),
                        full_rank=best > 1e-9, evaluations=done, exhaustive=False)


def coding_gain(report: MinDetReport, n_t: int) -> float:
    """``delta_min ** (1 / n_t)``."""
    if not report.full_rank:
        raise RankDeficientCode(f"{report.code_name} is not full rank; coding gain undefined")
    return report.delta_min ** (1.0 / n_t)


def normalized_min_det(report: MinDetReport, constellation: Constellation) -> float:
    """``delta_min`` after scaling codewords to ``E||S||_F^2 = n_t * T``.

    Unlike the raw value this is comparable across codes at equal M.
    """
    from .sim import energy_scale

    code = get_code(report.code_name)
    return report.delta_min * energy_scale(code, constellation) ** (2 * code.n_t)


def theoretical_min_det_zj(code: StbcCode | None = None, bound: int = 3,
                           zero_tol: float = 1e-9) -> dict:
    """Minimum nonzero ``|det S(x)|`` over Gaussian-integer ``x`` with parts in [-bound, bound].

    For the proposed 2x2 code the expected answer is ``1/sqrt(5)`` with no
    nonzero ``x`` giving a singular codeword.
    """
    code = get_code("proposed2x2") if code is None else code
    vals = np.arange(-bound, bound + 1, dtype=float)
    grid = (vals[:, None] + 1j * vals[None, :]).ravel()
    n_t = code.n_t
    best = math.inf
    best_x = None
    zeros = 0
    # sweep the first symbol in Python, the rest vectorized
    rest = np.array(list(itertools.product(grid, repeat=code.k - 1)))
    cw_rest = code.encode_batch(np.column_stack([np.zeros(len(rest)), rest]))
    w = code.weights
    for x1 in grid:
        s = cw_rest + x1.real * w[0] + x1.imag * w[1]
        det = s[:, 0, 0] * s[:, 1, 1] - s[:, 0, 1] * s[:, 1, 0] if n_t == 2 else np.linalg.det(s)
        mag = np.abs(det)
        nonzero = np.ones(len(rest), bool)
        if x1 == 0:
            nonzero = np.any(rest != 0, axis=1)
        zeros += int(np.sum((mag < zero_tol) & nonzero))
        mag = np.where(nonzero, mag, np.inf)
        i = int(np.argmin(mag))
        if mag[i] < best:
            best = float(mag[i])
            best_x = np.concatenate([[x1], rest[i]])
    return {"code": code.name, "bound": bound, "min_abs_det": best,
            "min_det": best ** 2, "argmin": [[float(z.real), float(z.imag)] for z in best_x],
            "nonzero_singular": zeros}


def rank_profile(code: StbcCode, constellation: Constellation, cap: int = DEFAULT_CAP,
                 rel_tol: float = 1e-9) -> int:
    """Minimum numerical rank of ``dS`` over all nonzero differences.

    Singular values are only computed for differences whose determinant
    test flags them as (near) singular.
    """
    alphabet = difference_alphabet(constellation)
    if _search_size(code, alphabet) > cap:
        raise SearchBudgetExceeded("difference space exceeds the search budget")
    full = min(code.n_t, code.T)
    lowest = full
    for batch, _ in _iter_differences(code, alphabet):
        sv = None
        vals = _sq_abs_det(batch)
        scale = np.max(np.abs(batch), axis=(1, 2)) ** (2 * full)
        suspect = vals <= 1e-6 * scale
        if not np.any(suspect):
            continue
        sv = np.linalg.svd(batch[suspect], compute_uv=False)
        ranks = np.sum(sv > rel_tol * sv[:, :1], axis=1)
        lowest = min(lowest, int(ranks.min()))
    return lowest


def format_table(reports: list[MinDetReport]) -> str:
    """Plain-text table of code name, constellation and minimum determinant."""
    lines = [f"{'Code':<14}{'M':>5}{'Min det':>14}{'Coding gain':>14}  search",
             "-" * 56]
    for r in reports:
        n_t = get_code(r.code_name).n_t if r.code_name in _known() else 2
        gain = f"{r.delta_min ** (1 / n_t):.6f}" if r.full_rank else "-"
        kind = "exhaustive" if r.exhaustive else "sampled (upper bound)"
        lines.append(f"{r.code_name:<14}{r.M:>5}{r.delta_min:>14.6f}{gain:>14}  {kind}")
    return "\n".join(lines)


def _known():
    from .codes import CODE_NAMES
    return CODE_NAMES
