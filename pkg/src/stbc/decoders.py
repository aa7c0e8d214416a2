"""Maximum-likelihood detection for the STBCs in :mod:`stbc.codes`.

Three families live here:

* :func:`exhaustive_ml` enumerates every codeword and is the reference
  every other decoder is checked against.
* :func:`real_sphere_decode` is a depth-first Schnorr-Euchner search over a
  trailing block of real dimensions of an upper-triangular system. An
  optional leaf callback lets the caller add the cost of the conditionally
  decoded symbols, which keeps the search exact ML.
* The conditional decoders (:func:`decode_proposed_2x2`,
  :func:`decode_proposed_4x2`, :func:`decode_golden_fast`) exploit the zeros
  of ``R`` so that, once the trailing symbols are fixed, the leading symbols
  split into independent one- or two-variable problems.

Real coordinates are ordered ``x1I, x1Q, ..., xkI, xkQ`` throughout; ties
between equal metrics are broken towards the lexicographically smaller
coordinate vector.
"""

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channel import EquivalentChannel, build_equivalent_channel
from .codes import StbcCode, get_code
from .constellation import Constellation, hard_limit_pam
from .linalg import vec_stack, vec_tilde

__all__ = [
    "DecodeResult",
    "ReducedObservation",
    "SearchSpaceTooLarge",
    "ConstellationMismatch",
    "ml_metric",
    "reduce_observation",
    "exhaustive_ml",
    "real_sphere_decode",
    "SphereResult",
    "decode_proposed_2x2",
    "decode_proposed_4x2",
    "decode_golden_fast",
    "CONDITIONAL_STRUCTURE",
]

MAX_EXHAUSTIVE = 2 ** 32


class SearchSpaceTooLarge(ValueError):
    pass


class ConstellationMismatch(ValueError):
    pass


@dataclass(frozen=True)
class DecodeResult:
    x_hat: np.ndarray
    metric: float
    metric_computations: int

    def to_dict(self) -> dict:
        return {
            "x_hat": [[float(z.real), float(z.imag)] for z in self.x_hat],
            "metric": float(self.metric),
            "metric_computations": int(self.metric_computations),
        }


@dataclass(frozen=True)
class ReducedObservation:
    """``y' = Q^T vec~(Y)`` together with the triangular factor ``R``."""

    y_prime: np.ndarray
    r: np.ndarray


def ml_metric(y, h, code: StbcCode, x) -> float:
    """``||Y - H S(x)||_F^2``."""
    d = np.asarray(y) - np.asarray(h) @ code.encode(x)
    return float(np.sum(d.real ** 2 + d.imag ** 2))


def reduce_observation(y, eq: EquivalentChannel) -> ReducedObservation:
    return ReducedObservation(y_prime=eq.q.T @ vec_tilde(vec_stack(y)), r=eq.r)


# --------------------------------------------------------------------------
# exhaustive search
# --------------------------------------------------------------------------

_codeword_cache: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}
_CACHE_BYTES = 2 ** 27


def _symbol_table(constellation: Constellation, k: int, start: int, stop: int) -> np.ndarray:
    """Symbol vectors with flat enumeration index in [start, stop), x1 slowest."""
    m = constellation.size
    idx = np.arange(start, stop)
    out = np.empty((stop - start, k), dtype=complex)
    for pos in range(k - 1, -1, -1):
        out[:, pos] = constellation.points[idx % m]
        idx //= m
    return out


def _vec_codewords(code: StbcCode, sym: np.ndarray) -> np.ndarray:
    # column-major vec of every codeword, shape (K, n_t * T)
    return code.encode_batch(sym).transpose(0, 2, 1).reshape(len(sym), -1)


def _candidates(code: StbcCode, constellation: Constellation, start: int, stop: int):
    total = constellation.size ** code.k
    if total * code.n_t * code.T * 16 <= _CACHE_BYTES:
        key = (code.name, code.rotation, constellation.kind, constellation.size)
        if key not in _codeword_cache:
            sym = _symbol_table(constellation, code.k, 0, total)
            _codeword_cache[key] = (sym, _vec_codewords(code, sym))
        sym, cw = _codeword_cache[key]
        return sym[start:stop], cw[start:stop]
    sym = _symbol_table(constellation, code.k, start, stop)
    return sym, _vec_codewords(code, sym)


def exhaustive_ml(y, h, code: StbcCode, constellation: Constellation,
                  chunk: int = 2 ** 20) -> DecodeResult:
    """Brute-force ML over all ``M**k`` codewords.

    Candidates are enumerated with ``x1`` varying slowest over the sorted
    constellation, so the first minimum found is the lexicographically
    smallest one.

    Raises
    ------
    SearchSpaceTooLarge
        If ``M**k`` exceeds ``2**32``.
    """
    y = np.asarray(y, dtype=complex)
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    total = constellation.size ** code.k
    if total > MAX_EXHAUSTIVE:
        raise SearchSpaceTooLarge(f"{total} candidates exceed the exhaustive-search cap")
    # vec(H S) = (I_T kron H) vec(S)
    lift = np.kron(np.eye(code.T), h)
    yv = vec_stack(y)
    best_metric = math.inf
    best_x = None
    for start in range(0, total, chunk):
        stop = min(total, start + chunk)
        sym, cw = _candidates(code, constellation, start, stop)
        d = yv[None, :] - cw @ lift.T
        metrics = np.sum(d.real ** 2 + d.imag ** 2, axis=1)
        i = int(np.argmin(metrics))
        if metrics[i] < best_metric:
            best_metric = float(metrics[i])
            best_x = sym[i].copy()
    return DecodeResult(best_x, ml_metric(y, h, code, best_x), total)


# --------------------------------------------------------------------------
# sphere decoder
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SphereResult:
    x: np.ndarray          # values on the active dimensions
    metric: float          # partial cost plus leaf cost of the winner
    payload: object        # whatever the leaf callback returned for the winner
    leaves: int            # leaves reached (i.e. leaf callbacks made)


def real_sphere_decode(obs: ReducedObservation, levels, active_dims=None,
                       leaf_cost: Callable | None = None,
                       on_node: Callable | None = None) -> SphereResult:
    """Exact minimization of ``sum_{i in active} (y'_i - sum_j r_ij x_j)^2``.

    Parameters
    ----------
    obs : ReducedObservation
    levels : sequence of float
        Admissible values of each real coordinate.
    active_dims : range, optional
        Trailing block ``range(start, n)`` of coordinates to search. Rows in
        that block only involve those same coordinates, so the partial cost
        is well defined. Defaults to all coordinates.
    leaf_cost : callable, optional
        ``leaf_cost(x_active) -> (extra_cost, payload, tie_key)``; added to the
        partial cost at each leaf. Must be non-negative for pruning to stay
        exact. Without it the leaf cost is 0 and ties are broken on
        ``x_active``.
    on_node : callable, optional
        Called as ``on_node(depth, partial_cost)`` at every accepted node.

    Returns
    -------
    SphereResult
    """
    r = np.asarray(obs.r, dtype=float)
    n = r.shape[0]
    if active_dims is None:
        active_dims = range(n)
    start = active_dims.start
    if active_dims.stop != n or active_dims.step != 1 or not 0 <= start < n:
        raise ValueError("active_dims must be a trailing range(start, n)")
    R = r.tolist()
    Y = [float(v) for v in obs.y_prime]
    lv = sorted(float(v) for v in levels)
    x = [0.0] * n
    best = {"cost": math.inf, "key": None, "x": None, "payload": None}
    leaves = 0

    def visit(i: int, partial: float) -> None:
        nonlocal leaves
        if i < start:
            leaves += 1
            sub = x[start:]
            if leaf_cost is None:
                extra, payload, key = 0.0, None, tuple(sub)
            else:
                extra, payload, key = leaf_cost(sub)
            total = partial + extra
            if total < best["cost"] or (total == best["cost"] and key < best["key"]):
                best.update(cost=total, key=key, x=list(sub), payload=payload)
            return
        row = R[i]
        acc = Y[i]
        for j in range(i + 1, n):
            acc -= row[j] * x[j]
        rii = row[i]
        c = acc / rii
        # closest level first; equal distance -> larger level first
        for p in sorted(lv, key=lambda v: (abs(c - v), -v)):
            inc = (rii * (c - p)) ** 2
            cost = partial + inc
            if cost > best["cost"]:
                break
            x[i] = p
            if on_node is not None:
                on_node(n - i, cost)
            visit(i - 1, cost)
        x[i] = 0.0

    visit(n - 1, 0.0)
    return SphereResult(np.array(best["x"]), best["cost"], best["payload"], leaves)


# --------------------------------------------------------------------------
# conditional decoders
# --------------------------------------------------------------------------

#: For each code: the first coordinate searched jointly (all later ones are
#: the "outer" symbols), and for square QAM the (scan, hard-limit) coordinate
#: pairs that decouple once the outer symbols are fixed.
CONDITIONAL_STRUCTURE = {
    "proposed2x2": {"outer_start": 4, "pairs": [(1, 0), (3, 2)]},
    "proposed4x2": {"outer_start": 8, "pairs": [(1, 0), (3, 2), (5, 4), (7, 6)]},
    "golden": {"outer_start": 4, "pairs": [(2, 0), (3, 1)]},
}


def _pair_scan(z, R, levels, scan: int, hl: int):
    """Minimize ``(z_s - r_ss a)^2 + (z_h - r_hs a - r_hh b)^2`` over PAM a, b.

    ``a`` is scanned over all levels and ``b`` is hard-limited for each one.
    Returns ``(cost, a, b, count)``.
    """
    r_ss, r_hs, r_hh = R[scan][scan], R[hl][scan], R[hl][hl]
    zs, zh = z[scan], z[hl]
    best = None
    for a in levels:
        e1 = zs - r_ss * a
        rest = zh - r_hs * a
        b = hard_limit_pam(rest / r_hh, levels)
        e2 = rest - r_hh * b
        cost = e1 * e1 + e2 * e2
        key = (cost, (a, b) if scan < hl else (b, a))
        if best is None or key < best[0]:
            best = (key, a, b)
    (cost, _), a, b = best
    return cost, a, b, len(levels)


def _symbol_scan(z, R, points, col: int):
    """Minimize over complex points ``p`` the two-row cost of symbol at ``col``."""
    r00, r01, r11 = R[col][col], R[col][col + 1], R[col + 1][col + 1]
    z0, z1 = z[col], z[col + 1]
    best = None
    for p in points:
        e0 = z0 - r00 * p.real - r01 * p.imag
        e1 = z1 - r11 * p.imag
        key = (e0 * e0 + e1 * e1, p.real, p.imag)
        if best is None or key < best:
            best = key
    return best[0], best[1], best[2], len(points)


def _inner_residual(Y, R, outer_start, outer):
    return [Y[i] - sum(R[i][outer_start + j] * outer[j] for j in range(len(outer)))
            for i in range(outer_start)]


def _assemble(xt) -> np.ndarray:
    xt = np.asarray(xt, dtype=float)
    return xt[0::2] + 1j * xt[1::2]


def _conditional_decode(y, h, code: StbcCode, constellation: Constellation,
                        eq: EquivalentChannel | None) -> DecodeResult:
    info = CONDITIONAL_STRUCTURE[code.name]
    ostart = info["outer_start"]
    if eq is None:
        eq = build_equivalent_channel(h, code)
    obs = reduce_observation(y, eq)
    R = obs.r.tolist()
    Y = [float(v) for v in obs.y_prime]
    count = 0

    if constellation.is_square:
        levels = [float(v) for v in constellation.pam_levels]
        pairs = info["pairs"]

        def leaf(outer):
            nonlocal count
            z = _inner_residual(Y, R, ostart, outer)
            xt = [0.0] * ostart
            total = 0.0
            for scan, hl in pairs:
                cost, a, b, c = _pair_scan(z, R, levels, scan, hl)
                count += c
                total += cost
                xt[scan], xt[hl] = a, b
            xt.extend(outer)
            return total, xt, tuple(xt)

        res = real_sphere_decode(obs, levels, range(ostart, len(Y)), leaf_cost=leaf)
        x_hat = _assemble(res.payload)
    else:
        if code.name == "golden":
            raise ConstellationMismatch(
                "the Golden code has no conditional decoder for non-square QAM; "
                "use exhaustive_ml")
        x_hat, count = _conditional_generic(Y, R, ostart, constellation)
    return DecodeResult(x_hat, ml_metric(y, h, code, x_hat), count)


def _conditional_generic(Y, R, ostart, constellation):
    """Arbitrary constellations: outer symbols enumerated jointly, best-first."""
    pts = constellation.points
    n = len(Y)
    n_outer = (n - ostart) // 2
    m = len(pts)
    grid = np.array(list(itertools.product(range(m), repeat=n_outer)))
    sym = pts[grid]                                      # (K, n_outer)
    xt = np.empty((len(sym), 2 * n_outer))
    xt[:, 0::2], xt[:, 1::2] = sym.real, sym.imag
    Rt = np.asarray(R)[ostart:, ostart:]
    res = np.asarray(Y[ostart:])[None, :] - xt @ Rt.T
    partial = np.sum(res ** 2, axis=1)
    order = np.argsort(partial, kind="stable")
    point_list = [complex(p) for p in pts]
    best_key = None
    best_xt = None
    count = 0
    for o in order:
        if best_key is not None and partial[o] > best_key[0]:
            break
        outer = xt[o].tolist()
        z = _inner_residual(Y, R, ostart, outer)
        total = float(partial[o])
        full = [0.0] * ostart
        for s in range(ostart // 2):
            cost, re, im, c = _symbol_scan(z, R, point_list, 2 * s)
            count += c
            total += cost
            full[2 * s], full[2 * s + 1] = re, im
        full.extend(outer)
        key = (total, tuple(full))
        if best_key is None or key < best_key:
            best_key, best_xt = key, full
    return _assemble(best_xt), count


def decode_proposed_2x2(y, h, constellation: Constellation,
                        eq: EquivalentChannel | None = None) -> DecodeResult:
    """Conditional ML decoder for the proposed 2x2 code.

    Square QAM: a 4-dimensional real sphere search over ``x3, x4``; for each
    leaf ``x1`` and ``x2`` decouple, and within each the quadrature part is
    scanned while the in-phase part is hard-limited (at most ``2 M^2 sqrt(M)``
    metric computations). Other constellations: ``x3, x4`` are enumerated
    best-first and ``x1``, ``x2`` are each searched over all M points (at most
    ``2 M^3``).
    """
    return _conditional_decode(y, h, get_code("proposed2x2"), constellation, eq)


def decode_proposed_4x2(y, h, constellation: Constellation,
                        eq: EquivalentChannel | None = None) -> DecodeResult:
    """Conditional ML decoder for the proposed 4x2 code.

    An 8-dimensional real sphere search over ``x5..x8`` followed by four
    independent single-symbol problems. At most ``4 M^4 sqrt(M)`` metric
    computations for square QAM, ``4 M^5`` otherwise.
    """
    return _conditional_decode(y, h, get_code("proposed4x2"), constellation, eq)


def decode_golden_fast(y, h, constellation: Constellation,
                       eq: EquivalentChannel | None = None) -> DecodeResult:
    """Conditional ML decoder for the Golden code, square QAM only.

    With ``x3, x4`` fixed the cost splits into an in-phase group
    ``(x1I, x2I)`` and a quadrature group ``(x1Q, x2Q)``; ``x2`` parts are
    scanned and ``x1`` parts hard-limited.

    Raises
    ------
    ConstellationMismatch
        For non-square constellations.
    """
    if not constellation.is_square:
        raise ConstellationMismatch(
            "the Golden code has no conditional decoder for non-square QAM; use exhaustive_ml")
    return _conditional_decode(y, h, get_code("golden"), constellation, eq)
