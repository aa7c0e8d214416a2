"""Real-valued equivalent channel ``H_eq = (I_T kron check(H)) G`` and its R-matrix structure."""

import json
from dataclasses import dataclass

import numpy as np

from .codes import StbcCode
from .linalg import QrFactorization, check_expand, gram_schmidt_qr

__all__ = [
    "EquivalentChannel",
    "SparsityPattern",
    "build_equivalent_channel",
    "anticommutation_pairs",
    "observed_r_pattern",
    "theorem1_check",
    "random_channel",
]


def random_channel(rng: np.random.Generator, n_r: int, n_t: int) -> np.ndarray:
    """i.i.d. CN(0, 1) channel matrix."""
    return (rng.standard_normal((n_r, n_t)) + 1j * rng.standard_normal((n_r, n_t))) / np.sqrt(2)


@dataclass(frozen=True)
class EquivalentChannel:
    h_eq: np.ndarray
    qr: QrFactorization
    code_name: str

    @property
    def r(self) -> np.ndarray:
        return self.qr.r

    @property
    def q(self) -> np.ndarray:
        return self.qr.q


def build_equivalent_channel(h, code: StbcCode) -> EquivalentChannel:
    """Lift the complex channel to the real model ``vec~(Y) = H_eq x~ + vec~(N)``.

    Columns of ``H_eq`` follow the information ordering
    ``x1I, x1Q, ..., xkI, xkQ``.
    """
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    if h.shape[1] != code.n_t:
        raise ValueError(f"channel has {h.shape[1]} transmit antennas, {code.name} needs {code.n_t}")
    h_eq = np.kron(np.eye(code.T), check_expand(h)) @ code.generator
    return EquivalentChannel(h_eq=h_eq, qr=gram_schmidt_qr(h_eq), code_name=code.name)


def anticommutation_pairs(code: StbcCode, tol: float = 1e-12) -> list[tuple[int, int]]:
    """1-based index pairs ``(i, j)``, ``i < j``, with ``A_i A_j^H + A_j A_i^H = 0``."""
    w = code.weights
    out = []
    for i in range(len(w)):
        for j in range(i + 1, len(w)):
            s = w[i] @ w[j].conj().T + w[j] @ w[i].conj().T
            if np.max(np.abs(s)) < tol:
                out.append((i + 1, j + 1))
    return out


@dataclass(frozen=True)
class SparsityPattern:
    """Boolean mask, ``True`` where ``R`` is structurally zero."""

    mask: np.ndarray

    def ascii(self) -> str:
        return "\n".join(" ".join("0" if z else "a" for z in row) for row in self.mask)

    def to_json(self) -> str:
        return json.dumps({"zero_mask": self.mask.astype(int).tolist()})

    def upper_zeros(self) -> set[tuple[int, int]]:
        """1-based positions strictly above the diagonal that are zero."""
        n = self.mask.shape[0]
        return {(i + 1, j + 1) for i in range(n) for j in range(i + 1, n) if self.mask[i, j]}

    def block(self, rows: slice, cols: slice) -> "SparsityPattern":
        return SparsityPattern(self.mask[rows, cols])


def observed_r_pattern(code: StbcCode, trials: int = 100, zero_tol: float = 1e-9,
                       n_r: int = 2, rng: np.random.Generator | None = None) -> SparsityPattern:
    """Mark ``R[i, j]`` zero iff it is below ``zero_tol * max|H_eq|`` in every trial."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(0) if rng is None else rng
    n = 2 * code.k
    dense = np.zeros((n, n), dtype=bool)
    for _ in range(trials):
        eq = build_equivalent_channel(random_channel(rng, n_r, code.n_t), code)
        dense |= np.abs(eq.r) >= zero_tol * np.max(np.abs(eq.h_eq))
    return SparsityPattern(~dense)


def theorem1_check(code: StbcCode, h) -> dict:
    """Check column orthogonality of ``H_eq`` for every anticommuting weight pair.

    Returns the largest relative ``|<h_i, h_j>|`` and ``|<q_i, h_j>|`` over
    those pairs (both 0.0 when there are no pairs) along with the pairs.
    """
    eq = build_equivalent_channel(h, code)
    pairs = anticommutation_pairs(code)
    hh, qq = eq.h_eq, eq.q
    norms = np.linalg.norm(hh, axis=0)
    max_h = max_q = 0.0
    for i, j in pairs:
        a, b = i - 1, j - 1
        max_h = max(max_h, abs(hh[:, a] @ hh[:, b]) / (norms[a] * norms[b]))
        max_q = max(max_q, abs(qq[:, a] @ hh[:, b]) / norms[b])
    return {"code": code.name, "pairs": pairs, "max_h_violation": max_h,
            "max_q_violation": max_q, "max_violation": max(max_h, max_q)}
