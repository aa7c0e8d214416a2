"""Space-time block codes as linear dispersion data.

Every code maps an information vector ``x`` of ``k`` unrotated integer-QAM
symbols to an ``n_t x T`` complex codeword. Codes that need a rotated
alphabet apply the rotation ``exp(j*THETA_G)`` internally, so the
information vector is always the integer symbol vector.
"""

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .constellation import THETA_G
from .linalg import vec_stack, vec_tilde

__all__ = [
    "StbcCode",
    "ciod2_encode",
    "proposed_2x2_encode",
    "ciod4_encode",
    "proposed_4x2_encode",
    "alamouti_encode",
    "golden_encode",
    "weight_matrices",
    "generator_matrix",
    "get_code",
    "CODE_NAMES",
    "ciod2_code",
    "ciod4_code",
]

E_PI4 = cmath.exp(1j * math.pi / 4)
P2 = np.array([[0, 1], [1, 0]], dtype=float)
P4 = np.array([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]], dtype=float)

GOLDEN_TAU = (1 + math.sqrt(5)) / 2
GOLDEN_MU = (1 - math.sqrt(5)) / 2
GOLDEN_ALPHA = 1 + 1j - 1j * GOLDEN_TAU
GOLDEN_ALPHA_BAR = 1 + 1j - 1j * GOLDEN_MU


def _rot(x, angle: float):
    return np.asarray(x, dtype=complex) * cmath.exp(1j * angle)


def ciod2_encode(s1: complex, s2: complex) -> np.ndarray:
    """Two-antenna CIOD ``diag(s1I + j s2Q, s2I + j s1Q)`` on rotated symbols."""
    s1, s2 = complex(s1), complex(s2)
    return np.array([
        [s1.real + 1j * s2.imag, 0],
        [0, s2.real + 1j * s1.imag],
    ], dtype=complex)


def proposed_2x2_encode(x) -> np.ndarray:
    """Full-rate 2x2 code ``X(s1, s2) + exp(j pi/4) X(s3, s4) P``.

    ``x`` holds four unrotated integer-QAM symbols.
    """
    s = _rot(x, THETA_G)
    if s.shape != (4,):
        raise ValueError("proposed 2x2 code takes 4 symbols")
    return ciod2_encode(s[0], s[1]) + E_PI4 * ciod2_encode(s[2], s[3]) @ P2


def ciod4_encode(s) -> np.ndarray:
    """Four-antenna CIOD on rotated symbols ``s1..s4``."""
    s = np.asarray(s, dtype=complex)
    if s.shape != (4,):
        raise ValueError("CIOD-4 takes 4 symbols")
    i, q = s.real, s.imag
    out = np.zeros((4, 4), dtype=complex)
    out[0, 0] = i[0] + 1j * q[2]
    out[0, 1] = -i[1] + 1j * q[3]
    out[1, 0] = i[1] + 1j * q[3]
    out[1, 1] = i[0] - 1j * q[2]
    out[2, 2] = i[2] + 1j * q[0]
    out[2, 3] = -i[3] + 1j * q[1]
    out[3, 2] = i[3] + 1j * q[1]
    out[3, 3] = i[2] - 1j * q[0]
    return out


def proposed_4x2_encode(x) -> np.ndarray:
    """Full-rate 4x2 code ``X(s1..s4) + exp(j pi/4) X(s5..s8) P``."""
    s = _rot(x, THETA_G)
    if s.shape != (8,):
        raise ValueError("proposed 4x2 code takes 8 symbols")
    return ciod4_encode(s[:4]) + E_PI4 * ciod4_encode(s[4:]) @ P4


def alamouti_encode(s1: complex, s2: complex) -> np.ndarray:
    s1, s2 = complex(s1), complex(s2)
    return np.array([
        [s1, -s2.conjugate()],
        [s2, s1.conjugate()],
    ], dtype=complex)


def golden_encode(x) -> np.ndarray:
    """Golden code codeword for integer symbols ``x1..x4`` (1/sqrt(5) scaled)."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (4,):
        raise ValueError("Golden code takes 4 symbols")
    a, b, c, d = x
    return np.array([
        [GOLDEN_ALPHA * (a + b * GOLDEN_TAU), GOLDEN_ALPHA * (c + d * GOLDEN_TAU)],
        [1j * GOLDEN_ALPHA_BAR * (c + d * GOLDEN_MU), GOLDEN_ALPHA_BAR * (a + b * GOLDEN_MU)],
    ]) / math.sqrt(5)


@dataclass(frozen=True)
class StbcCode:
    """A linear STBC.

    Attributes
    ----------
    name : str
    n_t, T, k : int
        Transmit antennas, channel uses and complex symbols per codeword.
    encoder : callable
        Maps a length-``k`` complex integer vector to the ``n_t x T``
        codeword.
    rotation : float
        Angle the encoder applies to the integer symbols (0 for none).
    permutation : np.ndarray or None
        Permutation used by the construction, if any.
    """

    name: str
    n_t: int
    T: int
    k: int
    encoder: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    rotation: float = 0.0
    permutation: np.ndarray | None = field(default=None, repr=False, compare=False)

    def encode(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex).ravel()
        if x.size != self.k:
            raise ValueError(f"{self.name} expects {self.k} symbols, got {x.size}")
        return np.asarray(self.encoder(x), dtype=complex)

    @cached_property
    def weights(self) -> np.ndarray:
        """Weight matrices as an array of shape ``(2k, n_t, T)``."""
        return weight_matrices(self)

    @cached_property
    def generator(self) -> np.ndarray:
        return generator_matrix(self)

    def encode_batch(self, x) -> np.ndarray:
        """Encode an ``(N, k)`` array of symbol vectors via the weight matrices."""
        x = np.asarray(x, dtype=complex)
        w = self.weights
        return (np.einsum("nk,kab->nab", x.real, w[0::2])
                + np.einsum("nk,kab->nab", x.imag, w[1::2]))

    @property
    def rate(self) -> float:
        return self.k / self.T


def weight_matrices(code: StbcCode) -> np.ndarray:
    """Extract ``A_1 .. A_2k`` by encoding unit real and unit imaginary symbols."""
    out = np.empty((2 * code.k, code.n_t, code.T), dtype=complex)
    for i in range(code.k):
        for part, unit in enumerate((1.0, 1j)):
            e = np.zeros(code.k, dtype=complex)
            e[i] = unit
            out[2 * i + part] = code.encode(e)
    return out


def generator_matrix(code: StbcCode) -> np.ndarray:
    """Real ``2 n_t T x 2k`` matrix with ``vec_tilde(vec(S)) = G @ vec_tilde(x)``."""
    w = code.weights
    return np.column_stack([vec_tilde(vec_stack(a)) for a in w])


def ciod2_code(rotation: float = THETA_G) -> StbcCode:
    def enc(x):
        s = _rot(x, rotation)
        return ciod2_encode(s[0], s[1])
    return StbcCode("ciod2", 2, 2, 2, enc, rotation=rotation)


def ciod4_code(rotation: float = THETA_G) -> StbcCode:
    return StbcCode("ciod4", 4, 4, 4, lambda x: ciod4_encode(_rot(x, rotation)), rotation=rotation)


_REGISTRY: dict[str, Callable[[], StbcCode]] = {
    "ciod2": ciod2_code,
    "proposed2x2": lambda: StbcCode("proposed2x2", 2, 2, 4, proposed_2x2_encode,
                                    rotation=THETA_G, permutation=P2),
    "ciod4": ciod4_code,
    "proposed4x2": lambda: StbcCode("proposed4x2", 4, 4, 8, proposed_4x2_encode,
                                    rotation=THETA_G, permutation=P4),
    "alamouti": lambda: StbcCode("alamouti", 2, 2, 2, lambda x: alamouti_encode(x[0], x[1])),
    "golden": lambda: StbcCode("golden", 2, 2, 4, golden_encode),
}
CODE_NAMES = tuple(_REGISTRY)
_CACHE: dict[str, StbcCode] = {}


def get_code(name: str) -> StbcCode:
    """Look up a code by registry name (``"proposed2x2"``, ``"golden"``, ...)."""
    key = name.lower().replace("-", "").replace("_", "")
    if key not in _REGISTRY:
        raise KeyError(f"unknown code {name!r}; choose from {', '.join(CODE_NAMES)}")
    if key not in _CACHE:
        _CACHE[key] = _REGISTRY[key]()
    return _CACHE[key]
