"""Integer-lattice QAM signal sets, the CIOD rotation and the PAM hard limiter."""

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "THETA_G",
    "ROTATION",
    "Constellation",
    "ConstellationError",
    "square_qam",
    "cross_qam_32",
    "rotate",
    "hard_limit_pam",
    "from_name",
]

#: Rotation angle ``0.5 * arctan(2)`` applied to integer QAM symbols.
THETA_G = 0.5 * math.atan(2.0)
#: ``exp(j * THETA_G)``.
ROTATION = complex(math.cos(THETA_G), math.sin(THETA_G))


class ConstellationError(ValueError):
    pass


@dataclass(frozen=True)
class Constellation:
    """A finite complex signal set.

    Points are stored sorted by ``(real, imag)`` so that enumeration order,
    and therefore every lexicographic tie-break in the decoders, is fixed.
    """

    points: np.ndarray
    kind: str  # "square" or "cross32"
    pam_levels: np.ndarray = field(default_factory=lambda: np.empty(0))
    rotation: float = 0.0

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def is_square(self) -> bool:
        return self.kind == "square" and self.rotation == 0.0

    def index_of(self, x) -> np.ndarray:
        """Indices of the (nearest) constellation points for each entry of x."""
        x = np.atleast_1d(np.asarray(x, dtype=complex))
        return np.argmin(np.abs(x[:, None] - self.points[None, :]), axis=1)

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = np.atleast_1d(np.asarray(x, dtype=complex))
        d = np.abs(x[:, None] - self.points[None, :]).min(axis=1)
        return bool(np.all(d < tol))

    def average_energy(self) -> float:
        return float(np.mean(np.abs(self.points) ** 2))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "M": self.size,
            "points": [[float(p.real), float(p.imag)] for p in self.points],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Constellation":
        pts = np.array([complex(re, im) for re, im in d["points"]])
        if d["kind"] == "square":
            c = square_qam(int(d["M"]))
            if not np.allclose(np.sort_complex(pts), np.sort_complex(c.points)):
                raise ConstellationError("points do not match a square QAM of that size")
            return c
        if d["kind"] == "cross32":
            return cross_qam_32()
        return cls(points=_sorted(pts), kind=d["kind"])


def _sorted(points: np.ndarray) -> np.ndarray:
    order = np.lexsort((points.imag, points.real))
    return points[order]


def square_qam(m: int) -> Constellation:
    """Unnormalized square M-QAM with odd-integer coordinates.

    >>> square_qam(4).points
    array([-1.-1.j, -1.+1.j,  1.-1.j,  1.+1.j])
    """
    side = math.isqrt(m) if m > 0 else 0
    if m < 4 or side * side != m or side & (side - 1):
        raise ConstellationError(f"square QAM needs M = 4, 16, 64, ...; got {m}")
    levels = np.arange(-(side - 1), side, 2, dtype=float)
    re, im = np.meshgrid(levels, levels, indexing="ij")
    pts = (re + 1j * im).ravel()
    return Constellation(points=_sorted(pts), kind="square", pam_levels=levels)


def cross_qam_32() -> Constellation:
    """32-point cross constellation: the 6x6 odd-integer grid minus its corners."""
    levels = np.array([-5.0, -3.0, -1.0, 1.0, 3.0, 5.0])
    pts = [complex(a, b) for a in levels for b in levels if not (abs(a) == 5 and abs(b) == 5)]
    return Constellation(points=_sorted(np.array(pts)), kind="cross32")


def rotate(c: Constellation, angle: float = THETA_G) -> Constellation:
    """Multiply every point by ``exp(j*angle)``.

    Raises
    ------
    ConstellationError
        If two rotated points share a real part or an imaginary part; a
        coordinate-interleaved code built on such a set loses rank.
    """
    if c.rotation != 0.0:
        raise ConstellationError("constellation is already rotated")
    pts = c.points * complex(math.cos(angle), math.sin(angle))
    for part in (pts.real, pts.imag):
        s = np.sort(part)
        if np.any(np.diff(s) < 1e-12):
            raise ConstellationError("rotated points are not coordinate-distinct")
    return Constellation(points=pts, kind=c.kind, pam_levels=c.pam_levels, rotation=angle)


def hard_limit_pam(u, levels: np.ndarray):
    """Nearest PAM level to ``u`` for odd-integer levels ``-(L-1), ..., L-1``.

    A midpoint between two levels goes to the larger one. Works elementwise
    on arrays.

    >>> hard_limit_pam(0.0, np.array([-1.0, 1.0]))
    1.0
    """
    levels = np.asarray(levels, dtype=float)
    top = levels[-1]
    u = np.asarray(u, dtype=float)
    if not np.array_equal(levels, np.arange(-top, top + 1, 2.0)) or top % 2 != 1:
        # generic set: exhaustive search, ties to the larger level
        d = np.abs(u[..., None] - levels[::-1])
        q = levels[::-1][np.argmin(d, axis=-1)]
        return float(q) if np.ndim(q) == 0 else q
    # odd integers: nearest is 2*floor(u/2) + 1
    q = 2.0 * np.floor(u / 2.0) + 1.0
    q = np.clip(q, -top, top)
    if np.ndim(q) == 0:
        return float(q)
    return q


def from_name(name: str) -> Constellation:
    """Parse ``"4"``, ``"16"``, ``"qam16"`` or ``"cross32"``/``"32"``."""
    key = str(name).lower().replace("-", "").replace("qam", "")
    if key in ("cross32", "32", "32cross", "cross"):
        return cross_qam_32()
    try:
        return square_qam(int(key))
    except ValueError as exc:
        raise ConstellationError(f"unknown constellation {name!r}") from exc
