"""Real/complex matrix helpers shared by the code, channel and decoder modules.

Complex matrices are plain ``numpy`` arrays of dtype ``complex128`` and real
matrices are ``float64`` arrays. The functions here implement the real
expansion of complex matrices, the two interleaving vectorizations, column
stacking and a modified Gram-Schmidt QR.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "RankDeficientError",
    "QrFactorization",
    "check_expand",
    "vec_tilde",
    "vec_tilde_prime",
    "vec_stack",
    "gram_schmidt_qr",
    "det_complex",
]


class RankDeficientError(ValueError):
    """Raised when a matrix handed to :func:`gram_schmidt_qr` is not full
    column rank."""


@dataclass(frozen=True)
class QrFactorization:
    """Thin QR factorization ``h = q @ r``.

    ``q`` has orthonormal columns and ``r`` is upper triangular with a
    strictly positive diagonal.
    """

    q: np.ndarray
    r: np.ndarray


def check_expand(x) -> np.ndarray:
    """Replace every complex entry ``a + jb`` by the block ``[[a, -b], [b, a]]``.

    Parameters
    ----------
    x : array_like
        Complex scalar, vector (treated as a column) or 2D matrix.

    Returns
    -------
    np.ndarray
        Real matrix of shape ``(2n, 2m)``.

    Examples
    --------
    >>> check_expand(np.array([[1j]]))
    array([[ 0., -1.],
           [ 1.,  0.]])
    """
    x = np.asarray(x, dtype=complex)
    if x.ndim == 0:
        x = x.reshape(1, 1)
    elif x.ndim == 1:
        x = x.reshape(-1, 1)
    n, m = x.shape
    out = np.empty((2 * n, 2 * m))
    out[0::2, 0::2] = x.real
    out[0::2, 1::2] = -x.imag
    out[1::2, 0::2] = x.imag
    out[1::2, 1::2] = x.real
    return out


def vec_tilde(x) -> np.ndarray:
    """Interleave real and imaginary parts: ``[x1I, x1Q, ..., xnI, xnQ]``."""
    x = np.asarray(x, dtype=complex).ravel()
    out = np.empty(2 * x.size)
    out[0::2] = x.real
    out[1::2] = x.imag
    return out


def vec_tilde_prime(x) -> np.ndarray:
    """Interleave ``(-imag, real)`` per entry: ``[-x1Q, x1I, ..., -xnQ, xnI]``.

    Together with :func:`vec_tilde` this gives the two columns of the real
    expansion of a column vector.
    """
    x = np.asarray(x, dtype=complex).ravel()
    out = np.empty(2 * x.size)
    out[0::2] = -x.imag
    out[1::2] = x.real
    return out


def vec_stack(x) -> np.ndarray:
    """Stack the columns of ``x`` one below the other (column-major)."""
    x = np.asarray(x)
    if x.ndim == 1:
        return x.copy()
    return x.reshape(-1, order="F")


def gram_schmidt_qr(h, rank_tol: float = 1e-10) -> QrFactorization:
    """QR factorization by modified Gram-Schmidt.

    Each new column is orthogonalized against the already accepted ``q``
    vectors one at a time, which is the numerically stable variant of the
    classical recursion ``r_i = h_i - sum_j <q_j, h_i> q_j``. Both give the
    same factors in exact arithmetic.

    Parameters
    ----------
    h : array_like
        Real ``p x q`` matrix with ``p >= q``.
    rank_tol : float
        A column whose residual norm falls below ``rank_tol`` times the
        largest column norm of ``h`` is treated as linearly dependent.

    Returns
    -------
    QrFactorization

    Raises
    ------
    RankDeficientError
        If ``h`` is numerically rank deficient.
    """
    h = np.array(h, dtype=float)
    if h.ndim != 2:
        raise ValueError("expected a 2D matrix")
    p, ncols = h.shape
    if p < ncols:
        raise ValueError(f"need rows >= cols, got {p}x{ncols}")
    scale = np.max(np.linalg.norm(h, axis=0)) if ncols else 0.0
    q = np.zeros((p, ncols))
    r = np.zeros((ncols, ncols))
    for i in range(ncols):
        v = h[:, i].copy()
        for j in range(i):
            r[j, i] = q[:, j] @ v
            v -= r[j, i] * q[:, j]
        norm = np.linalg.norm(v)
        if scale == 0.0 or norm < rank_tol * scale:
            raise RankDeficientError(
                f"column {i} is numerically dependent (residual {norm:.3e})"
            )
        r[i, i] = norm
        q[:, i] = v / norm
    return QrFactorization(q=q, r=r)


def det_complex(x) -> complex:
    """Determinant of a square complex matrix.

    Sizes up to 2 use the cofactor formula; larger matrices go through
    LU with partial pivoting.
    """
    x = np.asarray(x, dtype=complex)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError("determinant needs a square matrix")
    n = x.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    if n == 1:
        return complex(x[0, 0])
    if n == 2:
        return complex(x[0, 0] * x[1, 1] - x[0, 1] * x[1, 0])
    a = x.copy()
    det = 1.0 + 0.0j
    for k in range(n):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        if a[piv, k] == 0:
            return 0.0 + 0.0j
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            det = -det
        det *= a[k, k]
        a[k + 1:, k] /= a[k, k]
        a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k, k + 1:])
    return complex(det)
