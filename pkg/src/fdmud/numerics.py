"""Complex vector/matrix primitives shared by every other module.

Two DFT conventions coexist on purpose.  The unitary transform (``1/sqrt(N)``
scaling both ways) is used for signal and noise, because it preserves the
per-sample noise variance across the domain change.  The unnormalized forward
transform produces circulant-channel eigenvalues: the DFT of the zero-padded
impulse response equals the diagonal of the diagonalized channel matrix.
Callers pick the convention explicitly; nothing here auto-selects.

All operations are pure functions on immutable inputs and are safe to call
concurrently.  Scalars are double precision throughout.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

__all__ = [
    "SingularMatrixError",
    "DegenerateScaleError",
    "dft_unitary",
    "idft_unitary",
    "dft_unnormalized",
    "invert_hpd",
    "solve_hpd",
    "matmul",
    "hermitian",
    "conj",
    "diag_of_product",
    "elem_inverse",
    "hadamard",
]

# Relative element-wise tolerance for accepting a matrix as Hermitian.
HERMITIAN_TOL = 1e-10

# Magnitudes at or below this floor are refused by elem_inverse.
ELEM_INVERSE_FLOOR = 1e-300


class SingularMatrixError(np.linalg.LinAlgError):
    """Hermitian factorization hit a non-positive pivot."""


class DegenerateScaleError(ValueError):
    """An element-wise inverse was requested for a vanishing magnitude."""


def _as_vector(v, name: str = "v") -> np.ndarray:
    v = np.asarray(v)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {v.shape}")
    if v.size == 0:
        raise ValueError(f"{name} must be nonempty")
    return v


def _as_matrix(a, name: str = "a") -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.size == 0:
        raise ValueError(f"{name} must be a nonempty 2-D matrix, got shape {a.shape}")
    return a


def dft_unitary(v) -> np.ndarray:
    """Unitary DFT of a vector (``1/sqrt(N)`` scaling, so the inverse is the
    Hermitian transpose of the transform matrix).

    Any positive length is supported; power-of-two sizes take the fast path
    but mixed-radix and prime sizes work identically.
    """
    return np.fft.fft(_as_vector(v), norm="ortho")


def idft_unitary(v) -> np.ndarray:
    """Inverse of :func:`dft_unitary`."""
    return np.fft.ifft(_as_vector(v), norm="ortho")


def dft_unnormalized(v) -> np.ndarray:
    """Unnormalized forward DFT, i.e. ``sqrt(N) * dft_unitary(v)``.

    This is the convention that maps a zero-padded channel impulse response
    onto the eigenvalues of the corresponding circulant channel matrix; it is
    used for nothing else.
    """
    return np.fft.fft(_as_vector(v))


def _cho_factor_checked(m) -> tuple:
    m = _as_matrix(m, "m")
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"m must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("m must have finite entries")
    scale = max(np.abs(m).max(), 1.0)
    if np.abs(m - m.conj().T).max() > HERMITIAN_TOL * scale:
        raise ValueError("m is not Hermitian within tolerance")
    try:
        return scipy.linalg.cho_factor(m, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"Cholesky factorization failed: {exc}") from exc


def solve_hpd(m, b) -> np.ndarray:
    """Solve ``m @ x = b`` for Hermitian positive-definite ``m`` via Cholesky.

    Substantially more accurate than multiplying by :func:`invert_hpd` when
    ``m`` is near-singular but ``b`` lies in its well-conditioned range.
    Raises the same errors as :func:`invert_hpd`.
    """
    factor = _cho_factor_checked(m)
    return scipy.linalg.cho_solve(factor, np.asarray(b), check_finite=False)


def invert_hpd(m) -> np.ndarray:
    """Invert a Hermitian positive-definite matrix via Cholesky factorization.

    Parameters
    ----------
    m : array_like
        Square matrix, Hermitian within ``HERMITIAN_TOL`` relative to its
        largest magnitude entry.

    Returns
    -------
    numpy.ndarray
        The inverse, re-symmetrized so it is exactly Hermitian.

    Raises
    ------
    ValueError
        If the input is not square/finite/Hermitian.
    SingularMatrixError
        If the factorization fails (matrix not positive definite).
    """
    factor = _cho_factor_checked(m)
    inv = scipy.linalg.cho_solve(factor, np.eye(factor[0].shape[0]), check_finite=False)
    # cho_solve output is Hermitian only to rounding; make it exact.
    return 0.5 * (inv + inv.conj().T)


def matmul(a, b) -> np.ndarray:
    """Matrix (or matrix-vector) product with an explicit conformance check."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim == 0 or b.ndim == 0:
        raise ValueError("matmul operands must be at least 1-D")
    if a.shape[-1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} x {b.shape}")
    return a @ b


def hermitian(a) -> np.ndarray:
    """Conjugate transpose."""
    return _as_matrix(a).conj().T


def conj(a) -> np.ndarray:
    """Element-wise complex conjugate."""
    return np.conj(a)


def diag_of_product(a, b) -> np.ndarray:
    """Diagonal of ``a @ b`` computed without forming the full product.

    ``a`` must be (p, q) and ``b`` (q, p); the result has length p and
    ``diag_of_product(a, b)[i] == (a @ b)[i, i]``.
    """
    a = _as_matrix(a, "a")
    b = _as_matrix(b, "b")
    if a.shape[1] != b.shape[0] or a.shape[0] != b.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape} x {b.shape}")
    return np.einsum("ij,ji->i", a, b)


def elem_inverse(v) -> np.ndarray:
    """Element-wise reciprocal of a vector.

    Raises
    ------
    DegenerateScaleError
        If any element magnitude is at or below ``ELEM_INVERSE_FLOOR``.
    """
    v = _as_vector(v)
    if np.any(np.abs(v) <= ELEM_INVERSE_FLOOR):
        raise DegenerateScaleError("elem_inverse: entry magnitude below invertible floor")
    return 1.0 / v


def hadamard(v, w) -> np.ndarray:
    """Element-wise product of two equal-length vectors."""
    v = _as_vector(v, "v")
    w = _as_vector(w, "w")
    if v.shape != w.shape:
        raise ValueError(f"length mismatch: {v.shape} vs {w.shape}")
    return v * w
