"""Per-bin uplink detectors and frame-level orchestration.

The detectors share the per-bin signal model ``y_n = A_n s_n + w_n``:

* ``mmse_bin``: unbiased MMSE using the M x M receive-side inverse.
* ``mrcmmse_bin``: unbiased MMSE applied to the K matched-filter /
  ratio-combined statistics of ``mrc_bin``, needing only a K x K inverse.
  Algebraically identical to ``mmse_bin``; the equality is enforced by the
  test suite, not assumed at runtime.
* ``lowsnr_bin``: the noise-dominated limit, a diagonally-unbiased matched
  filter independent of the noise variance.
* ``highsnr_bin``: the zero-forcing limit.

Frame-level detection applies one detector kind (including the plain TR-MRC
baseline) to all N bins and returns time-domain symbol estimates; the
MRC-MMSE path also captures the per-bin regularized Gram inverses so the
downlink precoder can reuse them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import BinChannel
from .frame import FREQUENCY, ReceivedFrame
from .numerics import (
    DegenerateScaleError,
    SingularMatrixError,
    diag_of_product,
    elem_inverse,
    hadamard,
    hermitian,
    invert_hpd,
    matmul,
    solve_hpd,
)

__all__ = [
    "DetectorKind",
    "InverseCache",
    "DetectionResult",
    "mmse_bin",
    "mrc_bin",
    "mrcmmse_bin",
    "lowsnr_bin",
    "highsnr_bin",
    "detect_frame",
]


class DetectorKind(enum.Enum):
    MMSE = "mmse"
    MRC_MMSE = "mrc_mmse"
    TR_MRC = "tr_mrc"
    LOW_SNR = "low_snr"
    HIGH_SNR_ZF = "high_snr_zf"


@dataclass(frozen=True)
class InverseCache:
    """Per-bin regularized Gram inverses, shared between uplink and downlink.

    ``inv`` has shape (N, K, K); ``inv[n]`` is the inverse of
    ``A_n^H A_n + sigma_w2 I``.
    """

    inv: np.ndarray
    sigma_w2: float


@dataclass(frozen=True)
class DetectionResult:
    """K x N time-domain symbol estimates plus the detector that made them."""

    s_hat_time: np.ndarray
    kind: DetectorKind
    cache: Optional[InverseCache] = None


def _check_bin_args(a_n, y_n, tall: bool = False):
    a_n = np.asarray(a_n)
    y_n = np.asarray(y_n)
    if a_n.ndim != 2:
        raise ValueError(f"a_n must be 2-D, got shape {a_n.shape}")
    if y_n.shape != (a_n.shape[0],):
        raise ValueError(f"y_n shape {y_n.shape} does not match a_n shape {a_n.shape}")
    if tall and a_n.shape[0] < a_n.shape[1]:
        raise ValueError(f"a_n must have at least as many rows as columns, got {a_n.shape}")
    return a_n, y_n


def mmse_bin(a_n, y_n, sigma_w2: float) -> np.ndarray:
    """Unbiased per-bin MMSE estimate via the M x M receive-side inverse.

    Computes ``a o A^H (A A^H + sigma_w2 I)^-1 y`` where the coefficient
    vector ``a`` is the element-wise inverse of the diagonal of the
    end-to-end map, making each user's estimate unbiased.

    ``sigma_w2`` must be strictly positive; for the noise-free limit use
    :func:`highsnr_bin`, which is the same estimator without regularization.
    """
    a_n, y_n = _check_bin_args(a_n, y_n, tall=True)
    if not sigma_w2 > 0:
        raise ValueError("sigma_w2 must be positive; use highsnr_bin for the noise-free limit")
    m = a_n.shape[0]
    cov = matmul(a_n, hermitian(a_n)) + sigma_w2 * np.eye(m)
    # Solving with A as the right-hand side stays in the well-conditioned
    # range subspace of cov, unlike forming the explicit M x M inverse.
    filt = hermitian(solve_hpd(cov, a_n))
    unbias = elem_inverse(diag_of_product(filt, a_n))
    return hadamard(unbias, matmul(filt, y_n))


def mrc_bin(a_n, y_n) -> np.ndarray:
    """Matched-filter / ratio-combined statistic ``(1/M) A^H y`` (length K)."""
    a_n, y_n = _check_bin_args(a_n, y_n)
    return matmul(hermitian(a_n), y_n) / a_n.shape[0]


def mrcmmse_bin(a_n, r_n, sigma_w2: float) -> tuple[np.ndarray, np.ndarray]:
    """Unbiased MMSE estimate from the combined statistics of :func:`mrc_bin`.

    Parameters
    ----------
    a_n : array_like
        M x K per-bin channel matrix (the same one used to form ``r_n``).
    r_n : array_like
        Length-K output of :func:`mrc_bin` for this bin.
    sigma_w2 : float
        Noise variance; strictly positive.

    Returns
    -------
    (estimate, inverse)
        The K unbiased symbol estimates and the K x K inverse of
        ``A^H A + sigma_w2 I``, returned for caching.  Only this K x K
        inversion is performed.
    """
    a_n = np.asarray(a_n)
    r_n = np.asarray(r_n)
    if a_n.ndim != 2 or r_n.shape != (a_n.shape[1],):
        raise ValueError(f"r_n shape {r_n.shape} does not match a_n shape {a_n.shape}")
    if not sigma_w2 > 0:
        raise ValueError("sigma_w2 must be positive; use highsnr_bin for the noise-free limit")
    m, k = a_n.shape
    gram = matmul(hermitian(a_n), a_n)
    inverse = invert_hpd(gram + sigma_w2 * np.eye(k))
    unbias = elem_inverse(diag_of_product(inverse, gram))
    estimate = hadamard(unbias, m * matmul(inverse, r_n))
    return estimate, inverse


def lowsnr_bin(a_n, y_n) -> np.ndarray:
    """Noise-dominated limit: diagonally-unbiased matched filter.

    Computes ``inv(diag(A^H A)) A^H y``; no noise variance is needed.  A
    vanishing diagonal entry (an all-zero channel column) raises
    :class:`~fdmud.numerics.DegenerateScaleError`.
    """
    a_n, y_n = _check_bin_args(a_n, y_n)
    column_power = diag_of_product(hermitian(a_n), a_n)
    return hadamard(elem_inverse(column_power), matmul(hermitian(a_n), y_n))


def highsnr_bin(a_n, y_n) -> np.ndarray:
    """Zero-forcing limit ``(A^H A)^-1 A^H y``; exact on noise-free input.

    Raises :class:`~fdmud.numerics.SingularMatrixError` when ``a_n`` is not
    full column rank.
    """
    a_n, y_n = _check_bin_args(a_n, y_n, tall=True)
    gram = matmul(hermitian(a_n), a_n)
    return solve_hpd(gram, matmul(hermitian(a_n), y_n))


def _invert_gram_stack(gram: np.ndarray, shift: float) -> np.ndarray:
    """Invert every (K x K) slice of a Gram stack, annotating failures by bin."""
    n, k, _ = gram.shape
    eye = shift * np.eye(k)
    out = np.empty_like(gram)
    for idx in range(n):
        try:
            out[idx] = invert_hpd(gram[idx] + eye)
        except SingularMatrixError as exc:
            raise SingularMatrixError(f"bin {idx}: {exc}") from exc
    return out


def _column_power_stack(a: np.ndarray) -> np.ndarray:
    """diag(A_n^H A_n) for every bin: shape (N, K), real."""
    power = np.einsum("nmk,nmk->nk", a.conj(), a).real
    if np.any(power <= 0):
        bad = int(np.argwhere(power <= 0)[0][0])
        raise DegenerateScaleError(f"bin {bad}: zero-power channel column")
    return power


def detect_frame(
    rf: ReceivedFrame, bc: BinChannel, sigma_w2: float, kind: DetectorKind
) -> DetectionResult:
    """Run one detector over all N bins and return time-domain estimates.

    The received frame must already be in the frequency domain.  Bins are
    processed independently (the implementation batches them for speed, which
    is observationally identical to a per-bin loop).  For
    ``DetectorKind.MRC_MMSE`` the per-bin K x K inverses are collected into an
    :class:`InverseCache` on the result.
    """
    if rf.domain != FREQUENCY:
        raise ValueError("detect_frame requires a frequency-domain frame")
    a = np.asarray(bc.a)
    y = np.asarray(rf.samples)
    n_bins, m_ant, k_usr = a.shape
    if y.shape != (m_ant, n_bins):
        raise ValueError(f"frame shape {y.shape} does not match bin channels {a.shape}")

    a_h = a.conj().transpose(0, 2, 1)  # (N, K, M)
    matched = np.matmul(a_h, y.T[:, :, np.newaxis])[..., 0]  # (N, K): A^H y per bin
    cache = None

    if kind is DetectorKind.MMSE:
        if not sigma_w2 > 0:
            raise ValueError("sigma_w2 must be positive for the MMSE detector")
        est = np.empty((n_bins, k_usr), dtype=np.complex128)
        for idx in range(n_bins):
            try:
                est[idx] = mmse_bin(a[idx], y[:, idx], sigma_w2)
            except SingularMatrixError as exc:
                raise SingularMatrixError(f"bin {idx}: {exc}") from exc
    elif kind is DetectorKind.MRC_MMSE:
        if not sigma_w2 > 0:
            raise ValueError("sigma_w2 must be positive for the MRC-MMSE detector")
        gram = np.matmul(a_h, a)  # (N, K, K)
        inverses = _invert_gram_stack(gram, sigma_w2)
        raw = np.matmul(inverses, matched[:, :, np.newaxis])[..., 0]
        unbias = 1.0 / np.einsum("nij,nji->ni", inverses, gram)
        est = unbias * raw
        cache = InverseCache(inv=inverses, sigma_w2=float(sigma_w2))
    elif kind is DetectorKind.TR_MRC:
        # Combined statistic scaled per user by M / diag(A^H A): the
        # diagonal unbias that makes its error split cleanly into
        # interference plus noise.
        combined = matched / m_ant
        est = combined * (m_ant / _column_power_stack(a))
    elif kind is DetectorKind.LOW_SNR:
        est = matched / _column_power_stack(a)
    elif kind is DetectorKind.HIGH_SNR_ZF:
        gram = np.matmul(a_h, a)
        inverses = _invert_gram_stack(gram, 0.0)
        est = np.matmul(inverses, matched[:, :, np.newaxis])[..., 0]
    else:
        raise ValueError(f"unknown detector kind: {kind!r}")

    s_hat_time = np.fft.ifft(est.T, axis=1, norm="ortho")
    return DetectionResult(s_hat_time=s_hat_time, kind=kind, cache=cache)
