"""Downlink MMSE precoder with uplink matrix-inverse reuse.

In a TDD system the downlink per-bin inverse ``(A^T A^* + sigma_w2 I)^-1`` is
the entry-wise complex conjugate of the uplink inverse already computed by
the MRC-MMSE detector, so precoding can reuse the cached uplink inverses at
the cost of a conjugation.  Per-user unbiasing scalars mirror the uplink
convention: the noiseless end-to-end gain of each user is unity before the
per-user amplitude allocation is applied.

Only the precoder algebra lives here; end-to-end downlink performance
evaluation is out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import BinChannel
from .detect import InverseCache
from .frame import SymbolFrame
from .numerics import (
    SingularMatrixError,
    diag_of_product,
    elem_inverse,
    invert_hpd,
    matmul,
)

__all__ = [
    "PowerAllocation",
    "PrecodeResult",
    "dl_inverse_from_cache",
    "mmse_precode_bin",
    "precode_frame",
]


@dataclass(frozen=True)
class PowerAllocation:
    """Per-user amplitude scalars (the diagonal of the power-allocation root).

    The all-ones default transmits equal power toward every user.
    """

    p_sqrt: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p_sqrt, dtype=np.float64)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("p_sqrt must be a nonempty 1-D vector")
        if not np.all(p > 0):
            raise ValueError("p_sqrt entries must be positive")
        object.__setattr__(self, "p_sqrt", p)

    @classmethod
    def uniform(cls, num_users: int) -> "PowerAllocation":
        return cls(p_sqrt=np.ones(num_users))


@dataclass(frozen=True)
class PrecodeResult:
    """M x N frequency-domain transmit samples and the K x N unbiasing scalars."""

    x: np.ndarray
    beta_used: np.ndarray

    @property
    def transmit_power(self) -> float:
        """Total radiated power across antennas and bins (diagnostic; no
        sum-power normalization is applied by the precoder)."""
        return float(np.sum(np.abs(self.x) ** 2))


def dl_inverse_from_cache(cache: InverseCache, n: int) -> np.ndarray:
    """Downlink inverse for bin n, obtained by conjugating the uplink one.

    ``conj(inv[n])`` equals ``(A_n^T A_n^* + sigma_w2 I)^-1`` exactly, since
    ``A^T A^*`` is the conjugate of ``A^H A``.
    """
    if not 0 <= n < cache.inv.shape[0]:
        raise IndexError(f"bin {n} not present in cache of {cache.inv.shape[0]} bins")
    return np.conj(cache.inv[n])


def _dl_unbias(a_n: np.ndarray, dl_inv: np.ndarray) -> np.ndarray:
    """Per-user scale making the noiseless end-to-end downlink gain unity."""
    gram_dl = matmul(a_n.T, np.conj(a_n))  # A^T A^*
    return elem_inverse(diag_of_product(gram_dl, dl_inv)).real


def mmse_precode_bin(a_n, s_n, sigma_w2: float, power: PowerAllocation, dl_inv) -> np.ndarray:
    """Precode one bin's K symbols into M transmit samples.

    Computes ``A^* dl_inv P^(1/2) (beta o s)`` with ``beta`` the per-user
    unbiasing of :func:`_dl_unbias`; ``dl_inv`` must be the downlink inverse
    consistent with ``(a_n, sigma_w2)``, e.g. from
    :func:`dl_inverse_from_cache`.
    """
    a_n = np.asarray(a_n)
    s_n = np.asarray(s_n)
    dl_inv = np.asarray(dl_inv)
    if a_n.ndim != 2:
        raise ValueError(f"a_n must be 2-D, got shape {a_n.shape}")
    k = a_n.shape[1]
    if s_n.shape != (k,) or dl_inv.shape != (k, k) or power.p_sqrt.shape != (k,):
        raise ValueError(
            f"inconsistent shapes: a_n {a_n.shape}, s_n {s_n.shape}, "
            f"dl_inv {dl_inv.shape}, p_sqrt {power.p_sqrt.shape}"
        )
    if sigma_w2 < 0:
        raise ValueError("sigma_w2 must be non-negative")
    beta = _dl_unbias(a_n, dl_inv)
    return matmul(np.conj(a_n), matmul(dl_inv, power.p_sqrt * beta * s_n))


def precode_frame(
    sf: SymbolFrame,
    bc: BinChannel,
    sigma_w2: float,
    power: Optional[PowerAllocation] = None,
    cache: Optional[InverseCache] = None,
) -> PrecodeResult:
    """Precode a whole symbol frame into M frequency-domain transmit streams.

    Symbols are transformed per user with the unitary DFT and each bin is
    precoded independently.  When ``cache`` is given, the downlink inverses
    are its conjugated entries; otherwise they are computed directly.  Both
    paths agree to rounding, which the test suite checks.

    No transmit sum-power renormalization is applied; callers wanting a power
    diagnostic can take ``norm(x)**2`` themselves.
    """
    symbols = np.asarray(sf.symbols)
    a = np.asarray(bc.a)
    n_bins, m_ant, k_usr = a.shape
    if symbols.shape != (k_usr, n_bins):
        raise ValueError(f"symbol frame {symbols.shape} does not match bin channels {a.shape}")
    if power is None:
        power = PowerAllocation.uniform(k_usr)
    if power.p_sqrt.shape != (k_usr,):
        raise ValueError(f"power allocation has {power.p_sqrt.size} entries, need {k_usr}")

    s_fd = np.fft.fft(symbols, axis=1, norm="ortho").T  # (N, K)
    gram_dl = np.matmul(a.transpose(0, 2, 1), a.conj())  # (N, K, K): A^T A^*

    if cache is not None:
        if cache.inv.shape != (n_bins, k_usr, k_usr):
            raise ValueError(f"cache shape {cache.inv.shape} does not match {( n_bins, k_usr, k_usr)}")
        if not np.isclose(cache.sigma_w2, sigma_w2):
            raise ValueError(
                f"cache was built for sigma_w2={cache.sigma_w2}, precoder asked for {sigma_w2}"
            )
        dl_inv = np.conj(cache.inv)
    else:
        dl_inv = np.empty_like(gram_dl)
        eye = sigma_w2 * np.eye(k_usr)
        for idx in range(n_bins):
            try:
                dl_inv[idx] = invert_hpd(gram_dl[idx] + eye)
            except SingularMatrixError as exc:
                raise SingularMatrixError(f"bin {idx}: {exc}") from exc

    beta = 1.0 / np.einsum("nij,nji->ni", gram_dl, dl_inv).real  # (N, K)
    scaled = power.p_sqrt[np.newaxis, :] * beta * s_fd
    x = np.matmul(a.conj(), np.matmul(dl_inv, scaled[:, :, np.newaxis]))[..., 0]  # (N, M)
    return PrecodeResult(x=x.T, beta_used=beta.T)
