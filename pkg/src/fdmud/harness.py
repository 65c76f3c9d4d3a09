"""Complexity model, SINR metrology, Monte-Carlo runner and CSV reports.

The complexity model counts complex multiplies per frequency bin for the two
MMSE formulations under the standard costing rules: a P x P inversion is P^3
multiplies, a matrix product costs outer-times-inner, and extracting the
diagonal of a product costs inner-times-outer.  Complexity is modeled, never
measured.

SINR is measured genie-aided: the detectors are unbiased, the transmitted
symbols have unit energy, so per-user SINR is the reciprocal of the mean
squared error against the known truth.  Reported values average linear SINR
across users and frames first, then convert to dB.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .channel import ChannelConfig, draw_channel, to_bin_channels
from .detect import DetectionResult, DetectorKind, detect_frame
from .frame import FrameConfig, SymbolFrame, generate_symbols, to_frequency_domain, transmit
from .numerics import SingularMatrixError

__all__ = [
    "ScenarioConfig",
    "ComplexityReport",
    "SinrRow",
    "SinrReport",
    "count_mults_mmse",
    "count_mults_mrcmmse",
    "complexity_sweep",
    "measure_sinr",
    "theoretical_gains",
    "capacity",
    "run_monte_carlo",
]


def count_mults_mmse(num_antennas: int, num_users: int) -> int:
    """Complex multiplies per bin for the M x M-inverse MMSE formulation."""
    if num_antennas < 1 or num_users < 1:
        raise ValueError("antenna and user counts must be at least 1")
    m, k = num_antennas, num_users
    return k + 2 * k * m + 2 * k * m * m + m**3


def count_mults_mrcmmse(num_antennas: int, num_users: int) -> int:
    """Complex multiplies per bin for the K x K-inverse MRC-MMSE formulation."""
    if num_antennas < 1 or num_users < 1:
        raise ValueError("antenna and user counts must be at least 1")
    m, k = num_antennas, num_users
    return k + 2 * k * m + k**3 + 2 * k * k * m


@dataclass(frozen=True)
class ComplexityReport:
    """Rows of (M, K, mults_mmse, mults_mrcmmse)."""

    rows: tuple[tuple[int, int, int, int], ...]

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["M", "K", "mults_mmse", "mults_mrcmmse"])
        writer.writerows(self.rows)
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def complexity_sweep(m_list, k_max: int) -> ComplexityReport:
    """Per-bin multiply counts over a grid of antenna counts and user counts.

    For each M in ``m_list`` the user count runs from 1 to
    ``min(k_max, M - 1)``.
    """
    m_list = list(m_list)
    if not m_list or k_max < 1:
        raise ValueError("m_list must be nonempty and k_max >= 1")
    rows = []
    for m in m_list:
        for k in range(1, min(k_max, m - 1) + 1):
            rows.append((m, k, count_mults_mmse(m, k), count_mults_mrcmmse(m, k)))
    return ComplexityReport(rows=tuple(rows))


def measure_sinr(result: DetectionResult, truth: SymbolFrame) -> np.ndarray:
    """Per-user output SINR (linear) from the known-truth error vectors.

    With unit-energy symbols and an unbiased detector, per-user SINR is
    ``1 / mean(|s_hat - s|^2)`` over the frame.  A user with exactly zero
    error power gets an ``inf`` sentinel and a warning; callers exclude such
    values from dB averaging.
    """
    err = np.asarray(result.s_hat_time) - np.asarray(truth.symbols)
    if err.ndim != 2:
        raise ValueError("estimate/truth shape mismatch")
    err_power = np.mean(np.abs(err) ** 2, axis=1)
    if np.any(err_power == 0):
        warnings.warn("zero error power: reporting inf SINR sentinel", stacklevel=2)
    with np.errstate(divide="ignore"):
        return 1.0 / err_power


def theoretical_gains(num_antennas: int, num_users: int) -> tuple[float, float]:
    """(low-SNR, high-SNR) array-gain bounds, linear: (M, M - K)."""
    if not num_antennas > num_users:
        raise ValueError("need num_antennas > num_users")
    return float(num_antennas), float(num_antennas - num_users)


def capacity(rho: float, bandwidth_hz: float, gamma: float) -> float:
    """Achievable rate ``rho * W * log2(1 + gamma)`` in bits/s.

    ``rho`` is the non-prefix duty cycle, ``gamma`` the effective SNR
    (linear).
    """
    if not 0 < rho <= 1:
        raise ValueError("rho must lie in (0, 1]")
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth_hz must be positive")
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    return rho * bandwidth_hz * float(np.log2(1.0 + gamma))


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything the Monte-Carlo runner needs for one sweep."""

    channel: ChannelConfig
    frame: FrameConfig
    detectors: tuple[DetectorKind, ...] = (DetectorKind.MRC_MMSE, DetectorKind.TR_MRC)
    snr_sweep_db: tuple[float, ...] = tuple(float(v) for v in range(-30, 12, 2))
    frames_per_point: int = 20
    output: str | None = None

    def __post_init__(self):
        if self.frames_per_point < 1:
            raise ValueError("frames_per_point must be at least 1")
        if len(self.snr_sweep_db) == 0:
            raise ValueError("snr_sweep_db must be nonempty")
        if len(self.detectors) == 0:
            raise ValueError("at least one detector kind is required")


@dataclass(frozen=True)
class SinrRow:
    input_snr_db: float
    detector: DetectorKind
    mean_output_sinr_db: float
    gain_db: float
    gain_low_db: float
    gain_high_db: float
    n_frames: int
    n_failures: int = 0


@dataclass(frozen=True)
class SinrReport:
    """Measured SINR gains per sweep point and detector."""

    rows: tuple[SinrRow, ...]
    seed: int
    frames_per_point: int

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        buf.write(f"# seed={self.seed}\n")
        buf.write(f"# frames_per_point={self.frames_per_point}\n")
        buf.write("# averaging=mean-linear-sinr-over-users-and-frames-then-db\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            [
                "input_snr_db",
                "detector",
                "mean_output_sinr_db",
                "gain_db",
                "gain_low_db",
                "gain_high_db",
                "n_frames",
            ]
        )
        for r in self.rows:
            writer.writerow(
                [
                    f"{r.input_snr_db:.6g}",
                    r.detector.value,
                    f"{r.mean_output_sinr_db:.6f}",
                    f"{r.gain_db:.6f}",
                    f"{r.gain_low_db:.6f}",
                    f"{r.gain_high_db:.6f}",
                    r.n_frames,
                ]
            )
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def _stream_seed(seed: int, point: int, frame: int, tag: int) -> int:
    """Derived 64-bit seed for one per-frame stream; order-independent."""
    return int(np.random.SeedSequence((seed, point, frame, tag)).generate_state(1, np.uint64)[0])


def run_monte_carlo(cfg: ScenarioConfig) -> SinrReport:
    """Sweep input SNR, measuring output SINR per detector.

    Per sweep point and frame: draw a fresh channel, generate symbols,
    transmit with noise, and run each requested detector on the same received
    frame.  All randomness is keyed by (seed, point index, frame index), so
    identical configs produce byte-identical CSV output regardless of
    execution order.  Frames on which a detector fails are excluded from that
    detector's average and counted.
    """
    m_ant = cfg.channel.num_antennas
    k_usr = cfg.channel.num_users
    gain_low, gain_high = theoretical_gains(m_ant, k_usr)
    gain_low_db = 10.0 * np.log10(gain_low)
    gain_high_db = 10.0 * np.log10(gain_high)

    rows = []
    for p_idx, snr_db in enumerate(cfg.snr_sweep_db):
        fc = replace(cfg.frame, snr_db=float(snr_db))
        sigma_w2 = fc.sigma_w2
        sinr_acc = {kind: [] for kind in cfg.detectors}
        frames_ok = {kind: 0 for kind in cfg.detectors}
        failures = {kind: 0 for kind in cfg.detectors}
        for f_idx in range(cfg.frames_per_point):
            ch_cfg = replace(cfg.channel, seed=_stream_seed(cfg.channel.seed, p_idx, f_idx, 0))
            realization = draw_channel(ch_cfg)
            bins = to_bin_channels(realization)
            sym_rng = np.random.default_rng([cfg.channel.seed, p_idx, f_idx, 1])
            noise_rng = np.random.default_rng([cfg.channel.seed, p_idx, f_idx, 2])
            sf = generate_symbols(k_usr, fc.frame_len, fc.constellation, sym_rng)
            rf = to_frequency_domain(transmit(sf, realization, fc, noise_rng))
            for kind in cfg.detectors:
                try:
                    result = detect_frame(rf, bins, sigma_w2, kind)
                except SingularMatrixError:
                    failures[kind] += 1
                    continue
                sinr_acc[kind].append(measure_sinr(result, sf))
                frames_ok[kind] += 1
        for kind in cfg.detectors:
            per_user = np.concatenate(sinr_acc[kind]) if sinr_acc[kind] else np.array([])
            finite = per_user[np.isfinite(per_user)]
            if finite.size < per_user.size:
                warnings.warn(
                    f"{per_user.size - finite.size} infinite SINR values excluded "
                    f"({kind.value} at {snr_db} dB)",
                    stacklevel=2,
                )
            mean_db = 10.0 * np.log10(finite.mean()) if finite.size else float("nan")
            rows.append(
                SinrRow(
                    input_snr_db=float(snr_db),
                    detector=kind,
                    mean_output_sinr_db=float(mean_db),
                    gain_db=float(mean_db - snr_db),
                    gain_low_db=float(gain_low_db),
                    gain_high_db=float(gain_high_db),
                    n_frames=frames_ok[kind],
                    n_failures=failures[kind],
                )
            )

    report = SinrReport(
        rows=tuple(rows), seed=cfg.channel.seed, frames_per_point=cfg.frames_per_point
    )
    if cfg.output is not None:
        report.to_csv(cfg.output)
    return report
