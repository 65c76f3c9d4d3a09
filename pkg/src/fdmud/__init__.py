"""Frequency-domain multi-user detection for cyclic-prefix single-carrier massive MIMO."""

from .channel import (
    BinChannel,
    ChannelConfig,
    ChannelRealization,
    build_circulant,
    draw_channel,
    dump_taps,
    load_taps,
    to_bin_channels,
)
from .detect import (
    DetectionResult,
    DetectorKind,
    InverseCache,
    detect_frame,
    highsnr_bin,
    lowsnr_bin,
    mmse_bin,
    mrc_bin,
    mrcmmse_bin,
)
from .frame import (
    FrameConfig,
    ReceivedFrame,
    SymbolFrame,
    bin_vector,
    constellation_points,
    generate_symbols,
    to_frequency_domain,
    transmit,
)
from .harness import (
    ComplexityReport,
    ScenarioConfig,
    SinrReport,
    SinrRow,
    capacity,
    complexity_sweep,
    count_mults_mmse,
    count_mults_mrcmmse,
    measure_sinr,
    run_monte_carlo,
    theoretical_gains,
)
from .numerics import (
    DegenerateScaleError,
    SingularMatrixError,
    conj,
    dft_unitary,
    dft_unnormalized,
    diag_of_product,
    elem_inverse,
    hadamard,
    hermitian,
    idft_unitary,
    invert_hpd,
    matmul,
)
from .precode import (
    PowerAllocation,
    PrecodeResult,
    dl_inverse_from_cache,
    mmse_precode_bin,
    precode_frame,
)

__version__ = "0.1.0"

__all__ = [
    "BinChannel",
    "ChannelConfig",
    "ChannelRealization",
    "ComplexityReport",
    "DegenerateScaleError",
    "DetectionResult",
    "DetectorKind",
    "FrameConfig",
    "InverseCache",
    "PowerAllocation",
    "PrecodeResult",
    "ReceivedFrame",
    "ScenarioConfig",
    "SingularMatrixError",
    "SinrReport",
    "SinrRow",
    "SymbolFrame",
    "bin_vector",
    "build_circulant",
    "capacity",
    "complexity_sweep",
    "conj",
    "constellation_points",
    "count_mults_mmse",
    "count_mults_mrcmmse",
    "detect_frame",
    "dft_unitary",
    "dft_unnormalized",
    "diag_of_product",
    "dl_inverse_from_cache",
    "draw_channel",
    "dump_taps",
    "elem_inverse",
    "generate_symbols",
    "hadamard",
    "hermitian",
    "highsnr_bin",
    "idft_unitary",
    "invert_hpd",
    "load_taps",
    "lowsnr_bin",
    "matmul",
    "measure_sinr",
    "mmse_bin",
    "mmse_precode_bin",
    "mrc_bin",
    "mrcmmse_bin",
    "precode_frame",
    "run_monte_carlo",
    "theoretical_gains",
    "to_bin_channels",
    "to_frequency_domain",
    "transmit",
]
