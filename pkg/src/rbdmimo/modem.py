"""Gray-mapped square QAM and AWGN injection.

Bit-to-symbol convention (fixed for reproducibility, arbitrary otherwise):
the first half of each symbol's bits drives the in-phase axis and the
second half the quadrature axis.  Within an axis the bit group is read
MSB first as a binary-reflected Gray codeword, with the all-zeros word
mapping to the most negative amplitude level.  Constellations are scaled
to unit average symbol energy.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linalg import as_complex_vector
from .rngstream import complex_normal, uniform_stream

SUPPORTED_ORDERS = (4, 16, 64)


@dataclass(frozen=True)
class QamSpec:
    order: int
    bits_per_symbol: int
    scale: float


def qam_spec(order: int) -> QamSpec:
    """Constellation parameters for a supported square order (4, 16, 64)."""
    if order not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported QAM order {order}, expected one of {SUPPORTED_ORDERS}")
    bits_per_symbol = int(np.log2(order))
    side = 1 << (bits_per_symbol // 2)
    levels = 2 * np.arange(side) - (side - 1)
    scale = 1.0 / np.sqrt(2.0 * np.mean(levels.astype(float) ** 2))
    return QamSpec(order=order, bits_per_symbol=bits_per_symbol, scale=float(scale))


@lru_cache(maxsize=8)
def _axis_tables(order: int):
    """Per-axis lookup tables: Gray codeword <-> level index <-> level."""
    side = int(round(np.sqrt(order)))
    idx = np.arange(side)
    idx_to_gray = idx ^ (idx >> 1)
    gray_to_idx = np.empty(side, dtype=np.int64)
    gray_to_idx[idx_to_gray] = idx
    levels = (2 * idx - (side - 1)).astype(np.float64)
    for t in (idx_to_gray, gray_to_idx, levels):
        t.flags.writeable = False
    return idx_to_gray, gray_to_idx, levels


def qam_modulate(bits, spec: QamSpec) -> np.ndarray:
    """Map a {0,1} bit block onto unit-energy QAM symbols."""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.ndim != 1 or bits.size % spec.bits_per_symbol != 0:
        raise ValueError(
            f"bit count {bits.size} is not a multiple of bits_per_symbol={spec.bits_per_symbol}"
        )
    if bits.size and (bits.min() < 0 or bits.max() > 1):
        raise ValueError("bits must be 0 or 1")
    _, gray_to_idx, levels = _axis_tables(spec.order)
    half = spec.bits_per_symbol // 2
    groups = bits.reshape(-1, spec.bits_per_symbol)
    weights = 1 << np.arange(half - 1, -1, -1)
    gray_i = groups[:, :half] @ weights
    gray_q = groups[:, half:] @ weights
    return spec.scale * (levels[gray_to_idx[gray_i]] + 1j * levels[gray_to_idx[gray_q]])


def qam_demodulate_hard(symbols, spec: QamSpec) -> np.ndarray:
    """Hard slicing to the nearest constellation point, returning its bits.

    Per-axis threshold slicing; equivalent to full nearest-neighbor search
    over the constellation because the lattice is separable.
    """
    symbols = as_complex_vector(symbols)
    idx_to_gray, _, _ = _axis_tables(spec.order)
    side = idx_to_gray.shape[0]
    half = spec.bits_per_symbol // 2
    shifts = np.arange(half - 1, -1, -1)

    def slice_axis(u):
        i = np.clip(np.rint((u / spec.scale + (side - 1)) / 2.0), 0, side - 1).astype(np.int64)
        gray = idx_to_gray[i]
        return (gray[:, None] >> shifts) & 1

    bits = np.empty((symbols.size, spec.bits_per_symbol), dtype=np.int64)
    bits[:, :half] = slice_axis(symbols.real)
    bits[:, half:] = slice_axis(symbols.imag)
    return bits.reshape(-1)


def awgn_add(x, sigma2: float, rng_seed: int) -> np.ndarray:
    """Add circularly-symmetric complex Gaussian noise of per-entry variance sigma2."""
    if sigma2 < 0:
        raise ValueError(f"sigma2 must be >= 0, got {sigma2}")
    x = as_complex_vector(x)
    gen = uniform_stream(rng_seed)
    return x + complex_normal(gen, x.size, variance=sigma2)
