"""Deterministic random streams for reproducible simulation.

Every random draw in this package flows from a 64-bit integer seed through
a counter-based uniform generator (Philox), so identical seeds reproduce
identical values regardless of call order or parallel scheduling.  Normal
variates are produced by the Box-Muller transform applied to that uniform
stream; complex Gaussians take one Box-Muller pair per entry.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# splitmix64 constants (Steele/Lea/Flood generator, public domain)
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def splitmix64(x: int) -> int:
    """One splitmix64 step: 64-bit add-gamma then xor-shift-multiply finalizer."""
    x = (x + _GAMMA) & _MASK64
    z = (x ^ (x >> 30)) * _MIX1 & _MASK64
    z = (z ^ (z >> 27)) * _MIX2 & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def mix_seed(*components: int) -> int:
    """Fold integer components into a single 64-bit seed.

    The running state is xored with each component and passed through
    splitmix64, so the result depends on both the values and their order.
    This is the documented mixing function behind all derived seeds
    (per-trial, per-purpose sub-streams).
    """
    acc = 0x8BADF00D5EEDC0DE
    for c in components:
        acc = splitmix64(acc ^ (int(c) & _MASK64))
    return acc


def uniform_stream(seed: int) -> np.random.Generator:
    """Counter-based uniform stream (Philox) keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=seed & _MASK64))


def normal_pairs(gen: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw n independent N(0,1) pairs via Box-Muller on the uniform stream.

    u1 is mapped into (0, 1] so the logarithm stays finite.
    """
    u1 = 1.0 - gen.random(n)
    u2 = gen.random(n)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = (2.0 * np.pi) * u2
    return radius * np.cos(angle), radius * np.sin(angle)


def complex_normal(gen: np.random.Generator, n: int, variance: float = 1.0) -> np.ndarray:
    """n circularly-symmetric complex Gaussians with per-entry variance `variance`.

    Each entry uses one Box-Muller pair, variance/2 per real dimension.
    """
    z0, z1 = normal_pairs(gen, n)
    return np.sqrt(variance / 2.0) * (z0 + 1j * z1)
