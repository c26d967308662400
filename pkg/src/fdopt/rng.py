"""Deterministic random streams built on splitmix64.

All randomness in the package flows through :class:`SplitMix64` so that runs
are reproducible bit-for-bit across processes, and reproducible across
languages up to libm rounding. The scheme, fixed here and relied on by the
representation-parameter oracle tests:

* state update: ``state += 0x9E3779B97F4A7C15`` (mod 2^64), output is the
  splitmix64 finalizer of the new state;
* a uniform double in [0, 1) takes the top 53 bits: ``(x >> 11) * 2**-53``;
* standard normals come from Box-Muller pairs, two uniforms per pair, even
  consumption (``normals(n)`` always draws ``2 * ceil(n / 2)`` uniforms).
"""

from __future__ import annotations

import struct

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(x: int) -> int:
    """splitmix64 finalizer on a 64-bit integer."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & _MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & _MASK64
    return x ^ (x >> 31)


def _token_bits(part) -> int:
    if isinstance(part, str):
        # FNV-1a over UTF-8 bytes
        h = 0xCBF29CE484222325
        for byte in part.encode("utf-8"):
            h = ((h ^ byte) * 0x100000001B3) & _MASK64
        return h
    if isinstance(part, (bool, int, np.integer)):
        return int(part) & _MASK64
    if isinstance(part, float):
        return int.from_bytes(struct.pack("<d", part), "little")
    raise TypeError(f"cannot derive a seed from {type(part).__name__}")


def derive_seed(*parts) -> int:
    """Fold ints/floats/strings into a 64-bit stream seed, order-sensitive."""
    acc = _GOLDEN
    for part in parts:
        acc = mix64(acc ^ _token_bits(part))
        acc = (acc + _GOLDEN) & _MASK64
    return mix64(acc)


class SplitMix64:
    """Counter-style splitmix64 stream with vectorized draws."""

    def __init__(self, seed: int):
        self._state = int(seed) & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return mix64(self._state)

    def _raw(self, n: int) -> np.ndarray:
        # states are seed + GOLDEN * k, so a block can be produced in one shot
        offsets = np.arange(1, n + 1, dtype=np.uint64)
        states = np.uint64(self._state) + np.uint64(_GOLDEN) * offsets
        self._state = (self._state + n * _GOLDEN) & _MASK64
        z = states
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        return z ^ (z >> np.uint64(31))

    def uniforms(self, n: int) -> np.ndarray:
        """n doubles uniform on [0, 1)."""
        if n < 0:
            raise ValueError("n must be nonnegative")
        if n == 0:
            return np.empty(0, dtype=np.float64)
        bits = self._raw(n) >> np.uint64(11)
        return bits.astype(np.float64) * (2.0 ** -53)

    def normals(self, n: int) -> np.ndarray:
        """n standard normals via Box-Muller."""
        if n == 0:
            return np.empty(0, dtype=np.float64)
        pairs = (n + 1) // 2
        u1 = self.uniforms(pairs)
        u2 = self.uniforms(pairs)
        # 1 - u1 lies in (0, 1], keeping the log finite
        radius = np.sqrt(-2.0 * np.log1p(-u1))
        angle = (2.0 * np.pi) * u2
        out = np.empty(2 * pairs, dtype=np.float64)
        out[0::2] = radius * np.cos(angle)
        out[1::2] = radius * np.sin(angle)
        return out[:n]

    def normal_matrix(self, rows: int, cols: int) -> np.ndarray:
        return self.normals(rows * cols).reshape(rows, cols)

    def spawn(self, *parts) -> "SplitMix64":
        """Child stream keyed by this stream's next output plus labels."""
        return SplitMix64(derive_seed(self.next_u64(), *parts))
