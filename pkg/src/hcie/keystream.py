"""Fixed-point logistic-map keystream.

Values are raw unsigned integers: a state ``x`` with ``L`` fractional bits is
stored as ``x * 2**L``, and the control parameter ``mu`` (2 integer bits,
``L - 2`` fractional bits) as ``mu * 2**(L-2)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import math

import numpy as np

from . import _backend
from .errors import ParamError, StreamExhaustedError

DEFAULT_PRECISION = 32
MIN_PRECISION = 2


def _to_fixed(value, frac_bits: int) -> int:
    # Fraction(str) keeps decimal inputs exact, then truncate toward zero
    return math.floor(Fraction(str(value)) * (1 << frac_bits))


@dataclass(frozen=True)
class Key:
    """Secret key ``(x0, mu)`` at ``precision`` bits, as raw fixed-point integers."""

    x0: int
    mu: int
    precision: int = DEFAULT_PRECISION

    def __post_init__(self):
        L = self.precision
        if L < MIN_PRECISION:
            raise ParamError(f"precision must be >= {MIN_PRECISION}, got {L}")
        if not 0 < self.x0 < (1 << L):
            raise ParamError(f"x0 must satisfy 0 < x0 < 1 (raw value {self.x0} at {L} bits)")
        if not 0 < self.mu <= (1 << L):
            raise ParamError(f"mu must satisfy 0 < mu <= 4 (raw value {self.mu} at {L} bits)")

    @classmethod
    def from_real(cls, x0, mu, precision: int = DEFAULT_PRECISION) -> Key:
        """Key from decimal values, truncated to the fixed-point grid."""
        if precision < MIN_PRECISION:
            raise ParamError(f"precision must be >= {MIN_PRECISION}, got {precision}")
        return cls(_to_fixed(x0, precision), _to_fixed(mu, precision - 2), precision)

    @property
    def x0_real(self) -> float:
        return self.x0 / (1 << self.precision)

    @property
    def mu_real(self) -> float:
        return self.mu / (1 << (self.precision - 2))

    def __str__(self):
        return f"x0={self.x0_real!r} mu={self.mu_real!r} L={self.precision}"


DEFAULT_KEY = Key.from_real("0.3141592653589793", "3.9999999", DEFAULT_PRECISION)


def logistic_next(x: int, mu: int, precision: int) -> int:
    """One step of ``mu * x * (1 - x)`` in fixed point.

    ``x * (1 - x)`` is truncated back to ``precision`` fractional bits before
    the multiplication by ``mu``, which is truncated again.  The exact value 1
    (reachable only as ``4 * 0.5 * 0.5``) saturates to ``1 - 2**-precision``.
    """
    one = 1 << precision
    y = (mu * ((x * (one - x)) >> precision)) >> (precision - 2)
    return min(y, one - 1)


class BitStream:
    """Keystream bits with a read cursor.  Not safe to share between threads."""

    def __init__(self, bits):
        self.bits = np.asarray(bits, dtype=np.uint8)
        self.bits.flags.writeable = False
        self.cursor = 0

    def __len__(self):
        return self.bits.size

    @property
    def remaining(self) -> int:
        return self.bits.size - self.cursor

    def take(self, count: int) -> np.ndarray:
        if count < 0:
            raise ParamError("cannot take a negative number of bits")
        if self.cursor + count > self.bits.size:
            raise StreamExhaustedError(
                f"requested {count} bits at {self.cursor}, stream holds {self.bits.size}"
            )
        out = self.bits[self.cursor:self.cursor + count]
        self.cursor += count
        return out


def generate_bitstream(key: Key, length: int) -> BitStream:
    """``length`` bits: the top 8 fractional bits of x(1), x(2), ..., MSB first."""
    if length < 1:
        raise ParamError("bitstream length must be >= 1")
    states = -(-length // 8)
    raw = _backend.logistic_bytes(key.x0, key.mu, key.precision, states)
    return BitStream(np.unpackbits(raw)[:length])


def bits_to_text(bits) -> str:
    return "".join("1" if b else "0" for b in np.asarray(bits).ravel())
