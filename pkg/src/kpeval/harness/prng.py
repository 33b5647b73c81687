"""Marsaglia xorshift128 generator.

The algorithm is fixed so that synthetic fixtures can be regenerated
bit-for-bit by any implementation:

    t = x ^ (x << 11)
    x, y, z = y, z, w
    w = w ^ (w >> 19) ^ t ^ (t >> 8)

all on 32-bit words, with the state seeded as ``x = seed mod 2**32``,
``y = 362436069``, ``z = 521288629``, ``w = 88675123``. Each call to
``next_u32`` performs one step and returns ``w``.
"""

from __future__ import annotations

MASK32 = 0xFFFFFFFF
DEFAULT_Y = 362436069
DEFAULT_Z = 521288629
DEFAULT_W = 88675123
_TWO_32 = 4294967296.0


class Xorshift128:
    """Seeded 32-bit xorshift128 stream."""

    def __init__(self, seed: int) -> None:
        self.seed = seed
        self._x = seed & MASK32
        self._y = DEFAULT_Y
        self._z = DEFAULT_Z
        self._w = DEFAULT_W

    @property
    def state(self) -> tuple[int, int, int, int]:
        """Current (x, y, z, w) words."""
        return self._x, self._y, self._z, self._w

    def next_u32(self) -> int:
        """Advance one step and return the new 32-bit word."""
        t = (self._x ^ (self._x << 11)) & MASK32
        self._x, self._y, self._z = self._y, self._z, self._w
        self._w = (self._w ^ (self._w >> 19) ^ t ^ (t >> 8)) & MASK32
        return self._w

    def uniform(self) -> float:
        """A float in [0, 1) from one 32-bit word."""
        return self.next_u32() / _TWO_32

    def below(self, n: int) -> int:
        """An integer in [0, n) by reduction modulo n.

        Raises:
            ValueError: If n is not positive
        """
        if n <= 0:
            msg = f"Upper bound must be positive, got {n}"
            raise ValueError(msg)
        return self.next_u32() % n

    def chance(self, p: float) -> bool:
        """True with probability ``p``; draws nothing when p is 0 or 1."""
        if p <= 0.0:
            return False
        if p >= 1.0:
            return True
        return self.uniform() < p
