"""Extended-range positive magnitudes for products of weights.

Products of weights overflow doubles quickly (the paper's shifts reach
2**50000 within a few hundred thousand indices), so magnitudes carry either
an exact representation or a base-2 logarithm with an error bound.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

TAU = 1e-9
EPS = 2.0 ** -52


def power_of_two_exponent(q: Fraction) -> Optional[int]:
    """Return ``e`` with ``q == 2**e``, or None when ``q`` is not a power of two."""
    q = Fraction(q)
    if q <= 0:
        return None
    num, den = q.numerator, q.denominator
    if num & (num - 1) or den & (den - 1):
        return None
    return (num.bit_length() - 1) - (den.bit_length() - 1)


def floor_log2(q: Fraction) -> int:
    """Exact ``floor(log2(q))`` for a positive rational."""
    q = Fraction(q)
    if q <= 0:
        raise ValueError("floor_log2 needs a positive argument")
    e = q.numerator.bit_length() - q.denominator.bit_length()
    # 2**e <= q < 2**(e+1) after at most one correction
    if _pow2(e) > q:
        e -= 1
    return e


def ceil_log2(q: Fraction) -> int:
    """Exact ``ceil(log2(q))`` for a positive rational."""
    e = floor_log2(q)
    return e if _pow2(e) == q else e + 1


def log2_fraction(q: Fraction) -> float:
    """Accurate float log2 of a positive rational of any size."""
    q = Fraction(q)
    return _log2_int(q.numerator) - _log2_int(q.denominator)


def _log2_int(n: int) -> float:
    shift = max(n.bit_length() - 60, 0)
    return math.log2(n >> shift) + shift


@functools.lru_cache(maxsize=1 << 16)
def _pow2_magnitude(e: int) -> "LogMagnitude":
    # instances are immutable, so orbit sweeps can share them
    return LogMagnitude("pow2", float(e), exponent=e)


def _pow2(e: int) -> Fraction:
    return Fraction(2 ** e) if e >= 0 else Fraction(1, 2 ** -e)


@dataclass(frozen=True)
class LogMagnitude:
    """A non-negative magnitude.

    ``kind`` is one of ``"zero"``, ``"pow2"`` (exactly ``2**exponent``),
    ``"rational"`` (exactly ``value``) or ``"approx"`` (``2**log2`` up to a
    log-domain error of ``err``).
    """

    kind: str
    log2: float
    exponent: int = 0
    value: Optional[Fraction] = None
    err: float = 0.0

    @classmethod
    def pow2(cls, e: int) -> "LogMagnitude":
        return _pow2_magnitude(int(e))

    @classmethod
    def rational(cls, q: Fraction) -> "LogMagnitude":
        q = Fraction(q)
        if q == 0:
            return ZERO
        return cls("rational", log2_fraction(q), value=q)

    @classmethod
    def approx(cls, log2: float, err: float) -> "LogMagnitude":
        return cls("approx", log2, err=err)

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"

    @property
    def is_exact(self) -> bool:
        return self.kind != "approx"

    def exact_value(self) -> Fraction:
        if self.kind == "zero":
            return Fraction(0)
        if self.kind == "pow2":
            return _pow2(self.exponent)
        if self.kind == "rational":
            return self.value
        raise ValueError("approximate magnitude has no exact value")

    def __mul__(self, other: "LogMagnitude") -> "LogMagnitude":
        if self.is_zero or other.is_zero:
            return ZERO
        if self.kind == other.kind == "pow2":
            return LogMagnitude.pow2(self.exponent + other.exponent)
        if self.is_exact and other.is_exact:
            return LogMagnitude.rational(self.exact_value() * other.exact_value())
        lg = self.log2 + other.log2
        return LogMagnitude.approx(lg, self.err + other.err + EPS * abs(lg))

    def __truediv__(self, other: "LogMagnitude") -> "LogMagnitude":
        if other.is_zero:
            raise ZeroDivisionError("division by a zero magnitude")
        if self.is_zero:
            return ZERO
        if self.kind == other.kind == "pow2":
            return LogMagnitude.pow2(self.exponent - other.exponent)
        if self.is_exact and other.is_exact:
            return LogMagnitude.rational(self.exact_value() / other.exact_value())
        lg = self.log2 - other.log2
        return LogMagnitude.approx(lg, self.err + other.err + EPS * abs(lg))

    def compare(self, c: Fraction, tau: float = TAU) -> Tuple[int, bool]:
        """Compare with a positive rational threshold.

        Returns ``(sign, borderline)`` where sign is -1, 0 or 1 for
        ``self <, ==, > c``. Exact kinds are never borderline.
        """
        c = Fraction(c)
        if self.is_zero:
            return (-1 if c > 0 else 0), False
        if self.kind == "pow2":
            fl = floor_log2(c)
            if self.exponent > fl:
                return 1, False
            if self.exponent < fl:
                return -1, False
            return (0 if _pow2(fl) == c else -1), False
        if self.kind == "rational":
            v = self.value
            return (v > c) - (v < c), False
        d = self.log2 - log2_fraction(c)
        sign = (d > 0) - (d < 0)
        return sign, abs(d) <= tau + self.err

    def __float__(self) -> float:
        if self.is_zero:
            return 0.0
        if self.kind == "rational":
            return float(self.value)
        return 2.0 ** self.log2 if self.log2 < 1024 else math.inf


ZERO = LogMagnitude("zero", -math.inf)
ONE = LogMagnitude.pow2(0)
