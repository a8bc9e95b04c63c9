"""Declared block bounds for non-negative series and their closed-form tails.

A finite partial sum never certifies convergence on its own. Instead a
series is split into consecutive index blocks and a closed-form bound

    block_sum(n) <= (slope * n + intercept) * ratio**n,   0 <= ratio < 1,

is declared for every block ``n >= first``. The bound is checked against
every block that was actually computed, and the rest of the series is then
controlled by the exact arithmetico-geometric tail.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Callable, Iterable, List, Optional, Tuple, Union

Number = Union[int, Fraction, float]

# relative inflation applied to float tail bounds so rounding cannot undercut them
FLOAT_SLACK = 1e-12


def normalize_p(p: Real) -> Union[int, float]:
    """Return ``p`` as an int when integral (enables exact arithmetic)."""
    if isinstance(p, bool):
        raise TypeError("p must be a number")
    pf = float(p)
    if pf.is_integer():
        return int(pf)
    return pf


def inverse_power(base: Number, p: Union[int, float]) -> Number:
    """``base ** -p`` exactly when both are rational and p is an integer."""
    if isinstance(p, int) and not isinstance(base, float):
        return Fraction(1) / Fraction(base) ** p
    return float(base) ** -float(p)


def arith_geom_tail(slope: Number, intercept: Number, ratio: Number, start: int) -> Number:
    """Exact value of ``sum_{n >= start} (slope*n + intercept) * ratio**n``."""
    if not 0 <= ratio < 1:
        raise ValueError(f"ratio must lie in [0, 1), got {ratio}")
    if ratio == 0:
        return (slope * start + intercept) if start == 0 else type(ratio)(0)
    r_m = ratio ** start
    one = 1 - ratio
    geometric = r_m / one
    weighted = r_m * (start * one + ratio) / (one * one)
    total = slope * weighted + intercept * geometric
    if isinstance(total, float):
        total *= 1 + FLOAT_SLACK
    return total


@dataclass(frozen=True)
class BlockBound:
    """Declaration of a block-aggregated bound on a non-negative series.

    ``block(n)`` gives the half-open index range ``[lo, hi)`` of block ``n``;
    consecutive blocks must tile the indices. ``coefficients(p)`` returns
    ``(slope, intercept, ratio)`` for the exponent ``p``.
    """

    description: str
    first: int
    block: Callable[[int], Tuple[int, int]]
    coefficients: Callable[[Union[int, float]], Tuple[Number, Number, Number]]

    def bound(self, n: int, p) -> Number:
        slope, intercept, ratio = self.coefficients(p)
        return (slope * n + intercept) * ratio ** n

    def tail(self, start: int, p) -> Number:
        slope, intercept, ratio = self.coefficients(p)
        return arith_geom_tail(slope, intercept, ratio, start)


@dataclass
class SeriesCheck:
    """Outcome of validating a declared block bound against computed blocks."""

    partial_sum: Number
    blocks_validated: int
    last_block: Optional[int]
    last_index: int
    tail_bound: Optional[Number]
    valid: bool
    reason: str = ""
    checkpoints: List[Tuple[int, Number]] = field(default_factory=list)

    @property
    def upper_bound(self) -> Optional[Number]:
        if self.tail_bound is None:
            return None
        return self.partial_sum + self.tail_bound


def validate_blocks(
    declaration: BlockBound,
    block_sums: Iterable[Tuple[int, int, Number]],
    p,
    *,
    offset: Number = 0,
    max_checkpoints: int = 24,
) -> SeriesCheck:
    """Check ``(n, hi, block_sum)`` triples against the declaration.

    ``offset`` is the part of the series preceding the first block.
    All blocks must satisfy the declared bound; the tail starting after the
    last validated block is then the closed-form remainder.
    """
    try:
        slope, intercept, ratio = declaration.coefficients(p)
    except (ValueError, ZeroDivisionError) as exc:
        return SeriesCheck(offset, 0, None, 0, None, False, f"coefficients unavailable: {exc}")
    if not 0 <= ratio < 1:
        return SeriesCheck(offset, 0, None, 0, None, False, f"declared ratio {ratio} is not < 1")

    partial = offset
    count = 0
    last_n = None
    last_hi = 0
    trail: List[Tuple[int, Number]] = []
    for n, hi, s in block_sums:
        lin = slope * n + intercept
        if lin < 0:
            return SeriesCheck(partial, count, last_n, last_hi, None, False,
                               f"declared bound negative at block {n}")
        b = lin * ratio ** n
        if isinstance(b, float) or isinstance(s, float):
            ok = float(s) <= float(b) * (1 + FLOAT_SLACK)
        else:
            ok = s <= b
        if not ok:
            return SeriesCheck(partial, count, last_n, last_hi, None, False,
                               f"block {n} sum exceeds the declared bound")
        partial = partial + s
        count += 1
        last_n = n
        last_hi = hi
        trail.append((hi - 1, partial))
    if last_n is None:
        return SeriesCheck(partial, 0, None, 0, None, False, "no complete block within horizon")
    tail = arith_geom_tail(slope, intercept, ratio, last_n + 1)
    step = max(1, len(trail) // max_checkpoints)
    marks = trail[::step]
    if marks[-1] != trail[-1]:
        marks.append(trail[-1])
    return SeriesCheck(partial, count, last_n, last_hi - 1, tail, True, "", marks)
