"""Integer sets as interval unions, counting functions and density estimates.

The lower density of ``A`` is ``liminf #(A & [0, N]) / (N + 1)``. At a finite
horizon it is reported as the exact minimum of that ratio over a suffix
window ``[N0, N]``, with the window included in the result.
"""

from __future__ import annotations

import bisect
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, PrecisionWarning
from .magnitude import TAU, floor_log2, log2_fraction
from .weights import PrefixTable

Interval = Tuple[int, int]


@dataclass(frozen=True)
class IntSet:
    """Disjoint closed intervals ``[a, b]`` plus an optional ray ``[tail, oo)``.

    Always stored in canonical form: sorted, merged, non-adjacent, with any
    interval touching the tail absorbed into it.
    """

    intervals: Tuple[Interval, ...] = ()
    tail: Optional[int] = None
    _starts: Tuple[int, ...] = field(default=(), repr=False, compare=False)
    _cum: Tuple[int, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        ivs, tail = _canonical(self.intervals, self.tail)
        object.__setattr__(self, "intervals", ivs)
        object.__setattr__(self, "tail", tail)
        object.__setattr__(self, "_starts", tuple(a for a, _ in ivs))
        cum = [0]
        for a, b in ivs:
            cum.append(cum[-1] + b - a + 1)
        object.__setattr__(self, "_cum", tuple(cum))

    # -- constructors ----------------------------------------------------

    @classmethod
    def empty(cls) -> "IntSet":
        return cls()

    @classmethod
    def ray(cls, t: int) -> "IntSet":
        return cls((), t)

    @classmethod
    def interval(cls, a: int, b: int) -> "IntSet":
        return cls(((a, b),))

    @classmethod
    def from_members(cls, members: Iterable[int]) -> "IntSet":
        return cls(tuple((int(m), int(m)) for m in members))

    @classmethod
    def from_mask(cls, mask: np.ndarray, offset: int = 0) -> "IntSet":
        """The set ``{offset + i : mask[i]}``."""
        m = np.asarray(mask, dtype=bool)
        if not m.size:
            return cls()
        padded = np.concatenate(([False], m, [False])).astype(np.int8)
        d = np.diff(padded)
        starts = np.flatnonzero(d == 1)
        ends = np.flatnonzero(d == -1) - 1
        return cls(tuple(zip((starts + offset).tolist(), (ends + offset).tolist())))

    # -- queries ---------------------------------------------------------

    @property
    def is_empty(self) -> bool:
        return not self.intervals and self.tail is None

    @property
    def is_finite(self) -> bool:
        return self.tail is None

    def __contains__(self, n: int) -> bool:
        if n < 0:
            return False
        if self.tail is not None and n >= self.tail:
            return True
        i = bisect.bisect_right(self._starts, n) - 1
        return i >= 0 and n <= self.intervals[i][1]

    def count_upto(self, n: int) -> int:
        """``#(self & [0, n])``."""
        if n < 0:
            return 0
        i = bisect.bisect_right(self._starts, n) - 1
        total = 0
        if i >= 0:
            a, b = self.intervals[i]
            total = self._cum[i] + min(b, n) - a + 1
        if self.tail is not None and n >= self.tail:
            total += n - self.tail + 1
        return total

    def members(self, hi: int) -> List[int]:
        out: List[int] = []
        for a, b in self.intervals:
            if a > hi:
                break
            out.extend(range(a, min(b, hi) + 1))
        if self.tail is not None:
            out.extend(range(self.tail, hi + 1))
        return out

    def restrict(self, lo: int, hi: int) -> "IntSet":
        """``self & [lo, hi]`` (always finite)."""
        return self & IntSet.interval(lo, hi)

    def starts(self) -> List[int]:
        s = list(self._starts)
        if self.tail is not None:
            s.append(self.tail)
        return s

    # -- algebra ---------------------------------------------------------

    def _pieces(self) -> List[Tuple[int, Optional[int]]]:
        out: List[Tuple[int, Optional[int]]] = list(self.intervals)
        if self.tail is not None:
            out.append((self.tail, None))
        return out

    def union(self, other: "IntSet") -> "IntSet":
        tails = [t for t in (self.tail, other.tail) if t is not None]
        return IntSet(self.intervals + other.intervals, min(tails) if tails else None)

    def intersect(self, other: "IntSet") -> "IntSet":
        a, b = self._pieces(), other._pieces()
        i = j = 0
        out: List[Interval] = []
        tail = None
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            ha, hb = a[i][1], b[j][1]
            if ha is None and hb is None:
                tail = lo
                break
            hi = hb if ha is None else (ha if hb is None else min(ha, hb))
            if lo <= hi:
                out.append((lo, hi))
            if hb is None or (ha is not None and ha < hb):
                i += 1
            else:
                j += 1
        return IntSet(tuple(out), tail)

    def complement(self) -> "IntSet":
        """Complement relative to the non-negative integers."""
        out: List[Interval] = []
        nxt = 0
        for a, b in self.intervals:
            if a > nxt:
                out.append((nxt, a - 1))
            nxt = b + 1
        if self.tail is None:
            return IntSet(tuple(out), nxt)
        if self.tail > nxt:
            out.append((nxt, self.tail - 1))
        return IntSet(tuple(out), None)

    def difference(self, other: "IntSet") -> "IntSet":
        return self & other.complement()

    def issubset(self, other: "IntSet") -> bool:
        return (self & other) == self

    __or__ = union
    __and__ = intersect
    __invert__ = complement
    __sub__ = difference
    __le__ = issubset

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        d = {"intervals": [[a, b] for a, b in self.intervals]}
        if self.tail is not None:
            d["tail"] = self.tail
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "IntSet":
        return cls(tuple((int(a), int(b)) for a, b in d.get("intervals", ())), d.get("tail"))

    def __str__(self) -> str:
        parts = [f"[{a},{b}]" if a != b else f"{{{a}}}" for a, b in self.intervals]
        if self.tail is not None:
            parts.append(f"[{self.tail},oo)")
        return " u ".join(parts) if parts else "{}"


def _canonical(intervals, tail) -> Tuple[Tuple[Interval, ...], Optional[int]]:
    ivs = []
    for a, b in intervals:
        a, b = int(a), int(b)
        if a < 0:
            raise DomainError(f"interval [{a},{b}] reaches below zero")
        if a <= b:
            ivs.append((a, b))
    if tail is not None:
        tail = int(tail)
        if tail < 0:
            raise DomainError("tail start must be non-negative")
    ivs.sort()
    merged: List[List[int]] = []
    for a, b in ivs:
        if merged and a <= merged[-1][1] + 1:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    if tail is not None:
        while merged and merged[-1][1] + 1 >= tail:
            tail = min(tail, merged[-1][0])
            merged.pop()
    return tuple((a, b) for a, b in merged), tail


def set_union(a: IntSet, b: IntSet) -> IntSet:
    return a | b


def set_intersect(a: IntSet, b: IntSet) -> IntSet:
    return a & b


def set_complement(a: IntSet) -> IntSet:
    return ~a


def count_upto(a: IntSet, n: int) -> int:
    return a.count_upto(n)


# -- density profiles ----------------------------------------------------


@dataclass
class DensityProfile:
    """Ratios ``r(N') = #(A & [0, N']) / (N' + 1)`` on a finite horizon.

    ``lower``/``upper`` are the exact extremes of ``r`` over every integer in
    the window ``[window_start, horizon]``; ``running_lower[i]`` is the
    minimum over ``[window_start, checkpoints[i]]``.
    """

    horizon: int
    window_start: int
    checkpoints: List[int]
    counts: List[int]
    ratios: List[Fraction]
    running_lower: List[Fraction]
    running_upper: List[Fraction]
    lower: Fraction
    lower_at: int
    upper: Fraction
    upper_at: int

    @property
    def lower_estimate(self) -> Fraction:
        return self.lower

    def to_dict(self) -> dict:
        from .report import num

        return {
            "horizon": self.horizon,
            "window": [self.window_start, self.horizon],
            "lower_estimate": num(self.lower),
            "lower_attained_at": self.lower_at,
            "upper_estimate": num(self.upper),
            "upper_attained_at": self.upper_at,
            "checkpoints": [
                {"N": c, "count": k, "ratio": num(r), "running_lower": num(lo), "running_upper": num(up)}
                for c, k, r, lo, up in zip(self.checkpoints, self.counts, self.ratios,
                                           self.running_lower, self.running_upper)
            ],
        }

    def csv_rows(self):
        return [(c, k, r, lo, up) for c, k, r, lo, up in zip(self.checkpoints, self.counts, self.ratios,
                                                            self.running_lower, self.running_upper)]


CSV_HEADER = ("N", "count", "ratio", "running_lower", "running_upper")


def default_window_start(n: int) -> int:
    return max(1, math.ceil(n / 100))


def default_checkpoints(n: int, count: int = 6) -> List[int]:
    pts = sorted({max(1, n >> i) for i in range(count)})
    return pts


def _extreme(candidates: List[int], a: IntSet, lowest: bool) -> Tuple[Fraction, int]:
    idx = np.asarray(candidates, dtype=np.int64)
    counts = np.asarray([a.count_upto(int(c)) for c in candidates], dtype=np.float64)
    r = counts / (idx + 1)
    target = r.min() if lowest else r.max()
    near = np.flatnonzero(np.abs(r - target) <= 1e-12 * max(target, 1e-300) + 1e-15)
    best = None
    for i in near.tolist():
        c = candidates[i]
        q = Fraction(a.count_upto(c), c + 1)
        if best is None or (q < best[0] if lowest else q > best[0]) or (q == best[0] and c < best[1]):
            best = (q, c)
    return best


def density_profile(a: IntSet, n: int, checkpoints: Optional[Sequence[int]] = None,
                    window_start: Optional[int] = None) -> DensityProfile:
    """Exact finite-horizon density summary of ``a`` up to ``n``.

    ``r`` decreases along gaps and increases along members, so its minima
    over the window sit at the window ends or just before a member run
    starts, and its maxima at the window ends or at the end of a run.
    """
    if n < 1:
        raise DomainError("density horizon must be >= 1")
    n0 = default_window_start(n) if window_start is None else int(window_start)
    if not 0 <= n0 <= n:
        raise DomainError(f"window start {n0} outside [0, {n}]")
    cps = sorted({int(c) for c in (checkpoints or default_checkpoints(n)) if n0 <= c <= n} | {n})

    lows = {n0, n}
    highs = {n0, n}
    for s in a.starts():
        if n0 <= s - 1 <= n:
            lows.add(s - 1)
    for _, b in a.intervals:
        if n0 <= b <= n:
            highs.add(b)
    lows_sorted = sorted(lows)
    highs_sorted = sorted(highs)

    counts = [a.count_upto(c) for c in cps]
    ratios = [Fraction(k, c + 1) for k, c in zip(counts, cps)]
    running_lower, running_upper = [], []
    for c in cps:
        lo = [x for x in lows_sorted if x < c] + [c]
        hi = [x for x in highs_sorted if x < c] + [c]
        running_lower.append(_extreme(lo, a, True)[0])
        running_upper.append(_extreme(hi, a, False)[0])
    lower, lower_at = _extreme(lows_sorted, a, True)
    upper, upper_at = _extreme(highs_sorted, a, False)
    return DensityProfile(n, n0, cps, counts, ratios, running_lower, running_upper,
                          lower, lower_at, upper, upper_at)


def profile_from_membership(mask: np.ndarray, checkpoints: Optional[Sequence[int]] = None,
                            window_start: Optional[int] = None) -> DensityProfile:
    """Density profile of ``{n : mask[n]}`` with horizon ``len(mask) - 1``."""
    return density_profile(IntSet.from_mask(mask), len(mask) - 1, checkpoints, window_start)


# -- G-sets --------------------------------------------------------------


def g_mask(table: PrefixTable, k: int, c: Fraction, *, policy: str = "exclude",
           tau: float = TAU) -> Tuple[np.ndarray, int]:
    """Boolean array over ``n = 0..k`` of ``||B^n e_k|| <= c`` and the borderline count.

    ``policy`` settles approximate comparisons within tolerance: ``"exclude"``
    leaves them out of the set, ``"include"`` keeps them.
    """
    c = Fraction(c)
    if c <= 0:
        raise DomainError("threshold C must be positive")
    table._check(k)
    if table.mode == "pow2":
        e = table.exponents(0, k)
        mask_j = e >= e[k] - floor_log2(c)
        return mask_j[::-1].copy(), 0
    if table.mode == "rational":
        vals = table.exact_values(0, k)
        top = vals[k]
        mask_j = np.fromiter((top <= c * v for v in vals), dtype=bool, count=k + 1)
        return mask_j[::-1].copy(), 0
    logs, errs = table.log2s(0, k)
    d = (logs[k] - logs) - log2_fraction(c)
    border = np.abs(d) <= tau + errs + errs[k]
    mask_j = (d <= 0) & ~border if policy == "exclude" else (d <= 0) | border
    return mask_j[::-1].copy(), int(border.sum())


def g_set(table: PrefixTable, k: int, c, *, policy: str = "exclude", tau: float = TAU) -> IntSet:
    """``G(k, C) = {n >= 0 : ||B^n e_k|| <= C}`` as an exact IntSet."""
    mask, border = g_mask(table, k, Fraction(c), policy=policy, tau=tau)
    if border:
        warnings.warn(f"G({k}, {c}): {border} borderline comparisons resolved by policy {policy!r}",
                      PrecisionWarning, stacklevel=2)
    # n > k annihilates e_k, and 0 <= C
    return IntSet.from_mask(mask) | IntSet.ray(k + 1)


def intersect_g_sets(table: PrefixTable, ks: Sequence[int], c, **kwargs) -> IntSet:
    """Finite intersection of G-sets; an over-approximation of any infinite one."""
    ks = list(ks)
    if not ks:
        raise DomainError("at least one index is required")
    return reduce(IntSet.intersect, (g_set(table, k, c, **kwargs) for k in ks))
