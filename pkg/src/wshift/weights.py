"""Weight sequences, prefix products and the backward shift on sparse vectors.

A weighted backward shift acts by ``B e_k = w_k e_{k-1}`` (``e_{-1} = 0``),
so its iterates are governed entirely by the prefix products
``P(k) = w_1 * ... * w_k``:

    ||B^n e_k|| = P(k) / P(k - n)   for n <= k,   and 0 otherwise.

Weights are positive rationals. When every weight is a power of two the
prefix products are tracked as exact integer exponents; other rational
weights use exact fractions, or a compensated log2 accumulation when exact
mode is switched off.
"""

from __future__ import annotations

import bisect
import contextlib
import math
import sys
import threading
from collections import OrderedDict
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, HorizonError, SpecParseError
from .magnitude import EPS, ZERO, LogMagnitude, _pow2_magnitude, log2_fraction, power_of_two_exponent
from .series import BlockBound, normalize_p

DEFAULT_STRIDE = 1024


@dataclass(frozen=True)
class Run:
    """A maximal-or-not stretch of equal weights starting at ``start``."""

    value: Fraction
    start: int
    length: Optional[int]  # None: the run never ends

    @property
    def stop(self) -> Optional[int]:
        return None if self.length is None else self.start + self.length


@dataclass(frozen=True)
class LowRunDeclaration:
    """The n-th declared run ``[start, stop)`` consists of weights <= 1.

    Run lengths are declared strictly increasing, hence unbounded.
    """

    description: str
    first: int
    run: Callable[[int], Tuple[int, int]]


@dataclass(frozen=True)
class GrowthDeclaration:
    """Declares ``P(index(n)) >= 2**exponent(n)`` with ``exponent`` strictly increasing."""

    description: str
    first: int
    index: Callable[[int], int]
    exponent: Callable[[int], int]


class WeightSpec:
    """A positive, bounded weight sequence ``(w_k)_{k >= 1}``.

    ``kind`` is ``"explicit-runs"`` (finite list of runs ending in an
    infinite tail), ``"builtin"`` (an infinite lazily generated run
    sequence) or ``"rule-driven"`` (an arbitrary index rule).
    Builtins may attach structural declarations used by the criteria
    checkers: ``series`` bounds the blocks of ``sum_k P(k)**-p``,
    ``low_runs`` and ``growth`` describe the run structure.
    """

    def __init__(
        self,
        kind: str,
        name: str,
        *,
        bound,
        runs: Optional[Sequence[Tuple[Fraction, Optional[int]]]] = None,
        run_source: Optional[Callable[[], Iterator[Run]]] = None,
        rule: Optional[Callable[[int], Fraction]] = None,
        power_of_two: Optional[bool] = None,
        params: Optional[Mapping] = None,
        series: Optional[Callable[[], BlockBound]] = None,
        low_runs: Optional[LowRunDeclaration] = None,
        growth: Optional[GrowthDeclaration] = None,
    ):
        if kind not in ("explicit-runs", "builtin", "rule-driven"):
            raise DomainError(f"unknown weight-spec kind {kind!r}")
        self.kind = kind
        self.name = name
        self.bound = Fraction(bound)
        self.params = dict(params or {})
        self.series = series
        self.low_runs = low_runs
        self.growth = growth
        self._rule = rule
        self._lock = threading.Lock()
        self._runs: List[Run] = []
        self._starts: List[int] = []
        self._source: Optional[Iterator[Run]] = None
        self._exhausted = False

        if self.bound <= 0:
            raise DomainError("weight bound must be positive")
        if kind == "explicit-runs":
            if not runs:
                raise SpecParseError("at least one run is required", "runs")
            built = []
            start = 1
            for i, (value, length) in enumerate(runs):
                value = Fraction(value)
                if value <= 0:
                    raise SpecParseError(f"weight must be positive, got {value}", f"runs[{i}].value")
                if value > self.bound:
                    raise SpecParseError(f"weight {value} exceeds bound {self.bound}", f"runs[{i}].value")
                if length is None:
                    if i != len(runs) - 1:
                        raise SpecParseError("infinite length allowed only in final run", f"runs[{i}].length")
                else:
                    if isinstance(length, bool) or not isinstance(length, int) or length < 1:
                        raise SpecParseError(f"length must be a positive integer, got {length!r}",
                                             f"runs[{i}].length")
                built.append(Run(value, start, length))
                if length is not None:
                    start += length
            if built[-1].length is not None:
                raise SpecParseError("final run must be infinite so every index is covered",
                                     f"runs[{len(runs) - 1}].length")
            self._runs = built
            self._starts = [r.start for r in built]
            self._exhausted = True
            flags = [power_of_two_exponent(r.value) is not None for r in built]
            self.power_of_two = all(flags)
        elif kind == "builtin":
            if run_source is None:
                raise DomainError("builtin specs need a run source")
            self._source = run_source()
            self.power_of_two = bool(power_of_two)
        else:
            if rule is None:
                raise DomainError("rule-driven specs need a rule")
            self.power_of_two = bool(power_of_two)

    # -- evaluation ------------------------------------------------------

    def _extend(self, k: int) -> None:
        """Pull runs from the generator until index ``k`` is covered."""
        with self._lock:
            while not self._exhausted:
                if self._runs:
                    last = self._runs[-1]
                    if last.stop is None or last.stop > k:
                        return
                try:
                    run = next(self._source)
                except StopIteration:
                    self._exhausted = True
                    break
                expected = self._runs[-1].stop if self._runs else 1
                if run.start != expected or run.value <= 0 or (run.length is not None and run.length < 1):
                    raise DomainError(f"builtin {self.name!r} produced an invalid run {run}")
                if run.value > self.bound:
                    raise DomainError(f"builtin {self.name!r}: weight {run.value} exceeds bound")
                self._runs.append(run)
                self._starts.append(run.start)

    def _run_index(self, k: int) -> int:
        self._extend(k)
        i = bisect.bisect_right(self._starts, k) - 1
        run = self._runs[i]
        if run.stop is not None and k >= run.stop:
            raise DomainError(f"index {k} not covered by spec {self.name!r}")
        return i

    def _rule_value(self, k: int) -> Fraction:
        v = Fraction(self._rule(k))
        if v <= 0 or v > self.bound:
            raise DomainError(f"rule {self.name!r} gave weight {v} at index {k}, outside (0, {self.bound}]")
        if self.power_of_two and power_of_two_exponent(v) is None:
            raise DomainError(f"rule {self.name!r} declared powers of two but gave {v} at {k}")
        return v

    def weight_at(self, k: int) -> Fraction:
        if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 1:
            raise DomainError(f"weights are indexed from 1, got {k!r}")
        k = int(k)
        if self.kind == "rule-driven":
            return self._rule_value(k)
        return self._runs[self._run_index(k)].value

    def iter_runs(self, lo: int, hi: int) -> Iterator[Tuple[Fraction, int, int]]:
        """Yield ``(value, start, stop)`` runs clipped to the index range ``[lo, hi)``."""
        lo = max(lo, 1)
        if hi <= lo:
            return
        if self.kind == "rule-driven":
            start = lo
            cur = self._rule_value(lo)
            for k in range(lo + 1, hi):
                v = self._rule_value(k)
                if v != cur:
                    yield cur, start, k
                    start, cur = k, v
            yield cur, start, hi
            return
        self._extend(hi - 1)
        i = self._run_index(lo)
        while True:
            run = self._runs[i]
            stop = hi if run.stop is None else min(run.stop, hi)
            yield run.value, max(run.start, lo), stop
            if stop >= hi:
                return
            i += 1

    def weights_between(self, lo: int, hi: int) -> List[Fraction]:
        """Exact weights ``w_lo, ..., w_{hi-1}``."""
        out: List[Fraction] = []
        for v, a, b in self.iter_runs(lo, hi):
            out.extend([v] * (b - a))
        return out

    def exponents_between(self, lo: int, hi: int) -> np.ndarray:
        """log2 of the weights on ``[lo, hi)`` as int64 (power-of-two specs only)."""
        if not self.power_of_two:
            raise DomainError("integer exponents need a power-of-two spec")
        vals, lens = [], []
        for v, a, b in self.iter_runs(lo, hi):
            vals.append(power_of_two_exponent(v))
            lens.append(b - a)
        if not vals:
            return np.zeros(0, dtype=np.int64)
        return np.repeat(np.asarray(vals, dtype=np.int64), lens)

    def runs_upto(self, k: int) -> List[Run]:
        """All runs starting at or before ``k`` (the last one may extend past ``k``)."""
        if self.kind == "rule-driven":
            return [Run(v, a, b - a) for v, a, b in self.iter_runs(1, k + 1)]
        self._extend(k)
        i = bisect.bisect_right(self._starts, k)
        return list(self._runs[:i])

    @property
    def tail_run(self) -> Optional[Run]:
        """The final infinite run of an explicit spec."""
        if self.kind == "explicit-runs":
            return self._runs[-1]
        return None

    def has_weights_below_one(self, hi: int) -> bool:
        return any(v < 1 for v, _, _ in self.iter_runs(1, hi + 1))

    def to_config(self) -> dict:
        """JSON-compatible description; enough to rebuild builtin and explicit specs."""
        if self.kind == "explicit-runs":
            return {
                "kind": "blocks",
                "runs": [[_frac_str(r.value), "inf" if r.length is None else r.length] for r in self._runs],
            }
        if self.kind == "builtin":
            return {"kind": "builtin", "name": self.name, "params": dict(self.params)}
        return {"kind": "rule-driven", "name": self.name, "replayable": False}

    def __repr__(self) -> str:
        return f"WeightSpec(kind={self.kind!r}, name={self.name!r})"


def _frac_str(q: Fraction) -> str:
    with _unlimited_int_digits():
        return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@contextlib.contextmanager
def _unlimited_int_digits():
    """Lift the interpreter's int-to-str digit cap for exact exports of huge rationals."""
    get = getattr(sys, "get_int_max_str_digits", None)
    if get is None:
        yield
        return
    old = get()
    sys.set_int_max_str_digits(0)
    try:
        yield
    finally:
        sys.set_int_max_str_digits(old)


def constant_weights(value, name: Optional[str] = None) -> WeightSpec:
    """``w_k = value`` for every k."""
    value = Fraction(value)
    return WeightSpec("explicit-runs", name or f"constant-{_frac_str(value)}", bound=value,
                      runs=[(value, None)])


def explicit_runs(runs: Sequence[Tuple[object, Optional[int]]], name: str = "blocks") -> WeightSpec:
    runs = [(Fraction(v), n) for v, n in runs]
    bound = max(v for v, _ in runs) if runs else Fraction(1)
    return WeightSpec("explicit-runs", name, bound=bound, runs=runs)


def weight_at(spec: WeightSpec, k: int) -> Fraction:
    return spec.weight_at(k)


# -- prefix products -----------------------------------------------------


class PrefixTable:
    """Prefix products ``P(0..horizon)`` of a weight spec.

    Only the values at multiples of ``stride`` are stored; a chunk of
    ``stride`` consecutive values is recomputed from its checkpoint on
    demand and kept in a small LRU cache. Tables are read-only after
    construction and safe to share between threads.

    ``mode`` is ``"pow2"`` (exact integer exponents), ``"rational"`` (exact
    fractions) or ``"log"`` (compensated log2 sums with error bounds). By
    default power-of-two specs use ``"pow2"`` and other specs use
    ``"rational"`` when ``exact`` is set, ``"log"`` otherwise.
    """

    def __init__(self, spec: WeightSpec, horizon: int, *, stride: int = DEFAULT_STRIDE,
                 exact: bool = True, mode: Optional[str] = None, cache_chunks: int = 256):
        if horizon < 0:
            raise DomainError("horizon must be non-negative")
        if stride < 1:
            raise DomainError("stride must be positive")
        if mode is None:
            mode = "pow2" if spec.power_of_two else ("rational" if exact else "log")
        if mode == "pow2" and not spec.power_of_two:
            raise DomainError("pow2 mode needs a power-of-two spec")
        if mode not in ("pow2", "rational", "log"):
            raise DomainError(f"unknown table mode {mode!r}")
        self.spec = spec
        self.horizon = int(horizon)
        self.stride = stride
        self.mode = mode
        self._cache: "OrderedDict[int, tuple]" = OrderedDict()
        self._cache_size = cache_chunks
        self._lock = threading.Lock()
        self._checkpoints: list = []
        self._last: tuple = (-1, None)
        state = self._initial_state()
        n_chunks = self.horizon // stride + 1
        for c in range(n_chunks):
            self._checkpoints.append(state)
            if c + 1 < n_chunks:
                state = self._advance(state, c * stride + 1, (c + 1) * stride + 1)

    @property
    def is_exact(self) -> bool:
        return self.mode != "log"

    # -- chunk machinery -------------------------------------------------

    def _initial_state(self):
        if self.mode == "pow2":
            return 0
        if self.mode == "rational":
            return Fraction(1)
        return (0.0, 0.0, 0.0)  # sum, compensation, sum of |terms|

    def _advance(self, state, lo: int, hi: int):
        """State after multiplying in weights ``w_lo .. w_{hi-1}``."""
        if self.mode == "pow2":
            return state + int(self.spec.exponents_between(lo, hi).sum())
        if self.mode == "rational":
            for v, a, b in self.spec.iter_runs(lo, hi):
                state *= v ** (b - a)
            return state
        s, comp, a_sum = state
        for v, a, b in self.spec.iter_runs(lo, hi):
            t = log2_fraction(v)
            for _ in range(b - a):
                s, comp = _neumaier(s, comp, t)
                a_sum += abs(t)
        return (s, comp, a_sum)

    def _chunk(self, c: int):
        last = self._last
        if last[0] == c:
            return last[1]
        data = self._load_chunk(c)
        self._last = (c, data)
        return data

    def _load_chunk(self, c: int):
        with self._lock:
            hit = self._cache.get(c)
            if hit is not None:
                self._cache.move_to_end(c)
                return hit
        lo = c * self.stride
        hi = min(lo + self.stride, self.horizon + 1)  # chunk covers P(lo..hi-1)
        state = self._checkpoints[c]
        if self.mode == "pow2":
            exps = np.empty(hi - lo, dtype=np.int64)
            exps[0] = state
            if hi - lo > 1:
                np.cumsum(self.spec.exponents_between(lo + 1, hi), out=exps[1:])
                exps[1:] += state
            data = (exps, exps.tolist())
        elif self.mode == "rational":
            vals = [state]
            cur = state
            for w in self.spec.weights_between(lo + 1, hi):
                cur = cur * w
                vals.append(cur)
            data = (vals,)
        else:
            s, comp, a_sum = state
            logs = [s + comp]
            errs = [_log_err(s + comp, a_sum)]
            for w in self.spec.weights_between(lo + 1, hi):
                t = log2_fraction(w)
                s, comp = _neumaier(s, comp, t)
                a_sum += abs(t)
                logs.append(s + comp)
                errs.append(_log_err(s + comp, a_sum))
            data = (np.asarray(logs), np.asarray(errs), logs, errs)
        with self._lock:
            self._cache[c] = data
            if len(self._cache) > self._cache_size:
                self._cache.popitem(last=False)
        return data

    def _check(self, k: int) -> int:
        if k < 0:
            raise DomainError(f"prefix index must be non-negative, got {k}")
        if k > self.horizon:
            raise HorizonError(k, self.horizon)
        return int(k)

    # -- scalar access ---------------------------------------------------

    def exponent(self, k: int) -> int:
        """``log2 P(k)`` as an exact integer (pow2 mode)."""
        if self.mode != "pow2":
            raise DomainError("exponent() needs a pow2-mode table")
        k = self._check(k)
        c, r = divmod(k, self.stride)
        return self._chunk(c)[1][r]

    def exact(self, k: int) -> Fraction:
        k = self._check(k)
        c, r = divmod(k, self.stride)
        if self.mode == "pow2":
            e = self._chunk(c)[1][r]
            return Fraction(2 ** e) if e >= 0 else Fraction(1, 2 ** -e)
        if self.mode == "rational":
            return self._chunk(c)[0][r]
        raise DomainError("log-mode tables hold no exact values")

    def prefix(self, k: int) -> LogMagnitude:
        k = self._check(k)
        c, r = divmod(k, self.stride)
        data = self._chunk(c)
        if self.mode == "pow2":
            return LogMagnitude.pow2(data[1][r])
        if self.mode == "rational":
            return LogMagnitude.rational(data[0][r])
        return LogMagnitude.approx(data[2][r], data[3][r])

    def log2(self, k: int) -> float:
        k = self._check(k)
        c, r = divmod(k, self.stride)
        data = self._chunk(c)
        if self.mode == "pow2":
            return float(data[1][r])
        if self.mode == "rational":
            return log2_fraction(data[0][r])
        return data[2][r]

    # -- vector access ---------------------------------------------------

    def _gather(self, lo: int, hi: int, pick) -> list:
        self._check(lo)
        self._check(hi)
        parts = []
        c0, c1 = lo // self.stride, hi // self.stride
        for c in range(c0, c1 + 1):
            base = c * self.stride
            a = max(lo, base) - base
            b = min(hi, base + self.stride - 1) - base + 1
            parts.append(pick(self._chunk(c), a, b))
        return parts

    def exponents(self, lo: int, hi: int) -> np.ndarray:
        """Exact ``log2 P(k)`` for ``lo <= k <= hi`` (pow2 mode)."""
        if self.mode != "pow2":
            raise DomainError("exponents() needs a pow2-mode table")
        if hi < lo:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate(self._gather(lo, hi, lambda d, a, b: d[0][a:b]))

    def log2s(self, lo: int, hi: int) -> Tuple[np.ndarray, np.ndarray]:
        """``(log2 P(k), error bound)`` arrays for ``lo <= k <= hi``."""
        if hi < lo:
            return np.zeros(0), np.zeros(0)
        if self.mode == "pow2":
            e = self.exponents(lo, hi).astype(np.float64)
            return e, np.zeros_like(e)
        if self.mode == "rational":
            vals = [log2_fraction(v) for part in self._gather(lo, hi, lambda d, a, b: d[0][a:b])
                    for v in part]
            arr = np.asarray(vals)
            return arr, np.abs(arr) * 4 * EPS
        logs = np.concatenate(self._gather(lo, hi, lambda d, a, b: d[0][a:b]))
        errs = np.concatenate(self._gather(lo, hi, lambda d, a, b: d[1][a:b]))
        return logs, errs

    def exact_values(self, lo: int, hi: int) -> List[Fraction]:
        if self.mode == "pow2":
            return [Fraction(2 ** e) if e >= 0 else Fraction(1, 2 ** -e)
                    for e in self.exponents(lo, hi).tolist()]
        if self.mode == "rational":
            return [v for part in self._gather(lo, hi, lambda d, a, b: d[0][a:b]) for v in part]
        raise DomainError("log-mode tables hold no exact values")

    def ratio(self, k: int, j: int) -> LogMagnitude:
        """``P(k) / P(j)``."""
        return self.prefix(k) / self.prefix(j)

    def is_nondecreasing(self, hi: Optional[int] = None) -> bool:
        """True when no weight in ``[1, hi]`` is below one (so P is nondecreasing)."""
        hi = self.horizon if hi is None else hi
        return not self.spec.has_weights_below_one(hi)

    def __repr__(self) -> str:
        return f"PrefixTable({self.spec.name!r}, horizon={self.horizon}, mode={self.mode!r})"


def _neumaier(s: float, comp: float, t: float) -> Tuple[float, float]:
    u = s + t
    if abs(s) >= abs(t):
        comp += (s - u) + t
    else:
        comp += (t - u) + s
    return u, comp


def _log_err(total: float, abs_sum: float) -> float:
    # per-term log2 rounding plus compensated-summation error
    return 4 * EPS * abs_sum + 2 * EPS * abs(total)


def build_table(spec: WeightSpec, horizon: int, **kwargs) -> PrefixTable:
    return PrefixTable(spec, horizon, **kwargs)


def prefix_product(table: PrefixTable, k: int) -> LogMagnitude:
    return table.prefix(k)


def basis_orbit_norm(table: PrefixTable, n: int, k: int) -> LogMagnitude:
    """``||B^n e_k|| = P(k)/P(k-n)``; exact zero once ``n > k``."""
    if n < 0:
        raise DomainError(f"iterate count must be non-negative, got {n}")
    if type(k) is not int or not 0 <= k <= table.horizon:
        k = table._check(k)
    if n > k:
        return ZERO
    if table.mode == "pow2":
        stride = table.stride
        top = table._chunk(k // stride)[1][k % stride]
        j = k - n
        return _pow2_magnitude(top - table._chunk(j // stride)[1][j % stride])
    return table.prefix(k) / table.prefix(k - n)


# -- sparse vectors ------------------------------------------------------


class SparseVector:
    """A finitely supported sequence ``index -> rational``, zeros dropped."""

    __slots__ = ("_d",)

    def __init__(self, entries: Optional[Mapping[int, object]] = None):
        d: Dict[int, Fraction] = {}
        for i, v in (entries or {}).items():
            if isinstance(i, bool) or int(i) != i or i < 0:
                raise DomainError(f"indices must be non-negative integers, got {i!r}")
            v = Fraction(v)
            if v:
                d[int(i)] = v
        self._d = dict(sorted(d.items()))

    @classmethod
    def basis(cls, k: int, coeff=1) -> "SparseVector":
        return cls({k: coeff})

    @classmethod
    def _trusted(cls, d: Dict[int, Fraction]) -> "SparseVector":
        obj = cls.__new__(cls)
        obj._d = dict(sorted((i, v) for i, v in d.items() if v))
        return obj

    def items(self):
        return self._d.items()

    def support(self) -> List[int]:
        return list(self._d)

    def max_index(self) -> int:
        return next(reversed(self._d)) if self._d else -1

    def __getitem__(self, i: int) -> Fraction:
        return self._d.get(i, Fraction(0))

    def __len__(self) -> int:
        return len(self._d)

    def __bool__(self) -> bool:
        return bool(self._d)

    def __eq__(self, other) -> bool:
        return isinstance(other, SparseVector) and self._d == other._d

    def __hash__(self) -> int:
        return hash(tuple(self._d.items()))

    def __add__(self, other: "SparseVector") -> "SparseVector":
        d = dict(self._d)
        for i, v in other.items():
            d[i] = d.get(i, 0) + v
        return SparseVector._trusted(d)

    def __neg__(self) -> "SparseVector":
        return SparseVector._trusted({i: -v for i, v in self._d.items()})

    def __sub__(self, other: "SparseVector") -> "SparseVector":
        return self + (-other)

    def scale(self, alpha) -> "SparseVector":
        alpha = Fraction(alpha)
        return SparseVector._trusted({i: alpha * v for i, v in self._d.items()})

    __rmul__ = scale

    def to_json(self) -> Dict[str, str]:
        with _unlimited_int_digits():
            return {str(i): _frac_str(v) for i, v in self._d.items()}

    @classmethod
    def from_json(cls, data: Mapping[str, str]) -> "SparseVector":
        with _unlimited_int_digits():
            return cls({int(i): Fraction(v) for i, v in data.items()})

    def __repr__(self) -> str:
        body = ", ".join(f"{i}: {_frac_str(v)}" for i, v in list(self._d.items())[:8])
        more = ", ..." if len(self._d) > 8 else ""
        return f"SparseVector({{{body}{more}}})"


ZERO_VECTOR = SparseVector()


def _window_product(table: PrefixTable, lo: int, hi: int) -> Fraction:
    """Exact ``P(hi) / P(lo) = w_{lo+1} ... w_hi``."""
    if table.mode == "pow2":
        e = table.exponent(hi) - table.exponent(lo)
        return Fraction(2 ** e) if e >= 0 else Fraction(1, 2 ** -e)
    if table.mode == "rational":
        return table.exact(hi) / table.exact(lo)
    table._check(hi)
    out = Fraction(1)
    for v, a, b in table.spec.iter_runs(lo + 1, hi + 1):
        out *= v ** (b - a)
    return out


def shift_apply(table: PrefixTable, x: SparseVector, n: int) -> SparseVector:
    """``B^n x``, with ``(B^n x)_j = (w_{j+1} ... w_{j+n}) x_{j+n}``."""
    if n < 0:
        raise DomainError("iterate count must be non-negative")
    if x.max_index() > table.horizon:
        raise HorizonError(x.max_index(), table.horizon)
    if n == 0:
        return x
    out = {}
    for s, v in x.items():
        if s >= n:
            out[s - n] = v * _window_product(table, s - n, s)
    return SparseVector._trusted(out)


def right_inverse_apply(table: PrefixTable, x: SparseVector, n: int) -> SparseVector:
    """``S^n x`` for the right inverse ``S e_k = e_{k+1} / w_{k+1}``."""
    if n < 0:
        raise DomainError("iterate count must be non-negative")
    if x.max_index() + n > table.horizon:
        raise HorizonError(x.max_index() + n, table.horizon)
    if n == 0:
        return x
    out = {}
    for s, v in x.items():
        out[s + n] = v / _window_product(table, s, s + n)
    return SparseVector._trusted(out)


def exact_sum(values: Iterable[Fraction]) -> Fraction:
    """Exact sum of rationals; dyadic terms share one power-of-two denominator (no gcd per term)."""
    num, exp = 0, 0
    rest = Fraction(0)
    for v in values:
        v = Fraction(v)
        d = v.denominator
        if d & (d - 1):
            rest += v
            continue
        e = d.bit_length() - 1
        if e > exp:
            num <<= e - exp
            exp = e
        num += v.numerator << (exp - e)
    return rest + Fraction(num, 1 << exp)


def power_sum(x: SparseVector, p) -> object:
    """``sum_j |x_j|**p``; an exact Fraction for integer p."""
    p = normalize_p(p)
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if isinstance(p, int):
        return exact_sum(abs(v) ** p for _, v in x.items())
    return math.fsum(float(abs(v)) ** p for _, v in x.items())


def norm_p(x: SparseVector, p) -> float:
    """The l^p norm ``(sum_j |x_j|**p)**(1/p)`` as a float."""
    p = normalize_p(p)
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if not x:
        return 0.0
    if isinstance(p, int):
        total = power_sum(x, p)
        if p == 1:
            return float(total)
        return 2.0 ** (log2_fraction(total) / p)
    return math.fsum(float(abs(v)) ** p for _, v in x.items()) ** (1.0 / p)


def iter_weights(spec: WeightSpec, count: int) -> Iterable[Fraction]:
    return spec.weights_between(1, count + 1)
