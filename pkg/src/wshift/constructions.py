"""The two explicit weight sequences and checks of their displayed computations.

``menet``: markers ``a_{2n} = 1 + n(n+1)``, ``a_{2n+1} = 1 + (n+1)^2`` and
``w_k = 2`` on ``[a_{2n}, a_{2n+1})``, ``w_k = 1`` elsewhere. Frequently
hypercyclic with a hypercyclic subspace but no frequently hypercyclic
subspace.

``block4``: ``w = (4, 1^{a_1}, 4, 1^{a_2}, ...)`` for an increasing
integer sequence ``a``; with ``a_n = 3^(n-1)`` it has a frequently
hypercyclic subspace.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Optional

from .criteria import CRule, KSequence
from .density import IntSet
from .errors import DomainError
from .series import BlockBound, arith_geom_tail, inverse_power, normalize_p
from .weights import GrowthDeclaration, LowRunDeclaration, Run, WeightSpec

log = logging.getLogger(__name__)

TWO = Fraction(2)
FOUR = Fraction(4)
ONE = Fraction(1)


@dataclass(frozen=True)
class MarkerSequence:
    """A strictly increasing sequence of positive integers ``a_first, a_{first+1}, ...``.

    ``rule`` must return Python ints; this is checked on the first
    ``check`` terms at construction and on every later evaluation.
    """

    name: str
    rule: Callable[[int], int]
    first: int = 1
    params: dict = field(default_factory=dict)
    check: int = 64

    def __post_init__(self):
        prev = None
        for n in range(self.first, self.first + self.check):
            v = self(n)
            if v < 1:
                raise DomainError(f"marker {self.name!r}: a_{n} = {v} is not positive")
            if prev is not None and v <= prev:
                raise DomainError(f"marker {self.name!r} is not strictly increasing at n={n}")
            prev = v

    def __call__(self, n: int) -> int:
        if n < self.first:
            raise DomainError(f"marker {self.name!r} starts at n={self.first}, got {n}")
        v = self.rule(n)
        if isinstance(v, bool) or not isinstance(v, int):
            raise DomainError(f"marker {self.name!r}: a_{n} must be an exact integer, got {type(v).__name__}")
        return v

    def partial_sum(self, n: int) -> int:
        """``sum_{k=first}^{n} a_k``."""
        if "base" in self.params and self.first == 1:
            b = self.params["base"]
            return (b ** n - 1) // (b - 1)
        return sum(self(k) for k in range(self.first, n + 1))


# -- Menet family ----------------------------------------------------------


def menet_marker(n: int) -> int:
    m, odd = divmod(n, 2)
    return 1 + (m + 1) ** 2 if odd else 1 + m * (m + 1)


def menet_markers() -> MarkerSequence:
    return MarkerSequence("menet", menet_marker, first=0)


def _menet_runs() -> Iterator[Run]:
    n = 0
    while True:
        yield Run(TWO, menet_marker(2 * n), n + 1)
        yield Run(ONE, menet_marker(2 * n + 1), n + 1)
        n += 1


def _menet_series() -> BlockBound:
    # block n = [a_{2n}, a_{2n+2}): n+1 terms 2^{-p(T_n + j)} then n+1 terms 2^{-p T_{n+1}},
    # all <= 2^{-p(n+1)}
    def coefficients(p):
        r = inverse_power(2, p)
        return 2 * r, 2 * r, r

    return BlockBound(
        "block n = [a_2n, a_2n+2) has 2(n+1) terms, each <= 2^(-p(n+1)): sum <= (2n+2) 2^(-p(n+1))",
        0, lambda n: (menet_marker(2 * n), menet_marker(2 * n + 2)), coefficients)


def menet_weights() -> WeightSpec:
    """``w_k = 2`` on ``[a_{2n}, a_{2n+1})`` and 1 elsewhere."""
    return WeightSpec(
        "builtin", "menet", bound=2, run_source=_menet_runs, power_of_two=True,
        series=_menet_series,
        low_runs=LowRunDeclaration(
            "runs of ones [a_2n+1, a_2n+2) have length n+1", 0,
            lambda n: (menet_marker(2 * n + 1), menet_marker(2 * n + 2))),
        growth=GrowthDeclaration(
            "P(a_2n+1) = 2^((n+1)(n+2)/2)", 0,
            lambda n: menet_marker(2 * n + 1), lambda n: (n + 1) * (n + 2) // 2),
    )


def _menet_block(l: int) -> int:
    """The n with ``a_{2n+1} <= l < a_{2n+3}``."""
    if l < 2:
        raise DomainError(f"C_l is defined for l >= a_1 = 2, got {l}")
    return math.isqrt(l - 1) - 1


def menet_c_rule() -> CRule:
    """``C_l = 2^{a_{2n+1} - a_{2n}} = 2^{n+1}`` for ``a_{2n+1} <= l < a_{2n+3}``."""

    def value(l):
        return Fraction(2 ** (_menet_block(l) + 1))

    def tail_coefficients(p):
        r = inverse_power(2, p)
        return 2 * r, 3 * r, r

    def blocks(n):
        return menet_marker(2 * n + 1), menet_marker(2 * n + 3)

    return CRule(
        "menet", value, k_min=2,
        tail=BlockBound("block n = [a_2n+1, a_2n+3): 2n+3 terms equal to 2^(-p(n+1))",
                        0, blocks, tail_coefficients),
        count_bound=lambda l: menet_marker(2 * _menet_block(l)),
        count_blocks=blocks,
        description="#{m : ||B^m e_l|| >= C_l} >= a_2n on [a_2n+1, a_2n+3); ratio floor a_2n/a_2n+3 -> 1",
    )


# -- block-4 family --------------------------------------------------------


def geometric_markers(base: int = 3) -> MarkerSequence:
    """``a_n = base^(n-1)`` for ``n >= 1``."""
    if isinstance(base, bool) or not isinstance(base, int) or base < 2:
        raise DomainError(f"base must be an integer >= 2, got {base!r}")
    return MarkerSequence(f"geometric-{base}", lambda n: base ** (n - 1), first=1, params={"base": base})


def block4_positions(a: MarkerSequence) -> Iterator[int]:
    """Indices ``m_n = sum_{k<n} a_k + n`` carrying the weight 4."""
    m, n = 1, 1
    while True:
        yield m
        m += a(n) + 1
        n += 1


def block4_position(a: MarkerSequence, n: int) -> int:
    if n < 1:
        raise DomainError("block positions start at n=1")
    return (a.partial_sum(n - 1) if n > 1 else 0) + n


def block4_weights(a: MarkerSequence) -> WeightSpec:
    """``w_k = 4`` at ``m_n`` and 1 on the ``a_n`` indices that follow."""
    if a.first != 1:
        raise DomainError("block-4 markers are indexed from n=1")

    def runs():
        n = 1
        for m in block4_positions(a):
            yield Run(FOUR, m, 1)
            yield Run(ONE, m + 1, a(n))
            n += 1

    base = a.params.get("base")
    series = None
    if base is not None:
        # block n = [m_n, m_{n+1}) holds a_n + 1 terms equal to 4^{-pn}; a_n + 1 <= 2 base^{n-1}
        def block_series():
            def coefficients(p):
                return 0, Fraction(2, base), base * inverse_power(4, p)

            return BlockBound(f"block n = [m_n, m_n+1) sums to (a_n+1) 4^(-pn) <= (2/{base}) ({base}/4^p)^n",
                              1, lambda n: (block4_position(a, n), block4_position(a, n + 1)), coefficients)

        series = block_series

    name = "block4-geometric" if base is not None else f"block4-{a.name}"
    return WeightSpec(
        "builtin", name, bound=4, run_source=runs, power_of_two=True,
        params={"base": base} if base is not None else {"markers": a.name},
        series=series,
        low_runs=LowRunDeclaration("runs of ones after the n-th 4 have length a_n", 1,
                                   lambda n: (block4_position(a, n) + 1, block4_position(a, n + 1))),
        growth=GrowthDeclaration("P(m_n) = 4^n", 1, lambda n: block4_position(a, n), lambda n: 2 * n),
    )


def example8_weights(base: int = 3) -> WeightSpec:
    return block4_weights(geometric_markers(base))


def _a_set_pieces(a: MarkerSequence, horizon: int):
    """Intervals ``[0, a_1]`` and ``[S_n + n + 1, a_{n+1}]`` that start at or below ``horizon``."""
    yield 0, a(1)
    n = 1
    while True:
        lo = a.partial_sum(n) + n + 1
        if lo > horizon and a(n + 1) > horizon:
            return
        yield lo, a(n + 1)
        n += 1


def example_a_set(a: MarkerSequence, horizon: int) -> IntSet:
    """``A = [0, a_1] u U_{n>=1} [S_n + n + 1, a_{n+1}]`` truncated at ``horizon``.

    An interval cut by the horizon is kept truncated; see :func:`a_set_truncated`.
    """
    pieces = []
    for lo, hi in _a_set_pieces(a, horizon):
        if lo > horizon:
            continue
        if hi > horizon:
            log.warning("interval [%d, %d] of A truncated at horizon %d", lo, hi, horizon)
        pieces.append((lo, min(hi, horizon)))
    return IntSet(tuple(pieces))


def a_set_truncated(a: MarkerSequence, horizon: int) -> bool:
    return any(lo <= horizon < hi for lo, hi in _a_set_pieces(a, horizon))


def example8_k_sequence(base: int = 3) -> KSequence:
    """``k_l = S_l + l`` with the closed-form intersection of the ``G(k_l, 1)``."""
    a = geometric_markers(base)
    return KSequence(
        "block4-markers", lambda l: a.partial_sum(l) + l, c_value=Fraction(1),
        closed_form=lambda n: example_a_set(a, n),
        agreement=lambda L: a(L),
        g_closed_form=lambda l: IntSet(((0, a(l)),), a.partial_sum(l) + l + 1),
        params={"base": base},
        description="G(S_l + l, 1) = [0, a_l] u [S_l + l + 1, oo); intersection = [0,a_1] u U [S_n+n+1, a_n+1]",
    )


# -- identity verifiers ---------------------------------------------------


def _series_report(slope, intercept, ratio, start: int, n_max: int, label: str) -> dict:
    """Partial sum over ``start <= n <= n_max`` of ``(slope n + intercept) ratio^n`` with exact tail."""
    partial = sum(((slope * n + intercept) * ratio ** n for n in range(start, n_max + 1)), 0)
    tail = arith_geom_tail(slope, intercept, ratio, n_max + 1)
    limit = arith_geom_tail(slope, intercept, ratio, start)
    if isinstance(limit, float):
        ok = partial <= limit * (1 + 1e-12) and limit <= (partial + tail) * (1 + 1e-12)
    else:
        ok = partial <= limit <= partial + tail
    return {"series": label, "terms": n_max - start + 1, "partial_sum": partial, "tail_bound": tail,
            "limit": limit, "bracket_holds": ok}


def verify_menet_identities(n_max: int = 1000, p=1) -> dict:
    """Check the marker identities and the displayed series of the Menet construction."""
    p = normalize_p(p)
    if n_max < 1 or p < 1:
        raise DomainError("need n_max >= 1 and p >= 1")
    a = menet_marker
    bad = [n for n in range(n_max + 1)
           if not (a(2 * n + 1) - a(2 * n) == n + 1 == a(2 * n + 2) - a(2 * n + 1))]

    ratios = [Fraction(a(2 * n), a(2 * n + 3)) for n in range(n_max + 1)]
    increasing = all(x < y for x, y in zip(ratios, ratios[1:]))
    samples = sorted({n for n in (0, 1, 2, 5, 10, 20, 50, 100, 200, 500, 1000) if n <= n_max} | {n_max})

    r = inverse_power(2, p)
    series = [
        # sum_{n>=1} (1/2^n)^p
        _series_report(0, 1, r, 1, n_max, "sum_{n>=1} (1/2^n)^p"),
        # sum_{n>=0} (n+1) r^{n+1} = sum (r n + r) r^n
        _series_report(r, r, r, 0, n_max, "sum_{n>=0} (n+1)/(2^(n+1))^p"),
        # sum_{n>=0} (2n+3) r^{n+1}
        _series_report(2 * r, 3 * r, r, 0, n_max, "sum_{n>=0} (2n+3)/(2^(n+1))^p"),
    ]
    return {
        "construction": "menet",
        "n_max": n_max,
        "p": p,
        "markers_head": [a(n) for n in range(12)],
        "difference_identities": {"checked": n_max + 1, "failures": bad[:10], "pass": not bad},
        "ratio_a2n_over_a2n3": {
            "samples": [{"n": n, "ratio": ratios[n], "deviation_from_1": 1 - ratios[n]} for n in samples],
            "strictly_increasing": increasing,
            "pass": increasing and ratios[-1] < 1,
        },
        "series": series,
        "pass": not bad and increasing and all(s["bracket_holds"] for s in series),
    }


def lpd_ratio(a: MarkerSequence, n: int) -> Fraction:
    """``(a_n - S_{n-1} - n) / (S_n + n + 1)`` exactly."""
    s_prev = a.partial_sum(n - 1) if n > 1 else 0
    return Fraction(a(n) - s_prev - n, a.partial_sum(n) + n + 1)


def verify_example8_conditions(a: Optional[MarkerSequence] = None, p=1, n_max: int = 12) -> dict:
    """Summability of ``a_k / 4^{kp}`` and the liminf ratio condition for block-4 weights."""
    a = a or geometric_markers(3)
    p = normalize_p(p)
    if n_max < 1 or p < 1:
        raise DomainError("need n_max >= 1 and p >= 1")
    base = a.params.get("base")
    q = inverse_power(4, p)
    if base is not None:
        # a_k q^k = (1/base) (base q)^k
        ratio = base * q
        if ratio < 1:
            cond = _series_report(0, Fraction(1, base), ratio, 1, n_max, "sum_{k>=1} a_k/(4^k)^p")
        else:
            partial = sum((a(k) * q ** k for k in range(1, n_max + 1)), 0)
            cond = {"series": "sum_{k>=1} a_k/(4^k)^p", "terms": n_max, "partial_sum": partial,
                    "tail_bound": None, "limit": None, "bracket_holds": False,
                    "note": f"terms ratio {base}/4^p >= 1: series diverges"}
    else:
        partial = sum((a(k) * q ** k for k in range(1, n_max + 1)), 0)
        cond = {"series": "sum_{k>=1} a_k/(4^k)^p", "terms": n_max, "partial_sum": partial,
                "tail_bound": None, "limit": None, "bracket_holds": None}

    ratios = [lpd_ratio(a, n) for n in range(1, n_max + 1)]
    rep = {
        "construction": "block4",
        "markers": a.name,
        "p": p,
        "n_max": n_max,
        "summability": cond,
        "lpd_ratios": [{"n": n, "ratio": r} for n, r in enumerate(ratios, start=1)],
    }
    if base == 3:
        simplified = [Fraction(3 ** (n - 1) - Fraction(3 ** (n - 1) - 1, 2) - n,
                               Fraction(3 ** n - 1, 2) + n + 1) for n in range(1, n_max + 1)]
        dev = abs(ratios[-1] - Fraction(1, 3))
        rep["lpd_limit"] = {"claimed_limit": Fraction(1, 3), "deviation_at_n_max": dev,
                            "matches_simplified_display": simplified == ratios}
    else:
        rep["lpd_limit"] = {"claimed_limit": None, "final_ratio": ratios[-1]}
    return rep
