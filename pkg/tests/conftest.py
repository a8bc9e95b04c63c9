"""Shared brute-force oracles.

The oracles rebuild weights straight from the defining descriptions
(interval membership, block concatenation) and multiply weights one by
one; they never call the package's run generators or prefix tables.
"""

from fractions import Fraction
from typing import List

import pytest

from wshift.constructions import example8_weights, menet_weights
from wshift.weights import PrefixTable


def menet_oracle_weights(count: int) -> List[int]:
    """``w_k = 2`` iff ``1 + n(n+1) <= k < 1 + (n+1)^2`` for some ``n >= 0``."""
    out = []
    for k in range(1, count + 1):
        two = False
        n = 0
        while 1 + n * (n + 1) <= k:
            if k < 1 + (n + 1) ** 2:
                two = True
            n += 1
        out.append(2 if two else 1)
    return out


def block4_oracle_weights(a, count: int) -> List[int]:
    """Concatenate ``4, 1^{a_1}, 4, 1^{a_2}, ...``."""
    out: List[int] = []
    n = 1
    while len(out) < count:
        out.append(4)
        out.extend([1] * a(n))
        n += 1
    return out[:count]


def geometric(base: int = 3):
    return lambda n: base ** (n - 1)


def oracle_prefix(weights: List) -> List[Fraction]:
    """``P(0..len)`` by repeated multiplication."""
    out = [Fraction(1)]
    for w in weights:
        out.append(out[-1] * Fraction(w))
    return out


def log2_exact(v) -> int:
    v = int(v)
    assert v & (v - 1) == 0
    return v.bit_length() - 1


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """Expose the call-phase report to fixtures (used for the acceptance lines)."""
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


@pytest.fixture(scope="session")
def menet_spec():
    return menet_weights()


@pytest.fixture(scope="session")
def ex8_spec():
    return example8_weights(3)


@pytest.fixture(scope="session")
def menet_table(menet_spec):
    return PrefixTable(menet_spec, 20000)


@pytest.fixture(scope="session")
def ex8_table(ex8_spec):
    return PrefixTable(ex8_spec, 20000)
