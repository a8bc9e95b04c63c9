import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wshift.density import (IntSet, count_upto, density_profile, g_set, intersect_g_sets,
                            profile_from_membership, set_complement, set_intersect, set_union)
from wshift.errors import DomainError, PrecisionWarning
from wshift.weights import PrefixTable, basis_orbit_norm, explicit_runs

LIMIT = 80


def members(a: IntSet, hi: int = LIMIT):
    return {n for n in range(hi + 1) if n in a}


@st.composite
def intsets(draw):
    ivs = draw(st.lists(st.tuples(st.integers(0, 60), st.integers(0, 12)), max_size=5))
    tail = draw(st.one_of(st.none(), st.integers(0, 70)))
    return IntSet(tuple((a, a + d) for a, d in ivs), tail)


def test_intersection_example():
    a = IntSet(((0, 3),), 7)
    b = IntSet(((0, 1),), 3)
    assert set_intersect(a, b) == IntSet(((0, 1), (3, 3)), 7)
    assert members(a & b, 20) == {n for n in range(21) if n in a and n in b}


def test_trivial_algebra():
    a = IntSet(((2, 5),), 9)
    assert (a & IntSet.empty()).is_empty
    assert set_complement(IntSet.ray(0)).is_empty
    assert set_union(a, IntSet.empty()) == a


def test_canonical_form():
    a = IntSet(((5, 6), (0, 2), (3, 4), (9, 9)), 10)
    assert a.intervals == ((0, 6),) and a.tail == 9
    assert IntSet(((4, 3),)).is_empty


@settings(max_examples=150)
@given(intsets(), intsets())
def test_algebra_matches_elementwise(a, b):
    ma, mb = members(a), members(b)
    assert members(a | b) == ma | mb
    assert members(a & b) == ma & mb
    assert members(~a) == set(range(LIMIT + 1)) - ma
    assert members(a - b) == ma - mb
    assert (a <= b) == (members(a, 200) <= members(b, 200))


@settings(max_examples=150)
@given(intsets(), intsets())
def test_de_morgan_and_idempotence(a, b):
    assert ~(a | b) == (~a & ~b)
    assert ~(a & b) == (~a | ~b)
    assert a | a == a and a & a == a
    assert ~~a == a


@settings(max_examples=150)
@given(intsets(), st.integers(0, 120))
def test_membership_agrees_with_counts(a, n):
    prev = count_upto(a, n - 1) if n else 0
    assert (n in a) == (count_upto(a, n) - prev == 1)
    assert count_upto(a, n) == sum(1 for m in range(n + 1) if m in a)


@given(intsets())
def test_serialization_roundtrip(a):
    assert IntSet.from_dict(a.to_dict()) == a


def test_count_examples():
    evens = IntSet(tuple((2 * i, 2 * i) for i in range(10)))
    assert count_upto(evens, 10) == 6
    a = IntSet(((0, 1), (3, 3), (7, 9), (17, 27)))
    assert count_upto(a, 44) == 17
    assert count_upto(IntSet.empty(), 100) == 0


def _scan(a: IntSet, lo: int, hi: int):
    """Exhaustive min and max of r(N') = count/(N'+1) over [lo, hi]."""
    rs = [(Fraction(count_upto(a, n), n + 1), n) for n in range(lo, hi + 1)]
    return min(rs), max(rs, key=lambda t: (t[0], -t[1]))


def test_density_profile_full_ray():
    prof = density_profile(IntSet.ray(0), 1000)
    assert prof.lower == 1 and prof.upper == 1
    assert all(r == 1 for r in prof.ratios)


def test_density_profile_example_a_window():
    a = IntSet(((0, 1), (3, 3), (7, 9), (17, 27)))
    prof = density_profile(a, 44, window_start=2)
    assert prof.lower == Fraction(6, 17) and prof.lower_at == 16


@settings(max_examples=80, deadline=None)
@given(intsets(), st.integers(1, 150), st.integers(0, 150))
def test_density_extremes_match_exhaustive_scan(a, n, n0):
    n0 = min(n0, n)
    prof = density_profile(a, n, window_start=n0)
    (lo, lo_at), (hi, _) = _scan(a, n0, n)
    assert prof.lower == lo and prof.lower_at == lo_at
    assert prof.upper == hi
    assert 0 <= prof.lower <= prof.upper <= 1
    for c, r, run_lo in zip(prof.checkpoints, prof.ratios, prof.running_lower):
        assert run_lo <= r
        assert run_lo == _scan(a, n0, c)[0][0]
    assert all(x >= y for x, y in zip(prof.running_lower, prof.running_lower[1:]))


def test_profile_from_membership_matches_intset():
    rng = np.random.default_rng(0)
    mask = rng.random(5000) < 0.3
    p1 = profile_from_membership(mask)
    p2 = density_profile(IntSet.from_members(np.flatnonzero(mask).tolist()), 4999)
    assert p1.to_dict() == p2.to_dict()


def test_density_profile_rejects_bad_horizon():
    with pytest.raises(DomainError):
        density_profile(IntSet.ray(0), 0)


# -- G-sets ------------------------------------------------------------------


def test_g_set_examples(ex8_table):
    assert g_set(ex8_table, 2, 1) == IntSet(((0, 1),), 3)
    assert g_set(ex8_table, 6, 1) == IntSet(((0, 3),), 7)
    assert intersect_g_sets(ex8_table, [2, 6, 16], 1) == IntSet(((0, 1), (3, 3), (7, 9)), 17)
    assert intersect_g_sets(ex8_table, [6], 1) == g_set(ex8_table, 6, 1)


def test_g_set_dominating_threshold(menet_table):
    top = max(basis_orbit_norm(menet_table, n, 50).exact_value() for n in range(51))
    assert g_set(menet_table, 50, top) == IntSet.ray(0)


def test_intersect_requires_indices(ex8_table):
    with pytest.raises(DomainError):
        intersect_g_sets(ex8_table, [], 1)


@pytest.mark.parametrize("which", ["menet", "ex8"])
def test_g_set_membership_matches_orbit_norms(which, menet_table, ex8_table):
    table = menet_table if which == "menet" else ex8_table
    for k in range(0, 201):
        for c in (Fraction(1), Fraction(3), Fraction(16)):
            g = g_set(table, k, c)
            for n in range(k + 6):
                assert (n in g) == (basis_orbit_norm(table, n, k).exact_value() <= c)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 300), st.fractions(min_value=Fraction(1, 8), max_value=64),
       st.fractions(min_value=Fraction(1, 8), max_value=64))
def test_g_set_monotone_in_c(menet_table, k, c1, c2):
    lo, hi = sorted((c1, c2))
    assert g_set(menet_table, k, lo) <= g_set(menet_table, k, hi)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 400), min_size=1, max_size=6), st.integers(0, 400))
def test_intersection_shrinks(ex8_table, ks, extra):
    assert intersect_g_sets(ex8_table, ks + [extra], 1) <= intersect_g_sets(ex8_table, ks, 1)


def test_borderline_warning_in_log_mode():
    spec = explicit_runs([("3/2", 4), ("1", None)])
    table = PrefixTable(spec, 10, exact=False)
    c = Fraction(3, 2) ** 2
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        g = g_set(table, 4, c)
    assert any(issubclass(w.category, PrecisionWarning) for w in rec)
    # pessimistic: the borderline iterate n=2 (product exactly C) is excluded
    assert 2 not in g and 0 in g
