from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import block4_oracle_weights, geometric, menet_oracle_weights, oracle_prefix
from wshift.density import IntSet, density_profile
from wshift.errors import ConstructionError, DomainError, HorizonError, InterferenceError, PreconditionError
from wshift.fhc_vector import (SeparatedFamily, TargetSet, build_fhc_candidate, build_separated_family,
                               criterion_conditions_check, measure_visit_density, visit_report)
from wshift.weights import PrefixTable, SparseVector, constant_weights, explicit_runs

E0 = SparseVector.basis(0)


def brute_distance(pref, x: SparseVector, y: SparseVector, m: int, p: int) -> Fraction:
    """``||B^m x - y||_p^p`` from the oracle prefix products."""
    diff = {}
    for s, v in x.items():
        if s >= m:
            diff[s - m] = v * pref[s] / pref[s - m]
    for i, v in y.items():
        diff[i] = diff.get(i, 0) - v
    return sum((abs(v) ** p for v in diff.values()), Fraction(0))


# -- separated families ------------------------------------------------------


def test_single_class_density():
    fam = build_separated_family(1, 10 ** 5)
    members = fam.members(1, 10 ** 5)
    prof = density_profile(IntSet.from_members(members.tolist()), 10 ** 5, window_start=1000)
    assert prof.lower >= Fraction(1, 8)


def test_class_gaps_respect_separation():
    fam = build_separated_family(3, 20000)
    a2, a3 = fam.members(2, 20000), fam.members(3, 20000)
    gap = np.abs(a2[:, None] - a3[None, :]).min()
    assert gap >= 5
    for l in (1, 2, 3):
        assert np.diff(fam.members(l, 20000)).min() >= 2 * l


@pytest.mark.parametrize("L,g", [(1, 1), (2, 1), (3, 1), (3, 8), (4, 2)])
def test_family_invariants_by_brute_force(L, g):
    horizon = 60000
    fam = build_separated_family(L, horizon, {"spacing": g})
    rep = fam.report
    assert rep["pass"]
    members = {l: fam.members(l, horizon) for l in range(1, L + 1)}
    # every pair of members from the full set, not just consecutive ones
    pts = sorted((int(n), l) for l, ms in members.items() for n in ms)
    assert len({n for n, _ in pts}) == len(pts)
    window = 3 * 2 * L * g + 2 * L
    for i, (n, l) in enumerate(pts):
        for n2, l2 in pts[i + 1:]:
            if n2 - n > window:
                break
            assert n2 - n >= l + l2
    owner = {int(n): l for l, ms in members.items() for n in ms}
    assert all(fam.class_of(n) == owner.get(n) for n in range(0, 5000))


def test_family_class_of_matches_members():
    fam = build_separated_family(3, 5000, {"spacing": 2})
    label = [fam.class_of(n) or 0 for n in range(5001)]
    assert np.array_equal(np.array(label), fam.labels(5000))


def test_family_declared_density_window():
    fam = build_separated_family(2, 200000)
    for entry in fam.report["classes"]:
        l = entry["class"]
        assert entry["lower_estimate"] >= fam.declared_density(l) / 2


def test_family_rejects_small_blocks():
    with pytest.raises(ConstructionError):
        build_separated_family(3, 1000, {"block_length": 20})


def test_family_rejects_short_horizon():
    with pytest.raises(ConstructionError):
        build_separated_family(3, 50)


def test_family_rejects_bad_arguments():
    with pytest.raises(DomainError):
        build_separated_family(0, 100)
    with pytest.raises(DomainError):
        build_separated_family(1, 100, {"colour": 3})


# -- targets -----------------------------------------------------------------


def test_target_enumeration_head():
    first = TargetSet().first(5)
    assert first == [E0, SparseVector({0: -1}), SparseVector({1: Fraction(1, 2)}),
                     SparseVector({1: Fraction(-1, 2)}), SparseVector.basis(1)]


def test_target_enumeration_is_injective_and_nonzero():
    ts = TargetSet(max_level=2).first(10 ** 4)
    assert all(ts) and len(set(ts)) == len(ts)
    assert all(t.max_index() < 2 for t in ts)


# -- criterion conditions ----------------------------------------------------


def test_conditions_for_basis_vector(ex8_table):
    rep = criterion_conditions_check(ex8_table, E0, 1)
    assert rep["pass"]
    assert rep["condition_2"]["status"] == "converges"


def test_conditions_fail_without_fhc():
    t = PrefixTable(constant_weights(1), 100)
    rep = criterion_conditions_check(t, E0, 1)
    assert not rep["pass"] and rep["condition_2"]["status"] == "diverges"


# -- candidates --------------------------------------------------------------


def test_candidate_entries_are_inverse_prefix_products(ex8_spec):
    horizon = 20000
    table = PrefixTable(ex8_spec, horizon + 5)
    fam = build_separated_family(1, horizon)
    cand = build_fhc_candidate(table, [E0], fam, 1, horizon)
    pref = oracle_prefix(block4_oracle_weights(geometric(3), horizon + 5))
    members = fam.members(1, horizon).tolist()
    assert cand.x.support() == members
    assert all(cand.x[n] == 1 / pref[n] for n in members)
    assert cand.ledger["consistent"]
    assert cand.ledger["norm_p_power"] == sum(1 / pref[n] for n in members)


def test_empty_family_gives_zero_vector(ex8_spec):
    table = PrefixTable(ex8_spec, 100)
    fam = SeparatedFamily(1, 10, 1)
    cand = build_fhc_candidate(table, [E0], fam, 1, 1)
    assert cand.x == SparseVector()
    assert cand.ledger["total_mass"] == 0


def test_candidate_export_roundtrip(menet_spec):
    table = PrefixTable(menet_spec, 30000)
    fam = build_separated_family(2, 20000)
    cand = build_fhc_candidate(table, TargetSet(), fam, 2, 20000)
    assert SparseVector.from_json(cand.export()) == cand.x
    assert cand.ledger["consistent"]
    assert cand.targets == TargetSet().first(2)


def test_candidate_rejects_wide_targets(ex8_spec):
    table = PrefixTable(ex8_spec, 1000)
    fam = build_separated_family(1, 800)
    with pytest.raises(DomainError):
        build_fhc_candidate(table, [SparseVector({0: 1, 2: 1})], fam, 1, 800)


def test_candidate_requires_fhc():
    table = PrefixTable(constant_weights(1), 1000)
    fam = build_separated_family(1, 800)
    with pytest.raises(PreconditionError):
        build_fhc_candidate(table, [E0], fam, 1, 800)


def test_candidate_horizon_error(ex8_spec):
    table = PrefixTable(ex8_spec, 500)
    fam = build_separated_family(1, 800)
    with pytest.raises(HorizonError):
        build_fhc_candidate(table, [E0], fam, 1, 800)


def test_candidate_detects_interference(ex8_spec):
    class Crowded(SeparatedFamily):
        def members(self, l, hi):
            return np.array([3, 4], dtype=np.int64)

    table = PrefixTable(ex8_spec, 100)
    with pytest.raises(InterferenceError):
        build_fhc_candidate(table, [SparseVector({0: 1, 1: 1})], Crowded(1, 10, 1), 1, 50)


# -- visits ------------------------------------------------------------------


def test_visits_of_basis_vector_to_zero(menet_table):
    n = 3000
    rep = visit_report(menet_table, SparseVector.basis(5), SparseVector(), 1, 1, n)
    assert np.flatnonzero(rep.mask).tolist() == list(range(6, n + 1))


def test_zero_orbit_always_visits_zero(menet_table):
    prof = measure_visit_density(menet_table, SparseVector(), SparseVector(), Fraction(1, 10), 1, 5000)
    assert prof.lower == 1


@pytest.mark.parametrize("p", [1, 2])
def test_visit_mask_matches_brute_force(menet_spec, p):
    horizon = 3000
    table = PrefixTable(menet_spec, horizon + 10)
    fam = build_separated_family(2, horizon, {"spacing": 4})
    cand = build_fhc_candidate(table, TargetSet(), fam, 2, horizon, p)
    pref = oracle_prefix(menet_oracle_weights(horizon + 10))
    for y, eps in ((cand.targets[0], Fraction(1, 10)), (cand.targets[1], Fraction(1, 10)),
                   (SparseVector({0: Fraction(1, 3)}), Fraction(2, 3))):
        rep = visit_report(table, cand.x, y, eps, p, horizon)
        brute = [brute_distance(pref, cand.x, y, m, p) < eps ** p for m in range(horizon + 1)]
        assert rep.mask.tolist() == brute


@settings(max_examples=25, deadline=None)
@given(st.dictionaries(st.integers(0, 40), st.fractions(max_denominator=8).filter(bool), max_size=5),
       st.dictionaries(st.integers(0, 2), st.fractions(max_denominator=4).filter(bool), max_size=3),
       st.fractions(min_value=Fraction(1, 20), max_value=3, max_denominator=20))
def test_visit_mask_matches_brute_force_random(x, y, eps):
    spec = explicit_runs([("2", 3), ("1", 4), ("3/2", None)])
    table = PrefixTable(spec, 80)
    pref = oracle_prefix(spec.weights_between(1, 81))
    x, y = SparseVector(x), SparseVector(y)
    rep = visit_report(table, x, y, eps, 1, 60)
    assert rep.mask.tolist() == [brute_distance(pref, x, y, m, 1) < eps for m in range(61)]


def test_visit_rejects_bad_eps(menet_table):
    with pytest.raises(DomainError):
        visit_report(menet_table, E0, E0, 0, 1, 10)
