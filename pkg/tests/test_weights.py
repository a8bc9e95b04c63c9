import math
import random
import threading
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import block4_oracle_weights, geometric, log2_exact, menet_oracle_weights, oracle_prefix
from wshift.errors import DomainError, HorizonError, SpecParseError
from wshift.magnitude import LogMagnitude, ceil_log2, floor_log2, log2_fraction, power_of_two_exponent
from wshift.weights import (PrefixTable, SparseVector, basis_orbit_norm, constant_weights,
                            exact_sum, explicit_runs, norm_p, power_sum, prefix_product,
                            right_inverse_apply, shift_apply, weight_at)

# -- weight_at ---------------------------------------------------------------


def test_menet_weight_at_examples(menet_spec):
    assert weight_at(menet_spec, 4) == 2
    assert weight_at(menet_spec, 2) == 1


def test_constant_weight_at():
    spec = constant_weights(1)
    assert all(spec.weight_at(k) == 1 for k in (1, 7, 10 ** 6))


@pytest.mark.parametrize("k", [0, -3])
def test_weight_at_rejects_non_positive_index(menet_spec, k):
    with pytest.raises(DomainError):
        menet_spec.weight_at(k)


def test_builtin_weights_match_definitions(menet_spec, ex8_spec):
    n = 5000
    assert [int(w) for w in menet_spec.weights_between(1, n + 1)] == menet_oracle_weights(n)
    assert [int(w) for w in ex8_spec.weights_between(1, n + 1)] == block4_oracle_weights(geometric(3), n)


def test_weights_within_bound(menet_spec, ex8_spec):
    for spec in (menet_spec, ex8_spec):
        ws = spec.weights_between(1, 3000)
        assert all(0 < w <= spec.bound for w in ws)


def test_evaluation_is_deterministic_under_threads():
    from wshift.constructions import menet_weights

    spec = menet_weights()
    results = []

    def worker(seed):
        rng = random.Random(seed)
        ks = [rng.randint(1, 50000) for _ in range(300)]
        results.append([(k, spec.weight_at(k)) for k in ks])

    threads = [threading.Thread(target=worker, args=(s,)) for s in range(6)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    oracle = menet_oracle_weights(50000)
    for res in results:
        assert all(w == oracle[k - 1] for k, w in res)


def test_explicit_runs_coverage_and_errors():
    spec = explicit_runs([("2", 3), ("1/2", 2), ("3", None)])
    assert [spec.weight_at(k) for k in range(1, 8)] == [2, 2, 2, Fraction(1, 2), Fraction(1, 2), 3, 3]
    assert not spec.power_of_two
    with pytest.raises(SpecParseError) as exc:
        explicit_runs([("2", None), ("1", None)])
    assert exc.value.field == "runs[0].length"
    with pytest.raises(SpecParseError) as exc:
        explicit_runs([("2", 3), ("1", 4)])
    assert exc.value.field == "runs[1].length"
    with pytest.raises(SpecParseError) as exc:
        explicit_runs([("2", 3), ("0", None)])
    assert exc.value.field == "runs[1].value"


# -- magnitudes --------------------------------------------------------------


@given(st.fractions(min_value=Fraction(1, 10 ** 6), max_value=10 ** 6))
def test_floor_ceil_log2(q):
    f, c = floor_log2(q), ceil_log2(q)
    assert Fraction(2) ** f <= q < Fraction(2) ** (f + 1)
    assert Fraction(2) ** (c - 1) < q <= Fraction(2) ** c


@given(st.integers(-300, 300))
def test_power_of_two_exponent_roundtrip(e):
    assert power_of_two_exponent(Fraction(2) ** e) == e
    assert power_of_two_exponent(3 * Fraction(2) ** e) is None


def test_log2_fraction_huge():
    q = Fraction(3, 2 ** 50000)
    assert math.isclose(log2_fraction(q), math.log2(3) - 50000, rel_tol=0, abs_tol=1e-9)


@given(st.integers(-60, 60), st.fractions(min_value=Fraction(1, 2 ** 70), max_value=2 ** 70))
def test_pow2_compare_is_exact(e, c):
    sign, border = LogMagnitude.pow2(e).compare(c)
    v = Fraction(2) ** e
    assert sign == (v > c) - (v < c)
    assert not border


def test_approx_compare_flags_borderline():
    m = LogMagnitude.approx(1.0, 1e-12)
    assert m.compare(Fraction(2)) == (0, True)
    assert m.compare(Fraction(3))[1] is False


# -- prefix products and orbit norms -----------------------------------------


def test_prefix_product_examples(menet_table, ex8_table):
    assert prefix_product(menet_table, 0).exact_value() == 1
    assert prefix_product(menet_table, 4).exact_value() == 8
    assert prefix_product(ex8_table, 3).exact_value() == 16


def test_prefix_product_beyond_horizon(menet_spec):
    table = PrefixTable(menet_spec, 100)
    with pytest.raises(HorizonError):
        prefix_product(table, 101)


def test_basis_orbit_norm_examples(menet_table, ex8_table):
    for t in (menet_table, ex8_table):
        assert basis_orbit_norm(t, 0, 9).exact_value() == 1
        assert basis_orbit_norm(t, 5, 4).is_zero
    assert basis_orbit_norm(menet_table, 2, 4).exact_value() == 4


@pytest.mark.parametrize("stride", [1, 7, 64, 1024])
def test_prefix_recurrence_sampled(menet_spec, ex8_spec, stride):
    """P(k) = P(k-1) w_k on a random sample of 10^4 indices, for several strides."""
    rng = random.Random(stride)
    for spec, oracle in ((menet_spec, menet_oracle_weights), (ex8_spec, None)):
        horizon = 30000
        table = PrefixTable(spec, horizon, stride=stride)
        ws = oracle(horizon) if oracle else block4_oracle_weights(geometric(3), horizon)
        exps = [0]
        for w in ws:
            exps.append(exps[-1] + log2_exact(w))
        for k in rng.sample(range(1, horizon + 1), 10000):
            assert table.exponent(k) == table.exponent(k - 1) + log2_exact(spec.weight_at(k))
            assert table.exponent(k) == exps[k]


def test_rational_and_log_modes_agree_with_oracle():
    spec = explicit_runs([("3/2", 5), ("2/3", 4), ("5/4", None)])
    ws = spec.weights_between(1, 401)
    oracle = oracle_prefix(ws)
    exact = PrefixTable(spec, 400, stride=16)
    approx = PrefixTable(spec, 400, stride=16, exact=False)
    assert exact.mode == "rational" and approx.mode == "log"
    for k in range(401):
        assert exact.exact(k) == oracle[k]
        mag = approx.prefix(k)
        assert abs(mag.log2 - log2_fraction(oracle[k])) <= mag.err + 1e-15


def test_log_mode_error_bound_on_power_of_two_spec(menet_spec):
    exact = PrefixTable(menet_spec, 20000)
    approx = PrefixTable(menet_spec, 20000, mode="log")
    for k in range(0, 20001, 37):
        mag = approx.prefix(k)
        assert abs(mag.log2 - exact.exponent(k)) <= mag.err


def test_table_shared_between_threads(menet_spec):
    table = PrefixTable(menet_spec, 50000, stride=128, cache_chunks=4)
    oracle = menet_oracle_weights(50000)
    exps = [0]
    for w in oracle:
        exps.append(exps[-1] + log2_exact(w))
    errors = []

    def worker(seed):
        rng = random.Random(seed)
        for _ in range(2000):
            k = rng.randint(0, 50000)
            if table.exponent(k) != exps[k]:
                errors.append(k)

    threads = [threading.Thread(target=worker, args=(s,)) for s in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors


# -- sparse vectors ----------------------------------------------------------

vectors = st.dictionaries(st.integers(0, 60), st.fractions(max_denominator=50).filter(bool), max_size=6)


def test_sparse_vector_drops_zeros_and_roundtrips():
    v = SparseVector({0: 0, 3: Fraction(1, 2), 5: 0})
    assert v.support() == [3]
    assert SparseVector.from_json(v.to_json()) == v
    assert v.to_json() == {"3": "1/2"}


def test_shift_examples(menet_table):
    e4 = SparseVector.basis(4)
    assert shift_apply(menet_table, e4, 0) == e4
    assert shift_apply(menet_table, e4, 2) == SparseVector({2: 4})
    assert shift_apply(menet_table, SparseVector({0: 1, 4: 1}), 2) == SparseVector({2: 4})


def test_right_inverse_examples(ex8_table, menet_table):
    e0 = SparseVector.basis(0)
    assert right_inverse_apply(ex8_table, e0, 0) == e0
    assert right_inverse_apply(ex8_table, e0, 1) == SparseVector({1: Fraction(1, 4)})
    for t in (ex8_table, menet_table):
        assert shift_apply(t, right_inverse_apply(t, e0, 2), 2) == e0


def test_shift_horizon_errors(menet_spec):
    t = PrefixTable(menet_spec, 10)
    with pytest.raises(HorizonError):
        shift_apply(t, SparseVector.basis(11), 1)
    with pytest.raises(HorizonError):
        right_inverse_apply(t, SparseVector.basis(9), 2)


@settings(max_examples=60, deadline=None)
@given(vectors, vectors, st.fractions(max_denominator=9), st.fractions(max_denominator=9), st.integers(0, 70))
def test_shift_is_linear(menet_table, x, y, alpha, beta, n):
    x, y = SparseVector(x), SparseVector(y)
    lhs = shift_apply(menet_table, x.scale(alpha) + y.scale(beta), n)
    rhs = shift_apply(menet_table, x, n).scale(alpha) + shift_apply(menet_table, y, n).scale(beta)
    assert lhs == rhs


@settings(max_examples=60, deadline=None)
@given(vectors, st.integers(0, 50))
def test_right_inverse_round_trip(ex8_table, x, n):
    x = SparseVector(x)
    assert shift_apply(ex8_table, right_inverse_apply(ex8_table, x, n), n) == x


@settings(max_examples=60, deadline=None)
@given(vectors, st.integers(0, 70), st.sampled_from([1, 2, 3]))
def test_shift_norm_matches_direct_sum(menet_table, x, n, p):
    """||B^n x||_p^p by direct weight products versus shift_apply + power_sum."""
    ws = [1] + menet_oracle_weights(200)
    x = SparseVector(x)
    direct = Fraction(0)
    for s, v in x.items():
        if s >= n:
            prod = math.prod(ws[s - n + 1:s + 1])
            direct += Fraction(prod) ** p * abs(v) ** p
    assert power_sum(shift_apply(menet_table, x, n), p) == direct
    assert math.isclose(norm_p(shift_apply(menet_table, x, n), p), float(direct) ** (1 / p), rel_tol=1e-12)


def test_norm_examples():
    assert norm_p(SparseVector(), 1) == 0
    assert norm_p(SparseVector.basis(3), 2.5) == 1
    assert math.isclose(norm_p(SparseVector({0: 1, 1: 1}), 2), math.sqrt(2))
    with pytest.raises(DomainError):
        norm_p(SparseVector.basis(0), 0.5)


@given(st.lists(st.fractions(max_denominator=2 ** 40), max_size=20))
def test_exact_sum_matches_builtin_sum(values):
    assert exact_sum(values) == sum(values, Fraction(0))


def test_exact_sum_dyadic_terms():
    vals = [Fraction(3, 2 ** k) for k in range(0, 400, 7)] + [Fraction(-5, 2 ** 3)]
    assert exact_sum(vals) == sum(vals, Fraction(0))
