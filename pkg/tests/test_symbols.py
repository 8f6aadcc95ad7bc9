import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ifslab.errors import BudgetExceeded, InvalidInput
from ifslab.symbols import (
    Bernoulli,
    CompleteConnections,
    Markov,
    builtin_ccc,
    champernowne_prefix_length,
    champernowne_stream,
    cylinder_measure,
    doubling_ratio,
    explicit_stream,
    forbidden_22_chain,
    markov_base,
    markov_is_disjunctive,
    missing_words,
    occurrences,
    periodic_stream,
    stochastic_stream,
)


def test_champernowne_prefix():
    assert champernowne_stream(2).take(10).tolist() == [1, 2, 1, 1, 1, 2, 2, 1, 2, 2]
    s = champernowne_stream(3)
    assert s.take(3).tolist() == [1, 2, 3]
    assert s.take(4).tolist() == [1, 1, 1, 2]


@pytest.mark.parametrize("n,m", [(2, 1), (2, 4), (3, 3), (4, 2)])
def test_champernowne_contains_all_words(n, m):
    L = champernowne_prefix_length(n, m)
    assert missing_words(champernowne_stream(n).take(L), m, n) == []


def test_missing_words_lexicographic():
    assert missing_words([1, 1, 1], 2, 2) == [(1, 2), (2, 1), (2, 2)]
    with pytest.raises(BudgetExceeded):
        missing_words([1], 21, 2)


def test_occurrences_count_overlaps():
    assert occurrences([1, 1, 1, 2], [1, 1]) == [1, 2]
    assert occurrences([1, 1, 1, 2], [1, 1], start=2) == [2]
    assert occurrences([1], [1, 1]) == []


def kernels():
    return [
        Bernoulli([0.5, 0.5]),
        Bernoulli([0.2, 0.3, 0.5]),
        forbidden_22_chain(2),
        forbidden_22_chain(3),
        builtin_ccc(0.1),
    ]


@pytest.mark.parametrize("idx", range(5))
@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), cuts=st.lists(st.integers(1, 700), min_size=1, max_size=6))
def test_stream_is_slice_independent(idx, seed, cuts):
    k = kernels()[idx]
    whole = stochastic_stream(k, seed).take(sum(cuts))
    s = stochastic_stream(k, seed)
    parts = np.concatenate([s.take(c) for c in cuts])
    assert np.array_equal(whole, parts)


def test_ccc_alpha_one_is_uniform_bernoulli():
    a = stochastic_stream(CompleteConnections(markov_base(forbidden_22_chain()), 1.0, 2), 11).take(5000)
    b = stochastic_stream(Bernoulli([0.5, 0.5]), 11).take(5000)
    assert np.array_equal(a, b)


def test_forbidden_22_never_emits_22():
    for n in (2, 3):
        w = stochastic_stream(forbidden_22_chain(n), 5).take(20000)
        assert occurrences(w, [2, 2]) == []
        assert not markov_is_disjunctive(forbidden_22_chain(n))
    assert markov_is_disjunctive(Markov([0.5, 0.5], [[0.5, 0.5], [0.3, 0.7]]))


def test_stream_frequencies():
    w = stochastic_stream(Bernoulli([0.2, 0.8]), 3).take(200000)
    assert abs((w == 1).mean() - 0.2) < 0.005


def test_cyclic_streams():
    assert periodic_stream([1, 2, 2]).take(7).tolist() == [1, 2, 2, 1, 2, 2, 1]
    s = explicit_stream([3, 1], 3)
    assert s.take(3).tolist() == [3, 1, 3]
    assert next(s) == 1
    with pytest.raises(InvalidInput):
        periodic_stream([1, 4], 3)


def test_probability_validation():
    with pytest.raises(InvalidInput):
        Bernoulli([0.5, 0.6])
    with pytest.raises(InvalidInput):
        Bernoulli([-0.5, 1.5])
    with pytest.raises(InvalidInput):
        Markov([0.5, 0.5], [[1, 0]])
    with pytest.raises(InvalidInput):
        CompleteConnections(markov_base(forbidden_22_chain()), 0.0, 2)


def test_cylinder_measure_oracle():
    k = forbidden_22_chain(2)
    # 1/2 * 1/2 * 1 * 1/2
    assert cylinder_measure(k, [1, 2, 1, 1]) == 0.125
    assert cylinder_measure(k, [2, 2]) == 0.0
    assert doubling_ratio(k, [1, 2, 2]).zero_measure


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(1, 2), min_size=2, max_size=20))
def test_ccc_doubling_bound(prefix):
    alpha = 0.1
    r = doubling_ratio(builtin_ccc(alpha), prefix)
    assert not r.zero_measure
    assert r.value <= 2 / alpha + 1e-12


def test_cylinder_measures_sum_to_one():
    k = builtin_ccc(0.3)
    total = sum(cylinder_measure(k, w) for w in itertools.product((1, 2), repeat=6))
    assert abs(total - 1) < 1e-12


def test_uniform_doubling_exactly_two():
    for w in itertools.product((1, 2), repeat=5):
        assert doubling_ratio(Bernoulli([0.5, 0.5]), w).value == 2.0
