from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sofic.permcalc import (
    CycleStats,
    DegreeCapError,
    NotConjugateError,
    OddPermutationError,
    Permutation,
    covering_hypothesis,
    composition_bound_margin,
    conjugator,
    covering_closure,
    covering_depth,
    cycle_stats,
    disjoint_union_power,
    fix_count,
    perm_matrix_trace,
    product_power,
    realize_stats,
)

C = Permutation.from_cycles


def perms(max_d=20):
    return st.integers(1, max_d).flatmap(lambda d: st.permutations(range(d)).map(Permutation))


def test_cycle_stats_examples():
    assert cycle_stats(Permutation.identity(5)).counts == {1: 5}
    assert cycle_stats(C(5, [(1, 2), (3, 4, 5)])).counts == {2: 1, 3: 1}
    seven = C(7, [tuple(range(1, 8))])
    assert cycle_stats(seven).counts == {7: 1} and fix_count(seven) == 0


def test_fix_count_examples():
    assert fix_count(Permutation.identity(4)) == 4
    assert fix_count(C(4, [(1, 2)])) == 2
    assert fix_count(C(4, [(1, 2, 3, 4)])) == 0


def test_frequencies_sum():
    st_ = cycle_stats(C(9, [(1, 2), (3, 4, 5)]))
    assert sum(t * v for t, v in st_.frequencies().items()) == 1
    with pytest.raises(ValueError):
        CycleStats(4, {2: 1})


def test_disjoint_union_examples():
    p = disjoint_union_power(C(2, [(1, 2)]), 3)
    assert p.degree == 6 and fix_count(p) == 0 and cycle_stats(p).counts == {2: 3}
    assert disjoint_union_power(Permutation.identity(3), 2) == Permutation.identity(6)
    assert fix_count(disjoint_union_power(C(3, [(1, 2)]), 2)) == 2


def test_product_power_examples():
    p = C(4, [(1, 2)])
    q = product_power(p, 2)
    assert q.degree == 16 and fix_count(q) == 4
    # brute-force oracle: diagonal action on pairs
    for x, y in product(range(4), repeat=2):
        assert q(x + 4 * y) == p(x) + 4 * p(y)
    assert product_power(Permutation.identity(3), 2) == Permutation.identity(9)
    assert fix_count(product_power(C(3, [(1, 2, 3)]), 2)) == 0


def test_product_power_cap():
    with pytest.raises(DegreeCapError):
        product_power(Permutation.identity(100), 4)


def test_product_power_is_homomorphism():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a, b = Permutation.random(5, rng), Permutation.random(5, rng)
        for k in (1, 2, 3):
            assert product_power(a * b, k) == product_power(a, k) * product_power(b, k)


@settings(max_examples=100, deadline=None)
@given(perms(), st.integers(1, 3))
def test_fix_identities(p, k):
    assert fix_count(disjoint_union_power(p, k)) == k * fix_count(p)
    if p.degree**k <= 10**5:
        q = product_power(p, k)
        assert fix_count(q) == fix_count(p) ** k
        assert sum(t * c for t, c in cycle_stats(q).counts.items()) == p.degree**k


def test_realize_examples():
    p = realize_stats({2: Fraction(1, 2)}, 10)
    assert cycle_stats(p).counts == {2: 5} and fix_count(p) == 0
    p = realize_stats({3: Fraction(1, 4)}, 13)
    assert cycle_stats(p).counts == {3: 3, 4: 1}
    p = realize_stats({}, 5)
    assert cycle_stats(p).counts == {5: 1}
    with pytest.raises(ValueError):
        realize_stats({2: Fraction(3, 5)}, 10)


def test_conjugator_examples():
    s, r = C(5, [(1, 2, 3)]), C(5, [(2, 4, 5)])
    c = conjugator(s, r)
    assert c * s * c.inverse() == r
    c = conjugator(s, s)
    assert c * s * c.inverse() == s
    with pytest.raises(NotConjugateError):
        conjugator(C(3, [(1, 2)]), C(3, [(1, 2, 3)]))


@settings(max_examples=100, deadline=None)
@given(perms(12), st.data())
def test_conjugator_iff_same_type(s, data):
    r = Permutation(tuple(data.draw(st.permutations(range(s.degree)))))
    same = cycle_stats(s) == cycle_stats(r)
    try:
        c = conjugator(s, r)
    except NotConjugateError:
        assert not same
    else:
        assert same and c * s * c.inverse() == r


def test_margin_examples():
    rng = np.random.default_rng(0)
    a = Permutation.random(5, rng)
    for t in range(1, 6):
        assert composition_bound_margin(a, Permutation.identity(5), t) == 0
    assert composition_bound_margin(Permutation.identity(4), C(4, [(1, 2)]), 1) == 0


@settings(max_examples=200, deadline=None)
@given(perms(8), st.data())
def test_margin_nonnegative(a, data):
    b = Permutation(tuple(data.draw(st.permutations(range(a.degree)))))
    for t in range(1, a.degree + 1):
        assert composition_bound_margin(a, b, t) >= 0


def test_covering_examples():
    s = C(5, [(1, 2), (3, 4)])
    assert len(covering_closure(s, 4)) == 60
    assert covering_closure(Permutation.identity(5), 4) == {tuple(range(5))}
    # the double transpositions of A4 lie in the normal Klein four-group, so
    # the closure stops there even though the orbit hypothesis holds
    v4 = covering_closure(C(4, [(1, 2), (3, 4)]), 4)
    assert len(v4) == 4
    assert covering_depth(s) is not None and covering_depth(s) <= 4


def test_covering_errors():
    with pytest.raises(OddPermutationError):
        covering_closure(C(4, [(1, 2)]), 2)
    with pytest.raises(DegreeCapError):
        covering_closure(Permutation.identity(8), 1)


def test_covering_identity_padding():
    s = C(5, [(1, 2, 3)])
    levels = [covering_closure(s, k) for k in range(4)]
    for a, b in zip(levels, levels[1:]):
        assert a <= b


@pytest.mark.parametrize("n", [5, 6, 7])
def test_covering_reaches_alternating_group(n):
    from itertools import permutations
    from math import factorial

    seen = set()
    for img in permutations(range(n)):
        p = Permutation(img)
        key = tuple(sorted(cycle_stats(p).counts.items()))
        if key in seen or not covering_hypothesis(p):
            continue
        seen.add(key)
        assert len(covering_closure(p, 4)) == factorial(n) // 2


def test_covering_hypothesis():
    assert covering_hypothesis(C(5, [(1, 2), (3, 4)]))
    assert not covering_hypothesis(C(5, [(1, 2, 3)]))
    assert not covering_hypothesis(C(4, [(1, 2)]))


def test_perm_matrix_trace():
    assert perm_matrix_trace(Permutation.identity(3)) == 3
    assert perm_matrix_trace(C(3, [(1, 2, 3)])) == 0
    assert perm_matrix_trace(C(5, [(1, 2)])) == 3


@settings(max_examples=50, deadline=None)
@given(perms(15))
def test_perm_matrix_trace_is_fix_count(p):
    assert perm_matrix_trace(p) == fix_count(p)


def test_one_line_roundtrip():
    p = C(6, [(1, 4), (2, 5, 6)])
    assert Permutation.from_one_line(p.one_line()) == p
    with pytest.raises(ValueError):
        Permutation((0, 0, 1))
