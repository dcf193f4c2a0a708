from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sofic.approx import find_label_isomorphism, random_free_graph, torus_graph
from sofic.groups import ball, cyclic, free_abelian, free_group
from sofic.permcalc import Permutation, fix_count
from sofic.witness import (
    InfeasibleAmplification,
    MissingProductError,
    SoficWitness,
    amplify,
    choose_amplification,
    verify_witness,
    witness_from_quotient,
    witness_to_graph,
)

C = Permutation.from_cycles


def shift(n, k=1):
    return Permutation(tuple((v + k) % n for v in range(n)))


def z_witness(n, F=None):
    Z = free_abelian(1)
    F = F if F is not None else list(ball(Z, 1).vertices)
    return witness_from_quotient(Z, [shift(n), shift(n, -1)], F)


def test_regular_representation_of_z3():
    g = cyclic(3)
    els = list(ball(g, 1).vertices)
    w = SoficWitness(g, els, 3, {e: shift(3, e[0]) for e in els}, Fraction(1, 100))
    rep = verify_witness(w)
    assert rep.multiplicativity == 1 and rep.freeness == 0 and rep.passed


def test_trivial_map_fails():
    g = cyclic(3)
    els = list(ball(g, 1).vertices)
    w = SoficWitness(g, els, 3, {e: Permutation.identity(3) for e in els}, Fraction(1, 2))
    rep = verify_witness(w)
    assert rep.freeness == 1 and not rep.passed
    assert rep.multiplicativity == 1


def test_six_cycle_z_witness():
    Z = free_abelian(1)
    F = list(ball(Z, 2).vertices)
    w = witness_from_quotient(Z, [shift(6), shift(6, -1)], F)
    rep = verify_witness(w)
    assert rep.multiplicativity == 1 and rep.freeness == 0 and rep.passed


def test_missing_product_raises():
    Z = free_abelian(1)
    one, two = (1,), (2,)
    w = SoficWitness(Z, [one], 5, {(0,): Permutation.identity(5), one: shift(5)})
    with pytest.raises(MissingProductError):
        verify_witness(w)
    w = SoficWitness(Z, [one], 5, {(0,): Permutation.identity(5), one: shift(5), two: shift(5, 2)})
    assert verify_witness(w).passed


def test_degree_mismatch():
    with pytest.raises(ValueError):
        SoficWitness(cyclic(3), [], 3, {(1,): shift(4)})


def test_identity_condition():
    g = cyclic(3)
    w = SoficWitness(g, [(1,)], 3, {(0,): shift(3), (1,): shift(3), (2,): shift(3, 2)})
    assert not verify_witness(w).identity_ok


def test_amplify_examples():
    g = free_abelian(1)
    half = C(4, [(1, 2)])  # two fixed points out of four
    w = SoficWitness(g, [(1,)], 4, {(0,): Permutation.identity(4), (1,): half, (2,): half * half})
    assert verify_witness(w).freeness == Fraction(1, 2)
    w2 = amplify(w, 2)
    assert w2.n == 16 and fix_count(w2.map[(1,)]) == 4
    assert verify_witness(w2).freeness == Fraction(1, 4)
    w3 = amplify(w, 3)
    assert verify_witness(w3).freeness <= Fraction(1, 8)


def test_amplify_homomorphism_stays_exact():
    w = z_witness(5)
    for k in (1, 2, 3):
        assert verify_witness(amplify(w, k)).multiplicativity == 1


def test_amplify_bounds_random():
    rng = np.random.default_rng(7)
    g = free_group(2)
    F = [g.generator(0), g.generator(2)]
    dom = {g.identity}
    dom |= set(F) | {g.multiply(e, f) for e in F for f in F}
    mapping = {e: Permutation.random(5, rng) for e in dom}
    mapping[g.identity] = Permutation.identity(5)
    w = SoficWitness(g, F, 5, mapping, Fraction(1, 2))
    r1 = verify_witness(w)
    for k in (2, 3):
        rk = verify_witness(amplify(w, k))
        assert rk.multiplicativity >= r1.multiplicativity**k
        assert rk.freeness <= r1.freeness**k


def test_amplify_composes():
    rng = np.random.default_rng(1)
    g = free_abelian(1)
    a = Permutation.random(4, rng)
    w = SoficWitness(g, [(1,)], 4, {(0,): Permutation.identity(4), (1,): a, (2,): a * a})
    r_a = verify_witness(amplify(amplify(w, 2), 2))
    r_b = verify_witness(amplify(w, 4))
    assert r_a.freeness == r_b.freeness == verify_witness(w).freeness ** 4
    assert r_a.multiplicativity == r_b.multiplicativity


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(1, 3), st.data())
def test_single_element_freeness_power(d, k, data):
    a = Permutation(tuple(data.draw(st.permutations(range(d)))))
    g = free_abelian(1)
    w = SoficWitness(g, [(1,)], d, {(0,): Permutation.identity(d), (1,): a, (2,): a * a})
    assert verify_witness(amplify(w, k)).freeness == verify_witness(w).freeness ** k


def test_choose_amplification():
    assert choose_amplification(Fraction(1, 2), 0, Fraction(1, 10)) == 4
    assert choose_amplification(Fraction(9, 10), Fraction(1, 100), Fraction(1, 2)) == 7
    with pytest.raises(ValueError):
        choose_amplification(Fraction(1, 2), 0, 1)
    with pytest.raises(InfeasibleAmplification):
        choose_amplification(Fraction(9, 10), Fraction(1, 2), Fraction(1, 2))


def test_from_quotient_examples():
    for n in (3, 4, 7):
        w = z_witness(n, [(1,), (-1,), (2,), (-2,)])
        assert verify_witness(w).freeness == 0
    F2 = free_group(2)
    a, b = C(3, [(1, 2, 3)]), C(3, [(1, 2)])
    w = witness_from_quotient(F2, [a, a.inverse(), b, b], [F2.generator(0), F2.generator(2)])
    assert verify_witness(w).multiplicativity == 1
    Z2 = free_abelian(2)
    n = 5
    sx = Permutation(tuple((v + 1) % n + n * (v // n) for v in range(n * n)))
    sy = Permutation(tuple((v + n) % (n * n) for v in range(n * n)))
    w = witness_from_quotient(Z2, [sx, sx.inverse(), sy, sy.inverse()], list(ball(Z2, 2).vertices))
    rep = verify_witness(w)
    assert rep.multiplicativity == 1 and rep.freeness == 0


def test_from_quotient_involution_error():
    with pytest.raises(ValueError):
        witness_from_quotient(free_abelian(1), [shift(5), shift(5)], [])


def test_to_graph_cycle_is_torus():
    g = witness_to_graph(z_witness(9))
    assert find_label_isomorphism(g, torus_graph(1, 9)) is not None
    assert g.meta["source"] == "witness"


def test_to_graph_free_matches_random_graph():
    rg = random_free_graph(2, 30, seed=4)
    F2 = free_group(2)
    hom = [Permutation(tuple(m)) for m in rg.maps]
    w = witness_from_quotient(F2, hom, [F2.generator(i) for i in range(4)])
    assert witness_to_graph(w) == rg


def test_to_graph_identity_self_loops():
    g = free_group(2)
    w = witness_from_quotient(g, [Permutation.identity(4)] * 4, [g.generator(0), g.generator(2)])
    graph = witness_to_graph(w)
    assert all(graph.target(i, v) == v for i in range(4) for v in range(4))


def test_to_graph_missing_generator():
    g = free_group(1)
    w = SoficWitness(g, [], 3, {g.identity: Permutation.identity(3)})
    with pytest.raises(MissingProductError):
        witness_to_graph(w)


def test_json_roundtrip():
    w = z_witness(6)
    doc = w.to_json()
    assert doc["entries"][0]["perm"] == [1, 2, 3, 4, 5, 6]
    w2 = SoficWitness.from_json(doc)
    assert w2.map == w.map and w2.F == w.F and w2.n == 6
