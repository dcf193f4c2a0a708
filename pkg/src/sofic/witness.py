"""Permutation witnesses: finite sets of group elements mapped into ``S_n``.

A witness is good when it is almost multiplicative on pairs from ``F`` and
almost fixed-point free on nontrivial elements of ``F``.  Quality is reported
as exact rationals.  Amplification replaces every permutation by its ``k``-fold
product power, which raises both fixed-point ratios to the ``k``-th power.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .approx import LabeledGraph, quotient_graph
from .groups import Element, MarkedGroup, group_from_json
from .permcalc import PRODUCT_POWER_CAP, Permutation, fix_count, product_power


class MissingProductError(KeyError):
    """A product ``ef`` needed for the multiplicativity check has no permutation."""


class InfeasibleAmplification(ValueError):
    pass


@dataclass(frozen=True)
class SoficWitness:
    group: MarkedGroup
    F: tuple
    n: int
    map: Mapping[Element, Permutation]
    epsilon: Fraction = Fraction(1, 10)

    def __post_init__(self):
        object.__setattr__(self, "F", tuple(self.F))
        object.__setattr__(self, "map", dict(self.map))
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        for e, p in self.map.items():
            if p.degree != self.n:
                raise ValueError(f"permutation for {e!r} has degree {p.degree}, expected {self.n}")

    def phi(self, e: Element) -> Permutation:
        try:
            return self.map[e]
        except KeyError:
            raise MissingProductError(e) from None

    # -- serialization --------------------------------------------------------
    def to_json(self) -> dict:
        g = self.group
        return {
            "group": g.to_json(),
            "n": self.n,
            "epsilon": str(self.epsilon),
            "F": [list(g.word_of(e)) for e in self.F],
            "entries": [{"word": list(g.word_of(e)), "perm": p.one_line()}
                        for e, p in self.map.items()],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "SoficWitness":
        g = group_from_json(doc["group"])
        mapping = {}
        for entry in doc["entries"]:
            mapping[g.evaluate(g.parse_word(entry["word"]))] = Permutation.from_one_line(entry["perm"])
        if "F" in doc:
            F = [g.evaluate(g.parse_word(w)) for w in doc["F"]]
        else:
            F = list(mapping)
        return cls(g, F, int(doc["n"]), mapping, Fraction(doc.get("epsilon", "1/10")))


@dataclass
class WitnessReport:
    multiplicativity: Fraction
    freeness: Fraction
    identity_ok: bool
    epsilon: Fraction
    worst_pair: tuple | None = None
    worst_element: Element | None = None
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = (self.identity_ok and self.multiplicativity >= 1 - self.epsilon
                       and self.freeness <= self.epsilon)

    def to_json(self) -> dict:
        return {
            "multiplicativity": str(self.multiplicativity),
            "freeness": str(self.freeness),
            "identity_ok": self.identity_ok,
            "epsilon": str(self.epsilon),
            "passed": self.passed,
        }


def verify_witness(w: SoficWitness) -> WitnessReport:
    """Exact worst-case ratios over ``F x F`` (multiplicativity) and ``F \\ {1}`` (freeness)."""
    g = w.group
    ident = g.identity
    identity_ok = w.map.get(ident, Permutation.identity(w.n)) == Permutation.identity(w.n)
    mult = Fraction(1)
    worst_pair = None
    for e in w.F:
        pe = w.phi(e)
        for f in w.F:
            ef = g.multiply(e, f)
            if ef not in w.map:
                raise MissingProductError(f"product of {e!r} and {f!r} has no permutation; extend the map")
            # fixed points of phi(e) phi(f) phi(ef)^-1, i.e. points x with phi(e)phi(f)(y) = phi(ef)(y)
            pf, pef = w.phi(f), w.map[ef]
            hits = sum(1 for y in range(w.n) if pe(pf(y)) == pef(y))
            ratio = Fraction(hits, w.n)
            if ratio < mult:
                mult, worst_pair = ratio, (e, f)
    free = Fraction(0)
    worst_el = None
    for e in w.F:
        if e == ident:
            continue
        ratio = Fraction(fix_count(w.phi(e)), w.n)
        if worst_el is None or ratio > free:
            free, worst_el = ratio, e
    return WitnessReport(mult, free, identity_ok, w.epsilon, worst_pair, worst_el)


def amplify(w: SoficWitness, k: int, cap: int = PRODUCT_POWER_CAP) -> SoficWitness:
    """Replace each permutation by its ``k``-fold product power (degree ``n^k``)."""
    if k < 1:
        raise ValueError("k must be positive")
    mapping = {e: product_power(p, k, cap) for e, p in w.map.items()}
    return SoficWitness(w.group, w.F, w.n**k, mapping, w.epsilon)


def choose_amplification(delta, xi, epsilon) -> int:
    """Least ``k`` with ``delta^k < epsilon``, provided also ``(1 - xi)^k > 1 - epsilon``."""
    delta, xi, epsilon = Fraction(delta), Fraction(xi), Fraction(epsilon)
    if not 0 < delta < 1:
        raise ValueError("need 0 < delta < 1")
    if not 0 <= xi < 1:
        raise ValueError("need 0 <= xi < 1")
    if not 0 < epsilon < 1:
        raise ValueError("need 0 < epsilon < 1")
    k = 1
    while delta**k >= epsilon:
        k += 1
    # (1 - xi)^k only decreases with k, so the least admissible k is the only candidate
    if (1 - xi) ** k <= 1 - epsilon:
        raise InfeasibleAmplification(
            f"k={k} is needed for delta^k < {epsilon} but (1-xi)^k = {float((1 - xi) ** k):.4g} <= 1-epsilon")
    return k


def _closure(group: MarkedGroup, F: Sequence[Element]) -> list[Element]:
    out = {group.identity: None}
    for e in F:
        out[e] = None
    for e in F:
        for f in F:
            out[group.multiply(e, f)] = None
    return list(out)


def witness_from_quotient(group: MarkedGroup, hom: Sequence[Permutation], F: Sequence[Element],
                          epsilon=Fraction(1, 10)) -> SoficWitness:
    """Witness from generator images of a genuine finite quotient.

    The map is filled in on ``F``, all pairwise products and the identity, each
    by evaluating ``hom`` along a geodesic word.
    """
    if len(hom) != group.m:
        raise ValueError("need one permutation per generator")
    n = hom[0].degree
    for i, j in enumerate(group.inverse):
        if hom[j] != hom[i].inverse():
            raise ValueError(f"generators {i} and {j} are paired but their images are not inverse")
    mapping = {}
    for e in _closure(group, F):
        p = Permutation.identity(n)
        for i in group.word_of(e):
            p = p * hom[i]
        mapping[e] = p
    return SoficWitness(group, list(F), n, mapping, epsilon)


def witness_to_graph(w: SoficWitness) -> LabeledGraph:
    """Schreier-type graph of the generator permutations.

    For each pair of mutually inverse generators the permutation of the lower
    index is used and its inverse labels the partner, so the labels always pair.
    """
    g = w.group
    perms: list[Permutation | None] = [None] * g.m
    for i in range(g.m):
        j = g.inverse[i]
        if perms[i] is not None:
            continue
        e = g.generator(i)
        if e not in w.map:
            raise MissingProductError(f"generator {g.names[i]} has no permutation")
        p = w.map[e]
        if j == i and p * p != Permutation.identity(w.n):
            raise ValueError(f"self-paired generator {g.names[i]} is not sent to an involution")
        perms[i] = p
        perms[j] = p.inverse()
    return quotient_graph(g, perms, {"source": "witness", "witness_n": w.n,
                                     "epsilon": str(w.epsilon)})
