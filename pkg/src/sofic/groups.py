"""Marked groups with decidable word problem, Cayley balls and the relation metric.

A marked group carries an ordered, symmetric generator system ``s_0..s_{m-1}``
together with an involution ``inverse`` on generator indices.  A *word* is a
sequence of generator indices and represents the product ``s_{w0} s_{w1} ...``.
Group elements are handled through hashable normal forms:

* reduced index tuples for free groups,
* integer vectors for free abelian groups and their quotients ``Z^d / diag(n)``,
* one-line image tuples (0-based) for permutation groups.
"""

from __future__ import annotations

import json
import string
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

Element = Hashable
Word = tuple[int, ...]

DEFAULT_WORD_CAP = 2_000_000


class WordError(ValueError):
    """A word refers to a generator index outside ``0..m-1``."""


class EnumerationCapError(RuntimeError):
    """Exhaustive word enumeration would exceed the configured cap."""


class MarkedGroup:
    """Base class for an evaluable group with symmetric ordered generators.

    Subclasses provide ``identity``, ``generator``, ``multiply`` and ``invert``;
    everything else (evaluation, lengths, geodesic words, balls) is derived.
    Instances are immutable apart from a memo of word lengths for finite groups.
    """

    family: str = "abstract"

    def __init__(self, inverse: Sequence[int], names: Sequence[str] | None = None):
        inverse = tuple(int(i) for i in inverse)
        m = len(inverse)
        if m == 0:
            raise ValueError("a marked group needs at least one generator")
        for i, j in enumerate(inverse):
            if not 0 <= j < m or inverse[j] != i:
                raise ValueError(f"inverse pairing is not an involution at index {i}")
        self.inverse = inverse
        self.names = tuple(names) if names is not None else tuple(f"g{i}" for i in range(m))

    @property
    def m(self) -> int:
        return len(self.inverse)

    # -- required primitives -------------------------------------------------
    @property
    def identity(self) -> Element:
        raise NotImplementedError

    def generator(self, i: int) -> Element:
        raise NotImplementedError

    def multiply(self, x: Element, y: Element) -> Element:
        raise NotImplementedError

    def invert(self, x: Element) -> Element:
        raise NotImplementedError

    # -- derived ---------------------------------------------------------------
    def check_word(self, word: Iterable[int]) -> Word:
        word = tuple(int(i) for i in word)
        for i in word:
            if not 0 <= i < self.m:
                raise WordError(f"generator index {i} out of range 0..{self.m - 1}")
        return word

    def evaluate(self, word: Iterable[int]) -> Element:
        word = self.check_word(word)
        x = self.identity
        for i in reversed(word):
            x = self.multiply(self.generator(i), x)
        return x

    def inverse_word(self, word: Iterable[int]) -> Word:
        return tuple(self.inverse[i] for i in reversed(tuple(word)))

    def left_mul(self, i: int, x: Element) -> Element:
        """``s_i * x``: the Cayley-graph edge labeled ``i`` out of ``x``."""
        return self.multiply(self.generator(i), x)

    def length(self, x: Element) -> int:
        return len(self.word_of(x))

    def word_of(self, x: Element) -> Word:
        """A geodesic word representing ``x`` (generic breadth-first search)."""
        if x == self.identity:
            return ()
        parent: dict[Element, tuple[Element, int] | None] = {self.identity: None}
        queue = deque([self.identity])
        while queue:
            y = queue.popleft()
            for i in range(self.m):
                z = self.left_mul(i, y)
                if z in parent:
                    continue
                parent[z] = (y, i)
                if z == x:
                    word = []
                    node = z
                    while parent[node] is not None:
                        node, label = parent[node]
                        word.append(label)
                    return tuple(word)
                queue.append(z)
        raise ValueError(f"{x!r} is not an element of this group")

    def parse_word(self, text: str | Sequence[int]) -> Word:
        """Accept either a list of indices or a string of generator names.

        Single-character names may be concatenated (``"abAB"``); longer names
        must be separated by whitespace.  ``""``, ``"1"`` and ``"e"`` denote the
        empty word.
        """
        if not isinstance(text, str):
            return self.check_word(text)
        text = text.strip()
        if text in ("", "1", "e"):
            return ()
        lookup = {name: i for i, name in enumerate(self.names)}
        tokens = text.split() if any(c.isspace() for c in text) else list(text)
        try:
            return tuple(lookup[t] for t in tokens)
        except KeyError as exc:
            raise WordError(f"unknown generator name {exc.args[0]!r} in {text!r}") from None

    def format_word(self, word: Iterable[int]) -> str:
        word = tuple(word)
        if not word:
            return "1"
        sep = "" if all(len(n) == 1 for n in self.names) else " "
        return sep.join(self.names[i] for i in word)

    def to_json(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other: object) -> bool:
        return type(self) is type(other) and self.to_json() == other.to_json()  # type: ignore[union-attr]

    def __hash__(self) -> int:
        return hash(json.dumps(self.to_json(), sort_keys=True))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_json()})"


def _paired_inverse(k: int) -> tuple[int, ...]:
    inv = []
    for j in range(k):
        inv += [2 * j + 1, 2 * j]
    return tuple(inv)


def _paired_names(k: int, letters: str) -> list[str]:
    if k > len(letters):
        return [n for j in range(k) for n in (f"g{j}", f"G{j}")]
    return [n for c in letters[:k] for n in (c, c.upper())]


class FreeGroup(MarkedGroup):
    """``F_k`` on generators ``a, A, b, B, ...`` (capital letter = inverse)."""

    family = "free"

    def __init__(self, rank: int):
        if rank < 1:
            raise ValueError("free group rank must be positive")
        self.rank = rank
        super().__init__(_paired_inverse(rank), _paired_names(rank, string.ascii_lowercase))

    @property
    def identity(self) -> Word:
        return ()

    def generator(self, i: int) -> Word:
        return (i,)

    def multiply(self, x: Word, y: Word) -> Word:
        x, y = list(x), list(y)
        k = 0
        while k < min(len(x), len(y)) and x[-1 - k] == self.inverse[y[k]]:
            k += 1
        return tuple(x[: len(x) - k] + y[k:])

    def invert(self, x: Word) -> Word:
        return self.inverse_word(x)

    def evaluate(self, word: Iterable[int]) -> Word:
        out: list[int] = []
        for i in self.check_word(word):
            if out and out[-1] == self.inverse[i]:
                out.pop()
            else:
                out.append(i)
        return tuple(out)

    def length(self, x: Word) -> int:
        return len(x)

    def word_of(self, x: Word) -> Word:
        return tuple(x)

    def to_json(self) -> dict:
        return {"family": "free", "rank": self.rank}


class FreeAbelianGroup(MarkedGroup):
    """``Z^d`` or a finite quotient ``Z/n_1 x ... x Z/n_d``.

    Generators are ``+e_0, -e_0, +e_1, -e_1, ...``.  A modulus of ``0`` leaves
    that coordinate free.
    """

    def __init__(self, rank: int, moduli: Sequence[int] | None = None):
        if rank < 1:
            raise ValueError("rank must be positive")
        moduli = tuple(int(n) for n in (moduli if moduli is not None else [0] * rank))
        if len(moduli) != rank or any(n < 0 for n in moduli):
            raise ValueError("moduli must be nonnegative, one per coordinate")
        self.rank = rank
        self.moduli = moduli
        self.family = "finite_quotient" if all(moduli) else "free_abelian"
        letters = "s" if rank == 1 else "xyzwuv"
        super().__init__(_paired_inverse(rank), _paired_names(rank, letters))

    def _reduce(self, v: Sequence[int]) -> tuple[int, ...]:
        return tuple(c % n if n else c for c, n in zip(v, self.moduli))

    @property
    def identity(self) -> tuple[int, ...]:
        return (0,) * self.rank

    def generator(self, i: int) -> tuple[int, ...]:
        v = [0] * self.rank
        v[i // 2] = 1 if i % 2 == 0 else -1
        return self._reduce(v)

    def multiply(self, x, y):
        return self._reduce([a + b for a, b in zip(x, y)])

    def invert(self, x):
        return self._reduce([-a for a in x])

    def evaluate(self, word: Iterable[int]) -> tuple[int, ...]:
        v = [0] * self.rank
        for i in self.check_word(word):
            v[i // 2] += 1 if i % 2 == 0 else -1
        return self._reduce(v)

    def _signed(self, x) -> list[int]:
        out = []
        for c, n in zip(x, self.moduli):
            if n and c > n // 2:
                c -= n
            out.append(c)
        return out

    def length(self, x) -> int:
        return sum(abs(c) for c in self._signed(x))

    def word_of(self, x) -> Word:
        word: list[int] = []
        for j, c in enumerate(self._signed(x)):
            word += [2 * j if c > 0 else 2 * j + 1] * abs(c)
        return tuple(word)

    def to_json(self) -> dict:
        out: dict = {"family": self.family, "rank": self.rank}
        if any(self.moduli):
            out["moduli"] = list(self.moduli)
        return out


class PermutationGroup(MarkedGroup):
    """Finite group generated by permutations of ``{0..n-1}`` acting on the left.

    ``generators[i]`` is the one-line image tuple of ``s_i``; the pairing must
    satisfy ``generators[inverse[i]] == generators[i]^-1``.
    """

    family = "permutation"

    def __init__(self, generators: Sequence[Sequence[int]], inverse: Sequence[int],
                 names: Sequence[str] | None = None, family: str = "permutation"):
        gens = tuple(tuple(int(v) for v in g) for g in generators)
        if not gens:
            raise ValueError("need at least one generator")
        self.degree = len(gens[0])
        for g in gens:
            if len(g) != self.degree or sorted(g) != list(range(self.degree)):
                raise ValueError("generators must be permutations of a common degree")
        self.gens = gens
        self.family = family
        super().__init__(inverse, names)
        for i, j in enumerate(self.inverse):
            if self.multiply(gens[i], gens[j]) != self.identity:
                raise ValueError(f"generator {j} is not the inverse of generator {i}")
        self._lengths: dict | None = None

    @classmethod
    def from_generators(cls, perms: Sequence[Sequence[int]], family: str = "permutation",
                        ) -> "PermutationGroup":
        """Symmetrize: involutions pair with themselves, others get an inverse appended next to them."""
        gens: list[tuple[int, ...]] = []
        inverse: list[int] = []
        names: list[str] = []
        letters = string.ascii_lowercase
        for j, p in enumerate(perms):
            p = tuple(p)
            inv = [0] * len(p)
            for x, y in enumerate(p):
                inv[y] = x
            name = letters[j] if j < len(letters) else f"g{j}"
            if tuple(inv) == p:
                inverse.append(len(gens))
                gens.append(p)
                names.append(name)
            else:
                k = len(gens)
                inverse += [k + 1, k]
                gens += [p, tuple(inv)]
                names += [name, name.upper() if len(name) == 1 else name + "'"]
        return cls(gens, inverse, names, family=family)

    @property
    def identity(self) -> tuple[int, ...]:
        return tuple(range(self.degree))

    def generator(self, i: int) -> tuple[int, ...]:
        return self.gens[i]

    def multiply(self, x, y):
        return tuple(x[v] for v in y)

    def invert(self, x):
        inv = [0] * len(x)
        for a, b in enumerate(x):
            inv[b] = a
        return tuple(inv)

    def _geodesics(self) -> dict:
        if self._lengths is None:
            words: dict = {self.identity: ()}
            queue = deque([self.identity])
            while queue:
                x = queue.popleft()
                for i in range(self.m):
                    y = self.left_mul(i, x)
                    if y not in words:
                        words[y] = (i,) + words[x]
                        queue.append(y)
            self._lengths = words
        return self._lengths

    def order(self) -> int:
        return len(self._geodesics())

    def length(self, x) -> int:
        return len(self._geodesics()[tuple(x)])

    def word_of(self, x) -> Word:
        return self._geodesics()[tuple(x)]

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "generators": [[v + 1 for v in g] for g in self.gens],
            "pairing": list(self.inverse),
        }


def free_group(k: int) -> FreeGroup:
    return FreeGroup(k)


def free_abelian(d: int) -> FreeAbelianGroup:
    return FreeAbelianGroup(d)


def cyclic(n: int) -> FreeAbelianGroup:
    """``Z/n`` as the finite quotient of ``Z`` (same marking ``s, S``)."""
    return FreeAbelianGroup(1, (n,))


def group_from_json(doc: dict) -> MarkedGroup:
    family = doc.get("family")
    if family == "free":
        return FreeGroup(int(doc["rank"]))
    if family in ("free_abelian", "finite_quotient"):
        rank = int(doc.get("rank", 1))
        moduli = doc.get("moduli")
        if moduli is None and "modulus" in doc:
            moduli = [int(doc["modulus"])] * rank
        return FreeAbelianGroup(rank, moduli)
    if family in ("permutation", "quotient"):
        gens = [[int(v) - 1 for v in g] for g in doc["generators"]]
        if "pairing" in doc:
            return PermutationGroup(gens, doc["pairing"], doc.get("names"), family=family)
        return PermutationGroup.from_generators(gens, family=family)
    raise ValueError(f"unknown group family {family!r}")


# -- operations -----------------------------------------------------------------

def word_reduce(group: MarkedGroup, word: Iterable[int]) -> Element:
    """Canonical normal form of ``word``; equal forms iff equal elements."""
    return group.evaluate(word)


@dataclass(frozen=True)
class BallGraph:
    """Ball of radius ``radius`` around the identity in the Cayley graph.

    ``vertices`` lists normal forms in breadth-first order (identity first);
    ``edges[i][v]`` is the index of ``s_i * vertices[v]`` or ``None`` when that
    product leaves the ball.
    """

    group: MarkedGroup
    radius: int
    vertices: tuple
    edges: tuple[tuple[int | None, ...], ...]
    depth: tuple[int, ...]

    @property
    def index(self) -> dict:
        return {x: k for k, x in enumerate(self.vertices)}

    def __len__(self) -> int:
        return len(self.vertices)


def ball(group: MarkedGroup, r: int) -> BallGraph:
    if r < 0:
        raise ValueError("radius must be nonnegative")
    index = {group.identity: 0}
    vertices = [group.identity]
    depth = [0]
    frontier = [group.identity]
    for k in range(1, r + 1):
        nxt = []
        for x in frontier:
            for i in range(group.m):
                y = group.left_mul(i, x)
                if y not in index:
                    index[y] = len(vertices)
                    vertices.append(y)
                    depth.append(k)
                    nxt.append(y)
        frontier = nxt
    edges = tuple(
        tuple(index.get(group.left_mul(i, x)) for x in vertices) for i in range(group.m)
    )
    return BallGraph(group, r, tuple(vertices), edges, tuple(depth))


def relations_up_to(group: MarkedGroup, R: int, cap: int = DEFAULT_WORD_CAP) -> set[Word]:
    """All words of length ``<= R`` that evaluate to the identity.

    Words are enumerated breadth first; each word's value is obtained from its
    prefix's value by one right multiplication, so no word is re-evaluated.
    """
    if R < 0:
        raise ValueError("R must be nonnegative")
    total = sum(group.m ** k for k in range(R + 1))
    if total > cap:
        raise EnumerationCapError(f"{total} words of length <= {R} exceed the cap {cap}")
    gens = [group.generator(i) for i in range(group.m)]
    ident = group.identity
    relations = {()}
    level: list[tuple[Word, Element]] = [((), ident)]
    for _ in range(R):
        nxt = []
        for w, x in level:
            for i, g in enumerate(gens):
                y = group.multiply(x, g)
                w2 = w + (i,)
                if y == ident:
                    relations.add(w2)
                nxt.append((w2, y))
        level = nxt
    return relations


def gh_distance(a: MarkedGroup, b: MarkedGroup, R_max: int,
                cap: int = DEFAULT_WORD_CAP) -> Fraction | None:
    """Relation distance ``2^-R`` between two marked groups.

    ``R`` is the largest length up to which both groups satisfy exactly the
    same relations.  Returns ``None`` when no discrepancy shows up among words
    of length ``<= R_max``.
    """
    if a.m != b.m:
        raise ValueError("marked groups must have the same number of generators")
    if R_max < 0:
        raise ValueError("R_max must be nonnegative")
    ga = [a.generator(i) for i in range(a.m)]
    gb = [b.generator(i) for i in range(b.m)]
    # extensions of two words with the same pair of values behave identically
    level = {(a.identity, b.identity)}
    for length in range(1, R_max + 1):
        nxt = set()
        for x, y in level:
            for i in range(a.m):
                x2 = a.multiply(x, ga[i])
                y2 = b.multiply(y, gb[i])
                if (x2 == a.identity) != (y2 == b.identity):
                    return Fraction(1, 2 ** (length - 1))
                nxt.add((x2, y2))
        if len(nxt) > cap:
            raise EnumerationCapError(f"{len(nxt)} value pairs at length {length} exceed the cap {cap}")
        level = nxt
    return None
