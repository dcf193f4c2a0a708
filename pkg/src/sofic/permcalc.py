"""Cycle statistics of permutations and the amplification maps.

Permutations act on the left on ``{0..d-1}``; ``(p * q)(x) = p(q(x))``.
Serialized forms use 1-based one-line notation.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations as _all_perms
from typing import Iterable, Mapping, Sequence

import numpy as np

PRODUCT_POWER_CAP = 10**6
COVERING_DEGREE_CAP = 7


class NotConjugateError(ValueError):
    """Two permutations have different cycle types."""


class OddPermutationError(ValueError):
    pass


class DegreeCapError(ValueError):
    pass


@dataclass(frozen=True)
class Permutation:
    images: tuple[int, ...]

    def __post_init__(self):
        imgs = tuple(int(v) for v in self.images)
        if sorted(imgs) != list(range(len(imgs))):
            raise ValueError("images do not form a bijection of 0..d-1")
        object.__setattr__(self, "images", imgs)

    @classmethod
    def identity(cls, d: int) -> "Permutation":
        return cls(tuple(range(d)))

    @classmethod
    def from_one_line(cls, images: Iterable[int]) -> "Permutation":
        """From 1-based one-line notation."""
        return cls(tuple(int(v) - 1 for v in images))

    @classmethod
    def from_cycles(cls, d: int, cycles: Iterable[Sequence[int]]) -> "Permutation":
        """From 1-based cycle notation, e.g. ``[(1, 2), (3, 4, 5)]``."""
        imgs = list(range(d))
        for cyc in cycles:
            for a, b in zip(cyc, tuple(cyc[1:]) + (cyc[0],)):
                imgs[a - 1] = b - 1
        return cls(tuple(imgs))

    @classmethod
    def random(cls, d: int, rng: np.random.Generator) -> "Permutation":
        return cls(tuple(int(v) for v in rng.permutation(d)))

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, x: int) -> int:
        return self.images[x]

    def __mul__(self, other: "Permutation") -> "Permutation":
        if self.degree != other.degree:
            raise ValueError("degree mismatch")
        mine = self.images
        return Permutation(tuple(mine[v] for v in other.images))

    def inverse(self) -> "Permutation":
        inv = [0] * self.degree
        for x, y in enumerate(self.images):
            inv[y] = x
        return Permutation(tuple(inv))

    def cycles(self) -> list[tuple[int, ...]]:
        """0-based cycles including fixed points, each starting at its smallest point."""
        seen = [False] * self.degree
        out = []
        for start in range(self.degree):
            if seen[start]:
                continue
            cyc = []
            x = start
            while not seen[x]:
                seen[x] = True
                cyc.append(x)
                x = self.images[x]
            out.append(tuple(cyc))
        return out

    def is_even(self) -> bool:
        return sum(len(c) - 1 for c in self.cycles()) % 2 == 0

    def one_line(self) -> list[int]:
        return [v + 1 for v in self.images]

    def __repr__(self) -> str:
        cyc = [c for c in self.cycles() if len(c) > 1]
        body = "".join("(" + " ".join(str(v + 1) for v in c) + ")" for c in cyc) or "()"
        return f"Permutation[{self.degree}]{body}"


@dataclass(frozen=True)
class CycleStats:
    degree: int
    counts: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        counts = {int(t): int(c) for t, c in sorted(self.counts.items()) if c}
        if sum(t * c for t, c in counts.items()) != self.degree:
            raise ValueError("cycle counts do not add up to the degree")
        object.__setattr__(self, "counts", counts)

    def __getitem__(self, t: int) -> int:
        return self.counts.get(t, 0)

    @property
    def fixed(self) -> int:
        return self[1]

    def frequencies(self) -> dict[int, Fraction]:
        """``t -> #_t / d`` as exact rationals; ``sum t * P_t == 1``."""
        return {t: Fraction(c, self.degree) for t, c in self.counts.items()}


def cycle_stats(p: Permutation) -> CycleStats:
    return CycleStats(p.degree, Counter(len(c) for c in p.cycles()))


def fix_count(p: Permutation) -> int:
    return sum(1 for x, y in enumerate(p.images) if x == y)


def disjoint_union_power(p: Permutation, k: int, cap: int = PRODUCT_POWER_CAP) -> Permutation:
    """``k`` copies of ``p`` acting blockwise on ``{0..k*d-1}``."""
    if k < 1:
        raise ValueError("k must be positive")
    d = p.degree
    if k * d > cap:
        raise DegreeCapError(f"degree {k * d} exceeds cap {cap}")
    return Permutation(tuple(b * d + y for b in range(k) for y in p.images))


def product_power(p: Permutation, k: int, cap: int = PRODUCT_POWER_CAP) -> Permutation:
    """Diagonal action on ``k``-tuples; tuple ``(x_0..x_{k-1})`` is point ``sum x_j d^j``."""
    if k < 1:
        raise ValueError("k must be positive")
    d = p.degree
    if d**k > cap:
        raise DegreeCapError(f"degree {d}^{k} exceeds cap {cap}")
    img = np.asarray(p.images, dtype=np.int64)
    out = img.copy()
    for _ in range(k - 1):
        # prepend a most-significant digit: point x*size + old -> p(x)*size + out[old]
        out = (img[:, None] * out.size + out[None, :]).reshape(-1)
    return Permutation(tuple(out.tolist()))


def realize_stats(P: Mapping[int, Fraction | int | str], n: int) -> Permutation:
    """Permutation of degree ``n`` with ``floor(P_t n)`` ``t``-cycles plus one cycle on the rest."""
    if n < 1:
        raise ValueError("n must be positive")
    probs = {int(t): Fraction(v) for t, v in P.items()}
    if any(t < 1 or v < 0 for t, v in probs.items()):
        raise ValueError("cycle lengths must be positive and weights nonnegative")
    if sum(t * v for t, v in probs.items()) > 1:
        raise ValueError("sum of t * P_t exceeds 1")
    images = list(range(n))
    pos = 0
    for t in sorted(probs):
        for _ in range(int(probs[t] * n)):
            cyc = range(pos, pos + t)
            for a in cyc:
                images[a] = a + 1 if a + 1 < pos + t else pos
            pos += t
    if pos < n:
        for a in range(pos, n):
            images[a] = a + 1 if a + 1 < n else pos
    return Permutation(tuple(images))


def conjugator(sigma: Permutation, rho: Permutation) -> Permutation:
    """Some ``c`` with ``c * sigma * c^-1 == rho``; raises ``NotConjugateError`` otherwise."""
    if sigma.degree != rho.degree:
        raise ValueError("degree mismatch")
    cs = sorted(sigma.cycles(), key=len)
    cr = sorted(rho.cycles(), key=len)
    if [len(c) for c in cs] != [len(c) for c in cr]:
        raise NotConjugateError("cycle types differ")
    images = [0] * sigma.degree
    for a, b in zip(cs, cr):
        for x, y in zip(a, b):
            images[x] = y
    c = Permutation(tuple(images))
    if c * sigma * c.inverse() != rho:
        raise AssertionError("conjugator construction failed")
    return c


def composition_bound_margin(alpha: Permutation, beta: Permutation, t: int) -> int:
    """``#_t(alpha beta) - (#_t alpha + #fix beta - d)``, never negative."""
    if alpha.degree != beta.degree:
        raise ValueError("degree mismatch")
    lhs = cycle_stats(alpha * beta)[t]
    return lhs - (cycle_stats(alpha)[t] + fix_count(beta) - alpha.degree)


def perm_matrix_trace(p: Permutation) -> int:
    """Trace of the permutation matrix sending basis vector ``e_x`` to ``e_p(x)``."""
    d = p.degree
    mat = np.zeros((d, d), dtype=np.int64)
    mat[list(p.images), list(range(d))] = 1
    return int(np.trace(mat))


# -- covering numbers in A_n -------------------------------------------------------

def _even_perms(n: int) -> list[tuple[int, ...]]:
    return [q for q in _all_perms(range(n)) if Permutation(q).is_even()]


def conjugacy_class(sigma: Permutation, even_only: bool = True) -> frozenset[tuple[int, ...]]:
    """Class of ``sigma`` under conjugation by ``A_n`` (or ``S_n``)."""
    n = sigma.degree
    pool = _even_perms(n) if even_only else list(_all_perms(range(n)))
    s = sigma.images
    out = set()
    for g in pool:
        # g s g^-1 maps g(x) -> g(s(x))
        img = [0] * n
        for x in range(n):
            img[g[x]] = g[s[x]]
        out.add(tuple(img))
    return frozenset(out)


def _closure_levels(cls: frozenset, n: int, k: int) -> list[set]:
    ident = tuple(range(n))
    reached = {ident}
    frontier = {ident}
    levels = [set(reached)]
    gens = list(cls)
    for _ in range(k):
        nxt = set()
        for x in frontier:
            for c in gens:
                y = tuple(x[v] for v in c)
                if y not in reached:
                    nxt.add(y)
        reached |= nxt
        frontier = nxt
        levels.append(set(reached))
        if not frontier:
            levels += [set(reached)] * (k - len(levels) + 1)
            break
    return levels


def covering_closure(sigma: Permutation, k: int, cap: int = COVERING_DEGREE_CAP,
                     ) -> frozenset[tuple[int, ...]]:
    """Products of at most ``k`` elements of the ``A_n``-class of ``sigma``."""
    if sigma.degree > cap:
        raise DegreeCapError(f"degree {sigma.degree} exceeds cap {cap}")
    if not sigma.is_even():
        raise OddPermutationError("sigma must be even")
    if k < 0:
        raise ValueError("k must be nonnegative")
    cls = conjugacy_class(sigma)
    return frozenset(_closure_levels(cls, sigma.degree, k)[k])


def covering_depth(sigma: Permutation, cap: int = COVERING_DEGREE_CAP) -> int | None:
    """Smallest ``k`` with ``covering_closure(sigma, k) == A_n``, or ``None`` if never reached."""
    if sigma.degree > cap:
        raise DegreeCapError(f"degree {sigma.degree} exceeds cap {cap}")
    if not sigma.is_even():
        raise OddPermutationError("sigma must be even")
    n = sigma.degree
    order = len(_even_perms(n))
    cls = conjugacy_class(sigma)
    levels = _closure_levels(cls, n, order)
    for k, lev in enumerate(levels):
        if len(lev) == order:
            return k
    return None


def covering_hypothesis(sigma: Permutation) -> bool:
    """Even, has an orbit of length two, and ``n - 2r >= -1`` for ``r`` orbits."""
    cyc = sigma.cycles()
    return sigma.is_even() and any(len(c) == 2 for c in cyc) and sigma.degree - 2 * len(cyc) >= -1
