"""Finite actions and almost-actions: Følner sets, error sets, paradox certificates.

A :class:`FiniteAction` gives, for each generator, a (possibly partial) map of
``X = {0..size-1}``; ``-1`` marks an undefined image.  Honest actions evaluate a
group element by composing generator maps along a geodesic word.  Almost-actions
carry explicit maps for composite elements, so that

    B(p, q) = {x : phi(p) phi(q) x != phi(pq) x}

can be nonempty.
"""

from __future__ import annotations

from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .approx import LabeledGraph
from .groups import Element, MarkedGroup, Word, group_from_json

UNDEF = -1


class MissingMapError(KeyError):
    """An almost-action has no explicit map for a requested element."""


class FiniteAction:
    def __init__(self, group: MarkedGroup, size: int, generators: Sequence[Sequence[int | None]],
                 element_maps: Mapping[Element, Sequence[int | None]] | None = None,
                 honest: bool = True):
        if size < 1:
            raise ValueError("X must be nonempty")
        if len(generators) != group.m:
            raise ValueError("need one map per generator")
        self.group = group
        self.size = size
        self.honest = honest
        self.gens = [self._as_map(mp) for mp in generators]
        for i, j in enumerate(group.inverse):
            gi, gj = self.gens[i], self.gens[j]
            ok = gi != UNDEF
            if np.any(gj[gi[ok]] != np.flatnonzero(ok)):
                raise ValueError(f"generators {i} and {j} do not act as mutual inverses")
        self.element_maps = {e: self._as_map(mp) for e, mp in (element_maps or {}).items()}
        self._cache: dict[Element, np.ndarray] = {}

    def _as_map(self, mp) -> np.ndarray:
        arr = np.array([UNDEF if v is None else int(v) for v in mp], dtype=np.int64)
        if arr.shape != (self.size,):
            raise ValueError("map has the wrong length")
        defined = arr[arr != UNDEF]
        if defined.size and (defined.min() < 0 or defined.max() >= self.size
                             or np.unique(defined).size != defined.size):
            raise ValueError("map is not a partial bijection of X")
        return arr

    # -- constructors -------------------------------------------------------------------
    @classmethod
    def from_graph(cls, graph: LabeledGraph, group: MarkedGroup) -> "FiniteAction":
        """Honest (possibly partial) action given by the label maps."""
        return cls(group, graph.n, graph.maps, honest=True)

    @classmethod
    def from_witness(cls, w) -> "FiniteAction":
        """Almost-action whose element maps are the witness permutations."""
        g = w.group
        gens = []
        for i in range(g.m):
            e = g.generator(i)
            if e not in w.map:
                raise MissingMapError(f"witness has no permutation for generator {g.names[i]}")
            gens.append(w.map[e].images)
        maps = {e: p.images for e, p in w.map.items()}
        return cls(g, w.n, gens, maps, honest=False)

    @classmethod
    def from_json(cls, doc: dict) -> "FiniteAction":
        g = group_from_json(doc["group"])
        maps = {}
        for c in doc.get("composites", []):
            maps[g.evaluate(g.parse_word(c["word"]))] = c["map"]
        return cls(g, int(doc["size"]), doc["generators"], maps, honest=bool(doc.get("honest", not maps)))

    def to_json(self) -> dict:
        def enc(a):
            return [None if v == UNDEF else int(v) for v in a]
        return {
            "group": self.group.to_json(),
            "size": self.size,
            "honest": self.honest,
            "generators": [enc(a) for a in self.gens],
            "composites": [{"word": list(self.group.word_of(e)), "map": enc(a)}
                           for e, a in self.element_maps.items()],
        }

    # -- evaluation ---------------------------------------------------------------------
    def phi(self, e: Element) -> np.ndarray:
        """Map of the element ``e`` (``-1`` where undefined)."""
        if e in self.element_maps:
            return self.element_maps[e]
        if e in self._cache:
            return self._cache[e]
        g = self.group
        if e == g.identity:
            out = np.arange(self.size, dtype=np.int64)
        elif self.honest:
            out = self.compose_word(g.word_of(e))
        else:
            idx = next((i for i in range(g.m) if g.generator(i) == e), None)
            if idx is None:
                raise MissingMapError(f"almost-action has no map for {g.format_word(g.word_of(e))}")
            out = self.gens[idx]
        self._cache[e] = out
        return out

    def compose_word(self, word: Sequence[int]) -> np.ndarray:
        """Generator maps composed along ``word`` (rightmost letter acts first)."""
        out = np.arange(self.size, dtype=np.int64)
        for i in reversed(tuple(word)):
            ok = out != UNDEF
            nxt = np.full(self.size, UNDEF, dtype=np.int64)
            nxt[ok] = self.gens[i][out[ok]]
            out = nxt
        return out

    def phi_word(self, word: Sequence[int]) -> np.ndarray:
        return self.phi(self.group.evaluate(word))


def _apply(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """``f o g`` for partial maps."""
    ok = g != UNDEF
    out = np.full(g.shape, UNDEF, dtype=np.int64)
    out[ok] = f[g[ok]]
    return out


def _mask_to_set(mask: np.ndarray) -> frozenset[int]:
    return frozenset(int(x) for x in np.flatnonzero(mask))


def fixed_set(a: FiniteAction, g: Word) -> frozenset[int]:
    mp = a.phi_word(g)
    return _mask_to_set(mp == np.arange(a.size))


def error_set(a: FiniteAction, p: Word, q: Word) -> frozenset[int]:
    """``{x : phi(p) phi(q) x != phi(pq) x}``; undefined counts as a value of its own."""
    G = a.group
    ep, eq = G.evaluate(p), G.evaluate(q)
    comp = _apply(a.phi(ep), a.phi(eq))
    return _mask_to_set(comp != a.phi(G.multiply(ep, eq)))


def _error_mask(a: FiniteAction, ep: Element, eq: Element) -> np.ndarray:
    comp = _apply(a.phi(ep), a.phi(eq))
    return comp != a.phi(a.group.multiply(ep, eq))


# -- Følner sets ------------------------------------------------------------------------------

@dataclass
class FolnerReport:
    boundary: Fraction
    error_mass: Fraction
    fix_mass: Fraction
    size: int

    @property
    def worst(self) -> Fraction:
        return max(self.boundary, self.error_mass, self.fix_mass)

    def to_json(self) -> dict:
        return {"size": self.size, "boundary": str(self.boundary), "error_mass": str(self.error_mass),
                "fix_mass": str(self.fix_mass), "worst": str(self.worst),
                "worst_float": float(self.worst)}


def verify_folner(a: FiniteAction, K: Sequence[Word], F) -> FolnerReport:
    """Exact ratios for ``F`` by plain set counting (independent of the search code).

    * boundary: ``max_g |gF sym-diff F| / |F|`` over ``g`` in ``K``;
    * error mass: ``max_{p,q} |B(p, q) & F| / |F|`` over ``p, q`` in ``K``;
    * fix mass: ``max_g |Fix(g) & F| / |F|`` over nontrivial ``g`` in ``K``.
    """
    F = set(int(x) for x in F)
    if not F:
        raise ValueError("F must be nonempty")
    G = a.group
    n = len(F)
    elems = [G.evaluate(w) for w in K]
    boundary = Fraction(0)
    fix = Fraction(0)
    for e in elems:
        mp = a.phi(e).tolist()
        image = {mp[x] for x in F if mp[x] != UNDEF}
        boundary = max(boundary, Fraction(len(image ^ F) + sum(1 for x in F if mp[x] == UNDEF), n))
        if e != G.identity:
            fix = max(fix, Fraction(sum(1 for x in F if mp[x] == x), n))
    err = Fraction(0)
    for ep in elems:
        mp_p = a.phi(ep).tolist()
        for eq in elems:
            mp_q = a.phi(eq).tolist()
            mp_pq = a.phi(G.multiply(ep, eq)).tolist()
            bad = 0
            for x in F:
                y = mp_q[x]
                z = mp_p[y] if y != UNDEF else UNDEF
                if z != mp_pq[x]:
                    bad += 1
            err = max(err, Fraction(bad, n))
    return FolnerReport(boundary, err, fix, n)


@dataclass
class FolnerResult:
    success: bool
    F: frozenset
    report: FolnerReport | None
    best_worst: float
    evaluations: int
    epsilon: Fraction
    seed: int | None
    trace: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"success": self.success, "epsilon": str(self.epsilon), "seed": self.seed,
                "evaluations": self.evaluations, "best_worst": self.best_worst,
                "report": self.report.to_json() if self.report else None,
                "F": sorted(self.F)}


class _Scorer:
    """Vectorized ratio evaluation for boolean membership masks."""

    def __init__(self, a: FiniteAction, K: Sequence[Word]):
        G = a.group
        elems = [G.evaluate(w) for w in K]
        self.maps = [a.phi(e) for e in elems]
        self.fix = [a.phi(e) == np.arange(a.size) for e in elems if e != G.identity]
        self.err = []
        if not a.honest:
            for ep in elems:
                for eq in elems:
                    m = _error_mask(a, ep, eq)
                    if m.any():
                        self.err.append(m)
        self.count = 0

    def worst(self, mask: np.ndarray) -> float:
        self.count += 1
        n = int(mask.sum())
        if n == 0:
            return float("inf")
        worst = 0.0
        for mp in self.maps:
            img = mp[mask]
            defined = img != UNDEF
            inside = int(mask[img[defined]].sum())
            # points mapped outside or nowhere, plus points of F not hit from F
            sym = (n - inside) + (n - inside)
            worst = max(worst, sym / n)
        for fx in self.fix:
            worst = max(worst, int((fx & mask).sum()) / n)
        for er in self.err:
            worst = max(worst, int((er & mask).sum()) / n)
        return worst


def _neighbors(a: FiniteAction, K_maps: list[np.ndarray], x: int) -> list[int]:
    out = []
    for mp in K_maps:
        y = int(mp[x])
        if y != UNDEF:
            out.append(y)
    return out


def _bfs_layers(a: FiniteAction, K_maps: list[np.ndarray], inv_maps: list[np.ndarray], root: int,
                cap: int) -> list[np.ndarray]:
    seen = {root}
    order = [root]
    layers = [1]
    frontier = [root]
    while frontier and len(order) < cap:
        nxt = []
        for x in frontier:
            for y in _neighbors(a, K_maps, x) + _neighbors(a, inv_maps, x):
                if y not in seen and len(order) < cap:
                    seen.add(y)
                    order.append(y)
                    nxt.append(y)
        frontier = nxt
        if len(order) > layers[-1]:
            layers.append(len(order))
    return [np.array(order[:k], dtype=np.int64) for k in layers]


def _restart(a: FiniteAction, K: Sequence[Word], eps: float, budget: int, cap: int,
             rng: np.random.Generator, roots: int) -> tuple[float, np.ndarray, int]:
    scorer = _Scorer(a, K)
    K_maps = scorer.maps
    inv_maps = []
    for mp in K_maps:
        inv = np.full(a.size, UNDEF, dtype=np.int64)
        ok = mp != UNDEF
        inv[mp[ok]] = np.flatnonzero(ok)
        inv_maps.append(inv)
    best = (float("inf"), np.zeros(a.size, dtype=bool))
    for root in rng.choice(a.size, size=min(roots, a.size), replace=False):
        for members in _bfs_layers(a, K_maps, inv_maps, int(root), cap):
            if scorer.count >= budget:
                break
            mask = np.zeros(a.size, dtype=bool)
            mask[members] = True
            w = scorer.worst(mask)
            if w < best[0]:
                best = (w, mask)
    worst, mask = best
    mask = mask.copy()
    # greedy single-vertex moves on the boundary
    while worst >= eps and scorer.count < budget and mask.any():
        inside = np.flatnonzero(mask)
        nbrs = set()
        for mp in K_maps + inv_maps:
            img = mp[inside]
            nbrs.update(int(y) for y in img[img != UNDEF])
        outside = [y for y in nbrs if not mask[y]]
        border = [int(x) for x in inside if any(
            mp[x] == UNDEF or not mask[mp[x]] for mp in K_maps + inv_maps)]
        cands = [(y, True) for y in outside] + [(x, False) for x in border]
        if not cands:
            break
        pick = rng.choice(len(cands), size=min(32, len(cands)), replace=False)
        move = None
        for k in pick:
            v, add = cands[int(k)]
            if add and mask.sum() >= cap:
                continue
            if not add and mask.sum() <= 1:
                continue
            mask[v] = add
            w = scorer.worst(mask)
            mask[v] = not add
            if w < worst:
                worst, move = w, (v, add)
            if scorer.count >= budget:
                break
        if move is None:
            break
        mask[move[0]] = move[1]
    return worst, mask, scorer.count


def folner_search(a: FiniteAction, K: Sequence[Word], epsilon, budget: int = 4000, seed: int | None = 0,
                  restarts: int = 3, roots: int = 8, workers: int = 1) -> FolnerResult:
    """Heuristic search for ``F`` with all ratios below ``epsilon``.

    Candidates start as breadth-first balls around random roots and are then
    improved by greedy single-vertex additions/removals.  Sizes are capped at
    ``|X|/2`` (otherwise ``F = X`` is a trivial answer for honest actions).  A
    returned set is re-verified by :func:`verify_folner`.  Failure is not a
    proof that no such set exists.
    """
    eps = Fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    cap = max(1, a.size // 2)
    seeds = np.random.SeedSequence(seed).spawn(restarts)
    per = max(1, budget // restarts)

    def run(ss):
        return _restart(a, K, float(eps), per, cap, np.random.default_rng(ss), roots)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, seeds))
    else:
        results = [run(ss) for ss in seeds]
    evaluations = sum(r[2] for r in results)
    trace = [r[0] for r in results]
    worst, mask, _ = min(results, key=lambda r: r[0])
    F = _mask_to_set(mask)
    if not F:
        return FolnerResult(False, F, None, worst, evaluations, eps, seed, trace)
    report = verify_folner(a, K, F)
    return FolnerResult(report.worst < eps, F, report, float(report.worst), evaluations, eps, seed, trace)


# -- error propagation ----------------------------------------------------------------------

def _power_set(group: MarkedGroup, base: Sequence[Element], r: int) -> list[Element]:
    """Products of at most ``r`` elements of ``base`` (which should contain the identity)."""
    seen = {group.identity: None}
    frontier = [group.identity]
    for _ in range(r):
        nxt = []
        for x in frontier:
            for b in base:
                y = group.multiply(x, b)
                if y not in seen:
                    seen[y] = None
                    nxt.append(y)
        frontier = nxt
    return list(seen)


@dataclass
class PropagationResult:
    holds: bool
    point: int | None
    lhs_size: int
    rhs_size: int


def propagation_check(a: FiniteAction, K: Sequence[Word], r: int) -> PropagationResult:
    """Check that errors seen through ``K^r`` are explained by errors of ``K^{r+1}``, ``K^{2r+1}``.

    ``K`` is symmetrized and the identity added.  Left side: preimages under
    ``phi(g)``, ``g`` in ``K^r``, of ``B(s, t)`` (``s, t`` in ``K``) and of
    ``Fix(u)`` (``u`` in ``K`` nontrivial).  Right side: ``B(a, b)`` for
    ``a, b`` in ``K^{r+1}`` and ``Fix(c)`` for nontrivial ``c`` in ``K^{2r+1}``.
    Fixed sets of the identity are excluded on both sides, since they are all of ``X``.
    """
    if r < 0:
        raise ValueError("r must be nonnegative")
    G = a.group
    base = {G.identity: None}
    for w in K:
        e = G.evaluate(w)
        base[e] = None
        base[G.invert(e)] = None
    Kb = list(base)
    ident = np.arange(a.size)
    bad = np.zeros(a.size, dtype=bool)
    for s in Kb:
        for t in Kb:
            bad |= _error_mask(a, s, t)
    for u in Kb:
        if u != G.identity:
            bad |= a.phi(u) == ident
    lhs = np.zeros(a.size, dtype=bool)
    for g in _power_set(G, Kb, r):
        mp = a.phi(g)
        ok = mp != UNDEF
        hit = np.zeros(a.size, dtype=bool)
        hit[ok] = bad[mp[ok]]
        lhs |= hit
    rhs = np.zeros(a.size, dtype=bool)
    Kr1 = _power_set(G, Kb, r + 1)
    for x in Kr1:
        for y in Kr1:
            rhs |= _error_mask(a, x, y)
    for c in _power_set(G, Kb, 2 * r + 1):
        if c != G.identity:
            rhs |= a.phi(c) == ident
    missing = np.flatnonzero(lhs & ~rhs)
    point = int(missing[0]) if missing.size else None
    return PropagationResult(point is None, point, int(lhs.sum()), int(rhs.sum()))


# -- paradox certificates -------------------------------------------------------------------

@dataclass
class ParadoxCertificate:
    success: bool
    m1: dict[int, int] = field(default_factory=dict)
    m2: dict[int, int] = field(default_factory=dict)
    pieces: dict[tuple[Word, Word], frozenset] = field(default_factory=dict)
    hall_violator: frozenset | None = None
    violator_neighbors: int | None = None

    def to_json(self) -> dict:
        if not self.success:
            return {"success": False, "hall_violator": sorted(self.hall_violator or ()),
                    "violator_size": len(self.hall_violator or ()),
                    "neighbors": self.violator_neighbors}
        return {"success": True,
                "pieces": [{"s": list(s), "t": list(t), "points": sorted(q)}
                           for (s, t), q in self.pieces.items()]}


def _hopcroft_karp(adj: list[list[int]], n_right: int) -> tuple[list[int], list[int]]:
    INF = 1 << 60
    n_left = len(adj)
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    while True:
        dist = [INF] * n_left
        queue = deque()
        for u in range(n_left):
            if match_l[u] == -1:
                dist[u] = 0
                queue.append(u)
        found = False
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w == -1:
                    found = True
                elif dist[w] == INF:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if not found:
            break
        ptr = [0] * n_left
        for root in range(n_left):
            if match_l[root] != -1:
                continue
            # iterative DFS along layered alternating paths
            stack = [root]
            path_found = False
            while stack:
                u = stack[-1]
                advanced = False
                while ptr[u] < len(adj[u]):
                    v = adj[u][ptr[u]]
                    ptr[u] += 1
                    w = match_r[v]
                    if w == -1:
                        # augment along the stack
                        path_found = True
                        advanced = True
                        break
                    if dist[w] == dist[u] + 1:
                        stack.append(w)
                        advanced = True
                        break
                if path_found:
                    # the last v probed from stack top is free; flip the path
                    v_free = v
                    for k in range(len(stack) - 1, -1, -1):
                        uu = stack[k]
                        prev = match_l[uu]
                        match_l[uu] = v_free
                        match_r[v_free] = uu
                        v_free = prev
                    break
                if not advanced:
                    dist[u] = INF
                    stack.pop()
    return match_l, match_r


def paradox_certificate(a: FiniteAction, A_set, K: Sequence[Word], p: int = 1) -> ParadoxCertificate:
    """Two injections ``A -> X`` with disjoint images along words of ``K^p``, or a Hall violator.

    ``K^p`` is all products of at most ``p`` letters from ``K``, its inverses and
    the identity.  Edges join ``a`` to ``phi(t)(a)``.  A maximum matching of the
    doubled left side (two copies of each point of ``A``) is computed with
    Hopcroft-Karp; it saturates iff a (2,1)-matching exists.  Otherwise the
    points reachable by alternating paths from unmatched copies give a set
    ``L`` with ``|N(L)| < 2|L|``.
    """
    G = a.group
    A_list = sorted(int(x) for x in A_set)
    if not A_list:
        return ParadoxCertificate(True)
    base = {G.identity: ()}
    for w in K:
        e = G.evaluate(w)
        base.setdefault(e, tuple(w))
        base.setdefault(G.invert(e), G.inverse_word(w))
    # words for K^p, first-found representative per element
    words: dict[Element, Word] = {G.identity: ()}
    frontier = [G.identity]
    for _ in range(p):
        nxt = []
        for x in frontier:
            for b, wb in base.items():
                y = G.multiply(x, b)
                if y not in words:
                    words[y] = words[x] + wb
                    nxt.append(y)
        frontier = nxt
    elems = list(words)
    maps = [a.phi(e) for e in elems]
    adj_single: list[list[int]] = []
    for x in A_list:
        targets = []
        for mp in maps:
            y = int(mp[x])
            if y != UNDEF and y not in targets:
                targets.append(y)
        adj_single.append(targets)
    adj = [adj_single[i // 2] for i in range(2 * len(A_list))]
    match_l, match_r = _hopcroft_karp(adj, a.size)
    if all(m != -1 for m in match_l):
        m1 = {A_list[i]: match_l[2 * i] for i in range(len(A_list))}
        m2 = {A_list[i]: match_l[2 * i + 1] for i in range(len(A_list))}
        pieces: dict[tuple[Word, Word], set] = {}
        for x in A_list:
            s = next(k for k, mp in enumerate(maps) if mp[x] == m1[x])
            t = next(k for k, mp in enumerate(maps) if mp[x] == m2[x])
            pieces.setdefault((words[elems[s]], words[elems[t]]), set()).add(x)
        cert = ParadoxCertificate(True, m1, m2, {k: frozenset(v) for k, v in pieces.items()})
        if not verify_paradox(a, A_list, cert):
            raise AssertionError("paradox certificate failed re-verification")
        return cert
    # alternating reachability from unmatched left copies
    seen_l = [False] * len(adj)
    queue = deque(i for i, m in enumerate(match_l) if m == -1)
    for i in queue:
        seen_l[i] = True
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            w = match_r[v]
            if w != -1 and not seen_l[w]:
                seen_l[w] = True
                queue.append(w)
    L = frozenset(A_list[i // 2] for i, s in enumerate(seen_l) if s)
    nbrs = hall_neighbors(a, L, [words[e] for e in elems])
    if not len(nbrs) < 2 * len(L):
        raise AssertionError("alternating set does not violate the (2,1) Hall condition")
    return ParadoxCertificate(False, hall_violator=L, violator_neighbors=len(nbrs))


def hall_neighbors(a: FiniteAction, L, words: Sequence[Word]) -> set[int]:
    out = set()
    for w in words:
        mp = a.phi_word(w).tolist()
        out.update(mp[x] for x in L if mp[x] != UNDEF)
    return out


def verify_paradox(a: FiniteAction, A_set, cert: ParadoxCertificate) -> bool:
    """Independent check: pieces partition ``A`` and all translates are pairwise disjoint."""
    A_set = set(A_set)
    covered: set[int] = set()
    used: set[int] = set()
    total = 0
    for (s, t), Q in cert.pieces.items():
        if covered & Q:
            return False
        covered |= Q
        ms = a.phi_word(s).tolist()
        mt = a.phi_word(t).tolist()
        for mp in (ms, mt):
            img = [mp[x] for x in Q]
            if any(y == UNDEF for y in img):
                return False
            used.update(img)
            total += len(img)
        if any(cert.m1[x] != ms[x] or cert.m2[x] != mt[x] for x in Q):
            return False
    return covered == A_set and len(used) == total == 2 * len(A_set)
