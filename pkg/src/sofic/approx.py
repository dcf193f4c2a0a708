"""Finite labeled graphs approximating Cayley graphs, and their good sets.

A :class:`LabeledGraph` has vertices ``0..n-1`` and, for each generator index
``i``, a partial bijection ``maps[i]`` (``-1`` marks an undefined point).
Label ``i`` plays the role of left multiplication by ``s_i``.

A vertex ``v`` is *good at radius r* when the ``r``-ball around ``v`` (the
subgraph induced on vertices at distance ``<= r``) is label-isomorphic to the
Cayley ball ``B(r)`` through the map ``phi_v`` that sends the identity to ``v``
and follows labels outward.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .groups import BallGraph, FreeAbelianGroup, FreeGroup, MarkedGroup, ball
from .permcalc import Permutation


class InvolutionError(ValueError):
    """Paired generators are not sent to mutually inverse maps."""


class LabeledGraph:
    """Vertices ``0..n-1`` with one partial bijection per generator label.

    The graph itself is immutable; good sets computed by :func:`good_set` are
    cached per radius behind a lock.  ``good_set``/``good_radius`` expose the
    largest radius checked so far.
    """

    def __init__(self, n: int, maps: Sequence[Sequence[int | None]], inverse: Sequence[int],
                 meta: dict | None = None):
        if n < 1:
            raise ValueError("a graph needs at least one vertex")
        self.n = int(n)
        self.inverse = tuple(int(i) for i in inverse)
        if len(maps) != len(self.inverse):
            raise ValueError("need one map per generator")
        self.maps = tuple(
            tuple(-1 if t is None else int(t) for t in mp) for mp in maps
        )
        for i, mp in enumerate(self.maps):
            if len(mp) != self.n:
                raise ValueError(f"label {i} map has wrong length")
            defined = [t for t in mp if t != -1]
            if any(not 0 <= t < self.n for t in defined) or len(set(defined)) != len(defined):
                raise ValueError(f"label {i} is not a partial bijection")
        for i, j in enumerate(self.inverse):
            if self.inverse[j] != i:
                raise InvolutionError("label pairing is not an involution")
            for v, t in enumerate(self.maps[i]):
                if t != -1 and self.maps[j][t] != v:
                    raise InvolutionError(f"labels {i} and {j} are not mutually inverse at vertex {v}")
        self.meta = dict(meta or {})
        self._lock = threading.Lock()
        self._good: dict[int, frozenset[int]] = {}

    @property
    def m(self) -> int:
        return len(self.maps)

    def target(self, i: int, v: int) -> int | None:
        t = self.maps[i][v]
        return None if t == -1 else t

    def is_total(self) -> bool:
        return all(-1 not in mp for mp in self.maps)

    def neighbors(self, v: int) -> set[int]:
        return {mp[v] for mp in self.maps if mp[v] != -1}

    def ball_vertices(self, v: int, r: int) -> dict[int, int]:
        """Vertices within distance ``r`` of ``v``, mapped to their distance."""
        dist = {v: 0}
        queue = deque([v])
        while queue:
            x = queue.popleft()
            if dist[x] == r:
                continue
            for mp in self.maps:
                y = mp[x]
                if y != -1 and y not in dist:
                    dist[y] = dist[x] + 1
                    queue.append(y)
        return dist

    # -- good-set cache ------------------------------------------------------
    def cached_good_set(self, r: int) -> frozenset[int] | None:
        with self._lock:
            return self._good.get(r)

    def store_good_set(self, r: int, vertices: Iterable[int]) -> frozenset[int]:
        vs = frozenset(int(v) for v in vertices)
        with self._lock:
            self._good[r] = vs
        return vs

    @property
    def good_radius(self) -> int | None:
        with self._lock:
            return max(self._good) if self._good else None

    @property
    def good_set(self) -> frozenset[int] | None:
        with self._lock:
            return self._good[max(self._good)] if self._good else None

    def good_fraction(self, r: int | None = None) -> float:
        vs = self.good_set if r is None else self.cached_good_set(r)
        if vs is None:
            raise ValueError("good set not computed")
        return len(vs) / self.n

    # -- serialization ---------------------------------------------------------
    def to_json(self) -> dict:
        doc: dict = {
            "n": self.n,
            "inverse": list(self.inverse),
            "labels": [
                {"gen": i, "map": [None if t == -1 else t for t in mp]}
                for i, mp in enumerate(self.maps)
            ],
            "meta": self.meta,
        }
        if self.good_radius is not None:
            doc["good_radius"] = self.good_radius
            doc["good_set"] = sorted(self.good_set)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "LabeledGraph":
        labels = sorted(doc["labels"], key=lambda e: e["gen"])
        inverse = doc.get("inverse")
        if inverse is None:
            inverse = [i ^ 1 for i in range(len(labels))]
        g = cls(doc["n"], [e["map"] for e in labels], inverse, doc.get("meta"))
        if "good_set" in doc:
            g.store_good_set(int(doc.get("good_radius", 0)), doc["good_set"])
        return g

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        return (self.n, self.maps, self.inverse) == (other.n, other.maps, other.inverse)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"LabeledGraph(n={self.n}, labels={self.m}, meta={self.meta})"


# -- constructions -----------------------------------------------------------------

def torus_graph(d: int, n: int) -> LabeledGraph:
    """Discrete torus ``(Z/n)^d`` with coordinate shifts; approximates ``Z^d``.

    The good set is filled in analytically for radius ``n//2 - 1``, the largest
    radius at which every ball avoids wraparound.
    """
    if d < 1:
        raise ValueError("d must be positive")
    if n < 3:
        raise ValueError("n must be at least 3 so that shifts and their inverses differ")
    size = n**d
    idx = np.arange(size)
    maps = []
    for j in range(d):
        coord = (idx // n**j) % n
        for step in (1, -1):
            maps.append(idx + (((coord + step) % n) - coord) * n**j)
    inverse = [i ^ 1 for i in range(2 * d)]
    g = LabeledGraph(size, [mp.tolist() for mp in maps], inverse,
                     {"source": f"torus(d={d}, n={n})", "seed": None})
    g.store_good_set(n // 2 - 1, range(size))
    return g


def quotient_graph(group: MarkedGroup, hom: Sequence[Permutation], meta: dict | None = None,
                   ) -> LabeledGraph:
    """Schreier graph of generator images ``hom[i]`` in ``S_n``."""
    if len(hom) != group.m:
        raise ValueError("need one permutation per generator")
    degrees = {p.degree for p in hom}
    if len(degrees) != 1:
        raise ValueError("permutations must share a degree")
    for i, j in enumerate(group.inverse):
        if hom[j] != hom[i].inverse():
            raise InvolutionError(f"generators {i} and {j} are paired but their images are not inverse")
    info = {"source": "quotient", "group": group.to_json(), "seed": None}
    info.update(meta or {})
    return LabeledGraph(degrees.pop(), [p.images for p in hom], group.inverse, info)


def random_free_graph(k: int, n: int, seed: int | None = 0) -> LabeledGraph:
    """``k`` independent uniform permutations of ``n`` points and their inverses."""
    if k < 1 or n < 2:
        raise ValueError("need k >= 1 and n >= 2")
    rng = np.random.default_rng(seed)
    maps = []
    for _ in range(k):
        p = rng.permutation(n)
        inv = np.empty_like(p)
        inv[p] = np.arange(n)
        maps += [p.tolist(), inv.tolist()]
    return LabeledGraph(n, maps, [i ^ 1 for i in range(2 * k)],
                        {"source": f"random_free(k={k}, n={n})", "seed": seed})


def ball_to_graph(b: BallGraph) -> LabeledGraph:
    """The Cayley ball as a labeled graph with partial label maps (identity is vertex 0)."""
    return LabeledGraph(len(b), b.edges, b.group.inverse,
                        {"source": f"ball(r={b.radius})", "group": b.group.to_json(), "seed": None})


def default_group_for(graph: LabeledGraph) -> MarkedGroup | None:
    src = str(graph.meta.get("source", ""))
    if src.startswith("torus"):
        return FreeAbelianGroup(graph.m // 2)
    if src.startswith("random_free"):
        return FreeGroup(graph.m // 2)
    return None


# -- ball isomorphism ----------------------------------------------------------------

@dataclass
class _BallTemplate:
    ball: BallGraph
    parent: list[int] = field(default_factory=list)
    label: list[int] = field(default_factory=list)

    @classmethod
    def build(cls, group: MarkedGroup, r: int) -> "_BallTemplate":
        b = ball(group, r)
        parent = [-1] * len(b)
        label = [-1] * len(b)
        for u in range(len(b)):
            for i in range(group.m):
                t = b.edges[i][u]
                if t is not None and parent[t] == -1 and t != 0 and b.depth[t] == b.depth[u] + 1:
                    parent[t] = u
                    label[t] = i
        return cls(b, parent, label)


def _ball_isomorphic(graph: LabeledGraph, v: int, tpl: _BallTemplate) -> bool:
    b = tpl.ball
    size = len(b)
    maps = graph.maps
    phi = [0] * size
    phi[0] = v
    for u in range(1, size):
        t = maps[tpl.label[u]][phi[tpl.parent[u]]]
        if t == -1:
            return False
        phi[u] = t
    image = set(phi)
    if len(image) != size:
        return False
    if set(graph.ball_vertices(v, b.radius)) != image:
        return False
    inv_phi = {x: u for u, x in enumerate(phi)}
    for i in range(graph.m):
        edges = b.edges[i]
        mp = maps[i]
        for u in range(size):
            t = mp[phi[u]]
            expected = edges[u]
            if t == -1 or t not in inv_phi:
                if expected is not None:
                    return False
            elif expected is None or inv_phi[t] != expected:
                return False
    return True


def ball_isomorphic(graph: LabeledGraph, v: int, group: MarkedGroup, r: int) -> bool:
    """Whether the ``r``-ball around ``v`` is labeled-isomorphic to the Cayley ball via ``phi_v``."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    if graph.m != group.m:
        raise ValueError("graph and group have different numbers of labels")
    return _ball_isomorphic(graph, v, _BallTemplate.build(group, r))


def good_set(graph: LabeledGraph, group: MarkedGroup, r: int) -> frozenset[int]:
    """Vertices whose ``r``-ball matches the Cayley ball; cached on the graph."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    if graph.m != group.m:
        raise ValueError("graph and group have different numbers of labels")
    tpl = _BallTemplate.build(group, r)
    good = [v for v in range(graph.n) if _ball_isomorphic(graph, v, tpl)]
    return graph.store_good_set(r, good)


def pullback_vertex(graph: LabeledGraph, v: int, word: Sequence[int]) -> int | None:
    """``phi_v`` of the element represented by ``word`` (labels applied right to left)."""
    x = v
    for i in reversed(tuple(word)):
        x = graph.maps[i][x]
        if x == -1:
            return None
    return x


def find_label_isomorphism(g1: LabeledGraph, g2: LabeledGraph) -> list[int] | None:
    """A bijection ``f`` with ``f(maps1[i][v]) == maps2[i][f(v)]`` for all labels, if one exists.

    Tries every image of each component's base vertex; intended for small graphs.
    """
    if g1.n != g2.n or g1.m != g2.m:
        return None
    f = [-1] * g1.n
    used = [False] * g2.n
    for base in range(g1.n):
        if f[base] != -1:
            continue
        for cand in range(g2.n):
            if used[cand]:
                continue
            trial = {base: cand}
            queue = deque([base])
            ok = True
            while queue and ok:
                x = queue.popleft()
                for i in range(g1.m):
                    y1, y2 = g1.maps[i][x], g2.maps[i][trial[x]]
                    if (y1 == -1) != (y2 == -1):
                        ok = False
                        break
                    if y1 == -1:
                        continue
                    if y1 in trial:
                        if trial[y1] != y2:
                            ok = False
                            break
                    else:
                        trial[y1] = y2
                        queue.append(y1)
            if ok and len(set(trial.values())) == len(trial) and not any(used[t] for t in trial.values()):
                for a, b in trial.items():
                    f[a] = b
                    used[b] = True
                break
        else:
            return None
    return f
