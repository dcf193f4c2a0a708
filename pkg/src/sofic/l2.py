"""Group-ring matrices and their finite approximations on labeled graphs.

A :class:`GroupRingMatrix` ``A = sum_g A^g g`` over ``Z[Gamma]`` acts on
``l2(Gamma)^d`` through the kernel ``K_A(x, y) = A^g`` for ``x = g y``.  On a
labeled graph the kernel is pulled back through the ball isomorphisms of good
vertices: column block ``y`` of ``A_m`` is filled only when ``y`` is good, with
block ``A^g`` in row block ``phi_y(g)``.  The invariants of ``Delta = A* A``
are then approximated by normalized quantities of ``Delta_m = A_m^T A_m``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import exactla
from .approx import LabeledGraph, good_set, pullback_vertex
from .exactla import SparseIntMatrix
from .groups import Element, MarkedGroup, group_from_json

Block = tuple[tuple[int, ...], ...]


class InsufficientRadiusError(ValueError):
    """The graph's good set was not computed at a radius covering the operator's width."""


def _block(rows: Sequence[Sequence[int]], d: int) -> Block:
    b = tuple(tuple(int(v) for v in r) for r in rows)
    if len(b) != d or any(len(r) != d for r in b):
        raise ValueError(f"block must be {d}x{d}")
    return b


def _is_zero(b: Block) -> bool:
    return not any(any(r) for r in b)


def _matmul(a: Block, b: Block) -> Block:
    d = len(a)
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(d)) for j in range(d)) for i in range(d))


def _add(a: Block, b: Block) -> Block:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def _transpose(a: Block) -> Block:
    return tuple(zip(*a)) if a else a


class GroupRingMatrix:
    """Finitely supported map from group elements to integer ``d x d`` blocks."""

    def __init__(self, group: MarkedGroup, d: int, terms: Mapping[Element, Sequence[Sequence[int]]]):
        if d < 1:
            raise ValueError("block size must be positive")
        self.group = group
        self.d = d
        clean: dict[Element, Block] = {}
        for g, blk in terms.items():
            b = _block(blk, d)
            if not _is_zero(b):
                clean[g] = b
        self.terms = clean
        self.width = max((group.length(g) for g in clean), default=0)

    # -- constructors -------------------------------------------------------------------
    @classmethod
    def from_words(cls, group: MarkedGroup, d: int, items: Iterable[tuple]) -> "GroupRingMatrix":
        """Sum of ``block * word`` over ``items``; scalars are accepted when ``d == 1``."""
        acc: dict[Element, Block] = {}
        zero = tuple((0,) * d for _ in range(d))
        for word, blk in items:
            if isinstance(blk, int):
                blk = [[blk if i == j else 0 for j in range(d)] for i in range(d)]
            g = group.evaluate(group.parse_word(word))
            acc[g] = _add(acc.get(g, zero), _block(blk, d))
        return cls(group, d, acc)

    @classmethod
    def scalar(cls, group: MarkedGroup, c: int, d: int = 1) -> "GroupRingMatrix":
        return cls.from_words(group, d, [((), c)])

    @classmethod
    def laplacian(cls, group: MarkedGroup) -> "GroupRingMatrix":
        """``m - sum_i s_i``: the combinatorial Laplacian of the Cayley graph."""
        return cls.from_words(group, 1, [((), group.m)] + [((i,), -1) for i in range(group.m)])

    # -- algebra ---------------------------------------------------------------------------
    def adjoint(self) -> "GroupRingMatrix":
        return GroupRingMatrix(self.group, self.d,
                               {self.group.invert(g): _transpose(b) for g, b in self.terms.items()})

    def __mul__(self, other: "GroupRingMatrix") -> "GroupRingMatrix":
        return multiply(self, other)

    def __add__(self, other: "GroupRingMatrix") -> "GroupRingMatrix":
        if self.group != other.group or self.d != other.d:
            raise ValueError("incompatible group-ring matrices")
        zero = tuple((0,) * self.d for _ in range(self.d))
        acc = dict(self.terms)
        for g, b in other.terms.items():
            acc[g] = _add(acc.get(g, zero), b)
        return GroupRingMatrix(self.group, self.d, acc)

    def scale(self, c: int) -> "GroupRingMatrix":
        return GroupRingMatrix(self.group, self.d,
                               {g: tuple(tuple(c * v for v in r) for r in b) for g, b in self.terms.items()})

    def power(self, k: int) -> "GroupRingMatrix":
        if k < 0:
            raise ValueError("negative power")
        out = GroupRingMatrix.scalar(self.group, 1, self.d)
        for _ in range(k):
            out = multiply(out, self)
        return out

    def coefficient(self, g: Element) -> Block:
        return self.terms.get(g, tuple((0,) * self.d for _ in range(self.d)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroupRingMatrix):
            return NotImplemented
        return self.group == other.group and self.d == other.d and self.terms == other.terms

    __hash__ = None  # type: ignore[assignment]

    def is_self_adjoint(self) -> bool:
        return self == self.adjoint()

    # -- serialization ---------------------------------------------------------------------
    def to_json(self) -> dict:
        g = self.group
        items = sorted(((list(g.word_of(x)), [list(r) for r in b]) for x, b in self.terms.items()),
                       key=lambda t: (len(t[0]), t[0]))
        return {"group": g.to_json(), "d": self.d,
                "terms": [{"word": w, "block": b} for w, b in items]}

    @classmethod
    def from_json(cls, doc: dict) -> "GroupRingMatrix":
        group = group_from_json(doc["group"])
        d = int(doc.get("d", 1))
        items = []
        for t in doc["terms"]:
            blk = t["block"] if "block" in t else int(t["coeff"])
            items.append((t.get("word", []), blk))
        return cls.from_words(group, d, items)

    def __repr__(self) -> str:
        parts = []
        for x, b in self.terms.items():
            w = self.group.format_word(self.group.word_of(x))
            parts.append(f"{b[0][0] if self.d == 1 else [list(r) for r in b]}*{w}")
        return f"GroupRingMatrix(d={self.d}, {' + '.join(parts) or '0'})"


def adjoint(A: GroupRingMatrix) -> GroupRingMatrix:
    return A.adjoint()


def multiply(A: GroupRingMatrix, B: GroupRingMatrix) -> GroupRingMatrix:
    """Convolution ``sum A^a B^b (a b)``."""
    if A.group != B.group or A.d != B.d:
        raise ValueError("incompatible group-ring matrices")
    g = A.group
    zero = tuple((0,) * A.d for _ in range(A.d))
    acc: dict[Element, Block] = {}
    for a, ba in A.terms.items():
        for b, bb in B.terms.items():
            ab = g.multiply(a, b)
            acc[ab] = _add(acc.get(ab, zero), _matmul(ba, bb))
    return GroupRingMatrix(g, A.d, acc)


def group_trace(A: GroupRingMatrix) -> int:
    """Trace of the block at the identity."""
    b = A.coefficient(A.group.identity)
    return sum(b[i][i] for i in range(A.d))


def delta(A: GroupRingMatrix) -> GroupRingMatrix:
    return multiply(A.adjoint(), A)


# -- approximation ------------------------------------------------------------------------

@dataclass(frozen=True)
class ApproxOperator:
    source: GroupRingMatrix
    graph: LabeledGraph
    matrix: SparseIntMatrix
    good: frozenset
    radius: int

    @property
    def vertices(self) -> int:
        return self.graph.n

    def delta(self) -> SparseIntMatrix:
        """``A_m^T A_m``."""
        return self.matrix.T @ self.matrix


def _usable_good_set(g: LabeledGraph, width: int, group: MarkedGroup | None) -> tuple[frozenset, int]:
    cached = g.cached_good_set(width)
    if cached is not None:
        return cached, width
    top = g.good_radius
    if top is not None and top >= width:
        return g.good_set, top
    if group is not None:
        return good_set(g, group, width), width
    raise InsufficientRadiusError(
        f"good set known up to radius {top}, operator width is {width}")


def approximate(A: GroupRingMatrix, g: LabeledGraph, compute_good_set: bool = False) -> ApproxOperator:
    """Pull ``A`` back to ``g``: ``A_m[d x + a, d y + b] = A^h[a][b]`` for good ``y``, ``x = phi_y(h)``.

    Uses the good set cached at radius ``w_A`` if present, else the one at the
    largest cached radius provided it is at least ``w_A``.  With
    ``compute_good_set`` a missing good set is computed from ``A.group``.
    """
    if g.m != A.group.m:
        raise ValueError("graph labels do not match the group's generators")
    good, radius = _usable_good_set(g, A.width, A.group if compute_good_set else None)
    d = A.d
    words = [(A.group.word_of(h), blk) for h, blk in A.terms.items()]
    entries: dict[tuple[int, int], int] = {}
    for y in good:
        for word, blk in words:
            x = pullback_vertex(g, y, word)
            if x is None:
                raise AssertionError(f"good vertex {y} has no image for a word of the support")
            for a in range(d):
                row = blk[a]
                for b in range(d):
                    if row[b]:
                        key = (d * x + a, d * y + b)
                        entries[key] = entries.get(key, 0) + row[b]
    n = d * g.n
    return ApproxOperator(A, g, SparseIntMatrix(n, n, entries), good, radius)


def normalized_kernel_dim(A: GroupRingMatrix, g: LabeledGraph, **kw) -> Fraction:
    """``dim ker(Delta_m) / |V|``; computed as the nullity of ``A_m`` (same kernel)."""
    op = approximate(A, g, **kw)
    return Fraction(exactla.kernel_dim(op.matrix), g.n)


@dataclass
class LogDetResult:
    value: float
    det_star: int | None
    path: str
    dim: int
    zero_count: int


def log_det_star_normalized(A: GroupRingMatrix, g: LabeledGraph, operator: str = "delta",
                            exact_cap: int = exactla.EXACT_DIM_CAP, float_method: str = "jacobi",
                            **kw) -> LogDetResult:
    """``ln det*(Delta_m) / |V|`` (or ``ln det*(A_m) / |V|`` for ``operator='A'``).

    Dimensions up to ``exact_cap`` go through the exact integer det*, which is
    asserted to be a positive integer; larger ones use the float spectrum.
    ``operator='A'`` needs ``A_m`` symmetric positive semidefinite.
    """
    op = approximate(A, g, **kw)
    if operator == "delta":
        M = op.delta()
    elif operator == "A":
        M = op.matrix
        if not M.is_symmetric():
            raise exactla.NotSymmetricError("A_m is not symmetric; use operator='delta'")
    else:
        raise ValueError(f"unknown operator {operator!r}")
    if M.rows <= exact_cap:
        ds, zeros = exactla.det_star_nullity(M)
        if not (isinstance(ds, int) and ds > 0):
            raise AssertionError(f"det* = {ds!r} is not a positive integer")
        return LogDetResult(exactla._big_log(ds) / g.n, ds, "exact", M.rows, zeros)
    total, zeros = exactla.float_log_det_star(M, method=float_method)
    return LogDetResult(total / g.n, None, "float", M.rows, zeros)


def spectral_density(A: GroupRingMatrix, g: LabeledGraph, lambdas: Sequence, **kw) -> list[Fraction]:
    """``#{eigenvalues of Delta_m <= lam} / |V|`` for each ``lam``, exactly."""
    op = approximate(A, g, **kw)
    D = op.delta()
    if D.rows > exactla.EXACT_DIM_CAP:
        raise ValueError(f"dimension {D.rows} exceeds the exact cap {exactla.EXACT_DIM_CAP}")
    out = []
    for lam in lambdas:
        lam = Fraction(lam)
        if lam < 0:
            out.append(Fraction(0))  # Delta_m is positive semidefinite
            continue
        neg, zero, _ = exactla.inertia(D, lam)
        out.append(Fraction(neg + zero, g.n))
    return out


def _matrix_power_traces(M: SparseIntMatrix, k: int) -> list[int]:
    traces = [M.rows]
    P = SparseIntMatrix.identity(M.rows)
    for _ in range(k):
        P = P @ M
        traces.append(P.trace())
    return traces


def trace_poly(A: GroupRingMatrix, p: Sequence[int], g: LabeledGraph, **kw) -> tuple[Fraction, Fraction]:
    """``(Tr_Gamma p(Delta), Tr p(Delta_m) / |V|)`` for integer coefficients ``p = [c0, c1, ...]``."""
    coeffs = [int(c) for c in p]
    D = delta(A)
    left = 0
    P = GroupRingMatrix.scalar(A.group, 1, A.d)
    for k, c in enumerate(coeffs):
        if k:
            P = multiply(P, D)
        left += c * group_trace(P)
    op = approximate(A, g, **kw)
    traces = _matrix_power_traces(op.delta(), len(coeffs) - 1)
    right = sum(c * t for c, t in zip(coeffs, traces))
    return Fraction(left), Fraction(right, g.n)


# -- convergence study ---------------------------------------------------------------------

STUDY_COLUMNS = ["m", "good_frac", "kdim_num", "kdim_den", "kdim", "lndet", "lndet_A", "path",
                 "detstar_bits"]


def _study_row(A: GroupRingMatrix, g: LabeledGraph, lambdas: Sequence[Fraction], exact_cap: int,
               float_method: str) -> dict:
    row: dict = {"m": g.n}
    try:
        op = approximate(A, g, compute_good_set=True)
        row["good_frac"] = f"{len(op.good) / g.n:.6f}"
        kd = Fraction(exactla.kernel_dim(op.matrix), g.n)
        row.update(kdim_num=kd.numerator, kdim_den=kd.denominator, kdim=f"{float(kd):.12g}")
        res = log_det_star_normalized(A, g, exact_cap=exact_cap, float_method=float_method)
        row.update(lndet=f"{res.value:.12g}", lndet_A=f"{res.value / 2:.12g}", path=res.path,
                   detstar_bits=res.det_star.bit_length() if res.det_star is not None else "")
        if lambdas:
            for lam, F in zip(lambdas, spectral_density(A, g, lambdas)):
                row[f"F({lam})"] = f"{F.numerator}/{F.denominator}"
        row["error"] = ""
    except Exception as exc:  # recorded per row; the study continues
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def convergence_study(A: GroupRingMatrix, graphs: Sequence[LabeledGraph], lambdas: Sequence = (),
                      exact_cap: int = exactla.EXACT_DIM_CAP, float_method: str = "jacobi",
                      workers: int = 1) -> list[dict]:
    """One row per graph: size, good fraction, kernel dimension, ``ln det*`` and ``F(lambda)``.

    ``lndet_A`` is half of ``lndet``, i.e. ``ln det*(A_m)/|V|`` when ``A_m`` is
    symmetric.  Failures are recorded in the ``error`` column.
    """
    lams = [Fraction(x) for x in lambdas]
    graphs = sorted(graphs, key=lambda g: g.n)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda g: _study_row(A, g, lams, exact_cap, float_method), graphs))
    else:
        rows = [_study_row(A, g, lams, exact_cap, float_method) for g in graphs]
    return rows


def study_columns(lambdas: Sequence = ()) -> list[str]:
    return STUDY_COLUMNS + [f"F({Fraction(x)})" for x in lambdas] + ["error"]

