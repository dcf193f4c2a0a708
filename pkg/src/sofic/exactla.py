"""Exact integer linear algebra: rank, characteristic polynomial, det*, inertia.

Two independent characteristic-polynomial routes are provided:

* ``berkowitz``: division-free, pure Python integers, fine up to a few dozen rows;
* ``modular``: Hessenberg reduction modulo many word-size primes (numpy int64),
  recombined by CRT under a Hadamard-type coefficient bound.

Both return integer coefficients of ``det(xI - A)``, highest degree first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

EXACT_DIM_CAP = 200
BERKOWITZ_AUTO_MAX = 12


class NotSquareError(ValueError):
    pass


class NotSymmetricError(ValueError):
    pass


class NotPSDError(ValueError):
    pass


class NonConvergenceError(RuntimeError):
    pass


class MatrixFormatError(ValueError):
    pass


@dataclass(frozen=True)
class SparseIntMatrix:
    rows: int
    cols: int
    entries: Mapping[tuple[int, int], int] = field(default_factory=dict)

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError("negative shape")
        clean = {}
        for (i, j), v in self.entries.items():
            v = int(v)
            if not (0 <= i < self.rows and 0 <= j < self.cols):
                raise IndexError(f"entry ({i}, {j}) outside {self.rows}x{self.cols}")
            if v:
                clean[(int(i), int(j))] = v
        object.__setattr__(self, "entries", clean)
        row_counts: dict[int, int] = {}
        col_counts: dict[int, int] = {}
        for i, j in clean:
            row_counts[i] = row_counts.get(i, 0) + 1
            col_counts[j] = col_counts.get(j, 0) + 1
        object.__setattr__(self, "L_row", max(row_counts.values(), default=0))
        object.__setattr__(self, "L_col", max(col_counts.values(), default=0))
        object.__setattr__(self, "M", max((abs(v) for v in clean.values()), default=0))

    # -- constructors -----------------------------------------------------------------
    @classmethod
    def from_dense(cls, rows: Sequence[Sequence[int]]) -> "SparseIntMatrix":
        rows = [list(r) for r in rows]
        nr = len(rows)
        nc = len(rows[0]) if nr else 0
        return cls(nr, nc, {(i, j): int(v) for i, r in enumerate(rows) for j, v in enumerate(r) if v})

    @classmethod
    def identity(cls, n: int) -> "SparseIntMatrix":
        return cls(n, n, {(i, i): 1 for i in range(n)})

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> "SparseIntMatrix":
        return cls(rows, rows if cols is None else cols, {})

    # -- basic algebra ---------------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def to_dense(self) -> list[list[int]]:
        out = [[0] * self.cols for _ in range(self.rows)]
        for (i, j), v in self.entries.items():
            out[i][j] = v
        return out

    def to_numpy(self, dtype=np.float64) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=dtype)
        for (i, j), v in self.entries.items():
            out[i, j] = v
        return out

    def row_dicts(self) -> list[dict[int, int]]:
        out: list[dict[int, int]] = [{} for _ in range(self.rows)]
        for (i, j), v in self.entries.items():
            out[i][j] = v
        return out

    def transpose(self) -> "SparseIntMatrix":
        return SparseIntMatrix(self.cols, self.rows, {(j, i): v for (i, j), v in self.entries.items()})

    T = property(transpose)

    def __matmul__(self, other: "SparseIntMatrix") -> "SparseIntMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        right = other.row_dicts()
        out: dict[tuple[int, int], int] = {}
        for (i, k), a in self.entries.items():
            for j, b in right[k].items():
                out[(i, j)] = out.get((i, j), 0) + a * b
        return SparseIntMatrix(self.rows, other.cols, out)

    def __add__(self, other: "SparseIntMatrix") -> "SparseIntMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        out = dict(self.entries)
        for key, v in other.entries.items():
            out[key] = out.get(key, 0) + v
        return SparseIntMatrix(self.rows, self.cols, out)

    def scale(self, c: int) -> "SparseIntMatrix":
        return SparseIntMatrix(self.rows, self.cols, {k: c * v for k, v in self.entries.items()})

    def shift(self, c: int) -> "SparseIntMatrix":
        """``self + c*I``."""
        self._require_square()
        out = dict(self.entries)
        for i in range(self.rows):
            out[(i, i)] = out.get((i, i), 0) + c
        return SparseIntMatrix(self.rows, self.cols, out)

    def trace(self) -> int:
        self._require_square()
        return sum(v for (i, j), v in self.entries.items() if i == j)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_symmetric(self) -> bool:
        return self.is_square() and all(self.entries.get((j, i)) == v for (i, j), v in self.entries.items())

    def _require_square(self):
        if not self.is_square():
            raise NotSquareError(f"matrix is {self.rows}x{self.cols}, not square")

    # -- serialization ------------------------------------------------------------------
    def to_json(self) -> dict:
        return {"rows": self.rows, "cols": self.cols,
                "entries": [[i, j, v] for (i, j), v in sorted(self.entries.items())]}

    @classmethod
    def from_json(cls, doc: dict) -> "SparseIntMatrix":
        if "dense" in doc:
            return cls.from_dense(doc["dense"])
        return cls(int(doc["rows"]), int(doc["cols"]), {(int(i), int(j)): int(v) for i, j, v in doc["entries"]})

    def to_triplets(self) -> str:
        lines = [f"{self.rows} {self.cols} {self.nnz}"]
        lines += [f"{i + 1} {j + 1} {v}" for (i, j), v in sorted(self.entries.items())]
        return "\n".join(lines) + "\n"

    def __repr__(self) -> str:
        return f"SparseIntMatrix({self.rows}x{self.cols}, nnz={self.nnz})"


def parse_triplets(text: str, source: str = "<input>") -> SparseIntMatrix:
    """Parse ``rows cols nnz`` followed by 1-based ``row col value`` lines.

    Lines starting with ``%`` or ``#`` are comments; a Matrix Market banner with
    ``symmetric`` mirrors off-diagonal entries.  Errors name the offending line.
    """
    symmetric = False
    shape = None
    entries: dict[tuple[int, int], int] = {}
    count = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("%%MatrixMarket"):
            words = line.lower().split()
            if "coordinate" not in words:
                raise MatrixFormatError(f"{source}:{lineno}: only coordinate format is supported")
            if "real" in words or "complex" in words:
                raise MatrixFormatError(f"{source}:{lineno}: entries must be integers")
            symmetric = "symmetric" in words
            continue
        if not line or line[0] in "%#":
            continue
        parts = line.split()
        try:
            nums = [int(p) for p in parts]
        except ValueError:
            raise MatrixFormatError(f"{source}:{lineno}: expected integers, got {line!r}") from None
        if shape is None:
            if len(nums) != 3 or min(nums) < 0:
                raise MatrixFormatError(f"{source}:{lineno}: header must be 'rows cols nnz'")
            shape = nums
            continue
        if len(nums) != 3:
            raise MatrixFormatError(f"{source}:{lineno}: expected 'row col value'")
        i, j, v = nums
        if not (1 <= i <= shape[0] and 1 <= j <= shape[1]):
            raise MatrixFormatError(f"{source}:{lineno}: index ({i}, {j}) outside {shape[0]}x{shape[1]}")
        if (i - 1, j - 1) in entries:
            raise MatrixFormatError(f"{source}:{lineno}: duplicate entry ({i}, {j})")
        entries[(i - 1, j - 1)] = v
        if symmetric and i != j:
            entries[(j - 1, i - 1)] = v
        count += 1
    if shape is None:
        raise MatrixFormatError(f"{source}: missing 'rows cols nnz' header")
    if count != shape[2]:
        raise MatrixFormatError(f"{source}: header announces {shape[2]} entries, found {count}")
    return SparseIntMatrix(shape[0], shape[1], entries)


# -- rank ---------------------------------------------------------------------------------

def rank(A: SparseIntMatrix) -> int:
    """Exact rank over Q by fraction-free sparse row elimination.

    Each elimination step replaces ``row_i`` by ``(p*row_i - a*row_k)/g`` with
    the pivot row ``row_k``, then divides out the row content, so entries stay
    integral and small for the sparse matrices arising here.
    """
    rows = [r for r in A.row_dicts() if r]
    r = 0
    while rows:
        # pivot row: fewest nonzeros; pivot column: its smallest index
        k = min(range(len(rows)), key=lambda t: (len(rows[t]), min(rows[t])))
        piv = rows.pop(k)
        c = min(piv)
        p = piv[c]
        r += 1
        nxt = []
        for row in rows:
            a = row.get(c)
            if a is None:
                nxt.append(row)
                continue
            new = {}
            for j in row.keys() | piv.keys():
                v = p * row.get(j, 0) - a * piv.get(j, 0)
                if v:
                    new[j] = v
            if new:
                g = math.gcd(*new.values())
                if g > 1:
                    new = {j: v // g for j, v in new.items()}
                nxt.append(new)
        rows = nxt
    return r


def kernel_dim(A: SparseIntMatrix) -> int:
    return A.cols - rank(A)


def bareiss_det(A: SparseIntMatrix) -> int:
    """Determinant by dense Bareiss elimination (independent of the charpoly code)."""
    A._require_square()
    n = A.rows
    M = A.to_dense()
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k] != 0), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1] if n else 1


# -- characteristic polynomial ----------------------------------------------------------

def charpoly_berkowitz(A: SparseIntMatrix) -> list[int]:
    """Division-free Berkowitz algorithm in Python integers."""
    A._require_square()
    n = A.rows
    M = A.to_dense()
    poly = [1]
    for k in range(n):
        # leading k x k block already processed; add row/column k
        R = M[k][:k]
        C = [M[i][k] for i in range(k)]
        a = M[k][k]
        # Toeplitz column: 1, -a, -R C, -R A C, -R A^2 C, ...
        col = [1, -a]
        v = C[:]
        for _ in range(k):
            col.append(-sum(r * x for r, x in zip(R, v)))
            v = [sum(M[i][j] * v[j] for j in range(k) if M[i][j]) for i in range(k)]
        new = [0] * (k + 2)
        for i in range(k + 2):
            s = 0
            for j in range(min(i, k) + 1):
                if i - j < len(col):
                    s += col[i - j] * poly[j]
            new[i] = s
        poly = new
    return poly


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


_PRIMES: list[int] = []


def _primes(count: int) -> list[int]:
    """Primes just below ``2**31``; products of two residues fit in int64."""
    cand = (_PRIMES[-1] if _PRIMES else 2**31) - 1
    while len(_PRIMES) < count:
        if _is_prime(cand):
            _PRIMES.append(cand)
        cand -= 2 if cand % 2 else 1
    return _PRIMES[:count]


def _charpoly_mod_p(A: np.ndarray, p: int) -> np.ndarray:
    """Charpoly mod ``p`` via Hessenberg reduction; returns lowest-degree-first residues."""
    H = A % p
    n = H.shape[0]
    for k in range(n - 2):
        col = H[k + 1:, k]
        nz = np.flatnonzero(col)
        if nz.size == 0:
            continue
        i = k + 1 + int(nz[0])
        if i != k + 1:
            H[[i, k + 1], :] = H[[k + 1, i], :]
            H[:, [i, k + 1]] = H[:, [k + 1, i]]
        t = int(H[k + 1, k])
        rest = H[k + 2:, k]
        if not rest.any():
            continue
        u = (rest * pow(t, -1, p)) % p
        # columns left of k are already zero below the subdiagonal
        H[k + 2:, k:] = (H[k + 2:, k:] - (u[:, None] * H[k + 1, k:][None, :]) % p) % p
        H[:, k + 1] = (H[:, k + 1] + ((H[:, k + 2:] * u[None, :]) % p).sum(axis=1)) % p
    # p_m = (x - h_mm) p_{m-1} - sum_{i<m} h_im (prod_{j=i+1..m} h_{j,j-1}) p_{i-1}
    polys = np.zeros((n + 1, n + 1), dtype=np.int64)
    polys[0, 0] = 1
    sub = np.zeros(n, dtype=np.int64)  # sub[i] = prod of subdiagonal entries between i and current m
    for m in range(1, n + 1):
        hm = m - 1
        cur = np.zeros(n + 1, dtype=np.int64)
        cur[1:m + 1] = polys[m - 1, :m]
        cur[:m] = (cur[:m] - (H[hm, hm] * polys[m - 1, :m]) % p) % p
        if m > 1:
            sub[:m - 2] = (sub[:m - 2] * H[hm, hm - 1]) % p
            sub[m - 2] = H[hm, hm - 1]
            coef = (H[:m - 1, hm] * sub[:m - 1]) % p
            acc = ((coef[:, None] * polys[:m - 1, :m]) % p).sum(axis=0) % p
            cur[:m] = (cur[:m] - acc) % p
        polys[m] = cur
    return polys[n]


def coefficient_bound(A: SparseIntMatrix) -> int:
    """Upper bound on every ``|c_k|`` of ``det(xI - A)``: ``prod_i (1 + ||row_i||_2)``.

    Each coefficient is a signed sum of principal minors, each bounded by
    Hadamard's inequality on its rows; summing over all index subsets gives
    the product.
    """
    sq = [0] * A.rows
    for (i, _), v in A.entries.items():
        sq[i] += v * v
    bound = 1
    for s in sq:
        r = math.isqrt(s)
        if r * r < s:
            r += 1
        bound *= 1 + r
    return bound


def charpoly_modular(A: SparseIntMatrix) -> list[int]:
    A._require_square()
    n = A.rows
    if n == 0:
        return [1]
    target = 2 * coefficient_bound(A) + 1
    dense = np.zeros((n, n), dtype=np.int64)
    big = any(abs(v) >= 2**62 for v in A.entries.values())
    modulus = 1
    residues = [0] * (n + 1)
    count = 0
    while modulus < target:
        count += 8
        for p in _primes(count)[count - 8:]:
            if modulus >= target:
                break
            for (i, j), v in A.entries.items():
                dense[i, j] = v % p if big else v
            r = _charpoly_mod_p(dense, p)
            # Garner-style incremental CRT
            inv = pow(modulus % p, -1, p)
            for k in range(n + 1):
                x = residues[k]
                t = ((int(r[k]) - x) * inv) % p
                residues[k] = x + modulus * t
            modulus *= p
    half = modulus // 2
    low_first = [x - modulus if x > half else x for x in residues]
    return low_first[::-1]


def charpoly(A: SparseIntMatrix, method: str = "auto") -> list[int]:
    """Integer coefficients of ``det(xI - A)``, highest degree first."""
    A._require_square()
    if method == "auto":
        method = "berkowitz" if A.rows <= BERKOWITZ_AUTO_MAX else "modular"
    if method == "berkowitz":
        return charpoly_berkowitz(A)
    if method == "modular":
        return charpoly_modular(A)
    raise ValueError(f"unknown charpoly method {method!r}")


def _sign_changes(coeffs: Iterable[int]) -> int:
    signs = [c > 0 for c in coeffs if c]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def root_counts(poly: Sequence[int]) -> tuple[int, int, int]:
    """``(negative, zero, positive)`` root counts of a real-rooted integer polynomial.

    Uses Descartes' rule, which is exact when all roots are real (as for the
    characteristic polynomial of a symmetric matrix).
    """
    coeffs = list(poly)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    zero = len(poly) - len(coeffs)
    deg = len(coeffs) - 1
    pos = _sign_changes(coeffs)
    neg = _sign_changes(c * (-1) ** (deg - k) for k, c in enumerate(coeffs))
    if pos + neg != deg:
        raise ValueError("polynomial is not real-rooted")
    return neg, zero, pos


def det_star_nullity(A: SparseIntMatrix, method: str = "auto", check_psd: bool = True,
                     ) -> tuple[int, int]:
    """``(det*, multiplicity of the eigenvalue 0)`` of a symmetric PSD integer matrix.

    det* is ``|lowest nonzero coefficient|`` of the characteristic polynomial;
    the zero matrix gets the empty product ``1``.  With ``check_psd`` the
    matrix is checked to be symmetric and its charpoly to have no negative roots.
    """
    A._require_square()
    if check_psd and not A.is_symmetric():
        raise NotSymmetricError("det_star needs a symmetric matrix")
    poly = charpoly(A, method)
    if check_psd:
        neg, _, _ = root_counts(poly)
        if neg:
            raise NotPSDError(f"matrix has {neg} negative eigenvalues")
    nullity = 0
    while poly[-1 - nullity] == 0:
        nullity += 1
    value = abs(poly[-1 - nullity])
    assert value > 0
    return value, nullity


def det_star(A: SparseIntMatrix, method: str = "auto", check_psd: bool = True) -> int:
    """Product of the nonzero eigenvalues of a symmetric PSD integer matrix (see ``det_star_nullity``)."""
    return det_star_nullity(A, method, check_psd)[0]


def log_det_star(A: SparseIntMatrix, **kw) -> float:
    return _big_log(det_star(A, **kw))


def _big_log(n: int) -> float:
    if n <= 0:
        raise ValueError("log of a nonpositive integer")
    shift = max(0, n.bit_length() - 900)
    return math.log(n >> shift) + shift * math.log(2)


# -- inertia ------------------------------------------------------------------------------

def _scaled_shift(A: SparseIntMatrix, lam) -> SparseIntMatrix:
    lam = Fraction(lam)
    return A.scale(lam.denominator).shift(-lam.numerator)


def inertia(A: SparseIntMatrix, lam=0) -> tuple[int, int, int]:
    """``(#eig < lam, #eig == lam, #eig > lam)`` by symmetric rational LDL^T.

    ``A - lam I`` is scaled to an integer matrix and eliminated with 1x1 pivots
    on nonzero diagonal entries (fewest off-diagonal nonzeros first); when the
    remaining diagonal is entirely zero a 2x2 pivot ``[[0, b], [b, 0]]`` is used,
    which contributes one negative and one positive eigenvalue.  Sylvester's law
    of inertia transfers the pivot signs to the eigenvalue counts.
    """
    A._require_square()
    if not A.is_symmetric():
        raise NotSymmetricError("inertia needs a symmetric matrix")
    B = _scaled_shift(A, lam)
    S: dict[int, dict[int, Fraction]] = {i: {} for i in range(B.rows)}
    for (i, j), v in B.entries.items():
        S[i][j] = Fraction(v)
    neg = pos = 0
    while S:
        diag = [i for i in S if S[i].get(i)]
        if diag:
            k = min(diag, key=lambda i: (len(S[i]), i))
            d = S[k][k]
            if d > 0:
                pos += 1
            else:
                neg += 1
            row = S.pop(k)
            others = [(i, v) for i, v in row.items() if i != k]
            for i, _ in others:
                S[i].pop(k, None)
            for i, vi in others:
                f = vi / d
                Si = S[i]
                for j, vj in others:
                    nv = Si.get(j, 0) - f * vj
                    if nv:
                        Si[j] = nv
                    else:
                        Si.pop(j, None)
            continue
        pair = next(((i, j) for i in S for j in S[i] if j != i), None)
        if pair is None:
            break  # remaining block is zero
        k, l = pair
        b = S[k][l]
        neg += 1
        pos += 1
        rk = S.pop(k)
        rl = S.pop(l)
        for i in list(rk) + list(rl):
            if i in S:
                S[i].pop(k, None)
                S[i].pop(l, None)
        rk = {i: v for i, v in rk.items() if i in S}
        rl = {i: v for i, v in rl.items() if i in S}
        idx = set(rk) | set(rl)
        # Schur complement: S_ij -= (S_ik S_lj + S_il S_kj) / b
        for i in idx:
            Si = S[i]
            aik, ail = rk.get(i, 0), rl.get(i, 0)
            for j in idx:
                delta = (aik * rl.get(j, 0) + ail * rk.get(j, 0)) / b
                if delta:
                    nv = Si.get(j, 0) - delta
                    if nv:
                        Si[j] = nv
                    else:
                        Si.pop(j, None)
    zero = A.rows - neg - pos
    return neg, zero, pos


def inertia_descartes(A: SparseIntMatrix, lam=0, method: str = "auto") -> tuple[int, int, int]:
    """Inertia from the charpoly of the scaled shift ``q A - p I`` (independent route)."""
    A._require_square()
    if not A.is_symmetric():
        raise NotSymmetricError("inertia needs a symmetric matrix")
    return root_counts(charpoly(_scaled_shift(A, lam), method))


# -- norms and floating spectra ---------------------------------------------------------

def norm_bound(A: SparseIntMatrix) -> int:
    """``max(L_row, L_col) * M``, which dominates the operator norm."""
    return max(A.L_row, A.L_col) * A.M


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Disjoint index pairings covering every pair once (circle method)."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for a in range(m // 2):
            p, q = players[a], players[m - 1 - a]
            if p < n and q < n:
                ps.append(min(p, q))
                qs.append(max(p, q))
        rounds.append((np.array(ps, dtype=np.intp), np.array(qs, dtype=np.intp)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_eigenvalues(M: np.ndarray, tol: float = 1e-15, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix by parallel-ordered cyclic Jacobi rotations.

    An off-diagonal entry is annihilated unless it is negligible against both
    its diagonal partners (relative ``eps``) or against ``tol`` times the
    Frobenius norm; convergence is a full sweep without any rotation.
    """
    A = np.array(M, dtype=np.float64, copy=True)
    n = A.shape[0]
    if n <= 1:
        return np.diag(A).copy()
    rounds = _round_robin(n)
    scale = np.linalg.norm(A)
    if scale == 0:
        return np.zeros(n)
    eps = np.finfo(np.float64).eps
    floor = tol * scale
    for _ in range(max_sweeps):
        rotated = False
        for P, Q in rounds:
            apq = A[P, Q]
            app, aqq = A[P, P], A[Q, Q]
            live = (np.abs(apq) > floor) & (np.abs(apq) > eps * np.sqrt(np.abs(app * aqq)))
            if not live.any():
                continue
            rotated = True
            P, Q, apq = P[live], Q[live], apq[live]
            theta = (A[Q, Q] - A[P, P]) / (2.0 * apq)
            big = np.abs(theta) > 1e150
            safe = np.where(big, 1.0, theta)
            t = np.sign(safe) / (np.abs(safe) + np.sqrt(safe * safe + 1.0))
            t = np.where(big, 0.5 / np.where(big, theta, 1.0), t)
            t[theta == 0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            rp, rq = A[P, :].copy(), A[Q, :].copy()
            A[P, :] = c[:, None] * rp - s[:, None] * rq
            A[Q, :] = s[:, None] * rp + c[:, None] * rq
            cp, cq = A[:, P].copy(), A[:, Q].copy()
            A[:, P] = cp * c[None, :] - cq * s[None, :]
            A[:, Q] = cp * s[None, :] + cq * c[None, :]
            A[P, Q] = 0.0
            A[Q, P] = 0.0
        if not rotated:
            return np.sort(np.diag(A))
    raise NonConvergenceError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def float_spectrum(A: SparseIntMatrix, zero_tol: float | None = None, method: str = "jacobi",
                   max_sweeps: int = 60) -> list[float]:
    """Sorted eigenvalues of a symmetric matrix; ``|lambda| <= zero_tol`` reported as 0."""
    A._require_square()
    if not A.is_symmetric():
        raise NotSymmetricError("float_spectrum needs a symmetric matrix")
    if zero_tol is None:
        zero_tol = A.rows * 2.0**-40 * max(norm_bound(A), 1)
    dense = A.to_numpy()
    if method == "jacobi":
        eig = jacobi_eigenvalues(dense, max_sweeps=max_sweeps)
    elif method == "numpy":
        eig = np.linalg.eigvalsh(dense)
    else:
        raise ValueError(f"unknown spectrum method {method!r}")
    eig = np.where(np.abs(eig) <= zero_tol, 0.0, eig)
    return sorted(float(x) for x in eig)


def float_log_det_star(A: SparseIntMatrix, zero_tol: float | None = None, method: str = "jacobi",
                       ) -> tuple[float, int]:
    """``(sum of ln of nonzero eigenvalues, number of zero eigenvalues)`` on the float path."""
    eig = float_spectrum(A, zero_tol, method)
    nz = [x for x in eig if x != 0.0]
    if any(x < 0 for x in nz):
        raise NotPSDError("negative eigenvalue on the float path")
    return float(sum(math.log(x) for x in nz)), len(eig) - len(nz)


def power_iteration_rayleigh(A: SparseIntMatrix, samples: int = 100, iters: int = 30,
                             seed: int = 0) -> float:
    """Largest Rayleigh quotient ``||Av|| / ||v||`` seen from random starts refined by power steps."""
    rng = np.random.default_rng(seed)
    if A.nnz == 0:
        return 0.0
    idx = np.array(list(A.entries.keys()), dtype=np.intp)
    vals = np.array(list(A.entries.values()), dtype=np.float64)
    rows, cols = idx[:, 0], idx[:, 1]

    def apply(v, r, c, n):
        out = np.zeros(n)
        np.add.at(out, r, vals * v[c])
        return out

    best = 0.0
    for _ in range(samples):
        v = rng.standard_normal(A.cols)
        for _ in range(iters):
            w = apply(v, rows, cols, A.rows)
            nw = np.linalg.norm(w)
            best = max(best, nw / np.linalg.norm(v))
            if nw == 0:
                break
            # step with A^T A keeps the iterate in the column space
            v = apply(w, cols, rows, A.cols)
            nv = np.linalg.norm(v)
            if nv == 0:
                break
            v /= nv
    return best
