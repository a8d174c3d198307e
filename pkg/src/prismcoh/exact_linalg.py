"""Exact linear algebra over Z, Z/m and F_p.

Small integer matrices (group-ring module maps) go through an in-house Smith
normal form with transforms, and lattices are kept in Hermite normal form.
A submodule of (Z/m)^n is handled through its preimage lattice L + mZ^n, so
membership and intersection over Z/m reuse the integer code.

Large sparse systems over F_p (coboundary matrices of bar complexes) use a
random left projection followed by an exact check, see :func:`sparse_kernel`.

>>> snf = smith_normal_form(IntMatrix([[2, 4], [6, 8]]))
>>> snf.divisors
[2, 4]
>>> kernel_basis(IntMatrix([[3, 3]], modulus=9))
[[1, 2], [0, 3]]
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

try:  # fast dense mod-p elimination
    import flint
except ImportError:  # pragma: no cover - exercised only without python-flint
    flint = None


# ---------------------------------------------------------------------------
# integer matrices

@dataclass
class IntMatrix:
    """Exact integer matrix; with ``modulus`` m > 0 entries live in Z/m."""

    entries: list[list[int]]
    modulus: int = 0
    cols: int | None = None

    def __post_init__(self) -> None:
        rows = [[int(v) for v in r] for r in _as_rows(self.entries)]
        if self.cols is None:
            self.cols = len(rows[0]) if rows else 0
        if any(len(r) != self.cols for r in rows):
            raise ValueError("ragged matrix")
        if self.modulus:
            rows = [[v % self.modulus for v in r] for r in rows]
        self.entries = rows

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def to_numpy(self) -> np.ndarray:
        return np.array(self.entries, dtype=object).reshape(self.rows, self.cols)

    def transpose(self) -> "IntMatrix":
        return IntMatrix([list(c) for c in zip(*self.entries)] if self.rows else [],
                         self.modulus, self.rows)

    def to_json(self) -> dict:
        return {"rows": self.rows, "cols": self.cols, "modulus": self.modulus,
                "entries": [v for r in self.entries for v in r]}

    @classmethod
    def from_json(cls, data: dict) -> "IntMatrix":
        r, c, flat = data["rows"], data["cols"], data["entries"]
        return cls([flat[k * c:(k + 1) * c] for k in range(r)], data.get("modulus", 0), c)


def _as_rows(a) -> list[list[int]]:
    if isinstance(a, np.ndarray):
        return [[int(v) for v in r] for r in a.reshape(a.shape[0], -1)] if a.ndim else []
    return [list(r) for r in a]


def _matmul(a: list[list[int]], b: list[list[int]]) -> list[list[int]]:
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(r, c)) for c in bt] for r in a]


def _identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


@dataclass
class SnfResult:
    """U*A*V = D with D diagonal and d_i | d_(i+1)."""

    U: list[list[int]]
    D: list[list[int]]
    V: list[list[int]]
    rank: int
    divisors: list[int]

    def check(self, a: IntMatrix) -> bool:
        return _matmul(_matmul(self.U, a.entries), self.V) == self.D if a.rows and a.cols else True


def smith_normal_form(a: IntMatrix) -> SnfResult:
    """Smith normal form over Z with unimodular transforms.

    Pivot rule: smallest nonzero absolute value in the active block, ties
    broken by lowest row then lowest column.
    """
    if a.modulus:
        raise ValueError("smith_normal_form expects an integer matrix (modulus 0)")
    m, n = a.rows, a.cols
    A = [r[:] for r in a.entries]
    U = _identity(m)
    V = _identity(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, q):  # row_dst -= q*row_src
        if q:
            A[dst] = [x - q * y for x, y in zip(A[dst], A[src])]
            U[dst] = [x - q * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, q):  # col_dst -= q*col_src
        if q:
            for r in A:
                r[dst] -= q * r[src]
            for r in V:
                r[dst] -= q * r[src]

    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            row = A[i]
            for j in range(t, n):
                v = row[j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
        if best is None:
            break
        _, i, j = best
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            done = True
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, A[i][t] // A[t][t])
                    if A[i][t]:
                        done = False
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, A[t][j] // A[t][t])
                    if A[t][j]:
                        done = False
            if done:
                bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                            if A[i][j] % A[t][t]), None)
                if bad is None:
                    break
                add_row(t, bad[0], -1)
                continue
            # move the smallest remaining entry of row/column t to the pivot
            cands = [(abs(A[i][t]), i, t) for i in range(t, m) if A[i][t]]
            cands += [(abs(A[t][j]), t, j) for j in range(t + 1, n) if A[t][j]]
            _, i, j = min(cands)
            swap_rows(t, i)
            swap_cols(t, j)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    divisors = [A[k][k] for k in range(t)]
    return SnfResult(U, A, V, t, divisors)


def determinant(a: IntMatrix) -> int:
    """Exact determinant via fraction-free elimination (Bareiss)."""
    n = a.rows
    if n != a.cols:
        raise ValueError("determinant of a non-square matrix")
    M = [r[:] for r in a.entries]
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            sw = next((i for i in range(k + 1, n) if M[i][k]), None)
            if sw is None:
                return 0
            M[k], M[sw] = M[sw], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1] if n else 1


# ---------------------------------------------------------------------------
# lattices

def hermite_rows(rows: list[list[int]], ncols: int) -> list[list[int]]:
    """Row Hermite normal form: echelon, positive pivots, entries above a pivot in [0, pivot)."""
    active = [list(r) for r in rows if any(r)]
    out: list[list[int]] = []
    for col in range(ncols):
        if not active:
            break
        nz = [r for r in active if r[col]]
        if not nz:
            continue
        rest = [r for r in active if not r[col]]
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            piv, survivors = nz[0], [nz[0]]
            for r in nz[1:]:
                q = r[col] // piv[col]
                r = [x - q * y for x, y in zip(r, piv)]
                if r[col]:
                    survivors.append(r)
                elif any(r):
                    rest.append(r)
            nz = survivors
        piv = nz[0] if nz[0][col] > 0 else [-x for x in nz[0]]
        for k, r in enumerate(out):
            q = r[col] // piv[col]
            if q:
                out[k] = [x - q * y for x, y in zip(r, piv)]
        out.append(piv)
        active = rest
    return out


@dataclass
class Lattice:
    """A Z-lattice in Z^dim (modulus 0) or a submodule of (Z/m)^dim.

    For modulus m the stored basis spans the preimage lattice L + mZ^dim, so
    it is always full rank; ``generators`` gives a reduced generating set.
    """

    dim: int
    basis: list[list[int]]
    modulus: int = 0

    @classmethod
    def from_generators(cls, gens, dim: int, modulus: int = 0) -> "Lattice":
        rows = [[int(v) for v in g] for g in _as_rows(np.asarray(gens, dtype=object).reshape(-1, dim))] \
            if len(gens) else []
        if modulus:
            rows = [[v % modulus for v in r] for r in rows]
            rows += [[modulus * (i == j) for j in range(dim)] for i in range(dim)]
        return cls(dim, hermite_rows(rows, dim), modulus)

    @property
    def rank(self) -> int:
        return len(self.basis)

    def generators(self) -> list[list[int]]:
        if not self.modulus:
            return [r[:] for r in self.basis]
        gens = [[v % self.modulus for v in r] for r in self.basis]
        return [g for g in gens if any(g)]

    def index(self) -> int:
        """Index of the (full-rank) basis lattice in Z^dim."""
        d = 1
        for r in self.basis:
            d *= r[next(j for j, v in enumerate(r) if v)]
        return d

    def size(self) -> int:
        """Number of elements of the submodule (modulus m only)."""
        if not self.modulus:
            raise ValueError("infinite lattice")
        return self.modulus ** self.dim // self.index()

    def contains(self, v) -> bool:
        return membership(self, v)

    def hnf(self) -> "Lattice":
        return Lattice(self.dim, hermite_rows(self.basis, self.dim), self.modulus)


def membership(lat: Lattice, v) -> bool:
    """Is v an integer (resp. Z/m) combination of the basis rows?"""
    v = [int(x) for x in np.asarray(v, dtype=object).reshape(-1)]
    if len(v) != lat.dim:
        raise ValueError("dimension mismatch")
    if lat.modulus:
        v = [x % lat.modulus for x in v]
    # reduce against the echelon basis
    for r in lat.basis:
        piv = next(j for j, x in enumerate(r) if x)
        if v[piv] % r[piv]:
            return False
        q = v[piv] // r[piv]
        v = [x - q * y for x, y in zip(v, r)]
    return not any(v)


def lattice_intersection(a: Lattice, b: Lattice) -> Lattice:
    """Basis of a ∩ b from the kernel of the stacked basis matrix."""
    if a.dim != b.dim or a.modulus != b.modulus:
        raise ValueError("lattices live in different ambient modules")
    if not a.basis or not b.basis:
        return Lattice(a.dim, [], a.modulus) if not a.modulus else Lattice.from_generators([], a.dim, a.modulus)
    # (x, y) with x*A = y*B  <=>  [A; -B]^T (x, y)^T = 0
    stacked = IntMatrix([list(col) for col in zip(*(a.basis + [[-v for v in r] for r in b.basis]))])
    ker = _integer_kernel(stacked)
    ra = len(a.basis)
    gens = [[sum(k[i] * a.basis[i][j] for i in range(ra)) for j in range(a.dim)] for k in ker]
    return Lattice(a.dim, hermite_rows(gens, a.dim), a.modulus)


def same_lattice(a: Lattice, b: Lattice) -> bool:
    """Two-sided membership plus rank equality."""
    return (a.rank == b.rank and all(membership(b, r) for r in a.basis)
            and all(membership(a, r) for r in b.basis))


# ---------------------------------------------------------------------------
# kernel / solve over Z and Z/m

def _integer_kernel(a: IntMatrix) -> list[list[int]]:
    if a.cols == 0:
        return []
    if a.rows == 0:
        return _identity(a.cols)
    snf = smith_normal_form(a)
    return [[snf.V[i][j] for i in range(a.cols)] for j in range(snf.rank, a.cols)]


def _with_modulus(a: IntMatrix) -> IntMatrix:
    m = a.modulus
    return IntMatrix([r + [m * (i == j) for j in range(a.rows)] for i, r in enumerate(a.entries)], 0)


def kernel_basis(a: IntMatrix) -> list[list[int]]:
    """Integer kernel lattice basis (HNF rows), or a generating set of the
    kernel module over Z/m obtained by adjoining the modulus as relations."""
    if not a.modulus:
        return hermite_rows(_integer_kernel(a), a.cols)
    ker = _integer_kernel(_with_modulus(a))
    gens = [k[:a.cols] for k in ker]
    return Lattice.from_generators(gens, a.cols, a.modulus).generators()


def solve(a: IntMatrix, b) -> list[int] | None:
    """Some x with A x = b (over Z, or over Z/m), or None when unsolvable."""
    b = [int(v) for v in np.asarray(b, dtype=object).reshape(-1)]
    if len(b) != a.rows:
        raise ValueError("right-hand side has the wrong length")
    m = a.modulus
    work = _with_modulus(a) if m else a
    if m:
        b = [v % m for v in b]
    if work.cols == 0:
        return [] if not any(b) else None
    snf = smith_normal_form(work)
    ub = [sum(u * v for u, v in zip(row, b)) for row in snf.U]
    y = [0] * work.cols
    for k in range(len(ub)):
        if k < snf.rank:
            d = snf.divisors[k]
            if ub[k] % d:
                return None
            y[k] = ub[k] // d
        elif ub[k]:
            return None
    x = [sum(snf.V[i][k] * y[k] for k in range(work.cols)) for i in range(work.cols)][:a.cols]
    return [v % m for v in x] if m else x


def image_lattice(a: IntMatrix) -> Lattice:
    """Column span of A."""
    cols = [list(c) for c in zip(*a.entries)] if a.rows else []
    return Lattice.from_generators(cols, a.rows, a.modulus)


# ---------------------------------------------------------------------------
# dense F_p

def rref_mod_p(a: np.ndarray, p: int, engine: str = "auto") -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over F_p and its pivot columns."""
    a = np.asarray(a, dtype=np.int64) % p
    if a.size == 0:
        return a.reshape(a.shape), []
    if engine == "numpy" or (engine == "auto" and (flint is None or a.size < 4000)):
        return _rref_numpy(a, p)
    r, c = a.shape
    M = flint.nmod_mat(r, c, a.ravel().tolist(), p)
    R, rank = M.rref()
    if rank == 0:
        return np.zeros((0, c), dtype=np.int64), []
    ent = R.entries()
    top = np.array([int(x) for x in ent[:rank * c]], dtype=np.int64).reshape(rank, c)
    pivots = [int(np.argmax(row != 0)) for row in top]
    return top, pivots


def _rref_numpy(a: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    M = a.copy()
    r, c = M.shape
    pivots: list[int] = []
    row = 0
    for col in range(c):
        if row == r:
            break
        nz = np.nonzero(M[row:, col])[0]
        if not len(nz):
            continue
        piv = row + nz[0]
        if piv != row:
            M[[row, piv]] = M[[piv, row]]
        M[row] = (M[row] * pow(int(M[row, col]), -1, p)) % p
        f = M[:, col].copy()
        f[row] = 0
        hit = np.nonzero(f)[0]
        if len(hit):
            M[hit] = (M[hit] - np.outer(f[hit], M[row])) % p
        pivots.append(col)
        row += 1
    return M[:row], pivots


def nullspace_mod_p(a: np.ndarray, p: int, engine: str = "auto") -> np.ndarray:
    """Columns spanning {x : A x = 0} over F_p (identity on free coordinates)."""
    a = np.asarray(a, dtype=np.int64)
    ncols = a.shape[1]
    R, piv = rref_mod_p(a, p, engine)
    return _kernel_from_rref(R, piv, ncols, p)


def _kernel_from_rref(R: np.ndarray, piv: list[int], ncols: int, p: int) -> np.ndarray:
    free = [j for j in range(ncols) if j not in set(piv)]
    K = np.zeros((ncols, len(free)), dtype=np.int64)
    for k, j in enumerate(free):
        K[j, k] = 1
        if piv:
            K[piv, k] = (-R[:, j]) % p
    return K


def rank_mod_p(a: np.ndarray, p: int) -> int:
    return len(rref_mod_p(a, p)[1])


def solve_mod_p(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray | None:
    """One solution of A X = B over F_p (B may have several columns), or None."""
    a = np.asarray(a, dtype=np.int64) % p
    b = np.asarray(b, dtype=np.int64) % p
    vec = b.ndim == 1
    B = b.reshape(a.shape[0], -1)
    R, piv = rref_mod_p(np.hstack([a, B]), p)
    n = a.shape[1]
    if any(c >= n for c in piv):
        return None
    X = np.zeros((n, B.shape[1]), dtype=np.int64)
    if piv:
        X[piv] = R[:, n:]
    return X[:, 0] if vec else X


class Subspace:
    """Row space of a matrix over F_p, kept in reduced echelon form."""

    def __init__(self, rows: np.ndarray, dim: int, p: int) -> None:
        rows = np.asarray(rows, dtype=np.int64)
        rows = rows.reshape(-1, dim) if dim else np.zeros((0, 0), dtype=np.int64)
        self.R, self.pivots = rref_mod_p(rows, p) if len(rows) else (np.zeros((0, dim), dtype=np.int64), [])
        self.dim, self.p = dim, p

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, v: np.ndarray) -> np.ndarray:
        """Remainder of vectors (rows) after eliminating pivot coordinates."""
        v = np.asarray(v, dtype=np.int64) % self.p
        if self.rank == 0:
            return v
        coef = v[..., self.pivots]
        return (v - coef @ self.R) % self.p

    def contains(self, v: np.ndarray) -> bool:
        return not self.reduce(v).any()

    def complement_coords(self) -> list[int]:
        return [j for j in range(self.dim) if j not in set(self.pivots)]


# ---------------------------------------------------------------------------
# sparse F_p via projection

@dataclass
class SparseKernel:
    """Verified kernel of a sparse matrix over F_p."""

    basis: np.ndarray              # ncols x k, identity on ``free``
    free: list[int]
    pivots: list[int]
    R: np.ndarray                  # echelon rows of the projected matrix
    attempts: int = 1
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


def _project(A: sp.csr_matrix, p: int, k: int, rng: np.random.Generator, chunk: int = 4096) -> np.ndarray:
    m, n = A.shape
    acc = np.zeros((n, k), dtype=np.int64)
    At = A.T.tocsr()
    for s in range(0, m, chunk):
        e = min(m, s + chunk)
        Rt = rng.integers(0, p, size=(e - s, k), dtype=np.int64)
        acc = (acc + (At[:, s:e] @ Rt)) % p
    return acc.T


def _times(A: sp.csr_matrix, K: np.ndarray, p: int, chunk: int = 8192):
    """Yield (A[rows] @ K) mod p chunkwise."""
    m = A.shape[0]
    for s in range(0, m, chunk):
        yield (A[s:min(m, s + chunk)] @ K) % p


def sparse_kernel(A, p: int, seed: int = 0, extra: int = 12, max_attempts: int = 6) -> SparseKernel:
    """Exact kernel of a (tall, sparse) matrix over F_p.

    The kernel of a random k x m projection R*A contains ker A and equals it
    with high probability once k exceeds rank A; equality is then certified
    by checking A*K = 0 exactly.  On a failed check more rows are drawn.
    """
    A = sp.csr_matrix(A, dtype=np.int64)
    A.data %= p
    A.eliminate_zeros()
    m, n = A.shape
    rng = np.random.default_rng(seed)
    if n == 0:
        return SparseKernel(np.zeros((0, 0), dtype=np.int64), [], [], np.zeros((0, 0), dtype=np.int64))
    if m <= n + extra:
        B = A.toarray() % p
        attempts = 0
    else:
        B = None
        attempts = 1
    k = n + extra
    while True:
        if B is None:
            B = _project(A, p, k, rng)
        R, piv = rref_mod_p(B, p)
        K = _kernel_from_rref(R, piv, n, p)
        if K.shape[1] == 0 or all(not blk.any() for blk in _times(A, K, p)):
            free = [j for j in range(n) if j not in set(piv)]
            return SparseKernel(K, free, piv, R, max(attempts, 1))
        attempts += 1
        if attempts > max_attempts:
            raise RuntimeError("projection kernel failed verification repeatedly")
        k *= 2
        B = None


def sparse_solve_many(A, Y: np.ndarray, p: int, seed: int = 0) -> tuple[Subspace, np.ndarray, np.ndarray]:
    """Which combinations of the columns of Y lie in the column span of A.

    Returns (S, Kx, Kc): S is the subspace of coefficient vectors c with
    Y c in im A; for the kernel basis of [A | Y], columns of Kx/Kc are the
    x-parts and c-parts, so A (Kx z) = -Y (Kc z).
    """
    A = sp.csr_matrix(A, dtype=np.int64)
    Y = np.asarray(Y, dtype=np.int64).reshape(A.shape[0], -1) % p
    aug = sp.hstack([A, sp.csr_matrix(Y)], format="csr")
    ker = sparse_kernel(aug, p, seed)
    n = A.shape[1]
    Kx, Kc = ker.basis[:n], ker.basis[n:]
    return Subspace(Kc.T, Y.shape[1], p), Kx, Kc


def sparse_solve(A, b: np.ndarray, p: int, seed: int = 0) -> np.ndarray | None:
    """Some x with A x = b over F_p, or None."""
    S, Kx, Kc = sparse_solve_many(A, b.reshape(-1, 1), p, seed)
    if Kc.shape[1] == 0:
        return None
    hit = np.nonzero(Kc[0])[0]
    if not len(hit):
        return None
    z = hit[0]
    scale = (-pow(int(Kc[0, z]), -1, p)) % p
    return (Kx[:, z] * scale) % p


# ---------------------------------------------------------------------------
# Z/p^2 via two F_p solves

def solve_mod_p2(A, b: np.ndarray, p: int, seed: int = 0) -> np.ndarray | None:
    """Some x with A x = b over Z/p^2, or None.

    Write x = x0 + p*x1.  Solve A x0 = b mod p; every other mod-p solution is
    x0 + K c with K spanning ker(A mod p).  Then A(x0 + K c) = b mod p^2 needs
    W c + A x1 = r mod p with W = (A K)/p and r = (b - A x0)/p.
    """
    q = p * p
    A = sp.csr_matrix(A, dtype=np.int64)
    A.data %= q
    b = np.asarray(b, dtype=np.int64) % q
    x0 = sparse_solve(A, b % p, p, seed)
    if x0 is None:
        return None
    kern = sparse_kernel(A, p, seed)
    K = kern.basis
    r = ((b - A @ x0) % q) // p
    W = ((A @ K) % q) // p
    big = sp.hstack([sp.csr_matrix(W), A], format="csr")
    sol = sparse_solve(big, r, p, seed + 1)
    if sol is None:
        return None
    c, x1 = sol[:K.shape[1]], sol[K.shape[1]:]
    return (x0 + K @ c + p * x1) % q


def kernel_mod_p2(A, p: int, seed: int = 0) -> np.ndarray:
    """Columns generating {x : A x = 0 mod p^2}."""
    q = p * p
    A = sp.csr_matrix(A, dtype=np.int64)
    A.data %= q
    K = sparse_kernel(A, p, seed).basis
    W = ((A @ K) % q) // p
    big = sp.hstack([sp.csr_matrix(W), A], format="csr")
    ker = sparse_kernel(big, p, seed + 1).basis
    c, x1 = ker[:K.shape[1]], ker[K.shape[1]:]
    return (K @ c + p * x1) % q
