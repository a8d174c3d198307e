"""Inhomogeneous cochains of a finite group with values in small modules,
the coboundary, the separated product x*y', and the mod-3 / mod-9 cocycle
constructors built from characters, carries and binomial parts.

Conventions:

* A cochain of degree n stores its values as an array of shape (N**n, d),
  N the group order and d the module rank; the tuple (g1, ..., gn) sits at
  row ((g1*N + g2)*N + ...).  Flattening gives index row*d + a, matching
  ``kron(I, block)`` for pointwise linear maps.
* (delta f)(g1..g_{n+1}) = g1.f(g2..) + sum_i (-1)^i f(.., g_i g_{i+1}, ..)
  + (-1)^(n+1) f(g1..gn).  Cochains are not normalized.
* (x*y')(g, rest) = x(g) y(rest); with this sign convention
  delta(x*y') = (delta x)*y'' - x*(delta y)' when y has trivial action
  (every use in the package).
* The group ring Z/m[G], G = (Z/3)^2, uses the package coordinates
  (index 3i + j for x1^i x2^j).  A group acts through a pair of characters
  (chi1, chi2): g acts as x1^chi1(g) x2^chi2(g).

>>> from prismcoh.finite_group import builtin_group, make_character
>>> g = builtin_group("c9")
>>> th = make_character(g, [1])
>>> s = carry(th)
>>> lhs = delta(s)
>>> rhs = -(sep_product(char(th), binom2(th)) + sep_product(binom2(th), char(th)))
>>> lhs == rhs
True
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
import scipy.sparse as sp

from .exact_linalg import kernel_mod_p2, nullspace_mod_p, rref_mod_p, sparse_kernel, sparse_solve
from .finite_group import Character, FiniteGroup, default_sigma, hat, lambda2, require_lift, s_theta
from .group_ring import special_elements, translation_matrix
from .prism import PrismContext, explicit_pair_p3, ideal_embedding
from .report import VerificationReport

P = 3
MAX_ENTRIES = 2 * 10 ** 7
MAX_DEGREE = 3
MAX_ORDER = 81


# ---------------------------------------------------------------------------
# coefficient modules

# tau on Z[<tau>] in the basis (1, t, t^2), t = tau - 1; t^3 = -3t - 3t^2.
_TAU_T_BASIS = np.array([[1, 0, 0], [1, 1, -3], [0, 1, -2]], dtype=np.int64)


class CoefficientModule:
    """A free Z-module of rank d with a group action, reduced mod ``modulus``.

    ``integral`` holds one integer matrix per group element (the action on
    the lattice); ``matrices`` are their reductions.  Bocksteins use the
    integral form to lift values.
    """

    def __init__(self, name: str, group: FiniteGroup, integral: np.ndarray, modulus: int,
                 labels: list[str] | None = None, validate: bool = True) -> None:
        integral = np.asarray(integral, dtype=np.int64)
        if integral.ndim != 3 or integral.shape[0] != group.order or integral.shape[1] != integral.shape[2]:
            raise ValueError("need one square action matrix per group element")
        if modulus not in (3, 9):
            raise ValueError("coefficient modulus must be 3 or 9")
        self.name, self.group, self.modulus = name, group, modulus
        self.integral = integral
        self.integral.setflags(write=False)
        self.matrices = integral % modulus
        self.matrices.setflags(write=False)
        self.dim = integral.shape[1]
        self.labels = labels
        if validate:
            self.validate()

    @cached_property
    def is_trivial(self) -> bool:
        return bool((self.matrices == np.eye(self.dim, dtype=np.int64)).all())

    def validate(self, samples: int = 400, seed: int = 0) -> None:
        """g.(h.v) = (gh).v, checked on all pairs for small groups, sampled otherwise."""
        g = self.group
        if not (self.matrices[g.identity] == np.eye(self.dim, dtype=np.int64)).all():
            raise ValueError(f"{self.name}: identity does not act trivially")
        n = g.order
        if n * n <= samples:
            pairs = [(a, b) for a in range(n) for b in range(n)]
        else:
            rng = np.random.default_rng(seed)
            pairs = rng.integers(0, n, size=(samples, 2)).tolist()
        for a, b in pairs:
            if not ((self.matrices[a] @ self.matrices[b] - self.matrices[g.table[a, b]]) % self.modulus == 0).all():
                raise ValueError(f"{self.name}: action is not a homomorphism at ({a}, {b})")

    def act(self, g: int, v) -> np.ndarray:
        return (self.matrices[g] @ np.asarray(v, dtype=np.int64)) % self.modulus

    def reduced(self, modulus: int) -> "CoefficientModule":
        if modulus == self.modulus:
            return self
        return CoefficientModule(self.name.rsplit("/", 1)[0] + f"/{modulus}", self.group, self.integral,
                                 modulus, self.labels, validate=False)

    def same_as(self, other: "CoefficientModule") -> bool:
        return (self is other or (self.group is other.group and self.modulus == other.modulus
                                  and self.dim == other.dim and np.array_equal(self.matrices, other.matrices)))

    def __repr__(self) -> str:
        return f"CoefficientModule({self.name}, rank={self.dim})"


def _image_pairs(chi1: Character, chi2: Character) -> np.ndarray:
    return np.stack([chi1.values % 3, chi2.values % 3], axis=1)


def trivial_module(group: FiniteGroup, modulus: int = 3) -> CoefficientModule:
    mats = np.broadcast_to(np.eye(1, dtype=np.int64), (group.order, 1, 1)).copy()
    return CoefficientModule(f"Z/{modulus}", group, mats, modulus, ["1"], validate=False)


def group_ring_module(group: FiniteGroup, chi1: Character, chi2: Character,
                      modulus: int = 3) -> CoefficientModule:
    """Z/m[G] with g acting by x1^chi1(g) x2^chi2(g)."""
    pairs = _image_pairs(chi1, chi2)
    mats = np.stack([translation_matrix(P, int(i), int(j)) for i, j in pairs])
    return CoefficientModule(f"Z[G]/{modulus}", group, mats, modulus)


def cyclic_module(group: FiniteGroup, theta: Character, modulus: int = 3) -> CoefficientModule:
    """Z/m[<tau>] in the basis (1, t, t^2), g acting by tau^theta(g)."""
    powers = [np.linalg.matrix_power(_TAU_T_BASIS, k) for k in range(3)]
    mats = np.stack([powers[int(v) % 3] for v in theta.values])
    return CoefficientModule(f"Z[tau]/{modulus}", group, mats, modulus, ["1", "t", "t^2"])


@lru_cache(maxsize=None)
def _prism_context() -> PrismContext:
    return PrismContext(P, 0, explicit_pair_p3())


def prism_module(group: FiniteGroup, chi1: Character, chi2: Character, index: int,
                 modulus: int = 3) -> CoefficientModule:
    """M_index (1..4) of the four-term sequence for p = 3, reduced mod m."""
    ctx = _prism_context()
    table = {(i, j): ctx.action(index, i, j) for i in range(3) for j in range(3)}
    pairs = _image_pairs(chi1, chi2)
    mats = np.stack([table[(int(i), int(j))] for i, j in pairs])
    return CoefficientModule(f"M{index}/{modulus}", group, mats, modulus)


# ---------------------------------------------------------------------------
# cochains

def _check_size(group: FiniteGroup, n: int, d: int) -> None:
    if n < 0 or n > MAX_DEGREE + 1:
        raise ValueError(f"cochain degree {n} outside 0..{MAX_DEGREE + 1}")
    if group.order > MAX_ORDER:
        raise ValueError(f"group order {group.order} exceeds {MAX_ORDER}")
    if group.order ** n * d > MAX_ENTRIES:
        raise ValueError(f"cochain array of {group.order}^{n} x {d} entries exceeds the size cap")


@dataclass(frozen=True, eq=False)
class Cochain:
    module: CoefficientModule
    degree: int
    values: np.ndarray

    def __post_init__(self) -> None:
        g, d = self.module.group, self.module.dim
        _check_size(g, self.degree, d)
        v = np.asarray(self.values, dtype=np.int64).reshape(g.order ** self.degree, d) % self.module.modulus
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def group(self) -> FiniteGroup:
        return self.module.group

    @property
    def modulus(self) -> int:
        return self.module.modulus

    @classmethod
    def zero(cls, module: CoefficientModule, degree: int) -> "Cochain":
        return cls(module, degree, np.zeros((module.group.order ** degree, module.dim), dtype=np.int64))

    @classmethod
    def random(cls, module: CoefficientModule, degree: int, rng: np.random.Generator) -> "Cochain":
        n = module.group.order ** degree
        return cls(module, degree, rng.integers(0, module.modulus, size=(n, module.dim)))

    @classmethod
    def from_flat(cls, module: CoefficientModule, degree: int, flat) -> "Cochain":
        return cls(module, degree, np.asarray(flat, dtype=np.int64).reshape(-1, module.dim))

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def grid(self) -> np.ndarray:
        n = self.group.order
        return self.values.reshape((n,) * self.degree + (self.module.dim,))

    def __call__(self, *gs: int) -> np.ndarray:
        if len(gs) != self.degree:
            raise ValueError(f"expected {self.degree} arguments")
        idx = 0
        for g in gs:
            idx = idx * self.group.order + int(g)
        return self.values[idx]

    def _like(self, values) -> "Cochain":
        return Cochain(self.module, self.degree, values)

    def _same(self, other: "Cochain") -> None:
        if not isinstance(other, Cochain):
            raise TypeError("expected a Cochain")
        if other.degree != self.degree or not self.module.same_as(other.module):
            raise ValueError(f"cochain mismatch: degree {self.degree}/{other.degree}, "
                             f"module {self.module.name}/{other.module.name}")

    def __add__(self, other: "Cochain") -> "Cochain":
        self._same(other)
        return self._like(self.values + other.values)

    def __sub__(self, other: "Cochain") -> "Cochain":
        self._same(other)
        return self._like(self.values - other.values)

    def __neg__(self) -> "Cochain":
        return self._like(-self.values)

    def __rmul__(self, k: int) -> "Cochain":
        return self._like(int(k) * self.values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Cochain):
            return NotImplemented
        try:
            self._same(other)
        except ValueError:
            return False
        return bool(np.array_equal(self.values, other.values))

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.values.any()

    def mismatch(self, other: "Cochain", limit: int = 3) -> list[dict]:
        """A few arguments where two cochains differ (counterexample payloads)."""
        self._same(other)
        bad = np.nonzero((self.values != other.values).any(axis=1))[0][:limit]
        n = self.group.order
        out = []
        for r in bad:
            args = list(np.unravel_index(int(r), (n,) * self.degree)) if self.degree else []
            out.append({"args": [int(a) for a in args], "lhs": self.values[r].tolist(),
                        "rhs": other.values[r].tolist()})
        return out

    def component(self, a: int) -> "Cochain":
        """Scalar cochain of coordinate a."""
        return Cochain(trivial_module(self.group, self.modulus), self.degree, self.values[:, a:a + 1])

    def apply(self, matrix, target: CoefficientModule) -> "Cochain":
        """Pointwise linear map of values (target must have matching rank)."""
        m = np.asarray(matrix, dtype=np.int64)
        return Cochain(target, self.degree, self.values @ m.T)

    def reduce(self, modulus: int) -> "Cochain":
        if self.modulus % modulus:
            raise ValueError("can only reduce to a divisor of the modulus")
        return Cochain(self.module.reduced(modulus), self.degree, self.values)

    def hat(self, modulus: int = 9) -> "Cochain":
        """Values read as representatives in {0..m-1} in a larger modulus."""
        return Cochain(self.module.reduced(modulus), self.degree, self.values)

    def times3(self) -> "Cochain":
        """The Z/3 -> Z/9 embedding 1 -> 3 applied to values."""
        if self.modulus != 3:
            raise ValueError("times3 expects a mod-3 cochain")
        return Cochain(self.module.reduced(9), self.degree, 3 * self.values)

    def div3(self) -> "Cochain":
        """Values in 3Z/9 divided by 3, as a mod-3 cochain."""
        if self.modulus != 9 or (self.values % 3).any():
            raise ValueError("div3 expects a mod-9 cochain with values in 3Z/9")
        return Cochain(self.module.reduced(3), self.degree, self.values // 3)

    def restrict(self, elements) -> "Cochain":
        """Restriction to a subgroup given by its (sorted) element list, as a
        cochain on the subgroup with the restricted action."""
        sub, emb = self.group.subgroup(elements)
        mod = CoefficientModule(self.module.name, sub, self.module.integral[emb], self.modulus,
                                self.module.labels, validate=False)
        if self.degree == 0:
            return Cochain(mod, 0, self.values)
        idx = np.zeros(1, dtype=np.int64)
        for _ in range(self.degree):
            idx = (idx[:, None] * self.group.order + emb[None, :]).reshape(-1)
        return Cochain(mod, self.degree, self.values[idx])

    def to_json(self) -> dict:
        return {"module": self.module.name, "degree": self.degree, "modulus": self.modulus,
                "values": self.values.tolist()}

    def __repr__(self) -> str:
        return f"Cochain({self.module.name}, degree={self.degree}, nonzero={int(self.values.any(axis=1).sum())})"


def scalar(group: FiniteGroup, values, modulus: int = 3, degree: int = 1) -> Cochain:
    return Cochain(trivial_module(group, modulus), degree, np.asarray(values, dtype=np.int64).reshape(-1, 1))


def as_module(f: Cochain, module: CoefficientModule) -> Cochain:
    """Reinterpret the values of f in another module of the same rank."""
    if module.dim != f.module.dim or module.group is not f.group:
        raise ValueError("module rank/group mismatch")
    return Cochain(module, f.degree, f.values)


# scalar functions of characters ------------------------------------------------

def char(theta: Character) -> Cochain:
    """theta as a degree-1 cochain into Z/3."""
    return scalar(theta.group, theta.values, 3)


def char_lift(theta: Character) -> Cochain:
    if theta.lift is None:
        raise ValueError("character has no homomorphic lift to Z/9")
    return scalar(theta.group, theta.lift, 9)


def char_hat(theta: Character) -> Cochain:
    """theta-hat: values of theta read in {0,1,2} inside Z/9."""
    return scalar(theta.group, hat(theta.values), 9)


def binom2(theta: Character, modulus: int = 3, source: str = "theta") -> Cochain:
    """lambda^2 of theta ("theta"), of theta-hat ("hat") or of the lift ("lift")."""
    vals = {"theta": lambda: theta.values, "hat": lambda: hat(theta.values),
            "lift": lambda: char_lift(theta).values[:, 0]}[source]()
    return scalar(theta.group, lambda2(vals, modulus), modulus)


def carry(theta: Character, sigma: int | None = None) -> Cochain:
    """The carry function s_theta (needs a lift)."""
    return scalar(theta.group, s_theta(theta, sigma).values, 3)


def carry_hat(theta: Character) -> Cochain:
    return carry(theta).hat(9)


def pointwise(x: Cochain, y: Cochain) -> Cochain:
    """Pointwise product of two scalar cochains of the same degree."""
    x._same(y)
    if x.module.dim != 1:
        raise ValueError("pointwise product is for scalar cochains")
    return x._like(x.values * y.values)


# ---------------------------------------------------------------------------
# coboundary and separated product

def _axes(n: int, N: int) -> list[np.ndarray]:
    out = []
    for k in range(n):
        shape = [1] * n
        shape[k] = N
        out.append(np.arange(N).reshape(shape))
    return out


def delta(f: Cochain) -> Cochain:
    g, mod = f.group, f.module
    N, n, d = g.order, f.degree, mod.dim
    _check_size(g, n + 1, d)
    F = f.grid()
    if mod.is_trivial:
        first = np.broadcast_to(F[None], (N,) + F.shape)
    else:
        first = np.einsum("gab,...b->g...a", mod.matrices, F)
    out = np.array(first, dtype=np.int64)
    ax = _axes(n + 1, N)
    for i in range(1, n + 1):
        merged = g.table[ax[i - 1], ax[i]]
        idx = tuple(ax[:i - 1]) + (merged,) + tuple(ax[i + 1:])
        out += (-1) ** i * F[idx]
    out += (-1) ** (n + 1) * F[(Ellipsis,) + (None, slice(None))] if n else -F[None]
    return Cochain(mod, n + 1, out.reshape(-1, d))


def sep_product(x: Cochain, y: Cochain) -> Cochain:
    """(x*y')(g, rest) = x(g) y(rest) for a scalar degree-1 x."""
    if x.degree != 1 or x.module.dim != 1:
        raise ValueError("the first factor must be a scalar cochain of degree 1")
    if x.modulus != y.modulus:
        raise ValueError(f"modulus mismatch: {x.modulus} vs {y.modulus}")
    if x.group is not y.group:
        raise ValueError("cochains live on different groups")
    out = x.values[:, 0][:, None, None] * y.values[None, :, :]
    return Cochain(y.module, y.degree + 1, out.reshape(-1, y.module.dim))


def cup(x: Cochain, y: Cochain) -> Cochain:
    """(x cup y)(a, b) = x(a) y(b) for scalar cochains of any degrees."""
    if x.modulus != y.modulus or x.module.dim != 1:
        raise ValueError("cup expects scalar cochains with equal moduli")
    out = x.values[:, 0][:, None, None] * y.values[None, :, :]
    return Cochain(y.module, x.degree + y.degree, out.reshape(-1, y.module.dim))


def ring_times(f: Cochain, r) -> Cochain:
    """Values (in Z/m[G]) multiplied by a fixed group ring element r."""
    mat = r.mult_matrix() if hasattr(r, "mult_matrix") else np.asarray(r)
    return f._like(f.values @ mat.T)


# ---------------------------------------------------------------------------
# sparse operator matrices

@lru_cache(maxsize=64)
def _tuple_maps(group_id: int, N: int, n: int, table_bytes: bytes) -> list[tuple[int, np.ndarray]]:
    table = np.frombuffer(table_bytes, dtype=np.int64).reshape(N, N)
    ax = _axes(n + 1, N)
    weights = [N ** (n - 1 - k) for k in range(n)]
    maps = []
    shape = (N,) * (n + 1)
    for i in range(1, n + 2):
        if i <= n:
            merged = table[ax[i - 1], ax[i]]
            args = list(ax[:i - 1]) + [merged] + list(ax[i + 1:])
        else:
            args = list(ax[:n])
        col = np.zeros(shape, dtype=np.int64)
        for a, w in zip(args, weights):
            col = col + np.broadcast_to(a, shape) * w
        maps.append(((-1) ** i, col.reshape(-1)))
    return maps


def delta_matrix(module: CoefficientModule, n: int) -> sp.csr_matrix:
    """Sparse matrix of delta: C^n -> C^{n+1} on flattened cochains."""
    g = module.group
    N, d, m = g.order, module.dim, module.modulus
    _check_size(g, n + 1, d)
    rows_out = N ** (n + 1)
    cols_in = N ** n
    maps = _tuple_maps(id(g), N, n, g.table.tobytes())
    r = np.arange(rows_out)
    S = sp.csr_matrix((rows_out, cols_in), dtype=np.int64)
    for sign, col in maps:
        S = S + sp.csr_matrix((np.full(rows_out, sign, dtype=np.int64), (r, col)), shape=(rows_out, cols_in))
    total = sp.kron(S, sp.identity(d, dtype=np.int64, format="csr"), format="csr")
    # first term: g1 acting on f(g2..)
    blocks_r, blocks_c, blocks_v = [], [], []
    rest = np.arange(cols_in)
    for g1 in range(N):
        A = module.matrices[g1]
        a_idx, b_idx = np.nonzero(A)
        if not len(a_idx):
            continue
        base = (g1 * cols_in + rest)[:, None] * d
        blocks_r.append((base + a_idx[None, :]).reshape(-1))
        blocks_c.append((rest[:, None] * d + b_idx[None, :]).reshape(-1))
        blocks_v.append(np.broadcast_to(A[a_idx, b_idx][None, :], (cols_in, len(a_idx))).reshape(-1))
    first = sp.csr_matrix((np.concatenate(blocks_v), (np.concatenate(blocks_r), np.concatenate(blocks_c))),
                          shape=(rows_out * d, cols_in * d))
    out = (total + first).tocsr()
    out.data %= m
    out.eliminate_zeros()
    return out


def sep_matrix(x: Cochain, module: CoefficientModule, n: int) -> sp.csr_matrix:
    """Matrix of y -> x*y' from C^n(module) to C^{n+1}(module)."""
    if x.degree != 1 or x.module.dim != 1:
        raise ValueError("x must be a scalar degree-1 cochain")
    size = module.group.order ** n * module.dim
    col = sp.csr_matrix(x.values[:, 0].reshape(-1, 1) % module.modulus)
    return sp.kron(col, sp.identity(size, dtype=np.int64, format="csr"), format="csr")


def pointwise_matrix(block, group: FiniteGroup, n: int) -> sp.csr_matrix:
    """Matrix of a pointwise linear map of values on degree-n cochains."""
    return sp.kron(sp.identity(group.order ** n, dtype=np.int64, format="csr"),
                   sp.csr_matrix(np.asarray(block, dtype=np.int64)), format="csr")


# ---------------------------------------------------------------------------
# linear systems over F_3 in named cochain unknowns

class LinearSystem:
    """Homogeneous (or affine, via ``fixed``) systems sum_v A_{e,v} x_v = 0 over F_p."""

    def __init__(self, p: int = 3) -> None:
        self.p = p
        self.vars: dict[str, int] = {}
        self.eqs: dict[str, int] = {}
        self.blocks: list[tuple[str, str, sp.csr_matrix]] = []

    def var(self, name: str, size: int) -> None:
        self.vars[name] = size

    def add(self, eq: str, var: str, mat) -> None:
        mat = sp.csr_matrix(mat, dtype=np.int64)
        if eq in self.eqs and self.eqs[eq] != mat.shape[0]:
            raise ValueError(f"equation {eq} row count mismatch")
        if mat.shape[1] != self.vars[var]:
            raise ValueError(f"block for {var} has {mat.shape[1]} columns, expected {self.vars[var]}")
        self.eqs.setdefault(eq, mat.shape[0])
        self.blocks.append((eq, var, mat))

    def _offsets(self, table: dict[str, int], names) -> dict[str, int]:
        off, out = 0, {}
        for k in names:
            out[k] = off
            off += table[k]
        return out

    def matrix(self, var_names=None) -> tuple[sp.csr_matrix, dict[str, int]]:
        names = list(self.vars) if var_names is None else list(var_names)
        voff = self._offsets(self.vars, names)
        eoff = self._offsets(self.eqs, self.eqs)
        nrows, ncols = sum(self.eqs.values()), sum(self.vars[k] for k in names)
        rows, cols, data = [], [], []
        for eq, var, mat in self.blocks:
            if var not in voff:
                continue
            c = mat.tocoo()
            rows.append(c.row + eoff[eq])
            cols.append(c.col + voff[var])
            data.append(c.data)
        if rows:
            A = sp.csr_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
                              shape=(nrows, ncols))
        else:
            A = sp.csr_matrix((nrows, ncols), dtype=np.int64)
        A.data %= self.p
        A.eliminate_zeros()
        return A, voff

    def kernel(self, seed: int = 0) -> tuple[np.ndarray, dict[str, int]]:
        A, voff = self.matrix()
        return sparse_kernel(A, self.p, seed).basis, voff

    def random_solution(self, rng: np.random.Generator, fixed: dict[str, np.ndarray] | None = None,
                        seed: int = 0) -> dict[str, np.ndarray] | None:
        """A uniformly random solution (given values for ``fixed`` variables), or None."""
        fixed = fixed or {}
        free = [k for k in self.vars if k not in fixed]
        A, voff = self.matrix(free)
        rhs = np.zeros(A.shape[0], dtype=np.int64)
        if fixed:
            B, boff = self.matrix(list(fixed))
            vec = np.concatenate([np.asarray(fixed[k], dtype=np.int64).reshape(-1) for k in fixed])
            rhs = (-(B @ vec)) % self.p
        K = sparse_kernel(A, self.p, seed).basis
        if rhs.any():
            x0 = sparse_solve(A, rhs, self.p, seed)
            if x0 is None:
                return None
        else:
            x0 = np.zeros(A.shape[1], dtype=np.int64)
        x = (x0 + K @ rng.integers(0, self.p, size=K.shape[1])) % self.p if K.shape[1] else x0 % self.p
        out = {k: x[voff[k]:voff[k] + self.vars[k]] for k in free}
        out.update({k: np.asarray(v, dtype=np.int64).reshape(-1) % self.p for k, v in fixed.items()})
        return out


def solve_coboundary(target: Cochain, seed: int = 0) -> Cochain | None:
    """Some x with delta(x) = target (mod 3), or None."""
    if target.modulus != 3:
        raise ValueError("coboundary solving is over F_3; reduce or divide by 3 first")
    if target.degree == 0:
        return None if target.values.any() else target
    D = delta_matrix(target.module, target.degree - 1)
    x = sparse_solve(D, target.flat(), 3, seed)
    return None if x is None else Cochain.from_flat(target.module, target.degree - 1, x)


def is_coboundary(target: Cochain, seed: int = 0) -> bool:
    if target.is_zero():
        return True
    return solve_coboundary(target, seed) is not None


def in_three_delta(target: Cochain, seed: int = 0) -> bool:
    """Is a mod-9 cochain of the form 3*delta(x)?  (Only x mod 3 matters.)"""
    if target.modulus != 9:
        raise ValueError("expected a mod-9 cochain")
    if (target.values % 3).any():
        return False
    return is_coboundary(target.div3(), seed)


# ---------------------------------------------------------------------------
# pointwise generalized inverses over F_3

class PointwiseSolver:
    """For a fixed matrix A over F_p: S with A S A = A, used to solve A w = r
    at every argument of a cochain at once (and to certify r in im A)."""

    def __init__(self, A: np.ndarray, p: int = 3) -> None:
        A = np.asarray(A, dtype=np.int64) % p
        self.A, self.p = A, p
        _, cols = rref_mod_p(A, p, engine="numpy")
        _, rows = rref_mod_p(A.T, p, engine="numpy")
        sub = A[np.ix_(rows, cols)]
        inv = _inverse_mod_p(sub, p)
        S = np.zeros((A.shape[1], A.shape[0]), dtype=np.int64)
        S[np.ix_(cols, rows)] = inv
        self.S = S
        self.rank = len(cols)

    def solve(self, R: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Row-wise: returns (W, ok) with W @ A.T == R on rows where ok."""
        W = (R @ self.S.T) % self.p
        ok = ((W @ self.A.T - R) % self.p == 0).all(axis=1)
        return W, ok


def _inverse_mod_p(a: np.ndarray, p: int) -> np.ndarray:
    n = a.shape[0]
    R, piv = rref_mod_p(np.hstack([a % p, np.eye(n, dtype=np.int64)]), p, engine="numpy")
    if piv[:n] != list(range(n)):
        raise ArithmeticError("matrix is singular mod p")
    return R[:, n:]


# ---------------------------------------------------------------------------
# the group ring Z/m[(Z/3)^2] in the t-monomial basis

_E = special_elements(P, 0)


def _ring(name: str) -> np.ndarray:
    e = _E
    table = {"t1": e.tm(1), "t2": e.tm(2), "t3": e.tm(3), "T1": e.trace(1), "T2": e.trace(2),
             "T3": e.trace(3), "T4": e.trace(4), "TG": e.trace_all, "one": e.one()}
    return table[name].coeffs.copy()


def t_monomial(l: int, m: int, swap: bool = False) -> np.ndarray:
    """Integer coefficients of t1^l t2^m (t1^m t2^l when ``swap``)."""
    if swap:
        l, m = m, l
    return ((_E.tm(1) ** l) * (_E.tm(2) ** m)).coeffs.copy() if (l or m) else _E.one().coeffs.copy()


@lru_cache(maxsize=2)
def t_basis(swap: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """(B, B^-1): column 3l+m of B is t1^l t2^m; B is unimodular over Z."""
    B = np.stack([t_monomial(l, m, swap) for l in range(3) for m in range(3)], axis=1)
    inv = np.rint(np.linalg.inv(B)).astype(np.int64)
    if not (B @ inv == np.eye(9, dtype=np.int64)).all():
        raise ArithmeticError("t-monomial basis is not unimodular")
    B.setflags(write=False)
    inv.setflags(write=False)
    return B, inv


MONOMIALS = [(l, m) for l in range(3) for m in range(3)]


def pack_ring(parts: dict, module: CoefficientModule, swap: bool = False) -> Cochain:
    """sum u_lm t1^l t2^m for scalar cochains u_lm (missing keys are zero)."""
    B, _ = t_basis(swap)
    deg = next(iter(parts.values())).degree
    rows = module.group.order ** deg
    coef = np.zeros((rows, 9), dtype=np.int64)
    for (l, m), f in parts.items():
        coef[:, 3 * l + m] = f.values[:, 0]
    return Cochain(module, deg, coef @ B.T)


def unpack_ring(f: Cochain, swap: bool = False) -> dict:
    _, inv = t_basis(swap)
    coef = f.values @ inv.T
    triv = trivial_module(f.group, f.modulus)
    return {(l, m): Cochain(triv, f.degree, coef[:, 3 * l + m:3 * l + m + 1]) for l, m in MONOMIALS}


def ring_constant(name: str, coeff: Cochain, module: CoefficientModule) -> Cochain:
    """coeff * r for a named ring element r and a scalar cochain coeff."""
    return Cochain(module, coeff.degree, coeff.values[:, :1] * _ring(name)[None, :])


# ---------------------------------------------------------------------------
# characters of the pair (chi1, chi2) as cochains

@dataclass(frozen=True)
class PairData:
    """Scalar degree-1 cochains attached to (i, j) = (chi1, chi2)."""

    chi1: Character
    chi2: Character

    @property
    def group(self) -> FiniteGroup:
        return self.chi1.group

    def c(self, theta: Character) -> Cochain:
        return char(theta)

    def lam(self, theta: Character) -> Cochain:
        return binom2(theta)

    @cached_property
    def i(self) -> Cochain:
        return char(self.chi1)

    @cached_property
    def j(self) -> Cochain:
        return char(self.chi2)

    @cached_property
    def psi(self) -> Character:
        return -(self.chi1 + self.chi2)

    def swapped(self) -> "PairData":
        return PairData(self.chi2, self.chi1)


def _sep(*factors: Cochain) -> Cochain:
    """x1 * (x2 * (... * y)')' with scalar degree-1 x's."""
    out = factors[-1]
    for x in reversed(factors[:-1]):
        out = sep_product(x, out)
    return out


def _ptw(*xs: Cochain) -> Cochain:
    out = xs[0]
    for x in xs[1:]:
        out = pointwise(out, x)
    return out


def _carry_term(theta: Character, u00: Cochain) -> Cochain:
    """s_theta * u00'; when u00 vanishes no lift of theta is needed."""
    if u00.is_zero():
        return Cochain.zero(u00.module, u00.degree + 1)
    return sep_product(carry(theta), u00)


# ---------------------------------------------------------------------------
# the u-system

U_FREE = [(0, 0), (1, 0), (0, 1), (2, 0), (0, 2), (1, 1), (2, 1)]


@dataclass
class USystem:
    """Solutions of the first seven coefficient equations for u (or, with
    ``side='v'``, for v with the roles of the characters exchanged), plus the
    auxiliary pair (y, aux) with delta(y) = psi*chi' - i*aux', aux a cocycle.

    ``pair`` always holds the characters in the order used by the equations:
    (chi1, chi2) for u and (chi2, chi1) for v.
    """

    pair: PairData
    side: str
    u: dict
    chi: Cochain
    y: Cochain
    aux: Cochain
    seed: int | None = None
    satisfied: dict = field(default_factory=dict)

    @property
    def group(self) -> FiniteGroup:
        return self.pair.group

    @property
    def degree(self) -> int:
        return self.chi.degree

    def __getitem__(self, lm: tuple[int, int]) -> Cochain:
        return self.u[lm]

    def packed(self, module: CoefficientModule) -> Cochain:
        return pack_ring(self.u, module, swap=self.side == "v")

    def equations(self) -> dict[str, Cochain]:
        """Residuals (lhs - rhs) of the seven equations and the auxiliary ones."""
        return u_equation_residuals(self.pair, self.u, self.chi, self.y, self.aux)

    def validate(self) -> dict[str, bool]:
        self.satisfied = {k: r.is_zero() for k, r in self.equations().items()}
        return self.satisfied

    def A_literal(self) -> tuple[Cochain, Cochain]:
        """A0, A1 read off from the last two coefficient equations as displayed."""
        return _a_coefficients(self.pair, self.u, self.chi)


def _zero_scalar(group: FiniteGroup, degree: int, modulus: int = 3) -> Cochain:
    return Cochain.zero(trivial_module(group, modulus), degree)


def u_equation_residuals(pair: PairData, u: dict, chi: Cochain, y: Cochain | None = None,
                         aux: Cochain | None = None) -> dict[str, Cochain]:
    i, j = pair.i, pair.j
    li, lj = binom2(pair.chi1), binom2(pair.chi2)
    psi = char(pair.psi)
    lpsi = binom2(pair.psi)
    ij = _ptw(i, j)
    d = delta
    z = lambda lm: u.get(lm, _zero_scalar(pair.group, chi.degree))  # noqa: E731
    u00, u10, u01, u20, u02, u11, u21 = (z(k) for k in U_FREE)
    out = {
        "u00": d(u00),
        "u10": d(u10) + _sep(i, u00),
        "u01": d(u01) + _sep(j, u00),
        "u20": d(u20) + _sep(i, u10) + _sep(li, u00) - _sep(psi, chi),
        "u02": d(u02) + _sep(j, u01) + _sep(lj, u00),
        "u11": d(u11) + _sep(j, u10) + _sep(i, u01) + _sep(ij, u00) - _sep(psi, chi),
        "u21": (d(u21) + _sep(j, u20) + _sep(i, u11) + _sep(ij, u10) + _sep(li, u01)
                + _sep(_ptw(li, j), u00) - _sep(psi - lpsi, chi)),
        "chi": d(chi),
    }
    if y is not None and aux is not None:
        out["aux"] = d(aux)
        out["y"] = d(y) - _sep(psi, chi) + _sep(i, aux)
    return out


def _a_coefficients(pair: PairData, u: dict, chi: Cochain) -> tuple[Cochain, Cochain]:
    i, j = pair.i, pair.j
    li, lj = binom2(pair.chi1), binom2(pair.chi2)
    lpsi = binom2(pair.psi)
    ij = _ptw(i, j)
    z = lambda lm: u.get(lm, _zero_scalar(pair.group, chi.degree))  # noqa: E731
    A0 = (delta(z((1, 2))) + _sep(i, z((0, 2))) + _sep(j, z((1, 1))) + _sep(ij, z((0, 1)))
          + _sep(lj, z((1, 0))) + _sep(_ptw(i, lj), z((0, 0))) - _sep(lpsi, chi))
    A1 = (delta(z((2, 2))) + _sep(li, z((0, 2))) + _sep(lj, z((2, 0))) + _sep(ij, z((1, 1)))
          + _sep(i, z((1, 2))) + _sep(j, z((2, 1))) + _sep(_ptw(li, j), z((0, 1)))
          + _sep(_ptw(i, lj), z((1, 0))) + _sep(_ptw(li, lj), z((0, 0))) - _sep(lpsi, chi))
    return A0, A1


def _lift_available(theta: Character) -> bool:
    return theta.lift is not None


def carries_available(pair: PairData) -> bool:
    """Do i, j, i+j and i-j all have Z/9 lifts (so every carry term exists)?"""
    a, b = pair.chi1, pair.chi2
    return all(_lift_available(t) for t in (a, b, a + b, a - b))


def u_system_matrix(pair: PairData, degree: int, force_u00_zero: bool = False) -> LinearSystem:
    """The linear system in (u_lm for the seven free monomials, chi, y, aux)."""
    g = pair.group
    triv = trivial_module(g, 3)
    N = g.order ** degree
    D = delta_matrix(triv, degree)
    S = lambda x: sep_matrix(x, triv, degree)  # noqa: E731
    i, j = pair.i, pair.j
    li, lj = binom2(pair.chi1), binom2(pair.chi2)
    psi, lpsi = char(pair.psi), binom2(pair.psi)
    ij = _ptw(i, j)
    sysm = LinearSystem(3)
    names = {lm: f"u{lm[0]}{lm[1]}" for lm in U_FREE}
    for lm in U_FREE:
        sysm.var(names[lm], N)
    for v in ("chi", "y", "aux"):
        sysm.var(v, N)
    rows = {
        "u00": [("u00", D)],
        "u10": [("u10", D), ("u00", S(i))],
        "u01": [("u01", D), ("u00", S(j))],
        "u20": [("u20", D), ("u10", S(i)), ("u00", S(li)), ("chi", -S(psi))],
        "u02": [("u02", D), ("u01", S(j)), ("u00", S(lj))],
        "u11": [("u11", D), ("u10", S(j)), ("u01", S(i)), ("u00", S(ij)), ("chi", -S(psi))],
        "u21": [("u21", D), ("u20", S(j)), ("u11", S(i)), ("u10", S(ij)), ("u01", S(li)),
                ("u00", S(_ptw(li, j))), ("chi", -S(psi - lpsi))],
        "chi": [("chi", D)],
        "aux": [("aux", D)],
        "y": [("y", D), ("chi", -S(psi)), ("aux", S(i))],
    }
    for eq, blocks in rows.items():
        for var, mat in blocks:
            sysm.add(eq, var, mat)
    if force_u00_zero:
        sysm.add("u00=0", "u00", sp.identity(N, dtype=np.int64, format="csr"))
    return sysm


def random_u_system(pair: PairData, degree: int, rng: np.random.Generator, side: str = "u",
                    chi: Cochain | None = None, force_u00_zero: bool | None = None,
                    seed: int = 0) -> USystem:
    """A uniformly random solution of the u-system (optionally with chi fixed).

    Without lifts for all of i, j, i+j, i-j the carry terms s*u00' do not
    exist; then u00 = 0 is imposed so every D_k is defined.
    u12 and u22 are drawn uniformly; they do not enter the seven equations.
    """
    if force_u00_zero is None:
        force_u00_zero = not carries_available(pair)
    sysm = u_system_matrix(pair, degree, force_u00_zero)
    fixed = None if chi is None else {"chi": chi.values[:, 0]}
    sol = sysm.random_solution(rng, fixed, seed)
    if sol is None:
        raise ValueError("no solution of the u-system with the given chi")
    triv = trivial_module(pair.group, 3)
    mk = lambda v: Cochain.from_flat(triv, degree, v)  # noqa: E731
    u = {lm: mk(sol[f"u{lm[0]}{lm[1]}"]) for lm in U_FREE}
    for lm in ((1, 2), (2, 2)):
        u[lm] = Cochain.random(triv, degree, rng)
    out = USystem(pair, side, u, mk(sol["chi"]), mk(sol["y"]), mk(sol["aux"]), seed)
    out.validate()
    return out


def zero_u_system(pair: PairData, degree: int, side: str = "u") -> USystem:
    z = _zero_scalar(pair.group, degree)
    return USystem(pair, side, {lm: z for lm in MONOMIALS}, z, z, z)


# ---------------------------------------------------------------------------
# the four cocycles D_1..D_4

class BulletError(ValueError):
    pass


def _bullets(sys: USystem) -> dict[str, tuple[Cochain, Cochain]]:
    """bullet name -> (lhs, rhs); each pair must agree."""
    pr = sys.pair
    a, b = pr.chi1, pr.chi2
    i, j = char(a), char(b)
    s, lam = lambda t: char(t), lambda t: binom2(t)  # noqa: E731
    u = sys.u
    chi, y, x3 = sys.chi, sys.y, sys.aux
    u00, u10, u01, u20, u02, u11 = (u[k] for k in [(0, 0), (1, 0), (0, 1), (2, 0), (0, 2), (1, 1)])
    mu1 = u10 - u01
    return {
        "1": (delta(u20 - y), -(_sep(i, u10 - x3) + _sep(lam(a), u00))),
        "2": (delta(u10 - x3), -_sep(i, u00)),
        "3": (delta(u01), -_sep(j, u00)),
        "4": (delta(u02), -(_sep(j, u01) + _sep(lam(b), u00))),
        "5": (delta(u20 + u02 + u11), -(_sep(s(a + b), u10 + u01 - chi) + _sep(lam(a + b), u00))),
        "6": (delta(u10 + u01 - chi), -_sep(s(a + b), u00)),
        "7": (delta(u01 + u20 + u02 - u11), -(_sep(s(a - b), mu1) + _sep(lam(a - b), u00))),
        "8": (delta(mu1), -_sep(s(a - b), u00)),
    }


BULLETS_FOR = {1: ("1", "2"), 2: ("3", "4"), 3: ("5", "6"), 4: ("7", "8")}


def check_bullets(sys: USystem) -> dict[str, bool]:
    return {k: lhs == rhs for k, (lhs, rhs) in _bullets(sys).items()}


def build_D(k: int, sys: USystem, validate: bool = True) -> Cochain:
    """The cocycle D_k built from the u-system (k = 1..4)."""
    if k not in BULLETS_FOR:
        raise ValueError("k must be 1, 2, 3 or 4")
    if validate:
        ok = check_bullets(sys)
        for b in BULLETS_FOR[k]:
            if not ok[b]:
                raise BulletError(f"bullet {b} fails for D_{k}")
    a, b = sys.pair.chi1, sys.pair.chi2
    u = sys.u
    u00, u10, u01, u20, u02, u11 = (u[key] for key in [(0, 0), (1, 0), (0, 1), (2, 0), (0, 2), (1, 1)])
    if k == 1:
        theta, top, mid = a, u20 - sys.y, u10 - sys.aux
    elif k == 2:
        theta, top, mid = b, u02, u01
    elif k == 3:
        theta, top, mid = a + b, u20 + u02 + u11, u10 + u01 - sys.chi
    else:
        theta, top, mid = a - b, u01 + u20 + u02 - u11, u10 - u01
    return _sep(char(theta), top) + _sep(binom2(theta), mid) + _carry_term(theta, u00)


def d4_as_displayed(sys: USystem) -> Cochain:
    """D_4 with the extra -chi inside the binomial term, as sometimes written."""
    a, b = sys.pair.chi1, sys.pair.chi2
    u = sys.u
    theta = a - b
    return (_sep(char(theta), u[(0, 1)] + u[(2, 0)] + u[(0, 2)] - u[(1, 1)])
            + _sep(binom2(theta), u[(1, 0)] - u[(0, 1)] - sys.chi) + _carry_term(theta, u[(0, 0)]))


def d_combination_closed_form(sys: USystem) -> Cochain:
    """Closed form of D_1 + D_2 - D_3 (needs additive lifts when u00 != 0)."""
    a, b = sys.pair.chi1, sys.pair.chi2
    i, j = char(a), char(b)
    li, lj = binom2(a), binom2(b)
    ij = _ptw(i, j)
    u = sys.u
    return (-(_sep(j, u[(2, 0)]) + _sep(i, u[(0, 2)]) + _sep(i + j, u[(1, 1)]))
            - _sep(lj + ij, u[(1, 0)]) - _sep(li + ij, u[(0, 1)])
            - _sep(_ptw(i, lj) + _ptw(li, j), u[(0, 0)])
            - (_sep(i, sys.y) + _sep(li, sys.aux)) + _sep(binom2(a + b), sys.chi))


def a0_identity_rhs(sys: USystem, A0: Cochain) -> Cochain:
    """A0 + (i y' + lambda_i aux') - lambda_psi chi'."""
    a = sys.pair.chi1
    return A0 + _sep(char(a), sys.y) + _sep(binom2(a), sys.aux) - _sep(binom2(sys.pair.psi), sys.chi)


def a0_identity_lhs(sys: USystem) -> Cochain:
    """delta(u12 + u21) - (D_1 + D_2 - D_3)."""
    u = sys.u
    comb = build_D(1, sys, False) + build_D(2, sys, False) - build_D(3, sys, False)
    return delta(u[(1, 2)] + u[(2, 1)]) - comb


# ---------------------------------------------------------------------------
# M4 cocycles represented in M3, normalization and the connecting map eta

@lru_cache(maxsize=1)
def _prism_maps() -> dict[str, np.ndarray]:
    ctx = _prism_context()
    return {"d1": ctx.d1, "d2": ctx.d2, "h1": ctx.h1, "d3": ctx.d3, "h3": ctx.h3, "lift": ctx.m4_lift}


def m3_embedding() -> np.ndarray:
    """(u, v, chi) -> (u, v, 0, -chi*T4) on coordinates (24 x 19)."""
    emb = np.zeros((24, 19), dtype=np.int64)
    emb[:18, :18] = np.eye(18, dtype=np.int64)
    emb[21, 18] = -1
    return emb


def assemble_c(u: Cochain, v: Cochain, chi: Cochain, m3: CoefficientModule) -> Cochain:
    vals = np.hstack([u.values, v.values, chi.values[:, :1]])
    return Cochain(m3, u.degree, vals @ m3_embedding().T)


def split_c(c: Cochain) -> tuple[Cochain, Cochain, Cochain, Cochain]:
    """Slots of an M3 cochain: (u, v, slot-3 coset coordinates, slot-4 coset coordinates)."""
    g = c.group
    ring = CoefficientModule("Z[G]", g, np.broadcast_to(np.eye(9, dtype=np.int64), (g.order, 9, 9)).copy(),
                             c.modulus, validate=False)
    three = CoefficientModule("coset", g, np.broadcast_to(np.eye(3, dtype=np.int64), (g.order, 3, 3)).copy(),
                              c.modulus, validate=False)
    v = c.values
    return (Cochain(ring, c.degree, v[:, :9]), Cochain(ring, c.degree, v[:, 9:18]),
            Cochain(three, c.degree, v[:, 18:21]), Cochain(three, c.degree, v[:, 21:24]))


@dataclass
class PrismModules:
    group: FiniteGroup
    chi1: Character
    chi2: Character

    @cached_property
    def ring(self) -> CoefficientModule:
        return group_ring_module(self.group, self.chi1, self.chi2, 3)

    @cached_property
    def m2(self) -> CoefficientModule:
        return prism_module(self.group, self.chi1, self.chi2, 2, 3)

    @cached_property
    def m3(self) -> CoefficientModule:
        return prism_module(self.group, self.chi1, self.chi2, 3, 3)

    @cached_property
    def m4(self) -> CoefficientModule:
        return prism_module(self.group, self.chi1, self.chi2, 4, 3)

    @cached_property
    def triv(self) -> CoefficientModule:
        return trivial_module(self.group, 3)

    @cached_property
    def pair(self) -> PairData:
        return PairData(self.chi1, self.chi2)


def to_m4(c: Cochain, mods: PrismModules) -> Cochain:
    return c.apply(_prism_maps()["d3"], mods.m4)


def is_m4_cocycle(c: Cochain, mods: PrismModules) -> bool:
    return to_m4(delta(c), mods).is_zero()


def pi4_values(c: Cochain) -> Cochain:
    """The T_G-multiple of pi4 applied pointwise to an M3 cochain."""
    from .m4_structure import pi4_row
    return Cochain(trivial_module(c.group, c.modulus), c.degree, c.values @ pi4_row(P).reshape(-1, 1))


@dataclass
class Normalized:
    u: Cochain
    v: Cochain
    chi: Cochain
    c: Cochain
    shift: Cochain          # c_input - c = d2(shift)


def normalize_c(c: Cochain, mods: PrismModules) -> Normalized:
    """Move an M3 representative of an M4 cocycle to the form (u, v, 0, -chi*T4)."""
    maps = _prism_maps()
    if c.module.dim != 24 or c.modulus != 3:
        raise ValueError("expected a mod-3 cochain with values in M3")
    if not is_m4_cocycle(c, mods):
        raise ValueError("input does not represent an M4 cocycle")
    # slot 3: subtract d2(w3, 0) with w3 T3 = slot 3
    _, rows3 = ideal_embedding(P, 3)
    w3 = np.zeros((c.values.shape[0], 10), dtype=np.int64)
    for k in range(3):
        w3[:, 3 * k] = c.values[:, 18 + k]          # x1^k
    c2 = c - Cochain(mods.m3, c.degree, w3 @ maps["d2"].T)
    if c2.values[:, 18:21].any():
        raise ArithmeticError("slot 3 did not clear")
    # slot 4: x1^k T4 = (x1 x2)^(2k) T4; subtract d2(sum b_k((x1x2)^(2k) - 1), 0)
    xi = np.zeros((c.values.shape[0], 10), dtype=np.int64)
    for k in range(1, 3):
        b = c2.values[:, 21 + k]
        e = (2 * k) % 3
        xi[:, 3 * e + e] += b
        xi[:, 0] -= b
    c3 = c2 - Cochain(mods.m3, c.degree, xi @ maps["d2"].T)
    if c3.values[:, 18:21].any() or c3.values[:, 22:24].any():
        raise ArithmeticError("normalization did not reach the required form")
    chi = Cochain(mods.triv, c.degree, -c3.values[:, 21:22])
    if not delta(chi).is_zero():
        raise ArithmeticError("normalized slot-4 scalar is not a cocycle")
    shift = Cochain(mods.m2, c.degree, w3 + xi)
    u = Cochain(mods.ring, c.degree, c3.values[:, :9])
    v = Cochain(mods.ring, c.degree, c3.values[:, 9:18])
    return Normalized(u, v, chi, c3, shift)


@dataclass
class EtaResult:
    A0: Cochain
    A1: Cochain
    B0: Cochain
    B1: Cochain
    eta: Cochain
    omega1: Cochain
    omega2: Cochain
    residual: Cochain

    def to_json(self) -> dict:
        return {"eta": self.eta.values[:, 0].tolist(),
                "A0": self.A0.values[:, 0].tolist(), "B0": self.B0.values[:, 0].tolist()}


def omega1(chi: Cochain, mods: PrismModules) -> Cochain:
    """(-(psi t3 + lambda_psi T3) chi', 0) in M2."""
    psi = mods.pair.psi
    a = sep_product(char(psi), chi).values[:, 0]
    b = sep_product(binom2(psi), chi).values[:, 0]
    xi = -(a[:, None] * _ring("t3")[None, :] + b[:, None] * _E.trace(3).coeffs[None, :])
    vals = np.hstack([xi, np.zeros((xi.shape[0], 1), dtype=np.int64)])
    return Cochain(mods.m2, chi.degree + 1, vals)


def _decompose_slot(vals: np.ndarray, first: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """vals = -a*first - b*TG row-wise; returns (a, b) or raises."""
    A = -np.stack([first, _ring("TG")], axis=1) % 3
    W, ok = PointwiseSolver(A).solve(vals % 3)
    if not ok.all():
        raise ArithmeticError("residual slot is not in the expected two-dimensional span")
    return W[:, 0], W[:, 1]


def eta_pipeline(u: Cochain, v: Cochain, chi: Cochain, mods: PrismModules) -> EtaResult:
    """eta of the class of (u, v, 0, -chi*T4) through the omega1/omega2 split."""
    maps = _prism_maps()
    c = assemble_c(u, v, chi, mods.m3)
    dc = delta(c)
    w1 = omega1(chi, mods)
    R = dc - w1.apply(maps["d2"], mods.m3)
    if R.values[:, 18:].any():
        raise ValueError("delta(c) - d2(omega1) has nonzero ideal slots: not an M4 cocycle representative")
    t1T2 = (_E.tm(1) * _E.trace(2)).coeffs
    T1t2 = (_E.trace(1) * _E.tm(2)).coeffs
    try:
        a0, a1 = _decompose_slot(R.values[:, :9], t1T2)
        b0, b1 = _decompose_slot(R.values[:, 9:18], T1t2)
    except ArithmeticError as exc:
        raise ValueError(f"omega2 unsolvable: {exc}") from None
    deg = dc.degree
    sc = lambda x: Cochain(mods.triv, deg, x.reshape(-1, 1))  # noqa: E731
    A0, A1, B0, B1 = sc(a0), sc(a1), sc(b0), sc(b1)
    T1, T2 = _E.trace(1), _E.trace(2)
    xi = (a0[:, None] * T2.coeffs + a1[:, None] * (_E.tm(1) * T2).coeffs
          + b0[:, None] * T1.coeffs + b1[:, None] * (_E.tm(2) * T1).coeffs)
    w2 = Cochain(mods.m2, deg, np.hstack([xi, -(a0 + b0).reshape(-1, 1)]))
    if not (w2.apply(maps["d2"], mods.m3) == R):
        raise ArithmeticError("omega2 does not reproduce the residual")
    eta = A0 + B0
    via_h1 = (w1 + w2).apply(maps["h1"], mods.triv)
    if not (via_h1 == eta):
        raise ArithmeticError("h1(omega) differs from A0 + B0")
    return EtaResult(A0, A1, B0, B1, eta, w1, w2, R)


def eta_direct(c: Cochain, mods: PrismModules) -> Cochain:
    """eta by solving d2(omega) = delta(c) pointwise and applying h1."""
    maps = _prism_maps()
    dc = delta(c)
    W, ok = PointwiseSolver(maps["d2"]).solve(dc.values)
    if not ok.all():
        raise ValueError("delta(c) is not pointwise in the image of d2: not an M4 cocycle representative")
    return Cochain(mods.m2, dc.degree, W).apply(maps["h1"], mods.triv)


def m4_cocycle_space(mods: PrismModules, degree: int, seed: int = 0) -> np.ndarray:
    """Kernel basis (columns) of (u, v, chi) -> d3(delta(u, v, 0, -chi T4))."""
    maps = _prism_maps()
    g = mods.group
    N = g.order ** degree
    emb = pointwise_matrix(m3_embedding(), g, degree)
    D = delta_matrix(mods.m3, degree)
    proj = pointwise_matrix(maps["d3"], g, degree + 1)
    A = (proj @ D @ emb).tocsr()
    A.data %= 3
    A.eliminate_zeros()
    # reorder: the embedding acts on rows of 19 = (u 9, v 9, chi 1) per tuple
    del N
    return sparse_kernel(A, 3, seed).basis


def random_m4_cocycle(mods: PrismModules, degree: int, rng: np.random.Generator,
                      basis: np.ndarray | None = None) -> tuple[Cochain, Cochain, Cochain]:
    """A uniformly random normal-form M4 cocycle (u, v, chi)."""
    K = m4_cocycle_space(mods, degree) if basis is None else basis
    x = (K @ rng.integers(0, 3, size=K.shape[1])) % 3
    vals = x.reshape(-1, 19)
    return (Cochain(mods.ring, degree, vals[:, :9]), Cochain(mods.ring, degree, vals[:, 9:18]),
            Cochain(mods.triv, degree, vals[:, 18:19]))


def dec_form_input(chi3: Cochain, chi4: Cochain, mods: PrismModules) -> tuple[Cochain, Cochain, Cochain]:
    """u = chi3 t2^2, v = chi4 t1^2, chi = 0."""
    u = pack_ring({(0, 2): chi3}, mods.ring)
    v = pack_ring({(2, 0): chi4}, mods.ring)
    return u, v, Cochain.zero(mods.triv, chi3.degree)


# ---------------------------------------------------------------------------
# the w-system, z and alpha

W_NAMES = ("w20", "w11", "w02", "w21", "w12")
# monomial t1^l t2^m carrying each w
W_MONOMIALS = {"w20": (2, 0), "w11": (1, 1), "w02": (0, 2), "w21": (2, 1), "w12": (1, 2)}


class RelationError(ValueError):
    """A defining relation of a builder's input fails; ``relation`` names it."""

    def __init__(self, relation: str) -> None:
        super().__init__(f"relation {relation} does not hold")
        self.relation = relation


def w_relations(pair: PairData, w: dict) -> dict[str, Cochain]:
    i, j = pair.i, pair.j
    return {
        "d(w20)=0": delta(w["w20"]),
        "d(w11)=0": delta(w["w11"]),
        "d(w02)=0": delta(w["w02"]),
        "d(w12)=-i*w02'-j*w11'": delta(w["w12"]) + _sep(i, w["w02"]) + _sep(j, w["w11"]),
        "d(w21)=-i*w11'-j*w20'": delta(w["w21"]) + _sep(i, w["w11"]) + _sep(j, w["w20"]),
    }


def _raise_failed(rels: dict[str, Cochain]) -> None:
    for name, r in rels.items():
        if not r.is_zero():
            raise RelationError(name)


def z_builder(w: dict, pair: PairData, validate: bool = True) -> Cochain:
    """z = i*w12' + l_i*w02' + j*w21' + l_j*w20' + ij*w11'."""
    if validate:
        _raise_failed(w_relations(pair, w))
    i, j = pair.i, pair.j
    li, lj = binom2(pair.chi1), binom2(pair.chi2)
    return (_sep(i, w["w12"]) + _sep(li, w["w02"]) + _sep(j, w["w21"]) + _sep(lj, w["w20"])
            + _sep(_ptw(i, j), w["w11"]))


def pack_w(w: dict, module: CoefficientModule) -> Cochain:
    return pack_ring({W_MONOMIALS[k]: w[k] for k in W_NAMES}, module)


def packed_w_check(w: dict, pair: PairData, module: CoefficientModule) -> tuple[bool, bool]:
    """(relations hold, delta(packed u) is a pointwise multiple of T_G); these should agree.
    When both hold, the multiple is z."""
    rels = all(r.is_zero() for r in w_relations(pair, w).values())
    du = delta(pack_w(w, module))
    parts = unpack_ring(du)
    multiple = all(parts[lm].is_zero() for lm in MONOMIALS if lm != (2, 2))
    if rels and multiple:
        z = z_builder(w, pair, validate=False)
        if not (du == ring_constant("TG", z, module)):
            return rels, False
    return rels, multiple


def w_system_matrix(pair: PairData, degree: int) -> LinearSystem:
    g = pair.group
    triv = trivial_module(g, 3)
    N = g.order ** degree
    D = delta_matrix(triv, degree)
    S = lambda x: sep_matrix(x, triv, degree)  # noqa: E731
    sysm = LinearSystem(3)
    for v in W_NAMES:
        sysm.var(v, N)
    i, j = pair.i, pair.j
    rows = {
        "w20": [("w20", D)], "w11": [("w11", D)], "w02": [("w02", D)],
        "w12": [("w12", D), ("w02", S(i)), ("w11", S(j))],
        "w21": [("w21", D), ("w11", S(i)), ("w20", S(j))],
    }
    for eq, blocks in rows.items():
        for var, mat in blocks:
            sysm.add(eq, var, mat)
    return sysm


def _scalars_from(sol: dict, names, group: FiniteGroup, degree: int) -> dict:
    triv = trivial_module(group, 3)
    return {k: Cochain.from_flat(triv, degree, sol[k]) for k in names}


def random_w_system(pair: PairData, degree: int, rng: np.random.Generator, seed: int = 0) -> dict:
    sol = w_system_matrix(pair, degree).random_solution(rng, seed=seed)
    return _scalars_from(sol, W_NAMES, pair.group, degree)


ALPHA_NAMES = ("chi", "w20", "w02", "w21", "w12")


def alpha_relations(pair: PairData, x: dict) -> dict[str, Cochain]:
    i, j = pair.i, pair.j
    return {
        "d(chi)=0": delta(x["chi"]),
        "d(w20)=0": delta(x["w20"]),
        "d(w02)=0": delta(x["w02"]),
        "d(w21)=-i*chi'-j*w20'": delta(x["w21"]) + _sep(i, x["chi"]) + _sep(j, x["w20"]),
        "d(w12)=-j*chi'-i*w02'": delta(x["w12"]) + _sep(j, x["chi"]) + _sep(i, x["w02"]),
    }


def alpha_builder(x: dict, pair: PairData, validate: bool = True) -> tuple[Cochain, Cochain]:
    """Both closed forms of alpha; they agree pointwise."""
    if validate:
        _raise_failed(alpha_relations(pair, x))
    i, j = pair.i, pair.j
    li, lj, lpsi = binom2(pair.chi1), binom2(pair.chi2), binom2(pair.psi)
    chi = x["chi"]
    first = (_sep(i, x["w12"]) + _sep(j, x["w21"]) + _sep(li, x["w02"]) + _sep(lj, x["w20"])
             + _sep(_ptw(i, j), chi))
    second = (_sep(i, x["w12"] - chi) + _sep(j, x["w21"] - chi) + _sep(li, x["w02"] - chi)
              + _sep(lj, x["w20"] - chi) + _sep(lpsi, chi))
    return first, second


def alpha_system_matrix(pair: PairData, degree: int) -> LinearSystem:
    g = pair.group
    triv = trivial_module(g, 3)
    N = g.order ** degree
    D = delta_matrix(triv, degree)
    S = lambda x: sep_matrix(x, triv, degree)  # noqa: E731
    sysm = LinearSystem(3)
    for v in ALPHA_NAMES:
        sysm.var(v, N)
    i, j = pair.i, pair.j
    rows = {
        "chi": [("chi", D)], "w20": [("w20", D)], "w02": [("w02", D)],
        "w21": [("w21", D), ("chi", S(i)), ("w20", S(j))],
        "w12": [("w12", D), ("chi", S(j)), ("w02", S(i))],
    }
    for eq, blocks in rows.items():
        for var, mat in blocks:
            sysm.add(eq, var, mat)
    return sysm


def random_alpha_system(pair: PairData, degree: int, rng: np.random.Generator, seed: int = 0) -> dict:
    sol = alpha_system_matrix(pair, degree).random_solution(rng, seed=seed)
    return _scalars_from(sol, ALPHA_NAMES, pair.group, degree)


# ---------------------------------------------------------------------------
# identity suites

def _eq_item(rep: VerificationReport, label: str, anchor: str, lhs: Cochain, rhs: Cochain) -> bool:
    ok = lhs == rhs
    return rep.check(label, anchor, ok, counterexample=None if ok else {"mismatch": lhs.mismatch(rhs)})


def verify_carry_identities(theta: Character) -> VerificationReport:
    """Coboundaries of the carry, hat and binomial functions of a character
    with a Z/9 lift, compared on every pair of group elements."""
    g = theta.group
    require_lift(theta)
    rep = VerificationReport(f"carry identities on {g.name}", meta={"group": g.name, "pairs": g.order ** 2})
    th, lam, s = char(theta), binom2(theta), carry(theta)
    th_hat, lam_hat, s_hat = char_hat(theta), binom2(theta, 9, "hat"), carry_hat(theta)
    th_lift, lam_lift = char_lift(theta), binom2(theta, 9, "lift")
    mixed = _sep(th, lam) + _sep(lam, th)
    anchor = "carry / binomial coboundaries"
    _eq_item(rep, "(i) d(s) = -(theta*l' + l*theta')", anchor, delta(s), -mixed)
    _eq_item(rep, "(ii) d(theta^) = 3(theta*l' + l*theta')", anchor, delta(th_hat), mixed.times3())
    _eq_item(rep, "(iii) d(l) = -theta*theta'", anchor, delta(lam), -_sep(th, th))
    _eq_item(rep, "(iii) d(l~) = -theta~*theta~' mod 9", anchor, delta(lam_lift), -_sep(th_lift, th_lift))
    _eq_item(rep, "(iv) d(theta*s) = -(l*l' + s*theta' + theta*s')", anchor, delta(pointwise(th, s)),
             -(_sep(lam, lam) + _sep(s, th) + _sep(th, s)))
    _eq_item(rep, "(v) d(l^) = -theta^*theta^' + 3(l*l' + theta*l' + l*theta')", anchor, delta(lam_hat),
             -_sep(th_hat, th_hat) + (_sep(lam, lam) + mixed).times3())
    _eq_item(rep, "(vi) d(s^) = -(theta^*l^' + l^*theta^') + 3 l*l'", anchor, delta(s_hat),
             -(_sep(th_hat, lam_hat) + _sep(lam_hat, th_hat)) + _sep(lam, lam).times3())
    # s^ is read in {0,1,2}, so the Z/9 index wraps when k + k' >= 9
    _eq_item(rep, "(vi) with wrap term: d(s^) = -(theta^*l^' + l^*theta^') + 3 l*l' + 3[k+k'>=9]", anchor,
             delta(s_hat), -(_sep(th_hat, lam_hat) + _sep(lam_hat, th_hat))
             + (_sep(lam, lam) + lift_wrap(theta)).times3())
    # (vii): (g - 1).1 = theta^(g) t + l^(g) t^2 in Z/9[<tau>]
    mod = cyclic_module(g, theta, 9)
    e0 = np.array([1, 0, 0])
    got = (mod.matrices @ e0 - e0) % 9
    want = np.stack([np.zeros(g.order, dtype=np.int64), th_hat.values[:, 0], lam_hat.values[:, 0]], axis=1)
    bad = np.nonzero((got != want).any(axis=1))[0]
    rep.check("(vii) (g-1).1 = theta^(g) t + l^(g) t^2", anchor, not bad.size,
              counterexample={"element": bad[:3].tolist()})
    return rep


def lift_wrap(theta: Character, sigma: int | None = None) -> Cochain:
    """[k(g) + k(h) >= 9] with k in 0..8 the lift index of the carry function."""
    lift = require_lift(theta)
    g = theta.group
    if theta.is_zero():
        k = lift % 9
    else:
        sigma = default_sigma(theta) if sigma is None else sigma
        k = (lift * pow(int(lift[sigma]), -1, 9)) % 9
    w = (k[:, None] + k[None, :] >= 9).astype(np.int64)
    return Cochain(trivial_module(g, 3), 2, w.reshape(-1, 1))


def matrix_rep(i: int) -> np.ndarray:
    """The 5x5 unitriangular matrix over F_3 attached to i in Z/9."""
    i %= 9
    b = i % 3
    lam, s = int(lambda2(b, 3)), i // 3
    row = [1, b, lam, s, (b * s) % 3]
    m = np.zeros((5, 5), dtype=np.int64)
    for k in range(5):
        m[k, k:] = row[:5 - k]
    return m % 3


def verify_matrix_rep() -> VerificationReport:
    rep = VerificationReport("matrix representation of Z/9", meta={"pairs": 81})
    anchor = "unitriangular representation"
    reps = [matrix_rep(i) for i in range(9)]
    bad = [(a, b) for a in range(9) for b in range(9)
           if not np.array_equal(reps[(a + b) % 9], (reps[a] @ reps[b]) % 3)]
    rep.check("r(a+b) = r(a) r(b), all 81 pairs", anchor, not bad, counterexample={"pairs": bad[:3]})
    pw = [np.linalg.matrix_power(reps[1], i) % 3 for i in range(10)]
    bad = [i for i in range(9) if not np.array_equal(pw[i], reps[i])]
    rep.check("r(i) = r(1)^i", anchor, not bad, counterexample={"i": bad})
    rep.check("r(1)^9 = identity", anchor, np.array_equal(pw[9], np.eye(5, dtype=np.int64)))
    rep.check("r(0) = identity", anchor, np.array_equal(reps[0], np.eye(5, dtype=np.int64)))
    return rep


def _components(f: Cochain) -> list[Cochain]:
    return [f.component(k) for k in range(f.module.dim)]


def tau_coboundary_components(theta: Character, ut: list[Cochain]) -> list[Cochain]:
    """Coefficients of delta(u~0 + u~1 t + u~2 t^2) in Z/9[<tau>] by the
    closed formula (valid for arbitrary u~)."""
    th, lam = char(theta), binom2(theta)
    th_hat, lam_hat = char_hat(theta), binom2(theta, 9, "hat")
    u1, u2 = ut[1].reduce(3), ut[2].reduce(3)
    c0 = delta(ut[0])
    c1 = delta(ut[1]) + _sep(th_hat, ut[0]) - (_sep(th, u2) + _sep(lam, u1)).times3()
    c2 = (delta(ut[2]) + _sep(th_hat, ut[1]) + _sep(lam_hat, ut[0])
          - (_sep(th + lam, u2) + _sep(lam, u1)).times3())
    return [c0, c1, c2]


def d_tilde(theta: Character, ut: list[Cochain]) -> Cochain:
    th_hat, lam_hat, s_hat = char_hat(theta), binom2(theta, 9, "hat"), carry_hat(theta)
    u2 = ut[2].reduce(3)
    return (_sep(th_hat, ut[2]) + _sep(lam_hat, ut[1]) + _sep(s_hat, ut[0])
            - _sep(binom2(theta), u2).times3())


def _tau_system(theta: Character, degree: int) -> LinearSystem:
    """delta(u0) = 0, delta(u1) = -theta*u0', delta(u2) = -theta*u1' - l*u0' over F_3."""
    triv = trivial_module(theta.group, 3)
    N = theta.group.order ** degree
    D = delta_matrix(triv, degree)
    S = lambda x: sep_matrix(x, triv, degree)  # noqa: E731
    th, lam = char(theta), binom2(theta)
    sysm = LinearSystem(3)
    for v in ("u0", "u1", "u2"):
        sysm.var(v, N)
    for eq, blocks in {"u0": [("u0", D)], "u1": [("u1", D), ("u0", S(th))],
                       "u2": [("u2", D), ("u1", S(th)), ("u0", S(lam))]}.items():
        for var, mat in blocks:
            sysm.add(eq, var, mat)
    return sysm


def _tau_conditions(theta: Character, u: list[Cochain]) -> bool:
    th, lam = char(theta), binom2(theta)
    return (delta(u[0]).is_zero() and (delta(u[1]) + _sep(th, u[0])).is_zero()
            and (delta(u[2]) + _sep(th, u[1]) + _sep(lam, u[0])).is_zero())


def tau_module_checks(theta: Character, degree: int = 1, samples: int = 100, seed: int = 0) -> VerificationReport:
    """Packed cocycles in Z/3[<tau>] and Z/9[<tau>] against their coefficient equations."""
    g = theta.group
    rng = np.random.default_rng(seed)
    rep = VerificationReport(f"tau-module cocycles on {g.name}", seed=seed,
                             meta={"group": g.name, "degree": degree, "samples": samples})
    m3, m9 = cyclic_module(g, theta, 3), cyclic_module(g, theta, 9)
    triv3 = trivial_module(g, 3)
    anchor = "packed cocycles in Z/m[<tau>]"
    D3 = delta_matrix(m3, degree)
    K3 = sparse_kernel(D3, 3, seed).basis
    sysm = _tau_system(theta, degree)

    # mod 3, both directions
    bad = []
    for k in range(samples):
        kind = k % 3
        if kind == 0:
            u = [Cochain.random(triv3, degree, rng) for _ in range(3)]
        elif kind == 1:
            x = (K3 @ rng.integers(0, 3, size=K3.shape[1])) % 3
            u = _components(Cochain.from_flat(m3, degree, x))
        else:
            sol = sysm.random_solution(rng, seed=seed)
            u = [Cochain.from_flat(triv3, degree, sol[v]) for v in ("u0", "u1", "u2")]
        packed = Cochain(m3, degree, np.hstack([c.values for c in u]))
        if delta(packed).is_zero() != _tau_conditions(theta, u):
            bad.append(k)
    rep.check("mod 3: packed cocycle <=> the three coefficient equations", anchor, not bad,
              counterexample={"samples": bad[:3]})

    # mod 9: the coefficient formula is an identity for arbitrary u~
    bad = []
    for k in range(min(samples, 30)):
        f = Cochain.random(m9, degree, rng)
        comps = tau_coboundary_components(theta, _components(f))
        if not (np.hstack([c.values for c in comps]) % 9 == delta(f).values).all():
            bad.append(k)
    rep.check("mod 9: delta of packed u~ has the stated t-coefficients (arbitrary u~)", anchor, not bad,
              counterexample={"samples": bad[:3]})

    # Delta_1 = Delta_2 = 0: feed the coefficients of delta(u~) back into the formula
    bad = []
    for k in range(min(samples, 30)):
        f = Cochain.random(m9, degree, rng)
        twice = tau_coboundary_components(theta, tau_coboundary_components(theta, _components(f)))
        if not all(c.is_zero() for c in twice):
            bad.append(k)
    rep.check("applying the coefficient formula twice gives zero", anchor, not bad,
              counterexample={"samples": bad[:3]})

    # mod 9 kernel samples: the three equations and D~
    K9 = kernel_mod_p2(delta_matrix(m9, degree), 3, seed)
    bad_eq, bad_d, carry_used = [], [], 0
    for k in range(samples):
        x = (K9 @ rng.integers(0, 9, size=K9.shape[1])) % 9
        ut = _components(Cochain.from_flat(m9, degree, x))
        carry_used += not ut[0].reduce(3).is_zero()
        if not all(c.is_zero() for c in tau_coboundary_components(theta, ut)):
            bad_eq.append(k)
        if not delta(d_tilde(theta, ut)).is_zero():
            bad_d.append(k)
    rep.check("mod 9 kernel samples satisfy the three hat-equations", anchor, not bad_eq,
              counterexample={"samples": bad_eq[:3]})
    rep.check("D~ is a mod-9 cocycle on kernel samples", anchor, not bad_d,
              counterexample={"samples": bad_d[:3]}, detail={"samples_with_u0_nonzero_mod_3": carry_used})
    # D for the mod-3 reductions
    bad = []
    for k in range(min(samples, 30)):
        sol = sysm.random_solution(rng, seed=seed)
        u = [Cochain.from_flat(triv3, degree, sol[v]) for v in ("u0", "u1", "u2")]
        D = _sep(char(theta), u[2]) + _sep(binom2(theta), u[1]) + _sep(carry(theta), u[0])
        if not delta(D).is_zero():
            bad.append(k)
    rep.check("D = theta*u2' + l*u1' + s*u0' is a cocycle", anchor, not bad,
              counterexample={"samples": bad[:3]})

    # lift solvability: report only (needs the lifting hypothesis)
    lifted = 0
    trials = min(samples, 20)
    for _ in range(trials):
        x = (K3 @ rng.integers(0, 3, size=K3.shape[1])) % 3
        f = Cochain.from_flat(m3, degree, x)
        if in_three_delta(-delta(f.hat(9)), seed):
            lifted += 1
    rep.note("mod-3 packed cocycles lifting to mod-9 packed cocycles", "lift existence",
             {"lifted": lifted, "tried": trials})
    return rep


# ---------------------------------------------------------------------------
# mod-9 lifts of u and v for the Bockstein

def double_star_residuals(sys: USystem) -> dict[str, Cochain]:
    """The nine rearranged coefficient equations (lhs, all should vanish).
    The last two are consequences of the first seven; evaluating them
    checks that derivation."""
    pr = sys.pair
    i, j = pr.i, pr.j
    li, lj = binom2(pr.chi1), binom2(pr.chi2)
    ipj, imj = pr.chi1 + pr.chi2, pr.chi1 - pr.chi2
    u = sys.u
    chi, y, x3 = sys.chi, sys.y, sys.aux
    sig1 = u[(1, 0)] + u[(0, 1)] - chi
    mu1 = u[(1, 0)] - u[(0, 1)]
    return {
        "1": delta(u[(0, 0)]),
        "2": delta(u[(1, 0)] - x3) + _sep(i, u[(0, 0)]),
        "3": delta(u[(2, 0)] - y) + _sep(i, u[(1, 0)] - x3) + _sep(li, u[(0, 0)]),
        "4": delta(u[(0, 1)]) + _sep(j, u[(0, 0)]),
        "5": delta(u[(0, 2)]) + _sep(j, u[(0, 1)]) + _sep(lj, u[(0, 0)]),
        "6": delta(sig1) + _sep(char(ipj), u[(0, 0)]),
        "7": delta(u[(2, 0)] + u[(0, 2)] + u[(1, 1)]) + _sep(char(ipj), sig1) + _sep(binom2(ipj), u[(0, 0)]),
        "8": delta(mu1) + _sep(char(imj), u[(0, 0)]),
        "9": (delta(u[(0, 1)] + u[(2, 0)] + u[(0, 2)] - u[(1, 1)]) + _sep(char(imj), mu1)
              + _sep(binom2(imj), u[(0, 0)])),
    }


def lift_tau_cocycle(theta: Character, parts: list[Cochain], seed: int = 0) -> list[Cochain] | None:
    """Lift a Z/3[<tau>] packed cocycle (components in 1, t, t^2) to a Z/9 one
    congruent to it mod 3, or None when no lift exists."""
    g = theta.group
    m3 = cyclic_module(g, theta, 3)
    f = Cochain(m3, parts[0].degree, np.hstack([p.values for p in parts]))
    if not delta(f).is_zero():
        raise ValueError("components do not form a packed cocycle")
    fh = f.hat(9)
    x = solve_coboundary(-delta(fh).div3(), seed)
    if x is None:
        return None
    return _components(fh + x.times3())


@dataclass
class LiftResult:
    """Outcome of the three lift systems; ``u_tilde`` is None when one failed."""

    side: str
    solved: dict
    u_tilde: Cochain | None
    pieces: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.u_tilde is not None


def lift_chi(chi: Cochain, seed: int = 0) -> Cochain | None:
    """A Z/9 cocycle reducing to chi, or None."""
    ch = chi.hat(9)
    x = solve_coboundary(-delta(ch).div3(), seed)
    return None if x is None else ch + x.times3()


def lift_u(sys: USystem, seed: int = 0) -> LiftResult:
    pr = sys.pair
    u, chi = sys.u, sys.chi
    g = pr.group
    swap = sys.side == "v"
    ring9 = group_ring_module(g, *((pr.chi2, pr.chi1) if swap else (pr.chi1, pr.chi2)), 9)
    mu1, mu2 = u[(1, 0)] - u[(0, 1)], u[(0, 1)] + u[(2, 0)] + u[(0, 2)] - u[(1, 1)]
    sig1, sig2 = u[(1, 0)] + u[(0, 1)] - chi, u[(2, 0)] + u[(0, 2)] + u[(1, 1)]
    systems = {
        "T1": (pr.chi2, [u[(0, 0)], u[(0, 1)], u[(0, 2)]]),
        "T3": (pr.chi1 - pr.chi2, [u[(0, 0)], mu1, mu2]),
        "T4": (pr.chi1 + pr.chi2, [u[(0, 0)], sig1, sig2]),
    }
    lifts, solved = {}, {}
    for name, (theta, parts) in systems.items():
        lifts[name] = lift_tau_cocycle(theta, parts, seed)
        solved[name] = lifts[name] is not None
    if not all(solved.values()):
        return LiftResult(sys.side, solved, None)
    u00, u01, u02 = lifts["T1"]
    _, mu1t, mu2t = lifts["T3"]
    _, _, sig2t = lifts["T4"]
    half = 5
    parts = {
        (0, 0): u00,
        (1, 0): mu1t + u01,
        (0, 1): u01,
        (2, 0): half * (sig2t + mu2t - u01 - 2 * u02),
        (1, 1): half * (sig2t - mu2t + u01),
        (0, 2): u02,
        (2, 1): u[(2, 1)].hat(9),
        (1, 2): u[(1, 2)].hat(9),
        (2, 2): u[(2, 2)].hat(9),
    }
    ut = pack_ring(parts, ring9, swap=swap)
    if not (ut.reduce(3).values == sys.packed(ring9.reduced(3)).values).all():
        raise ArithmeticError("assembled lift does not reduce to u")
    pieces = {"u003*": (lifts["T3"][0] - u00).div3(), "u004*": (lifts["T4"][0] - u00).div3()}
    return LiftResult(sys.side, solved, ut, pieces)


def _ring9(name_or_elem) -> np.ndarray:
    return name_or_elem.mult_matrix() if hasattr(name_or_elem, "mult_matrix") else name_or_elem


def bockstein_lift_builder(sys_u: USystem, sys_v: USystem, chi_tilde: Cochain | None = None,
                           seed: int = 0) -> VerificationReport:
    """Lift u and v to Z/9[G] and tabulate the coboundaries of u~T_k, v~T_k.

    Congruences are modulo 3*delta(C(Z/9[G])), decided by a linear solve.
    Failure of a lift system is reported, not asserted impossible.
    """
    g = sys_u.group
    pr = sys_u.pair
    rep = VerificationReport(f"mod-9 lifts on {g.name}", seed=seed, meta={"group": g.name,
                                                                          "degree": sys_u.degree})
    anchor_eq = "rearranged coefficient equations"
    for side, sys in (("u", sys_u), ("v", sys_v)):
        res = double_star_residuals(sys)
        first = [k for k in "1234567" if not res[k].is_zero()]
        rep.check(f"{side}: first seven rearranged equations hold", anchor_eq, not first,
                  counterexample={"failing": first})
        derived = [k for k in "89" if not res[k].is_zero()]
        rep.check(f"{side}: equations 8 and 9 follow from the first seven", anchor_eq, not derived,
                  counterexample={"failing": derived})
    if not (sys_u.chi == sys_v.chi):
        raise ValueError("u and v systems must share chi")
    chi = sys_u.chi
    if chi_tilde is None:
        chi_tilde = lift_chi(chi, seed)
        if chi_tilde is None:
            rep.note("chi admits no Z/9 cocycle lift", "lift existence", {"lifted": False})
            return rep
    elif not (chi_tilde.reduce(3) == chi) or not delta(chi_tilde).is_zero():
        raise ValueError("chi_tilde must be a Z/9 cocycle reducing to chi")

    lu, lv = lift_u(sys_u, seed), lift_u(sys_v, seed)
    for lr in (lu, lv):
        rep.note(f"{lr.side}: lift systems solvable", "lift existence", lr.solved)
    if not (lu.ok and lv.ok):
        return rep

    ring9 = group_ring_module(g, pr.chi1, pr.chi2, 9)
    E9 = special_elements(P, 9)
    t1, t2 = E9.tm(1), E9.tm(2)
    T1, T2, T3, T4 = (E9.trace(k) for k in range(1, 5))
    ut, vt = lu.u_tilde, lv.u_tilde
    if ut.module is not ring9:
        ut = Cochain(ring9, ut.degree, ut.values)
        vt = Cochain(ring9, vt.degree, vt.values)
    times = lambda f, r: ring_times(f, _ring9(r))  # noqa: E731
    ipj = pr.chi1 + pr.chi2
    # (i+j)^ chi~' t1^2 T4 - 3 l_{i+j} chi' (t1 + t1^2) T4
    a = _sep(char_hat(ipj), chi_tilde)
    b = _sep(binom2(ipj), chi).times3()
    target = (ring_constant_elem(a, t1 * t1 * T4, ring9)
              - ring_constant_elem(b, (t1 + t1 * t1) * T4, ring9))
    anchor = "coboundaries of the lifts"

    def exact(label, f):
        rep.check(label, anchor, f.is_zero(), counterexample={"mismatch": f.mismatch(f._like(0 * f.values))})

    def cong(label, f):
        rep.check(label, anchor, in_three_delta(f, seed), counterexample={"note": "not in 3*delta(C)"})

    exact("d(u~ T1) = 0", delta(times(ut, T1)))
    exact("d(v~ T2) = 0", delta(times(vt, T2)))
    cong("d(u~ T3) = 0 mod 3d", delta(times(ut, T3)))
    cong("d(v~ T3) = 0 mod 3d", delta(times(vt, T3)))
    cong("d(u~ T4) = target mod 3d", delta(times(ut, T4)) - target)
    cong("d(v~ T4) = target mod 3d", delta(times(vt, T4)) - target)
    cong("d(u~ (t1+t1^2) T4) = 0 mod 3d", delta(times(ut, (t1 + t1 * t1) * T4)))
    cong("d(v~ (t2+t2^2) T4) = 0 mod 3d", delta(times(vt, (t2 + t2 * t2) * T4)))
    chiT4 = ring_constant_elem(chi_tilde, T4, ring9)
    dchi = delta(chiT4)
    cong("d(chi~ T4) t1 = target mod 3d", times(dchi, t1) - target)
    cong("d(chi~ T4) t2 = target mod 3d", times(dchi, t2) - target)
    # exact form of d(chi~ T4) t1 (uses only chi~ a cocycle)
    exact("d(chi~ T4) t1 = target exactly", times(dchi, t1) - target)
    rep.meta["lift_pieces"] = {k: v.to_json() for k, v in lu.pieces.items()}
    return rep


def ring_constant_elem(coeff: Cochain, r, module: CoefficientModule) -> Cochain:
    """coeff * r for a scalar cochain coeff and a group ring element r."""
    return Cochain(module, coeff.degree, coeff.values[:, :1] * r.coeffs.reshape(1, -1))


# ---------------------------------------------------------------------------
# sampled suites

def _first_bad(flags: list[bool]) -> list[int]:
    return [k for k, ok in enumerate(flags) if not ok][:3]


def verify_constructors(group: FiniteGroup, chi1: Character, chi2: Character, samples: int = 100,
                        degree: int = 1, seed: int = 0) -> VerificationReport:
    """D_1..D_4, z and alpha on seeded random solutions of their defining systems."""
    rng = np.random.default_rng(seed)
    pr = PairData(chi1, chi2)
    mods = PrismModules(group, chi1, chi2)
    rep = VerificationReport(f"cocycle constructors on {group.name}", seed=seed,
                             meta={"group": group.name, "samples": samples, "degree": degree,
                                   "u00_forced_zero": not carries_available(pr)})
    flags: dict[str, list[bool]] = {k: [] for k in (
        "D1", "D2", "D3", "D4", "D4 displayed", "closed form", "A0 identity (display A0)",
        "bullets", "z", "packed w", "packed w broken", "alpha", "alpha forms")}
    lam = binom2(pr.chi1 - pr.chi2)
    for _ in range(samples):
        sys = random_u_system(pr, degree, rng)
        flags["bullets"].append(all(check_bullets(sys).values()))
        for k in range(1, 5):
            flags[f"D{k}"].append(delta(build_D(k, sys)).is_zero())
        flags["D4 displayed"].append(delta(d4_as_displayed(sys)).is_zero())
        comb = build_D(1, sys) + build_D(2, sys) - build_D(3, sys)
        flags["closed form"].append(comb == d_combination_closed_form(sys))
        A0_disp, _ = sys.A_literal()
        flags["A0 identity (display A0)"].append(a0_identity_lhs(sys) == a0_identity_rhs(sys, A0_disp))
        w = random_w_system(pr, degree, rng)
        flags["z"].append(delta(z_builder(w, pr)).is_zero())
        flags["packed w"].append(packed_w_check(w, pr, mods.ring) == (True, True))
        broken = dict(w)
        broken["w12"] = broken["w12"] + Cochain.random(broken["w12"].module, degree, rng)
        rels, mult = packed_w_check(broken, pr, mods.ring)
        flags["packed w broken"].append(rels == mult)
        x = random_alpha_system(pr, degree, rng)
        first, second = alpha_builder(x, pr)
        flags["alpha"].append(delta(first).is_zero())
        flags["alpha forms"].append(first == second)
    del lam
    a = "cocycles from the coefficient systems"
    labels = {
        "bullets": "bullet equations hold on every sampled system",
        "D1": "delta(D1) = 0", "D2": "delta(D2) = 0", "D3": "delta(D3) = 0", "D4": "delta(D4) = 0",
        "closed form": "D1 + D2 - D3 equals its closed form",
        "A0 identity (display A0)": "delta(u12+u21) - (D1+D2-D3) = A0 + (i y' + l_i aux') - l_psi chi'",
        "z": "delta(z) = 0",
        "packed w": "valid w: delta(packed u) = z T_G",
        "packed w broken": "perturbed w: relations hold <=> delta(packed u) in F_3 T_G",
        "alpha": "delta(alpha) = 0",
        "alpha forms": "both closed forms of alpha agree",
    }
    for key, label in labels.items():
        rep.check(label, a, all(flags[key]), counterexample={"samples": _first_bad(flags[key])})
    rep.note("displayed D4 (extra -chi in the middle term) is a cocycle", a,
             {"cocycle_samples": sum(flags["D4 displayed"]), "samples": samples})
    return rep


def _dec_classes_equal(x: Cochain, y: Cochain, seed: int = 0) -> bool:
    return is_coboundary(x - y, seed)


def h_subgroup(chi1: Character, chi2: Character) -> list[int]:
    """Elements of ker(chi1) & ker(chi2)."""
    return np.nonzero((chi1.values % 3 == 0) & (chi2.values % 3 == 0))[0].tolist()


def verify_eta(group: FiniteGroup, chi1: Character, chi2: Character, samples: int = 20,
               degree: int = 1, seed: int = 0) -> VerificationReport:
    """The connecting map on random M4 cocycles and on Dec-form inputs.

    ``degree`` is the degree of c; eta lands one degree higher.
    """
    rng = np.random.default_rng(seed)
    mods = PrismModules(group, chi1, chi2)
    pr = mods.pair
    rep = VerificationReport(f"connecting map on {group.name}", seed=seed,
                             meta={"group": group.name, "samples": samples, "degree_of_c": degree})
    K = m4_cocycle_space(mods, degree, seed)
    H = h_subgroup(chi1, chi2)
    maps = _prism_maps()
    f = {k: [] for k in ("cocycle", "routes", "dA0", "dA0 opposite", "dB0", "res", "shift", "normalize",
                         "pi4")}
    chi_nonzero = 0
    base = lambda chi: _sep(char(pr.psi), chi)  # noqa: E731
    for _ in range(samples):
        u, v, chi = random_m4_cocycle(mods, degree, rng, K)
        chi_nonzero += not chi.is_zero()
        r = eta_pipeline(u, v, chi, mods)
        c = assemble_c(u, v, chi, mods.m3)
        f["cocycle"].append(delta(r.eta).is_zero())
        f["routes"].append(eta_direct(c, mods) == r.eta)
        want = _sep(2 * pr.i + pr.j, base(chi))
        f["dA0"].append(delta(r.A0) == want)
        f["dA0 opposite"].append(delta(r.A0) == -want)
        f["dB0"].append(delta(r.B0) == -delta(r.A0))
        f["res"].append(is_coboundary(r.eta.restrict(H), seed) if len(H) > 1 else True)
        shifted = c + Cochain.random(mods.m2, degree, rng).apply(maps["d2"], mods.m3)
        f["shift"].append(_dec_classes_equal(eta_direct(shifted, mods), r.eta, seed))
        nrm = normalize_c(shifted, mods)
        f["normalize"].append(_dec_classes_equal(eta_pipeline(nrm.u, nrm.v, nrm.chi, mods).eta, r.eta, seed))
        f["pi4"].append(pi4_values(shifted) == nrm.chi)
    a = "connecting map through the homotopy"
    rep.check("eta = A0 + B0 is a cocycle", a, all(f["cocycle"]), {"samples": _first_bad(f["cocycle"])})
    rep.check("omega1/omega2 split agrees with a pointwise d2-preimage", a, all(f["routes"]),
              {"samples": _first_bad(f["routes"])})
    rep.check("delta(A0) = (2i+j) psi' chi''", a, all(f["dA0"]), {"samples": _first_bad(f["dA0"])},
              detail={"samples_with_chi_nonzero": chi_nonzero})
    rep.check("delta(A0) = -(2i+j) psi' chi'' (sign of the residual decomposition)", a, all(f["dA0 opposite"]),
              {"samples": _first_bad(f["dA0 opposite"])})
    rep.check("delta(B0) = -delta(A0)", a, all(f["dB0"]), {"samples": _first_bad(f["dB0"])})
    rep.check("eta restricts to a coboundary on ker(chi1) & ker(chi2)", a, all(f["res"]),
              {"samples": _first_bad(f["res"])}, detail={"subgroup_order": len(H)})
    rep.check("class unchanged under c -> c + d2(w)", a, all(f["shift"]), {"samples": _first_bad(f["shift"])})
    rep.check("normalizing the shifted representative gives the same class", a, all(f["normalize"]),
              {"samples": _first_bad(f["normalize"])})
    rep.check("pi4 of the input equals the normalized chi", a, all(f["pi4"]), {"samples": _first_bad(f["pi4"])})

    # Dec-form inputs (chi3 t2^2, chi4 t1^2, 0, 0)
    triv = trivial_module(group, 3)
    Z = sparse_kernel(delta_matrix(triv, degree), 3, seed).basis
    lit, corr, zero_in = [], [], []
    for _ in range(samples):
        chi3 = Cochain.from_flat(triv, degree, (Z @ rng.integers(0, 3, size=Z.shape[1])) % 3)
        chi4 = Cochain.from_flat(triv, degree, (Z @ rng.integers(0, 3, size=Z.shape[1])) % 3)
        u, v, chi = dec_form_input(chi3, chi4, mods)
        eta = eta_pipeline(u, v, chi, mods).eta
        dec = _sep(pr.i, chi3) + _sep(pr.j, chi4)
        lit.append(_dec_classes_equal(eta, dec, seed))
        corr.append(_dec_classes_equal(eta, -dec, seed))
        zero_in.append(is_coboundary(dec, seed))
    rep.check("Dec-form input: eta = [i chi3' + j chi4']", a, all(lit),
              {"samples": _first_bad(lit), "nonzero_classes": zero_in.count(False)})
    rep.check("Dec-form input: eta = -[i chi3' + j chi4']", a, all(corr), {"samples": _first_bad(corr)})
    zero = eta_pipeline(*dec_form_input(Cochain.zero(triv, degree), Cochain.zero(triv, degree), mods), mods)
    rep.check("zero input gives zero", a, zero.eta.is_zero())
    return rep


def verify_display_sign(group: FiniteGroup, chi1: Character, chi2: Character, samples: int = 10,
                        degree: int = 1, seed: int = 0) -> VerificationReport:
    """A0 of the residual decomposition against A0 read off the u-system display."""
    rng = np.random.default_rng(seed)
    mods = PrismModules(group, chi1, chi2)
    pr = mods.pair
    rep = VerificationReport(f"A0 conventions on {group.name}", seed=seed, meta={"group": group.name})
    same, opposite, b_opp, ident = [], [], [], []
    for _ in range(samples):
        su = random_u_system(pr, degree, rng)
        sv = random_u_system(pr.swapped(), degree, rng, side="v", chi=su.chi)
        u, v = su.packed(mods.ring), sv.packed(mods.ring)
        r = eta_pipeline(u, v, su.chi, mods)
        a_disp, _ = su.A_literal()
        b_disp, _ = sv.A_literal()
        same.append(r.A0 == a_disp)
        opposite.append(r.A0 == -a_disp)
        b_opp.append(r.B0 == -b_disp)
        ident.append(a0_identity_lhs(su) == a0_identity_rhs(su, r.A0))
    a = "A0 conventions"
    rep.check("A0 (residual decomposition) = A0 (u-system display)", a, all(same), {"samples": _first_bad(same)})
    rep.check("A0 (residual decomposition) = -A0 (u-system display)", a, all(opposite),
              {"samples": _first_bad(opposite)})
    rep.check("B0 (residual decomposition) = -A0 (v-system display)", a, all(b_opp), {"samples": _first_bad(b_opp)})
    rep.note("A0-identity with the residual-decomposition A0", a, {"holds": sum(ident), "samples": samples})
    return rep
