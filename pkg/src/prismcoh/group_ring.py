"""Exact arithmetic in R[G] for G = <x1, x2> = (Z/p)^2.

An element is a length-p^2 coefficient vector; entry ``i*p + j`` is the
coefficient of x1^i x2^j.  The ring R is Z (modulus 0), Z/p or Z/p^2.

>>> e = special_elements(3, 0)
>>> e.trace(1) * e.trace(1) == 3 * e.trace(1)
True
>>> (e.tm(1) * e.trace(1)).is_zero()
True
>>> (e.trace(1) * e.trace(2)) == e.trace_all
True
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .finite_group import hat, lambda2
from .report import VerificationReport

MAX_PRIME = 13
_LIMIT = 1 << 62


def _check_prime(p: int) -> None:
    if p < 3 or p > MAX_PRIME or any(p % q == 0 for q in range(2, p)):
        raise ValueError(f"p must be an odd prime <= {MAX_PRIME}, got {p}")


def _check_modulus(p: int, modulus: int) -> None:
    if modulus not in (0, p, p * p):
        raise ValueError(f"modulus must be 0, p or p^2 for p={p}, got {modulus}")


def reduce_coeffs(c: np.ndarray, modulus: int) -> np.ndarray:
    return np.mod(c, modulus) if modulus else c


class GroupRingElement:
    """Immutable element of R[(Z/p)^2]."""

    __slots__ = ("p", "modulus", "_c")

    def __init__(self, p: int, modulus: int, coeffs) -> None:
        c = np.asarray(coeffs, dtype=np.int64).reshape(-1).copy()
        if c.size != p * p:
            raise ValueError(f"expected {p * p} coefficients, got {c.size}")
        c = reduce_coeffs(c, modulus)
        c.setflags(write=False)
        self.p, self.modulus, self._c = p, modulus, c

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def grid(self) -> np.ndarray:
        return self._c.reshape(self.p, self.p)

    # construction helpers
    @classmethod
    def zero(cls, p: int, modulus: int = 0) -> "GroupRingElement":
        return cls(p, modulus, np.zeros(p * p, dtype=np.int64))

    @classmethod
    def monomial(cls, p: int, i: int, j: int, modulus: int = 0, coeff: int = 1) -> "GroupRingElement":
        c = np.zeros(p * p, dtype=np.int64)
        c[(i % p) * p + (j % p)] = coeff
        return cls(p, modulus, c)

    def _same(self, other: "GroupRingElement") -> None:
        if not isinstance(other, GroupRingElement):
            raise TypeError(f"expected GroupRingElement, got {type(other).__name__}")
        if other.p != self.p or other.modulus != self.modulus:
            raise ValueError(f"ring mismatch: (p={self.p}, mod={self.modulus}) vs "
                             f"(p={other.p}, mod={other.modulus})")

    def _coerce(self, other) -> "GroupRingElement":
        if isinstance(other, (int, np.integer)):
            return GroupRingElement.monomial(self.p, 0, 0, self.modulus, int(other))
        self._same(other)
        return other

    def __add__(self, other) -> "GroupRingElement":
        other = self._coerce(other)
        return GroupRingElement(self.p, self.modulus, _checked_add(self._c, other._c))

    __radd__ = __add__

    def __neg__(self) -> "GroupRingElement":
        return GroupRingElement(self.p, self.modulus, -self._c)

    def __sub__(self, other) -> "GroupRingElement":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "GroupRingElement":
        return self._coerce(other) - self

    def __mul__(self, other) -> "GroupRingElement":
        if isinstance(other, (int, np.integer)):
            k = int(other)
            if not self.modulus and self._c.size and abs(k) * int(np.abs(self._c).max()) >= _LIMIT:
                raise OverflowError("group ring scalar product overflows int64")
            return GroupRingElement(self.p, self.modulus, self._c * k)
        self._same(other)
        return GroupRingElement(self.p, self.modulus, _convolve(self.grid, other.grid, self.modulus))

    def __rmul__(self, other) -> "GroupRingElement":
        if isinstance(other, (int, np.integer)):
            return self * other
        return NotImplemented

    def __pow__(self, k: int) -> "GroupRingElement":
        if k < 0:
            raise ValueError("negative powers are not supported")
        out = GroupRingElement.monomial(self.p, 0, 0, self.modulus)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, np.integer)):
            other = self._coerce(other)
        if not isinstance(other, GroupRingElement):
            return NotImplemented
        return (self.p, self.modulus) == (other.p, other.modulus) and bool(np.array_equal(self._c, other._c))

    def __hash__(self) -> int:
        return hash((self.p, self.modulus, self._c.tobytes()))

    def is_zero(self) -> bool:
        return not self._c.any()

    def act(self, i: int, j: int) -> "GroupRingElement":
        """Left translation by x1^i x2^j (a coefficient permutation)."""
        g = np.roll(self.grid, (i % self.p, j % self.p), axis=(0, 1))
        return GroupRingElement(self.p, self.modulus, g)

    def augmentation(self) -> int:
        s = int(self._c.sum())
        return s % self.modulus if self.modulus else s

    def reduce(self, modulus: int) -> "GroupRingElement":
        """Image under Z -> Z/m or Z/p^2 -> Z/p."""
        _check_modulus(self.p, modulus)
        if self.modulus and (modulus == 0 or self.modulus % modulus):
            raise ValueError(f"cannot reduce modulus {self.modulus} to {modulus}")
        return GroupRingElement(self.p, modulus, self._c)

    def lift(self) -> "GroupRingElement":
        """Canonical representative over Z (coefficients in [0, m))."""
        return GroupRingElement(self.p, 0, self._c)

    def divisible_by(self, k: int) -> bool:
        """Is this element in k * R[G]?  (Over Z/m, k must divide m.)"""
        if self.modulus:
            return bool(np.all(self._c % k == 0))
        return bool(np.all(self._c % k == 0))

    def mult_matrix(self) -> np.ndarray:
        """Matrix of y -> self*y on coefficient vectors."""
        return multiplication_matrix(self.grid)

    # text forms
    def to_json(self) -> list[int]:
        return [int(v) for v in self._c]

    @classmethod
    def from_json(cls, p: int, modulus: int, data) -> "GroupRingElement":
        return cls(p, modulus, data)

    def pretty(self) -> str:
        return pretty(self)

    def __repr__(self) -> str:
        ring = "Z" if not self.modulus else f"Z/{self.modulus}"
        return f"GroupRingElement(p={self.p}, {ring}: {self.pretty()})"


def _checked_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.size and (int(np.abs(a).max()) >= _LIMIT // 2 or int(np.abs(b).max()) >= _LIMIT // 2):
        raise OverflowError("group ring sum overflows int64")
    return a + b


def _convolve(a: np.ndarray, b: np.ndarray, modulus: int) -> np.ndarray:
    p = a.shape[0]
    if not modulus and a.size:
        bound = int(np.abs(a).max()) * int(np.abs(b).max()) * p * p
        if bound >= _LIMIT:
            raise OverflowError("group ring product overflows int64")
    out = np.zeros_like(b)
    for i, j in zip(*np.nonzero(a)):
        out += a[i, j] * np.roll(b, (i, j), axis=(0, 1))
        if modulus:
            out %= modulus
    return out.reshape(-1)


def multiplication_matrix(grid: np.ndarray) -> np.ndarray:
    p = grid.shape[0]
    m = np.empty((p * p, p * p), dtype=np.int64)
    for k in range(p):
        for l in range(p):
            m[:, k * p + l] = np.roll(grid, (k, l), axis=(0, 1)).reshape(-1)
    return m


def translation_matrix(p: int, i: int, j: int) -> np.ndarray:
    """Permutation matrix of left translation by x1^i x2^j."""
    e = np.zeros((p, p), dtype=np.int64)
    e[i % p, j % p] = 1
    return multiplication_matrix(e)


@dataclass(frozen=True)
class SpecialElements:
    """Named elements of R[G]: generators, their differences with 1, and traces.

    Generators are numbered 1..p+1: x1, x2 and then x1*x2^(k-2) for k >= 3,
    i.e. one generator per cyclic subgroup of order p.
    """

    p: int
    modulus: int
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def exponent(self, k: int) -> tuple[int, int]:
        if not 1 <= k <= self.p + 1:
            raise ValueError(f"generator index must lie in 1..{self.p + 1}")
        return {1: (1, 0), 2: (0, 1)}.get(k, (1, k - 2))

    def zero(self) -> GroupRingElement:
        return GroupRingElement.zero(self.p, self.modulus)

    def one(self) -> GroupRingElement:
        return GroupRingElement.monomial(self.p, 0, 0, self.modulus)

    def mono(self, i: int, j: int) -> GroupRingElement:
        return GroupRingElement.monomial(self.p, i, j, self.modulus)

    def gen(self, k: int) -> GroupRingElement:
        return self.mono(*self.exponent(k))

    def tm(self, k: int) -> GroupRingElement:
        """gen(k) - 1."""
        return self.gen(k) - 1

    def trace(self, k: int) -> GroupRingElement:
        key = ("T", k)
        if key not in self._cache:
            a, b = self.exponent(k)
            c = np.zeros((self.p, self.p), dtype=np.int64)
            for j in range(self.p):
                c[(a * j) % self.p, (b * j) % self.p] += 1
            self._cache[key] = GroupRingElement(self.p, self.modulus, c)
        return self._cache[key]

    @cached_property
    def trace_all(self) -> GroupRingElement:
        return GroupRingElement(self.p, self.modulus, np.ones(self.p * self.p, dtype=np.int64))

    def last(self) -> int:
        return self.p + 1


def special_elements(p: int, modulus: int = 0) -> SpecialElements:
    _check_prime(p)
    _check_modulus(p, modulus)
    return SpecialElements(p, modulus)


def gr_add(a: GroupRingElement, b: GroupRingElement) -> GroupRingElement:
    return a + b


def gr_mul(a: GroupRingElement, b: GroupRingElement) -> GroupRingElement:
    return a * b


def gr_act(g: tuple[int, int], a: GroupRingElement) -> GroupRingElement:
    return a.act(*g)


def pretty(a: GroupRingElement) -> str:
    """Monomial form ``c*x1^i*x2^j``; exact multiples of traces print as ``c*Tk``/``c*TG``."""
    if a.is_zero():
        return "0"
    e = SpecialElements(a.p, a.modulus)
    names = [("TG", e.trace_all)] + [(f"T{k}", e.trace(k)) for k in range(1, a.p + 2)]
    nz = a.coeffs[np.nonzero(a.coeffs)[0][0]]
    for name, t in names:
        if t * int(nz) == a:
            return name if nz == 1 else f"{int(nz)}*{name}"
    terms = []
    for idx in np.nonzero(a.coeffs)[0]:
        i, j = divmod(int(idx), a.p)
        c = int(a.coeffs[idx])
        mono = "*".join(s for s in (f"x1^{i}" if i else "", f"x2^{j}" if j else "") if s)
        terms.append(f"{c}*{mono}" if mono else str(c))
    return " + ".join(terms).replace("+ -", "- ")


# mod-9 identity suites (p = 3)

def _gamma(e: SpecialElements, i: int, j: int) -> GroupRingElement:
    return e.mono(i, j)


def verify_mod9_trace_facts() -> VerificationReport:
    """Trace and difference identities in Z/9[(Z/3)^2], including the
    expansions of (g - 1)T_k for all nine group elements g."""
    e = special_elements(3, 9)
    t1, t2, t3 = e.tm(1), e.tm(2), e.tm(3)
    T1, T2, T3, T4 = (e.trace(k) for k in range(1, 5))
    rep = VerificationReport("mod9-trace-facts")
    anchor = "mod-9 trace identities"

    def zero(label: str, x: GroupRingElement) -> None:
        rep.check(label, anchor, x.is_zero(), counterexample={"residual": x.to_json()})

    zero("t1*T1 = 0", t1 * T1)
    zero("t2*T2 = 0", t2 * T2)
    zero("t3*T3 = 0", t3 * T3)
    zero("t1^3 = -3(t1 + t1^2)", t1 ** 3 + 3 * (t1 + t1 * t1))
    zero("t2*T3 = (2t1 + t1^2)T3", t2 * T3 - (2 * t1 + t1 * t1) * T3)
    zero("t2^2*T3 = (t1^2 - 3(t1 + t1^2))T3", t2 * t2 * T3 - (t1 * t1 - 3 * (t1 + t1 * t1)) * T3)
    zero("t1*T4 = t2*T4", t1 * T4 - t2 * T4)

    def lin(k: int, t: GroupRingElement) -> GroupRingElement:
        k9 = int(hat(k % 3))
        return k9 * t + int(lambda2(k9, 9)) * t * t

    for i in range(3):
        for j in range(3):
            g = _gamma(e, i, j) - 1
            zero(f"(g-1)T1 expansion at g=({i},{j})", g * T1 - lin(j, t2) * T1)
            zero(f"(g-1)T2 expansion at g=({i},{j})", g * T2 - lin(i, t1) * T2)
            zero(f"(g-1)T3 expansion at g=({i},{j})", g * T3 - lin(i - j, t1) * T3)
            zero(f"(g-1)T4 expansion at g=({i},{j})", g * T4 - lin(i + j, t1) * T4)
    return rep


def verify_mod3_congruences(kappa=None) -> VerificationReport:
    """Congruences modulo 3*Z/9[G] for the homotopy coefficients and traces.

    The coefficient congruences depend on the chosen pair; by default the
    closed-form p = 3 pair is used.
    """
    if kappa is None:
        from .prism import explicit_pair_p3
        kappa = explicit_pair_p3()
    e = special_elements(3, 9)
    k1, k2 = kappa[0].reduce(9), kappa[1].reduce(9)
    t1, t2 = e.tm(1), e.tm(2)
    T1, T2, T3, T4, TG = [e.trace(k) for k in range(1, 5)] + [e.trace_all]
    rep = VerificationReport("mod3-congruences")
    anchor = "congruences mod 3 in Z/9[G]"

    def cong(label: str, x: GroupRingElement) -> None:
        rep.check(label, anchor, x.divisible_by(3), counterexample={"residual": x.to_json()})

    cong("k1*t1 = T1", k1 * t1 - T1)
    cong("k1*t2 = (1+t1+t1^2)T3 - (1-t1-t1^2)T4",
         k1 * t2 - ((1 + t1 + t1 * t1) * T3 - (1 - t1 - t1 * t1) * T4))
    cong("k2*t1 = (1+t2+t2^2)T3 - (1-t2-t2^2)T4",
         k2 * t1 - ((1 + t2 + t2 * t2) * T3 - (1 - t2 - t2 * t2) * T4))
    s1, s2 = t1 * t1, t2 * t2
    cong("T3 expansion in t-monomials",
         T3 - (s1 + 2 * t1 * t2 + s2 + 2 * s1 * t2 + 2 * t1 * s2 + s1 * s2))
    cong("T4 expansion in t-monomials", T4 - (s1 + t1 * t2 + s2 + s1 * t2 + t1 * s2))
    cong("T2 = -(T1 + T3 + T4 - TG)", T2 + (T1 + T3 + T4 - TG))
    cong("k1 = t1 + t1^2", k1 - (t1 + s1))
    return rep


def _valuation(n: int, p: int) -> int:
    """k with n = p**k (sizes of F_p-spaces are too large for float logs)."""
    k = 0
    while n > 1:
        n, r = divmod(n, p)
        if r:
            raise ValueError("not a power of p")
        k += 1
    return k


def verify_trace_ideal_sequence(p: int, modulus: int = 0) -> VerificationReport:
    """0 -> R[G]{T1, T2} -> R[G] --(* t1 t2)--> R[G] t1 t2 -> 0 for R = Z or Z/p.

    Over Z the outer terms have ranks 2p - 1 and (p - 1)^2; over Z/p the
    same numbers are F_p-dimensions.
    """
    from .exact_linalg import IntMatrix, Lattice, image_lattice, kernel_basis, same_lattice

    if modulus not in (0, p):
        raise ValueError("modulus must be 0 or p")
    e = special_elements(p, 0)
    n = p * p
    rep = VerificationReport(f"trace-ideal sequence p={p} modulus={modulus}", meta={"p": p, "modulus": modulus})
    anchor = "kernel of multiplication by t1 t2"
    mult = (e.tm(1) * e.tm(2)).mult_matrix()
    if modulus:
        mult = mult % modulus
    gens = [(e.mono(i, j) * e.trace(k)).coeffs for k in (1, 2) for i in range(p) for j in range(p)]
    traces = Lattice.from_generators(gens, n, modulus)
    ker = Lattice.from_generators(kernel_basis(IntMatrix(mult.tolist(), modulus)), n, modulus)
    rep.check("kernel = R[G]T1 + R[G]T2", anchor, same_lattice(traces, ker))
    img = image_lattice(IntMatrix(mult.tolist(), modulus))
    if modulus:
        k_dim = _valuation(traces.size(), p)
        i_dim = _valuation(img.size(), p)
    else:
        k_dim, i_dim = traces.rank, img.rank
    rep.check("R[G]{T1, T2} has rank 2p - 1", anchor, k_dim == 2 * p - 1, counterexample={"rank": k_dim})
    rep.check("R[G] t1 t2 has rank (p - 1)^2", anchor, i_dim == (p - 1) ** 2, counterexample={"rank": i_dim})
    rep.note("which coefficient ring the middle term uses", anchor,
             {"note": "the sequence is exact both over Z and over Z/p; the rank statements fit either"})
    return rep
