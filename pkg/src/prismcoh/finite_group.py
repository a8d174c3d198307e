"""Finite test groups, characters to Z/3 with optional Z/9 lifts, and the
scalar functions built from them (binomial parts, carries, hat-lifts).

Groups are given by a full multiplication table.  The builtins are products
of cyclic 3-groups; their elements carry coordinate vectors so characters can
be specified by generator images.

>>> g = builtin_group("c9")
>>> th = make_character(g, [1])
>>> th.lift is not None
True
>>> int(s_theta(th).values[5])
1
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

BUILTINS = ("c3", "c9", "c27", "c3xc3", "c9xc3", "c9xc9")


def lambda2(x, modulus: int = 3):
    """binom(x, 2) mod ``modulus`` for integer representatives ``x``."""
    x = np.asarray(x, dtype=np.int64) % modulus
    return (x * (x - 1) // 2) % modulus


def hat(x):
    """The representative of x mod 3 in {0, 1, 2}, read as an integer (or Z/9 value)."""
    return np.asarray(x, dtype=np.int64) % 3


class FiniteGroup:
    """A finite group given by its multiplication table ``table[a, b] = a*b``."""

    def __init__(self, table, labels=None, coords=None, factor_orders=None, name: str = "group",
                 validate: bool = True) -> None:
        t = np.asarray(table, dtype=np.int64)
        n = t.shape[0]
        if t.shape != (n, n):
            raise ValueError("multiplication table must be square")
        self.table = t
        self.table.setflags(write=False)
        self.order = n
        self.labels = list(labels) if labels is not None else [str(k) for k in range(n)]
        self.coords = None if coords is None else np.asarray(coords, dtype=np.int64)
        self.factor_orders = None if factor_orders is None else tuple(factor_orders)
        self.name = name
        ids = [e for e in range(n) if np.array_equal(t[e], np.arange(n))]
        if not ids:
            raise ValueError("table has no identity")
        self.identity = ids[0]
        if validate:
            self._validate()
        self.inverse = np.argmax(t == self.identity, axis=1)

    def _validate(self) -> None:
        t, n = self.table, self.order
        if t.min() < 0 or t.max() >= n:
            raise ValueError("table entries out of range")
        for row in t:
            if len(set(row.tolist())) != n:
                raise ValueError("table rows are not permutations")
        if not np.array_equal(t[:, self.identity], np.arange(n)):
            raise ValueError("identity is not two-sided")
        if n <= 81:
            a = np.arange(n)
            left = t[t[a[:, None], a[None, :]][:, :, None], a[None, None, :]]
            right = t[a[:, None, None], t[a[:, None], a[None, :]][None, :, :]]
            if not np.array_equal(left, right):
                raise ValueError("table is not associative")

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def power(self, a: int, k: int) -> int:
        out = self.identity
        for _ in range(k % self.element_order(a)):
            out = int(self.table[out, a])
        return out

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != self.identity:
            x, k = int(self.table[x, a]), k + 1
        return k

    @cached_property
    def generators(self) -> list[int]:
        """Generators: unit vectors for cyclic products, else a greedy generating set."""
        if self.coords is not None:
            out = []
            for f in range(len(self.factor_orders)):
                e = np.zeros(len(self.factor_orders), dtype=np.int64)
                e[f] = 1
                out.append(int(np.nonzero((self.coords == e).all(axis=1))[0][0]))
            return out
        gens: list[int] = []
        span = {self.identity}
        for a in range(self.order):
            if a not in span:
                gens.append(a)
                span = set(self.closure(gens))
        return gens

    def closure(self, elements) -> list[int]:
        seen = {self.identity}
        frontier = [self.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for g in elements:
                    y = int(self.table[x, g])
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return sorted(seen)

    def subgroup(self, elements) -> tuple["FiniteGroup", np.ndarray]:
        """The subgroup on ``elements`` (must be closed) and its embedding."""
        elems = np.array(sorted(set(int(e) for e in elements)), dtype=np.int64)
        pos = {int(e): k for k, e in enumerate(elems)}
        try:
            sub = [[pos[int(self.table[a, b])] for b in elems] for a in elems]
        except KeyError as exc:
            raise ValueError("elements are not closed under multiplication") from exc
        labels = [self.labels[e] for e in elems]
        return FiniteGroup(sub, labels, name=f"sub({self.name})"), elems

    def to_json(self) -> dict:
        return {"order": self.order, "table": self.table.tolist(), "labels": self.labels}

    @classmethod
    def from_json(cls, data: dict) -> "FiniteGroup":
        return cls(data["table"], data.get("labels"), name=data.get("name", "group"))

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name}, order={self.order})"


def cyclic_product(*orders: int, name: str | None = None) -> FiniteGroup:
    coords = np.array(list(itertools.product(*[range(n) for n in orders])), dtype=np.int64)
    mods = np.array(orders, dtype=np.int64)
    index = {tuple(c): k for k, c in enumerate(coords.tolist())}
    n = len(coords)
    table = np.empty((n, n), dtype=np.int64)
    for a in range(n):
        s = (coords[a][None, :] + coords) % mods
        table[a] = [index[tuple(r)] for r in s.tolist()]
    labels = ["(" + ",".join(map(str, c)) + ")" if len(orders) > 1 else str(c[0]) for c in coords.tolist()]
    return FiniteGroup(table, labels, coords, orders, name or "x".join(f"c{o}" for o in orders))


def builtin_group(name: str) -> FiniteGroup:
    key = name.lower()
    orders = {"c3": (3,), "c9": (9,), "c27": (27,), "c3xc3": (3, 3), "c9xc3": (9, 3), "c9xc9": (9, 9)}
    if key not in orders:
        raise KeyError(f"unknown group {name!r}; builtins are {', '.join(BUILTINS)}")
    return cyclic_product(*orders[key], name=key)


@dataclass(frozen=True)
class Character:
    """A homomorphism to Z/3 with an optional homomorphic lift to Z/9."""

    group: FiniteGroup
    values: np.ndarray
    lift: np.ndarray | None = None

    def __add__(self, other: "Character") -> "Character":
        lift = None if self.lift is None or other.lift is None else (self.lift + other.lift) % 9
        return Character(self.group, (self.values + other.values) % 3, lift)

    def __neg__(self) -> "Character":
        return Character(self.group, (-self.values) % 3, None if self.lift is None else (-self.lift) % 9)

    def __sub__(self, other: "Character") -> "Character":
        return self + (-other)

    def scale(self, k: int) -> "Character":
        return Character(self.group, (k * self.values) % 3, None if self.lift is None else (k * self.lift) % 9)

    def is_zero(self) -> bool:
        return not self.values.any()

    def kernel(self) -> list[int]:
        return [int(g) for g in np.nonzero(self.values == 0)[0]]

    def lift_kernel(self) -> list[int]:
        if self.lift is None:
            raise ValueError("character has no lift")
        return [int(g) for g in np.nonzero(self.lift == 0)[0]]


def _extend(group: FiniteGroup, images: dict[int, int], modulus: int) -> np.ndarray | None:
    """Extend generator images to a homomorphism into Z/modulus, or None."""
    vals = np.full(group.order, -1, dtype=np.int64)
    vals[group.identity] = 0
    frontier = [group.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for g, v in images.items():
                y = int(group.table[x, g])
                w = (vals[x] + v) % modulus
                if vals[y] < 0:
                    vals[y] = w
                    nxt.append(y)
        frontier = nxt
    if (vals < 0).any():
        raise ValueError("generator images do not cover the group")
    a = np.arange(group.order)
    if not np.array_equal(vals[group.table], (vals[a][:, None] + vals[a][None, :]) % modulus):
        return None
    return vals


def make_character(group: FiniteGroup, images, lift_images=None) -> Character:
    """Character with the given generator images (mod 3).

    A Z/9 lift is searched over all lifts of the images (or taken from
    ``lift_images``); it is absent when no homomorphic lift exists.
    """
    gens = group.generators
    images = [int(v) % 3 for v in images]
    if len(images) != len(gens):
        raise ValueError(f"need {len(gens)} generator images, got {len(images)}")
    vals = _extend(group, dict(zip(gens, images)), 3)
    if vals is None:
        raise ValueError("generator images do not define a homomorphism to Z/3")
    lift = None
    candidates = [lift_images] if lift_images is not None else itertools.product(
        *[[v + 3 * k for k in range(3)] for v in images])
    for cand in candidates:
        cand = [int(c) % 9 for c in cand]
        if any(c % 3 != v for c, v in zip(cand, images)):
            continue
        lv = _extend(group, dict(zip(gens, cand)), 9)
        if lv is not None:
            lift = lv
            break
    return Character(group, vals, lift)


def character_from_values(group: FiniteGroup, values, lift=None) -> Character:
    vals = np.asarray(values, dtype=np.int64) % 3
    a = np.arange(group.order)
    if not np.array_equal(vals[group.table], (vals[a][:, None] + vals[a][None, :]) % 3):
        raise ValueError("values do not define a homomorphism to Z/3")
    if lift is not None:
        lift = np.asarray(lift, dtype=np.int64) % 9
        if not np.array_equal(lift[group.table], (lift[a][:, None] + lift[a][None, :]) % 9):
            raise ValueError("lift is not a homomorphism to Z/9")
        if not np.array_equal(lift % 3, vals):
            raise ValueError("lift does not reduce to the character")
    return Character(group, vals, lift)


def default_characters(group: FiniteGroup) -> tuple[Character, Character]:
    """The pair of characters defining the map to (Z/3)^2 used by builtins.

    For two-factor builtins this is the pair of coordinate projections mod 3.
    For cyclic groups there is no surjection; both characters are the
    projection mod 3 (so the pair is dependent).
    """
    k = len(group.generators)
    if k == 1:
        c = make_character(group, [1])
        return c, c
    if k == 2:
        return make_character(group, [1, 0]), make_character(group, [0, 1])
    raise ValueError("default characters need a one- or two-generator group")


@dataclass(frozen=True)
class ScalarFunction:
    """Values g -> Z/modulus, one per group element."""

    values: np.ndarray
    modulus: int


def require_lift(theta: Character) -> np.ndarray:
    if theta.lift is None:
        raise ValueError("character has no homomorphic lift to Z/9")
    return theta.lift


def default_sigma(theta: Character) -> int:
    """Smallest element with lift value 1; its coset generates G/ker of the lift."""
    lift = require_lift(theta)
    hits = np.nonzero(lift == 1)[0]
    if not len(hits):
        raise ValueError("lift is not surjective onto Z/9")
    return int(hits[0])


def s_theta(theta: Character, sigma: int | None = None) -> ScalarFunction:
    """The carry function: s(sigma^k h) = floor(k/3) mod 3 with k in 0..8.

    For a zero character the lift may still be nonzero (values in 3Z/9);
    then s = lift/3, which is again a homomorphism.
    """
    lift = require_lift(theta)
    if theta.is_zero():
        return ScalarFunction((lift // 3) % 3, 3)
    if sigma is None:
        sigma = default_sigma(theta)
    unit = int(lift[sigma])
    if unit % 3 == 0:
        raise ValueError(f"element {sigma} does not generate the quotient by ker of the lift")
    k = (lift * pow(unit, -1, 9)) % 9
    return ScalarFunction((k // 3) % 3, 3)


def hat_and_lambda(theta: Character) -> dict[str, ScalarFunction]:
    """The scalar-function family attached to a character.

    Keys: ``theta`` (Z/3), ``lambda2`` (Z/3), and when a lift exists
    ``lift``, ``hat``, ``lambda2_hat``, ``lambda2_lift``, ``s``, ``s_hat``
    (the Z/9-valued ones are read with representatives in {0, 1, 2} where hatted).
    """
    out = {
        "theta": ScalarFunction(theta.values.copy(), 3),
        "lambda2": ScalarFunction(lambda2(theta.values, 3), 3),
        "hat": ScalarFunction(hat(theta.values), 9),
        "lambda2_hat": ScalarFunction(lambda2(hat(theta.values), 9), 9),
    }
    if theta.lift is not None:
        s = s_theta(theta)
        out.update({
            "lift": ScalarFunction(theta.lift.copy(), 9),
            "lambda2_lift": ScalarFunction(lambda2(theta.lift, 9), 9),
            "s": s,
            "s_hat": ScalarFunction(hat(s.values), 9),
        })
    return out


def frobenius_hat(theta: Character) -> np.ndarray:
    """Independent route to the hat-lift: cube of the Z/9 lift plus 3*binom(theta, 2)."""
    lift = require_lift(theta)
    return (lift ** 3 + 3 * lambda2(theta.values, 3)) % 9
