"""Explicit structure of M4 = coker d2: an integral basis of M3 adapted to
the image of d2, the augmentation-type map pi4 onto Z*TG, and the
submodules generated by the classes of (1,0,0,0) and (0,1,0,0).

Vectors live in the M3 coordinates of ``prism``.  Elements of the image of
d2 are always produced by applying d2 to a recorded preimage, so their
membership is true by construction and the preimages can be inspected.

>>> cat = build_catalog(3)
>>> len(cat.complement()), len(cat.image())
(15, 9)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exact_linalg import (IntMatrix, Lattice, determinant, image_lattice, kernel_basis,
                           lattice_intersection, membership, same_lattice, smith_normal_form)
from .group_ring import GroupRingElement, special_elements
from .prism import PrismContext, PrismElement, d2_matrix, ideal_embedding, module_dims
from .report import VerificationReport

COMPLEMENT_GROUPS = ("A1", "A2", "A3")
IMAGE_GROUPS = ("D1", "D2", "D3", "D4", "D5", "D6")


def index_sets(p: int) -> dict[str, list[tuple[int, int]]]:
    """The exponent index sets used to pick monomial multiples."""
    return {
        "J1": [(0, l) for l in range(p)] + [(k, l) for k in (1, 2) for l in range(p - 1)],
        "J2": [(i, j) for i in range(p - 1) for j in range(p)] + [(p - 1, 0)],
        "J3": [(i, j) for i in range(p - 3) for j in range(p)],
        "J3'": [(i, j) for i in range(p - 3) for j in range(p - 1)],
    }


@dataclass
class BasisCatalog:
    """Named groups of M3 vectors; image groups also carry their M2 preimages."""

    p: int
    kind: str
    vectors: dict[str, list[np.ndarray]] = field(default_factory=dict)
    labels: dict[str, list[str]] = field(default_factory=dict)
    preimages: dict[str, list[np.ndarray]] = field(default_factory=dict)
    index_sets: dict[str, list[tuple[int, int]]] = field(default_factory=dict)

    def _collect(self, groups) -> list[np.ndarray]:
        return [v for g in groups if g in self.vectors for v in self.vectors[g]]

    def group(self, *groups: str) -> list[np.ndarray]:
        return self._collect(groups)

    def complement(self) -> list[np.ndarray]:
        return self._collect(sorted(k for k in self.vectors if k.startswith("A")))

    def image(self) -> list[np.ndarray]:
        return self._collect(sorted(k for k in self.vectors if k.startswith("D")))

    def complement_matrix(self) -> np.ndarray:
        return np.stack(self.complement(), axis=1)

    def image_matrix(self) -> np.ndarray:
        return np.stack(self.image(), axis=1)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "kind": self.kind,
            "groups": {g: [{"label": lab, "vector": v.tolist()}
                           for lab, v in zip(self.labels[g], vs)] for g, vs in self.vectors.items()},
            "index_sets": {k: [list(t) for t in v] for k, v in self.index_sets.items()},
        }


class _Builder:
    def __init__(self, p: int) -> None:
        self.p = p
        self.e = special_elements(p, 0)
        self.d2 = d2_matrix(p)
        self.n = p * p

    def m3(self, x1=None, x2=None, a3=None, a4=None) -> np.ndarray:
        p, n = self.p, self.n
        out = np.zeros(2 * n + 2 * p, dtype=np.int64)
        if x1 is not None:
            out[:n] = x1.coeffs
        if x2 is not None:
            out[n:2 * n] = x2.coeffs
        if a3 is not None:
            out[2 * n:2 * n + p] = a3
        if a4 is not None:
            out[2 * n + p:] = a4
        return out

    def m2(self, xi: GroupRingElement, k: int) -> np.ndarray:
        return np.concatenate([xi.coeffs, [k]])

    def image(self, cat: BasisCatalog, group: str, label: str, pre: np.ndarray) -> None:
        cat.vectors.setdefault(group, []).append(self.d2 @ pre)
        cat.labels.setdefault(group, []).append(label)
        cat.preimages.setdefault(group, []).append(pre)

    def comp(self, cat: BasisCatalog, group: str, label: str, v: np.ndarray) -> None:
        cat.vectors.setdefault(group, []).append(v)
        cat.labels.setdefault(group, []).append(label)


def build_catalog(p: int, kind: str = "general") -> BasisCatalog:
    """The adapted basis of M3.  ``kind="p3"`` builds the alternative
    fifteen-plus-nine catalog available for p = 3."""
    if kind == "p3":
        return _build_p3()
    if kind != "general":
        raise ValueError("kind must be 'general' or 'p3'")
    b = _Builder(p)
    e = b.e
    cat = BasisCatalog(p, "general", index_sets=index_sets(p))
    js = cat.index_sets
    for i, j in js["J2"]:
        b.comp(cat, "A1", f"(0, x1^{i} x2^{j}, 0, 0)", b.m3(x2=e.mono(i, j)))
    for k, l in js["J1"]:
        b.comp(cat, "A2", f"(x1^{k} x2^{l}, 0, 0, 0)", b.m3(x1=e.mono(k, l)))
    b.comp(cat, "A3", "(0, 0, 0, T_{p+1})", b.m3(a4=np.eye(p, dtype=np.int64)[0]))

    x2 = e.gen(2)
    for k in range(1, p):
        partial = sum((x2 ** r for r in range(1, k)), e.one())
        b.image(cat, "D1", f"d2(-(1 + ... + x2^{k - 1})T1, {k} TG)", b.m2(-(partial * e.trace(1)), k))
    t3tl = e.tm(3) * e.tm(p + 1)
    for i, j in js["J3"]:
        b.image(cat, "D2", f"d2(x1^{i} x2^{j} t3 t_(p+1), 0)", b.m2(e.mono(i, j) * t3tl, 0))
    b.image(cat, "D3", "d2(-T2, TG)", b.m2(-e.trace(2), 1))
    b.image(cat, "D3", "d2(-(x1 + 1)T2, 2TG)", b.m2(-((e.gen(1) + 1) * e.trace(2)), 2))
    g3, g4 = e.gen(3), e.mono(1, p - 1)
    for l in range(1, p):
        b.image(cat, "D4", f"d2((x1 x2)^{l} - 1, 0)", b.m2(g3 ** l - 1, 0))
    for l in range(1, p):
        b.image(cat, "D5", f"d2((x1 x2^-1)^{l} - 1, 0)", b.m2(g4 ** l - 1, 0))
    b.image(cat, "D6", "d2(1, 0)", b.m2(e.one(), 0))
    return cat


def _build_p3() -> BasisCatalog:
    p = 3
    b = _Builder(p)
    e = b.e
    cat = BasisCatalog(p, "p3")
    for i, j in [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0), (2, 1)]:
        b.comp(cat, "A1", f"x1^{i} x2^{j} (1, 0, 0, 0)", b.m3(x1=e.mono(i, j)))
    for i, j in [(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (0, 2), (1, 2)]:
        b.comp(cat, "A2", f"x1^{i} x2^{j} (0, 1, 0, 0)", b.m3(x2=e.mono(i, j)))
    b.comp(cat, "A3", "(0, 0, T3, 0)", b.m3(a3=np.eye(p, dtype=np.int64)[0]))
    T1, T2 = e.trace(1), e.trace(2)
    for c, name in ((e.one(), "1"), (e.gen(1), "x1")):
        b.image(cat, "D1", f"d2({name} T2, -TG)", b.m2(c * T2, -1))
    for c, name in ((e.one(), "1"), (e.gen(2), "x2")):
        b.image(cat, "D2", f"d2({name} T1, -TG)", b.m2(c * T1, -1))
    g3, g4 = e.gen(3), e.gen(4)
    for r in range(3):
        b.image(cat, "D3", f"d2(x3^{r}, 0)", b.m2(g3 ** r, 0))
    for r in (1, 2):
        b.image(cat, "D4", f"d2(x4^{r}, 0)", b.m2(g4 ** r, 0))
    return cat


def _unimodular(mat: np.ndarray) -> tuple[bool, int | None, list[int]]:
    snf = smith_normal_form(IntMatrix(mat.tolist()))
    det = determinant(IntMatrix(mat.tolist())) if mat.shape[0] <= 40 else None
    divisors = sorted(set(snf.divisors))
    ok = mat.shape[0] == mat.shape[1] == snf.rank and divisors in ([1], [])
    return ok, det, divisors


def verify_basis(catalog: BasisCatalog) -> VerificationReport:
    """Adapted-basis claims: unimodularity, image lattice, quotient basis."""
    p = catalog.p
    rep = VerificationReport(f"adapted basis p={p} ({catalog.kind})", meta={"p": p, "kind": catalog.kind})
    anchor = "adapted basis of M3"
    n1, n2, n3, n4 = module_dims(p)
    comp, img = catalog.complement(), catalog.image()
    rep.check("complement size = p^2 + 2p", anchor, len(comp) == n4, counterexample={"size": len(comp)})
    rep.check("image part size = p^2", anchor, len(img) == p * p, counterexample={"size": len(img)})
    rep.check("total size = rank M3", anchor, len(comp) + len(img) == n3,
              counterexample={"size": len(comp) + len(img), "rank": n3})
    if catalog.kind == "general":
        js = catalog.index_sets
        rep.check("|J2| + |J1| = p^2 + 2p - 1", "index-set counts",
                  len(js["J2"]) + len(js["J1"]) == p * p + 2 * p - 1,
                  counterexample={"J1": len(js["J1"]), "J2": len(js["J2"])})
    change = np.hstack([catalog.complement_matrix(), catalog.image_matrix()])
    ok, det, divisors = _unimodular(change)
    rep.check("change of basis is unimodular (SNF divisors all 1)", anchor, ok,
              counterexample={"divisors": divisors}, detail={"divisors": divisors})
    if det is not None:
        rep.check("change-of-basis determinant = +-1", anchor, abs(det) == 1,
                  counterexample={"determinant": det}, detail={"determinant": det})
    d2 = d2_matrix(p)
    im = image_lattice(IntMatrix(d2.tolist()))
    bad = [catalog_label(catalog, k) for k, v in enumerate(img) if not membership(im, v)]
    rep.check("each image-part vector lies in im d2", anchor, not bad, counterexample={"outside": bad[:3]})
    rep.check("lattice of image part = im d2 (two-sided)", anchor,
              same_lattice(Lattice.from_generators(img, n3), im))
    if catalog.kind == "general":
        ctx = PrismContext(p)
        lift_proj = ctx.d3 @ ctx.m4_lift
        rep.check("classes of the complement form a basis of M4", anchor,
                  np.array_equal(lift_proj, np.eye(n4, dtype=np.int64)) and not (ctx.d3 @ d2).any())
        _closed_forms(catalog, rep)
    return rep


def catalog_label(catalog: BasisCatalog, k: int) -> str:
    labels = [lab for g in sorted(x for x in catalog.vectors if x.startswith("D")) for lab in catalog.labels[g]]
    return labels[k]


def _closed_forms(catalog: BasisCatalog, rep: VerificationReport) -> None:
    """The displayed evaluations of d2 on the recorded preimages."""
    p = catalog.p
    b = _Builder(p)
    e = b.e
    anchor = "displayed images of d2"
    x1, x2 = e.gen(1), e.gen(2)
    want = {
        "D1": [b.m3(x2=(x2 ** k - 1) * e.trace(1)) for k in range(1, p)],
        "D3": [b.m3(x1=(x1 - 1) * e.trace(2)), b.m3(x1=(x1 * x1 - 1) * e.trace(2))],
        "D6": [b.m3(x1=-e.tm(1), x2=-e.tm(2), a3=np.eye(p, dtype=np.int64)[0],
                    a4=np.eye(p, dtype=np.int64)[0])],
    }
    t3tl = e.tm(3) * e.tm(p + 1)
    want["D2"] = [b.m3(x1=-(e.mono(i, j) * e.tm(1) * t3tl), x2=-(e.mono(i, j) * e.tm(2) * t3tl))
                  for i, j in catalog.index_sets["J3"]]
    for g, vs in want.items():
        got = catalog.vectors.get(g, [])
        ok = len(got) == len(vs) and all(np.array_equal(a, w) for a, w in zip(got, vs))
        rep.check(f"{g} closed form", anchor, ok, counterexample={"group": g})
    # D4/D5: the ideal slot is +eta*T_k (the first two slots carry the minus sign)
    _, rows4 = ideal_embedding(p, p + 1)
    _, rows3 = ideal_embedding(p, 3)
    g3, g4 = e.gen(3), e.mono(1, p - 1)
    ok4 = all(np.array_equal(v[2 * p * p + p:], ((g3 ** l - 1) * e.trace(p + 1)).coeffs[rows4])
              for l, v in zip(range(1, p), catalog.vectors["D4"]))
    ok5 = all(np.array_equal(v[2 * p * p:2 * p * p + p], ((g4 ** l - 1) * e.trace(3)).coeffs[rows3])
              for l, v in zip(range(1, p), catalog.vectors["D5"]))
    rep.check("D4 ideal slot = ((x1 x2)^l - 1) T_{p+1}", anchor, ok4)
    rep.check("D5 ideal slot = ((x1 x2^-1)^l - 1) T3", anchor, ok5)


def cross_validate_p3() -> VerificationReport:
    """The general and the p = 3 catalogs generate the same lattices."""
    gen, alt = build_catalog(3), build_catalog(3, "p3")
    rep = VerificationReport("adapted basis cross-check p=3")
    anchor = "two adapted bases for p = 3"
    n3 = module_dims(3)[2]
    rep.check("image parts generate the same lattice", anchor,
              same_lattice(Lattice.from_generators(gen.image(), n3), Lattice.from_generators(alt.image(), n3)))
    rep.check("both catalogs generate M3", anchor,
              same_lattice(Lattice.from_generators(gen.complement() + gen.image(), n3),
                           Lattice.from_generators(alt.complement() + alt.image(), n3)))
    return rep


# ---------------------------------------------------------------------------
# pi4

def cofactor(x: GroupRingElement, k: int, shift: GroupRingElement | None = None) -> GroupRingElement:
    """Some eta with eta*T_k = x (x must lie in Z[G]*T_k).

    The section takes coset coordinates; ``shift`` adds t_k*shift, another
    valid cofactor since t_k annihilates T_k.
    """
    p = x.p
    e = special_elements(p, x.modulus)
    if not (x * e.tm(k)).is_zero():
        raise ValueError(f"element is not a multiple of T{k}")
    _, rows = ideal_embedding(p, k)
    eta = GroupRingElement.zero(p, x.modulus)
    for c, a in enumerate(x.coeffs[rows]):
        eta = eta + (e.mono(0, c) if k == 1 else e.mono(c, 0)) * int(a)
    if shift is not None:
        eta = eta + e.tm(k) * shift
    return eta


def pi4_from_slots(x3: GroupRingElement, x4: GroupRingElement, shift3=None, shift4=None) -> int:
    """The TG-multiple eps(eta3) - eps(eta4) for slots x3 = eta3*T3, x4 = eta4*T_{p+1}."""
    p = x3.p
    val = cofactor(x3, 3, shift3).augmentation() - cofactor(x4, p + 1, shift4).augmentation()
    return val % x3.modulus if x3.modulus else val


def pi4_row(p: int) -> np.ndarray:
    """pi4 as a row vector on M3 coordinates (sum of slot-3 minus slot-4 coordinates)."""
    n = p * p
    row = np.zeros(2 * n + 2 * p, dtype=np.int64)
    row[2 * n:2 * n + p] = 1
    row[2 * n + p:] = -1
    return row


def pi4(ctx: PrismContext, x: PrismElement) -> int:
    """TG-multiple of pi4 on an M4 element (or on an M3 representative)."""
    if x.index == 4:
        rep = ctx.m4_lift @ x.coords
    elif x.index == 3:
        rep = x.coords
    else:
        raise ValueError("pi4 takes an element of M4 or a representative in M3")
    val = int(pi4_row(ctx.p) @ rep)
    return val % ctx.modulus if ctx.modulus else val


def _module_span(ctx: PrismContext, index: int, vec: np.ndarray) -> list[np.ndarray]:
    p = ctx.p
    return [ctx.action(index, i, j) @ vec for i in range(p) for j in range(p)]


def alpha_classes(ctx: PrismContext) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """M4 coordinates of the classes of (1,0,0,0), (0,1,0,0), (0,0,T3,0), (0,0,0,T_{p+1})."""
    p, n = ctx.p, ctx.p * ctx.p
    n3 = ctx.dims[2]
    reps = []
    for pos in (0, n, 2 * n, 2 * n + p):
        v = np.zeros(n3, dtype=np.int64)
        v[pos] = 1
        reps.append(ctx.d3 @ v)
    return tuple(reps)


def verify_pi4_sequence(p: int, modulus: int = 0) -> VerificationReport:
    """0 -> Z[G]a1 + Z[G]a2 -> M4 -> Z*TG -> 0 over Z or Z/m."""
    ctx = PrismContext(p)
    m = modulus
    rep = VerificationReport(f"pi4 sequence p={p} modulus={m}", meta={"p": p, "modulus": m})
    anchor = "short exact sequence through pi4"
    n4 = ctx.dims[3]
    a1, a2, b3, b4 = alpha_classes(ctx)
    row = pi4_row(p) @ ctx.m4_lift
    rep.check("pi4 vanishes on d2(M2)", anchor, not (pi4_row(p) @ ctx.d2).any())
    span1, span2 = _module_span(ctx, 4, a1), _module_span(ctx, 4, a2)
    sub = Lattice.from_generators(span1 + span2, n4, m)
    ker = Lattice.from_generators(kernel_basis(IntMatrix((row % m if m else row).reshape(1, -1).tolist(), m)),
                                  n4, m)
    rep.check("ker pi4 = Z[G]a1 + Z[G]a2", anchor, same_lattice(sub, ker))
    img = image_lattice(IntMatrix((row % m if m else row).reshape(1, -1).tolist(), m))
    rep.check("pi4 onto Z*TG", anchor, img.index() == 1, counterexample={"index": img.index()})
    rep.check("pi4 of the class of (0,0,T3,0) is TG", anchor, int(row @ b3) == 1,
              counterexample={"value": int(row @ b3)})
    inv = all(np.array_equal(row @ ctx.action(4, i, j), row) for i in range(p) for j in range(p))
    rep.check("pi4 is G-invariant", anchor, inv)
    if not m:
        r1 = Lattice.from_generators(span1, n4).rank
        r2 = Lattice.from_generators(span2, n4).rank
        rep.check("rank Z[G]a_i = p^2 - p + 1", "ranks in M4", r1 == r2 == p * p - p + 1,
                  counterexample={"ranks": [r1, r2]})
        rep.check("rank Z[G]a1 + Z[G]a2 = p^2 + 2p - 1", "ranks in M4", sub.rank == p * p + 2 * p - 1,
                  counterexample={"rank": sub.rank})
        direct = r1 + r2 == sub.rank
        if p == 3:
            rep.check("Z[G]a1 and Z[G]a2 intersect trivially", "ranks in M4", direct,
                      counterexample={"ranks": [r1, r2, sub.rank]})
        else:
            rep.note("Z[G]a1 and Z[G]a2 intersect trivially", "ranks in M4",
                     {"direct": direct, "ranks": [r1, r2, sub.rank]})
        rb = Lattice.from_generators(_module_span(ctx, 4, b4), n4).rank
        rep.check("rank Z[G]b4 = p", "ranks in M4", rb == p, counterexample={"rank": rb})
    return rep


# ---------------------------------------------------------------------------
# sublattices of the image of d2

def _lat(vectors, dim: int, m: int = 0) -> Lattice:
    return Lattice.from_generators([np.asarray(v) for v in vectors], dim, m)


def verify_image_sublattices(p: int) -> VerificationReport:
    """Descriptions of the parts of im d2 with vanishing ideal slots."""
    ctx = PrismContext(p)
    cat = build_catalog(p)
    b = _Builder(p)
    e = b.e
    n, n3 = p * p, ctx.dims[2]
    rep = VerificationReport(f"image sublattices p={p}", meta={"p": p})
    d2 = ctx.d2
    slot3 = slice(2 * n, 2 * n + p)
    slot4 = slice(2 * n + p, None)

    # mod p: image elements with zero third slot
    anchor = "image mod p with zero third slot"
    pre = kernel_basis(IntMatrix((d2[slot3] % p).tolist(), p))
    zero3 = [(d2 @ np.array(y)) % p for y in pre]
    d14 = _lat(cat.group("D1", "D2", "D3", "D4"), n3, p)
    bad = [k for k, v in enumerate(zero3) if not membership(d14, v)]
    rep.check("lies in span(D1..D4) mod p", anchor, not bad, counterexample={"generator": bad[:1]})
    g3 = e.gen(3)
    _, rows4 = ideal_embedding(p, p + 1)
    forms = [((g3 ** l - 1) * e.trace(p + 1)).coeffs[rows4] for l in range(1, p)]
    flat = Lattice.from_generators(forms, p, p)
    bad = [k for k, v in enumerate(zero3) if not membership(flat, v[slot4])]
    rep.check("fourth slot is a combination of ((x1 x2)^l - 1)T_{p+1}", anchor, not bad,
              counterexample={"generator": bad[:1]})

    anchor = "Z[G]-generators of span(D1..D4)"
    t1, t2, t3 = e.tm(1), e.tm(2), e.tm(3)
    gens = [b.m3(x1=t1 * e.trace(2)), b.m3(x2=e.trace(1) * t2),
            b.m3(x1=-(t1 * t3), x2=-(t2 * t3), a4=(t3 * e.trace(p + 1)).coeffs[rows4])]
    span = [ctx.action(3, i, j) @ g for g in gens for i in range(p) for j in range(p)]
    P = _lat(span, n3)
    d14z = _lat(cat.group("D1", "D2", "D3", "D4"), n3)
    rep.check("P = span(D1..D4)", anchor, same_lattice(P, d14z))
    im = image_lattice(IntMatrix(d2.tolist()))
    coord = [np.eye(n3, dtype=np.int64)[k] for k in range(n3) if not (slot3.start <= k < slot3.stop)]
    rep.check("P = im d2 intersected with (Z[G], Z[G], 0, Z[G]T_{p+1})", anchor,
              same_lattice(P, lattice_intersection(im, _lat(coord, n3))))

    anchor = "image with vanishing ideal slots"
    flat_part = _lat([np.eye(n3, dtype=np.int64)[k] for k in range(2 * n)], n3)
    inter = lattice_intersection(im, flat_part)
    d0 = cat.group("D1", "D2", "D3")
    rep.check("D1 + D2 + D3 is a basis of the intersection", anchor,
              same_lattice(_lat(d0, n3), inter) and len(d0) == inter.rank == (p - 1) ** 2,
              counterexample={"size": len(d0), "rank": inter.rank})
    alt, alt_pre = _alternative_basis(b, p)
    rep.check("alternative list has p^2 - 2p + 1 elements spanning the intersection", anchor,
              len(alt) == (p - 1) ** 2 and same_lattice(_lat(alt, n3), inter),
              counterexample={"size": len(alt)})
    disp = _alternative_display(b, p)
    rep.check("alternative list matches the displayed d2 values", anchor,
              all(np.array_equal(x, y) for x, y in zip(alt, disp)))
    h1 = ctx.h1
    vals = [int((h1 @ y)[0]) for y in alt_pre]
    rep.check("h1 of the first two preimages generates Z*TG", anchor,
              all(abs(v) == 1 for v in vals[:2]), counterexample={"values": vals[:2]})
    rep.check("h1 of the first two preimages (-T2, TG), (-T1, TG) is TG", anchor,
              vals[:2] == [1, 1], counterexample={"values": vals[:2]},
              detail={"values": vals[:2]})
    rep.check("h1 vanishes on the remaining preimages", anchor, not any(vals[2:]),
              counterexample={"values": vals[2:]})
    return rep


def _alternative_basis(b: _Builder, p: int) -> tuple[list[np.ndarray], list[np.ndarray]]:
    e = b.e
    t1, t2 = e.tm(1), e.tm(2)
    T1, T2 = e.trace(1), e.trace(2)
    pres = [b.m2(-T2, 1), b.m2(-T1, 1)]
    pres += [b.m2(-(t1 ** i * T2), 0) for i in range(1, p - 1)]
    pres += [b.m2(-(T1 * t2 ** j), 0) for j in range(1, p - 1)]
    t3tl = e.tm(3) * e.tm(p + 1)
    pres += [b.m2(-(e.mono(i, j) * t3tl), 0) for i, j in index_sets(p)["J3'"]]
    return [b.d2 @ y for y in pres], pres


def _alternative_display(b: _Builder, p: int) -> list[np.ndarray]:
    e = b.e
    t1, t2 = e.tm(1), e.tm(2)
    T1, T2 = e.trace(1), e.trace(2)
    out = [b.m3(x1=t1 * T2), b.m3(x2=T1 * t2)]
    out += [b.m3(x1=t1 ** (i + 1) * T2) for i in range(1, p - 1)]
    out += [b.m3(x2=T1 * t2 ** (j + 1)) for j in range(1, p - 1)]
    t3tl = e.tm(3) * e.tm(p + 1)
    out += [b.m3(x1=e.mono(i, j) * t1 * t3tl, x2=e.mono(i, j) * t2 * t3tl) for i, j in index_sets(p)["J3'"]]
    return out


# ---------------------------------------------------------------------------
# p = 3 relations in M4

def ring_action(ctx: PrismContext, index: int, r: GroupRingElement, vec: np.ndarray) -> np.ndarray:
    p = ctx.p
    out = np.zeros_like(vec)
    for idx in np.nonzero(r.coeffs)[0]:
        i, j = divmod(int(idx), p)
        out = out + int(r.coeffs[idx]) * (ctx.action(index, i, j) @ vec)
    return out


def relations_p3() -> VerificationReport:
    """Relations among the classes a1, a2, b3, b4 in M4 for p = 3."""
    ctx = PrismContext(3)
    e = special_elements(3, 0)
    a1, a2, b3, b4 = alpha_classes(ctx)
    act = lambda r, v: ring_action(ctx, 4, r, v)  # noqa: E731
    rep = VerificationReport("relations in M4 p=3")
    anchor = "relations in M4 (p = 3)"
    x1, x2 = e.gen(1), e.gen(2)
    t1, t2 = e.tm(1), e.tm(2)
    s = a1 + a2
    u = e.one() - x1 * x2 * x2

    def eq(label: str, lhs: np.ndarray, rhs: np.ndarray) -> None:
        d = lhs - rhs
        rep.check(label, anchor, not d.any(), counterexample={"difference": d.tolist()})

    eq("x1 x2 b3 = b3", act(x1 * x2, b3), b3)
    eq("(1 - x1 x2^2) b3 = (1 - x1 x2^2)(t1 a1 + t2 a2)", act(u, b3), act(u * t1, a1) + act(u * t2, a2))
    eq("(1 - x1 x2^2) b3 = (1 - x1 x2^2)(a1 + a2)", act(u, b3), act(u, s))
    eq("x2 b3 = b3 - (1 + x1 + x1 x2)(a1 + a2)", act(x2, b3), b3 - act(e.one() + x1 + x1 * x2, s))
    eq("x2^2 b3 = b3 - (x1 + x2 + x1 x2)(a1 + a2)", act(x2 * x2, b3), b3 - act(x1 + x2 + x1 * x2, s))
    ts = act(t1, a1) + act(t2, a2)
    eq("x2 b3 = b3 - (1 - x1 x2^2)(t1 a1 + t2 a2)", act(x2, b3), b3 - act(u, ts))
    eq("x2^2 b3 = b3 - (1 - x1 x2^2)(1 + x2)(t1 a1 + t2 a2)", act(x2 * x2, b3), b3 - act(u * (1 + x2), ts))
    eq("t1 T2 a1 = 0", act(t1 * e.trace(2), a1), 0 * a1)
    eq("T1 t2 a2 = 0", act(e.trace(1) * t2, a2), 0 * a2)
    eq("b3 + b4 = t1 a1 + t2 a2", b3 + b4, act(t1, a1) + act(t2, a2))
    n4 = ctx.dims[3]
    for name, v, want in (("b3", b3, 3), ("a1", a1, 7), ("a2", a2, 7)):
        r = Lattice.from_generators(_module_span(ctx, 4, v), n4).rank
        rep.check(f"rank Z[G]{name} = {want}", anchor, r == want, counterexample={"rank": r})
    return rep


def verify_all(p: int) -> VerificationReport:
    rep = VerificationReport(f"m4 structure p={p}", meta={"p": p})
    rep.extend(verify_basis(build_catalog(p)))
    for m in (0, p):
        rep.extend(verify_pi4_sequence(p, m))
    rep.extend(verify_image_sublattices(p))
    if p == 3:
        rep.extend(verify_basis(build_catalog(3, "p3")))
        rep.extend(cross_validate_p3())
        rep.extend(relations_p3())
    return rep
