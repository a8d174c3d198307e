from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prismcoh import cochain_calculus as cc
from prismcoh import cohomology as co
from prismcoh.finite_group import builtin_group, default_characters


@pytest.fixture(scope="module")
def c3xc3():
    g = builtin_group("c3xc3")
    return (g, *default_characters(g))


@pytest.mark.parametrize("name,rank", [("c3", 1), ("c9", 1), ("c27", 1), ("c3xc3", 2), ("c9xc3", 2), ("c9xc9", 2)])
def test_three_rank(name, rank):
    assert co.three_rank(builtin_group(name)) == rank


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 4), st.integers(0, 8))
def test_elementary_abelian_dimension_is_binomial(r, n):
    want = (1 if n == 0 else 0) if r == 0 else comb(n + r - 1, r - 1)
    assert co.elementary_abelian_dimension(r, n) == want


@pytest.mark.parametrize("name,degrees", [("c3", 4), ("c9", 4), ("c3xc3", 3)])
def test_trivial_coefficients_match_closed_form(name, degrees):
    g = builtin_group(name)
    mod = cc.trivial_module(g, 3)
    r = co.three_rank(g)
    for n in range(degrees):
        assert co.cohomology(g, mod, n).dimension == co.elementary_abelian_dimension(r, n)


def test_degree_cap():
    g = builtin_group("c9xc9")
    with pytest.raises(ValueError):
        co.cohomology(g, cc.trivial_module(g, 3), 2)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["c3", "c9", "c3xc3"]), st.integers(0, 2), st.integers(0, 2 ** 32 - 1))
def test_class_coordinates_round_trip(name, n, seed):
    g = builtin_group(name)
    c1, c2 = default_characters(g)
    space = co.cohomology(g, cc.group_ring_module(g, c1, c2, 3), n)
    rng = np.random.default_rng(seed)
    coords = rng.integers(0, 3, size=space.dimension)
    z = space.representative(coords)
    assert cc.delta(z).is_zero()
    assert np.array_equal(space.coordinates(z), coords)
    if n:
        # adding a coboundary leaves the class unchanged
        b = cc.delta(cc.Cochain.random(space.module, n - 1, rng))
        assert space.same_class(z, z + b)


@pytest.mark.parametrize("index", [1, 2, 3])
def test_coinduced_prediction(c3xc3, index):
    g, c1, c2 = c3xc3
    mod = cc.prism_module(g, c1, c2, index, 3)
    for n in range(3):
        assert co.cohomology(g, mod, n).dimension == co.shapiro_prediction(g, c1, c2, index, n)


def test_cross_check_on_c9xc3():
    g = builtin_group("c9xc3")
    c1, c2 = default_characters(g)
    rep = co.shapiro_cross_check(g, c1, c2, n_max=1)
    assert rep.ok, rep.to_text()


@pytest.mark.parametrize("name,which", [("c3xc3", 0), ("c9", 0), ("c9xc3", 0), ("c9xc3", 1)])
def test_explicit_shapiro_maps(name, which):
    # c9 and the first c9xc3 character have gamma^3 != 1 (non-split kernel)
    g = builtin_group(name)
    rep = co.verify_shapiro(g, default_characters(g)[which], samples=8, seed=1)
    assert rep.ok, rep.to_text()


def test_shapiro_needs_a_nontrivial_character(c3xc3):
    g, c1, _ = c3xc3
    with pytest.raises(ValueError):
        co.shapiro_data(g, c1 - c1)


@pytest.mark.parametrize("name", ["c3xc3", "c9"])
def test_bockstein_suite(name):
    rep = co.verify_bockstein(samples=8, seed=0, group_name=name)
    assert rep.ok, rep.to_text()


def test_bockstein_detects_liftable_characters():
    # the identity character of C3 does not lift to Z/9, that of C9 does
    for name, nonzero in (("c3", True), ("c9", False)):
        g = builtin_group(name)
        z = cc.char(default_characters(g)[0])
        res = co.bockstein(z)
        assert res.lift_independent
        assert (not cc.is_coboundary(res.value)) is nonzero


def test_dec_subgroup(c3xc3):
    g, c1, c2 = c3xc3
    dec = co.dec_subgroup(g, 2, c1, c2)
    # chi1 chi2 spans: the squares vanish in odd characteristic
    assert dec.dimension == 1
    assert co.dec_in_restriction_kernel(dec, c1, c2)
    with pytest.raises(ValueError):
        co.dec_subgroup(g, 2, c1, c1)


def test_obstruction_spaces_structure(c3xc3):
    g, c1, c2 = c3xc3
    obs = co.obstruction_spaces(g, 2, c1, c2)
    d = obs.dims()
    assert d["N3"] <= d["N3+N4"] <= d["X"] <= d["H"]
    assert d["O"] == d["X"] - d["N3+N4"]
    rep = co.verify_obstruction(g, c1, c2, n=2, samples=5)
    assert rep.ok, rep.to_text()
    with pytest.raises(ValueError):
        co.obstruction_spaces(g, 1, c1, c2)


def test_norm_lift_items_are_report_only_without_a_lift(c3xc3):
    g, c1, c2 = c3xc3
    rep = co.verify_obstruction(g, c1, c2, n=2, samples=2)
    lifts = [it for it in rep.items if it.label.startswith("norm lift")]
    assert len(lifts) == 4 and all(it.status == "report-only" for it in lifts)


def test_pi4_bar_rejects_non_cocycles(c3xc3):
    g, c1, c2 = c3xc3
    mods = cc.PrismModules(g, c1, c2)
    obs = co.obstruction_spaces(g, 2, c1, c2)
    rng = np.random.default_rng(0)
    c = cc.Cochain.random(mods.m3, 1, rng)
    if not cc.is_m4_cocycle(c, mods):
        with pytest.raises(ValueError):
            co.pi4_bar(c, mods, obs)


def test_kernel_contains_dec(c3xc3):
    g, c1, c2 = c3xc3
    out = co.kernel_mod_dec(g, c1, c2, 2)
    assert out["Dec_in_kernel"]
    assert out["kernel/Dec"] == out["kernel"] - out["Dec"]


def test_report_only_artifacts(c3xc3):
    g, c1, c2 = c3xc3
    for rep in (co.h3_bockstein_report(g, c1, c2, 1), co.six_term_report(g, c1, c2, 1)):
        assert rep.items and all(it.status == "report-only" for it in rep.items)
