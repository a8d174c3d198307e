import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prismcoh import cochain_calculus as cc
from prismcoh.finite_group import builtin_group, default_characters

SMALL = ("c3", "c9", "c3xc3")


def _modules(g):
    c1, c2 = default_characters(g)
    mods = [cc.trivial_module(g, 3), cc.trivial_module(g, 9), cc.cyclic_module(g, c1, 3),
            cc.group_ring_module(g, c1, c2, 3)]
    mods += [cc.prism_module(g, c1, c2, k, 3) for k in (2, 3, 4)]
    return mods


def _lifted(g):
    return next(c for c in default_characters(g) if c.lift is not None)


@pytest.mark.parametrize("name", SMALL)
def test_modules_are_representations(name):
    for mod in _modules(builtin_group(name)):
        mod.validate(samples=200)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(SMALL), st.integers(0, 6), st.integers(0, 1), st.integers(0, 2 ** 32 - 1))
def test_delta_squares_to_zero(name, which, degree, seed):
    g = builtin_group(name)
    mod = _modules(g)[which]
    f = cc.Cochain.random(mod, degree, np.random.default_rng(seed))
    assert cc.delta(cc.delta(f)).is_zero()


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(SMALL), st.integers(0, 6), st.integers(0, 2), st.integers(0, 2 ** 32 - 1))
def test_delta_matrix_matches_delta(name, which, degree, seed):
    g = builtin_group(name)
    mod = _modules(g)[which]
    if g.order ** (degree + 1) * mod.dim > 20000:
        return
    f = cc.Cochain.random(mod, degree, np.random.default_rng(seed))
    flat = (cc.delta_matrix(mod, degree) @ f.flat()) % mod.modulus
    assert np.array_equal(flat, cc.delta(f).flat() % mod.modulus)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(SMALL), st.integers(0, 1), st.integers(0, 1), st.integers(0, 2 ** 32 - 1))
def test_cup_leibniz_trivial_coefficients(name, p, q, seed):
    g = builtin_group(name)
    mod = cc.trivial_module(g, 9)
    rng = np.random.default_rng(seed)
    x, y = cc.Cochain.random(mod, p, rng), cc.Cochain.random(mod, q, rng)
    lhs = cc.delta(cc.cup(x, y))
    rhs = cc.cup(cc.delta(x), y) + (-1) ** p * cc.cup(x, cc.delta(y))
    assert lhs == rhs


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(SMALL), st.integers(0, 1), st.integers(0, 2 ** 32 - 1))
def test_separated_product_sign_rule(name, degree, seed):
    # delta(x*y') = (delta x)*y'' - x*(delta y)' for scalar x of degree 1, y with trivial action
    g = builtin_group(name)
    rng = np.random.default_rng(seed)
    x = cc.Cochain.random(cc.trivial_module(g, 3), 1, rng)
    y = cc.Cochain.random(cc.trivial_module(g, 3), degree, rng)
    lhs = cc.delta(cc.sep_product(x, y))
    rhs = cc.cup(cc.delta(x), y) - cc.sep_product(x, cc.delta(y))
    assert lhs == rhs


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(SMALL), st.integers(0, 2 ** 32 - 1))
def test_characters_are_cocycles(name, seed):
    g = builtin_group(name)
    for c in default_characters(g):
        assert cc.delta(cc.char(c)).is_zero()


def test_coboundary_detection():
    g = builtin_group("c3xc3")
    mod = cc.trivial_module(g, 3)
    f = cc.Cochain.random(mod, 1, np.random.default_rng(5))
    assert cc.is_coboundary(cc.delta(f))
    # a nonzero character is a cocycle that is not a coboundary
    assert not cc.is_coboundary(cc.char(default_characters(g)[0]))


@pytest.mark.parametrize("name", ["c9", "c9xc3", "c9xc9"])
def test_carry_identities(name):
    rep = cc.verify_carry_identities(_lifted(builtin_group(name)))
    failed = rep.failures()
    # only the unwrapped form of the carry-hat coboundary fails, at k + k' >= 9
    assert [it.label.startswith("(vi) d(s^)") for it in failed] == [True]
    assert all(a + b >= 9 for a, b in (m["args"] for m in failed[0].counterexample["mismatch"]))
    assert any("wrap term" in it.label and it.status == "pass" for it in rep.items)


def test_carry_counterexample_on_c9():
    rep = cc.verify_carry_identities(_lifted(builtin_group("c9")))
    first = rep.failures()[0].counterexample["mismatch"][0]
    assert first == {"args": [1, 8], "lhs": [2], "rhs": [8]}


def test_matrix_representation():
    assert cc.verify_matrix_rep().ok
    assert np.array_equal(cc.matrix_rep(0), np.eye(cc.matrix_rep(0).shape[0], dtype=np.int64))


@pytest.mark.parametrize("name", ["c9", "c9xc3"])
def test_packed_tau_cocycles(name):
    rep = cc.tau_module_checks(_lifted(builtin_group(name)), degree=1, samples=10, seed=3)
    assert rep.ok, rep.to_text()


def test_constructors_on_c9xc3():
    g = builtin_group("c9xc3")
    c1, c2 = default_characters(g)
    rep = cc.verify_constructors(g, c1, c2, samples=10, degree=1, seed=1)
    assert rep.ok, rep.to_text()


def test_eta_on_c3xc3_only_the_literal_dec_sign_fails():
    g = builtin_group("c3xc3")
    c1, c2 = default_characters(g)
    rep = cc.verify_eta(g, c1, c2, samples=10, degree=1, seed=2)
    assert [it.label for it in rep.failures()] == ["Dec-form input: eta = [i chi3' + j chi4']"]


def test_eta_sign_of_delta_a0_with_nonzero_chi():
    # with chi nonzero the residual-decomposition A0 has delta(A0) = -(2i+j) psi' chi''
    g = builtin_group("c9xc3")
    c1, c2 = default_characters(g)
    rep = cc.verify_eta(g, c1, c2, samples=4, degree=1, seed=0)
    status = {it.label: it.status for it in rep.items}
    assert status["delta(A0) = -(2i+j) psi' chi'' (sign of the residual decomposition)"] == "pass"
    assert status["delta(A0) = (2i+j) psi' chi''"] == "fail"
    assert status["eta = A0 + B0 is a cocycle"] == "pass"


def test_display_convention_is_opposite():
    g = builtin_group("c9")
    c1, c2 = default_characters(g)
    rep = cc.verify_display_sign(g, c1, c2, samples=4, degree=1, seed=0)
    status = {it.label: it.status for it in rep.items}
    assert status["A0 (residual decomposition) = -A0 (u-system display)"] == "pass"
    assert status["A0 (residual decomposition) = A0 (u-system display)"] == "fail"


def test_eta_class_is_independent_of_representative():
    g = builtin_group("c3xc3")
    c1, c2 = default_characters(g)
    mods = cc.PrismModules(g, c1, c2)
    rng = np.random.default_rng(11)
    u, v, chi = cc.random_m4_cocycle(mods, 1, rng)
    c = cc.assemble_c(u, v, chi, mods.m3)
    assert cc.is_m4_cocycle(c, mods)
    e1 = cc.eta_pipeline(u, v, chi, mods).eta
    e2 = cc.eta_direct(c, mods)
    assert cc.delta(e1).is_zero()
    assert cc.is_coboundary(e1 - e2)


def test_size_guard():
    g = builtin_group("c9xc9")
    with pytest.raises(ValueError):
        cc.delta(cc.Cochain.zero(cc.trivial_module(g, 3), 3))
