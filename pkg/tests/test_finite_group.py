import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prismcoh.finite_group import (
    BUILTINS, builtin_group, character_from_values, cyclic_product, default_characters, frobenius_hat,
    hat_and_lambda, lambda2, make_character, s_theta,
)


@pytest.mark.parametrize("name", BUILTINS)
def test_builtin_tables_are_groups(name):
    g = builtin_group(name)
    t = g.table
    a = np.arange(g.order)
    assert np.array_equal(t[t[a][:, :, None], a[None, None, :]], t[a[:, None, None], t[a][None, :, :]])
    assert all(sorted(row) == list(range(g.order)) for row in t.tolist())
    assert np.array_equal(t[g.identity], a)
    assert len(g.closure(g.generators)) == g.order


def test_unknown_group():
    with pytest.raises(KeyError):
        builtin_group("c4")


@pytest.mark.parametrize("name", BUILTINS)
def test_default_characters_are_homomorphisms(name):
    g = builtin_group(name)
    for c in default_characters(g):
        assert np.array_equal(c.values[g.table], (c.values[:, None] + c.values[None, :]) % 3)
        if c.lift is not None:
            assert np.array_equal(c.lift % 3, c.values)


def test_lifts_exist_only_with_order_nine_elements():
    assert all(c.lift is None for c in default_characters(builtin_group("c3xc3")))
    assert all(c.lift is not None for c in default_characters(builtin_group("c9xc9")))
    c1, c2 = default_characters(builtin_group("c9xc3"))
    assert c1.lift is not None and c2.lift is None


def test_character_validation():
    g = builtin_group("c3")
    with pytest.raises(ValueError):
        character_from_values(g, [0, 1, 1])
    with pytest.raises(ValueError):
        make_character(g, [1, 1])


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(["c9", "c27", "c9xc3", "c9xc9"]), st.data())
def test_hat_has_two_routes(name, data):
    g = builtin_group(name)
    images = data.draw(st.lists(st.integers(0, 2), min_size=len(g.generators), max_size=len(g.generators)))
    theta = make_character(g, images)
    if theta.lift is None:
        return
    fam = hat_and_lambda(theta)
    assert np.array_equal(fam["hat"].values, frobenius_hat(theta))


@settings(max_examples=50, deadline=None)
@given(st.integers(-50, 50), st.integers(-50, 50))
def test_binomial_part_additivity(x, y):
    # binom(x+y, 2) = binom(x, 2) + binom(y, 2) + xy
    assert lambda2(x + y, 9) == (lambda2(x, 9) + lambda2(y, 9) + x * y) % 9


def test_carry_on_c9():
    g = builtin_group("c9")
    theta = make_character(g, [1])
    assert s_theta(theta).values.tolist() == [0, 0, 0, 1, 1, 1, 2, 2, 2]


def test_character_arithmetic():
    g = builtin_group("c9xc3")
    c1, c2 = default_characters(g)
    assert (c1 - c1).is_zero()
    assert (c1 + c2).lift is None
    assert np.array_equal(c1.scale(2).values, (2 * c1.values) % 3)
    assert set(c1.kernel()) >= set(c1.lift_kernel())


def test_subgroup_and_json_round_trip():
    g = cyclic_product(3, 3)
    sub, emb = g.subgroup(g.closure([g.generators[0]]))
    assert sub.order == 3 and len(emb) == 3
    with pytest.raises(ValueError):
        g.subgroup([g.generators[0]])
    again = type(g).from_json(g.to_json())
    assert np.array_equal(again.table, g.table)
