import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prismcoh.m4_structure import (
    build_catalog, cross_validate_p3, pi4, relations_p3, verify_basis, verify_image_sublattices,
    verify_pi4_sequence,
)
from prismcoh.prism import PrismContext


def _labels(rep, status):
    return [it.label for it in rep.items if it.status == status]


@pytest.mark.parametrize("p", [3, 5, 7])
def test_adapted_basis(p):
    rep = verify_basis(build_catalog(p))
    assert rep.ok, rep.to_text()


def test_closed_form_basis_for_three():
    rep = verify_basis(build_catalog(3, "p3"))
    assert rep.ok, rep.to_text()
    assert cross_validate_p3().ok


@pytest.mark.parametrize("p", [3, 5, 7])
@pytest.mark.parametrize("reduce_mod_p", [False, True])
def test_pi4_sequence(p, reduce_mod_p):
    rep = verify_pi4_sequence(p, p if reduce_mod_p else 0)
    assert rep.ok, rep.to_text()


@pytest.mark.parametrize("p", [3, 5])
def test_image_sublattices_literal_sign(p):
    # h1 sends both listed preimages to -TG; the generation statement holds
    rep = verify_image_sublattices(p)
    assert _labels(rep, "fail") == ["h1 of the first two preimages (-T2, TG), (-T1, TG) is TG"]
    assert rep.failures()[0].counterexample == {"values": [-1, -1]}
    assert "h1 of the first two preimages generates Z*TG" in _labels(rep, "pass")


def test_relations_for_three():
    rep = relations_p3()
    failed = _labels(rep, "fail")
    assert len(failed) == 3 and all("(a1 + a2)" in f for f in failed)
    assert any("(t1 a1 + t2 a2)" in it for it in _labels(rep, "pass"))


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([3, 5]), st.data())
def test_pi4_kills_image_and_is_invariant(p, data):
    ctx = PrismContext(p)
    v = np.array(data.draw(st.lists(st.integers(-9, 9), min_size=ctx.dims[1], max_size=ctx.dims[1])))
    assert pi4(ctx, ctx.element(3, ctx.d2 @ v)) == 0
    w = np.array(data.draw(st.lists(st.integers(-9, 9), min_size=ctx.dims[3], max_size=ctx.dims[3])))
    for i, j in ((1, 0), (0, 1)):
        assert pi4(ctx, ctx.m4(ctx.action(4, i, j) @ w)) == pi4(ctx, ctx.m4(w))
