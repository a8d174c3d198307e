import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prismcoh.prism import (
    PrismContext, explicit_pair_p3, kappa_residual, module_dims, solve_kappa, verify_exactness,
    verify_h2_congruences, verify_homotopy_prism, verify_kappa,
)

PRIMES = (3, 5, 7)


@pytest.fixture(scope="module", params=PRIMES)
def ctx(request):
    return PrismContext(request.param)


def test_true_ranks(ctx):
    p = ctx.p
    assert ctx.dims == (1, p * p + 1, 2 * p * p + 2 * p, p * p + 2 * p)
    assert module_dims(p) == ctx.dims


def test_composites_vanish(ctx):
    assert not (ctx.d2 @ ctx.d1).any()
    assert not (ctx.d3 @ ctx.d2).any()


def test_maps_are_equivariant(ctx):
    for k in (1, 2, 3):
        d = ctx.d_matrix(k)
        for i, j in ((1, 0), (0, 1)):
            assert np.array_equal(d @ ctx.action(k, i, j), ctx.action(k + 1, i, j) @ d)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(PRIMES), st.integers(1, 4), st.data())
def test_homotopy_on_random_vectors(p, k, data):
    # on M_k: h_k d_k + d_(k-1) h_(k-1) = p, the missing end terms being zero
    ctx = PrismContext(p)
    dim = ctx.dims[k - 1]
    v = np.array(data.draw(st.lists(st.integers(-20, 20), min_size=dim, max_size=dim)))
    lhs = np.zeros(dim, dtype=np.int64)
    if k <= 3:
        lhs += ctx.h_matrix(k) @ (ctx.d_matrix(k) @ v)
    if k >= 2:
        lhs += ctx.d_matrix(k - 1) @ (ctx.h_matrix(k - 1) @ v)
    assert np.array_equal(lhs, p * v)


@pytest.mark.parametrize("p", PRIMES)
def test_exactness_and_homotopy_reports(p):
    c = PrismContext(p)
    for m in (0, p, p * p):
        for rep in (verify_exactness(p, m, c), verify_homotopy_prism(p, m, c)):
            assert rep.ok, rep.to_text()


def test_quoted_ranks_are_reported_not_checked():
    rep = verify_exactness(3)
    notes = [it for it in rep.items if it.status == "report-only"]
    assert {n.detail["quoted"] for n in notes} == {21, 12}


@pytest.mark.parametrize("p", PRIMES)
def test_kappa_solver(p):
    kappa = solve_kappa(p)
    assert kappa_residual(p, kappa).is_zero()
    assert verify_kappa(p, kappa).ok


def test_explicit_pair():
    pair = explicit_pair_p3()
    assert kappa_residual(3, pair).is_zero()
    rep = verify_kappa(3, pair)
    assert rep.ok
    # the first-coefficient reading is recorded with its truth value only
    kappa1 = [it for it in rep.items if "first coefficient" in it.label]
    assert kappa1 and kappa1[0].status == "report-only" and kappa1[0].detail["holds"] is False


@pytest.mark.parametrize("p", PRIMES)
def test_h2_congruences(p):
    assert verify_h2_congruences(p).ok


def test_unsupported_prime():
    with pytest.raises(ValueError):
        PrismContext(4)
