import numpy as np
import pytest
import scipy.sparse as sp
import sympy
from sympy.matrices.normalforms import smith_normal_form as sympy_snf
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from prismcoh.exact_linalg import (
    IntMatrix, Lattice, determinant, image_lattice, kernel_basis, kernel_mod_p2, lattice_intersection,
    membership, nullspace_mod_p, rank_mod_p, rref_mod_p, same_lattice, smith_normal_form, solve,
    solve_mod_p, solve_mod_p2, sparse_kernel, sparse_solve, sparse_solve_many,
)


def small_int_matrices(max_side=5, bound=6):
    return st.tuples(st.integers(1, max_side), st.integers(1, max_side)).flatmap(
        lambda s: arrays(np.int64, s, elements=st.integers(-bound, bound)))


def mod_p_matrices(p, max_rows=12, max_cols=12):
    return st.tuples(st.integers(1, max_rows), st.integers(1, max_cols)).flatmap(
        lambda s: arrays(np.int64, s, elements=st.integers(0, p - 1)))


def _unimodular(m):
    return abs(sympy.Matrix(m).det()) == 1


@settings(max_examples=60, deadline=None)
@given(small_int_matrices())
def test_snf_transforms_and_divisors(a):
    res = smith_normal_form(IntMatrix(a.tolist()))
    assert res.check(IntMatrix(a.tolist()))
    assert _unimodular(res.U) and _unimodular(res.V)
    divs = res.divisors
    assert all(d > 0 for d in divs)
    assert all(divs[k + 1] % divs[k] == 0 for k in range(len(divs) - 1))
    # sympy's SNF is an independent oracle for the invariant factors
    oracle = sympy_snf(sympy.Matrix(a), domain=sympy.ZZ)
    want = [abs(int(oracle[i, i])) for i in range(min(oracle.shape)) if oracle[i, i] != 0]
    assert divs == want
    assert res.rank == sympy.Matrix(a).rank()


def test_snf_known_example():
    res = smith_normal_form(IntMatrix([[2, 4, 4], [-6, 6, 12], [10, -4, -16]]))
    assert res.divisors == [2, 6, 12]


@settings(max_examples=40, deadline=None)
@given(small_int_matrices(max_side=4).filter(lambda a: a.shape[0] == a.shape[1]))
def test_determinant_matches_sympy(a):
    assert determinant(IntMatrix(a.tolist())) == sympy.Matrix(a).det()


@settings(max_examples=60, deadline=None)
@given(mod_p_matrices(3), st.sampled_from([3, 5, 7]))
def test_rref_engines_agree(a, p):
    a = a % p
    r1, piv1 = rref_mod_p(a, p, engine="numpy")
    r2, piv2 = rref_mod_p(a, p, engine="flint")
    assert piv1 == piv2
    assert np.array_equal(r1 % p, r2 % p)
    assert len(piv1) == rank_mod_p(a, p)


@settings(max_examples=60, deadline=None)
@given(mod_p_matrices(5), st.sampled_from([3, 5]))
def test_nullspace_is_kernel(a, p):
    a = a % p
    k = nullspace_mod_p(a, p)
    assert k.shape[1] == a.shape[1] - rank_mod_p(a, p)
    assert not ((a @ k) % p).any()


@settings(max_examples=40, deadline=None)
@given(mod_p_matrices(3), st.data())
def test_solve_mod_p_finds_consistent_systems(a, data):
    x = np.array(data.draw(st.lists(st.integers(0, 2), min_size=a.shape[1], max_size=a.shape[1])))
    b = (a @ x) % 3
    sol = solve_mod_p(a, b, 3)
    assert sol is not None and np.array_equal((a @ sol) % 3, b)


def test_solve_mod_p_reports_inconsistency():
    assert solve_mod_p(np.array([[1, 1], [1, 1]]), np.array([0, 1]), 3) is None


@settings(max_examples=30, deadline=None)
@given(mod_p_matrices(3, 20, 15))
def test_sparse_kernel_matches_dense(a):
    ker = sparse_kernel(sp.csr_matrix(a), 3, seed=1)
    assert ker.dim == a.shape[1] - rank_mod_p(a, 3)
    assert not ((a @ ker.basis) % 3).any()
    assert np.array_equal(ker.basis[ker.free], np.eye(ker.dim, dtype=np.int64))


@settings(max_examples=30, deadline=None)
@given(mod_p_matrices(3, 10, 8), st.data())
def test_sparse_solve_roundtrip(a, data):
    x = np.array(data.draw(st.lists(st.integers(0, 2), min_size=a.shape[1], max_size=a.shape[1])))
    b = (a @ x) % 3
    sol = sparse_solve(sp.csr_matrix(a), b, 3)
    assert sol is not None and np.array_equal((a @ sol) % 3, b)


def test_sparse_solve_many_detects_span():
    A = np.array([[1, 0], [0, 1], [0, 0]])
    Y = np.array([[1, 0], [2, 0], [0, 1]])
    S, _, _ = sparse_solve_many(sp.csr_matrix(A), Y, 3)
    assert S.contains(np.array([1, 0]))
    assert not S.contains(np.array([0, 1]))
    assert S.rank == 1


@settings(max_examples=30, deadline=None)
@given(mod_p_matrices(3, 8, 6), st.data())
def test_mod_p2_solve_and_kernel(a, data):
    a = a.astype(np.int64)
    x = np.array(data.draw(st.lists(st.integers(0, 8), min_size=a.shape[1], max_size=a.shape[1])))
    b = (a @ x) % 9
    sol = solve_mod_p2(sp.csr_matrix(a), b, 3)
    assert sol is not None and np.array_equal((a @ sol) % 9, b)
    K = kernel_mod_p2(sp.csr_matrix(a), 3)
    assert not ((a @ K) % 9).any()


def test_mod_p2_rejects_unsolvable():
    # 3x = 1 has no solution mod 9
    assert solve_mod_p2(sp.csr_matrix(np.array([[3]])), np.array([1]), 3) is None


@settings(max_examples=40, deadline=None)
@given(small_int_matrices(max_side=4))
def test_integer_kernel_and_solve(a):
    m = IntMatrix(a.tolist())
    for v in kernel_basis(m):
        assert not (a @ np.array(v)).any()
    x = np.arange(1, a.shape[1] + 1)
    sol = solve(m, (a @ x).tolist())
    assert sol is not None and np.array_equal(a @ np.array(sol), a @ x)


def test_solve_over_z_needs_integrality():
    assert solve(IntMatrix([[2]]), [1]) is None


def test_lattice_membership_and_intersection():
    a = Lattice.from_generators([[2, 0], [0, 3]], 2)
    b = Lattice.from_generators([[3, 0], [0, 2]], 2)
    both = lattice_intersection(a, b)
    assert same_lattice(both, Lattice.from_generators([[6, 0], [0, 6]], 2))
    assert membership(a, [4, 9]) and not membership(a, [1, 0])


def test_image_lattice_is_column_span():
    lat = image_lattice(IntMatrix([[1, 1], [0, 2]]))
    assert lat.contains([2, 2]) and lat.contains([1, 0]) and not lat.contains([0, 1])


def test_modular_lattice_size():
    lat = Lattice.from_generators([[3, 0]], 2, modulus=9)
    assert lat.size() == 3


def test_ragged_matrix_rejected():
    with pytest.raises(ValueError):
        IntMatrix([[1, 2], [3]])
