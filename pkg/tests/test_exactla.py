from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from jlcalc.exactla import (
    IntMatrix,
    PresentedModule,
    integer_kernel,
    presented_map_kernel,
    rational_nullspace,
    rational_rank,
    rational_solve,
    rref,
    smith_normal_form,
)

small = st.integers(-6, 6)


@st.composite
def matrices(draw, max_dim=4):
    m = draw(st.integers(1, max_dim))
    n = draw(st.integers(1, max_dim))
    return IntMatrix.from_rows([[draw(small) for _ in range(n)] for _ in range(m)], n)


def det(M: IntMatrix) -> int:
    return int(sympy.Matrix(M.to_rows()).det())


def test_snf_identity_and_zero():
    I = IntMatrix.identity(2)
    assert smith_normal_form(I).S == I
    Z = IntMatrix.zeros(2, 3)
    assert smith_normal_form(Z).S == Z


def test_snf_diag_2_3():
    d = smith_normal_form(IntMatrix.from_rows([[2, 0], [0, 3]]))
    assert d.diagonal == [1, 6]


@given(matrices())
def test_snf_decomposition(A):
    d = smith_normal_form(A)
    assert d.U @ A @ d.V == d.S
    assert abs(det(d.U)) == 1 and abs(det(d.V)) == 1
    for i in range(d.S.rows):
        for j in range(d.S.cols):
            if i != j:
                assert d.S[i, j] == 0
    f = d.invariant_factors
    assert all(x > 0 for x in f)
    assert all(b % a == 0 for a, b in zip(f, f[1:]))


@given(matrices())
def test_snf_matches_sympy(A):
    ours = [x for x in smith_normal_form(A).diagonal if x]
    ref = sympy_snf(sympy.Matrix(A.to_rows()), domain=sympy.ZZ)
    theirs = [abs(int(ref[i, i])) for i in range(min(ref.shape)) if ref[i, i]]
    assert sorted(ours) == sorted(theirs)


@given(matrices())
def test_rank_is_number_of_invariant_factors(A):
    assert rational_rank(A) == len(smith_normal_form(A).invariant_factors)
    assert rational_rank(A) == sympy.Matrix(A.to_rows()).rank()


def test_integer_kernel_examples():
    K = integer_kernel(IntMatrix.from_rows([[1, 1]]))
    assert K.columns() in ([[1, -1]], [[-1, 1]])
    assert integer_kernel(IntMatrix.identity(3)).cols == 0
    # primitive generator, up to sign
    K = integer_kernel(IntMatrix.from_rows([[2, 4]]))
    assert K.columns() in ([[2, -1]], [[-2, 1]])


def test_integer_kernel_primitive_by_enumeration():
    A = IntMatrix.from_rows([[2, 4]])
    (k,) = integer_kernel(A).columns()
    small_vectors = [(x, y) for x in range(-5, 6) for y in range(-5, 6) if (x, y) != (0, 0) and 2 * x + 4 * y == 0]
    # every kernel vector is an integer multiple of the basis vector
    for v in small_vectors:
        q = Fraction(v[0], k[0])
        assert q.denominator == 1 and v[1] == q * k[1]


@given(matrices())
def test_integer_kernel_properties(A):
    K = integer_kernel(A)
    assert (A @ K).is_zero() if K.cols else True
    assert rational_rank(K) == K.cols if K.cols else True
    assert K.cols == A.cols - rational_rank(A)


@given(matrices())
def test_kernel_is_saturated(A):
    """x in Q-span of the kernel and integral implies x in the Z-span."""
    K = integer_kernel(A)
    if not K.cols:
        return
    d = smith_normal_form(K)
    assert all(x == 1 for x in d.invariant_factors)


def test_presented_map_kernel_examples():
    Z1 = PresentedModule(1)
    zero_map = IntMatrix.zeros(1, 1)
    assert presented_map_kernel(zero_map, Z1, Z1).free_rank == 1
    ker = presented_map_kernel(IntMatrix.identity(2), PresentedModule(2), PresentedModule(2))
    assert ker.free_rank == 0 and ker.torsion == []
    twice = IntMatrix.from_rows([[2]])
    ker = presented_map_kernel(twice, Z1, Z1)
    assert ker.free_rank == 0 and ker.torsion == []
    coker = PresentedModule(1, twice)
    assert coker.free_rank == 0 and coker.torsion == [2]


def test_presented_map_kernel_with_torsion():
    # Z/4 -> Z/2 reduction mod 2 has kernel 2Z/4Z = Z/2
    src = PresentedModule(1, IntMatrix.from_rows([[4]]))
    tgt = PresentedModule(1, IntMatrix.from_rows([[2]]))
    ker = presented_map_kernel(IntMatrix.from_rows([[1]]), src, tgt)
    assert ker.free_rank == 0 and ker.torsion == [2]


@given(matrices())
def test_rational_nullspace_and_solve(A):
    rows = A.to_rows()
    for v in rational_nullspace(rows, A.cols):
        assert all(sum(Fraction(a) * x for a, x in zip(r, v)) == 0 for r in rows)
    x = [Fraction(i + 1, 2) for i in range(A.cols)]
    b = [sum(a * y for a, y in zip(r, x)) for r in rows]
    sol = rational_solve(rows, b)
    assert sol is not None
    assert [sum(a * y for a, y in zip(r, sol)) for r in rows] == b


def test_rref_pivots():
    R, piv = rref([[2, 4], [1, 2]], 2)
    assert piv == [0] and R[0] == [1, 2]


def test_json_round_trip():
    A = IntMatrix.from_rows([[10 ** 30, -1], [0, 7]])
    assert IntMatrix.from_json(A.to_json()) == A


def test_ill_defined_map_rejected():
    from jlcalc.exactla import IllDefinedMap
    src = PresentedModule(1, IntMatrix.from_rows([[2]]))
    with pytest.raises(IllDefinedMap):
        presented_map_kernel(IntMatrix.from_rows([[1]]), src, PresentedModule(1))
