import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from jlcalc.diagrams import Y, eta
from jlcalc.exactla import IntMatrix
from jlcalc.freegroup import Alphabet, Endo, Word, boundary_word, check_boundary_fixed, commutator
from jlcalc.freelie import DkElement, normalize_bracket
from jlcalc.johnson import (
    LongitudeDegreeTooLow,
    MilnorData,
    NotInJk,
    NotInJkL,
    SymplecticData,
    curve_homology,
    homology_matrix,
    iota_star_dk,
    jk_member,
    jkl_member,
    milnor_mu,
    mj_identify,
    random_additivity_pair,
    random_boundary_jkl,
    random_jk,
    random_jkl,
    ribbon_boundary,
    separating_twist,
    simple_curves,
    sp_classify,
    tau_k,
    tau_k_levine,
    twist,
)

S1, S2, S3 = (Alphabet.surface(g) for g in (1, 2, 3))


def nb(t, n):
    return normalize_bracket(t, n)


def block(P, Q, R):
    g = len(P)
    rows = [list(P[i]) + list(Q[i]) for i in range(g)] + [[0] * g + list(R[i]) for i in range(g)]
    return IntMatrix.from_rows(rows)


# -- symplectic classification

def test_sp_classify_examples():
    r = sp_classify(IntMatrix.identity(4))
    assert r.is_sp and r.is_lagrangian and r.is_strongly_lagrangian
    r = sp_classify(SymplecticData(2).J)
    assert r.is_sp and not r.is_lagrangian
    r = sp_classify(block([[1, 0], [0, 1]], [[1, 0], [0, 0]], [[1, 0], [0, 1]]))
    assert r.is_sp and r.is_lagrangian and r.is_strongly_lagrangian


@given(st.lists(st.integers(-2, 2), min_size=4, max_size=4), st.sampled_from([[[1, 0], [0, 1]], [[2, 1], [1, 1]], [[0, 1], [-1, 0]]]))
def test_strongly_lagrangian_forces_r_identity(q, P):
    Q = [[q[0], q[1]], [q[1], q[3]]]
    # R = (P^T)^-1 keeps the matrix symplectic when P^T Q is symmetric; pick Q symmetric with P = Id
    Pm = IntMatrix.from_rows(P)
    Pinv_T = {((1, 0), (0, 1)): [[1, 0], [0, 1]], ((2, 1), (1, 1)): [[1, -1], [-1, 2]],
              ((0, 1), (-1, 0)): [[0, 1], [-1, 0]]}[tuple(map(tuple, P))]
    M = block(P, (Pm @ IntMatrix.from_rows(Q)).to_rows(), Pinv_T)
    r = sp_classify(M)
    assert r.is_sp
    if r.is_strongly_lagrangian:
        assert r.R == IntMatrix.identity(2)
    assert r.is_strongly_lagrangian == (P == [[1, 0], [0, 1]])


# -- filtrations and homomorphisms

def h1(images, A=S1):
    return Endo.from_images(A, images)


def test_jk_member_examples():
    assert all(jk_member(Endo.identity(S2), k) for k in (1, 2, 3))
    h = h1({"b1": "a1 b1 a1^-1 b1^-1 b1"})
    assert jk_member(h, 1) and not jk_member(h, 2)


def test_jkl_member_examples():
    assert jkl_member(Endo.identity(S2), 3)
    meridian = h1({"b1": "b1 a1"})
    assert all(jkl_member(meridian, k) for k in (1, 2, 3, 4))
    h = h1({"a1": "a1 b1 b2 b1^-1 b2^-1"}, S2)
    assert jkl_member(h, 1) and not jkl_member(h, 2)


def test_tau_examples():
    assert tau_k(Endo.identity(S1), 1).is_zero()
    h = h1({"b1": "a1 b1 a1^-1 b1^-1 b1"})
    assert tau_k(h, 1) == DkElement.from_pairs(2, 1, [(0, nb((0, 1), 2))])
    h = h1({"a1": "a1 b1 a1^-1 b1^-1 a1"})
    assert tau_k(h, 1) == DkElement.from_pairs(2, 1, [(1, nb((0, 1), 2))]).scale(-1)
    with pytest.raises(NotInJk):
        tau_k(h, 2)


def test_tau_levine_examples():
    assert tau_k_levine(Endo.identity(S2), 1).is_zero()
    meridian = h1({"b1": "b1 a1"})
    assert all(tau_k_levine(meridian, k).is_zero() for k in (1, 2, 3))
    h = h1({"a1": "a1 b1 b2 b1^-1 b2^-1"}, S2)
    x = tau_k_levine(h, 1)
    assert x == DkElement.from_pairs(2, 1, [(0, nb((0, 1), 2))]).scale(-1)
    assert x.certified is None  # the boundary word is not fixed
    assert not x.in_dk()
    with pytest.raises(NotInJkL):
        tau_k_levine(h, 2)


def test_iota_star_examples():
    assert iota_star_dk(DkElement.from_pairs(2, 1, [(0, nb((0, 1), 2))])).is_zero()
    assert iota_star_dk(DkElement.from_pairs(2, 1, [(1, nb((0, 1), 2))])).is_zero()
    # eta(Y(b1,b2,b3)) on H of rank 6 maps to eta(Y(t1,t2,t3))
    y6 = eta(Y(3, 4, 5, 6))
    assert iota_star_dk(y6) == eta(Y(0, 1, 2, 3))
    assert not iota_star_dk(y6).is_zero()


def test_milnor_examples():
    D = Alphabet.disk(3)
    u = [Word.gen(D, i) for i in (1, 2, 3)]
    assert milnor_mu(MilnorData(3, tuple(Word.identity(D) for _ in range(3)), 2)).is_zero()
    lam = (commutator(u[1], u[2]), commutator(u[2], u[0]), commutator(u[0], u[1]))
    x = milnor_mu(MilnorData(3, lam, 2))
    assert x == DkElement.from_pairs(3, 1, [(0, nb((1, 2), 3)), (1, nb((2, 0), 3)), (2, nb((0, 1), 3))])
    assert x.certified
    D2 = Alphabet.disk(2)
    with pytest.raises(LongitudeDegreeTooLow):
        milnor_mu(MilnorData(2, (Word.gen(D2, 2), Word.identity(D2)), 2))


def test_mj_identify_examples():
    x = DkElement.from_pairs(2, 1, [(0, nb((0, 1), 2))])
    assert mj_identify(x) == x
    assert mj_identify(DkElement(2, 1)).is_zero()
    y = DkElement.from_pairs(4, 1, [(2, nb((2, 3), 4))])
    assert mj_identify(y) == DkElement.from_pairs(4, 1, [(1, nb((1, 3), 4))])


# -- randomized properties

@pytest.mark.parametrize("k", [1, 2])
def test_commuting_square(k):
    rng = random.Random(100 + k)
    for _ in range(25):
        h = random_jk(rng, 2, k)
        assert jk_member(h, k)
        assert iota_star_dk(tau_k(h, k)) == tau_k_levine(h, k)


@pytest.mark.parametrize("k", [1, 2])
def test_levine_additivity(k):
    rng = random.Random(200 + k)
    for _ in range(25):
        h, h2 = random_additivity_pair(rng, 2, k)
        assert jkl_member(h, k) and jkl_member(h2, k)
        assert tau_k_levine(h.compose(h2), k) == tau_k_levine(h, k) + tau_k_levine(h2, k)


@pytest.mark.parametrize("g,k", [(3, 1), (2, 2), (3, 2)])
def test_boundary_fixing_lands_in_dk(g, k):
    rng = random.Random(300 + 10 * g + k)
    for _ in range(15):
        h = random_boundary_jkl(rng, g, k)
        assert check_boundary_fixed(h)
        x = tau_k_levine(h, k)
        assert x.certified is True and x.bracket().is_zero()


@given(st.integers(0, 10 ** 6), st.integers(1, 2))
def test_kernel_of_tau_levine_is_next_filtration(seed, k):
    h = random_jkl(random.Random(seed), 2, k)
    if tau_k_levine(h, k).is_zero():
        assert jkl_member(h, k + 1)
    else:
        assert not jkl_member(h, k + 1)


# -- twists in the band model

@pytest.mark.parametrize("g", [1, 2, 3])
def test_ribbon_boundary(g):
    assert ribbon_boundary(g) == boundary_word(g)


@pytest.mark.parametrize("g", [1, 2])
def test_twists_fix_boundary_and_act_as_transvections(g):
    om = SymplecticData(g).omega
    signs = set()
    for cv in simple_curves(g):
        T = twist(g, list(cv))
        assert check_boundary_fixed(T)
        assert T.compose(twist(g, list(cv), -1)) == Endo.identity(Alphabet.surface(g))
        c = curve_homology(g, cv)
        M = homology_matrix(T)
        for x in range(2 * g):
            e = [int(i == x) for i in range(2 * g)]
            diff = [M[i, x] - e[i] for i in range(2 * g)]
            w = om(c, e)
            if w:
                q = diff[next(i for i in range(2 * g) if c[i])] // (w * c[next(i for i in range(2 * g) if c[i])])
                signs.add(q)
                assert diff == [q * w * ci for ci in c]
            else:
                assert not any(diff)
    assert len(signs) == 1


@pytest.mark.parametrize("g,i,m", [(2, 1, 1), (2, 1, 2), (3, 2, 3)])
def test_separating_twists(g, i, m):
    h = separating_twist(g, i, m)
    assert check_boundary_fixed(h)
    assert homology_matrix(h) == IntMatrix.identity(2 * g)
