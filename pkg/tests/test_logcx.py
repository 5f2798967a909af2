from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from fcartier.errors import BadSupport, DenominatorOverflow
from fcartier.linalg import rank
from fcartier.logcx import (HaraPackage, LogComplex, ResidueData, Span, floor_twist,
                            normalize_delta, residue, sign_before)

from strategies import PRIMES


def dense(vecs, labels):
    return [[v.get(k, 0) for k in labels] for v in vecs]


@st.composite
def sparse_vectors(draw, p, labels=("a", "b", "c", "d")):
    n = draw(st.integers(0, 5))
    out = []
    for _ in range(n):
        out.append({k: draw(st.integers(0, p - 1)) for k in labels})
    return [{k: c for k, c in v.items() if c} for v in out]


@given(st.data(), PRIMES)
def test_span_dimension_is_rank(data, p):
    vecs = data.draw(sparse_vectors(p))
    S = Span(p, vecs)
    labels = ("a", "b", "c", "d")
    assert S.dim == rank(dense(vecs, labels), p) if vecs else S.dim == 0
    assert S.contains_all(vecs)
    assert S.same_as(Span(p, S.basis()))


def test_sign_before():
    assert sign_before(0, (1, 2)) == 1
    assert sign_before(2, (0, 1)) == 1
    assert sign_before(1, (0, 2)) == -1


@st.composite
def log_setups(draw):
    n = draw(st.integers(1, 3))
    p = draw(st.sampled_from([2, 3, 5]))
    E = tuple(j for j in range(n) if draw(st.booleans()))
    a = tuple(draw(st.integers(0 if j in E else 1, 7)) for j in range(n))
    return n, p, E, a


@given(log_setups(), st.data())
def test_d_squared_is_zero(setup, data):
    n, p, E, a = setup
    cx = LogComplex(n, p, E)
    for i in range(n - 1):
        basis = cx.basis(a, i)
        if not basis:
            continue
        v = {J: data.draw(st.integers(0, p - 1)) for J in basis}
        assert not cx.d(a, cx.d(a, v))


@given(log_setups())
def test_residue_anticommutes_with_d(setup):
    n, p, E, a = setup
    if not E:
        return
    c = E[0]
    a = tuple(0 if j == c else x for j, x in enumerate(a))
    cx = LogComplex(n, p, E)
    Dc = LogComplex(n, p, set(E) - {c}, coords=[j for j in range(n) if j != c])
    for i in range(1, n):
        for J in cx.basis(a, i):
            lhs = {K: x % p for K, x in residue(a, cx.d(a, {J: 1}), c).items() if x % p}
            r = {K: x % p for K, x in residue(a, {J: 1}, c).items()}
            rhs = {K: (-x) % p for K, x in Dc.d(a, r).items() if x % p}
            assert lhs == rhs


@pytest.mark.parametrize("p", [2, 3, 5])
def test_cartier_on_the_line(p):
    # x^p dlog x = x^(p-1) dx  |->  x dlog x = dx
    H = HaraPackage(1, p, (), (0,), 1, 1)
    pairs = H.C((p,))
    assert len(pairs) == 1 and pairs[0][1] == {(0,): 1}
    for a in range(1, 3 * p):
        assert H.B((a,)).dim == (1 if a % p else 0)


@pytest.mark.parametrize("p", [2, 3])
def test_iterated_boundaries_on_the_line(p):
    # B_2 on F^2_* Omega^1: x^a dlog x lies in B_2 unless p^2 | a
    H = HaraPackage(1, p, (), (0,), 1, 2)
    for a in range(1, 3 * p * p):
        assert H.B((a,)).dim == (1 if a % (p * p) else 0)


def test_delta_validation():
    with pytest.raises(BadSupport):
        normalize_delta(2, 3, {0}, (0, Fraction(-1, 3)))
    with pytest.raises(DenominatorOverflow):
        normalize_delta(1, 3, {0}, (Fraction(1, 2),))
    with pytest.raises(DenominatorOverflow):
        normalize_delta(1, 2, {0}, (Fraction(1, 2 ** 9),), e_max=3)
    assert floor_twist((Fraction(-1, 3), Fraction(0)), 3) == (-1, 0)
    assert floor_twist((Fraction(-1, 9),), 3) == (-1,)


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("level", [1, 2])
def test_hara_certificates_small(p, level):
    E = (0, 1)
    for s in (0, 1, 2):
        delta = tuple(Fraction(-1, p ** s) if s else Fraction(0) for _ in E)
        for i in range(3):
            H = HaraPackage(2, p, E, delta, i, level)
            ok, fails, count = H.certify(5)
            assert ok, fails[:3]
            assert count > 0


def test_hara_functoriality_small():
    p = 3
    big = HaraPackage(2, p, (0, 1), (0, 0), 1, 2)
    small = HaraPackage(2, p, (0, 1), (Fraction(-1, 3), Fraction(-1, 3)), 1, 2)
    assert big.functoriality(small, 4) == []
    with pytest.raises(ValueError):
        small.functoriality(big, 4)


@pytest.mark.parametrize("which", [1, 2, 3, 4])
def test_residue_checks_small(which):
    rd = ResidueData(2, 3, (0, 1), 0)
    cx = rd.big
    for a in cx.multidegrees(6):
        for i in range(3):
            assert all(rd.check(which, a, i).values()), (a, i)
    with pytest.raises(BadSupport):
        ResidueData(2, 3, (1,), 0)


def test_log_basis_respects_poles():
    cx = LogComplex(2, 3, (0,))
    # x dlog x allowed with a_0 = 0 because x_0 is a pole; dlog y needs a_1 >= 1
    assert cx.basis((0, 0), 1) == [(0,)]
    assert set(cx.basis((0, 1), 1)) == {(0,), (1,)}
    assert cx.basis((0, 0), 2) == []
    assert list(combinations(range(2), 2)) == cx.basis((0, 1), 2)
