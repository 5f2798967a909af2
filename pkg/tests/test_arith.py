import pytest
import sympy
from hypothesis import given, strategies as st

from fcartier.arith import (Poly, Ring, check_prime, compare_monomials, frobenius_power,
                            monomials_of_degree, parse_poly)
from fcartier.errors import BadPrime, PolySyntaxError, SessionMismatch, UnknownVariable

from strategies import PRIMES, poly_dicts, ring

X, Y, Z = sympy.symbols("x y z")


def to_sympy(f: Poly):
    gens = sympy.symbols(" ".join(f.ring.vars))
    expr = sum(c * sympy.prod([g ** e for g, e in zip(gens, m)]) for m, c in f.terms.items())
    return sympy.Poly(expr, *gens, modulus=f.ring.p)


def from_sympy_terms(P, p):
    out = {}
    for m, c in P.terms():
        c = int(c) % p
        if c:
            out[tuple(m)] = c
    return out


@pytest.mark.parametrize("p,ok", [(2, True), (3, True), (31, True), (1, False), (4, False),
                                  (33, False), (37, False)])
def test_prime_guard(p, ok):
    if ok:
        assert check_prime(p) == p
    else:
        with pytest.raises(BadPrime):
            check_prime(p)


def test_parse_and_print():
    R = Ring(["x", "y", "z"], 5)
    f = R.parse("3*x^2*y - (y + z)^2 + 7")
    assert f.terms == {(2, 1, 0): 3, (0, 2, 0): 4, (0, 1, 1): 3, (0, 0, 2): 4, (0, 0, 0): 2}
    assert R.parse(str(f)) == f


def test_parse_errors():
    with pytest.raises(PolySyntaxError) as exc:
        parse_poly("x+*y", ["x", "y"], 3)
    assert exc.value.position == 2
    with pytest.raises(UnknownVariable):
        parse_poly("x + t", ["x", "y"], 3)


def test_session_mismatch():
    f = Ring(["x", "y"], 3).parse("x")
    g = Ring(["x", "y"], 5).parse("x")
    with pytest.raises(SessionMismatch):
        f + g


def test_monomials_of_degree_counts():
    for n in range(1, 5):
        for t in range(6):
            assert len(monomials_of_degree(n, t)) == sympy.binomial(n + t - 1, n - 1)


def test_weighted_monomials():
    ms = monomials_of_degree(3, 30, (15, 10, 6))
    assert (2, 0, 0) in ms and (0, 3, 0) in ms and (0, 0, 5) in ms
    assert all(15 * a + 10 * b + 6 * c == 30 for a, b, c in ms)


def test_grevlex_order():
    R = Ring(["x", "y", "z"], 3)
    o = R.order
    # grevlex: x^2 > xy > y^2 > xz > yz > z^2
    chain = [(2, 0, 0), (1, 1, 0), (0, 2, 0), (1, 0, 1), (0, 1, 1), (0, 0, 2)]
    for a, b in zip(chain, chain[1:]):
        assert compare_monomials(a, b, o) > 0


@given(st.data(), PRIMES)
def test_product_matches_sympy(data, p):
    R = ring(3, p)
    f = Poly.from_dict(R, data.draw(poly_dicts(3, p)))
    g = Poly.from_dict(R, data.draw(poly_dicts(3, p)))
    h = f * g
    if f.is_zero() or g.is_zero():
        assert h.is_zero()
        return
    assert h.terms == from_sympy_terms(to_sympy(f) * to_sympy(g), p)


@given(st.data(), PRIMES)
def test_ring_axioms(data, p):
    R = ring(2, p)
    f, g, h = (Poly.from_dict(R, data.draw(poly_dicts(2, p))) for _ in range(3))
    assert (f + g) * h == f * h + g * h
    assert (f * g) * h == f * (g * h)
    assert f - f == R.zero()
    assert f * R.one() == f


@given(st.data(), PRIMES)
def test_frobenius_additive(data, p):
    R = ring(3, p)
    f = Poly.from_dict(R, data.draw(poly_dicts(3, p)))
    g = Poly.from_dict(R, data.draw(poly_dicts(3, p)))
    assert frobenius_power(f + g) == frobenius_power(f) + frobenius_power(g)
    assert frobenius_power(f) == f ** p


@given(st.data(), PRIMES)
def test_derivative_leibniz(data, p):
    R = ring(3, p)
    f = Poly.from_dict(R, data.draw(poly_dicts(3, p)))
    g = Poly.from_dict(R, data.draw(poly_dicts(3, p)))
    for i in range(3):
        assert (f * g).diff(i) == f.diff(i) * g + f * g.diff(i)
