import pytest
import sympy
from hypothesis import given, strategies as st

from fcartier.arith import Poly, Ring
from fcartier.errors import Indeterminate
from fcartier.groebner import (Ideal, buchberger, hilbert_dim, ideal_contains, ideals_equal,
                               is_isolated_singularity, normal_form, saturate,
                               saturate_by_variable)

from strategies import PRIMES, poly_dicts, ring
from test_arith import from_sympy_terms, to_sympy


@given(st.data(), PRIMES)
def test_reduced_basis_matches_sympy(data, p):
    R = ring(3, p)
    gens = [Poly.from_dict(R, data.draw(poly_dicts(3, p, homogeneous=2, max_terms=4)))
            for _ in range(data.draw(st.integers(1, 3)))]
    gens = [g for g in gens if not g.is_zero()]
    if not gens:
        return
    G = buchberger(Ideal(gens, R))
    ours = {frozenset(g.monic().terms.items()) for g in G}
    syms = sympy.symbols("x y z")
    ref = sympy.groebner([to_sympy(g).as_expr() for g in gens], *syms, modulus=p, order="grevlex")
    theirs = set()
    for e in ref.exprs:
        d = from_sympy_terms(sympy.Poly(e, *syms, modulus=p), p)
        f = Poly.from_dict(R, d).monic()
        theirs.add(frozenset(f.terms.items()))
    assert ours == theirs


@given(st.data(), PRIMES)
def test_membership_of_combinations(data, p):
    R = ring(3, p)
    gens = [Poly.from_dict(R, data.draw(poly_dicts(3, p, max_deg=2))) for _ in range(2)]
    gens = [g for g in gens if not g.is_zero()]
    if not gens:
        return
    I = Ideal(gens, R)
    G = buchberger(I)
    combo = R.zero()
    for g in gens:
        combo = combo + Poly.from_dict(R, data.draw(poly_dicts(3, p, max_deg=2))) * g
    assert normal_form(combo, G).is_zero()
    assert ideal_contains(I, combo)


@given(st.data(), PRIMES)
def test_normal_form_is_idempotent_and_linear(data, p):
    R = ring(3, p)
    gens = [Poly.from_dict(R, data.draw(poly_dicts(3, p, homogeneous=2))) for _ in range(2)]
    gens = [g for g in gens if not g.is_zero()]
    if not gens:
        return
    G = buchberger(Ideal(gens, R))
    f = Poly.from_dict(R, data.draw(poly_dicts(3, p)))
    g = Poly.from_dict(R, data.draw(poly_dicts(3, p)))
    nf = normal_form(f, G)
    assert normal_form(nf, G) == nf
    assert normal_form(f + g, G) == nf + normal_form(g, G)


def test_hilbert_principal_ideal():
    R = Ring(["x", "y", "z"], 5)
    f = R.parse("x^3 + y^3 + z^3")
    I = Ideal([f], R)
    for t in range(8):
        expect = sympy.binomial(t + 2, 2) - (sympy.binomial(t - 1, 2) if t >= 3 else 0)
        assert hilbert_dim(I, t) == expect


def test_hilbert_complete_intersection():
    R = Ring(["x", "y"], 3)
    I = Ideal([R.parse("x^2"), R.parse("y^2")], R)
    assert [hilbert_dim(I, t) for t in range(4)] == [1, 2, 1, 0]


def test_saturation_examples():
    R = Ring(["x", "y"], 3)
    x, y = R.gens()
    # x^2 and xy both become units after inverting x
    I = Ideal([x * x, x * y], R)
    assert ideals_equal(saturate(I, x), Ideal([R.one()], R))
    assert ideals_equal(saturate_by_variable(I, 0), Ideal([R.one()], R))
    # (x^2, xy) : y^oo = (x)
    assert ideals_equal(saturate(I, y), Ideal([x], R))
    assert ideals_equal(saturate_by_variable(I, 1), Ideal([x], R))


@pytest.mark.parametrize("text,vars_,p,expect", [
    ("x*y - z*w", "xyzw", 3, True),
    ("x^2 + y^2 + z^2", "xyz", 5, True),
    ("x^3 + y^3 + z^3", "xyz", 7, True),
    ("x*y", "xyz", 5, False),
    ("x^2", "xy", 3, False),
])
def test_isolated(text, vars_, p, expect):
    R = Ring(list(vars_), p)
    assert is_isolated_singularity(R.parse(text)) is expect


def test_wild_prime_is_indeterminate():
    R = Ring(["x", "y", "z"], 3)
    with pytest.raises(Indeterminate):
        is_isolated_singularity(R.parse("x^3 + y^3 + z^3"))
