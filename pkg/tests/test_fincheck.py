import pytest

from fcartier.arith import Ring
from fcartier.derham import DeRhamDatum
from fcartier.errors import NotIsolated, NotReflexive
from fcartier.fincheck import (cartier_section_check, cartier_split_check, cartier_surjectivity,
                               k_f_injective, omega_reflexive, perf_stabilize)


def poly(text, vars_, p, weights=None):
    return Ring(list(vars_), p, weights=weights).parse(text)


def test_quadric_cone_k1_fixture():
    V = k_f_injective(poly("x*y - z*w", "xyzw", 3), 1)
    assert V.overall
    assert V.dim == 3
    assert set(V.grid) == {(0, 0), (0, 1), (0, 2), (0, 3), (1, 0), (1, 1), (1, 2)}
    assert all(V.grid.values())
    assert V.oracles == {"fedder": True, "cech": True, "duality": True}
    assert V.cartier_surjective == {0: True, 1: True}


def test_fermat_cubic_p5_fixture():
    V = k_f_injective(poly("x^3 + y^3 + z^3", "xyz", 5), 0)
    assert not V.overall
    assert V.grid == {(0, 0): True, (0, 1): True, (0, 2): False}
    assert V.oracles == {"fedder": False, "cech": False, "duality": False}
    # the obstruction is a single class in degree 0
    assert V.diagnostics["0,2"]["generator_degrees"] == ["0"]


@pytest.mark.parametrize("text,vars_,p,w", [("x^3 + y^3 + z^3", "xyz", 7, None),
                                            ("x^2 + y^2 + z^2", "xyz", 3, None),
                                            ("x^2 + y^3 + z^5", "xyz", 7, (15, 10, 6))])
def test_f_injective_examples(text, vars_, p, w):
    V = k_f_injective(poly(text, vars_, p, w), 0)
    assert V.overall and all(V.oracles.values())


def test_report_dict_is_sorted_and_serialisable():
    import json
    V = k_f_injective(poly("x^3 + y^3 + z^3", "xyz", 5), 0)
    d = V.to_dict()
    assert d["overall"] is False
    assert [c["j"] for c in d["grid"]] == [0, 1, 2]
    json.dumps(d, sort_keys=True)


def test_non_reflexive_forms_raise():
    with pytest.raises(NotReflexive):
        k_f_injective(poly("x^2 + y^2 + z^2", "xyz", 5), 1)
    assert not omega_reflexive(poly("x^2 + y^2 + z^2", "xyz", 5), 1)


def test_not_isolated_raises():
    with pytest.raises(NotIsolated):
        k_f_injective(poly("x*y", "xyz", 5), 0)


def test_smooth_point_and_polynomial_ring():
    V = k_f_injective(poly("x", "x", 3), 0)
    assert V.overall and V.dim == 0
    V = k_f_injective(Ring(["x", "y"], 3).zero(), 1)
    assert V.overall


@pytest.mark.parametrize("text,vars_,p,k,split", [("x*y - z*w", "xyzw", 3, 1, True),
                                                  ("x^3 + y^3 + z^3", "xyz", 7, 0, True),
                                                  ("x^3 + y^3 + z^3", "xyz", 5, 0, False)])
def test_split_checks(text, vars_, p, k, split):
    f = poly(text, vars_, p)
    datum = DeRhamDatum(f)
    for i in range(k + 1):
        assert cartier_split_check(f, i, datum) is split
        # C is an isomorphism onto Omega at i = 0, so it always has a section there
        assert cartier_section_check(f, i, datum)
    if split:
        V = k_f_injective(f, k, datum)
        assert all(V.grid.values())


@pytest.mark.parametrize("i", [0, 1])
def test_split_retraction_is_a_left_inverse(i):
    from fcartier.derham import reflexive_forms
    from fcartier.modalg import ModuleMap, vadd
    f = poly("x*y - z*w", "xyzw", 3)
    datum = DeRhamDatum(f)
    ok, cols = cartier_split_check(f, i, datum, detail=True)
    assert ok
    rf = reflexive_forms(datum, i)
    r = ModuleMap(rf.G, rf.Omega, cols)      # checks well-definedness
    comp = r * rf.Cinv
    for k in range(rf.Omega.rank):
        assert rf.Omega.is_zero_elem(vadd(comp.matrix[k], rf.Omega.gen(k), 3, -1))


def test_cartier_surjectivity_helper():
    ok, coker = cartier_surjectivity(poly("x*y - z*w", "xyzw", 3), 1)
    assert ok and coker is None


@pytest.mark.parametrize("p,expect", [(5, False), (7, True)])
def test_perf_stabilize_cubic(p, expect):
    f = poly("x^3 + y^3 + z^3", "xyz", p)
    chains = [perf_stabilize(f, 0, j, 2) for j in range(3)]
    assert chains[0].chain == [True, True] and chains[1].chain == [True, True]
    assert chains[2].chain == [expect, expect]
    assert all(c.monotone and c.first_change is None for c in chains)


def test_perf_stabilize_one_forms():
    f = poly("x*y - z*w", "xyzw", 3)
    rep = perf_stabilize(f, 1, 0, 2)
    assert rep.chain == [True, True] and rep.to_dict()["monotone"]
