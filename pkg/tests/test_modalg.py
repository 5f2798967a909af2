from math import comb

import pytest
from hypothesis import given, strategies as st

from fcartier.arith import Ring, monomials_of_degree
from fcartier.errors import IllDefined, NotIso
from fcartier.groebner import Ideal, hilbert_dim
from fcartier.modalg import (ModuleMap, PresentedModule, base_ring_module, cokernel, ext_group,
                             free_module, free_resolution, hom_module, invert_iso, is_injective,
                             is_surjective, kernel, local_torsion, prune, reflexivize,
                             torsion_submodule)

from strategies import PRIMES


def mono(n, j):
    return tuple(1 if i == j else 0 for i in range(n))


def residue_field(R):
    n = R.n
    return PresentedModule(R, [0], [{(0, mono(n, j)): 1} for j in range(n)])


def dims(M, lo, hi):
    return [M.graded_piece_dim(t) for t in range(lo, hi)]


def test_koszul_resolution():
    R = Ring(list("xyz"), 3)
    res = free_resolution(residue_field(R))
    assert res.length == 3
    for q in range(4):
        assert sorted(res.degrees[q]) == [q] * comb(3, q)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_ext_of_residue_field(n):
    R = Ring(list("xyz"[:n]), 5)
    k = residue_field(R)
    for q in range(n + 1):
        d = dims(ext_group(k, q), -n - 2, 3)
        if q < n:
            assert not any(d)
        else:
            assert sum(d) == 1 and d[2] == 1   # degree -n


def test_ext_of_hypersurface():
    R = Ring(list("xyz"), 5)
    f = R.parse("x^3 + y^3 + z^3")
    M = base_ring_module(R, f)
    E1 = ext_group(M, 1)
    I = Ideal([f], R)
    assert dims(E1, -3, 5) == [hilbert_dim(I, t + 3) for t in range(-3, 5)]
    assert dims(ext_group(M, 0), 0, 4) == [0, 0, 0, 0]


def test_presented_dims_match_hilbert():
    R = Ring(list("xyz"), 7)
    f = R.parse("x*y - z^2")
    M = base_ring_module(R, f)
    I = Ideal([f], R)
    assert dims(M, 0, 6) == [hilbert_dim(I, t) for t in range(6)]
    assert M.krull_dim() == 2
    assert residue_field(R).krull_dim() == 0 and residue_field(R).is_finite_length()


@st.composite
def linear_maps(draw, p):
    n = 2
    a, b = draw(st.integers(1, 3)), draw(st.integers(1, 3))
    cols = []
    for _ in range(a):
        col = {}
        for k in range(b):
            for j in range(n):
                c = draw(st.integers(0, p - 1))
                if c:
                    col[(k, mono(n, j))] = c
        cols.append(col)
    return a, b, cols


@given(st.data(), PRIMES)
def test_rank_nullity_per_degree(data, p):
    R = Ring(["x", "y"], p)
    a, b, cols = data.draw(linear_maps(p))
    phi = ModuleMap(free_module(R, [1] * a), free_module(R, [0] * b), cols)
    K, incl = kernel(phi)
    C = cokernel(phi)
    for t in range(5):
        assert phi.source.graded_piece_dim(t) == (K.graded_piece_dim(t) + b * len(monomials_of_degree(2, t))
                                                  - C.graded_piece_dim(t))
    assert is_injective(phi) == K.is_zero()
    assert is_surjective(phi) == C.is_zero()


def test_ill_defined_map_is_rejected():
    R = Ring(["x", "y"], 3)
    M = PresentedModule(R, [0], [{(0, (1, 0)): 1}])      # S/(x)
    S = free_module(R, [0])
    with pytest.raises(IllDefined):
        ModuleMap(M, S, [{(0, (0, 0)): 1}])


def test_hom_examples():
    R = Ring(["x", "y"], 3)
    Sx = PresentedModule(R, [0], [{(0, (1, 0)): 1}])     # S/(x)
    Sx2 = PresentedModule(R, [0], [{(0, (2, 0)): 1}])    # S/(x^2)
    # Hom(S/(x), S/(x^2)) = (x)/(x^2), one dimension in each degree >= 1
    assert dims(hom_module(Sx, Sx2).module, 0, 5) == [0, 1, 1, 1, 1]
    R2 = base_ring_module(R, R.parse("x*y"))
    assert dims(hom_module(R2, R2).module, 0, 5) == dims(R2, 0, 5)


def test_reflexive_hull_and_torsion():
    R = Ring(["x", "y"], 5)
    M = PresentedModule(R, [0, 0], [{(0, (1, 0)): 1}])   # S/(x) + S
    Mss, can = reflexivize(M)
    assert dims(Mss, 0, 4) == [1, 2, 3, 4]
    T, incl = torsion_submodule(M)
    assert dims(T, 0, 4) == [1, 1, 1, 1]
    T2, _ = local_torsion(M, var=0)
    assert dims(T2, 0, 4) == dims(T, 0, 4)
    # S/(x) has no y-torsion
    assert local_torsion(M, var=1)[0].is_zero()


def test_invert_iso_and_prune():
    R = Ring(["x", "y"], 3)
    M = PresentedModule(R, [0, 1], [{(0, (1, 0)): 1, (1, (0, 0)): 1}])
    pr = prune(M)
    assert pr.module.rank == 1
    assert dims(pr.module, 0, 4) == dims(M, 0, 4)
    S = free_module(R, [0])
    g = ModuleMap(S, S, [{(0, (0, 0)): 2}])
    h = invert_iso(g)
    assert (h * g).matrix == [{(0, (0, 0)): 1}]
    with pytest.raises(NotIso):
        invert_iso(ModuleMap(free_module(R, [1]), S, [{(0, (1, 0)): 1}]))
