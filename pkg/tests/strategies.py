"""Hypothesis strategies shared by the test modules."""

from hypothesis import strategies as st

from fcartier.arith import Ring, monomials_of_degree

PRIMES = st.sampled_from([2, 3, 5, 7])


@st.composite
def poly_dicts(draw, n, p, max_deg=3, max_terms=5, homogeneous=None):
    if homogeneous is not None:
        pool = monomials_of_degree(n, homogeneous)
    else:
        pool = [m for t in range(max_deg + 1) for m in monomials_of_degree(n, t)]
    mons = draw(st.lists(st.sampled_from(pool), max_size=max_terms, unique=True))
    return {tuple(m): draw(st.integers(1, p - 1)) for m in mons}


def ring(n, p, names="xyzwuv"):
    return Ring(list(names[:n]), p)
