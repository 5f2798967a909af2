"""Decision procedures: F-injectivity, k-F-injectivity and Cartier checks.

Injectivity of a map on local cohomology H^j_m is decided on the dual
side: by graded local duality it is equivalent to surjectivity of the
induced map Ext^{n-j}_S(-, omega_S) in the other direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .arith import Poly, monomials_of_degree
from .derham import DeRhamDatum, ReflexiveForms, iterate_cartier, reflexive_forms
from .errors import Indeterminate, NotIsolated, NotReflexive
from .frob import (cech_f_injective, f_injective_via_duality, fedder_is_fpure,
                   frobenius_ext_surjective, hypersurface_ring, omega_twist)
from .groebner import is_isolated_singularity
from .linalg import rref
from .modalg import (ExtData, ModuleMap, PresentedModule, apply_matrix, cokernel,
                     comparison_maps, ext_cokernel_test, free_resolution, is_surjective,
                     pull_cocycle, vadd)


# ---------------------------------------------------------------------------
# Ext-side injectivity test


def ext_surjective(alpha: ModuleMap, qext, twist=None):
    """Is Ext^qext(target, omega) -> Ext^qext(source, omega) onto?  (bool, cokernel)."""
    ring = alpha.source.ring
    tw = omega_twist(ring) if twist is None else twist
    resS = free_resolution(alpha.source, length=qext + 1)
    ES = ExtData(resS, qext, tw)
    if not ES.K:
        return True, None
    resT = free_resolution(alpha.target, length=qext + 1)
    ET = ExtData(resT, qext, tw)
    cm = comparison_maps(alpha, resS, resT, qext)
    images = []
    if qext < len(cm):
        for kappa in ET.sq.gens_ambient():
            img = pull_cocycle(kappa, cm[qext], ring.p)
            if img:
                images.append(img)
    return ext_cokernel_test(images, ES)


def local_cohomology_injective(alpha: ModuleMap, j, n):
    """Injectivity of H^j_m(alpha), with the cokernel support check."""
    ok, coker = ext_surjective(alpha, n - j)
    if coker is not None:
        dim = coker.krull_dim()
        if dim > 0:
            raise Indeterminate(f"Ext cokernel has {dim}-dimensional support; "
                                "the singularity is not isolated along this map")
    return ok, coker


# ---------------------------------------------------------------------------
# verdicts


@dataclass
class Verdict:
    f: str
    p: int
    k: int
    dim: int
    reflexive: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    cartier_surjective: dict = field(default_factory=dict)
    oracles: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def overall(self):
        return all(self.reflexive.get(i, False) for i in range(self.k + 1)) and \
            all(self.grid.values())

    def to_dict(self):
        return {
            "f": self.f,
            "p": self.p,
            "k": self.k,
            "overall": self.overall,
            "reflexive": {str(i): b for i, b in sorted(self.reflexive.items())},
            "cartier_surjective": {str(i): b for i, b in sorted(self.cartier_surjective.items())},
            "grid": [{"i": i, "j": j, "injective": b} for (i, j), b in sorted(self.grid.items())],
            "oracles": dict(sorted(self.oracles.items())),
            "diagnostics": {k: self.diagnostics[k] for k in sorted(self.diagnostics)},
        }


def _require_isolated(f: Poly):
    if not f.is_zero() and not is_isolated_singularity(f):
        raise NotIsolated("f does not define an isolated singularity")


def omega_reflexive(f: Poly, i, datum: DeRhamDatum | None = None) -> bool:
    _require_isolated(f)
    datum = datum or DeRhamDatum(f)
    return datum.is_reflexive(i)


def _coker_summary(M: PresentedModule | None):
    if M is None:
        return None
    return {"generator_degrees": [str(d) for d in M.degrees], "relations": len(M.relations)}


def k_f_injective(f: Poly, k, datum: DeRhamDatum | None = None, oracles=True) -> Verdict:
    """Decide k-F-injectivity of S/(f) cell by cell over 0 <= i <= k, 0 <= j <= dim - i."""
    _require_isolated(f)
    datum = datum or DeRhamDatum(f)
    n, d = datum.n, datum.dim
    V = Verdict(str(f), datum.p, k, d)
    for i in range(k + 1):
        if not datum.is_reflexive(i):
            V.reflexive[i] = False
            raise NotReflexive(i)
        V.reflexive[i] = True
        rf = reflexive_forms(datum, i, check_reflexive=False)
        V.cartier_surjective[i] = rf.cartier_surjective()
        for j in range(d - i + 1):
            ok, coker = local_cohomology_injective(rf.Cinv, j, n)
            V.grid[(i, j)] = ok
            if coker is not None:
                V.diagnostics[f"{i},{j}"] = _coker_summary(coker)
    if oracles:
        duality = f_injective_via_duality(f) if not f.is_zero() else True
        cech = cech_f_injective(f) if not f.is_zero() else True
        V.oracles = {"fedder": fedder_is_fpure(f) if not f.is_zero() else True,
                     "cech": cech, "duality": duality}
        row0 = all(V.grid[(0, j)] for j in range(d + 1))
        if not (row0 == duality == cech):
            raise RuntimeError(f"F-injectivity routes disagree: grid {row0}, duality {duality}, "
                               f"cech {cech}")
        if V.oracles["fedder"] and not cech:
            raise RuntimeError("F-pure but not F-injective: oracle inconsistency")
    return V


def cartier_surjectivity(f: Poly, i, datum: DeRhamDatum | None = None):
    """(C: Z Omega^[i] -> Omega^[i] surjective?, cokernel or None)."""
    datum = datum or DeRhamDatum(f)
    rf = reflexive_forms(datum, i)
    if is_surjective(rf.C):
        return True, None
    return False, cokernel(rf.C)


# ---------------------------------------------------------------------------
# splittings: degree-0 homomorphisms by linear algebra


class _GradedBasis:
    """Standard-monomial bases of the graded pieces of a presented module."""

    def __init__(self, M: PresentedModule):
        self.M = M
        self.leads = M.lead_data()
        self._cache = {}

    def basis(self, t):
        t = Fraction(t)
        if t not in self._cache:
            out = []
            for j, dj in enumerate(self.M.degrees):
                s = t - dj
                if s < 0 or s.denominator != 1:
                    continue
                lm = self.leads.get(j, [])
                for m in monomials_of_degree(self.M.n, int(s), self.M.ring.weights):
                    if not any(all(a <= b for a, b in zip(l, m)) for l in lm):
                        out.append((j, m))
            self._cache[t] = (out, {b: i for i, b in enumerate(out)})
        return self._cache[t]

    def coords(self, v, t):
        """Coordinates of the normal form of v in the basis of degree t."""
        nf = self.M.reduce(v) if self.M.relations else v
        _, idx = self.basis(t)
        out = {}
        for key, c in nf.items():
            out[idx[key]] = c
        return out


def _vec_deg(v, degrees, weights):
    (j, e) = next(iter(v))
    return degrees[j] + sum(a * b for a, b in zip(e, weights))


def solve_degree_zero(A: PresentedModule, B: PresentedModule, conditions, post=None):
    """Find a degree-0 map phi: A -> B with post(phi(v)) = target for each (v, target).

    ``post`` is a ModuleMap B -> C (identity if None).  Returns the matrix of
    phi (images of A's generators in B) or None when no such map exists.
    """
    p = A.ring.p
    w = A.ring.weights
    C = post.target if post is not None else B
    GB_B, GB_C = _GradedBasis(B), _GradedBasis(C)
    unknowns = []
    for k, a in enumerate(A.degrees):
        for b in GB_B.basis(a)[0]:
            unknowns.append((k, b))
    uidx = {u: i for i, u in enumerate(unknowns)}
    nvar = len(unknowns)
    rows = []

    def phi_of(v, gb, use_post):
        """Linear expression (dict eq-coordinate -> {var: coeff}) of post(phi(v))."""
        t = _vec_deg(v, A.degrees, w)
        expr = {}
        for (k, e), c in v.items():
            for b in GB_B.basis(A.degrees[k])[0]:
                j, m = b
                img = {(j, tuple(x + y for x, y in zip(e, m))): c}
                if use_post and post is not None:
                    img = post.apply(img)
                if not img:
                    continue
                for ci, a in gb.coords(img, t).items():
                    row = expr.setdefault(ci, {})
                    var = uidx[(k, b)]
                    row[var] = (row.get(var, 0) + a) % p
        return expr, t

    # phi must kill the relations of A
    for rel in A.relations:
        expr, t = phi_of(rel, GB_B, False)
        for ci, row in expr.items():
            r = [0] * (nvar + 1)
            for var, a in row.items():
                r[var] = a
            rows.append(r)
    for v, target in conditions:
        expr, t = phi_of(v, GB_C, True)
        tc = GB_C.coords(target, t) if target else {}
        for ci in set(expr) | set(tc):
            r = [0] * (nvar + 1)
            for var, a in expr.get(ci, {}).items():
                r[var] = a
            r[nvar] = tc.get(ci, 0) % p
            rows.append(r)
    if not rows:
        sol = [0] * nvar
    else:
        red, piv = rref(rows, p)
        if nvar in piv:
            return None
        sol = [0] * nvar
        for r, c in zip(red, piv):
            sol[c] = r[nvar]
    cols = [dict() for _ in range(A.rank)]
    for (k, (j, m)), val in zip(unknowns, sol):
        if val:
            cols[k][(j, m)] = val
    return cols


def has_retraction(alpha: ModuleMap):
    """A degree-0 r with r o alpha = id, or None."""
    M = alpha.source
    conds = [(alpha.matrix[k], M.gen(k)) for k in range(M.rank) if alpha.matrix[k]]
    if any(not alpha.matrix[k] and not M.is_zero_elem(M.gen(k)) for k in range(M.rank)):
        return None
    return solve_degree_zero(alpha.target, M, conds)


def has_section(C: ModuleMap):
    """A degree-0 s with C o s = id, or None."""
    N = C.target
    conds = [(N.gen(k), N.gen(k)) for k in range(N.rank)]
    return solve_degree_zero(N, C.source, conds, post=C)


def cartier_split_check(f: Poly, i, datum: DeRhamDatum | None = None, detail=False):
    """Does C^{-1}: Omega^[i] -> G Omega^[i] split (admit an S-linear retraction)?

    This is the splitting dual to that of C in the complementary degree and
    is what forces injectivity on local cohomology; at i = 0 it is a
    splitting of Frobenius, i.e. F-purity.
    """
    datum = datum or DeRhamDatum(f)
    rf = reflexive_forms(datum, i)
    r = has_retraction(rf.Cinv)
    if detail:
        return r is not None, r
    return r is not None


def cartier_section_check(f: Poly, i, datum: DeRhamDatum | None = None, detail=False):
    """Does C: Z Omega^[i] -> Omega^[i] admit an S-linear section?"""
    datum = datum or DeRhamDatum(f)
    rf = reflexive_forms(datum, i)
    s = has_section(rf.C)
    if detail:
        return s is not None, s
    return s is not None


# ---------------------------------------------------------------------------
# iteration


@dataclass
class StabilizationReport:
    i: int
    j: int
    chain: list
    first_change: int | None
    monotone: bool

    def to_dict(self):
        return {"i": self.i, "j": self.j, "chain": self.chain,
                "first_change": self.first_change, "monotone": self.monotone}


def perf_stabilize(f: Poly, i, j, n_max, datum: DeRhamDatum | None = None,
                   pkg=None) -> StabilizationReport:
    """Injectivity of H^j_m(Omega^[i]) -> H^j_m(G_m) for m = 1..n_max.

    For i >= 1 a CartierPackage from iterate_cartier with at least n_max
    levels may be passed in to share it across several j.
    """
    _require_isolated(f)
    datum = datum or DeRhamDatum(f)
    n = datum.n
    chain = []
    if i == 0:
        # G_m = F^m_* R and C_m^{-1} is the m-th Frobenius: use the trace route
        R = hypersurface_ring(f)
        z = (0,) * n
        res = free_resolution(R, length=n - j + 1)
        for m in range(1, n_max + 1):
            ok, _ = frobenius_ext_surjective(R, R, [{(0, z): 1}], m, n - j, resN=res, resM=res)
            chain.append(ok)
    else:
        if pkg is None or pkg.n_level < n_max:
            pkg = iterate_cartier(datum, i, n_max)
        for m in range(1, n_max + 1):
            ok, _ = local_cohomology_injective(pkg.levels[m].Cinv, j, n)
            chain.append(ok)
    first = next((m + 1 for m in range(1, len(chain)) if chain[m] != chain[m - 1]), None)
    monotone = all(chain[m] or not chain[m - 1] for m in range(1, len(chain))) and \
        all(chain[m - 1] or not chain[m] for m in range(1, len(chain)))
    return StabilizationReport(i, j, chain, first, monotone)
