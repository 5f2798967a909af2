"""De Rham complexes pushed forward by Frobenius, and Cartier operators.

Forms on S = F_p[x_1..x_n] and on R = S/(f) are presented on the symbols
dx_J (J an increasing tuple).  A "set-level" form is a vector
{(J index, exponent): coeff} on these symbols; the Frobenius pushforward
F^e_* reads the same set as an S-module with x^b acting by x^(p^e b).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

from .arith import Poly, Ring
from .errors import BadSupport, CartierNotSurjective, IllDefined, NotDomain, NotIso, NotReflexive
from .frob import FrobeniusModule
from .logcx import E_MAX, HaraPackage, LogComplex, ResidueData, floor_twist
from .modalg import (ModuleMap, PresentedModule, Subquotient, apply_matrix, base_ring_module,
                     hom_module, invert_iso, is_injective, is_surjective, kernel_sq,
                     local_torsion, quotient_by, reflexivize, vadd)


def wedge_sign(j, J):
    """Sign of dx_j ^ dx_J against dx_{J u j} in increasing order."""
    return -1 if sum(1 for l in J if l < j) % 2 else 1


def kaehler(f: Poly, i: int) -> PresentedModule:
    """Omega^i of S/(f) on generators dx_J, relations f dx_J and df ^ dx_J'."""
    ring = f.ring
    n, p, w = ring.n, ring.p, ring.weights
    if i < 0 or i > n:
        return PresentedModule(ring, [], [], label=f"Omega^{i}")
    subs = list(combinations(range(n), i))
    idx = {J: k for k, J in enumerate(subs)}
    degs = [sum(w[j] for j in J) for J in subs]
    rels = []
    if not f.is_zero():
        for k in range(len(subs)):
            rels.append({(k, m): c for m, c in f.terms.items()})
        df = [f.diff(j) for j in range(n)]
        for Jp in (combinations(range(n), i - 1) if i >= 1 else ()):
            v = {}
            for j in range(n):
                if j in Jp or df[j].is_zero():
                    continue
                K = tuple(sorted(Jp + (j,)))
                s = wedge_sign(j, Jp)
                for m, c in df[j].terms.items():
                    key = (idx[K], m)
                    v[key] = (v.get(key, 0) + s * c) % p
            v = {k: c for k, c in v.items() if c}
            if v:
                rels.append(v)
    return PresentedModule(ring, degs, rels, label=f"Omega^{i}")


class DeRhamDatum:
    """Kähler forms of R = S/(f) with their Frobenius-pushed differentials.

    ``part`` restricts every pushforward to the given fractional degree
    classes (default: integer degrees, where the inverse Cartier operator
    lands).  Pass ``part=None`` to keep everything.
    """

    def __init__(self, f: Poly, part=(0,), check=True):
        self.f = f
        self.ring = ring = f.ring
        self.p = ring.p
        self.n = n = ring.n
        self.part = None if part is None else tuple(part)
        self.subsets = [list(combinations(range(n), i)) for i in range(n + 2)]
        self.index = [{J: k for k, J in enumerate(s)} for s in self.subsets]
        self.forms = [kaehler(f, i) for i in range(n + 2)]
        self._fm = {}
        self._d = {}
        self._tf = {}
        self._refl = {}
        if check:
            self.certify_dd()

    @property
    def dim(self):
        return self.n if self.f.is_zero() else self.n - 1

    # set-level calculus -----------------------------------------------------
    def d_set(self, i, vec):
        """Exterior derivative of a set-level i-form."""
        p = self.p
        subs = self.subsets[i]
        nxt = self.index[i + 1] if i + 1 <= self.n else {}
        out = {}
        for (k, m), c in vec.items():
            J = subs[k]
            for j in range(self.n):
                if j in J or m[j] % p == 0:
                    continue
                K = tuple(sorted(J + (j,)))
                e = m[:j] + (m[j] - 1,) + m[j + 1:]
                key = (nxt[K], e)
                out[key] = (out.get(key, 0) + wedge_sign(j, J) * m[j] * c) % p
        return {k: c for k, c in out.items() if c}

    def cinv_set(self, i, k, q=None):
        """C^{-e}(dx_J) = x_J^(q-1) dx_J at the set level, q = p^e."""
        q = q or self.p
        J = self.subsets[i][k]
        return {(k, tuple(q - 1 if j in J else 0 for j in range(self.n))): 1}

    def certify_dd(self, span=2):
        """d o d = 0 on every x^m dx_J with exponents below ``span``."""
        for i in range(self.n - 1):
            for k in range(len(self.subsets[i])):
                for m in product(range(span + 1), repeat=self.n):
                    dd = self.d_set(i + 1, self.d_set(i, {(k, m): 1}))
                    if dd:
                        raise IllDefined(f"d o d != 0 on degree {i}")
        return True

    # modules ------------------------------------------------------------------
    def torsion_free(self, i):
        """(Omega^i / torsion, torsion generators as set-level vectors)."""
        if i not in self._tf:
            Om = self.forms[i]
            if self.f.is_zero() or Om.rank == 0 or self._is_field():
                self._tf[i] = (Om, [])
            else:
                T, incl = local_torsion(Om, var=self.nzd_var())
                tors = [c for c in incl.matrix if c]
                self._tf[i] = (quotient_by(Om, tors), tors)
        return self._tf[i]

    def _is_field(self):
        """R = F_p, i.e. f is a unit multiple of a single variable."""
        return self.n == 1 and self.f.total_degree() == 1

    def nzd_var(self):
        """A variable that is nonzero in R (a nonzerodivisor when R is a domain)."""
        if self.f.is_zero():
            return 0
        for j in range(self.n):
            if any(m[j] == 0 for m in self.f.terms):
                return j
        raise NotDomain("every variable divides f; the torsion computation needs a domain")

    def pushforward(self, i, e=1, torsion_free=False):
        key = (i, e, torsion_free)
        if key not in self._fm:
            M = self.torsion_free(i)[0] if torsion_free else self.forms[i]
            self._fm[key] = FrobeniusModule(M, e, part=self.part)
        return self._fm[key]

    def d(self, i, e=1, torsion_free_target=False, check=False):
        """d: F^e_* Omega^i -> F^e_* Omega^{i+1} (optionally modulo torsion)."""
        key = (i, e, torsion_free_target)
        if key not in self._d:
            src = self.pushforward(i, e)
            tgt = self.pushforward(i + 1, e, torsion_free_target)
            cols = [tgt.embed(self.d_set(i, src.raw_gen_element(j))) for j in range(src.module.rank)]
            self._d[key] = ModuleMap(src.module, tgt.module, cols, check=check, label=f"d{i}")
        return self._d[key]

    def is_reflexive(self, i):
        """Is the canonical map Omega^i -> (Omega^i)** (duals into R) bijective?"""
        if i not in self._refl:
            if self.f.is_zero() or i == 0 or i > self.n:
                self._refl[i] = True
            else:
                base = base_ring_module(self.ring, self.f)
                _, can = reflexivize(self.forms[i], base)
                self._refl[i] = is_injective(can) and is_surjective(can)
        return self._refl[i]


def de_rham_d(datum: DeRhamDatum, i, e=1):
    if e < 1:
        raise ValueError("e >= 1 required")
    return datum.d(i, e, check=True)


def _to_ambient(sq: Subquotient, v, p):
    return apply_matrix(sq.gens_ambient(), v, p)


def boundaries_cycles(datum: DeRhamDatum, i, e=1):
    """(B, Z) as Subquotients of F^e_* Omega^i; B inside Z is certified."""
    FO = datum.pushforward(i, e)
    rels = FO.module.relations
    degs = FO.module.degrees
    Z = kernel_sq(datum.d(i, e))
    bcols = [c for c in datum.d(i - 1, e).matrix if c] if i > 0 else []
    B = Subquotient(datum.ring, degs, bcols, rels, label="B")
    if bcols:
        dnext = datum.d(i, e)
        tgt = dnext.target
        for b in bcols:
            if not tgt.is_zero_elem(dnext.apply(b)):
                raise IllDefined("a boundary is not a cycle")
    return B, Z


class CartierLevelOne:
    """Z/B on F_* Omega^i of a regular ring with the inverse Cartier operator."""

    def __init__(self, datum: DeRhamDatum, i):
        self.datum, self.i = datum, i
        p = datum.p
        self.FO = FO = datum.pushforward(i)
        self.B, self.Z = boundaries_cycles(datum, i)
        self.ZB = Subquotient(datum.ring, FO.module.degrees, self.Z.gens_ambient(),
                              FO.module.relations + self.B.K, label="Z/B")
        cols = []
        for k in range(datum.forms[i].rank):
            c = self.ZB.lift(FO.embed(datum.cinv_set(i, k)))
            if c is None:
                raise IllDefined("x_J^(p-1) dx_J is not a cycle")
            cols.append(c)
        self.cinv = ModuleMap(datum.forms[i], self.ZB.module, cols, check=True, label="C^-1")
        self.p = p


def inverse_cartier(datum: DeRhamDatum, i):
    """The map Omega^i -> Z/B, dx_J |-> x_J^(p-1) dx_J."""
    return CartierLevelOne(datum, i).cinv


class ReflexiveForms:
    """Omega^[i], Z, B, G with C: Z -> Omega^[i] and C^{-1}: Omega^[i] -> G.

    Z is the kernel of F_*Omega^i -> F_*(Omega^{i+1}/tors); the Cartier map
    is obtained by inverting Omega^i -> (Z/B)/torsion.  Requires Omega^i
    reflexive, in which case Omega^[i] = Omega^i.
    """

    def __init__(self, datum: DeRhamDatum, i, check_reflexive=True):
        if check_reflexive and not datum.is_reflexive(i):
            raise NotReflexive(i)
        self.datum, self.i = datum, i
        ring, p = datum.ring, datum.p
        self.p = p
        self.Omega = Om = datum.forms[i]
        self.FO = FO = datum.pushforward(i)
        amb = FO.module
        self.Zsq = Zsq = kernel_sq(datum.d(i, torsion_free_target=True))
        Zg = Zsq.gens_ambient()
        self.Bgens = Bg = [c for c in datum.d(i - 1).matrix if c] if i > 0 else []
        MZB = Subquotient(ring, amb.degrees, Zg, amb.relations + Bg, label="Z/B")
        if datum._is_field():
            T, Tamb = PresentedModule(ring, [], []), []
        else:
            T, Tincl = local_torsion(MZB.module, var=datum.nzd_var())
            Tamb = [_to_ambient(MZB, c, p) for c in Tincl.matrix if c]
        self.torsion = T
        self.MT = MT = Subquotient(ring, amb.degrees, Zg, amb.relations + Bg + Tamb,
                                   label="(Z/B)/tors")
        cols = []
        for k in range(Om.rank):
            c = MT.lift(FO.embed(datum.cinv_set(i, k)))
            if c is None:
                raise IllDefined("C^{-1}(dx_J) is not a cycle")
            cols.append(c)
        self.cbar = ModuleMap(Om, MT.module, cols, check=True, label="C^-1 mod tors")
        try:
            self.tau = invert_iso(self.cbar)
        except NotIso as exc:
            raise NotIso("Omega^i -> (Z/B)/tors is not an isomorphism") from exc
        self.Z = Zsq.module
        ccols = []
        for z in Zsq.gens_ambient():
            u = MT.lift(z)
            ccols.append(self.tau.apply(u))
        self.C = ModuleMap(self.Z, Om, ccols, check=True, label="C")
        Bsq = kernel_sq(self.C)
        self.Bbr_ambient = [_to_ambient(Zsq, v, p) for v in Bsq.gens_ambient()]
        self.Bsq = Subquotient(ring, amb.degrees, self.Bbr_ambient, amb.relations, label="B^[i]")
        self.B = self.Bsq.module
        self.G = quotient_by(amb, self.Bbr_ambient)
        self.G.label = "G"
        self.Cinv = ModuleMap(Om, self.G, [FO.embed(datum.cinv_set(i, k)) for k in range(Om.rank)],
                              check=True, label="C^-1")

    def as_tuple(self):
        return self.Omega, self.Z, self.B, self.G, self.C, self.Cinv

    def lift_to_Z(self, v):
        """An ambient cycle (vector of F_*Omega^i) on the generators of Z."""
        return self.Zsq.lift(v)

    def c_of_cinv_is_identity(self):
        Om = self.Omega
        for k in range(Om.rank):
            z = self.lift_to_Z(self.FO.embed(self.datum.cinv_set(self.i, k)))
            if z is None or not Om.is_zero_elem(vadd(self.C.apply(z), Om.gen(k), self.p, -1)):
                return False
        return True

    def kaehler_boundaries_inside(self):
        """B (image of d on Kähler forms) lies in B^[i]."""
        Om = self.Omega
        for b in self.Bgens:
            z = self.lift_to_Z(b)
            if z is None or not Om.is_zero_elem(self.C.apply(z)):
                return False
        return True

    def cartier_surjective(self):
        return is_surjective(self.C)

    def footnote_comparison(self):
        """Compare G = F_*Omega^[i]/B^[i] with (F_*Omega^i/B)** (duals into R).

        Returns a dict with injectivity and surjectivity of the natural map
        G -> (F_*Omega^i/B)**; nothing is asserted about the outcome.
        """
        datum = self.datum
        amb = self.FO.module
        N = quotient_by(amb, self.Bgens)
        base = base_ring_module(datum.ring, datum.f)
        Nss, can = reflexivize(N, base)
        g = ModuleMap(self.G, Nss, can.matrix, check=False)
        try:
            g.check()
            defined = True
        except IllDefined:
            defined = False
        out = {"defined": defined}
        if defined:
            out["injective"] = is_injective(g)
            out["surjective"] = is_surjective(g)
        return out


def reflexive_forms(datum: DeRhamDatum, i, check_reflexive=True) -> ReflexiveForms:
    return ReflexiveForms(datum, i, check_reflexive)


class CartierPackage:
    """Iterated Cartier data at level n: Z_n, B_n, G_n, C_n and C_n^{-1}.

    ``chain[m]`` (m >= 2) is C^{-1}_{m,m-1}: G_{m-1} -> G_m; the composite
    of the chain after C^{-1} equals C_n^{-1}.
    """

    def __init__(self, i, n_level, Z_n, B_n, G_n, C_n, C_n_inv, levels, chain):
        self.i = i
        self.n_level = n_level
        self.Z_n, self.B_n, self.G_n = Z_n, B_n, G_n
        self.C_n, self.C_n_inv = C_n, C_n_inv
        self.levels = levels
        self.chain = chain


class _Level:
    def __init__(self, m, FOm, zs, cvals, Zsq, C, Bsq, G, Cinv):
        self.m, self.FO = m, FOm
        self.zs, self.cvals = zs, cvals
        self.Zsq, self.C, self.Bsq, self.G, self.Cinv = Zsq, C, Bsq, G, Cinv


def _finish_level(datum, i, m, zs, cvals):
    """Modules of level m from set-level generators of Z_m and their C_m values."""
    p = datum.p
    Om = datum.forms[i]
    FOm = datum.pushforward(i, m)
    amb = FOm.module
    pairs = [(FOm.embed(z), c) for z, c in zip(zs, cvals)]
    pairs = [(v, c) for v, c in pairs if v]
    Zsq = Subquotient(datum.ring, amb.degrees, [v for v, _ in pairs], amb.relations, label=f"Z_{m}")
    kept_vals = [pairs[j][1] for j in Zsq.kept]
    C = ModuleMap(Zsq.module, Om, kept_vals, check=True, label=f"C_{m}")
    Bker = kernel_sq(C)
    Bamb = [_to_ambient(Zsq, v, p) for v in Bker.gens_ambient()]
    Bsq = Subquotient(datum.ring, amb.degrees, Bamb, amb.relations, label=f"B_{m}")
    G = quotient_by(amb, Bamb)
    G.label = f"G_{m}"
    q = p ** m
    Cinv = ModuleMap(Om, G, [FOm.embed(datum.cinv_set(i, k, q)) for k in range(Om.rank)],
                     check=True, label=f"C_{m}^-1")
    return _Level(m, FOm, zs, cvals, Zsq, C, Bsq, G, Cinv)


def iterate_cartier(datum: DeRhamDatum, i, n_level, rf: ReflexiveForms | None = None) -> CartierPackage:
    """Compose the partial map C: F_*Omega^[i] -> Omega^[i] with itself n times.

    Z_m = {z in F_*Z_{m-1} : F_*C_{m-1}(z) in Z_1} and C_m = C o F_*C_{m-1}.
    """
    rf = rf or reflexive_forms(datum, i)
    if not rf.cartier_surjective():
        from .modalg import cokernel
        raise CartierNotSurjective("C: Z -> Omega^[i] is not surjective", cokernel(rf.C))
    p, n = datum.p, datum.n
    FO1 = rf.FO
    zs1 = [FO1.to_set(z) for z in rf.Zsq.gens_ambient()]
    lev = _Level(1, FO1, zs1, list(rf.C.matrix), rf.Zsq, rf.C, rf.Bsq, rf.G, rf.Cinv)
    levels = {1: lev}
    Z1quot = quotient_by(FO1.module, rf.Zsq.gens_ambient())
    chain = {}
    for m in range(2, n_level + 1):
        prev = levels[m - 1]
        Q = p ** (m - 1)
        ys, phis = [], []
        for z, cv in zip(prev.zs, prev.cvals):
            for r in product(range(p), repeat=n):
                img = {(k, tuple(a + b for a, b in zip(e, r))): c for (k, e), c in cv.items()}
                if not img or not _in_part(datum, i, img, p):
                    continue
                ys.append({(k, tuple(Q * a + b for a, b in zip(r, e))): c for (k, e), c in z.items()})
                phis.append(FO1.embed(img))
        ydeg = [_set_degree(datum, i, y) / p ** m for y in ys]
        free = PresentedModule(datum.ring, ydeg, [], check=False)
        phi = ModuleMap(free, Z1quot, phis, check=False)
        from .modalg import _preimage_gens
        zs, cvals = [], []
        for u in _preimage_gens(phi):
            zset = _expand(u, ys, p ** m, p)
            if not zset:
                continue
            w = phi.apply(u)
            zc = rf.Zsq.lift(w)
            if zc is None:
                raise IllDefined("pullback element does not lift to Z_1")
            zs.append(zset)
            cvals.append(rf.C.apply(zc))
        levels[m] = _finish_level(datum, i, m, zs, cvals)
        chain[m] = _chain_map(datum, i, levels[m - 1], levels[m])
    top = levels[n_level]
    return CartierPackage(i, n_level, top.Zsq.module, top.Bsq.module, top.G, top.C, top.Cinv,
                          levels, chain)


def _set_degree(datum, i, v):
    """Degree of a nonzero homogeneous set-level i-form."""
    w = datum.ring.weights
    (k, e) = next(iter(v))
    return datum.forms[i].degrees[k] + sum(a * b for a, b in zip(e, w))


def _in_part(datum, i, v, q):
    if datum.part is None:
        return True
    from .frob import frac_part
    return frac_part(_set_degree(datum, i, v) / q) in {Fraction(c) for c in datum.part}


def _expand(u, ys, q, p):
    out = {}
    for (j, b), c in u.items():
        for (k, e), a in ys[j].items():
            key = (k, tuple(q * x + y for x, y in zip(b, e)))
            out[key] = (out.get(key, 0) + c * a) % p
    return {k: c for k, c in out.items() if c}


def _chain_map(datum, i, lo: _Level, hi: _Level):
    """C^{-1}_{m,m-1}: G_{m-1} -> G_m, x^r dx_J |-> x^(pr) x_J^(p-1) dx_J."""
    p = datum.p
    cols = []
    for j in range(lo.FO.module.rank):
        (k, r), = lo.FO.raw_gen_element(j)
        el = datum.cinv_set(i, k)
        (kk, e), = el
        cols.append(hi.FO.embed({(kk, tuple(p * a + b for a, b in zip(r, e))): 1}))
    return ModuleMap(lo.G, hi.G, cols, check=True, label="C^-1_{m,m-1}")


# ---------------------------------------------------------------------------
# logarithmic forms on affine space


@dataclass(frozen=True)
class LogDivisor:
    """Coordinate hyperplanes E = {x_j = 0 : j in E} with a Q-divisor delta on them."""

    n: int
    E: tuple = ()
    delta: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "E", tuple(sorted(set(self.E))))
        d = self.delta if self.delta is not None else (0,) * self.n
        d = tuple(Fraction(x) for x in d)
        if len(d) != self.n:
            raise ValueError("delta needs one coefficient per coordinate")
        if any(x and j not in self.E for j, x in enumerate(d)):
            raise BadSupport("Supp(delta) must lie in E")
        object.__setattr__(self, "delta", d)

    @classmethod
    def scaled(cls, n, E, c):
        """delta = c * E."""
        return cls(n, E, tuple(Fraction(c) if j in E else Fraction(0) for j in range(n)))


def standard_ring(n, p):
    return Ring([f"x{j + 1}" for j in range(n)], p)


class LogForms:
    """Omega^i(log E)(D) on A^n as a free graded S-module.

    Generator k is x^off_k dlog x_J (J = subsets[k]), off_k being the
    smallest admissible multidegree.  Set-level vectors {(k, m): c} and
    multidegree vectors {(a, J): c} are related by a = m + off_k.
    """

    def __init__(self, ring: Ring, E, twist, i):
        self.ring = ring
        self.i = i
        n = ring.n
        self.cx = LogComplex(n, ring.p, E, twist)
        self.subsets = list(combinations(range(n), i)) if 0 <= i <= n else []
        self.index = {J: k for k, J in enumerate(self.subsets)}
        self.off = [tuple(self.cx.lower(j, j in J) for j in range(n)) for J in self.subsets]
        self.module = PresentedModule(ring, [sum(o) for o in self.off], [],
                                      label=f"Omega^{i}(log E)")

    def to_multi(self, v):
        out = {}
        for (k, m), c in v.items():
            a = tuple(x + y for x, y in zip(m, self.off[k]))
            out[(a, self.subsets[k])] = c
        return out

    def from_multi(self, v):
        out = {}
        for (a, J), c in v.items():
            k = self.index[J]
            m = tuple(x - y for x, y in zip(a, self.off[k]))
            if min(m) < 0:
                raise IllDefined("form outside the twisted log module")
            out[(k, m)] = (out.get((k, m), 0) + c) % self.ring.p
        return {k: c for k, c in out.items() if c}


def log_forms(E: LogDivisor, i, p, twist=None):
    """Free module Omega^i(log E)(twist) on A^n; twist defaults to floor(delta)."""
    ring = standard_ring(E.n, p)
    tw = twist if twist is not None else floor_twist(E.delta, 1)
    return LogForms(ring, E.E, tw, i)


def _multi_d(cx, v):
    p = cx.p
    out = {}
    by_a = {}
    for (a, J), c in v.items():
        by_a.setdefault(a, {})[J] = c
    for a, w in by_a.items():
        for K, c in cx.d(a, w).items():
            out[(a, K)] = (out.get((a, K), 0) + c) % p
    return {k: c for k, c in out.items() if c}


class LogDeRham:
    """F^e_* of the complex Omega^.(log E)(D) on A^n as S-modules and maps."""

    def __init__(self, ring: Ring, E, twist, e=1):
        self.ring = ring
        self.E = tuple(E)
        self.twist = tuple(twist)
        self.e = e
        n = ring.n
        self.forms = [LogForms(ring, E, twist, i) for i in range(n + 1)]
        self._fm = {}
        self._d = {}

    def pushforward(self, i):
        if i not in self._fm:
            self._fm[i] = FrobeniusModule(self.forms[i].module, self.e)
        return self._fm[i]

    def gen_multi(self, i, j):
        """Pruned generator j of F^e_* Omega^i as a multidegree vector."""
        return self.forms[i].to_multi(self.pushforward(i).raw_gen_element(j))

    def d(self, i):
        """d: F^e_* Omega^i -> F^e_* Omega^{i+1}."""
        if i not in self._d:
            src, tgt = self.pushforward(i), self.pushforward(i + 1)
            cx = self.forms[i].cx
            cols = []
            for j in range(src.module.rank):
                img = _multi_d(cx, self.gen_multi(i, j))
                cols.append(tgt.embed(self.forms[i + 1].from_multi(img)))
            self._d[i] = ModuleMap(src.module, tgt.module, cols, check=False)
        return self._d[i]

    def boundaries(self, i):
        """B^i as a Subquotient of F^e_* Omega^i (generators are d of source generators)."""
        tgt = self.pushforward(i).module
        if i == 0:
            return Subquotient(self.ring, tgt.degrees, [], tgt.relations, label="B")
        return Subquotient(self.ring, tgt.degrees, self.d(i - 1).matrix, tgt.relations, label="B")

    def cycles(self, i):
        if i >= self.ring.n:
            M = self.pushforward(i).module
            return Subquotient(self.ring, M.degrees, [M.gen(j) for j in range(M.rank)],
                               M.relations, label="Z")
        return kernel_sq(self.d(i))

    def to_multi(self, i, v):
        """Vector on the pruned generators of F^e_* Omega^i -> multidegree vector."""
        return self.forms[i].to_multi(self.pushforward(i).to_set(v))


# -- Hara packages ---------------------------------------------------------


def hara_package(E: LogDivisor, i, n_level, p, e_max=E_MAX) -> HaraPackage:
    """B_n, Z_n, C_{n,delta}, G_n and C^{-1}_{n,delta} for Omega^i(log E)(delta).

    The level-n complex is F^n_* Omega^.(log E)(p^n delta) with the floor
    convention; all pieces are finite dimensional per multidegree, see
    HaraPackage.certify and HaraPackage.functoriality.
    """
    return HaraPackage(E.n, p, E.E, E.delta, i, n_level, e_max)


# -- duality -----------------------------------------------------------------


def _wedge_top(K, J, n):
    """Sign of dlog_K ^ dlog_J against dlog_{1..n}, or 0."""
    if set(K) & set(J) or len(K) + len(J) != n:
        return 0
    inv = sum(1 for k in K for j in J if k > j)
    return -1 if inv % 2 else 1


def trace_pairing(u, v, n, p, q):
    """Tr(u ^ v) in omega_S = S dx_1..dx_n for multidegree vectors u, v.

    x^c dlog x_{1..n} = x^(c-1) dx is sent to x^(c/q - 1) dx when q | c,
    and to 0 otherwise.  Returned as a vector on the single generator of omega.
    """
    out = {}
    for (a, K), x in u.items():
        for (b, J), y in v.items():
            s = _wedge_top(K, J, n)
            if not s:
                continue
            c = tuple(s1 + s2 for s1, s2 in zip(a, b))
            if any(t % q for t in c):
                continue
            m = tuple(t // q - 1 for t in c)
            if min(m) < 0:
                raise IllDefined("pairing left omega")
            out[(0, m)] = (out.get((0, m), 0) + s * x * y) % p
    return {k: c for k, c in out.items() if c}


def _omega(ring):
    return PresentedModule(ring, [ring.n], [], label="omega")


def _hom_map(source_mod, source_elems, hom_sq, pair_targets, pair_fn, label):
    """The map sending source generator k to (target generator j -> pair_fn(elem_k, pt_j))."""
    cols = []
    for u in source_elems:
        amb = {}
        for j, w in enumerate(pair_targets):
            for (_, m), c in pair_fn(u, w).items():
                amb[(j, m)] = c
        c = hom_sq.lift(amb)
        if c is None:
            raise IllDefined(f"{label}: pairing is not a homomorphism")
        cols.append(c)
    return ModuleMap(source_mod, hom_sq.module, cols, check=True, label=label)


def _dims_agree(A, B, tmax, step):
    degs = [d for d in A.degrees + B.degrees]
    if not degs:
        return True, []
    t = min(degs)
    t = Fraction(math.floor(t * step), step)
    bad = []
    while t <= tmax:
        da, db = A.graded_piece_dim(t), B.graded_piece_dim(t)
        if da != db:
            bad.append((str(t), da, db))
        t += Fraction(1, step)
    return not bad, bad


def engine_dims(cx: LogComplex, kind, i, q, tmax):
    """{t: dim} of F^e_* pieces (kind F, B, Z or G) from the multidegree engine, t <= tmax."""
    out = {}
    for a in cx.multidegrees(int(tmax * q)):
        full = len(cx.basis(a, i))
        if not full:
            continue
        if kind == "F":
            d = full
        elif kind == "B":
            d = len(cx.boundaries(a, i))
        elif kind == "Z":
            d = len(cx.cycles(a, i))
        else:
            d = full - len(cx.boundaries(a, i))
        t = Fraction(sum(a), q)
        if d:
            out[t] = out.get(t, 0) + d
    return out


def _engine_agrees(M, dims, tmax, q):
    bad = [(str(t), M.graded_piece_dim(t), d) for t, d in sorted(dims.items())
           if M.graded_piece_dim(t) != d]
    # degrees the engine reports as zero
    for d0 in sorted(set(M.degrees)):
        t = d0
        while t <= tmax:
            if t not in dims and M.graded_piece_dim(t):
                bad.append((str(t), M.graded_piece_dim(t), 0))
            t += Fraction(1, q)
    return not bad, bad


def duality_check(E: LogDivisor, i, p, tmax=10):
    """Certify the three wedge-pairing dualities for log forms on A^n.

    (1) F_* Omega^{n-i}(log E)(-E) -> Hom(F_* Omega^i(log E), omega),
    (2) B Omega^{n-i+1}(log E)(-E) -> Hom(B Omega^i(log E), omega),
    (3) G Omega^{n-i}(log E)(-E)   -> Hom(Z Omega^i(log E), omega),
    all given by eta |-> (xi |-> Tr(eta ^ xi)); for (2) the pairing is
    evaluated on a primitive: d xi |-> Tr(beta ^ xi).  Each map is checked
    to be a well-defined isomorphism, and the graded dimensions of both
    sides are compared in all degrees <= tmax.
    """
    n = E.n
    ring = standard_ring(n, p)
    minusE = tuple(-1 if j in E.E else 0 for j in range(n))
    plain = LogDeRham(ring, E.E, (0,) * n)
    dual = LogDeRham(ring, E.E, minusE)
    om = _omega(ring)
    pair = lambda u, v: trace_pairing(u, v, n, p, p)
    report = {"n": n, "E": list(E.E), "i": i, "p": p}

    # (1)
    FM = plain.pushforward(i)
    FD = dual.pushforward(n - i)
    H1 = hom_module(FM.module, om)
    phi1 = _hom_map(FD.module, [dual.gen_multi(n - i, k) for k in range(FD.module.rank)], H1,
                    [plain.gen_multi(i, j) for j in range(FM.module.rank)], pair, "(1)")
    ok_dim, bad = _dims_agree(FD.module, H1.module, tmax, p)
    report["1"] = {"injective": is_injective(phi1), "surjective": is_surjective(phi1),
                   "dims": ok_dim, "dim_mismatch": bad}

    # (2): generators of B^i are d of generators of F_* Omega^{i-1}
    if i == 0:
        # B Omega^0 = 0 and B Omega^{n+1} = 0
        report["2"] = {"injective": True, "surjective": True, "dims": True, "dim_mismatch": []}
    else:
        Bi = plain.boundaries(i)
        nz = [j for j, c in enumerate(plain.d(i - 1).matrix) if c]
        prims = [plain.gen_multi(i - 1, nz[Bi.kept[k]]) for k in range(Bi.module.rank)]
        H2 = hom_module(Bi.module, om)
        Bd = dual.boundaries(n - i + 1)
        src_el = [dual.to_multi(n - i + 1, g) for g in Bd.gens_ambient()]
        phi2 = _hom_map(Bd.module, src_el, H2, prims, pair, "(2)")
        ok_dim, bad = _dims_agree(Bd.module, H2.module, tmax, p)
        report["2"] = {"injective": is_injective(phi2), "surjective": is_surjective(phi2),
                       "dims": ok_dim, "dim_mismatch": bad}

    # (3)
    Zi = plain.cycles(i)
    zel = [plain.to_multi(i, g) for g in Zi.gens_ambient()]
    H3 = hom_module(Zi.module, om)
    FG = dual.pushforward(n - i)
    Bg = dual.boundaries(n - i)
    G = quotient_by(FG.module, Bg.K)
    phi3 = _hom_map(G, [dual.gen_multi(n - i, k) for k in range(G.rank)], H3, zel, pair, "(3)")
    ok_dim, bad = _dims_agree(G, H3.module, tmax, p)
    report["3"] = {"injective": is_injective(phi3), "surjective": is_surjective(phi3),
                   "dims": ok_dim, "dim_mismatch": bad}
    # independent oracle: the dual side counted multidegree by multidegree
    cxd = LogComplex(n, p, E.E, minusE)
    report["2"]["engine"] = (True if i == 0 else
                             _engine_agrees(H2.module, engine_dims(cxd, "B", n - i + 1, p, tmax), tmax, p)[0])
    report["3"]["engine"] = _engine_agrees(H3.module, engine_dims(cxd, "G", n - i, p, tmax), tmax, p)[0]
    report["ok"] = all(report[k]["injective"] and report[k]["surjective"] and report[k]["dims"]
                       for k in ("1", "2", "3")) and report["2"]["engine"] and report["3"]["engine"]
    return report


# -- residues ----------------------------------------------------------------


def residue_sequence(E: LogDivisor, c, i, which, p, D=8):
    """Certify residue sequence ``which`` (1..4) along {x_c = 0} in form degree i.

    (1) Omega, (2) B, (3) Z, (4) G: 0 -> X^i(log E - D) -> X^i(log E) -> X^{i-1}_D(log (E - D)|_D) -> 0.
    Checked in every multidegree of S-degree <= D (pushforwards for 2..4).
    Returns a report with the failing multidegrees, if any.
    """
    if which not in (1, 2, 3, 4):
        raise ValueError("which must be 1, 2, 3 or 4")
    rd = ResidueData(E.n, p, E.E, c)
    q = 1 if which == 1 else p
    fails = []
    count = 0
    for a in rd.big.multidegrees(D * q):
        res = rd.check(which, a, i)
        count += 1
        bad = sorted(k for k, v in res.items() if not v)
        if bad:
            fails.append({"a": list(a), "failed": bad})
    return {"which": which, "i": i, "c": c, "E": list(E.E), "p": p, "D": D,
            "multidegrees": count, "ok": not fails, "failures": fails[:10]}


def residue_suite(E: LogDivisor, c, p, D=8):
    """All four residue sequences, form degrees taken in descending order as in
    the inductive construction of the B and Z sequences."""
    out = []
    for which in (1, 2, 3, 4):
        for i in range(E.n, -1, -1):
            out.append(residue_sequence(E, c, i, which, p, D))
    return out


# -- regular case --------------------------------------------------------------


def regular_cartier_certificate(n, p, D=None):
    """C^{-1}: Omega^i -> Z/B on S = F_p[x_1..x_n] is an isomorphism.

    Checked as module maps (injective and surjective), by equal graded
    dimensions in every degree <= D (default 2np), and by acyclicity of the
    pushed-forward complex in the multidegrees that are not divisible by p
    (the integral degree class is the only one carrying cohomology).  A
    piece depends only on a mod p and on which a_j vanish, so the box
    [0, p]^n meets every isomorphism type.
    """
    D = 2 * n * p if D is None else D
    ring = standard_ring(n, p)
    datum = DeRhamDatum(ring.zero())
    cx = LogComplex(n, p)
    rows = []
    for i in range(n + 1):
        L = CartierLevelOne(datum, i)
        Om, ZB = datum.forms[i], L.ZB.module
        bad = [t for t in range(D + 1) if Om.graded_piece_dim(t) != ZB.graded_piece_dim(t)]
        acyclic = all(len(cx.cycles(a, i)) == len(cx.boundaries(a, i))
                      for a in product(range(p + 1), repeat=n) if any(x % p for x in a))
        row = {"i": i, "injective": is_injective(L.cinv), "surjective": is_surjective(L.cinv),
               "dims": not bad, "dim_mismatch": bad, "other_classes_acyclic": acyclic}
        row["ok"] = row["injective"] and row["surjective"] and row["dims"] and acyclic
        rows.append(row)
    return {"n": n, "p": p, "D": D, "rows": rows, "ok": all(r["ok"] for r in rows)}
