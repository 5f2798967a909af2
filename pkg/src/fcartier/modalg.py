"""Graded presented modules over S = F_p[x_1..x_n] and homological algebra.

Vectors in a free module are dicts {(component, exponents): coefficient}.
A matrix is a list of such vectors, one per source generator (its image).
Degrees are Fractions so that Frobenius pushforwards, whose natural grading
lives in (1/p^e)Z, need no rescaling.
"""

from __future__ import annotations

import math
from collections import defaultdict
from fractions import Fraction
from itertools import combinations

from .arith import Poly, Ring, monomials_of_degree
from .errors import DegreeBlowup, NotDomain, NotHomogeneous, NotIso
from .groebner import DEFAULT_DEGREE_CAP, TermOrder, groebner
from .linalg import independent_subset

# ---------------------------------------------------------------------------
# vectors


def vadd(u, v, p, c=1):
    """u + c*v as a new dict."""
    out = dict(u)
    for k, a in v.items():
        b = (out.get(k, 0) + c * a) % p
        if b:
            out[k] = b
        else:
            out.pop(k, None)
    return out


def vscale(v, c, p):
    c %= p
    if not c:
        return {}
    return {k: a * c % p for k, a in v.items()}


def vmul_poly(poly_terms, v, p):
    """A polynomial (dict exps->c) times a vector."""
    out = {}
    for m, c in poly_terms.items():
        for (j, e), a in v.items():
            k = (j, tuple(x + y for x, y in zip(m, e)))
            out[k] = (out.get(k, 0) + c * a) % p
    return {k: a for k, a in out.items() if a}


def vmul_mono(v, m, c, p):
    return {(j, tuple(x + y for x, y in zip(m, e))): a * c % p for (j, e), a in v.items()}


def apply_matrix(A, v, p):
    """Image of v (vector on the source generators) under the matrix A."""
    out = {}
    for (j, e), a in v.items():
        col = A[j]
        if any(e):
            for (k, f), b in col.items():
                key = (k, tuple(x + y for x, y in zip(e, f)))
                out[key] = (out.get(key, 0) + a * b) % p
        else:
            for key, b in col.items():
                out[key] = (out.get(key, 0) + a * b) % p
    return {k: a for k, a in out.items() if a}


def compose_matrices(B, A, p):
    """Matrix of (B after A)."""
    return [apply_matrix(B, col, p) for col in A]


def vec_entry(v, j):
    """Component j of v as a polynomial dict."""
    return {e: a for (k, e), a in v.items() if k == j}


def vec_from_entries(entries):
    out = {}
    for j, poly in entries.items():
        for e, a in poly.items():
            out[(j, e)] = a
    return out


def vshift_comps(v, offset):
    return {(j + offset, e): a for (j, e), a in v.items()}


def vrestrict(v, lo, hi, offset=0):
    """Components lo <= j < hi, renumbered by subtracting offset."""
    return {(j - offset, e): a for (j, e), a in v.items() if lo <= j < hi}


def unit_vec(j, n):
    return {(j, (0,) * n): 1}


def vec_degree(v, degrees, weights):
    """Degree of a homogeneous vector; None if zero; raises if inhomogeneous."""
    d = None
    for (j, e), _ in v.items():
        t = degrees[j] + sum(a * w for a, w in zip(e, weights))
        if d is None:
            d = t
        elif d != t:
            raise NotHomogeneous(f"inhomogeneous vector: degrees {d} and {t}")
    return d


# ---------------------------------------------------------------------------
# orders and Gröbner bases on free modules with rational degrees


def _scale_of(degrees):
    L = 1
    for d in degrees:
        d = Fraction(d)
        L = L * d.denominator // math.gcd(L, d.denominator)
    return L


def module_order(ring: Ring, degrees, precedence=None, blocks=None):
    L = _scale_of(degrees)
    shifts = [int(Fraction(d) * L) for d in degrees]
    weights = [w * L for w in ring.weights]
    return TermOrder(ring.n, max(1, len(degrees)), shifts=shifts, weights=weights,
                     precedence=precedence, blocks=blocks)


class Submodule:
    """Submodule of a graded free module generated by ``gens``.

    ``gb()`` is a Gröbner basis of the submodule; ``lift`` and ``syzygies``
    use the augmented module {(g_i, e_i)} under an order in which the
    ambient components dominate, so its elements with vanishing ambient part
    are exactly the syzygies and normal forms of (v, 0) yield coefficients.
    """

    def __init__(self, ring: Ring, degrees, gens, degree_cap=DEFAULT_DEGREE_CAP, gen_degrees=None):
        self.ring = ring
        self.degrees = [Fraction(d) for d in degrees]
        self.gens = [g for g in gens]
        self.degree_cap = degree_cap
        self._gb = None
        self._aug = None
        self._gen_degrees = list(gen_degrees) if gen_degrees is not None else None

    @property
    def gen_degrees(self):
        if self._gen_degrees is None:
            out = []
            w = self.ring.weights
            for g in self.gens:
                d = vec_degree(g, self.degrees, w)
                out.append(d if d is not None else Fraction(0))
            self._gen_degrees = out
        return self._gen_degrees

    def gb(self):
        if self._gb is None:
            order = module_order(self.ring, self.degrees)
            self._gb = groebner(self.gens, order, self.ring.p, degree_cap=self.degree_cap,
                                track_minimal=True)
        return self._gb

    def contains(self, v):
        if not v:
            return True
        if not self.gens:
            return False
        return self.gb().contains(v)

    def reduce(self, v):
        if not self.gens:
            return dict(v)
        return self.gb().reduce(v)

    def minimal_gens(self):
        """A minimal homogeneous generating subset."""
        if not self.gens:
            return []
        return [self.gens[i] for i in sorted(self.gb().minimal_inputs)]

    def _augmented(self):
        if self._aug is None:
            r = len(self.degrees)
            m = len(self.gens)
            degs = self.degrees + self.gen_degrees
            order = module_order(self.ring, degs, blocks=[1] * r + [0] * m)
            z = (0,) * self.ring.n
            vecs = []
            for i, g in enumerate(self.gens):
                v = dict(g)
                v[(r + i, z)] = 1
                vecs.append(v)
            self._aug = (groebner(vecs, order, self.ring.p, degree_cap=self.degree_cap), order)
        return self._aug

    def syzygies(self, minimal=True):
        """Generators of the syzygy module, as vectors on the generators."""
        m = len(self.gens)
        if m == 0:
            return []
        r = len(self.degrees)
        gb, order = self._augmented()
        out = []
        for g in gb.elems:
            if order.comp(g.lead) >= r:
                v = order.decode(g.as_dict())
                out.append({(j - r, e): a for (j, e), a in v.items()})
        if minimal and out:
            out = Submodule(self.ring, self.gen_degrees, out, self.degree_cap).minimal_gens()
        return out

    def lift(self, v):
        """Coefficients c (vector on generators) with sum c_i g_i = v, or None."""
        if not v:
            return {}
        if not self.gens:
            return None
        r = len(self.degrees)
        gb, order = self._augmented()
        nf = gb.reduce_key(order.encode(v, self.ring.p))
        p = self.ring.p
        out = {}
        for k, a in nf.items():
            j = order.comp(k)
            if j < r:
                return None
            out[(j - r, order.exps(k))] = (-a) % p
        return out


# ---------------------------------------------------------------------------
# presented modules and maps


class PresentedModule:
    """coker(relations -> free module on generators of the given degrees)."""

    def __init__(self, ring: Ring, degrees, relations=(), label=None, check=True):
        self.ring = ring
        self.degrees = [Fraction(d) for d in degrees]
        self.relations = [dict(r) for r in relations if r]
        self.label = label
        self._sub = None
        if check:
            for r in self.relations:
                vec_degree(r, self.degrees, ring.weights)

    @property
    def rank(self):
        return len(self.degrees)

    @property
    def p(self):
        return self.ring.p

    @property
    def n(self):
        return self.ring.n

    def rel_sub(self):
        if self._sub is None:
            self._sub = Submodule(self.ring, self.degrees, self.relations)
        return self._sub

    def reduce(self, v):
        return self.rel_sub().reduce(v)

    def is_zero_elem(self, v):
        return self.rel_sub().contains(v)

    def is_zero(self):
        if not self.degrees:
            return True
        z = (0,) * self.n
        return all(self.rel_sub().contains({(j, z): 1}) for j in range(self.rank))

    def gen(self, j):
        return unit_vec(j, self.n)

    def __repr__(self):
        return f"PresentedModule(rank={self.rank}, relations={len(self.relations)}, label={self.label!r})"

    # graded structure ------------------------------------------------------
    def lead_data(self):
        """Per component, the lead monomials of a GB of the relations."""
        out = defaultdict(list)
        if self.relations:
            gb = self.rel_sub().gb()
            comps, monos = gb.leads()
            for c, m in zip(comps, monos):
                out[c].append(m)
        return out

    def graded_piece_dim(self, t):
        t = Fraction(t)
        leads = self.lead_data()
        n = self.n
        total = 0
        for j, d in enumerate(self.degrees):
            k = t - d
            if k < 0 or k.denominator != 1:
                continue
            lm = leads.get(j, [])
            for m in monomials_of_degree(n, int(k), self.ring.weights):
                if not any(all(a <= b for a, b in zip(l, m)) for l in lm):
                    total += 1
        return total

    def krull_dim(self):
        """Dimension of the support (-1 for the zero module)."""
        leads = self.lead_data()
        n = self.n
        best = -1
        for j in range(self.rank):
            lm = leads.get(j, [])
            if any(not any(m) for m in lm):
                continue
            for size in range(n, -1, -1):
                if size <= best:
                    break
                ok = False
                for V in combinations(range(n), size):
                    Vs = set(V)
                    if not any(all(a == 0 or i in Vs for i, a in enumerate(m)) for m in lm):
                        ok = True
                        break
                if ok:
                    best = max(best, size)
                    break
        return best

    def is_finite_length(self):
        return self.krull_dim() <= 0

    def twist(self, s):
        return PresentedModule(self.ring, [d - Fraction(s) for d in self.degrees], self.relations,
                               label=self.label, check=False)

    def direct_sum(self, other):
        r = self.rank
        rels = self.relations + [vshift_comps(v, r) for v in other.relations]
        return PresentedModule(self.ring, self.degrees + other.degrees, rels, check=False)

    # pruning ---------------------------------------------------------------
    def prune(self):
        """Remove generators killed by unit pivots; returns PruneResult."""
        return prune(self)


class ModuleMap:
    """Degree-preserving map given by the images of the source generators."""

    def __init__(self, source: PresentedModule, target: PresentedModule, matrix, shift=0,
                 check=True, label=None):
        if len(matrix) != source.rank:
            raise ValueError(f"matrix has {len(matrix)} columns, source rank {source.rank}")
        self.source = source
        self.target = target
        self.matrix = [dict(c) for c in matrix]
        self.shift = Fraction(shift)
        self.label = label
        if check:
            self.check()

    @property
    def p(self):
        return self.source.ring.p

    def check(self):
        w = self.source.ring.weights
        for j, col in enumerate(self.matrix):
            d = vec_degree(col, self.target.degrees, w)
            if d is not None and d != self.source.degrees[j] + self.shift:
                raise NotHomogeneous(f"column {j} has degree {d}, expected {self.source.degrees[j] + self.shift}")
        for r in self.source.relations:
            img = apply_matrix(self.matrix, r, self.p)
            if img and not self.target.is_zero_elem(img):
                from .errors import IllDefined
                raise IllDefined(f"relation not mapped into target relations ({self.label or 'map'})")

    def apply(self, v):
        return apply_matrix(self.matrix, v, self.p)

    def __mul__(self, other):
        """Composition self after other."""
        if other.target.rank != self.source.rank:
            raise ValueError("incompatible maps")
        return ModuleMap(other.source, self.target, compose_matrices(self.matrix, other.matrix, self.p),
                         shift=self.shift + other.shift, check=False)

    def equals(self, other):
        """Equality as maps (entries equal modulo target relations)."""
        return all(self.target.is_zero_elem(vadd(a, b, self.p, -1))
                   for a, b in zip(self.matrix, other.matrix))

    def is_zero(self):
        return all(self.target.is_zero_elem(c) for c in self.matrix)


def identity_map(M: PresentedModule):
    return ModuleMap(M, M, [M.gen(j) for j in range(M.rank)], check=False)


def zero_map(M, N):
    return ModuleMap(M, N, [{} for _ in range(M.rank)], check=False)


def free_module(ring, degrees, label=None):
    return PresentedModule(ring, degrees, [], label=label)


class PruneResult:
    def __init__(self, module, to_new, to_old, kept):
        self.module = module
        self.to_new = to_new      # ModuleMap original -> pruned
        self.to_old = to_old      # ModuleMap pruned -> original
        self.kept = kept          # original indices of surviving generators


def prune(M: PresentedModule, minimize=True):
    p = M.p
    n = M.n
    z = (0,) * n
    rels = [dict(r) for r in M.relations]
    occ = defaultdict(set)
    for i, r in enumerate(rels):
        for (j, _) in r:
            occ[j].add(i)
    alive = set(range(len(rels)))
    subst = {}
    socc = defaultdict(set)       # comp -> eliminated comps whose expression uses it
    for i in range(len(rels)):
        if i not in alive:
            continue
        r = rels[i]
        piv = None
        for (j, e), a in r.items():
            if e == z and j not in subst:
                piv = (j, a)
                break
        if piv is None:
            continue
        j, a = piv
        inv = pow(a, -1, p)
        expr = {k: (-c * inv) % p for k, c in r.items() if k != (j, z)}
        expr = {k: c for k, c in expr.items() if c}
        alive.discard(i)
        for (jj, _) in r:
            occ[jj].discard(i)

        def substitute(vec):
            part = {e: c for (jj, e), c in vec.items() if jj == j}
            if not part:
                return vec
            out = {k: c for k, c in vec.items() if k[0] != j}
            for e, c in part.items():
                for (kk, f), b in expr.items():
                    key = (kk, tuple(x + y for x, y in zip(e, f)))
                    v = (out.get(key, 0) + c * b) % p
                    if v:
                        out[key] = v
                    else:
                        out.pop(key, None)
            return out

        for k in list(occ[j]):
            old = rels[k]
            new = substitute(old)
            for (jj, _) in old:
                occ[jj].discard(k)
            rels[k] = new
            if new:
                for (jj, _) in new:
                    occ[jj].add(k)
            else:
                alive.discard(k)
        occ.pop(j, None)
        for k in list(socc[j]):
            old = subst[k]
            new = substitute(old)
            for (jj, _) in old:
                socc[jj].discard(k)
            subst[k] = new
            for (jj, _) in new:
                socc[jj].add(k)
        socc.pop(j, None)
        subst[j] = expr
        for (jj, _) in expr:
            socc[jj].add(j)
    kept = [j for j in range(M.rank) if j not in subst]
    newidx = {j: t for t, j in enumerate(kept)}
    ren = lambda v: {(newidx[j], e): c for (j, e), c in v.items()}
    new_rels = [ren(rels[i]) for i in sorted(alive) if rels[i]]
    Mp = PresentedModule(M.ring, [M.degrees[j] for j in kept], new_rels, label=M.label, check=False)
    if minimize and new_rels:
        Mp = PresentedModule(M.ring, Mp.degrees, Mp.rel_sub().minimal_gens(), label=M.label, check=False)
    to_new_cols = []
    for j in range(M.rank):
        if j in subst:
            to_new_cols.append(ren(subst[j]))
        else:
            to_new_cols.append({(newidx[j], z): 1})
    to_new = ModuleMap(M, Mp, to_new_cols, check=False)
    to_old = ModuleMap(Mp, M, [{(j, z): 1} for j in kept], check=False)
    return PruneResult(Mp, to_new, to_old, kept)


# ---------------------------------------------------------------------------
# subquotients: (span K + I) / I inside a free module


class Subquotient:
    """The module (K + I)/I for vectors K, I of a graded free module.

    ``module`` is a pruned presentation whose generators are a subset of K;
    ``lift(v)`` writes an ambient vector v of K + I in those generators.
    """

    def __init__(self, ring, degrees, K, I, label=None, prune_result=True):
        self.ring = ring
        self.degrees = [Fraction(d) for d in degrees]
        self.K = [dict(k) for k in K if k]
        self.I = [dict(i) for i in I if i]
        self._joint = Submodule(ring, self.degrees, self.K + self.I)
        nK = len(self.K)
        kdeg = []
        for k in self.K:
            d = vec_degree(k, self.degrees, ring.weights)
            kdeg.append(d if d is not None else Fraction(0))
        rels = []
        for s in self._joint.syzygies():
            v = {(j, e): a for (j, e), a in s.items() if j < nK}
            if v:
                rels.append(v)
        raw = PresentedModule(ring, kdeg, rels, label=label, check=False)
        self.raw = raw
        if prune_result:
            pr = prune(raw)
            self.module = pr.module
            self.to_new = pr.to_new
            self.kept = pr.kept
        else:
            self.module = raw
            self.to_new = identity_map(raw)
            self.kept = list(range(nK))

    def gens_ambient(self):
        return [self.K[j] for j in self.kept]

    def lift(self, v):
        c = self._joint.lift(v)
        if c is None:
            return None
        nK = len(self.K)
        ck = {(j, e): a for (j, e), a in c.items() if j < nK}
        return self.to_new.apply(ck)


# ---------------------------------------------------------------------------
# kernels, images, cokernels


def _preimage_gens(f: ModuleMap):
    """Generators of {u in F_source : f(u) in relations(target)}."""
    M, N = f.source, f.target
    cols = f.matrix + N.relations
    gdeg = [d + f.shift for d in M.degrees] + [vec_degree(r, N.degrees, M.ring.weights) for r in N.relations]
    sub = Submodule(M.ring, N.degrees, cols, gen_degrees=gdeg)
    m = M.rank
    out = []
    for s in sub.syzygies():
        v = {(j, e): a for (j, e), a in s.items() if j < m}
        if v:
            out.append(v)
    # syzygies of the zero columns are included by the augmented module
    return out


def kernel(f: ModuleMap):
    """(ker f presented, inclusion map ker -> source)."""
    M = f.source
    K = _preimage_gens(f)
    sq = Subquotient(M.ring, M.degrees, K, M.relations, label=f"ker")
    incl = ModuleMap(sq.module, M, sq.gens_ambient(), check=False)
    return sq.module, incl


def kernel_sq(f: ModuleMap):
    M = f.source
    K = _preimage_gens(f)
    return Subquotient(M.ring, M.degrees, K, M.relations, label="ker")


def image_coker(f: ModuleMap):
    """(image, inclusion image -> target, cokernel, projection target -> coker)."""
    N = f.target
    sq = Subquotient(N.ring, N.degrees, f.matrix, N.relations, label="im")
    incl = ModuleMap(sq.module, N, sq.gens_ambient(), check=False)
    C = PresentedModule(N.ring, N.degrees, N.relations + [c for c in f.matrix if c], label="coker", check=False)
    proj = ModuleMap(N, C, [N.gen(j) for j in range(N.rank)], check=False)
    return sq.module, incl, C, proj


def cokernel(f: ModuleMap):
    return image_coker(f)[2]


def is_surjective(f: ModuleMap):
    N = f.target
    sub = Submodule(N.ring, N.degrees, N.relations + f.matrix)
    return all(sub.contains(N.gen(j)) for j in range(N.rank))


def is_injective(f: ModuleMap):
    M = f.source
    rel = M.rel_sub()
    return all(rel.contains(u) for u in _preimage_gens(f))


def lift_through(f: ModuleMap, v, sub=None):
    """u on the source generators with f(u) = v modulo target relations, or None."""
    N = f.target
    if sub is None:
        sub = Submodule(N.ring, N.degrees, f.matrix + N.relations)
    c = sub.lift(v)
    if c is None:
        return None
    m = f.source.rank
    return {(j, e): a for (j, e), a in c.items() if j < m}


def invert_iso(f: ModuleMap):
    if not (is_injective(f) and is_surjective(f)):
        raise NotIso("map is not an isomorphism")
    N = f.target
    sub = Submodule(N.ring, N.degrees, f.matrix + N.relations)
    cols = [lift_through(f, N.gen(j), sub) for j in range(N.rank)]
    g = ModuleMap(N, f.source, cols, shift=-f.shift, check=True)
    return g


def quotient_by(M: PresentedModule, vecs):
    return PresentedModule(M.ring, M.degrees, M.relations + [v for v in vecs if v], check=False)


# ---------------------------------------------------------------------------
# Hom and duals


def hom_module(M: PresentedModule, N: PresentedModule):
    """Hom_S(M, N) as a Subquotient of N^{rank M}; block j holds the image of e_j."""
    ring = M.ring
    m, r = M.rank, N.rank
    # Hom(F_M, N) = sum_j N(a_j): generator (j, k) of degree b_k - a_j
    degs0 = [N.degrees[k] - M.degrees[j] for j in range(m) for k in range(r)]
    rels0 = [vshift_comps(v, j * r) for j in range(m) for v in N.relations]
    H0 = PresentedModule(ring, degs0, rels0, check=False)
    relM = M.relations
    degs1 = []
    for rel in relM:
        d = vec_degree(rel, M.degrees, ring.weights)
        degs1 += [N.degrees[k] - d for k in range(r)]
    rels1 = [vshift_comps(v, l * r) for l in range(len(relM)) for v in N.relations]
    H1 = PresentedModule(ring, degs1, rels1, check=False)
    # phi |-> (sum_j U_{j,l} phi_j)_l
    z = (0,) * ring.n
    cols = []
    for j in range(m):
        for k in range(r):
            col = {}
            for l, rel in enumerate(relM):
                for (jj, e), a in rel.items():
                    if jj == j:
                        key = (l * r + k, e)
                        col[key] = (col.get(key, 0) + a) % ring.p
            cols.append({kk: a for kk, a in col.items() if a})
    phi = ModuleMap(H0, H1, cols, check=False)
    K = _preimage_gens(phi)
    return Subquotient(ring, degs0, K, rels0, label="Hom")


def hom_element_matrix(sq: Subquotient, idx, M, N):
    """The map M -> N encoded by generator idx of a Hom subquotient."""
    vec = sq.gens_ambient()[idx]
    r = N.rank
    cols = [dict() for _ in range(M.rank)]
    for (c, e), a in vec.items():
        j, k = divmod(c, r)
        cols[j][(k, e)] = a
    return cols


def base_ring_module(ring: Ring, f: Poly | None = None):
    if f is None or f.is_zero():
        return PresentedModule(ring, [0], [], label="S")
    return PresentedModule(ring, [0], [{(0, m): c for m, c in f.terms.items()}], label="R")


def reflexivize(M: PresentedModule, base: PresentedModule | None = None):
    """(M**, canonical map M -> M**) with duals taken into ``base`` (default S)."""
    ring = M.ring
    if base is None:
        base = base_ring_module(ring)
    D1 = hom_module(M, base)
    Mstar = D1.module
    D2 = hom_module(Mstar, base)
    Mss = D2.module
    phis = D1.gens_ambient()            # vectors in base^m, block j = phi(e_j)
    r = base.rank
    cols = []
    for j in range(M.rank):
        ev = {}
        for l, phi in enumerate(phis):
            for (c, e), a in phi.items():
                jj, k = divmod(c, r)
                if jj == j:
                    ev[(l * r + k, e)] = a
        lifted = D2.lift(ev)
        if lifted is None:
            raise RuntimeError("evaluation map did not land in the double dual")
        cols.append(lifted)
    can = ModuleMap(M, Mss, cols, check=False)
    return Mss, can


def torsion_submodule(M: PresentedModule, base: PresentedModule | None = None, domain=True):
    """ker(M -> M**) with inclusion; equals torsion over a reduced base ring."""
    if not domain:
        raise NotDomain("torsion via double dual needs a reduced base ring")
    Mss, can = reflexivize(M, base)
    return kernel(can)


def local_torsion(M: PresentedModule, var=0):
    """(0 :_M x_var^oo) with inclusion, by saturating the relation module.

    Equals the torsion submodule when M is torsion-free away from the
    irrelevant ideal over a domain (isolated singularity setting).
    """
    ring = M.ring
    n = ring.n
    prec = tuple(i for i in range(n) if i != var) + (var,)
    if not M.relations:
        Z = PresentedModule(ring, [], [])
        return Z, ModuleMap(Z, M, [], check=False)
    order = module_order(ring, M.degrees, precedence=prec)
    gb = groebner(M.relations, order, ring.p)
    sat = []
    for g in gb.elems:
        v = order.decode(g.as_dict())
        k = min(e[var] for (_, e) in v)
        if k:
            sat.append({(j, tuple(a - k if i == var else a for i, a in enumerate(e))): c
                        for (j, e), c in v.items()})
    sq = Subquotient(ring, M.degrees, sat, M.relations, label="tors")
    incl = ModuleMap(sq.module, M, sq.gens_ambient(), check=False)
    return sq.module, incl


# ---------------------------------------------------------------------------
# resolutions and Ext


class Resolution:
    """Free resolution P_0 <- P_1 <- ... of M.

    ``degrees[k]`` are generator degrees of P_k, ``d[k]`` (k >= 1) the matrix
    of P_k -> P_{k-1}; ``aug`` maps generators of P_0 to vectors of M's free
    module and ``to_p0`` maps M's generators into P_0.
    """

    def __init__(self, ring, degrees, d, aug, to_p0, module):
        self.ring = ring
        self.degrees = degrees
        self.d = d
        self.aug = aug
        self.to_p0 = to_p0
        self.module = module

    @property
    def length(self):
        return len(self.degrees) - 1


def free_resolution(M: PresentedModule, length=None):
    ring = M.ring
    if length is None:
        length = ring.n + 1
    pr = prune(M)
    P = pr.module
    degrees = [list(P.degrees)]
    d = [None]
    cur_deg = P.degrees
    cur = P.relations
    k = 1
    while cur and k <= length:
        sub = Submodule(ring, cur_deg, cur)
        gens = sub.minimal_gens()
        gdeg = []
        for g in gens:
            gdeg.append(vec_degree(g, cur_deg, ring.weights))
        degrees.append(gdeg)
        d.append(gens)
        if k == length:
            break
        sub2 = Submodule(ring, cur_deg, gens)
        cur = sub2.syzygies()
        cur_deg = gdeg
        k += 1
    return Resolution(ring, degrees, d, pr.to_old.matrix, pr.to_new.matrix, P)


def _dual_degrees(degs, twist):
    return [-Fraction(a) - Fraction(twist) for a in degs]


def _transpose(dmat, nrows, n):
    """Columns of d^T: for each row index j of d, the vector sum_l d_{j,l} e*_l."""
    cols = [dict() for _ in range(nrows)]
    for l, col in enumerate(dmat):
        for (j, e), a in col.items():
            cols[j][(l, e)] = a
    return cols


class ExtData:
    """Ext^q(M, S(twist)) = K / I inside Hom(P_q, S(twist))."""

    def __init__(self, res: Resolution, q, twist):
        ring = res.ring
        self.res = res
        self.q = q
        self.twist = Fraction(twist)
        n = ring.n
        if q > res.length:
            self.degrees = []
            self.K, self.I = [], []
        else:
            self.degrees = _dual_degrees(res.degrees[q], twist)
            rq = len(res.degrees[q])
            if q + 1 <= res.length:
                dT = _transpose(res.d[q + 1], rq, n)
                ddeg = _dual_degrees(res.degrees[q + 1], twist)
                sub = Submodule(ring, ddeg, dT)
                self.K = sub.syzygies()
            else:
                self.K = [unit_vec(j, n) for j in range(rq)]
            if q >= 1:
                self.I = [c for c in _transpose(res.d[q], len(res.degrees[q - 1]), n) if c]
            else:
                self.I = []
        self._sq = None

    @property
    def sq(self):
        if self._sq is None:
            self._sq = Subquotient(self.res.ring, self.degrees, self.K, self.I, label=f"Ext^{self.q}")
        return self._sq

    @property
    def module(self):
        return self.sq.module


def ext_group(M: PresentedModule, q, twist=0, res=None):
    res = res or free_resolution(M, length=q + 1)
    return ExtData(res, q, twist).module


def comparison_maps(alpha: ModuleMap, resM: Resolution, resN: Resolution, upto):
    """Chain map c_k: P_k(M) -> P_k(N), k <= upto, lifting alpha."""
    p = alpha.p
    ring = resM.ring
    c0 = [apply_matrix(resN.to_p0, alpha.apply(v), p) for v in resM.aug]
    maps = [c0]
    for k in range(1, upto + 1):
        if k > resM.length:
            break
        targets_deg = resN.degrees[k - 1]
        if k <= resN.length:
            sub = Submodule(ring, targets_deg, resN.d[k])
        else:
            sub = None
        ck = []
        for col in resM.d[k]:
            v = apply_matrix(maps[k - 1], col, p)
            if not v:
                ck.append({})
                continue
            if sub is None:
                raise RuntimeError("comparison map: target resolution too short")
            u = sub.lift(v)
            if u is None:
                raise RuntimeError("comparison map: element not in the image of the differential")
            ck.append(u)
        maps.append(ck)
    return maps


def pull_cocycle(kappa, cq, p):
    """kappa o c_q for kappa in Hom(P_q(N), S): a vector on P_q(M)^*."""
    out = {}
    for l, col in enumerate(cq):
        for (j, e), a in col.items():
            for (jj, f), b in kappa.items():
                if jj == j:
                    key = (l, tuple(x + y for x, y in zip(e, f)))
                    out[key] = (out.get(key, 0) + a * b) % p
    return {k: a for k, a in out.items() if a}


def ext_induced(alpha: ModuleMap, q, twist=0, resM=None, resN=None):
    """Ext^q(N, S(twist)) -> Ext^q(M, S(twist)) induced by alpha: M -> N."""
    M, N = alpha.source, alpha.target
    resM = resM or free_resolution(M, length=q + 1)
    resN = resN or free_resolution(N, length=q + 1)
    EM, EN = ExtData(resM, q, twist), ExtData(resN, q, twist)
    cmaps = comparison_maps(alpha, resM, resN, q)
    p = alpha.p
    cols = []
    for kappa in EN.sq.gens_ambient():
        if q < len(cmaps):
            img = pull_cocycle(kappa, cmaps[q], p)
        else:
            img = {}
        c = EM.sq.lift(img) if img else {}
        if c is None:
            raise RuntimeError("pulled-back cocycle is not a cocycle")
        cols.append(c)
    return ModuleMap(EN.module, EM.module, cols, check=False)


def _trim_images(images, degrees, I, ring):
    """Reduce images modulo I and keep an F_p-basis of them in each degree.

    The submodule they generate together with I is unchanged.
    """
    p = ring.p
    red = Submodule(ring, degrees, I) if I else None
    by_deg = {}
    for v in images:
        if red is not None:
            v = red.reduce(v)
        if v:
            by_deg.setdefault(vec_degree(v, degrees, ring.weights), []).append(v)
    out = []
    for t in sorted(by_deg):
        vs = by_deg[t]
        keys = sorted({k for v in vs for k in v})
        col = {k: j for j, k in enumerate(keys)}
        rows = []
        for v in vs:
            r = [0] * len(keys)
            for k, a in v.items():
                r[col[k]] = a
            rows.append(r)
        out += [vs[j] for j in independent_subset(rows, p)]
    return out


def ext_cokernel_test(images, EM: ExtData):
    """Is K_M contained in span(images) + I_M?  Returns (bool, cokernel module or None)."""
    ring = EM.res.ring
    images = _trim_images(images, EM.degrees, EM.I, ring)
    J = Submodule(ring, EM.degrees, images + EM.I)
    if all(J.contains(k) for k in EM.K):
        return True, None
    sq = Subquotient(ring, EM.degrees, EM.K, J.minimal_gens(), label="coker")
    return False, sq.module
