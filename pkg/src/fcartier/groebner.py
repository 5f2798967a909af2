"""Buchberger engine for ideals and submodules of free modules over F_p[x_1..x_n].

Terms c*x^a*e_j are packed into a single Python int ("key") such that integer
comparison is the monomial order and multiplying by x^b adds a fixed integer.
Divisibility and same-component tests are then a handful of bit operations.
"""

from __future__ import annotations

import heapq
from fractions import Fraction

from .arith import Poly, Ring, monomials_of_degree
from .errors import DegreeBlowup, Indeterminate, NotHomogeneous

DEFAULT_DEGREE_CAP = 40

EB = 16                       # bits per exponent field
EMAX = (1 << (EB - 1)) - 1    # largest exponent; bit EB-1 of each field is a guard
DB = 40                       # bits of the degree field
DOFF = 1 << (DB - 2)          # offset keeping shifted degrees non-negative
XB = 24                       # bits of the elimination field


class TermOrder:
    """A term order on a free module with ``ncomp`` components.

    kind: grevlex (default), lex or glex on monomials.  Modules use
    degree-then-monomial-then-component ("term over position") unless a
    component ``block`` is given; higher blocks dominate everything else,
    which yields elimination orders.  ``elim`` lists variables whose total
    exponent is compared first (product order), used for saturation by an
    arbitrary polynomial.  ``shifts`` are integer degrees of the components
    in units where variable i has degree ``weights[i]``.
    """

    def __init__(self, n, ncomp=1, shifts=None, weights=None, precedence=None,
                 kind="grevlex", blocks=None, elim=()):
        self.n = n
        self.ncomp = ncomp
        self.kind = kind
        self.weights = tuple(weights) if weights else (1,) * n
        self.precedence = tuple(precedence) if precedence is not None else tuple(range(n))
        self.shifts = list(shifts) if shifts is not None else [0] * ncomp
        self.blocks = list(blocks) if blocks is not None else [0] * ncomp
        self.elim = tuple(elim)
        cbits = max(1, ncomp.bit_length())
        self.cbits = cbits
        self.cmask = (1 << cbits) - 1
        pos = cbits
        fieldpos = [0] * n
        if kind == "lex":
            self.degpos = pos
            pos += DB
            for v in reversed(self.precedence):
                fieldpos[v] = pos
                pos += EB
        else:
            order_low_to_high = self.precedence if kind == "grevlex" else tuple(reversed(self.precedence))
            for v in order_low_to_high:
                fieldpos[v] = pos
                pos += EB
            self.degpos = pos
            pos += DB
        self.elimpos = pos
        pos += XB
        self.blockpos = pos
        self.fieldpos = fieldpos
        self.emask = 0
        self.guard = 0
        for v in range(n):
            self.emask |= ((1 << EB) - 1) << fieldpos[v]
            self.guard |= (1 << (EB - 1)) << fieldpos[v]
        self.reversed_fields = kind == "grevlex"
        wt = []
        for v in range(n):
            w = self.weights[v] << self.degpos
            if self.reversed_fields:
                w -= 1 << fieldpos[v]
            else:
                w += 1 << fieldpos[v]
            if v in self.elim:
                w += 1 << self.elimpos
            wt.append(w)
        self.wt = wt
        const = DOFF << self.degpos
        if self.reversed_fields:
            for v in range(n):
                const += EMAX << fieldpos[v]
        self.base = [const + (self.shifts[c] << self.degpos) + (self.blocks[c] << self.blockpos)
                     + (ncomp - 1 - c) for c in range(ncomp)]

    # encoding -------------------------------------------------------------
    def key(self, comp, exps):
        k = self.base[comp]
        wt = self.wt
        for i, a in enumerate(exps):
            if a:
                k += a * wt[i]
        return k

    def mono_delta(self, exps):
        d = 0
        for i, a in enumerate(exps):
            if a:
                d += a * self.wt[i]
        return d

    def comp(self, key):
        return self.ncomp - 1 - (key & self.cmask)

    def exps(self, key):
        fp = self.fieldpos
        m = (1 << (EB - 1)) - 1
        if self.reversed_fields:
            return tuple(EMAX - ((key >> fp[v]) & m) for v in range(self.n))
        return tuple((key >> fp[v]) & m for v in range(self.n))

    def degree(self, key):
        """Shifted (module) degree of a term, in weight units."""
        return ((key >> self.degpos) & ((1 << DB) - 1)) - DOFF

    def mono_degree(self, key):
        return self.degree(key) - self.shifts[self.comp(key)]

    def divides(self, kg, kt):
        if (kg ^ kt) & self.cmask:
            return False
        em = self.emask
        g = self.guard
        if self.reversed_fields:
            return (((kg & em) | g) - (kt & em)) & g == g
        return (((kt & em) | g) - (kg & em)) & g == g

    def lcm(self, k1, k2):
        c = self.comp(k1)
        e1, e2 = self.exps(k1), self.exps(k2)
        return self.key(c, tuple(a if a > b else b for a, b in zip(e1, e2)))

    def coprime(self, k1, k2):
        return all(a == 0 or b == 0 for a, b in zip(self.exps(k1), self.exps(k2)))

    def encode(self, vec, p):
        """Neutral vector {(comp, exps): c} -> {key: c}."""
        out = {}
        for (c, e), v in vec.items():
            v %= p
            if v:
                out[self.key(c, e)] = v
        return out

    def decode(self, kv):
        return {(self.comp(k), self.exps(k)): v for k, v in kv.items()}


class GBElem:
    __slots__ = ("lead", "tail", "sugar", "src")

    def __init__(self, lead, tail, sugar, src=-1):
        self.lead = lead
        self.tail = tail          # list of (key, coeff) excluding the monic lead
        self.sugar = sugar
        self.src = src

    def as_dict(self):
        d = dict(self.tail)
        d[self.lead] = 1
        return d


class _Reducer:
    """Index of monic elements by component for quick divisor lookup."""

    def __init__(self, order: TermOrder, p: int):
        self.order = order
        self.p = p
        self.by_comp = {}

    def add(self, g: GBElem):
        self.by_comp.setdefault(g.lead & self.order.cmask, []).append(g)

    def remove(self, g: GBElem):
        lst = self.by_comp.get(g.lead & self.order.cmask)
        if lst is not None:
            for i, h in enumerate(lst):
                if h is g:
                    del lst[i]
                    break

    def find(self, k):
        lst = self.by_comp.get(k & self.order.cmask)
        if not lst:
            return None
        order = self.order
        em = order.emask
        g = order.guard
        kt = k & em
        if order.reversed_fields:
            for h in lst:
                if (((h.lead & em) | g) - kt) & g == g:
                    return h
        else:
            ktg = kt | g
            for h in lst:
                if (ktg - (h.lead & em)) & g == g:
                    return h
        return None

    def reduce(self, f: dict, full=True):
        """Reduce f (dict key->coeff, consumed) and return the remainder dict."""
        p = self.p
        heap = [-k for k in f]
        heapq.heapify(heap)
        res = {}
        find = self.find
        pop = heapq.heappop
        push = heapq.heappush
        while heap:
            k = -pop(heap)
            c = f.pop(k, 0)
            if not c:
                continue
            h = find(k)
            if h is None:
                res[k] = c
                if not full:
                    for kk, cc in f.items():
                        res[kk] = cc
                    return res
                continue
            delta = k - h.lead
            for kk, cc in h.tail:
                nk = kk + delta
                old = f.get(nk)
                if old is None:
                    f[nk] = (-c * cc) % p
                    push(heap, -nk)
                else:
                    v = (old - c * cc) % p
                    if v:
                        f[nk] = v
                    else:
                        del f[nk]
        return res


def _make_elem(d: dict, p: int, sugar: int, src=-1):
    lead = max(d)
    lc = d[lead]
    if lc != 1:
        inv = pow(lc, -1, p)
        tail = [(k, v * inv % p) for k, v in d.items() if k != lead]
    else:
        tail = [(k, v) for k, v in d.items() if k != lead]
    tail.sort(reverse=True)
    return GBElem(lead, tail, sugar, src)


class GB:
    """A Gröbner basis of a submodule (or ideal) together with its order."""

    def __init__(self, elems, order: TermOrder, p: int, minimal_inputs=None):
        self.elems = elems
        self.order = order
        self.p = p
        self.minimal_inputs = minimal_inputs
        self._reducer = _Reducer(order, p)
        for g in elems:
            self._reducer.add(g)

    def reduce_key(self, f: dict, full=True):
        return self._reducer.reduce(dict(f), full)

    def reduce(self, vec):
        """Normal form of a neutral vector {(comp, exps): c}."""
        r = self._reducer.reduce(self.order.encode(vec, self.p))
        return self.order.decode(r)

    def contains(self, vec):
        return not self._reducer.reduce(self.order.encode(vec, self.p))

    def leads(self):
        return [self.order.comp(g.lead) for g in self.elems], [self.order.exps(g.lead) for g in self.elems]

    def vectors(self):
        return [self.order.decode(g.as_dict()) for g in self.elems]

    def __len__(self):
        return len(self.elems)


def groebner(vecs, order: TermOrder, p: int, degree_cap=DEFAULT_DEGREE_CAP,
             reduced=True, key_input=False, track_minimal=False):
    """Buchberger with normal (sugar) selection and Gebauer–Möller pair elimination.

    ``vecs`` are neutral vectors unless ``key_input``.  Input generators are
    fed in by degree, after the S-pairs of the same degree, so that those
    surviving reduction form a minimal generating set in the graded case.
    """
    ideal_case = order.ncomp == 1
    inputs = []
    for idx, v in enumerate(vecs):
        d = dict(v) if key_input else order.encode(v, p)
        if d:
            sug = max(order.degree(k) for k in d)
            inputs.append((sug, idx, d))
    inputs.sort(key=lambda t: (t[0], t[1]))
    inputs.reverse()                     # pop() from the end gives the smallest

    G = []                               # all elements ever added
    active = []                          # flags: participates in new pairs
    reducer = _Reducer(order, p)
    pairs = {}                           # (i, j) -> lcm key
    heap = []                            # (sugar, lcm, i, j)
    minimal = []
    cmask = order.cmask
    divides = order.divides

    def add(h: GBElem):
        hi = len(G)
        hl = h.lead
        hc = hl & cmask
        cand = []
        for j, g in enumerate(G):
            if active[j] and (g.lead & cmask) == hc:
                cand.append((j, order.lcm(hl, g.lead)))
        # Gebauer–Möller: keep one pair per minimal lcm; drop the whole
        # group when some pair in it has coprime leads (ideal case only)
        groups = {}
        for j, L in cand:
            groups.setdefault(L, []).append(j)
        keep = []
        lcms = sorted(groups)
        for L in lcms:
            if any(L2 != L and divides(L2, L) for L2 in lcms):
                continue
            js = groups[L]
            if ideal_case and any(order.coprime(hl, G[j].lead) for j in js):
                continue
            keep.append((js[0], L))
        # old pairs killed by the chain criterion
        for (i, j), L in list(pairs.items()):
            if divides(hl, L):
                Li = order.lcm(G[i].lead, hl)
                Lj = order.lcm(G[j].lead, hl)
                if Li != L and Lj != L:
                    del pairs[(i, j)]
        G.append(h)
        active.append(True)
        for j, L in keep:
            gj = G[j]
            s = max(h.sugar + order.degree(L) - order.degree(hl),
                    gj.sugar + order.degree(L) - order.degree(gj.lead))
            pairs[(j, hi)] = L
            heapq.heappush(heap, (s, L, j, hi))
        for j in range(hi):
            if active[j] and (G[j].lead & cmask) == hc and divides(hl, G[j].lead):
                active[j] = False
                reducer.remove(G[j])
        reducer.add(h)

    def check_cap(h):
        if degree_cap is not None:
            e = order.exps(h.lead)
            if sum(e) > degree_cap:
                raise DegreeBlowup(f"basis element of degree {sum(e)} exceeds cap {degree_cap}")

    while heap or inputs:
        # skip stale pairs
        while heap and (heap[0][2], heap[0][3]) not in pairs:
            heapq.heappop(heap)
        take_pair = bool(heap) and (not inputs or heap[0][0] <= inputs[-1][0])
        if take_pair:
            s, L, i, j = heapq.heappop(heap)
            del pairs[(i, j)]
            gi, gj = G[i], G[j]
            di = L - gi.lead
            dj = L - gj.lead
            f = {}
            for k, c in gi.tail:
                f[k + di] = c
            for k, c in gj.tail:
                nk = k + dj
                v = (f.get(nk, 0) - c) % p
                if v:
                    f[nk] = v
                else:
                    f.pop(nk, None)
            if not f:
                continue
            r = reducer.reduce(f, full=False)
            if r:
                h = _make_elem(r, p, s)
                check_cap(h)
                add(h)
        else:
            if not heap and not inputs:
                break
            if not inputs:
                continue
            s, idx, d = inputs.pop()
            r = reducer.reduce(d, full=False)
            if r:
                h = _make_elem(r, p, s, src=idx)
                check_cap(h)
                minimal.append(idx)
                add(h)

    basis = [g for j, g in enumerate(G) if active[j]]
    if reduced:
        basis = _interreduce(basis, order, p)
    return GB(basis, order, p, minimal_inputs=minimal if track_minimal else None)


def _interreduce(basis, order, p):
    basis = sorted(basis, key=lambda g: g.lead)
    out = []
    for idx, g in enumerate(basis):
        others = _Reducer(order, p)
        for h in basis:
            if h is not g:
                others.add(h)
        tail = others.reduce(dict(g.tail), full=True)
        out.append(GBElem(g.lead, sorted(tail.items(), reverse=True), g.sugar, g.src))
    return out


# ---------------------------------------------------------------------------
# ideal-level API over Poly

class Ideal:
    def __init__(self, gens, ring: Ring | None = None):
        gens = [g for g in gens if not g.is_zero()]
        if ring is None:
            if not gens:
                raise ValueError("need a ring for the zero ideal")
            ring = gens[0].ring
        for g in gens:
            g._check(g)
            if g.ring != ring:
                from .errors import SessionMismatch
                raise SessionMismatch("generators from different sessions")
        self.ring = ring
        self.gens = gens

    def is_homogeneous(self):
        return all(g.is_homogeneous() for g in self.gens)


class GroebnerBasis:
    def __init__(self, ring, basis, order, engine: GB):
        self.ring = ring
        self.basis = basis
        self.order = order
        self.engine = engine
        self.reduced = True

    def __iter__(self):
        return iter(self.basis)

    def __len__(self):
        return len(self.basis)


def _ideal_order(ring: Ring, order=None, elim=()):
    order = order or ring.order
    kind = order.kind
    return TermOrder(ring.n, 1, weights=ring.weights, precedence=order.precedence, kind=kind, elim=elim)


def _poly_vec(f: Poly):
    return {(0, m): c for m, c in f.terms.items()}


def buchberger(I: Ideal, order=None, degree_cap=DEFAULT_DEGREE_CAP) -> GroebnerBasis:
    ring = I.ring
    order = order or ring.order
    to = _ideal_order(ring, order)
    eng = groebner([_poly_vec(g) for g in I.gens], to, ring.p, degree_cap=degree_cap)
    basis = [Poly(ring, {e: c for (_, e), c in v.items()}) for v in eng.vectors()]
    basis.sort(key=lambda f: order.key(f.leading_monomial(order)))
    return GroebnerBasis(ring, basis, order, eng)


def normal_form(f: Poly, G: GroebnerBasis) -> Poly:
    r = G.engine.reduce(_poly_vec(f))
    return Poly(f.ring, {e: c for (_, e), c in r.items()})


def ideal_contains(I: Ideal, f: Poly) -> bool:
    return normal_form(f, buchberger(I)).is_zero()


def saturate(I: Ideal, g: Poly, degree_cap=DEFAULT_DEGREE_CAP) -> Ideal:
    """I : g^oo by adjoining t with 1 - t*g and eliminating t."""
    if g.is_zero():
        raise ValueError("cannot saturate by 0")
    ring = I.ring
    big = Ring(ring.vars + ("_t",), ring.p, weights=ring.weights + (1,)) if "_t" not in ring.vars else None
    n = ring.n
    lift = lambda f: Poly(big, {m + (0,): c for m, c in f.terms.items()})
    t = big.var(n)
    gens = [lift(h) for h in I.gens] + [big.one() - t * lift(g)]
    to = TermOrder(n + 1, 1, weights=big.weights, precedence=tuple(range(n + 1)), elim=(n,))
    eng = groebner([_poly_vec(h) for h in gens], to, ring.p, degree_cap=degree_cap)
    out = []
    for v in eng.vectors():
        if all(e[n] == 0 for (_, e) in v):
            out.append(Poly(ring, {e[:n]: c for (_, e), c in v.items()}))
    return Ideal(out, ring)


def saturate_by_variable(I: Ideal, j: int, degree_cap=DEFAULT_DEGREE_CAP) -> Ideal:
    """I : x_j^oo for homogeneous I, via grevlex with x_j last."""
    ring = I.ring
    if not I.is_homogeneous():
        raise NotHomogeneous("variable saturation needs a homogeneous ideal")
    prec = tuple(i for i in range(ring.n) if i != j) + (j,)
    to = TermOrder(ring.n, 1, weights=ring.weights, precedence=prec)
    eng = groebner([_poly_vec(h) for h in I.gens], to, ring.p, degree_cap=degree_cap)
    out = []
    for v in eng.vectors():
        k = min(e[j] for (_, e) in v)
        out.append(Poly(ring, {tuple(a - k if i == j else a for i, a in enumerate(e)): c
                               for (_, e), c in v.items()}))
    return Ideal(out, ring)


def ideals_equal(I: Ideal, J: Ideal) -> bool:
    GI, GJ = buchberger(I), buchberger(J)
    return (all(normal_form(f, GJ).is_zero() for f in I.gens)
            and all(normal_form(f, GI).is_zero() for f in J.gens))


def standard_monomial_count(lead_monos, n, t, weights=None):
    return sum(1 for m in monomials_of_degree(n, t, weights)
               if not any(all(a <= b for a, b in zip(l, m)) for l in lead_monos))


def hilbert_dim(I: Ideal, t: int) -> int:
    if not I.is_homogeneous():
        raise NotHomogeneous("hilbert_dim needs a homogeneous ideal")
    ring = I.ring
    if not I.gens:
        return len(monomials_of_degree(ring.n, t, ring.weights))
    G = buchberger(I)
    leads = [g.leading_monomial(G.order) for g in G.basis]
    return standard_monomial_count(leads, ring.n, t, ring.weights)


def jacobian_ideal(f: Poly) -> Ideal:
    return Ideal([f] + [f.diff(i) for i in range(f.ring.n)], f.ring)


def is_isolated_singularity(f: Poly, degree_cap=DEFAULT_DEGREE_CAP) -> bool:
    """True iff (f, df/dx_i) is m-primary; raises Indeterminate for wild primes.

    A prime is treated as wild for f when some partial derivative of f
    vanishes identically although x_i occurs in f.
    """
    ring = f.ring
    for i in range(ring.n):
        if f.diff(i).is_zero() and any(m[i] for m in f.terms):
            raise Indeterminate(f"d f/d {ring.vars[i]} vanishes identically in characteristic {ring.p}")
    G = buchberger(jacobian_ideal(f), degree_cap=degree_cap)
    for i in range(ring.n):
        # successive powers of x_i until one lies in J or the cap is hit
        e = [0] * ring.n
        for N in range(1, (degree_cap or DEFAULT_DEGREE_CAP) + 1):
            e[i] = N
            if normal_form(ring.monomial(e), G).is_zero():
                break
        else:
            return False
    return True
