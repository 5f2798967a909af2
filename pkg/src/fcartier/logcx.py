"""Logarithmic de Rham complexes on affine space, one multidegree at a time.

On A^n with E a union of coordinate hyperplanes, every sheaf in sight is
spanned by the forms x^a dlog x_J (a in Z^n, J increasing) and the
differential

    d(x^a dlog x_J) = sum_{j not in J} a_j x^a dlog x_j ^ dlog x_J

preserves a.  So the complexes F^e_* Omega^.(log E)(D), their cycles,
boundaries and (higher, twisted) Cartier operators split into finite
dimensional pieces indexed by a.  The S-degree of x^a dlog x_J inside
F^e_* is |a| / p^e.

A twist D = sum d_j [x_j = 0] (d_j = 0 off E) admits x^a dlog x_J iff
a_j >= -d_j + [j in J, j not in E] for every active coordinate j.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

from .errors import BadSupport, DenominatorOverflow
from .linalg import nullspace

E_MAX = 6


def sign_before(c, J):
    return -1 if sum(1 for l in J if l < c) % 2 else 1


# ---------------------------------------------------------------------------
# subspaces of F_p^labels


class Span:
    """Subspace spanned by dict vectors, kept fully reduced on pivot labels."""

    def __init__(self, p, vectors=()):
        self.p = p
        self.piv = {}
        for v in vectors:
            self.add(v)

    def reduce(self, v):
        p = self.p
        v = {k: c % p for k, c in v.items() if c % p}
        for k in [k for k in v if k in self.piv]:
            c = v.get(k)
            if not c:
                continue
            for kk, b in self.piv[k].items():
                x = (v.get(kk, 0) - c * b) % p
                if x:
                    v[kk] = x
                else:
                    v.pop(kk, None)
        return v

    def add(self, v):
        v = self.reduce(v)
        if not v:
            return False
        p = self.p
        k = max(v)
        inv = pow(v[k], -1, p)
        v = {kk: c * inv % p for kk, c in v.items()}
        for kp, w in self.piv.items():
            c = w.get(k)
            if c:
                for kk, b in v.items():
                    x = (w.get(kk, 0) - c * b) % p
                    if x:
                        w[kk] = x
                    else:
                        w.pop(kk, None)
        self.piv[k] = v
        return True

    def contains(self, v):
        return not self.reduce(v)

    def contains_all(self, vs):
        return all(self.contains(v) for v in vs)

    @property
    def dim(self):
        return len(self.piv)

    def basis(self):
        return [dict(self.piv[k]) for k in sorted(self.piv)]

    def same_as(self, other):
        return self.dim == other.dim and self.contains_all(other.basis())


def vec_add(u, v, p, c=1):
    out = dict(u)
    for k, a in v.items():
        x = (out.get(k, 0) + c * a) % p
        if x:
            out[k] = x
        else:
            out.pop(k, None)
    return out


def combo(coeffs, vecs, p):
    out = {}
    for a, v in zip(coeffs, vecs):
        if a % p:
            out = vec_add(out, v, p, a)
    return out


def kernel_coeffs(images, p):
    """Basis of coefficient vectors c with sum c_k images_k = 0."""
    m = len(images)
    labels = sorted({k for v in images for k in v})
    if not labels:
        return [[1 if r == k else 0 for r in range(m)] for k in range(m)]
    idx = {k: r for r, k in enumerate(labels)}
    rows = [[0] * m for _ in labels]
    for c, v in enumerate(images):
        for k, a in v.items():
            rows[idx[k]][c] = a % p
    return nullspace(rows, m, p)


def independent(vecs, p):
    """Indices of a maximal independent subfamily, in order."""
    sp = Span(p)
    return [k for k, v in enumerate(vecs) if sp.add(v)]


# ---------------------------------------------------------------------------
# the complex


class LogComplex:
    """Pieces of Omega^.(log E)(D) on the active coordinates.

    ``coords`` lists the active global coordinates; the others are frozen
    at exponent 0 (used for restrictions to a coordinate hyperplane).
    """

    def __init__(self, n, p, E=(), twist=None, coords=None):
        self.n = n
        self.p = p
        self.E = frozenset(E)
        self.coords = tuple(range(n)) if coords is None else tuple(coords)
        self.twist = tuple(twist) if twist is not None else (0,) * n
        for j in range(n):
            if self.twist[j] and j not in self.E:
                raise BadSupport(f"twist has coordinate {j} outside E")

    def key(self):
        return (self.n, self.p, tuple(sorted(self.E)), self.twist, self.coords)

    def lower(self, j, inJ=False):
        return -self.twist[j] + (1 if inJ and j not in self.E else 0)

    def allowed(self, a, J):
        for j in self.coords:
            if a[j] < self.lower(j, j in J):
                return False
        return all(a[j] == 0 for j in range(self.n) if j not in self.coords)

    def basis(self, a, i):
        if i < 0 or i > len(self.coords):
            return []
        return [J for J in combinations(self.coords, i) if self.allowed(a, J)]

    def d(self, a, v):
        """Differential of sum_J v[J] x^a dlog x_J."""
        p = self.p
        out = {}
        for J, c in v.items():
            for j in self.coords:
                if j in J or a[j] % p == 0:
                    continue
                K = tuple(sorted(J + (j,)))
                x = (out.get(K, 0) + c * a[j] * sign_before(j, J)) % p
                if x:
                    out[K] = x
                else:
                    out.pop(K, None)
        return out

    def cycles(self, a, i):
        return _cycles(self.key(), a, i)

    def boundaries(self, a, i):
        return _boundaries(self.key(), a, i)

    def full(self, a, i):
        return Span(self.p, [{J: 1} for J in self.basis(a, i)])

    def multidegrees(self, total_max, total_min=None):
        """All a allowed for some form, with total_min <= |a| <= total_max."""
        lo = [self.lower(j) if j in self.coords else 0 for j in range(self.n)]
        out = []

        def rec(j, acc, s):
            if j == self.n:
                if total_min is None or s >= total_min:
                    out.append(tuple(acc))
                return
            if j not in self.coords:
                rec(j + 1, acc + [0], s)
                return
            rest = sum(lo[k] for k in range(j + 1, self.n) if k in self.coords)
            for x in range(lo[j], total_max - s - rest + 1):
                rec(j + 1, acc + [x], s + x)

        rec(0, [], 0)
        return out


_COMPLEXES = {}


def _complex(key):
    cx = _COMPLEXES.get(key)
    if cx is None:
        n, p, E, twist, coords = key
        cx = _COMPLEXES[key] = LogComplex(n, p, E, twist, coords)
    return cx


@lru_cache(maxsize=None)
def _cycles(key, a, i):
    cx = _complex(key)
    src = cx.basis(a, i)
    imgs = [cx.d(a, {J: 1}) for J in src]
    ker = kernel_coeffs(imgs, cx.p)
    return tuple(_freeze({J: c for J, c in zip(src, v) if c}) for v in ker)


@lru_cache(maxsize=None)
def _boundaries(key, a, i):
    cx = _complex(key)
    imgs = [cx.d(a, {J: 1}) for J in cx.basis(a, i - 1)]
    return tuple(_freeze(v) for v in Span(cx.p, imgs).basis())


def _freeze(v):
    return tuple(sorted(v.items()))


def _thaw(t):
    return dict(t)


# ---------------------------------------------------------------------------
# twisted (Hara) Cartier operators


def normalize_delta(n, p, E, delta, e_max=E_MAX):
    """Validate a Q-divisor supported on E; returns a tuple of Fractions."""
    delta = tuple(Fraction(x) for x in delta)
    if len(delta) != n:
        raise ValueError("delta needs one coefficient per coordinate")
    for j, x in enumerate(delta):
        if x and j not in E:
            raise BadSupport(f"coefficient on x_{j} but that hyperplane is not in E")
        den = x.denominator
        k = 0
        while den % p == 0:
            den //= p
            k += 1
        if den != 1 or k > e_max:
            raise DenominatorOverflow(f"coefficient {x} needs a denominator outside p^0..p^{e_max}")
    return delta


def floor_twist(delta, q):
    return tuple(math.floor(q * x) for x in delta)


def _divides(q, a):
    return all(x % q == 0 for x in a)


@lru_cache(maxsize=None)
def cartier_level(n, p, E, delta, e, a, i):
    """(Z_e, C_e) at multidegree a of F^e_* Omega^i(log E)(p^e delta).

    Z_e is a tuple of frozen vectors; C_e gives their images in
    Omega^i(log E)(delta) at multidegree a / p^e (empty when C_e = 0 there).
    Level e is C_delta after F_* C_{e-1, p delta}.
    """
    if e == 1:
        cx = _complex((n, p, E, floor_twist(delta, p), tuple(range(n))))
        Z = _cycles(cx.key(), a, i)
        if not _divides(p, a):
            return Z, tuple(() for _ in Z)
        b = tuple(x // p for x in a)
        tgt = _complex((n, p, E, floor_twist(delta, 1), tuple(range(n))))
        for z in Z:
            for J, _ in z:
                if not tgt.allowed(b, J):
                    raise AssertionError("Cartier image outside the twisted target")
        return Z, Z
    pd = tuple(p * x for x in delta)
    Zp, Cp = cartier_level(n, p, E, pd, e - 1, a, i)
    q1 = p ** (e - 1)
    if not _divides(q1, a):
        return Zp, tuple(() for _ in Zp)
    b = tuple(x // q1 for x in a)
    Z1, C1 = cartier_level(n, p, E, delta, 1, b, i)
    imgs = [_thaw(c) for c in Cp] + [vec_scale(_thaw(z), -1, p) for z in Z1]
    ker = kernel_coeffs(imgs, p)
    m = len(Zp)
    zs, cs = [], []
    for v in ker:
        zs.append(combo(v[:m], [_thaw(z) for z in Zp], p))
        cs.append(combo(v[m:], [_thaw(c) for c in C1], p))
    keep = independent(zs, p)
    return tuple(_freeze(zs[k]) for k in keep), tuple(_freeze(cs[k]) for k in keep)


def vec_scale(v, c, p):
    return {k: a * c % p for k, a in v.items() if a * c % p}


@lru_cache(maxsize=None)
def cartier_kernel(n, p, E, delta, e, a, i):
    """B_e at multidegree a: the kernel of C_e on Z_e."""
    Z, C = cartier_level(n, p, E, delta, e, a, i)
    ker = kernel_coeffs([_thaw(c) for c in C], p)
    vecs = [combo(v, [_thaw(z) for z in Z], p) for v in ker]
    return tuple(_freeze(v) for v in Span(p, vecs).basis())


class HaraPackage:
    """B_e, Z_e, C_e, G_e and C_e^{-1} for Omega^i(log E)(delta) on A^n.

    The level-e complex is F^e_* Omega^.(log E)(p^e delta), read with the
    floor convention.  Everything is evaluated lazily per multidegree.
    """

    def __init__(self, n, p, E, delta, i, n_level=1, e_max=E_MAX):
        if n_level < 1:
            raise ValueError("n_level must be at least 1")
        self.n, self.p, self.i, self.e = n, p, i, n_level
        self.E = tuple(sorted(set(E)))
        self.delta = normalize_delta(n, p, set(self.E), delta, e_max)
        self.q = p ** n_level
        self.complex = _complex((n, p, self.E, floor_twist(self.delta, self.q), tuple(range(n))))
        self.target = _complex((n, p, self.E, floor_twist(self.delta, 1), tuple(range(n))))

    def _lvl(self, a):
        return cartier_level(self.n, self.p, self.E, self.delta, self.e, tuple(a), self.i)

    def Z(self, a):
        return Span(self.p, [_thaw(z) for z in self._lvl(a)[0]])

    def B(self, a):
        return Span(self.p, [_thaw(b) for b in cartier_kernel(self.n, self.p, self.E, self.delta,
                                                              self.e, tuple(a), self.i)])

    def C(self, a):
        """Pairs (z, C z) over a basis of Z_e at a."""
        Z, C = self._lvl(a)
        return [(_thaw(z), _thaw(c)) for z, c in zip(Z, C)]

    def F(self, a):
        return self.complex.full(a, self.i)

    def G_dim(self, a):
        return self.F(a).dim - self.B(a).dim

    def cinv(self, b, J):
        """C_e^{-1}(x^b dlog x_J): the class of x^(q b) dlog x_J, at a = q b."""
        return tuple(self.q * x for x in b), {J: 1}

    def apply_C(self, a, v):
        """C_e on an element of Z_e at a (None if v is not in Z_e)."""
        Z, C = self._lvl(a)
        zs = [_thaw(z) for z in Z]
        from .linalg import solve_in_span
        labels = sorted({k for z in zs for k in z} | set(v))
        rows = [[z.get(k, 0) for k in labels] for z in zs]
        sol = solve_in_span(rows, [v.get(k, 0) for k in labels], self.p) if zs else (
            [] if not v else None)
        if sol is None:
            return None
        return combo(sol, [_thaw(c) for c in C], self.p)

    # certificates ----------------------------------------------------------
    def multidegrees(self, D):
        return self.complex.multidegrees(D * self.q)

    def certify_at(self, a):
        """Exactness of 0 -> B_e -> Z_e -> Omega(delta) -> 0 at a, plus the B-chain."""
        p, i, q = self.p, self.i, self.q
        cx = self.complex
        out = {}
        Zs, Bs = self.Z(a), self.B(a)
        cyc = Span(p, [_thaw(z) for z in cx.cycles(a, i)])
        out["Z_closed"] = cyc.contains_all(Zs.basis())
        out["B_in_Z"] = Zs.contains_all(Bs.basis())
        pairs = self.C(a)
        if _divides(q, a):
            b = tuple(x // q for x in a)
            tgt_dim = len(self.target.basis(b, i))
            img = Span(p, [c for _, c in pairs])
            out["C_onto"] = img.dim == tgt_dim
            ok = True
            for J in self.target.basis(b, i):
                aa, v = self.cinv(b, J)
                c = self.apply_C(aa, v)
                ok &= c is not None and not vec_add(c, {J: 1}, p, -1)
            out["C_Cinv_id"] = ok
        else:
            tgt_dim = 0
            out["C_onto"] = True
            out["C_Cinv_id"] = True
        out["exact"] = Zs.dim - Bs.dim == tgt_dim and out["B_in_Z"]
        # F^{e-1}_* B_1 inside B_e, with the quotient B_{e-1} one level down
        bd = Span(p, [_thaw(v) for v in cx.boundaries(a, i)])
        if self.e == 1:
            out["B_chain"] = bd.same_as(Bs)
        else:
            lower = 0
            if _divides(p, a):
                b = tuple(x // p for x in a)
                lower = len(cartier_kernel(self.n, p, self.E, self.delta, self.e - 1, b, i))
            out["B_chain"] = Bs.contains_all(bd.basis()) and Bs.dim == bd.dim + lower
        return out

    def certify(self, D):
        """All certificates for S-degrees <= D; returns (ok, failures, count)."""
        fails = []
        count = 0
        for a in self.multidegrees(D):
            res = self.certify_at(a)
            count += 1
            bad = [k for k, v in res.items() if not v]
            if bad:
                fails.append((a, bad))
        return not fails, fails, count

    def functoriality(self, smaller: "HaraPackage", D):
        """Inclusions for delta' <= delta commute with B, Z and C.  Returns failures."""
        if (smaller.n, smaller.p, smaller.E, smaller.i, smaller.e) != (self.n, self.p, self.E, self.i, self.e):
            raise ValueError("packages differ in more than the twist")
        if any(x > y for x, y in zip(smaller.delta, self.delta)):
            raise ValueError("the first package must have the smaller twist")
        p = self.p
        fails = []
        for a in smaller.multidegrees(D):
            Zb, Bb = self.Z(a), self.B(a)
            ok = {"B": Bb.contains_all(smaller.B(a).basis()),
                  "Z": Zb.contains_all(smaller.Z(a).basis())}
            comm = True
            for z, c in smaller.C(a):
                cc = self.apply_C(a, z)
                comm &= cc is not None and not vec_add(cc, c, p, -1)
            ok["C"] = comm
            if _divides(self.q, a):
                b = tuple(x // self.q for x in a)
                ok["Omega"] = set(smaller.target.basis(b, self.i)) <= set(self.target.basis(b, self.i))
            bad = [k for k, v in ok.items() if not v]
            if bad:
                fails.append((a, bad))
        return fails


# ---------------------------------------------------------------------------
# residues along a coordinate hyperplane


def residue(a, v, c):
    """Residue along x_c = 0 of sum_J v[J] x^a dlog x_J (zero unless a_c = 0)."""
    if a[c] != 0:
        return {}
    out = {}
    for J, x in v.items():
        if c in J:
            K = tuple(l for l in J if l != c)
            out[K] = (out.get(K, 0) + sign_before(c, J) * x)
    return {k: x for k, x in out.items() if x}


class ResidueData:
    """The three complexes of a residue sequence along D = {x_c = 0}."""

    def __init__(self, n, p, E, c):
        E = frozenset(E)
        if c not in E:
            raise BadSupport(f"x_{c} = 0 is not a component of E")
        self.n, self.p, self.E, self.c = n, p, E, c
        self.big = LogComplex(n, p, E)
        self.small = LogComplex(n, p, E - {c})
        self.D = LogComplex(n, p, E - {c}, coords=[j for j in range(n) if j != c])

    def res_span(self, a, vecs):
        r = self.p
        return Span(r, [{k: x % r for k, x in residue(a, v, self.c).items()} for v in vecs])

    def check(self, which, a, i):
        """Exactness at multidegree a of sequence ``which`` (1..4) in form degree i."""
        p, c = self.p, self.c
        big, small, Dc = self.big, self.small, self.D
        onD = a[c] == 0
        VD_full = Dc.full(a, i - 1) if onD else Span(p)

        def pieces(kind):
            if kind == 1:
                return small.full(a, i), big.full(a, i), VD_full
            if kind == 2:
                return (Span(p, map(_thaw, small.boundaries(a, i))),
                        Span(p, map(_thaw, big.boundaries(a, i))),
                        Span(p, map(_thaw, Dc.boundaries(a, i - 1))) if onD else Span(p))
            return (Span(p, map(_thaw, small.cycles(a, i))),
                    Span(p, map(_thaw, big.cycles(a, i))),
                    Span(p, map(_thaw, Dc.cycles(a, i - 1))) if onD else Span(p))

        out = {}
        if which in (1, 2, 3):
            A, Bm, Cm = pieces(which)
            # inclusion A -> B is injective on labels; check it lands
            out["into"] = Bm.contains_all(A.basis())
            imgs = [{k: x % p for k, x in residue(a, v, c).items()} for v in Bm.basis()]
            out["res_lands"] = Cm.contains_all(imgs)
            out["onto"] = Span(p, imgs).dim == Cm.dim
            ker = kernel_coeffs(imgs, p)
            K = Span(p, [combo(v, Bm.basis(), p) for v in ker])
            out["middle"] = K.same_as(A)
            return out
        # G = F_* Omega / B, maps induced
        VA, VB, VC = small.full(a, i), big.full(a, i), VD_full
        BA, BB = pieces(2)[0], pieces(2)[1]
        BC = pieces(2)[2]
        out["well_defined"] = BB.contains_all(BA.basis()) and BC.contains_all(
            [{k: x % p for k, x in residue(a, v, c).items()} for v in BB.basis()])
        # injective: V_A meets B_B exactly in B_A
        inter = _intersect(VA, BB, p)
        out["injective"] = inter.same_as(BA)
        imgs = [{k: x % p for k, x in residue(a, v, c).items()} for v in VB.basis()]
        out["onto"] = Span(p, imgs + BC.basis()).dim == VC.dim
        # middle: res^{-1}(B_C) = V_A + B_B
        ext = imgs + [vec_scale(v, -1, p) for v in BC.basis()]
        ker = kernel_coeffs(ext, p)
        m = len(imgs)
        pre = Span(p, [combo(v[:m], VB.basis(), p) for v in ker])
        out["middle"] = pre.same_as(Span(p, VA.basis() + BB.basis()))
        return out


def _intersect(U, W, p):
    ub, wb = U.basis(), W.basis()
    ker = kernel_coeffs(ub + [vec_scale(w, -1, p) for w in wb], p)
    return Span(p, [combo(v[:len(ub)], ub, p) for v in ker])
