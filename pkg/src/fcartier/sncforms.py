"""Differential forms on the coordinate SNC scheme E = {x_1 ... x_n = 0}.

Everything is an A-module, A = F_p[x_1..x_n].  With E_1 = {x_1 = 0} and
E_1^c = {x_2 ... x_n = 0}, the closed-form presentations are

    Omega^i_E / tors          dx_a (a in Sigma_i) modulo x_{[1,n] - a} dx_a
    Omega^i_{E_1^c} / tors    dx_a modulo x_{a^c} dx_1 ^ dx_a  (a in Pi_{i-1})
                                      and x_{b^c} dx_b            (b in Pi_i)
    Omega^i_{E_1}             dx_b (b in Pi_i) modulo x_1
    Omega^i_{E_1^c}|_{E_1}/tors   dx_b (b in Pi_i) modulo x_1 and x_{b^c}

where Sigma_i are increasing i-tuples from 1..n, Pi_i those from 2..n and
b^c = {2..n} - b.  Indices are 1-based in these docs, 0-based in code.
The sequence 0 -> Omega_E/tors -> Omega_{E_1^c}/tors + Omega_{E_1} ->
Omega_{E_1^c}|_{E_1}/tors -> 0 is verified by Gröbner computations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .arith import Ring
from .derham import LogDivisor, kaehler, residue_sequence
from .errors import IllDefined
from .modalg import (ModuleMap, PresentedModule, Submodule, base_ring_module, is_injective,
                     is_surjective, kernel_sq, lift_through, quotient_by, torsion_submodule)

WHICH = ("E", "E1c", "E1", "E1c|E1")


def _mono(n, idx):
    return tuple(1 if j in idx else 0 for j in range(n))


@dataclass
class SncContext:
    """Coordinate SNC data on A^n; component 0 plays the role of E_1."""

    n: int
    p: int
    sigma: dict = field(init=False)
    pi: dict = field(init=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        self.ring = Ring([f"x{j + 1}" for j in range(self.n)], self.p)
        self.sigma = {i: list(combinations(range(self.n), i)) for i in range(self.n + 1)}
        self.pi = {i: list(combinations(range(1, self.n), i)) for i in range(self.n)}

    def Pi(self, i):
        return self.pi.get(i, [])

    def complement(self, b):
        """b^c = {2..n} - b (0-based: {1..n-1} - b)."""
        return tuple(j for j in range(1, self.n) if j not in b)


@dataclass
class SncFormModule:
    which: str
    i: int
    module: PresentedModule
    labels: list


def snc_module(ctx: SncContext, which, i) -> SncFormModule:
    """The closed-form presentation of one of the four modules in degree i."""
    if which not in WHICH:
        raise ValueError(f"which must be one of {WHICH}")
    n, ring = ctx.n, ctx.ring
    if which in ("E", "E1c"):
        labels = ctx.sigma[i]
        idx = {a: k for k, a in enumerate(labels)}
        rels = []
        if which == "E":
            for a in labels:
                rest = tuple(j for j in range(n) if j not in a)
                rels.append({(idx[a], _mono(n, rest)): 1})
        else:
            for a in ctx.Pi(i - 1) if i >= 1 else []:
                rels.append({(idx[(0,) + a], _mono(n, ctx.complement(a))): 1})
            for b in ctx.Pi(i):
                rels.append({(idx[b], _mono(n, ctx.complement(b))): 1})
        mod = PresentedModule(ring, [i] * len(labels), rels, label=f"Omega^{i}_{which}/tors")
        return SncFormModule(which, i, mod, labels)
    labels = ctx.Pi(i)
    rels = [{(k, _mono(n, (0,))): 1} for k in range(len(labels))]
    if which == "E1c|E1":
        rels += [{(k, _mono(n, ctx.complement(b))): 1} for k, b in enumerate(labels)]
    mod = PresentedModule(ring, [i] * len(labels), rels, label=f"Omega^{i}_{which}")
    return SncFormModule(which, i, mod, labels)


def _middle(ctx, i):
    A = snc_module(ctx, "E1c", i)
    B = snc_module(ctx, "E1", i)
    return A, B, A.module.direct_sum(B.module)


def phi_map(ctx: SncContext, i) -> ModuleMap:
    """sum f_a dx_a |-> (same form, sum over a in Pi_i of fbar_a dxbar_a)."""
    src = snc_module(ctx, "E", i)
    A, B, mid = _middle(ctx, i)
    z = (0,) * ctx.n
    pos = {b: k for k, b in enumerate(B.labels)}
    off = A.module.rank
    cols = []
    for k, a in enumerate(src.labels):
        col = {(k, z): 1}
        if a in pos:
            col[(off + pos[a], z)] = 1
        cols.append(col)
    try:
        return ModuleMap(src.module, mid, cols, label="phi")
    except IllDefined as exc:
        raise IllDefined(f"phi in degree {i}: {exc}") from exc


def psi_map(ctx: SncContext, i) -> ModuleMap:
    """(sum f_a dx_a, sum gbar_b dxbar_b) |-> sum over b in Pi_i of (fbar_b - gbar_b) dxbar_b."""
    A, B, mid = _middle(ctx, i)
    tgt = snc_module(ctx, "E1c|E1", i)
    z = (0,) * ctx.n
    p = ctx.p
    pos = {b: k for k, b in enumerate(tgt.labels)}
    cols = []
    for a in A.labels:
        cols.append({(pos[a], z): 1} if a in pos else {})
    for b in B.labels:
        cols.append({(pos[b], z): p - 1})
    try:
        return ModuleMap(mid, tgt.module, cols, label="psi")
    except IllDefined as exc:
        raise IllDefined(f"psi in degree {i}: {exc}") from exc


def verify_snc_exact(ctx: SncContext, i, D=6):
    """Certificate for 0 -> Omega^i_E/tors -> middle -> Omega^i_{E_1^c}|_{E_1}/tors -> 0."""
    phi, psi = phi_map(ctx, i), psi_map(ctx, i)
    out = {"n": ctx.n, "p": ctx.p, "i": i, "D": D}
    out["phi_injective"] = is_injective(phi)
    out["psi_surjective"] = is_surjective(psi)
    comp = psi * phi
    out["psi_phi_zero"] = all(comp.target.is_zero_elem(c) for c in comp.matrix if c)
    witness = None
    sq = kernel_sq(psi)
    ok = True
    for v in sq.gens_ambient():
        if lift_through(phi, v) is None:
            ok, witness = False, v
            break
    out["ker_in_im"] = ok
    if witness is not None:
        out["witness"] = sorted((k, list(e), c) for (k, e), c in witness.items())
    bal = []
    for t in range(0, D + 1):
        e = (phi.source.graded_piece_dim(t) - phi.target.graded_piece_dim(t)
             + psi.target.graded_piece_dim(t))
        if e:
            bal.append(t)
    out["euler_balanced"] = not bal
    out["ok"] = all(out[k] for k in ("phi_injective", "psi_surjective", "psi_phi_zero",
                                     "ker_in_im", "euler_balanced"))
    return out


def generic_torsion_agrees(ctx: SncContext, which, i):
    """Compare the closed form for Omega^i_E/tors or Omega^i_{E_1^c}/tors with
    Omega^i_R modulo ker(Omega^i_R -> (Omega^i_R)**), R = A/(x_1...x_n) or A/(x_2...x_n)."""
    if which not in ("E", "E1c"):
        raise ValueError("only the two quotients of Omega_A have a generic counterpart")
    ring, n = ctx.ring, ctx.n
    first = 0 if which == "E" else 1
    if first >= n:
        raise ValueError("E_1^c is empty for n = 1")
    f = ring.monomial(_mono(n, range(first, n)))
    Om = kaehler(f, i)
    _, incl = torsion_submodule(Om, base_ring_module(ring, f))
    gen_rels = Om.relations + [c for c in incl.matrix if c]
    cf = snc_module(ctx, which, i).module
    degs = cf.degrees
    a = Submodule(ring, degs, gen_rels)
    b = Submodule(ring, degs, cf.relations)
    return all(a.contains(r) for r in cf.relations) and all(b.contains(r) for r in gen_rels)


def snc_bzg_residue(ctx: SncContext, i, which, D=8):
    """Residue sequence (2) B, (3) Z or (4) G along E_1 for log poles on all of E."""
    if which not in (2, 3, 4):
        raise ValueError("which must be 2, 3 or 4")
    E = LogDivisor(ctx.n, tuple(range(ctx.n)))
    return residue_sequence(E, 0, i, which, ctx.p, D)


def snc_grid(ns=(1, 2, 3, 4), ps=(2, 3, 5), imax=3, D=6):
    out = []
    for p in ps:
        for n in ns:
            ctx = SncContext(n, p)
            for i in range(1, min(imax, n) + 1):
                out.append(verify_snc_exact(ctx, i, D))
    return out
