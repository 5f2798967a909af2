"""Dense linear algebra over F_p for per-degree checks."""

from __future__ import annotations


def rref(rows, p):
    """Row-reduce a list of lists in place; returns (rows, pivot columns)."""
    rows = [[a % p for a in r] for r in rows]
    if not rows:
        return rows, []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(rows)):
            if rows[i][c]:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][c], -1, p)
        rows[r] = [a * inv % p for a in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                ri = rows[i]
                rr = rows[r]
                rows[i] = [(a - f * b) % p for a, b in zip(ri, rr)]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def rank(rows, p):
    return len(rref(rows, p)[1])


def nullspace(rows, ncols, p):
    """Basis of {v : rows * v = 0}."""
    red, piv = rref(rows, p) if rows else ([], [])
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for fcol in free:
        v = [0] * ncols
        v[fcol] = 1
        for r, pc in zip(red, piv):
            v[pc] = (-r[fcol]) % p
        basis.append(v)
    return basis


def sparse_rank(vectors, p):
    """Rank of sparse vectors given as dicts key -> coeff."""
    pivots = {}
    rk = 0
    for v in vectors:
        v = {k: a % p for k, a in v.items() if a % p}
        while v:
            k = max(v)
            if k in pivots:
                pv = pivots[k]
                c = v[k]
                for kk, a in pv.items():
                    b = (v.get(kk, 0) - c * a) % p
                    if b:
                        v[kk] = b
                    else:
                        v.pop(kk, None)
            else:
                inv = pow(v[k], -1, p)
                pivots[k] = {kk: a * inv % p for kk, a in v.items()}
                rk += 1
                break
    return rk


def transpose(rows, ncols):
    return [[r[c] for r in rows] for c in range(ncols)]


def left_nullspace(rows, p):
    """Basis of {a : sum a_k rows_k = 0}."""
    if not rows:
        return []
    width = len(rows[0])
    if width == 0:
        return [[1 if i == k else 0 for i in range(len(rows))] for k in range(len(rows))]
    return nullspace(transpose(rows, width), len(rows), p)


def combine(coeffs, rows, p, width):
    out = [0] * width
    for a, r in zip(coeffs, rows):
        if a:
            for c, b in enumerate(r):
                if b:
                    out[c] = (out[c] + a * b) % p
    return out


def independent_subset(rows, p):
    """Indices of a maximal independent subset, scanning in order."""
    kept = []
    pivots = {}
    for idx, r in enumerate(rows):
        v = [a % p for a in r]
        for c, pr in pivots.items():
            if v[c]:
                f = v[c]
                v = [(a - f * b) % p for a, b in zip(v, pr)]
        nz = next((c for c, a in enumerate(v) if a), None)
        if nz is None:
            continue
        inv = pow(v[nz], -1, p)
        v = [a * inv % p for a in v]
        for c in list(pivots):
            pr = pivots[c]
            if pr[nz]:
                f = pr[nz]
                pivots[c] = [(a - f * b) % p for a, b in zip(pr, v)]
        pivots[nz] = v
        kept.append(idx)
    return kept


def solve_in_span(rows, v, p):
    """Coefficients a with sum a_k rows_k = v, or None."""
    if not any(a % p for a in v):
        return [0] * len(rows)
    if not rows:
        return None
    width = len(v)
    aug = [[rows[k][c] for k in range(len(rows))] + [v[c]] for c in range(width)]
    red, piv = rref(aug, p)
    m = len(rows)
    if m in piv:
        return None
    sol = [0] * m
    for r, c in zip(red, piv):
        sol[c] = r[m]
    return sol


def in_span(rows, v, p):
    return solve_in_span(rows, v, p) is not None


def span_contains(rows, others, p):
    return all(in_span(rows, v, p) for v in others)
