"""Prime fields, sparse polynomials, monomial orders and the expression parser."""

from __future__ import annotations

import enum
import re
from itertools import combinations_with_replacement

from .errors import BadPrime, PolySyntaxError, SessionMismatch, UnknownVariable

PMAX = 31


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, int(p ** 0.5) + 1))


def check_prime(p, pmax=PMAX):
    if not isinstance(p, int) or isinstance(p, bool) or not is_prime(p):
        raise BadPrime(f"{p!r} is not a prime")
    if p > pmax:
        raise BadPrime(f"p = {p} exceeds the guard {pmax}")
    return p


class Cmp(enum.IntEnum):
    LT = -1
    EQ = 0
    GT = 1


class MonomialOrder:
    """grevlex, lex or graded-lex with an explicit variable precedence.

    ``precedence`` lists variable indices from most to least significant.
    """

    KINDS = ("grevlex", "lex", "glex")

    def __init__(self, kind="grevlex", precedence=None, n=None, weights=None):
        if kind == "graded-lex":
            kind = "glex"
        if kind not in self.KINDS:
            raise ValueError(f"unknown order {kind!r}")
        if precedence is None:
            if n is None:
                raise ValueError("need n or precedence")
            precedence = tuple(range(n))
        self.kind = kind
        self.precedence = tuple(precedence)
        self.n = len(self.precedence)
        self.weights = tuple(weights) if weights else (1,) * self.n
        rev = tuple(reversed(self.precedence))
        w = self.weights
        prec = self.precedence
        if kind == "grevlex":
            self.key = lambda m: (sum(a * b for a, b in zip(m, w)),) + tuple(-m[i] for i in rev)
        elif kind == "lex":
            self.key = lambda m: tuple(m[i] for i in prec)
        else:
            self.key = lambda m: (sum(a * b for a, b in zip(m, w)),) + tuple(m[i] for i in prec)

    def __eq__(self, other):
        return (isinstance(other, MonomialOrder) and self.kind == other.kind
                and self.precedence == other.precedence and self.weights == other.weights)

    def __hash__(self):
        return hash((self.kind, self.precedence, self.weights))

    def __repr__(self):
        return f"MonomialOrder({self.kind!r}, {self.precedence})"


def compare_monomials(a, b, order: MonomialOrder) -> Cmp:
    if len(a) != len(b):
        raise ValueError("monomials of different lengths")
    ka, kb = order.key(a), order.key(b)
    return Cmp.GT if ka > kb else Cmp.LT if ka < kb else Cmp.EQ


def mono_mul(a, b):
    return tuple(x + y for x, y in zip(a, b))


def mono_divides(a, b):
    return all(x <= y for x, y in zip(a, b))


def mono_div(a, b):
    return tuple(x - y for x, y in zip(a, b))


def mono_lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


def monomials_of_degree(n, t, weights=None):
    """All exponent vectors of (weighted) degree t, in lex-descending order."""
    if t < 0:
        return []
    if weights is None or all(w == 1 for w in weights):
        out = []
        for combo in combinations_with_replacement(range(n), t):
            e = [0] * n
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
        return out
    out = []

    def rec(i, rest, acc):
        if i == n - 1:
            if rest % weights[i] == 0:
                out.append(tuple(acc + [rest // weights[i]]))
            return
        for a in range(rest // weights[i], -1, -1):
            rec(i + 1, rest - a * weights[i], acc + [a])

    if n == 0:
        return [()] if t == 0 else []
    rec(0, t, [])
    return out


class Ring:
    """Session context: the polynomial ring F_p[vars] with a grading and a default order."""

    def __init__(self, variables, p, order="grevlex", weights=None, pmax=PMAX):
        if isinstance(variables, str):
            variables = [v.strip() for v in variables.split(",") if v.strip()]
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ValueError("variables must be distinct")
        for v in variables:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", v):
                raise ValueError(f"bad variable name {v!r}")
        self.p = check_prime(p, pmax)
        self.vars = variables
        self.n = len(variables)
        self.weights = tuple(weights) if weights else (1,) * self.n
        if len(self.weights) != self.n or any(w < 1 for w in self.weights):
            raise ValueError("weights must be positive, one per variable")
        self.order = order if isinstance(order, MonomialOrder) else MonomialOrder(
            order, n=self.n, weights=self.weights)
        self._index = {v: i for i, v in enumerate(variables)}

    def __eq__(self, other):
        return (isinstance(other, Ring) and self.p == other.p and self.vars == other.vars
                and self.weights == other.weights)

    def __hash__(self):
        return hash((self.p, self.vars, self.weights))

    def __repr__(self):
        return f"Ring({list(self.vars)}, p={self.p})"

    def index(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise UnknownVariable(f"unknown variable {name!r}") from None

    def zero(self):
        return Poly(self, {})

    def one(self):
        return self.const(1)

    def const(self, c):
        c %= self.p
        return Poly(self, {(0,) * self.n: c} if c else {})

    def var(self, name_or_index):
        i = name_or_index if isinstance(name_or_index, int) else self.index(name_or_index)
        e = [0] * self.n
        e[i] = 1
        return Poly(self, {tuple(e): 1})

    def gens(self):
        return [self.var(i) for i in range(self.n)]

    def monomial(self, exps, c=1):
        c %= self.p
        return Poly(self, {tuple(exps): c} if c else {})

    def deg(self, exps):
        return sum(a * w for a, w in zip(exps, self.weights))

    def parse(self, text):
        return parse_poly(text, self.vars, self.p, ring=self)

    def with_order(self, order):
        return Ring(self.vars, self.p, order=order, weights=self.weights)


class Poly:
    """Sparse polynomial: a dict from exponent tuples to nonzero residues mod p."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: Ring, terms):
        self.ring = ring
        self.terms = terms

    @classmethod
    def from_dict(cls, ring, d):
        p = ring.p
        out = {}
        for m, c in d.items():
            c %= p
            if c:
                out[tuple(m)] = c
        return cls(ring, out)

    def _check(self, other):
        if isinstance(other, int):
            return self.ring.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        if other.ring is not self.ring and other.ring != self.ring:
            raise SessionMismatch(f"{self.ring!r} vs {other.ring!r}")
        return other

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        p = self.ring.p
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = (out.get(m, 0) + c) % p
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return Poly(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        p = self.ring.p
        return Poly(self.ring, {m: p - c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        p = self.ring.p
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = (out.get(m, 0) + c1 * c2) % p
        return Poly(self.ring, {m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def scale(self, c):
        c %= self.ring.p
        if not c:
            return self.ring.zero()
        p = self.ring.p
        return Poly(self.ring, {m: c * v % p for m, v in self.terms.items()})

    def mul_monomial(self, exps, c=1):
        p = self.ring.p
        c %= p
        if not c:
            return self.ring.zero()
        return Poly(self.ring, {tuple(a + b for a, b in zip(m, exps)): v * c % p
                                for m, v in self.terms.items()})

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a natural number")
        result = self.ring.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def frobenius(self):
        p = self.ring.p
        return Poly(self.ring, {tuple(p * a for a in m): c for m, c in self.terms.items()})

    def total_degree(self):
        if not self.terms:
            return -1
        return max(self.ring.deg(m) for m in self.terms)

    def homogeneous_degree(self):
        """Degree if homogeneous (None for inhomogeneous; 0 polynomial has degree None)."""
        degs = {self.ring.deg(m) for m in self.terms}
        return degs.pop() if len(degs) == 1 else None

    def is_homogeneous(self):
        return len({self.ring.deg(m) for m in self.terms}) <= 1

    def sorted_terms(self, order=None):
        order = order or self.ring.order
        return sorted(self.terms.items(), key=lambda t: order.key(t[0]), reverse=True)

    def leading_monomial(self, order=None):
        order = order or self.ring.order
        return max(self.terms, key=order.key)

    def leading_coefficient(self, order=None):
        return self.terms[self.leading_monomial(order)]

    def monic(self, order=None):
        lc = self.leading_coefficient(order)
        return self.scale(pow(lc, -1, self.ring.p))

    def diff(self, i):
        p = self.ring.p
        out = {}
        for m, c in self.terms.items():
            if m[i] % p:
                e = list(m)
                e[i] -= 1
                out[tuple(e)] = c * m[i] % p
        return Poly(self.ring, out)

    def constant_coefficient(self):
        return self.terms.get((0,) * self.ring.n, 0)

    def evaluate_zero(self, i):
        """Set variable i to 0."""
        return Poly(self.ring, {m: c for m, c in self.terms.items() if m[i] == 0})

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            factors = []
            for v, a in zip(self.ring.vars, m):
                if a == 1:
                    factors.append(v)
                elif a > 1:
                    factors.append(f"{v}^{a}")
            if not factors:
                parts.append(str(c))
            elif c == 1:
                parts.append("*".join(factors))
            else:
                parts.append(f"{c}*" + "*".join(factors))
        return " + ".join(parts)

    def __repr__(self):
        return f"Poly({self})"


def frobenius_power(f: Poly) -> Poly:
    return f.frobenius()


def poly_arith(a: Poly, b, op: str) -> Poly:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "pow":
        return a ** b
    raise ValueError(f"unknown op {op!r}")


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


class _Parser:
    def __init__(self, text, ring):
        self.text = text
        self.ring = ring
        self.toks = []
        pos = 0
        while True:
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                break
            start = m.start(m.lastindex)
            if m.group(1):
                self.toks.append(("num", int(m.group(1)), start))
            elif m.group(2):
                self.toks.append(("id", m.group(2), start))
            else:
                self.toks.append(("op", m.group(3), start))
            pos = m.end()
        self.toks.append(("end", None, len(text)))
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, expected):
        raise PolySyntaxError(self.peek()[2], expected, self.text)

    def expr(self, top=False):
        neg = False
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            neg = True
        acc = self.term()
        if neg:
            acc = -acc
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                t = self.term()
                acc = acc + t if val == "+" else acc - t
            else:
                break
        return acc

    def term(self):
        acc = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "*":
                self.take()
                acc = acc * self.factor()
            else:
                return acc

    def factor(self):
        b = self.base()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            kind, val, _ = self.peek()
            if kind != "num":
                self.fail("natural number")
            self.take()
            return b ** val
        return b

    def base(self):
        kind, val, pos = self.peek()
        if kind == "num":
            self.take()
            return self.ring.const(val)
        if kind == "id":
            self.take()
            return self.ring.var(val)
        if kind == "op" and val == "(":
            self.take()
            e = self.expr()
            kind, val, _ = self.peek()
            if not (kind == "op" and val == ")"):
                self.fail("')'")
            self.take()
            return e
        self.fail("identifier, number or '('")


def parse_poly(text: str, variables, p: int, ring: Ring | None = None) -> Poly:
    if ring is None:
        ring = Ring(variables, p)
    else:
        check_prime(p)
    parser = _Parser(text, ring)
    result = parser.expr()
    if parser.peek()[0] != "end":
        parser.fail("operator or end of input")
    return result
