"""Exact sparse polynomial arithmetic over the Gaussian rationals.

A coefficient is a :class:`GaussRat`, a pair of `fractions.Fraction` values
(real and imaginary part of an element of Q(i)).  A monomial is a plain tuple
of non-negative integer exponents, one slot per variable.  A :class:`Poly`
keeps a dict mapping monomials to nonzero coefficients; the zero polynomial
is the empty dict.  All operations are exact -- there is no floating point
anywhere in this package.

Variable indices in the public operations are 1-based (``differentiate(p, 1)``
differentiates with respect to the first variable).
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Sequence

_F0 = Fraction(0)
_F1 = Fraction(1)


class GaussRat:
    """A Gaussian rational a + b*i with exact Fraction parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", re if isinstance(re, Fraction) else Fraction(re))
        object.__setattr__(self, "im", im if isinstance(im, Fraction) else Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussRat is immutable")

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, GaussRat):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __add__(self, other):
        return GaussRat(self.re + other.re, self.im + other.im)

    def __sub__(self, other):
        return GaussRat(self.re - other.re, self.im - other.im)

    def __neg__(self):
        return GaussRat(-self.re, -self.im)

    def __mul__(self, other):
        a, b = self.re, self.im
        c, d = other.re, other.im
        if not b and not d:
            # real-by-real is by far the common case
            return GaussRat(a * c, _F0)
        return GaussRat(a * c - b * d, a * d + b * c)

    def inverse(self):
        if not self:
            raise ZeroDivisionError("inverse of zero Gaussian rational")
        n = self.re * self.re + self.im * self.im
        return GaussRat(self.re / n, -self.im / n)

    def __truediv__(self, other):
        return self * other.inverse()

    def conjugate(self):
        return GaussRat(self.re, -self.im)

    @property
    def is_real(self):
        return not self.im

    def __repr__(self):
        if not self.im:
            return f"GaussRat({self.re})"
        return f"GaussRat({self.re}, {self.im})"


GR_ZERO = GaussRat(0)
GR_ONE = GaussRat(1)
GR_I = GaussRat(0, 1)


def gr(re, im=0):
    """Shorthand constructor for a Gaussian rational."""
    return GaussRat(re, im)


# ---------------------------------------------------------------------------
# monomial helpers

def mono_mul(a: tuple, b: tuple) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def mono_divides(a: tuple, b: tuple) -> bool:
    """True when x^a divides x^b."""
    return all(x <= y for x, y in zip(a, b))


def mono_quot(a: tuple, b: tuple) -> tuple:
    """Exponent tuple of x^b / x^a (assumes x^a divides x^b)."""
    return tuple(y - x for x, y in zip(a, b))


def mono_lcm(a: tuple, b: tuple) -> tuple:
    return tuple(max(x, y) for x, y in zip(a, b))


def mono_degree(a: tuple) -> int:
    return sum(a)


def grlex_key(mono: tuple):
    """Sort key for graded lexicographic order with z1 > z2 > ... ."""
    return (sum(mono), mono)


class Poly:
    """Sparse multivariate polynomial with GaussRat coefficients.

    ``terms`` maps exponent tuples to nonzero coefficients.  Instances are
    treated as immutable: every operation returns a fresh Poly and no code in
    this package mutates ``terms`` after construction.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: dict | None = None):
        self.nvars = nvars
        clean = {}
        if terms:
            for mono, c in terms.items():
                if len(mono) != nvars:
                    raise ValueError(f"monomial {mono} does not have {nvars} slots")
                if c:
                    clean[mono] = c
        self.terms = clean

    @staticmethod
    def _raw(nvars: int, terms: dict) -> "Poly":
        # trusted constructor: terms already clean, ownership transferred
        p = object.__new__(Poly)
        p.nvars = nvars
        p.terms = terms
        return p

    @staticmethod
    def zero(nvars: int) -> "Poly":
        return Poly._raw(nvars, {})

    @staticmethod
    def const(nvars: int, c) -> "Poly":
        if not isinstance(c, GaussRat):
            c = GaussRat(c)
        if not c:
            return Poly._raw(nvars, {})
        return Poly._raw(nvars, {(0,) * nvars: c})

    @staticmethod
    def one(nvars: int) -> "Poly":
        return Poly.const(nvars, GR_ONE)

    @staticmethod
    def variable(nvars: int, index: int) -> "Poly":
        """The variable with 1-based ``index``."""
        if not 1 <= index <= nvars:
            raise ValueError(f"variable index {index} out of range 1..{nvars}")
        mono = tuple(1 if j == index - 1 else 0 for j in range(nvars))
        return Poly._raw(nvars, {mono: GR_ONE})

    @staticmethod
    def monomial(nvars: int, mono: tuple, c=GR_ONE) -> "Poly":
        if not isinstance(c, GaussRat):
            c = GaussRat(c)
        if not c:
            return Poly._raw(nvars, {})
        return Poly._raw(nvars, {tuple(mono): c})

    # -- predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and (0,) * self.nvars in self.terms)

    def constant_value(self) -> GaussRat:
        return self.terms.get((0,) * self.nvars, GR_ZERO)

    def is_unit(self) -> bool:
        """Nonzero constant."""
        return len(self.terms) == 1 and (0,) * self.nvars in self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for mono, c in other.terms.items():
            s = out.get(mono)
            if s is None:
                out[mono] = c
            else:
                s = s + c
                if s:
                    out[mono] = s
                else:
                    del out[mono]
        return Poly._raw(self.nvars, out)

    def __sub__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for mono, c in other.terms.items():
            s = out.get(mono)
            if s is None:
                out[mono] = -c
            else:
                s = s - c
                if s:
                    out[mono] = s
                else:
                    del out[mono]
        return Poly._raw(self.nvars, out)

    def __neg__(self) -> "Poly":
        return Poly._raw(self.nvars, {m: -c for m, c in self.terms.items()})

    def scale(self, c: GaussRat) -> "Poly":
        if not isinstance(c, GaussRat):
            c = GaussRat(c)
        if not c:
            return Poly.zero(self.nvars)
        return Poly._raw(self.nvars, {m: k * c for m, k in self.terms.items()})

    def mul_term(self, mono: tuple, c: GaussRat) -> "Poly":
        if not c:
            return Poly.zero(self.nvars)
        return Poly._raw(
            self.nvars, {mono_mul(m, mono): k * c for m, k in self.terms.items()}
        )

    def __mul__(self, other: "Poly") -> "Poly":
        if not self.terms or not other.terms:
            return Poly.zero(self.nvars)
        a, b = self.terms, other.terms
        if len(a) > len(b):
            a, b = b, a
        out: dict = {}
        for m1, c1 in a.items():
            for m2, c2 in b.items():
                mono = tuple(x + y for x, y in zip(m1, m2))
                c = c1 * c2
                s = out.get(mono)
                if s is None:
                    out[mono] = c
                else:
                    s = s + c
                    if s:
                        out[mono] = s
                    else:
                        del out[mono]
        return Poly._raw(self.nvars, out)

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly.one(self.nvars)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- structure ----------------------------------------------------------

    def total_degree(self) -> int:
        """Max total degree of a term; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(m) for m in self.terms)

    def leading(self, key=grlex_key):
        """(monomial, coefficient) of the largest term under ``key``."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        mono = max(self.terms, key=key)
        return mono, self.terms[mono]

    def monic(self, key=grlex_key) -> "Poly":
        """Scale so the leading coefficient is 1."""
        if not self.terms:
            return self
        _, c = self.leading(key)
        return self.scale(c.inverse())

    def degree_in(self, index: int) -> int:
        """Degree in the 1-based variable ``index``; -1 for zero."""
        if not self.terms:
            return -1
        return max(m[index - 1] for m in self.terms)

    def coefficients_in(self, index: int) -> list:
        """Dense coefficient list [c_0, ..., c_d] with respect to variable
        ``index``; each c_k is a Poly not involving that variable."""
        i = index - 1
        d = self.degree_in(index)
        buckets: list[dict] = [{} for _ in range(d + 1)]
        for mono, c in self.terms.items():
            rest = mono[:i] + (0,) + mono[i + 1:]
            buckets[mono[i]][rest] = c
        return [Poly._raw(self.nvars, b) for b in buckets]

    def compose(self, subs: Sequence["Poly"]) -> "Poly":
        """Substitute subs[k] for the (k+1)-th variable.

        The substituted polynomials must all share one ring; the result lives
        there.  Powers are cached per variable, so composing a polynomial that
        is dense in one variable stays cheap.
        """
        if len(subs) != self.nvars:
            raise ValueError("need one substitution per variable")
        if not subs:
            raise ValueError("cannot compose in a ring with no variables")
        target_n = subs[0].nvars
        caches: list[dict[int, Poly]] = [
            {0: Poly.one(target_n), 1: s} for s in subs
        ]

        def power(k: int, e: int) -> Poly:
            cache = caches[k]
            got = cache.get(e)
            if got is None:
                got = cache[1] ** e
                cache[e] = got
            return got

        acc = Poly.zero(target_n)
        for mono, c in self.terms.items():
            piece = Poly.const(target_n, c)
            for k, e in enumerate(mono):
                if e:
                    piece = piece * power(k, e)
            acc = acc + piece
        return acc

    def __repr__(self):
        return f"Poly({self.nvars}, {poly_to_string(self, default_names(self.nvars))!r})"


# ---------------------------------------------------------------------------
# calculus operations on polynomials

def differentiate(p: Poly, var_index: int) -> Poly:
    """Formal partial derivative with respect to the 1-based ``var_index``."""
    if not 1 <= var_index <= p.nvars:
        raise ValueError(f"variable index {var_index} out of range 1..{p.nvars}")
    i = var_index - 1
    out: dict = {}
    for mono, c in p.terms.items():
        e = mono[i]
        if e:
            new = mono[:i] + (e - 1,) + mono[i + 1:]
            add = c * GaussRat(e)
            s = out.get(new)
            out[new] = add if s is None else s + add
    return Poly._raw(p.nvars, {m: c for m, c in out.items() if c})


def gradient(p: Poly) -> tuple:
    return tuple(differentiate(p, j + 1) for j in range(p.nvars))


def vanishing_order(p: Poly):
    """Minimum total degree of a term; math.inf for the zero polynomial."""
    if not p.terms:
        return math.inf
    return min(sum(m) for m in p.terms)


def poly_matrix_det(rows: Sequence[Sequence[Poly]]) -> Poly:
    """Determinant of a square matrix of polynomials by cofactor expansion."""
    n = len(rows)
    for r in rows:
        if len(r) != n:
            raise ValueError("determinant needs a square matrix")
    if n == 0:
        raise ValueError("determinant of an empty matrix")
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    nv = rows[0][0].nvars
    acc = Poly.zero(nv)
    for j in range(n):
        entry = rows[0][j]
        if entry.is_zero():
            continue
        minor = [[rows[i][k] for k in range(n) if k != j] for i in range(1, n)]
        term = entry * poly_matrix_det(minor)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


def poly_matrix_adjugate(rows: Sequence[Sequence[Poly]]) -> list:
    """Adjugate matrix: adj[i][j] = (-1)^(i+j) * minor_det(j, i)."""
    n = len(rows)
    if n == 1:
        return [[Poly.one(rows[0][0].nvars)]]
    adj = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [
                [rows[r][c] for c in range(n) if c != i]
                for r in range(n)
                if r != j
            ]
            d = poly_matrix_det(minor)
            adj[i][j] = d if (i + j) % 2 == 0 else -d
    return adj


def jacobian_det(fs: Sequence[Poly]) -> Poly:
    """Determinant of the derivative matrix of n polynomials in n variables."""
    if not fs:
        raise ValueError("jacobian_det of an empty family")
    n = fs[0].nvars
    if len(fs) != n:
        raise ValueError(f"need exactly {n} polynomials in {n} variables, got {len(fs)}")
    rows = [[differentiate(f, j + 1) for j in range(n)] for f in fs]
    return poly_matrix_det(rows)


def jacobian_matrix(fs: Sequence[Poly]) -> list:
    return [[differentiate(f, j + 1) for j in range(f.nvars)] for f in fs]


def equal_up_to_unit(p: Poly, q: Poly):
    """GaussRat c with p == c*q, or None.  Zero matches only zero (c = 1)."""
    if p.is_zero() and q.is_zero():
        return GR_ONE
    if p.is_zero() or q.is_zero():
        return None
    if len(p.terms) != len(q.terms):
        return None
    mono, cp = p.leading()
    cq = q.terms.get(mono)
    if cq is None:
        return None
    ratio = cp / cq
    return ratio if p == q.scale(ratio) else None


def exact_divide(p: Poly, d: Poly):
    """Quotient q with p == q*d, or None when d does not divide p exactly.

    Single-divisor division: repeatedly cancel the graded-lex leading term.
    If at some point the leading term of the remainder is not divisible by
    the leading term of d, then d cannot divide p (any element of the
    principal ideal (d) has leading term divisible by that of d).
    """
    if d.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if p.is_zero():
        return Poly.zero(p.nvars)
    dm, dc = d.leading()
    quot: dict = {}
    work = p
    while work.terms:
        m, c = work.leading()
        if not mono_divides(dm, m):
            return None
        qm = mono_quot(dm, m)
        qc = c / dc
        quot[qm] = qc
        work = work - d.mul_term(qm, qc)
    return Poly._raw(p.nvars, quot)


# ---------------------------------------------------------------------------
# parsing and printing

def default_names(nvars: int) -> tuple:
    return tuple(f"z{j + 1}" for j in range(nvars))


class ParseError(ValueError):
    """Syntax or name error in a polynomial expression, with position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


_TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>\d+(?:/\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*^()])"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive descent for:  expr := ['-'] term (('+'|'-') term)*
    term := factor ('*' factor)* ; factor := atom ['^' INT] ;
    atom := '(' expr ')' | NUMBER | 'i' | VARIABLE."""

    def __init__(self, text: str, names: Sequence[str]):
        self.tokens = _tokenize(text)
        self.k = 0
        self.names = list(names)
        self.nvars = len(self.names)
        if "i" in self.names:
            raise ParseError("'i' is reserved for the imaginary unit", 0)

    def peek(self):
        return self.tokens[self.k]

    def take(self):
        t = self.tokens[self.k]
        self.k += 1
        return t

    def parse(self) -> Poly:
        p = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {val!r}", pos)
        return p

    def expr(self) -> Poly:
        kind, val, _ = self.peek()
        negate = False
        if kind == "op" and val == "-":
            self.take()
            negate = True
        acc = self.term()
        if negate:
            acc = -acc
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                rhs = self.term()
                acc = acc + rhs if val == "+" else acc - rhs
            else:
                return acc

    def term(self) -> Poly:
        acc = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "*":
                self.take()
                acc = acc * self.factor()
            else:
                return acc

    def factor(self) -> Poly:
        base = self.atom()
        kind, val, pos = self.peek()
        if kind == "op" and val == "^":
            self.take()
            kind, val, pos = self.take()
            if kind != "num" or "/" in val:
                raise ParseError("exponent must be a non-negative integer", pos)
            return base ** int(val)
        return base

    def atom(self) -> Poly:
        kind, val, pos = self.take()
        if kind == "op" and val == "(":
            inner = self.expr()
            kind, val, pos = self.take()
            if not (kind == "op" and val == ")"):
                raise ParseError("expected ')'", pos)
            return inner
        if kind == "num":
            if "/" in val:
                a, b = val.split("/")
                if int(b) == 0:
                    raise ParseError("zero denominator", pos)
                return Poly.const(self.nvars, GaussRat(Fraction(int(a), int(b))))
            return Poly.const(self.nvars, GaussRat(int(val)))
        if kind == "name":
            if val == "i":
                return Poly.const(self.nvars, GR_I)
            try:
                idx = self.names.index(val)
            except ValueError:
                raise ParseError(f"unknown variable {val!r}", pos) from None
            return Poly.variable(self.nvars, idx + 1)
        raise ParseError(f"unexpected {val!r}", pos)


def parse_poly(text: str, variables: Sequence[str]) -> Poly:
    """Parse ``text`` over the given variable names.

    Coefficients are integers or a/b fractions, the imaginary unit is ``i``,
    operators are + - * ^ with parentheses; exponents are non-negative
    integer literals.
    """
    return _Parser(text, variables).parse()


def _coeff_str(c: GaussRat) -> tuple[str, bool]:
    """Render a coefficient; second value says whether it is "bare" enough to
    be prefixed with a sign by the caller (mixed values keep their parens)."""
    if not c.im:
        return str(c.re), True
    if not c.re:
        if c.im == 1:
            return "i", True
        if c.im == -1:
            return "-i", True
        return f"{c.im}*i", True
    im = c.im
    sign = "+" if im > 0 else "-"
    mag = -im if im < 0 else im
    unit = "i" if mag == 1 else f"{mag}*i"
    return f"({c.re}{sign}{unit})", False


def poly_to_string(p: Poly, names: Sequence[str] | None = None) -> str:
    """Canonical rendering: graded-lex descending, re-parseable by parse_poly."""
    if names is None:
        names = default_names(p.nvars)
    if len(names) != p.nvars:
        raise ValueError("need one name per variable")
    if not p.terms:
        return "0"
    pieces = []
    for mono in sorted(p.terms, key=grlex_key, reverse=True):
        c = p.terms[mono]
        factors = []
        for name, e in zip(names, mono):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        if not factors:
            cs, _ = _coeff_str(c)
            pieces.append(cs)
            continue
        monostr = "*".join(factors)
        if c == GR_ONE:
            pieces.append(monostr)
        elif c == GaussRat(-1):
            pieces.append(f"-{monostr}")
        else:
            cs, _ = _coeff_str(c)
            pieces.append(f"{cs}*{monostr}")
    out = [pieces[0]]
    for piece in pieces[1:]:
        if piece.startswith("-"):
            out.append(" - ")
            out.append(piece[1:])
        else:
            out.append(" + ")
            out.append(piece)
    return "".join(out)
