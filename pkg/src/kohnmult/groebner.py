"""Deterministic Groebner bases over Q(i) and the ideal operations built on them.

The basis returned by :func:`groebner_basis` is the monic reduced basis, which
is unique for a given ideal and monomial order; combined with a fixed pair
processing order this makes every computation in the package reproducible
byte for byte.

Ideal-theoretic operations used by the multiplier algorithms live here as
well: normal forms with cofactor tracking, vector-space dimension of the
quotient, radical membership (Rabinowitsch trick), least power of an element
lying in an ideal, elimination, gcd by subresultant pseudo-remainders, and
squarefree parts.
"""

from __future__ import annotations

import heapq
import itertools
import math
from typing import Sequence

from kohnmult.polyring import (
    GR_ONE,
    GaussRat,
    Poly,
    differentiate,
    exact_divide,
    grlex_key,
    mono_divides,
    mono_lcm,
    mono_mul,
    mono_quot,
)


class MonomialOrder:
    """Monomial order given by a sort key function (max = leading).

    ``elim(k)`` builds the block order that makes the first k variables
    expensive: graded lex within each block, first block dominant.  A basis
    under that order intersected with the cheap block solves elimination.
    """

    __slots__ = ("name", "key")

    def __init__(self, name: str, key):
        self.name = name
        self.key = key

    def __repr__(self):
        return f"MonomialOrder({self.name})"

    def __eq__(self, other):
        return isinstance(other, MonomialOrder) and self.name == other.name

    @staticmethod
    def grlex() -> "MonomialOrder":
        return MonomialOrder("grlex", grlex_key)

    @staticmethod
    def lex() -> "MonomialOrder":
        return MonomialOrder("lex", lambda m: m)

    @staticmethod
    def elim(k: int) -> "MonomialOrder":
        def key(m):
            head, tail = m[:k], m[k:]
            return (sum(head), head, sum(tail), tail)

        return MonomialOrder(f"elim({k})", key)


GRLEX = MonomialOrder.grlex()


def _leading(terms: dict, key):
    mono = max(terms, key=key)
    return mono, terms[mono]


def _divide(p: Poly, basis: Sequence[Poly], key, want_quotients: bool):
    """Full multivariate division of p by the basis list.

    Returns (quotients, remainder) with p == sum(q_i * basis_i) + remainder
    and no remainder term divisible by any basis leading term.  Divisor
    selection is first-match in list order, so the quotients are
    deterministic even where the remainder alone would be.
    """
    nv = p.nvars
    lts = [b.leading(key) for b in basis]
    quots = [dict() for _ in basis] if want_quotients else None
    rem: dict = {}
    work = dict(p.terms)
    while work:
        mono, c = _leading(work, key)
        del work[mono]
        for idx, (ltm, ltc) in enumerate(lts):
            if mono_divides(ltm, mono):
                qm = mono_quot(ltm, mono)
                qc = c / ltc
                if want_quotients:
                    qd = quots[idx]
                    s = qd.get(qm)
                    s = qc if s is None else s + qc
                    if s:
                        qd[qm] = s
                    else:
                        del qd[qm]
                for bm, bc in basis[idx].terms.items():
                    if bm == ltm:
                        continue
                    tm = mono_mul(bm, qm)
                    tc = bc * qc
                    s = work.get(tm)
                    s = -tc if s is None else s - tc
                    if s:
                        work[tm] = s
                    else:
                        work.pop(tm, None)
                break
        else:
            rem[mono] = c
    qpolys = [Poly(nv, q) for q in quots] if want_quotients else None
    return qpolys, Poly(nv, rem)


class GroebnerBasis:
    """Monic reduced basis of an ideal, with optional cofactor provenance.

    When built with ``provenance=True`` each basis element carries its
    expression as a combination of the original generators, so
    :meth:`cofactors` can write any ideal member explicitly in terms of the
    generators the caller supplied.
    """

    def __init__(self, gens, basis, order, provenance=None):
        self.gens = tuple(gens)
        self.basis = tuple(basis)
        self.order = order
        self.provenance = provenance  # provenance[i][j]: basis[i] = sum_j prov*gens[j]
        self.nvars = gens[0].nvars if gens else 0

    def is_unit_ideal(self) -> bool:
        return len(self.basis) == 1 and self.basis[0].is_unit()

    def is_zero_ideal(self) -> bool:
        return not self.basis

    def normal_form(self, p: Poly) -> Poly:
        if not self.basis:
            return p
        _, r = _divide(p, self.basis, self.order.key, want_quotients=False)
        return r

    def contains(self, p: Poly) -> bool:
        return self.normal_form(p).is_zero()

    def reduce_with_quotients(self, p: Poly):
        """(quotients over the reduced basis, remainder)."""
        if not self.basis:
            return [], p
        return _divide(p, self.basis, self.order.key, want_quotients=True)

    def cofactors(self, p: Poly):
        """(cofactors over the original generators, remainder).

        p == sum(cof_j * gens_j) + remainder.  Requires provenance tracking.
        """
        if self.provenance is None:
            raise ValueError("basis was computed without provenance tracking")
        if not self.basis:
            return [Poly.zero(self.nvars) for _ in self.gens], p
        quots, r = _divide(p, self.basis, self.order.key, want_quotients=True)
        cofs = [Poly.zero(self.nvars) for _ in self.gens]
        for qi, prow in zip(quots, self.provenance):
            if qi.is_zero():
                continue
            for j, a in enumerate(prow):
                if not a.is_zero():
                    cofs[j] = cofs[j] + qi * a
        return cofs, r

    def leading_monomials(self):
        return [b.leading(self.order.key)[0] for b in self.basis]


def groebner_basis(
    gens: Sequence[Poly],
    order: MonomialOrder = GRLEX,
    provenance: bool = False,
) -> GroebnerBasis:
    """Buchberger with a fixed pair order, returning the monic reduced basis.

    Pairs are processed by (degree of the leading-term lcm, the lcm itself,
    generator indices); pairs with coprime leading terms are skipped.  The
    final interreduction drops redundant elements and tail-reduces the rest.
    """
    gens = [g for g in gens]
    if not gens:
        raise ValueError("need at least one generator")
    nv = gens[0].nvars
    for g in gens:
        if g.nvars != nv:
            raise ValueError("generators live in different rings")
    key = order.key

    work: list[Poly] = []
    provs: list[list[Poly]] = []
    for j, g in enumerate(gens):
        if g.is_zero():
            continue
        _, c = g.leading(key)
        inv = c.inverse()
        work.append(g.scale(inv))
        if provenance:
            row = [Poly.zero(nv) for _ in gens]
            row[j] = Poly.const(nv, inv)
            provs.append(row)
    if not work:
        return GroebnerBasis(gens, [], order, [] if provenance else None)

    def prov_combine(qs, rows):
        out = [Poly.zero(nv) for _ in gens]
        for q, row in zip(qs, rows):
            if q.is_zero():
                continue
            for j, a in enumerate(row):
                if not a.is_zero():
                    out[j] = out[j] + q * a
        return out

    heap: list = []
    for i in range(len(work)):
        for j in range(i + 1, len(work)):
            lcm = mono_lcm(work[i].leading(key)[0], work[j].leading(key)[0])
            heapq.heappush(heap, (sum(lcm), lcm, i, j))

    while heap:
        _, lcm, i, j = heapq.heappop(heap)
        mi = work[i].leading(key)[0]
        mj = work[j].leading(key)[0]
        if lcm == mono_mul(mi, mj):
            continue  # coprime leading terms never produce new information
        s = work[i].mul_term(mono_quot(mi, lcm), GR_ONE) - work[j].mul_term(
            mono_quot(mj, lcm), GR_ONE
        )
        if s.is_zero():
            continue
        quots, r = _divide(s, work, key, want_quotients=provenance)
        if r.is_zero():
            continue
        _, c = r.leading(key)
        inv = c.inverse()
        r = r.scale(inv)
        if provenance:
            prow = [Poly.zero(nv) for _ in gens]
            pi, pj = provs[i], provs[j]
            qi, qj = mono_quot(mi, lcm), mono_quot(mj, lcm)
            for t, a in enumerate(pi):
                if not a.is_zero():
                    prow[t] = prow[t] + a.mul_term(qi, GR_ONE)
            for t, a in enumerate(pj):
                if not a.is_zero():
                    prow[t] = prow[t] - a.mul_term(qj, GR_ONE)
            used = prov_combine(quots, provs)
            for t in range(len(gens)):
                prow[t] = (prow[t] - used[t]).scale(inv)
            provs.append(prow)
        new_idx = len(work)
        work.append(r)
        mnew = r.leading(key)[0]
        for t in range(new_idx):
            lcm2 = mono_lcm(work[t].leading(key)[0], mnew)
            heapq.heappush(heap, (sum(lcm2), lcm2, t, new_idx))

    # interreduce: drop elements whose leading term another divides, then
    # tail-reduce each survivor against the rest
    idx_sorted = sorted(range(len(work)), key=lambda t: key(work[t].leading(key)[0]))
    kept: list[int] = []
    for t in idx_sorted:
        mt = work[t].leading(key)[0]
        if any(mono_divides(work[s].leading(key)[0], mt) for s in kept):
            continue
        kept.append(t)
    final: list[Poly] = []
    final_prov: list[list[Poly]] = []
    for t in kept:
        others = [work[s] for s in kept if s != t]
        if others:
            quots, r = _divide(work[t], others, key, want_quotients=provenance)
        else:
            quots, r = [], work[t]
        _, c = r.leading(key)
        inv = c.inverse()
        final.append(r.scale(inv))
        if provenance:
            used = prov_combine(quots, [provs[s] for s in kept if s != t])
            prow = [(provs[t][j] - used[j]).scale(inv) for j in range(len(gens))]
            final_prov.append(prow)
    pairs = sorted(
        range(len(final)), key=lambda t: key(final[t].leading(key)[0])
    )
    final = [final[t] for t in pairs]
    if provenance:
        final_prov = [final_prov[t] for t in pairs]
    return GroebnerBasis(gens, final, order, final_prov if provenance else None)


def _as_gb(gens_or_gb, provenance=False) -> GroebnerBasis:
    if isinstance(gens_or_gb, GroebnerBasis):
        return gens_or_gb
    return groebner_basis(list(gens_or_gb), provenance=provenance)


def ideal_membership(p: Poly, gens_or_gb) -> bool:
    return _as_gb(gens_or_gb).contains(p)


def quotient_dimension(gens_or_gb):
    """dim of k[z]/I as a vector space; math.inf when not finite.

    Finite iff for every variable some leading monomial is a pure power of
    it; then the standard monomials form a box-bounded staircase complement.
    """
    gb = _as_gb(gens_or_gb)
    if gb.is_unit_ideal():
        return 0
    if gb.is_zero_ideal():
        return math.inf
    n = gb.nvars
    lms = gb.leading_monomials()
    bounds = [None] * n
    for m in lms:
        nz = [k for k, e in enumerate(m) if e]
        if len(nz) == 1:
            k = nz[0]
            if bounds[k] is None or m[k] < bounds[k]:
                bounds[k] = m[k]
    if any(b is None for b in bounds):
        return math.inf
    count = 0
    for mono in itertools.product(*(range(b) for b in bounds)):
        if not any(mono_divides(m, mono) for m in lms):
            count += 1
    return count


def standard_monomials(gens_or_gb):
    """Monomials spanning k[z]/I, graded-lex ascending; None when infinite."""
    gb = _as_gb(gens_or_gb)
    if gb.is_unit_ideal():
        return []
    if quotient_dimension(gb) == math.inf:
        return None
    n = gb.nvars
    lms = gb.leading_monomials()
    bounds = []
    for k in range(n):
        bounds.append(min(m[k] for m in lms if sum(m) == m[k] and m[k] > 0))
    out = [
        mono
        for mono in itertools.product(*(range(b) for b in bounds))
        if not any(mono_divides(m, mono) for m in lms)
    ]
    out.sort(key=grlex_key)
    return out


def power_in_ideal(p: Poly, s: int, gens_or_gb) -> bool:
    """Whether p^s lies in the ideal, via squaring of normal forms.

    The normal form map is the projection onto the quotient ring, so
    NF(p^s) can be built from NF(p) by square-and-multiply with a reduction
    after every product; the huge intermediate power is never expanded.
    """
    if s < 1:
        raise ValueError("power must be >= 1")
    gb = _as_gb(gens_or_gb)
    r = gb.normal_form(p)
    acc = None
    while True:
        if s & 1:
            acc = r if acc is None else gb.normal_form(acc * r)
            if acc.is_zero():
                return True
        s >>= 1
        if not s:
            return acc.is_zero()
        r = gb.normal_form(r * r)
        if r.is_zero():
            # a set bit remains, so the final product picks up this zero
            return True


def min_power_in_ideal(p: Poly, gens_or_gb, cap: int):
    """Least s <= cap with p^s in the ideal, or None.

    Membership of powers is monotone in s, so test the cap first, then
    bracket by doubling and finish with bisection.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    gb = _as_gb(gens_or_gb)
    if not power_in_ideal(p, cap, gb):
        return None
    lo, hi = 0, 1
    while hi < cap and not power_in_ideal(p, hi, gb):
        lo, hi = hi, min(2 * hi, cap)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if power_in_ideal(p, mid, gb):
            hi = mid
        else:
            lo = mid
    return hi


def radical_membership(p: Poly, gens: Sequence[Poly]) -> bool:
    """p in rad(I), decided by adjoining t and testing 1 in I + (1 - t*p)."""
    if p.is_zero():
        return True
    gens = list(gens)
    n = p.nvars
    lifted = [Poly(n + 1, {m + (0,): c for m, c in g.terms.items()}) for g in gens]
    tp = Poly(n + 1, {m + (1,): c for m, c in p.terms.items()})
    one = Poly.one(n + 1)
    gb = groebner_basis(lifted + [one - tp])
    return gb.is_unit_ideal()


def origin_isolated(gens: Sequence[Poly], quick_cap: int = 32) -> bool:
    """Whether every variable lies in the radical of the ideal.

    Cheap route first: some power of the variable reduces to zero.  Only
    when no power up to ``quick_cap`` works does the adjoined-variable
    radical test run.
    """
    gens = list(gens)
    gb = _as_gb(gens)
    n = gb.nvars
    for j in range(1, n + 1):
        v = Poly.variable(n, j)
        if min_power_in_ideal(v, gb, quick_cap) is not None:
            continue
        if not radical_membership(v, gens):
            return False
    return True


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def contains_maximal_power(gens_or_gb, k: int) -> bool:
    """Whether every monomial of total degree k lies in the ideal."""
    gb = _as_gb(gens_or_gb)
    n = gb.nvars
    for mono in _compositions(k, n):
        if not gb.contains(Poly.monomial(n, mono)):
            return False
    return True


def eliminate(gens: Sequence[Poly], drop: Sequence[int]) -> list:
    """Generators of the ideal's intersection with the subring that omits
    the 1-based variables in ``drop``; results live in the smaller ring,
    remaining variables keeping their relative order."""
    gens = list(gens)
    n = gens[0].nvars
    drop_set = sorted(set(drop))
    for d in drop_set:
        if not 1 <= d <= n:
            raise ValueError(f"variable index {d} out of range 1..{n}")
    keep = [j for j in range(1, n + 1) if j not in drop_set]
    perm = [d - 1 for d in drop_set] + [j - 1 for j in keep]
    k = len(drop_set)
    permuted = [
        Poly(n, {tuple(m[t] for t in perm): c for m, c in g.terms.items()})
        for g in gens
    ]
    gb = groebner_basis(permuted, order=MonomialOrder.elim(k))
    out = []
    for b in gb.basis:
        if all(all(e == 0 for e in m[:k]) for m in b.terms):
            out.append(Poly(len(keep), {m[k:]: c for m, c in b.terms.items()}))
    return out


# ---------------------------------------------------------------------------
# gcd by subresultant pseudo-remainder sequences

def _highest_var(*ps: Poly):
    h = 0
    for p in ps:
        for m in p.terms:
            for k in range(len(m) - 1, h - 1, -1):
                if m[k]:
                    h = max(h, k + 1)
                    break
    return h


def _dense(p: Poly, var: int):
    """Dense coefficient list in the 1-based variable, low degree first."""
    return p.coefficients_in(var)


def _from_dense(coeffs, var: int, nv: int) -> Poly:
    i = var - 1
    acc: dict = {}
    for e, c in enumerate(coeffs):
        for m, k in c.terms.items():
            mono = m[:i] + (m[i] + e,) + m[i + 1:]
            acc[mono] = k
    return Poly(nv, acc)


def _strip(coeffs):
    while coeffs and coeffs[-1].is_zero():
        coeffs.pop()
    return coeffs


def _prem(A, B, nv):
    """Pseudo-remainder: lc(B)^(degA-degB+1) * A mod B, on dense lists."""
    dB = len(B) - 1
    d = B[-1]
    R = list(A)
    e = len(A) - 1 - dB + 1
    while R and len(R) - 1 >= dB:
        lcR = R[-1]
        shift = len(R) - 1 - dB
        R = [d * c for c in R]
        for t, bc in enumerate(B):
            R[shift + t] = R[shift + t] - lcR * bc
        _strip(R)
        e -= 1
    if e > 0:
        f = d ** e
        R = [f * c for c in R]
    return R


def _content(coeffs, nv) -> Poly:
    acc = Poly.zero(nv)
    for c in coeffs:
        acc = multivariate_gcd(acc, c)
        if acc.is_unit():
            return Poly.one(nv)
    return acc


def multivariate_gcd(p: Poly, q: Poly) -> Poly:
    """gcd over Q(i)[z], normalized monic in graded lex; gcd(0, 0) = 0.

    Recursion on the highest variable present: split off contents, run the
    subresultant sequence on the primitive parts (Collins' coefficient
    growth control, every interior division exact), recombine.
    """
    if p.is_zero():
        return q if q.is_zero() else q.monic()
    if q.is_zero():
        return p.monic()
    nv = p.nvars
    if q.nvars != nv:
        raise ValueError("operands live in different rings")
    var = _highest_var(p, q)
    if var == 0:
        return Poly.one(nv)
    A = _strip(_dense(p, var))
    B = _strip(_dense(q, var))
    if len(A) < len(B):
        A, B = B, A
    cont_a = _content(A, nv)
    cont_b = _content(B, nv)
    cont_g = multivariate_gcd(cont_a, cont_b)
    A = [_exact(c, cont_a) for c in A]
    B = [_exact(c, cont_b) for c in B]
    if len(B) == 1:
        return cont_g.monic()
    g = Poly.one(nv)
    h = Poly.one(nv)
    while True:
        delta = (len(A) - 1) - (len(B) - 1)
        R = _prem(A, B, nv)
        if not R:
            pp = [_exact(c, _content(B, nv)) for c in B]
            return (_from_dense(pp, var, nv) * cont_g).monic()
        if len(R) == 1:
            return cont_g.monic()
        A = B
        divisor = g * (h ** delta)
        B = [_exact(c, divisor) for c in R]
        g = A[-1]
        if delta == 0:
            pass
        elif delta == 1:
            h = g
        else:
            h = _exact(g ** delta, h ** (delta - 1))


def _exact(p: Poly, d: Poly) -> Poly:
    q = exact_divide(p, d)
    if q is None:
        raise ArithmeticError("exact division failed inside gcd")
    return q


def squarefree_part(p: Poly) -> Poly:
    """Product of the distinct irreducible factors, monic; 0 and units map
    to themselves (a unit to 1)."""
    if p.is_zero():
        return p
    if p.is_constant():
        return Poly.one(p.nvars)
    g = p
    for j in range(1, p.nvars + 1):
        d = differentiate(p, j)
        if not d.is_zero():
            g = multivariate_gcd(g, d)
        if g.is_unit():
            return p.monic()
    return _exact(p, g).monic()
