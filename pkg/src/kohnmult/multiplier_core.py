"""Multiplier objects with exact order bookkeeping, derivation rules, and an
independent certificate verifier.

A derivation is an append-only list of steps.  Each step names a rule, the
steps it consumed, the payload polynomial(s) it produced, and the exact
rational subellipticity order the rule arithmetic assigns.  The verifier
replays every step from the payload strings alone: it re-derives the
polynomials, re-checks the membership side conditions (root cofactors are
replayed by plain multiplication), and re-computes every order, so a
certificate stands on its own without trusting the code that emitted it.

Scalar multipliers form an ideal: sums with arbitrary polynomial
coefficients keep the minimum order.  Differentials halve the order.
Determinants of n vector multipliers keep the minimum.  Roots divide by the
extracted power.  Pre-multipliers certify only their differential's order;
constant-coefficient combinations of pre-multipliers (and of scalar
multipliers, whose differentials count at half their order) stay
pre-multipliers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from kohnmult.polyring import (
    GaussRat,
    Poly,
    differentiate,
    gradient,
    parse_poly,
    poly_matrix_adjugate,
    poly_matrix_det,
    poly_to_string,
)
from kohnmult.groebner import groebner_basis

SubellOrder = Fraction

CERT_SCHEMA = "kohn-cert/1"

SCALAR_RULES = frozenset({"det", "root", "combine"})
VECTOR_RULES = frozenset(
    {"premultiplier_differential", "differential", "matrix_to_vector",
     "general_gamma", "assume_vector"}
)
PREMULT_RULES = frozenset({"premultiplier", "premultiplier_combine"})

RULE_CITATIONS = {
    "premultiplier": "defining function as pre-multiplier",
    "premultiplier_combine": "constant-coefficient combination of pre-multipliers",
    "premultiplier_differential": "differential of a pre-multiplier",
    "differential": "differential of a scalar multiplier",
    "det": "determinant of vector multipliers",
    "root": "root extraction from ideal membership",
    "combine": "holomorphic-coefficient combination of multipliers",
    "matrix_to_vector": "matrix multiplier contracted to a vector multiplier",
    "general_gamma": "generalized matrix contraction to a vector multiplier",
    "assume_vector": "assumed vector multiplier (hypothesis)",
}


def order_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_order(s: str) -> Fraction:
    return Fraction(s)


class DomainError(ValueError):
    pass


class GenericityError(RuntimeError):
    """A seeded search ran out of retry budget before finding admissible data."""


class CapExceeded(RuntimeError):
    """A declared search cap was hit; the partial outcome is in the message."""


class VerificationError(RuntimeError):
    """An exact identity the derivation depends on failed to hold."""


@dataclass(frozen=True)
class SpecialDomain:
    """Defining data of Re w + sum |F_j(z)|^2 < 0: the functions F_j."""

    variables: tuple
    generators: tuple

    def __post_init__(self):
        if not self.variables:
            raise DomainError("domain needs at least one variable")
        if not self.generators:
            raise DomainError("domain needs at least one generator")
        n = len(self.variables)
        for g in self.generators:
            if g.nvars != n:
                raise DomainError("generator arity does not match variables")
            if g.constant_value():
                raise DomainError("every defining function must vanish at 0")

    @property
    def nvars(self) -> int:
        return len(self.variables)

    @staticmethod
    def from_strings(variables: Sequence[str], gens: Sequence[str]) -> "SpecialDomain":
        vs = tuple(variables)
        polys = tuple(parse_poly(g, vs) for g in gens)
        return SpecialDomain(vs, polys)

    def to_json(self) -> dict:
        return {
            "variables": list(self.variables),
            "generators": [poly_to_string(g, self.variables) for g in self.generators],
        }


@dataclass(frozen=True)
class ScalarMultiplier:
    poly: Poly
    order: Fraction
    step: int


@dataclass(frozen=True)
class VectorMultiplier:
    form: tuple  # n Polys, coefficient of dz_j at slot j
    order: Fraction
    step: int


@dataclass(frozen=True)
class PreMultiplier:
    poly: Poly
    differential_order: Fraction
    step: int


@dataclass(frozen=True)
class MatrixMultiplier:
    """n x n matrix whose rows are vector multipliers (row ell is the form
    sum_j entries[ell][j] dz_j, certified at row_orders[ell])."""

    entries: tuple  # tuple of n row-tuples of Polys
    row_orders: tuple  # n Fractions
    row_steps: tuple  # n step ids of the row vector-multiplier steps

    @property
    def size(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class Step:
    id: int
    rule: str
    inputs: tuple
    payload: tuple  # poly strings
    order: Fraction
    paper_ref: str
    aux: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d = {
            "id": self.id,
            "rule": self.rule,
            "inputs": list(self.inputs),
            "payload": list(self.payload),
            "order": order_str(self.order),
            "paper_ref": self.paper_ref,
        }
        if self.aux:
            d["aux"] = self.aux
        return d


class DerivationCertificate:
    """Append-only log of rule applications over one domain."""

    def __init__(self, domain: SpecialDomain):
        self.domain = domain
        self.steps: list[Step] = []

    def add(self, rule, inputs, payload, order, aux=None) -> Step:
        step = Step(
            id=len(self.steps),
            rule=rule,
            inputs=tuple(inputs),
            payload=tuple(payload),
            order=order,
            paper_ref=RULE_CITATIONS[rule],
            aux=aux or {},
        )
        self.steps.append(step)
        return step

    @property
    def final(self) -> Step:
        if not self.steps:
            raise ValueError("empty certificate")
        return self.steps[-1]

    def to_json(self) -> dict:
        return {
            "schema": CERT_SCHEMA,
            "domain": self.domain.to_json(),
            "steps": [s.to_json() for s in self.steps],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False)

    @staticmethod
    def from_json(data: dict) -> "DerivationCertificate":
        if data.get("schema") != CERT_SCHEMA:
            raise ValueError(f"unsupported certificate schema {data.get('schema')!r}")
        dom = SpecialDomain.from_strings(
            data["domain"]["variables"], data["domain"]["generators"]
        )
        cert = DerivationCertificate(dom)
        for s in data["steps"]:
            cert.steps.append(
                Step(
                    id=int(s["id"]),
                    rule=s["rule"],
                    inputs=tuple(int(t) for t in s["inputs"]),
                    payload=tuple(s["payload"]),
                    order=parse_order(s["order"]),
                    paper_ref=s.get("paper_ref", ""),
                    aux=s.get("aux", {}),
                )
            )
        return cert


class Derivation:
    """Rule applicator: builds multiplier objects while logging certificate
    steps.  All payloads are rendered through the canonical printer so the
    certificate is self-contained text."""

    def __init__(self, domain: SpecialDomain):
        self.domain = domain
        self.cert = DerivationCertificate(domain)

    # -- helpers ------------------------------------------------------------

    def _s(self, p: Poly) -> str:
        return poly_to_string(p, self.domain.variables)

    def _vec(self, form) -> list:
        return [self._s(c) for c in form]

    # -- rules --------------------------------------------------------------

    def init_premultipliers(self) -> list:
        """Record every defining function as a pre-multiplier whose
        differential carries order 1/4."""
        out = []
        for j, g in enumerate(self.domain.generators):
            step = self.cert.add(
                "premultiplier",
                [],
                [self._s(g)],
                Fraction(1, 4),
                aux={"generator_index": j},
            )
            out.append(PreMultiplier(g, Fraction(1, 4), step.id))
        return out

    def premultiplier_combine(self, coeffs, inputs) -> PreMultiplier:
        """Constant-coefficient combination; scalar-multiplier inputs
        contribute half their order (their differential's order)."""
        if len(coeffs) != len(inputs):
            raise ValueError("one coefficient per input")
        nv = self.domain.nvars
        acc = Poly.zero(nv)
        contributions = []
        ids = []
        cstrs = []
        for c, m in zip(coeffs, inputs):
            if not isinstance(c, GaussRat):
                c = GaussRat(c)
            if isinstance(m, PreMultiplier):
                contributions.append(m.differential_order)
                acc = acc + m.poly.scale(c)
            elif isinstance(m, ScalarMultiplier):
                contributions.append(m.order / 2)
                acc = acc + m.poly.scale(c)
            else:
                raise TypeError("inputs must be pre- or scalar multipliers")
            ids.append(m.step)
            cstrs.append(self._s(Poly.const(nv, c)))
        order = min(contributions)
        step = self.cert.add(
            "premultiplier_combine", ids, [self._s(acc)], order, aux={"coeffs": cstrs}
        )
        return PreMultiplier(acc, order, step.id)

    def rule_premultiplier_differential(self, pm: PreMultiplier) -> VectorMultiplier:
        form = gradient(pm.poly)
        step = self.cert.add(
            "premultiplier_differential",
            [pm.step],
            self._vec(form),
            pm.differential_order,
        )
        return VectorMultiplier(form, pm.differential_order, step.id)

    def rule_differential(self, f: ScalarMultiplier) -> VectorMultiplier:
        form = gradient(f.poly)
        order = f.order / 2
        step = self.cert.add("differential", [f.step], self._vec(form), order)
        return VectorMultiplier(form, order, step.id)

    def rule_det(self, thetas) -> ScalarMultiplier:
        n = self.domain.nvars
        if len(thetas) != n:
            raise ValueError(f"determinant rule needs exactly {n} vector multipliers")
        rows = [list(t.form) for t in thetas]
        d = poly_matrix_det(rows)
        order = min(t.order for t in thetas)
        step = self.cert.add("det", [t.step for t in thetas], [self._s(d)], order)
        return ScalarMultiplier(d, order, step.id)

    def rule_jacobian_of_premultipliers(self, gs) -> ScalarMultiplier:
        """Differentiate each pre-multiplier, then take the determinant."""
        thetas = [self.rule_premultiplier_differential(g) for g in gs]
        return self.rule_det(thetas)

    def rule_root(self, f: Poly, m: int, known) -> ScalarMultiplier:
        """f with f^m in the ideal of known multipliers; order = min/m.
        The membership cofactors are computed here and stored so the
        verifier can replay the identity by multiplication alone."""
        if m < 1:
            raise ValueError("root exponent must be >= 1")
        if not known:
            raise ValueError("root rule needs at least one known multiplier")
        gb = groebner_basis([k.poly for k in known], provenance=True)
        cofs, rem = gb.cofactors(f ** m)
        if not rem.is_zero():
            raise ValueError(
                f"root rule rejected: payload^{m} is not in the ideal of the "
                "known multipliers"
            )
        order = min(k.order for k in known) / m
        step = self.cert.add(
            "root",
            [k.step for k in known],
            [self._s(f)],
            order,
            aux={"m": m, "cofactors": [self._s(c) for c in cofs]},
        )
        return ScalarMultiplier(f, order, step.id)

    def rule_combine(self, coeffs, ms) -> ScalarMultiplier:
        """Polynomial-coefficient combination of scalar multipliers."""
        if len(coeffs) != len(ms):
            raise ValueError("one coefficient per multiplier")
        nv = self.domain.nvars
        acc = Poly.zero(nv)
        for c, m in zip(coeffs, ms):
            acc = acc + c * m.poly
        order = min(m.order for m in ms)
        step = self.cert.add(
            "combine",
            [m.step for m in ms],
            [self._s(acc)],
            order,
            aux={"coeffs": [self._s(c) for c in coeffs]},
        )
        return ScalarMultiplier(acc, order, step.id)

    def rule_assume_vector(self, form, order: Fraction) -> VectorMultiplier:
        """Record a vector multiplier as a hypothesis (used for matrix rows
        whose multiplier property is an assumption, not a derivation)."""
        form = tuple(form)
        step = self.cert.add("assume_vector", [], self._vec(form), order)
        return VectorMultiplier(form, order, step.id)

    def assume_matrix(self, entries, row_orders) -> MatrixMultiplier:
        rows = []
        for row, w in zip(entries, row_orders):
            rows.append(self.rule_assume_vector(tuple(row), w))
        return MatrixMultiplier(
            tuple(tuple(r) for r in entries),
            tuple(row_orders),
            tuple(r.step for r in rows),
        )

    def rule_matrix_to_vector(self, a: MatrixMultiplier) -> VectorMultiplier:
        """b_j = sum_{p,l} adj(a)_{pl} * d_p a_{lj}; order = (min row)/2."""
        n = self.domain.nvars
        if a.size != n:
            raise ValueError("matrix multiplier must be n x n over the n variables")
        b = matrix_to_vector_form(a.entries)
        order = min(a.row_orders) / 2
        step = self.cert.add(
            "matrix_to_vector", list(a.row_steps), self._vec(b), order
        )
        return VectorMultiplier(tuple(b), order, step.id)

    def rule_general_gamma(self, Gamma, A, a: MatrixMultiplier, alpha: ScalarMultiplier) -> VectorMultiplier:
        """b_j = sum_{p,k,l} Gamma_{pk} A_{kl} d_p a_{lj}, requiring the
        exact identity A * a = alpha * I; order = min(rows, alpha)/2."""
        n = self.domain.nvars
        if a.size != n or len(Gamma) != n or len(A) != n:
            raise ValueError("all matrices must be n x n")
        check_gamma_hypothesis(A, a.entries, alpha.poly)
        b = general_gamma_form(Gamma, A, a.entries)
        order = min(min(a.row_orders), alpha.order) / 2
        step = self.cert.add(
            "general_gamma",
            list(a.row_steps) + [alpha.step],
            self._vec(b),
            order,
            aux={
                "gamma": [[self._s(x) for x in row] for row in Gamma],
                "A": [[self._s(x) for x in row] for row in A],
            },
        )
        return VectorMultiplier(tuple(b), order, step.id)


def matrix_to_vector_form(entries) -> list:
    """Components b_j = sum_{p,l} adj(a)_{pl} * d_p a_{lj}."""
    n = len(entries)
    nv = entries[0][0].nvars
    adj = poly_matrix_adjugate([list(r) for r in entries])
    b = []
    for j in range(n):
        acc = Poly.zero(nv)
        for p in range(n):
            for ell in range(n):
                acc = acc + adj[p][ell] * differentiate(entries[ell][j], p + 1)
        b.append(acc)
    return b


def general_gamma_form(Gamma, A, entries) -> list:
    n = len(entries)
    nv = entries[0][0].nvars
    b = []
    for j in range(n):
        acc = Poly.zero(nv)
        for p in range(n):
            for k in range(n):
                if Gamma[p][k].is_zero():
                    continue
                for ell in range(n):
                    acc = acc + Gamma[p][k] * A[k][ell] * differentiate(
                        entries[ell][j], p + 1
                    )
        b.append(acc)
    return b


def check_gamma_hypothesis(A, entries, alpha: Poly):
    """A * a must equal alpha * Identity exactly."""
    n = len(entries)
    nv = alpha.nvars
    for j in range(n):
        for k in range(n):
            acc = Poly.zero(nv)
            for ell in range(n):
                acc = acc + A[j][ell] * entries[ell][k]
            want = alpha if j == k else Poly.zero(nv)
            if acc != want:
                raise ValueError(
                    f"hypothesis A*a = alpha*I fails at entry ({j + 1},{k + 1})"
                )


# ---------------------------------------------------------------------------
# verification

@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    failed_step: int | None = None
    reason: str = ""
    final_order: Fraction | None = None
    assumptions: tuple = ()

    def __bool__(self):
        return self.ok


def _fail(step_id, reason):
    return VerifyResult(False, step_id, reason)


def certificate_verify(cert: DerivationCertificate, domain: SpecialDomain) -> VerifyResult:
    """Replay a certificate against a domain from its serialized payloads.

    Checks, per step: id topology, input kinds, exact payload recomputation,
    side conditions (root cofactor identities by multiplication), and exact
    order arithmetic.  Returns the first failure, or the final order plus
    the list of assumption steps on success.
    """
    vs = domain.variables
    n = domain.nvars

    if tuple(cert.domain.variables) != tuple(vs):
        return _fail(None, "certificate domain variables differ from the given domain")
    if len(cert.domain.generators) != len(domain.generators) or any(
        a != b for a, b in zip(cert.domain.generators, domain.generators)
    ):
        return _fail(None, "certificate domain generators differ from the given domain")
    if not cert.steps:
        return _fail(None, "certificate has no steps")

    def parse(s):
        return parse_poly(s, vs)

    polys: dict[int, list] = {}
    assumptions = []

    for pos, st in enumerate(cert.steps):
        if st.id != pos:
            return _fail(st.id, "step ids must be consecutive from 0")
        for i in st.inputs:
            if not 0 <= i < pos:
                return _fail(st.id, f"input {i} does not precede this step")
        try:
            payload = [parse(s) for s in st.payload]
        except ValueError as e:
            return _fail(st.id, f"payload parse error: {e}")
        polys[st.id] = payload
        ins = [cert.steps[i] for i in st.inputs]

        if st.rule == "premultiplier":
            j = st.aux.get("generator_index")
            if not isinstance(j, int) or not 0 <= j < len(domain.generators):
                return _fail(st.id, "premultiplier step lacks a valid generator index")
            if len(payload) != 1 or payload[0] != domain.generators[j]:
                return _fail(st.id, "payload is not the indexed defining function")
            if st.order != Fraction(1, 4):
                return _fail(st.id, "pre-multiplier differential order must be 1/4")

        elif st.rule == "premultiplier_combine":
            cs = st.aux.get("coeffs")
            if not isinstance(cs, list) or len(cs) != len(ins):
                return _fail(st.id, "coefficient list does not match inputs")
            if len(payload) != 1:
                return _fail(st.id, "combination payload must be a single polynomial")
            acc = Poly.zero(n)
            contributions = []
            for cstr, inp in zip(cs, ins):
                try:
                    c = parse(cstr)
                except ValueError as e:
                    return _fail(st.id, f"coefficient parse error: {e}")
                if not c.is_constant():
                    return _fail(st.id, "pre-multiplier combinations need constant coefficients")
                if inp.rule in PREMULT_RULES:
                    contributions.append(inp.order)
                elif inp.rule in SCALAR_RULES:
                    contributions.append(inp.order / 2)
                else:
                    return _fail(st.id, f"input step {inp.id} is not scalar-valued")
                acc = acc + polys[inp.id][0].scale(c.constant_value())
            if acc != payload[0]:
                return _fail(st.id, "combination payload does not match inputs")
            if st.order != min(contributions):
                return _fail(st.id, "combination order is not the minimum contribution")

        elif st.rule == "premultiplier_differential":
            if len(ins) != 1 or ins[0].rule not in PREMULT_RULES:
                return _fail(st.id, "needs exactly one pre-multiplier input")
            grad = gradient(polys[ins[0].id][0])
            if len(payload) != n or any(a != b for a, b in zip(payload, grad)):
                return _fail(st.id, "payload is not the gradient of the input")
            if st.order != ins[0].order:
                return _fail(st.id, "differential of a pre-multiplier keeps its order")

        elif st.rule == "differential":
            if len(ins) != 1 or ins[0].rule not in SCALAR_RULES:
                return _fail(st.id, "needs exactly one scalar-multiplier input")
            grad = gradient(polys[ins[0].id][0])
            if len(payload) != n or any(a != b for a, b in zip(payload, grad)):
                return _fail(st.id, "payload is not the gradient of the input")
            if st.order != ins[0].order / 2:
                return _fail(st.id, "differential order must be half the input order")

        elif st.rule == "det":
            if len(ins) != n:
                return _fail(st.id, f"det needs exactly {n} vector inputs")
            if any(i.rule not in VECTOR_RULES for i in ins):
                return _fail(st.id, "det inputs must be vector multipliers")
            rows = [polys[i.id] for i in ins]
            if any(len(r) != n for r in rows):
                return _fail(st.id, "vector input of wrong arity")
            d = poly_matrix_det(rows)
            if len(payload) != 1 or payload[0] != d:
                return _fail(st.id, "payload is not the determinant of the input rows")
            if st.order != min(i.order for i in ins):
                return _fail(st.id, "det order must be the minimum input order")

        elif st.rule == "root":
            m = st.aux.get("m")
            cofs = st.aux.get("cofactors")
            if not isinstance(m, int) or m < 1:
                return _fail(st.id, "root step lacks a valid exponent")
            if not isinstance(cofs, list) or len(cofs) != len(ins):
                return _fail(st.id, "cofactor list does not match inputs")
            if not ins or any(i.rule not in SCALAR_RULES for i in ins):
                return _fail(st.id, "root inputs must be scalar multipliers")
            if len(payload) != 1:
                return _fail(st.id, "root payload must be a single polynomial")
            try:
                cof_polys = [parse(c) for c in cofs]
            except ValueError as e:
                return _fail(st.id, f"cofactor parse error: {e}")
            acc = Poly.zero(n)
            for c, i in zip(cof_polys, ins):
                acc = acc + c * polys[i.id][0]
            if payload[0] ** m != acc:
                return _fail(st.id, "cofactor identity payload^m = sum(c_i * g_i) fails")
            if st.order != min(i.order for i in ins) / m:
                return _fail(st.id, "root order must be min(input orders)/m")

        elif st.rule == "combine":
            cs = st.aux.get("coeffs")
            if not isinstance(cs, list) or len(cs) != len(ins):
                return _fail(st.id, "coefficient list does not match inputs")
            if not ins or any(i.rule not in SCALAR_RULES for i in ins):
                return _fail(st.id, "combine inputs must be scalar multipliers")
            if len(payload) != 1:
                return _fail(st.id, "combine payload must be a single polynomial")
            try:
                cpolys = [parse(c) for c in cs]
            except ValueError as e:
                return _fail(st.id, f"coefficient parse error: {e}")
            acc = Poly.zero(n)
            for c, i in zip(cpolys, ins):
                acc = acc + c * polys[i.id][0]
            if acc != payload[0]:
                return _fail(st.id, "combination payload does not match inputs")
            if st.order != min(i.order for i in ins):
                return _fail(st.id, "combine order must be the minimum input order")

        elif st.rule == "assume_vector":
            if len(payload) != n:
                return _fail(st.id, "assumed vector has wrong arity")
            if st.order <= 0 or st.order > 1:
                return _fail(st.id, "order must be a rational in (0, 1]")
            assumptions.append(st.id)

        elif st.rule == "matrix_to_vector":
            if len(ins) != n or any(i.rule not in VECTOR_RULES for i in ins):
                return _fail(st.id, f"needs exactly {n} vector-multiplier rows")
            rows = [polys[i.id] for i in ins]
            if any(len(r) != n for r in rows):
                return _fail(st.id, "row of wrong arity")
            b = matrix_to_vector_form([tuple(r) for r in rows])
            if len(payload) != n or any(x != y for x, y in zip(payload, b)):
                return _fail(st.id, "payload does not match the adjugate contraction")
            if st.order != min(i.order for i in ins) / 2:
                return _fail(st.id, "order must be half the minimum row order")

        elif st.rule == "general_gamma":
            if len(ins) != n + 1:
                return _fail(st.id, f"needs {n} rows plus one scalar input")
            row_ins, alpha_in = ins[:-1], ins[-1]
            if any(i.rule not in VECTOR_RULES for i in row_ins):
                return _fail(st.id, "rows must be vector multipliers")
            if alpha_in.rule not in SCALAR_RULES:
                return _fail(st.id, "last input must be a scalar multiplier")
            try:
                Gamma = [[parse(x) for x in row] for row in st.aux.get("gamma", [])]
                A = [[parse(x) for x in row] for row in st.aux.get("A", [])]
            except ValueError as e:
                return _fail(st.id, f"matrix parse error: {e}")
            if len(Gamma) != n or len(A) != n:
                return _fail(st.id, "gamma and A must be n x n")
            entries = [tuple(polys[i.id]) for i in row_ins]
            alpha = polys[alpha_in.id][0]
            try:
                check_gamma_hypothesis(A, entries, alpha)
            except ValueError as e:
                return _fail(st.id, str(e))
            b = general_gamma_form(Gamma, A, entries)
            if len(payload) != n or any(x != y for x, y in zip(payload, b)):
                return _fail(st.id, "payload does not match the contraction formula")
            want = min(min(i.order for i in row_ins), alpha_in.order) / 2
            if st.order != want:
                return _fail(st.id, "order must be half of min(row orders, alpha order)")

        else:
            return _fail(st.id, f"unknown rule {st.rule!r}")

        if not (0 < st.order <= 1):
            return _fail(st.id, "orders must lie in (0, 1]")

    return VerifyResult(
        True,
        None,
        "",
        cert.steps[-1].order,
        tuple(assumptions),
    )
