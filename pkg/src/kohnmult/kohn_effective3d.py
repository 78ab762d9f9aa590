"""Effective multiplier chain for two-variable special domains.

Pipeline: a seeded genericity search picks linear combinations of the defining
functions (step one: the Jacobian h2* and its squarefree part), then a generic
h1 and coordinate change verified against the three finiteness conditions and
the Skoda cofactor identity (step two), then the Weierstrass image curve of
V(h2_hat) under (h1, w2) drives a derivative recursion whose every wedge
identity is checked exactly, ending in the constant multiplier 1 (step three).
Each stage appends certificate steps; the emitted certificate is self-verified.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .groebner import (
    contains_maximal_power,
    eliminate,
    groebner_basis,
    min_power_in_ideal,
    multivariate_gcd,
    origin_isolated,
    power_in_ideal,
    quotient_dimension,
    radical_membership,
    squarefree_part,
)
from .multiplier_core import (
    Derivation,
    DerivationCertificate,
    DomainError,
    GenericityError,
    ScalarMultiplier,
    SpecialDomain,
    VerificationError,
    certificate_verify,
)
from .polyring import (
    GaussRat,
    Poly,
    differentiate,
    exact_divide,
    gr,
    jacobian_det,
    poly_to_string,
    vanishing_order,
)

RETRY_BUDGET = 64


@dataclass(frozen=True)
class StepOneResult:
    Fhat1: Poly
    Fhat2: Poly
    h2_star: Poly
    h2_hat: Poly
    k1: int
    seed: int
    attempt: int
    coeffs: tuple
    h2_star_mult: ScalarMultiplier
    h2_hat_mult: ScalarMultiplier


@dataclass(frozen=True)
class StepTwoResult:
    h1: Poly
    coord_matrix: tuple  # 2x2 integer rows defining (w1, w2)
    w1: Poly
    w2: Poly
    D: Poly  # dh1/dw1 in the new coordinates
    alpha: Poly
    beta: Poly
    seed: int
    attempt: int
    quotient_dims: tuple
    h1_pm: object  # PreMultiplier certificate handle


@dataclass(frozen=True)
class WeierstrassData:
    image_poly: Poly  # reduced equation T(u, v) of the image curve
    prefix_r: int  # maximal power of u dividing T
    wpoly: Poly  # monic-in-v factor W with T = unit * u^r * W
    degree: int  # ell_tilde = deg_v W
    ell: int
    padding: int  # ell - ell_tilde
    distinguished: bool  # all lower v-coefficients of W vanish at u = 0
    chain: tuple  # h_{2,nu}(u,v): u^r*W then successive d/dv
    etas: tuple  # d/du of each chain element
    substituted: Poly  # (u^r W)(zeta1, zeta2)
    cofactor: Poly | None  # E with substituted = E * H when division is exact
    division_exact: bool
    flags: tuple


@dataclass(frozen=True)
class Effective3dResult:
    domain: SpecialDomain
    q: int
    seed: int
    short_circuit: bool
    k1: int
    final_order: Fraction
    floor_order: Fraction  # 1/(3 q^7 2^(q^2+3))
    floor_order_prefixed: Fraction  # 1/(3 q^7 2^(q^2+r+3))
    ell: int | None
    ell_tilde: int | None
    prefix_r: int | None
    certificate: DerivationCertificate
    step_one: StepOneResult
    step_two: StepTwoResult | None
    weierstrass: WeierstrassData | None


def _nonzero_int(rng: random.Random, bound: int) -> int:
    x = 0
    while x == 0:
        x = rng.randint(-bound, bound)
    return x


def _isolated_at_origin(polys) -> bool:
    """0 is an isolated common zero.

    The germ condition is certified through the stronger global statement that
    the common zero set is finite (finite quotient dimension); a
    positive-dimensional component anywhere makes the draw retry, even when
    that component avoids the origin.
    """
    return quotient_dimension(groebner_basis(list(polys))) != math.inf


def _multiplicity(domain: SpecialDomain) -> int:
    gens = list(domain.generators)
    if not origin_isolated(gens):
        raise DomainError("the defining functions must have the origin as an isolated zero")
    q = quotient_dimension(groebner_basis(gens))
    if q == math.inf:
        raise DomainError("the defining functions must generate a finite-codimension ideal")
    return q


def step_one(domain, seed=0, der=None, pms=None, q=None, budget=RETRY_BUDGET) -> StepOneResult:
    """Generic Jacobian of two combinations of the defining functions, with its
    squarefree part certified as a multiplier of order 1/(4*k1)."""
    if domain.nvars != 2:
        raise DomainError("the effective chain needs exactly two variables")
    if q is None:
        q = _multiplicity(domain)
    if der is None:
        der = Derivation(domain)
    if pms is None:
        pms = der.init_premultipliers()

    last = "no admissible draw"
    for attempt in range(budget):
        rng = random.Random(f"one:{seed}:{attempt}")
        bound = 2 + attempt
        rows = [
            [_nonzero_int(rng, bound) for _ in pms],
            [_nonzero_int(rng, bound) for _ in pms],
        ]
        fh = []
        for row in rows:
            acc = Poly.zero(2)
            for c, pm in zip(row, pms):
                acc = acc + pm.poly.scale(gr(c))
            fh.append(acc)
        h2s = jacobian_det(fh)
        if h2s.is_zero():
            last = "Jacobian vanished identically"
            continue
        if vanishing_order(h2s) > q:
            last = f"Jacobian vanishing order {vanishing_order(h2s)} exceeds q={q}"
            continue
        h2h = Poly.one(2) if h2s.is_constant() else squarefree_part(h2s)
        k1 = min_power_in_ideal(h2h, groebner_basis([h2s]), q)
        if k1 is None:
            # a factor repeats beyond q times away from the origin
            last = "squarefree part has no power witness within q"
            continue

        pm1 = der.premultiplier_combine([gr(c) for c in rows[0]], pms)
        pm2 = der.premultiplier_combine([gr(c) for c in rows[1]], pms)
        d1 = der.rule_premultiplier_differential(pm1)
        d2 = der.rule_premultiplier_differential(pm2)
        star = der.rule_det([d1, d2])
        hat = der.rule_root(h2h, k1, [star])
        return StepOneResult(
            Fhat1=fh[0],
            Fhat2=fh[1],
            h2_star=h2s,
            h2_hat=h2h,
            k1=k1,
            seed=seed,
            attempt=attempt,
            coeffs=(tuple(rows[0]), tuple(rows[1])),
            h2_star_mult=star,
            h2_hat_mult=hat,
        )
    raise GenericityError(f"step one: retry budget {budget} exhausted ({last})")


def skoda_verify(f: Poly):
    """Membership of f^(n+1) in the ideal of the partial derivatives of f,
    with replayable cofactors.  A False return on in-scope data is a hard
    diagnostic, since the underlying statement is a theorem."""
    if f.constant_value():
        raise ValueError("skoda_verify expects f(0) = 0")
    parts = [differentiate(f, k) for k in range(1, f.nvars + 1)]
    if all(p.is_zero() for p in parts):
        return (True, [Poly.zero(f.nvars)] * f.nvars) if f.is_zero() else (False, None)
    gb = groebner_basis(parts, provenance=True)
    cofs, rem = gb.cofactors(f ** (f.nvars + 1))
    if rem.is_zero():
        return True, cofs
    return False, None


def step_two(domain, h2_hat, seed=0, der=None, pms=None, q=None, budget=RETRY_BUDGET) -> StepTwoResult:
    """Generic h1 and coordinates (w1, w2) with the three finiteness conditions
    verified exactly, plus the Skoda cofactor identity
    h1^(3q^2) = alpha*h2_hat + beta*(dh1/dw1)."""
    if domain.nvars != 2:
        raise DomainError("the effective chain needs exactly two variables")
    if q is None:
        q = _multiplicity(domain)
    if der is None:
        der = Derivation(domain)
    if pms is None:
        pms = der.init_premultipliers()
    three_q2 = 3 * q * q

    last = "no admissible draw"
    for attempt in range(budget):
        rng = random.Random(f"two:{seed}:{attempt}")
        bound = 2 + attempt
        avec = [_nonzero_int(rng, bound) for _ in pms]
        h1 = Poly.zero(2)
        for c, pm in zip(avec, pms):
            h1 = h1 + pm.poly.scale(gr(c))
        if h1.is_zero():
            last = "h1 vanished identically"
            continue
        g11, g12 = _nonzero_int(rng, bound), _nonzero_int(rng, bound)
        g21, g22 = _nonzero_int(rng, bound), _nonzero_int(rng, bound)
        det_g = g11 * g22 - g12 * g21
        if det_g == 0:
            last = "coordinate matrix degenerate"
            continue
        z1 = Poly.variable(2, 1)
        z2 = Poly.variable(2, 2)
        w1 = z1.scale(gr(g11)) + z2.scale(gr(g12))
        w2 = z1.scale(gr(g21)) + z2.scale(gr(g22))
        # dh1/dw1 via z = G^{-1} w: the w1-derivative pulls back along column 1 of G^{-1}
        inv_det = GaussRat(Fraction(1, det_g))
        d = differentiate(h1, 1).scale(gr(g22) * inv_det) + differentiate(h1, 2).scale(
            gr(-g21) * inv_det
        )
        if d.is_zero():
            last = "dh1/dw1 vanished identically"
            continue

        if not _isolated_at_origin([w1, h1]):
            last = "condition (i): V(w1, h1) not isolated at the origin"
            continue
        if not _isolated_at_origin([h1, w2]):
            # precondition of the Weierstrass image step, folded into genericity
            last = "V(h1, w2) not isolated at the origin"
            continue
        gb2 = groebner_basis([h1, h2_hat])
        qd2 = quotient_dimension(gb2)
        if qd2 == math.inf or qd2 > q * q:
            last = f"condition (ii): dim(h1, h2_hat) = {qd2} not within q^2 = {q * q}"
            continue
        if not contains_maximal_power(gb2, q * q):
            # the root steps for w1, w2 consume this membership; condition
            # (ii) alone only gives its local analytic analogue
            last = "(h1, h2_hat) misses the q^2 power of the maximal ideal"
            continue
        gb3 = groebner_basis([h2_hat, d], provenance=True)
        qd3 = quotient_dimension(gb3)
        if qd3 == math.inf or qd3 > three_q2:
            last = f"condition (iii): dim(h2_hat, dh1/dw1) = {qd3} not within 3q^2 = {three_q2}"
            continue
        cofs, rem = gb3.cofactors(h1 ** three_q2)
        if not rem.is_zero():
            last = "Skoda membership h1^(3q^2) in (h2_hat, dh1/dw1) failed"
            continue
        alpha, beta = cofs
        assert alpha * h2_hat + beta * d == h1 ** three_q2

        h1_pm = der.premultiplier_combine([gr(c) for c in avec], pms)
        return StepTwoResult(
            h1=h1,
            coord_matrix=((g11, g12), (g21, g22)),
            w1=w1,
            w2=w2,
            D=d,
            alpha=alpha,
            beta=beta,
            seed=seed,
            attempt=attempt,
            quotient_dims=(qd2, qd3),
            h1_pm=h1_pm,
        )
    raise GenericityError(f"step two: retry budget {budget} exhausted ({last})")


def _lift4(p: Poly) -> Poly:
    return Poly._raw(4, {m + (0, 0): c for m, c in p.terms.items()})


def weierstrass_from_image(H: Poly, zeta1: Poly, zeta2: Poly, ell: int) -> WeierstrassData:
    """Equation of the image of V(H) under (zeta1, zeta2), normalized to a
    monic-in-v Weierstrass factor with a u-power prefix, plus the v-derivative
    chain and the exact division certificate of the substituted equation by H."""
    if ell < 1:
        raise ValueError("ell must be positive")
    if H.nvars != 2 or zeta1.nvars != 2 or zeta2.nvars != 2:
        raise ValueError("expected two-variable data")
    if not _isolated_at_origin([zeta1, zeta2]):
        raise ValueError("V(zeta1, zeta2) must be isolated at the origin")
    if not _isolated_at_origin([H, zeta1]):
        raise ValueError("V(H, zeta1) must be isolated at the origin")
    if not power_in_ideal(zeta2, ell, groebner_basis([H, zeta1])):
        raise ValueError("zeta2^ell does not lie in (H, zeta1)")

    u = Poly.variable(4, 3)
    v = Poly.variable(4, 4)
    gens4 = [_lift4(H), u - _lift4(zeta1), v - _lift4(zeta2)]
    img = eliminate(gens4, [1, 2])
    img = [p for p in img if not p.is_zero()]
    if not img:
        raise ValueError("the image ideal is zero; no curve equation exists")
    flags = []
    T = img[0].monic()
    if len(img) > 1:
        for extra in img[1:]:
            T = multivariate_gcd(T, extra)
        T = T.monic()
        flags.append("image_not_principal")
        if T.is_constant():
            raise ValueError("the image ideal has no common curve equation")

    r = min(m[0] for m in T.terms)
    W = Poly._raw(2, {(m[0] - r, m[1]): c for m, c in T.terms.items()})
    ell_tilde = W.degree_in(2)
    if ell_tilde == 0:
        raise ValueError("the image curve is a pure u-power; preconditions exclude this")
    coeffs_v = W.coefficients_in(2)
    lead = coeffs_v[ell_tilde]
    if not lead.is_constant():
        raise ValueError("the v-leading coefficient is not a unit; not in Weierstrass position")
    W = W.scale(lead.constant_value().inverse())
    if ell_tilde > ell:
        raise ValueError(f"image degree {ell_tilde} exceeds the pledged bound {ell}")
    coeffs_v = W.coefficients_in(2)
    distinguished = all(not coeffs_v[j].constant_value() for j in range(ell_tilde))
    if not distinguished:
        flags.append("non_distinguished")

    h2uv = Poly._raw(2, {(m[0] + r, m[1]): c for m, c in W.terms.items()})
    chain = [h2uv]
    for _ in range(ell_tilde):
        chain.append(differentiate(chain[-1], 2))
    etas = tuple(differentiate(c, 1) for c in chain)
    fact = 1
    for j in range(2, ell_tilde + 1):
        fact *= j
    assert chain[-1] == Poly.monomial(2, (r, 0), gr(fact)), "chain terminus is not ell!*u^r"

    S = h2uv.compose([zeta1, zeta2])
    E = exact_divide(S, H)
    division_exact = E is not None
    if not division_exact:
        flags.append("division_by_radical_only")
        if not radical_membership(S, [H]):
            raise ValueError("substituted image equation is not even radically in (H)")

    return WeierstrassData(
        image_poly=T,
        prefix_r=r,
        wpoly=W,
        degree=ell_tilde,
        ell=ell,
        padding=ell - ell_tilde,
        distinguished=distinguished,
        chain=tuple(chain),
        etas=etas,
        substituted=S,
        cofactor=E,
        division_exact=division_exact,
        flags=tuple(flags),
    )


def step_three(domain, s1: StepOneResult, s2: StepTwoResult, der: Derivation, q=None):
    """Derivative recursion ending in the constant multiplier 1.

    Returns (certificate, weierstrass_data, final_multiplier).  Every wedge
    identity and every combination payload is checked exactly; any failure
    aborts with the offending recursion index.
    """
    if q is None:
        q = _multiplicity(domain)
    three_q2 = 3 * q * q
    h2m = s1.h2_hat_mult
    h1 = s2.h1
    (g11, g12), (g21, g22) = s2.coord_matrix
    det_g = g11 * g22 - g12 * g21

    w = weierstrass_from_image(s1.h2_hat, h1, s2.w2, q * q)
    if not w.division_exact:
        raise VerificationError(
            "division certificate degraded to radical membership on squarefree data"
        )

    def sub(p):
        return p.compose([h1, s2.w2])

    # X_0 = (u^r W)(h1, w2) = cofactor * h2_hat
    x = der.rule_combine([w.cofactor], [h2m])
    if x.poly != w.substituted:
        raise VerificationError("substituted image payload mismatch at nu=0")

    dh1 = der.rule_premultiplier_differential(s2.h1_pm)
    h1_s = h1 ** three_q2
    h1_pow = Poly.one(2)  # h1^(3q^2*nu)
    inv_detg = GaussRat(Fraction(1, det_g))
    det_g_gr = gr(det_g)

    for nu in range(w.degree):
        dx = der.rule_differential(x)
        t = der.rule_det([dh1, dx])
        succ = sub(w.chain[nu + 1])
        rhs = (s2.D * succ * h1_pow).scale(det_g_gr)
        if t.poly != rhs:
            raise VerificationError(f"wedge identity failed at nu={nu}")
        y = h1_pow * succ
        x = der.rule_combine([s2.alpha * y, s2.beta.scale(inv_detg)], [h2m, t])
        h1_pow = h1_pow * h1_s
        if x.poly != h1_pow * succ:
            raise VerificationError(f"recursion payload mismatch at nu={nu}")

    fact = 1
    for j in range(2, w.degree + 1):
        fact *= j
    p_final = der.rule_combine([Poly.const(2, GaussRat(Fraction(1, fact)))], [x])
    m_h1 = three_q2 * w.degree + w.prefix_r
    if p_final.poly != h1 ** m_h1:
        raise VerificationError("chain terminus is not the expected power of h1")
    h1m = der.rule_root(h1, m_h1, [p_final])

    if not contains_maximal_power(groebner_basis([h1, s1.h2_hat]), q * q):
        raise VerificationError("(h1, h2_hat) does not contain the q^2 power of the maximal ideal")
    w1m = der.rule_root(s2.w1, q * q, [h1m, h2m])
    w2m = der.rule_root(s2.w2, q * q, [h1m, h2m])
    dw1 = der.rule_differential(w1m)
    dw2 = der.rule_differential(w2m)
    fin = der.rule_det([dw1, dw2])
    one = der.rule_combine([Poly.const(2, inv_detg)], [fin])
    if not one.poly.is_unit() or one.poly.constant_value() != GaussRat(1):
        raise VerificationError("final payload is not the constant 1")
    return der.cert, w, one


def run_effective3d(domain: SpecialDomain, seed: int = 0) -> Effective3dResult:
    """Full pipeline with a final self-verification of the emitted certificate."""
    q = _multiplicity(domain)
    der = Derivation(domain)
    pms = der.init_premultipliers()
    s1 = step_one(domain, seed=seed, der=der, pms=pms, q=q)

    if s1.h2_hat.is_constant():
        # the root step already emitted the constant multiplier 1 at order 1/4
        vr = certificate_verify(der.cert, domain)
        if not vr.ok:
            raise VerificationError(
                f"self-verification failed at step {vr.failed_step}: {vr.reason}"
            )
        final = s1.h2_hat_mult.order
        return Effective3dResult(
            domain=domain,
            q=q,
            seed=seed,
            short_circuit=True,
            k1=s1.k1,
            final_order=final,
            floor_order=Fraction(1, 3 * q**7 * 2 ** (q * q + 3)),
            floor_order_prefixed=Fraction(1, 3 * q**7 * 2 ** (q * q + 3)),
            ell=None,
            ell_tilde=None,
            prefix_r=None,
            certificate=der.cert,
            step_one=s1,
            step_two=None,
            weierstrass=None,
        )

    s2 = step_two(domain, s1.h2_hat, seed=seed, der=der, pms=pms, q=q)
    cert, wdata, one = step_three(domain, s1, s2, der, q=q)

    floor_plain = Fraction(1, 3 * q**7 * 2 ** (q * q + 3))
    floor_prefixed = Fraction(1, 3 * q**7 * 2 ** (q * q + wdata.prefix_r + 3))
    if one.order < floor_prefixed:
        raise VerificationError(
            f"final order {one.order} fell below the floor {floor_prefixed}"
        )
    vr = certificate_verify(cert, domain)
    if not vr.ok:
        raise VerificationError(f"self-verification failed at step {vr.failed_step}: {vr.reason}")
    return Effective3dResult(
        domain=domain,
        q=q,
        seed=seed,
        short_circuit=False,
        k1=s1.k1,
        final_order=one.order,
        floor_order=floor_plain,
        floor_order_prefixed=floor_prefixed,
        ell=wdata.ell,
        ell_tilde=wdata.degree,
        prefix_r=wdata.prefix_r,
        certificate=cert,
        step_one=s1,
        step_two=s2,
        weierstrass=wdata,
    )
