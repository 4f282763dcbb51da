"""Matrix pairs (P, G) carrying a phi-action and a Gamma-action.

A pair lives either over O_E/pi^n (integral, entries in the exact quotient
O[X]/(phi(X)^k)) or over the residue field (entries truncated at X^{pk},
which IS the residue quotient since phi(X)^k = X^{pk} mod pi).

The four membership conditions checked here:

  (1) P*phi(G) = G*gamma(P)            -- commutation,
  (2) G = Id mod X                     -- unipotent constant term,
  (3) det(P) = Q^{k-1}, Tr(P) = a_p mod X,
  (4) (G1 - 1)(G1 - chi(gamma_1)^{k-1}) = 0 mod Q,
      where G1 = G*gamma(G)*...*gamma^{p-2}(G) and gamma_1 = gamma^{p-1}.

The extension algorithm upgrades a G known mod X^k (with exact commutation in
the quotient ring) to one whose commutation defect vanishes mod X^{N}.  It
works with the integral cofactor W = Q^{k-1}*gamma(P)^{-1}: the normalized
defect  A = G*Q^{k-1} - P*phi(G)*W  is maintained incrementally, and each
order is killed by a 4x4 linear solve -- no divisions, hence no precision
erosion beyond what the inputs carry.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    IndeterminateAtPrecision,
    InsufficientPrecision,
    MismatchedParams,
    PreconditionDefect,
)
from .linalg import Mat2, solve_padic, solve_zmod
from .padic import PadicElem, int_valuation
from .series import (
    ResidueField,
    ResidueSeries,
    SeriesRing,
    TruncSeries,
    _divrem_monic_ints,
    _int_binomial_row,
    frobenius,
    gamma_act,
    res_frobenius,
    res_gamma,
    res_one,
    res_substitute,
    res_unit_inverse,
    res_zero,
    substitute,
    unit_inverse,
)


@dataclass(frozen=True)
class PhiGammaPair:
    """P is the matrix of phi, G the matrix of the Gamma-generator."""

    P: Mat2
    G: Mat2
    k: int
    base: str = "integral"  # "integral" | "residue"
    meta: str = "seed"

    @property
    def ring(self):
        return self.P.a.ring if self.base == "integral" else None

    @property
    def rfield(self):
        return self.P.a.field if self.base == "residue" else None


@dataclass
class MembershipReport:
    commutation: bool
    unit_constant: bool
    char_poly: bool
    gamma_product: bool
    defects: dict = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        return (self.commutation and self.unit_constant
                and self.char_poly and self.gamma_product)


# ---------------------------------------------------------------------------
# matrix-level operator actions


def mat_phi(M: Mat2) -> Mat2:
    return M.map(frobenius)


def mat_gamma(M: Mat2, j: int = 1) -> Mat2:
    return M.map(lambda f: gamma_act(f, j))


def mat_res_phi(M: Mat2) -> Mat2:
    return M.map(res_frobenius)


def mat_res_gamma(M: Mat2, chi: int, j: int = 1) -> Mat2:
    return M.map(lambda f: res_gamma(f, chi, j))


def mat_identity_in(ring: SeriesRing) -> Mat2:
    return Mat2(ring.one(), ring.zero(), ring.zero(), ring.one())


def mat_res_identity(rf: ResidueField, n: int) -> Mat2:
    return Mat2(res_one(rf, n), res_zero(rf, n), res_zero(rf, n), res_one(rf, n))


def mat_congruent(M: Mat2, N: Mat2, x_prec=None, pi_prec=None) -> bool:
    return all(a.congruent(b, x_prec=x_prec, pi_prec=pi_prec)
               for a, b in zip(M.entries(), N.entries()))


def mat_is_zero(M: Mat2) -> bool:
    return all(e.is_zero() for e in M.entries())


def mat_inverse_unit(M: Mat2) -> Mat2:
    """Inverse of a matrix whose determinant is a unit series."""
    dinv = unit_inverse(M.det())
    return M.adjugate().map(lambda f: f * dinv)


def mat_res_inverse_unit(M: Mat2) -> Mat2:
    dinv = res_unit_inverse(M.det())
    return M.adjugate().map(lambda f: f * dinv)


# ---------------------------------------------------------------------------
# membership


def commutation_defect(pair: PhiGammaPair) -> Mat2:
    if pair.base == "residue":
        chi = _residue_chi(pair)
        return pair.P * mat_res_phi(pair.G) - pair.G * mat_res_gamma(pair.P, chi)
    return pair.P * mat_phi(pair.G) - pair.G * mat_gamma(pair.P)


def _residue_chi(pair: PhiGammaPair) -> int:
    # the Gamma-generator acts through chi mod p^2; its image matters mod p
    from .padic import smallest_primitive_root_mod_p2

    return smallest_primitive_root_mod_p2(pair.rfield.p)


def gamma_one_matrix(G: Mat2) -> Mat2:
    """G1 = G * gamma(G) * ... * gamma^{p-2}(G)."""
    p = G.a.ring.params.p
    out = G
    for j in range(1, p - 1):
        out = out * mat_gamma(G, j)
    return out


def reduce_mod_q(f: TruncSeries) -> TruncSeries:
    """Remainder of the canonical representative mod the monic polynomial Q."""
    ring = f.ring
    row = _int_binomial_row(ring.params.p, ring.params.p + 1)
    q_ints = row[1:]  # Q = (phi(X)/X), monic of degree p-1
    _, rem = _divrem_monic_ints(list(f.coeffs), q_ints)
    return TruncSeries(ring, rem)


def check_membership(pair: PhiGammaPair, ap: PadicElem) -> MembershipReport:
    ring = pair.ring
    if ring is None or ring.modulus_k != pair.k:
        raise MismatchedParams("membership wants an integral pair mod phi^k")
    par = ring.params
    k = pair.k

    # valuation-aware products may carry digits beyond the advertised
    # certification level; membership is decided exactly mod pi^(pi_prec)
    cap = lambda f: f.reduce_pi(ring.pi_prec)

    defect = commutation_defect(pair).map(cap)
    c1 = mat_is_zero(defect)

    ident = mat_identity_in(ring)
    c2 = all((pair.G.entries()[i].constant()
              - ident.entries()[i].constant()).reduce(ring.pi_prec).is_zero()
             for i in range(4))

    q_pow = _pow_in_ring(ring.q_poly(), k - 1)
    c3_det = cap(pair.P.det() - q_pow).is_zero()
    c3_tr = (pair.P.trace().constant() - ap).reduce(
        min(ring.pi_prec, ap.prec)).is_zero()
    c3 = c3_det and c3_tr

    # The second eigenvalue of G1 mod Q.  Its sign of exponent is forced:
    # conditions (1)-(3) pin det(G) = (gamma(X)/(chi*X))^{k-1}, whose
    # gamma^i-product is chi(gamma_1)^{-(k-1)} mod Q, and the eigenvalue pair
    # {1, c} must multiply to that determinant.
    g1 = gamma_one_matrix(pair.G)
    chi1_pow = pow(par.chi_gamma, -(par.p - 1) * (k - 1),
                   par.p ** (ring.pi_prec + 2))
    scal = ring.constant(par.from_int(chi1_pow, ring.pi_prec))
    pi_mat = (g1 - ident) * (g1 - Mat2(scal, ring.zero(), ring.zero(), scal))
    pi_mod_q = pi_mat.map(reduce_mod_q).map(cap)
    c4 = mat_is_zero(pi_mod_q)

    return MembershipReport(
        commutation=c1, unit_constant=c2, char_poly=c3, gamma_product=c4,
        defects={"commutation": defect, "gamma_product": pi_mod_q,
                 "det_minus_q_power": pair.P.det() - q_pow})


def check_membership_residue(pair: PhiGammaPair, ap_res: int) -> MembershipReport:
    rf = pair.rfield
    k = pair.k
    chi = _residue_chi(pair)
    n = pair.P.a.n

    defect = commutation_defect(pair)
    c1 = mat_is_zero(defect)

    c2 = (pair.G.a.constant() == 1 and pair.G.d.constant() == 1
          and pair.G.b.constant() == 0 and pair.G.c.constant() == 0)

    det = pair.P.det()
    target = (0,) * ((rf.p - 1) * (k - 1)) + (1,)
    c3 = (det.coeffs[:len(target)] == target
          and all(c == 0 for c in det.coeffs[len(target):])
          and pair.P.trace().constant() == ap_res % rf.card)

    g1 = pair.G
    for j in range(1, rf.p - 1):
        g1 = g1 * mat_res_gamma(pair.G, chi, j)
    ident = mat_res_identity(rf, n)
    chi1_pow = pow(chi % rf.p, -(rf.p - 1) * (k - 1), rf.p)
    scal_mat = ident.map(lambda f: f.scale(chi1_pow))
    pi_mat = (g1 - ident) * (g1 - scal_mat)
    c4 = all(all(c == 0 for c in e.coeffs[:rf.p - 1]) for e in pi_mat.entries())

    return MembershipReport(commutation=c1, unit_constant=c2, char_poly=c3,
                            gamma_product=c4,
                            defects={"commutation": defect})


def _pow_in_ring(f: TruncSeries, m: int) -> TruncSeries:
    out = f.ring.one()
    for _ in range(m):
        out = out * f
    return out


# ---------------------------------------------------------------------------
# cofactors: W = Q^{k-1} * gamma(P)^{-1}, integral whenever det(P) = Q^{k-1}


def cyclotomic_unit(ring: SeriesRing) -> TruncSeries:
    """u = gamma(X)/X, the unit with constant term chi(gamma)."""
    return gamma_act(ring.x()).shift_down(1)


def gamma_cofactor(P: Mat2, k: int) -> Mat2:
    """Q^{k-1}*gamma(P)^{-1} for P with det(P) = Q^{k-1} exactly.

    Uses gamma(Q)/Q = phi(u)/u with u = gamma(X)/X, so only unit series are
    ever inverted.
    """
    ring = P.a.ring
    u = cyclotomic_unit(ring)
    ratio = u * unit_inverse(frobenius(u))  # = Q/gamma(Q)
    scal = _pow_in_ring(ratio, k - 1)
    return mat_gamma(P).adjugate().map(lambda f: f * scal)


def gamma_cofactor_residue(P: Mat2, k: int, chi: int) -> Mat2:
    """Residue analog; allows det = X^{(p-1)(k-1)} * unit."""
    rf = P.a.field
    n = P.a.n
    x = ResidueSeries(rf, [0, 1], n)
    u = res_gamma(x, chi).shift_down(1)
    ratio = u * res_unit_inverse(res_frobenius(u))
    scal = res_one(rf, n)
    for _ in range(k - 1):
        scal = scal * ratio
    det_unit = P.det().shift_down((rf.p - 1) * (k - 1))
    gdet_inv = res_unit_inverse(res_gamma(det_unit, chi))
    return mat_res_gamma(P, chi).adjugate().map(lambda f: f * scal * gdet_inv)


def phi_cofactor_residue(P: Mat2, k: int) -> Mat2:
    """Residue analog of Q^{k-1}*P^{-1}."""
    rf = P.a.field
    det_unit = P.det().shift_down((rf.p - 1) * (k - 1))
    dinv = res_unit_inverse(det_unit)
    return P.adjugate().map(lambda f: f * dinv)


# ---------------------------------------------------------------------------
# order-by-order extension of G (and base change for P)


def _order_solve(A0: Mat2, B0: Mat2, C: Mat2, j: int, params, prec_cap=None):
    """Solve S*A0 - p^j*B0*S = C for a constant 2x2 matrix S."""
    p = params.p
    basis = [Mat2(1, 0, 0, 0), Mat2(0, 1, 0, 0), Mat2(0, 0, 1, 0), Mat2(0, 0, 0, 1)]
    prec = min(entry.prec for entry in C.entries())
    if prec_cap is not None and prec_cap < prec:
        prec = prec_cap
    if params.e == 1 and params.f == 1:
        A0i = A0.map(lambda x: x.vec[0])
        B0i = B0.map(lambda x: x.vec[0])
        cols = []
        for E in basis:
            L = (E * A0i) - (B0i * E).scale(p ** j)
            cols.append(list(L.entries()))
        rows = [[cols[c][r] for c in range(4)] for r in range(4)]
        rhs = [entry.vec[0] for entry in C.entries()]
        # prefer a correction with the same p-valuation as the defect, so a
        # defect divisible by p leaves the residue-level matrices untouched
        w = min((int_valuation(v, p) for v in rhs if v), default=0)
        if 0 < w < prec:
            sol, _ = solve_zmod(rows, [v // p ** w for v in rhs], p, prec - w)
            if sol is not None:
                return Mat2(*(params.from_int(v * p ** w, prec) for v in sol))
        sol, _ = solve_zmod(rows, rhs, p, prec)
        if sol is None:
            raise PreconditionDefect(f"no order-{j} correction exists")
        return Mat2(*(params.from_int(v, prec) for v in sol))
    head = prec + params.e * (j + 2)
    pj = params.from_int(p ** j, head)
    cols = []
    for E in basis:
        Ee = E.map(lambda v: params.from_int(v, head))
        L = (Ee * A0) - (B0 * Ee).scale(pj)
        cols.append(list(L.entries()))
    rows = [[cols[c][r] for c in range(4)] for r in range(4)]
    rhs = list(C.entries())
    sol = solve_padic(rows, rhs, params)
    if sol is None:
        raise PreconditionDefect(f"no order-{j} correction exists")
    return Mat2(*sol)


def extend_gamma_matrix(P: Mat2, G0: Mat2, k: int, n_x: int,
                        pi_certify: int | None = None) -> Mat2:
    """Extend G from "exact mod phi^k" to commutation defect 0 mod X^{n_x}.

    ``P`` and ``G0`` live in a power-of-X carrier ring with x-precision at
    least n_x.  The true defect P*phi(G) - G*gamma(P) is maintained exactly
    and each X-order is killed (the correction at order j solves
    S*P(0) - p^j*P(0)*S = coeff_j of the defect).  With ``pi_certify`` the
    orders are killed mod pi^pi_certify -- the level the input commutes
    mod phi^k at after a twist -- rather than at full tracked precision.
    Raises PreconditionDefect if the input does not commute mod phi^k or
    some order has no correction, InsufficientPrecision if the final
    certificate cannot be checked.
    """
    ring = P.a.ring
    par = ring.params
    if ring.n < n_x:
        raise InsufficientPrecision(f"carrier needs x_prec >= {n_x}")
    gamma_P = mat_gamma(P)
    R = P * mat_phi(G0) - G0 * gamma_P
    for e in R.entries():
        for c in e.coeffs[:k]:
            ok = (c.is_zero() if pi_certify is None
                  else c.congruent(par.zero(min(pi_certify, c.prec)),
                                   min(pi_certify, c.prec)))
            if not ok:
                raise PreconditionDefect("commutation does not hold mod phi^k")
    P0 = P.map(lambda f: f.constant())
    G = G0
    q = ring.q_poly()
    q_j = _pow_in_ring(q, k)  # Q^j, maintained incrementally from j = k
    for j in range(k, n_x):
        C = R.map(lambda f: f.coeff(j))
        if not all(c.is_zero() for c in C.entries()):
            S = _order_solve(P0, P0, C, j, par, prec_cap=pi_certify)
            s_mat = S.map(lambda c: ring.constant(c))
            G = G + s_mat.map(lambda f: f.shift_up(j))
            R = (R + (P * s_mat).map(lambda f: (f * q_j).shift_up(j))
                 - (s_mat * gamma_P).map(lambda f: f.shift_up(j)))
        q_j = q_j * q
    defect = P * mat_phi(G) - G * gamma_P
    lvl = pi_certify
    for e in defect.entries():
        for c in e.coeffs[:n_x]:
            if lvl is not None and c.prec < lvl:
                raise InsufficientPrecision(
                    f"cannot certify defect at pi^{lvl} (have pi^{c.prec})")
            if not (c.is_zero() if lvl is None else c.congruent(
                    par.zero(lvl), lvl)):
                raise InsufficientPrecision(
                    f"extension defect persists at X-order < {n_x}")
    return G


def extend_gamma_matrix_residue(P: Mat2, G0: Mat2, k: int, n_x: int,
                                chi: int) -> Mat2:
    """Residue-field version: exact arithmetic, no precision bookkeeping.

    The carrier needs n_x + 2*(p-1)*(k-1) coefficients: the cofactor W loses
    (p-1)*(k-1) of them to the determinant division, and the correction sweep
    reads the residual another (p-1)*(k-1) above the target.
    """
    rf = P.a.field
    p = rf.p
    n = P.a.n
    need = n_x + 2 * (p - 1) * (k - 1)
    if n < need:
        raise InsufficientPrecision(f"carrier needs x_prec >= {need}")
    off = (p - 1) * (k - 1)
    W = gamma_cofactor_residue(P, k, chi)
    A = (G0.map(lambda f: f.shift_up(off))
         - P * mat_res_phi(G0) * W)
    for e in A.entries():
        if any(e.coeffs[:k + off]):
            raise PreconditionDefect("commutation does not hold mod phi^k")
    G = G0
    for j in range(k, n_x):
        C = A.map(lambda f: f.coeff(j + off))
        if any(C.entries()):
            S = C.map(rf.neg)  # the p-power term vanishes mod pi
            s_mat = S.map(lambda c: ResidueSeries(rf, [c], n))
            G = G + s_mat.map(lambda f: f.shift_up(j))
            A = (A + s_mat.map(lambda f: f.shift_up(j + off))
                 - (P * s_mat * W).map(lambda f: f.shift_up(j + (p - 1) * j)))
    defect = P * mat_res_phi(G) - G * mat_res_gamma(P, chi)
    for e in defect.entries():
        if any(e.coeffs[:n_x]):
            raise PreconditionDefect("residue extension defect persists")
    return G


def equivalence_base_change(P: Mat2, P_new: Mat2, k: int, n_x: int,
                            pi_certify: int | None = None) -> Mat2:
    """Find M = Id mod X^k with M^{-1}*P_new*phi(M) = P mod X^{n_x}.

    Requires P_new = P mod phi^k.  The true residual P_new*phi(M) - M*P is
    maintained exactly and killed one X-order at a time, so on success it
    vanishes identically through X^{n_x} at working pi-precision; pass
    ``pi_certify`` to relax the final check to a reduced level.
    """
    ring = P.a.ring
    par = ring.params
    if ring.n < n_x:
        raise InsufficientPrecision(f"carrier needs x_prec >= {n_x}")
    M = mat_identity_in(ring)
    R = P_new - P
    for e in R.entries():
        for c in e.coeffs[:k]:
            if not c.is_zero():
                raise PreconditionDefect("P_new does not match P mod phi^k")
    P0 = P.map(lambda f: f.constant())
    B0 = P_new.map(lambda f: f.constant())
    q = ring.q_poly()
    q_j = _pow_in_ring(q, k)
    for j in range(k, n_x):
        C = R.map(lambda f: f.coeff(j))
        if not all(c.is_zero() for c in C.entries()):
            S = _order_solve(P0, B0, C, j, par)
            s_mat = S.map(lambda c: ring.constant(c))
            M = M + s_mat.map(lambda f: f.shift_up(j))
            R = (R + (P_new * s_mat).map(lambda f: (f * q_j).shift_up(j))
                 - (s_mat * P).map(lambda f: f.shift_up(j)))
        q_j = q_j * q
    residual = P_new * mat_phi(M) - M * P
    lvl = pi_certify
    for e in residual.entries():
        for c in e.coeffs[:n_x]:
            if lvl is not None and c.prec < lvl:
                raise InsufficientPrecision(
                    f"cannot certify residual at pi^{lvl} (have pi^{c.prec})")
            if not (c.is_zero() if lvl is None else c.congruent(
                    par.zero(lvl), lvl)):
                raise InsufficientPrecision("base change residual persists")
    return M


def rep_equal(pair: PhiGammaPair, other: PhiGammaPair, n_x: int) -> bool:
    """True iff the two integral pairs present the same representation,
    certified by base change + the induced endomorphism being Id mod X^{n_x}."""
    if pair.k != other.k or pair.base != "integral" or other.base != "integral":
        return False
    par = pair.ring.params
    lvl = pair.ring.pi_prec - par.e * (pair.k - 1)
    if lvl < 1:
        raise InsufficientPrecision(
            f"rep_equal at weight {pair.k} needs pi-precision > "
            f"{par.e * (pair.k - 1)}")
    carrier = SeriesRing(par, pair.ring.pi_prec,
                         x_prec=max(n_x, par.p * pair.k))
    lift = lambda M: M.map(lambda f: carrier.elem(list(f.coeffs)))
    P, G = lift(pair.P), lift(pair.G)
    P2, G2 = lift(other.P), lift(other.G)
    try:
        M = equivalence_base_change(P, P2, pair.k, n_x, pi_certify=lvl)
    except PreconditionDefect:
        return False
    # after base change, both gamma-matrices drive the same P; compare
    g_new = mat_inverse_unit(M) * G2 * mat_gamma(M)
    H = g_new * mat_inverse_unit(G)
    ident = mat_identity_in(carrier)
    return mat_congruent(H, ident, x_prec=n_x, pi_prec=lvl)


# ---------------------------------------------------------------------------
# Hodge weights and reduction


def q_valuation(f: TruncSeries, cap: int):
    """Largest m <= cap with Q^m dividing the canonical representative."""
    ring = f.ring
    row = _int_binomial_row(ring.params.p, ring.params.p + 1)
    q_ints = row[1:]
    coeffs = list(f.coeffs)
    if all(c.is_zero() for c in coeffs):
        return cap
    for m in range(cap):
        quot, rem = _divrem_monic_ints(coeffs, q_ints)
        if not all(c.is_zero() for c in rem):
            return m
        coeffs = quot
        if not coeffs:
            return cap
    return cap


def hodge_weights(P: Mat2, k: int):
    """The two Q-adic elementary-divisor exponents {h1, h2}, h1+h2 = k-1."""
    vals = [q_valuation(e, k) for e in P.entries()]
    h1 = min(vals)
    if h1 >= k and all(e.is_zero() for e in P.entries()):
        raise IndeterminateAtPrecision("zero matrix has no weights")
    det_val = q_valuation(P.det(), 2 * k)
    if det_val >= 2 * k:
        raise IndeterminateAtPrecision("determinant vanishes at truncation")
    return sorted((h1, det_val - h1))


def reduce_pair(pair: PhiGammaPair) -> PhiGammaPair:
    """Entrywise mod-pi reduction; the quotient relation becomes X^{pk}."""
    ring = pair.ring
    rf = ResidueField.of(ring.params)
    n = ring.params.p * pair.k
    red = lambda M: M.map(lambda f: f.residue(rf, n))
    return PhiGammaPair(P=red(pair.P), G=red(pair.G), k=pair.k,
                        base="residue", meta=pair.meta)


# ---------------------------------------------------------------------------
# serialization (cache format)


def _series_payload(f: TruncSeries):
    return [[c.prec, list(c.vec)] for c in f.coeffs]


def _series_from_payload(ring: SeriesRing, data):
    par = ring.params
    return ring.elem([PadicElem(par, prec, tuple(vec)) for prec, vec in data])


def pair_to_payload(pair: PhiGammaPair) -> dict:
    if pair.base == "residue":
        rf = pair.rfield
        return {
            "base": "residue", "k": pair.k, "meta": pair.meta,
            "p": rf.p, "f": rf.f, "nonresidue": rf.nonresidue,
            "x_prec": pair.P.a.n,
            "P": [list(e.coeffs) for e in pair.P.entries()],
            "G": [list(e.coeffs) for e in pair.G.entries()],
        }
    ring = pair.ring
    par = ring.params
    return {
        "base": "integral", "k": pair.k, "meta": pair.meta,
        "p": par.p, "e": par.e, "f": par.f,
        "eisenstein_unit": par.eisenstein_unit, "nonresidue": par.nonresidue,
        "pi_prec": ring.pi_prec,
        "P": [_series_payload(e) for e in pair.P.entries()],
        "G": [_series_payload(e) for e in pair.G.entries()],
    }


def pair_from_payload(data: dict) -> PhiGammaPair:
    from .padic import FieldParams

    k = data["k"]
    if data["base"] == "residue":
        rf = ResidueField(data["p"], data["f"], data.get("nonresidue"))
        n = data["x_prec"]
        mk = lambda cs: ResidueSeries(rf, cs, n)
        P = Mat2(*(mk(cs) for cs in data["P"]))
        G = Mat2(*(mk(cs) for cs in data["G"]))
        return PhiGammaPair(P=P, G=G, k=k, base="residue", meta=data["meta"])
    par = FieldParams(data["p"], data["e"], data["f"],
                      eisenstein_unit=data.get("eisenstein_unit", 1),
                      nonresidue=data.get("nonresidue"))
    ring = SeriesRing(par, data["pi_prec"], modulus_k=k)
    P = Mat2(*(_series_from_payload(ring, d) for d in data["P"]))
    G = Mat2(*(_series_from_payload(ring, d) for d in data["G"]))
    return PhiGammaPair(P=P, G=G, k=k, base="integral", meta=data["meta"])
