import pytest

from crysred.errors import IndeterminateAtPrecision, PreconditionDefect
from crysred.linalg import Mat2
from crysred.padic import FieldParams
from crysred.pairs import (
    PhiGammaPair,
    check_membership,
    check_membership_residue,
    commutation_defect,
    cyclotomic_unit,
    equivalence_base_change,
    extend_gamma_matrix,
    extend_gamma_matrix_residue,
    gamma_cofactor,
    hodge_weights,
    mat_congruent,
    mat_gamma,
    mat_identity_in,
    mat_inverse_unit,
    mat_is_zero,
    mat_phi,
    mat_res_gamma,
    mat_res_phi,
    pair_from_payload,
    pair_to_payload,
    reduce_pair,
    rep_equal,
    _pow_in_ring,
)
from crysred.series import (
    ResidueField,
    ResidueSeries,
    SeriesRing,
    frobenius,
    gamma_act,
    res_gamma,
    res_one,
    res_zero,
    to_quotient,
)


def carrier_fixture(p, k, n, n_x):
    """Exact commuting pair diag(Q^{k-1}, 1) / diag((gamma(X)/chi*X)^{k-1}, 1)
    in a power-of-X carrier ring."""
    par = FieldParams(p)
    R = SeriesRing(par, n, x_prec=n_x)
    q_pow = _pow_in_ring(R.q_poly(), k - 1)
    u = cyclotomic_unit(R)
    chi_inv = par.from_int(par.chi_gamma, n + 4).inv()
    g = _pow_in_ring(u * chi_inv, k - 1)
    P = Mat2(q_pow, R.zero(), R.zero(), R.one())
    G = Mat2(g, R.zero(), R.zero(), R.one())
    return R, P, G


def quotient_fixture(p, k, n):
    par = FieldParams(p)
    pk = p * k
    n_x = pk + n * (pk - k) + 2
    R, P, G = carrier_fixture(p, k, n + 1, n_x)
    A = SeriesRing(par, n, modulus_k=k)
    conv = lambda M: M.map(lambda f: to_quotient(f, A, n))
    return PhiGammaPair(P=conv(P), G=conv(G), k=k, base="integral")


def residue_fixture(p, k, n_x=None):
    rf = ResidueField(p)
    par = FieldParams(p)
    n = n_x if n_x is not None else p * k
    x = ResidueSeries(rf, [0, 1], n)
    u = res_gamma(x, par.chi_gamma).shift_down(1)
    chi_inv = pow(par.chi_gamma % p, p - 2, p)
    g = res_one(rf, n)
    for _ in range(k - 1):
        g = g * u.scale(chi_inv)
    q_pow = ResidueSeries(rf, [0] * ((p - 1) * (k - 1)) + [1], n)
    P = Mat2(q_pow, res_zero(rf, n), res_zero(rf, n), res_one(rf, n))
    G = Mat2(g, res_zero(rf, n), res_zero(rf, n), res_one(rf, n))
    return rf, P, G


# -- the exact rank-1 identity ------------------------------------------------


def test_weight_block_commutes_exactly():
    for p, m in ((3, 2), (5, 3)):
        par = FieldParams(p)
        R = SeriesRing(par, 5, x_prec=24)
        q_pow = _pow_in_ring(R.q_poly(), m)
        u = cyclotomic_unit(R)
        g = _pow_in_ring(u * par.from_int(par.chi_gamma, 9).inv(), m)
        lhs = q_pow * frobenius(g)
        rhs = g * gamma_act(q_pow)
        assert lhs.congruent(rhs, pi_prec=5)


def test_membership_of_diagonal_fixture():
    pair = quotient_fixture(3, 3, 4)
    ap = FieldParams(3).from_int(3 ** 2 + 1, 4)
    rep = check_membership(pair, ap)
    assert rep.commutation and rep.unit_constant
    assert rep.char_poly and rep.gamma_product
    assert rep.verdict


def test_membership_flags_wrong_det():
    pair = quotient_fixture(3, 2, 3)
    bad = PhiGammaPair(P=pair.P * pair.P, G=pair.G, k=2, base="integral")
    rep = check_membership(bad, FieldParams(3).from_int(4, 3))
    assert not rep.char_poly and not rep.verdict


def test_membership_flags_bad_constant_term():
    pair = quotient_fixture(3, 2, 3)
    ring = pair.ring
    bump = mat_identity_in(ring).map(lambda f: f + ring.constant(3))
    rep = check_membership(
        PhiGammaPair(P=pair.P, G=pair.G * bump, k=2, base="integral"),
        FieldParams(3).from_int(4, 3))
    assert not rep.unit_constant


# -- extension ---------------------------------------------------------------


def test_extend_recovers_truncated_gamma_matrix():
    p, k, n = 3, 3, 3
    n_target = 14
    n_x = n_target + (p - 1) * (k - 1) + 1
    R, P, G_exact = carrier_fixture(p, k, n + k, n_x)
    G0 = G_exact.map(lambda f: R.elem(list(f.coeffs[:k])))
    G = extend_gamma_matrix(P, G0, k, n_target)
    assert mat_congruent(G, G_exact, x_prec=n_target, pi_prec=n)
    defect = P * mat_phi(G) - G * mat_gamma(P)
    for entry in defect.entries():
        assert all(c.is_zero() for c in entry.coeffs[:n_target])


def test_extend_is_idempotent_on_exact_input():
    p, k, n = 3, 2, 4
    R, P, G_exact = carrier_fixture(p, k, n + k, 20)
    G = extend_gamma_matrix(P, G_exact, k, 16)
    assert mat_congruent(G, G_exact, x_prec=16)


def test_extend_rejects_non_seed():
    p, k = 3, 3
    R, P, _ = carrier_fixture(p, k, 6, 22)
    with pytest.raises(PreconditionDefect):
        extend_gamma_matrix(P, mat_identity_in(R), k, 14)


def test_residue_extend_recovers_exactly():
    p, k = 3, 4
    n_target = 20
    n_x = n_target + 2 * (p - 1) * (k - 1)
    rf, P, G_exact = residue_fixture(p, k, n_x)
    chi = FieldParams(p).chi_gamma
    G0 = G_exact.map(lambda f: ResidueSeries(rf, f.coeffs[:k], n_x))
    G = extend_gamma_matrix_residue(P, G0, k, n_target, chi)
    for got, want in zip(G.entries(), G_exact.entries()):
        assert got.coeffs[:n_target] == want.coeffs[:n_target]


# -- base change and representation equality ----------------------------------


def companion(R, k, ap_int):
    q_pow = _pow_in_ring(R.q_poly(), k - 1)
    one = R.one()
    return Mat2(R.zero(), -one, q_pow,
                R.constant(R.params.from_int(ap_int, R.pi_prec)))


def test_base_change_trivial():
    par = FieldParams(3)
    R = SeriesRing(par, 4, x_prec=18)
    P = companion(R, 2, 3)
    M = equivalence_base_change(P, P, 2, 12)
    assert mat_congruent(M, mat_identity_in(R), x_prec=12)


def test_base_change_absorbs_modulus_perturbation():
    p, k, n = 3, 2, 4
    par = FieldParams(p)
    n_target = 12
    # provision k-1 extra pi-digits; certify the residual at level n
    R = SeriesRing(par, n + (k - 1), x_prec=n_target + (p - 1) * (k - 1))
    P = companion(R, k, 3)
    phik = _pow_in_ring(R.phi_poly(), k)
    S = Mat2(R.zero(), phik, R.zero(), R.zero())
    P_new = (mat_identity_in(R) + S) * P
    M = equivalence_base_change(P, P_new, k, n_target, pi_certify=n)
    # M = Id mod X^k and M^{-1} P_new phi(M) = P at truncation
    ident = mat_identity_in(R)
    assert mat_congruent(M, ident, x_prec=k)
    assert not mat_congruent(M, ident, x_prec=n_target)
    resid = P_new * mat_phi(M) - M * P
    zero = par.zero(n)
    for entry in resid.entries():
        assert all(c.congruent(zero, n) for c in entry.coeffs[:n_target])


def test_rep_equal_reflexive_and_under_allowed_perturbation():
    p, k, n = 3, 2, 3
    pair = quotient_fixture(p, k, n)
    assert rep_equal(pair, pair, n_x=10)

    # conjugate by Id + phi^k * S: an allowed change of basis
    par = FieldParams(p)
    pk = p * k
    n_x = pk + (n + 1) * (pk - k) + 2
    R, P, G = carrier_fixture(p, k, n + 2, n_x)
    phik = _pow_in_ring(R.phi_poly(), k)
    M0 = mat_identity_in(R) + Mat2(R.zero(), phik, phik, R.zero())
    M0_inv = mat_inverse_unit(M0)
    P2 = M0_inv * P * mat_phi(M0)
    G2 = M0_inv * G * mat_gamma(M0)
    A = SeriesRing(par, n, modulus_k=k)
    conv = lambda M: M.map(lambda f: to_quotient(f, A, n))
    pair2 = PhiGammaPair(P=conv(P2), G=conv(G2), k=k, base="integral")
    assert rep_equal(pair, pair2, n_x=8)


def test_rep_equal_false_for_distinct_trace():
    p, k, n = 3, 2, 3
    pair = quotient_fixture(p, k, n)
    A = pair.ring
    other = PhiGammaPair(P=pair.P + mat_identity_in(A), G=pair.G, k=k,
                         base="integral")
    assert not rep_equal(pair, other, n_x=8)


# -- weights, reduction, cofactor ---------------------------------------------


def test_hodge_weights_frozen():
    par = FieldParams(3)
    k = 4
    A = SeriesRing(par, 4, modulus_k=k)
    q = A.q_poly()
    q3 = _pow_in_ring(q, 3)
    assert hodge_weights(Mat2(A.one(), A.zero(), A.zero(), q3), k) == [0, 3]
    assert hodge_weights(Mat2(q, A.zero(), A.zero(), q), 3) == [1, 1]
    P = companion(A, k, 3)
    assert hodge_weights(P, k) == [0, 3]
    with pytest.raises(IndeterminateAtPrecision):
        hodge_weights(Mat2(A.zero(), A.zero(), A.zero(), A.zero()), k)


def test_cofactor_inverts_gamma_image():
    p, k = 3, 3
    R, P, _ = carrier_fixture(p, k, 4, 20)
    W = gamma_cofactor(P, k)
    q_pow = _pow_in_ring(R.q_poly(), k - 1)
    prod = mat_gamma(P) * W
    ident_q = Mat2(q_pow, R.zero(), R.zero(), q_pow)
    assert mat_congruent(prod, ident_q, x_prec=14, pi_prec=4)


def test_reduce_pair_hits_residue_world():
    pair = quotient_fixture(3, 3, 3)
    red = reduce_pair(pair)
    assert red.base == "residue"
    # Q^{k-1} reduces to X^{(p-1)(k-1)}
    assert red.P.a.x_valuation() == (3 - 1) * (3 - 1)
    assert red.P.a.coeff((3 - 1) * (3 - 1)) == 1
    rep = check_membership_residue(red, (3 ** 2 + 1) % 3)
    assert rep.verdict


def test_reduction_commutes_with_defect():
    pair = quotient_fixture(3, 2, 3)
    red = reduce_pair(pair)
    rf = red.rfield
    defect_then_reduce = commutation_defect(pair).map(
        lambda f: f.residue(rf, red.P.a.n))
    reduce_then_defect = commutation_defect(red)
    assert defect_then_reduce == reduce_then_defect


# -- serialization -------------------------------------------------------------


def test_payload_roundtrip_integral():
    pair = quotient_fixture(3, 2, 3)
    data = pair_to_payload(pair)
    back = pair_from_payload(data)
    assert back.k == pair.k and back.base == "integral"
    assert mat_congruent(back.P, pair.P) and mat_congruent(back.G, pair.G)


def test_payload_roundtrip_residue():
    pair = reduce_pair(quotient_fixture(3, 2, 3))
    data = pair_to_payload(pair)
    back = pair_from_payload(data)
    assert back.P == pair.P and back.G == pair.G and back.base == "residue"
