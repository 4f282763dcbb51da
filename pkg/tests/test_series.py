import random

import pytest

from crysred.errors import ExactDivisionError, MismatchedParams
from crysred.padic import FieldParams
from crysred.series import (
    ResidueField,
    ResidueSeries,
    SeriesRing,
    divide_exact_series,
    frobenius,
    gamma_act,
    res_divide_exact,
    res_frobenius,
    res_gamma,
    res_monomial,
    res_one,
    res_substitute,
    res_unit_inverse,
    solve_phi_ratio,
    sqrt_series,
    substitute,
    unit_inverse,
)

Q3 = FieldParams(3)
Q5 = FieldParams(5)


def ring(p=3, n=4, N=20, k=None):
    return SeriesRing(FieldParams(p), n, x_prec=N, modulus_k=k)


# -- frozen values -----------------------------------------------------------


def test_substitute_x_by_power_three():
    R = ring(p=3)
    img = substitute(R.x(), 3)
    assert [c.vec[0] for c in img.coeffs[:4]] == [0, 3, 3, 1]
    assert img.coeff(7).is_zero()


def test_q_poly_p3():
    q = ring(p=3).q_poly()
    assert [c.vec[0] for c in q.coeffs] == [3, 3, 1]
    assert ring(p=5).q_poly().coeffs[0].vec[0] == 5  # Q(0) = p


def test_frobenius_is_substitution_by_p():
    R = ring(p=5, N=12)
    f = R.from_ints([2, 0, 1, 7])
    assert frobenius(f) == substitute(f, 5)


def test_gamma_unit_constant_term_is_chi():
    # gamma(X)/X is a unit with constant term chi(gamma)
    for p in (3, 5, 7):
        R = ring(p=p, N=10)
        u = gamma_act(R.x()).shift_down(1)
        assert u.constant().vec[0] % p ** 4 == R.params.chi_gamma % p ** 4


def test_cyclotomic_unit_identity():
    # gamma(Q) * u = phi(u) * Q where u = gamma(X)/X: both sides of the
    # rank-one commutation relation for the basic weight-one pair.
    for p in (3, 5):
        R = ring(p=p, n=5, N=18)
        q = R.q_poly()
        u = gamma_act(R.x()).shift_down(1)
        lhs = gamma_act(q) * u
        rhs = frobenius(u) * q
        assert lhs.congruent(rhs, pi_prec=5)
        ratio = frobenius(u) * unit_inverse(u)  # = gamma(Q)/Q
        assert ratio.constant().congruent(R.params.one(5))


def test_monic_reduction_degree_three():
    # X^3 = phi(X) - 3X^2 - 3X, so mod phi the class of X^3 is -3X^2 - 3X
    A = ring(p=3, k=1)
    f = A.monomial(3)
    assert [c.vec[0] % 81 for c in f.coeffs] == [0, 78, 78]


def test_phi_times_x_q_filtration():
    # phi(X)^k = (X*Q)^k is zero in the exact quotient
    A = ring(p=3, n=3, k=2)
    xq = A.x() * A.q_poly()
    assert (xq * xq).is_zero()
    assert not xq.is_zero()


def test_solve_phi_ratio_recovers_one_plus_x():
    # phi(1+X)/(1+X) = (1+X)^(p-1); the solver must return exactly 1+X
    for p in (3, 5):
        R = SeriesRing(FieldParams(p), 6, x_prec=14)
        from crysred.series import _pow_series
        s = _pow_series(R.from_ints([1, 1]), p - 1)
        v = solve_phi_ratio(s)
        expect = R.from_ints([1, 1])
        assert v.congruent(expect, pi_prec=6)
        assert frobenius(v).congruent(v * s, pi_prec=6)


def test_sqrt_series_square_of_one_plus_x():
    R = ring(p=5, n=6, N=16)
    u = R.from_ints([1, 2, 1])  # (1+X)^2
    s = sqrt_series(u)
    assert s.congruent(R.from_ints([1, 1]), pi_prec=6)


def test_unit_inverse_alternating_signs():
    R = ring(p=3, n=2, N=6)
    g = unit_inverse(R.from_ints([1, 1]))
    assert [c.vec[0] for c in g.coeffs] == [1, 8, 1, 8, 1, 8]


# -- ring mechanics ----------------------------------------------------------


def test_mul_respects_truncation_cap():
    R = ring(p=3, N=5)
    f = R.monomial(3) * R.monomial(3)
    assert f.is_zero() and f.degree_bound() <= 5


def test_modulus_ring_mul_matches_poly_mul_then_reduce():
    A = ring(p=3, n=4, k=2)
    rng = random.Random(11)
    for _ in range(12):
        f = A.from_ints([rng.randrange(81) for _ in range(6)])
        g = A.from_ints([rng.randrange(81) for _ in range(6)])
        h = A.from_ints([rng.randrange(81) for _ in range(4)])
        assert (f * (g + h)).congruent(f * g + f * h)
        assert (f * g).congruent(g * f)


def test_substitute_multiplicative_in_quotient():
    A = ring(p=3, n=3, k=2)
    rng = random.Random(7)
    for _ in range(6):
        f = A.from_ints([rng.randrange(27) for _ in range(6)])
        g = A.from_ints([rng.randrange(27) for _ in range(6)])
        assert gamma_act(f * g).congruent(gamma_act(f) * gamma_act(g), pi_prec=3)
        assert frobenius(f * g).congruent(frobenius(f) * frobenius(g), pi_prec=3)


def test_gamma_act_well_defined_on_quotient():
    # representatives differing by a multiple of phi^k have equal images
    A = ring(p=3, n=3, k=1)
    f = A.from_ints([2, 1, 1])
    lift = list(f.coeffs) + [A.params.zero(3)] * 2
    bumped = [c for c in lift]
    for j, m in enumerate(A.modulus_ints()):
        bumped[j] = bumped[j] + m * A.params.from_int(2, 3)
    g = A.elem(bumped)
    assert f.congruent(g)
    assert gamma_act(f).congruent(gamma_act(g))


def test_shift_down_requires_divisibility():
    R = ring()
    with pytest.raises(ExactDivisionError):
        R.from_ints([1, 2]).shift_down(1)
    assert R.from_ints([0, 5]).shift_down(1).constant().vec[0] == 5


def test_mixed_ring_arithmetic_rejected():
    with pytest.raises(MismatchedParams):
        ring(p=3).one() + ring(p=5).one()
    with pytest.raises(MismatchedParams):
        ring(p=3, N=20).one() * ring(p=3, N=10).one()


def test_congruent_with_x_window():
    R = ring(p=3, N=8)
    f = R.from_ints([1, 2, 3])
    g = R.from_ints([1, 2, 3, 0, 7])
    assert f.congruent(g, x_prec=4)
    assert not f.congruent(g, x_prec=5)


def test_residue_reduction_of_series():
    R = ring(p=3, n=2, N=6)
    F = ResidueField(3)
    f = R.from_ints([4, 3, 8])
    assert f.residue(F).coeffs == (1, 0, 2, 0, 0, 0)


# -- residue layer -----------------------------------------------------------


def test_gf9_arithmetic():
    F = ResidueField(3, 2)
    s = 3  # packs 0 + 1*s
    assert F.mul(s, s) == 2  # s^2 = nonresidue = 2
    assert F.inv(s) == 6  # (2s) * s = 2*2 = 4 = 1
    assert F.mul(F.inv(s), s) == 1
    assert F.pow(s, 4) == 1  # s = sqrt(2) has order 4
    one_plus_s = F.add(1, s)
    assert F.pow(one_plus_s, 4) == 2 and F.pow(one_plus_s, 8) == 1  # order 8


def test_gf9_inverses_all_units():
    F = ResidueField(3, 2)
    for x in F.units():
        assert F.mul(x, F.inv(x)) == 1
    assert len(F.units()) == 8


def test_residue_substitution_phi_is_xp():
    # mod p, (1+X)^p - 1 = X^p
    F = ResidueField(3)
    x = res_monomial(F, 1, 12)
    assert res_substitute(x, 3) == res_monomial(F, 3, 12)
    assert res_frobenius(x) == res_monomial(F, 3, 12)


def test_residue_gamma_constant_term_of_unit():
    F = ResidueField(3)
    chi = FieldParams(3).chi_gamma
    u = res_gamma(res_monomial(F, 1, 10), chi).shift_down(1)
    assert u.constant() == chi % 3


def test_residue_unit_inverse_and_divide():
    F = ResidueField(5)
    f = ResidueSeries(F, [1, 1], 8)
    g = res_unit_inverse(f)
    assert (f * g) == res_one(F, 8)
    h = res_divide_exact(res_monomial(F, 3, 8), res_monomial(F, 1, 8))
    assert h == res_monomial(F, 2, 7)


def test_residue_mul_fuzz_against_int_polys():
    F = ResidueField(7)
    rng = random.Random(23)
    for _ in range(20):
        a = [rng.randrange(7) for _ in range(9)]
        b = [rng.randrange(7) for _ in range(9)]
        fa, fb = ResidueSeries(F, a), ResidueSeries(F, b)
        conv = [0] * 9
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                if i + j < 9:
                    conv[i + j] = (conv[i + j] + x * y) % 7
        assert list((fa * fb).coeffs) == conv


def test_residue_series_of_unramified_coeffs():
    par = FieldParams(3, f=2)
    R = SeriesRing(par, 2, x_prec=4)
    F = ResidueField.of(par)
    f = R.elem([par.from_int(4, 2), par.embed(FieldParams(3).from_int(1, 1))])
    r = f.residue(F)
    assert r.coeff(0) == 1 and r.coeff(1) == 1
