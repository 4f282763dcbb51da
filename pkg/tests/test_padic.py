from __future__ import annotations

import random
from fractions import Fraction

import pytest

from crysred.errors import (
    ExactDivisionError,
    InsufficientPrecision,
    NonUnit,
    UnsupportedExtension,
)
from crysred.padic import (
    FieldParams,
    PadicElem,
    binom,
    format_padic,
    int_valuation,
    parse_padic,
    smallest_primitive_root_mod_p2,
    sqrt_one_plus,
)

Q3 = FieldParams(3)
Q5 = FieldParams(5)
Q7 = FieldParams(7)
RAM3 = FieldParams(3, e=2)          # pi^2 = 3
UNRAM3 = FieldParams(3, f=2)        # s^2 = 2


def test_add_carries_into_higher_digit():
    x = Q3.from_int(2, 4) + Q3.from_int(1, 4)
    assert x.vec == (3,)
    assert x.pi_valuation() == 1
    assert x.vp() == Fraction(1)


def test_ramified_pi_arithmetic():
    pi = PadicElem(RAM3, 6, (0, 1))
    two_pi = pi + pi
    assert two_pi.vec == (0, 2)
    assert two_pi.vp() == Fraction(1, 2)
    assert (pi * pi).vec == (3, 0)
    assert (pi * pi).vp() == 1


def test_inverse_of_two_mod_25():
    x = Q5.from_int(2, 2)
    assert x.inv().vec == (13,)


def test_inverse_of_p_raises():
    with pytest.raises(NonUnit):
        Q5.from_int(5, 4).inv()


def test_sqrt_one_plus_frozen():
    s = sqrt_one_plus(Q3.from_int(3, 3))
    assert s.vec == (25,)
    assert s.residue() == 1
    assert (s * s).congruent(Q3.from_int(4, 3))


def test_sqrt_rejects_units():
    with pytest.raises(ValueError):
        sqrt_one_plus(Q3.from_int(1, 3))


def test_binom_integer():
    assert binom(Q3.from_int(5, 5), 2).vec == (10,)


def test_binom_half_frozen():
    # C(1/2, 2) = -1/8 = 10 mod 27
    a = Q3.from_rational(Fraction(1, 2), 3)
    got = binom(a, 2)
    assert got.reduce(3).vec == (10,)


def test_binom_headroom():
    a = Q3.from_int(4, 1)
    with pytest.raises(InsufficientPrecision):
        binom(a, 3)  # v_3(3!) = 1 eats the whole budget


def test_divide_exact_drops_precision():
    x = Q3.from_int(18, 5)
    q = x.divide_exact(Q3.from_int(3, 5))
    assert q.prec == 4 and q.vec == (6,)
    with pytest.raises(ExactDivisionError):
        Q3.from_int(2, 5).divide_exact(Q3.from_int(3, 5))


def test_ramified_shift_down():
    pi = PadicElem(RAM3, 4, (0, 1))
    x = pi + pi * pi
    q = x.shift_down(1)
    assert q.prec == 3
    assert q == RAM3.one(3) + PadicElem(RAM3, 3, (0, 1))


def test_mul_precision_gains_from_valuation():
    x = Q3.from_int(6, 4)
    y = Q3.from_int(3, 4)
    z = x * y
    assert z.prec == 5 and z.vec == (18,)


def test_primitive_roots():
    assert Q3.chi_gamma == 2
    assert Q5.chi_gamma == 2
    assert Q7.chi_gamma == 3
    for p in (3, 5, 7, 11):
        g = smallest_primitive_root_mod_p2(p)
        assert pow(g, p * (p - 1), p * p) == 1
        for q in ({p} | {d for d in range(2, p) if (p - 1) % d == 0 and d != 1}):
            pass  # order checked inside the function; spot-check below
        assert pow(g, p - 1, p * p) != 1
        assert pow(g, p * (p - 1) // 2, p * p) != 1


def test_twist_unit_valuation_law():
    # v_p(1 - chi^j) is 0 unless (p-1) | j, in which case it is 1 + v_p(j).
    for par in (Q3, Q5, Q7):
        p, chi = par.p, par.chi_gamma
        big = p ** 30
        for j in range(1, 201):
            got = int_valuation((1 - pow(chi, j, big)) % big, p)
            if got is None:
                got = 30
            want = 0 if j % (p - 1) else 1 + int_valuation(j, p)
            assert got == want, (p, j)


def test_ring_axioms_sampled():
    rng = random.Random(20260815)
    for par in (Q3, Q5, RAM3, UNRAM3):
        for _ in range(40):
            xs = []
            for _ in range(3):
                prec = rng.randrange(1, 9)
                vec = tuple(rng.randrange(0, par.p ** 8)
                            for _ in range(par.nslots))
                xs.append(PadicElem(par, prec, vec))
            a, b, c = xs
            m = min(x.prec for x in xs)
            lhs = ((a + b) * c).reduce(min(((a + b) * c).prec, (a * c + b * c).prec))
            rhs = (a * c + b * c).reduce(lhs.prec)
            assert lhs == rhs
            assert ((a * b) * c).congruent((a * (b * c)))
            assert (a + b).congruent(b + a)


def test_inv_roundtrip_sampled():
    rng = random.Random(7)
    for par in (Q3, Q5, RAM3, UNRAM3):
        for _ in range(25):
            vec = tuple(rng.randrange(0, par.p ** 6) for _ in range(par.nslots))
            x = PadicElem(par, 6, vec)
            if not x.is_unit():
                continue
            assert (x * x.inv()).congruent(1)


def test_sqrt_roundtrip_sampled():
    rng = random.Random(11)
    for par in (Q3, Q5, Q7):
        for _ in range(20):
            x = par.from_int(par.p * rng.randrange(0, par.p ** 5), 6)
            s = sqrt_one_plus(x)
            assert (s * s).congruent(par.one(6) + x)
            assert s.residue() == 1


def test_literal_roundtrip():
    rng = random.Random(3)
    for par in (Q3, Q5, RAM3, UNRAM3):
        for _ in range(30):
            prec = rng.randrange(1, 8)
            vec = tuple(rng.randrange(0, par.p ** 8) for _ in range(par.nslots))
            x = PadicElem(par, prec, vec)
            assert parse_padic(format_padic(x), par) == x


def test_parse_plain_and_offset_literals():
    x = parse_padic("5 + O(5^6)", Q5)
    assert x == Q5.from_int(5, 6)
    assert parse_padic("27", Q3, default_prec=8) == Q3.from_int(27, 8)
    y = parse_padic("2*3^1 + 1*3^2 + O(3^4)", Q3)
    assert y == Q3.from_int(15, 4)
    pi = PadicElem(RAM3, 5, (0, 1))
    assert parse_padic("1*pi^1 + O(pi^5)", RAM3) == pi
    z = parse_padic("(1+2*s) + O(3^2)", UNRAM3)
    assert z == PadicElem(UNRAM3, 2, (1, 2))


def test_embed_base_into_extension():
    x = Q3.from_int(5, 4)
    y = RAM3.embed(x)
    assert y.prec == 8 and y.vec[0] == 5


def test_unsupported_extension():
    with pytest.raises(UnsupportedExtension):
        FieldParams(3, e=2, f=2)


def test_zero_at_precision_semantics():
    z = Q3.from_int(27, 3)
    assert z.is_zero()
    assert z.pi_valuation() is None
    with pytest.raises(ExactDivisionError):
        Q3.one(3).divide_exact(z)
