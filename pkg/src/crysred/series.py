"""Truncated power series over O_E/pi^n and over the residue field.

Two carriers:

* ``TruncSeries`` over :class:`SeriesRing` -- coefficients are PadicElem,
  truncated either at X^N (``modulus_k=None``) or modulo the monic polynomial
  phi(X)^k (``modulus_k=k``), where phi(X) = (1+X)^p - 1.  The monic choice
  makes the ring a finite *exact* quotient: no X-adic tail is ever dropped,
  which is what lets membership certificates be checked without slack.

* ``ResidueSeries`` over :class:`ResidueField` -- coefficients are packed
  ints in GF(p^f), truncated at X^N.  (Modulo pi, phi(X)^k = X^{pk}, so the
  residue quotient ring *is* the plain truncation ring.)

The operators of the theory are substitutions X |-> (1+X)^a - 1: Frobenius is
a = p, the Gamma-generator action is a = chi(gamma), and powers of Gamma use
a = chi^j.  Substitution powers are cached per ring.
"""

from __future__ import annotations

from .errors import ExactDivisionError, InsufficientPrecision, MismatchedParams, NonUnit
from .padic import FieldParams, PadicElem, _smallest_nonresidue


# ---------------------------------------------------------------------------
# residue field, elements packed as ints in [0, p^f)


class ResidueField:
    """GF(p^f) with f <= 2; an element a + b*s is packed as a + b*p."""

    def __init__(self, p: int, f: int = 1, nonresidue: int | None = None):
        self.p = p
        self.f = f
        self.card = p ** f
        if f == 2:
            self.nonresidue = nonresidue if nonresidue is not None else _smallest_nonresidue(p)
        else:
            self.nonresidue = None
        self._subst_cache: dict = {}

    @classmethod
    def of(cls, params: FieldParams) -> "ResidueField":
        return cls(params.p, params.f, params.nonresidue)

    def _key(self):
        return (self.p, self.f, self.nonresidue)

    def __eq__(self, other):
        return isinstance(other, ResidueField) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def from_int(self, a: int) -> int:
        return a % self.p

    def from_residue(self, r) -> int:
        """Pack the output of PadicElem.residue()."""
        if self.f == 2:
            a, b = r
            return a % self.p + (b % self.p) * self.p
        return r % self.p

    def add(self, x: int, y: int) -> int:
        p = self.p
        if self.f == 1:
            return (x + y) % p
        return (x + y) % p + (((x // p) + (y // p)) % p) * p

    def neg(self, x: int) -> int:
        p = self.p
        if self.f == 1:
            return (-x) % p
        return (-x) % p + ((-(x // p)) % p) * p

    def sub(self, x: int, y: int) -> int:
        return self.add(x, self.neg(y))

    def mul(self, x: int, y: int) -> int:
        p = self.p
        if self.f == 1:
            return (x * y) % p
        a, b = x % p, x // p
        c, d = y % p, y // p
        return (a * c + b * d * self.nonresidue) % p + ((a * d + b * c) % p) * p

    def inv(self, x: int) -> int:
        p = self.p
        if self.f == 1:
            if x % p == 0:
                raise NonUnit("0 has no inverse")
            return pow(x, p - 2, p)
        a, b = x % p, x // p
        norm = (a * a - b * b * self.nonresidue) % p
        if norm == 0:
            raise NonUnit("0 has no inverse")
        ninv = pow(norm, p - 2, p)
        return (a * ninv) % p + ((-b * ninv) % p) * p

    def pow(self, x: int, n: int) -> int:
        if n < 0:
            return self.pow(self.inv(x), -n)
        out = 1 if self.f == 1 else 1
        base = x
        while n:
            if n & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            n >>= 1
        return out

    def units(self):
        return [x for x in range(1, self.card)
                if (self.f == 1 or (x % self.p, x // self.p) != (0, 0))]


def _int_binomial_row(a: int, n: int):
    """[C(a, r) for r < n] for an integer a, exact."""
    out = [1]
    c = 1
    for r in range(1, n):
        c = c * (a - r + 1) // r
        out.append(c)
    return out


class ResidueSeries:
    """Truncated power series over a ResidueField; immutable."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: ResidueField, coeffs, n: int | None = None):
        if n is not None:
            coeffs = list(coeffs)[:n]
            coeffs += [0] * (n - len(coeffs))
        self.field = field
        self.coeffs = tuple(c % field.card for c in coeffs)

    @property
    def n(self) -> int:
        return len(self.coeffs)

    def coeff(self, j: int) -> int:
        return self.coeffs[j] if j < len(self.coeffs) else 0

    def constant(self) -> int:
        return self.coeff(0)

    def truncate(self, n: int) -> "ResidueSeries":
        return ResidueSeries(self.field, self.coeffs, n)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def x_valuation(self):
        for j, c in enumerate(self.coeffs):
            if c:
                return j
        return None

    def __eq__(self, other):
        return (isinstance(other, ResidueSeries) and self.field == other.field
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.field._key(), self.coeffs))

    def __add__(self, other):
        F = self.field
        n = min(self.n, other.n)
        return ResidueSeries(F, [F.add(a, b) for a, b in
                                 zip(self.coeffs[:n], other.coeffs[:n])])

    def __sub__(self, other):
        F = self.field
        n = min(self.n, other.n)
        return ResidueSeries(F, [F.sub(a, b) for a, b in
                                 zip(self.coeffs[:n], other.coeffs[:n])])

    def __neg__(self):
        F = self.field
        return ResidueSeries(F, [F.neg(a) for a in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        F = self.field
        n = min(self.n, other.n)
        a, b = self.coeffs, other.coeffs
        if F.f == 1:
            p = F.p
            out = [0] * n
            for i in range(min(len(a), n)):
                ai = a[i]
                if ai == 0:
                    continue
                for j in range(min(len(b), n - i)):
                    out[i + j] = (out[i + j] + ai * b[j]) % p
            return ResidueSeries(F, out)
        out = [0] * n
        for i in range(min(len(a), n)):
            ai = a[i]
            if ai == 0:
                continue
            for j in range(min(len(b), n - i)):
                out[i + j] = F.add(out[i + j], F.mul(ai, b[j]))
        return ResidueSeries(F, out)

    __rmul__ = __mul__

    def scale(self, c: int) -> "ResidueSeries":
        F = self.field
        c = c % F.card
        return ResidueSeries(F, [F.mul(c, a) for a in self.coeffs])

    def shift_up(self, j: int) -> "ResidueSeries":
        return ResidueSeries(self.field, (0,) * j + self.coeffs, self.n)

    def shift_down(self, j: int) -> "ResidueSeries":
        """Exact division by X^j; the low coefficients must vanish."""
        if any(self.coeffs[:j]):
            raise ExactDivisionError(f"series not divisible by X^{j}")
        return ResidueSeries(self.field, self.coeffs[j:])

    def __repr__(self):
        terms = [f"{c}*X^{j}" if j else str(c)
                 for j, c in enumerate(self.coeffs) if c]
        terms.append(f"O(X^{self.n})")
        return " + ".join(terms)


def res_one(field: ResidueField, n: int) -> ResidueSeries:
    return ResidueSeries(field, [1], n)


def res_zero(field: ResidueField, n: int) -> ResidueSeries:
    return ResidueSeries(field, [], n)


def res_monomial(field: ResidueField, j: int, n: int, c: int = 1) -> ResidueSeries:
    return ResidueSeries(field, [0] * j + [c % field.card], n)


def res_substitute(f: ResidueSeries, a: int) -> ResidueSeries:
    """f(X) |-> f((1+X)^a - 1) for an integer exponent a >= 1."""
    F = f.field
    n = f.n
    key = (a, n)
    powers = F._subst_cache.get(key)
    if powers is None:
        row = _int_binomial_row(a, n)
        g = ResidueSeries(F, [0] + [c % F.p for c in row[1:]], n)
        powers = [res_one(F, n)]
        for _ in range(n - 1):
            powers.append(powers[-1] * g)
        F._subst_cache[key] = powers
    acc = res_zero(F, n)
    for r, c in enumerate(f.coeffs):
        if c:
            acc = acc + powers[r].scale(c)
    return acc

def res_frobenius(f: ResidueSeries) -> ResidueSeries:
    """f(X) |-> f(X^p) over the residue field."""
    p = f.field.p
    out = [0] * f.n
    for j, c in enumerate(f.coeffs):
        if j * p >= f.n:
            break
        out[j * p] = c
    return ResidueSeries(f.field, out)


def res_gamma(f: ResidueSeries, chi: int, j: int = 1) -> ResidueSeries:
    return res_substitute(f, chi ** j)


def res_unit_inverse(f: ResidueSeries) -> ResidueSeries:
    F = f.field
    c0 = f.constant()
    inv0 = F.inv(c0)
    out = [inv0] + [0] * (f.n - 1)
    for r in range(1, f.n):
        s = 0
        for i in range(1, min(r, len(f.coeffs) - 1) + 1):
            s = F.add(s, F.mul(f.coeff(i), out[r - i]))
        out[r] = F.neg(F.mul(inv0, s))
    return ResidueSeries(F, out)


def res_divide_exact(f: ResidueSeries, g: ResidueSeries) -> ResidueSeries:
    v = g.x_valuation()
    if v is None:
        raise ExactDivisionError("division by zero series")
    return f.shift_down(v) * res_unit_inverse(g.shift_down(v))


# ---------------------------------------------------------------------------
# integral series


class SeriesRing:
    """Ring of truncated series over O_E/pi^(pi_prec).

    With ``modulus_k=None`` elements live in O[X]/X^x_prec.  With
    ``modulus_k=k`` they live in the exact quotient O[X]/(phi(X)^k), carried
    by their canonical representative of degree < p*k.
    """

    def __init__(self, params: FieldParams, pi_prec: int,
                 x_prec: int | None = None, modulus_k: int | None = None):
        self.params = params
        self.pi_prec = pi_prec
        self.modulus_k = modulus_k
        if modulus_k is not None:
            x_prec = params.p * modulus_k
        if x_prec is None:
            raise ValueError("x_prec required for a power-of-X ring")
        self.n = x_prec
        self._subst_powers: dict = {}
        self._modulus_ints = None
        if modulus_k is not None:
            row = _int_binomial_row(self.params.p, self.params.p + 1)
            phi_poly = [0] + row[1:]  # coefficients of (1+X)^p - 1, degree p
            mod = [1]
            for _ in range(modulus_k):
                mod = _int_poly_mul(mod, phi_poly)
            assert mod[-1] == 1 and len(mod) == self.params.p * modulus_k + 1
            self._modulus_ints = mod

    def _key(self):
        return (self.params, self.pi_prec, self.n, self.modulus_k)

    def __eq__(self, other):
        return isinstance(other, SeriesRing) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        mod = f"phi^{self.modulus_k}" if self.modulus_k else f"X^{self.n}"
        return f"SeriesRing(p={self.params.p}, pi^{self.pi_prec}, mod {mod})"

    def modulus_ints(self):
        return self._modulus_ints

    # -- constructors ---------------------------------------------------------

    def elem(self, coeffs) -> "TruncSeries":
        return TruncSeries(self, coeffs)

    def from_ints(self, ints) -> "TruncSeries":
        pr = self.pi_prec
        return TruncSeries(self, [self.params.from_int(a, pr) for a in ints])

    def zero(self) -> "TruncSeries":
        return TruncSeries(self, [])

    def one(self) -> "TruncSeries":
        return self.from_ints([1])

    def x(self) -> "TruncSeries":
        return self.from_ints([0, 1])

    def monomial(self, j: int, c=1) -> "TruncSeries":
        if isinstance(c, int):
            c = self.params.from_int(c, self.pi_prec)
        return TruncSeries(self, [self.params.zero(c.prec)] * j + [c])

    def constant(self, c) -> "TruncSeries":
        if isinstance(c, int):
            c = self.params.from_int(c, self.pi_prec)
        return TruncSeries(self, [c])

    def q_poly(self) -> "TruncSeries":
        """Q = phi(X)/X = ((1+X)^p - 1)/X, monic of degree p-1 with Q(0) = p."""
        row = _int_binomial_row(self.params.p, self.params.p + 1)
        return self.from_ints(row[1:])

    def phi_poly(self) -> "TruncSeries":
        row = _int_binomial_row(self.params.p, self.params.p + 1)
        return self.from_ints([0] + row[1:])

    def at(self, pi_prec: int | None = None, x_prec: int | None = None,
           modulus_k: int | None = "same") -> "SeriesRing":
        if modulus_k == "same":
            modulus_k = self.modulus_k
        return SeriesRing(self.params,
                          self.pi_prec if pi_prec is None else pi_prec,
                          self.n if x_prec is None else x_prec,
                          modulus_k)

    def convert(self, f: "TruncSeries") -> "TruncSeries":
        """Re-interpret a series in this ring (reduce / truncate as needed)."""
        return TruncSeries(self, list(f.coeffs))

    # -- substitution power tables ---------------------------------------------

    def subst_powers(self, a: int):
        powers = self._subst_powers.get(a)
        if powers is None:
            one_plus_x = self.from_ints([1, 1])
            g = _pow_series(one_plus_x, a) - self.one()
            powers = [self.one()]
            deg = self.n
            for _ in range(deg - 1):
                powers.append(powers[-1] * g)
            self._subst_powers[a] = powers
        return powers


def _int_poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _pow_series(f: "TruncSeries", nexp: int) -> "TruncSeries":
    out = f.ring.one()
    base = f
    while nexp:
        if nexp & 1:
            out = out * base
        base = base * base
        nexp >>= 1
    return out


class TruncSeries:
    """Element of a SeriesRing; immutable, ragged coefficient list
    (missing high coefficients are structural zeros)."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring: SeriesRing, coeffs):
        coeffs = list(coeffs)
        for c in coeffs:
            if not isinstance(c, PadicElem) or c.params != ring.params:
                raise MismatchedParams("coefficient from the wrong field")
        if ring.modulus_ints() is not None and len(coeffs) > ring.n:
            coeffs = _divrem_monic_ints(coeffs, ring.modulus_ints())[1]
        else:
            coeffs = coeffs[:ring.n]
        self.ring = ring
        self.coeffs = tuple(coeffs)

    # -- queries ---------------------------------------------------------------

    def coeff(self, j: int) -> PadicElem:
        if j < len(self.coeffs):
            return self.coeffs[j]
        return self.ring.params.zero(self.ring.pi_prec)

    def constant(self) -> PadicElem:
        return self.coeff(0)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def x_valuation(self):
        for j, c in enumerate(self.coeffs):
            if not c.is_zero():
                return j
        return None

    def min_pi_precision(self):
        return min((c.prec for c in self.coeffs), default=self.ring.pi_prec)

    def degree_bound(self) -> int:
        return len(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, TruncSeries) or other.ring != self.ring:
            return NotImplemented
        for j in range(max(len(self.coeffs), len(other.coeffs))):
            a, b = self.coeff(j), other.coeff(j)
            if a.prec != b.prec or a.vec != b.vec:
                return False
        return True

    def congruent(self, other: "TruncSeries", x_prec: int | None = None,
                  pi_prec: int | None = None) -> bool:
        m = x_prec if x_prec is not None else max(len(self.coeffs), len(other.coeffs))
        for j in range(min(m, self.ring.n)):
            a, b = self.coeff(j), other.coeff(j)
            pp = min(a.prec, b.prec) if pi_prec is None else pi_prec
            if not a.congruent(b, pp):
                return False
        return True

    # -- arithmetic --------------------------------------------------------------

    def _check(self, other):
        if other.ring != self.ring:
            raise MismatchedParams(f"{self.ring} vs {other.ring}")

    def __add__(self, other):
        if isinstance(other, (int, PadicElem)):
            other = self.ring.constant(other)
        self._check(other)
        la, lb = len(self.coeffs), len(other.coeffs)
        out = []
        for j in range(max(la, lb)):
            if j >= la:
                out.append(other.coeffs[j])
            elif j >= lb:
                out.append(self.coeffs[j])
            else:
                out.append(self.coeffs[j] + other.coeffs[j])
        return TruncSeries(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return TruncSeries(self.ring, [-c for c in self.coeffs])

    def __sub__(self, other):
        if isinstance(other, (int, PadicElem)):
            other = self.ring.constant(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, PadicElem)):
            return self.scale(other)
        self._check(other)
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return self.ring.zero()
        cap = len(a) + len(b) - 1
        if self.ring.modulus_k is None:
            cap = min(cap, self.ring.n)
        out = [None] * cap
        for i, x in enumerate(a):
            if x.is_zero() and x.prec >= self.ring.pi_prec:
                continue  # within ring tolerance, contributes nothing
            for j in range(min(len(b), cap - i)):
                t = x * b[j]
                out[i + j] = t if out[i + j] is None else out[i + j] + t
        out = [self.ring.params.zero(self.ring.pi_prec) if c is None else c
               for c in out]
        return TruncSeries(self.ring, out)

    __rmul__ = __mul__

    def scale(self, c) -> "TruncSeries":
        return TruncSeries(self.ring, [x * c for x in self.coeffs])

    def shift_up(self, j: int) -> "TruncSeries":
        z = self.ring.params.zero(self.ring.pi_prec + j)
        return TruncSeries(self.ring, [z] * j + list(self.coeffs))

    def shift_down(self, j: int) -> "TruncSeries":
        """Exact division by X^j (low coefficients must vanish at precision)."""
        for c in self.coeffs[:j]:
            if not c.is_zero():
                raise ExactDivisionError(f"series not divisible by X^{j}")
        return TruncSeries(self.ring, self.coeffs[j:])

    def reduce_pi(self, prec: int) -> "TruncSeries":
        return TruncSeries(self.ring, [c.reduce(min(c.prec, prec)) for c in self.coeffs])

    def residue(self, rfield: ResidueField, n: int | None = None) -> ResidueSeries:
        out = [rfield.from_residue(c.residue()) for c in self.coeffs]
        return ResidueSeries(rfield, out, n if n is not None else self.ring.n)

    def __repr__(self):
        terms = []
        for j, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            digits = format(c).rsplit(" + O", 1)[0]
            if "+" in digits or "*" in digits:
                digits = f"({digits})"
            terms.append(digits if j == 0 else f"{digits}*X^{j}")
        terms.append(f"O(X^{self.ring.n})")
        return " + ".join(terms)


def _divrem_monic_ints(coeffs, mod_ints):
    """Divide a PadicElem-coefficient polynomial by a monic int polynomial."""
    r = list(coeffs)
    d = len(mod_ints) - 1
    q = []
    for top in range(len(r) - 1, d - 1, -1):
        lead = r[top]
        q.append(lead)
        if not lead.is_zero():
            for j in range(d):
                if mod_ints[j]:
                    r[top - d + j] = r[top - d + j] - lead * mod_ints[j]
        r.pop()
    q.reverse()
    return q, r


def to_quotient(f: TruncSeries, quot: SeriesRing, pi_certified: int) -> TruncSeries:
    """Map a power-of-X ring element into the exact quotient O[X]/(phi^k).

    The X-truncation of ``f`` limits how well its quotient class is known:
    a dropped X^a tail reduces, mod phi^k, to terms divisible by
    p^ceil((a+1-pk)/(pk-k)).  We therefore require
    ``f.ring.n >= pk + pi_certified*(pk-k)`` and return the class at
    pi-precision (at most) ``pi_certified`` per coefficient.
    """
    if quot.modulus_k is None:
        raise ValueError("target must be a quotient ring")
    par = quot.params
    pk = par.p * quot.modulus_k
    p_layers = -(-pi_certified // par.e)
    need = pk + p_layers * (pk - quot.modulus_k)
    if f.ring.n < need:
        raise InsufficientPrecision(
            f"x_prec {f.ring.n} certifies less than pi^{pi_certified}; need {need}")
    g = TruncSeries(quot, list(f.coeffs))
    return g.reduce_pi(pi_certified)


def substitute(f: TruncSeries, a: int) -> TruncSeries:
    """f(X) |-> f((1+X)^a - 1), exact in the ring (mod phi^k if applicable)."""
    ring = f.ring
    powers = ring.subst_powers(a)
    acc = ring.zero()
    for r, c in enumerate(f.coeffs):
        if not c.is_zero() or c.prec < ring.pi_prec:
            acc = acc + powers[r].scale(c)
    return acc


def frobenius(f: TruncSeries) -> TruncSeries:
    return substitute(f, f.ring.params.p)


def gamma_act(f: TruncSeries, j: int = 1) -> TruncSeries:
    return substitute(f, f.ring.params.chi_gamma ** j)


def unit_inverse(f: TruncSeries) -> TruncSeries:
    """Inverse of a unit series (constant term a unit), by Newton iteration."""
    ring = f.ring
    g = ring.constant(f.constant().inv())
    one = ring.one()
    cap = 4
    m = ring.n * ring.pi_prec + 2
    while m:
        cap += 1
        m >>= 1
    for _ in range(cap):
        err = one - f * g
        if err.is_zero():
            return g
        g = g + g * err
    raise InsufficientPrecision("unit inverse failed to stabilize")


def divide_exact_series(f: TruncSeries, g: TruncSeries) -> TruncSeries:
    v = g.x_valuation()
    if v is None:
        raise ExactDivisionError("division by zero series")
    return f.shift_down(v) * unit_inverse(g.shift_down(v))


def sqrt_series(u: TruncSeries) -> TruncSeries:
    """Square root of a series with u = 1 + O(X) (p odd), s = 1 + O(X)."""
    ring = u.ring
    one = ring.one()
    if not (u.constant() - ring.params.one(u.constant().prec)).is_zero():
        raise ValueError("sqrt_series wants u = 1 mod X")
    inv2 = ring.params.from_int(2, ring.pi_prec * 2 + 4).inv()
    s = one
    cap = 4
    m = ring.n * ring.pi_prec + 2
    while m:
        cap += 1
        m >>= 1
    for _ in range(cap):
        s_new = (s + u * unit_inverse(s)).scale(inv2)
        if (s_new - s).is_zero():
            return s_new
        s = s_new
    raise InsufficientPrecision("sqrt iteration failed to stabilize")


def solve_phi_ratio(s: TruncSeries) -> TruncSeries:
    """Solve phi(v) = v*s with v = 1 + O(X), for s = 1 + O(X).

    Order-by-order: the X^r coefficient gives v_r*(p^r - 1) = (lower terms),
    and p^r - 1 is a unit, so no precision is lost.  Power-of-X rings only.
    """
    ring = s.ring
    if ring.modulus_k is not None:
        raise ValueError("solve_phi_ratio works in a power-of-X ring")
    par = ring.params
    if not (s.constant() - par.one(s.constant().prec)).is_zero():
        raise ValueError("solve_phi_ratio wants s = 1 mod X")
    qtab = ring.subst_powers(par.p)  # qtab[m].coeff(r) = [X^r] phi(X)^m
    v = [par.one(ring.pi_prec)]
    for r in range(1, ring.n):
        acc = par.zero(ring.pi_prec + par.e * (r + 2))
        for i in range(r):
            acc = acc + v[i] * s.coeff(r - i)
        for m in range(1, r):
            acc = acc - v[m] * qtab[m].coeff(r)
        unit = par.from_int(pow(par.p, r) - 1, ring.pi_prec + par.e * (r + 2))
        v.append(acc * unit.inv())
    return TruncSeries(ring, v)
