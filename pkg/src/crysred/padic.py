"""Capped-precision arithmetic in small extensions of Q_p.

An element is a canonical representative of O_E / pi^M where O_E is the ring
of integers of E = Q_p, a ramified quadratic extension (pi^2 = d*p with d a
unit), or an unramified quadratic extension (generated by s with s^2 = c, c a
non-residue).  Precision M is *absolute* and counted in pi-adic units, so
v(pi) = 1 and v(p) = e.  All operations track precision pessimistically:

* add/sub: min of the two precisions;
* mul: min(M1 + v(y), M2 + v(x));
* exact division by pi^v: drops absolute precision by exactly v;
* inversion of a unit: keeps the precision of the input.

Elements are immutable; every constructor reduces slot-wise to the canonical
range (the coefficient of pi^j is stored mod p^ceil((M - j)/e)).
"""

from __future__ import annotations

from fractions import Fraction

from .errors import (
    ExactDivisionError,
    InsufficientPrecision,
    MismatchedParams,
    NonUnit,
    UnsupportedExtension,
)


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def int_valuation(n: int, p: int):
    """p-adic valuation of a nonzero integer; None for 0."""
    if n == 0:
        return None
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _prime_factors(n: int):
    out = set()
    d = 2
    while d * d <= n:
        while n % d == 0:
            out.add(d)
            n //= d
        d += 1
    if n > 1:
        out.add(n)
    return out


def smallest_primitive_root_mod_p2(p: int) -> int:
    """Smallest g >= 2 generating (Z/p^2)^*."""
    m = p * p
    order = p * (p - 1)
    checks = [order // q for q in _prime_factors(order)]
    g = 2
    while True:
        if g % p != 0 and all(pow(g, t, m) != 1 for t in checks):
            return g
        g += 1


def _smallest_nonresidue(p: int) -> int:
    squares = {pow(a, 2, p) for a in range(1, p)}
    c = 2
    while c % p in squares or c % p == 0:
        c += 1
    return c


class FieldParams:
    """Describes the coefficient field E: a prime p plus an optional quadratic
    extension, either ramified (pi^2 = d*p) or unramified (s^2 = c).

    chi_gamma is the smallest positive integer that generates (Z/p^2)^* --
    the cyclotomic-character value of the chosen topological generator of the
    (p-1)-prime part of Gamma.
    """

    def __init__(self, p: int, e: int = 1, f: int = 1, *,
                 eisenstein_unit: int = 1, nonresidue: int | None = None):
        if not is_prime(p) or p == 2:
            raise ValueError(f"p must be an odd prime, got {p}")
        if (e, f) not in {(1, 1), (2, 1), (1, 2)}:
            raise UnsupportedExtension(f"(e, f) = {(e, f)} not supported")
        self.p = p
        self.e = e
        self.f = f
        self.eisenstein_unit = eisenstein_unit % p if e == 2 else None
        if e == 2:
            if eisenstein_unit % p == 0:
                raise ValueError("eisenstein unit must be prime to p")
            self.eisenstein_unit = eisenstein_unit
        if f == 2:
            c = _smallest_nonresidue(p) if nonresidue is None else nonresidue
            if pow(c % p, (p - 1) // 2, p) != p - 1:
                raise ValueError(f"{c} is a square mod {p}")
            self.nonresidue = c
        else:
            self.nonresidue = None
        self.chi_gamma = smallest_primitive_root_mod_p2(p)
        self.chi_bar = self.chi_gamma % p

    @property
    def nslots(self) -> int:
        return self.e * self.f

    @property
    def residue_card(self) -> int:
        return self.p ** self.f

    def _key(self):
        return (self.p, self.e, self.f, self.eisenstein_unit, self.nonresidue)

    def __eq__(self, other):
        return isinstance(other, FieldParams) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        tag = {(1, 1): "Qp", (2, 1): "ram", (1, 2): "unram"}[(self.e, self.f)]
        return f"FieldParams(p={self.p}, {tag})"

    # -- element constructors ------------------------------------------------

    def zero(self, prec: int) -> "PadicElem":
        return PadicElem(self, prec, (0,) * self.nslots)

    def one(self, prec: int) -> "PadicElem":
        return PadicElem(self, prec, (1,) + (0,) * (self.nslots - 1))

    def from_int(self, a: int, prec: int) -> "PadicElem":
        return PadicElem(self, prec, (a,) + (0,) * (self.nslots - 1))

    def from_rational(self, q, prec: int) -> "PadicElem":
        q = Fraction(q)
        if q.denominator % self.p == 0:
            raise ExactDivisionError(f"{q} is not integral at p={self.p}")
        num = self.from_int(q.numerator, prec)
        den = self.from_int(q.denominator, prec)
        return num * den.inv()

    def chi(self, prec: int) -> "PadicElem":
        return self.from_int(self.chi_gamma, prec)

    def embed(self, x: "PadicElem") -> "PadicElem":
        """Embed an element of the (1,1) base field into this extension."""
        if x.params.e != 1 or x.params.f != 1 or x.params.p != self.p:
            raise MismatchedParams("can only embed base-field elements")
        return PadicElem(self, x.prec * self.e, (x.vec[0],) + (0,) * (self.nslots - 1))


# Offsets of pi-valuation carried by each slot.
def _slot_offsets(params: FieldParams):
    if params.e == 2:
        return (0, 1)
    if params.f == 2:
        return (0, 0)
    return (0,)


class PadicElem:
    """Canonical element of O_E / pi^prec.  Immutable."""

    __slots__ = ("params", "prec", "vec")

    def __init__(self, params: FieldParams, prec: int, vec):
        prec = max(0, prec)
        p, e = params.p, params.e
        offs = _slot_offsets(params)
        canon = []
        for a, off in zip(vec, offs):
            m = max(0, _ceil_div(prec - off, e))
            canon.append(a % (p ** m) if m > 0 else 0)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "prec", prec)
        object.__setattr__(self, "vec", tuple(canon))

    def __setattr__(self, *a):
        raise AttributeError("PadicElem is immutable")

    # -- basic queries --------------------------------------------------------

    def is_zero(self) -> bool:
        """True when indistinguishable from 0 at this precision."""
        return all(a == 0 for a in self.vec)

    def pi_valuation(self):
        """Valuation in pi-units (v(pi) = 1, v(p) = e); None if 0 at precision."""
        p, e = self.params.p, self.params.e
        offs = _slot_offsets(self.params)
        best = None
        for a, off in zip(self.vec, offs):
            if a == 0:
                continue
            v = e * int_valuation(a, p) + off
            if best is None or v < best:
                best = v
        return best

    def vp(self):
        """Valuation normalized so v(p) = 1, as a Fraction; None if 0."""
        v = self.pi_valuation()
        return None if v is None else Fraction(v, self.params.e)

    def is_unit(self) -> bool:
        return self.pi_valuation() == 0

    def residue(self):
        """Image mod pi: an int for f = 1, an (a, b) pair for f = 2."""
        p = self.params.p
        if self.params.f == 2:
            return (self.vec[0] % p, self.vec[1] % p)
        return self.vec[0] % p

    def reduce(self, prec: int) -> "PadicElem":
        if prec > self.prec:
            raise InsufficientPrecision(
                f"cannot raise precision {self.prec} -> {prec}")
        return PadicElem(self.params, prec, self.vec)

    # -- ring operations -------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, PadicElem):
            if other.params != self.params:
                raise MismatchedParams(f"{self.params} vs {other.params}")
            return other
        if isinstance(other, int):
            v = 0 if other == 0 else self.params.e * int_valuation(other, self.params.p)
            return self.params.from_int(other, self.prec + v)
        if isinstance(other, Fraction):
            return self.params.from_rational(other, self.prec)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        prec = min(self.prec, o.prec)
        return PadicElem(self.params, prec,
                         tuple(a + b for a, b in zip(self.vec, o.vec)))

    __radd__ = __add__

    def __neg__(self):
        return PadicElem(self.params, self.prec, tuple(-a for a in self.vec))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def _mul_vec(self, o):
        p = self.params
        if p.nslots == 1:
            return (self.vec[0] * o.vec[0],)
        a0, a1 = self.vec
        b0, b1 = o.vec
        if p.e == 2:
            d = p.eisenstein_unit
            return (a0 * b0 + a1 * b1 * d * p.p, a0 * b1 + a1 * b0)
        c = p.nonresidue
        return (a0 * b0 + a1 * b1 * c, a0 * b1 + a1 * b0)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        va = self.pi_valuation()
        vb = o.pi_valuation()
        va = self.prec if va is None else va
        vb = o.prec if vb is None else vb
        prec = min(self.prec + vb, o.prec + va)
        return PadicElem(self.params, prec, self._mul_vec(o))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inv() ** (-n)
        out = self.params.one(self.prec)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def inv(self) -> "PadicElem":
        """Inverse of a unit (closed form per extension type)."""
        if self.pi_valuation() != 0:
            raise NonUnit(f"not a unit at precision {self.prec}: {self}")
        par = self.params
        p = par.p
        m = p ** _ceil_div(self.prec, par.e)
        if par.nslots == 1:
            return PadicElem(par, self.prec, (pow(self.vec[0], -1, m),))
        a0, a1 = self.vec
        if par.e == 2:
            norm = a0 * a0 - a1 * a1 * par.eisenstein_unit * p
            ninv = pow(norm % m, -1, m)
            return PadicElem(par, self.prec, (a0 * ninv, -a1 * ninv))
        norm = a0 * a0 - a1 * a1 * par.nonresidue
        ninv = pow(norm % m, -1, m)
        return PadicElem(par, self.prec, (a0 * ninv, -a1 * ninv))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inv()

    def shift_down(self, v: int) -> "PadicElem":
        """Exact division by pi^v; absolute precision drops by exactly v."""
        if v == 0:
            return self
        if v < 0:
            raise ValueError("shift_down wants v >= 0")
        par = self.params
        p = par.p
        if par.e == 1:
            new = []
            offs = _slot_offsets(par)
            for a, off in zip(self.vec, offs):
                m = max(0, _ceil_div(self.prec - off, 1))
                if m > 0 and a % (p ** min(v, m)) != 0:
                    raise ExactDivisionError(
                        f"{self} not divisible by pi^{v}")
                new.append(a // (p ** v))
            return PadicElem(par, self.prec - v, tuple(new))
        # ramified: peel one pi at a time
        x = self
        d = par.eisenstein_unit
        for _ in range(v):
            a0, a1 = x.vec
            m0 = max(0, _ceil_div(x.prec, 2))
            if m0 > 0 and a0 % p != 0:
                raise ExactDivisionError(f"{self} not divisible by pi^{v}")
            dinv = pow(d, -1, p ** max(1, m0))
            x = PadicElem(par, x.prec - 1, (a1, (a0 // p) * dinv))
        return x

    def divide_exact(self, other) -> "PadicElem":
        """Exact division; raises ExactDivisionError if not divisible."""
        o = self._coerce(other)
        if o is None:
            raise TypeError(f"cannot divide by {other!r}")
        v = o.pi_valuation()
        if v is None:
            raise ExactDivisionError("division by 0 (at precision)")
        return self.shift_down(v) * o.shift_down(v).inv()

    # -- comparisons -----------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, int):
            other = self._coerce(other).reduce(self.prec)
        if not isinstance(other, PadicElem):
            return NotImplemented
        return (self.params == other.params and self.prec == other.prec
                and self.vec == other.vec)

    def __hash__(self):
        return hash((self.params, self.prec, self.vec))

    def congruent(self, other, prec: int | None = None) -> bool:
        """Equality after truncating both sides to a common precision."""
        o = self._coerce(other)
        m = min(self.prec, o.prec)
        if prec is not None:
            if prec > m:
                raise InsufficientPrecision(
                    f"cannot compare at {prec}: operands carry {m}")
            m = prec
        return self.reduce(m) == o.reduce(m)

    # -- pi-adic digits and printing -------------------------------------------

    def pi_digits(self):
        """List of prec digits in [0, p) (f=1) or pairs (f=2), lowest first."""
        p, e = self.params.p, self.params.e
        if self.params.f == 2:
            b0, b1 = self.vec
            out = []
            for _ in range(self.prec):
                out.append((b0 % p, b1 % p))
                b0 //= p
                b1 //= p
            return out
        if e == 1:
            a = self.vec[0]
            out = []
            for _ in range(self.prec):
                out.append(a % p)
                a //= p
            return out
        a0, a1 = self.vec
        out = []
        for j in range(self.prec):
            if j % 2 == 0:
                out.append(a0 % p)
                a0 //= p
            else:
                out.append(a1 % p)
                a1 //= p
        return out

    def __repr__(self):
        return format_padic(self)

    __str__ = __repr__


def format_padic(x: PadicElem) -> str:
    """Render as 'c0 + c1*p^1 + ... + O(p^M)' (pi in place of p if ramified)."""
    par = x.params
    sym = "pi" if par.e == 2 else str(par.p)
    terms = []
    for j, d in enumerate(x.pi_digits()):
        if par.f == 2:
            a, b = d
            if a == 0 and b == 0:
                continue
            if b == 0:
                coeff = str(a)
            else:
                coeff = f"({a}+{b}*s)" if a else f"({b}*s)"
        else:
            if d == 0:
                continue
            coeff = str(d)
        if j == 0:
            terms.append(coeff)
        else:
            terms.append(f"{coeff}*{sym}^{j}")
    terms.append(f"O({sym}^{x.prec})")
    return " + ".join(terms)


def _split_terms(s: str):
    """Split on '+' at paren depth 0."""
    out, depth, cur = [], 0, []
    for ch in s:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "+" and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return [t.strip() for t in out if t.strip()]


def _parse_coeff(tok: str, params: FieldParams):
    """Coefficient token: int, or '(a+b*s)' / '(b*s)' / 's' for f=2."""
    tok = tok.strip()
    if tok.startswith("(") and tok.endswith(")"):
        tok = tok[1:-1].strip()
    a = b = 0
    for part in _split_terms(tok):
        part = part.replace(" ", "")
        if part.endswith("*s"):
            b += int(part[:-2])
        elif part == "s":
            b += 1
        elif part == "-s":
            b -= 1
        else:
            a += int(part)
    return a, b


def parse_padic(text: str, params: FieldParams, default_prec: int = 20) -> PadicElem:
    """Parse a p-adic literal.

    Accepts sums of integer terms 'c', 'c*p^j', 'p^j' (with the actual prime
    in place of 'p', or 'pi' for ramified extensions), an optional precision
    cap 'O(p^M)', and, for f = 2, coefficients of the form '(a+b*s)'.
    Plain integers like '27' work and get the default precision.
    """
    text = text.strip()
    prec = None
    terms = _split_terms(text)
    sym_p = str(params.p)
    plain = []
    for t in terms:
        t = t.replace(" ", "")
        if t.startswith("O(") and t.endswith(")"):
            inner = t[2:-1]
            base, _, exp = inner.partition("^")
            m = int(exp) if exp else 1
            if base == "pi":
                prec = m
            elif base == sym_p:
                prec = m * params.e
            else:
                raise ValueError(f"bad O-term {t!r}")
            continue
        plain.append(t)
    if prec is None:
        prec = default_prec
    acc = params.zero(prec)
    pi_elem = None
    if params.e == 2:
        pi_elem = PadicElem(params, prec, (0, 1))
    for t in plain:
        if t.startswith("("):
            depth, idx = 0, 0
            for idx, ch in enumerate(t):
                depth += ch == "("
                depth -= ch == ")"
                if depth == 0:
                    break
            coeff_tok, rest = t[:idx + 1], t[idx + 1:].lstrip("*")
        else:
            coeff_tok, star, rest = t.partition("*")
            # forms without explicit coefficient: 'p^j', 'pi^j'
            if not star and ("^" in t or t in ("pi", sym_p)):
                coeff_tok, rest = "1", t
        if rest:
            base, _, exp = rest.partition("^")
            j = int(exp) if exp else 1
            if base == "pi":
                if params.e != 2:
                    raise ValueError("'pi' literal in an unramified field")
                mono = pi_elem ** j
            elif base == sym_p:
                mono = params.from_int(params.p, prec) ** j
            elif base == "s" and params.f == 2:
                if j % 2 == 0:
                    mono = params.from_int(params.nonresidue ** (j // 2), prec)
                else:
                    mono = PadicElem(params, prec, (0, params.nonresidue ** (j // 2)))
            else:
                raise ValueError(f"bad term {t!r}")
        else:
            mono = params.one(prec)
        if params.f == 2:
            a, b = _parse_coeff(coeff_tok, params)
            coeff = PadicElem(params, prec, (a, b))
        else:
            coeff = params.from_int(int(coeff_tok), prec)
        acc = acc + coeff * mono
    return acc.reduce(prec)


# -- analytic helpers ----------------------------------------------------------


def sqrt_one_plus(x: PadicElem) -> PadicElem:
    """Square root of 1 + x with s = 1 mod pi, for v(x) >= 1 and p odd.

    Newton iteration s <- (s + (1+x)/s) / 2; each step at least doubles the
    valuation of s^2 - (1+x), so it reaches the working precision in
    O(log prec) steps with no precision loss (division only by the unit 2).
    """
    v = x.pi_valuation()
    if v is not None and v < 1:
        raise ValueError("sqrt_one_plus needs v(x) >= 1")
    par = x.params
    y = par.one(x.prec) + x
    inv2 = par.from_int(2, x.prec).inv()
    s = par.one(x.prec)
    for _ in range(2 * x.prec + 4):
        s_new = (s + y * s.inv()) * inv2
        if s_new == s:
            return s
        s = s_new
    raise InsufficientPrecision("sqrt iteration failed to stabilize")


def binom(a: PadicElem, i: int) -> PadicElem:
    """Binomial coefficient C(a, i) = a(a-1)...(a-i+1)/i! over O_E.

    The division by i! is exact for integral results but costs
    e*v_p(i!) absolute precision; the caller provisions the headroom.
    Raises InsufficientPrecision when nothing is left.
    """
    if i < 0:
        raise ValueError("i >= 0 required")
    par = a.params
    if i == 0:
        return par.one(a.prec)
    num = a
    for j in range(1, i):
        num = num * (a - j)
    fact = 1
    for j in range(2, i + 1):
        fact *= j
    vfact = int_valuation(fact, par.p) * par.e
    if a.prec - vfact <= 0:
        raise InsufficientPrecision(
            f"binom needs more than v(i!) = {vfact} of headroom")
    return num.divide_exact(par.from_int(fact, a.prec))
