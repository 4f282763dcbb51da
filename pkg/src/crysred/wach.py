"""Construction and deformation of certified integral seed pairs.

A *seed* for (k, a_p) is a pair (P, G) over the weight-k quotient ring that
passes all four membership conditions, with P in companion form (so the
characteristic data det = Q^{k-1}, Tr(0) = a_p hold by construction).  Seeds
are found by solving the commutation equation P*phi(G) = G*gamma(P) with
G(0) = Id as one affine-linear system over O/pi^n.

Deformation moves a seed from trace a_p to a nearby a'_p without re-solving:
a constant shift H0 with Tr(H0*P(0)) = a'_p - a_p and det(Id+H0) = 1 is
extended to H with H*G = G*gamma(H) mod X^k, the new phi-matrix is
(Id+H)*P, and the gamma-matrix is repaired order by order.  The admissible
distance is controlled by the eigenvalue gap of P(0) and the cumulative
valuation of (1-chi), ..., (1-chi^{k-1}).
"""

from dataclasses import dataclass, field

from fractions import Fraction

from .errors import (
    ExactDivisionError,
    InsufficientPrecision,
    Obstruction,
    PrecisionExhausted,
    PreconditionDefect,
    RadiusViolation,
    RepeatedEigenvalue,
    SeedNotFound,
    UnsupportedExtension,
)
from .linalg import Mat2, SmithSolver
from .padic import FieldParams, PadicElem, int_valuation
from .pairs import (
    MembershipReport,
    PhiGammaPair,
    check_membership,
    extend_gamma_matrix,
    hodge_weights,
    mat_identity_in,
    _pow_in_ring,
)
from .series import (
    ResidueField,
    SeriesRing,
    TruncSeries,
    frobenius,
    gamma_act,
    solve_phi_ratio,
    sqrt_series,
    to_quotient,
    unit_inverse,
)


# ---------------------------------------------------------------------------
# elementary calculators


def twist_loss(p: int, k: int) -> int:
    """Sum of floor(k / (p^{m-1}(p-1))) over m >= 1.

    Equals the p-valuation of (1-chi)(1-chi^2)...(1-chi^k) for a generator
    chi of (Z/p^2)^*, i.e. the total pi-precision spent by the divisions in
    extend_twist_matrix.
    """
    if k < 0:
        raise ValueError("twist_loss wants k >= 0")
    total, step = 0, p - 1
    while step <= k:
        total += k // step
        step *= p
    return total


def eigenvalue_gap(k: int, ap: PadicElem) -> int:
    """pi-valuation of a_p^2 - 4p^{k-1} (the squared eigenvalue gap of P(0))."""
    par = ap.params
    disc = ap * ap - par.from_int(4 * par.p ** (k - 1), ap.prec)
    v = disc.pi_valuation()
    if v is None:
        raise RepeatedEigenvalue(
            f"a_p^2 - 4p^{k - 1} vanishes at working precision O(pi^{disc.prec})")
    return v


def constancy_radius(k: int, ap: PadicElem) -> int:
    """Deformations with v_pi(a_p - a'_p) >= this keep the seed deformable
    (strict inequality additionally pins the residue pair entrywise)."""
    par = ap.params
    return eigenvalue_gap(k, ap) + par.e * twist_loss(par.p, k - 1)


def _is_p_power(q: Fraction, p: int) -> bool:
    if q <= 0:
        return False
    for part in (q.numerator, q.denominator):
        while part % p == 0:
            part //= p
        if part != 1:
            return False
    return True


def weight_constancy_applicable(p: int, k: int, ap) -> bool:
    """Whether the large-weight constancy criterion applies to (k, a_p).

    Takes a_p as an exact rational; requires k > 3*v_p(a_p) + loss + 1 and
    that a_p^2 is not exactly a power of p.  The modulus 'm' this guarantees
    is not effective, so only the predicate is offered.
    """
    ap = Fraction(ap)
    if ap == 0:
        return False
    v = 0
    num, den = ap.numerator, ap.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    if not k > 3 * v + twist_loss(p, k - 1) + 1:
        return False
    return not _is_p_power(ap * ap, p)


def trianguline_trace(y: PadicElem, k: int) -> PadicElem:
    """The trace y + p^{k-1}/y of the crystalline point with parameter y."""
    par = y.params
    v = y.pi_valuation()
    if v is None:
        raise PreconditionDefect("parameter y vanishes at working precision")
    if v >= par.e * (k - 1):
        raise PreconditionDefect(
            f"trianguline trace wants v(y) < k-1 (got pi-valuation {v})")
    num = par.from_int(par.p ** (k - 1), y.prec + v)
    return y + num.divide_exact(y)


# ---------------------------------------------------------------------------
# eigenvalue splitting (quadratic extensions only)


def _brute_residue_sqrt(rf, target: int):
    for t in range(rf.card):
        if rf.mul(t, t) == target:
            return t
    return None


def _sqrt_unit(u: PadicElem, r0: int) -> PadicElem:
    """Newton square root of a unit u from a residue-level initial value."""
    par = u.params
    s = par.from_int(r0, u.prec) if par.f == 1 else PadicElem(
        par, u.prec, (r0 % par.p, r0 // par.p))
    inv2 = par.from_int(2, u.prec).inv()
    for _ in range(2 * u.prec + 4):
        s_new = (s + u * s.inv()) * inv2
        if s_new == s:
            return s
        s = s_new
    raise InsufficientPrecision("unit square root failed to stabilize")


def split_eigenvalues(k: int, ap: PadicElem):
    """Diagonalize P(0) = [[0,-1],[p^{k-1}, a_p]].

    Returns (ext, Y, lam, mu) where ext is the (possibly quadratic) field the
    eigenvalues live in, Y = [[-1,-1],[lam,mu]] has integral columns, and
    Y^{-1} P(0) Y = diag(lam, mu).  det(Y) = lam - mu is the eigenvalue gap.
    """
    par = ap.params
    if par.e != 1 or par.f != 1:
        raise UnsupportedExtension("eigenvalue splitting starts from (e,f)=(1,1)")
    p = par.p
    disc = ap * ap - par.from_int(4 * p ** (k - 1), ap.prec)
    v = disc.pi_valuation()
    if v is None:
        raise RepeatedEigenvalue(
            f"a_p^2 - 4p^{k - 1} vanishes at working precision O(pi^{disc.prec})")
    unit = disc.shift_down(v)
    res = unit.residue()
    if v % 2 == 0:
        r0 = _brute_residue_sqrt(ResidueField(p), res)
        if r0 is not None:
            ext = par
            delta = _sqrt_unit(unit, r0) * par.from_int(p ** (v // 2), unit.prec)
            ap_e = ap
        else:
            ext = FieldParams(p, 1, 2)
            u2 = ext.embed(unit)
            r0 = _brute_residue_sqrt(ResidueField.of(ext), res)
            delta = _sqrt_unit(u2, r0) * ext.from_int(p ** (v // 2), u2.prec)
            ap_e = ext.embed(ap)
    else:
        # with pi^2 = p*c and c the residue of the unit part, unit/c^v has
        # square residue res^{1-v} (1-v even), so delta = pi^v*(unit/c^v)^{1/2}
        c = res
        ext = FieldParams(p, 2, 1, eisenstein_unit=c)
        u2 = ext.embed(unit)
        piv = PadicElem(ext, u2.prec + v, (0, 1)) ** v
        cpow = ext.from_int(pow(c, v, p ** u2.prec), u2.prec)
        r0 = _brute_residue_sqrt(ResidueField(p),
                                 (res * pow(c, -v, p)) % p)
        t = _sqrt_unit(u2 * cpow.inv(), r0)
        delta = piv * t
        ap_e = ext.embed(ap)
    inv2 = ext.from_int(2, delta.prec).inv()
    lam = (ap_e + delta) * inv2
    mu = (ap_e - delta) * inv2
    mo = ext.one(lam.prec)
    Y = Mat2(-mo, -mo, lam, mu)
    return ext, Y, lam, mu


# ---------------------------------------------------------------------------
# the deformation pipeline


def trace_shift_matrix(k: int, ap: PadicElem, eps: PadicElem) -> Mat2:
    """Constant H0 with det(Id + H0) = 1 and Tr(H0 * P(0)) = eps.

    On the eigenvector frame of P(0) the shift is y * [[1,-1],[1,-1]] with
    y = eps / (lam - mu); conjugating back collapses to a closed form over
    the base field, so no eigenvalue extension is ever constructed here.
    """
    par = ap.params
    gap = eigenvalue_gap(k, ap)
    loss = par.e * twist_loss(par.p, k - 1)
    veps = eps.pi_valuation()
    if veps is None:
        z = par.zero(eps.prec)
        return Mat2(z, z, z, z)
    if veps < gap + loss:
        raise RadiusViolation(
            f"v(eps) = {veps} < {gap} + {loss} = gap + twist loss")
    disc = ap * ap - par.from_int(4 * par.p ** (k - 1), ap.prec)
    y = eps.divide_exact(disc)
    two = par.from_int(2, y.prec)
    four = par.from_int(4, y.prec)
    return Mat2(-(two * ap * y), -(four * y), ap * ap * y, two * ap * y)


def _coeff_matrices(G: Mat2, k: int):
    return [G.map(lambda f: f.coeff(j)) for j in range(k)]


def extend_twist_matrix(G: Mat2, H0: Mat2, k: int) -> list:
    """Extend a constant shift H0 to H with H*G = G*gamma(H) mod X^k.

    Returns the coefficient matrices [H_0, ..., H_{k-1}].  Order r divides
    by 1 - chi^r, spending twist_loss(p, k-1) pi-digits in total; raises
    PrecisionExhausted if the inputs cannot absorb that.
    """
    ring = G.a.ring
    par = ring.params
    loss = par.e * twist_loss(par.p, k - 1)
    vals = [x.pi_valuation() for x in H0.entries()]
    h0v = min((v for v in vals if v is not None), default=None)
    if h0v is not None and h0v < loss:
        raise RadiusViolation(f"H0 has valuation {h0v} < twist loss {loss}")
    Gc = _coeff_matrices(G, k)
    small = SeriesRing(par, ring.pi_prec, x_prec=max(k, 2))
    tab = small.subst_powers(par.chi_gamma)
    H = [H0]
    for r in range(1, k):
        total = None
        for jj in range(r + 1):
            m = r - jj
            for i in range(min(m, r - 1) + 1):
                c = tab[i].coeff(m)
                if c.is_zero():
                    continue
                term = (Gc[jj] * H[i]).map(lambda x: x * c)
                total = term if total is None else total + term
        for i in range(r):
            total = total - H[i] * Gc[r - i]
        unit = par.from_int(1 - pow(par.chi_gamma, r), ring.pi_prec + loss + 2)
        try:
            Hr = total.map(lambda x: x.divide_exact(unit))
        except (ExactDivisionError, InsufficientPrecision) as exc:
            raise PrecisionExhausted(
                f"order-{r} division by 1 - chi^{r}: {exc}") from exc
        H.append(Hr)
    return H


def normalize_determinant(P: Mat2, G: Mat2, k: int, u: TruncSeries):
    """Rescale the basis by a scalar v with (phi(v)/v)^2 = u^{-1}.

    ``u`` must be det(P)/Q^{k-1}, a unit series with u(0) = 1 exactly (the
    caller knows it by construction).  Rescaling multiplies P by phi(v)/v
    and G by gamma(v)/v, which preserves commutation, the unit-constant
    condition and the constant of the trace, and makes det(P) = Q^{k-1}.
    """
    ring = P.a.ring
    par = ring.params
    if not (u.constant() - par.one(u.constant().prec)).is_zero():
        raise PreconditionDefect("determinant unit must be 1 mod X")
    w = solve_phi_ratio(unit_inverse(u))
    v = sqrt_series(w)
    v_inv = unit_inverse(v)
    ratio_phi = frobenius(v) * v_inv
    ratio_gam = gamma_act(v) * v_inv
    return (P.map(lambda f: f * ratio_phi), G.map(lambda f: f * ratio_gam))


# ---------------------------------------------------------------------------
# seeds


@dataclass
class PrecisionPlan:
    """Where the pi-digits go for a deformation at output level n_out."""
    n_out: int
    gap: int
    twist: int
    n_build: int
    x_carrier: int


@dataclass
class WachSeed:
    k: int
    ap: PadicElem
    n: int
    pair: PhiGammaPair
    report: MembershipReport
    log: list = field(default_factory=list)


def companion_matrix(ring: SeriesRing, k: int, ap: PadicElem) -> Mat2:
    """P = [[0, -1], [Q^{k-1}, a_p]]; det = Q^{k-1} and Tr(0) = a_p exactly."""
    q_pow = _pow_in_ring(ring.q_poly(), k - 1)
    return Mat2(ring.zero(), -ring.one(), q_pow,
                ring.constant(ap.reduce(min(ap.prec, ring.pi_prec))))


class _QuotientSpace:
    """Raw integer-vector arithmetic in (Z/p^n)[X]/(phi(X)^k).

    The seed iteration spends all its time multiplying in this ring, so
    elements are held as plain coefficient lists mod p^n; TruncSeries and
    Mat2 wrappers only appear at the certification boundary.
    """

    def __init__(self, params: FieldParams, k: int, n: int):
        self.params, self.k, self.n = params, k, n
        p = params.p
        self.pk = p * k
        self.P = p ** n
        self.ring = SeriesRing(params, n, modulus_k=k)
        mods = self.ring.modulus_ints()
        self.mod_tail = [(i, m % self.P) for i, m in enumerate(mods[:-1])
                         if m % self.P]
        self.phi_x = [self.vec(f) for f in self.ring.subst_powers(p)]
        self.gamma_x = [self.vec(f)
                        for f in self.ring.subst_powers(params.chi_gamma)]

    def vec(self, f: TruncSeries):
        return [f.coeff(j).vec[0] % self.P for j in range(self.pk)]

    def _reduce(self, out):
        pk = self.pk
        for j in range(len(out) - 1, pk - 1, -1):
            c = out[j]
            if c:
                base = j - pk
                for i, m in self.mod_tail:
                    out[base + i] -= c * m
        del out[pk:]
        return out

    def mul(self, a, b):
        out = [0] * (2 * self.pk - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        out[i + j] += x * y
        return [v % self.P for v in self._reduce(out)]

    def shift(self, a, i):
        """a * X^i, reduced."""
        return [v % self.P for v in self._reduce([0] * i + list(a))]

    def add(self, a, b):
        return [(x + y) % self.P for x, y in zip(a, b)]

    def sub(self, a, b):
        return [(x - y) % self.P for x, y in zip(a, b)]

    def subst(self, f, table):
        out = [0] * self.pk
        for i, c in enumerate(f):
            if c:
                row = table[i]
                for j, y in enumerate(row):
                    if y:
                        out[j] += c * y
        return [v % self.P for v in out]

    def mat_mul(self, A, B):
        a, b, c, d = A
        e, f, g, h = B
        return (self.add(self.mul(a, e), self.mul(b, g)),
                self.add(self.mul(a, f), self.mul(b, h)),
                self.add(self.mul(c, e), self.mul(d, g)),
                self.add(self.mul(c, f), self.mul(d, h)))

    def mat_phi(self, A):
        return tuple(self.subst(x, self.phi_x) for x in A)

    def mat_gamma(self, A):
        return tuple(self.subst(x, self.gamma_x) for x in A)


def _quotient_newton(space: _QuotientSpace, tau, G):
    """Drive the commutation residual to zero at the space's precision.

    tau and G are raw coefficient vectors in `space`, mutated in place;
    their pinned constants -- tau(0) = a_p, G(0) = Id -- are never touched
    because every update direction starts at order 1.  The differential at
    the starting point is Smith-factorized once and reused across passes,
    re-frozen at the current point if the iteration stops making progress.
    Returns (passes, refreshes used); raises Obstruction when the residual
    cannot be cleared.
    """
    p, n = space.params.p, space.n
    pk, pw = space.pk, space.P
    zero = [0] * pk
    m_one = [pw - 1] + [0] * (pk - 1)
    qk1 = space.vec(_pow_in_ring(space.ring.q_poly(), space.k - 1))

    def residual(tau_vec, G_mat):
        P_mat = (zero, m_one, qk1, tau_vec)
        lhs = space.mat_mul(P_mat, space.mat_phi(G_mat))
        rhs = space.mat_mul(G_mat, space.mat_gamma(P_mat))
        flat = []
        for u, v in zip(lhs, rhs):
            flat.extend(space.sub(u, v))
        return flat

    def differential(tau_vec, G_mat):
        """Rows of dR at (tau, G); columns ordered G-(entry, order), tau-order.

        In the direction G += E_rc*X^i the residual moves by
        P*E_rc*phi(X^i) - E_rc*gamma(P)*X^i; in the direction
        tau += X^i it moves by E_22*phi(G)*X^i - G*E_22*gamma(X^i).
        """
        P_mat = (zero, m_one, qk1, tau_vec)
        phi_G = space.mat_phi(G_mat)
        gam_P = space.mat_gamma(P_mat)
        cols = []
        for e in range(4):
            r_, c_ = divmod(e, 2)
            for i in range(1, pk):
                d = [zero, zero, zero, zero]
                for u in (0, 1):
                    d[2 * u + c_] = space.mul(P_mat[2 * u + r_],
                                              space.phi_x[i])
                for v in (0, 1):
                    d[2 * r_ + v] = space.sub(d[2 * r_ + v],
                                              space.shift(gam_P[2 * c_ + v], i))
                cols.append(d[0] + d[1] + d[2] + d[3])
        for i in range(1, pk):
            d = [zero, zero, zero, zero]
            for v in (0, 1):
                d[2 + v] = space.shift(phi_G[2 + v], i)
            for u in (0, 1):
                d[2 * u + 1] = space.sub(d[2 * u + 1],
                                         space.mul(G_mat[2 * u + 1],
                                                   space.gamma_x[i]))
            cols.append(d[0] + d[1] + d[2] + d[3])
        return [[col[r] for col in cols] for r in range(4 * pk)]

    def apply(sol):
        idx = 0
        for e in range(4):
            Ge = G[e]
            for i in range(1, pk):
                if sol[idx]:
                    Ge[i] = (Ge[i] + sol[idx]) % pw
                idx += 1
        for i in range(1, pk):
            if sol[idx]:
                tau[i] = (tau[i] + sol[idx]) % pw
            idx += 1

    def score(rvec):
        """pi-digits of the residual already cleared; 4*pk*n means done."""
        total = 0
        for v in rvec:
            total += n if v == 0 else int_valuation(v, p)
        return total

    solver = SmithSolver(differential(tau, G), p, n)
    max_passes = 8 * pk + 16 * n + 48
    refreshes = 2 + n
    best, stalls, passes = -1, 0, 0
    while True:
        rvec = residual(tau, G)
        if not any(rvec):
            return passes, 2 + n - refreshes
        if passes >= max_passes:
            raise Obstruction(passes, message=(
                f"residual still nonzero after {passes} passes "
                f"(score {score(rvec)}/{4 * pk * n})"))
        sc = score(rvec)
        if sc > best:
            best, stalls = sc, 0
        else:
            stalls += 1
        sol = None
        if stalls < 5:
            sol = solver.solve([-v % pw for v in rvec])
        if sol is None:
            if refreshes == 0:
                raise Obstruction(passes, message=(
                    f"residual left the image of the differential "
                    f"(score {sc}/{4 * pk * n})"))
            refreshes -= 1
            stalls = 0
            solver = SmithSolver(differential(tau, G), p, n)
            sol = solver.solve([-v % pw for v in rvec])
            if sol is None:
                raise Obstruction(passes, message=(
                    f"residual not in the image of the refreshed "
                    f"differential (score {sc}/{4 * pk * n})"))
        apply(sol)
        passes += 1


def solve_pair(params: FieldParams, k: int, ap: PadicElem, n: int, log=None):
    """Solve the commutation equation natively in the weight-k quotient.

    The pair is parametrized by the companion shape P = [[0, -1],
    [Q^{k-1}, tau]] -- so det P = Q^{k-1} and Tr P = tau identically -- with
    tau(0) = a_p and G(0) = Id pinned.  The remaining unknowns (higher
    coefficients of tau and of G) must zero the bilinear residual

        R(G, tau) = P*phi(G) - G*gamma(P)   in   M2(A),

    where A = (O/pi^n)[X]/phi(X)^k is the ring membership is decided in.
    Every solve is exact mod p^n; no working-precision margin is needed
    because a certified quotient pair extends to any X-precision afterwards
    (the extension recursion is unipotent from order k on).

    The descent starts from the pinned point (a_p, Id), which is close
    enough to a solution for most (k, a_p).  When it stalls there, the
    solve restarts as a precision ladder -- solve mod pi, lift, re-solve
    mod pi^2, and so on -- so that every stage starts one pi-digit away
    from a solution, where a single correction pass lands exactly.

    Returns (P, G) as matrices over the quotient ring.  Raises Obstruction
    when the residual cannot be driven to zero even along the ladder.
    """
    if params.e != 1 or params.f != 1:
        raise UnsupportedExtension(
            "seed solving is implemented over the (1,1) base field")
    space = _QuotientSpace(params, k, n)
    pk = space.pk

    def pinned_start(pw):
        t = [0] * pk
        t[0] = ap.vec[0] % pw
        return t, [[1] + [0] * (pk - 1), [0] * pk, [0] * pk,
                   [1] + [0] * (pk - 1)]

    tau, G = pinned_start(space.P)
    note = None
    try:
        passes, refreshed = _quotient_newton(space, tau, G)
    except Obstruction:
        if n == 1:
            raise
        tau = G = None
        passes = 0
        for m in range(1, n + 1):
            stage = _QuotientSpace(params, k, m) if m < n else space
            if tau is None:
                tau, G = pinned_start(stage.P)
            else:
                # lifted digits of a_p enter the trace pin one stage at a time
                tau[0] = ap.vec[0] % stage.P
            passes += _quotient_newton(stage, tau, G)[0]
        note = (f"quotient solve at pi^{n}: pinned start stalled; "
                f"precision ladder cleared it in {passes} passes")
    else:
        note = (f"quotient solve at pi^{n}: {passes} passes, "
                f"{refreshed} differential refreshes")
    ring = space.ring
    # products of low-valuation coefficients (Q^{k-1}) carry precision beyond
    # n; the pair is only certified mod pi^n, so cap before handing it out
    q_pow = _pow_in_ring(ring.q_poly(), k - 1)
    P_mat = Mat2(ring.zero(), -ring.one(), q_pow.reduce_pi(n),
                 ring.from_ints(tau))
    G_mat = Mat2(*(ring.from_ints(v) for v in G))
    if log is not None:
        log.append(note)
    return P_mat, G_mat


def repair_gamma_quotient(P: Mat2, G: Mat2) -> Mat2:
    """Adjust G (above its pinned constant) so P*phi(G) = G*gamma(P) exactly.

    For fixed P the commutation residual is linear in G, so in the quotient
    ring this is a single exact solve mod p^n -- used after a deformation,
    whose twisted pair commutes mod X^k but not yet mod phi(X)^k.  Raises
    Obstruction when no adjustment exists at the ring's precision.
    """
    ring = P.a.ring
    params = ring.params
    if params.e != 1 or params.f != 1:
        raise UnsupportedExtension(
            "quotient repair is implemented over the (1,1) base field")
    space = _QuotientSpace(params, ring.modulus_k, ring.pi_prec)
    pk, pw = space.pk, space.P
    zero = [0] * pk
    P_v = tuple(space.vec(e) for e in P.entries())
    G_v = [space.vec(e) for e in G.entries()]
    gam_P = space.mat_gamma(P_v)

    def residual(G_mat):
        lhs = space.mat_mul(P_v, space.mat_phi(G_mat))
        rhs = space.mat_mul(G_mat, gam_P)
        flat = []
        for u, v in zip(lhs, rhs):
            flat.extend(space.sub(u, v))
        return flat

    rvec = residual(G_v)
    if any(rvec):
        cols = []
        for e in range(4):
            r_, c_ = divmod(e, 2)
            for i in range(1, pk):
                d = [zero, zero, zero, zero]
                for u in (0, 1):
                    d[2 * u + c_] = space.mul(P_v[2 * u + r_], space.phi_x[i])
                for v in (0, 1):
                    d[2 * r_ + v] = space.sub(d[2 * r_ + v],
                                              space.shift(gam_P[2 * c_ + v], i))
                cols.append(d[0] + d[1] + d[2] + d[3])
        rows = [[col[r] for col in cols] for r in range(4 * pk)]
        sol = SmithSolver(rows, params.p, ring.pi_prec).solve(
            [-v % pw for v in rvec])
        if sol is None:
            raise Obstruction(0, message=(
                "no gamma-matrix adjustment restores commutation "
                f"at pi^{ring.pi_prec}"))
        idx = 0
        for e in range(4):
            Ge = G_v[e]
            for i in range(1, pk):
                if sol[idx]:
                    Ge[i] = (Ge[i] + sol[idx]) % pw
                idx += 1
        if any(residual(G_v)):
            raise Obstruction(0, message="gamma-matrix repair did not close")
    return Mat2(*(ring.from_ints(v) for v in G_v))


def build_seed(params: FieldParams, k: int, ap: PadicElem, n: int,
               store=None) -> WachSeed:
    """Construct a certified seed pair for (k, a_p) at pi-precision n.

    Strategy: cache lookup, then the companion-shape quotient solve with
    free higher trace coefficients.  Raises SeedNotFound with the
    obstruction log.
    """
    if k < 2:
        raise PreconditionDefect("weight must be at least 2")
    vap = ap.pi_valuation()
    if vap is None or vap < 1:
        raise PreconditionDefect("the trace must lie in the maximal ideal")
    if ap.prec < n:
        raise InsufficientPrecision(f"a_p carries O(pi^{ap.prec}), need {n}")
    log = []
    if store is not None:
        cached = store.get(params, k, ap, n)
        if cached is not None:
            report = check_membership(cached, ap)
            if report.verdict:
                return WachSeed(k, ap, n, cached, report, ["cache hit"])
            log.append("cache entry failed re-verification; rebuilding")
    try:
        P, G = solve_pair(params, k, ap, n, log)
    except Obstruction as obs:
        log.append(str(obs))
        raise SeedNotFound(
            f"quotient solve for k={k} at pi^{n} gave up: {obs}", log) from obs
    pair = PhiGammaPair(P=P, G=G, k=k, base="integral")
    report = check_membership(pair, ap)
    if not report.verdict:
        flags = (report.commutation, report.unit_constant, report.char_poly,
                 report.gamma_product)
        log.append(f"membership flags {flags}")
        raise SeedNotFound(
            f"candidate pair for k={k}, n={n} failed certification", log)
    weights = hodge_weights(P, k)
    if weights != [0, k - 1]:
        raise SeedNotFound(f"unexpected weights {weights}", log)
    seed = WachSeed(k, ap, n, pair, report, log)
    if store is not None:
        store.put(params, k, ap, n, pair)
    return seed


def deform_trace(seed: WachSeed, ap_new: PadicElem,
                 n_out: int | None = None) -> WachSeed:
    """Move a seed from trace a_p to a'_p inside the constancy radius.

    Builds P' = (Id+H)P from the extended trace shift, repairs the
    gamma-matrix order by order, renormalizes the determinant, and
    re-certifies.  When the radius inequality is strict the output pair is
    congruent to the input pair entrywise mod pi (checked by the caller's
    tests, relied on by the congruence theorem).
    """
    pair = seed.pair
    ring = pair.ring
    par = ring.params
    k = seed.k
    p = par.p
    eps = ap_new - seed.ap
    veps = eps.pi_valuation()
    if veps is None:
        out = seed.n if n_out is None else n_out
        if out > min(seed.n, eps.prec):
            raise InsufficientPrecision(
                f"traces agree to O(pi^{eps.prec}); cannot certify pi^{out}")
        return WachSeed(k, ap_new, out, pair, seed.report,
                        seed.log + ["identical trace at working precision"])
    gap = eigenvalue_gap(k, seed.ap)
    loss = par.e * twist_loss(p, k - 1)
    if veps < gap + loss:
        raise RadiusViolation(
            f"v(a_p - a'_p) = {veps} below the radius {gap} + {loss}")
    if n_out is None:
        n_out = seed.n - gap - loss
    if n_out < 1:
        raise PrecisionExhausted(
            f"seed level {seed.n} cannot absorb gap {gap} + twist {loss}")
    if eps.prec < n_out + gap + loss or seed.n < n_out + gap + loss:
        raise InsufficientPrecision(
            f"need the trace shift to O(pi^{n_out + gap + loss}) "
            f"for output level {n_out}")
    pk = p * k
    x_carrier = pk + (-(-n_out // par.e)) * (pk - k)
    plan = PrecisionPlan(n_out=n_out, gap=gap, twist=loss,
                         n_build=seed.n, x_carrier=x_carrier)

    H0 = trace_shift_matrix(k, seed.ap, eps)
    H = extend_twist_matrix(pair.G, H0, k)
    log = seed.log + [
        f"deformed by eps with v(eps)={veps} (radius {gap}+{loss})",
        f"plan {plan}",
    ]

    carrier = SeriesRing(par, seed.n, x_prec=x_carrier)
    lift = lambda M: M.map(lambda f: carrier.elem(list(f.coeffs)))
    P_c, G_c = lift(pair.P), lift(pair.G)
    h_entries = [carrier.elem([H[j].entries()[e] for j in range(k)])
                 for e in range(4)]
    H_c = Mat2(*h_entries)
    ident = mat_identity_in(carrier)
    P_new = (ident + H_c) * P_c
    u = (ident + H_c).det()
    P_new, G_new = normalize_determinant(P_new, G_c, k, u)

    # the twisted pair commutes mod X^k; closing it mod phi^k is a single
    # exact linear solve in the quotient, where membership is decided
    quot = SeriesRing(par, n_out, modulus_k=k)
    conv = lambda M: M.map(lambda f: to_quotient(f, quot, n_out))
    P_q, G_q = conv(P_new), conv(G_new)
    try:
        G_q = repair_gamma_quotient(P_q, G_q)
    except Obstruction as obs:
        log.append(str(obs))
        raise SeedNotFound(
            f"deformation to the shifted trace failed at pi^{n_out}",
            log) from obs
    pair2 = PhiGammaPair(P=P_q, G=G_q, k=k, base="integral")
    report = check_membership(pair2, ap_new.reduce(n_out))
    if not report.verdict:
        flags = (report.commutation, report.unit_constant, report.char_poly,
                 report.gamma_product)
        raise SeedNotFound(
            f"deformed pair failed certification at pi^{n_out}: {flags}", log)
    return WachSeed(k, ap_new.reduce(n_out), n_out, pair2, report, log)
