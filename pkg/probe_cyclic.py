"""Order-by-order series solve for the companion pair, with valuation pivoting."""
import sys, time, math
sys.path.insert(0, "src")

from crysred.padic import FieldParams, PadicElem
from crysred.errors import Obstruction
from crysred.series import SeriesRing
from crysred.linalg import Mat2
from crysred.wach import _QuotientSpace, _quotient_newton
from crysred.pairs import PhiGammaPair, check_membership


def int_poly_mul(a, b, R, mod):
    out = [0] * min(len(a) + len(b) - 1, R)
    for i, x in enumerate(a):
        if x and i < R:
            for j, y in enumerate(b):
                if y and i + j < R:
                    out[i + j] = (out[i + j] + x * y) % mod
    return out


def cyclic_recursion(par, k, ap_int, n, n_w, R, verbose=False):
    """Solve P*phi(G) = G*gamma(P) coefficient-by-coefficient in X.

    Returns (tau_coeffs, G_coeffs, min_prec_seen) with entries PadicElem at
    precision n_w minus accumulated pivot losses.  Raises Obstruction on an
    inconsistent order.
    """
    p, chi = par.p, par.chi_gamma
    pw = p ** n_w
    ap = par.from_int(ap_int, n_w)

    # integer coefficient tables mod p^n_w
    phi_row = [0] + [math.comb(p, j) for j in range(1, p + 1)]   # phi(X)
    gam_row = [0] + [math.comb(chi, j) for j in range(1, chi + 1)]  # gamma(X)
    q_row = [math.comb(p, j) for j in range(1, p + 1)]            # Q = phi/X
    phi_pows = [[1]]
    gam_pows = [[1]]
    for m in range(1, R):
        phi_pows.append(int_poly_mul(phi_pows[-1], phi_row, R, pw))
        gam_pows.append(int_poly_mul(gam_pows[-1], gam_row, R, pw))
    qk = [1]
    for _ in range(k - 1):
        qk = int_poly_mul(qk, q_row, R, pw)
    qk += [0] * (R - len(qk))

    # gamma(Q^{k-1}) coefficients: sum_m qk[m] * (gamma X)^m
    gq = [0] * R
    for m, c in enumerate(qk):
        if c:
            row = gam_pows[m]
            for j, y in enumerate(row):
                if y:
                    gq[j] = (gq[j] + c * y) % pw

    zero = par.zero(n_w)
    one = par.one(n_w)
    q0 = par.from_int(p ** (k - 1), n_w)

    # G_r as 4-lists [g00,g01,g10,g11]; tau_r scalars
    G = [[one, zero, zero, one]]
    tau = [ap]
    min_prec = n_w

    def madd(A, B):
        return [a + b for a, b in zip(A, B)]

    def mscale(A, c):
        return [a * c for a in A]

    def phiG(j):
        # coefficient j of phi(G) for the *known* orders (m <= j, m < len(G))
        acc = [zero, zero, zero, zero]
        for m in range(min(j + 1, len(G))):
            c = phi_pows[m][j] if j < len(phi_pows[m]) else 0
            if c:
                acc = madd(acc, mscale(G[m], par.from_int(c, n_w)))
        return acc

    chipow = [1]
    for _ in range(R):
        chipow.append((chipow[-1] * chi) % pw)

    t_solve = 0.0
    for r in range(1, R):
        # known part C_r of the order-r equation
        C = [zero, zero, zero, zero]
        # sum_{i+j=r} P_i*(phiG)_j  with P_0 full, P_i = [[0,0],[qk_i, tau_i]]
        for i in range(0, r + 1):
            j = r - i
            if i == 0:
                F = phiG(j)   # includes only m<=j known orders; G_r term handled apart
                # exclude unknown G_r p^r contribution (m=j=r not in G yet)
                C = madd(C, [ -F[2], -F[3],
                              q0 * F[0] + ap * F[2], q0 * F[1] + ap * F[3] ])
            else:
                qi = qk[i] if i < len(qk) else 0
                ti = tau[i] if i < len(tau) else None
                if i == r:
                    # tau_r unknown; known part only the qk_r piece
                    if qi:
                        F0 = [one, zero, zero, one]
                        C = madd(C, [zero, zero,
                                     par.from_int(qi, n_w) * F0[0],
                                     par.from_int(qi, n_w) * F0[1]])
                    continue
                F = phiG(j)
                row0 = mscale([F[0], F[1]], par.from_int(qi, n_w)) if qi else [zero, zero]
                row1 = mscale([F[2], F[3]], ti)
                C = madd(C, [zero, zero, row0[0] + row1[0], row0[1] + row1[1]])
        # - sum_{i+j=r} G_i*(gammaP)_j
        for i in range(0, r + 1):
            j = r - i
            if i == r:
                continue  # unknown -G_r P0 handled apart
            if i >= len(G):
                continue
            if j == 0:
                gp = [zero, -one, q0, ap]
            else:
                a = par.from_int(gq[j], n_w)
                # gamma(tau)_j known part: m < r only (tau_j unknown enters via chi^j when j=r, i=0)
                b = zero
                for m in range(1, min(j + 1, len(tau))):
                    c = gam_pows[m][j] if j < len(gam_pows[m]) else 0
                    if c:
                        b = b + tau[m] * par.from_int(c, n_w)
                gp = [zero, zero, a, b]
            gi = G[i]
            prod = [gi[0] * gp[0] + gi[1] * gp[2], gi[0] * gp[1] + gi[1] * gp[3],
                    gi[2] * gp[0] + gi[3] * gp[2], gi[2] * gp[1] + gi[3] * gp[3]]
            C = madd(C, [-x for x in prod])

        # assemble 4x5 system: p^r P0 Gr - Gr P0 + (1-chi^r) tau_r E22 = -C
        pr = par.from_int(pow(p, r, pw), n_w)
        one_m_chir = par.from_int((1 - chipow[r]) % pw, n_w)
        rows = [
            [zero, -q0, -pr, zero, zero, -C[0]],
            [one, -ap, zero, -pr, zero, -C[1]],
            [pr * q0, zero, pr * ap, -q0, zero, -C[2]],
            [zero, pr * q0, one, pr * ap - ap, one_m_chir, -C[3]],
        ]
        t0 = time.time()
        sol = pivoted_solve(rows, par, r)
        t_solve += time.time() - t0
        Gr = sol[:4]
        G.append(Gr)
        tau.append(sol[4])
        mp = min(x.prec for x in sol)
        if mp < min_prec:
            min_prec = mp
            if verbose:
                print(f"    order {r}: min prec now {mp}")
        if min_prec <= n:
            raise Obstruction(r, message=f"precision floor hit at order {r}")
    return tau, G, min_prec


def pivoted_solve(rows_in, par, order):
    """Solve 4 equations x 5 unknowns over O by min-valuation pivoting.

    One unknown is free per order; try each choice of the zeroed column and
    keep the consistent one with the least total pivot valuation.  Raises
    Obstruction when no choice yields an integral solution.
    """
    from crysred.errors import ExactDivisionError
    best = None
    for free in range(5):
        try:
            sol, loss = _solve_with_free(rows_in, par, order, free)
        except (ExactDivisionError, Obstruction):
            continue
        if best is None or loss < best[1]:
            best = (sol, loss)
    if best is None:
        raise Obstruction(order, message=(
            f"order-{order} system inconsistent for every gauge column"))
    return best[0]


def _solve_with_free(rows_in, par, order, free):
    nrow, ncol = 4, 5
    rows = [list(r) for r in rows_in]
    piv = []
    used_r, used_c = set(), {free}
    loss = 0
    for _ in range(nrow):
        best = None
        for i in range(nrow):
            if i in used_r:
                continue
            for j in range(ncol):
                if j in used_c:
                    continue
                v = rows[i][j].pi_valuation()
                if v is None:
                    continue
                if best is None or v < best[0]:
                    best = (v, i, j)
        if best is None:
            for i in range(nrow):
                if i in used_r:
                    continue
                if rows[i][ncol].pi_valuation() is not None:
                    raise Obstruction(order, message="inconsistent row")
            break
        v, pi_, pj = best
        used_r.add(pi_)
        used_c.add(pj)
        piv.append((pi_, pj))
        loss += v
        pe = rows[pi_][pj]
        for i in range(nrow):
            if i == pi_ or i in used_r:
                continue
            f = rows[i][pj]
            if f.pi_valuation() is None:
                continue
            ratio = f.divide_exact(pe)
            rows[i] = [a - ratio * b for a, b in zip(rows[i], rows[pi_])]
    sol = [par.zero(rows[0][0].prec) for _ in range(ncol)]
    for pi_, pj in reversed(piv):
        acc = rows[pi_][ncol]
        for j in range(ncol):
            if j != pj:
                acc = acc - rows[pi_][j] * sol[j]
        sol[pj] = acc.divide_exact(rows[pi_][pj])
    return sol, loss


def check_series_commutation(par, k, tau, G, n_check, R):
    """Direct check: P phi(G) = G gamma(P) mod (pi^n_check, X^R)."""
    ring = SeriesRing(par, n_check, x_prec=R)
    t = ring.elem([c.reduce(n_check) for c in tau])
    Gm = Mat2(*(ring.elem([G[r][e].reduce(n_check) for r in range(len(G))])
                for e in range(4)))
    q_pow = ring.one()
    for _ in range(k - 1):
        q_pow = q_pow * ring.q_poly()
    P = Mat2(ring.zero(), -ring.one(), q_pow, t)
    lhs = P * Gm.map(lambda f: f.phi())
    rhs = Gm * P.map(lambda f: f.gamma())
    d = lhs - rhs
    bad = [e.x_valuation() for e in d.entries()]
    return bad


if __name__ == "__main__":
    par = FieldParams(3)
    for (k, ap_int, n) in [(4, 3, 2), (6, 3, 2), (6, 3, 3), (8, 3, 3)]:
        R = 3 * k + 2 * k * (n + 1)
        n_w = n + 16
        t0 = time.time()
        try:
            tau, G, mp = cyclic_recursion(par, k, ap_int, n, n_w, R)
        except Obstruction as obs:
            print(f"(3,{k},{ap_int}) n={n}: recursion OBSTRUCTED: {obs}")
            continue
        dt = time.time() - t0
        bad = check_series_commutation(par, k, tau, G, n, R)
        print(f"(3,{k},{ap_int}) n={n}: recursion ok [{dt:.1f}s], min prec {mp}, "
              f"defect x-valuations {bad} (want all None/>={R})")
