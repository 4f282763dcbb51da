"""Joint quotient Newton with the relaxed shape P = [[rho,-1],[Q^{k-1}-rho*tau, tau]]."""
import sys, time
sys.path.insert(0, "src")

from crysred.padic import FieldParams, int_valuation
from crysred.errors import Obstruction
from crysred.wach import _QuotientSpace, _pow_in_ring
from crysred.linalg import SmithSolver, Mat2
from crysred.pairs import PhiGammaPair, check_membership, hodge_weights
from crysred.series import SeriesRing


def newton_rho(space, tau, rho, G):
    """Drive the residual to zero; unknowns tau, rho (consts pinned), G."""
    p, n = space.params.p, space.n
    pk, pw = space.pk, space.P
    zero = [0] * pk
    m_one = [pw - 1] + [0] * (pk - 1)
    qk1 = space.vec(_pow_in_ring(space.ring.q_poly(), space.k - 1))

    def p_mat(tau_v, rho_v):
        beta = space.sub(qk1, space.mul(rho_v, tau_v))
        return (rho_v, m_one, beta, tau_v)

    def residual(tau_v, rho_v, G_m):
        P_mat = p_mat(tau_v, rho_v)
        lhs = space.mat_mul(P_mat, space.mat_phi(G_m))
        rhs = space.mat_mul(G_m, space.mat_gamma(P_mat))
        flat = []
        for u, v in zip(lhs, rhs):
            flat.extend(space.sub(u, v))
        return flat

    def differential(tau_v, rho_v, G_m):
        P_mat = p_mat(tau_v, rho_v)
        phi_G = space.mat_phi(G_m)
        gam_P = space.mat_gamma(P_mat)
        cols = []
        # G-directions
        for e in range(4):
            r_, c_ = divmod(e, 2)
            for i in range(1, pk):
                d = [zero, zero, zero, zero]
                for u in (0, 1):
                    d[2 * u + c_] = space.mul(P_mat[2 * u + r_], space.phi_x[i])
                for v in (0, 1):
                    d[2 * r_ + v] = space.sub(d[2 * r_ + v],
                                              space.shift(gam_P[2 * c_ + v], i))
                cols.append(d[0] + d[1] + d[2] + d[3])
        # tau-directions: dP = [[0,0],[-rho*X^i, X^i]]
        for i in range(1, pk):
            xi_rho = space.shift(rho_v, i)
            dP = (zero, zero, [(-v) % pw for v in xi_rho], None)  # [1][0], [1][1]=X^i
            d = [zero, zero, zero, zero]
            # dP * phi(G): row 1 = dP10*phiG_row0? assemble directly
            dp10 = [(-v) % pw for v in xi_rho]
            for v in (0, 1):
                d[2 + v] = space.add(space.mul(dp10, phi_G[v]),
                                     space.shift(phi_G[2 + v], i))
            # - G * gamma(dP): gamma(dP) = [[0,0],[gamma(-rho X^i), gamma(X^i)]]
            g_dp10 = space.subst(dp10, space.gamma_x)
            g_xi = space.gamma_x[i]
            for u in (0, 1):
                t0 = space.mul(G_m[2 * u + 1], g_dp10)
                t1 = space.mul(G_m[2 * u + 1], g_xi)
                d[2 * u] = space.sub(d[2 * u], t0)
                d[2 * u + 1] = space.sub(d[2 * u + 1], t1)
            cols.append(d[0] + d[1] + d[2] + d[3])
        # rho-directions: dP = [[X^i, 0],[-tau*X^i, 0]]
        for i in range(1, pk):
            xi_tau = space.shift(tau_v, i)
            dp00 = space.shift([1] + [0] * (pk - 1), i)
            dp10 = [(-v) % pw for v in xi_tau]
            d = [zero, zero, zero, zero]
            for v in (0, 1):
                d[v] = space.mul(dp00, phi_G[v])
                d[2 + v] = space.mul(dp10, phi_G[v])
            g_dp00 = space.gamma_x[i]
            g_dp10 = space.subst(dp10, space.gamma_x)
            for u in (0, 1):
                d[2 * u] = space.sub(d[2 * u],
                                     space.add(space.mul(G_m[2 * u], g_dp00),
                                               space.mul(G_m[2 * u + 1], g_dp10)))
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
        for i in range(1, pk):
            if sol[idx]:
                rho[i] = (rho[i] + sol[idx]) % pw
            idx += 1

    def score(rvec):
        total = 0
        for v in rvec:
            total += n if v == 0 else int_valuation(v, p)
        return total

    solver = SmithSolver(differential(tau, rho, G), p, n)
    max_passes = 8 * pk + 16 * n + 48
    refreshes = 2 + n
    best, stalls, passes = -1, 0, 0
    while True:
        rvec = residual(tau, rho, G)
        if not any(rvec):
            return passes
        if passes >= max_passes:
            raise Obstruction(passes, message=f"score {score(rvec)}/{4*pk*n}")
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
                    f"residual left the image (score {sc}/{4*pk*n})"))
            refreshes -= 1
            stalls = 0
            solver = SmithSolver(differential(tau, rho, G), p, n)
            sol = solver.solve([-v % pw for v in rvec])
            if sol is None:
                raise Obstruction(passes, message=(
                    f"refreshed image misses residual (score {sc}/{4*pk*n})"))
        apply(sol)
        passes += 1


def solve_rho(par, k, ap_int, n, ladder=True):
    p = par.p
    pk = p * k

    def start(pw):
        t = [0] * pk
        t[0] = ap_int % pw
        return (t, [0] * pk,
                [[1] + [0] * (pk - 1), [0] * pk, [0] * pk, [1] + [0] * (pk - 1)])

    space = _QuotientSpace(par, k, n)
    tau, rho, G = start(space.P)
    try:
        passes = newton_rho(space, tau, rho, G)
        return space, tau, rho, G, passes, False
    except Obstruction:
        if not ladder or n == 1:
            raise
    tau = rho = G = None
    total = 0
    for m in range(1, n + 1):
        stage = _QuotientSpace(par, k, m) if m < n else space
        if tau is None:
            tau, rho, G = start(stage.P)
        else:
            tau[0] = ap_int % stage.P
        total += newton_rho(stage, tau, rho, G)
    return space, tau, rho, G, total, True


if __name__ == "__main__":
    par = FieldParams(3)
    for (k, ap_int, n) in [(4, 3, 2), (6, 3, 2), (6, 3, 3), (6, 3, 4),
                           (8, 3, 3), (8, 3, 4), (8, 3, 5)]:
        t0 = time.time()
        try:
            space, tau, rho, G, passes, used_ladder = solve_rho(par, k, ap_int, n)
        except Obstruction as obs:
            print(f"(3,{k},{ap_int}) n={n}: OBSTRUCTED: {obs}")
            continue
        dt = time.time() - t0
        # package and certify
        ring = space.ring
        qk1 = _pow_in_ring(ring.q_poly(), k - 1).reduce_pi(n)
        rho_s = ring.from_ints(rho)
        tau_s = ring.from_ints(tau)
        beta = qk1 - rho_s * tau_s
        P = Mat2(rho_s, -ring.one(), beta, tau_s)
        Gm = Mat2(*(ring.from_ints(v) for v in G))
        ap = par.from_int(ap_int, n)
        pair = PhiGammaPair(P=P, G=Gm, k=k, base="quotient")
        rep = check_membership(pair, ap)
        hw = hodge_weights(P, k)
        rho_zero = all(v == 0 for v in rho)
        print(f"(3,{k},{ap_int}) n={n}: solved [{dt:.1f}s, {passes} passes"
              f"{', ladder' if used_ladder else ''}], membership {rep.verdict}"
              f" {rep.flags if not rep.verdict else ''}, weights {hw},"
              f" rho{'=0' if rho_zero else '!=0'}")
