"""2x2 matrices over arbitrary coefficient rings, and linear solvers.

Three solver flavours, matched to where they are used:

* :func:`solve_zmod` -- systems over Z/p^M, diagonalized with pivots of
  minimal p-adic valuation so every quotient taken is exact.  This is the
  engine behind the order-by-order commutation solves, in the
  unramified-coefficient case where O/pi^n = Z/p^n.

* :func:`solve_residue` -- systems over GF(p^f), used by the residue-side
  completion and matching solves.  f = 1 goes through numpy.

* :func:`solve_padic` -- small systems directly over PadicElem entries
  (quadratic extensions), same valuation-pivoting idea.
"""

from __future__ import annotations

import numpy as np

from .errors import ExactDivisionError
from .padic import PadicElem
from .series import ResidueField


class Mat2:
    """A 2x2 matrix [[a, b], [c, d]] over any ring whose elements support
    +, -, * among themselves."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d):
        self.a, self.b, self.c, self.d = a, b, c, d

    @classmethod
    def from_rows(cls, rows):
        (a, b), (c, d) = rows
        return cls(a, b, c, d)

    def rows(self):
        return [[self.a, self.b], [self.c, self.d]]

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def map(self, fn) -> "Mat2":
        return Mat2(fn(self.a), fn(self.b), fn(self.c), fn(self.d))

    def __add__(self, other):
        return Mat2(self.a + other.a, self.b + other.b,
                    self.c + other.c, self.d + other.d)

    def __sub__(self, other):
        return Mat2(self.a - other.a, self.b - other.b,
                    self.c - other.c, self.d - other.d)

    def __neg__(self):
        return Mat2(-self.a, -self.b, -self.c, -self.d)

    def __mul__(self, other):
        if isinstance(other, Mat2):
            return Mat2(self.a * other.a + self.b * other.c,
                        self.a * other.b + self.b * other.d,
                        self.c * other.a + self.d * other.c,
                        self.c * other.b + self.d * other.d)
        return self.scale(other)

    def scale(self, s) -> "Mat2":
        return Mat2(self.a * s, self.b * s, self.c * s, self.d * s)

    def mul_vec(self, v):
        x, y = v
        return (self.a * x + self.b * y, self.c * x + self.d * y)

    def det(self):
        return self.a * self.d - self.b * self.c

    def trace(self):
        return self.a + self.d

    def adjugate(self) -> "Mat2":
        return Mat2(self.d, -self.b, -self.c, self.a)

    def __eq__(self, other):
        if not isinstance(other, Mat2):
            return NotImplemented
        return (self.a == other.a and self.b == other.b
                and self.c == other.c and self.d == other.d)

    def __repr__(self):
        return f"[[{self.a!r}, {self.b!r}], [{self.c!r}, {self.d!r}]]"


def mat_identity(one, zero) -> Mat2:
    return Mat2(one, zero, zero, one)


# ---------------------------------------------------------------------------
# Z/p^M solver


def _vp_bounded(x: int, p: int, cap: int) -> int:
    """p-adic valuation of x mod p^cap (cap means x = 0 mod p^cap)."""
    if x == 0:
        return cap
    v = 0
    while v < cap and x % p == 0:
        x //= p
        v += 1
    return v


def solve_zmod(rows, rhs, p: int, M: int, want_kernel: bool = False):
    """Solve A*x = b over Z/p^M.

    Diagonalizes A by row *and* column operations, always pivoting on an
    entry of globally minimal valuation in the remaining block, so every
    quotient taken is exact (echelon form alone is not sound over Z/p^M:
    a non-unit pivot leaves a choice of lift that can break earlier rows).
    Returns ``(solution, kernel)``: ``solution`` is a list of ints (or None
    when the system is inconsistent mod p^M) and ``kernel`` a generating set
    of the homogeneous solutions (empty unless ``want_kernel``).
    """
    P = p ** M
    m = len(rows)
    r = len(rows[0]) if m else 0
    A = [[int(x) % P for x in row] for row in rows]
    b = [int(x) % P for x in rhs]
    # x = V*y where y solves the diagonalized system
    V = [[int(i == j) for j in range(r)] for i in range(r)]
    piv_vals = []
    for t in range(min(m, r)):
        best, best_v = None, M
        for i in range(t, m):
            Ai = A[i]
            for j in range(t, r):
                if Ai[j]:
                    v = _vp_bounded(Ai[j], p, M)
                    if v < best_v:
                        best, best_v = (i, j), v
            if best_v == 0:
                break
        if best is None:
            break
        (i0, j0), v = best, best_v
        A[t], A[i0] = A[i0], A[t]
        b[t], b[i0] = b[i0], b[t]
        if j0 != t:
            for row in A:
                row[t], row[j0] = row[j0], row[t]
            for row in V:
                row[t], row[j0] = row[j0], row[t]
        pv = p ** v
        inv_u = pow(A[t][t] // pv, -1, P)
        A[t] = [(x * inv_u) % P for x in A[t]]
        b[t] = (b[t] * inv_u) % P
        At = A[t]
        for i in range(m):
            if i != t and A[i][t]:
                q = A[i][t] // pv  # exact: the pivot has minimal valuation
                A[i] = [(x - q * y) % P for x, y in zip(A[i], At)]
                b[i] = (b[i] - q * b[t]) % P
        for j in range(t + 1, r):
            if At[j]:
                q = At[j] // pv
                At[j] = 0
                for row in V:
                    row[j] = (row[j] - q * row[t]) % P
        piv_vals.append(v)

    s = len(piv_vals)
    if any(b[i] for i in range(s, m)):
        return None, []
    y = [0] * r
    for i, v in enumerate(piv_vals):
        if b[i] % p ** v:
            return None, []
        y[i] = b[i] // p ** v
    sol = [sum(V[i][j] * y[j] for j in range(r) if y[j]) % P for i in range(r)]

    kernel = []
    if want_kernel:
        for i, v in enumerate(piv_vals):
            if v:
                step = p ** (M - v)
                kernel.append([(V[row][i] * step) % P for row in range(r)])
        for j in range(s, r):
            kernel.append([V[row][j] % P for row in range(r)])
    return sol, kernel


class SmithSolver:
    """Reusable diagonalization of a fixed matrix over Z/p^M.

    :func:`solve_zmod` re-eliminates from scratch for every right-hand
    side.  When the same matrix is solved against many vectors (the
    quasi-Newton seed iteration), it pays to run the minimal-valuation
    diagonalization once, recording the row operations (U) and column
    operations (V) so that U*A*V = diag(p^v * unit).  Each further solve
    is then a matrix-vector product, a divisibility check on the pivots,
    and a second product.
    """

    def __init__(self, rows, p: int, M: int):
        self.p, self.M = p, M
        self.P = P = p ** M
        m = len(rows)
        r = len(rows[0]) if m else 0
        A = [[int(x) % P for x in row] for row in rows]
        U = [[int(i == j) for j in range(m)] for i in range(m)]
        V = [[int(i == j) for j in range(r)] for i in range(r)]
        piv_vals = []
        for t in range(min(m, r)):
            best, best_v = None, M
            for i in range(t, m):
                Ai = A[i]
                for j in range(t, r):
                    if Ai[j]:
                        v = _vp_bounded(Ai[j], p, M)
                        if v < best_v:
                            best, best_v = (i, j), v
                if best_v == 0:
                    break
            if best is None:
                break
            (i0, j0), v = best, best_v
            A[t], A[i0] = A[i0], A[t]
            U[t], U[i0] = U[i0], U[t]
            if j0 != t:
                for row in A:
                    row[t], row[j0] = row[j0], row[t]
                for row in V:
                    row[t], row[j0] = row[j0], row[t]
            pv = p ** v
            inv_u = pow(A[t][t] // pv, -1, P)
            A[t] = [(x * inv_u) % P for x in A[t]]
            U[t] = [(x * inv_u) % P for x in U[t]]
            At, Ut = A[t], U[t]
            for i in range(m):
                if i != t and A[i][t]:
                    q = A[i][t] // pv  # exact: the pivot has minimal valuation
                    A[i] = [(x - q * y) % P for x, y in zip(A[i], At)]
                    U[i] = [(x - q * y) % P for x, y in zip(U[i], Ut)]
            for j in range(t + 1, r):
                if At[j]:
                    q = At[j] // pv
                    At[j] = 0
                    for row in V:
                        row[j] = (row[j] - q * row[t]) % P
            piv_vals.append(v)
        self.m, self.r = m, r
        self.U, self.V = U, V
        self.piv_vals = piv_vals

    def solve(self, rhs):
        """A particular solution of A*x = rhs mod p^M, or None."""
        P, p = self.P, self.p
        m, r = self.m, self.r
        nz = [j for j in range(m) if rhs[j]]
        c = [sum(Ui[j] * rhs[j] for j in nz) % P for Ui in self.U]
        s = len(self.piv_vals)
        if any(c[s:]):
            return None
        y = [0] * r
        for i, v in enumerate(self.piv_vals):
            if c[i] % p ** v:
                return None
            y[i] = c[i] // p ** v
        V = self.V
        return [sum(Vi[j] * y[j] for j in range(r) if y[j]) % P
                for Vi in V]

    def kernel(self):
        """Generators of the homogeneous solutions mod p^M."""
        p, M, P = self.p, self.M, self.P
        r, V = self.r, self.V
        gens = []
        for i, v in enumerate(self.piv_vals):
            if v:
                step = p ** (M - v)
                gens.append([(V[row][i] * step) % P for row in range(r)])
        for j in range(len(self.piv_vals), r):
            gens.append([V[row][j] % P for row in range(r)])
        return gens


# ---------------------------------------------------------------------------
# residue-field solver


def solve_residue(rows, rhs, field: ResidueField, want_kernel: bool = False):
    """Solve A*x = b over GF(p^f); returns (solution | None, kernel_basis)."""
    if field.f == 1:
        return _solve_gf_p(rows, rhs, field.p, want_kernel)
    return _solve_gf_generic(rows, rhs, field, want_kernel)


def _solve_gf_p(rows, rhs, p: int, want_kernel: bool):
    m = len(rows)
    r = len(rows[0]) if m else 0
    R = np.array([[x % p for x in row] + [rhs[i] % p]
                  for i, row in enumerate(rows)], dtype=np.int64)
    pivots = []
    t = 0
    for col in range(r):
        pos = None
        for i in range(t, m):
            if R[i, col] % p:
                pos = i
                break
        if pos is None:
            continue
        if pos != t:
            R[[t, pos]] = R[[pos, t]]
        R[t] = (R[t] * pow(int(R[t, col]), -1, p)) % p
        mask = R[:, col].copy()
        mask[t] = 0
        R = (R - np.outer(mask, R[t])) % p
        pivots.append((t, col))
        t += 1
        if t == m:
            break
    for i in range(t, m):
        if R[i, r] % p:
            return None, []
    x = [0] * r
    for ti, col in pivots:
        x[col] = int(R[ti, r])
    kernel = []
    if want_kernel:
        pivot_cols = {c for _, c in pivots}
        for col in range(r):
            if col in pivot_cols:
                continue
            g = [0] * r
            g[col] = 1
            for ti, pc in pivots:
                g[pc] = int(-R[ti, col]) % p
            kernel.append(g)
    return x, kernel


def _solve_gf_generic(rows, rhs, field: ResidueField, want_kernel: bool):
    m = len(rows)
    r = len(rows[0]) if m else 0
    R = [[x for x in row] + [rhs[i]] for i, row in enumerate(rows)]
    pivots = []
    t = 0
    for col in range(r):
        pos = next((i for i in range(t, m) if R[i][col]), None)
        if pos is None:
            continue
        R[t], R[pos] = R[pos], R[t]
        inv = field.inv(R[t][col])
        R[t] = [field.mul(inv, x) for x in R[t]]
        for i in range(m):
            if i != t and R[i][col]:
                c = R[i][col]
                R[i] = [field.sub(x, field.mul(c, y)) for x, y in zip(R[i], R[t])]
        pivots.append((t, col))
        t += 1
        if t == m:
            break
    for i in range(t, m):
        if R[i][r]:
            return None, []
    x = [0] * r
    for ti, col in pivots:
        x[col] = R[ti][r]
    kernel = []
    if want_kernel:
        pivot_cols = {c for _, c in pivots}
        for col in range(r):
            if col in pivot_cols:
                continue
            g = [0] * r
            g[col] = 1
            for ti, pc in pivots:
                g[pc] = field.neg(R[ti][col])
            kernel.append(g)
    return x, kernel


# ---------------------------------------------------------------------------
# generic capped-precision solver (quadratic extensions; small systems)


def solve_padic(rows, rhs, params):
    """Solve A*x = b with PadicElem entries; returns list or None.

    Elimination pivots on minimal pi-valuation so that every division during
    elimination and back-substitution is exact.
    """
    m = len(rows)
    r = len(rows[0]) if m else 0
    R = [list(row) + [rhs[i]] for i, row in enumerate(rows)]
    pivots = []
    t = 0
    for col in range(r):
        best, best_v = None, None
        for i in range(t, m):
            v = R[i][col].pi_valuation()
            if v is None:
                continue
            if best_v is None or v < best_v:
                best, best_v = i, v
                if v == 0:
                    break
        if best is None:
            continue
        R[t], R[best] = R[best], R[t]
        unit = R[t][col].shift_down(best_v)
        inv_u = unit.inv()
        R[t] = [x * inv_u for x in R[t]]
        for i in range(t + 1, m):
            e = R[i][col]
            if e.pi_valuation() is not None:
                q = e.shift_down(best_v)
                R[i] = [x - q * y for x, y in zip(R[i], R[t])]
        pivots.append((t, col, best_v))
        t += 1
        if t == m:
            break
    x = [None] * r
    for (ti, col, v) in reversed(pivots):
        acc = R[ti][r]
        for j in range(col + 1, r):
            if x[j] is not None:
                acc = acc - R[ti][j] * x[j]
        try:
            x[col] = acc.shift_down(v)
        except ExactDivisionError:
            return None
    for i in range(len(pivots), m):
        acc = R[i][r]
        for j in range(r):
            if x[j] is not None:
                acc = acc - R[i][j] * x[j]
        if not acc.is_zero():
            return None
    fill = params.zero(max((e.prec for row in rows for e in row), default=1))
    return [fill if xi is None else xi for xi in x]
