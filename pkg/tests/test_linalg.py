import random

from crysred.linalg import Mat2, mat_identity, solve_padic, solve_residue, solve_zmod
from crysred.padic import FieldParams
from crysred.series import ResidueField


def test_mat2_adjugate_identity():
    m = Mat2(3, 5, 2, 7)
    prod = m * m.adjugate()
    assert (prod.a, prod.b, prod.c, prod.d) == (11, 0, 0, 11)
    assert m.det() == 11 and m.trace() == 10


def test_mat2_vec_and_identity():
    m = Mat2(1, 2, 3, 4)
    assert m.mul_vec((1, 1)) == (3, 7)
    assert mat_identity(1, 0) * m == m


def test_solve_zmod_unit_pivots():
    sol, _ = solve_zmod([[2, 1], [1, 1]], [5, 3], 3, 4)
    assert sol == [2, 1]


def test_solve_zmod_p_divisible_pivot():
    sol, _ = solve_zmod([[3, 1], [0, 3]], [3, 9], 3, 3)
    a = [(3 * sol[0] + sol[1]) % 27, (3 * sol[1]) % 27]
    assert a == [3, 9]


def test_solve_zmod_inconsistent():
    sol, _ = solve_zmod([[3]], [1], 3, 3)
    assert sol is None


def test_solve_zmod_kernel_scaled_pivot():
    sol, ker = solve_zmod([[3]], [6], 3, 3, want_kernel=True)
    assert sol == [2]
    assert ker and all(3 * g[0] % 27 == 0 for g in ker)
    assert any(g[0] % 27 in (9, 18) for g in ker)


def test_solve_zmod_kernel_free_column():
    sol, ker = solve_zmod([[1, 2]], [0], 5, 2, want_kernel=True)
    assert sol == [0, 0]
    assert len(ker) == 1 and (ker[0][0] + 2 * ker[0][1]) % 25 == 0


def test_solve_zmod_fuzz_roundtrip():
    rng = random.Random(41)
    for p, M in ((3, 5), (5, 4), (7, 9)):
        P = p ** M
        for _ in range(10):
            n = rng.randrange(2, 6)
            A = [[rng.randrange(P) for _ in range(n)] for _ in range(n + 1)]
            x = [rng.randrange(P) for _ in range(n)]
            b = [sum(A[i][j] * x[j] for j in range(n)) % P for i in range(n + 1)]
            sol, ker = solve_zmod(A, b, p, M, want_kernel=True)
            assert sol is not None
            for i in range(n + 1):
                assert sum(A[i][j] * sol[j] for j in range(n)) % P == b[i]
            for g in ker:
                for i in range(n + 1):
                    assert sum(A[i][j] * g[j] for j in range(n)) % P == 0


def test_solve_zmod_large_modulus_python_path():
    p, M = 3, 25  # p^M far beyond the int64-safe window
    P = p ** M
    A = [[2, 1], [1, P - 1]]
    x = [123456789, 987654321]
    b = [sum(A[i][j] * x[j] for j in range(2)) % P for i in range(2)]
    sol, _ = solve_zmod(A, b, p, M)
    for i in range(2):
        assert sum(A[i][j] * sol[j] for j in range(2)) % P == b[i]


def test_solve_residue_gfp():
    F = ResidueField(5)
    sol, ker = solve_residue([[1, 2], [3, 4]], [0, 1], F, want_kernel=True)
    assert sol is not None and ker == []
    assert (sol[0] + 2 * sol[1]) % 5 == 0 and (3 * sol[0] + 4 * sol[1]) % 5 == 1


def test_solve_residue_gfp_kernel_dim():
    F = ResidueField(3)
    sol, ker = solve_residue([[1, 1, 1]], [0], F, want_kernel=True)
    assert sol == [0, 0, 0] and len(ker) == 2
    for g in ker:
        assert sum(g) % 3 == 0


def test_solve_residue_gfp_inconsistent():
    F = ResidueField(7)
    sol, _ = solve_residue([[1, 1], [1, 1]], [1, 2], F)
    assert sol is None


def test_solve_residue_gf9():
    F = ResidueField(3, 2)
    s = 3  # the generator with s^2 = 2
    # x + s*y = s, s*x + y = 1  =>  (1 - 2)x = s - s  => x = 0, y = 1
    sol, _ = solve_residue([[1, s], [s, 1]], [s, 1], F)
    assert sol is not None
    assert F.add(sol[0], F.mul(s, sol[1])) == s
    assert F.add(F.mul(s, sol[0]), sol[1]) == 1


def test_solve_residue_gf9_fuzz():
    F = ResidueField(3, 2)
    rng = random.Random(17)
    for _ in range(10):
        n = rng.randrange(2, 5)
        A = [[rng.randrange(9) for _ in range(n)] for _ in range(n)]
        x = [rng.randrange(9) for _ in range(n)]
        b = []
        for i in range(n):
            acc = 0
            for j in range(n):
                acc = F.add(acc, F.mul(A[i][j], x[j]))
            b.append(acc)
        sol, _ = solve_residue(A, b, F)
        assert sol is not None
        for i in range(n):
            acc = 0
            for j in range(n):
                acc = F.add(acc, F.mul(A[i][j], sol[j]))
            assert acc == b[i]


def test_solve_padic_ramified_pivots():
    from crysred.padic import PadicElem

    par = FieldParams(3, e=2)
    one = par.one(6)
    pi = PadicElem(par, 6, (0, 1))
    A = [[pi, one], [one * 0, pi]]
    b = [pi + one * 3, pi * pi]
    sol = solve_padic(A, b, par)
    assert sol is not None
    assert (A[0][0] * sol[0] + A[0][1] * sol[1] - b[0]).is_zero()
    assert (A[1][0] * sol[0] + A[1][1] * sol[1] - b[1]).is_zero()


def test_solve_padic_inconsistent_divisibility():
    par = FieldParams(3)
    three = par.from_int(3, 4)
    one = par.one(4)
    sol = solve_padic([[three]], [one], par)
    assert sol is None
