"""Identification of semisimplified residue modules.

A certified quotient pair reduces mod pi to a matrix pair over k_E[[X]]
(truncated at X^{pk}).  Its semisimplification is one of finitely many
canonical modules: a direct sum of two rank-1 modules, each the residue of a
tame character, or an irreducible rank-2 module whose phi-matrix is a cycle.
This module enumerates the candidate labels, constructs a certified residue
pair for every label, and matches arbitrary pairs against them by solving
for an explicit intertwiner over F_p.

Conventions, all pinned by the determinant anchor (the determinant pair of
any certified seed must classify to the class of chi^{k-1} with trivial
unramified part):

* a rank-1 module with phi-multiplier lam*X^((p-1)*i) and gamma-multiplier
  (gamma(X)/(chi*X))^i carries the label (lam, i);
* the irreducible label {h, twist} denotes the rank-2 module with inertia
  exponent h (taken mod p^2-1, up to the Frobenius pairing h ~ p*h) whose
  determinant classifies to (twist, h mod (p-1));
* twisting by the unramified character with multiplier lam scales the
  phi-matrix by lam; shifting h by p+1 scales the gamma-matrix by chi^-1.

When (p+1) | h the cycle module is still simple over F_p exactly when
-twist is a non-residue; those labels are included (they do occur as
reductions: the determinant forces them whenever the naive split candidate
would pick up a nontrivial unramified determinant).

Only k_E = F_p is supported; everything here is residue-level and exact.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    AmbiguousMatch,
    CatalogBuildFailure,
    IndeterminateAtPrecision,
    NoMatch,
    NotEtale,
    UnsupportedExtension,
)
from .linalg import Mat2
from .padic import smallest_primitive_root_mod_p2
from .pairs import (
    PhiGammaPair,
    extend_gamma_matrix_residue,
    mat_res_gamma,
    mat_res_inverse_unit,
    mat_res_phi,
    reduce_pair,
)
from .series import (
    ResidueField,
    ResidueSeries,
    res_frobenius,
    res_gamma,
    res_monomial,
    res_one,
    res_unit_inverse,
    res_zero,
)


def identify_precision(p: int, k: int) -> int:
    """X-precision at which weight-k pairs are matched: (p+2)k - 1."""
    return (p + 2) * k - 1


# ---------------------------------------------------------------------------
# labels


@dataclass(frozen=True)
class SemisimpleLabel:
    """Canonical name of a semisimple rank-2 residue module.

    kind == "irreducible": h and twist are set, factors is ().
    kind == "split": factors = ((lam1, i1), (lam2, i2)) sorted, h = twist = 0.
    """

    kind: str
    h: int = 0
    twist: int = 0
    factors: tuple = ()

    def sort_key(self):
        return (self.kind, self.h, self.twist, self.factors)

    def to_json(self) -> dict:
        out = {"object": "Vbar_star", "kind": self.kind}
        if self.kind == "irreducible":
            out["h"] = self.h
            out["twist"] = self.twist
        else:
            out["factors"] = [list(f) for f in self.factors]
        return out


def label_from_json(data: dict) -> SemisimpleLabel:
    if data["kind"] == "irreducible":
        return SemisimpleLabel("irreducible", h=data["h"], twist=data["twist"])
    return SemisimpleLabel(
        "split", factors=tuple(tuple(f) for f in data["factors"]))


def _is_square(p: int, x: int) -> bool:
    return pow(x % p, (p - 1) // 2, p) == 1


def _dlog(p: int, base: int, x: int) -> int:
    """Discrete log in F_p^*; base is a primitive root."""
    acc = 1
    for j in range(p - 1):
        if acc == x % p:
            return j
        acc = (acc * base) % p
    raise ValueError(f"{x} is not a unit mod {p}")


def irreducible_label(p: int, h: int, twist: int) -> SemisimpleLabel:
    """Canonicalize (h, twist); h taken mod p^2-1, paired with p*h."""
    m = p * p - 1
    h = h % m
    if h == 0:
        raise ValueError("h = 0 is not an irreducible exponent")
    hc = min(h, (p * h) % m)
    twist = twist % p
    if twist == 0:
        raise ValueError("twist must be a unit")
    if hc % (p + 1) == 0 and _is_square(p, -twist):
        raise ValueError(
            f"h={hc}, twist={twist} is split over F_{p}; not irreducible")
    return SemisimpleLabel("irreducible", h=hc, twist=twist)


def split_label(p: int, f1, f2) -> SemisimpleLabel:
    facs = []
    for lam, i in (f1, f2):
        lam = lam % p
        if lam == 0:
            raise ValueError("unramified multiplier must be a unit")
        facs.append((lam, i % (p - 1)))
    return SemisimpleLabel("split", factors=tuple(sorted(facs)))


def induced_label(p: int, h: int, twist: int = 1) -> SemisimpleLabel:
    """Label of the determinant-normalized induction with exponent h.

    Splits into two tame characters exactly when (p+1) | h and -twist is a
    square; otherwise it is simple over F_p.
    """
    m = p * p - 1
    h = h % m
    twist = twist % p
    if h % (p + 1) == 0 and _is_square(p, -twist):
        i = (h // (p + 1)) % (p - 1)
        s = next(x for x in range(1, p) if (x * x) % p == (-twist) % p)
        return split_label(p, (s, i), (p - s, i))
    return irreducible_label(p, h, twist)


def cycle_exponent(p: int, h: int) -> int:
    """Inertia exponent of the member of {h, p*h} that decomposes as
    h0 + (p+1)*j with 0 <= h0 <= p-1; this is the cycle shape used for the
    catalog matrix of the label."""
    h0 = h % (p + 1)
    if h0 == p:
        h0 = ((p * h) % (p * p - 1)) % (p + 1)
    return h0


def split_labels(p: int):
    chars = [(lam, i) for lam in range(1, p) for i in range(p - 1)]
    out = []
    for a in range(len(chars)):
        for b in range(a, len(chars)):
            out.append(split_label(p, chars[a], chars[b]))
    return out


def irreducible_labels(p: int):
    m = p * p - 1
    out = []
    for h in range(1, m):
        if min(h, (p * h) % m) != h:
            continue
        for nu in range(1, p):
            if h % (p + 1) == 0 and _is_square(p, -nu):
                continue
            out.append(SemisimpleLabel("irreducible", h=h, twist=nu))
    return out


def all_labels(p: int):
    return sorted(split_labels(p) + irreducible_labels(p),
                  key=SemisimpleLabel.sort_key)


# ---------------------------------------------------------------------------
# F_p linear algebra (dense, numpy)


def _rref_modp(A: np.ndarray, p: int):
    """Row-reduce in place mod p; returns the list of pivot columns."""
    rows, cols = A.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hit = np.nonzero(A[r:, c])[0]
        if hit.size == 0:
            continue
        i = r + int(hit[0])
        if i != r:
            A[[r, i]] = A[[i, r]]
        A[r] = (A[r] * pow(int(A[r, c]), p - 2, p)) % p
        other = np.nonzero(A[:, c])[0]
        other = other[other != r]
        if other.size:
            A[other] = (A[other] - np.outer(A[other, c], A[r])) % p
        pivots.append(c)
        r += 1
    return pivots


def _kernel_modp(A: np.ndarray, p: int):
    """Basis of the right kernel of A over F_p."""
    R = A % p
    pivots = _rref_modp(R, p)
    cols = A.shape[1]
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = []
    for fc in free:
        v = np.zeros(cols, dtype=np.int64)
        v[fc] = 1
        for r, pc in enumerate(pivots):
            v[pc] = (-R[r, fc]) % p
        basis.append(v)
    return basis


def _solve_modp(A: np.ndarray, b: np.ndarray, p: int):
    """One solution of A x = b over F_p, or None."""
    rows, cols = A.shape
    aug = np.concatenate([A % p, (b % p).reshape(rows, 1)], axis=1)
    pivots = _rref_modp(aug, p)
    if cols in pivots:
        return None
    x = np.zeros(cols, dtype=np.int64)
    for r, pc in enumerate(pivots):
        x[pc] = aug[r, cols]
    return x


# ---------------------------------------------------------------------------
# equation assembly for intertwiner systems

_GAMMA_TABLES: dict = {}


def _gamma_power_table(p: int, chi: int, E: int) -> np.ndarray:
    """Column j holds the first E coefficients of (gamma(X))^j."""
    key = (p, chi, E)
    tab = _GAMMA_TABLES.get(key)
    if tab is not None:
        return tab
    g = np.zeros(E, dtype=np.int64)
    from .series import _int_binomial_row

    row = _int_binomial_row(chi, E + 1)
    for j in range(1, min(E, chi + 1)):
        g[j] = row[j] % p
    tab = np.zeros((E, E), dtype=np.int64)
    tab[0, 0] = 1
    col = tab[:, 0].copy()
    for j in range(1, E):
        col = np.convolve(col, g)[:E] % p
        tab[:, j] = col
    _GAMMA_TABLES[key] = tab
    return tab


def _coeff_vec(f: ResidueSeries, E: int) -> np.ndarray:
    v = np.zeros(E, dtype=np.int64)
    src = f.coeffs[:E]
    v[:len(src)] = src
    return v


def _shift_matrix(c: np.ndarray, E: int, D: int, stride: int) -> np.ndarray:
    """B[r, j] = c[r - stride*j] -- multiplication by c after X -> X^stride."""
    B = np.zeros((E, D), dtype=np.int64)
    for j in range(D):
        lo = stride * j
        if lo >= E:
            break
        B[lo:, j] = c[:E - lo]
    return B


def _hom_kernel(P_t: Mat2, G_t: Mat2, phi_s, gam_s, chi: int, E: int):
    """Kernel basis of the intertwiner system Hom(source, target).

    The source is given by n x n coefficient lists ``phi_s``/``gam_s``
    (n = 1 or 2) of ResidueSeries; the target is the pair (P_t, G_t).  The
    unknown is a 2 x n matrix M of series of degree < E satisfying

        P_t * phi(M) = M * phi_s   and   G_t * gamma(M) = M * gam_s

    through X^E.  Returns a list of M's as 2 x n lists of ResidueSeries.
    """
    rf = P_t.a.field
    p = rf.p
    n = len(phi_s)
    D = E
    gam_tab = _gamma_power_table(p, chi, E)
    n_unk = 2 * n * D
    tgt_phi = [[_coeff_vec(e, E) for e in row]
               for row in ((P_t.a, P_t.b), (P_t.c, P_t.d))]
    tgt_gam = [[_coeff_vec(e, E) for e in row]
               for row in ((G_t.a, G_t.b), (G_t.c, G_t.d))]
    src_phi = [[_coeff_vec(phi_s[w][v], E) for v in range(n)] for w in range(n)]
    src_gam = [[_coeff_vec(gam_s[w][v], E) for v in range(n)] for w in range(n)]

    def unk(u, w):
        base = (u * n + w) * D
        return slice(base, base + D)

    blocks = []
    for u in range(2):
        for v in range(n):
            row = np.zeros((E, n_unk), dtype=np.int64)
            for w in range(2):
                row[:, unk(w, v)] += _shift_matrix(tgt_phi[u][w], E, D, p)
            for w in range(n):
                row[:, unk(u, w)] -= _shift_matrix(src_phi[w][v], E, D, 1)
            blocks.append(row % p)
    for u in range(2):
        for v in range(n):
            row = np.zeros((E, n_unk), dtype=np.int64)
            for w in range(2):
                L = _shift_matrix(tgt_gam[u][w], E, E, 1)
                row[:, unk(w, v)] += (L @ gam_tab[:, :D]) % p
            for w in range(n):
                row[:, unk(u, w)] -= _shift_matrix(src_gam[w][v], E, D, 1)
            blocks.append(row % p)
    A = np.concatenate(blocks, axis=0)
    out = []
    for vec in _kernel_modp(A, p):
        M = [[ResidueSeries(rf, [int(c) for c in vec[unk(u, w)]], E)
              for w in range(n)] for u in range(2)]
        out.append(M)
    return out


def _verify_hom(P_t: Mat2, G_t: Mat2, phi_s, gam_s, M, chi: int) -> bool:
    """Independent series-arithmetic check of the intertwiner equations."""
    n = len(phi_s)
    rows_t_phi = ((P_t.a, P_t.b), (P_t.c, P_t.d))
    rows_t_gam = ((G_t.a, G_t.b), (G_t.c, G_t.d))
    phiM = [[res_frobenius(M[u][w]) for w in range(n)] for u in range(2)]
    gamM = [[res_gamma(M[u][w], chi) for w in range(n)] for u in range(2)]
    for u in range(2):
        for v in range(n):
            lhs = rows_t_phi[u][0] * phiM[0][v] + rows_t_phi[u][1] * phiM[1][v]
            rhs = sum((M[u][w] * phi_s[w][v] for w in range(1, n)),
                      M[u][0] * phi_s[0][v])
            if not (lhs - rhs).is_zero():
                return False
            lhs = rows_t_gam[u][0] * gamM[0][v] + rows_t_gam[u][1] * gamM[1][v]
            rhs = sum((M[u][w] * gam_s[w][v] for w in range(1, n)),
                      M[u][0] * gam_s[0][v])
            if not (lhs - rhs).is_zero():
                return False
    return True


# ---------------------------------------------------------------------------
# rank-1 classification


def classify_rank1(alpha: ResidueSeries, g: ResidueSeries, chi: int):
    """Label (lam, i) of the rank-1 module with multipliers (alpha, g).

    Normalizes the phi-multiplier to a constant by a basis rescale
    X^-m * u(X) and reads the class off the rescaled gamma-constant, which
    equals chi^-i.  Raises NotEtale when the X-valuation is not a multiple
    of p-1 (no Gamma-compatible rescale exists).
    """
    rf = alpha.field
    if rf.f != 1:
        raise UnsupportedExtension("rank-1 classification needs k_E = F_p")
    p = rf.p
    chi_bar = chi % p
    v = alpha.x_valuation()
    if v is None:
        raise NotEtale("zero phi-multiplier")
    if v % (p - 1):
        raise NotEtale(f"phi-multiplier valuation {v} is not 0 mod {p - 1}")
    m = v // (p - 1)
    unit = alpha.shift_down(v)
    lam = unit.constant()
    sigma = res_unit_inverse(unit.scale(rf.inv(lam)))
    # t with phi(t) = t * sigma; then phi(X^-m t)/(X^-m t) kills the unit part
    E = sigma.n
    t = [1] + [0] * (E - 1)
    for r in range(1, E):
        acc = t[r // p] if r % p == 0 else 0
        acc -= sum(t[j] * sigma.coeff(r - j) for j in range(r))
        t[r] = acc % p
    t_series = ResidueSeries(rf, t, E)
    gx = res_gamma(res_monomial(rf, 1, E), chi)
    x_over_gx = res_unit_inverse(gx.shift_down(1))
    ratio = res_one(rf, E)
    for _ in range(m):
        ratio = ratio * x_over_gx
    g_norm = g * ratio * res_gamma(t_series, chi) * res_unit_inverse(t_series)
    c = g_norm.constant()
    if c == 0:
        raise NotEtale("gamma-multiplier degenerates under normalization")
    i = (-_dlog(p, chi_bar, c)) % (p - 1)
    return lam, i


def char_pair(rf: ResidueField, chi: int, lam: int, i: int, n: int):
    """Canonical residue multipliers of the character with label (lam, i)."""
    p = rf.p
    alpha = res_monomial(rf, (p - 1) * i, n, lam % p)
    gx = res_gamma(res_monomial(rf, 1, n), chi)
    s = gx.shift_down(1).scale(rf.inv(chi % p))  # gamma(X)/(chi*X)
    g = res_one(rf, n)
    for _ in range(i):
        g = g * s
    return alpha, g


# ---------------------------------------------------------------------------
# stable lines


@dataclass
class LineWitness:
    sub: tuple          # (lam, i) of the stable line
    quot: tuple         # (lam, i) of the quotient
    vector: tuple       # coefficient lists of the spanning vector
    multiplier_val: int


def stable_line(P: Mat2, G: Mat2, chi: int):
    """Search for a phi- and gamma-stable line; None when there is none.

    Candidates are rank-1 modules with multiplier valuation bounded by the
    X-valuation of det(P); for each, a nonzero primitive morphism into the
    pair is sought by linear algebra and re-verified by series arithmetic.
    """
    rf = P.a.field
    p = rf.p
    E = P.a.n
    dval = P.det().x_valuation()
    if dval is None:
        raise IndeterminateAtPrecision(
            "determinant vanishes at this X-precision; no slope bound")
    gx = res_gamma(res_monomial(rf, 1, E), chi)
    s = gx.shift_down(1).scale(rf.inv(chi % p))
    for v in range(0, dval + 1, p - 1):
        s_pow = res_one(rf, E)
        for _ in range(v // (p - 1)):
            s_pow = s_pow * s
        for lam in range(1, p):
            alpha = res_monomial(rf, v, E, lam)
            for c0 in range(1, p):
                g = s_pow.scale(c0)
                for M in _hom_kernel(P, G, [[alpha]], [[g]], chi, E):
                    w0, w1 = M[0][0], M[1][0]
                    v0, v1 = w0.x_valuation(), w1.x_valuation()
                    vals = [x for x in (v0, v1) if x is not None]
                    if not vals or min(vals) != 0:
                        continue
                    if not _verify_hom(P, G, [[alpha]], [[g]], M, chi):
                        continue
                    sub = classify_rank1(alpha, g, chi)
                    quot = _quotient_class(P, G, w0, w1, chi)
                    return LineWitness(sub=sub, quot=quot,
                                       vector=(tuple(w0.coeffs),
                                               tuple(w1.coeffs)),
                                       multiplier_val=v)
    return None


def _quotient_class(P: Mat2, G: Mat2, w0, w1, chi: int):
    """Class of the rank-1 quotient by the line spanned by (w0, w1)."""
    rf = P.a.field
    E = w0.n
    if w0.x_valuation() == 0:
        W = Mat2(w0, res_zero(rf, E), w1, res_one(rf, E))
    else:
        W = Mat2(w0, res_one(rf, E), w1, res_zero(rf, E))
    Winv = mat_res_inverse_unit(W)
    P_c = Winv * P * mat_res_phi(W)
    G_c = Winv * G * mat_res_gamma(W, chi)
    return classify_rank1(P_c.d, G_c.d, chi)


# ---------------------------------------------------------------------------
# catalog construction


@dataclass
class CatalogEntry:
    label: SemisimpleLabel
    P: Mat2
    G: Mat2
    det_class: tuple

    def to_json(self) -> dict:
        return {
            "label": self.label.to_json(),
            "det_class": list(self.det_class),
            "P": [list(e.coeffs) for e in self.P.entries()],
            "G": [list(e.coeffs) for e in self.G.entries()],
            "x_precision": self.P.a.n,
        }


class Catalog:
    """Lazy collection of certified residue pairs, one per label."""

    def __init__(self, p: int, k: int):
        if k < 2:
            raise ValueError("weight must be at least 2")
        self.p = p
        self.k = k
        self.rf = ResidueField(p, 1)
        self.chi = smallest_primitive_root_mod_p2(p)
        self.precision = identify_precision(p, k)
        self._entries: dict = {}
        self._labels = None

    def labels(self):
        if self._labels is None:
            self._labels = all_labels(self.p)
        return self._labels

    def entry(self, label: SemisimpleLabel) -> CatalogEntry:
        got = self._entries.get(label)
        if got is None:
            if label.kind == "split":
                got = self._build_split(label)
            else:
                got = self._build_irreducible(label)
            self._entries[label] = got
        return got

    def all(self):
        return [self.entry(lab) for lab in self.labels()]

    def irreducible_candidates(self, det_class, k_eff: int):
        """Irreducible labels whose predicted determinant class matches and
        whose cycle exponent is realizable at effective weight k_eff (a
        morphism into a cycle with h0 > k_eff - 1 would need a determinant
        of negative valuation)."""
        lam_d, i_d = det_class
        p = self.p
        out = []
        for lab in self.labels():
            if lab.kind != "irreducible":
                continue
            if lab.twist % p != lam_d % p or lab.h % (p - 1) != i_d % (p - 1):
                continue
            if cycle_exponent(p, lab.h) > k_eff - 1:
                continue
            out.append(lab)
        return out

    # -- split entries ------------------------------------------------------

    def _build_split(self, label: SemisimpleLabel) -> CatalogEntry:
        rf, chi = self.rf, self.chi
        (l1, i1), (l2, i2) = label.factors
        # entry precision always clears the determinant valuation
        E = self.precision + (rf.p - 1) * (i1 + i2)
        a1, g1 = char_pair(rf, chi, l1, i1, E)
        a2, g2 = char_pair(rf, chi, l2, i2, E)
        z = res_zero(rf, E)
        P = Mat2(a1, z, z, a2)
        G = Mat2(g1, z, z, g2)
        entry = CatalogEntry(label, P, G, self._det_class(P, G))
        self._validate(entry, want_line=True)
        return entry

    # -- irreducible entries -------------------------------------------------

    def _build_irreducible(self, label: SemisimpleLabel) -> CatalogEntry:
        p, rf, chi = self.p, self.rf, self.chi
        h, nu = label.h, label.twist
        h0 = cycle_exponent(p, h)
        if h % (p + 1) == p:
            h = (p * h) % (p * p - 1)   # the Frobenius partner decomposes
        j = (h - h0) // (p + 1)
        scale = pow(pow(chi % p, -1, p), j % (p - 1), p)
        kk = h0 + 1                     # determinant valuation (p-1)*h0
        E = self.precision + (p - 1) * h0
        window = kk + (p - 1) * (kk - 1)
        G0 = self._solve_gamma_cycle(h0, nu, scale, window)
        need = E + 2 * (p - 1) * (kk - 1)
        P = self._cycle_phi(h0, nu, need)
        G0 = G0.map(lambda f: ResidueSeries(rf, f.coeffs, need))
        G = extend_gamma_matrix_residue(P, G0, kk, E, chi)
        trunc = lambda M: M.map(lambda f: f.truncate(E))
        entry = CatalogEntry(label, trunc(P), trunc(G), None)
        entry.det_class = self._det_class(entry.P, entry.G)
        want = (nu % p, h % (p - 1))
        if entry.det_class != want:
            raise CatalogBuildFailure(
                f"{label}: determinant classifies to {entry.det_class}, "
                f"predicted {want}")
        self._validate(entry, want_line=False)
        return entry

    def _cycle_phi(self, h0: int, nu: int, n: int) -> Mat2:
        rf = self.rf
        p = rf.p
        z = res_zero(rf, n)
        one = res_one(rf, n)
        return Mat2(z, -one, res_monomial(rf, (p - 1) * h0, n, nu), z)

    def _solve_gamma_cycle(self, h0: int, nu: int, scale: int,
                           window: int) -> Mat2:
        """Gamma-matrix of the cycle pair through X^window.

        Linear solve for the coefficients of G with the constant term pinned
        to scale * Id; the commutation equation determines the rest up to
        gauge, and the row-echelon particular solution is canonical.
        """
        rf, chi = self.rf, self.chi
        p = rf.p
        E = window
        P = self._cycle_phi(h0, nu, E)
        gam_P = mat_res_gamma(P, chi)
        tgt = [[_coeff_vec(e, E) for e in row]
               for row in ((P.a, P.b), (P.c, P.d))]
        gp = [[_coeff_vec(e, E) for e in row]
              for row in ((gam_P.a, gam_P.b), (gam_P.c, gam_P.d))]
        gam_tab = _gamma_power_table(p, chi, E)
        D = E
        n_unk = 4 * D

        def unk(u, w):
            return slice((u * 2 + w) * D, (u * 2 + w + 1) * D)

        blocks = []
        for u in range(2):
            for v in range(2):
                row = np.zeros((E, n_unk), dtype=np.int64)
                for w in range(2):
                    row[:, unk(w, v)] += _shift_matrix(tgt[u][w], E, D, p)
                    row[:, unk(u, w)] -= _shift_matrix(gp[w][v], E, D, 1)
                blocks.append(row % p)
        A = np.concatenate(blocks, axis=0)
        # pin the constant term to scale*Id; if the off-diagonal pins are
        # inconsistent, release the upper one (the commutant of the cycle's
        # constant term is triangular, so only that entry has any slack)
        for pinned in (((0, 0), (0, 1), (1, 0), (1, 1)), ((0, 0), (1, 0),
                                                          (1, 1))):
            pins = np.zeros((len(pinned), n_unk), dtype=np.int64)
            rhs = np.zeros(A.shape[0] + len(pinned), dtype=np.int64)
            for e, (u, w) in enumerate(pinned):
                pins[e, (u * 2 + w) * D] = 1
                rhs[A.shape[0] + e] = scale if u == w else 0
            sol = _solve_modp(np.concatenate([A, pins], axis=0), rhs, p)
            if sol is not None:
                ent = [ResidueSeries(rf, [int(c) for c in sol[unk(u, w)]], E)
                       for u in range(2) for w in range(2)]
                return Mat2(*ent)
        raise CatalogBuildFailure(
            f"no gamma-matrix with constant term {scale}*Id exists for "
            f"the cycle with exponent {h0}, twist {nu}")

    # -- validation ----------------------------------------------------------

    def _det_class(self, P: Mat2, G: Mat2):
        return classify_rank1(P.det(), G.det(), self.chi)

    def _validate(self, entry: CatalogEntry, want_line: bool):
        chi = self.chi
        defect = (entry.P * mat_res_phi(entry.G)
                  - entry.G * mat_res_gamma(entry.P, chi))
        if not all(e.is_zero() for e in defect.entries()):
            raise CatalogBuildFailure(f"{entry.label}: commutation defect")
        line = stable_line(entry.P, entry.G, chi)
        if want_line and line is None:
            raise CatalogBuildFailure(
                f"{entry.label}: expected a stable line, found none")
        if not want_line and line is not None:
            raise CatalogBuildFailure(
                f"{entry.label}: unexpectedly reducible "
                f"(line {line.sub}, quotient {line.quot})")
        if want_line:
            got = split_label(self.p, line.sub, line.quot)
            if got != entry.label:
                raise CatalogBuildFailure(
                    f"{entry.label}: line decomposition reads {got}")


_CATALOGS: dict = {}


def get_catalog(p: int, k: int) -> Catalog:
    got = _CATALOGS.get((p, k))
    if got is None:
        got = Catalog(p, k)
        _CATALOGS[(p, k)] = got
    return got


def build_catalog(p: int, k: int) -> Catalog:
    """Force every entry (validated); returns the filled catalog."""
    cat = get_catalog(p, k)
    cat.all()
    return cat


# ---------------------------------------------------------------------------
# identification


@dataclass
class IdentifyResult:
    label: SemisimpleLabel
    witness_kind: str       # "line" | "intertwiner"
    witness: dict
    x_precision: int

    def to_json(self) -> dict:
        return {
            "label": self.label.to_json(),
            "witness_kind": self.witness_kind,
            "witness": self.witness,
            "x_precision": self.x_precision,
        }


def prepare_residue_pair(pair: PhiGammaPair, k: int):
    """Reduce mod pi if needed and extend the gamma-matrix to the matching
    precision E = identify_precision(p, k); returns (P, G) exactly commuting
    through X^E.

    The polynomial entries of a certified quotient pair are their own exact
    lifts, so the extension below is exact arithmetic.  The weight fed to the
    extension is read off the determinant valuation (it differs from k for
    pairs that were twisted or conjugated after reduction).
    """
    if pair.base == "integral":
        pair = reduce_pair(pair)
    rf = pair.rfield
    if rf.f != 1:
        raise UnsupportedExtension("identification needs k_E = F_p")
    p = rf.p
    chi = smallest_primitive_root_mod_p2(p)
    E = identify_precision(p, k)
    dval = pair.P.det().x_valuation()
    if dval is None:
        raise IndeterminateAtPrecision(
            "determinant vanishes at this X-precision")
    if dval % (p - 1):
        raise NotEtale(f"determinant valuation {dval} not 0 mod {p - 1}")
    k_eff = dval // (p - 1) + 1
    need = E + 2 * (p - 1) * (k_eff - 1)
    pad = lambda M: M.map(lambda f: ResidueSeries(rf, f.coeffs, need))
    P, G = pad(pair.P), pad(pair.G)
    G = extend_gamma_matrix_residue(P, G, k_eff, E, chi)
    trunc = lambda M: M.map(lambda f: f.truncate(E))
    return trunc(P), trunc(G)


def identify(pair: PhiGammaPair, k: int, catalog: Catalog | None = None):
    """Match a certified pair against the canonical catalog.

    Returns an IdentifyResult whose witness re-verifies by plain series
    arithmetic.  Raises NoMatch when nothing matches at this precision
    (callers retry with a higher pi-precision seed) and AmbiguousMatch when
    two distinct labels match (which would indicate a precision bug).
    """
    P, G = prepare_residue_pair(pair, k)
    rf = P.a.field
    p = rf.p
    if catalog is None:
        catalog = get_catalog(p, k)
    chi = catalog.chi
    E = catalog.precision
    det_class = classify_rank1(P.det(), G.det(), chi)
    line = stable_line(P, G, chi)
    if line is not None:
        label = split_label(p, line.sub, line.quot)
        lam_d = (line.sub[0] * line.quot[0]) % p
        i_d = (line.sub[1] + line.quot[1]) % (p - 1)
        if (lam_d, i_d) != det_class:
            raise IndeterminateAtPrecision(
                f"line decomposition {label} contradicts determinant class "
                f"{det_class}")
        return IdentifyResult(label, "line", {
            "vector": [list(c) for c in line.vector],
            "line_class": list(line.sub),
            "quotient_class": list(line.quot),
        }, E)
    matches = []
    phi_s = [[P.a, P.b], [P.c, P.d]]
    gam_s = [[G.a, G.b], [G.c, G.d]]
    k_eff = P.det().x_valuation() // (p - 1) + 1
    for lab in catalog.irreducible_candidates(det_class, k_eff):
        entry = catalog.entry(lab)
        # a morphism FROM the pair INTO the canonical module; its
        # determinant valuation is forced to (k_eff - 1) - h0, which filters
        # out the high-valuation junk the truncated system always carries
        dv_want = (k_eff - 1) - cycle_exponent(p, lab.h)
        for M in _hom_kernel(entry.P, entry.G, phi_s, gam_s, chi, E):
            Mm = Mat2(M[0][0], M[0][1], M[1][0], M[1][1])
            if Mm.det().x_valuation() != dv_want:
                continue
            if not _verify_hom(entry.P, entry.G, phi_s, gam_s, M, chi):
                continue
            matches.append((lab, Mm, dv_want))
            break
    if not matches:
        raise NoMatch(
            f"no catalog candidate matches at X-precision {E} "
            f"(determinant class {det_class})")
    if len({lab for lab, _, _ in matches}) > 1:
        raise AmbiguousMatch(
            "distinct labels match: "
            + ", ".join(str(lab) for lab, _, _ in matches))
    lab, Mm, dv = matches[0]
    return IdentifyResult(lab, "intertwiner", {
        "matrix": [list(e.coeffs) for e in Mm.entries()],
        "det_valuation": dv,
    }, E)
