"""Staged probe of modp.py: tables, classification, catalog, identification."""
import time

from crysred.modp import (
    Catalog, all_labels, char_pair, classify_rank1, cycle_exponent,
    get_catalog, identify, induced_label, irreducible_label, identify_precision,
    prepare_residue_pair, split_label, stable_line, _gamma_power_table,
)
from crysred.padic import FieldParams, smallest_primitive_root_mod_p2
from crysred.series import (
    ResidueField, ResidueSeries, res_gamma, res_monomial, res_one,
)
from crysred.wach import build_seed
from crysred.pairs import reduce_pair

t0 = time.time()

# --- 1. gamma power table vs series arithmetic
for p in (3, 5):
    chi = smallest_primitive_root_mod_p2(p)
    rf = ResidueField(p, 1)
    E = 25
    tab = _gamma_power_table(p, chi, E)
    for j in (0, 1, 2, 7):
        want = res_gamma(res_monomial(rf, j, E), chi)
        got = [int(c) for c in tab[:, j]]
        assert got == list(want.coeffs), (p, j, got, want.coeffs)
print("1. gamma table OK", round(time.time() - t0, 1))

# --- 2. classify round trips
for p in (3, 5):
    chi = smallest_primitive_root_mod_p2(p)
    rf = ResidueField(p, 1)
    E = 40
    for lam in range(1, p):
        for i in range(p - 1):
            a, g = char_pair(rf, chi, lam, i, E)
            assert classify_rank1(a, g, chi) == (lam, i), (p, lam, i)
            # same class presented with valuation bumped by 2(p-1): rescale
            # the basis by X^2, i.e. alpha *= X^{2(p-1)}, g *= (gamma(X)/X)^2
            a2 = a * res_monomial(rf, 2 * (p - 1), E)
            gx = res_gamma(res_monomial(rf, 1, E), chi)
            gx_over_x = gx.shift_down(1)
            g2 = g * gx_over_x * gx_over_x
            got = classify_rank1(a2, g2, chi)
            assert got == (lam, i % (p - 1)), (p, lam, i, got)
print("2. classify OK", round(time.time() - t0, 1))

# --- 3. catalog p=3
labs = all_labels(3)
assert len(labs) == 17, len(labs)
irr = [l for l in labs if l.kind == "irreducible"]
assert [(l.h, l.twist) for l in irr] == [
    (1, 1), (1, 2), (2, 1), (2, 2), (4, 1), (5, 1), (5, 2)], irr
cat = Catalog(3, 2)
for lab in labs:
    e = cat.entry(lab)
    print("   entry", lab.kind, (lab.h, lab.twist) if lab.kind == "irreducible"
          else lab.factors, "det", e.det_class, "prec", e.P.a.n)
print("3. catalog p=3 k=2 all entries validated", round(time.time() - t0, 1))

# --- 4. FL oracle p=5 k=3 ap=5
par = FieldParams(5)
seed = build_seed(par, 3, par.from_int(5, 12), 2)
res = identify(seed.pair, 3)
print("   FL(5,3,5):", res.label)
assert res.label == irreducible_label(5, 2, 1), res.label
print("4. FL identify OK", round(time.time() - t0, 1))

# --- 5. steep oracle p=3 k=5 ap=27 (h=4 is the (p+1)|h case, étale cycle)
par3 = FieldParams(3)
seed5 = build_seed(par3, 5, par3.from_int(27, 14), 4)
res5 = identify(seed5.pair, 5)
print("   steep(3,5,27):", res5.label)
assert res5.label == irreducible_label(3, 4, 1), res5.label
print("5. steep identify OK", round(time.time() - t0, 1))

print("total", round(time.time() - t0, 1), "s")
