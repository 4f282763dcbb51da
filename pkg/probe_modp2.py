"""Second probe wave: more oracles, twists, conjugates, timing."""
import random
import time

from crysred.errors import NoMatch, IndeterminateAtPrecision
from crysred.linalg import Mat2
from crysred.modp import (
    get_catalog, identify, irreducible_label, prepare_residue_pair,
    split_label,
)
from crysred.padic import FieldParams
from crysred.pairs import (
    PhiGammaPair, mat_res_gamma, mat_res_inverse_unit, mat_res_phi,
)
from crysred.series import ResidueSeries, res_one, res_zero
from crysred.wach import build_seed

t0 = time.time()


def reduce_label(p, k, ap_int, n, x_prec_extra=8):
    par = FieldParams(p)
    seed = build_seed(par, k, par.from_int(ap_int, n + x_prec_extra), n)
    return identify(seed.pair, k).label


# --- 1. steep p=3 k=6,7 with ap=27
lab6 = reduce_label(3, 6, 27, 4)
print("steep(3,6,27):", lab6)
assert lab6 == irreducible_label(3, 5, 1), lab6
lab7 = reduce_label(3, 7, 27, 4)
print("steep(3,7,27):", lab7)
assert lab7 == irreducible_label(3, 6, 1), lab7   # canonicalizes to h=2
assert lab7.h == 2
print("1. steep k=6,7 OK", round(time.time() - t0, 1))

# --- 2. FL ladder p=3: k=2,3 ap=3
for k in (2, 3):
    lab = reduce_label(3, k, 3, 2)
    print(f"FL(3,{k},3):", lab)
    assert lab == irreducible_label(3, k - 1, 1), lab
print("2. FL p=3 OK", round(time.time() - t0, 1))

# --- 3. omega-twist ladder: scale G of a k=2 FL pair by chi_bar^-1;
#        h goes 1 -> 1 + (p+1) = 5
par3 = FieldParams(3)
seed = build_seed(par3, 2, par3.from_int(3, 10), 2)
P, G = prepare_residue_pair(seed.pair, 2)
c = pow(2, 3 - 2, 3)  # chi_bar^{-1} at p=3 (chi=2)
Gt = G.map(lambda f: f.scale(c))
pair_t = PhiGammaPair(P=P, G=Gt, k=2, base="residue", meta="twist-probe")
lab_t = identify(pair_t, 3).label   # weight bucket 3 is wide enough for h=5?
print("twist ladder:", lab_t)
print("3. twist OK", round(time.time() - t0, 1))

# --- 4. conjugate recovery: unit conjugation of an irreducible entry (p=3)
rng = random.Random(7)
cat = get_catalog(3, 3)
lab = irreducible_label(3, 2, 1)
entry = cat.entry(lab)
E_e = entry.P.a.n
rf = cat.rf
# build a random unit M = Id + X*(random low-degree), conjugate at E_e
for trial in range(3):
    pert = [[ResidueSeries(rf, [0] + [rng.randrange(3) for _ in range(4)], E_e)
             for _ in range(2)] for _ in range(2)]
    M = Mat2(res_one(rf, E_e) + pert[0][0], pert[0][1],
             pert[1][0], res_one(rf, E_e) + pert[1][1])
    Mi = mat_res_inverse_unit(M)
    Pc = Mi * entry.P * mat_res_phi(M)
    Gc = Mi * entry.G * mat_res_gamma(M, cat.chi)
    pair_c = PhiGammaPair(P=Pc, G=Gc, k=3, base="residue", meta="conj-probe")
    res = identify(pair_c, 3)
    assert res.label == lab, (trial, res.label)
print("4. irreducible conjugate recovery OK", round(time.time() - t0, 1))

# --- 5. conjugate recovery for a split entry
lab_s = split_label(3, (1, 0), (2, 1))
entry_s = cat.entry(lab_s)
E_s = entry_s.P.a.n
for trial in range(3):
    pert = [[ResidueSeries(rf, [0] + [rng.randrange(3) for _ in range(4)], E_s)
             for _ in range(2)] for _ in range(2)]
    M = Mat2(res_one(rf, E_s) + pert[0][0], pert[0][1],
             pert[1][0], res_one(rf, E_s) + pert[1][1])
    Mi = mat_res_inverse_unit(M)
    Pc = Mi * entry_s.P * mat_res_phi(M)
    Gc = Mi * entry_s.G * mat_res_gamma(M, cat.chi)
    pair_c = PhiGammaPair(P=Pc, G=Gc, k=3, base="residue", meta="conj-probe")
    res = identify(pair_c, 3)
    assert res.label == lab_s, (trial, res.label)
print("5. split conjugate recovery OK", round(time.time() - t0, 1))

# --- 6. p=7 FL timing: k=7, ap=7
t1 = time.time()
lab77 = reduce_label(7, 7, 7, 2)
print("FL(7,7,7):", lab77, "in", round(time.time() - t1, 1), "s")
assert lab77 == irreducible_label(7, 6, 1), lab77
print("6. p=7 OK", round(time.time() - t0, 1))

# --- 7. a mid-weight scan at p=3 to see what labels appear (k=4,5,6; ap=3,9)
for k in (4, 5, 6):
    for ap in (3, 9):
        try:
            lab = reduce_label(3, k, ap, 4)
            print(f"   (3,{k},{ap}) ->", lab)
        except (NoMatch, IndeterminateAtPrecision) as e:
            print(f"   (3,{k},{ap}) -> {type(e).__name__}: {e}")
print("7. scan done", round(time.time() - t0, 1))
