"""Scratch probe for the protocol module; frozen oracles feed the tests."""

import itertools
import math
import time

import numpy as np

from qrdkit.distortion import entanglement_fidelity_observable
from qrdkit.isotropic import achievability_eps
from qrdkit.protocol import (HoeffdingReport, SimulationConfig,
                             clopper_pearson, hoeffding_check,
                             simulate_teleportation_rd,
                             verify_distortion_equivalence)
from qrdkit.states import (depolarizing_channel, identity_channel,
                           maximally_mixed, purify)

PHI = purify(maximally_mixed(2, label="A"), ref_label="R")
DELTA = entanglement_fidelity_observable(PHI)

print("[1] headline simulation n=8 M=1000 D=0.25 trials=20000")
cfg = SimulationConfig(n=8, M=1000, D=0.25, trials=20000, seed=20260817)
t0 = time.time()
rep = simulate_teleportation_rd(cfg)
dt = time.time() - t0
print(f"    empirical={rep.empirical_excess:.6f} ci=({rep.ci_low:.6f},"
      f"{rep.ci_high:.6f}) target={rep.target:.6f} time={dt:.2f}s")
assert rep.ci_low <= rep.target <= rep.ci_high, "target outside CI"
assert abs(rep.target - 0.01448) < 5e-4
print(f"    mean_distortion_hat={rep.mean_distortion_hat:.6f}")

print("[2] determinism + threads")
rep2 = simulate_teleportation_rd(cfg)
assert rep == rep2 and np.array_equal(rep.per_trial_distortion,
                                      rep2.per_trial_distortion)
rep4 = simulate_teleportation_rd(cfg, threads=4)
assert rep == rep4 and np.array_equal(rep.per_trial_distortion,
                                      rep4.per_trial_distortion)
print("    bit-identical across reruns and thread counts")

print("[3] trivial examples")
r = simulate_teleportation_rd(SimulationConfig(n=4, M=3, D=1.0, trials=500,
                                               seed=7))
assert r.empirical_excess == 0.0 and r.target == 0.0
full = np.array(list(itertools.product(range(4), repeat=2)), dtype=np.uint8)
r = simulate_teleportation_rd(SimulationConfig(
    n=2, M=16, D=0.0, trials=300, seed=7, codebook_mode="fixed",
    codebook=full))
assert r.empirical_excess == 0.0 and r.mean_distortion_hat == 0.0
print("    D>=1 and full-codebook runs are excess-free")

print("[4] z-scores over 30 seeded runs (n=8 M=1000 D=0.25 trials=1000)")
target = achievability_eps(8, 1000, 0.25)
sd = math.sqrt(target * (1.0 - target) / 1000)
zs = []
for s in range(30):
    r = simulate_teleportation_rd(SimulationConfig(
        n=8, M=1000, D=0.25, trials=1000, seed=1000 + s))
    zs.append(abs(r.empirical_excess - target) / sd)
print(f"    max z = {max(zs):.2f}")
assert max(zs) < 4.0

print("[5] distortion equivalence")
for n, x, y, want in [(1, [0], [0], 0.0), (1, [0], [1], 1.0),
                      (3, [0, 1, 2], [0, 1, 3], 1.0 / 3.0)]:
    lhs, rhs = verify_distortion_equivalence(n, x, y)
    print(f"    n={n} x={x} y={y} -> ({lhs:.12f}, {rhs:.12f})")
    assert abs(lhs - rhs) < 1e-12 and abs(rhs - want) < 1e-12
worst = 0.0
for n in (1, 2):
    for x in itertools.product(range(4), repeat=n):
        for y in itertools.product(range(4), repeat=n):
            lhs, rhs = verify_distortion_equivalence(n, x, y)
            worst = max(worst, abs(lhs - rhs))
print(f"    exhaustive n=1,2 worst |lhs-rhs| = {worst:.3e}")
assert worst < 1e-12

print("[6] hoeffding: identity channel")
ident = identity_channel(2, in_label="A", out_label="B")
h = hoeffding_check(DELTA, ident, PHI, n=20, D=0.1, trials=2000, seed=11)
print(f"    estimate={h.estimate} dp={h.dp_exact} bound={h.hoeffding_bound:.4f}")
assert h.estimate == 0.0 and h.dp_exact < 1e-30

print("[7] hoeffding: depolarizing p=0.2 D=0.3")
depol = depolarizing_channel(0.2, in_label="A", out_label="B")
for n in (25, 50, 100):
    t0 = time.time()
    h = hoeffding_check(DELTA, depol, PHI, n=n, D=0.3, trials=4000,
                        seed=20260817)
    print(f"    n={n:3d} mean={h.mean_distortion:.4f} gap={h.delta_gap:.4f} "
          f"est={h.estimate:.5f} ci=({h.ci_low:.5f},{h.ci_high:.5f}) "
          f"bound={h.hoeffding_bound:.5f} dp={h.dp_exact:.6e} "
          f"t={time.time()-t0:.2f}s")
    assert abs(h.mean_distortion - 0.15) < 1e-12
    assert h.dp_exact <= h.hoeffding_bound
rates = []
for n in (25, 50, 100):
    h = hoeffding_check(DELTA, depol, PHI, n=n, D=0.3, trials=500, seed=3)
    rates.append(-math.log(h.dp_exact) / n)
print(f"    per-n decay rates (nats): {[f'{r:.5f}' for r in rates]}")
assert rates[0] >= rates[1] >= rates[2] >= 2 * 0.15 ** 2  # Fekete + Hoeffding

print("[8] guards")
try:
    SimulationConfig(n=2 ** 15, M=2 ** 14, D=0.2, trials=1, seed=0)
    raise SystemExit("memory guard missed")
except ValueError as e:
    print(f"    memory guard: {e}")
try:
    hoeffding_check(DELTA, depol, PHI, n=10, D=0.1, trials=10, seed=0)
    raise SystemExit("gap guard missed")
except ValueError as e:
    print(f"    gap guard: {e}")

print("[9] CP interval sanity")
assert clopper_pearson(0, 100) == (0.0, clopper_pearson(0, 100)[1])
lo, hi = clopper_pearson(5, 100)
print(f"    k=5 n=100 -> ({lo:.5f}, {hi:.5f})")
assert lo < 0.05 < hi

print("all probe sections green")
