"""Scratch probe for the bound evaluators; not part of the package."""
import math
import time

import numpy as np

from qrdkit import states as st
from qrdkit import distortion as dst
from qrdkit import isotropic as iso
from qrdkit.bounds import (achievability_embezzling, achievability_mes,
                           classical_kv_converse, converse_alt,
                           converse_simple_inner, ea_qrd_function,
                           iid_converse_rate, theorem10_sandwich,
                           _pullback, _omega_of_choi)
from qrdkit.states import (DensityOperator, PureState, SystemDims, bell_state,
                           depolarizing_channel, identity_channel,
                           maximally_mixed, purify)

rho_iso = maximally_mixed(2, label="A")
bell = bell_state(("R", "A"), dim=2)
delta1 = dst.entanglement_fidelity_observable(purify(rho_iso, ref_label="R"))

# 1. converse_alt isotropic n=1
res = converse_alt(bell.relabel({"A": "B"}), delta1, 0.0, 0.1,
                   bell.density().relabel({"A": "B"}))
want = 0.5 * (2.0 + math.log2(0.9))
print(f"[1] converse_alt n=1: {res.value:.10f}  want {want:.10f}  diff {abs(res.value-want):.2e}")

# 2. n-fold vs closed form
bvec = bell.vector
for n in (1, 2, 3):
    vec = bvec
    for _ in range(n - 1):
        vec = np.kron(vec, bvec)
    labels = tuple(x for i in range(n) for x in (f"R{i}", f"B{i}"))
    phi_n = PureState(vec, SystemDims(labels, (2,) * (2 * n)))
    sym = dst.SymbolwiseObservable(delta1, n)
    for D in (0.3, 0.5, 0.7):
        eps = 0.1
        r = converse_alt(phi_n, sym, D, eps, phi_n.density())
        oracle = n * iso.converse_rate(n, D, eps)
        print(f"[2] n={n} D={D}: {r.value:.12f} vs {oracle:.12f} "
              f"diff {abs(r.value-oracle):.2e}")

# 3. converse_simple_inner identity example
ident = identity_channel(2, in_label="A", out_label="B")
r = converse_simple_inner(bell, delta1, 0.0, 0.01, 0.05, ident)
want = 0.5 * (2.0 - math.log2(0.05) + math.log2(7.5e-4))
print(f"[3] inner identity: {r.value:.6f} want {want:.6f} method {r.parameters['method']} "
      f"bracket {r.parameters.get('beta_bracket')}")

# 4. alternating vs sdp on depolarizing
for p in (0.05, 0.1):
    ch = depolarizing_channel(p, in_label="A", out_label="B")
    ra = converse_simple_inner(bell, delta1, 0.8, 0.1, 0.25, ch, method="alternating")
    rs = converse_simple_inner(bell, delta1, 0.8, 0.1, 0.25, ch, method="sdp")
    print(f"[4] depol p={p}: alt {ra.value:.8f} (bracket {ra.parameters['beta_bracket']})"
          f" sdp {rs.value:.8f} diff {abs(ra.value-rs.value):.2e}")

# 5. adjointness of the Choi pullback
rng = np.random.default_rng(7)
phi = purify(rho_iso, ref_label="R")
dr, da, db = 2, 2, 2
phi4 = phi.density().matrix.reshape(dr, da, dr, da)
for _ in range(3):
    g = rng.normal(size=(dr * db, dr * db)) + 1j * rng.normal(size=(dr * db, dr * db))
    g = (g + g.conj().T) / 2
    j = rng.normal(size=(da * db, da * db)) + 1j * rng.normal(size=(da * db, da * db))
    j = (j + j.conj().T) / 2
    lhs = np.trace(g @ _omega_of_choi(j, phi4, (dr, da, db))).real
    rhs = np.trace(_pullback(g, phi4, (dr, da, db)) @ j).real
    print(f"[5] adjoint: {lhs:.10f} vs {rhs:.10f} diff {abs(lhs-rhs):.2e}")

# 6. ea_qrd sweep (the critical convergence probe)
def closed(D):
    if D >= 0.75:
        return 0.0
    probs = [1.0 - D, D / 3.0, D / 3.0, D / 3.0]
    H = -sum(p * math.log2(p) for p in probs if p > 0)
    return 1.0 - 0.5 * H

for D in (0.0, 0.1, 0.25, 0.5, 0.75):
    t0 = time.time()
    pt = ea_qrd_function(rho_iso, delta1, D)
    dt = time.time() - t0
    cf = closed(D)
    print(f"[6] D={D}: rate {pt.rate:.6f} closed {cf:.6f} diff {abs(pt.rate-cf):.2e} "
          f"gap {pt.gap:.2e} iters {pt.iterations} time {dt:.1f}s")

# 7. embezzling on Bell
r = achievability_embezzling(bell, ident, 0.5, delta=delta1, D=0.0)
imax_smooth_expect = 2.0 + math.log2(1.0 - 0.01)
chi1 = 2.0 * math.log2(10.0) + 4.0 + math.log2(math.log2(102.0))
print(f"[7] embez: {r.value:.6f} expect {0.5*imax_smooth_expect+chi1:.6f} "
      f"(unsmoothed 14.3821)  imax_half {r.parameters['imax_half']:.6f}")

# 8. sandwich singleton decomposition
up, lo = theorem10_sandwich(bell, delta1, 0.0, 0.01, 0.05, [ident])
gap = up.value - lo.value
decomp = up.parameters["chi1"] + lo.parameters["chi2"] + \
    up.parameters["imax_half"] - lo.parameters["imax_half"]
print(f"[8] sandwich: up {up.value:.6f} lo {lo.value:.6f} gap {gap:.10f} "
      f"decomp {decomp:.10f} diff {abs(gap-decomp):.2e} chi2 {lo.parameters['chi2']:.4f}")

# 9. iid f value
t0 = time.time()
r = iid_converse_rate(rho_iso, delta1, 100, 0.0, 0.01, 0.05)
print(f"[9] iid: f {r.parameters['f']:.6f} want 0.746772 value {r.value:.6f} "
      f"time {time.time()-t0:.1f}s")

# 10. classical kv uniform 4-ary Hamming D=0
p4 = np.full(4, 0.25)
ham = 1.0 - np.eye(4)
r = classical_kv_converse(p4, ham, 0.0, 0.1, p4)
print(f"[10] kv: {r.value:.10f} want {math.log2(0.9)+2:.10f}")

# 11. mes on Bell
r = achievability_mes(bell, ident, 0.01, delta=delta1, D=0.0)
print(f"[11] mes: {r.value:.6f} params dprime {r.parameters['delta_prime']:.6f} "
      f"eps_achieved {r.parameters['eps_achieved']:.6f}")
