import numpy as np
from qrdkit.sdp import SdpProblem, solve, solve_standard, solve_lmi, _herm_basis

# 1. min Tr X  s.t.  X >= |0><0|   -> 1
P = np.zeros((2, 2), dtype=complex); P[0, 0] = 1.0
cons = []
for e in _herm_basis(2):
    cons.append(([e, -1.0 * e], float(np.real(np.trace(e @ P))), "=="))
p = SdpProblem(blocks=[2, 2], objective=[np.eye(2, dtype=complex), np.zeros((2, 2), dtype=complex)],
               constraints=cons)
sol = solve(p)
print("ex1 value", sol.primal_obj, sol.dual_obj, sol.status, "iters", len(sol.iterates))

# 2. beta_{0.5}(rho||rho) = 0.5 via box block
rho = np.diag([0.6, 0.4]).astype(complex)
p2 = SdpProblem(blocks=[2], objective=[rho], constraints=[([rho], 0.5, ">=")], box=[True])
s2 = solve(p2)
print("ex2 value", s2.primal_obj, s2.dual_obj, s2.status, "iters", len(s2.iterates))

# 3. LMI: max y s.t. y I <= diag(1,2)  -> 1
s3 = solve_lmi(np.array([1.0]), [[np.eye(2, dtype=complex)]], [np.diag([1.0, 2.0]).astype(complex)])
print("ex3 value", s3.dual_obj, s3.primal_obj, s3.status, "iters", len(s3.iterates))

# 4. random diagonal beta LP vs sorting oracle
def beta_lp_sorted(pv, qv, eps):
    ratio = pv / qv
    order = np.argsort(-ratio)
    need = 1.0 - eps
    got = 0.0
    cost = 0.0
    for i in order:
        if got >= need - 1e-15:
            break
        take = min(1.0, (need - got) / pv[i]) if pv[i] > 0 else 1.0
        got += take * pv[i]
        cost += take * qv[i]
    return cost

rng = np.random.default_rng(12345)
worst = 0.0
for trial in range(12):
    d = int(rng.integers(2, 9))
    pv = rng.random(d) + 1e-3; pv /= pv.sum()
    qv = rng.random(d) + 1e-3; qv /= qv.sum()
    eps = float(rng.uniform(0.05, 0.9))
    oracle = beta_lp_sorted(pv, qv, eps)
    prob = SdpProblem(blocks=[d], objective=[np.diag(qv).astype(complex)],
                      constraints=[([np.diag(pv).astype(complex)], 1.0 - eps, ">=")], box=[True])
    s = solve(prob)
    worst = max(worst, abs(s.primal_obj - oracle))
print("ex4 worst LP deviation", worst)

# 5. determinism
a = solve(p2).iterates
b = solve(p2).iterates
same = all(ra.primal == rb.primal and ra.dual == rb.dual for ra, rb in zip(a, b)) and len(a) == len(b)
print("ex5 bit-identical", same)
