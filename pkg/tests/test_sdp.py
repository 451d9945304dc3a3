"""Interior-point solver: worked examples, LP oracle sweep, determinism."""

import numpy as np
import pytest

from qrdkit.sdp import SdpProblem, solve, solve_lmi, solve_standard, _herm_basis

GAP_TOL = 1e-7


def _psd(rng, d, trace=1.0):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = g @ g.conj().T
    return (m * (trace / np.real(np.trace(m)))).astype(complex)


def test_min_trace_dominating_projector():
    # min Tr X  s.t.  X >= |0><0|  has value 1
    proj = np.zeros((2, 2), dtype=complex)
    proj[0, 0] = 1.0
    cons = [([e, -1.0 * e], float(np.real(np.trace(e @ proj))), "==")
            for e in _herm_basis(2)]
    p = SdpProblem(blocks=[2, 2],
                   objective=[np.eye(2, dtype=complex), np.zeros((2, 2), dtype=complex)],
                   constraints=cons)
    s = solve(p)
    assert s.status == "optimal"
    assert abs(s.primal_obj - 1.0) < 1e-6
    lo, hi = s.interval
    assert lo <= 1.0 + 1e-9 and hi >= 1.0 - 1e-9 and hi - lo < 1e-6


def test_hypothesis_test_value_on_equal_states():
    # min Tr(rho L) s.t. Tr(rho L) >= 1 - eps, 0 <= L <= I at eps = 0.5 gives 0.5
    rho = np.diag([0.6, 0.4]).astype(complex)
    p = SdpProblem(blocks=[2], objective=[rho],
                   constraints=[([rho], 0.5, ">=")], box=[True])
    s = solve(p)
    assert s.status == "optimal"
    assert abs(s.primal_obj - 0.5) < 1e-6


def test_diagonal_instances_match_sorted_lp():
    """50 random diagonal problems against a greedy likelihood-ratio oracle."""
    rng = np.random.default_rng(424242)
    for _ in range(50):
        d = int(rng.integers(2, 9))
        pv = rng.random(d) + 1e-3
        pv /= pv.sum()
        qv = rng.random(d) + 1e-3
        qv /= qv.sum()
        eps = float(rng.uniform(0.05, 0.9))

        # oracle: fill L in decreasing p/q ratio until the mass constraint binds
        order = np.argsort(-(pv / qv))
        need, cost = 1.0 - eps, 0.0
        for i in order:
            if need <= 1e-15:
                break
            take = min(1.0, need / pv[i])
            cost += take * qv[i]
            need -= take * pv[i]

        prob = SdpProblem(blocks=[d], objective=[np.diag(qv).astype(complex)],
                          constraints=[([np.diag(pv).astype(complex)], 1.0 - eps, ">=")],
                          box=[True])
        s = solve(prob)
        assert s.status == "optimal"
        assert abs(s.primal_obj - cost) < 1e-7


def test_lmi_orientation():
    # max y s.t. y I <= diag(1, 2)  -> 1, with certificate interval around it
    s = solve_lmi(np.array([1.0]), [[np.eye(2, dtype=complex)]],
                  [np.diag([1.0, 2.0]).astype(complex)])
    assert s.status == "optimal"
    assert abs(s.dual_obj - 1.0) < 1e-6
    assert s.dual_obj <= s.primal_obj + 1e-9


def test_weak_duality_along_the_path():
    # gap + feasibility slack stays nonnegative at every logged iterate
    rng = np.random.default_rng(9)
    rho = _psd(rng, 5)
    sig = _psd(rng, 5)
    p = SdpProblem(blocks=[5], objective=[sig],
                   constraints=[([rho], 0.8, ">=")], box=[True])
    s = solve(p, tol_gap=1e-9, max_iter=100)
    assert s.status == "optimal"
    for r in s.iterates:
        # residual-corrected weak duality; exact once feasible
        assert r.primal - r.dual >= -10.0 * (r.res_primal + r.res_dual) - 1e-9
    tail = [r for r in s.iterates if r.res_primal < 1e-8 and r.res_dual < 1e-8]
    assert tail, "no nearly-feasible iterates logged"
    for r in tail:
        assert r.primal - r.dual >= -1e-8


def test_deterministic_bit_identical():
    rng = np.random.default_rng(31)
    rho = _psd(rng, 4)
    sig = _psd(rng, 4)
    p = SdpProblem(blocks=[4], objective=[sig],
                   constraints=[([rho], 0.7, ">=")], box=[True])
    a = solve(p)
    b = solve(p)
    assert len(a.iterates) == len(b.iterates)
    for ra, rb in zip(a.iterates, b.iterates):
        assert ra.primal == rb.primal and ra.dual == rb.dual and ra.mu == rb.mu
    assert np.array_equal(a.primal[0], b.primal[0])


def test_iterate_csv_dump(tmp_path):
    rho = np.diag([0.6, 0.4]).astype(complex)
    p = SdpProblem(blocks=[2], objective=[rho],
                   constraints=[([rho], 0.5, ">=")], box=[True])
    path = tmp_path / "iters.csv"
    solve(p, debug_csv_path=str(path))
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "iter,primal,dual,gap"
    assert len(lines) >= 3


def test_dimension_guard():
    with pytest.raises(ValueError):
        SdpProblem(blocks=[300], objective=[np.eye(300, dtype=complex)],
                   constraints=[([np.eye(300, dtype=complex)], 1.0, "==")])
    with pytest.raises(ValueError):
        solve_standard([200, 100],
                       [np.eye(200, dtype=complex), np.eye(100, dtype=complex)],
                       [[np.eye(200, dtype=complex), None]], np.array([1.0]))


def test_infeasible_is_only_suspected():
    # Tr X = -1 with X >= 0 is infeasible; the solver must not claim certainty
    p = SdpProblem(blocks=[2], objective=[np.eye(2, dtype=complex)],
                   constraints=[([np.eye(2, dtype=complex)], -1.0, "==")])
    s = solve(p, max_iter=60)
    assert s.status in ("infeasible_suspected", "max_iter")


def test_standard_form_equality_only():
    # min <C, X> s.t. Tr X = 1, X >= 0 picks out the smallest eigenvalue
    rng = np.random.default_rng(77)
    c = _psd(rng, 4, trace=2.0)
    s = solve_standard([4], [c], [[np.eye(4, dtype=complex)]], np.array([1.0]))
    assert s.status == "optimal"
    lam_min = float(np.linalg.eigvalsh(c)[0])
    assert abs(s.primal_obj - lam_min) < 1e-6
