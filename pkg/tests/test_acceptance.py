"""Acceptance gate: the ten headline checks at their stated tolerances.

Every test prints one "criterion NN: PASS/FAIL" line with the measured
numbers, so `pytest -v -s tests/test_acceptance.py` reads as a checklist.
Budgets are wall-clock; tolerances are absolute unless noted.
"""

import math
import time

from qrdkit.bounds import ea_qrd_function
from qrdkit.distortion import entanglement_fidelity_observable
from qrdkit.isotropic import achievability_rate, converse_rate, rate_approx
from qrdkit.linalg import binary_entropy
from qrdkit.protocol import SimulationConfig, simulate_teleportation_rd
from qrdkit.states import maximally_mixed, purify
from qrdkit.validate import (suite_band, suite_lemma1, suite_lemma7,
                             suite_lemma13, suite_np_sdp, suite_properties,
                             suite_smoothing_order, suite_step5)

SEED = 20260817


def _verdict(num: int, ok: bool, detail: str) -> None:
    print(f"criterion {num:02d}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


def _suite_verdict(num: int, res, budget_s: float, elapsed: float) -> None:
    detail = (f"{res.name} {res.passed}/{res.total} in {elapsed:.1f}s "
              f"(budget {budget_s:.0f}s)")
    if res.failures:
        detail += f"; first failure: {res.failures[0]}"
    _verdict(num, res.ok and elapsed < budget_s, detail)


def test_criterion_01_assisted_rate_matches_closed_form():
    """R(D) = 1 - (1/2)[h2(D) + D log2 3] at three budgets, within 1e-3
    counting the certificate width, each point under 60 s."""
    rho = maximally_mixed(2, label="A")
    delta = entanglement_fidelity_observable(purify(rho, ref_label="R"))
    details = []
    ok = True
    for d in (0.1, 0.25, 0.5):
        t0 = time.monotonic()
        pt = ea_qrd_function(rho, delta, d, max_iter=2500)
        dt = time.monotonic() - t0
        closed = 1.0 - 0.5 * (binary_entropy(d) + d * math.log2(3.0))
        err = abs(pt.rate - closed) + (pt.certificate[1] - pt.certificate[0])
        ok = ok and err <= 1e-3 and dt < 60.0
        details.append(f"D={d}: rate {pt.rate:.5f} vs {closed:.5f} "
                       f"(err+width {err:.1e}, {dt:.1f}s)")
    _verdict(1, ok, "; ".join(details))


def test_criterion_02_blocklength_sweep_order_and_band():
    """converse <= achievability at every n; both within
    (1/4n)log2 n + 2/n of rate_approx from n = 32 on; under 5 s total."""
    t0 = time.monotonic()
    ok = True
    worst = 0.0
    for n in (4, 8, 16, 32, 64, 128):
        c = converse_rate(n, 0.25, 0.01)
        a = achievability_rate(n, 0.25, 0.01, quantum=True)
        r = rate_approx(n, 0.25, 0.01)
        ok = ok and c <= a
        if n >= 32:
            window = math.log2(n) / (4 * n) + 2.0 / n
            gap = max(abs(c - r), abs(a - r))
            worst = max(worst, gap - window)
            ok = ok and gap <= window
    dt = time.monotonic() - t0
    _verdict(2, ok and dt < 5.0,
             f"6 blocklengths, worst band overshoot {worst:.1e}, {dt:.2f}s")


def test_criterion_03_simulation_reproduces_ensemble_average():
    """20000-trial run at n=8, M=1000, D=0.25: the exact ensemble excess
    probability sits inside the 99% confidence interval; under 30 s."""
    t0 = time.monotonic()
    cfg = SimulationConfig(n=8, M=1000, D=0.25, trials=20000, seed=SEED)
    rep = simulate_teleportation_rd(cfg)
    dt = time.monotonic() - t0
    ok = (rep.ci_low <= rep.target <= rep.ci_high
          and abs(rep.target - 0.01448) < 5e-4 and dt < 30.0)
    _verdict(3, ok, f"empirical {rep.empirical_excess:.5f} in "
             f"[{rep.ci_low:.5f}, {rep.ci_high:.5f}] around target "
             f"{rep.target:.5f}, {dt:.1f}s")


def test_criterion_04_hypothesis_testing_sandwich():
    t0 = time.monotonic()
    res = suite_lemma1(SEED)
    _suite_verdict(4, res, 600.0, time.monotonic() - t0)


def test_criterion_05_np_vs_sdp_beta():
    t0 = time.monotonic()
    res = suite_np_sdp(SEED)
    _suite_verdict(5, res, 300.0, time.monotonic() - t0)


def test_criterion_06_average_observable_spectra():
    t0 = time.monotonic()
    res = suite_lemma7()
    _suite_verdict(6, res, 60.0, time.monotonic() - t0)


def test_criterion_07_excess_tail_bound():
    t0 = time.monotonic()
    res = suite_lemma13(SEED)
    _suite_verdict(7, res, 60.0, time.monotonic() - t0)


def test_criterion_08_distortion_equivalence_exhaustive():
    t0 = time.monotonic()
    res = suite_step5()
    _suite_verdict(8, res, 60.0, time.monotonic() - t0)


def test_criterion_09_sphere_size_band():
    t0 = time.monotonic()
    res = suite_band(SEED)
    _suite_verdict(9, res, 1.0, time.monotonic() - t0)


def test_criterion_10_property_suites():
    """Seven distance/entropy inequality families at 100 instances each,
    plus smoothing direction checks: zero violations."""
    t0 = time.monotonic()
    props = suite_properties(SEED)
    order = suite_smoothing_order(SEED)
    dt = time.monotonic() - t0
    ok = props.ok and order.ok
    detail = (f"properties {props.passed}/{props.total}, smoothing_order "
              f"{order.passed}/{order.total} in {dt:.1f}s")
    if props.failures:
        detail += f"; first: {props.failures[0]}"
    if order.failures:
        detail += f"; first: {order.failures[0]}"
    _verdict(10, ok, detail)
