"""Seeded invariant suites behind the validate subcommand.

Each suite draws its instances from a named RNG seed, checks an operator
inequality or a dual-route agreement, and reports pass/fail counts with a
short description of every failure.  The suites double as the acceptance
battery: property checks run on at least 100 instances, dual-route checks
compare independent computations of the same quantity.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .distortion import (SymbolwiseObservable, classical_cc_observable,
                         entanglement_fidelity_observable)
from .entropies import (beta_epsilon, d_max, h0, h0_smooth, h_min,
                        h_min_smooth, i_max, mutual_information, smooth_d_max,
                        von_neumann, d_h)
from .isotropic import log2_bigint, s_k
from .linalg import binary_entropy, eigh, hermitize, sqrtm_psd, trace_norm
from .protocol import hoeffding_check, verify_distortion_equivalence
from .states import (DensityOperator, depolarizing_channel, fidelity,
                     maximally_mixed, purified_distance, purify,
                     random_density, trace_distance)

SLACK = 1e-9


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: int
    total: int
    failures: tuple = ()

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "total": self.total,
                "failures": list(self.failures)}


def _result(name: str, failures: list, total: int) -> SuiteResult:
    return SuiteResult(name=name, passed=total - len(failures), total=total,
                       failures=tuple(failures[:20]))


# -------------------------------------------------------------- dual routes


def suite_lemma1(seed: int, pairs: int = 100) -> SuiteResult:
    """Hypothesis-testing sandwich: D_max^{sqrt(2(1-eps))} + log2(1/(1-eps))
    <= D_H^eps <= D_max + log2(1/(1-eps)) on random full-rank pairs."""
    rng = np.random.default_rng(seed)
    failures = []
    for i in range(pairs):
        dim = int(rng.integers(2, 5))
        r = random_density(rng, dim)
        s = random_density(rng, dim)
        bad = []
        for eps in (0.3, 0.5, 0.8):
            mid = d_h(r, s, eps)
            shift = math.log2(1.0 / (1.0 - eps))
            lo = smooth_d_max(r, s, math.sqrt(2.0 * (1.0 - eps))).value + shift
            hi = d_max(r, s) + shift
            if mid < lo - 1e-4 or mid > hi + 1e-4:
                bad.append(f"eps={eps}: {lo:.6f} <= {mid:.6f} <= {hi:.6f}")
        if bad:
            failures.append(f"pair {i} (dim {dim}): " + "; ".join(bad))
    return _result("lemma1", failures, pairs)


def suite_np_sdp(seed: int, instances: int = 50) -> SuiteResult:
    """Neyman-Pearson bisection vs SDP value of beta_eps on random pairs."""
    rng = np.random.default_rng(seed)
    failures = []
    for i in range(instances):
        dim = int(rng.integers(2, 9))
        r = random_density(rng, dim)
        s = random_density(rng, dim)
        eps = float(rng.uniform(0.05, 0.9))
        b_np = beta_epsilon(r, s, eps, method="np")
        b_sdp = beta_epsilon(r, s, eps, method="sdp")
        if abs(b_np - b_sdp) > 1e-6:
            failures.append(f"instance {i} (dim {dim}, eps {eps:.3f}): "
                            f"np {b_np:.9f} vs sdp {b_sdp:.9f}")
    return _result("np_sdp", failures, instances)


# --------------------------------------------------- spectral decomposition


def _structured_basis(base, n: int):
    """Product eigenvectors and averaged eigenvalues of the n-fold average."""
    vecs = base.eigenvectors
    vals = base.eigenvalues
    full = vecs
    for _ in range(n - 1):
        full = np.kron(full, vecs)
    avg = np.zeros(len(vals) ** n)
    for i, tup in enumerate(itertools.product(range(len(vals)), repeat=n)):
        avg[i] = sum(vals[t] for t in tup) / n
    return full, avg


def _group_columns(cols: np.ndarray, vals: np.ndarray, anchors) -> dict:
    """Projector onto each eigenvalue group, columns binned by anchor."""
    out = {}
    for anchor in anchors:
        sel = cols[:, np.abs(vals - anchor) <= 1e-9]
        out[anchor] = sel @ sel.conj().T
    return out


def suite_lemma7(seed: int = 0) -> SuiteResult:
    """Dense n-fold average observable vs the structured product spectrum.

    Checks that every tensor product of single-symbol eigenvectors is an
    eigenvector of the dense average with the averaged eigenvalue, that the
    structured value table reproduces the dense eigenvalue multiset, and
    (up to dimension 256) that per-eigenvalue spectral projectors from the
    dense eigendecomposition match the structured column sums to 1e-10.
    Above 256 the zero residual against a unitary product basis already
    pins the dense spectral decomposition to the structured one.
    """
    bell = purify(maximally_mixed(2, label="A"), ref_label="R")
    cases = [("ent_fid", entanglement_fidelity_observable(bell)),
             ("hamming4", classical_cc_observable(1.0 - np.eye(4)))]
    failures = []
    total = 0
    for name, base in cases:
        for n in (2, 3):
            total += 1
            sym = SymbolwiseObservable(base, n)
            dense = sym.dense()
            full, avg = _structured_basis(base, n)
            resid = dense @ full - full * avg[None, :]
            worst = float(np.max(np.abs(resid)))
            if worst > 1e-10:
                failures.append(f"{name} n={n}: eigenvector residual {worst:.2e}")
                continue
            anchors = sorted({round(v, 9) for v in avg})
            w, v = np.linalg.eigh(dense)
            if float(np.max(np.abs(np.sort(np.real(w)) - np.sort(avg)))) > 1e-10:
                failures.append(f"{name} n={n}: eigenvalue multiset mismatch")
                continue
            counted = sorted((v_, c) for v_, c in sym.value_counts)
            rebuilt = [int(np.sum(np.abs(avg - a) <= 1e-9)) for a in anchors]
            if [c for _, c in counted] != rebuilt:
                failures.append(f"{name} n={n}: multiplicity table mismatch")
                continue
            if dense.shape[0] <= 256:
                p_dense = _group_columns(v, np.real(w), anchors)
                p_struct = _group_columns(full, avg, anchors)
                gap = max(float(np.max(np.abs(p_dense[a] - p_struct[a])))
                          for a in anchors)
                if gap > 1e-10:
                    failures.append(f"{name} n={n}: projector gap {gap:.2e}")
    return _result("lemma7", failures, total)


# ----------------------------------------------------------- protocol suites


def suite_lemma13(seed: int) -> SuiteResult:
    """Excess-distortion tail vs its exponential bound, depolarizing 0.2."""
    phi = purify(maximally_mixed(2, label="A"), ref_label="R")
    delta = entanglement_fidelity_observable(phi)
    depol = depolarizing_channel(0.2, in_label="A", out_label="B")
    failures = []
    for n in (25, 50, 100):
        try:
            rep = hoeffding_check(delta, depol, phi, n=n, D=0.3, trials=4000,
                                  seed=seed)
        except ArithmeticError as e:
            failures.append(f"n={n}: {e}")
            continue
        if rep.dp_exact > rep.hoeffding_bound:
            failures.append(f"n={n}: exact tail {rep.dp_exact:.3e} above "
                            f"bound {rep.hoeffding_bound:.3e}")
    return _result("lemma13", failures, 3)


def suite_step5(seed: int = 0) -> SuiteResult:
    """Exhaustive quantum-classical distortion equivalence at n = 1, 2."""
    failures = []
    total = 0
    for n in (1, 2):
        for x in itertools.product(range(4), repeat=n):
            for y in itertools.product(range(4), repeat=n):
                total += 1
                lhs, rhs = verify_distortion_equivalence(n, x, y)
                if abs(lhs - rhs) > 1e-12:
                    failures.append(f"n={n} x={x} y={y}: |{lhs}-{rhs}|")
    return _result("step5", failures, total)


def suite_band(seed: int) -> SuiteResult:
    """log2 S_{floor(nD)} stays within 3 bits of its two-term estimate."""
    rng = np.random.default_rng(seed)
    ns = [16 << i for i in range(9)]
    ns += sorted(int(v) for v in rng.integers(16, 4097, size=11))
    failures = []
    d = 0.25
    for n in ns:
        k = math.floor(n * d)
        approx = n * binary_entropy(d) + n * d * math.log2(3.0) \
            - 0.5 * math.log2(n)
        gap = abs(log2_bigint(s_k(n, k)) - approx)
        if gap > 3.0:
            failures.append(f"n={n}: band gap {gap:.3f} bits")
    return _result("band", failures, len(ns))


# ------------------------------------------------------- operator properties


def _random_effect(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = hermitize(a + a.conj().T)[0]
    w, v = eigh(m)
    lo, hi = float(w[0]), float(w[-1])
    scaled = (w - lo) / (hi - lo) if hi > lo else np.full_like(w, 0.5)
    return (v * scaled) @ v.conj().T


def suite_properties(seed: int, instances: int = 100) -> SuiteResult:
    """Distance and entropy inequalities on random instances.

    Covers the fidelity-trace-distance (FvG) bounds, the purified-distance
    triangle inequality, the gentle operator bound, the trace inequality
    Tr(L r) >= Tr(L s) - T(r, s), smoothing monotonicity, max-information
    against mutual information, and the H_0 >= H >= H_min chain.
    """
    rng = np.random.default_rng(seed)
    failures = []
    total = 0

    def check(label: str, ok: bool):
        nonlocal total
        total += 1
        if not ok:
            failures.append(label)

    for i in range(instances):
        dim = int(rng.integers(2, 7))
        r = random_density(rng, dim)
        s = random_density(rng, dim)
        td = trace_distance(r, s)
        f = fidelity(r, s)
        check(f"fvg[{i}]", 1.0 - f <= td + SLACK
              and td <= math.sqrt(max(0.0, 1.0 - f * f)) + SLACK)

    for i in range(instances):
        dim = int(rng.integers(2, 7))
        r, s, t = (random_density(rng, dim) for _ in range(3))
        check(f"triangle[{i}]", purified_distance(r, t)
              <= purified_distance(r, s) + purified_distance(s, t) + SLACK)

    for i in range(instances):
        dim = int(rng.integers(2, 7))
        r = random_density(rng, dim)
        lam = _random_effect(rng, dim)
        delta = max(0.0, 1.0 - float(np.real(np.trace(lam @ r.matrix))))
        sq = sqrtm_psd(lam)
        moved = trace_norm(r.matrix - sq @ r.matrix @ sq)
        check(f"gentle[{i}]", moved <= 2.0 * math.sqrt(delta) + SLACK)

    for i in range(instances):
        dim = int(rng.integers(2, 7))
        r = random_density(rng, dim)
        s = random_density(rng, dim)
        lam = _random_effect(rng, dim)
        lhs = float(np.real(np.trace(lam @ r.matrix)))
        rhs = float(np.real(np.trace(lam @ s.matrix))) - trace_distance(r, s)
        check(f"trace_ineq[{i}]", lhs >= rhs - SLACK)

    for i in range(instances):
        dim = int(rng.integers(2, 4))
        r = random_density(rng, dim)
        s = random_density(rng, dim)
        e1 = float(rng.uniform(0.02, 0.3))
        e2 = e1 + float(rng.uniform(0.05, 0.4))
        hi = smooth_d_max(r, s, e1).value
        lo = smooth_d_max(r, s, e2).value
        check(f"smooth_monotone[{i}]", lo <= hi + 1e-6)

    for i in range(instances):
        da, db = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        joint = random_density(rng, da * db)
        rho = DensityOperator(joint.matrix,
                              dims=_two_system(da, db), validate=False)
        check(f"imax_mi[{i}]",
              i_max(rho, b="B") >= mutual_information(rho, "B") - 1e-7)

    for i in range(instances):
        dim = int(rng.integers(2, 7))
        r = random_density(rng, dim, rank=int(rng.integers(1, dim + 1)))
        check(f"entropy_order[{i}]",
              h0(r) >= von_neumann(r) - SLACK
              and von_neumann(r) >= h_min(r) - SLACK)

    return _result("properties", failures, total)


def _two_system(da: int, db: int):
    from .states import SystemDims
    return SystemDims(("A", "B"), (da, db))


def suite_smoothing_order(seed: int, instances: int = 100) -> SuiteResult:
    """Smoothed entropies move the right way: h0 falls, h_min rises."""
    rng = np.random.default_rng(seed)
    failures = []
    for i in range(instances):
        dim = int(rng.integers(2, 5))
        r = random_density(rng, dim)
        e = float(rng.uniform(0.05, 0.4))
        if h0_smooth(r, e).value > h0(r) + SLACK:
            failures.append(f"h0[{i}]")
        joint = random_density(rng, 4)
        rho = DensityOperator(joint.matrix, dims=_two_system(2, 2),
                              validate=False)
        exact = h_min_smooth(rho, cond=("B",), eps=0.0).value
        smoothed = h_min_smooth(rho, cond=("B",), eps=e).value
        if smoothed < exact - 1e-6:
            failures.append(f"hmin[{i}]: {smoothed:.6f} < {exact:.6f}")
    return _result("smoothing_order", failures, instances)


SUITES = {
    "lemma1": suite_lemma1,
    "np_sdp": suite_np_sdp,
    "lemma7": suite_lemma7,
    "lemma13": suite_lemma13,
    "step5": suite_step5,
    "band": suite_band,
    "properties": suite_properties,
    "smoothing_order": suite_smoothing_order,
}


def run_suites(names, seed: int):
    """Resolve suite names ("all" included) and run them in a stable order."""
    if isinstance(names, str):
        names = [names]
    expanded = []
    for name in names:
        if name == "all":
            expanded.extend(SUITES)
        elif name in SUITES:
            expanded.append(name)
        else:
            raise ValueError(f"unknown suite {name!r}; choose from "
                             f"{', '.join(sorted(SUITES))} or all")
    seen = dict.fromkeys(expanded)
    return [SUITES[name](seed) for name in seen]
