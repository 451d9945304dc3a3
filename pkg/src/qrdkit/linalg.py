"""Dense Hermitian linear algebra shared by every module.

All eigendecompositions in the toolkit go through this module so that a single
tolerance policy governs PSD checks, rank decisions, pseudo-inverse cutoffs and
eigenvalue grouping everywhere.  Logarithms are base 2 throughout the package;
natural-log intermediates are converted at the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LOG2E = float(np.log2(np.e))


@dataclass(frozen=True)
class TolerancePolicy:
    """Shared numerical tolerances.

    psd_rel    eigenvalue floor for PSD checks, relative to lambda_max(|M|)
    trace_abs  absolute tolerance on trace comparisons
    pinv_rel   pseudo-inverse cutoff, relative to lambda_max
    rank_rel   rank-counting cutoff (H_0), relative to lambda_max
    herm_rel   asymmetry norm above which symmetrization is reported
    """

    psd_rel: float = 1e-9
    trace_abs: float = 1e-9
    pinv_rel: float = 1e-12
    rank_rel: float = 1e-10
    herm_rel: float = 1e-9


DEFAULT_TOL = TolerancePolicy()


def hermitize(m: np.ndarray) -> tuple[np.ndarray, float]:
    """Return ((M + M^dag)/2, asymmetry norm)."""
    m = np.asarray(m, dtype=complex)
    h = 0.5 * (m + m.conj().T)
    asym = float(np.linalg.norm(m - m.conj().T, ord="fro"))
    return h, asym


def eigh(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian eigendecomposition after symmetrization; ascending eigenvalues."""
    h, _ = hermitize(m)
    w, v = np.linalg.eigh(h)
    return w, v


def opnorm(m: np.ndarray) -> float:
    """Operator (spectral) norm of a Hermitian matrix."""
    w, _ = eigh(m)
    return float(np.max(np.abs(w))) if w.size else 0.0


def min_eig(m: np.ndarray) -> float:
    w, _ = eigh(m)
    return float(w[0])


def is_psd(m: np.ndarray, policy: TolerancePolicy = DEFAULT_TOL) -> bool:
    w, _ = eigh(m)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    return bool(np.all(w >= -policy.psd_rel * max(scale, 1e-300)))


def psd_clip(m: np.ndarray) -> np.ndarray:
    """Project onto the PSD cone by clipping negative eigenvalues."""
    w, v = eigh(m)
    w = np.clip(w, 0.0, None)
    return (v * w) @ v.conj().T


def sqrtm_psd(m: np.ndarray) -> np.ndarray:
    """Principal square root of a PSD matrix (negative round-off clipped)."""
    w, v = eigh(m)
    w = np.sqrt(np.clip(w, 0.0, None))
    return (v * w) @ v.conj().T


def pinv_sqrt_psd(m: np.ndarray, policy: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """M^{-1/2} on the support of M; eigenvalues below the cutoff are dropped."""
    w, v = eigh(m)
    scale = float(np.max(w)) if w.size else 0.0
    cutoff = policy.pinv_rel * max(scale, 1e-300)
    inv = np.where(w > cutoff, 1.0 / np.sqrt(np.clip(w, cutoff, None)), 0.0)
    return (v * inv) @ v.conj().T


def support_projector(m: np.ndarray, policy: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Projector onto the span of eigenvectors with eigenvalue > pinv cutoff."""
    w, v = eigh(m)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    keep = w > policy.pinv_rel * max(scale, 1e-300)
    vk = v[:, keep]
    return vk @ vk.conj().T


def trace_norm(m: np.ndarray) -> float:
    """Sum of singular values (trace norm) of a general matrix."""
    s = np.linalg.svd(np.asarray(m, dtype=complex), compute_uv=False)
    return float(np.sum(s))


def rank_psd(m: np.ndarray, policy: TolerancePolicy = DEFAULT_TOL) -> int:
    """Eigenvalue count above the rank cutoff rank_rel * lambda_max."""
    w, _ = eigh(m)
    scale = float(np.max(w)) if w.size else 0.0
    if scale <= 0.0:
        return 0
    return int(np.sum(w > policy.rank_rel * scale))


def group_eigenvalues(w: np.ndarray, rel_gap: float = 1e-10) -> list[tuple[float, list[int]]]:
    """Group sorted-or-unsorted eigenvalues into clusters separated by rel_gap.

    Returns [(representative value, member indices)] sorted by value. The
    representative is the mean of the cluster; the gap threshold is relative to
    the overall spectral scale so multiplicity bookkeeping is stable.
    """
    w = np.asarray(w, dtype=float)
    order = np.argsort(w)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    thr = rel_gap * max(scale, 1e-300)
    groups: list[tuple[float, list[int]]] = []
    current: list[int] = []
    for idx in order:
        if current and abs(w[idx] - w[current[-1]]) > thr:
            groups.append((float(np.mean(w[current])), current))
            current = []
        current.append(int(idx))
    if current:
        groups.append((float(np.mean(w[current])), current))
    return groups


def xlog2x(p: np.ndarray) -> np.ndarray:
    """Entrywise p*log2(p) with the 0*log0 = 0 convention."""
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    pos = p > 0.0
    out[pos] = p[pos] * np.log2(p[pos])
    return out


def binary_entropy(p: float) -> float:
    """h2(p) in bits."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * np.log2(p) - (1.0 - p) * np.log2(1.0 - p))
