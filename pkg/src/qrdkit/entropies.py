"""One-shot entropic quantities, all in bits.

Covers von Neumann entropy and friends, the hypothesis-testing quantities
(beta_epsilon and d_h), max-relative entropy and its smoothed version,
conditional min-entropy, Renyi order-zero entropy, and max-information with
two smoothing variants.  Smoothing balls are purified-distance balls over
subnormalized states throughout.

beta_epsilon has two backends: an eigenvalue/bisection routine (exact up to
bisection width, the default) and the interior-point solver as a slow oracle.
SDP-backed quantities report a certified interval from the solver's duality
gap; the nonconvex smoothed max-information reports heuristic_upper_bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    eigh,
    hermitize,
    opnorm,
    pinv_sqrt_psd,
    psd_clip,
    rank_psd,
    support_projector,
    xlog2x,
)
from .sdp import SdpProblem, _herm_basis, ip, solve, solve_lmi
from .states import (
    DensityOperator,
    SystemDims,
    partial_trace,
    permute_systems,
    purified_distance,
)

INF = math.inf


@dataclass
class EntropyResult:
    """value in bits; certainty records how the number was obtained."""

    value: float
    certainty: str  # exact | certified_interval | heuristic_upper_bound
    interval: tuple = None

    def __post_init__(self):
        if self.interval is not None:
            lo, hi = self.interval
            if not (lo <= self.value + 1e-12 and self.value <= hi + 1e-12):
                raise ValueError("interval must bracket the reported value")


def _mat(x) -> np.ndarray:
    if isinstance(x, DensityOperator):
        return x.matrix
    return np.asarray(x, dtype=complex)


# ------------------------------------------------------------ plain entropies


def von_neumann(rho) -> float:
    w, _ = eigh(_mat(rho))
    return float(sum(-xlog2x(max(x, 0.0)) for x in w))


def conditional_entropy(rho: DensityOperator, cond) -> float:
    """H(A|B) = H(AB) - H(B) for B = cond labels."""
    cond = (cond,) if isinstance(cond, str) else tuple(cond)
    return von_neumann(rho) - von_neumann(partial_trace(rho, keep=cond))


def mutual_information(rho: DensityOperator, part) -> float:
    """I(A;B) with A = part labels, B = the rest."""
    part = (part,) if isinstance(part, str) else tuple(part)
    rest = tuple(l for l in rho.dims.labels if l not in part)
    ha = von_neumann(partial_trace(rho, keep=part))
    hb = von_neumann(partial_trace(rho, keep=rest))
    return ha + hb - von_neumann(rho)


def relative_entropy(rho, sigma) -> float:
    """D(rho||sigma) in bits; +inf when supp(rho) escapes supp(sigma)."""
    r = _mat(rho)
    s = _mat(sigma)
    proj = support_projector(s)
    leak = float(np.real(np.trace(r - proj @ r @ proj)))
    if leak > 1e-9:
        return INF
    wr, vr = eigh(r)
    ws, vs = eigh(s)
    smax = max(float(ws[-1]), 0.0)
    keep = ws > DEFAULT_TOL.rank_rel * max(smax, 1e-300)
    overlap = np.abs(vr.conj().T @ vs[:, keep]) ** 2
    logs = np.log2(ws[keep])
    cross = float(np.real(np.clip(wr, 0.0, None) @ overlap @ logs))
    own = float(sum(xlog2x(max(x, 0.0)) for x in wr))
    return own - cross


# --------------------------------------------------- hypothesis-testing side


def classical_beta_epsilon(p, q, eps: float) -> float:
    """Minimal type-II error sum(q*t) over tests 0<=t<=1 with sum(p*t) >= 1-eps.

    Solved exactly by filling t in decreasing likelihood-ratio order.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    ratio = np.where(q > 0, p / np.where(q > 0, q, 1.0), INF)
    order = np.argsort(-ratio, kind="stable")
    need = 1.0 - eps
    cost = 0.0
    for i in order:
        if need <= 1e-15:
            break
        take = 1.0 if p[i] <= 0 else min(1.0, need / p[i])
        cost += take * q[i]
        need -= take * p[i]
    return max(cost, 0.0)


def _beta_np(r: np.ndarray, s: np.ndarray, eps: float) -> float:
    d = r.shape[0]
    target = 1.0 - eps

    # tests supported on ker(sigma) are free
    proj_s = support_projector(s)
    ker = np.eye(d) - proj_s
    free = float(np.real(np.trace(ker @ r)))
    if free >= target - 1e-14:
        return 0.0

    ws, _ = eigh(s)
    smin_pos = float(min(x for x in ws if x > DEFAULT_TOL.rank_rel * max(ws[-1], 1e-300)))
    wr, _ = eigh(r)
    t_hi = max(float(wr[-1]) / smin_pos, 1.0)

    def mass_above(t):
        w, v = eigh(r - t * s)
        pos = v[:, w > 0]
        return float(np.real(np.trace(pos.conj().T @ r @ pos)))

    while mass_above(t_hi) > target:
        t_hi *= 2.0
        if t_hi > 1e30:
            break
    t_lo = 0.0
    for _ in range(200):
        mid = 0.5 * (t_lo + t_hi)
        if mass_above(mid) > target:
            t_lo = mid
        else:
            t_hi = mid
        if t_hi - t_lo <= 1e-15 * max(1.0, t_hi):
            break

    # randomize on the zero band of rho - t* sigma to hit 1-eps exactly
    t_star = t_hi
    delta = r - t_star * s
    w, v = eigh(delta)
    scale = max(float(np.max(np.abs(w))), 1e-300)
    band = max(1e-12 * scale, (t_hi - t_lo) * opnorm(s) * 4.0)
    pos = v[:, w > band]
    zero = v[:, np.abs(w) <= band]
    g_pos = float(np.real(np.trace(pos.conj().T @ r @ pos)))
    g_zero = float(np.real(np.trace(zero.conj().T @ r @ zero)))
    beta = float(np.real(np.trace(pos.conj().T @ s @ pos)))
    if g_zero > 1e-300:
        c = np.clip((target - g_pos) / g_zero, 0.0, 1.0)
        beta += c * float(np.real(np.trace(zero.conj().T @ s @ zero)))
    return max(beta, 0.0)


def _beta_sdp(r: np.ndarray, s: np.ndarray, eps: float, tol_gap: float = 1e-9) -> float:
    d = r.shape[0]
    prob = SdpProblem(blocks=[d], objective=[s.astype(complex)],
                      constraints=[([r.astype(complex)], 1.0 - eps, ">=")],
                      box=[True])
    sol = solve(prob, tol_gap=tol_gap, max_iter=200)
    if sol.status != "optimal":
        raise ArithmeticError(f"solver returned {sol.status} for beta_epsilon")
    return max(sol.primal_obj, 0.0)


def beta_epsilon(rho, sigma, eps: float, method: str = "np") -> float:
    """Optimal type-II error beta_eps(rho||sigma), tests 0 <= L <= I."""
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")
    r, s = _mat(rho), _mat(sigma)
    if method == "np":
        return _beta_np(r, s, eps)
    if method == "sdp":
        return _beta_sdp(r, s, eps)
    raise ValueError(f"unknown method {method!r}")


def d_h(rho, sigma, eps: float, method: str = "np") -> float:
    """Hypothesis-testing divergence -log2 beta_eps; +inf when beta = 0."""
    beta = beta_epsilon(rho, sigma, eps, method=method)
    if beta <= 0.0:
        return INF
    return -math.log2(beta)


# ----------------------------------------------------- max-relative entropy


def d_max(rho, sigma) -> float:
    """log2 of the smallest mu with rho <= mu sigma; +inf off support."""
    r, s = _mat(rho), _mat(sigma)
    proj = support_projector(s)
    leak = float(np.real(np.trace(r))) - float(np.real(np.trace(proj @ r @ proj)))
    if leak > 1e-9 * max(1.0, float(np.real(np.trace(r)))):
        return INF
    isq = pinv_sqrt_psd(s)
    w, _ = eigh(isq @ r @ isq)
    top = max(float(w[-1]), 0.0)
    if top <= 0.0:
        return -INF
    return math.log2(top)


def _embed(e: np.ndarray, big: int, r0: int, c0: int) -> np.ndarray:
    out = np.zeros((big, big), dtype=complex)
    k = e.shape[0]
    out[r0:r0 + k, c0:c0 + k] = e
    return out


def _support_basis(m: np.ndarray) -> np.ndarray:
    """Orthonormal columns spanning supp(m) for PSD m."""
    w, v = eigh(m)
    cutoff = DEFAULT_TOL.rank_rel * max(float(w[-1]), 1e-300)
    return v[:, w > cutoff]


def _cross_trace_functional(m_cross: np.ndarray, r: int, s: int) -> np.ndarray:
    """Hermitian A of size (r+s) with <A, Y> = Re Tr(W M) for W = Y[:r, r:]."""
    a = np.zeros((r + s, r + s), dtype=complex)
    for i in range(r):
        for j in range(s):
            a[r + j, i] = 0.5 * m_cross[j, i]
            a[i, r + j] = 0.5 * np.conj(m_cross[j, i])
    return a


def _smooth_dmax_sdp(r_mat: np.ndarray, s_mat: np.ndarray, eps: float,
                     tol_gap: float = 1e-9):
    """Shared core: returns (EntropyResult, optimizer rho_tilde).

    Both factors are support-restricted (rho's support for the pinned
    quadrant, sigma's support for the smoothed variable) so the feasible set
    keeps a strict interior even for pure or rank-deficient inputs.
    """
    u_r = _support_basis(r_mat)
    u_s = _support_basis(s_mat)
    r = u_r.shape[1]
    s = u_s.shape[1]
    rho_r = hermitize(u_r.conj().T @ r_mat @ u_r)[0]
    sig_s = hermitize(u_s.conj().T @ s_mat @ u_s)[0]
    m_cross = u_s.conj().T @ u_r  # (s, r)
    tr_r = float(np.real(np.trace(r_mat)))
    use_g = tr_r < 1.0 - 1e-12  # hyperbolic block only when rho is subnormalized
    y_dim = r + s

    blocks = [y_dim, s, 1] + ([2] if use_g else [])
    nb = len(blocks)
    objective = [np.zeros((b, b), dtype=complex) for b in blocks]
    objective[2] = np.ones((1, 1), dtype=complex)

    cons = []
    # pin upper-left quadrant of Y to rho on its support
    for e in _herm_basis(r):
        row = [None] * nb
        row[0] = _embed(e, y_dim, 0, 0)
        cons.append((row, ip(e, rho_r), "=="))
    # slack link: B1 + rho_tilde - mu sigma = 0 (all on supp sigma)
    eye_lr = _embed(np.eye(s, dtype=complex), y_dim, r, r)
    for e in _herm_basis(s):
        row = [None] * nb
        row[0] = _embed(e, y_dim, r, r)
        row[1] = e
        row[2] = np.array([[-ip(e, sig_s)]], dtype=complex)
        cons.append((row, 0.0, "=="))
    # Tr rho_tilde <= 1
    row = [None] * nb
    row[0] = eye_lr
    cons.append((row, 1.0, "<="))
    # fidelity: Re Tr(W M) (+ cross term g) >= sqrt(1 - eps^2)
    row = [None] * nb
    row[0] = _cross_trace_functional(m_cross, r, s)
    if use_g:
        row[3] = np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex)
    cons.append((row, math.sqrt(max(0.0, 1.0 - eps * eps)), ">="))
    if use_g:
        row = [None] * nb
        row[3] = np.diag([1.0, 0.0]).astype(complex)
        cons.append((row, 1.0 - tr_r, "=="))
        row = [None] * nb
        row[3] = np.diag([0.0, 1.0]).astype(complex)
        row[0] = eye_lr
        cons.append((row, 1.0, "=="))

    prob = SdpProblem(blocks=blocks, objective=objective, constraints=cons)
    sol = solve(prob, tol_gap=tol_gap, max_iter=300)
    if sol.status != "optimal":
        raise ArithmeticError(f"solver returned {sol.status} for smooth_d_max")
    mu_hi = max(sol.primal_obj, 1e-300)
    mu_lo = min(max(sol.dual_obj, 1e-300), mu_hi)  # roundoff can cross the gap
    res = EntropyResult(value=math.log2(mu_hi), certainty="certified_interval",
                        interval=(math.log2(mu_lo), math.log2(mu_hi)))
    tilde_s = psd_clip(hermitize(sol.primal[0][r:, r:])[0])
    rho_tilde = hermitize(u_s @ tilde_s @ u_s.conj().T)[0]
    return res, rho_tilde


def smooth_d_max(rho, sigma, eps: float, tol_gap: float = 1e-9) -> EntropyResult:
    """Smooth max-relative entropy over the purified-distance ball.

    eps = 0 degenerates to d_max.  eps >= 1 makes the ball contain the zero
    operator (purified distance never exceeds 1), so the value is -inf.
    """
    r, s = _mat(rho), _mat(sigma)
    if eps < 0.0:
        raise ValueError("eps must be nonnegative")
    if eps >= 1.0:
        return EntropyResult(value=-INF, certainty="exact")
    if eps == 0.0:
        v = d_max(r, s)
        return EntropyResult(value=v, certainty="exact", interval=(v, v))
    res, _ = _smooth_dmax_sdp(r, s, eps, tol_gap=tol_gap)
    return res


# ------------------------------------------------------------- min-entropy


def _cond_split(rho: DensityOperator, cond):
    cond = (cond,) if isinstance(cond, str) else tuple(cond)
    a_labels = tuple(l for l in rho.dims.labels if l not in cond)
    ordered = permute_systems(rho, a_labels + cond)
    da = ordered.dims.dim_of(a_labels) if a_labels else 1
    db = ordered.dims.dim_of(cond) if cond else 1
    return ordered.matrix, da, db, a_labels, cond


def h_min(rho: DensityOperator, cond=()) -> float:
    """Conditional min-entropy -log2 min{Tr s : rho_AB <= I_A (x) s_B}."""
    m, da, db, a_labels, cond = _cond_split(rho, cond)
    if db == 1:
        # trivial conditioner: -log of the largest eigenvalue
        return -math.log2(opnorm(m))
    basis = _herm_basis(da * db)
    cons = []
    for e in basis:
        tr_a = np.einsum("abad->bd", e.reshape(da, db, da, db))
        cons.append(([-tr_a, e], -ip(e, m), "=="))
    prob = SdpProblem(blocks=[db, da * db],
                      objective=[np.eye(db, dtype=complex),
                                 np.zeros((da * db, da * db), dtype=complex)],
                      constraints=cons)
    sol = solve(prob, tol_gap=1e-9, max_iter=200)
    if sol.status != "optimal":
        raise ArithmeticError(f"solver returned {sol.status} for h_min")
    return -math.log2(max(sol.primal_obj, 1e-300))


def h_min_smooth(rho: DensityOperator, cond, eps: float, tol_gap: float = 1e-9) -> EntropyResult:
    """Smooth conditional min-entropy: single joint SDP over (rho_tilde, s).

    The pinned quadrant lives on supp(rho); the smoothed state keeps the full
    space since I_A (x) s_B can dominate anywhere.
    """
    if not 0.0 <= eps < 1.0:
        raise ValueError("eps must lie in [0, 1)")
    if eps == 0.0:
        # the fidelity row pins rho_tilde = rho and kills the interior point;
        # the unsmoothed program is the same quantity and well posed
        v = h_min(rho, cond)
        return EntropyResult(value=v, certainty="exact", interval=(v, v))
    m, da, db, _, cond = _cond_split(rho, cond)
    d = da * db
    u_r = _support_basis(m)
    r = u_r.shape[1]
    rho_r = hermitize(u_r.conj().T @ m @ u_r)[0]
    tr_r = float(np.real(np.trace(m)))
    use_g = tr_r < 1.0 - 1e-12
    y_dim = r + d

    # blocks: Y=[[rho_r, W],[W*, rho_tilde]], Wslack = I(x)s - rho_tilde, s, (G)
    blocks = [y_dim, d, db] + ([2] if use_g else [])
    nb = len(blocks)
    objective = [np.zeros((b, b), dtype=complex) for b in blocks]
    objective[2] = np.eye(db, dtype=complex)

    cons = []
    for e in _herm_basis(r):
        row = [None] * nb
        row[0] = _embed(e, y_dim, 0, 0)
        cons.append((row, ip(e, rho_r), "=="))
    eye_lr = _embed(np.eye(d, dtype=complex), y_dim, r, r)
    for e in _herm_basis(d):
        row = [None] * nb
        row[0] = _embed(e, y_dim, r, r)
        row[1] = e
        row[2] = -np.einsum("abad->bd", e.reshape(da, db, da, db))
        cons.append((row, 0.0, "=="))
    row = [None] * nb
    row[0] = eye_lr
    cons.append((row, 1.0, "<="))
    row = [None] * nb
    row[0] = _cross_trace_functional(u_r, r, d)
    if use_g:
        row[3] = np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex)
    cons.append((row, math.sqrt(max(0.0, 1.0 - eps * eps)), ">="))
    if use_g:
        row = [None] * nb
        row[3] = np.diag([1.0, 0.0]).astype(complex)
        cons.append((row, 1.0 - tr_r, "=="))
        row = [None] * nb
        row[3] = np.diag([0.0, 1.0]).astype(complex)
        row[0] = eye_lr
        cons.append((row, 1.0, "=="))

    prob = SdpProblem(blocks=blocks, objective=objective, constraints=cons)
    sol = solve(prob, tol_gap=tol_gap, max_iter=300)
    if sol.status != "optimal":
        raise ArithmeticError(f"solver returned {sol.status} for h_min_smooth")
    hi = -math.log2(max(sol.dual_obj, 1e-300))
    lo = -math.log2(max(sol.primal_obj, 1e-300))
    hi = max(hi, lo)  # roundoff can cross the gap
    return EntropyResult(value=lo, certainty="certified_interval", interval=(lo, hi))


# ----------------------------------------------------------- order-zero side


def h0(rho) -> float:
    """log2 rank; eigenvalues above 1e-10 * lambda_max count toward the rank."""
    return math.log2(rank_psd(_mat(rho)))


def h0_smooth(rho, eps: float) -> EntropyResult:
    """Greedy smallest-eigenvalue truncation; optimal for the purified ball.

    Dropping total mass 'm' and renormalizing gives purified distance
    sqrt(m), so eigenvalues are dropped (smallest first) while the dropped
    mass stays within eps^2.  Any competitor of rank r satisfies
    F^2 <= Tr(P_r rho) <= (top-r mass), which makes this rank minimal.
    """
    if not 0.0 <= eps < 1.0:
        raise ValueError("eps must lie in [0, 1)")
    w, _ = eigh(_mat(rho))
    w = np.clip(w, 0.0, None)
    cutoff = DEFAULT_TOL.rank_rel * max(float(w[-1]), 1e-300)
    spectrum = sorted(float(x) for x in w if x > cutoff)
    budget = eps * eps
    dropped = 0.0
    kept = len(spectrum)
    for lam in spectrum:
        if dropped + lam <= budget + 1e-15:
            dropped += lam
            kept -= 1
        else:
            break
    kept = max(kept, 1)
    v = math.log2(kept)
    return EntropyResult(value=v, certainty="exact", interval=(v, v))


# ------------------------------------------------------------ max-information


def _split_rb(rho: DensityOperator, b):
    b = (b,) if isinstance(b, str) else tuple(b)
    r_labels = tuple(l for l in rho.dims.labels if l not in b)
    ordered = permute_systems(rho, r_labels + b)
    dr = ordered.dims.dim_of(r_labels) if r_labels else 1
    db = ordered.dims.dim_of(b)
    return ordered.matrix, dr, db


def _restrict_first_support(m: np.ndarray, dr: int, db: int, mr: np.ndarray):
    """Rotate the first factor onto supp(mr) to keep the LMI strictly feasible."""
    w, v = eigh(mr)
    cutoff = DEFAULT_TOL.rank_rel * max(float(w[-1]), 1e-300)
    cols = v[:, w > cutoff]
    r = cols.shape[1]
    u = np.kron(cols, np.eye(db))
    return hermitize(u.conj().T @ m @ u)[0], hermitize(cols.conj().T @ mr @ cols)[0], r


def _min_trace_product_factor(m: np.ndarray, fixed: np.ndarray, d_free: int,
                              fixed_side: str, tol_gap: float = 1e-9):
    """min Tr t over {t >= 0 : fixed (x) t >= m} (or t (x) fixed for side 'right').

    Solved in inequality orientation: variables are the entries of t, so the
    cost stays polynomial in the free dimension even when m is large.
    """
    basis = _herm_basis(d_free)
    b = np.array([-float(np.real(np.trace(e))) for e in basis])
    f_rows = []
    for e in basis:
        big = np.kron(fixed, e) if fixed_side == "left" else np.kron(e, fixed)
        f_rows.append([-big, -e])
    g_blocks = [(-m).astype(complex), np.zeros((d_free, d_free), dtype=complex)]
    sol = solve_lmi(b, f_rows, g_blocks, tol_gap=tol_gap, max_iter=250)
    if sol.status != "optimal":
        raise ArithmeticError(f"solver returned {sol.status} for product-factor SDP")
    # user problem is the max side: optimum in [dual_obj, primal_obj]
    val_hi = -sol.dual_obj
    val_lo = -sol.primal_obj
    t_opt = sum(y * e for y, e in zip(sol.y, basis))
    return val_lo, val_hi, psd_clip(hermitize(t_opt)[0])


def i_max(rho: DensityOperator, b="B") -> float:
    """Max-information log2 min{Tr s : rho_R (x) s_B >= rho_RB}."""
    m, dr, db = _split_rb(rho, b)
    mr = hermitize(np.einsum("arbr->ab", m.reshape(dr, db, dr, db)))[0]
    m_res, mr_res, _ = _restrict_first_support(m, dr, db, mr)
    _, hi, _ = _min_trace_product_factor(m_res, mr_res, db, "left")
    return math.log2(max(hi, 1e-300))


def _ball_candidates(m: np.ndarray, dr: int, db: int, eps: float):
    """Structured smoothing family: mixtures toward product states, plus a
    spectral truncation, each pushed to the ball boundary."""
    mr = hermitize(np.einsum("arbr->ab", m.reshape(dr, db, dr, db)))[0]
    mb = hermitize(np.einsum("rarb->ab", m.reshape(dr, db, dr, db)))[0]
    pi_b = np.eye(db) / db
    targets = [np.kron(mr, mb), np.kron(mr, pi_b)]

    def pdist(a_mat, b_mat):
        ra = DensityOperator(a_mat, SystemDims(("X",), (a_mat.shape[0],)), validate=False)
        rb = DensityOperator(b_mat, SystemDims(("X",), (b_mat.shape[0],)), validate=False)
        return purified_distance(ra, rb)

    cands = []
    for tgt in targets:
        lo, hi = 0.0, 1.0
        if pdist(m, hermitize((1 - hi) * m + hi * tgt)[0]) <= eps:
            s_star = 1.0
        else:
            for _ in range(40):
                mid = 0.5 * (lo + hi)
                cand = hermitize((1 - mid) * m + mid * tgt)[0]
                if pdist(m, cand) <= eps:
                    lo = mid
                else:
                    hi = mid
            s_star = lo
        for s in (s_star, 0.5 * s_star):
            if s > 0:
                cands.append(psd_clip(hermitize((1 - s) * m + s * tgt)[0]))

    # spectral truncation within the budget (scaling-invariant objective)
    w, v = eigh(m)
    order = np.argsort(w)
    budget = eps * eps
    dropped, cut = 0.0, []
    for idx in order:
        lam = max(float(w[idx]), 0.0)
        if dropped + lam <= budget and lam > 0:
            dropped += lam
            cut.append(idx)
        else:
            break
    if cut:
        keep = [i for i in range(len(w)) if i not in set(cut)]
        vt = v[:, keep]
        cands.append(psd_clip(hermitize(vt @ np.diag(w[keep]) @ vt.conj().T)[0]))

    # local truncation of either marginal; for pure inputs this trims the
    # Schmidt spectrum, which is where most of the smoothing gain lives
    tr_m = float(np.real(np.trace(m)))
    for side, marg, dloc in (("R", mr, dr), ("B", mb, db)):
        wl, vl = eigh(marg)
        order_l = np.argsort(wl)
        for k in range(dloc - 1, 0, -1):
            drop_mass = float(np.sum(np.clip(wl[order_l[:k]], 0.0, None)))
            if drop_mass > budget:
                continue
            kept = vl[:, order_l[k:]]
            proj = kept @ kept.conj().T
            big = np.kron(proj, np.eye(db)) if side == "R" else np.kron(np.eye(dr), proj)
            cand = hermitize(big @ m @ big)[0]
            tr_c = float(np.real(np.trace(cand)))
            if tr_c <= 0:
                continue
            cand = psd_clip(cand * (tr_m / tr_c))
            if pdist(m, cand) <= eps:
                cands.append(cand)
                break
    return cands


def _imax_of_matrix(m: np.ndarray, dr: int, db: int) -> float:
    mr = hermitize(np.einsum("arbr->ab", m.reshape(dr, db, dr, db)))[0]
    m_res, mr_res, _ = _restrict_first_support(m, dr, db, mr)
    _, hi, _ = _min_trace_product_factor(m_res, mr_res, db, "left")
    return math.log2(max(hi, 1e-300))


def _imax_smooth_alternating(m: np.ndarray, dr: int, db: int, eps: float,
                             restarts: int, rounds: int = 6) -> float:
    """Fix the reference factor, solve the joint convex SDP over
    (rho_tilde, s), re-read the smoothed marginal, repeat."""
    d = dr * db
    rng = np.random.default_rng(617)
    mr0 = hermitize(np.einsum("arbr->ab", m.reshape(dr, db, dr, db)))[0]
    u_r = _support_basis(m)
    r = u_r.shape[1]
    rho_r = hermitize(u_r.conj().T @ m @ u_r)[0]
    y_dim = r + d
    best = INF

    for attempt in range(max(restarts, 1)):
        if attempt == 0:
            tau = mr0.copy()
        else:
            g = rng.normal(size=(dr, dr)) + 1j * rng.normal(size=(dr, dr))
            pert = g @ g.conj().T
            pert /= np.real(np.trace(pert))
            tau = hermitize(0.7 * mr0 + 0.3 * pert)[0]
        rho_t = m.copy()
        for _ in range(rounds):
            # keep the fixed factor full-rank so the slack block has interior
            tau = hermitize(tau + 1e-10 * np.eye(dr))[0]
            blocks = [y_dim, d, db]
            nb = 3
            objective = [np.zeros((y_dim, y_dim), dtype=complex),
                         np.zeros((d, d), dtype=complex),
                         np.eye(db, dtype=complex)]
            cons = []
            for e in _herm_basis(r):
                row = [None] * nb
                row[0] = _embed(e, y_dim, 0, 0)
                cons.append((row, ip(e, rho_r), "=="))
            for e in _herm_basis(d):
                row = [None] * nb
                row[0] = _embed(e, y_dim, r, r)
                row[1] = e
                # <E, tau (x) s> = <contract(E, tau), s>
                ctr = np.einsum("cd,cadb->ab", tau.T, e.reshape(dr, db, dr, db))
                row[2] = -hermitize(ctr)[0]
                cons.append((row, 0.0, "=="))
            row = [None] * nb
            row[0] = _embed(np.eye(d, dtype=complex), y_dim, r, r)
            cons.append((row, 1.0, "<="))
            row = [None] * nb
            row[0] = _cross_trace_functional(u_r, r, d)
            cons.append((row, math.sqrt(max(0.0, 1.0 - eps * eps)), ">="))
            prob = SdpProblem(blocks=blocks, objective=objective, constraints=cons)
            try:
                sol = solve(prob, tol_gap=1e-8, max_iter=200)
            except Exception:
                break
            if sol.status != "optimal":
                break
            rho_t = psd_clip(hermitize(sol.primal[0][r:, r:])[0])
            new_tau = hermitize(np.einsum("arbr->ab", rho_t.reshape(dr, db, dr, db)))[0]
            if np.linalg.norm(new_tau - tau) < 1e-9:
                tau = new_tau
                break
            tau = new_tau
        # score with the exact max-information of the smoothed state
        try:
            best = min(best, _imax_of_matrix(rho_t, dr, db))
        except Exception:
            continue
    return best


def i_max_smooth(rho: DensityOperator, b="B", eps: float = 0.0,
                 restarts: int = 5) -> EntropyResult:
    """Smoothed max-information (own-marginal variant); heuristic upper bound.

    The joint problem is nonconvex because the reference marginal is the
    smoothed state's own.  Small systems run an alternating sequence of
    convex SDPs from several starts; larger systems search a structured
    family of ball members.  Either way the result is a valid upper bound,
    never claimed optimal.
    """
    if eps == 0.0:
        v = i_max(rho, b)
        return EntropyResult(value=v, certainty="exact", interval=(v, v))
    m, dr, db = _split_rb(rho, b)
    best = _imax_of_matrix(m, dr, db)
    if dr * db <= 8:
        best = min(best, _imax_smooth_alternating(m, dr, db, eps, restarts))
    for cand in _ball_candidates(m, dr, db, eps):
        try:
            best = min(best, _imax_of_matrix(cand, dr, db))
        except ArithmeticError:
            continue
    return EntropyResult(value=best, certainty="heuristic_upper_bound")


def i_max_alt(rho: DensityOperator, b="B", eps: float = 0.0,
              restarts: int = 5) -> EntropyResult:
    """Alternative smooth max-information: both marginals free.

    Alternates (ball-smoothing SDP | left-factor SDP | right-factor SDP);
    heuristic upper bound for the same reason as i_max_smooth.
    """
    m, dr, db = _split_rb(rho, b)
    d = dr * db
    rng = np.random.default_rng(991)
    mr = hermitize(np.einsum("arbr->ab", m.reshape(dr, db, dr, db)))[0]
    mb = hermitize(np.einsum("rarb->ab", m.reshape(dr, db, dr, db)))[0]
    tr = float(np.real(np.trace(m)))
    mr = mr / max(tr, 1e-300)
    mb = mb / max(tr, 1e-300)
    best = INF

    for attempt in range(max(restarts, 1)):
        if attempt == 0:
            sig, tau = mr.copy(), mb.copy()
        else:
            g = rng.normal(size=(dr, dr)) + 1j * rng.normal(size=(dr, dr))
            p1 = g @ g.conj().T
            p1 /= np.real(np.trace(p1))
            g = rng.normal(size=(db, db)) + 1j * rng.normal(size=(db, db))
            p2 = g @ g.conj().T
            p2 /= np.real(np.trace(p2))
            sig = hermitize(0.7 * mr + 0.3 * p1)[0]
            tau = hermitize(0.7 * mb + 0.3 * p2)[0]
        rho_t = m.copy()
        val = INF
        for _ in range(5):
            target = np.kron(sig, tau)
            if eps > 0.0 and d <= 8:
                try:
                    _, rho_t = _smooth_dmax_sdp(m, target, eps, tol_gap=1e-8)
                except Exception:
                    pass
            elif eps > 0.0:
                cands = [m] + _ball_candidates(m, dr, db, eps)
                scores = [d_max(c, target) for c in cands]
                rho_t = cands[int(np.argmin(scores))]
            # left factor update
            try:
                _, hi_l, sig_hat = _min_trace_product_factor(rho_t, tau, dr, "right")
            except ArithmeticError:
                break
            tr_sig = max(float(np.real(np.trace(sig_hat))), 1e-300)
            sig = sig_hat / tr_sig
            # right factor update
            try:
                _, hi_r, tau_hat = _min_trace_product_factor(rho_t, sig, db, "left")
            except ArithmeticError:
                break
            tr_tau = max(float(np.real(np.trace(tau_hat))), 1e-300)
            tau = tau_hat / tr_tau
            new_val = math.log2(max(hi_r, 1e-300))
            if abs(new_val - val) < 1e-7:
                val = new_val
                break
            val = new_val
        best = min(best, val)
    return EntropyResult(value=best, certainty="heuristic_upper_bound")
