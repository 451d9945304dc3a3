"""Converse and achievability evaluators for one-shot rate-distortion coding.

Every result is a log2 code size.  Converse evaluators emit lower bounds on
log M, achievability evaluators emit upper bounds, and each result records
which evaluator produced it together with the parameters that went in.  The
entanglement-assisted rate-distortion curve is computed by a Frank-Wolfe
loop over Choi matrices whose linear-minimization oracle is a small SDP.

System convention: purifications and reference-output states interleave as
(reference, source/output) pairs, so even positions are reference systems.
Single-symbol observables live on (reference, output) in that block order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distortion import (BOUNDARY_REL, DistortionObservable, SymbolwiseObservable,
                         excess_probability, excess_projector)
from .entropies import classical_beta_epsilon, d_h, h0_smooth, h_min_smooth, \
    i_max_smooth
from .linalg import binary_entropy, eigh, hermitize, xlog2x
from .sdp import SdpProblem, _herm_basis, ip, solve
from .states import (DensityOperator, PureState, QuantumChannel, SystemDims,
                     apply_channel, partial_trace, permute_systems, purify)

INF = float("inf")

DIRECTIONS = ("lower_bound_on_logM", "upper_bound_on_logM")
VALIDITIES = ("valid", "conditional")

# mixing weight that keeps matrix logarithms finite at rank-deficient iterates
GRAD_RIDGE = 1e-9


@dataclass(frozen=True)
class BoundResult:
    """One evaluated bound: value is log2 of the code size M."""

    value: float
    direction: str
    validity: str
    provenance: str
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.validity not in VALIDITIES:
            raise ValueError(f"unknown validity {self.validity!r}")

    def to_dict(self) -> dict:
        return {"value": self.value, "direction": self.direction,
                "validity": self.validity, "provenance": self.provenance,
                "parameters": dict(self.parameters)}


@dataclass(frozen=True)
class RateDistortionPoint:
    """One point of the assisted rate-distortion curve, with its certificate.

    certificate = (rate - gap, rate) from the final Frank-Wolfe duality gap;
    the true optimum lies inside.  d_used records the budget actually handed
    to the oracle (a hair above the distortion floor when D sits on or below
    it, so the feasible set keeps an interior).
    """

    D: float
    rate: float
    certificate: tuple
    gap: float
    iterations: int
    d_used: float
    note: str = ""

    def __post_init__(self):
        if self.rate < 0.0:
            raise ValueError(f"rate {self.rate} negative")
        lo, hi = self.certificate
        if not lo <= self.rate <= hi + 1e-12:
            raise ValueError("certificate must bracket the rate")

    def to_dict(self) -> dict:
        return {"D": self.D, "rate": self.rate, "certificate": list(self.certificate),
                "gap": self.gap, "iterations": self.iterations,
                "d_used": self.d_used, "note": self.note}


# ------------------------------------------------------------------ plumbing


def _observable_split(delta):
    """(per-symbol (dr, db), copies) for a dense or symbol-wise observable."""
    base = delta.base if isinstance(delta, SymbolwiseObservable) else delta
    n = delta.n if isinstance(delta, SymbolwiseObservable) else 1
    if base.dims is None or len(base.dims.dims) != 2:
        raise ValueError("observable must carry (reference, output) system dims")
    dr0, db0 = base.dims.dims
    return (dr0, db0), n


def _wrap(matrix: np.ndarray, dims: tuple) -> DensityOperator:
    labels = tuple(f"S{i}" for i in range(len(dims)))
    return DensityOperator(matrix, SystemDims(labels, tuple(dims)), validate=False)


def _block_order(matrix: np.ndarray, dims: tuple) -> np.ndarray:
    """Permute an interleaved (r0, b0, r1, b1, ...) operator to (r..., b...)."""
    if len(dims) == 2:
        return matrix
    op = _wrap(matrix, dims)
    labels = op.dims.labels
    order = labels[0::2] + labels[1::2]
    return permute_systems(op, order).matrix


def _reduce_even(sigma: DensityOperator) -> np.ndarray:
    """Partial trace keeping the even-position (reference) systems."""
    labels = sigma.dims.labels
    if len(labels) % 2:
        raise ValueError("state must carry (reference, source) system pairs")
    return partial_trace(sigma, keep=labels[0::2]).matrix


def _trace_out_reference(op4: np.ndarray, weight: np.ndarray) -> np.ndarray:
    # Tr_R[(weight_R (x) I_B) X] for X reshaped as (dr, db, dr, db)
    return hermitize(np.einsum("rs,sbrc->bc", weight, op4))[0]


def _channel_split(omega: DensityOperator, channel: QuantumChannel):
    """Block-order (references, outputs) view of a channel output state."""
    out = channel.output_dims.labels
    r_labels = tuple(l for l in omega.dims.labels if l not in out)
    if not r_labels:
        raise ValueError("channel output carries no reference system")
    ordered = permute_systems(omega, r_labels + out)
    dr = ordered.dims.dim_of(r_labels)
    db = channel.output_dims.dim
    return ordered, r_labels, out, dr, db


def _excess_prob(ordered: DensityOperator, r_labels, out_labels, delta,
                 D: float) -> float:
    """Excess probability of a block-ordered (references, outputs) state."""
    proj = excess_projector(delta, D)
    if isinstance(delta, SymbolwiseObservable) and delta.n > 1:
        # symbol-wise projectors live on the interleaved per-symbol order
        order = tuple(x for pair in zip(r_labels, out_labels) for x in pair)
        return excess_probability(permute_systems(ordered, order).matrix, proj)
    return excess_probability(ordered.matrix, proj)


# ------------------------------------------------------- eigenvalue converse


def converse_alt(phi: PureState, delta, D: float, eps: float,
                 sigma_RA: DensityOperator) -> BoundResult:
    """Converse from the acceptance-operator eigenvalue form.

    value = (1/2)[-log2 lmax(K) - D_H^eps(phi||sigma)] with
    K = Tr_R{(sigma_R (x) I_B) Pi_{<=D}}.  The inner minimization over pure
    output states is exactly a largest-eigenvalue computation, and any
    normalized sigma_RA yields a valid lower bound because the underlying
    statement maximizes over sigma.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if abs(sigma_RA.trace - 1.0) > 1e-9:
        raise ValueError(f"sigma_RA must be normalized, trace = {sigma_RA.trace}")
    if sigma_RA.dims.dims != phi.dims.dims:
        raise ValueError("sigma_RA must share the purification's system dims")
    (dr0, db0), n = _observable_split(delta)
    proj = excess_projector(delta, D)
    pi_le = proj.complement()
    pi_blk = _block_order(pi_le, (dr0, db0) * n)
    dr, db = dr0 ** n, db0 ** n

    sigma_r = _reduce_even(sigma_RA)
    if sigma_r.shape[0] != dr:
        raise ValueError(f"reference dim {sigma_r.shape[0]} != observable's {dr}")
    k_op = _trace_out_reference(pi_blk.reshape(dr, db, dr, db), sigma_r)
    w, _ = eigh(k_op)
    lam = max(float(w[-1]), 0.0)

    dh = d_h(phi.density(), sigma_RA, eps)
    params = {"D": D, "eps": eps, "lambda_max": lam, "dh": dh,
              "boundary_count": proj.boundary_count}
    if lam <= 0.0:
        value = INF if not math.isinf(dh) else math.nan
        params["lambda_zero"] = True
    elif math.isinf(dh):
        value = -INF
        params["dh_infinite"] = True
    else:
        value = 0.5 * (-math.log2(lam) - dh)
    return BoundResult(value, "lower_bound_on_logM", "valid", "converse_alt", params)


# ------------------------------------------------- single-channel converse


def _np_test(r: np.ndarray, s: np.ndarray, eps: float):
    """Optimal Neyman-Pearson pair (beta, test) for beta_eps(r||s).

    Same threshold construction as the entropy module's value-only routine,
    kept here because the psi-update needs the test operator itself.
    """
    target = 1.0 - eps
    ws, vs = eigh(s)
    scale_s = max(float(ws[-1]), 1e-300)
    kernel = vs[:, ws <= 1e-10 * scale_s]
    q = kernel @ kernel.conj().T
    free = float(np.real(np.trace(q @ r)))
    if free >= target - 1e-14:
        c = 1.0 if free <= 1e-300 else min(1.0, target / free)
        return 0.0, c * q

    smin = float(min(x for x in ws if x > 1e-10 * scale_s))
    wr, _ = eigh(r)
    t_hi = max(float(wr[-1]) / smin, 1.0)

    def mass_above(t):
        w, v = eigh(r - t * s)
        pos = v[:, w > 0]
        return float(np.real(np.trace(pos.conj().T @ r @ pos)))

    while mass_above(t_hi) > target and t_hi < 1e30:
        t_hi *= 2.0
    t_lo = 0.0
    for _ in range(200):
        mid = 0.5 * (t_lo + t_hi)
        if mass_above(mid) > target:
            t_lo = mid
        else:
            t_hi = mid
        if t_hi - t_lo <= 1e-15 * max(1.0, t_hi):
            break

    w, v = eigh(r - t_hi * s)
    band = max(1e-12 * max(float(np.max(np.abs(w))), 1e-300),
               (t_hi - t_lo) * float(ws[-1]) * 4.0)
    pos = v[:, w > band]
    zero = v[:, np.abs(w) <= band]
    test = (pos @ pos.conj().T).astype(complex)
    g_pos = float(np.real(np.trace(test @ r)))
    g_zero = float(np.real(np.trace(zero.conj().T @ r @ zero)))
    if g_zero > 1e-300:
        c = float(np.clip((target - g_pos) / g_zero, 0.0, 1.0))
        test = test + c * (zero @ zero.conj().T)
    beta = float(np.real(np.trace(test @ s)))
    return max(beta, 0.0), hermitize(test)[0]


def _max_beta_alternating(omega: np.ndarray, mr: np.ndarray, dr: int, db: int,
                          alpha: float, rounds: int = 60):
    """max over states psi of beta_alpha(omega || mr (x) psi), bracketed.

    Alternates the Neyman-Pearson test with a Frank-Wolfe update of psi; the
    test side also certifies an upper bracket through lmax of its reduction.
    """
    psi = _trace_out_reference(omega.reshape(dr, db, dr, db), np.eye(dr))
    psi = psi / max(float(np.real(np.trace(psi))), 1e-300)
    lower, upper = 0.0, INF
    for t in range(rounds):
        beta, test = _np_test(omega, np.kron(mr, psi), alpha)
        lower = max(lower, beta)
        k_op = _trace_out_reference(test.reshape(dr, db, dr, db), mr)
        w, v = eigh(k_op)
        upper = min(upper, max(float(w[-1]), 0.0))
        if upper - lower <= 1e-9 * max(1.0, upper):
            break
        top = v[:, -1:]
        gamma = 2.0 / (t + 2.0)
        psi = hermitize((1.0 - gamma) * psi + gamma * (top @ top.conj().T))[0]
    return lower, upper


def _max_beta_sdp(omega: np.ndarray, mr: np.ndarray, dr: int, db: int, alpha: float):
    """Same maximum through the minimax partner: min_t {t : K(Q) <= t I}."""
    d = dr * db
    rows = []
    for e in _herm_basis(db):
        rows.append(([np.kron(mr, e).astype(complex), e.astype(complex),
                      -np.real(np.trace(e)) * np.eye(1, dtype=complex)], 0.0, "=="))
    rows.append(([omega.astype(complex), None, None], 1.0 - alpha, ">="))
    prob = SdpProblem(blocks=[d, db, 1],
                      objective=[np.zeros((d, d), dtype=complex),
                                 np.zeros((db, db), dtype=complex),
                                 np.eye(1, dtype=complex)],
                      constraints=rows, box=[True, False, False])
    sol = solve(prob, tol_gap=1e-9, max_iter=200)
    if sol.status != "optimal":
        raise ArithmeticError(f"solver returned {sol.status} for the psi maximization")
    return max(sol.primal_obj, 0.0), sol.interval


def converse_simple_inner(phi: PureState, delta, D: float, eps: float,
                          eps_prime: float, channel: QuantumChannel,
                          method: str = "auto") -> BoundResult:
    """Per-channel converse value from the hypothesis-testing form.

    value = (1/2)[min_psi D_H^{1-eps'}(omega || phi_R (x) psi) - log2(1/eps'')]
    with eps'' = eps'(eps'/2 - eps) and omega the channel's reference-extended
    output.  The result is conditional: the full statement minimizes over all
    channels meeting the distortion condition, and this evaluator sees one.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if not eps <= eps_prime < 1.0:
        raise ValueError("eps_prime must lie in [eps, 1)")
    if eps_prime < 2.0 * eps:
        raise ValueError("eps_prime must be at least 2 eps")
    omega = apply_channel(channel, phi.density())
    ordered, r_labels, out_labels, dr, db = _channel_split(omega, channel)
    p_exc = _excess_prob(ordered, r_labels, out_labels, delta, D)
    if p_exc > eps + 1e-12:
        raise ValueError(f"channel violates the distortion condition: "
                         f"excess probability {p_exc:.3e} > eps = {eps}")

    params = {"D": D, "eps": eps, "eps_prime": eps_prime, "excess_probability": p_exc}
    eps2 = eps_prime * (eps_prime / 2.0 - eps)
    params["eps_double_prime"] = eps2
    if eps2 <= 0.0:
        params["degenerate"] = True
        return BoundResult(-INF, "lower_bound_on_logM", "conditional",
                           "converse_simple_inner", params)

    mr = partial_trace(ordered, keep=r_labels).matrix
    alpha = 1.0 - eps_prime
    if method not in ("auto", "alternating", "sdp"):
        raise ValueError(f"unknown method {method!r}")
    if method in ("auto", "alternating"):
        lo, hi = _max_beta_alternating(ordered.matrix, mr, dr, db, alpha)
        params["beta_bracket"] = (lo, hi)
        beta, used = hi, "alternating"
        if method == "auto" and hi - lo > 1e-8 * max(1.0, hi):
            beta, interval = _max_beta_sdp(ordered.matrix, mr, dr, db, alpha)
            params["beta_interval"] = interval
            used = "sdp_fallback"
    else:
        beta, interval = _max_beta_sdp(ordered.matrix, mr, dr, db, alpha)
        params["beta_interval"] = interval
        used = "sdp"
    params["method"] = used
    params["beta"] = beta

    if beta <= 0.0:
        value = INF
        params["beta_zero"] = True
    else:
        value = 0.5 * (math.log2(eps2) - math.log2(beta))
    return BoundResult(value, "lower_bound_on_logM", "conditional",
                       "converse_simple_inner", params)


# ----------------------------------------------------- classical reduction


def classical_kv_converse(px, d, D: float, eps: float, q_sigma) -> BoundResult:
    """Classical ratio converse: log2 beta_eps(p||q) - log2 max_y ball mass.

    The inner maximization runs over deterministic reproductions; the ball
    mass of y is the q-weight of the sources within distortion D of it.
    """
    p = np.asarray(px, dtype=float)
    q = np.asarray(q_sigma, dtype=float)
    dm = np.asarray(d, dtype=float)
    if dm.ndim != 2:
        raise ValueError("distortion table must be 2-d")
    nx, _ = dm.shape
    for name, vec in (("px", p), ("q_sigma", q)):
        if vec.ndim != 1 or vec.shape[0] != nx:
            raise ValueError(f"{name} must have one entry per source symbol")
        if np.any(vec < -1e-12) or abs(float(vec.sum()) - 1.0) > 1e-9:
            raise ValueError(f"{name} is not a probability distribution")
    if D < 0:
        raise ValueError("distortion threshold must be nonnegative")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")

    beta = classical_beta_epsilon(p, q, eps)
    tol = BOUNDARY_REL * max(1.0, D)
    ball = (dm <= D + tol).astype(float)
    mass = float(np.max(q @ ball))
    params = {"D": D, "eps": eps, "beta": beta, "ball_max": mass}
    if mass <= 0.0:
        value = INF
        params["empty_balls"] = True
    elif beta <= 0.0:
        value = -INF
        params["beta_zero"] = True
    else:
        value = math.log2(beta) - math.log2(mass)
    return BoundResult(value, "lower_bound_on_logM", "valid", "classical_kv", params)


# ------------------------------------------------------------ achievability


def _chi1(eps: float, dim_b: int):
    """Additive overhead of the embezzling protocol; returns (chi1, clamped)."""
    arg = dim_b + (5.0 / eps) ** 2
    clamped = arg < 2.0
    inner = math.log2(max(arg, 2.0))
    return 2.0 * math.log2(5.0 / eps) + 4.0 + math.log2(inner), clamped


def _condition_a(ordered: DensityOperator, r_labels, out_labels, delta, D,
                 eps1: float, params: dict):
    if delta is None or D is None:
        params["distortion_condition"] = "not_checked"
        return
    p_exc = _excess_prob(ordered, r_labels, out_labels, delta, D)
    params["excess_probability"] = p_exc
    if p_exc > eps1 + 1e-12:
        raise ValueError(f"excess-distortion condition violated: "
                         f"{p_exc:.3e} > eps1 = {eps1:.3e}")


def achievability_embezzling(phi: PureState, channel: QuantumChannel, eps: float,
                             delta=None, D=None) -> BoundResult:
    """Upper bound on log M from the embezzling-state protocol.

    value = (1/2) I_max^{eps/5}(B;R) + 2 log2(5/eps) + 4
            + log2 log2(|B| + (5/eps)^2).
    A heuristic smoothing of I_max only raises the value, so the bound stays
    a valid upper bound either way; the certainty flag is passed through.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    omega = apply_channel(channel, phi.density())
    ordered, r_labels, out_labels, _, db = _channel_split(omega, channel)
    params = {"eps": eps, "eps1": eps / 5.0, "dim_b": db}
    _condition_a(ordered, r_labels, out_labels, delta, D, eps / 5.0, params)

    imax = i_max_smooth(ordered, b=r_labels, eps=eps / 5.0)
    chi, clamped = _chi1(eps, db)
    params["imax_half"] = 0.5 * imax.value
    params["chi1"] = chi
    params["smoothing"] = imax.certainty
    params["loglog_clamped"] = clamped
    return BoundResult(0.5 * imax.value + chi, "upper_bound_on_logM", "valid",
                       "achievability_embezzling", params)


def achievability_mes(phi: PureState, channel: QuantumChannel, delta_param: float,
                      delta=None, D=None, eps1: float = None) -> BoundResult:
    """Upper bound on log M from the maximally-entangled-state protocol.

    value = (1/2)[H_0^d(B) - H_min^d(B|R)] + log2(1/d') where d is the
    smoothing parameter, d' = d + sqrt(4 sqrt(d) - 4d), and the achieved
    excess-distortion level is eps = 2 sqrt(5 d') + 2 sqrt(d) (reported).
    """
    if not 0.0 < delta_param < 1.0:
        raise ValueError("smoothing parameter must lie in (0, 1)")
    dprime = delta_param + math.sqrt(4.0 * math.sqrt(delta_param) - 4.0 * delta_param)
    eps_achieved = 2.0 * math.sqrt(5.0 * dprime) + 2.0 * math.sqrt(delta_param)
    omega = apply_channel(channel, phi.density())
    ordered, r_labels, out_labels, _, db = _channel_split(omega, channel)
    params = {"delta": delta_param, "delta_prime": dprime,
              "eps_achieved": eps_achieved, "dim_b": db}
    _condition_a(ordered, r_labels, out_labels, delta, D,
                 eps1 if eps1 is not None else eps_achieved / 5.0, params)

    h0r = h0_smooth(partial_trace(ordered, keep=out_labels), delta_param)
    hmin = h_min_smooth(ordered, cond=r_labels, eps=delta_param)
    value = 0.5 * (h0r.value - hmin.value) + math.log2(1.0 / dprime)
    params["h0_half"] = 0.5 * h0r.value
    params["hmin_half"] = 0.5 * hmin.value
    params["smoothing"] = (h0r.certainty, hmin.certainty)
    return BoundResult(value, "upper_bound_on_logM", "valid",
                       "achievability_mes", params)


# ------------------------------------------------------------- the sandwich


def theorem10_sandwich(phi: PureState, delta, D: float, eps: float,
                       eps_prime: float, channel_family,
                       family_exhaustive: bool = False):
    """(upper, lower) bounds on log M over a family of candidate channels.

    upper: min over channels passing the eps/5 distortion condition of
    (1/2) I_max^{eps/5}(B;R) + chi1.  lower: min over channels passing the
    eps condition of (1/2) I_max^{2 sqrt(2 eps')}(B;R) - chi2.  The lower
    side is conditional unless the family is declared exhaustive, because a
    partial family can only overestimate the true minimum.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if eps_prime < 2.0 * eps:
        raise ValueError("eps_prime must be at least 2 eps")
    if math.sqrt(2.0 * eps_prime) >= 1.0:
        raise ValueError("sqrt(2 eps_prime) must be below 1")
    channels = list(channel_family)
    if not channels:
        raise ValueError("channel family is empty")

    denom = eps_prime / 2.0 - eps
    chi2 = INF if denom <= 0.0 else 0.5 * math.log2(
        (1.0 / eps_prime + 1.0 / (1.0 - math.sqrt(2.0 * eps_prime))) / denom)
    smooth_lower = 2.0 * math.sqrt(2.0 * eps_prime)

    up_best, lo_best = None, None
    up_seen, lo_seen = 0, 0
    for idx, channel in enumerate(channels):
        omega = apply_channel(channel, phi.density())
        ordered, r_labels, out_labels, _, db = _channel_split(omega, channel)
        p_exc = _excess_prob(ordered, r_labels, out_labels, delta, D)

        if p_exc <= eps / 5.0 + 1e-12:
            up_seen += 1
            imax = i_max_smooth(ordered, b=r_labels, eps=eps / 5.0)
            chi, clamped = _chi1(eps, db)
            cand = (0.5 * imax.value + chi, idx, imax, chi, clamped)
            if up_best is None or cand[0] < up_best[0]:
                up_best = cand
        if p_exc <= eps + 1e-12:
            lo_seen += 1
            if smooth_lower >= 1.0:
                # the smoothing ball already contains the zero operator
                cand = (-INF, idx, None, chi2)
            else:
                imax = i_max_smooth(ordered, b=r_labels, eps=smooth_lower)
                cand = (0.5 * imax.value - chi2, idx, imax, chi2)
            if lo_best is None or cand[0] < lo_best[0]:
                lo_best = cand

    base = {"D": D, "eps": eps, "eps_prime": eps_prime,
            "family_size": len(channels)}
    if up_best is None:
        upper = BoundResult(INF, "upper_bound_on_logM", "valid",
                            "sandwich_upper", dict(base, feasible_count=0))
    else:
        val, idx, imax, chi, clamped = up_best
        upper = BoundResult(val, "upper_bound_on_logM", "valid", "sandwich_upper",
                            dict(base, feasible_count=up_seen, channel_index=idx,
                                 imax_half=0.5 * imax.value, chi1=chi,
                                 smoothing=imax.certainty, loglog_clamped=clamped))
    lo_validity = "valid" if family_exhaustive else "conditional"
    if lo_best is None:
        lower = BoundResult(INF, "lower_bound_on_logM", "conditional",
                            "sandwich_lower",
                            dict(base, feasible_count=0, note="no feasible channel"))
    else:
        if lo_best[2] is None:
            val, idx, _, chi = lo_best
            extra = {"imax_half": -INF, "smoothing_vacuous": True}
        else:
            val, idx, imax, chi = lo_best
            extra = {"imax_half": 0.5 * imax.value, "smoothing": imax.certainty}
        lower = BoundResult(val, "lower_bound_on_logM", lo_validity, "sandwich_lower",
                            dict(base, feasible_count=lo_seen, channel_index=idx,
                                 chi2=chi, smoothing_eps=smooth_lower, **extra))
    return upper, lower


# -------------------------------------------- assisted rate-distortion curve


def _pullback(g: np.ndarray, phi4: np.ndarray, dims) -> np.ndarray:
    """Adjoint of J -> omega(J): Tr[G omega(J)] = Tr[pullback(G) J]."""
    dr, da, db = dims
    g4 = g.reshape(dr, db, dr, db)
    c4 = np.einsum("sbra,risj->jbia", g4, phi4)
    return hermitize(c4.reshape(da * db, da * db))[0]


def _omega_of_choi(j: np.ndarray, phi4: np.ndarray, dims) -> np.ndarray:
    dr, da, db = dims
    j4 = j.reshape(da, db, da, db)
    out = np.einsum("risj,iajb->rasb", phi4, j4)
    return hermitize(out.reshape(dr * db, dr * db))[0]


def _log2m(m: np.ndarray) -> np.ndarray:
    w, v = eigh(m)
    return (v * np.log2(np.clip(w, 1e-300, None))) @ v.conj().T


def _entropy_bits(m: np.ndarray) -> float:
    w, _ = eigh(m)
    return float(-np.sum(xlog2x(np.clip(w, 0.0, None))))


def _cptp_rows(da: int, db: int):
    rows = []
    for e in _herm_basis(da):
        rows.append((np.kron(e, np.eye(db)).astype(complex),
                     float(np.real(np.trace(e))), "=="))
    return rows


def _choi_lmo(cost: np.ndarray, da: int, db: int, budget=None, c_dist=None):
    """Exact linear minimization over CPTP Choi matrices (one SDP call)."""
    rows = _cptp_rows(da, db)
    if budget is not None:
        rows.append((c_dist.astype(complex), float(budget), "<="))
    prob = SdpProblem(blocks=[da * db], objective=[cost.astype(complex)],
                      constraints=rows)
    sol = solve(prob, tol_gap=1e-8, max_iter=200)
    if sol.status != "optimal":
        raise ArithmeticError(f"solver returned {sol.status} for the Choi oracle")
    return hermitize(sol.primal[0])[0], sol

def ea_qrd_function(rho: DensityOperator, delta: DistortionObservable, D: float,
                    tol_gap: float = 1e-4, max_iter: int = 500) -> RateDistortionPoint:
    """Entanglement-assisted rate-distortion value at mean-distortion budget D.

    Minimizes (1/2) I(R;B) over channel Choi matrices subject to the mean
    distortion staying within D; the objective is convex because the
    reference marginal is pinned to the purification's.  Frank-Wolfe with an
    exact SDP oracle.  The fixed 2/(k+2) step makes the duality gap
    oscillate, so the returned iterate is the one with the smallest observed
    gap and that gap is the certificate.
    """
    phi = purify(rho, ref_label="R")
    dr = phi.dims.dims[0]
    da = rho.dim
    if delta.dims is None or len(delta.dims.dims) != 2:
        raise ValueError("observable must carry (reference, output) system dims")
    if delta.dims.dims[0] != dr:
        raise ValueError(f"observable reference dim {delta.dims.dims[0]} != "
                         f"purifier dim {dr} (rank of the source)")
    db = delta.dims.dims[1]
    if max(da, db, dr) > 4:
        raise ValueError("curve evaluation is guarded to dims <= 4")
    if not 0.0 <= D <= delta.d_max + 1e-12:
        raise ValueError(f"D must lie in [0, d_max = {delta.d_max}]")

    dims = (dr, da, db)
    phi4 = phi.density().matrix.reshape(dr, da, dr, da)
    c_dist = _pullback(delta.operator, phi4, dims)

    # distortion floor and the starting channel
    j, floor_sol = _choi_lmo(c_dist, da, db)
    d_floor = float(ip(c_dist, j))
    note = ""
    if D < d_floor - 1e-9:
        note = (f"requested D = {D} sits below the distortion floor "
                f"{d_floor:.6e}; evaluated at the floor")
    d_used = max(D, d_floor + 1e-8)

    mr = partial_trace(phi.density(), keep=("R",)).matrix
    pi_full = np.eye(dr * db) / (dr * db)
    mr_t = (1.0 - GRAD_RIDGE) * mr + GRAD_RIDGE * np.eye(dr) / dr
    log_mr = _log2m(mr_t)

    best_gap = INF
    best_j = j
    iterations = 0
    for k in range(max_iter):
        iterations = k + 1
        omega = _omega_of_choi(j, phi4, dims)
        om_t = (1.0 - GRAD_RIDGE) * omega + GRAD_RIDGE * pi_full
        ob_t = _trace_out_reference(om_t.reshape(dr, db, dr, db), np.eye(dr))
        grad = _log2m(om_t) - np.kron(log_mr, np.eye(db)) \
            - np.kron(np.eye(dr), _log2m(ob_t))
        cost = _pullback(grad, phi4, dims)
        j_vertex, _ = _choi_lmo(cost, da, db, budget=d_used, c_dist=c_dist)
        gap = max(0.5 * (ip(cost, j) - ip(cost, j_vertex)), 0.0)
        if gap < best_gap:
            best_gap, best_j = gap, j
        if gap <= tol_gap:
            break
        step = 2.0 / (k + 2.0)
        j = hermitize((1.0 - step) * j + step * j_vertex)[0]

    omega = _omega_of_choi(best_j, phi4, dims)
    ob = _trace_out_reference(omega.reshape(dr, db, dr, db), np.eye(dr))
    rate = 0.5 * (_entropy_bits(mr) + _entropy_bits(ob) - _entropy_bits(omega))
    rate = max(rate, 0.0)
    return RateDistortionPoint(D=D, rate=rate,
                               certificate=(max(rate - best_gap, 0.0), rate),
                               gap=best_gap, iterations=iterations,
                               d_used=d_used, note=note)


# ------------------------------------------------- blocklength-n converse


def iid_converse_rate(rho: DensityOperator, delta: DistortionObservable, n: int,
                      D: float, eps: float, eps_prime: float) -> BoundResult:
    """Per-symbol converse for n-fold sources through the assisted curve.

    value = R(D + d_max eps) - f(eps, eps', n) with
    f = (1/2n)[5 sqrt(2 eps') n log2|R| - 3 h2(sqrt(2 eps'))
               + log2(eps'/2 - eps)].
    The curve value enters through its certified lower endpoint, keeping the
    result a valid lower bound on (1/n) log2 M.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if eps_prime <= 2.0 * eps:
        raise ValueError("eps_prime must exceed 2 eps")
    s = math.sqrt(2.0 * eps_prime)
    if s >= 1.0:
        raise ValueError("sqrt(2 eps_prime) must be below 1")

    d_shift = min(D + delta.d_max * eps, delta.d_max)
    point = ea_qrd_function(rho, delta, d_shift)
    dim_r = purify(rho, ref_label="R").dims.dims[0]
    f = (5.0 * s * n * math.log2(dim_r) - 3.0 * binary_entropy(s)
         + math.log2(eps_prime / 2.0 - eps)) / (2.0 * n)
    value = point.certificate[0] - f
    params = {"n": n, "D": D, "eps": eps, "eps_prime": eps_prime,
              "d_shifted": d_shift, "f": f, "curve_rate": point.rate,
              "curve_certificate": point.certificate, "dim_r": dim_r}
    return BoundResult(value, "lower_bound_on_logM", "valid", "iid_converse", params)
