"""Self-contained dense semidefinite-program solver.

Primal-dual path-following interior point method with Nesterov-Todd scaling and
a Mehrotra-style predictor-corrector, over block-diagonal complex Hermitian
variables.  Standard form:

    (P)  min <C, X>   s.t.  <A_i, X> = b_i  (i = 1..m),   X >= 0 block-diagonal
    (D)  max b.y      s.t.  sum_i y_i A_i + S = C,         S >= 0

with <A, B> = Re Tr(A B) for Hermitian A, B.  The same core serves problems
posed on either side: a linear-matrix-inequality problem  max b.y  s.t.
sum_i y_i A_i <= C  is exactly (D), so its optimum is read off the dual
iterate.  The solver is deterministic (no randomness anywhere), and every
iterate is logged with primal/dual objective values and residuals so weak
duality can be asserted per iteration.

The public `SdpProblem`/`solve` surface adds scalar (in)equality constraints
and an optional 0 <= X <= I box per block, reduced to standard form via slack
blocks and a partner block with entrywise pinning.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import hermitize

TOTAL_DIM_GUARD = 256


def ip(a: np.ndarray, b: np.ndarray) -> float:
    """Real Hilbert-Schmidt inner product of Hermitian matrices."""
    return float(np.real(np.sum(a * b.T)))


# ------------------------------------------------------------- standard form


@dataclass
class IterateRecord:
    iteration: int
    primal: float
    dual: float
    gap: float
    mu: float
    res_primal: float
    res_dual: float


@dataclass
class StdSolution:
    x_blocks: list
    y: np.ndarray
    s_blocks: list
    status: str                 # optimal | max_iter | infeasible_suspected | stalled
    primal_obj: float
    dual_obj: float
    gap: float
    res_primal: float
    res_dual: float
    iterates: list

    def iterates_csv(self) -> str:
        lines = ["iter,primal,dual,gap"]
        for r in self.iterates:
            lines.append(f"{r.iteration},{r.primal!r},{r.dual!r},{r.gap!r}")
        return "\n".join(lines) + "\n"


class _Compiled:
    """Per-block stacked constraint tensors for fast Schur assembly."""

    def __init__(self, block_dims, c_blocks, a_rows, b):
        self.block_dims = list(block_dims)
        self.nblocks = len(block_dims)
        self.m = len(a_rows)
        self.b = np.asarray(b, dtype=float)
        self.c_blocks = [np.asarray(hermitize(c)[0], dtype=complex) for c in c_blocks]
        # for each block: indices of constraints touching it + stacked tensor
        self.touch: list = []
        self.stacks: list = []
        for j, n in enumerate(self.block_dims):
            idx = [i for i, row in enumerate(a_rows) if row[j] is not None]
            if idx:
                t = np.stack([hermitize(a_rows[i][j])[0] for i in idx])
            else:
                t = np.zeros((0, n, n), dtype=complex)
            self.touch.append(np.asarray(idx, dtype=int))
            self.stacks.append(t)

    def apply_A(self, x_blocks) -> np.ndarray:
        out = np.zeros(self.m)
        for j in range(self.nblocks):
            if self.stacks[j].shape[0]:
                vals = np.real(np.einsum("iab,ba->i", self.stacks[j], x_blocks[j]))
                out[self.touch[j]] += vals
        return out

    def apply_At(self, y: np.ndarray) -> list:
        out = []
        for j, n in enumerate(self.block_dims):
            acc = np.zeros((n, n), dtype=complex)
            if self.stacks[j].shape[0]:
                acc = np.einsum("i,iab->ab", y[self.touch[j]], self.stacks[j])
            out.append(acc)
        return out

    def schur(self, w_blocks) -> np.ndarray:
        m = np.zeros((self.m, self.m))
        for j in range(self.nblocks):
            t = self.stacks[j]
            if not t.shape[0]:
                continue
            w = w_blocks[j]
            n = w.shape[0]
            waw = np.matmul(w[None, :, :], np.matmul(t, w[None, :, :]))
            # gram of <A_i, W A_k W> via one zgemm on flattened stacks
            lhs = t.transpose(0, 2, 1).reshape(t.shape[0], n * n)
            mj = np.real(lhs @ waw.reshape(waw.shape[0], n * n).T)
            idx = self.touch[j]
            m[np.ix_(idx, idx)] += mj
        return m


def _chol_solve(m: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Cholesky solve with escalating diagonal jitter."""
    scale = max(float(np.max(np.abs(np.diag(m)))), 1e-300)
    for jitter in (0.0, 1e-14, 1e-12, 1e-10, 1e-8, 1e-6):
        try:
            l = np.linalg.cholesky(m + jitter * scale * np.eye(m.shape[0]))
            z = np.linalg.solve(l, rhs)
            return np.linalg.solve(l.conj().T, z)
        except np.linalg.LinAlgError:
            continue
    return np.linalg.lstsq(m, rhs, rcond=None)[0]


def _eig_floor(w: np.ndarray) -> np.ndarray:
    # relative floor: an absolute one lets 1/sqrt blow past float range on
    # nearly-degenerate iterates
    return np.clip(w, max(float(w[-1]), 0.0) * 1e-14 + 1e-300, None)


def _step_to_boundary(x: np.ndarray, dx: np.ndarray) -> float:
    """sup { a >= 0 : x + a dx >= 0 } for x > 0 Hermitian."""
    w, v = np.linalg.eigh(x)
    w = _eig_floor(w)
    isq = (v / np.sqrt(w)) @ v.conj().T
    m = hermitize(isq @ dx @ isq)[0]
    if not np.all(np.isfinite(m)):
        return 0.0
    lam = np.linalg.eigvalsh(m)
    lmin = float(lam[0])
    if lmin >= -1e-16:
        return np.inf
    return -1.0 / lmin


def _nt_scaling(x: np.ndarray, s: np.ndarray):
    """NT scaling point W with W S W = X, plus T = W^{1/2}, T^{-1}, V = T S T."""
    wx, vx = np.linalg.eigh(x)
    wx = _eig_floor(wx)
    xh = (vx * np.sqrt(wx)) @ vx.conj().T
    mid = hermitize(xh @ s @ xh)[0]
    wm, vm = np.linalg.eigh(mid)
    wm = _eig_floor(wm)
    mih = (vm * (wm ** -0.5)) @ vm.conj().T
    w = hermitize(xh @ mih @ xh)[0]
    ww, wv = np.linalg.eigh(w)
    ww = _eig_floor(ww)
    t = (wv * np.sqrt(ww)) @ wv.conj().T
    tinv = (wv / np.sqrt(ww)) @ wv.conj().T
    v = hermitize(t @ s @ t)[0]
    return w, t, tinv, v


def solve_standard(block_dims, c_blocks, a_rows, b, tol_gap: float = 1e-7,
                   max_iter: int = 200, tol_feas: float = None) -> StdSolution:
    """Solve the standard-form pair (P)/(D) described in the module docstring.

    a_rows: list over constraints of per-block Hermitian matrices (None = zero
    block).  Deterministic: identical inputs produce bit-identical iterates.
    """
    if sum(block_dims) > TOTAL_DIM_GUARD:
        raise ValueError(f"total variable dimension {sum(block_dims)} exceeds {TOTAL_DIM_GUARD}")
    if not a_rows:
        raise ValueError("need at least one constraint")
    prob = _Compiled(block_dims, c_blocks, a_rows, b)
    tol_feas = max(tol_gap, 1e-9) if tol_feas is None else tol_feas
    nb, m = prob.nblocks, prob.m
    ntot = float(sum(block_dims))

    scale = max(1.0, float(np.max(np.abs(prob.b))) if m else 1.0,
                max(float(np.max(np.abs(c))) if c.size else 0.0 for c in prob.c_blocks))
    x = [scale * np.eye(n, dtype=complex) for n in prob.block_dims]
    s = [scale * np.eye(n, dtype=complex) for n in prob.block_dims]
    y = np.zeros(m)

    bnorm = 1.0 + float(np.linalg.norm(prob.b))
    cnorm = 1.0 + max(float(np.linalg.norm(c)) for c in prob.c_blocks)

    iterates: list[IterateRecord] = []
    status = "max_iter"
    tau = 0.98
    stall = 0

    def _finite(dx, dy, ds):
        return (np.all(np.isfinite(dy))
                and all(np.all(np.isfinite(d)) for d in dx)
                and all(np.all(np.isfinite(d)) for d in ds))

    for it in range(max_iter):
        mu = sum(ip(xj, sj) for xj, sj in zip(x, s)) / ntot
        ax = prob.apply_A(x)
        r_p = prob.b - ax
        aty = prob.apply_At(y)
        r_d = [prob.c_blocks[j] - s[j] - aty[j] for j in range(nb)]
        pobj = sum(ip(prob.c_blocks[j], x[j]) for j in range(nb))
        dobj = float(prob.b @ y)
        res_p = float(np.linalg.norm(r_p)) / bnorm
        res_d = max(float(np.linalg.norm(r_d[j])) for j in range(nb)) / cnorm
        gap_val = pobj - dobj
        rel_gap = abs(sum(ip(xj, sj) for xj, sj in zip(x, s))) / (1.0 + abs(pobj) + abs(dobj))
        iterates.append(IterateRecord(it, pobj, dobj, gap_val, mu, res_p, res_d))

        if rel_gap <= tol_gap and res_p <= tol_feas and res_d <= tol_feas:
            status = "optimal"
            break
        if (np.linalg.norm(y) > 1e12 * bnorm or mu < 1e-30) and (res_p > 1e-4 or res_d > 1e-4):
            status = "infeasible_suspected"
            break

        nt = [_nt_scaling(x[j], s[j]) for j in range(nb)]
        w_blocks = [nt[j][0] for j in range(nb)]
        schur = prob.schur(w_blocks)

        def solve_direction(rcomp):
            rhs = r_p.copy()
            wrw = [hermitize(w_blocks[j] @ r_d[j] @ w_blocks[j])[0] for j in range(nb)]
            rhs += prob.apply_A(wrw)
            rhs -= prob.apply_A(rcomp)
            dy = _chol_solve(schur, rhs)
            atdy = prob.apply_At(dy)
            ds = [r_d[j] - atdy[j] for j in range(nb)]
            dx = [hermitize(rcomp[j] - w_blocks[j] @ ds[j] @ w_blocks[j])[0] for j in range(nb)]
            return dx, dy, ds

        # predictor (affine direction): complementarity target -X
        rcomp_aff = [-x[j] for j in range(nb)]
        dx_a, dy_a, ds_a = solve_direction(rcomp_aff)
        if not _finite(dx_a, dy_a, ds_a):
            status = "stalled"
            break
        ap = min(1.0, tau * min(_step_to_boundary(x[j], dx_a[j]) for j in range(nb)))
        ad = min(1.0, tau * min(_step_to_boundary(s[j], ds_a[j]) for j in range(nb)))
        mu_aff = sum(ip(x[j] + ap * dx_a[j], s[j] + ad * ds_a[j]) for j in range(nb)) / ntot
        mu_aff = max(mu_aff, 0.0)
        sigma = min(1.0, max((mu_aff / mu) ** 3 if mu > 0 else 1.0, 1e-8))

        # corrector: scaled-space target sigma*mu*I - V^2 - sym(dXh dSh),
        # pulled back through the Lyapunov solve sym(V H) = target.
        rcomp = []
        for j in range(nb):
            w, t, tinv, v = nt[j]
            dxh = hermitize(tinv @ dx_a[j] @ tinv)[0]
            dsh = hermitize(t @ ds_a[j] @ t)[0]
            p = 0.5 * (dxh @ dsh + dsh @ dxh)
            vw, vv = np.linalg.eigh(v)
            vw = _eig_floor(vw)
            target = sigma * mu * np.eye(v.shape[0]) - (vv * vw**2) @ vv.conj().T - p
            tgt = vv.conj().T @ target @ vv
            h = 2.0 * tgt / (vw[:, None] + vw[None, :])
            h = vv @ h @ vv.conj().T
            rcomp.append(hermitize(t @ h @ t)[0])

        dx, dy, ds = solve_direction(rcomp)
        if not _finite(dx, dy, ds):
            status = "stalled"
            break
        ap = min(1.0, tau * min(_step_to_boundary(x[j], dx[j]) for j in range(nb)))
        ad = min(1.0, tau * min(_step_to_boundary(s[j], ds[j]) for j in range(nb)))

        # guard: keep iterates strictly positive definite
        for _ in range(30):
            ok = all(float(np.linalg.eigvalsh(hermitize(x[j] + ap * dx[j])[0])[0]) > 0
                     for j in range(nb))
            if ok:
                break
            ap *= 0.8
        for _ in range(30):
            ok = all(float(np.linalg.eigvalsh(hermitize(s[j] + ad * ds[j])[0])[0]) > 0
                     for j in range(nb))
            if ok:
                break
            ad *= 0.8

        if max(ap, ad) < 1e-13:
            stall += 1
            if stall >= 3:
                status = "stalled"
                break
        else:
            stall = 0

        x = [hermitize(x[j] + ap * dx[j])[0] for j in range(nb)]
        s = [hermitize(s[j] + ad * ds[j])[0] for j in range(nb)]
        y = y + ad * dy

    pobj = sum(ip(prob.c_blocks[j], x[j]) for j in range(nb))
    dobj = float(prob.b @ y)
    ax = prob.apply_A(x)
    res_p = float(np.linalg.norm(prob.b - ax)) / bnorm
    aty = prob.apply_At(y)
    res_d = max(float(np.linalg.norm(prob.c_blocks[j] - s[j] - aty[j])) for j in range(nb)) / cnorm
    return StdSolution(x_blocks=x, y=y, s_blocks=s, status=status, primal_obj=pobj,
                       dual_obj=dobj, gap=pobj - dobj, res_primal=res_p, res_dual=res_d,
                       iterates=iterates)


# ----------------------------------------------------------- public surface


@dataclass
class SdpProblem:
    """Scalar-constraint SDP over block-diagonal Hermitian variables.

    objective: per-block Hermitian cost C_j (list; a bare matrix is promoted to
    a single-block list).  constraints: (A_i, b_i, rel) with rel in
    {"==", "<=", ">="}; A_i is a per-block list (None = zero block) or a bare
    matrix for single-block problems.  box[j] = True adds 0 <= X_j <= I.
    """

    blocks: list
    objective: list
    constraints: list
    box: list = None

    def __post_init__(self):
        if isinstance(self.objective, np.ndarray):
            self.objective = [self.objective]
        if sum(self.blocks) > TOTAL_DIM_GUARD:
            raise ValueError(f"total variable dimension {sum(self.blocks)} exceeds {TOTAL_DIM_GUARD}")
        if self.box is None:
            self.box = [False] * len(self.blocks)
        if len(self.objective) != len(self.blocks):
            raise ValueError("objective must give one Hermitian block per variable block")
        if not self.constraints and not any(self.box):
            raise ValueError("need at least one constraint or box bound")


@dataclass
class SdpSolution:
    primal: list
    dual: np.ndarray
    status: str
    gap: float
    residuals: float
    primal_obj: float
    dual_obj: float
    interval: tuple
    iterates: list

    def iterates_csv(self) -> str:
        lines = ["iter,primal,dual,gap"]
        for r in self.iterates:
            lines.append(f"{r.iteration},{r.primal!r},{r.dual!r},{r.gap!r}")
        return "\n".join(lines) + "\n"


def _herm_basis(n: int):
    """Real basis of n x n Hermitian matrices (n^2 elements)."""
    out = []
    for p in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[p, p] = 1.0
        out.append(e)
    for p in range(n):
        for q in range(p + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[p, q] = e[q, p] = 0.5
            out.append(e)
            f = np.zeros((n, n), dtype=complex)
            f[p, q] = -0.5j
            f[q, p] = 0.5j
            out.append(f)
    return out


def solve(p: SdpProblem, tol_gap: float = 1e-7, max_iter: int = 200,
          debug_csv_path: str = None) -> SdpSolution:
    """Reduce to standard form (slack blocks, box partner blocks) and solve."""
    if sum(p.blocks) > TOTAL_DIM_GUARD:
        raise ValueError(f"total variable dimension {sum(p.blocks)} exceeds {TOTAL_DIM_GUARD}")
    nb_user = len(p.blocks)
    block_dims = list(p.blocks)
    c_blocks = [np.asarray(c, dtype=complex) for c in p.objective]
    a_rows: list = []
    b: list = []

    def expand(row_blocks, extra_zeros):
        return list(row_blocks) + [None] * extra_zeros

    # box partner blocks: X_j + X'_j = I pinned on a Hermitian basis
    partner_of = {}
    for j, flag in enumerate(p.box):
        if flag:
            partner_of[j] = len(block_dims)
            block_dims.append(p.blocks[j])
            c_blocks.append(np.zeros((p.blocks[j], p.blocks[j]), dtype=complex))

    # user scalar constraints, slacks appended after partners
    slack_rows = []
    for a_i, b_i, rel in p.constraints:
        if isinstance(a_i, np.ndarray):
            a_i = [a_i]
        row = {j: np.asarray(a_i[j], dtype=complex) for j in range(nb_user)
               if a_i[j] is not None}
        slack_rows.append((row, float(b_i), rel))

    n_slack = sum(1 for _, _, rel in slack_rows if rel in ("<=", ">="))
    slack_base = len(block_dims)
    block_dims.extend([1] * n_slack)
    c_blocks.extend([np.zeros((1, 1), dtype=complex)] * n_slack)

    total_blocks = len(block_dims)
    si = 0
    user_constraint_index = []
    for row, b_i, rel in slack_rows:
        full = [None] * total_blocks
        for j, aij in row.items():
            full[j] = aij
        if rel == "<=":
            full[slack_base + si] = np.ones((1, 1), dtype=complex)
            si += 1
        elif rel == ">=":
            full[slack_base + si] = -np.ones((1, 1), dtype=complex)
            si += 1
        elif rel != "==":
            raise ValueError(f"unknown relation {rel!r}")
        user_constraint_index.append(len(a_rows))
        a_rows.append(full)
        b.append(b_i)

    for j, jp in partner_of.items():
        n = p.blocks[j]
        for e in _herm_basis(n):
            full = [None] * total_blocks
            full[j] = e
            full[jp] = e
            a_rows.append(full)
            b.append(float(np.real(np.trace(e))))

    std = solve_standard(block_dims, c_blocks, a_rows, np.asarray(b), tol_gap=tol_gap,
                         max_iter=max_iter)
    sol = SdpSolution(
        primal=std.x_blocks[:nb_user],
        dual=std.y[user_constraint_index] if user_constraint_index else std.y[:0],
        status=std.status,
        gap=std.gap,
        residuals=max(std.res_primal, std.res_dual),
        primal_obj=std.primal_obj,
        dual_obj=std.dual_obj,
        interval=(std.dual_obj, std.primal_obj),
        iterates=std.iterates,
    )
    if debug_csv_path:
        with open(debug_csv_path, "w") as fh:
            fh.write(std.iterates_csv())
    return sol


def solve_lmi(b: np.ndarray, f_rows, g_blocks, tol_gap: float = 1e-7,
              max_iter: int = 200) -> StdSolution:
    """max b.y  s.t.  sum_i y_i F_i^{(j)} <= G^{(j)} per block.

    This is exactly the dual side of the standard pair; the optimizer's answer
    is the returned dual vector y with value dual_obj, and the primal side
    supplies the certificate interval [dual_obj, primal_obj] containing the
    optimum.  f_rows: per constraint, per block (None = zero).
    """
    return solve_standard([g.shape[0] for g in g_blocks], g_blocks, f_rows, b,
                          tol_gap=tol_gap, max_iter=max_iter)
