"""States, channels, tensor/partial-trace manipulation and distance measures.

Systems are labeled: every operator carries a :class:`SystemDims` naming its
subsystems, and partial traces / channel applications address subsystems by
label rather than by position.  All values are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    TolerancePolicy,
    eigh,
    hermitize,
    sqrtm_psd,
    trace_norm,
)

# ---------------------------------------------------------------- system dims


@dataclass(frozen=True)
class SystemDims:
    """Ordered subsystem labels with per-subsystem dimensions."""

    labels: tuple[str, ...]
    dims: tuple[int, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.dims):
            raise ValueError("labels and dims length mismatch")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate subsystem labels: {self.labels}")
        if any(d <= 0 for d in self.dims):
            raise ValueError(f"non-positive dimension in {self.dims}")

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def position(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown subsystem label {label!r}; have {self.labels}") from None

    def dim_of(self, labels) -> int:
        return int(np.prod([self.dims[self.position(l)] for l in labels]))

    def restrict(self, labels) -> "SystemDims":
        keep = [l for l in self.labels if l in set(labels)]
        return SystemDims(tuple(keep), tuple(self.dims[self.position(l)] for l in keep))


def system(label: str, dim: int) -> SystemDims:
    return SystemDims((label,), (dim,))


def _concat(a: SystemDims, b: SystemDims) -> SystemDims:
    if set(a.labels) & set(b.labels):
        raise ValueError(f"dimension-label collision: {set(a.labels) & set(b.labels)}")
    return SystemDims(a.labels + b.labels, a.dims + b.dims)


# ------------------------------------------------------------------- operators


class DensityOperator:
    """Hermitian PSD operator with trace in (0, 1 + tol]; subnormalized allowed.

    The stored matrix is the symmetrized input; the asymmetry norm of the raw
    input is kept on the instance.  Validation enforces the type invariants:
    Hermitian within tolerance, eigenvalues >= -tol_psd, trace <= 1 + tol_tr.
    """

    def __init__(self, matrix, dims: SystemDims, policy: TolerancePolicy = DEFAULT_TOL,
                 validate: bool = True):
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"matrix must be square, got shape {matrix.shape}")
        if matrix.shape[0] != dims.dim:
            raise ValueError(f"matrix dim {matrix.shape[0]} != system dim {dims.dim}")
        h, asym = hermitize(matrix)
        self.matrix = h
        self.matrix.setflags(write=False)
        self.dims = dims
        self.asymmetry = asym
        if validate:
            scale = max(float(np.max(np.abs(h))), 1e-300)
            if asym > policy.herm_rel * scale:
                raise ValueError(f"input not Hermitian: asymmetry norm {asym:.3e}")
            w = np.linalg.eigvalsh(h)
            if w[0] < -policy.psd_rel * max(scale, abs(float(w[-1]))):
                raise ValueError(f"not PSD: min eigenvalue {w[0]:.3e}")
            tr = float(np.real(np.trace(h)))
            if tr > 1.0 + policy.trace_abs:
                raise ValueError(f"trace {tr} exceeds 1 + tol")
            if tr <= 0.0:
                raise ValueError(f"trace {tr} not positive")

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    @property
    def dim(self) -> int:
        return self.dims.dim

    def relabel(self, mapping: dict) -> "DensityOperator":
        labels = tuple(mapping.get(l, l) for l in self.dims.labels)
        return DensityOperator(self.matrix, SystemDims(labels, self.dims.dims), validate=False)

    def __repr__(self):
        return f"DensityOperator(labels={self.dims.labels}, dims={self.dims.dims}, trace={self.trace:.6f})"


class PureState:
    """Unit vector over labeled subsystems."""

    def __init__(self, vector, dims: SystemDims, policy: TolerancePolicy = DEFAULT_TOL,
                 validate: bool = True):
        vector = np.asarray(vector, dtype=complex).reshape(-1)
        if vector.shape[0] != dims.dim:
            raise ValueError(f"vector dim {vector.shape[0]} != system dim {dims.dim}")
        if validate:
            nrm = float(np.linalg.norm(vector))
            if abs(nrm - 1.0) > 1e-8:
                raise ValueError(f"vector norm {nrm} != 1")
        self.vector = vector
        self.vector.setflags(write=False)
        self.dims = dims

    @property
    def dim(self) -> int:
        return self.dims.dim

    def density(self) -> DensityOperator:
        return DensityOperator(np.outer(self.vector, self.vector.conj()), self.dims,
                               validate=False)

    def relabel(self, mapping: dict) -> "PureState":
        labels = tuple(mapping.get(l, l) for l in self.dims.labels)
        return PureState(self.vector, SystemDims(labels, self.dims.dims), validate=False)

    def __repr__(self):
        return f"PureState(labels={self.dims.labels}, dims={self.dims.dims})"


# ------------------------------------------------------------------- channels


class QuantumChannel:
    """CPTP map given by Kraus operators and/or its Choi matrix.

    Choi convention (unnormalized): J[(i,a),(j,b)] = sum_k K_k[a,i] conj(K_k[b,j]),
    so that N(rho) = Tr_in[(rho^T x I_out) J].  Invariants: sum K^dag K = I,
    J PSD, Tr_out J = I_in, and the two forms agree under conversion.
    """

    def __init__(self, kraus=None, choi=None, input_dims: SystemDims = None,
                 output_dims: SystemDims = None, policy: TolerancePolicy = DEFAULT_TOL,
                 validate: bool = True):
        if input_dims is None or output_dims is None:
            raise ValueError("input_dims and output_dims are required")
        self.input_dims = input_dims
        self.output_dims = output_dims
        din, dout = input_dims.dim, output_dims.dim
        if kraus is None and choi is None:
            raise ValueError("need kraus or choi")
        if kraus is not None:
            kraus = [np.asarray(k, dtype=complex) for k in kraus]
            for k in kraus:
                if k.shape != (dout, din):
                    raise ValueError(f"Kraus shape {k.shape} != ({dout},{din})")
        if choi is not None:
            choi = np.asarray(choi, dtype=complex)
            if choi.shape != (din * dout, din * dout):
                raise ValueError(f"Choi shape {choi.shape} != {(din*dout, din*dout)}")
        self._kraus = kraus
        self._choi = choi
        if validate:
            self._validate(policy)

    def _validate(self, policy: TolerancePolicy):
        din = self.input_dims.dim
        k = self.kraus
        comp = sum(km.conj().T @ km for km in k)
        if np.linalg.norm(comp - np.eye(din)) > 1e-7:
            raise ValueError("channel not trace preserving: sum K^dag K != I")
        j = self.choi
        w = np.linalg.eigvalsh(hermitize(j)[0])
        if w[0] < -1e-8 * max(float(w[-1]), 1.0):
            raise ValueError(f"Choi not PSD: min eigenvalue {w[0]:.3e}")

    @property
    def kraus(self) -> list:
        if self._kraus is None:
            self._kraus = _choi_to_kraus(self._choi, self.input_dims.dim, self.output_dims.dim)
        return self._kraus

    @property
    def choi(self) -> np.ndarray:
        if self._choi is None:
            self._choi = _kraus_to_choi(self._kraus, self.input_dims.dim, self.output_dims.dim)
        return self._choi

    def __repr__(self):
        return (f"QuantumChannel({self.input_dims.labels}{self.input_dims.dims} -> "
                f"{self.output_dims.labels}{self.output_dims.dims})")


def _kraus_to_choi(kraus, din: int, dout: int) -> np.ndarray:
    j = np.zeros((din * dout, din * dout), dtype=complex)
    for k in kraus:
        # vec[(i,a)] = K[a,i]
        v = k.T.reshape(-1)
        j += np.outer(v, v.conj())
    return j


def _choi_to_kraus(choi, din: int, dout: int) -> list:
    h, _ = hermitize(choi)
    w, v = np.linalg.eigh(h)
    out = []
    scale = max(float(np.max(w)), 1e-300)
    for lam, vec in zip(w, v.T):
        if lam > 1e-12 * scale:
            out.append(np.sqrt(lam) * vec.reshape(din, dout).T)
    return out


# ------------------------------------------------------- tensor / partial trace


def tensor(a: DensityOperator, b: DensityOperator) -> DensityOperator:
    """Kronecker product; dims concatenate, traces multiply."""
    return DensityOperator(np.kron(a.matrix, b.matrix), _concat(a.dims, b.dims),
                           validate=False)


def tensor_pure(a: PureState, b: PureState) -> PureState:
    return PureState(np.kron(a.vector, b.vector), _concat(a.dims, b.dims), validate=False)


def partial_trace(rho: DensityOperator, keep) -> DensityOperator:
    """Trace out every subsystem not in `keep`; kept order follows the original."""
    keep = set(keep)
    labels = rho.dims.labels
    for l in keep:
        if l not in labels:
            raise KeyError(f"unknown subsystem label {l!r}; have {labels}")
    dims = rho.dims.dims
    nsub = len(dims)
    t = rho.matrix.reshape(dims + dims)
    # sum over traced axes pairwise, from the highest axis down so indices stay valid
    traced = [i for i, l in enumerate(labels) if l not in keep]
    for i in reversed(traced):
        t = np.trace(t, axis1=i, axis2=i + (t.ndim // 2))
    new = rho.dims.restrict(keep)
    return DensityOperator(t.reshape(new.dim, new.dim), new, validate=False)


def permute_systems(rho: DensityOperator, new_order) -> DensityOperator:
    """Reorder subsystems to the given label order."""
    new_order = tuple(new_order)
    if set(new_order) != set(rho.dims.labels):
        raise ValueError("new_order must be a permutation of the labels")
    perm = [rho.dims.position(l) for l in new_order]
    dims = rho.dims.dims
    nsub = len(dims)
    t = rho.matrix.reshape(dims + dims)
    t = np.transpose(t, perm + [p + nsub for p in perm])
    new = SystemDims(new_order, tuple(dims[p] for p in perm))
    return DensityOperator(t.reshape(new.dim, new.dim), new, validate=False)


def purify(rho: DensityOperator, ref_label: str = "R",
           policy: TolerancePolicy = DEFAULT_TOL) -> PureState:
    """Purification on (ref, original systems); purifier dimension = rank(rho)."""
    if abs(rho.trace - 1.0) > 1e-8:
        raise ValueError(f"purify requires a normalized state, trace = {rho.trace}")
    if ref_label in rho.dims.labels:
        raise ValueError(f"purifier label {ref_label!r} collides with state labels")
    w, v = eigh(rho.matrix)
    scale = max(float(np.max(w)), 1e-300)
    keep = w > policy.rank_rel * scale
    lam, vecs = w[keep], v[:, keep]
    r = int(lam.size)
    d = rho.dim
    vec = np.zeros(r * d, dtype=complex)
    for i in range(r):
        e = np.zeros(r)
        e[i] = 1.0
        vec += np.sqrt(lam[i]) * np.kron(e, vecs[:, i])
    vec /= np.linalg.norm(vec)
    dims = _concat(system(ref_label, r), rho.dims)
    return PureState(vec, dims, validate=False)


# --------------------------------------------------------------------- metrics


def fidelity(rho: DensityOperator, sigma: DensityOperator) -> float:
    """F = || sqrt(rho) sqrt(sigma) ||_1, in [0, 1] for subnormalized inputs."""
    f = trace_norm(sqrtm_psd(rho.matrix) @ sqrtm_psd(sigma.matrix))
    return float(min(f, 1.0)) if f <= 1.0 + 1e-9 else f


def generalized_fidelity(rho: DensityOperator, sigma: DensityOperator) -> float:
    """F + sqrt((1 - tr rho)(1 - tr sigma)); reduces to F when either is normalized."""
    a = max(0.0, 1.0 - rho.trace)
    b = max(0.0, 1.0 - sigma.trace)
    fbar = fidelity(rho, sigma) + float(np.sqrt(a * b))
    return float(min(fbar, 1.0)) if fbar <= 1.0 + 1e-9 else fbar


def purified_distance(rho: DensityOperator, sigma: DensityOperator) -> float:
    """P = sqrt(1 - generalized_fidelity^2)."""
    fbar = min(generalized_fidelity(rho, sigma), 1.0)
    return float(np.sqrt(max(0.0, 1.0 - fbar * fbar)))


def trace_distance(rho: DensityOperator, sigma: DensityOperator) -> float:
    """(1/2) || rho - sigma ||_1."""
    w, _ = eigh(rho.matrix - sigma.matrix)
    return float(0.5 * np.sum(np.abs(w)))


# ------------------------------------------------------------- channel action


def apply_channel(channel: QuantumChannel, rho: DensityOperator) -> DensityOperator:
    """Apply the channel to the subsystems matching its input labels.

    Output labels replace the input labels, inserted at the position of the
    first acted subsystem; all other subsystems are untouched.
    """
    labels = rho.dims.labels
    in_labels = channel.input_dims.labels
    for l in in_labels:
        if l not in labels:
            raise ValueError(f"channel input label {l!r} not in state labels {labels}")
    for l in channel.output_dims.labels:
        if l in labels and l not in in_labels:
            raise ValueError(f"channel output label {l!r} collides with state labels")
    rest = [l for l in labels if l not in set(in_labels)]
    reordered = permute_systems(rho, rest + list(in_labels)) if labels != tuple(rest + list(in_labels)) \
        else rho
    d_rest = int(np.prod([rho.dims.dims[rho.dims.position(l)] for l in rest])) if rest else 1
    din = channel.input_dims.dim
    dout = channel.output_dims.dim
    m = reordered.matrix.reshape(d_rest, din, d_rest, din)
    out = np.zeros((d_rest, dout, d_rest, dout), dtype=complex)
    for k in channel.kraus:
        tmp = np.einsum("ai,risj->rasj", k, m)
        out += np.einsum("rasj,bj->rasb", tmp, k.conj())
    rest_dims = SystemDims(tuple(rest), tuple(rho.dims.dims[rho.dims.position(l)] for l in rest)) \
        if rest else SystemDims((), ())
    if rest:
        new = _concat(rest_dims, channel.output_dims)
    else:
        new = channel.output_dims
    result = DensityOperator(out.reshape(new.dim, new.dim), new, validate=False)
    # restore original ordering with outputs at the first acted position
    first = min(labels.index(l) for l in in_labels)
    final_order: list[str] = []
    inserted = False
    for i, l in enumerate(labels):
        if l in set(in_labels):
            if not inserted:
                final_order.extend(channel.output_dims.labels)
                inserted = True
        else:
            final_order.append(l)
    if not inserted:
        final_order.extend(channel.output_dims.labels)
    return permute_systems(result, final_order)


def extend_to_reference(channel: QuantumChannel, state, ref_label: str = "R") -> DensityOperator:
    """(id_R x N)(phi) for a purification phi whose non-reference part feeds N.

    Accepts either a purification (PureState) or a bare input state, which is
    purified onto ref_label first.
    """
    if isinstance(state, DensityOperator):
        state = purify(state, ref_label=ref_label)
    return apply_channel(channel, state.density())


# ----------------------------------------------------------------- constructors


def ket(index: int, dim: int, label: str = "A") -> PureState:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return PureState(v, system(label, dim), validate=False)


def maximally_mixed(dim: int, label: str = "A") -> DensityOperator:
    return DensityOperator(np.eye(dim) / dim, system(label, dim), validate=False)


def bell_state(labels: tuple[str, str] = ("R", "A"), dim: int = 2) -> PureState:
    """Maximally entangled state (1/sqrt(d)) sum_i |ii> on two dim-d systems."""
    v = np.zeros(dim * dim, dtype=complex)
    for i in range(dim):
        v[i * dim + i] = 1.0
    v /= np.sqrt(dim)
    dims = SystemDims((labels[0], labels[1]), (dim, dim))
    return PureState(v, dims, validate=False)


PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def identity_channel(dim: int = 2, in_label: str = "A", out_label: str = "B") -> QuantumChannel:
    return QuantumChannel(kraus=[np.eye(dim)], input_dims=system(in_label, dim),
                          output_dims=system(out_label, dim), validate=False)


def depolarizing_channel(p: float, in_label: str = "A", out_label: str = "B") -> QuantumChannel:
    """N(rho) = (1-p) rho + p I/2 on a qubit."""
    if not 0.0 <= p <= 4.0 / 3.0:
        raise ValueError(f"depolarizing parameter {p} out of range")
    kraus = [np.sqrt(1.0 - 3.0 * p / 4.0) * PAULI[0]] + \
            [np.sqrt(p / 4.0) * s for s in PAULI[1:]]
    kraus = [k for k in kraus if np.linalg.norm(k) > 0]
    return QuantumChannel(kraus=kraus, input_dims=system(in_label, 2),
                          output_dims=system(out_label, 2), validate=False)


def random_pure(rng: np.random.Generator, dim: int, label: str = "A") -> PureState:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    v /= np.linalg.norm(v)
    return PureState(v, system(label, dim), validate=False)


def random_density(rng: np.random.Generator, dim: int, rank: int = None,
                   label: str = "A", scale: float = 1.0) -> DensityOperator:
    """Partial trace of a Haar-ish random pure state (Hilbert-Schmidt-like).

    scale < 1 yields a subnormalized operator with trace = scale.
    """
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    m *= scale / np.real(np.trace(m))
    return DensityOperator(m, system(label, dim), validate=False)


def random_channel(rng: np.random.Generator, din: int, dout: int, kraus_rank: int = None,
                   in_label: str = "A", out_label: str = "B") -> QuantumChannel:
    """Random CPTP map via a Haar-ish Stinespring isometry."""
    kraus_rank = din * dout if kraus_rank is None else kraus_rank
    if dout * kraus_rank < din:
        raise ValueError("dout * kraus_rank must be >= din for an isometry to exist")
    g = rng.normal(size=(dout * kraus_rank, din)) + 1j * rng.normal(size=(dout * kraus_rank, din))
    # QR gives an isometry V: din -> dout * env
    q, r = np.linalg.qr(g)
    # fix phases for determinism
    q = q * np.sign(np.real(np.diag(r)) + 1e-300)
    kraus = [q[e * dout:(e + 1) * dout, :] for e in range(kraus_rank)]
    return QuantumChannel(kraus=kraus, input_dims=system(in_label, din),
                          output_dims=system(out_label, dout), validate=False)
