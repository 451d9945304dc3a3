"""Distortion observables and excess-distortion projectors.

A distortion observable is a PSD Hermitian operator on the joint
reference-output space; its largest eigenvalue d_max caps the per-symbol
penalty.  Blocklength-n sources use the average symbol-wise observable
(1/n) sum_i Delta_i, which is never materialized densely for n > 3:
Lemma-7-style tensor-product eigenvectors make the spectrum a convolution
of the single-symbol spectrum, so excess probabilities over i.i.d. states
reduce to a dynamic program over eigenvalue groups.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import DEFAULT_TOL, eigh, group_eigenvalues, hermitize
from .serialize import matrix_from_dict, matrix_to_dict
from .states import DensityOperator, PureState, SystemDims

# boundary eigenvalues within this of the threshold count as "not exceeding"
BOUNDARY_REL = 1e-12


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, (DensityOperator, PureState)):
        x = x.density().matrix if isinstance(x, PureState) else x.matrix
    return np.asarray(x, dtype=complex)


class DistortionObservable:
    """PSD observable with cached spectral data and a serialization header."""

    def __init__(self, matrix, dims: SystemDims = None, header: dict = None):
        m, _ = hermitize(np.asarray(matrix, dtype=complex))
        w, v = eigh(m)
        scale = max(float(w[-1]), 1.0)
        if float(w[0]) < -DEFAULT_TOL.psd_rel * scale:
            raise ValueError("distortion observable must be PSD")
        self.operator = m
        self.eigenvalues = np.clip(w, 0.0, None)
        self.eigenvectors = v
        self.d_max = float(self.eigenvalues[-1])
        self.dims = dims
        self._header = dict(header) if header else {"kind": "dense"}
        # stable grouping so degenerate spectra convolve with clean counts
        self.groups = group_eigenvalues(self.eigenvalues)

    @property
    def spectrum(self):
        """Eigenpairs (d_z, column vector), ascending."""
        return [(float(self.eigenvalues[i]), self.eigenvectors[:, i])
                for i in range(len(self.eigenvalues))]

    @property
    def dim(self) -> int:
        return self.operator.shape[0]

    def expectation(self, omega) -> float:
        om = _as_matrix(omega)
        if om.shape != self.operator.shape:
            raise ValueError("dimension mismatch between state and observable")
        return float(np.real(np.trace(self.operator @ om)))

    def group_probabilities(self, omega) -> np.ndarray:
        """Tr(P_g omega) for each eigenvalue group g."""
        om = _as_matrix(omega)
        if om.shape != self.operator.shape:
            raise ValueError("dimension mismatch between state and observable")
        out = np.empty(len(self.groups))
        for g, (_, idx) in enumerate(self.groups):
            cols = self.eigenvectors[:, idx]
            out[g] = max(float(np.real(np.trace(cols.conj().T @ om @ cols))), 0.0)
        return out

    def to_dict(self) -> dict:
        obj = dict(self._header)
        if obj.get("kind", "dense") == "dense":
            if self.dims is not None:
                labels, dims = self.dims.labels, self.dims.dims
            else:
                labels, dims = ("RB",), (self.dim,)
            obj["matrix"] = matrix_to_dict(self.operator, labels=labels, dims=dims)
        return obj

    @classmethod
    def from_dict(cls, obj: dict) -> "DistortionObservable":
        kind = obj.get("kind", "dense")
        if kind == "ent_fid":
            vec = np.asarray([complex(re, im) for re, im in obj["purification"]])
            return entanglement_fidelity_observable(vec)
        if kind == "classical":
            return classical_cc_observable(np.asarray(obj["d"], dtype=float))
        m, dims = matrix_from_dict(obj["matrix"])
        return cls(m, dims=dims, header={"kind": "dense"})


class SymbolwiseObservable:
    """(1/n) sum_i Delta_i over n symbols, held implicitly.

    Only the single-symbol eigenbasis and the grouped eigenvalue list are
    stored; the n-fold eigenvalues are (1/n) sums of per-symbol draws.  The
    value/count convolution table is built once and reused.
    """

    def __init__(self, base: DistortionObservable, n: int):
        if n < 1:
            raise ValueError("n must be a positive integer")
        self.base = base
        self.n = int(n)
        self.d_max = base.d_max
        self._table = self._convolve_counts()

    # ---------------------------------------------------------------- table

    def _convolve_counts(self):
        """Distinct average values with exact dimension counts, by DP."""
        vals = [val for val, _ in self.base.groups]
        mults = [len(idx) for _, idx in self.base.groups]
        sums = {0.0: 1}
        for _ in range(self.n):
            nxt = {}
            for acc, cnt in sums.items():
                for val, mul in zip(vals, mults):
                    key = acc + val
                    nxt[key] = nxt.get(key, 0) + cnt * mul
            sums = self._merge(nxt)
        values = sorted(sums)
        return [(v / self.n, sums[v]) for v in values]

    @staticmethod
    def _merge(table: dict) -> dict:
        # collapse keys that only differ by floating-point noise
        items = sorted(table.items())
        out = {}
        anchor = None
        for val, cnt in items:
            if anchor is not None and val - anchor <= 1e-10 * max(1.0, abs(anchor)):
                out[anchor] += cnt
            else:
                anchor = val
                out[anchor] = cnt
        return out

    @property
    def value_counts(self):
        """[(average eigenvalue, dimension of its eigenspace)], ascending."""
        return list(self._table)

    # ---------------------------------------------------------------- dense

    def dense(self) -> np.ndarray:
        if self.n > 3:
            raise ValueError(
                "dense materialization is refused for n > 3; use the implicit "
                "excess/mean operations instead")
        d = self.base.dim
        total = np.zeros((d ** self.n,) * 2, dtype=complex)
        for i in range(self.n):
            term = np.eye(1, dtype=complex)
            for j in range(self.n):
                term = np.kron(term, self.base.operator if j == i else np.eye(d))
            total += term
        return total / self.n

    def excess_distribution(self, omega) -> list:
        """[(average value, probability)] for the i.i.d. state omega^{(x)n}."""
        probs = self.base.group_probabilities(omega)
        vals = [val for val, _ in self.base.groups]
        dist = {0.0: 1.0}
        for _ in range(self.n):
            nxt = {}
            for acc, pr in dist.items():
                for val, p in zip(vals, probs):
                    if p <= 0.0:
                        continue
                    key = acc + val
                    nxt[key] = nxt.get(key, 0.0) + pr * p
            items = sorted(nxt.items())
            merged = {}
            anchor = None
            for val, pr in items:
                if anchor is not None and val - anchor <= 1e-10 * max(1.0, abs(anchor)):
                    merged[anchor] += pr
                else:
                    anchor = val
                    merged[anchor] = pr
            dist = merged
        return [(v / self.n, dist[v]) for v in sorted(dist)]


def average_symbolwise(delta: DistortionObservable, n: int) -> SymbolwiseObservable:
    """Average symbol-wise observable over n source symbols."""
    return SymbolwiseObservable(delta, n)


@dataclass
class ExcessProjector:
    """Projector onto eigenspaces with distortion strictly above D.

    Eigenvalues within 1e-12 * max(1, D) of the threshold land on the
    "not exceeding" side; how many did is recorded in boundary_count.
    """

    threshold: float
    source: object
    boundary_count: int = 0
    _dense: np.ndarray = field(default=None, repr=False)
    _selected: tuple = field(default=None, repr=False)

    @property
    def matrix(self) -> np.ndarray:
        if self._dense is None:
            raise ValueError("projector is implicit; no dense form at this n")
        return self._dense

    def complement(self) -> np.ndarray:
        return np.eye(self.matrix.shape[0]) - self.matrix


def excess_projector(delta, D: float) -> ExcessProjector:
    if D < 0:
        raise ValueError("threshold must be nonnegative")
    tol = BOUNDARY_REL * max(1.0, D)
    if isinstance(delta, SymbolwiseObservable):
        selected = []
        boundary = 0
        for idx, (val, cnt) in enumerate(delta.value_counts):
            if abs(val - D) <= tol:
                boundary += cnt
            elif val > D:
                selected.append(idx)
        dense = None
        if delta.n <= 3:
            dense = _dense_excess(delta.dense(), D, tol)[0]
        return ExcessProjector(threshold=D, source=delta, boundary_count=boundary,
                               _dense=dense, _selected=tuple(selected))
    dense, boundary = _dense_excess(delta.operator, D, tol)
    return ExcessProjector(threshold=D, source=delta, boundary_count=boundary,
                           _dense=dense)


def _dense_excess(matrix: np.ndarray, D: float, tol: float):
    w, v = eigh(matrix)
    boundary = int(np.sum(np.abs(w - D) <= tol))
    sel = (w > D) & (np.abs(w - D) > tol)
    cols = v[:, sel]
    return cols @ cols.conj().T, boundary


def excess_probability(omega, proj: ExcessProjector) -> float:
    """Tr(Pi_{>D} omega); i.i.d. implicit path for symbol-wise sources."""
    om = _as_matrix(omega)
    src = proj.source
    if isinstance(src, SymbolwiseObservable):
        if om.shape[0] == src.base.dim:
            tol = BOUNDARY_REL * max(1.0, proj.threshold)
            total = 0.0
            for val, pr in src.excess_distribution(om):
                if val > proj.threshold and abs(val - proj.threshold) > tol:
                    total += pr
            return min(max(total, 0.0), 1.0)
        if proj._dense is not None and om.shape == proj._dense.shape:
            return float(np.real(np.trace(proj._dense @ om)))
        raise ValueError("dimension mismatch: pass the single-symbol state "
                         "for the implicit path")
    if om.shape != proj.matrix.shape:
        raise ValueError("dimension mismatch between state and projector")
    return float(np.real(np.trace(proj.matrix @ om)))


def mean_distortion(omega, delta: DistortionObservable) -> float:
    """Tr(Delta omega) for a single symbol."""
    return delta.expectation(omega)


def mean_distortion_n(omega, sym: SymbolwiseObservable) -> float:
    """Mean of the average symbol-wise observable.

    A single-symbol omega is read as the i.i.d. state omega^{(x)n}, for
    which the mean collapses to the single-symbol mean; an n-fold dense
    state is contracted directly (n <= 3).
    """
    om = _as_matrix(omega)
    if om.shape[0] == sym.base.dim:
        return sym.base.expectation(om)
    dense = sym.dense()
    if om.shape != dense.shape:
        raise ValueError("dimension mismatch between state and observable")
    return float(np.real(np.trace(dense @ om)))


def entanglement_fidelity_observable(purification) -> DistortionObservable:
    """I - |phi><phi| for a normalized source purification."""
    if isinstance(purification, PureState):
        vec = purification.vector
        dims = purification.dims
    else:
        vec = np.asarray(purification, dtype=complex).reshape(-1)
        dims = None
    nrm = float(np.linalg.norm(vec))
    if abs(nrm - 1.0) > 1e-9:
        raise ValueError("purification must be normalized")
    d = vec.shape[0]
    m = np.eye(d, dtype=complex) - np.outer(vec, vec.conj())
    header = {"kind": "ent_fid",
              "purification": [[float(z.real), float(z.imag)] for z in vec]}
    return DistortionObservable(m, dims=dims, header=header)


def classical_cc_observable(d: np.ndarray) -> DistortionObservable:
    """sum_x |x><x| (x) Delta_B^x with Delta_B^x = sum_y d(x,y) |y><y|."""
    dm = np.asarray(d, dtype=float)
    if dm.ndim != 2:
        raise ValueError("distortion table must be a 2-d array")
    if np.any(dm < 0):
        raise ValueError("distortion entries must be nonnegative")
    nx, ny = dm.shape
    m = np.zeros((nx * ny, nx * ny), dtype=complex)
    for x in range(nx):
        for y in range(ny):
            k = x * ny + y
            m[k, k] = dm[x, y]
    header = {"kind": "classical", "d": [[float(v) for v in row] for row in dm]}
    dims = SystemDims(("X", "Y"), (nx, ny))
    return DistortionObservable(m, dims=dims, header=header)
