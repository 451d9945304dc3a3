"""States, channels, metrics: worked examples plus the property suites."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qrdkit.linalg import trace_norm, sqrtm_psd
from qrdkit.serialize import (
    channel_from_dict,
    channel_to_dict,
    density_from_dict,
    density_to_dict,
    matrix_from_dict,
    matrix_to_dict,
)
from qrdkit.states import (
    DensityOperator,
    QuantumChannel,
    SystemDims,
    apply_channel,
    bell_state,
    depolarizing_channel,
    extend_to_reference,
    fidelity,
    generalized_fidelity,
    identity_channel,
    ket,
    maximally_mixed,
    partial_trace,
    purified_distance,
    purify,
    random_channel,
    random_density,
    random_pure,
    system,
    tensor,
    trace_distance,
)

SEED = 20260817


def _rng(salt=0):
    return np.random.default_rng(SEED + salt)


# ---------------------------------------------------------------- structure


def test_system_dims():
    s = system("A", 2)
    assert s.dim == 2 and s.labels == ("A",)
    with pytest.raises(ValueError):
        tensor(random_density(_rng(), 2), random_density(_rng(), 2))  # both labeled A


def test_density_validation():
    good = DensityOperator(np.diag([0.5, 0.3]).astype(complex), system("A", 2))
    assert abs(good.trace - 0.8) < 1e-12  # subnormalized allowed
    with pytest.raises(ValueError):
        DensityOperator(np.diag([0.8, -0.2]).astype(complex), system("A", 2))
    with pytest.raises(ValueError):
        DensityOperator(np.diag([0.9, 0.3]).astype(complex), system("A", 2))
    with pytest.raises(ValueError):
        m = np.array([[0.5, 1.0], [0.0, 0.5]], dtype=complex)  # badly non-Hermitian
        DensityOperator(m, system("A", 2))


def test_bell_marginal_is_maximally_mixed():
    phi = bell_state(("R", "A")).density()
    red = partial_trace(phi, keep=("R",))
    assert np.allclose(red.matrix, 0.5 * np.eye(2), atol=1e-14)


def test_partial_trace_of_tensor_is_exact():
    rng = _rng(1)
    for _ in range(100):
        da, db = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        a = random_density(rng, da, label="A")
        b = random_density(rng, db, label="B")
        ab = tensor(a, b)
        back = partial_trace(ab, keep=("A",))
        assert np.max(np.abs(back.matrix - a.matrix)) <= 1e-12


def test_partial_trace_against_index_summation():
    # independent oracle: explicit loop over traced indices
    rng = _rng(2)
    dims = (2, 3, 2)
    d = int(np.prod(dims))
    raw = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = raw @ raw.conj().T
    m /= np.trace(m).real
    rho = DensityOperator(m, SystemDims(labels=("A", "B", "C"), dims=dims))
    red = partial_trace(rho, keep=("A", "C"))
    t = m.reshape(2, 3, 2, 2, 3, 2)
    oracle = np.einsum("abcdbf->acdf", t).reshape(4, 4)
    assert np.max(np.abs(red.matrix - oracle)) < 1e-12
    assert red.dims.labels == ("A", "C")


def test_purify_rank_and_marginal():
    rho = DensityOperator(np.diag([0.6, 0.4, 0.0]).astype(complex), system("B", 3))
    psi = purify(rho, ref_label="R")
    # purifier dimension equals the rank, not the ambient dimension
    assert psi.dims.dim_of("R") == 2
    marg = partial_trace(psi.density(), keep=("B",))
    assert np.max(np.abs(marg.matrix - rho.matrix)) < 1e-10
    rng = _rng(3)
    for _ in range(20):
        d = int(rng.integers(2, 6))
        r = int(rng.integers(1, d + 1))
        rho = random_density(rng, d, rank=r, label="B")
        psi = purify(rho)
        assert psi.dims.dim_of("R") == r
        marg = partial_trace(psi.density(), keep=("B",))
        assert np.max(np.abs(marg.matrix - rho.matrix)) < 1e-10


# ------------------------------------------------------------------ metrics


def test_fidelity_examples():
    zero = ket(0, 2, label="A").density()
    mixed = maximally_mixed(2, label="A")
    assert abs(fidelity(zero, mixed) - 1.0 / np.sqrt(2.0)) < 1e-12
    rho = random_density(_rng(4), 4)
    assert abs(fidelity(rho, rho) - 1.0) < 1e-10


def test_fidelity_pure_overlap():
    rng = _rng(5)
    for _ in range(25):
        a = random_pure(rng, 3)
        b = random_pure(rng, 3)
        overlap = abs(np.vdot(a.vector, b.vector))
        assert abs(fidelity(a.density(), b.density()) - overlap) < 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_fuchs_van_de_graaf(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 6))
    rho = random_density(rng, d)
    sig = random_density(rng, d)
    f = fidelity(rho, sig)
    t = trace_distance(rho, sig)
    assert 1.0 - f <= t + 1e-9
    assert t <= np.sqrt(max(0.0, 1.0 - f * f)) + 1e-9


def test_generalized_fidelity_dominates():
    # 200 pairs, subnormalized on purpose; slack floor -1e-9
    rng = _rng(6)
    for _ in range(200):
        d = int(rng.integers(2, 5))
        rho = random_density(rng, d, scale=float(rng.uniform(0.3, 1.0)))
        sig = random_density(rng, d, scale=float(rng.uniform(0.3, 1.0)))
        assert generalized_fidelity(rho, sig) - fidelity(rho, sig) >= -1e-9


def test_purified_distance_triangle():
    rng = _rng(7)
    for _ in range(100):
        d = int(rng.integers(2, 5))
        rho = random_density(rng, d, scale=float(rng.uniform(0.5, 1.0)))
        sig = random_density(rng, d, scale=float(rng.uniform(0.5, 1.0)))
        tau = random_density(rng, d, scale=float(rng.uniform(0.5, 1.0)))
        lhs = purified_distance(rho, tau)
        rhs = purified_distance(rho, sig) + purified_distance(sig, tau)
        assert lhs <= rhs + 1e-9


def test_gentle_operator_lemma():
    # 0 <= L <= I, eps := 1 - Tr(L rho); then ||rho - sqrt(L) rho sqrt(L)||_1 <= 2 sqrt(eps)
    rng = _rng(8)
    for _ in range(100):
        d = int(rng.integers(2, 6))
        rho = random_density(rng, d)
        h = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        h = (h + h.conj().T) / 2
        w, v = np.linalg.eigh(h)
        lam = (v * (1.0 / (1.0 + np.exp(-w)))) @ v.conj().T
        eps = max(0.0, 1.0 - float(np.real(np.trace(lam @ rho.matrix))))
        sq = sqrtm_psd(lam)
        damaged = sq @ rho.matrix @ sq
        assert trace_norm(rho.matrix - damaged) <= 2.0 * np.sqrt(eps) + 1e-9


def test_povm_overlap_shift_lemma():
    # Tr(L rho) >= Tr(L sigma) - (1/2)||rho - sigma||_1 for 0 <= L <= I
    rng = _rng(9)
    for _ in range(100):
        d = int(rng.integers(2, 6))
        rho = random_density(rng, d)
        sig = random_density(rng, d)
        h = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        h = (h + h.conj().T) / 2
        w, v = np.linalg.eigh(h)
        lam = (v * (1.0 / (1.0 + np.exp(-w)))) @ v.conj().T
        lhs = float(np.real(np.trace(lam @ rho.matrix)))
        rhs = float(np.real(np.trace(lam @ sig.matrix))) - 0.5 * trace_norm(rho.matrix - sig.matrix)
        assert lhs >= rhs - 1e-9


# ----------------------------------------------------------------- channels


def test_choi_kraus_roundtrip():
    rng = _rng(10)
    for _ in range(30):
        din = int(rng.integers(2, 4))
        dout = int(rng.integers(2, 4))
        ch = random_channel(rng, din, dout)
        choi = ch.choi
        rebuilt = QuantumChannel(choi=choi, input_dims=ch.input_dims,
                                 output_dims=ch.output_dims)
        rho = random_density(rng, din, label="A")
        out1 = apply_channel(ch, rho)
        out2 = apply_channel(rebuilt, rho)
        assert np.max(np.abs(out1.matrix - out2.matrix)) < 1e-10
        assert np.max(np.abs(rebuilt.choi - choi)) < 1e-10


def test_choi_of_identity_is_unnormalized_bell():
    ch = identity_channel(2)
    phi = 2.0 * bell_state(("R", "A")).density().matrix
    assert np.allclose(ch.choi, phi, atol=1e-12)


def test_channel_validation_rejects_non_tp():
    k = [np.array([[1.0, 0.0], [0.0, 0.5]], dtype=complex)]
    with pytest.raises(ValueError):
        QuantumChannel(kraus=k, input_dims=system("A", 2), output_dims=system("B", 2))


def test_depolarizing_examples():
    ch = depolarizing_channel(1.0)
    rho = ket(0, 2, label="A").density()
    out = apply_channel(ch, rho)
    assert np.allclose(out.matrix, 0.5 * np.eye(2), atol=1e-12)
    # p = 0 is the identity
    ch0 = depolarizing_channel(0.0)
    out0 = apply_channel(ch0, rho)
    assert np.allclose(out0.matrix, rho.matrix, atol=1e-12)


def test_apply_channel_on_subsystem():
    # acting on A of a Bell pair leaves the R marginal untouched
    rng = _rng(11)
    phi = bell_state(("R", "A")).density()
    ch = random_channel(rng, 2, 2, in_label="A", out_label="B")
    out = apply_channel(ch, phi)
    assert out.dims.labels == ("R", "B")
    red = partial_trace(out, keep=("R",))
    assert np.max(np.abs(red.matrix - 0.5 * np.eye(2))) < 1e-12
    assert abs(out.trace - 1.0) < 1e-10


def test_extend_to_reference_matches_manual():
    rng = _rng(12)
    rho = random_density(rng, 2, label="A")
    ch = depolarizing_channel(0.3, in_label="A", out_label="B")
    omega = extend_to_reference(ch, rho)
    red_r = partial_trace(omega, keep=("R",))
    psi = purify(rho, ref_label="R")
    ref = partial_trace(psi.density(), keep=("R",))
    assert np.max(np.abs(red_r.matrix - ref.matrix)) < 1e-10


def test_random_channel_isometry_guard():
    with pytest.raises(ValueError):
        random_channel(_rng(13), din=4, dout=2, kraus_rank=1)


# -------------------------------------------------------------- persistence


def test_matrix_json_roundtrip_is_exact():
    rng = _rng(14)
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    d = matrix_to_dict(m, labels=("A",), dims=(3,))
    back, sysd = matrix_from_dict(d)
    assert np.array_equal(back, m)  # bit-identical via repr round trip
    assert sysd.labels == ("A",) and sysd.dims == (3,)


def test_density_and_channel_json_roundtrip():
    rng = _rng(15)
    rho = random_density(rng, 3, label="B")
    back = density_from_dict(density_to_dict(rho))
    assert np.array_equal(back.matrix, rho.matrix)
    assert back.dims == rho.dims

    ch = random_channel(rng, 2, 3)
    d_kraus = channel_to_dict(ch, kind="kraus")
    d_choi = channel_to_dict(ch, kind="choi")
    back_k = channel_from_dict(d_kraus)
    back_c = channel_from_dict(d_choi)
    rho_in = random_density(rng, 2, label="A")
    out = apply_channel(ch, rho_in).matrix
    assert np.max(np.abs(apply_channel(back_k, rho_in).matrix - out)) < 1e-12
    assert np.max(np.abs(apply_channel(back_c, rho_in).matrix - out)) < 1e-10
