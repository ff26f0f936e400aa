import numpy as np
import pytest

from floqres.basis import build_basis_1d, build_basis_2d
from floqres.models import ModelSpec
from floqres.pauli import SIGMA, I, X, Y, Z
from floqres.propagator import (TruncatedPropagator, density_vector,
                                load_dense, save_dense, truncated_correlator)

KI = "kicked_ising_1d"
KXX = "kicked_xx_1d"
KI2 = "kicked_ising_2d"


@pytest.mark.parametrize("model,tau,k", [
    (KI, 0.0, 0.0), (KI, 0.0, 0.7), (KXX, 0.0, np.pi), (KI2, 0.0, 0.0),
])
@pytest.mark.parametrize("mode", ["in_situ", "padded"])
def test_tau_zero_identity(model, tau, k, mode):
    spec = ModelSpec(model=model, tau=tau, Jx=0.5 if model == KXX else 0.0)
    basis = build_basis_2d(2, 2) if model == KI2 else build_basis_1d(3)
    m = TruncatedPropagator(spec, basis, k, mode=mode).build_dense()
    assert np.abs(m - np.eye(basis.size)).max() < 1e-14


@pytest.mark.parametrize("model,tau", [
    (KI, 0.3), (KI, 0.8), (KI, 2.4), (KXX, 0.8),
])
@pytest.mark.parametrize("k", [0.0, 0.3, np.pi])
def test_in_situ_padded_equivalence_1d(model, tau, k):
    spec = ModelSpec(model=model, tau=tau, Jx=0.6 if model == KXX else 0.0)
    basis = build_basis_1d(3)
    a = TruncatedPropagator(spec, basis, k, mode="in_situ").build_dense()
    b = TruncatedPropagator(spec, basis, k, mode="padded").build_dense()
    assert np.abs(a - b).max() < 1e-12


def test_in_situ_padded_equivalence_2d():
    spec = ModelSpec(model=KI2, tau=0.8)
    basis = build_basis_2d(2, 2)
    a = TruncatedPropagator(spec, basis, 0.0, mode="in_situ").build_dense()
    b = TruncatedPropagator(spec, basis, 0.0, mode="padded").build_dense()
    assert np.abs(a - b).max() < 1e-12


def _dense_column_oracle(spec, r, beta_codes, k, shifts):
    """M column for a density via dense conjugation on a padded window."""
    from floqres.models import program_unitary, region_program

    s = spec.spreading
    w = r + 2 * s
    prog = region_program(spec, range(w))
    u = program_unitary(prog)
    op = np.eye(1)
    codes = [I] * s + list(beta_codes) + [I] * s
    for c in codes:
        op = np.kron(op, SIGMA[c])
    heis = u.conj().T @ op @ u
    col = {}
    for d in shifts:
        for alpha in range(4 ** r):
            acodes = [(alpha >> (2 * (r - 1 - j))) & 3 for j in range(r)]
            if acodes[0] == I:
                continue
            full = [I] * w
            for j, c in enumerate(acodes):
                full[s + d + j] = c
            mat = np.eye(1)
            for c in full:
                mat = np.kron(mat, SIGMA[c])
            ov = np.trace(mat.conj().T @ heis) / 2 ** w
            if abs(ov) > 1e-15:
                col[alpha] = col.get(alpha, 0) + ov * np.exp(-1j * k * d)
    return col


@pytest.mark.parametrize("k", [0.0, 0.45])
def test_column_matches_dense_conjugation(k):
    spec = ModelSpec(model=KI, tau=0.9)
    r = 2
    basis = build_basis_1d(r)
    prop = TruncatedPropagator(spec, basis, k)
    beta = (Z, X)
    col = prop.build_column(basis.position(np.array(beta, dtype=np.int8)))
    oracle = _dense_column_oracle(spec, r, beta, k, shifts=(-1, 0, 1))
    vec = np.zeros(basis.size, dtype=complex)
    for alpha, v in oracle.items():
        pos = basis.position(np.array(
            [(alpha >> (2 * (r - 1 - j))) & 3 for j in range(r)], dtype=np.int8))
        vec[pos] = v
    assert np.abs(np.asarray(col, dtype=complex) - vec).max() < 1e-12


def test_adjoint_symmetry():
    spec = ModelSpec(model=KI, tau=1.1)
    basis = build_basis_1d(3)
    m = TruncatedPropagator(spec, basis, 0.0).build_dense()
    mi = TruncatedPropagator(spec, basis, 0.0, inverse=True).build_dense()
    assert np.abs(mi - m.conj().T).max() < 1e-12


def test_contraction():
    spec = ModelSpec(model=KI, tau=0.7)
    m = TruncatedPropagator(spec, build_basis_1d(3), 0.0).build_dense()
    vals = np.linalg.eigvals(m)
    assert np.abs(vals).max() <= 1 + 1e-10


def test_tau_pi_eigenvalue_counts_r3():
    spec = ModelSpec(model=KI, tau=np.pi)
    m = TruncatedPropagator(spec, build_basis_1d(3), 0.0).build_dense()
    vals = np.linalg.eigvals(m)
    plus = int(np.sum(np.abs(vals - 1) < 1e-8))
    minus = int(np.sum(np.abs(vals + 1) < 1e-8))
    kernel = int(np.sum(np.abs(vals) < 1e-8))
    assert (plus, minus, kernel) == (10, 10, 28)


def test_density_vector_and_correlator_t0():
    basis = build_basis_1d(4)
    a = density_vector(basis, (Z,))
    assert a[basis.position(np.array([Z, I, I, I], dtype=np.int8))] == 1.0
    assert np.sum(np.abs(a) > 0) == 1
    spec = ModelSpec(model=KI, tau=0.5)
    prop = TruncatedPropagator(spec, basis, 0.0)
    c = truncated_correlator(prop, a, 2)
    assert c[0] == pytest.approx(1.0, abs=1e-13)


def test_save_load_roundtrip(tmp_path):
    spec = ModelSpec(model=KI, tau=0.4)
    basis = build_basis_1d(2)
    m = TruncatedPropagator(spec, basis, 0.3).build_dense()
    path = tmp_path / "m.npz"
    save_dense(path, m, spec, 0.3, basis)
    loaded, header = load_dense(path)
    assert np.abs(loaded - m).max() == 0.0
    assert header["k"] == 0.3 and header["N"] == basis.size


def test_linear_operator_matches_dense():
    spec = ModelSpec(model=KI, tau=0.9)
    basis = build_basis_1d(3)
    prop = TruncatedPropagator(spec, basis, 0.0)
    m = prop.build_dense()
    op = prop.as_linear_operator()
    rng = np.random.default_rng(2)
    v = rng.standard_normal(basis.size)
    assert np.abs(op @ v - m @ v).max() < 1e-12
