import numpy as np
import pytest
from hypothesis import given, strategies as st

from floqres.pauli import (I, PHASE, PROD, SIGMA, X, Y, Z, GateSpec,
                           PauliString, gate_superoperator, pauli_mul,
                           superoperator_from_unitary)

CODES = [I, X, Y, Z]


@given(st.integers(0, 3), st.integers(0, 3))
def test_single_site_product_table(a, b):
    lhs = SIGMA[a] @ SIGMA[b]
    rhs = (1j ** int(PHASE[a, b])) * SIGMA[int(PROD[a, b])]
    assert np.allclose(lhs, rhs, atol=1e-14)


@given(st.lists(st.integers(0, 3), min_size=1, max_size=5),
       st.lists(st.integers(0, 3), min_size=1, max_size=5))
def test_pauli_mul_matches_kron(ca, cb):
    n = max(len(ca), len(cb))
    ca = ca + [I] * (n - len(ca))
    cb = cb + [I] * (n - len(cb))
    res = pauli_mul(PauliString(ca), PauliString(cb))
    codes, phase = res.string.codes, res.phase
    dense_a = SIGMA[ca[0]]
    dense_b = SIGMA[cb[0]]
    for a, b in zip(ca[1:], cb[1:]):
        dense_a = np.kron(dense_a, SIGMA[a])
        dense_b = np.kron(dense_b, SIGMA[b])
    dense_p = SIGMA[codes[0]]
    for c in codes[1:]:
        dense_p = np.kron(dense_p, SIGMA[int(c)])
    assert np.allclose(dense_a @ dense_b, (1j ** int(phase)) * dense_p,
                       atol=1e-13)


@pytest.mark.parametrize("word,angle", [
    ((Z,), 0.37), ((X,), -1.2), ((Z, Z), 0.8), ((X, X), 2.4), ((Y,), np.pi / 2),
])
def test_gate_superoperator_matches_dense(word, angle):
    g = GateSpec(word, angle)
    closed = gate_superoperator(g).matrix
    dense = superoperator_from_unitary(g.unitary()).matrix
    assert np.abs(closed - dense).max() < 1e-13


def test_gate_inverse_unitary():
    g = GateSpec((Z, Z), 0.61)
    u = g.unitary()
    ui = g.inverse().unitary()
    assert np.allclose(u @ ui, np.eye(4), atol=1e-14)


@pytest.mark.parametrize("word,angle", [((Z,), 0.3), ((Z, Z), 1.1)])
def test_superoperator_orthogonal(word, angle):
    m = gate_superoperator(GateSpec(word, angle)).matrix
    assert np.abs(m @ m.T - np.eye(m.shape[0])).max() < 1e-12
