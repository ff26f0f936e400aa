import numpy as np
import pytest

from floqres.basis import build_basis_1d, embed_coefficients_1d
from floqres.eigensolver import (full_spectrum, leading_eigs,
                                 leading_eigvec_overlap)
from floqres.models import ModelSpec
from floqres.pauli import I, Z
from floqres.propagator import TruncatedPropagator, density_vector


@pytest.mark.parametrize("tau", [0.4, 0.9, 1.5, 2.8])
def test_arnoldi_matches_dense(tau):
    spec = ModelSpec(model="kicked_ising_1d", tau=tau)
    prop = TruncatedPropagator(spec, build_basis_1d(4), 0.0)
    dense = full_spectrum(prop.build_dense())
    arn = leading_eigs(prop, nev=5, tol=1e-12)
    nd = np.sort(np.abs(dense.eigenvalues))[::-1][:5]
    na = np.sort(np.abs(arn.eigenvalues))[::-1][:5]
    assert np.abs(nd - na).max() < 1e-9


def test_trivial_prepass_tau_zero():
    spec = ModelSpec(model="kicked_ising_1d", tau=0.0)
    prop = TruncatedPropagator(spec, build_basis_1d(4), 0.0)
    res = leading_eigs(prop, nev=2, tol=1e-10)
    assert abs(res.leading - 1.0) < 1e-12
    assert res.gap < 1e-12


def test_leading_modulus_bounded():
    for tau in (0.5, 1.2, 2.9):
        spec = ModelSpec(model="kicked_ising_1d", tau=tau)
        res = leading_eigs(TruncatedPropagator(spec, build_basis_1d(4), 0.0),
                           nev=2, tol=1e-10)
        assert abs(res.leading) <= 1 + 1e-10


def test_gap_reproducible_across_runs():
    spec = ModelSpec(model="kicked_ising_1d", tau=1.0)
    prop = TruncatedPropagator(spec, build_basis_1d(5), 0.0)
    g1 = leading_eigs(prop, nev=2, tol=1e-10).gap
    g2 = leading_eigs(prop, nev=2, tol=1e-10).gap
    assert g1 == g2


def test_result_json_roundtrip():
    spec = ModelSpec(model="kicked_ising_1d", tau=0.8)
    res = leading_eigs(TruncatedPropagator(spec, build_basis_1d(3), 0.0),
                       nev=2, tol=1e-10)
    payload = res.to_json()
    assert "eigenvalues" in payload and "gap" in payload


def test_overlap_with_observable():
    # as tau -> 0 the leading eigenvector is the conserved H0 density
    spec = ModelSpec(model="kicked_ising_1d", tau=0.05)
    basis = build_basis_1d(4)
    prop = TruncatedPropagator(spec, basis, 0.0)
    res = leading_eigs(prop, nev=2, tol=1e-12)
    from floqres.correlators import observable_catalog
    h0 = observable_catalog(spec, "H0")
    vec = np.zeros(basis.size)
    for coeff, codes in h0.terms:
        vec += coeff * density_vector(basis, codes)
    vec /= np.linalg.norm(vec)
    ov = leading_eigvec_overlap(res, vec)
    assert ov > 0.99


def test_power_transform_matches_dense():
    # clustered small-tau moduli: Arnoldi on M^power, Rayleigh recovery
    spec = ModelSpec(model="kicked_ising_1d", J=2.0, hx=0.7, hz=0.45225,
                     tau=0.05)
    prop = TruncatedPropagator(spec, build_basis_1d(4), 0.02)
    dense = full_spectrum(prop.build_dense())
    res = leading_eigs(prop, nev=1, tol=1e-9, ncv=30, power=16,
                       widen_for_dtc=False)
    assert abs(abs(res.leading) - abs(dense.leading)) < 1e-9
    assert res.residuals.max() < 1e-6


def test_warm_start_embedding():
    spec = ModelSpec(model="kicked_ising_1d", J=2.0, hx=0.7, hz=0.45225,
                     tau=0.05)
    p4 = TruncatedPropagator(spec, build_basis_1d(4), 0.02)
    r4 = leading_eigs(p4, nev=1, tol=1e-9, ncv=30, power=16,
                      widen_for_dtc=False)
    v0 = embed_coefficients_1d(r4.eigenvectors[:, 0], 4, 5)
    p5 = TruncatedPropagator(spec, build_basis_1d(5), 0.02)
    warm = leading_eigs(p5, nev=1, tol=1e-9, ncv=30, power=16,
                        widen_for_dtc=False, v0=v0)
    cold = leading_eigs(p5, nev=1, tol=1e-9, ncv=30, power=16,
                        widen_for_dtc=False)
    assert abs(abs(warm.leading) - abs(cold.leading)) < 1e-9
    assert any("warm-started" in n for n in warm.notes)


def test_embed_coefficients_roundtrip():
    rng = np.random.default_rng(3)
    v = rng.standard_normal(3 * 4 ** 2)
    out = embed_coefficients_1d(v, 3, 5)
    assert out.shape == (3 * 4 ** 4,)
    assert np.array_equal(out[np.arange(v.size) * 16], v)
    assert np.count_nonzero(out) == np.count_nonzero(v)
    with pytest.raises(ValueError):
        embed_coefficients_1d(v, 3, 2)
