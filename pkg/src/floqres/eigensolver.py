"""Spectra of truncated propagators: dense and matrix-free paths."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .propagator import DENSE_CAP, TruncatedPropagator

ARNOLDI_SEED = 7
MAX_RESTARTS = 300
GAP_RESOLUTION = 1e-13


@dataclass
class SpectralResult:
    """Eigenvalues sorted by descending modulus, with solver metadata."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = None      # columns, for the leading pairs
    residuals: np.ndarray = None
    iterations: int = 0
    tol: float = 0.0
    notes: list = field(default_factory=list)

    @property
    def leading(self):
        return self.eigenvalues[0]

    @property
    def gap(self):
        return 1.0 - abs(self.eigenvalues[0])

    def to_json(self):
        return {
            "eigenvalues": [[float(z.real), float(z.imag)]
                            for z in self.eigenvalues],
            "residuals": None if self.residuals is None
            else [float(x) for x in self.residuals],
            "iterations": int(self.iterations),
            "tol": float(self.tol),
            "gap": float(self.gap),
            "notes": list(self.notes),
        }


def _sorted_desc(vals, vecs=None):
    order = np.argsort(-np.abs(vals), kind="stable")
    if vecs is None:
        return vals[order], None
    return vals[order], vecs[:, order]


def full_spectrum(matrix, want_vectors=False) -> SpectralResult:
    """All eigenvalues of a dense propagator (nonsymmetric QR)."""
    matrix = np.asarray(matrix)
    n = matrix.shape[0]
    if matrix.shape != (n, n):
        raise ValueError("matrix not square")
    if n > DENSE_CAP:
        raise ValueError(f"N={n} above dense cap {DENSE_CAP}")
    if want_vectors:
        vals, vecs = sla.eig(matrix)
    else:
        vals, vecs = sla.eig(matrix, right=False), None
    vals = np.asarray(vals, dtype=complex)
    vals, vecs = _sorted_desc(vals, vecs)
    res = SpectralResult(vals, vecs)
    if want_vectors:
        rs = np.linalg.norm(matrix @ vecs - vecs * vals, axis=0)
        res.residuals = rs / np.maximum(np.linalg.norm(vecs, axis=0), 1e-300)
    return res


def _trivial_prepass(op, n, tol, dtype):
    """One application on a fixed vector; if it is a fixed point (e.g. the
    tau=0 identity), skip Arnoldi entirely."""
    rng = np.random.default_rng(ARNOLDI_SEED)
    v = rng.standard_normal(n)
    if np.issubdtype(dtype, np.complexfloating):
        v = v + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    w = op.matvec(v)
    lam = np.vdot(v, w)
    resid = np.linalg.norm(w - lam * v)
    if resid <= tol:
        return lam, v
    return None


def leading_eigs(prop, nev=2, tol=1e-10, ncv=None, widen_for_dtc=True,
                 maxiter=None, power=1, v0=None) -> SpectralResult:
    """Largest-modulus eigenpairs of M(k), matrix-free (restarted Arnoldi).

    ``prop`` is a TruncatedPropagator or any scipy LinearOperator.  The
    request is widened to nev >= 4 by default so +1/-1 clusters at DTC
    points cannot masquerade as a single leading eigenvalue.

    ``power`` > 1 runs Arnoldi on M^power instead of M.  At small tau the
    moduli cluster exponentially close to 1 and plain Arnoldi needs
    O(1/log|lambda_1/lambda_2|) applications spread over many restarts;
    powering multiplies the log-modulus separations by ``power`` so each
    stored Krylov vector is worth ``power`` steps and restarts stop
    thrashing.  Eigenvalues of M itself are recovered from the converged
    vectors by Rayleigh quotient, and residuals are always checked against
    the original M.
    """
    if tol < 1e-13:
        raise ValueError("tolerance below double-precision floor")
    op = prop.as_linear_operator() if isinstance(prop, TruncatedPropagator) \
        else spla.aslinearoperator(prop)
    n = op.shape[0]
    if widen_for_dtc:
        nev_eff = max(nev, 4)
    else:
        nev_eff = nev
    nev_eff = min(nev_eff, n - 2) if n > 4 else min(nev, n - 2)
    notes = []
    hit = _trivial_prepass(op, n, tol, op.dtype)
    if hit is not None:
        lam, v = hit
        notes.append("trivial fixed point detected in prepass")
        vals = np.array([complex(lam)])
        res = SpectralResult(vals, v[:, None], np.array([0.0]), 1, tol, notes)
        return res
    if nev_eff < 1:
        # basis too small for ARPACK; fall back to dense
        dense = np.column_stack([op.matvec(e) for e in np.eye(n)])
        return full_spectrum(dense, want_vectors=True)
    # narrow subspaces (ncv ~ 40) can converge onto interior members of the
    # near-degenerate cluster at |lambda| ~ 1 with tiny residuals while
    # missing the true leading eigenvalue; 80 is safe in all checks so far.
    ncv = ncv or max(80, 6 * nev_eff)
    ncv = min(ncv, n)
    power = int(power)
    if power < 1:
        raise ValueError("power must be >= 1")
    if power > 1:
        def _powered(v):
            for _ in range(power):
                v = op.matvec(v)
            return v
        op_eigs = spla.LinearOperator(op.shape, matvec=_powered,
                                      dtype=complex)
        notes.append(f"Arnoldi on M^{power}; eigenvalues recovered by "
                     "Rayleigh quotient")
    else:
        op_eigs = op
    if v0 is None:
        rng = np.random.default_rng(ARNOLDI_SEED)
        v0 = rng.standard_normal(n)
    else:
        v0 = np.asarray(v0)
        if v0.shape != (n,):
            raise ValueError("v0 dimension mismatch")
        if not np.issubdtype(op.dtype, np.complexfloating):
            v0 = np.ascontiguousarray(v0.real)
        notes.append("warm-started from supplied v0")
    # ARPACK's nonsymmetric driver can break down on tightly clustered
    # spectra when the subspace is too small, returning "converged" pairs
    # with O(1) residuals.  Verify residuals and escalate ncv if needed.
    resid_cap = max(1e-6, 100 * tol)
    while True:
        maxit = maxiter or MAX_RESTARTS * ncv
        try:
            vals, vecs = spla.eigs(op_eigs, k=nev_eff, which="LM", tol=tol,
                                   ncv=ncv, v0=v0, maxiter=maxit)
            partial = None
        except spla.ArpackNoConvergence as exc:
            vals, vecs = exc.eigenvalues, exc.eigenvectors
            if len(vals) == 0:
                raise
            partial = f"partial convergence: {len(vals)} of {nev_eff} pairs"
        vals = np.asarray(vals, dtype=complex)
        vals, vecs = _sorted_desc(vals, vecs)
        resid = np.empty(len(vals))
        for i in range(len(vals)):
            v = vecs[:, i]
            w = op.matvec(v)
            if power > 1:
                vals[i] = np.vdot(v, w) / np.vdot(v, v)
            resid[i] = np.linalg.norm(w - vals[i] * v) / np.linalg.norm(v)
        if power > 1:
            vals, vecs = _sorted_desc(vals, vecs)
        if resid.max() <= resid_cap or ncv >= n:
            if partial:
                notes.append(partial)
            break
        ncv = min(2 * ncv, n)
        notes.append(f"residual check failed; retrying with ncv={ncv}")
    if np.abs(vals[0]) > 1.0 + 1e-10:
        notes.append(f"|lambda_1| = {abs(vals[0]):.3e} exceeds 1; "
                     "truncation too small at this point")
    if len(vals) > 1 and abs(abs(vals[0]) - abs(vals[1])) < 10 * tol:
        notes.append("leading modulus nearly degenerate")
    res = SpectralResult(vals, vecs, resid, 0, tol, notes)
    if res.gap < GAP_RESOLUTION and res.gap > 0:
        notes.append("gap below double-precision resolution")
    return res


def leading_eigvec_overlap(result: SpectralResult, a_vec) -> float:
    """|<v1|A>|^2 / (<v1|v1><A|A>) -- does A live along the resonance?"""
    if result.eigenvectors is None:
        raise ValueError("no eigenvector stored in result")
    v = result.eigenvectors[:, 0]
    a = np.asarray(a_vec)
    if a.shape != v.shape:
        raise ValueError("dimension mismatch")
    num = abs(np.vdot(v, a)) ** 2
    den = np.vdot(v, v).real * np.vdot(a, a).real
    return float(num / den)
