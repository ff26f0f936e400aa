"""From spectra to physics: prethermalization times, Arrhenius/power-law
fits of the gap, diffusion constants from the k-dependence, and the
finite-size Heisenberg-time diagnostic."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import build_basis_1d
from .eigensolver import leading_eigs
from .models import ModelSpec
from .propagator import TruncatedPropagator

K0_WINDOW_FACTOR = 3.0   # fit-window lower edge = factor * sqrt(gap(0))
TDL_RATIO = 100.0
FINITE_SIZE_RATIO = 1.0


@dataclass
class GapScan:
    """Leading eigenvalue along a parameter grid (tau or k)."""

    parameter: str                 # "tau" or "k"
    values: np.ndarray
    lambda1: np.ndarray            # complex leading eigenvalues
    r: int
    model: dict = field(default_factory=dict)

    @property
    def gaps(self):
        return 1.0 - np.abs(self.lambda1)

    @property
    def times(self):
        return 1.0 / self.gaps

    def rows(self):
        for x, lam in zip(self.values, self.lambda1):
            g = 1.0 - abs(lam)
            yield (float(x), float(lam.real), float(lam.imag), float(g),
                   float(1.0 / g) if g > 0 else float("inf"))


@dataclass
class DiffusionFit:
    D_step: float                  # gap curvature per Floquet step
    D_physical: float              # per physical time, D_step / tau
    k_window: tuple
    r_squared: float
    k0: float                      # hydrodynamic onset estimate
    mode: str = "fit"


def prethermalization_time(gap: float) -> float:
    """T = 1/Delta, in Floquet steps."""
    if gap <= 0:
        raise ValueError("no decay resolved (gap <= 0)")
    return 1.0 / gap


def heisenberg_check(T: float, L: int, tdl_ratio=TDL_RATIO,
                     fs_ratio=FINITE_SIZE_RATIO):
    """Is T = 1/Delta physical at system size L, or cut off by t_H ~ 2^L?"""
    if T <= 0 or L <= 0:
        raise ValueError("T and L must be positive")
    t_h = 2.0 ** L
    ratio = t_h / T
    if ratio >= tdl_ratio:
        verdict = "TDL-valid"
    elif ratio <= fs_ratio:
        verdict = "finite-size-dominated"
    else:
        verdict = "marginal"
    return {"t_heisenberg": t_h, "ratio": ratio, "verdict": verdict}


def _linear_fit(x, y):
    (slope, intercept), res, *_ = np.polyfit(x, y, 1, full=True)
    ss_tot = np.sum((y - np.mean(y)) ** 2)
    r2 = 1.0 - (res[0] / ss_tot if len(res) and ss_tot > 0 else 0.0)
    return slope, intercept, r2


def fit_arrhenius(scan: GapScan):
    """ln T vs 1/tau: T ~ exp(a/tau) gives slope a."""
    T = scan.times
    good = np.isfinite(T) & (T > 0)
    if good.sum() < 4:
        raise ValueError("need at least 4 resolvable points")
    if T[good].max() / T[good].min() < 1e2:
        raise ValueError("T spans < 2 decades; Arrhenius fit unreliable")
    x = 1.0 / scan.values[good]
    slope, intercept, r2 = _linear_fit(x, np.log(T[good]))
    return {"a": float(slope), "ln_prefactor": float(intercept),
            "r_squared": float(r2),
            "fit_range": (float(scan.values[good].min()),
                          float(scan.values[good].max()))}


def fit_power_law(x, T):
    """log T vs log x: T ~ x^(-p) gives exponent p (x = |pi - tau| etc.)."""
    x, T = np.asarray(x, float), np.asarray(T, float)
    good = np.isfinite(T) & (T > 0) & (x > 0)
    slope, intercept, r2 = _linear_fit(np.log(x[good]), np.log(T[good]))
    return {"exponent": float(-slope), "ln_prefactor": float(intercept),
            "r_squared": float(r2)}


def tau_scan(spec: ModelSpec, taus, r, k=0.0, tol=1e-10, nev=2,
             mode="in_situ", progress=None) -> GapScan:
    basis = build_basis_1d(r) if spec.dim == 1 else None
    if basis is None:
        raise ValueError("tau_scan is 1D-only")
    lams = []
    for tau in taus:
        s = ModelSpec(spec.model, spec.J, spec.hx, spec.hz, spec.Jx,
                      float(tau))
        prop = TruncatedPropagator(s, basis, k, mode=mode)
        res = leading_eigs(prop, nev=nev, tol=tol)
        lams.append(res.leading)
        if progress:
            progress(tau, res)
    return GapScan("tau", np.asarray(taus, float), np.array(lams), r,
                   spec.to_json())


def k_scan(spec: ModelSpec, ks, r, tol=1e-10, nev=2, mode="in_situ",
           progress=None) -> GapScan:
    basis = build_basis_1d(r)
    lams = []
    for k in ks:
        prop = TruncatedPropagator(spec, basis, float(k), mode=mode)
        res = leading_eigs(prop, nev=nev, tol=tol)
        lams.append(res.leading)
        if progress:
            progress(k, res)
    return GapScan("k", np.asarray(ks, float), np.array(lams), r,
                   spec.to_json())


def diffusion_point(spec: ModelSpec, k, r, tol=1e-10, mode="in_situ",
                    power=1, v0=None):
    """D = (1 - |lambda_1(k)|) / (k^2 tau) at a single small k.

    At small tau pass power > 1 (and optionally a warm-start v0): the
    moduli cluster near 1 and plain Arnoldi resolves the wrong branch.
    """
    basis = build_basis_1d(r)
    res = leading_eigs(TruncatedPropagator(spec, basis, k, mode=mode),
                       tol=tol, power=power, v0=v0,
                       nev=1 if power > 1 else 2,
                       widen_for_dtc=power == 1)
    lam = res.leading
    if abs(lam.imag) / max(abs(lam), 1e-300) > 1e-6:
        import warnings
        warnings.warn("leading resonance has a significant imaginary part")
    D_step = (1.0 - abs(lam)) / k ** 2
    return DiffusionFit(float(D_step), float(D_step / spec.tau),
                        (k, k), float("nan"), float("nan"), mode="point")


def diffusion_fit(scan: GapScan, tau, k_hi=None,
                  window_factor=K0_WINDOW_FACTOR) -> DiffusionFit:
    """Quadratic fit of Delta(k) - Delta(0) above the hydrodynamic onset.

    The scan must include k=0 (or the smallest k is used as the Delta(0)
    reference).  Window: [window_factor * sqrt(Delta(0)), k_hi].
    """
    ks, gaps = scan.values, scan.gaps
    order = np.argsort(ks)
    ks, gaps = ks[order], gaps[order]
    gap0 = gaps[0] if ks[0] == 0.0 else 0.0
    k0 = window_factor * np.sqrt(max(gap0, 0.0))
    k_hi = k_hi if k_hi is not None else ks.max()
    sel = (ks >= k0) & (ks <= k_hi) & (ks > 0)
    if sel.sum() < 3:
        raise ValueError("hydrodynamic window not reached by the k grid")
    x = ks[sel] ** 2
    y = gaps[sel] - gap0
    slope, intercept, r2 = _linear_fit(x, y)
    return DiffusionFit(float(slope), float(slope / tau),
                        (float(k0), float(k_hi)), float(r2), float(k0))


def diffusion_estimate(spec: ModelSpec, r, k_grid=None, k_point=0.02,
                       mode_sel="point", tol=1e-10, prop_mode="in_situ"):
    """Single-k estimate or windowed quadratic fit of the gap curvature."""
    if mode_sel == "point":
        return diffusion_point(spec, k_point, r, tol=tol, mode=prop_mode)
    if k_grid is None:
        raise ValueError("fit mode needs a k grid")
    scan = k_scan(spec, k_grid, r, tol=tol, mode=prop_mode)
    return diffusion_fit(scan, spec.tau)
