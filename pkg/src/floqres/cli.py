"""Command-line front door.

Subcommands: basis, gap, spectrum, tauscan, kscan, diffusion, correlate,
dtc, bch, check.  Every run writes CSV/JSON artifacts plus a manifest.json
(echoing parameters, seeds, wall time, and the artifact list) into --out;
the manifest is written even when a run fails.  Exit codes: 0 success,
2 validation error, 3 numerical non-convergence / failed check.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from . import analysis, bch, correlators
from .basis import build_basis_1d, build_basis_2d
from .eigensolver import full_spectrum, leading_eigs
from .models import Chain, ModelSpec, Torus
from .propagator import TruncatedPropagator

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

MODEL_NAMES = {
    "kicked-ising": "kicked_ising_1d",
    "kicked-xx": "kicked_xx_1d",
    "kicked-ising-2d": "kicked_ising_2d",
}


class ValidationError(Exception):
    pass


class NumericalError(Exception):
    pass


def _model_args(p, require_tau=True):
    p.add_argument("--model", default="kicked-ising", choices=sorted(MODEL_NAMES))
    p.add_argument("--J", type=float, default=0.5)
    p.add_argument("--hx", type=float, default=1.0)
    p.add_argument("--hz", type=float, default=1.0)
    p.add_argument("--Jx", type=float, default=0.0)
    p.add_argument("--tau", type=float, required=require_tau)


def _common_args(p):
    p.add_argument("--out", default=os.environ.get("FLOQRES_OUT", "."),
                   help="output directory (env FLOQRES_OUT)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--tol", type=float, default=1e-10)


def _spec(args) -> ModelSpec:
    return ModelSpec(model=MODEL_NAMES[args.model], J=args.J, hx=args.hx,
                     hz=args.hz, Jx=args.Jx, tau=args.tau)


def _basis_for(args):
    if args.model == "kicked-ising-2d":
        if args.rows is None or args.cols is None:
            raise ValidationError("2D model needs --rows and --cols")
        return build_basis_2d(args.rows, args.cols)
    if args.r is None:
        raise ValidationError("1D models need --r")
    return build_basis_1d(args.r)


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise ValidationError(f"bad numeric list {text!r}: {e}")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(x) if isinstance(x, float) else x for x in row])


def _write_json(path, payload):
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, default=str)
        f.write("\n")


def _check_converged(result):
    if result.residuals is not None and np.any(result.residuals > 1e3 * result.tol):
        raise NumericalError(
            f"eigensolver residuals {result.residuals} above tolerance")


# ---------------------------------------------------------------------------
# subcommands: each returns (summary dict, artifact paths)

def cmd_basis(args, out):
    if args.dim == 2:
        b = build_basis_2d(args.rows, args.cols)
    else:
        b = build_basis_1d(args.r)
    ncls = len(b.classes) if b.classes is not None else 1
    print(f"N={b.size}, classes={ncls}")
    path = os.path.join(out, "basis.json")
    _write_json(path, {"dim": args.dim, "size": b.size, "classes": ncls,
                       "shape": list(b.shape)})
    return {"size": b.size, "classes": ncls}, [path]


def cmd_gap(args, out):
    spec = _spec(args)
    prop = TruncatedPropagator(spec, _basis_for(args), args.k, mode=args.mode)
    res = leading_eigs(prop, nev=args.nev, tol=args.tol, power=args.power)
    _check_converged(res)
    lam = res.leading
    gap = res.gap
    payload = {
        "model": spec.to_json(), "r": args.r, "k": args.k,
        "lambda1": {"re": lam.real, "im": lam.imag},
        "gap": gap, "T": analysis.prethermalization_time(gap),
        "eigenvalues": [{"re": v.real, "im": v.imag} for v in res.eigenvalues],
        "iterations": res.iterations, "notes": res.notes,
    }
    path = os.path.join(out, "gap.json")
    _write_json(path, payload)
    print(f"gap={gap:.6e} T={payload['T']:.6e} lambda1={lam:.12g}")
    return payload, [path]


def cmd_spectrum(args, out):
    spec = _spec(args)
    prop = TruncatedPropagator(spec, _basis_for(args), args.k, mode=args.mode)
    mat = prop.build_dense()
    res = full_spectrum(mat)
    path = os.path.join(out, "spectrum.csv")
    _write_csv(path, ["index", "re_lambda", "im_lambda", "abs_lambda"],
               [(i, v.real, v.imag, abs(v)) for i, v in enumerate(res.eigenvalues)])
    summary = {"n": len(res.eigenvalues),
               "lambda1": {"re": res.leading.real, "im": res.leading.imag},
               "gap": res.gap}
    _write_json(os.path.join(out, "spectrum.json"), summary)
    print(f"n={summary['n']} gap={res.gap:.6e}")
    return summary, [path, os.path.join(out, "spectrum.json")]


def cmd_tauscan(args, out):
    spec = _spec(args)
    taus = _floats(args.taus)
    scan = analysis.tau_scan(spec, taus, args.r, k=args.k, tol=args.tol,
                             mode=args.mode)
    path = os.path.join(out, "tauscan.csv")
    _write_csv(path, ["tau", "re_lambda1", "im_lambda1", "gap", "T"],
               scan.rows())
    summary = {"taus": taus, "gaps": list(scan.gaps)}
    if args.fit == "arrhenius":
        summary["fit"] = analysis.fit_arrhenius(scan)
    elif args.fit == "powerlaw":
        x = np.abs(np.pi - np.asarray(taus))
        summary["fit"] = analysis.fit_power_law(x, scan.times)
    _write_json(os.path.join(out, "tauscan.json"), summary)
    if "fit" in summary:
        print(f"fit: {summary['fit']}")
    return summary, [path, os.path.join(out, "tauscan.json")]


def cmd_kscan(args, out):
    spec = _spec(args)
    ks = _floats(args.ks)
    scan = analysis.k_scan(spec, ks, args.r, tol=args.tol, mode=args.mode)
    path = os.path.join(out, "kscan.csv")
    _write_csv(path, ["k", "re_lambda1", "im_lambda1", "gap", "T"], scan.rows())
    summary = {"ks": ks, "gaps": list(scan.gaps)}
    _write_json(os.path.join(out, "kscan.json"), summary)
    return summary, [path, os.path.join(out, "kscan.json")]


def cmd_diffusion(args, out):
    spec = _spec(args)
    if args.ks:
        fit = analysis.diffusion_estimate(spec, args.r, k_grid=_floats(args.ks),
                                          tol=args.tol, mode=args.mode)
    else:
        fit = analysis.diffusion_point(spec, args.k, args.r, tol=args.tol,
                                       mode=args.mode)
    payload = {"model": spec.to_json(), "r": args.r, "D_step": fit.D_step,
               "D_physical": fit.D_physical, "mode": fit.mode,
               "k_window": list(fit.k_window) if fit.k_window else None,
               "r_squared": fit.r_squared}
    path = os.path.join(out, "diffusion.json")
    _write_json(path, payload)
    print(f"D={fit.D_physical:.6f} (physical), mode={fit.mode}")
    return payload, [path]


def cmd_correlate(args, out):
    spec = _spec(args)
    if spec.dim != 1:
        raise ValidationError("correlate supports 1D models")
    obs = correlators.observable_catalog(spec, args.observable)
    staggered = args.observable == "S"
    run = correlators.autocorrelation(spec, obs, args.L, args.tmax,
                                      seed=args.seed, staggered=staggered)
    path = os.path.join(out, "correlate.csv")
    _write_csv(path, ["t", "C", "C_err"],
               [r for r in run.rows() if not np.isnan(r[1])])
    summary = {"observable": args.observable, "L": args.L, "seed": args.seed,
               "imag_max": run.imag_max, "error_scale": run.error_scale}
    if args.observable == "J_E" and args.green_kubo:
        gk = correlators.green_kubo(spec, args.L, args.tmax, seed=args.seed)
        gk_path = os.path.join(out, "green_kubo.csv")
        _write_csv(gk_path, ["t_phys", "D_running"],
                   [(t * spec.tau, d) for t, d in enumerate(gk.running)])
        summary["green_kubo"] = {"chi": gk.chi, "t_valid": gk.t_valid,
                                 "d_bound": gk.d_bound}
        _write_json(os.path.join(out, "correlate.json"), summary)
        return summary, [path, gk_path, os.path.join(out, "correlate.json")]
    _write_json(os.path.join(out, "correlate.json"), summary)
    return summary, [path, os.path.join(out, "correlate.json")]


def cmd_dtc(args, out):
    spec = _spec(args)
    z = correlators.magnetization_trajectory(spec, args.L, args.tmax)
    path = os.path.join(out, "dtc.csv")
    _write_csv(path, ["t", "z", "parity"],
               [(t, float(v), "even" if t % 2 == 0 else "odd")
                for t, v in enumerate(z)])
    even, odd = z[0::2], z[1::2]
    summary = {"L": args.L, "tau": args.tau,
               "mean_even": float(np.mean(even)), "mean_odd": float(np.mean(odd))}
    _write_json(os.path.join(out, "dtc.json"), summary)
    print(f"mean z even={summary['mean_even']:+.4f} odd={summary['mean_odd']:+.4f}")
    return summary, [path, os.path.join(out, "dtc.json")]


def cmd_bch(args, out):
    spec = _spec(args)
    if args.transversal:
        a, b = bch.transversal_ising_generators()
    else:
        a, b = bch.generators(spec)
    series = bch.bch_orders(a, b, args.orders)
    path = os.path.join(out, "bch_norms.csv")
    _write_csv(path, ["m", "norm", "terms"],
               [(m, n, series.orders[m].nterms())
                for m, n in enumerate(series.order_norms())])
    summary = {"orders": args.orders,
               "herm_defects": [str(d) for d in series.herm_defects()]}
    if not args.transversal and spec.model == "kicked_ising_1d":
        from fractions import Fraction

        from .pauli import Z as ZC
        tau_order = min(args.tau_order, 2 * args.orders)
        zop = bch.TranslationInvariantOperator({(ZC,): Fraction(1)})
        summary["plateau_H0"] = [str(c) for c in
                                 bch.plateau_amplitude(a + b, series, tau_order)]
        summary["plateau_Z"] = [str(c) for c in
                                bch.plateau_amplitude(zop, series, tau_order)]
    _write_json(os.path.join(out, "bch.json"), summary)
    print("per-order norms:", [round(n, 6) for n in series.order_norms()])
    return summary, [path, os.path.join(out, "bch.json")]


def cmd_check(args, out):
    """Analytic special-point suite: tau=0 identity, tau=pi eigenvalue
    counts, 2D tau=pi/4 nilpotency."""
    from .basis import build_basis_1d as b1d
    results = []

    def record(name, ok, detail=""):
        results.append({"name": name, "ok": bool(ok), "detail": detail})
        print(f"[{'PASS' if ok else 'FAIL'}] {name} {detail}")

    basis3 = b1d(3)
    for model in ("kicked_ising_1d", "kicked_xx_1d"):
        spec = ModelSpec(model=model, tau=0.0)
        m = TruncatedPropagator(spec, basis3, 0.3).build_dense()
        err = np.abs(m - np.eye(basis3.size)).max()
        record(f"tau=0 identity ({model})", err < 1e-12, f"max|M-1|={err:.2e}")
    spec2 = ModelSpec(model="kicked_ising_2d", tau=0.0)
    b22 = build_basis_2d(2, 2)
    m = TruncatedPropagator(spec2, b22, 0.0).build_dense()
    err = np.abs(m - np.eye(b22.size)).max()
    record("tau=0 identity (2D 2x2)", err < 1e-12, f"max|M-1|={err:.2e}")

    spec_pi = ModelSpec(model="kicked_ising_1d", tau=np.pi)
    vals = full_spectrum(TruncatedPropagator(spec_pi, basis3, 0.0).build_dense()).eigenvalues
    plus = int(np.sum(np.abs(vals - 1) < 1e-8))
    minus = int(np.sum(np.abs(vals + 1) < 1e-8))
    record("tau=pi counts r=3", plus == 10 and minus == 10,
           f"+1:{plus} -1:{minus} (want 10/10)")

    spec_q = ModelSpec(model="kicked_ising_2d", tau=np.pi / 4)
    vals = full_spectrum(TruncatedPropagator(spec_q, b22, 0.0).build_dense()).eigenvalues
    mx = np.abs(vals).max()
    record("2D tau=pi/4 nilpotent", mx < 1e-8, f"max|lambda|={mx:.2e}")

    path = os.path.join(out, "check.json")
    _write_json(path, {"checks": results})
    if not all(r["ok"] for r in results):
        raise NumericalError("analytic checks failed")
    return {"checks": results}, [path]


# ---------------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(
        prog="floqres",
        description="Truncated operator propagators of kicked quantum circuits")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("basis", help="operator basis sizes / classes")
    p.add_argument("--dim", type=int, default=1, choices=(1, 2))
    p.add_argument("--r", type=int)
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    _common_args(p)

    for name, helptext in (
            ("gap", "leading eigenvalue and prethermalization gap"),
            ("spectrum", "dense spectrum of the truncated propagator")):
        p = sub.add_parser(name, help=helptext)
        _model_args(p)
        p.add_argument("--r", type=int)
        p.add_argument("--rows", type=int)
        p.add_argument("--cols", type=int)
        p.add_argument("--k", type=float, default=0.0)
        p.add_argument("--mode", default="in_situ", choices=("in_situ", "padded"))
        p.add_argument("--nev", type=int, default=2)
        p.add_argument("--power", type=int, default=1,
                       help="run Arnoldi on M^power (clustered small-tau "
                            "spectra); eigenvalues are recovered for M")
        _common_args(p)

    p = sub.add_parser("tauscan", help="gap vs tau (Arrhenius / power-law fits)")
    _model_args(p, require_tau=False)
    p.add_argument("--taus", required=True, help="comma-separated list")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=float, default=0.0)
    p.add_argument("--mode", default="in_situ", choices=("in_situ", "padded"))
    p.add_argument("--fit", choices=("arrhenius", "powerlaw"))
    _common_args(p)

    p = sub.add_parser("kscan", help="gap vs quasimomentum")
    _model_args(p)
    p.add_argument("--ks", required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--mode", default="in_situ", choices=("in_situ", "padded"))
    _common_args(p)

    p = sub.add_parser("diffusion", help="diffusion constant from the gap")
    _model_args(p)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=float, default=0.02)
    p.add_argument("--ks", help="k grid for a quadratic fit instead of one point")
    p.add_argument("--mode", default="in_situ", choices=("in_situ", "padded"))
    _common_args(p)

    p = sub.add_parser("correlate", help="exact finite-size autocorrelations")
    _model_args(p)
    p.add_argument("--observable", default="Z", choices=("Z", "H0", "S", "J_E"))
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--tmax", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--green-kubo", action="store_true")
    _common_args(p)

    p = sub.add_parser("dtc", help="product-state magnetization trajectory")
    _model_args(p)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--tmax", type=int, required=True)
    _common_args(p)

    p = sub.add_parser("bch", help="BCH orders, norms, plateau polynomials")
    _model_args(p, require_tau=False)
    p.add_argument("--orders", type=int, default=6)
    p.add_argument("--tau-order", type=int, default=4)
    p.add_argument("--transversal", action="store_true",
                   help="integrable transversal-Ising generators (tau=pi)")
    _common_args(p)

    p = sub.add_parser("check", help="analytic special-point suite")
    _common_args(p)
    return ap


COMMANDS = {
    "basis": cmd_basis, "gap": cmd_gap, "spectrum": cmd_spectrum,
    "tauscan": cmd_tauscan, "kscan": cmd_kscan, "diffusion": cmd_diffusion,
    "correlate": cmd_correlate, "dtc": cmd_dtc, "bch": cmd_bch,
    "check": cmd_check,
}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_VALIDATION if e.code not in (0, None) else 0
    out = os.path.abspath(getattr(args, "out", "."))
    os.makedirs(out, exist_ok=True)
    if getattr(args, "tau", None) is None and hasattr(args, "tau"):
        args.tau = 1.0
    manifest = {
        "subcommand": args.cmd,
        "parameters": {k: v for k, v in vars(args).items() if k != "cmd"},
        "seeds": {"arnoldi": 7, "correlator": getattr(args, "seed", None)},
        "spec_version": "0.1.0",
        "artifacts": [],
    }
    t0 = time.time()
    status = EXIT_OK
    try:
        if getattr(args, "threads", 1):
            try:
                from threadpoolctl import threadpool_limits
                threadpool_limits(limits=args.threads)
            except ImportError:
                pass
        summary, artifacts = COMMANDS[args.cmd](args, out)
        manifest["summary"] = summary
        manifest["artifacts"] = [os.path.basename(a) for a in artifacts]
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        manifest["error"] = {"type": "validation", "message": str(e)}
        status = EXIT_VALIDATION
    except NumericalError as e:
        print(f"error: {e}", file=sys.stderr)
        manifest["error"] = {"type": "numerical", "message": str(e)}
        status = EXIT_NUMERICAL
    except (ValueError, MemoryError) as e:
        print(f"error: {e}", file=sys.stderr)
        manifest["error"] = {"type": "validation", "message": str(e)}
        status = EXIT_VALIDATION
    except Exception as e:   # manifest still gets written with the error record
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        manifest["error"] = {"type": "internal", "message": str(e)}
        status = EXIT_NUMERICAL
    manifest["wall_time_s"] = time.time() - t0
    _write_json(os.path.join(out, "manifest.json"), manifest)
    return status


if __name__ == "__main__":
    sys.exit(main())
