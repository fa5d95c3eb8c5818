"""Command-line interface.

Subcommands: simulate, scan, stability, hopf, coexist, floquet, spectrum,
fluct.  Numeric JSON output is full precision; CSV trajectories carry 17
significant digits.  Worker count honors SPINCOMB_WORKERS.
"""

import argparse
import json
import sys

import numpy as np

from .params import ModelParams, random_state, tss_state
from .dynamics import integrate, IntegrateOptions
from .fixedpoints import tss, ntss
from .stability import classify_fixed_point, delta_minus
from .normalform import (hopf_a1, classify_hopf, delta_a1_zero,
                         coexistence_left_boundary, CoexistOptions)
from .cycles import find_limit_cycle, floquet_multipliers, CycleOptions
from .spectra import power_spectrum, extract_comb
from .fluctuations import fluctuation_coefficients
from .phasescan import scan, GridSpec, ScanOptions


def _params(args):
    return ModelParams.two_ensemble(args.delta, args.w)


def _emit(obj):
    json.dump(obj, sys.stdout)
    sys.stdout.write("\n")


def _initial(args, params):
    if args.ic:
        y = np.array([float(v) for v in args.ic.split(",")])
        if y.shape[0] != 3 * params.n_ensembles:
            raise SystemExit(f"--ic needs {3 * params.n_ensembles} components")
        return y
    return random_state(params.n_ensembles, np.random.default_rng(args.seed))


def cmd_simulate(args):
    params = _params(args)
    traj = integrate(_initial(args, params), params, args.t_end,
                     IntegrateOptions(rtol=args.rtol, atol=args.atol,
                                      dt_sample=args.dt))
    if args.out:
        traj.to_csv(args.out)
    else:
        traj.to_csv(sys.stdout)
    return 0


def cmd_scan(args):
    grid = GridSpec(dmin=args.dmin, dmax=args.dmax, wmin=args.wmin,
                    wmax=args.wmax, nx=args.nx, ny=args.ny)
    opts = ScanOptions(seed=args.seed, quick=args.quick)
    scan(grid, opts, out=args.out, resume=args.resume, workers=args.workers)
    return 0


def cmd_stability(args):
    params = _params(args)
    if args.kind.upper() == "TSS":
        fp = tss(params)
    else:
        fp = ntss(params)
        if fp is None:
            _emit({"delta": args.delta, "W": args.w, "kind": "NTSS",
                   "exists": False})
            return 0
    rep = classify_fixed_point(fp, params)
    out = {"delta": args.delta, "W": args.w, "kind": fp.kind}
    out.update(rep.to_dict())
    _emit(out)
    return 0


def cmd_hopf(args):
    params = _params(args)
    data = hopf_a1(params, args.which)
    _emit({"delta": args.delta, "W": args.w, "which": data.which,
           "gamma": data.gamma, "omega": data.omega, "a1": data.a1,
           "type": classify_hopf(params, args.which)})
    return 0


def cmd_coexist(args):
    for W in args.w:
        opts = CoexistOptions(seed=args.seed, n_probes=args.probes,
                              workers=args.workers)
        res = coexistence_left_boundary(W, opts)
        _emit({"W": W, "delta_H": res.delta_H,
               "delta_a1_0": delta_a1_zero(W), "delta_End": res.delta_end})
    return 0


def cmd_floquet(args):
    params = _params(args)
    opts = CycleOptions(seed=args.seed, transient=args.transient)
    initial = np.array([0.3, -0.2, 0.6]) if args.reduced else None
    cyc = find_limit_cycle(params, initial, opts)
    if cyc is None:
        _emit({"delta": args.delta, "W": args.w, "periodic": False})
        return 1
    out = {"delta": args.delta, "W": args.w, "T": cyc.period,
           "z2_symmetric": bool(cyc.z2_symmetric), "omega_q": cyc.omega_q}
    if cyc.z2_symmetric:
        out["multipliers"] = list(floquet_multipliers(cyc, params, opts))
    if args.orbit_out:
        data = np.column_stack([cyc.t, cyc.y])
        np.savetxt(args.orbit_out, data, delimiter=",",
                   header="t,sxA,syA,szA,sxB,syB,szB", comments="",
                   fmt="%.17g")
    _emit(out)
    return 0


def cmd_spectrum(args):
    params = _params(args)
    y0 = _initial(args, params)
    from .dynamics import advance
    y = advance(y0, params, args.transient)
    traj = integrate(y, params, args.t_record,
                     IntegrateOptions(dt_sample=args.dt))
    spec = power_spectrum(traj, window=args.window)
    ladder = extract_comb(spec)
    if args.out_csv:
        np.savetxt(args.out_csv, np.column_stack([spec.f, spec.power]),
                   delimiter=",", header="f,power", comments="", fmt="%.17g")
    _emit({"delta": args.delta, "W": args.w, **ladder.to_dict()})
    return 0


def cmd_fluct(args):
    params = _params(args)
    if args.state:
        y = np.array([float(v) for v in args.state.split(",")])
    elif args.at == "ntss":
        fp = ntss(params)
        if fp is None:
            raise SystemExit("NTSS does not exist at these parameters")
        y = fp.state
    else:
        y = tss_state(params.n_ensembles)
    co = fluctuation_coefficients(y, params)
    _emit({"delta": args.delta, "W": args.w, "state": y.tolist(),
           **co.to_dict()})
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="spincomb",
                                 description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add_dw(p):
        p.add_argument("--delta", type=float, required=True)
        p.add_argument("--w", type=float, required=True)

    p = sub.add_parser("simulate", help="integrate and export a trajectory")
    add_dw(p)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--ic", help="comma-separated initial state")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dt", type=float, default=0.5)
    p.add_argument("--rtol", type=float, default=1e-9)
    p.add_argument("--atol", type=float, default=1e-11)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scan", help="classify attractors on a grid")
    p.add_argument("--dmin", type=float, default=0.0)
    p.add_argument("--dmax", type=float, default=2.0)
    p.add_argument("--wmin", type=float, default=0.0)
    p.add_argument("--wmax", type=float, default=2.0)
    p.add_argument("--nx", type=int, default=40)
    p.add_argument("--ny", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--resume", action="store_true")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--workers", type=int, default=0)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("stability", help="fixed-point stability report")
    add_dw(p)
    p.add_argument("--kind", default="NTSS", choices=["TSS", "NTSS", "tss", "ntss"])
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("hopf", help="normal-form coefficient at a bifurcation")
    add_dw(p)
    p.add_argument("--which", default="NTSS", choices=["TSS", "NTSS", "tss", "ntss"])
    p.set_defaults(func=cmd_hopf)

    p = sub.add_parser("coexist", help="coexistence boundary per pump value")
    p.add_argument("--w", type=float, nargs="+", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--probes", type=int, default=10)
    p.add_argument("--workers", type=int, default=0)
    p.set_defaults(func=cmd_coexist)

    p = sub.add_parser("floquet", help="limit cycle and its multipliers")
    add_dw(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--transient", type=float, default=5e3)
    p.add_argument("--reduced", action="store_true",
                   help="search the Z2 submanifold")
    p.add_argument("--orbit-out")
    p.set_defaults(func=cmd_floquet)

    p = sub.add_parser("spectrum", help="radiated power spectrum and comb")
    add_dw(p)
    p.add_argument("--ic")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--transient", type=float, default=2e4)
    p.add_argument("--t-record", type=float, default=16384.0)
    p.add_argument("--dt", type=float, default=0.25)
    p.add_argument("--window", default="hann", choices=["hann", "rectangular"])
    p.add_argument("--out-csv")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("fluct", help="fluctuation drift and diffusion")
    add_dw(p)
    p.add_argument("--state", help="comma-separated mean-field state")
    p.add_argument("--at", default="ntss", choices=["ntss", "tss"])
    p.set_defaults(func=cmd_fluct)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
