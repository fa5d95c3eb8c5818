"""Attractor classification on the detuning-pump plane.

Each grid node gets a label: the two fixed-point phases come from the
analytic stability regions; time-dependent regimes are probed dynamically
from random initial conditions.  Near the lower stability boundary of the
synchronized state the probes also detect coexistence with time-dependent
attractors (the subcritical sliver).
"""

import json
import os
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from .params import ModelParams, random_state
from .stability import tss_stable, ntss_stable, delta_minus
from .normalform import ntss_distance
from .dynamics import advance
from .cycles import CycleOptions, find_limit_cycle, TransientNotSettled
from ._parallel import parallel_map, worker_count

SCHEMA = "spincomb.scan.v1"

LABELS = ("TSS", "NTSS", "Z2_LIMIT_CYCLE", "ASYM_LIMIT_CYCLE",
          "NONPERIODIC", "COEXIST_NTSS")


@dataclass(frozen=True)
class ScanOptions:
    n_probes: int = 5
    transient: float = 5e3
    horizon: float = 2e4
    seed: int = 0
    coexist_margin: float = 0.03   # detuning band below the Hopf line to probe
    ntss_tol: float = 1e-4
    z2_threshold: float = 0.01
    rtol: float = 1e-9
    atol: float = 1e-11
    probe: str = "auto"            # "auto" | "always" | "never"
    quick: bool = False            # cheaper settings for coarse maps

    def effective(self):
        if not self.quick:
            return self
        return ScanOptions(n_probes=1, transient=2e3, horizon=4e3,
                           seed=self.seed, coexist_margin=self.coexist_margin,
                           ntss_tol=self.ntss_tol,
                           z2_threshold=self.z2_threshold,
                           rtol=1e-8, atol=1e-10, probe=self.probe, quick=True)


@dataclass
class PhasePoint:
    delta: float
    W: float
    label: str
    diagnostics: dict = field(default_factory=dict)

    def to_record(self, ix=None, iy=None):
        rec = {"schema": SCHEMA, "delta": self.delta, "W": self.W,
               "label": self.label, "diagnostics": self.diagnostics}
        if ix is not None:
            rec["ix"] = ix
            rec["iy"] = iy
        return rec


def _probe_dynamic(params, o, rng):
    """Classify the attractor reached from one random initial condition."""
    y0 = random_state(2, rng)
    y = advance(y0, params, o.transient, rtol=o.rtol, atol=o.atol)
    copt = CycleOptions(transient=0.0, horizon=o.horizon, rtol=o.rtol,
                        atol=min(o.atol, 1e-11), closure_tol=1e-6,
                        samples=512, z2_tol=o.z2_threshold)
    try:
        cyc = find_limit_cycle(params, y, copt)
    except TransientNotSettled:
        # give the slow transient the paper-grade settling time, then retry
        y = advance(y, params, max(o.horizon - o.transient, 1e4),
                    rtol=o.rtol, atol=o.atol)
        try:
            cyc = find_limit_cycle(params, y, copt)
        except TransientNotSettled:
            cyc = None
    if cyc is None:
        return {"periodic": False}
    return {"periodic": True, "T": cyc.period, "f0": cyc.f0,
            "omega_q": cyc.omega_q, "z2_symmetric": bool(cyc.z2_symmetric),
            "asymmetry": cyc.meta.get("asymmetry", 0.0)}


def _probe_ntss(params, o, rng):
    """True if a random initial condition relaxes onto the NTSS."""
    y = random_state(2, rng)
    t = 0.0
    while t < o.horizon:
        y = advance(y, params, 1000.0, rtol=o.rtol, atol=o.atol)
        t += 1000.0
        if ntss_distance(y, params) < o.ntss_tol:
            return True
    return False


def classify_point(delta, W, options=ScanOptions(), rng=None):
    """Label one point of the phase plane.

    Analytic shortcut first (fixed-point stability regions), dynamical
    probing where time dependence or coexistence is possible.
    """
    if delta < 0 or W < 0:
        raise ValueError("delta and W must be nonnegative")
    o = options.effective()
    rng = np.random.default_rng(rng if rng is not None else o.seed)
    params = ModelParams.two_ensemble(delta, W)

    if tss_stable(params):
        return PhasePoint(delta, W, "TSS", {"analytic": True})

    if W > 0 and ntss_stable(params):
        near_hopf = (W < 1.0
                     and float(delta_minus(W)) - delta < o.coexist_margin)
        if o.probe == "never" or (o.probe == "auto" and not near_hopf):
            return PhasePoint(delta, W, "NTSS", {"analytic": True})
        hits = [_probe_ntss(params, o, rng) for _ in range(o.n_probes)]
        if all(hits):
            return PhasePoint(delta, W, "NTSS",
                              {"analytic": True, "probes_to_ntss": len(hits)})
        return PhasePoint(delta, W, "COEXIST_NTSS",
                          {"analytic": True,
                           "probes_to_ntss": int(np.sum(hits)),
                           "n_probes": len(hits)})

    probes = [_probe_dynamic(params, o, rng) for _ in range(o.n_probes)]
    periodic = [p for p in probes if p["periodic"]]
    if not periodic:
        return PhasePoint(delta, W, "NONPERIODIC",
                          {"periodic": False, "n_probes": len(probes)})
    symmetric = [p for p in periodic if p["z2_symmetric"]]
    best = max(periodic, key=lambda p: p["z2_symmetric"])
    label = ("Z2_LIMIT_CYCLE" if len(symmetric) * 2 > len(periodic)
             else "ASYM_LIMIT_CYCLE")
    diag = dict(best)
    diag["n_periodic"] = len(periodic)
    diag["n_probes"] = len(probes)
    return PhasePoint(delta, W, label, diag)


def _node_task(args):
    ix, iy, delta, W, opts, seed = args
    rng = np.random.default_rng((seed, ix, iy))
    pt = classify_point(delta, W, opts, rng=rng)
    return ix, iy, pt


@dataclass(frozen=True)
class GridSpec:
    dmin: float = 0.0
    dmax: float = 2.0
    wmin: float = 0.0
    wmax: float = 2.0
    nx: int = 40
    ny: int = 40

    def nodes(self):
        ds = np.linspace(self.dmin, self.dmax, self.nx)
        ws = np.linspace(self.wmin, self.wmax, self.ny)
        return ds, ws


def scan(grid, options=ScanOptions(), out=None, resume=False, workers=0):
    """Classify every grid node; returns the list of (ix, iy, PhasePoint).

    Deterministic for a fixed seed: each node derives its generator from
    (seed, ix, iy).  With `out`, results stream to newline-delimited JSON;
    with `resume`, nodes already present in the file are kept.
    """
    ds, ws = grid.nodes()
    done = {}
    if resume and out and os.path.exists(out):
        with open(out) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                if rec.get("schema") == SCHEMA and "ix" in rec:
                    done[(rec["ix"], rec["iy"])] = rec
    jobs = [(ix, iy, float(ds[ix]), float(ws[iy]), options, options.seed)
            for iy in range(len(ws)) for ix in range(len(ds))
            if (ix, iy) not in done]
    results = parallel_map(_node_task, jobs, workers=workers)
    records = dict(done)
    for ix, iy, pt in results:
        records[(ix, iy)] = pt.to_record(ix=ix, iy=iy)
    ordered = [records[k] for k in sorted(records)]
    if out:
        header = {"schema": SCHEMA, "header": True, "seed": options.seed,
                  "grid": asdict(grid), "created": time.strftime(
                      "%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
                  "workers": worker_count(workers)}
        with open(out, "w") as fh:
            fh.write(json.dumps(header, sort_keys=True) + "\n")
            for rec in ordered:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return ordered
