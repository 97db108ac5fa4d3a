"""Command-line front end: ``loradeploy <command> [options]``.

Every command writes plot-ready CSV (and JSON for scalar summaries) into
``--out``. Each CSV starts with ``#`` comment lines echoing the resolved
configuration and seed, followed by a header row.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import analytics, configfile, geometry, montecarlo, optimizer, traffic
from .errors import DegenerateStreamError, DomainError, InvalidSpreadError
from .model import NetworkConfig, SpreadFunction, build_rings

log = logging.getLogger("loradeploy")

REFERENCE_SPREADS = ("sqrt:598", "linear:80", "quadratic:0.145")


class _Output:
    def __init__(self, out_dir: Path, cfg: NetworkConfig, seed: int, command: str):
        self.dir = out_dir
        self.cfg = cfg
        self.seed = seed
        self.command = command
        self.dir.mkdir(parents=True, exist_ok=True)

    def csv(self, name: str, header, rows) -> Path:
        path = self.dir / name
        with path.open("w", encoding="utf-8", newline="") as fh:
            fh.write(f"# command: {self.command}\n")
            fh.write(f"# config: {configfile.one_line(self.cfg)}\n")
            fh.write(f"# seed: {self.seed}\n")
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(header)
            for row in rows:
                wr.writerow([_fmt(v) for v in row])
        log.info("wrote %s", path)
        return path

    def json(self, name: str, payload: dict) -> Path:
        path = self.dir / name
        body = {"command": self.command, "seed": self.seed, "config": configfile.dumps(self.cfg).splitlines()}
        body.update(payload)
        path.write_text(json.dumps(body, indent=2, default=_json_default) + "\n", encoding="utf-8")
        log.info("wrote %s", path)
        return path


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.10g}"
    if isinstance(v, np.integer):
        return int(v)
    return v


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    return str(o)


def _float_pair(text: str):
    a, _, b = text.partition(",")
    return (float(a), float(b)) if b else float(a)


def cmd_rings(args, cfg, out):
    rings = build_rings(cfg)
    rows = [(r.n, r.sf, r.q_n_db, r.inner_km, r.outer_km, r.airtime_ms, r.bitrate_bps) for r in rings]
    out.csv("rings.csv", ["n", "sf", "q_db", "inner_km", "outer_km", "airtime_ms", "bitrate_bps"], rows)
    print(f"{'SF':>3} {'q (dB)':>7} {'l_n (km)':>9} {'tau (ms)':>9}")
    for r in rings:
        print(f"{r.sf:>3} {r.q_n_db:>7.1f} {r.outer_km:>9.3f} {r.airtime_ms:>9.2f}")
    return 0


def cmd_collision(args, cfg, out):
    rings = build_rings(cfg)
    rows = []
    for r in rings:
        b = traffic.interval_bounds(r.airtime_ms, cfg.u, cfg.spread, r.sf)
        p = traffic.collision_probability(b)
        est = traffic.simulate_collision_rate(r.airtime_ms, b, args.trials, seed=args.seed + r.sf, method=args.method)
        rows.append((r.sf, r.airtime_ms, b.nu1_ms, b.nu2_ms, p, traffic.collision_probability_regime(r.airtime_ms, cfg.u, cfg.spread),
                     traffic.time_average_collision_probability(b), est.mean, est.stderr, (est.mean - p) / est.stderr if est.stderr else 0.0))
    out.csv("collision.csv", ["sf", "tau_ms", "nu1_ms", "nu2_ms", "p_closed", "p_regime", "p_time_average",
                              "mc_mean", "mc_stderr", "z_score"], rows)
    print(f"spread {cfg.spread}, u={cfg.u:g}, {args.method} oracle with {args.trials} samples")
    for row in rows:
        print(f"SF{row[0]:<3} p={row[4]:.6f}  mc={row[7]:.6f} +- {row[8]:.6f}")
    return 0


def cmd_profile(args, cfg, out):
    rows = []
    for spread in REFERENCE_SPREADS:
        c_s = cfg.replace(spread=SpreadFunction.parse(spread))
        for kappa in (-cfg.kappa_max, 0.0, cfg.kappa_max):
            c = c_s.replace(kappa=kappa)
            rings = build_rings(c)
            d = np.linspace(0.0, rings.R, args.points + 1)[1:]
            prof = analytics.radial_profile(d, c, rings)
            for i in range(len(d)):
                rows.append((str(c.spread), kappa, d[i], int(prof["ring"][i]), prof["Q"][i], prof["W"][i],
                             prof["H_lower"][i], prof["H_upper"][i]))
    out.csv("profile.csv", ["spread", "kappa", "d_km", "ring", "Q", "W", "H_lower", "H_upper"], rows)
    return 0


def cmd_coverage(args, cfg, out):
    rings = build_rings(cfg)
    if args.sweep:
        engine = analytics.RingQuadrature(cfg, rings, b_values=(1.0,))
        kappas = np.linspace(-cfg.kappa_max, cfg.kappa_max, args.resolution)
        lambdas = np.linspace(*optimizer.DEFAULT_LAMBDA0_RANGE, args.resolution)
        rows = []
        for k in kappas:
            for lam in lambdas:
                m = engine.ring_moments(k, lam)
                cn, nn = m[1.0], m["N"]
                rows.append((k, lam, float(np.dot(cn, nn) / nn.sum()), *cn))
        out.csv("coverage_sweep.csv", ["kappa", "lambda0", "C"] + [f"C_{n}" for n in range(1, 7)], rows)
        return 0
    c = analytics.coverage(cfg, rings)
    cn = [analytics.coverage_per_sf(cfg, n, rings) for n in range(1, 7)]
    out.json("coverage.json", {"C": c, "C_n": cn})
    print(f"C = {c:.6f}")
    for n, v in enumerate(cn, 1):
        print(f"C_{n} = {v:.6f}")
    return 0


def cmd_meta(args, cfg, out):
    rings = build_rings(cfg)
    z = np.linspace(0.0, 1.0, args.points)
    summary, rows = {}, []
    for kappa in (-cfg.kappa_max, 0.0, cfg.kappa_max) if args.all_kappa else (cfg.kappa,):
        c = cfg.replace(kappa=kappa)
        for scope in ["network", 1, 2, 3, 4, 5, 6]:
            md = analytics.meta_distribution(c, scope, rings)
            summary[f"kappa={kappa:.6g}/{scope}"] = {
                "m1": md.m1, "m2": md.m2, "alpha": md.alpha, "beta": md.beta_p, "variance": md.variance, "kind": md.kind,
            }
            rows.extend((kappa, scope, zi, ci) for zi, ci in zip(z, md.ccdf(z)))
    out.json("meta.json", {"moments": summary})
    out.csv("meta_curve.csv", ["kappa", "scope", "z", "ccdf"], rows)
    net = summary[f"kappa={cfg.kappa:.6g}/network"] if not args.all_kappa else None
    if net:
        print(f"M1={net['m1']:.6f} M2={net['m2']:.6f} alpha={net['alpha']:.6f} beta={net['beta']:.6f}")
    return 0


def cmd_simulate(args, cfg, out):
    rings = build_rings(cfg)
    link = montecarlo.simulate_link_success(cfg, rings, args.trials, seed=args.seed, workers=args.workers)
    w = analytics.sir_moment(link.d_km, 1.0, cfg, rings)
    lo, hi = analytics.h_bounds(link.d_km, cfg, rings)
    rows = [(*r, w[i], lo[i], hi[i]) for i, r in enumerate(link.rows())]
    out.csv("simulate_link.csv", ["d_km", "ring", "Q_hat", "W_hat", "H_hat", "Q_se", "W_se", "H_se",
                                  "W_analytic", "H_lower", "H_upper"], rows)
    meta = montecarlo.simulate_meta(cfg, rings, args.trials, seed=args.seed, workers=args.workers)
    md = analytics.meta_distribution(cfg, "network", rings)
    z = np.linspace(0.0, 1.0, 201)
    out.csv("simulate_meta.csv", ["z", "empirical_ccdf", "empirical_ccdf_snr_weighted", "beta_ccdf"],
            zip(z, meta.ccdf(z), meta.ccdf(z, "snr"), md.ccdf(z)))
    (m1, s1), (m2, s2) = meta.moment(1), meta.moment(2)
    zw = (link.W - w) / np.where(link.W_se > 0, link.W_se, np.inf)
    report = {
        "trials": args.trials,
        "W_max_abs_z": float(np.max(np.abs(zw))),
        "H_within_bounds_3se": bool(np.all((link.H >= lo - 3 * link.H_se) & (link.H <= hi + 3 * link.H_se))),
        "M1": {"mc": m1, "se": s1, "analytic": md.m1},
        "M2": {"mc": m2, "se": s2, "analytic": md.m2},
        "beta_sup_distance": meta.sup_distance(md),
    }
    out.json("simulate.json", report)
    print(json.dumps(report, indent=2))
    return 0


def cmd_optimize(args, cfg, out):
    res = optimizer.grid_search(cfg, args.kappa_range, args.lambda0_range, args.resolution, args.z, workers=args.workers)
    with (out.dir / "optimize.csv").open("w", encoding="utf-8", newline="") as fh:
        fh.write(f"# command: {out.command}\n# config: {configfile.one_line(cfg)}\n# seed: {out.seed}\n")
        res.write_csv(fh)
    out.json("optimize.json", res.summary())
    k, lam = res.argmax
    print(f"argmax kappa={k:.6g} lambda0={lam:.6g}  N={lam * np.pi * cfg.R**2:.1f}")
    print("O_n =", " ".join(f"{v:.4f}" for v in res.best.o_n))
    return 0


def cmd_deploy(args, cfg, out):
    dep = geometry.sample(cfg, args.seed)
    out.csv("deploy.csv", ["r_km", "theta_rad", "x_km", "y_km", "ring"],
            zip(dep.r, dep.theta, dep.x, dep.y, dep.ring))
    print(f"{len(dep)} EDs, per ring: {dep.ring_counts().tolist()}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"key = value config file (default: ${configfile.ENV_VAR})")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    common.add_argument("--spread", help="spread function kind:c, e.g. sqrt:598")
    common.add_argument("--kappa", type=float)
    common.add_argument("--lambda0", type=float)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--dump-config", metavar="PATH", help="write the resolved config and continue")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="loradeploy", description="Coverage and deployment analysis of a LoRa cell.")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("rings", parents=[common], help="SF ring radii and air-times")
    p = sub.add_parser("collision", parents=[common], help="per-SF collision probability and MC oracle")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--method", choices=("timeline", "cycle"), default="timeline")
    p = sub.add_parser("profile", parents=[common], help="radial Q, W and H bounds")
    p.add_argument("--points", type=int, default=200)
    p = sub.add_parser("coverage", parents=[common], help="network and per-SF coverage")
    p.add_argument("--sweep", action="store_true", help="(kappa, lambda0) surface instead")
    p.add_argument("--resolution", type=int, default=41)
    p = sub.add_parser("meta", parents=[common], help="meta-distribution moments and Beta curves")
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--all-kappa", action="store_true", help="curves for kappa = -2/R^2, 0, 2/R^2")
    p = sub.add_parser("simulate", parents=[common], help="Monte-Carlo validation of the analytics")
    p.add_argument("--trials", type=int, default=10_000)
    p = sub.add_parser("optimize", parents=[common], help="grid search of the fairness objective")
    p.add_argument("--z", type=float, default=optimizer.DEFAULT_Z)
    p.add_argument("--resolution", type=int, default=41)
    p.add_argument("--kappa-range", type=_float_pair, default=None, metavar="LO,HI")
    p.add_argument("--lambda0-range", type=_float_pair, default=optimizer.DEFAULT_LAMBDA0_RANGE, metavar="LO,HI")
    sub.add_parser("deploy", parents=[common], help="sample one PPP deployment")
    return ap


COMMANDS = {
    "rings": cmd_rings, "collision": cmd_collision, "profile": cmd_profile, "coverage": cmd_coverage,
    "meta": cmd_meta, "simulate": cmd_simulate, "optimize": cmd_optimize, "deploy": cmd_deploy,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    overrides = list(args.overrides)
    for key in ("spread", "kappa", "lambda0"):
        if getattr(args, key) is not None:
            overrides.append(f"{key}={getattr(args, key)}")
    try:
        cfg = configfile.resolve(args.config, overrides)
        if args.dump_config:
            Path(args.dump_config).write_text(configfile.dumps(cfg), encoding="utf-8")
        command = " ".join(["loradeploy"] + (sys.argv[1:] if argv is None else list(argv)))
        out = _Output(Path(args.out), cfg, args.seed, command)
        return COMMANDS[args.command](args, cfg, out)
    except (ValueError, DomainError, InvalidSpreadError, DegenerateStreamError, OSError) as exc:
        print(f"loradeploy: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
