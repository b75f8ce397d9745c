"""Command-line front end: hoermander-kit <subcommand>.

Subcommands map to the verification entry points: multiplier norms of stored
fields, interpolation identity sweeps, compatibility checks on synthesized
or configured problems, trace-identity checks, the isomorphism benchmark,
and the jump study.  Reports are written as JSON (or CSV where tabular) and
the exit code is 0 exactly when every PASS criterion of the invoked command
holds.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bench, interp, parabolic as pb, params, spectra, traces
from .params import constant, log_power, param_from_dict
from .weights import isotropic, parabolic_split

__all__ = ["main"]


def _parse_phi(spec: str | None):
    if not spec:
        return constant()
    return param_from_dict(json.loads(spec))


def _emit(args, payload: dict, name: str) -> None:
    text = json.dumps(payload, indent=2)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.json").write_text(text)
    print(text)


def _cmd_norm(args) -> int:
    field = spectra.load_field(args.field)
    phi = _parse_phi(args.phi)
    make = parabolic_split if args.anisotropy == "parabolic" else isotropic
    idx = make(args.s, phi, dimension=field.lattice.k)
    value = spectra.norm(idx, field)
    _emit(args, {"field": str(args.field), "space": idx.describe(), "norm": value}, "norm")
    return 0


def _cmd_interp_check(args) -> int:
    sizes = tuple(int(s) for s in args.resolutions.split(","))
    rows = []
    ok = True
    for n in sizes:
        lat = spectra.Lattice(sizes=(n, n), periods=(2 * np.pi, 2 * np.pi))
        for phi in (constant(), log_power(1.0), log_power(-1.0)):
            rep = interp.verify_prop_interpolation(
                0.0, 1.0, 2.0, 0.0, phi, lat, trials=args.trials, seed=args.seed
            )
            rows.append(json.loads(rep.to_json()))
            ok = ok and rep.max_deviation <= 1e-10
        pair = interp.AdmissiblePair(
            idx0=parabolic_split(0.0, dimension=2),
            idx1=parabolic_split(2.0, dimension=2),
            lattice=lat,
        )
        alpha = params.build_psi(0, 0.5, 2, log_power(1.0))
        beta = params.build_psi(0, 1.5, 2, log_power(1.0))
        psi = params.InterpParam(evaluator=np.sqrt)
        rep = interp.verify_reiteration(alpha, beta, psi, pair,
                                        trials=args.trials, seed=args.seed)
        rows.append(json.loads(rep.to_json()))
        ok = ok and rep.max_deviation <= 1e-12
    _emit(args, {"reports": rows, "passed": ok}, "interp-check")
    return 0 if ok else 1


def _cmd_compat_check(args) -> int:
    if args.config:
        cfg = json.loads(Path(args.config).read_text())
        problem = pb.problem_from_config(cfg)
        s = float(cfg.get("s", args.s))
    else:
        geom = pb.IntervalGeometry(nx=args.nx)
        problem = pb.heat_problem(geom)
        s = args.s
    nt = args.nt
    trial = bench.synthesize_trial(problem.geometry, problem.tau, nt,
                                   seed=args.seed, band=3)
    f, g, h = bench.apply_lambda(problem, trial, nt)
    rep = pb.check_compatibility(problem, f, g, h, s=s)
    payload = {
        "s": s,
        "count": rep.count,
        "at_jump": rep.at_jump,
        "residuals": rep.residuals,
        "passed": rep.passed,
    }
    _emit(args, payload, "compat-check")
    return 0 if rep.passed else 1


def _cmd_trace_check(args) -> int:
    beta = traces.default_cutoff()
    slat = spectra.Lattice(sizes=(64,), periods=(2 * np.pi,))
    worst = 0.0
    for r in (1, 2, 3):
        for seed in range(args.trials):
            v = traces.CauchyData.random(slat, r, seed=args.seed + seed)
            back = traces.lift_trace(v, beta, r)
            for k in range(r):
                scale = float(np.max(np.abs(v.components[k])))
                err = float(np.max(np.abs(back.components[k] - v.components[k]))) / scale
                worst = max(worst, err)
    moments = {
        f"m{m}k{k}": traces.cutoff_moments(beta, m, k)
        for m in (0, 1) for k in (0, 1)
    }
    ok = worst <= 1e-9
    _emit(args, {"max_identity_error": worst, "moments": moments, "passed": ok},
          "trace-check")
    return 0 if ok else 1


def _cmd_iso_bench(args) -> int:
    if args.config:
        cfg = json.loads(Path(args.config).read_text())
        phis = tuple(param_from_dict(d) for d in cfg.get(
            "phi", [{"kind": "Constant", "value": 1.0}]))
        case = bench.BenchCase(
            geometry_kind=cfg.get("geometry", args.geometry),
            s_grid=tuple(cfg.get("s_grid", [2.6, 3.0, 4.0, 4.6])),
            phi_list=phis,
            trial_count=int(cfg.get("trials", args.trials)),
            resolutions=tuple(cfg.get("resolutions",
                                      [int(s) for s in args.resolutions.split(",")])),
            seed=int(cfg.get("seed", args.seed)),
            ny=int(cfg.get("ny", args.ny)),
            band=int(cfg.get("band", args.band)),
        )
    else:
        resolutions = tuple(int(s) for s in args.resolutions.split(","))
        phis = (constant(), log_power(1.0), log_power(-1.0))
        case = bench.BenchCase(
            geometry_kind=args.geometry,
            s_grid=tuple(float(s) for s in args.s_grid.split(",")),
            phi_list=phis,
            trial_count=args.trials,
            resolutions=resolutions,
            seed=args.seed,
            ny=args.ny,
            band=args.band,
        )
    rep = bench.estimate_isomorphism(case)
    ok = rep.drift_passed()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "iso-bench.json").write_text(rep.to_json())
        if args.csv:
            (out / "iso-bench.csv").write_text(rep.to_csv())
    print(rep.to_csv() if args.csv else rep.to_json())
    print(f"drift check: {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def _cmd_jump_study(args) -> int:
    resolutions = tuple(int(s) for s in args.resolutions.split(","))
    rep = bench.jump_study(
        s_star=args.s_star,
        eps_pair=(args.eps1, args.eps2),
        resolutions=resolutions,
        trials=args.trials,
        seed=args.seed,
    )
    ok = rep.envelope_stable() and rep.violation_monotone()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "jump-study.json").write_text(rep.to_json())
    print(rep.to_json())
    print(f"jump study: {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hoermander-kit")
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="directory for JSON reports")
    common.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("norm", parents=[common], help="multiplier norm of a stored field")
    p.add_argument("--field", required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--phi", default=None, help='function parameter JSON, e.g. {"kind":"LogPower","theta":[1.0]}')
    p.add_argument("--anisotropy", choices=("parabolic", "isotropic"), default="parabolic")
    p.set_defaults(fn=_cmd_norm)

    p = sub.add_parser("interp-check", parents=[common], help="interpolation identity sweeps")
    p.add_argument("--resolutions", default="16,32")
    p.add_argument("--trials", type=int, default=50)
    p.set_defaults(fn=_cmd_interp_check)

    p = sub.add_parser("compat-check", parents=[common], help="compatibility conditions on synthesized data")
    p.add_argument("--config", default=None, help="problem config JSON file")
    p.add_argument("--s", type=float, default=4.0)
    p.add_argument("--nx", type=int, default=64)
    p.add_argument("--nt", type=int, default=64)
    p.set_defaults(fn=_cmd_compat_check)

    p = sub.add_parser("trace-check", parents=[common], help="trace/lift identity and cutoff moments")
    p.add_argument("--trials", type=int, default=20)
    p.set_defaults(fn=_cmd_trace_check)

    p = sub.add_parser("iso-bench", parents=[common], help="two-sided isomorphism surrogate")
    p.add_argument("--config", default=None, help="bench case JSON file")
    p.add_argument("--geometry", choices=("interval", "strip"), default="interval")
    p.add_argument("--s-grid", default="2.6,3,4,4.6")
    p.add_argument("--resolutions", default="32,64")
    p.add_argument("--trials", type=int, default=30)
    p.add_argument("--ny", type=int, default=16)
    p.add_argument("--band", type=int, default=4)
    p.add_argument("--json", dest="csv", action="store_false", default=False)
    p.add_argument("--csv", dest="csv", action="store_true")
    p.set_defaults(fn=_cmd_iso_bench)

    p = sub.add_parser("jump-study", parents=[common], help="half-interpolation at a jump point")
    p.add_argument("--s-star", type=float, default=3.5)
    p.add_argument("--eps1", type=float, default=0.1)
    p.add_argument("--eps2", type=float, default=0.2)
    p.add_argument("--resolutions", default="16,32")
    p.add_argument("--trials", type=int, default=30)
    p.set_defaults(fn=_cmd_jump_study)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
