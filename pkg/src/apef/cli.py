"""Command-line driver: ``apef {run,analyze,gen,verify,batch,presets}``."""

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from importlib import resources

from .config import RunConfig
from .curve import area, length, load_snapshot, rotation_index, save_snapshot
from .errors import (ApefError, ConfigurationError, DegenerateCurve, GenerationError, GraphModeBreakdown,
                     StiffnessFailure, UnresolvedTopology)
from .flow import EXIT_DEGENERATE, EXIT_GRAPH, EXIT_OK, EXIT_STIFF, run
from .initial import InitialDatum, Perturbation, generate
from .stationary import EPS_STAT, analyze
from .variational import energy

EXIT_FAILED_CHECKS = 1
EXIT_USAGE = 64


def preset_names():
    return sorted(p.name for p in resources.files("apef.presets").iterdir() if p.name.endswith(".json"))


def resolve_config(path):
    """A file path, or the name of a shipped preset (with or without ``.json``)."""
    if os.path.exists(path):
        return RunConfig.load(path)
    name = path if path.endswith(".json") else path + ".json"
    ref = resources.files("apef.presets").joinpath(name)
    if ref.is_file():
        return RunConfig.loads(ref.read_text(encoding="utf-8"))
    raise ConfigurationError(f"no config file or preset named {path!r}")


def _with_root(cfg, root):
    """`cfg` writing under `root` instead of its configured output root."""
    if not root:
        return cfg
    return replace(cfg, outputs=replace(cfg.outputs, root=root))


def _exit_code(exc):
    if isinstance(exc, StiffnessFailure):
        return EXIT_STIFF
    if isinstance(exc, (DegenerateCurve, UnresolvedTopology)):
        return EXIT_DEGENERATE
    if isinstance(exc, GraphModeBreakdown):
        return EXIT_GRAPH
    return EXIT_USAGE


def _progress(every):
    def cb(state):
        if every and state.step_index % every == 0:
            d = state.diagnostics
            print(f"step {state.step_index:7d}  t={state.t:.6g}  E_lam={d.energy.total:.10g}  "
                  f"L={d.length:.6g}  A={d.area:.10g}  residual={d.residual:.3e}", flush=True)
    return cb


def cmd_run(args):
    cfg = _with_root(resolve_config(args.config), args.out)
    try:
        traj, state = run(cfg, callback=_progress(args.progress))
    except (StiffnessFailure, DegenerateCurve, UnresolvedTopology, GraphModeBreakdown) as exc:
        traj = getattr(exc, "trajectory", None)
        print(f"error: {exc}", file=sys.stderr)
        if traj is not None and traj.out_dir:
            print(f"last valid state written to {traj.out_dir}", file=sys.stderr)
        return _exit_code(exc)
    d = state.diagnostics
    print(f"{traj.status}: t={state.t:.6g} steps={state.step_index} E_lam={d.energy.total:.10g} "
          f"residual={d.residual:.3e} area drift={d.area_drift:.3e}")
    if traj.report is not None:
        print(f"classification: {traj.report.classification}, c1 = {traj.report.c1:.8g}")
    if traj.out_dir:
        print(f"outputs in {traj.out_dir}")
    return EXIT_OK


def cmd_analyze(args):
    curve = load_snapshot(args.snapshot)
    rep = analyze(curve, args.lam, args.area, eps_stat=args.eps_stat)
    print(json.dumps(rep.to_json(), indent=2))
    return EXIT_OK


def _datum_from_args(args):
    params = {}
    for key in ("radius", "a", "b", "scale", "shear", "file"):
        val = getattr(args, key)
        if val is not None:
            params[key] = val
    if args.coefficients is not None:
        params["file"] = args.coefficients
    pert = None
    if args.mode is not None:
        pert = Perturbation(mode=args.mode, amplitude=args.amplitude, random_phase=args.random_phase)
    return InitialDatum(args.kind, params, pert)


def cmd_gen(args):
    datum = _datum_from_args(args)
    curve = generate(datum, args.n, seed=args.seed)
    meta = {"datum": datum.to_dict(), "area": area(curve), "length": length(curve),
            "rotation_index": rotation_index(curve), "bending_energy": energy(curve).bending}
    if args.output == "-":
        json.dump(curve.to_json(**meta), sys.stdout)
        print()
    else:
        save_snapshot(curve, args.output, **meta)
        print(f"wrote {args.output}: area={meta['area']:.12g} length={meta['length']:.12g} "
              f"rotation_index={meta['rotation_index']}")
    return EXIT_OK


def cmd_verify(args):
    from .verify import Verifier

    keys = args.only.split(",") if args.only else None
    ver = Verifier(fast=args.fast)
    if keys:
        unknown = [k for k in keys if k not in ver.TITLES]
        if unknown:
            raise ConfigurationError(f"unknown checks: {unknown}")
    results = ver.run_all(keys, out=sys.stdout)
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} acceptance checks passed")
    return EXIT_OK if n_pass == len(results) else EXIT_FAILED_CHECKS


def _batch_one(path, root=None):
    try:
        cfg = _with_root(resolve_config(path), root)
        traj, _ = run(cfg)
        return path, EXIT_OK, traj.status
    except ApefError as exc:
        return path, _exit_code(exc), str(exc)


def cmd_batch(args):
    cfgs = [resolve_config(p) for p in args.configs]  # fail early on malformed input
    names = [c.name for c in cfgs]
    if len(set(names)) != len(names):
        raise ConfigurationError("batch configs must have distinct names (one output directory each)")
    worst = EXIT_OK
    with ProcessPoolExecutor(max_workers=args.workers) as pool:
        for path, code, msg in pool.map(_batch_one, args.configs, [args.out] * len(args.configs)):
            print(f"{path}: exit {code} ({msg})")
            worst = max(worst, code)
    return worst


def cmd_presets(args):
    if args.name is None:
        for name in preset_names():
            print(name)
        return EXIT_OK
    cfg = resolve_config(args.name)
    text = cfg.dumps()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="apef", description="Area preserving sixth-order elastic flow of planar curves")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="integrate a run config (file or preset name)")
    r.add_argument("config")
    r.add_argument("--out", help="output root (APEF_OUT_DIR, when set, still takes precedence)")
    r.add_argument("--progress", type=int, default=0, metavar="K", help="print every K steps")
    r.set_defaults(func=cmd_run)

    a = sub.add_parser("analyze", help="stationarity report for a snapshot")
    a.add_argument("snapshot")
    a.add_argument("--lambda", dest="lam", type=float, required=True)
    a.add_argument("--area", type=float, default=None, help="area constraint A0 (default: area of the curve)")
    a.add_argument("--eps-stat", type=float, default=EPS_STAT)
    a.set_defaults(func=cmd_analyze)

    g = sub.add_parser("gen", help="write an initial curve snapshot")
    g.add_argument("kind", choices=["circle", "ellipse", "gerono_eight", "asymmetric_eight", "fourier", "snapshot"])
    g.add_argument("-n", type=int, default=128)
    g.add_argument("-o", "--output", default="-")
    g.add_argument("--radius", type=float)
    g.add_argument("--a", type=float)
    g.add_argument("--b", type=float)
    g.add_argument("--scale", type=float)
    g.add_argument("--shear", type=float)
    g.add_argument("--coefficients", help="JSON file with [[k, re, im], ...]")
    g.add_argument("--file", help="snapshot file (kind 'snapshot')")
    g.add_argument("--mode", type=int, help="perturbation mode")
    g.add_argument("--amplitude", type=float, default=0.1)
    g.add_argument("--random-phase", action="store_true")
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("verify", help="run the acceptance checks and print a pass/fail table")
    v.add_argument("--fast", action="store_true", help="growing step for the long area-drift stretch")
    v.add_argument("--only", help="comma separated keys, e.g. AC-3,AC-9")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("batch", help="run several configs concurrently")
    b.add_argument("configs", nargs="+")
    b.add_argument("--workers", type=int, default=None)
    b.add_argument("--out", help="output root (APEF_OUT_DIR, when set, still takes precedence)")
    b.set_defaults(func=cmd_batch)

    s = sub.add_parser("presets", help="list shipped presets or print one")
    s.add_argument("name", nargs="?")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_presets)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except (ConfigurationError, GenerationError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ApefError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
