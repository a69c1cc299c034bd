"""Command line: run, converge, export, selftest.

Exit codes: 0 success, 2 invalid configuration or arguments, 3 numerical failure.
"""

import argparse
import csv
import json
import logging
import os
import platform
import sys
import time
import warnings

import numpy as np

from . import __version__, config, pipeline
from ._backend import BACKEND
from .layers import IllConditionedError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _fmt(x):
    return repr(float(x)) if np.isfinite(x) else "nan"


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_field_csv(path, pts, u):
    rows = np.column_stack([pts[:, 0], pts[:, 1], u.real, u.imag])
    write_csv(path, ["x1 (length)", "x2 (length)", "Re u (dimensionless)",
                     "Im u (dimensionless)"], rows)


def write_trace_csv(path, run):
    t = pipeline.probe_parameters(run.cfg.probes)
    pts = run.probe_points()
    u = run.probe_values()
    rows = np.column_stack([t, pts[:, 0], pts[:, 1], u.real, u.imag])
    write_csv(path, ["t (rad)", "x1 (length)", "x2 (length)", "Re u (dimensionless)",
                     "Im u (dimensionless)"], rows)


def manifest(cfg, run=None, extra=None):
    m = {
        "package": "fbscatter",
        "version": __version__,
        "kernel_backend": BACKEND,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "config": cfg.to_dict(),
    }
    if run is not None:
        m.update({
            "route": run.route,
            "kappa": run.fbq.kappa,
            "quadrature_branch": run.fbq.branch,
            "alpha_nodes": run.fbq.nodes.tolist(),
            "tbc_residual": run.solution.residual,
            "timings_s": run.timings,
        })
        if cfg.kind == "plane":
            from .quasiperiodic import reference_alpha
            m["alpha_ref"] = reference_alpha(cfg.k, cfg.incidence["theta"])
    if extra:
        m.update(extra)
    return m


def write_json(path, data):
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _outdir(args):
    out = args.out or "out"
    os.makedirs(out, exist_ok=True)
    return out


def _load(args):
    if not args.config:
        raise config.ConfigError("--config", "a configuration file is required")
    cfg = config.load(args.config)
    if args.threads is not None:
        if args.threads < 1:
            raise config.ConfigError("--threads", "must be >= 1")
        cfg.threads = args.threads
    return cfg


def cmd_run(args):
    cfg = _load(args)
    out = _outdir(args)
    run = pipeline.solve(cfg)
    t_q = pipeline.time_single_alpha(cfg)
    run.timings["T_q"] = t_q
    run.timings["T_nq_over_T_q"] = run.timings["T_nq"] / t_q
    t0 = time.perf_counter()
    pts, u = run.field_on_grid()
    run.timings["field_grid"] = time.perf_counter() - t0
    field = os.path.join(out, cfg.outputs["field"])
    trace = os.path.join(out, cfg.outputs["trace"])
    write_field_csv(field, pts, u)
    write_trace_csv(trace, run)
    write_json(os.path.join(out, cfg.outputs["manifest"]),
               manifest(cfg, run, {"outputs": {"field": field, "trace": trace}}))
    print(f"route={run.route} kappa={run.fbq.kappa:g} branch={run.fbq.branch} "
          f"T_nq={run.timings['T_nq']:.3f}s T_q={t_q:.3f}s "
          f"ratio={run.timings['T_nq_over_T_q']:.2f}")
    return EXIT_OK


def cmd_converge(args):
    cfg = _load(args)
    if not args.sweep:
        raise config.ConfigError("--sweep", "required for converge")
    if args.reference is None:
        raise config.ConfigError("--reference", "required for converge")
    var, values = config.parse_sweep(args.sweep)
    ref = args.reference
    if int(ref) != ref:
        raise config.ConfigError("--reference", "must be an integer")
    ref = int(ref)
    if ref < max(values):
        raise config.ConfigError("--reference", "must be >= every sweep value")
    for v in values + [ref]:
        config.validate(cfg.with_value(var, v))
    out = _outdir(args)
    rec = pipeline.converge(cfg, var, values, ref, threads=cfg.threads)
    path = os.path.join(out, cfg.outputs["convergence"])
    write_csv(path, [f"{var} (count)", "E_rel (dimensionless)", "wall (s)"],
              zip(rec.values, rec.e_rel, rec.wall))
    write_json(os.path.join(out, cfg.outputs["manifest"]),
               manifest(cfg, extra={"convergence": {
                   "variable": var, "values": rec.values, "E_rel": rec.e_rel,
                   "wall_s": rec.wall, "reference": rec.reference,
                   "probes": cfg.probes}, "outputs": {"convergence": path}}))
    for v, e in zip(rec.values, rec.e_rel):
        print(f"{var}={v} E_rel={e:.3e}")
    return EXIT_OK


def cmd_export(args):
    cfg = _load(args)
    out = _outdir(args)
    run = pipeline.solve(cfg)
    pts, u = run.field_on_grid()
    field = os.path.join(out, cfg.outputs["field"])
    write_field_csv(field, pts, u)
    write_json(os.path.join(out, cfg.outputs["manifest"]),
               manifest(cfg, run, {"outputs": {"field": field}}))
    print(f"wrote {len(pts)} grid points to {field}")
    return EXIT_OK


def cmd_selftest(args):
    from . import selftest
    ok = selftest.run_all(verbose=True)
    return EXIT_OK if ok else EXIT_NUMERIC


def build_parser():
    p = argparse.ArgumentParser(prog="fbscatter", description=(
        "Scattering by a locally perturbed periodic array of sound-soft obstacles."))
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="verb", required=True)
    for name, fn in (("run", cmd_run), ("converge", cmd_converge), ("export", cmd_export),
                     ("selftest", cmd_selftest)):
        s = sub.add_parser(name)
        s.add_argument("--config", metavar="PATH")
        s.add_argument("--threads", type=int, metavar="INT")
        s.add_argument("--out", metavar="DIR")
        if name == "converge":
            s.add_argument("--sweep", metavar="VAR=V1,V2,...")
            s.add_argument("--reference", type=float, metavar="VAL")
        s.set_defaults(func=fn)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if not args.verbose:
        warnings.simplefilter("ignore")
    try:
        return args.func(args)
    except config.ConfigError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IllConditionedError, pipeline.NumericalFailure, np.linalg.LinAlgError,
            FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
