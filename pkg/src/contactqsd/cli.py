"""Command-line experiment runner.

Subcommands: simulate | yaglom | fviot | exact | sweep | structures |
diamgap | selftest.  Every run resolves its parameters (config file, then
flags), executes, and writes a JSON summary whose bytes depend only on the
resolved parameters and seed -- never on worker count, scheduling or
backend.  Execution facts that do vary (wall time, workers, backend) go to
a sidecar ``<out>.runlog.json``.

Exit codes: 0 success, 2 usage error, 3 numerical or degenerate-sample
error.
"""

import argparse
import json
import math
import os
import sys
import time

from . import __version__, backend
from .errors import (
    DegenerateSampleError,
    InsufficientDataError,
    NumericalError,
    UsageError,
)
from .exact import build_generator, export_generator, qsd_eigen, truncation_sweep
from .fv import fleming_viot_estimate
from .lattice import format_config, parse_config
from .qsd import (
    diam_factorization_gap,
    survival_curve,
    yaglom_estimate,
)
from .structures import scan_cut_breaks
from .trajectory import simulate as simulate_trajectory

REPORT_MASS_FLOOR = 1e-6


def _json_dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _pmf_report(pmf, top_k):
    """Serialize a pmf: top_k entries by mass, tail folded into "other".

    States below the reporting mass floor are folded as well; the flag says
    whether any folding happened.  Tests always consume full pmfs, never
    this report.
    """
    ranked = sorted(pmf.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = [(k, v) for k, v in ranked[:top_k] if v >= REPORT_MASS_FLOOR]
    kept_keys = {k for k, _ in kept}
    other = math.fsum(v for k, v in ranked if k not in kept_keys)
    out = {format_config(k): v for k, v in kept}
    truncated = len(kept) < len(ranked)
    if truncated and other > 0:
        out["other"] = other
    return out, truncated


def _write_outputs(args, summary, t_started):
    payload = _json_dumps(summary)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload)
        runlog = {
            "wall_time_s": time.monotonic() - t_started,
            "workers": args.workers,
            "backend": backend.backend_name(),
            "argv": sys.argv[1:],
        }
        with open(args.out + ".runlog.json", "w") as fh:
            fh.write(_json_dumps(runlog))
    else:
        sys.stdout.write(payload)


def _write_csv(path, rows, header):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(c) for c in row) + "\n")


def _manifest(command, params):
    """Deterministic reproduction recipe embedded in every summary.

    Worker count and wall time are deliberately absent: results are
    worker-count independent, so they are execution facts, not part of the
    law; they live in the sidecar runlog.
    """
    return {
        "tool": "contactqsd",
        "version": __version__,
        "command": command,
        "params": params,
    }


# --- subcommand handlers -----------------------------------------------------


def _cmd_exact(args):
    gen = build_generator(args.d, args.W, args.lam, truncation=args.truncation)
    eig = qsd_eigen(gen, tolerance=args.tol)
    if args.export_matrix or args.export_states:
        if not (args.export_matrix and args.export_states):
            raise UsageError("--export-matrix and --export-states go together")
        export_generator(gen, args.export_matrix, args.export_states)
    pmf_out, truncated = _pmf_report(eig.pmf, args.top_k)
    params = {
        "d": args.d, "W": args.W, "lambda": args.lam, "tol": args.tol,
        "truncation": args.truncation,
    }
    return {
        "manifest": _manifest("exact", params),
        "results": {
            "alpha": eig.alpha,
            "residual": eig.residual,
            "iterations": eig.iterations,
            "n_states": len(gen.space),
            "pmf_top": pmf_out,
            "support_truncated": truncated,
        },
    }


def _cmd_sweep(args):
    widths = [int(w) for w in args.W_list.split(",")]
    results, diagnostics = truncation_sweep(args.d, args.lam, widths,
                                            tolerance=args.tol)
    params = {"d": args.d, "lambda": args.lam, "W_list": widths, "tol": args.tol}
    return {
        "manifest": _manifest("sweep", params),
        "results": {
            "alphas": {str(r["W"]): r["alpha"] for r in results},
            "diagnostics": [
                {
                    "W_pair": list(d["W_pair"]),
                    "tv": d["tv"],
                    "alpha_delta": d["alpha_delta"],
                }
                for d in diagnostics
            ],
        },
    }


def _resolve_eta0(args):
    eta0 = parse_config(args.eta0, dimension=args.d)
    if not eta0:
        raise UsageError("--eta0 must name a non-empty configuration")
    return eta0


def _cmd_yaglom(args):
    eta0 = _resolve_eta0(args)
    est = yaglom_estimate(
        eta0, args.lam, args.t, args.replicas, args.seed,
        workers=args.workers, keep_records=bool(args.csv),
    )
    if est.n_effective < 100:
        sys.stderr.write(
            f"warning: only {est.n_effective} survivors; conditioned "
            f"estimates need ~e^(alpha t) replicas to keep 100+\n"
        )
    if args.csv:
        rows = [
            (i, seed, "" if tau is None else tau, format_config(key))
            for i, (seed, tau, key) in sorted(est.records.items())
        ]
        _write_csv(args.csv, rows, ("replica", "seed", "tau", "final_state"))
    pmf_out, truncated = _pmf_report(est.pmf, args.top_k)
    params = {
        "d": args.d, "eta0": format_config(eta0), "lambda": args.lam,
        "t": args.t, "replicas": args.replicas, "seed": args.seed,
    }
    return {
        "manifest": _manifest("yaglom", params),
        "results": {
            "method": est.method,
            "n_survivors": est.n_effective,
            "survival": est.n_effective / args.replicas,
            "pmf_top": pmf_out,
            "support_truncated": truncated,
        },
    }


def _cmd_fviot(args):
    eta0 = _resolve_eta0(args)
    est = fleming_viot_estimate(
        args.particles, args.lam, args.burn, args.sample, args.seed,
        zeta0=eta0,
    )
    pmf_out, truncated = _pmf_report(est.pmf, args.top_k)
    params = {
        "d": args.d, "eta0": format_config(eta0), "lambda": args.lam,
        "particles": args.particles, "burn": args.burn,
        "sample": args.sample, "seed": args.seed,
    }
    return {
        "manifest": _manifest("fviot", params),
        "results": {
            "method": est.method,
            "alpha_hat": est.alpha_hat,
            "alpha_stderr": est.alpha_stderr,
            "pmf_top": pmf_out,
            "support_truncated": truncated,
        },
    }


def _cmd_simulate(args):
    eta0 = _resolve_eta0(args)
    times = [float(x) for x in args.times.split(",")] if args.times else [args.t]
    records = []
    for i in range(args.replicas):
        rec = simulate_trajectory(eta0, args.lam, times, args.seed, replica=i,
                                  engine=args.engine)
        records.append(rec)
    if args.traj:
        with open(args.traj, "w") as fh:
            for rec in records:
                fh.write(rec.to_json() + "\n")
    n_absorbed = sum(1 for r in records if r.tau is not None)
    params = {
        "d": args.d, "eta0": format_config(eta0), "lambda": args.lam,
        "times": times, "replicas": args.replicas, "seed": args.seed,
        "engine": args.engine,
    }
    return {
        "manifest": _manifest("simulate", params),
        "results": {
            "n_absorbed_by_horizon": n_absorbed,
            "mean_tau_absorbed": (
                math.fsum(r.tau for r in records if r.tau is not None)
                / n_absorbed
                if n_absorbed
                else None
            ),
        },
    }


def _cmd_structures(args):
    eta0 = _resolve_eta0(args)
    radius = args.R if args.R is not None else math.exp(math.sqrt(args.t))
    out = scan_cut_breaks(
        eta0, args.lam, args.t, radius, args.replicas, args.seed,
        beta=args.beta, window_margin=args.margin, workers=args.workers,
        want_flags=args.flags, keep_records=bool(args.jsonl),
    )
    if args.jsonl:
        with open(args.jsonl, "w") as fh:
            for row in out.get("records", []):
                row = dict(row)
                row["X"] = format_config((row["X"],)) if row["X"] else ""
                row["Y"] = format_config((row["Y"],)) if row["Y"] else ""
                fh.write(json.dumps(row, sort_keys=True) + "\n")
    params = {
        "d": args.d, "eta0": format_config(eta0), "lambda": args.lam,
        "t": args.t, "R": radius, "beta": args.beta, "margin": args.margin,
        "replicas": args.replicas, "seed": args.seed, "flags": args.flags,
    }
    results = {k: v for k, v in out.items() if k != "records"}
    return {"manifest": _manifest("structures", params), "results": results}


def _cmd_diamgap(args):
    eta0 = _resolve_eta0(args)
    radius = args.R if args.R is not None else math.exp(math.sqrt(args.t))
    gen = build_generator(args.d, args.ref_W, args.lam)
    reference = qsd_eigen(gen).pmf
    res = diam_factorization_gap(
        eta0, args.lam, args.t, radius, args.replicas, args.seed, reference,
        workers=args.workers,
    )
    params = {
        "d": args.d, "eta0": format_config(eta0), "lambda": args.lam,
        "t": args.t, "R": radius, "replicas": args.replicas,
        "seed": args.seed, "ref_W": args.ref_W,
    }
    return {
        "manifest": _manifest("diamgap", params),
        "results": {
            "gap": res.gap,
            "gap_ci95": list(res.ci95),
            "p_diam_below_R": res.p_diam_below,
            "n_survivors": res.n_survivors,
        },
    }


def _cmd_selftest(args):
    """Closed-form oracle checks at lambda = 0 plus the tiny exact cases."""
    checks = []

    def check(name, ok, detail):
        checks.append({"name": name, "ok": bool(ok), "detail": detail})

    # single clock: survival is exactly e^-t
    n = 20000
    curve = survival_curve(((0,),), 0.0, [1.0, 2.0], n, args.seed)
    for t, p in zip(curve.times, curve.survival_prob):
        want = math.exp(-t)
        sigma = math.sqrt(want * (1 - want) / n)
        check(f"single-clock survival t={t}", abs(p - want) <= 3 * sigma,
              {"got": p, "want": want, "sigma": sigma})

    # n independent clocks
    eta0 = tuple((3 * i,) for i in range(5))
    curve = survival_curve(eta0, 0.0, [1.0], n, args.seed + 1)
    want = 1 - (1 - math.exp(-1.0)) ** 5
    sigma = math.sqrt(want * (1 - want) / n)
    check("five-clock survival t=1",
          abs(curve.survival_prob[0] - want) <= 3 * sigma,
          {"got": curve.survival_prob[0], "want": want, "sigma": sigma})

    # conditioned law at lambda = 0 from a singleton is stuck at {0}
    est = yaglom_estimate(((0,),), 0.0, 2.0, 5000, args.seed + 2)
    check("lambda-0 conditioned law", est.pmf.get(((0,),), 0.0) == 1.0,
          {"pmf": {format_config(k): v for k, v in est.pmf.items()}})

    # tiny exact cases
    gen = build_generator(1, 1, 1.0)
    eig = qsd_eigen(gen)
    check("exact W=1", abs(eig.alpha - 1.0) < 1e-12, {"alpha": eig.alpha})
    gen = build_generator(1, 2, 1.0)
    eig = qsd_eigen(gen)
    want = (5 - math.sqrt(17)) / 2
    check("exact W=2 alpha", abs(eig.alpha - want) < 1e-10,
          {"alpha": eig.alpha, "want": want})

    ok = all(c["ok"] for c in checks)
    params = {"seed": args.seed}
    summary = {
        "manifest": _manifest("selftest", params),
        "results": {"ok": ok, "checks": checks},
    }
    if not ok:
        raise NumericalError("selftest failed: " + _json_dumps(summary))
    return summary


# --- argument plumbing ---------------------------------------------------------


def _add_common(p, *, replicas=False, eta0=False, needs_t=False):
    p.add_argument("--d", type=int, default=1, help="lattice dimension")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0,
                   help="infection rate per directed edge")
    p.add_argument("--seed", type=int, default=0, help="64-bit master seed")
    p.add_argument("--out", default=None, help="summary JSON path")
    p.add_argument("--workers", type=int,
                   default=int(os.environ.get("CONTACTQSD_WORKERS", "1")))
    p.add_argument("--config", default=None,
                   help="JSON file of defaults; flags override")
    if replicas:
        p.add_argument("--replicas", type=int, default=10000)
    if eta0:
        p.add_argument("--eta0", default="0",
                       help='configuration string, e.g. "0;1;2" or "0,0;1,0"')
    if needs_t:
        p.add_argument("--t", type=float, default=5.0)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="contactqsd",
        description="Subcritical contact process modulo translations: "
        "simulation and quasi-stationary estimators",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="eigen solve on the truncated space")
    _add_common(p)
    p.add_argument("--W", type=int, default=12)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--truncation", choices=("censoring", "killing"),
                   default="censoring")
    p.add_argument("--top-k", type=int, default=20)
    p.add_argument("--export-matrix", default=None)
    p.add_argument("--export-states", default=None)
    p.set_defaults(fn=_cmd_exact)

    p = sub.add_parser("sweep", help="truncation width sweep")
    _add_common(p)
    p.add_argument("--W-list", default="6,8,10,12")
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("yaglom", help="conditioned law at time t")
    _add_common(p, replicas=True, eta0=True, needs_t=True)
    p.add_argument("--top-k", type=int, default=20)
    p.add_argument("--csv", default=None, help="per-replica CSV path")
    p.set_defaults(fn=_cmd_yaglom)

    p = sub.add_parser("fviot", help="Fleming-Viot particle estimate")
    _add_common(p, eta0=True)
    p.add_argument("--particles", type=int, default=1000)
    p.add_argument("--burn", type=float, default=50.0)
    p.add_argument("--sample", type=float, default=200.0)
    p.add_argument("--top-k", type=int, default=20)
    p.set_defaults(fn=_cmd_fviot)

    p = sub.add_parser("simulate", help="write trajectory records")
    _add_common(p, replicas=True, eta0=True, needs_t=True)
    p.add_argument("--times", default=None,
                   help="comma-separated snapshot times (overrides --t)")
    p.add_argument("--engine", choices=("graphical", "jump"),
                   default="graphical")
    p.add_argument("--traj", default=None, help="JSONL output path")
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("structures", help="cut-break-point scan")
    _add_common(p, replicas=True, eta0=True, needs_t=True)
    p.add_argument("--R", type=float, default=None,
                   help="break-point box scale; default e^sqrt(t)")
    p.add_argument("--beta", type=float, default=8.0)
    p.add_argument("--margin", type=int, default=None,
                   help="window slack beyond 2R + jump budget")
    p.add_argument("--flags", action="store_true",
                   help="also evaluate good-point flags at (Y, S)")
    p.add_argument("--jsonl", default=None, help="per-replica JSONL path")
    p.set_defaults(fn=_cmd_structures)

    p = sub.add_parser("diamgap", help="diameter-factorization gap statistic")
    _add_common(p, replicas=True, eta0=True, needs_t=True)
    p.add_argument("--R", type=float, default=None,
                   help="diameter threshold; default e^sqrt(t)")
    p.add_argument("--ref-W", type=int, default=12,
                   help="truncation width of the eigen reference law")
    p.set_defaults(fn=_cmd_diamgap)

    p = sub.add_parser("selftest", help="closed-form oracle suite")
    _add_common(p)
    p.set_defaults(fn=_cmd_selftest)

    p = sub.add_parser("verify-manifest",
                       help="re-run a summary's manifest and diff")
    p.add_argument("summary", help="path to a previously written summary")
    p.add_argument("--workers", type=int,
                   default=int(os.environ.get("CONTACTQSD_WORKERS", "1")))
    p.set_defaults(fn=None)

    return ap


def _apply_config_file(args):
    if getattr(args, "config", None):
        with open(args.config) as fh:
            defaults = json.load(fh)
        known = vars(args)
        for key, value in defaults.items():
            if key not in known:
                raise UsageError(f"unknown config key {key!r}")
        # flags explicitly given on the command line win; detect by re-parsing
        # against a sentinel is overkill here, so config only fills values
        # still at their parser defaults
        parser_defaults = vars(build_parser().parse_args(
            [args.command] if args.command != "verify-manifest" else
            ["verify-manifest", args.summary]
        ))
        for key, value in defaults.items():
            if known.get(key) == parser_defaults.get(key):
                setattr(args, key, value)
    return args


def _run_manifest(manifest, workers):
    """Rebuild argv from an embedded manifest and execute it."""
    command = manifest["command"]
    params = manifest["params"]
    argv = [command]
    rename = {"lambda": "--lambda", "ref_W": "--ref-W", "W_list": "--W-list"}
    for key, value in params.items():
        if value is None:
            continue
        flag = rename.get(key, "--" + key.replace("_", "-"))
        if isinstance(value, bool):
            if value:
                argv.append(flag)
        elif isinstance(value, list):
            argv.extend([flag, ",".join(str(v) for v in value)])
        else:
            argv.extend([flag, str(value)])
    argv.extend(["--workers", str(workers)])
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.fn(args)


def main(argv=None):
    t_started = time.monotonic()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify-manifest":
            with open(args.summary) as fh:
                previous = json.load(fh)
            fresh = _run_manifest(previous["manifest"], args.workers)
            if fresh == previous:
                sys.stdout.write("manifest verified: summaries identical\n")
                return 0
            raise NumericalError("re-run summary differs from the recorded one")
        args = _apply_config_file(args)
        summary = args.fn(args)
        _write_outputs(args, summary, t_started)
        return 0
    except UsageError as exc:
        sys.stderr.write(_json_dumps({"error": "usage", "message": str(exc)}))
        return 2
    except (DegenerateSampleError, InsufficientDataError, NumericalError) as exc:
        sys.stderr.write(_json_dumps({"error": "numerical", "message": str(exc)}))
        return 3


if __name__ == "__main__":
    sys.exit(main())
