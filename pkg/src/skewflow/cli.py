"""Command-line entry point: ``skewflow <verb> ...``.

Exit status: 0 when every requested analysis ran, 1 when at least one
analysis produced an error block, 2 for invalid input.
"""

import argparse
import json
import sys

import yaml

from . import __version__, core, corpus, criteria, jobs
from .errors import SkewFlowError


def _params(pairs):
    out = {}
    for item in pairs or ():
        key, sep, val = item.partition("=")
        if not sep:
            raise SkewFlowError(f"--param expects key=value, got {item!r}")
        out[key] = yaml.safe_load(val)
    return out


def _load(args, analyses):
    """Job from a file, or a one-off job around ``--builtin``."""
    if getattr(args, "job", None):
        job = jobs.parse_job(args.job, strict=args.strict, seed=args.seed)
        if analyses is not None:
            job.analyses = [dict(a, name=f"{i:02d}_{a['type']}") for i, a in enumerate(analyses)]
        return job
    if not getattr(args, "builtin", None):
        raise SkewFlowError("give a job file or --builtin NAME")
    data = {"system": {"builtin": args.builtin, "params": _params(args.param)},
            "analyses": analyses}
    if args.seed is not None:
        data["seed"] = args.seed
    if getattr(args, "n_max", None):
        data["horizon"] = {"n_max": args.n_max}
    return jobs.job_from_dict(data, strict=args.strict)


def _apply_tolerance(job, args):
    if getattr(args, "tolerance", None) is not None:
        job.tolerances = dict(job.tolerances, axioms=args.tolerance)


def _finish(report, args, formats=("structured", "csv")):
    for name, verdict in report.to_dict()["summary"].items():
        print(f"{name}: {verdict}")
    if args.out:
        for path in jobs.emit(report, args.out, formats):
            print(f"wrote {path}", file=sys.stderr)
    return 1 if any(err is not None for _, _, err in report.results) else 0


def cmd_analyze(args):
    job = jobs.parse_job(args.job, strict=args.strict, seed=args.seed)
    _apply_tolerance(job, args)
    for w in job.warnings:
        print(f"warning: {w}", file=sys.stderr)
    report = jobs.run(job)
    if not args.out:
        json.dump(report.to_dict(), sys.stdout, indent=2, sort_keys=True)
        print()
        return 1 if any(err is not None for _, _, err in report.results) else 0
    return _finish(report, args)


def cmd_emit_csv(args):
    job = jobs.parse_job(args.job, strict=args.strict, seed=args.seed)
    _apply_tolerance(job, args)
    report = jobs.run(job)
    return _finish(report, args, formats=("csv",))


def cmd_check_axioms(args):
    analysis = {"type": "axioms", "grid": {"count": args.count, "t_max": args.t_max}}
    if args.integer:
        analysis["grid"]["integer"] = True
    job = _load(args, [analysis])
    _apply_tolerance(job, args)
    report = jobs.run(job)
    a, res, err = report.results[0]
    if err is None:
        print(f"cocycle residual {res.cocycle_residual:.3e}, "
              f"semiflow residual {res.semiflow_residual:.3e}, "
              f"identity residual {res.identity_residual:.3e} "
              f"(tolerance {res.tolerance:g})")
    return _finish(report, args)


def cmd_estimate(args):
    analysis = {"type": "estimate", "direction": args.direction,
                "search": [args.lo, args.hi], "tol": args.tol}
    job = _load(args, [analysis])
    report = jobs.run(job)
    a, res, err = report.results[0]
    if err is None:
        print(f"{args.direction} exponent: {res.value} ({res.status})")
    else:
        print(f"error: {err['message']}", file=sys.stderr)
    return _finish(report, args)


def cmd_list_builtins(args):
    for name in sorted(corpus.BUILTINS):
        doc = (corpus.BUILTINS[name].__doc__ or "").strip().splitlines()
        print(f"{name:14s} {doc[0] if doc else ''}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="skewflow", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"skewflow {__version__}")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, job_optional=False):
        if job_optional:
            sp.add_argument("job", nargs="?", help="YAML job file")
            sp.add_argument("--builtin", help="built-in fixture name (instead of a job file)")
            sp.add_argument("--param", action="append", metavar="KEY=VALUE",
                            help="builtin parameter, repeatable")
        else:
            sp.add_argument("job", help="YAML job file")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int, help="override the job seed")
        sp.add_argument("--tolerance", type=float, help="axiom residual tolerance")
        mode = sp.add_mutually_exclusive_group()
        mode.add_argument("--strict", dest="strict", action="store_true", default=True,
                          help="reject unknown keys (default)")
        mode.add_argument("--lenient", dest="strict", action="store_false",
                          help="warn about unknown keys and ignore them")

    sp = sub.add_parser("analyze", help="run every analysis of a job")
    common(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("emit-csv", help="run a job and write only the CSV tables")
    common(sp)
    sp.set_defaults(func=cmd_emit_csv)

    sp = sub.add_parser("check-axioms", help="verify identity and composition laws")
    common(sp, job_optional=True)
    sp.add_argument("--count", type=int, default=50, help="random triples (default 50)")
    sp.add_argument("--t-max", type=float, default=10.0)
    sp.add_argument("--integer", action="store_true", help="integer time triples")
    sp.set_defaults(func=cmd_check_axioms)

    sp = sub.add_parser("estimate", help="bisect for the sharp exponent")
    common(sp, job_optional=True)
    sp.add_argument("--direction", choices=("stable", "instable"), default="stable")
    sp.add_argument("--lo", type=float, default=1e-6)
    sp.add_argument("--hi", type=float, default=20.0)
    sp.add_argument("--tol", type=float, default=1e-4)
    sp.add_argument("--n-max", type=int, help="horizon length")
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("list-builtins", help="list the built-in fixtures")
    sp.set_defaults(func=cmd_list_builtins)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except jobs.JobError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SkewFlowError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
