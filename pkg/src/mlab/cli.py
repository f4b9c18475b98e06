"""Command-line front end.

Verbs: ``run``, ``sweep``, ``verify`` and ``factorize``. Exit codes: 0 on
success, 2 on invalid input, 3 on analysis failure, 4 on a violated bound
in ``verify``. Failures print one JSON object on standard error.
"""

import argparse
from concurrent.futures import ThreadPoolExecutor
import csv
from dataclasses import replace
import io
import json
import os
from pathlib import Path
import sys
import tempfile

import numpy as np
import pydantic

from . import oracle, readout_opt, runner
from .core import DEFAULT_TOL
from .errors import AnalysisError, MlabError, ValidationError
from .interaction import gram
from .scenario import GramInput, Scenario, SuiteConfigModel, SweepSpec

EXIT_OK, EXIT_INVALID, EXIT_ANALYSIS, EXIT_VIOLATION = 0, 2, 3, 4

BUNDLED = Path(__file__).parent / "scenarios"


class CliError(Exception):
    def __init__(self, code, payload):
        super().__init__(payload.get("message", ""))
        self.code = code
        self.payload = payload


def resolve_input(name):
    """A file path, or the name of a bundled scenario such as ``steering-demo``."""
    p = Path(name)
    if p.exists():
        return p
    bundled = BUNDLED / (name if name.endswith(".json") else f"{name}.json")
    if bundled.exists():
        return bundled
    raise CliError(EXIT_INVALID, {"error": "FileNotFound", "message": f"no such file: {name}",
                                  "path": str(name)})


def load_json(name):
    path = resolve_input(name)
    text = path.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_INVALID, {"error": "ParseError", "message": exc.msg,
                                      "path": str(path), "line": exc.lineno,
                                      "column": exc.colno}) from None


def load_model(model, name):
    raw = load_json(name)
    try:
        return model.model_validate(raw), raw
    except pydantic.ValidationError as exc:
        raise CliError(EXIT_INVALID, {
            "error": "ValidationError",
            "message": f"invalid {model.__name__}",
            "path": str(name),
            "errors": [{"loc": list(e["loc"]), "msg": e["msg"]} for e in exc.errors()],
        }) from None


def format_float(x):
    if x is None or x != x:
        return ""
    return format(float(x), ".17g")


def atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def tolerances(args):
    if args.tol is None:
        return DEFAULT_TOL
    return replace(DEFAULT_TOL, optimization=args.tol)


def threads():
    try:
        return max(1, int(os.environ.get("MLAB_THREADS", "")))
    except ValueError:
        return os.cpu_count() or 1


def say(args, msg):
    if not args.quiet:
        print(msg)


def cmd_run(args):
    scenario, _ = load_model(Scenario, args.scenario)
    files, rows = runner.run_scenario(scenario, args.seed, tolerances(args))
    out = Path(args.out or "out")
    texts = {f"{name}.json": dump_json(payload) for name, payload in files.items()}
    if files:
        texts["pairs.csv"] = csv_text(["analysis", "readout", "a1_label", "a2_label", "value"],
                                      rows)
    manifest = {"scenario": scenario.name, "analyses": list(scenario.analyses),
                "files": sorted(texts)}
    texts["manifest.json"] = dump_json(manifest)
    for name, text in texts.items():
        atomic_write(out / name, text)
    say(args, f"wrote {len(texts)} files to {out}")
    if "steering" in files:
        for rep in files["steering"]["reports"]:
            say(args, "steering pair {pair}: R_r={resolutionR:.10f} Dirr_c={irreversibleC:.3e} "
                      "violation={violation}".format(**rep))
    return EXIT_OK


def cmd_sweep(args):
    _, raw = load_model(Scenario, args.scenario)
    sweep, _ = load_model(SweepSpec, args.sweep)
    try:
        runner.set_path(raw, sweep.parameter, sweep.values[0])
    except (KeyError, IndexError, ValueError, TypeError):
        raise CliError(EXIT_INVALID, {"error": "ValidationError",
                                      "message": f"parameter {sweep.parameter!r} not found "
                                                 "in scenario"}) from None
    tol = tolerances(args)

    def point(v):
        try:
            return runner.sweep_point(raw, sweep, v, args.seed, tol)
        except pydantic.ValidationError as exc:
            raise CliError(EXIT_INVALID, {
                "error": "ValidationError", "message": "scenario invalid at sweep value",
                "value": v,
                "errors": [{"loc": list(e["loc"]), "msg": e["msg"]} for e in exc.errors()],
            }) from None

    with ThreadPoolExecutor(max_workers=threads()) as pool:
        rows = list(pool.map(point, sweep.values))
    column = sweep.column or sweep.parameter.split(".")[-1]
    header = [column] + [o.column for o in sweep.outputs]
    out = args.out or args.out_csv or "sweep.csv"
    atomic_write(out, csv_text(header, rows))
    say(args, f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def cmd_verify(args):
    if args.config:
        model, _ = load_model(SuiteConfigModel, args.config)
    else:
        model = SuiteConfigModel()
    if args.seed is not None:
        model = model.model_copy(update={"seed": args.seed})
    cfg = oracle.RandomSuiteConfig(model.seed, model.trials, tuple(model.n_range),
                                   tuple(model.d_range), model.haar_samples)
    bound = oracle.sweep_bound_check(cfg, raise_on_violation=False)
    suite = oracle.invariant_suite(cfg)
    report = {"boundCheck": bound, "invariants": suite,
              "passed": bool(bound["passed"] and suite["passed"])}
    if args.out:
        atomic_write(args.out, dump_json(report))
    say(args, f"bound check: max(R - D) = {bound['max_r_minus_d']:.3e} "
              f"({'pass' if bound['passed'] else 'FAIL'})")
    for key, c in suite["checks"].items():
        say(args, f"{key}: worst {c['worst']:.3e} limit {c['limit']:.0e} "
                  f"({'pass' if c['passed'] else 'FAIL'})")
    if not report["passed"]:
        raise CliError(EXIT_VIOLATION, {"error": "BoundViolated",
                                        "message": "invariant suite found a violation",
                                        "report": report})
    return EXIT_OK


def cmd_factorize(args):
    raw = load_json(args.input)
    if isinstance(raw, dict) and "interaction" in raw:
        scenario, _ = load_model(Scenario, args.input)
        g = gram(runner.build_interaction(scenario.interaction)).g
    else:
        model, _ = load_model(GramInput, args.input)
        g = np.array(model.gram)
    fact = readout_opt.cp_factorize(g, args.max_outcomes, args.restarts,
                                    tolerances(args).optimization,
                                    0 if args.seed is None else args.seed, args.method)
    text = dump_json(fact.to_dict())
    if args.out:
        atomic_write(args.out, text)
        say(args, f"residual {fact.residual:.3e}; wrote {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="seed for random readouts "
                        "and factorization restarts")
    common.add_argument("--tol", type=float, default=None,
                        help="factorization residual tolerance (default 1e-8)")
    common.add_argument("--out", default=None, help="output directory or file")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")

    parser = argparse.ArgumentParser(prog="mlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("run", parents=[common], help="run the analyses of a scenario")
    p.add_argument("scenario", help="scenario JSON file or bundled scenario name")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", parents=[common], help="sweep one scenario parameter")
    p.add_argument("scenario")
    p.add_argument("sweep", help="sweep JSON file or bundled name")
    p.add_argument("out_csv", nargs="?", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", parents=[common], help="run the randomized invariant suite")
    p.add_argument("config", nargs="?", default=None, help="suite config JSON")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("factorize", parents=[common],
                       help="nonnegative factorization of a Gram matrix")
    p.add_argument("input", help="JSON with a 'gram' matrix, or a scenario")
    p.add_argument("--max-outcomes", type=int, default=None)
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--method", choices=sorted(readout_opt.METHODS), default="alternating")
    p.set_defaults(func=cmd_factorize)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.verb in ("run", "sweep") and args.seed is None:
        args.seed = 0
    try:
        return args.func(args)
    except CliError as exc:
        sys.stderr.write(json.dumps(exc.payload) + "\n")
        return exc.code
    except ValidationError as exc:
        sys.stderr.write(json.dumps(exc.to_dict()) + "\n")
        return EXIT_INVALID
    except (AnalysisError, MlabError) as exc:
        sys.stderr.write(json.dumps(exc.to_dict()) + "\n")
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
