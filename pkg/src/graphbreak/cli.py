"""Command-line front end.

Subcommands: construct, criterion, herman, threshold, simulate, approx.
Reports are JSON (17 significant digits), point clouds are CSV. Options can
also come from a ``key = value`` file given by ``--config``; keys under a
``[subcommand]`` header apply to that subcommand only and command-line flags
win over the file. Exit codes: 0 success, 2 invalid input, 3 numerical
failure. Errors are written to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import sys
from pathlib import Path

import numpy as np
from scipy import fft as sfft

from . import jsonio
from .approx import jackson_approximate
from .attractor import GOLDEN, MapSpec, default_beta, graph_test, graph_transform, iterate_cloud, standard_map
from .errors import BadConfig, GraphbreakError, MaxIterExceeded, OutOfRange, UnknownCommand
from .herman import (derivative_extrema, derivative_identity_residual, destruction_verdict_1d,
                     destruction_verdict_dd, herman_residual_1d, herman_residual_dd, standard_map_threshold)
from .maps import CandidateGraph, MapParams1D, MapParamsDD
from .perturb import BumpSpec, PerturbationBundle, build_model_bump, construct_bundle
from .trigpoly import GridFn

COMMANDS = ("construct", "criterion", "herman", "threshold", "simulate", "approx")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        if "invalid choice" in message and "command" in message:
            raise UnknownCommand(message)
        raise BadConfig(message)


def _positive(kind):
    def conv(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return conv


def _vector(text: str) -> list[float]:
    return [float(v) for v in str(text).split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value file")
    common.add_argument("-o", "--output", help="JSON output path (stdout when omitted)")
    common.add_argument("--seed", type=int, default=0)

    parser = _Parser(prog="graphbreak", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="command", parser_class=_Parser)

    p = sub.add_parser("construct", parents=[common], help="build a perturbation bundle")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--n", type=_positive(int), required=True)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--dim", type=_positive(int), default=1)
    p.add_argument("--resolution", type=_positive(int), help="model bump grid resolution per axis")
    p.add_argument("--csv", help="write potential and derivative samples here")
    p.add_argument("--csv-resolution", type=_positive(int), default=1024,
                   help="samples per axis, raised to 2*degree+1 when lower")

    p = sub.add_parser("criterion", parents=[common], help="evaluate the destruction criterion")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--m", type=float)
    p.add_argument("--M", dest="M", type=float)
    p.add_argument("--dim", type=_positive(int), default=1)
    p.add_argument("--mode", choices=["ExactDD", "PaperAsymptoticDD"], default="ExactDD")
    p.add_argument("--input", help="bundle or criterion JSON to read (lambda, m, M) from")

    p = sub.add_parser("herman", parents=[common], help="invariance residuals of a candidate graph")
    p.add_argument("--bundle", help="perturbation bundle JSON")
    p.add_argument("--map", choices=["std", "bundle", "none"], default=None)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--k", type=float, default=0.0)
    p.add_argument("--alpha1", type=float)
    p.add_argument("--alpha2", type=float)
    p.add_argument("--beta", type=_vector)
    p.add_argument("--graph", help="candidate graph JSON (default: unperturbed invariant graph)")
    p.add_argument("--resolution", type=_positive(int), default=256)

    p = sub.add_parser("threshold", parents=[common], help="standard-map threshold table")
    p.add_argument("--lambda-grid", default="0.1:0.9:0.1", help="start:stop:step, inclusive")
    p.add_argument("--lambda", dest="lam", type=float, help="single value instead of a grid")

    p = sub.add_parser("simulate", parents=[common], help="orbit cloud, graph test and graph transform")
    p.add_argument("--map", choices=["std", "bundle"], default="std")
    p.add_argument("--bundle")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--k", type=float, default=0.0)
    p.add_argument("--alpha1", type=float)
    p.add_argument("--alpha2", type=float)
    p.add_argument("--beta", type=_vector)
    p.add_argument("--transient", type=_positive(int), default=500)
    p.add_argument("--keep", type=_positive(int), default=200)
    p.add_argument("--bins", type=_positive(int), default=512)
    p.add_argument("--tol-graph", type=_positive(float), default=1e-4)
    p.add_argument("--max-iter", type=_positive(int), default=200)
    p.add_argument("--tol", type=_positive(float), default=1e-12)
    p.add_argument("--csv", help="write the point cloud here")
    p.add_argument("--graph-out", help="write the last graph-transform iterate here")

    p = sub.add_parser("approx", parents=[common], help="Jackson approximation of a sampled function")
    p.add_argument("--function", choices=["expcos", "bump"], default="expcos")
    p.add_argument("--grid", help="JSON file with a list (or nested lists) of samples")
    p.add_argument("--N", dest="N", type=_positive(int), required=True)
    p.add_argument("--resolution", type=_positive(int), default=1024)
    p.add_argument("--n", type=_positive(int), default=8)
    p.add_argument("--dim", type=_positive(int), default=1)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--delta", type=_positive(float), default=1.0)
    p.add_argument("--norms", help="comma list k:value of C^k norms for the bound")
    return parser


def read_config(path: str, command: str) -> dict:
    """Flat ``key = value`` pairs; a ``[command]`` section overrides the global ones."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise BadConfig(f"cannot read config {path}: {exc}") from exc
    sections: dict[str, dict] = {"": {}}
    current = ""
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise BadConfig(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        sections[current][key.replace("-", "_")] = value
    unknown = set(sections) - {"", command} - set(COMMANDS)
    if unknown:
        raise BadConfig(f"unknown config sections {sorted(unknown)}")
    cfg = dict(sections[""])
    cfg.update(sections.get(command, {}))
    return cfg


def _config_path(argv: list[str]) -> str | None:
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def parse_args(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    path = _config_path(argv)
    command = argv[0] if argv and argv[0] in COMMANDS else None
    if path and command:
        cfg = read_config(path, command)
        sub = parser._subparsers._group_actions[0].choices[command]
        dests = {a.dest for a in sub._actions}
        alias = {"lambda": "lam"}
        defaults = {}
        for key, value in cfg.items():
            dest = alias.get(key, key)
            if dest not in dests or dest in ("help", "config"):
                raise BadConfig(f"unknown config key {key!r} for {command}")
            defaults[dest] = value
        for action in sub._actions:
            if action.dest in defaults:
                action.required = False
        sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _threads() -> int | None:
    value = os.environ.get("GRAPHBREAK_THREADS")
    if value is None:
        return None
    try:
        n = int(value)
    except ValueError:
        raise BadConfig(f"GRAPHBREAK_THREADS={value!r} is not an integer") from None
    if n < 1:
        raise BadConfig("GRAPHBREAK_THREADS must be >= 1")
    return n


def _emit(args, command: str, payload: dict, summary: str, out) -> None:
    doc = {"command": command, **payload,
           "generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")}
    if args.output:
        jsonio.dump(doc, args.output)
        print(summary, file=out)
    else:
        print(jsonio.dumps(doc), file=out)


def _load_bundle(path: str) -> PerturbationBundle:
    doc = jsonio.load(path)
    doc = doc.get("bundle", doc)
    if doc.get("kind") != "perturbation_bundle" and "potential" not in doc:
        raise BadConfig(f"{path} is not a perturbation bundle")
    return PerturbationBundle.from_json(doc)


def _check_lambda(lam) -> float:
    if lam is None:
        raise BadConfig("--lambda is required")
    if not 0.0 < lam < 1.0:
        raise OutOfRange(f"lambda={lam} outside (0, 1)")
    return lam


# ---------------------------------------------------------------------- commands
def cmd_construct(args, out) -> None:
    lam = _check_lambda(args.lam)
    bundle = construct_bundle(lam, args.n, args.eps, args.dim, args.resolution)
    if args.csv:
        _write_bundle_csv(bundle, args.csv, args.csv_resolution)
    ext = bundle.extrema
    summary = (f"construct: d={bundle.d} n={bundle.n} lambda={lam} delta={bundle.delta:.6f} "
               f"N={bundle.N_achieved} (theory {bundle.N_theoretical}) min={ext['min']:.12f} max={ext['max']:.6g}")
    _emit(args, "construct", {"bundle": bundle.to_json()}, summary, out)


def _write_bundle_csv(bundle: PerturbationBundle, path: str, resolution: int) -> None:
    R = max(resolution, 2 * bundle.derivative_poly.degree + 1)
    pot = bundle.potential.sample(R).values.ravel()
    der = bundle.derivative_poly.sample(R).values.ravel()
    axis = np.arange(R) / R
    grids = np.meshgrid(*([axis] * bundle.d), indexing="ij")
    cols = [g.ravel() for g in grids] + [pot, der]
    header = ",".join([f"x{i + 1}" for i in range(bundle.d)] + ["potential", "derivative"])
    np.savetxt(path, np.stack(cols, axis=1), delimiter=",", header=header, comments="", fmt="%.17g")


def cmd_criterion(args, out) -> None:
    lam, m, M, d = args.lam, args.m, args.M, args.dim
    if args.input:
        doc = jsonio.load(args.input)
        if "bundle" in doc:
            doc = doc["bundle"]
        if doc.get("kind") == "perturbation_bundle":
            bundle = PerturbationBundle.from_json(doc)
            ext = derivative_extrema(bundle.potential)
            m, M, d = ext.m, ext.M, bundle.d
            lam = bundle.lam if lam is None else lam
        elif "report" in doc or "case2_rhs" in doc:
            rep = doc.get("report", doc)
            lam = rep["lambda"] if lam is None else lam
            m, M = rep["m"], rep["M"]
            d = 1 if rep.get("mode") == "Exact1D" else max(d, 2)
        else:
            raise BadConfig(f"{args.input} is neither a bundle nor a criterion report")
    if lam is None or m is None or M is None:
        raise BadConfig("criterion needs --lambda, --m and --M, or --input")
    _check_lambda(lam)
    report = destruction_verdict_1d(lam, m, M) if d == 1 else destruction_verdict_dd(lam, m, M, args.mode)
    summary = f"criterion: {report.mode} lambda={lam} m={m:.12g} M={M:.12g} -> {report.verdict}"
    _emit(args, "criterion", {"dim": d, "report": report.to_json()}, summary, out)


def _map_from_args(args, bundle: PerturbationBundle | None) -> MapSpec:
    kind = args.map or ("bundle" if bundle is not None else "std")
    if kind == "bundle":
        if bundle is None:
            raise BadConfig("--bundle is required for --map bundle")
        lam = _check_lambda(bundle.lam if args.lam is None else args.lam)
        if bundle.d == 1:
            a1 = (1 - lam) * GOLDEN if args.alpha1 is None else args.alpha1
            a2 = (1 - lam) * GOLDEN if args.alpha2 is None else args.alpha2
            return MapSpec(MapParams1D(lam, a1, a2), bundle.potential, f"bundle(n={bundle.n})")
        beta = default_beta(lam, bundle.d) if args.beta is None else np.asarray(args.beta)
        return MapSpec(MapParamsDD(lam, beta), bundle.potential, f"bundle(n={bundle.n}, d={bundle.d})")
    lam = _check_lambda(args.lam)
    alpha = None
    if args.alpha1 is not None or args.alpha2 is not None:
        alpha = (args.alpha1 or 0.0, args.alpha2 or 0.0)
    if kind == "none":
        return standard_map(lam, 0.0, alpha)
    return standard_map(lam, args.k, alpha)


def cmd_herman(args, out) -> None:
    bundle = _load_bundle(args.bundle) if args.bundle else None
    spec = _map_from_args(args, bundle)
    if args.graph:
        doc = jsonio.load(args.graph)
        graph = CandidateGraph.from_json(doc.get("graph", doc))
    else:
        level = spec.invariant_level
        graph = CandidateGraph.constant(level[0] if spec.d == 1 else level, args.resolution, spec.d)
    payload = {"map": spec.to_json(), "graph_resolution": graph.resolution,
               "graph_source": args.graph or "unperturbed invariant graph"}
    if spec.d == 1:
        res = herman_residual_1d(spec.params, spec.perturbation, graph)
        payload["derivative_identity"] = derivative_identity_residual(spec.params, spec.perturbation, graph)
    else:
        res = herman_residual_dd(spec.params, spec.perturbation, graph)
    payload["residuals"] = res.to_json()
    summary = f"herman: formula residual {res.formula:.3e}, invariance residual {res.invariance:.3e}"
    _emit(args, "herman", payload, summary, out)


def _lambda_grid(text: str) -> list[float]:
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise BadConfig(f"lambda grid {text!r} is not start:stop:step") from None
    if step <= 0 or start > stop:
        raise BadConfig(f"empty lambda grid {text!r}")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def cmd_threshold(args, out) -> None:
    lams = [args.lam] if args.lam is not None else _lambda_grid(args.lambda_grid)
    rows = [standard_map_threshold(lam).to_json() for lam in lams]
    lines = "\n".join(f"lambda={r['lambda']:.4g}  k0={r['k0']:.10f}" for r in rows)
    _emit(args, "threshold", {"rows": rows}, lines, out)


def cmd_simulate(args, out) -> None:
    bundle = _load_bundle(args.bundle) if args.bundle else None
    if args.map == "bundle" and bundle is None:
        raise BadConfig("--bundle is required for --map bundle")
    spec = _map_from_args(args, bundle if args.map == "bundle" else None)
    try:
        gt = graph_transform(spec, max_iter=args.max_iter, tol=args.tol)
        transform = gt.to_json()
        transform.pop("graph")
        fold = gt.fold_detected
        last_graph = gt.graph
    except MaxIterExceeded as exc:
        transform = {"status": "MaxIterExceeded", "message": str(exc)}
        fold, last_graph = False, None
    cloud = iterate_cloud(spec, transient=args.transient, keep=args.keep, seed=args.seed)
    report = graph_test(cloud, bins=args.bins, tol_graph=args.tol_graph, fold_detected=fold,
                        params=spec.to_json())
    if args.csv:
        cloud.to_csv(args.csv)
    if args.graph_out and last_graph is not None:
        jsonio.dump({"graph": last_graph.to_json()}, args.graph_out)
    summary = (f"simulate: {spec.label} lambda={spec.params.lam} verdict={report.verdict} "
               f"max_extent={report.max_extent:.3e} transform={transform['status']}")
    _emit(args, "simulate", {"report": report.to_json(), "graph_transform": transform}, summary, out)


def _parse_norms(text: str | None) -> dict[int, float] | None:
    if not text:
        return None
    try:
        return {int(k): float(v) for k, v in (item.split(":") for item in text.split(","))}
    except ValueError:
        raise BadConfig(f"norms {text!r} are not k:value pairs") from None


def cmd_approx(args, out) -> None:
    if args.grid:
        f = GridFn(np.asarray(jsonio.load(args.grid), dtype=float))
        source = args.grid
    elif args.function == "bump":
        f = build_model_bump(BumpSpec(args.n, args.dim, args.delta, args.eps), args.resolution)
        source = f"model bump n={args.n} d={args.dim}"
    else:
        x = np.arange(args.resolution) / args.resolution
        f = GridFn(np.exp(np.cos(2 * np.pi * x)) - float(np.exp(np.cos(2 * np.pi * x)).mean()))
        source = "exp(cos 2 pi x) minus its mean"
    _, report = jackson_approximate(f, args.N, _parse_norms(args.norms))
    summary = f"approx: N={report.N} m={report.m_per_axis} error={report.achieved_error:.3e}"
    _emit(args, "approx", {"source": source, "report": report.to_json()}, summary, out)


HANDLERS = {"construct": cmd_construct, "criterion": cmd_criterion, "herman": cmd_herman,
            "threshold": cmd_threshold, "simulate": cmd_simulate, "approx": cmd_approx}


def _fail(exc: Exception, code: int, err) -> int:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}), file=err)
    return code


def run(argv: list[str] | None = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        if argv and not argv[0].startswith("-") and argv[0] not in COMMANDS:
            raise UnknownCommand(f"unknown command {argv[0]!r}; expected one of {', '.join(COMMANDS)}")
        args = parse_args(argv)
        threads = _threads()
        if threads is None:
            HANDLERS[args.command](args, out)
        else:
            with sfft.set_workers(threads):
                HANDLERS[args.command](args, out)
    except GraphbreakError as exc:
        return _fail(exc, exc.exit_code, err)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        return _fail(BadConfig(f"{type(exc).__name__}: {exc}"), 2, err)
    return 0


def main() -> None:
    sys.exit(run())
