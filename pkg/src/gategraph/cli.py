"""Command-line front end: ``gategraph compile|spectrum|verify|reduce|classify``.

Every command writes a run manifest (inputs with sha256 digests, tolerances,
seed, outputs, wall time). Reports themselves carry no timings, so equal
inputs and seeds give byte-identical report files.

Exit codes: 0 pass, 1 assertion failure, 2 input error, 3 solver or budget failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import certificates, diagram, element, graph, linalg, reductions, sectors, transforms
from .errors import ComputationError, InputError

EXIT_OK, EXIT_ASSERT, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3


def _clean(obj):
    """Make a value strict-JSON safe: non-finite floats become null, numpy scalars become Python."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class Run:
    """Collects manifest fields while a command executes."""

    def __init__(self, command: str, args, argv=None):
        self.command = command
        self.argv = list(sys.argv[1:] if argv is None else argv)
        self.args = args
        self.inputs = {}
        self.outputs = []
        self.tolerances = {}
        self.seed = getattr(args, "seed", None)
        self.start = time.perf_counter()

    def input(self, path):
        path = Path(path)
        if not path.exists():
            raise InputError(f"input file not found: {path}")
        self.inputs[str(path)] = sha256(path)
        return path

    def output(self, *paths):
        self.outputs.extend(str(p) for p in paths)

    def write_report(self, report: dict, out):
        text = dumps(report)
        if out:
            Path(out).write_text(text)
            self.output(out)
        else:
            sys.stdout.write(text)

    def manifest(self, status: str) -> dict:
        return {
            "command": self.command,
            "argv": self.argv,
            "inputs": self.inputs,
            "tolerances": self.tolerances,
            "seed": self.seed,
            "outputs": [p for p in self.outputs if Path(p).exists()],
            "wall_time": time.perf_counter() - self.start,
            "dry_run": bool(getattr(self.args, "dry_run", False)),
            "status": status,
        }

    def manifest_path(self) -> Path:
        if self.args.manifest:
            return Path(self.args.manifest)
        if getattr(self.args, "out", None):
            return Path(self.args.out + ".manifest.json")
        if self.outputs:
            first = Path(self.outputs[0])
            return first.with_name(first.name + ".manifest.json")
        return Path(f"gategraph-{self.command}.manifest.json")

    def finish(self, status: str):
        path = self.manifest_path()
        payload = self.manifest(status)
        path.write_text(dumps(payload))


def resolve_element(source: str, run: Run | None = None, asset_dir=None) -> element.ElementGraph:
    """``mini``, ``g0`` (looked up in the asset directory) or a path to an element file."""
    if source == "mini":
        return element.mini_double_element()
    if source == "g0":
        path = element.find_asset(asset_dir)
        if path is None:
            where = asset_dir or os.environ.get(element.ASSET_ENV) or "<unset>"
            raise InputError(f"{element.ASSET_NAME} not found in asset directory {where} "
                             f"(set ${element.ASSET_ENV} or --asset-dir)")
    else:
        path = Path(source)
    if run is not None:
        run.input(path)
    return element.load_element(path)


# commands ----------------------------------------------------------------------


def cmd_compile(args, run: Run) -> int:
    elem = resolve_element(args.element, run, args.asset_dir)
    d = diagram.read_diagram(run.input(args.diagram), element=elem)
    run.tolerances = {"tol": args.tol}
    if args.dry_run:
        return EXIT_OK
    G = diagram.compile_diagram(d, elem)
    run.output(*graph.write_graph(G, args.out))
    m = graph.mu(G)
    summary = {
        "num_vertices": G.num_vertices,
        "mu": m,
        "ground_energy": elem.ground_energy,
        "e1_gate_graph": abs(m - elem.ground_energy) <= args.tol,
        "element": elem.source.value,
        "R": d.R,
    }
    sys.stdout.write(dumps(summary))
    return EXIT_OK


def cmd_spectrum(args, run: Run) -> int:
    g = graph.read_graph(run.input(args.graph))
    run.tolerances = {"tol": args.tol}
    if not 0 <= args.N <= g.num_vertices:
        raise InputError(f"N = {args.N} outside 0..{g.num_vertices}")
    if args.dry_run:
        return EXIT_OK
    m = graph.mu(g)
    if args.sector == "xy":
        op = sectors.xy_sector(g, args.N)
    else:
        op = sectors.bose_hubbard(g, args.N)
    if op.dim == 0:
        raise InputError("empty sector")
    tol = args.tol if args.tol is not None else linalg.default_tol(op.to_sparse())
    run.tolerances["tol"] = tol
    value = op.lowest(tol)
    report = {"mu": m, "basis_dim": op.dim, "converged": True, "sector": args.sector, "N": args.N, "tol": tol}
    if args.sector == "xy":
        report["theta"] = value
    else:
        report["lambda1"] = value - args.N * m
    run.write_report(report, args.out)
    return EXIT_OK


def _hardcore_report(graphs: dict, N: int, tol: float) -> dict:
    rows = {}
    ok = True
    for name, g in graphs.items():
        if N > g.num_vertices:
            continue
        diff = sectors.hardcore_restriction(g, N).to_sparse() - sectors.xy_sector(g, N).to_sparse()
        err = float(abs(diff).max()) if diff.nnz else 0.0
        rows[name] = {"K": g.num_vertices, "dim": sectors.HammingBasis(g.num_vertices, N).dim,
                      "max_abs_diff": err, "pass": err <= tol}
        ok &= err <= tol
    return {"suite": "hardcore", "N": N, "tolerance": tol, "graphs": rows, "pass": bool(ok)}


def cmd_verify(args, run: Run) -> int:
    run.tolerances = {"tol": args.tol, "solver_tol": args.solver_tol, "angle_tol": args.angle_tol,
                      "identity_tol": args.identity_tol, "slack": args.slack}
    if args.suite == "certificates":
        if args.dry_run:
            return EXIT_OK
        report = certificates.certificate_suite(args.trials, args.seed, args.max_dim, args.slack)
    else:
        if args.diagram is None:
            raise InputError(f"suite {args.suite} needs a diagram")
        elem = resolve_element(args.element, run, args.asset_dir)
        d = diagram.read_diagram(run.input(args.diagram), element=elem)
        if args.dry_run:
            return EXIT_OK
        if args.suite == "section4":
            report = transforms.verify_section4(d, elem, args.N, args.tol, solver_tol=args.solver_tol,
                                                angle_tol=args.angle_tol, identity_tol=args.identity_tol,
                                                n_pairs=args.trials, seed=args.seed)
        else:
            G, _, sl, nsl = transforms.pipeline(d, elem)
            report = _hardcore_report({"G": G, "G_SL": sl.result, "G_NSL": nsl}, args.N, args.identity_tol)
    run.write_report(report, args.out)
    return EXIT_OK if report["pass"] else EXIT_ASSERT


def _diagram_instance(payload: dict, base: Path, run: Run, asset_dir):
    try:
        dpath = Path(payload["diagram"])
        source = payload.get("element", "mini")
        N, T, alpha = int(payload["N"]), int(payload["T"]), int(payload.get("alpha", 1))
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"malformed diagram-backed instance: {exc}") from exc
    if not dpath.is_absolute():
        dpath = base / dpath
    if source not in ("mini", "g0") and not Path(source).is_absolute():
        source = str(base / source)
    elem = resolve_element(source, run, asset_dir)
    d = diagram.read_diagram(run.input(dpath), element=elem)
    return d, elem, N, T, alpha


def cmd_reduce(args, run: Run) -> int:
    path = run.input(args.instance)
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"cannot parse instance JSON {path}: {exc}") from exc
    run.tolerances = {"tol": args.tol, "mu_tol": args.mu_tol}
    out = Path(args.out)
    graph_out = out.with_name(out.stem + ".graph.mtx")
    if args.target == "xy":
        inst = reductions.instance_from_json(payload, path.parent)
        if args.dry_run:
            return EXIT_OK
        result = reductions.reduce_bh_to_xy(inst, args.mu_tol)
    else:
        if "diagram" not in payload:
            raise InputError("--target simple needs a diagram-backed instance with 'diagram' and 'element'")
        d, elem, N, T, alpha = _diagram_instance(payload, path.parent, run, args.asset_dir)
        if args.dry_run:
            return EXIT_OK
        result = reductions.reduce_to_simple(d, elem, N, T, alpha, args.tol)
        if not graph.is_simple(result.graph):
            raise ComputationError("reduced graph is not simple")
        result.provenance["is_simple"] = True
    run.output(*graph.write_graph(result.graph, graph_out))
    run.write_report(reductions.instance_to_json(result, graph_out.name), out)
    return EXIT_OK


def cmd_classify(args, run: Run) -> int:
    inst = reductions.read_instance(run.input(args.instance))
    run.tolerances = {"tol": args.tol}
    if args.dry_run:
        return EXIT_OK
    if isinstance(inst, reductions.FFBHInstance):
        verdict = reductions.classify_ffbh(inst, args.tol)
    else:
        verdict = reductions.classify_xy(inst, args.tol)
    run.write_report(verdict.to_dict(), args.out)
    return EXIT_OK


# parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dry-run", action="store_true", help="validate inputs only")
    common.add_argument("--manifest", help="run manifest path (default: next to the first output)")
    common.add_argument("--asset-dir", default=None,
                        help=f"directory holding {element.ASSET_NAME} (default ${element.ASSET_ENV})")

    p = argparse.ArgumentParser(prog="gategraph", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", parents=[common], help="compile a gate diagram to a graph")
    c.add_argument("diagram")
    c.add_argument("--element", default="mini", help="mini, g0, or a path to an element .mtx")
    c.add_argument("--out", required=True)
    c.add_argument("--tol", type=float, default=1e-9)
    c.set_defaults(func=cmd_compile)

    s = sub.add_parser("spectrum", parents=[common], help="ground energy in a fixed particle sector")
    s.add_argument("graph")
    s.add_argument("--sector", choices=("xy", "bh"), required=True)
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--tol", type=float, default=None)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_spectrum)

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("diagram", nargs="?")
    v.add_argument("--element", default="mini")
    v.add_argument("--suite", choices=("section4", "certificates", "hardcore"), default="section4")
    v.add_argument("--N", type=int, default=1)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--trials", type=int, default=None,
                   help="random trials (certificates: PSD pairs, default 200; section4: state pairs, default 5)")
    v.add_argument("--max-dim", type=int, default=40)
    v.add_argument("--tol", type=float, default=1e-9)
    v.add_argument("--solver-tol", type=float, default=1e-10)
    v.add_argument("--angle-tol", type=float, default=1e-8)
    v.add_argument("--identity-tol", type=float, default=1e-10)
    v.add_argument("--slack", type=float, default=1e-9)
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("reduce", parents=[common], help="map an instance to the XY or simple-graph problem")
    r.add_argument("instance")
    r.add_argument("--target", choices=("xy", "simple"), required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--tol", type=float, default=1e-9)
    r.add_argument("--mu-tol", type=float, default=1e-10)
    r.set_defaults(func=cmd_reduce)

    k = sub.add_parser("classify", parents=[common], help="decide a promise instance numerically")
    k.add_argument("instance")
    k.add_argument("--tol", type=float, default=None, help="decision tolerance (default min(1e-9, gap/4))")
    k.add_argument("--out", default=None)
    k.set_defaults(func=cmd_classify)
    return p


def _error_payload(exc: Exception, category: str) -> dict:
    out = {"error": type(exc).__name__, "category": category, "message": str(exc)}
    diag = getattr(exc, "diagnostics", None)
    if diag is not None:
        out["diagnostics"] = diag if isinstance(diag, dict) else getattr(diag, "__dict__", str(diag))
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify" and args.trials is None:
        args.trials = 200 if args.suite == "certificates" else 5
    run = Run(args.command, args, argv)
    status, code = "error", EXIT_INPUT
    try:
        code = args.func(args, run)
        status = "pass" if code == EXIT_OK else "fail"
    except InputError as exc:
        sys.stderr.write(dumps(_error_payload(exc, "input")))
        code = EXIT_INPUT
    except ComputationError as exc:
        sys.stderr.write(dumps(_error_payload(exc, "computation")))
        code = EXIT_SOLVER
    try:
        run.finish(status)
    except OSError as exc:
        sys.stderr.write(dumps({"error": "ManifestWriteFailed", "category": "io", "message": str(exc)}))
    return code


if __name__ == "__main__":
    sys.exit(main())
