"""The ``vp`` command line.

Exit status: 0 when every check passes, 1 when a check fails, 2 on bad
input (unparseable files, missing fields, failed preconditions).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

from . import functional as F
from . import perturb, products
from .bodies import Body, body_from_json, catalog
from .checks import BODY_CHECKS, CHECKS, grid_function, retolerance, run_check
from .duality import polar
from .errors import CapabilityError, InputError, PreconditionError
from .report import CheckReport
from .volume import polar_volume_sphere, volume, volume_mc

log = logging.getLogger("vp")

REPORT_VERSION = "vp-report-v1"
CSV_COLUMNS = ("name", "lhs", "rhs", "relation", "tolerance", "pass", "seed", "samples", "wall_ms")
EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


# ---------------------------------------------------------------------------
# references


def resolve_body(ref, base: Path = Path(".")) -> Body:
    """A body from a catalog name, a JSON file path or an inline JSON object."""
    if isinstance(ref, Body):
        return ref
    if isinstance(ref, dict):
        return body_from_json(ref)
    if not isinstance(ref, str):
        raise InputError(f"body reference must be a name, path or object, got {type(ref).__name__}")
    cat = catalog()
    if ref in cat:
        return cat[ref]
    path = base / ref
    if not path.exists():
        raise InputError(f"{path}: body file not found (and not a catalog name)")
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    try:
        return body_from_json(obj)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# reports


@dataclass
class Row:
    report: CheckReport
    wall_ms: float
    check: str = ""


def report_json(rows: list[Row]) -> str:
    """Deterministic JSON: no timings, sorted keys."""
    doc = {"format": REPORT_VERSION, "rows": [r.report.to_json() for r in rows]}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def report_meta(rows: list[Row]) -> str:
    doc = {"format": REPORT_VERSION, "created": datetime.now(timezone.utc).isoformat(),
           "wall_ms": [round(r.wall_ms, 3) for r in rows]}
    return json.dumps(doc, indent=2) + "\n"


def report_csv(rows: list[Row]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([REPORT_VERSION])
    w.writerow(CSV_COLUMNS)
    for r in rows:
        rep = r.report
        w.writerow([rep.name, repr(rep.lhs), repr(rep.rhs), rep.relation, repr(rep.tolerance),
                    "pass" if rep.passed else "fail", "" if rep.seed is None else rep.seed,
                    rep.samples, f"{r.wall_ms:.3f}"])
    return buf.getvalue()


def write_report(rows: list[Row], out: Optional[str], fmt: str) -> None:
    text = report_csv(rows) if fmt == "csv" else report_json(rows)
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.write_text(text)
    if fmt == "json":
        path.with_name(path.name.removesuffix(".json") + ".meta.json").write_text(report_meta(rows))


def _format(args, default: str = "json") -> str:
    """--format if given, else inferred from the --out suffix."""
    if getattr(args, "format", None):
        return args.format
    out = getattr(args, "out", None)
    return "csv" if out and out.endswith(".csv") else default


def timed(fn, *a, **kw) -> tuple[Any, float]:
    t0 = time.perf_counter()
    out = fn(*a, **kw)
    return out, 1000.0 * (time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# manifests


@dataclass
class ManifestEntry:
    check: str
    body: Optional[Body]
    params: dict
    seed: int


@dataclass
class RunManifest:
    checks: list[ManifestEntry]
    output: Optional[str] = None
    format: str = "json"


def _resolve_param_paths(params: dict, base: Path, where: str) -> dict:
    params = dict(params)
    if "grid" in params:
        path = base / params["grid"]
        if not path.exists():
            raise InputError(f"{where}.params.grid: file {path} not found")
        params["grid"] = str(path)
    if "other" in params:
        try:
            params["other"] = resolve_body(params["other"], base)
        except InputError as exc:
            raise InputError(f"{where}.params.other: {exc}") from exc
    return params


def load_manifest(path) -> RunManifest:
    """Parse and validate a manifest; every referenced file is read here, before any check runs."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"{path}: manifest not found")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    if not isinstance(doc, dict):
        raise InputError(f"{path}: manifest must be a JSON object")
    raw = doc.get("checks", [])
    if not isinstance(raw, list):
        raise InputError(f"{path}: field 'checks' must be a list")
    fmt = doc.get("format", "json")
    if fmt not in ("json", "csv"):
        raise InputError(f"{path}: field 'format' must be json or csv, got {fmt!r}")
    base = path.parent
    entries = []
    for i, item in enumerate(raw):
        where = f"{path}: checks[{i}]"
        if not isinstance(item, dict):
            raise InputError(f"{where}: entry must be an object")
        name = item.get("check")
        if name not in CHECKS:
            raise InputError(f"{where}.check: unknown check {name!r}")
        if "seed" not in item:
            raise InputError(f"{where}.seed: missing (seeds must be explicit)")
        if not isinstance(item["seed"], int) or isinstance(item["seed"], bool):
            raise InputError(f"{where}.seed: must be an integer")
        body = None
        if "body" in item:
            try:
                body = resolve_body(item["body"], base)
            except InputError as exc:
                raise InputError(f"{where}.body: {exc}") from exc
        elif name in BODY_CHECKS:
            raise InputError(f"{where}.body: missing (check {name!r} needs a body)")
        params = item.get("params", {})
        if not isinstance(params, dict):
            raise InputError(f"{where}.params: must be an object")
        entries.append(ManifestEntry(name, body, _resolve_param_paths(params, base, where), item["seed"]))
    out = doc.get("output")
    return RunManifest(entries, None if out is None else str(base / out), fmt)


def _run_entry(entry: ManifestEntry) -> list[Row]:
    t0 = time.perf_counter()
    reps = run_check(entry.check, entry.body, entry.params, entry.seed)
    if "tol" in entry.params:
        reps = [retolerance(r, float(entry.params["tol"])) for r in reps]
    ms = 1000.0 * (time.perf_counter() - t0) / max(len(reps), 1)
    return [Row(r, ms, entry.check) for r in reps]


def run_manifest(manifest: RunManifest, jobs: int = 1) -> list[Row]:
    """Run every entry; rows come back in manifest order regardless of ``jobs``."""
    if jobs <= 1:
        groups = [_run_entry(e) for e in manifest.checks]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            groups = list(pool.map(_run_entry, manifest.checks))
    return [row for g in groups for row in g]


# ---------------------------------------------------------------------------
# subcommands


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def cmd_body(args) -> int:
    K = resolve_body(args.input)
    if args.op == "polar":
        doc = polar(K).to_json()
        if args.out:
            Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
        else:
            _print_json(doc)
        return EXIT_OK
    return cmd_volume(args)


def cmd_volume(args) -> int:
    K = resolve_body(args.input)
    if args.method == "exact":
        _print_json({"value": volume(K), "std_error": 0.0, "samples": 0, "seed": None, "method": "exact"})
        return EXIT_OK
    if args.method == "mc":
        est = volume_mc(K, args.samples, args.seed, args.jobs)
    else:
        est = polar_volume_sphere(polar(K), args.samples, args.seed)
    _print_json({"value": est.value, "std_error": est.std_error, "samples": est.samples,
                 "seed": est.seed, "method": est.method})
    return EXIT_OK


def cmd_mahler(args) -> int:
    K = resolve_body(args.input)
    est = products.mahler_estimate(K, args.method, args.samples, args.seed)
    _print_json({"mahler": est.value, "std_error": est.std_error, "lower": products.mahler_lower(K.dim),
                 "method": est.method, "samples": est.samples, "seed": est.seed})
    return EXIT_OK


VERIFY_FLAGS = ("x", "p", "f", "a", "body_kind", "dim", "lattice_radius", "fn", "samples", "m", "extent",
                "method", "tree", "axis", "instance", "direction", "grid")


def cmd_verify(args) -> int:
    if args.check == "batch":
        if not args.manifest:
            raise InputError("verify batch: --manifest is required")
        return cmd_run(args)
    params = {k: getattr(args, k) for k in VERIFY_FLAGS if getattr(args, k) is not None}
    if "body_kind" in params:
        params["body"] = params.pop("body_kind")
    if args.other is not None:
        params["other"] = resolve_body(args.other)
    body = resolve_body(args.input) if args.input else None
    reps, ms = timed(run_check, args.check, body, params, args.seed)
    if args.tol is not None:
        reps = [retolerance(r, args.tol) for r in reps]
    rows = [Row(r, ms / max(len(reps), 1), args.check) for r in reps]
    for r in rows:
        print(r.report.line(), file=sys.stderr)
    write_report(rows, args.out, _format(args))
    return EXIT_OK if all(r.report.passed for r in rows) else EXIT_FAIL


def cmd_functional(args) -> int:
    body = resolve_body(args.body) if args.body else None
    params = {"fn": args.fn, "dim": args.dim, "extent": args.extent, "m": args.m}
    if args.grid:
        params["grid"] = args.grid
    if args.a is not None:
        params["a"] = args.a
    f = grid_function(params, body)
    if args.op == "polar":
        res = F.polar_function(f)
        if args.out:
            res.polar.save(args.out)
        _print_json({"m": f.m, "h": f.h, "sup_error_vs_analytic": res.sup_error_vs_analytic,
                     "tag": res.polar.tag, "out": args.out})
        return EXIT_OK
    check = {"santalo": F.functional_santalo_check, "ball": F.functional_ball_check,
             "involution": F.involution_check}[args.op]
    rep, ms = timed(check, f)
    print(rep.line(), file=sys.stderr)
    write_report([Row(rep, ms, f"functional-{args.op}")], None, "json")
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_bm(args) -> int:
    K, L = resolve_body(args.a), resolve_body(args.b)
    cert = perturb.bm_distance_upper(K, L, args.restarts, args.iterations, args.seed)
    rep = perturb.verify_certificate(cert, K, L, seed=args.seed + 1)
    _print_json({**cert.to_json(), "verified": rep.passed})
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_stability(args) -> int:
    eps = [float(e) for e in args.eps.split(",")]
    res = perturb.stability_experiment(args.dim, eps, args.trials, args.seed)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(res.header)
    for r in res.rows:
        w.writerow([r[k] if r[k] is not None else "" for k in res.header])
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    print(res.report.line(), file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK if res.report.passed else EXIT_FAIL


def cmd_paper_suite(args) -> int:
    from .suite import paper_suite

    only = None if not args.only else {int(c) for c in args.only.split(",")}
    t0 = time.perf_counter()
    crits = paper_suite(args.seed, args.quick, only)
    rows = []
    for c in crits:
        print(f"{'PASS' if c.passed else 'FAIL'}  criterion {c.number:2d}  {c.title}")
        for r in c.reports:
            print(f"      {r.line()}")
            rows.append(Row(r, 0.0, f"criterion-{c.number}"))
    print(f"{sum(c.passed for c in crits)}/{len(crits)} criteria pass "
          f"({time.perf_counter() - t0:.1f} s, seed {args.seed}{', quick' if args.quick else ''})")
    if args.out:
        write_report(rows, args.out, _format(args))
    return EXIT_OK if all(c.passed for c in crits) else EXIT_FAIL


def cmd_run(args) -> int:
    manifest = load_manifest(args.manifest)
    if not manifest.checks:
        log.warning("%s: manifest has no checks", args.manifest)
    rows = run_manifest(manifest, args.jobs)
    for r in rows:
        print(r.report.line())
    out = args.out or manifest.output
    fmt = args.format or (_format(args) if args.out else manifest.format)
    if out is not None or fmt == "csv":
        write_report(rows, out, fmt)
    return EXIT_OK if all(r.report.passed for r in rows) else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vp", description="Convex bodies, polars, volumes and volume-product checks.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def seeded(q, samples=200_000):
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--samples", type=int, default=samples)

    def reporting(q):
        q.add_argument("--out")
        q.add_argument("--format", choices=("json", "csv"))

    b = sub.add_parser("body", help="polar or volume of a body")
    b.add_argument("op", choices=("polar", "volume"))
    b.add_argument("--in", dest="input", required=True, help="catalog name or body JSON file")
    b.add_argument("--method", choices=("exact", "mc", "sphere"), default="exact")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out")
    seeded(b)
    b.set_defaults(func=cmd_body)

    v = sub.add_parser("volume", help="volume of a body")
    v.add_argument("--in", dest="input", required=True)
    v.add_argument("--method", choices=("exact", "mc", "sphere"), default="exact")
    v.add_argument("--jobs", type=int, default=1)
    seeded(v)
    v.set_defaults(func=cmd_volume)

    m = sub.add_parser("mahler", help="volume product of a body")
    m.add_argument("--in", dest="input", required=True)
    m.add_argument("--method", choices=("auto", "exact", "mc"), default="auto")
    seeded(m)
    m.set_defaults(func=cmd_mahler)

    c = sub.add_parser("verify", help="run one named check")
    c.add_argument("check", choices=sorted(CHECKS) + ["batch"])
    c.add_argument("--manifest", help="manifest file (batch)")
    c.add_argument("--jobs", type=int, default=1)
    c.add_argument("--in", dest="input")
    c.add_argument("--other", help="second body (bm)")
    c.add_argument("--x")
    c.add_argument("--direction")
    c.add_argument("--p", type=float)
    c.add_argument("--f")
    c.add_argument("--a", type=float)
    c.add_argument("--body", dest="body_kind", help="cube or ball (rho, indicator_ft)")
    c.add_argument("--dim", type=int)
    c.add_argument("--lattice-radius", type=int)
    c.add_argument("--fn")
    c.add_argument("--m", type=int)
    c.add_argument("--extent", type=float)
    c.add_argument("--grid")
    c.add_argument("--method")
    c.add_argument("--tree")
    c.add_argument("--axis", type=int)
    c.add_argument("--instance")
    c.add_argument("--samples", type=int)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--tol", type=float)
    reporting(c)
    c.set_defaults(func=cmd_verify)

    f = sub.add_parser("functional", help="grid log-concave functions")
    f.add_argument("op", choices=("polar", "santalo", "ball", "involution"))
    f.add_argument("--fn", choices=("gaussian", "indicator", "exp_neg_gauge"), default="gaussian")
    f.add_argument("--body")
    f.add_argument("--grid", help="GridFunction JSON file")
    f.add_argument("--a", type=float)
    f.add_argument("--dim", type=int, default=2)
    f.add_argument("--extent", type=float, default=8.0)
    f.add_argument("--m", type=int)
    f.add_argument("--out")
    f.set_defaults(func=cmd_functional)

    d = sub.add_parser("bm-distance", help="Banach-Mazur distance upper bound")
    d.add_argument("--a", required=True)
    d.add_argument("--b", required=True)
    d.add_argument("--restarts", type=int, default=20)
    d.add_argument("--iterations", type=int, default=400)
    d.add_argument("--seed", type=int, default=0)
    d.set_defaults(func=cmd_bm)

    s = sub.add_parser("stability", help="perturbed-cube stability table")
    s.add_argument("--dim", type=int, default=2)
    s.add_argument("--eps", default="0.02,0.05,0.1")
    s.add_argument("--trials", type=int, default=50)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_stability)

    ps = sub.add_parser("paper-suite", help="run the bundled acceptance suite")
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--quick", action="store_true", help="a tenth of the samples, fewer trials")
    ps.add_argument("--only", help="comma-separated criterion numbers")
    reporting(ps)
    ps.set_defaults(func=cmd_paper_suite)

    r = sub.add_parser("run", help="run a manifest of checks")
    r.add_argument("--manifest", required=True)
    r.add_argument("--jobs", type=int, default=1)
    reporting(r)
    r.set_defaults(func=cmd_run)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="vp: %(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, PreconditionError, CapabilityError) as exc:
        print(f"vp: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
