"""Command-line front end: closed-form, solve, verify, sweep and replay.

Every command writes its primary output plus ``<output>.manifest.json``
recording the argument vector, configuration, seed, package version and a
sha256 of each file produced.  ``replay`` re-runs a manifest into another
directory and compares the hashes.

Exit codes: 0 success (including reported non-convergence), 1 verification
failure or replay mismatch, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from . import closedform as cf
from .asymptotics import dimension_statistic
from .codebook import codebook_to_json, load_codebook
from .curve import (
    DEFAULT_NODES,
    CurveDistribution,
    DomainError,
    curve_from_json,
    make_segment,
    make_unit_circle,
    make_unit_triangle_boundary,
)
from .solver import INIT_METHODS, SolverConfig, lloyd_solve
from .svg import write_svg
from .verify import GROUPS, format_report, run_suite

SHAPES = ("segment", "circle", "triangle")
# flags whose values name files written by a command; replay redirects them
OUTPUT_FLAGS = ("--out", "--report", "--emit-svg")


class UsageError(Exception):
    """Bad input detected after argument parsing; maps to exit code 2."""


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def manifest_path(output: str | Path) -> Path:
    return Path(f"{output}.manifest.json")


def write_manifest(argv: Sequence[str], config: dict, seed: int | None, outputs: Sequence[str | Path]) -> Path:
    """Write the run manifest next to the first output and return its path."""
    files = [Path(p) for p in outputs]
    manifest = {
        "command": list(argv),
        "config": config,
        "seed": seed,
        "version": __version__,
        "outputs": [{"name": p.name, "sha256": _sha256(p)} for p in files],
    }
    path = manifest_path(files[0])
    path.write_text(_dump(manifest))
    return path


def builtin_distribution(shape: str, m: int, a: float = 0.0, b: float = 1.0) -> CurveDistribution:
    if shape == "segment":
        return make_segment(a, b, m)
    if shape == "circle":
        return make_unit_circle(m)
    return make_unit_triangle_boundary(m)


def _closed_form(shape: str, n: int, a: float, b: float) -> cf.ClosedFormResult:
    if shape == "segment":
        return cf.segment_codebook(a, b, n)
    if shape == "circle":
        return cf.circle_codebook(n)
    return cf.triangle_codebook(n)


def cmd_closed_form(args: argparse.Namespace, argv: Sequence[str]) -> int:
    res = _closed_form(args.shape, args.n, args.a, args.b)
    print(f"V_{args.n} = {res.error:.12g}")
    out = Path(args.out)
    body = codebook_to_json(res.codebook, distortion=res.error, shape=args.shape, kind="closed-form", paper_ref=res.paper_ref)
    out.write_text(_dump(body))
    config = {"shape": args.shape, "n": args.n, "case_tag": res.case_tag}
    if args.shape == "segment":
        config.update(a=args.a, b=args.b)
    write_manifest(argv, config, None, [out])
    return 0


def _load_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def cmd_solve(args: argparse.Namespace, argv: Sequence[str]) -> int:
    if args.curve:
        spec = _load_json(args.curve)
        dist = curve_from_json(spec, args.quadrature)
        curve_spec: dict = {"file": args.curve, **dist.curve.to_json()}
        shape = "custom"
    else:
        dist = builtin_distribution(args.shape, args.quadrature, args.a, args.b)
        curve_spec = {"shape": args.shape}
        if args.shape == "segment":
            curve_spec.update(a=args.a, b=args.b)
        shape = args.shape
    init, init_cb = args.init, None
    if args.init_codebook:
        try:
            init_cb = load_codebook(args.init_codebook)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read {args.init_codebook}: {exc}") from exc
        init = "user"
    cfg = SolverConfig(
        n=args.n,
        restarts=args.restarts,
        max_iters=args.max_iters,
        rel_tol=args.rel_tol,
        seed=args.seed,
        init=init,
        init_codebook=init_cb,
    )
    res = lloyd_solve(dist, cfg)
    body = {
        **res.to_json(),
        "shape": shape,
        "provenance": {"kind": "solver", "paper_ref": None},
        "quadrature": len(dist.quadrature),
    }
    out = Path(args.out)
    out.write_text(_dump(body))
    outputs = [out]
    if args.emit_svg:
        write_svg(args.emit_svg, dist, res.codebook, title=f"{shape} n={args.n}")
        outputs.append(Path(args.emit_svg))
    status = "converged" if res.converged else "not converged"
    print(f"distortion = {res.distortion:.12g} ({status}, {res.iterations} iterations)")
    config = {"curve": curve_spec, "solver": cfg.to_json(), "quadrature": args.quadrature}
    write_manifest(argv, config, args.seed, outputs)
    return 0


def cmd_verify(args: argparse.Namespace, argv: Sequence[str]) -> int:
    only = args.only or None
    if only:
        unknown = [g for g in only if g not in GROUPS]
        if unknown:
            raise UsageError(f"unknown check group(s) {unknown}; choose from {sorted(GROUPS)}")
    rows = run_suite(only, args.quadrature)
    report = format_report(rows)
    sys.stdout.write(report)
    out = Path(args.report)
    out.write_text(report)
    write_manifest(argv, {"only": only, "quadrature": args.quadrature}, None, [out])
    return 0 if all(r.passed for r in rows) else 1


def _parse_range(text: str) -> range:
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError as exc:
        raise UsageError(f"range must look like A:B, got {text!r}") from exc
    if lo < 1 or hi < lo:
        raise UsageError(f"range {text!r} is empty or starts below 1")
    return range(lo, hi + 1)


def _sweep_error(shape: str, n: int, args: argparse.Namespace, cache: dict) -> float:
    if shape == "segment":
        return cf.segment_error(args.a, args.b, n)
    if shape == "circle":
        return cf.circle_error(n)
    if cf.has_triangle_closed_form(n):
        return cf.triangle_codebook(n).error
    if "dist" not in cache:
        cache["dist"] = make_unit_triangle_boundary(args.quadrature)
    cfg = SolverConfig(n=n, restarts=args.restarts, seed=args.seed)
    return lloyd_solve(cache["dist"], cfg).distortion


def cmd_sweep(args: argparse.Namespace, argv: Sequence[str]) -> int:
    if args.k_range:
        if args.shape != "triangle":
            raise UsageError("--k-range applies to the triangle only")
        ns = [3 * k + 3 for k in _parse_range(args.k_range)]
    elif args.n_range:
        ns = list(_parse_range(args.n_range))
    else:
        raise UsageError("give --n-range or --k-range")
    if not args.s > 0:
        raise UsageError("--s must be positive")
    out = Path(args.out)
    cache: dict = {}
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(["n", "V_n", "coeff", "dim_stat"])
        for n in ns:
            v = _sweep_error(args.shape, n, args, cache)
            coeff = n ** (2.0 / args.s) * v
            dim = repr(dimension_statistic(n, v)) if v < 1 and n > 1 else ""
            writer.writerow([n, repr(v), repr(coeff), dim])
    config = {"shape": args.shape, "ns": [ns[0], ns[-1], len(ns)], "s": args.s}
    if args.shape == "segment":
        config.update(a=args.a, b=args.b)
    write_manifest(argv, config, args.seed, [out])
    print(f"wrote {len(ns)} rows to {out}")
    return 0


def replay_argv(command: Sequence[str], directory: Path) -> list[str]:
    """``command`` with every output path moved into ``directory``."""
    argv = list(command)
    for i, tok in enumerate(argv[:-1]):
        if tok in OUTPUT_FLAGS:
            argv[i + 1] = str(directory / Path(argv[i + 1]).name)
    return argv


def cmd_replay(args: argparse.Namespace, argv: Sequence[str]) -> int:
    manifest = _load_json(args.manifest)
    try:
        command, expected = manifest["command"], manifest["outputs"]
    except (KeyError, TypeError) as exc:
        raise UsageError("manifest needs 'command' and 'outputs'") from exc
    if command and command[0] == "replay":
        raise UsageError("refusing to replay a replay")
    directory = Path(args.dir)
    directory.mkdir(parents=True, exist_ok=True)
    code = main(replay_argv(command, directory))
    if code == 2:
        return 2
    ok = True
    for entry in expected:
        got = directory / entry["name"]
        digest = _sha256(got) if got.exists() else None
        same = digest == entry["sha256"]
        ok &= same
        print(f"{'match' if same else 'DIFFERS'}  {entry['name']}")
    return 0 if ok else 1


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curvequant", description="Optimal n-means of distributions on curves.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("closed-form", help="exact optimal codebook and error")
    p.add_argument("shape", choices=SHAPES)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--a", type=float, default=0.0, help="segment left end")
    p.add_argument("--b", type=float, default=1.0, help="segment right end")
    p.add_argument("--out", default="codebook.json")
    p.set_defaults(func=cmd_closed_form)

    p = sub.add_parser("solve", help="multi-start Lloyd on a built-in shape or a curve file")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--shape", choices=SHAPES)
    src.add_argument("--curve", help="curve description JSON")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--restarts", type=_positive_int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=_positive_int, default=10_000)
    p.add_argument("--rel-tol", type=float, default=1e-12)
    p.add_argument("--init", choices=[m for m in INIT_METHODS if m != "user"], default="kmeans++")
    p.add_argument("--init-codebook", help="codebook JSON to start from (implies a single user-initialized run)")
    p.add_argument("--quadrature", type=_positive_int, default=DEFAULT_NODES)
    p.add_argument("--out", default="result.json")
    p.add_argument("--emit-svg", metavar="PATH")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="closed forms vs solver vs oracles")
    p.add_argument("--only", action="append", metavar="GROUP", help=f"one of {', '.join(GROUPS)}; repeatable")
    p.add_argument("--quadrature", type=_positive_int, default=DEFAULT_NODES)
    p.add_argument("--report", default="verify_report.txt")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="CSV of n, V_n, n^(2/s) V_n and the dimension statistic")
    p.add_argument("--shape", choices=SHAPES, required=True)
    p.add_argument("--n-range", metavar="A:B")
    p.add_argument("--k-range", metavar="A:B", help="triangle n = 3k + 3")
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--restarts", type=_positive_int, default=64, help="for n without a closed form")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quadrature", type=_positive_int, default=DEFAULT_NODES)
    p.add_argument("--out", default="sweep.csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("replay", help="re-run a manifest and compare output hashes")
    p.add_argument("manifest")
    p.add_argument("--dir", required=True)
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, argv)
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
