"""Command-line front end.

Exit codes: 0 success, 1 verification or comparison failure, 2 usage or
precondition error.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import jsonio, oracles
from .engine import DistributedArray, run
from .errors import DivisibilityError
from .linear_bsp import SCHEMA, StepKind, schedule_from_dict, schedule_to_dict, step_matrix
from .rng import random_array
from .transforms import build

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
MATRIX_TOL = 1e-12


class UsageError(Exception):
    pass


def _dims(text: str) -> tuple:
    try:
        dims = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not dims or any(v < 1 for v in dims):
        raise argparse.ArgumentTypeError(f"extents must be positive, got {text!r}")
    return dims


def make_input(spec: str, shape: tuple, transform: str) -> np.ndarray:
    """Build the global input array named by ``--input``."""
    if spec == "impulse":
        x = np.zeros(shape, dtype=complex)
        x[(0,) * len(shape)] = 1.0
        return x
    if spec == "ones":
        return np.ones(shape, dtype=complex)
    if spec.startswith("random:"):
        try:
            seed = int(spec.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad seed in {spec!r}")
        # the DCT-II is only ever applied to real signals
        return random_array(shape, seed, complex_values=(transform != "dct"))
    if spec.startswith("file:"):
        path = spec.split(":", 1)[1]
        with open(path) as fh:
            x = jsonio.array_from_json(json.load(fh))
        if x.shape != tuple(shape):
            raise UsageError(f"input file holds shape {x.shape}, --dims says {tuple(shape)}")
        return x
    raise UsageError(f"unknown input {spec!r}")


def oracle_for(transform: str, x: np.ndarray) -> np.ndarray:
    if transform == "fft":
        return oracles.dft_oracle(x) if x.ndim == 1 else oracles.dft_rankd_oracle(x)
    if transform == "dct":
        return oracles.dct2_oracle(x) if x.ndim == 1 else oracles.dct2_rankd_oracle(x)
    return x.copy()


def rel_error(y: np.ndarray, ref: np.ndarray) -> float:
    """Largest absolute deviation relative to the largest reference magnitude."""
    scale = float(np.max(np.abs(ref))) if ref.size else 0.0
    err = float(np.max(np.abs(y - ref))) if ref.size else 0.0
    return err / scale if scale > 0 else err


def run_case(transform, dims, grid, input_spec, verify=False, workers=None, tol=1e-9):
    """Run one transform and return ``(result_dict, output_array)``."""
    alg = build(transform, dims, grid)
    x = make_input(input_spec, dims, transform)
    y_dist, report = run(alg, DistributedArray.scatter(alg.in_dist, x), workers=workers)
    y = y_dist.gather()
    result = {
        "schema": SCHEMA,
        "transform": transform,
        "dims": list(dims),
        "grid": list(grid),
        "input": input_spec,
        "signature": [k.value for k in alg.signature],
        "comm": report.to_dict(),
        "max_rel_error": None,
        "tolerance": tol,
    }
    if verify:
        ref = oracle_for(transform, x)
        result["max_rel_error"] = rel_error(y, ref)
        ok = result["max_rel_error"] <= tol
        if transform == "dct" and np.all(x.imag == 0):
            result["max_imag_residue"] = float(np.max(np.abs(y.imag)))
            ok = ok and result["max_imag_residue"] <= tol
        result["passed"] = bool(ok)
    return result, y


def cmd_run(args) -> int:
    dims, grid = args.dims, args.grid
    if len(dims) != len(grid):
        raise UsageError(f"--dims has rank {len(dims)} but --grid has rank {len(grid)}")
    result, y = run_case(args.transform, dims, grid, args.input, args.verify, args.workers, args.tol)
    if args.emit_output:
        result["output"] = jsonio.array_to_json(y)
    text = jsonio.dumps(result)
    print(text)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text + "\n")
    if args.verify and not result["passed"]:
        print(f"verification failed: max_rel_error={result['max_rel_error']:.3e} "
              f"> {args.tol:.1e}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_schedule(args) -> int:
    if len(args.dims) != len(args.grid):
        raise UsageError(f"--dims has rank {len(args.dims)} but --grid has rank {len(args.grid)}")
    alg = build(args.transform, args.dims, args.grid, source=args.source)
    d = schedule_to_dict(alg)
    d["transform"] = args.transform
    d["source"] = args.source
    text = jsonio.dumps(d)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def compare_schedules(a: dict, b: dict, tol: float = MATRIX_TOL):
    """Return ``None`` if equivalent, else ``(step_index, reason)``."""
    for d in (a, b):
        if d.get("schema") != SCHEMA:
            raise UsageError(f"unsupported schema {d.get('schema')!r}")
    if a["in_dist"] != b["in_dist"] or a["out_dist"] != b["out_dist"]:
        raise UsageError("schedules describe different shapes or grids")
    alg_a, alg_b = schedule_from_dict(a), schedule_from_dict(b)
    grid = alg_a.grid
    for i in range(max(len(alg_a.steps), len(alg_b.steps))):
        if i >= len(alg_a.steps) or i >= len(alg_b.steps):
            return i, "different number of supersteps"
        sa, sb = alg_a.steps[i], alg_b.steps[i]
        if sa.kind != sb.kind:
            return i, f"kind {sa.kind.value} vs {sb.kind.value}"
        if sa.in_shape != sb.in_shape or sa.out_shape != sb.out_shape:
            return i, (f"local shapes {sa.in_shape.dims}->{sa.out_shape.dims} vs "
                       f"{sb.in_shape.dims}->{sb.out_shape.dims}")
        if sa.kind is StepKind.COMMUNICATION:
            ta = a["steps"][i].get("table") or _table(sa)
            tb = b["steps"][i].get("table") or _table(sb)
            if ta != tb:
                return i, "permutation tables differ"
        else:
            diff = float(np.max(np.abs(step_matrix(sa, grid) - step_matrix(sb, grid))))
            if diff > tol:
                return i, f"kernel matrices differ by {diff:.3e}"
    return None


def _table(step) -> dict:
    proc, loc = step.table()
    return {"dest_proc": proc.tolist(), "dest_local": loc.tolist()}


def cmd_compare(args) -> int:
    docs = []
    for path in (args.a, args.b):
        with open(path) as fh:
            docs.append(json.load(fh))
    diff = compare_schedules(*docs, tol=args.tol)
    if diff is None:
        print("schedules equivalent")
        return EXIT_OK
    print(f"schedules differ at step {diff[0]}: {diff[1]}")
    return EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bsp-tensor",
                                 description="BSP simulator for tensor-product FFT and DCT-II")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a transform on the simulated BSP machine")
    r.add_argument("--transform", choices=["fft", "dct", "identity"], required=True)
    r.add_argument("--dims", type=_dims, required=True)
    r.add_argument("--grid", type=_dims, required=True)
    r.add_argument("--input", default="impulse",
                   help="impulse | ones | random:SEED | file:PATH")
    r.add_argument("--verify", action="store_true", help="compare with the brute-force oracle")
    r.add_argument("--tol", type=float, default=1e-9)
    r.add_argument("--report", metavar="PATH", help="also write the JSON result to PATH")
    r.add_argument("--workers", type=int, default=None, help="thread-pool size per superstep")
    r.add_argument("--emit-output", action="store_true", help="include the output array")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("schedule", help="dump a schedule as canonical JSON")
    s.add_argument("--transform", choices=["fft", "dct", "identity"], required=True)
    s.add_argument("--dims", type=_dims, required=True)
    s.add_argument("--grid", type=_dims, required=True)
    s.add_argument("--source", choices=["combinator", "reference"], default="combinator")
    s.add_argument("--out", metavar="PATH")
    s.set_defaults(func=cmd_schedule)

    c = sub.add_parser("compare", help="check two schedule dumps for equivalence")
    c.add_argument("a")
    c.add_argument("b")
    c.add_argument("--tol", type=float, default=MATRIX_TOL)
    c.set_defaults(func=cmd_compare)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except DivisibilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
