"""Command-line frontend.

Subcommands: ``gen`` (write a test basis), ``svp`` (solve one instance by
brute force, classical enumeration, or the simulated quantum search),
``bdd`` (decode one target, optionally splitting preprocessing and query
across invocations via a serialized advice file), and ``bench`` (CSV sweeps
over dimensions and trials).

Exit codes: 0 success, 2 parse error, 3 solver failure, 4 dimension-guard
refusal.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time

import numpy as np

from .decoder import (
    BddConfig,
    BddpAdvice,
    DecodeFailure,
    bddp_preprocess,
    bddp_query,
)
from .grover import DegenerateLatticeError, quantum_svp
from .lattice import (
    BasisParseError,
    RankDeficientError,
    basis_fingerprint,
    format_basis,
    generate_basis,
    read_basis,
)
from .oracles import DimensionGuardError, brute_force_svp
from .seeding import PHASE_SAMPLE, phase_rng
from .solver import SolverError, SvpResult, enum_svp

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SOLVER = 3
EXIT_GUARD = 4

SCHEMA = 1


def _jsonable(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _emit(payload: dict, as_json: bool, out_path=None):
    if as_json:
        text = json.dumps(_jsonable(payload), indent=2)
    else:
        lines = []
        for key, value in payload.items():
            if isinstance(value, dict):
                inner = ", ".join(f"{k}={_jsonable(v)}" for k, v in value.items())
                lines.append(f"{key:18s} {inner}")
            else:
                lines.append(f"{key:18s} {_jsonable(value)}")
        text = "\n".join(lines)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _run_result_payload(result: SvpResult, basis, config: dict) -> dict:
    payload = {
        "schema": SCHEMA,
        "mode": result.mode,
        "n": len(result.vector),
        "basis_fingerprint": basis_fingerprint(basis),
        "vector": list(result.vector),
        "norm_sq": result.norm_sq,
        "norm": result.norm,
        "seed": result.seed,
        "config": config,
        "cosets": result.cosets,
        "failures": result.failures,
        "timings_ms": result.extras.get("timings_ms", {}),
    }
    if result.ledger is not None:
        payload["ledger"] = result.ledger.to_dict()
    return payload


def cmd_gen(args) -> int:
    try:
        basis = generate_basis(args.kind, args.n, bits=args.bits, seed=args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    text = format_basis(basis)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.kind} basis (n={args.n}) to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _load_basis(path):
    try:
        return read_basis(path)
    except FileNotFoundError:
        raise BasisParseError(f"no such file: {path}")
    except (RankDeficientError, ValueError) as exc:
        if isinstance(exc, BasisParseError):
            raise
        raise BasisParseError(str(exc))


def cmd_svp(args) -> int:
    try:
        basis = _load_basis(args.basis)
    except BasisParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    config = {
        "mode": args.mode,
        "kappa": args.kappa,
        "samples": args.samples,
        "ascent_iters": args.ascent_iters,
        "threads": args.threads,
    }
    try:
        if args.mode == "bruteforce":
            t0 = time.perf_counter()
            point = brute_force_svp(basis)
            elapsed = (time.perf_counter() - t0) * 1e3
            result = SvpResult(
                vector=point.vector, coeffs=point.coeffs, norm_sq=point.norm_sq,
                mode="bruteforce", cosets=0, failures=0, zeros=0, seed=args.seed,
                extras={"timings_ms": {"reduce": 0.0, "preprocess": 0.0, "solve": elapsed}},
            )
        elif args.mode == "enump":
            result = enum_svp(basis, n_samples=args.samples, seed=args.seed,
                              ascent_iters=args.ascent_iters, threads=args.threads)
        elif args.mode == "qsim":
            result = quantum_svp(basis, kappa=args.kappa, n_samples=args.samples,
                                 seed=args.seed, ascent_iters=args.ascent_iters,
                                 threads=args.threads)
        else:
            print(f"error: unknown mode {args.mode}", file=sys.stderr)
            return EXIT_PARSE
    except DimensionGuardError as exc:
        print(f"guard refusal: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (SolverError, DegenerateLatticeError) as exc:
        if args.json:
            _emit({"schema": SCHEMA, "status": "solver-failure", "error": str(exc)},
                  True, args.out)
        else:
            print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    _emit(_run_result_payload(result, basis, config), args.json, args.out)
    return EXIT_OK


def cmd_bdd(args) -> int:
    try:
        basis = _load_basis(args.basis)
    except BasisParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        target = np.array([float(v) for v in args.target.split(",")])
    except ValueError:
        print("error: target must be comma-separated reals", file=sys.stderr)
        return EXIT_PARSE
    if target.shape[0] != basis.shape[0]:
        print(f"error: target length {len(target)} != n {basis.shape[0]}", file=sys.stderr)
        return EXIT_PARSE

    if args.advice:
        with open(args.advice, "r", encoding="utf-8") as fh:
            advice = BddpAdvice.from_json(fh.read())
        if not np.array_equal(advice.basis_input, basis):
            print("error: advice was preprocessed for a different basis", file=sys.stderr)
            return EXIT_PARSE
    else:
        cfg = BddConfig(n_samples=args.samples, ascent_iters=args.ascent_iters)
        advice = bddp_preprocess(basis, cfg, seed=phase_rng(args.seed, PHASE_SAMPLE))
    if args.save_advice:
        with open(args.save_advice, "w", encoding="utf-8") as fh:
            fh.write(advice.to_json())

    try:
        point = bddp_query(advice, target)
    except DecodeFailure as exc:
        _emit({"schema": SCHEMA, "status": "decode-failure", "error": str(exc)},
              args.json, args.out)
        return EXIT_SOLVER

    offset = point.vector.astype(float) - target
    payload = {
        "schema": SCHEMA,
        "status": "ok",
        "basis_fingerprint": basis_fingerprint(basis),
        "vector": list(point.vector),
        "distance": float(np.linalg.norm(offset)),
        "seed": args.seed,
        "config": {"samples": advice.n_samples, "ascent_iters": advice.config.ascent_iters},
    }
    _emit(payload, args.json, args.out)
    return EXIT_OK


def _parse_range(spec: str):
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(spec)]


def cmd_bench(args) -> int:
    try:
        dims = _parse_range(args.n_range)
        modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    except ValueError:
        print("error: bad --n-range or --modes", file=sys.stderr)
        return EXIT_PARSE
    bad = [m for m in modes if m not in ("bruteforce", "enump", "qsim")]
    if bad:
        print(f"error: unknown modes {bad}", file=sys.stderr)
        return EXIT_PARSE

    rows = []
    for n in dims:
        for trial in range(args.trials):
            instance_seed = args.seed * 100_000 + n * 1_000 + trial
            basis = generate_basis("uniform", n, bits=args.bits, seed=instance_seed)
            reference = brute_force_svp(basis).norm_sq if n <= 10 else None
            for mode in modes:
                t0 = time.perf_counter()
                od = toffoli = 0
                if mode == "bruteforce":
                    norm_sq = brute_force_svp(basis).norm_sq
                elif mode == "enump":
                    norm_sq = enum_svp(basis, n_samples=args.samples,
                                       seed=instance_seed, threads=args.threads).norm_sq
                else:
                    res = quantum_svp(basis, kappa=args.kappa, n_samples=args.samples,
                                      seed=instance_seed, threads=args.threads)
                    norm_sq = res.norm_sq
                    od = res.ledger.od_queries
                    toffoli = res.ledger.toffoli_estimate
                wall_ms = (time.perf_counter() - t0) * 1e3
                norm_ok = "" if reference is None else str(norm_sq == reference)
                rows.append([n, trial, mode, norm_ok, od, toffoli, f"{wall_ms:.3f}"])

    header = ["n", "trial", "mode", "norm_ok", "od_queries", "toffoli_estimate", "wall_ms"]
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(header)
        writer.writerows(rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="svpenum",
        description="Shortest-vector search via coset enumeration over a "
                    "periodic-Gaussian decoder, with a simulated Grover variant.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a test basis file")
    p_gen.add_argument("kind", choices=["uniform", "knapsack", "scaled-identity"])
    p_gen.add_argument("n", type=int)
    p_gen.add_argument("--bits", "--scale", dest="bits", type=int, default=8,
                       help="entry size in bits (diagonal scale for scaled-identity)")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", help="output path (default: stdout)")
    p_gen.set_defaults(func=cmd_gen)

    p_svp = sub.add_parser("svp", help="solve SVP for a basis file")
    p_svp.add_argument("basis")
    p_svp.add_argument("--mode", choices=["bruteforce", "enump", "qsim"], default="enump")
    p_svp.add_argument("--kappa", type=int, default=10,
                       help="confidence rounds per threshold search (qsim)")
    p_svp.add_argument("--samples", type=int, default=None,
                       help="advice size N (default max(1000, 200 n))")
    p_svp.add_argument("--ascent-iters", type=int, default=2)
    p_svp.add_argument("--seed", type=int, default=0)
    p_svp.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p_svp.add_argument("--json", action="store_true")
    p_svp.add_argument("--out", help="write the result here instead of stdout")
    p_svp.set_defaults(func=cmd_svp)

    p_bdd = sub.add_parser("bdd", help="decode one target vector")
    p_bdd.add_argument("basis")
    p_bdd.add_argument("target", help="comma-separated reals, e.g. 0.1,-0.2")
    p_bdd.add_argument("--samples", type=int, default=None)
    p_bdd.add_argument("--ascent-iters", type=int, default=2)
    p_bdd.add_argument("--seed", type=int, default=0)
    p_bdd.add_argument("--advice", help="load preprocessed advice (JSON) instead of sampling")
    p_bdd.add_argument("--save-advice", help="serialize the advice for later queries")
    p_bdd.add_argument("--json", action="store_true")
    p_bdd.add_argument("--out")
    p_bdd.set_defaults(func=cmd_bdd)

    p_bench = sub.add_parser("bench", help="CSV sweep over dimensions and trials")
    p_bench.add_argument("--n-range", default="4..6", help="e.g. 4..9 or a single n")
    p_bench.add_argument("--trials", type=int, default=3)
    p_bench.add_argument("--modes", default="enump,qsim")
    p_bench.add_argument("--bits", type=int, default=7)
    p_bench.add_argument("--kappa", type=int, default=10)
    p_bench.add_argument("--samples", type=int, default=None)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p_bench.add_argument("--out", help="CSV path (default: stdout)")
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
