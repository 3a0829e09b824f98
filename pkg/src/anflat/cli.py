"""Command-line front end.

Subcommands: analyze, find-flat, verify-flat, convert, gen, oracle,
experiment. Human output goes to stdout, diagnostics to stderr; with
--json exactly one JSON document is printed. Exit codes: 0 success, 2
input error, 3 internal verification failure, 4 negative verdict.

Every randomized command either takes a seed or draws one and prints it
to stderr; rerunning with that seed reproduces the output byte for byte.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
from pathlib import Path

from . import experiments, generators, pipeline
from .anf_core import (
    FunctionInput,
    TruthTable,
    anf_to_truth_table,
    format_anf,
    parse_anf,
    truth_table_to_anf,
)
from .errors import AnflatError, InconsistentError, VerificationError
from .f2_linalg import Flat
from .restriction import exhaustive_hitting_set, occurrence_counts

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INTERNAL = 3
EXIT_NEGATIVE = 4


def _seed_arg(text: str) -> int:
    return int(text, 0)  # accepts decimal and 0x-prefixed hex


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _write_output(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _emit_json(obj: dict, out: str | None = None) -> None:
    _write_output(json.dumps(obj, indent=2, sort_keys=True) + "\n", out)


def _infer_num_vars(text: str) -> int:
    indices = [int(m) for m in re.findall(r"x(\d+)", text)]
    return max(indices, default=1)


def _load_function(path: str, fmt: str, n_override: int | None) -> FunctionInput:
    text = _read_input(path)
    if fmt == "auto":
        fmt = "container" if text.lstrip().startswith("{") else "anf"
    if fmt == "container":
        return FunctionInput.from_json_text(text)
    n = n_override if n_override is not None else _infer_num_vars(text)
    return FunctionInput(parse_anf(text, n))


def _load_flat(path: str) -> Flat:
    text = _read_input(path)
    if text.lstrip().startswith("{"):
        return Flat.from_json_dict(json.loads(text))
    return Flat.from_text(text)


def cmd_analyze(args) -> int:
    func = _load_function(args.file, args.format, args.n)
    g = func.g
    n = g.num_vars
    counts = occurrence_counts(g, set(range(1, n + 1)))
    occurrences = [counts.get(i, 0) for i in range(1, n + 1)]
    crucial = g.crucial_count()
    max_occ = max(occurrences, default=0)
    max_var = occurrences.index(max_occ) + 1 if occurrences and max_occ > 0 else None
    bound = -(-3 * crucial // n) if n else 0
    report = {
        "n": n,
        "sparsity": g.sparsity(),
        "degree": g.degree(),
        "crucial_terms": crucial,
        "occurrences": occurrences,
        "max_occurrence": max_occ,
        "max_occurrence_variable": max_var,
        "pigeonhole_bound": bound,
        "bijection": func.bijection is not None,
    }
    if args.json:
        _emit_json(report)
        return EXIT_OK
    print(f"n: {n}")
    print(f"sparsity: {g.sparsity()}")
    print(f"degree: {g.degree()}")
    print(f"crucial terms: {crucial}")
    print("occurrences:", " ".join(f"x{i + 1}={c}" for i, c in enumerate(occurrences)))
    if max_var is not None:
        print(f"max occurrence: {max_occ} (x{max_var})")
    else:
        print(f"max occurrence: {max_occ}")
    print(f"pigeonhole bound: {bound}")
    if func.bijection is not None:
        print("bijection: present (metrics describe the stored ANF g)")
    return EXIT_OK


def cmd_find_flat(args) -> int:
    func = _load_function(args.file, args.format, args.n)
    if args.epsilon is not None and not 0.0 < args.epsilon < 2.0:
        raise InconsistentError(f"epsilon = {args.epsilon} outside (0, 2)")
    report = pipeline.find_constant_flat(
        func, epsilon=args.epsilon, sample_cap=args.samples
    )
    if args.json:
        _emit_json(report.to_json_dict())
        return EXIT_OK
    print(f"dimension: {report.flat.dimension}")
    print(f"constant: {report.constant}")
    print(f"offset: {report.flat.offset.to_string()}")
    for b in report.flat.basis:
        print(f"basis: {b.to_string()}")
    trace = ", ".join(
        f"x{s.var} (crucial {s.crucial_before}, occ {s.occ})" for s in report.trace.steps
    )
    print(f"trace: {trace if trace else '(none)'}")
    print(
        f"pairs fixed: {report.dickson.t // 2}, tail: type {report.dickson.form_type}"
    )
    if report.bound_epsilon is not None:
        print(f"guaranteed dimension: {report.guaranteed_dim:g}")
    print(f"verification: {report.verification['mode']}")
    return EXIT_OK


def cmd_verify_flat(args) -> int:
    func = _load_function(args.file, args.format, args.n)
    flat = _load_flat(args.flat)
    verdict = pipeline.verify_flat(
        func, flat, claimed=args.constant, sample_cap=args.samples
    )
    negative = verdict.kind == pipeline.VERDICT_NOT_CONSTANT or (
        args.constant is not None and verdict.value not in (None, args.constant)
    )
    payload = verdict.to_json_dict()
    payload["dimension"] = flat.dimension
    if args.json:
        _emit_json(payload)
    else:
        print(f"verdict: {verdict.kind}")
        if verdict.value is not None:
            print(f"value: {verdict.value}")
        if verdict.samples is not None:
            print(f"samples: {verdict.samples} (seed {verdict.seed})")
        if verdict.witness:
            for w in verdict.witness:
                print(f"witness: {w.to_string()}")
    return EXIT_NEGATIVE if negative else EXIT_OK


def cmd_convert(args) -> int:
    text = _read_input(args.file)
    if args.source == "anf":
        if text.lstrip().startswith("{"):
            func = FunctionInput.from_json_text(text)
            f = func.g
        else:
            n = args.n if args.n is not None else _infer_num_vars(text)
            f = parse_anf(text, n)
    else:
        f = truth_table_to_anf(TruthTable.from_string(text))
    if args.target == "anf":
        if args.json:
            _emit_json({"n": f.num_vars, "anf": format_anf(f)}, args.out)
        else:
            _write_output(format_anf(f) + "\n", args.out)
    else:
        table = anf_to_truth_table(f)
        if args.json:
            _emit_json({"n": f.num_vars, "truth_table": table.to_string()}, args.out)
        else:
            _write_output(table.to_string() + "\n", args.out)
    return EXIT_OK


def _resolve_seed(seed: int | None) -> int:
    if seed is None:
        seed = int.from_bytes(os.urandom(8), "little")
        print(f"seed: {seed}", file=sys.stderr)
    return seed


def cmd_gen(args) -> int:
    family = args.family
    meta: dict = {"family": family}
    if family == "majority":
        f = generators.majority(args.n)
    elif family == "all-ones":
        f = generators.all_ones_indicator(args.n)
    elif family == "prop6":
        f = generators.prop6_base()
    elif family == "prop6-family":
        f = generators.prop6_family(args.m)
        meta["m"] = args.m
    elif family == "complete3":
        f = generators.complete_degree3(args.n)
    elif family == "rand3-half":
        seed = _resolve_seed(args.seed)
        f = generators.random_degree3_half(args.n, seed)
        meta["seed"] = seed
    elif family == "rand3-sparse":
        if args.s is None:
            raise InconsistentError("rand3-sparse needs --s")
        seed = _resolve_seed(args.seed)
        cfg = generators.Degree3SamplerConfig(
            n=args.n, s=args.s, seed=seed, inclusion_scale=args.scale
        )
        f = generators.random_degree3_sparse(cfg)
        meta.update({"seed": seed, "s": args.s, "inclusion_scale": args.scale})
    else:
        raise InconsistentError(f"unknown family {family!r}")
    meta.update({"n": f.num_vars, "anf": format_anf(f)})
    if args.json:
        _emit_json(meta, args.out)
    else:
        _write_output(format_anf(f) + "\n", args.out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    func = _load_function(args.file, args.format, args.n)
    g = func.g
    if args.kind == "normality":
        value, flat = pipeline.brute_force_normality(g, max_vars=args.cap or 8)
        report = {"kind": "normality", "normality": value, "flat": flat.to_json_dict()}
        human = [f"normality: {value}", f"flat offset: {flat.offset.to_string()}"] + [
            f"flat basis: {b.to_string()}" for b in flat.basis
        ]
    elif args.kind == "thickness":
        value = pipeline.brute_force_thickness(g, max_vars=args.cap or 4)
        report = {"kind": "thickness", "thickness": value}
        human = [f"thickness: {value}"]
    else:
        result = exhaustive_hitting_set(g, budget=args.budget, node_limit=args.node_limit)
        if result is None:
            report = {"kind": "hitting-set", "optimum": None, "variables": None}
            human = ["optimum: exceeds budget"]
        else:
            variables = sorted(result)
            report = {
                "kind": "hitting-set",
                "optimum": len(variables),
                "variables": variables,
            }
            human = [
                f"optimum: {len(variables)}",
                "variables: " + " ".join(f"x{v}" for v in variables),
            ]
        if args.budget is not None:
            report["budget"] = args.budget
    if args.json:
        _emit_json(report)
    else:
        for line in human:
            print(line)
    return EXIT_OK


def cmd_experiment(args) -> int:
    master_seed = _resolve_seed(args.master_seed)
    cfg = experiments.ExperimentConfig(
        kind=args.kind,
        n=args.n,
        trials=args.trials,
        master_seed=master_seed,
        s=args.s,
        k=args.k,
        flats_per_trial=args.flats_per_trial,
        restrictions_per_trial=args.restrictions_per_trial,
        family=args.family,
        inclusion_scale=args.scale,
    )
    report = experiments.run_experiment(cfg)
    print(f"wall clock: {report.wall_clock:.3f}s", file=sys.stderr)
    _write_output(report.to_json_text(), args.out)
    if args.csv is not None:
        Path(args.csv).write_text(report.to_csv_text())
    return EXIT_OK


def _add_function_input_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("file", help="input file, or '-' for stdin")
    p.add_argument(
        "--format",
        choices=["auto", "anf", "container"],
        default="auto",
        help="input format (default: sniff JSON container vs bare ANF)",
    )
    p.add_argument("--n", type=int, default=None, help="variable count for bare ANF input")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anflat",
        description="Boolean function analysis over GF(2): ANF metrics, "
        "constant-flat search, exhaustive oracles, and experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="ANF metrics: sparsity, degree, occurrences")
    _add_function_input_args(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("find-flat", help="find a verified flat on which f is constant")
    _add_function_input_args(p)
    p.add_argument("--epsilon", type=float, default=None, help="exponent for the dimension floor")
    p.add_argument("--samples", type=int, default=pipeline.DEFAULT_SAMPLE_CAP)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_find_flat)

    p = sub.add_parser("verify-flat", help="check a claimed constant flat")
    _add_function_input_args(p)
    p.add_argument("--flat", required=True, help="flat file (text or JSON)")
    p.add_argument("--constant", type=int, choices=[0, 1], default=None)
    p.add_argument("--samples", type=int, default=pipeline.DEFAULT_SAMPLE_CAP)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify_flat)

    p = sub.add_parser("convert", help="convert between ANF and truth table")
    p.add_argument("file", help="input file, or '-' for stdin")
    p.add_argument("--from", dest="source", choices=["anf", "truth-table"], required=True)
    p.add_argument("--to", dest="target", choices=["anf", "truth-table"], required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("gen", help="generate a named function family")
    p.add_argument(
        "family",
        choices=[
            "majority",
            "all-ones",
            "prop6",
            "prop6-family",
            "complete3",
            "rand3-half",
            "rand3-sparse",
        ],
    )
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--m", type=int, default=1, help="blocks parameter for prop6-family")
    p.add_argument("--s", type=float, default=None, help="sparsity exponent for rand3-sparse")
    p.add_argument("--scale", type=float, default=0.5, help="inclusion probability scale")
    p.add_argument("--seed", type=_seed_arg, default=None, help="decimal or 0x hex")
    p.add_argument("--out", default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("oracle", help="exact small-n oracles")
    p.add_argument("kind", choices=["normality", "thickness", "hitting-set"])
    _add_function_input_args(p)
    p.add_argument("--budget", type=int, default=None, help="hitting-set size budget")
    p.add_argument("--node-limit", type=int, default=1_000_000)
    p.add_argument("--cap", type=int, default=None, help="override the size cap")
    p.add_argument("--threads", type=int, default=1, help="worker cap (runs are serial today)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("experiment", help="seed-deterministic Monte Carlo runs")
    p.add_argument(
        "kind",
        choices=[
            experiments.KIND_SAMPLER,
            experiments.KIND_FLATS,
            experiments.KIND_RESTRICTIONS,
        ],
    )
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--flats-per-trial", type=int, default=50)
    p.add_argument("--restrictions-per-trial", type=int, default=50)
    p.add_argument("--family", choices=["rand3-sparse", "rand3-half"], default="rand3-sparse")
    p.add_argument("--scale", type=float, default=None)
    p.add_argument("--master-seed", type=_seed_arg, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--csv", default=None)
    p.add_argument("--threads", type=int, default=1, help="worker cap (runs are serial today)")
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except VerificationError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except AnflatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
