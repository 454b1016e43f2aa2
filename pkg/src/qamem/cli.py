"""Command-line harness for the storage, retrieval, thermodynamics,
mean-field and classical-baseline experiments.

Every command that uses randomness takes an explicit 64-bit --seed and is
byte-deterministic: per-task seeds are derived with a splitmix64 mix (see
:mod:`.seeds`), so the output is identical across runs and across worker
counts.  Floats are printed with 17 significant digits in both JSON and
CSV output.  Exit codes: 0 success, 2 validation error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import classical, meanfield, memory, retrieval, thermo
from .patterns import Mask, Pattern, PatternError, corrupt, read_pattern_file
from .seeds import task_rng

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3


class NumericFailure(RuntimeError):
    pass


# ---------------------------------------------------------------- output


def format_float(x: float) -> str:
    return format(x, ".17g")


def emit_json(obj, indent: int = 0) -> str:
    """Minimal JSON emitter printing floats with 17 significant digits."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{inner}"{key}": {emit_json(value, indent + 1)}'
            for key, value in obj.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [inner + emit_json(value, indent + 1) for value in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return {True: "true", False: "false", None: "null"}[obj]
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, int):
        return str(obj)
    return '"' + str(obj).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _write_output(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


# ---------------------------------------------------------------- parsing


def parse_grid(spec: str, name: str) -> list[float]:
    """Grid syntax: 'lin:LO:HI:COUNT', 'log:LO:HI:COUNT' or 'v1,v2,...'."""
    try:
        if spec.startswith(("lin:", "log:")):
            kind, lo, hi, count = spec.split(":")
            lo, hi, count = float(lo), float(hi), int(count)
            if count < 2 or not hi > lo:
                raise ValueError
            if kind == "log":
                if lo <= 0:
                    raise ValueError
                return list(np.logspace(math.log10(lo), math.log10(hi), count))
            return list(np.linspace(lo, hi, count))
        values = [float(v) for v in spec.split(",") if v]
        if not values:
            raise ValueError
        return values
    except ValueError:
        raise PatternError(
            f"bad {name} grid {spec!r}: use lin:LO:HI:COUNT, log:LO:HI:COUNT "
            "or a comma-separated list"
        ) from None


def _load_patterns(path: str):
    return read_pattern_file(path)


def _parse_input(bits: str, n: int) -> Pattern:
    pat = Pattern.from_string(bits)
    if pat.n != n:
        raise PatternError(
            f"input has {pat.n} bits but stored patterns have {n}"
        )
    return pat


def _parse_mask(spec: str | None, n: int) -> Mask | None:
    if spec is None:
        return None
    try:
        indices = [int(v) for v in spec.split(",") if v]
    except ValueError:
        raise PatternError(f"bad mask {spec!r}: comma-separated indices") from None
    mask = Mask.of(*indices)
    mask.validate(n)
    return mask


# ---------------------------------------------------------------- commands


def cmd_store(args) -> int:
    pattern_set = _load_patterns(args.patterns)
    if args.dry_run:
        count = memory.memory_gate_count(pattern_set.p, pattern_set.n)
        _write_output(f"gates: {count}\n", args.out)
        return EXIT_OK
    build = memory.build_memory_operator(pattern_set)
    doc = {
        "n": pattern_set.n,
        "p": pattern_set.p,
        "gate_count": build.gate_count,
    }
    if pattern_set.n <= 8:
        doc["amplitudes"] = [
            {"pattern": str(pat), "re": amp.real, "im": amp.imag}
            for pat, amp in sorted(
                build.memory_amplitudes().items(), key=lambda kv: str(kv[0])
            )
        ]
    _write_output(emit_json(doc) + "\n", args.out)
    return EXIT_OK


def _report_doc(report, config, seed):
    return {
        "recognized": report.recognized,
        "attempts": report.attempts,
        "output": None if report.output is None else str(report.output),
        "p_rec": report.analytic_p_rec,
        "distribution": [
            {"pattern": str(pat), "prob": prob}
            for pat, prob in sorted(
                report.analytic_dist.items(), key=lambda kv: str(kv[0])
            )
        ],
        "mode": config.mode,
        "b": config.b,
        "T": config.T,
        "seed": seed,
    }


def cmd_retrieve(args) -> int:
    pattern_set = _load_patterns(args.patterns)
    input_pattern = _parse_input(args.input, pattern_set.n)
    mask = _parse_mask(args.mask, pattern_set.n)
    if args.corrupt:
        input_pattern = corrupt(input_pattern, args.corrupt, task_rng(args.seed, 0))
    mode = {"repeat": "repeat_measure", "amplify": "amplitude_amplify"}[args.mode]
    config = retrieval.RetrievalConfig(b=args.b, T=args.T, mode=mode, mask=mask)
    report = retrieval.retrieve(
        pattern_set, input_pattern, config, task_rng(args.seed, 1)
    )
    doc = _report_doc(report, config, args.seed)
    doc["input"] = str(input_pattern)
    _write_output(emit_json(doc) + "\n", args.out)
    return EXIT_OK


def cmd_distribution(args) -> int:
    pattern_set = _load_patterns(args.patterns)
    input_pattern = _parse_input(args.input, pattern_set.n)
    mask = _parse_mask(args.mask, pattern_set.n)
    dist = retrieval.analytic_distribution(
        pattern_set, input_pattern, args.b, mask
    )
    doc = {
        "input": str(input_pattern),
        "b": args.b,
        "p_rec": dist.p_rec,
        "Z": dist.Z,
        "distribution": [
            {"pattern": str(pat), "prob": prob}
            for pat, prob in sorted(dist.probs.items(), key=lambda kv: str(kv[0]))
        ],
    }
    _write_output(emit_json(doc) + "\n", args.out)
    return EXIT_OK


def cmd_thermo(args) -> int:
    grid = parse_grid(args.b_grid, "b")
    try:
        scan = thermo.scan_transition(args.d_over_n, args.n, grid)
    except thermo.UndefinedPotentialsError as exc:
        raise NumericFailure(str(exc)) from exc
    _write_output(scan.to_csv(), args.out)
    return EXIT_OK


def cmd_tune(args) -> int:
    try:
        result = thermo.tune(args.epsilon, args.nu, args.n)
    except thermo.ThermoError as exc:
        if "unattainable" in str(exc):
            raise NumericFailure(str(exc)) from exc
        raise
    doc = {
        "b": result.b,
        "T_repeat": result.T_repeat,
        "T_amplified": result.T_amplified,
        "achieved_D": result.achieved_D,
    }
    _write_output(emit_json(doc) + "\n", args.out)
    return EXIT_OK


def cmd_phase(args) -> int:
    alpha_grid = parse_grid(args.alpha_grid, "alpha")
    jt_grid = parse_grid(args.jt_grid, "Jt")
    params = [
        meanfield.MfParams(alpha=a, Jt=j) for a in alpha_grid for j in jt_grid
    ]
    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            cells = tuple(pool.map(meanfield.classify_phase, params))
    else:
        cells = tuple(meanfield.classify_phase(p) for p in params)
    diagram = meanfield.PhaseDiagram(
        tuple(alpha_grid), tuple(jt_grid), cells
    )
    text = diagram.to_csv()
    jt_near_one = min(jt_grid, key=lambda j: abs(j - 1.0))
    boundary = diagram.max_retrieval_alpha(Jt=jt_near_one)
    summary = (
        f"max retrieval alpha at Jt={format_float(jt_near_one)}: "
        f"{'none' if boundary is None else format_float(boundary)}\n"
    )
    if args.out:
        _write_output(text, args.out)
        sys.stdout.write(summary)
    else:
        sys.stdout.write(text)
        sys.stderr.write(summary)
    return EXIT_OK


def cmd_classical(args) -> int:
    alpha_grid = parse_grid(args.alpha_grid, "alpha")
    table = classical.capacity_experiment_seeded(
        args.n,
        alpha_grid,
        trials=args.trials,
        corruption=args.corruption,
        seed=args.seed,
        workers=args.workers,
    )
    _write_output(table.to_csv(), args.out)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _add_common(sub, patterns=False, seed=False):
    sub.add_argument("--out", help="write output to this path instead of stdout")
    sub.add_argument(
        "--format",
        choices=("csv", "json"),
        default=None,
        help="output format (each command has a single native format)",
    )
    if patterns:
        sub.add_argument(
            "--patterns", required=True, help="pattern file, one bit-string per line"
        )
    if seed:
        sub.add_argument(
            "--seed", type=int, required=True, help="64-bit master seed"
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qamem",
        description="probabilistic quantum associative memory toolkit",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("store", help="build the memory state from a pattern file")
    _add_common(s, patterns=True)
    s.add_argument("--dry-run", action="store_true", help="print gate count only")
    s.set_defaults(func=cmd_store)

    s = subs.add_parser("retrieve", help="run seeded probabilistic retrieval")
    _add_common(s, patterns=True, seed=True)
    s.add_argument("--input", required=True, help="input bit string")
    s.add_argument(
        "--corrupt", type=int, default=0, help="flip this many random input bits"
    )
    s.add_argument("--mask", help="comma-separated known-bit indices")
    s.add_argument("--b", type=int, default=1, help="control qubits (default 1)")
    s.add_argument("--T", type=int, default=1, help="attempt threshold (default 1)")
    s.add_argument(
        "--mode", choices=("repeat", "amplify"), default="repeat",
        help="repeat-until-recognized or amplitude amplification",
    )
    s.set_defaults(func=cmd_retrieve)

    s = subs.add_parser(
        "distribution", help="analytic recognition/output distribution (no RNG)"
    )
    _add_common(s, patterns=True)
    s.add_argument("--input", required=True, help="input bit string")
    s.add_argument("--mask", help="comma-separated known-bit indices")
    s.add_argument("--b", type=int, default=1, help="control qubits (default 1)")
    s.set_defaults(func=cmd_distribution)

    s = subs.add_parser("thermo", help="effective-distance/entropy scan over b")
    _add_common(s)
    s.add_argument("--d-over-n", type=float, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument(
        "--b-grid", default="log:0.01:100000:29",
        help="lin:LO:HI:COUNT, log:LO:HI:COUNT or comma list",
    )
    s.set_defaults(func=cmd_thermo)

    s = subs.add_parser("tune", help="smallest b meeting an accuracy target")
    _add_common(s)
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--nu", type=float, required=True)
    s.add_argument("--n", type=int, required=True)
    s.set_defaults(func=cmd_tune)

    s = subs.add_parser("phase", help="mean-field phase diagram scan")
    _add_common(s)
    s.add_argument("--alpha-grid", default="lin:0.02:1.2:60")
    s.add_argument("--jt-grid", default="lin:0.2:12:60")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_phase)

    s = subs.add_parser("classical", help="classical Hopfield capacity experiment")
    _add_common(s, seed=True)
    s.add_argument("--n", type=int, default=500)
    s.add_argument("--alpha-grid", default="lin:0.05:0.25:5")
    s.add_argument("--trials", type=int, default=20)
    s.add_argument(
        "--corruption", type=float, default=0.05, help="input corruption rate"
    )
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_classical)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", None) is not None and not 0 <= args.seed < 2**64:
        parser.exit(EXIT_VALIDATION, "qamem: seed must fit in 64 bits\n")
    try:
        return args.func(args)
    except NumericFailure as exc:
        sys.stderr.write(f"qamem: numeric failure: {exc}\n")
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        # module error types are ValueError subclasses (bad files, bad ranges)
        sys.stderr.write(f"qamem: {exc}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
