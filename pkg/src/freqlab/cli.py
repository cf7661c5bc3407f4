"""Command-line interface: ``freqlab construct | analyze | emit-plot``.

Exit codes: 0 on success, 1 on input, output or configuration errors, 2
when a construction violates one of its own error bounds.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path
from typing import Any

import numpy as np

from . import builder, credal, frequency
from .errors import FreqlabError
from .sequence import SymbolSequence, read_sequence, write_sequence
from .simplex import Lemniscate, curve_from_json, ternary_xy

EXIT_OK, EXIT_INPUT, EXIT_BOUND = 0, 1, 2

SEED_ENV = "FREQLAB_SEED"


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors; exit status 2 is reserved for bound violations
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def seed_from_env(default: int = 0) -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from exc


def _positive(kind):
    def parse(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value

    return parse


def _load_json(text_or_path: str) -> Any:
    """Parse inline JSON, or read it from a file when given a path."""
    stripped = text_or_path.lstrip()
    if stripped.startswith(("{", "[")):
        return json.loads(text_or_path)
    return json.loads(Path(text_or_path).read_text())


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return _jsonable(value.item())
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    return value


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(_jsonable(report), indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


# ------------------------------------------------------------ construct


def _schedules(args) -> builder.Schedules:
    t_kind = args.T_schedule or ("const" if args.T is not None else "sqrt")
    v_kind = args.V_schedule or ("const" if args.V is not None else "linear")
    return builder.Schedules(
        v_kind=v_kind,
        v0=args.V if args.V is not None else 30,
        t_kind=t_kind,
        t0=args.T if args.T is not None else 12,
    )


def cmd_construct(args) -> int:
    config: dict[str, Any] = {"subcommand": "construct"}
    trace = None
    if args.curve or args.polygon:
        if args.curve:
            if args.curve != "lemniscate3":
                raise ConfigError(f"unknown curve {args.curve!r}")
            curve = Lemniscate()
        else:
            obj = _load_json(args.polygon)
            curve = curve_from_json(obj if "polygon" in obj else {"polygon": obj})
        if args.generations is None and args.max_length is None:
            raise ConfigError("curve constructions need --generations or --max-length")
        sched = _schedules(args)
        config.update(
            curve=curve.to_json(),
            schedules=sched.to_json(),
            generations=args.generations,
            max_length=args.max_length,
        )
        result = builder.construct_for_curve(
            curve,
            sched,
            generations=args.generations,
            max_length=args.max_length,
            strict=False,
        )
        seq, trace = result.sequence, result.trace
        config["budget_exceeded"] = result.budget_exceeded
    elif args.extreme:
        config.update(kind="extreme", k=args.k, alpha=args.alpha, segments=args.segments)
        seq = builder.construct_extreme(args.k, args.alpha, args.segments)
    elif args.doubling:
        config.update(kind="doubling", length=args.length)
        seq = builder.von_mises_doubling(args.length)
    elif args.counterexample:
        config.update(kind="counterexample", length=args.length)
        seq = builder.pre_dynkin_counterexample(args.length)
    else:
        raise ConfigError("choose one of --curve, --polygon, --extreme, --doubling, --counterexample")

    out = Path(args.out)
    write_sequence(out, seq, binary=args.binary)
    summary: dict[str, Any] = {"config": config, "length": len(seq), "k": seq.k, "sequence": str(out)}
    code = EXIT_OK
    if trace is not None:
        trace_path = out.with_name(out.name + ".trace.jsonl")
        with trace_path.open("w") as fh:
            for rec in trace:
                row = dict(vars(rec))
                row["violations"] = rec.violations
                fh.write(json.dumps(_jsonable(row)) + "\n")
        bad = [(i, v) for i, rec in enumerate(trace) for v in rec.violations]
        summary.update(
            trace=str(trace_path),
            segments=len(trace),
            skipped=sum(rec.skipped for rec in trace),
            clipped=sum(rec.clipped for rec in trace),
            bound_violations=len(bad),
        )
        if bad:
            code = EXIT_BOUND
    _emit(summary, None)
    return code


# -------------------------------------------------------------- analyze


def _policy(args) -> frequency.TailPolicy:
    if args.tail_start is not None:
        return frequency.TailPolicy.fixed(args.tail_start)
    return frequency.TailPolicy(beta=args.tail_beta)


def cmd_analyze(args) -> int:
    seq = read_sequence(args.seq)
    spec = _load_json(args.spec) if args.spec else {}
    k = seq.k
    policy = _policy(args)
    gambles = {
        name: frequency.as_gamble(values, k) for name, values in spec.get("gambles", {}).items()
    }
    events = {
        name: frequency.event_mask(members, k) for name, members in spec.get("events", {}).items()
    }
    C = None
    if args.credal:
        C = credal.CredalSet.from_json(_load_json(args.credal))
        if C.k != k:
            raise ConfigError(f"credal set has k={C.k}, sequence has k={k}")
    N = len(seq)
    report: dict[str, Any] = {
        "config": {
            "subcommand": "analyze",
            "sequence": str(args.seq),
            "k": k,
            "N": N,
            "policy": policy.to_json(),
            "window": [policy.start(N), N],
            "tol": args.tol,
            "eps": args.eps,
            "gbr_threshold": args.gbr_threshold,
        }
    }
    upper_fn = frequency.sequence_functional(seq, policy)

    g_out = {}
    for name, X in gambles.items():
        entry: dict[str, Any] = {
            "upper": frequency.upper_prevision_estimate(seq, X, policy),
            "lower": frequency.lower_prevision_estimate(seq, X, policy),
        }
        if C is not None:
            env = credal.upper_prevision(C, X).value
            entry["credal_upper"] = env
            entry["credal_lower"] = credal.lower_prevision(C, X)
            entry["credal_gap"] = abs(entry["upper"] - env)
        conditional = {}
        for bname, B in events.items():
            if frequency.event_counts(seq, B)[-1] == 0:
                conditional[bname] = {"never_occurred": True}
                continue
            lower_B = frequency.lower_probability_estimate(seq, B, policy)
            c_entry: dict[str, Any] = {
                "upper": frequency.conditional_upper_prevision_estimate(seq, X, B, policy),
                "lower": frequency.conditional_lower_prevision_estimate(seq, X, B, policy),
                "lower_probability_B": lower_B,
                "near_zero_B": lower_B <= args.gbr_threshold,
            }
            try:
                c_entry["gbr_root"] = credal.gbr_root(upper_fn, X, B)
            except FreqlabError as exc:
                c_entry["gbr_root_error"] = str(exc)
            if C is not None:
                try:
                    c_entry["gbr_credal"] = credal.gbr_credal(C, X, B)
                    c_entry["gbr_diverges"] = abs(c_entry["upper"] - c_entry["gbr_credal"]) > args.tol
                except FreqlabError as exc:
                    c_entry["gbr_credal_error"] = str(exc)
            conditional[bname] = c_entry
        entry["conditional"] = conditional
        g_out[name] = entry
    report["gambles"] = g_out

    e_out = {}
    for name, A in events.items():
        w = frequency.event_window(seq, A, policy)
        entry = {
            "upper": float(w.upper),
            "lower": float(w.lower),
            "width": w.width,
            "precise": w.width <= args.tol,
        }
        irr = {}
        for bname, B in events.items():
            if bname == name or frequency.event_counts(seq, B)[-1] == 0:
                continue
            r = frequency.irrelevance_check(seq, A, B, policy, args.tol)
            irr[bname] = {"gap": r.gap, "irrelevant": r.irrelevant}
        entry["irrelevance_given"] = irr
        if C is not None:
            entry["credal_upper"] = credal.upper_probability(C, A)
            entry["credal_lower"] = credal.lower_probability(C, A)
        e_out[name] = entry
    report["events"] = e_out
    report["cluster_centers"] = frequency.cluster_point_estimate(seq, policy, args.eps)
    _emit(report, args.out)
    return EXIT_OK


# ------------------------------------------------------------ emit-plot


def plot_rows(seq: SymbolSequence, stride: int) -> list[list]:
    N = len(seq)
    idx = list(range(stride, N + 1, stride))
    if not idx or idx[-1] != N:
        idx.append(N)
    idx_arr = np.array(idx)
    r = seq.prefix_counts[idx_arr] / idx_arr[:, None]
    rows = []
    xy = ternary_xy(r) if seq.k == 3 else None
    for j, n in enumerate(idx):
        row = [n, *r[j].tolist()]
        if xy is not None:
            row += xy[j].tolist()
        rows.append(row)
    return rows


def cmd_emit_plot(args) -> int:
    seq = read_sequence(args.seq)
    if args.k is not None and args.k != seq.k:
        raise ConfigError(f"expected k={args.k}, sequence has k={seq.k}")
    header = ["n", *[f"r{i}" for i in range(1, seq.k + 1)]]
    if seq.k == 3:
        header += ["x", "y"]
    rows = plot_rows(seq, args.stride)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([row[0], *(repr(v) for v in row[1:])])
    finally:
        if args.out:
            fh.close()
    return EXIT_OK


# --------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="freqlab",
        description="Build and analyze sequences with imprecise relative frequencies.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("construct", help="build a sequence and write it to --out")
    kind = c.add_mutually_exclusive_group(required=True)
    kind.add_argument("--curve", help="builtin closed curve (lemniscate3)")
    kind.add_argument("--polygon", help="polygon JSON, inline or as a file path")
    kind.add_argument("--extreme", action="store_true", help="vertex-cycling construction")
    kind.add_argument("--doubling", action="store_true", help="blocks 1,1,2,2,4,4,... over 2 symbols")
    kind.add_argument("--counterexample", action="store_true", help="labels with run lengths 1,1,2,2,4,4,...")
    c.add_argument("--V", type=_positive(int), help="polygon vertices per generation")
    c.add_argument("--V-schedule", dest="V_schedule", choices=["const", "linear"])
    c.add_argument("--T", type=_positive(int), help="quantization level")
    c.add_argument("--T-schedule", dest="T_schedule", choices=["sqrt", "const"])
    c.add_argument("--generations", type=_positive(int))
    c.add_argument("--max-length", type=_positive(int))
    c.add_argument("--k", type=_positive(int), default=3)
    c.add_argument("--alpha", type=float, default=1.5)
    c.add_argument("--segments", type=_positive(int), default=12)
    c.add_argument("--length", type=_positive(int), default=2**20)
    c.add_argument("--binary", action="store_true", help="write the binary format")
    c.add_argument("--out", default="sequence.txt")
    c.set_defaults(func=cmd_construct)

    a = sub.add_parser("analyze", help="estimate previsions, conditionals and cluster points")
    a.add_argument("--seq", required=True)
    a.add_argument("--spec", help="gambles/events JSON, inline or as a file path")
    a.add_argument("--credal", help="credal set JSON to compare against")
    a.add_argument("--tail-beta", type=float, default=0.5)
    a.add_argument("--tail-start", type=_positive(int))
    a.add_argument("--tol", type=_positive(float), default=0.02)
    a.add_argument("--eps", type=_positive(float), default=0.05)
    a.add_argument("--gbr-threshold", type=_positive(float), default=0.01)
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    for name in ("emit-plot", "emit_plot"):
        p = sub.add_parser(name, help="CSV of relative frequencies every --stride symbols")
        p.add_argument("--seq", required=True)
        p.add_argument("--stride", type=_positive(int), default=100)
        p.add_argument("--k", type=_positive(int))
        p.add_argument("--out")
        p.set_defaults(func=cmd_emit_plot)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        seed_from_env()
        return args.func(args)
    except (ConfigError, FreqlabError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"freqlab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
