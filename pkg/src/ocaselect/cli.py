"""Command-line entry point: dataset generation, selection runs, method
comparison reports, and the coordinate-descent convergence checks.

Exit codes: 0 success, 1 usage error, 2 data error, 3 bound/acceptance
failure. All randomness funnels through three explicit seeds (data seed,
split seed, model seed) which are echoed in every report.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .ascent import OcaConfig, SelectionResult, run_oca
from .baselines import RfeConfig, rfe_sweep, run_bca, run_rfe
from .convergence import (
    check_linear_bound,
    check_sublinear_bound,
    lemma1_check,
    make_quadratic,
)
from .data import BlockSpec, DataError, Dataset, generate_synthetic, load_csv, save_csv, split
from .gbm import GbmConfig
from .masks import popcount_pct

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_CHECK = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; usage errors are exit 1 here
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _target_list(text: str) -> list[int]:
    """Either '40,30,20' or a descending range '40..20'."""
    if ".." in text:
        hi, lo = text.split("..", 1)
        try:
            hi, lo = int(hi), int(lo)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad target range {text!r}")
        if hi < lo:
            hi, lo = lo, hi
        return list(range(hi, lo - 1, -1))
    return _int_list(text)


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_trace_csv(path: Path, result: SelectionResult) -> None:
    lines = ["step,phase,score,popcount"]
    for i, e in enumerate(result.trace):
        lines.append(f"{i},{e.phase},{e.score!r},{e.popcount}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _gbm_config(args) -> GbmConfig:
    return GbmConfig(
        n_trees=args.trees,
        max_depth=args.depth,
        learning_rate=args.lr,
        min_samples_leaf=args.min_leaf,
        seed=args.model_seed,
    )


def _add_select_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="CSV with a 'label' column")
    p.add_argument("--spec", required=True, help="block layout JSON sidecar")
    p.add_argument("--train-frac", type=float, default=0.7)
    p.add_argument("--seed", type=int, default=0, help="search seed (echoed in reports)")
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--model-seed", type=int, default=0)
    p.add_argument("--trees", type=int, default=50)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--min-leaf", type=int, default=5)
    p.add_argument("--eps1", type=float, default=1e-6)
    p.add_argument("--eps2", type=float, default=1e-6)
    p.add_argument("--itmax1", type=int, default=20)
    p.add_argument("--itmax2", type=int, default=50)
    p.add_argument("--rfe-target", type=int, default=None,
                   help="number of features rfe keeps (required for --method rfe)")
    p.add_argument("--rfe-step", type=int, default=1)
    p.add_argument("--rfe-targets", type=_target_list, default=None,
                   help="descending targets for an rfe sweep, e.g. 40..20 or 40,30,20")


def build_parser() -> _Parser:
    parser = _Parser(prog="ocaselect", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[], help="write a synthetic CSV + layout JSON")
    g.add_argument("--blocks", type=_int_list, default=[20, 20, 20, 20, 20, 30],
                   help="comma-separated block lengths")
    g.add_argument("--singles", type=int, default=5)
    g.add_argument("--samples", type=int, default=1500)
    g.add_argument("--informative", type=int, default=4,
                   help="informative columns per block")
    g.add_argument("--noise", type=float, default=0.5)
    g.add_argument("--seed", type=int, default=0, help="data seed")
    g.add_argument("--out", default="synthetic", help="output path prefix")

    s = sub.add_parser("select", help="run one selection method, write report + trace")
    _add_select_flags(s)
    s.add_argument("--method", required=True, choices=["oca", "bca", "rfe"])
    s.add_argument("--out", default=None, help="report JSON path (default <method>_report.json)")
    s.add_argument("--dump-model", default=None,
                   help="also dump the final refit model as nested-node JSON")

    c = sub.add_parser("compare", help="run several methods on one shared split")
    _add_select_flags(c)
    c.add_argument("--methods", default="oca,bca",
                   help="comma-separated subset of oca,bca,rfe")
    c.add_argument("--out", default="comparison.json", help="report JSON path")

    v = sub.add_parser("convergence", help="randomized coordinate descent bound checks")
    v.add_argument("--dim", type=_int_list, default=[2, 20], help="problem sizes")
    v.add_argument("--cond", type=_float_list, default=[10.0, 100.0], help="condition numbers")
    v.add_argument("--runs", type=int, default=100)
    v.add_argument("--steps", type=int, default=2000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--bad-step", action="store_true",
                   help="fault injection: double the step size, checks must fail")
    v.add_argument("--out", default="convergence", help="output path prefix")

    return parser


def _result_row(name: str, result: SelectionResult, spec: BlockSpec, wall: float, config: dict) -> dict:
    return {
        "method": name,
        "n_selected": result.mask.popcount(),
        "pct_features": popcount_pct(result.mask),
        "score": result.score,
        "evaluations": result.evaluations,
        "candidates_tested": result.candidates_tested,
        "stop_reason": result.stop_reason,
        "mask_bits": result.mask.to_bitstring(),
        "selected_columns": result.mask.selected_names(spec),
        "config": config,
        "wall_time_sec": wall,
    }


def _dataset_fingerprint(ds: Dataset, path: str) -> dict:
    return {
        "rows": ds.n_samples,
        "features": ds.n_features,
        "n_blocks": ds.spec.n_blocks,
        "n_singles": ds.spec.n_singles,
        "content_hash": ds.content_hash(),
        "source": str(path),
    }


def _run_one_method(method: str, sp, args):
    gbm = _gbm_config(args)
    start = time.perf_counter()
    if method == "oca":
        cfg = OcaConfig(eps1=args.eps1, eps2=args.eps2,
                        itmax1=args.itmax1, itmax2=args.itmax2, seed=args.seed)
        result = run_oca(sp, gbm, cfg)
        config = {"gbm": asdict(gbm), "oca": asdict(cfg)}
    elif method == "bca":
        result = run_bca(sp, gbm, eps=args.eps2, itmax=args.itmax2)
        config = {"gbm": asdict(gbm), "bca": {"eps": args.eps2, "itmax": args.itmax2}}
    elif method == "rfe":
        if args.rfe_target is None:
            raise UsageError(
                "method 'rfe' requires the number of features to keep: pass --rfe-target"
            )
        rfe = RfeConfig(n_features_to_select=args.rfe_target, step=args.rfe_step)
        result = run_rfe(sp, gbm, rfe)
        config = {"gbm": asdict(gbm), "rfe": asdict(rfe)}
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown method {method!r}")
    wall = time.perf_counter() - start
    return result, config, wall


class UsageError(Exception):
    pass


def cmd_generate(args) -> int:
    spec = BlockSpec.from_lengths(args.blocks, n_singles=args.singles)
    ds = generate_synthetic(
        spec,
        n_samples=args.samples,
        n_informative_per_block=args.informative,
        noise=args.noise,
        seed=args.seed,
    )
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    csv_path = prefix.with_suffix(".csv")
    spec_path = prefix.with_suffix(".spec.json")
    save_csv(ds, csv_path)
    spec.save(spec_path)
    print(f"wrote {csv_path} ({ds.n_samples} rows x {ds.n_features} features + label)")
    print(f"wrote {spec_path} ({spec.n_blocks} blocks, {spec.n_singles} singles)")
    return EXIT_OK


def _load_split(args):
    ds = load_csv(args.data, args.spec)
    sp = split(ds, args.train_frac, args.split_seed)
    return ds, sp


def _cmd_rfe_sweep(args, ds, sp) -> int:
    """Score-vs-size curve over descending targets (``--rfe-targets``)."""
    out = Path(args.out) if args.out else Path("rfe_sweep_report.json")
    gbm = _gbm_config(args)
    start = time.perf_counter()
    curve = rfe_sweep(sp, gbm, args.rfe_targets)
    wall = time.perf_counter() - start
    rows = [
        _result_row(f"rfe[{target}]", result, ds.spec, wall, {"gbm": asdict(gbm)})
        for target, result in curve
    ]
    report = {
        "schema": SCHEMA_VERSION,
        "dataset": _dataset_fingerprint(ds, args.data),
        "split": {"train_fraction": args.train_frac, "seed": args.split_seed},
        "targets": args.rfe_targets,
        "curve": rows,
    }
    _write_json(out, report)
    csv_path = out.parent / (out.stem + ".curve.csv")
    lines = ["target,n_selected,pct_features,score,evaluations"]
    for (target, result), row in zip(curve, rows):
        lines.append(
            f"{target},{row['n_selected']},{row['pct_features']!r},"
            f"{row['score']!r},{row['evaluations']}"
        )
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"rfe sweep over {len(curve)} targets -> {out}, curve -> {csv_path}")
    return EXIT_OK


def cmd_select(args) -> int:
    ds, sp = _load_split(args)
    if args.method == "rfe" and args.rfe_targets:
        return _cmd_rfe_sweep(args, ds, sp)
    result, config, wall = _run_one_method(args.method, sp, args)
    out = Path(args.out) if args.out else Path(f"{args.method}_report.json")
    report = {
        "schema": SCHEMA_VERSION,
        "dataset": _dataset_fingerprint(ds, args.data),
        "split": {"train_fraction": args.train_frac, "seed": args.split_seed},
        "result": _result_row(args.method, result, ds.spec, wall, config),
    }
    _write_json(out, report)
    trace_path = out.parent / (out.stem + ".trace.csv")
    _write_trace_csv(trace_path, result)
    if args.dump_model:
        from .gbm import SubsetScorer

        _, model = SubsetScorer(sp, _gbm_config(args)).evaluate_with_model(result.mask)
        _write_json(Path(args.dump_model), model.to_dict())
    print(f"{args.method}: score={result.score:.4f} features={result.mask.popcount()} "
          f"evaluations={result.evaluations} -> {out}")
    return EXIT_OK


def _markdown_table(rows: list[dict]) -> str:
    head = ["Metric"] + [f"{r['method'].upper()} ({r['n_selected']} features)" for r in rows]
    pct = ["% of features"] + [f"{r['pct_features']:.2f}" for r in rows]
    score = ["Score (in %)"] + [f"{100.0 * r['score']:.2f}" for r in rows]
    lines = [
        "| " + " | ".join(head) + " |",
        "|" + "|".join(["---"] * len(head)) + "|",
        "| " + " | ".join(pct) + " |",
        "| " + " | ".join(score) + " |",
        "",
        "| Method | Features | % of features | Score | Evaluations | Candidates | Stop |",
        "|---|---|---|---|---|---|---|",
    ]
    for r in rows:
        lines.append(
            f"| {r['method']} | {r['n_selected']} | {r['pct_features']:.2f} | "
            f"{r['score']:.4f} | {r['evaluations']} | {r['candidates_tested']} | "
            f"{r['stop_reason']} |"
        )
    return "\n".join(lines) + "\n"


def cmd_compare(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    bad = [m for m in methods if m not in ("oca", "bca", "rfe")]
    if bad:
        raise UsageError(f"unknown method(s): {bad}; choose from oca,bca,rfe")
    ds, sp = _load_split(args)
    out = Path(args.out)

    rows = []
    for method in methods:
        result, config, wall = _run_one_method(method, sp, args)
        rows.append(_result_row(method, result, ds.spec, wall, config))
        _write_trace_csv(out.parent / (out.stem + f".{method}.trace.csv"), result)

    report = {
        "schema": SCHEMA_VERSION,
        "dataset": _dataset_fingerprint(ds, args.data),
        "split": {"train_fraction": args.train_frac, "seed": args.split_seed},
        "methods": rows,
    }
    _write_json(out, report)
    md_path = out.parent / (out.stem + ".md")
    md_path.write_text(_markdown_table(rows), encoding="utf-8")
    for r in rows:
        print(f"{r['method']}: score={r['score']:.4f} features={r['n_selected']} "
              f"({r['pct_features']:.2f}%) evaluations={r['evaluations']}")
    print(f"report -> {out}, table -> {md_path}")
    return EXIT_OK


def cmd_convergence(args) -> int:
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    problems = []
    for n in args.dim:
        for cond in args.cond:
            problems.append((n, cond, make_quadratic(n, cond, seed=args.seed + len(problems))))

    all_ok = True
    summary = {"schema": SCHEMA_VERSION, "seed": args.seed, "runs": args.runs,
               "steps": args.steps, "bad_step": args.bad_step, "problems": [], "lemma": []}
    for n, cond, p in problems:
        step_size = (2.0 / p.L_max) if args.bad_step else None
        sub = check_sublinear_bound(p, args.steps, args.runs, args.seed, step_size=step_size)
        lin = check_linear_bound(p, args.steps, args.runs, args.seed, step_size=step_size)
        all_ok &= sub.passed and lin.passed

        csv_path = out.parent / (out.stem + f".n{n}_c{cond:g}.csv")
        lines = ["k,mean_gap,bound_sublinear,bound_linear"]
        for k in range(args.steps + 1):
            lines.append(
                f"{k},{sub.mean_gap[k]!r},{sub.bound[k]!r},{lin.bound[k]!r}"
            )
        csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

        one_step_exact = bool(abs(sub.mean_gap[1]) <= 1e-12 * max(1.0, p.initial_gap()))
        summary["problems"].append({
            "n": n, "cond": cond,
            "sigma": p.sigma, "L_max": p.L_max, "R0": p.R0,
            "rate_factor": lin.rate_factor,
            "sublinear": {"passed": sub.passed, "max_ratio": sub.max_ratio, "worst_k": sub.worst_k},
            "linear": {"passed": lin.passed, "max_ratio": lin.max_ratio, "worst_k": lin.worst_k},
            "descent_ok": sub.descent_ok and lin.descent_ok,
            "one_step_exact": one_step_exact,
            "csv": str(csv_path),
        })
        for rep, name in ((sub, "sublinear"), (lin, "linear")):
            status = "PASS" if rep.passed else "FAIL"
            print(f"[{status}] n={n} cond={cond:g} {name}: "
                  f"max_ratio={rep.max_ratio:.3e} (worst k={rep.worst_k})")

    for a in (0.5, 1.0, 2.0):
        rep = lemma1_check(a=a, u0=0.25 / a, n_terms=10_000)
        all_ok &= rep.passed
        summary["lemma"].append({"a": a, "u0": rep.u0, "passed": rep.passed,
                                 "max_ratio": rep.max_ratio})
        status = "PASS" if rep.passed else "FAIL"
        print(f"[{status}] recurrence bound a={a:g}: max n*a*u_n={rep.max_ratio:.4f}")

    summary["passed"] = bool(all_ok)
    _write_json(out.parent / (out.stem + ".summary.json"), summary)
    print(("all checks passed" if all_ok else "CHECK FAILURES") +
          f" -> {out.parent / (out.stem + '.summary.json')}")
    return EXIT_OK if all_ok else EXIT_CHECK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "generate": cmd_generate,
        "select": cmd_select,
        "compare": cmd_compare,
        "convergence": cmd_convergence,
    }
    try:
        return handlers[args.command](args)
    except UsageError as exc:
        print(f"ocaselect: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, FileNotFoundError, PermissionError) as exc:
        print(f"ocaselect: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"ocaselect: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
