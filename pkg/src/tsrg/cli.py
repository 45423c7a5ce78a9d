"""Command-line harness: extract / synth / run / grid / report."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .data import (SynthSpec, ingest_csv, ingest_manifest, load_manifest,
                   synth_generate, write_dataset_csv)
from .errors import TsrgError
from .experiment import (ExperimentConfig, emit_records, grid_search,
                         parse_records, run_experiment)
from .kernels import KernelSpec
from .lbptop import LbpTopParams
from .metrics import EvalReport, render_text
from .solver import SolverConfig, save_model


def _add_experiment_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--source", required=True, help="source dataset CSV")
    p.add_argument("--target", required=True, help="target dataset CSV")
    p.add_argument("--kernel", choices=["linear", "gaussian"], default="linear")
    p.add_argument("--bandwidth", type=float, default=None,
                   help="gaussian bandwidth (default: median heuristic)")
    p.add_argument("--kappa0", type=float, default=0.1)
    p.add_argument("--rho", type=float, default=1.1)
    p.add_argument("--kappa-max", type=float, default=1e7)
    p.add_argument("--epsilon", type=float, default=1e-7)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--penalty-c", type=float, default=1.0)
    p.add_argument("--standardize", action="store_true",
                   help="per-dimension standardization fitted on source")
    p.add_argument("--train-on-regenerated", action="store_true",
                   help="train the classifier on regenerated source samples")
    p.add_argument("--label-map", default=None,
                   help="JSON file mapping old label -> new label (null drops)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", required=True)


def _load_datasets(args):
    label_map = None
    if args.label_map:
        label_map = json.loads(Path(args.label_map).read_text())
    source = ingest_csv(args.source, label_map)
    target = ingest_csv(args.target, label_map, class_names=source.class_names)
    return source, target


def _experiment_config(args, lam: float, mu: float) -> ExperimentConfig:
    return ExperimentConfig(
        kernel=KernelSpec(args.kernel, args.bandwidth),
        solver=SolverConfig(lam=lam, mu=mu, kappa0=args.kappa0, rho=args.rho,
                            kappa_max=args.kappa_max, epsilon=args.epsilon,
                            max_iters=args.max_iters),
        penalty_c=args.penalty_c,
        standardize=args.standardize,
        train_on_regenerated=args.train_on_regenerated,
        seed=args.seed,
    )


def _parse_grid(text: str) -> list[float]:
    vals = [float(v) for v in text.split(",") if v.strip()]
    if not vals:
        raise ValueError("empty grid")
    return vals


def cmd_synth(args) -> int:
    raw = json.loads(Path(args.spec).read_text())
    if args.seed is not None:
        raw["seed"] = args.seed
    for key in ("centers", "shift_matrix", "shift_offset"):
        if raw.get(key) is not None:
            raw[key] = np.asarray(raw[key], dtype=np.float64)
    spec = SynthSpec(**raw)
    source, target = synth_generate(spec)
    write_dataset_csv(args.out_source, source)
    write_dataset_csv(args.out_target, target)
    print(f"wrote {source.features.n} source / {target.features.n} target samples")
    return 0


def cmd_extract(args) -> int:
    params = LbpTopParams(radius=args.radius, points=args.points,
                          grids=tuple(int(g) for g in args.grids.split(",")))
    manifest = load_manifest(args.manifest)
    manifest.validate_counts()
    dataset = ingest_manifest(manifest, feature_mode="lbptop", lbp_params=params)
    write_dataset_csv(args.out, dataset)
    print(f"wrote {dataset.features.n} feature vectors of length {dataset.features.d}")
    return 0


def cmd_run(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    source, target = _load_datasets(args)
    config = _experiment_config(args, args.lam, args.mu)
    result = run_experiment(source, target, config)
    # write everything or nothing: render first, then persist
    records = emit_records(result, args.source, args.target)
    from .experiment import render_result
    text = render_result(result, args.source, args.target)
    (out_dir / "report.jsonl").write_text(records)
    (out_dir / "report.txt").write_text(text)
    save_model(result.model, out_dir / "model.npz")
    print(text)
    return 0


def cmd_grid(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    source, target = _load_datasets(args)
    config = _experiment_config(args, 1.0, 1e-3)
    rows = grid_search(source, target, config,
                       _parse_grid(args.lambda_grid), _parse_grid(args.mu_grid))
    records = emit_records(rows, args.source, args.target)
    lines = ["  lambda        mu       WAR       UAR"]
    for row in rows:
        flag = "  <- best" if row.best else ""
        lines.append(f"{row.lam:8g}  {row.mu:8g}  {row.war:8.4f}  {row.uar:8.4f}{flag}")
    table = "\n".join(lines) + "\n"
    (out_dir / "grid.jsonl").write_text(records)
    (out_dir / "grid.txt").write_text(table)
    print(table)
    return 0


def cmd_report(args) -> int:
    for rec in parse_records(Path(args.records).read_text()):
        header = f"{rec.get('source', '?')} -> {rec.get('target', '?')}"
        if rec.get("lambda") is not None:
            header += f"  (lambda={rec['lambda']}, mu={rec['mu']})"
        print(header)
        print(render_text(EvalReport.from_dict(rec["baseline"]), "baseline (no adaptation)"))
        print(render_text(EvalReport.from_dict(rec["tsrg"]), "re-generated target"))
        print(f"mmd: {rec['mmd_before']:.6g} -> {rec['mmd_after']:.6g}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsrg",
        description="Unsupervised domain adaptation by target sample re-generation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a shifted-Gaussian dataset pair")
    p.add_argument("--spec", required=True, help="JSON file with the synthesis spec")
    p.add_argument("--seed", type=int, default=None, help="override the spec seed")
    p.add_argument("--out-source", required=True)
    p.add_argument("--out-target", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="extract LBP-TOP features from clips")
    p.add_argument("--manifest", required=True)
    p.add_argument("--radius", type=int, default=3)
    p.add_argument("--points", type=int, default=8)
    p.add_argument("--grids", default="1,2,4,8")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("run", help="run one adaptation experiment")
    _add_experiment_args(p)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=1e-3)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("grid", help="grid search over (lambda, mu)")
    _add_experiment_args(p)
    p.add_argument("--lambda-grid", required=True, help="comma-separated values")
    p.add_argument("--mu-grid", required=True, help="comma-separated values")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("report", help="render tables from a records file")
    p.add_argument("--records", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TsrgError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
