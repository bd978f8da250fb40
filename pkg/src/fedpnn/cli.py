"""Command-line entry point.

    fedpnn run        one-shot experiment from a JSON config and/or flags
    fedpnn sweep      vary client_dthr, server_dthr or sigma over a grid
    fedpnn eval-synth KSComplement / CStest report for a real vs synthetic CSV
    fedpnn partition  write the server/client shard manifest and shard CSVs

Exit codes: 0 success, 1 invalid configuration or flags, 2 data or runtime error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import fields, replace
from pathlib import Path

from .dataset import DataError, breast_cancer_path, load_csv, partition, save_csv
from .federation import FederationConfig, FederationError, run_one_shot
from .synthmetrics import quality_report

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 1, 2
SWEEP_AXES = ("client_dthr", "server_dthr", "sigma")
SWEEP_HEADER = ["axis_value", "node", "local_auc", "global_auc", "neg_centers", "pos_centers"]
BUILTIN_DATASETS = {"breast-cancer": breast_cancer_path}


class ConfigError(ValueError):
    pass


def resolve_input(name) -> Path:
    if name in BUILTIN_DATASETS:
        return BUILTIN_DATASETS[name]()
    return Path(name)


def load_config(path) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at offset {exc.pos}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return raw


def build_config(raw: dict, args) -> tuple[FederationConfig, str, object]:
    """Merge config-file values with command-line flags (flags win)."""
    raw = dict(raw)
    input_path = raw.pop("input", None)
    label_col = raw.pop("label_col", -1)
    known = {f.name for f in fields(FederationConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(sorted(unknown))}")

    overrides = {
        "num_clients": args.clients,
        "b_percent": None if args.server_frac is None else args.server_frac * 100,
        "client_dthr": args.client_dthr,
        "server_dthr": args.server_dthr,
        "sigma": args.sigma,
        "seed": args.seed,
        "client_sharding": args.sharding,
    }
    raw.update({k: v for k, v in overrides.items() if v is not None})
    if args.input is not None:
        input_path = args.input
    if args.label_col is not None:
        label_col = args.label_col
    if input_path is None:
        raise ConfigError("no input dataset given (config 'input' or --input)")
    try:
        cfg = FederationConfig(**raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return cfg, input_path, label_col


def sweep_grid(start: float, stop: float, step: float) -> list[float]:
    if not step > 0:
        raise ConfigError(f"sweep step must be positive, got {step}")
    if not start < stop:
        raise ConfigError(f"sweep start must be below stop, got {start} >= {stop}")
    count = math.floor((stop - start) / step + 1e-9) + 1
    return [round(start + i * step, 10) for i in range(count)]


def sweep_rows(ds, cfg: FederationConfig, axis: str, grid) -> list[list]:
    rows = []
    for value in grid:
        report = run_one_shot(ds, replace(cfg, **{axis: value}))
        for k, (local, glob, counts) in enumerate(
                zip(report.local_auc, report.global_auc, report.local_centers), start=1):
            rows.append([value, f"client_{k}", local, glob, *counts])
        rows.append([value, "server", "", report.server_auc, *report.meta_centers])
    return rows


def write_sweep_csv(rows, path=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    writer.writerows(rows)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def plot_sweep(rows, axis: str, prefix):
    """AUC-vs-value and centers-vs-value curves as SVG files."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    nodes = list(dict.fromkeys(r[1] for r in rows))
    paths = []
    fig, ax = plt.subplots(figsize=(6, 4))
    for node in nodes:
        pts = [(r[0], r[3]) for r in rows if r[1] == node]
        ax.plot(*zip(*pts), marker="o", label=f"{node} (after meta-clustering)")
    ax.set_xlabel(axis)
    ax.set_ylabel("AUC (balanced accuracy)")
    ax.legend(fontsize=8)
    paths.append(Path(f"{prefix}_auc.svg"))
    fig.savefig(paths[-1])
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(6, 4))
    for node in nodes:
        pts = [(r[0], r[4], r[5]) for r in rows if r[1] == node]
        xs, neg, pos = zip(*pts)
        ax.plot(xs, neg, marker="o", label=f"{node} negative")
        ax.plot(xs, pos, marker="s", linestyle="--", label=f"{node} positive")
    ax.set_xlabel(axis)
    ax.set_ylabel("number of centers")
    ax.legend(fontsize=8)
    paths.append(Path(f"{prefix}_centers.svg"))
    fig.savefig(paths[-1])
    plt.close(fig)
    return paths


# -- commands ----------------------------------------------------------------

def cmd_run(args) -> int:
    raw = load_config(args.config) if args.config else {}
    cfg, input_path, label_col = build_config(raw, args)
    ds = load_csv(resolve_input(input_path), label_col)
    report = run_one_shot(ds, cfg)
    print(report.format_table())
    if args.out:
        Path(args.out).write_text(report.to_text(), encoding="utf-8")
    return EXIT_OK


def cmd_sweep(args) -> int:
    raw = load_config(args.config) if args.config else {}
    cfg, input_path, label_col = build_config(raw, args)
    if args.sweep_axis not in SWEEP_AXES:
        raise ConfigError(f"--sweep-axis must be one of {SWEEP_AXES}")
    grid = sweep_grid(args.sweep_start, args.sweep_stop, args.sweep_step)
    ds = load_csv(resolve_input(input_path), label_col)
    rows = sweep_rows(ds, cfg, args.sweep_axis, grid)
    text = write_sweep_csv(rows, args.out)
    if not args.out:
        sys.stdout.write(text)
    if args.plot:
        for p in plot_sweep(rows, args.sweep_axis, args.plot):
            print(f"wrote {p}", file=sys.stderr)
    return EXIT_OK


def cmd_eval_synth(args) -> int:
    real = load_csv(resolve_input(args.real), args.label_col if args.label_col is not None else -1)
    synth = load_csv(resolve_input(args.synth), args.label_col if args.label_col is not None else -1)
    report = quality_report(real, synth)
    text = report.to_text()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    print(f"mean KSComplement {report.mean_ks:.4f}")
    print(f"mean CStest       {report.mean_cs:.4f}")
    if report.skipped_pairs:
        print(f"skipped {len(report.skipped_pairs)} pair(s) with a constant column on one side")
    return EXIT_OK


def cmd_partition(args) -> int:
    if args.clients is None or args.clients < 1:
        raise ConfigError("--clients must be at least 1")
    b_percent = 10.0 if args.server_frac is None else args.server_frac * 100
    seed = 0 if args.seed is None else args.seed
    if seed < 0:
        raise ConfigError("--seed must be non-negative")
    if not 0 < b_percent < 100:
        raise ConfigError("--server-frac must lie in (0, 1)")
    ds = load_csv(resolve_input(args.input), -1 if args.label_col is None else args.label_col)
    plan = partition(ds, args.clients, b_percent, seed, args.sharding or "simple-random")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.txt").write_text(plan.to_manifest(), encoding="utf-8")
    save_csv(ds.take(plan.server_rows), out / "server.csv")
    for k, rows in enumerate(plan.client_rows, start=1):
        save_csv(ds.take(rows), out / f"client_{k}.csv")
    print(f"server: {plan.server_rows.size} rows; "
          + "; ".join(f"client_{k}: {r.size} rows" for k, r in enumerate(plan.client_rows, start=1)))
    return EXIT_OK


def _add_experiment_flags(p, with_sweep=False):
    p.add_argument("--config", help="JSON file with FederationConfig fields plus 'input'")
    p.add_argument("--input", help="CSV path, or 'breast-cancer' for the bundled dataset")
    p.add_argument("--clients", type=int)
    p.add_argument("--server-frac", type=float, help="fraction of rows reserved at the server (0.1 = 10%%)")
    p.add_argument("--client-dthr", type=float)
    p.add_argument("--server-dthr", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--label-col", help="label column index or name (default: last)")
    p.add_argument("--sharding", choices=("simple-random", "stratified"))
    p.add_argument("--out")
    if with_sweep:
        p.add_argument("--sweep-axis", required=True, choices=SWEEP_AXES)
        p.add_argument("--sweep-start", type=float, required=True)
        p.add_argument("--sweep-stop", type=float, required=True)
        p.add_argument("--sweep-step", type=float, required=True)
        p.add_argument("--plot", metavar="PREFIX", help="write PREFIX_auc.svg and PREFIX_centers.svg")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fedpnn", description="One-shot federated PNN experiments")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run one one-shot federation")
    _add_experiment_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="sensitivity sweep over one hyperparameter")
    _add_experiment_flags(p, with_sweep=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("eval-synth", help="score a synthetic CSV against the real one")
    p.add_argument("--real", required=True)
    p.add_argument("--synth", required=True)
    p.add_argument("--label-col")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval_synth)

    p = sub.add_parser("partition", help="split a CSV into server and client shards")
    p.add_argument("--input", required=True)
    p.add_argument("--clients", type=int, required=True)
    p.add_argument("--server-frac", type=float, help="default 0.1")
    p.add_argument("--seed", type=int)
    p.add_argument("--label-col")
    p.add_argument("--sharding", choices=("simple-random", "stratified"))
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_partition)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"fedpnn: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, FederationError, FileNotFoundError, ValueError) as exc:
        print(f"fedpnn: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
