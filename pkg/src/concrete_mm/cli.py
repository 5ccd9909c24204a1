"""Command-line entry point: ``concrete-mm {stats,train,predict,optimize}``.

Exit codes: 0 success, 2 input error, 3 numeric failure, 4 infeasibility.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .ann import DivergenceError
from .bundle import BUNDLE_FORMAT, SCHEMA_VERSION, BundleError, load_bundle, save_bundle
from .data import COLUMNS, FEATURES, DataError, Mixture, default_csv_path, fc_histogram, file_checksum, \
    load_csv, pearson_matrix, summary_stats
from .ensemble import VARIANTS, DegenerateBlendError, NonFinitePredictionError
from .nsga2 import (
    ConstraintSet,
    InfeasibleError,
    format_pareto_table,
    load_ga_config,
    marginal_cost,
    pareto_table,
    target_seed,
    write_front_svg,
    write_pareto_csv,
)
from .pipeline import format_report, report_rows, train_pipeline
from .poly import RankDeficientError

log = logging.getLogger("concrete_mm")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_INFEASIBLE = 0, 2, 3, 4
MANIFEST_NAME = "manifest.json"


class CliError(Exception):
    def __init__(self, message, code=EXIT_INPUT):
        super().__init__(message)
        self.code = code


@dataclass
class RunManifest:
    command: str
    config: dict
    seeds: dict
    dataset_checksum: str = ""
    bundle_path: str = ""
    outputs: list = field(default_factory=list)
    wall_clock_seconds: float = 0.0
    version: str = __version__

    def write(self, out_dir: Path) -> Path:
        path = out_dir / MANIFEST_NAME
        self.outputs = sorted(set(self.outputs) | {str(path)})
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path


def g6(x) -> str:
    return f"{float(x):.6g}"


def _table(header, rows, widths=None) -> str:
    widths = widths or [max(len(str(h)), *(len(str(r[i])) for r in rows)) for i, h in enumerate(header)]
    fmt = lambda cells: "  ".join(str(c).rjust(w) for c, w in zip(cells, widths))  # noqa: E731
    return "\n".join([fmt(header)] + [fmt(r) for r in rows])


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _data_path(args) -> Path:
    return Path(args.data) if args.data else default_csv_path()


# -- stats -----------------------------------------------------------------

def cmd_stats(args) -> int:
    path = _data_path(args)
    ds = load_csv(path)
    st = summary_stats(ds)
    names = list(st.names)
    if args.format == "csv":
        rows = [[n, repr(float(a)), repr(float(b)), repr(float(m)), repr(float(s))]
                for n, a, b, m, s in zip(names, st.minimum, st.maximum, st.mean, st.sd)]
        sys.stdout.write(_csv_text(["variable", "min", "max", "mean", "sd"], rows))
        return EXIT_OK

    print(f"dataset: {path} ({len(ds)} samples)")
    rows = [[n, g6(a), g6(b), g6(m), g6(s)] for n, a, b, m, s in zip(names, st.minimum, st.maximum, st.mean, st.sd)]
    print(_table(["variable", "min", "max", "mean", "sd"], rows))
    print()
    try:
        corr = pearson_matrix(ds)
    except DataError as exc:
        print(f"Pearson matrix undefined: {exc}")
    else:
        print("Pearson correlation")
        short = [n[:8] for n in COLUMNS]
        print(_table([""] + short, [[short[i]] + [f"{v:.3f}" for v in corr[i]] for i in range(len(COLUMNS))]))
    print()
    counts, edges = fc_histogram(ds, bins=20)
    print("fc histogram (20 bins)")
    print(_table(["from", "to", "count"], [[g6(lo), g6(hi), int(c)] for lo, hi, c in zip(edges[:-1], edges[1:], counts)]))
    return EXIT_OK


# -- train -----------------------------------------------------------------

def cmd_train(args) -> int:
    start = time.perf_counter()
    path = _data_path(args)
    ds = load_csv(path)
    seed = 0 if args.seed is None else args.seed
    try:
        result = train_pipeline(ds, seed=seed)
    except DivergenceError as exc:
        raise CliError(f"ANN training failed: {exc}", EXIT_NUMERIC) from None
    except RankDeficientError as exc:
        raise CliError(f"polynomial fit failed: {exc}", EXIT_NUMERIC) from None
    except (DegenerateBlendError, NonFinitePredictionError) as exc:
        raise CliError(f"blend weight solve failed: {exc}", EXIT_NUMERIC) from None

    out = _out_dir(args)
    checksum = file_checksum(path)
    constraints = ConstraintSet.from_dataset(ds)
    bundle_path = out / "bundle.json"
    save_bundle(bundle_path, result, constraints, checksum)

    if args.format == "csv":
        report_path = out / "report.csv"
        rows = report_rows(result.metrics)
        report_path.write_text(_csv_text(["set", "model", "mse", "r2"], [list(r.values()) for r in rows]),
                               encoding="utf-8")
    else:
        report_path = out / "report.txt"
        report_path.write_text(format_report(result.metrics) + "\n", encoding="utf-8")
    print(format_report(result.metrics))
    for variant in VARIANTS:
        beta = ", ".join(g6(b) for b in result.model.weights[variant].beta)
        print(f"weights[{variant}] (ANN, RFR, PR): {beta}")

    manifest = RunManifest(
        command="train",
        config={"data": str(path), "train_fraction": 0.7, "ann": asdict(result.ann_config),
                "forest": asdict(result.forest_config), "format": args.format},
        seeds={"split": seed, "ann": result.ann_config.seed, "forest": result.forest_config.seed},
        dataset_checksum=checksum,
        bundle_path=str(bundle_path),
        outputs=[str(bundle_path), str(report_path)],
        wall_clock_seconds=time.perf_counter() - start,
    )
    print(f"wrote {bundle_path}, {report_path}, {manifest.write(out)}")
    return EXIT_OK


# -- predict ---------------------------------------------------------------

def cmd_predict(args) -> int:
    bundle = load_bundle(args.bundle)
    if len(args.mixture) != len(FEATURES):
        raise CliError(f"expected {len(FEATURES)} mixture values ({', '.join(FEATURES)}), got {len(args.mixture)}")
    x = Mixture(*args.mixture).as_array()
    mm = bundle.model
    base = mm.base_predictions(x)[0]
    rows = [(name, v) for name, v in zip(mm.names, base)]
    rows += [(f"MM[{variant}]", float(base @ mm.weights[variant].as_array())) for variant in VARIANTS]
    if not all(np.isfinite(v) for _, v in rows):
        raise CliError("non-finite prediction", EXIT_NUMERIC)
    if args.format == "csv":
        sys.stdout.write(_csv_text(["model", "prediction"], [[n, repr(float(v))] for n, v in rows]))
    else:
        print(_table(["model", "fc (MPa)"], [[n, g6(v)] for n, v in rows]))
    return EXIT_OK


# -- optimize --------------------------------------------------------------

def cmd_optimize(args) -> int:
    start = time.perf_counter()
    bundle = load_bundle(args.bundle)
    targets, cfg = load_ga_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if cfg.blend not in VARIANTS:
        raise CliError(f"unknown blend variant {cfg.blend!r}")
    predict = bundle.model.predictor(cfg.blend).predict
    rows, results = pareto_table(targets, cfg, predict, cs=bundle.constraints, return_results=True)

    out = _out_dir(args)
    csv_path, summary_path = out / "pareto.csv", out / "pareto.txt"
    write_pareto_csv(rows, csv_path)
    summary = format_pareto_table(rows)
    lo_band = [t for t in (20.0, 50.0) if t in {r.target for r in rows}]
    hi_band = [t for t in (60.0, 75.0) if t in {r.target for r in rows}]
    extra = []
    if len(lo_band) == 2:
        extra.append(f"marginal cost 20-50 MPa: {g6(marginal_cost(rows, 20, 50))} $/MPa")
    if len(hi_band) == 2:
        extra.append(f"marginal cost 60-75 MPa: {g6(marginal_cost(rows, 60, 75))} $/MPa")
    summary_path.write_text("\n".join([summary, *extra]) + "\n", encoding="utf-8")
    print("\n".join([summary, *extra]))
    outputs = [str(csv_path), str(summary_path)]
    if args.svg:
        svg_path = out / "front.svg"
        write_front_svg(results, svg_path)
        outputs.append(str(svg_path))

    manifest = RunManifest(
        command="optimize",
        config={"ga": asdict(cfg), "targets": targets, "config_file": str(args.config)},
        seeds={"template": cfg.seed, "per_target": {g6(t): target_seed(cfg.seed, k) for k, t in enumerate(targets)}},
        dataset_checksum=bundle.dataset_checksum,
        bundle_path=str(args.bundle),
        outputs=outputs,
        wall_clock_seconds=time.perf_counter() - start,
    )
    print(f"wrote {', '.join(outputs)}, {manifest.write(out)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="concrete-mm", description="Concrete strength multi-model and mixture optimizer.")
    p.add_argument("--version", action="version",
                   version=f"concrete-mm {__version__} ({BUNDLE_FORMAT} schema {SCHEMA_VERSION})")
    p.add_argument("--seed", type=int, default=None, help="split/training seed (train) or GA seed override (optimize)")
    p.add_argument("--data", default=None, help="dataset CSV (default: bundled UCI concrete data)")
    p.add_argument("--out", default="run", help="output directory (default: ./run)")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("stats", help="summary statistics, Pearson matrix, fc histogram").set_defaults(func=cmd_stats)
    sub.add_parser("train", help="train ANN, forest, polynomial and both blends").set_defaults(func=cmd_train)

    pp = sub.add_parser("predict", help="predict fc for one mixture")
    pp.add_argument("bundle")
    pp.add_argument("mixture", nargs="+", type=float, metavar="VALUE",
                    help=" ".join(FEATURES))
    pp.set_defaults(func=cmd_predict)

    po = sub.add_parser("optimize", help="NSGA-II cost/strength optimization per target")
    po.add_argument("bundle")
    po.add_argument("config", help="GA config file (key = value lines)")
    po.add_argument("--svg", action="store_true", help="also write front.svg")
    po.set_defaults(func=cmd_optimize)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except InfeasibleError as exc:
        print(f"error: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (FileNotFoundError, IsADirectoryError) as exc:
        detail = f"{exc.strerror}: {exc.filename}" if exc.filename else str(exc)
        print(f"error: {detail}", file=sys.stderr)
        return EXIT_INPUT
    except (DataError, BundleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except np.linalg.LinAlgError as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
