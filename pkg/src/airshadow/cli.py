"""Command-line entry point wiring the modules into reproducible pipelines.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import config as cfgfile
from .collector import CollectorConfig, serve
from .core import POLLUTANTS
from .errors import AirshadowError, DataError, UsageError
from .evaluation import (
    BenchmarkProtocol,
    confusion_matrix,
    plot_data_files,
    render_report,
    report_from_json,
    report_to_json,
    roc_ovr,
    run_benchmark,
    weighted_metrics,
)
from .features import extract_features, feature_schema
from .ingest import (
    LabeledDataset,
    align_series,
    build_labeled_windows,
    parse_annotations,
    parse_sample_log,
    write_annotations,
)
from .models import ModelSpec, load_model, save_model, table1_grid, train
from .simulator import (
    PRESETS,
    generate_scenario,
    reference_class_counts,
    simulate_scenario,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{message}\n{self.format_usage()}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="airshadow", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("simulate", help="run a scenario into telemetry + annotations")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", help="scenario yaml file")
    src.add_argument("--preset", choices=sorted(PRESETS) + ["lab90"],
                     help="built-in scenario")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("collect", help="run the telemetry collector")
    p.add_argument("--bind", default="127.0.0.1:7007", metavar="HOST:PORT")
    p.add_argument("--data-dir", default=None)
    p.add_argument("--strict", action="store_true")

    p = sub.add_parser("ingest", help="logs + annotations -> labeled dataset csv")
    p.add_argument("--logs", nargs="+", required=True,
                   help="sample log files or directories")
    p.add_argument("--annotations", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--devices", default=None, help="comma-separated device order")
    p.add_argument("--config", default=None, help="pipeline yaml (tau, thresholds, ...)")
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("--strict", action="store_true")

    p = sub.add_parser("train", help="fit a classifier on a dataset csv")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--spec", default=None, help="model spec yaml (first entry)")
    p.add_argument("--family", default=None)
    p.add_argument("--max-depth", type=int, default=None)
    p.add_argument("--n-estimators", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--hidden", default=None, help="comma-separated layer sizes")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("predict", help="sliding-window predictions over telemetry")
    p.add_argument("--model", required=True)
    p.add_argument("--logs", nargs="+", required=True)
    p.add_argument("--devices", default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--stride", type=float, default=60.0)
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("--out", default="-", help="output csv ('-' = stdout)")

    p = sub.add_parser("evaluate", help="metrics of a model on a labeled dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", default="-")

    p = sub.add_parser("benchmark", help="train/evaluate a grid of models")
    p.add_argument("--dataset", required=True)
    p.add_argument("--specs", default=None, help="spec list yaml; default: full grid")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-frac", type=float, default=0.7)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--no-stratify", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--format", default=None,
                   choices=["text-table", "csv", "markdown"],
                   help="default inferred from --out extension")
    p.add_argument("--report-json", default=None,
                   help="also save the full machine-readable report")
    p.add_argument("--plot-data", default=None,
                   help="directory for confusion/ROC csv files")

    p = sub.add_parser("report", help="re-render a saved benchmark report")
    p.add_argument("--report-json", required=True)
    p.add_argument("--format", required=True,
                   choices=["text-table", "csv", "markdown", "plot-data"])
    p.add_argument("--out", required=True,
                   help="output file (plot-data: directory)")

    return parser


def _read_path(path: str) -> bytes:
    p = Path(path)
    if not p.exists():
        raise DataError(f"no such file: {path}")
    return p.read_bytes()


def _collect_log_files(paths: list[str]) -> list[Path]:
    files: list[Path] = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            files.extend(sorted(q for q in p.rglob("*") if q.suffix in (".ndjson", ".csv")))
        elif p.exists():
            files.append(p)
        else:
            raise DataError(f"no such file: {raw}")
    if not files:
        raise DataError("no log files found")
    return files


def _load_samples(paths: list[str], strict: bool):
    samples = []
    issues = 0
    for path in _collect_log_files(paths):
        fmt = "csv" if path.suffix == ".csv" else "ndjson"
        result = parse_sample_log(path.read_bytes(), fmt, strict=strict)
        for line_no, message in result.issues:
            print(f"warning: {path}:{line_no}: {message}", file=sys.stderr)
            issues += 1
        samples.extend(result.samples)
    if not samples:
        raise DataError("log files contained no valid samples")
    return samples, issues


def _device_order(samples, override: str | None) -> list[str]:
    if override:
        return [d.strip() for d in override.split(",") if d.strip()]
    return sorted({s.device for s in samples})


def _cmd_simulate(args) -> int:
    if args.scenario:
        scenario = cfgfile.load_scenario(args.scenario)
    elif args.preset == "lab90":
        scenario = generate_scenario(
            reference_class_counts(705), 90 * 86400.0, seed=args.seed or 0
        )
    else:
        scenario = PRESETS[args.preset]()
    seed = args.seed if args.seed is not None else (scenario.seed or 0)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    series, annotations = simulate_scenario(scenario, seed)
    # dump per device to keep peak memory bounded
    ts = series.timestamps()
    for device in series.devices:
        channels = series.values[device]
        stacked = np.vstack([channels[p] for p in POLLUTANTS])
        lines = []
        for k in range(series.n_cells):
            fields = [f'"ts":{repr(float(ts[k]))}', f'"dev":"{device}"']
            fields += [
                f'"{p.token}":{repr(float(stacked[i, k]))}'
                for i, p in enumerate(POLLUTANTS)
                if not np.isnan(stacked[i, k])
            ]
            lines.append("{" + ",".join(fields) + "}")
        (out / f"{device}.ndjson").write_text("\n".join(lines) + "\n")
    (out / "annotations.csv").write_text(write_annotations(annotations))
    cfgfile.save_scenario(scenario, out / "scenario.yaml")
    print(f"wrote {series.n_cells} samples x {len(series.devices)} devices to {out}")
    return 0


def _cmd_collect(args) -> int:
    import os

    host, _, port_text = args.bind.rpartition(":")
    if not host or not port_text.isdigit():
        raise UsageError(f"--bind must be HOST:PORT, got {args.bind!r}")
    data_dir = args.data_dir or os.environ.get("AIR_DATA_DIR") or "./data"
    cfg = CollectorConfig(
        data_dir=data_dir, host=host, port=int(port_text), strict=args.strict
    )
    print(f"collector listening on {host}:{port_text}, data dir {data_dir}",flush=True)
    serve(cfg)
    return 0


def _cmd_ingest(args) -> int:
    samples, _ = _load_samples(args.logs, args.strict)
    annotations = parse_annotations(_read_path(args.annotations))
    wcfg, fcfg = cfgfile.load_pipeline(args.config)
    devices = _device_order(samples, args.devices)
    aligned = align_series(samples, devices, step=args.step)
    dataset = build_labeled_windows(
        aligned, annotations, wcfg, fcfg,
        source=",".join(args.logs),
    )
    Path(args.out).write_text(dataset.to_csv())
    print(
        f"{len(dataset)} rows, {dataset.skipped_bounds} skipped at bounds, "
        f"{dataset.skipped_missing} skipped for missing data -> {args.out}"
    )
    return 0


def _spec_from_args(args) -> ModelSpec:
    if args.spec:
        specs = cfgfile.load_specs(args.spec, seed=args.seed)
        if not specs:
            raise DataError(f"{args.spec} holds no model specs")
        return specs[0]
    if not args.family:
        raise UsageError("train needs --family or --spec")
    hidden = None
    if args.hidden:
        hidden = tuple(int(h) for h in args.hidden.split(","))
    return ModelSpec(
        family=args.family,
        max_depth=args.max_depth,
        n_estimators=args.n_estimators,
        k=args.k,
        hidden=hidden,
        seed=args.seed,
    )


def _cmd_train(args) -> int:
    dataset = LabeledDataset.from_csv(_read_path(args.dataset))
    spec = _spec_from_args(args)
    model = train(spec, dataset.X, dataset.label_texts())
    save_model(model, args.out)
    print(f"trained {spec.family} on {len(dataset)} rows -> {args.out}")
    return 0


def _cmd_predict(args) -> int:
    model = load_model_checked(args.model)
    samples, _ = _load_samples(args.logs, strict=False)
    wcfg, fcfg = cfgfile.load_pipeline(args.config)
    devices = _device_order(samples, args.devices)
    schema = feature_schema(devices, fcfg)
    if len(schema) != model.n_features:
        raise DataError(
            f"{len(devices)} devices give {len(schema)} features, "
            f"model expects {model.n_features}"
        )
    aligned = align_series(samples, devices, step=args.step)
    n_win = int(round(fcfg.tau / args.step))
    stride = max(1, int(round(args.stride / args.step)))
    lines = ["window_start,window_end,label," + ",".join(
        f"score_{c}" for c in model.classes
    )]
    skipped = 0
    ts0 = aligned.t0
    for start in range(0, aligned.n_cells - n_win + 1, stride):
        window = aligned.window(start, n_win)
        try:
            vec = extract_features(window, fcfg, schema, args.step)
        except DataError:
            skipped += 1
            continue
        scores = model.predict_scores(vec)
        label = model.classes[int(np.argmax(scores))]
        t_start = ts0 + start * args.step
        lines.append(
            f"{repr(float(t_start))},{repr(float(t_start + fcfg.tau))},{label},"
            + ",".join(repr(float(s)) for s in scores)
        )
    text = "\n".join(lines) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    if skipped:
        print(f"warning: skipped {skipped} windows with too much missing data",
              file=sys.stderr)
    return 0


def load_model_checked(path: str):
    if not Path(path).exists():
        raise DataError(f"no such file: {path}")
    return load_model(path)


def _cmd_evaluate(args) -> int:
    model = load_model_checked(args.model)
    dataset = LabeledDataset.from_csv(_read_path(args.dataset))
    y_true = dataset.label_texts()
    y_pred = model.predict(dataset.X)
    cm = confusion_matrix(y_true, y_pred, model.classes)
    metrics = weighted_metrics(cm)
    roc = roc_ovr(y_true, model.predict_scores(dataset.X), model.classes)
    out = []
    out.append(f"rows {len(dataset)}  accuracy {metrics.accuracy:.4f}")
    out.append(
        f"weighted: precision {metrics.precision:.4f} recall {metrics.recall:.4f} "
        f"f1 {metrics.f1:.4f}"
    )
    macro = roc.macro_auc
    out.append(f"macro one-vs-rest AUC: {'n/a' if macro is None else f'{macro:.4f}'}")
    out.append("class) support precision recall f1")
    for c in metrics.per_class:
        out.append(
            f"{c.label}) {c.support} {c.precision:.4f} {c.recall:.4f} {c.f1:.4f}"
        )
    text = "\n".join(out) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return 0


def _cmd_benchmark(args) -> int:
    dataset = LabeledDataset.from_csv(_read_path(args.dataset))
    if args.specs:
        specs = cfgfile.load_specs(args.specs, seed=args.seed)
    else:
        specs = table1_grid(seed=args.seed)
    protocol = BenchmarkProtocol(
        train_frac=args.train_frac, k=args.folds, seed=args.seed,
        stratify=not args.no_stratify,
    )
    report = run_benchmark(
        dataset.X, dataset.label_texts(), specs, protocol,
        provenance={"dataset": args.dataset, **dataset.provenance},
    )
    fmt = args.format
    if fmt is None:
        fmt = {".csv": "csv", ".md": "markdown"}.get(Path(args.out).suffix, "text-table")
    Path(args.out).write_bytes(render_report(report, fmt))
    if args.report_json:
        Path(args.report_json).write_text(report_to_json(report))
    if args.plot_data:
        plot_dir = Path(args.plot_data)
        plot_dir.mkdir(parents=True, exist_ok=True)
        for name, blob in plot_data_files(report).items():
            (plot_dir / name).write_bytes(blob)
    print(f"benchmarked {len(specs)} specs on {len(dataset)} rows -> {args.out}")
    return 0


def _cmd_report(args) -> int:
    report = report_from_json(_read_path(args.report_json).decode())
    if args.format == "plot-data":
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, blob in plot_data_files(report).items():
            (out_dir / name).write_bytes(blob)
    else:
        Path(args.out).write_bytes(render_report(report, args.format))
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "collect": _cmd_collect,
    "ingest": _cmd_ingest,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
    "benchmark": _cmd_benchmark,
    "report": _cmd_report,
}


def dispatch(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage())
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc.filename}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 0
    except AirshadowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to exit code 3
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
