"""Command-line entry point.

Subcommands:

* prepare   — parse/repair/split/scale a CSV, print a summary, optionally
              persist the prepared dataset for exact reuse.
* train     — one (cell, optimizer) training run; writes run artifacts.
* benchmark — the full 2x2 {lstm,gru} x {adam,nag} comparison, optionally
              over several seeds; exports the results table and curves.
* gradcheck — verify analytical gradients against finite differences.
* report    — reload an exported benchmark JSON: print the table and/or
              re-export CSV.

Updates are applied one sample at a time (batch size 1). That choice is
part of the training protocol this harness reproduces, so it is fixed,
not a flag.

Every tunable accepts: command-line flag > --config JSON file > built-in
default.  Artifacts are byte-stable for identical inputs; pass
``--timing live`` to include wall-clock measurements (at the cost of
run-to-run byte identity).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .cells import CELL_KINDS, gradient_check, Forecaster
from .data import (
    PreparedData,
    REFERENCE_SPLIT,
    SCALER_MODES,
    SplitSpec,
    prepare,
    read_csv,
    repair_missing,
)
from .linalg import Rng
from .report import (
    TIMING_MODES,
    build_report,
    export,
    format_table,
    load_report,
    run_row,
)
from .train import TrainConfig, TrainingDiverged, fit

BENCHMARK_MATRIX = (("lstm", "adam"), ("lstm", "nag"),
                    ("gru", "adam"), ("gru", "nag"))

DEFAULTS = {
    "cell": "lstm",
    "optimizer": "adam",
    "epochs": 10,
    "hidden": 50,
    "lookback": 60,
    "lr": 0.001,
    "momentum": 0.9,
    "beta1": 0.9,
    "beta2": 0.999,
    "epsilon": 1e-8,
    "seed": 0,
    "seeds": None,
    "threshold": 1e-3,
    "clip_norm": 0.0,
    "shuffle": False,
    "split": "0.7,0.15,0.15",
    "scaler_mode": "train-only",
    "use_adj_close": False,
    "timing": "none",
    "format": "both",
}

_CONFIG_KEYS = frozenset(DEFAULTS)


class _Settings:
    """Flag > config-file > default resolution for one invocation."""

    def __init__(self, args):
        self.args = args
        self.file_cfg = {}
        cfg_path = getattr(args, "config", None)
        if cfg_path:
            try:
                doc = json.loads(Path(cfg_path).read_text(encoding="utf-8"))
            except OSError as exc:
                raise ValueError(f"cannot read config file {cfg_path}: {exc}") \
                    from None
            except json.JSONDecodeError as exc:
                raise ValueError(f"config file {cfg_path}: {exc}") from None
            if not isinstance(doc, dict):
                raise ValueError(
                    f"config file {cfg_path} must hold a JSON object"
                )
            unknown = sorted(set(doc) - _CONFIG_KEYS)
            if unknown:
                raise ValueError(
                    f"config file {cfg_path} has unknown keys: "
                    f"{', '.join(unknown)} (known: {', '.join(sorted(_CONFIG_KEYS))})"
                )
            self.file_cfg = doc

    def get(self, key):
        flag = getattr(self.args, key, None)
        if flag is not None:
            return flag
        if key in self.file_cfg:
            return self.file_cfg[key]
        return DEFAULTS[key]

    def flag_given(self, key) -> bool:
        return getattr(self.args, key, None) is not None

    def train_config(self, cell=None, optimizer=None, seed=None) -> TrainConfig:
        return TrainConfig(
            cell=cell if cell is not None else str(self.get("cell")),
            optimizer=optimizer if optimizer is not None
            else str(self.get("optimizer")),
            epochs=int(self.get("epochs")),
            hidden=int(self.get("hidden")),
            lookback=int(self.get("lookback")),
            lr=float(self.get("lr")),
            momentum=float(self.get("momentum")),
            beta1=float(self.get("beta1")),
            beta2=float(self.get("beta2")),
            eps=float(self.get("epsilon")),
            seed=seed if seed is not None else int(self.get("seed")),
            threshold=float(self.get("threshold")),
            clip_norm=float(self.get("clip_norm")),
            shuffle=bool(self.get("shuffle")),
        )

    def seeds(self) -> list:
        raw = self.get("seeds")
        if raw is None:
            return [int(self.get("seed"))]
        if isinstance(raw, str):
            parts = [p.strip() for p in raw.split(",") if p.strip()]
            if not parts:
                raise ValueError(f"--seeds got no usable values: {raw!r}")
            return [int(p) for p in parts]
        if isinstance(raw, (list, tuple)):
            return [int(s) for s in raw]
        raise ValueError(f"seeds must be a comma list or JSON array, got {raw!r}")


def _load_dataset(settings: _Settings) -> PreparedData:
    """Load --data: a prepared .json is reused as-is, a .csv is prepared."""
    path = Path(settings.args.data)
    if path.suffix.lower() == ".json":
        prep = PreparedData.load(path)
        for key, actual in (("lookback", prep.lookback),
                            ("scaler_mode", prep.scaler_mode)):
            if settings.flag_given(key) and settings.get(key) != actual:
                raise ValueError(
                    f"--{key.replace('_', '-')} {settings.get(key)} conflicts "
                    f"with the prepared dataset's {key}={actual}; "
                    "re-run prepare to change it"
                )
        if settings.flag_given("split"):
            want = SplitSpec.parse(str(settings.get("split")))
            if want != prep.split:
                raise ValueError(
                    "--split conflicts with the prepared dataset's split; "
                    "re-run prepare to change it"
                )
        return prep
    column = "Adj Close" if settings.get("use_adj_close") else "Close"
    series = repair_missing(read_csv(path, price_column=column))
    return prepare(
        series,
        lookback=int(settings.get("lookback")),
        split=SplitSpec.parse(str(settings.get("split"))),
        scaler_mode=str(settings.get("scaler_mode")),
    )


def _print_instrument(result, config_id: str) -> None:
    per = result.grad_evals / result.samples_seen if result.samples_seen else 0.0
    print(f"instrument: {config_id} seed={result.config.seed} "
          f"grad_evals={result.grad_evals} samples={result.samples_seen} "
          f"per_sample={per:g}")


# -- subcommands -------------------------------------------------------

def cmd_prepare(args) -> int:
    settings = _Settings(args)
    prep = _load_dataset(settings)
    sizes = prep.partition_sizes()
    counts = prep.window_counts()
    print(f"partitions (points): train={sizes['train']} "
          f"val={sizes['val']} test={sizes['test']}")
    print(f"windows (lookback={prep.lookback}): train={counts['train']} "
          f"val={counts['val']} test={counts['test']}")
    print(f"scaler [{prep.scaler_mode}]: min={prep.scaler.min_x:.17g} "
          f"max={prep.scaler.max_x:.17g}")
    ref = "/".join(str(n) for n in REFERENCE_SPLIT)
    print(f"reference split sizes (mirrored protocol): {ref}")
    if args.out:
        prep.save(args.out)
        print(f"prepared dataset written to {args.out}")
    return 0


def cmd_train(args) -> int:
    settings = _Settings(args)
    prep = _load_dataset(settings)
    cfg = settings.train_config()
    if cfg.lookback != prep.lookback:
        cfg.lookback = prep.lookback
    result = fit(cfg, prep.windows("train"), prep.windows("val"),
                 progress=sys.stderr)
    row = run_row(result, prep.scaler, prep.windows("test"))
    timing = str(settings.get("timing"))
    report = build_report([row], epochs=cfg.epochs,
                          meta=_protocol_meta(settings, prep, [cfg.seed]))
    out = Path(args.out)
    written = export(report, out, fmt=str(settings.get("format")),
                     timing=timing, stem="run")
    snapshot = out / "params.txt"
    result.model.save(snapshot)
    written.append(snapshot)
    print(format_table(report))
    if args.instrument:
        _print_instrument(result, cfg.config_id)
    for path in written:
        print(f"wrote {path}")
    return 0


def _protocol_meta(settings: _Settings, prep: PreparedData, seeds) -> dict:
    return {
        "batch_size": 1,
        "epochs": int(settings.get("epochs")),
        "hidden": int(settings.get("hidden")),
        "lookback": prep.lookback,
        "lr": float(settings.get("lr")),
        "momentum": float(settings.get("momentum")),
        "beta1": float(settings.get("beta1")),
        "beta2": float(settings.get("beta2")),
        "epsilon": float(settings.get("epsilon")),
        "threshold": float(settings.get("threshold")),
        "seeds": list(seeds),
        "scaler_mode": prep.scaler_mode,
        "scaler_min": prep.scaler.min_x,
        "scaler_max": prep.scaler.max_x,
        "split": {
            "train_frac": prep.split.train_frac,
            "val_frac": prep.split.val_frac,
            "test_frac": prep.split.test_frac,
        },
        "window_counts": prep.window_counts(),
    }


def cmd_benchmark(args) -> int:
    settings = _Settings(args)
    prep = _load_dataset(settings)
    seeds = settings.seeds()
    timing = str(settings.get("timing"))
    rows = []
    failures = []
    for cell, optimizer in BENCHMARK_MATRIX:
        for seed in seeds:
            cfg = settings.train_config(cell=cell, optimizer=optimizer,
                                        seed=seed)
            if cfg.lookback != prep.lookback:
                cfg.lookback = prep.lookback
            label = f"{cfg.config_id} seed={seed}"
            print(f"running {label} ...", file=sys.stderr, flush=True)
            try:
                result = fit(cfg, prep.windows("train"), prep.windows("val"),
                             progress=sys.stderr)
            except (TrainingDiverged, ValueError) as exc:
                failures.append(f"{label}: {exc}")
                print(f"FAILED {label}: {exc}", file=sys.stderr)
                continue
            rows.append(run_row(result, prep.scaler, prep.windows("test")))
            if args.instrument:
                _print_instrument(result, cfg.config_id)
    if not rows:
        raise ValueError(
            "all benchmark runs failed: " + "; ".join(failures)
        )
    report = build_report(rows, epochs=int(settings.get("epochs")),
                          meta=_protocol_meta(settings, prep, seeds))
    written = export(report, Path(args.out),
                     fmt=str(settings.get("format")), timing=timing,
                     stem="benchmark")
    print(format_table(report))
    for path in written:
        print(f"wrote {path}")
    if failures:
        print(f"{len(failures)} run(s) failed:", file=sys.stderr)
        for line in failures:
            print(f"  {line}", file=sys.stderr)
        return 1
    return 0


def cmd_gradcheck(args) -> int:
    tolerance = args.tolerance if args.tolerance is not None else 1e-5
    instances = args.instances
    hidden = args.hidden if args.hidden is not None else 6
    window = args.window
    if hidden > 16:
        raise ValueError(f"gradcheck hidden must be <= 16, got {hidden}")
    kinds = CELL_KINDS if args.cell is None else (args.cell,)
    overall_pass = True
    for kind in kinds:
        worst = {}
        for i in range(instances):
            model = Forecaster.init_random(kind, hidden, 1,
                                           seed=args.seed + i, scale=0.5)
            rng = Rng(args.seed * 1000003 + i)
            win = [rng.uniform(0.0, 1.0) for _ in range(window)]
            rep = gradient_check(model, win, tolerance=tolerance)
            for name, err in rep.block_errors:
                worst[name] = max(worst.get(name, 0.0), err)
            if not rep.passed:
                overall_pass = False
        print(f"{kind}: {instances} instances, hidden={hidden}, "
              f"window={window}, tolerance={tolerance:g}")
        for name, err in worst.items():
            flag = "ok" if err <= tolerance else "FAIL"
            print(f"  {name:<6} max_rel_err={err:.3e}  {flag}")
    print("gradcheck PASS" if overall_pass else "gradcheck FAIL")
    return 0 if overall_pass else 1


def cmd_report(args) -> int:
    report = load_report(args.data)
    print(format_table(report))
    if args.out:
        settings = _Settings(args)
        written = export(report, Path(args.out),
                         fmt=str(settings.get("format")),
                         timing="live", stem="benchmark")
        for path in written:
            print(f"wrote {path}")
    return 0


# -- argument parsing ---------------------------------------------------

def _add_config_flag(p) -> None:
    p.add_argument("--config", metavar="FILE",
                   help="flat JSON config file; precedence: flags > file > defaults")


def _add_data_flags(p, out_help: str, out_required: bool) -> None:
    p.add_argument("--data", required=True, metavar="PATH",
                   help="input CSV (Yahoo daily format) or prepared .json")
    p.add_argument("--out", required=out_required, metavar="PATH",
                   help=out_help)
    p.add_argument("--lookback", type=int,
                   help=f"window length L (default: {DEFAULTS['lookback']})")
    p.add_argument("--split",
                   help="train,val,test fractions "
                        f"(default: {DEFAULTS['split']})")
    p.add_argument("--scaler-mode", dest="scaler_mode", choices=SCALER_MODES,
                   help=f"scaler fitting scope (default: {DEFAULTS['scaler_mode']})")
    p.add_argument("--use-adj-close", dest="use_adj_close",
                   action="store_const", const=True,
                   help="read the Adj Close column instead of Close")


def _add_train_flags(p, with_cell: bool) -> None:
    if with_cell:
        p.add_argument("--cell", choices=list(CELL_KINDS),
                       help=f"recurrent cell (default: {DEFAULTS['cell']})")
        p.add_argument("--optimizer", choices=["adam", "nag", "momentum"],
                       help=f"optimizer (default: {DEFAULTS['optimizer']})")
    p.add_argument("--epochs", type=int,
                   help=f"training epochs (default: {DEFAULTS['epochs']})")
    p.add_argument("--hidden", type=int,
                   help=f"hidden units (default: {DEFAULTS['hidden']})")
    p.add_argument("--lr", type=float,
                   help=f"learning rate (default: {DEFAULTS['lr']}); "
                        "0 runs an update-free evaluation pass")
    p.add_argument("--momentum", type=float,
                   help="momentum coefficient for momentum/nag "
                        f"(default: {DEFAULTS['momentum']})")
    p.add_argument("--beta1", type=float,
                   help=f"Adam beta1 (default: {DEFAULTS['beta1']})")
    p.add_argument("--beta2", type=float,
                   help=f"Adam beta2 (default: {DEFAULTS['beta2']})")
    p.add_argument("--epsilon", type=float,
                   help=f"Adam epsilon (default: {DEFAULTS['epsilon']})")
    p.add_argument("--seed", type=int,
                   help=f"weight-init seed (default: {DEFAULTS['seed']})")
    p.add_argument("--threshold", type=float,
                   help="convergence-speed loss threshold "
                        f"(default: {DEFAULTS['threshold']})")
    p.add_argument("--clip-norm", dest="clip_norm", type=float,
                   help="global gradient-norm clip; 0 disables "
                        f"(default: {DEFAULTS['clip_norm']})")
    p.add_argument("--shuffle", action="store_const", const=True,
                   help="seeded shuffle of sample order each epoch "
                        "(default: off, chronological)")
    p.add_argument("--timing", choices=list(TIMING_MODES),
                   help="include wall-clock in artifacts (live) or blank "
                        f"it for byte-stable output (default: {DEFAULTS['timing']})")
    p.add_argument("--instrument", action="store_true",
                   help="print gradient-evaluation counts per run")
    p.add_argument("--format", choices=["csv", "json", "both"],
                   help=f"artifact format(s) (default: {DEFAULTS['format']})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rnnbench",
        description="LSTM/GRU daily-price forecasting benchmark: "
                    "per-sample training, Adam vs NAG vs momentum, "
                    "RMSE comparison table.",
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare",
                       help="parse, repair, split, scale; print a summary")
    _add_config_flag(p)
    _add_data_flags(p, "write the prepared dataset JSON here",
                    out_required=False)
    p.set_defaults(handler=cmd_prepare)

    p = sub.add_parser("train", help="one training run with artifacts")
    _add_config_flag(p)
    _add_data_flags(p, "output directory for run artifacts",
                    out_required=True)
    _add_train_flags(p, with_cell=True)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("benchmark",
                       help="run the 2x2 cell/optimizer comparison matrix")
    _add_config_flag(p)
    _add_data_flags(p, "output directory for benchmark artifacts",
                    out_required=True)
    _add_train_flags(p, with_cell=False)
    p.add_argument("--seeds",
                   help="comma-separated seed list; runs every "
                        "configuration once per seed and adds median rows")
    p.set_defaults(handler=cmd_benchmark)

    p = sub.add_parser("gradcheck",
                       help="verify analytical gradients vs finite differences")
    p.add_argument("--cell", choices=list(CELL_KINDS),
                   help="check one cell type (default: both)")
    p.add_argument("--tolerance", type=float,
                   help="max allowed relative error (default: 1e-05)")
    p.add_argument("--instances", type=int, default=50,
                   help="random instances per cell (default: 50)")
    p.add_argument("--hidden", type=int,
                   help="hidden units, <= 16 (default: 6)")
    p.add_argument("--window", type=int, default=4,
                   help="window length (default: 4)")
    p.add_argument("--seed", type=int, default=0,
                   help="base seed (default: 0)")
    p.set_defaults(handler=cmd_gradcheck)

    p = sub.add_parser("report",
                       help="print/re-export a saved benchmark JSON")
    _add_config_flag(p)
    p.add_argument("--data", required=True, metavar="PATH",
                   help="benchmark JSON produced by the benchmark command")
    p.add_argument("--out", metavar="PATH",
                   help="directory to re-export artifacts into")
    p.add_argument("--format", choices=["csv", "json", "both"],
                   help=f"artifact format(s) (default: {DEFAULTS['format']})")
    p.set_defaults(handler=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, TrainingDiverged) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
