"""Post-training evaluation and artifact export.

Assembles the four-way comparison table — one row per (cell, optimizer)
configuration, in the fixed order lstm-adam, lstm-nag, gru-adam,
gru-nag — plus per-epoch loss curves for plotting.  RMSE is reported in
price units (predictions are inverse-scaled before scoring); the JSON
export also carries the normalized-domain RMSE, since the two differ
exactly by the scaler range.

Exports are byte-stable: sorted keys, floats at 17 significant digits,
no timestamps or absolute paths.  Wall-clock columns are filled only
when timing="live"; the default leaves them empty (CSV) / null (JSON)
so that identical runs produce identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import log, sqrt
from pathlib import Path

from . import jsonio
from .cells import Forecaster, forward_sequence
from .data import ScalerParams, WindowedDataset

CELL_ORDER = ("lstm", "gru")
OPT_ORDER = ("adam", "nag", "momentum")
TIMING_MODES = ("none", "live")

REPORT_HEADER = ("config,cell,optimizer,final_train_loss,final_val_loss,"
                 "rmse,epochs_to_threshold,stability_count,stability_sum,"
                 "wall_clock_s")
CURVES_HEADER = "config,epoch,train_loss,val_loss"


def rmse(predictions, targets) -> float:
    if len(predictions) != len(targets):
        raise ValueError(
            f"rmse length mismatch: {len(predictions)} predictions vs "
            f"{len(targets)} targets"
        )
    if not predictions:
        raise ValueError("rmse needs at least one prediction")
    total = 0.0
    for p, t in zip(predictions, targets):
        d = p - t
        total += d * d
    return sqrt(total / len(predictions))


def predict_series(model: Forecaster, scaler: ScalerParams,
                   dataset: WindowedDataset) -> list:
    """One-step-ahead predictions for every window, in price units."""
    return [scaler.inverse_one(forward_sequence(model, window)[0])
            for window, _target in dataset.samples]


@dataclass
class RunRow:
    """One table row: a single (cell, optimizer, seed) run or a median."""

    config_id: str
    cell: str
    optimizer: str
    seed: int | None            # None for median rows
    final_train_loss: float
    final_val_loss: float
    rmse_price: float
    rmse_norm: float
    epochs_to_threshold: int | None
    stability_count: int
    stability_sum: float
    wall_clock_s: float | None
    grad_evals: int | None
    train_curve: list           # per-epoch train losses
    val_curve: list


@dataclass
class BenchmarkReport:
    rows: list                  # [RunRow], table order
    epochs: int
    meta: dict                  # run parameters worth archiving


def run_row(result, scaler: ScalerParams, test_set: WindowedDataset,
            config_id: str | None = None) -> RunRow:
    """Score one RunResult on the test partition and shape it as a row."""
    preds_norm = [forward_sequence(result.model, w)[0]
                  for w, _t in test_set.samples]
    targets_norm = [t for _w, t in test_set.samples]
    err_norm = rmse(preds_norm, targets_norm)
    preds_price = [scaler.inverse_one(p) for p in preds_norm]
    targets_price = [scaler.inverse_one(t) for t in targets_norm]
    err_price = rmse(preds_price, targets_price)
    cfg = result.config
    last = result.records[-1]
    return RunRow(
        config_id=config_id if config_id is not None else cfg.config_id,
        cell=cfg.cell,
        optimizer=cfg.optimizer,
        seed=cfg.seed,
        final_train_loss=last.train_loss,
        final_val_loss=last.val_loss,
        rmse_price=err_price,
        rmse_norm=err_norm,
        epochs_to_threshold=result.epochs_to_threshold,
        stability_count=result.stability_count,
        stability_sum=result.stability_sum,
        wall_clock_s=result.wall_clock_s,
        grad_evals=result.grad_evals,
        train_curve=[r.train_loss for r in result.records],
        val_curve=[r.val_loss for r in result.records],
    )


def _config_rank(cell: str, optimizer: str) -> tuple:
    cell_rank = CELL_ORDER.index(cell) if cell in CELL_ORDER else len(CELL_ORDER)
    opt_rank = OPT_ORDER.index(optimizer) if optimizer in OPT_ORDER \
        else len(OPT_ORDER)
    return cell_rank, opt_rank


def _median_low(values):
    """Lower median: an actual element of the list (keeps ints ints)."""
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2]


def _median(values) -> float:
    ordered = sorted(values)
    n = len(ordered)
    mid = n // 2
    if n % 2:
        return ordered[mid]
    return 0.5 * (ordered[mid - 1] + ordered[mid])


def _median_row(rows) -> RunRow:
    """Elementwise median across seeds of one configuration's rows.

    Scalar metrics take the float median; epoch counts and stability
    counts take the lower median so they stay integers; a median
    epochs_to_threshold of "never" stays None.
    """
    first = rows[0]
    epochs_vals = [r.epochs_to_threshold for r in rows]
    with_inf = [v if v is not None else float("inf") for v in epochs_vals]
    med_epochs = _median_low(with_inf)
    curves_t = [_median([r.train_curve[e] for r in rows])
                for e in range(len(first.train_curve))]
    curves_v = [_median([r.val_curve[e] for r in rows])
                for e in range(len(first.val_curve))]
    wall = None
    if all(r.wall_clock_s is not None for r in rows):
        wall = _median([r.wall_clock_s for r in rows])
    return RunRow(
        config_id=f"{first.cell}-{first.optimizer}:median",
        cell=first.cell,
        optimizer=first.optimizer,
        seed=None,
        final_train_loss=_median([r.final_train_loss for r in rows]),
        final_val_loss=_median([r.final_val_loss for r in rows]),
        rmse_price=_median([r.rmse_price for r in rows]),
        rmse_norm=_median([r.rmse_norm for r in rows]),
        epochs_to_threshold=None if med_epochs == float("inf")
        else int(med_epochs),
        stability_count=_median_low([r.stability_count for r in rows]),
        stability_sum=_median([r.stability_sum for r in rows]),
        wall_clock_s=wall,
        grad_evals=None,
        train_curve=curves_t,
        val_curve=curves_v,
    )


def build_report(rows, epochs: int, meta: dict | None = None) -> BenchmarkReport:
    """Order rows into the fixed table layout; add medians for multi-seed.

    ``rows`` are RunRow objects, one per completed run.  When a
    configuration has several seeds its rows are labeled
    "<cell>-<opt>:seed=<s>" and followed by a "<cell>-<opt>:median" row.
    """
    if not rows:
        raise ValueError("build_report needs at least one completed run")
    by_config = {}
    for row in rows:
        by_config.setdefault((row.cell, row.optimizer), []).append(row)
    ordered = []
    for key in sorted(by_config, key=lambda k: _config_rank(*k)):
        group = sorted(by_config[key], key=lambda r: r.seed)
        if len(group) == 1:
            only = group[0]
            only.config_id = f"{only.cell}-{only.optimizer}"
            ordered.append(only)
        else:
            for row in group:
                row.config_id = f"{row.cell}-{row.optimizer}:seed={row.seed}"
                ordered.append(row)
            ordered.append(_median_row(group))
    return BenchmarkReport(rows=ordered, epochs=epochs,
                           meta=dict(meta) if meta else {})


# -- export ------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return jsonio.format_float(value)


def report_csv(report: BenchmarkReport, timing: str = "none") -> str:
    lines = [REPORT_HEADER]
    for r in report.rows:
        wall = r.wall_clock_s if timing == "live" else None
        lines.append(",".join([
            r.config_id,
            r.cell,
            r.optimizer,
            jsonio.format_float(r.final_train_loss),
            jsonio.format_float(r.final_val_loss),
            jsonio.format_float(r.rmse_price),
            _fmt(r.epochs_to_threshold),
            str(r.stability_count),
            jsonio.format_float(r.stability_sum),
            _fmt(wall),
        ]))
    return "\n".join(lines) + "\n"


def curves_csv(report: BenchmarkReport) -> str:
    lines = [CURVES_HEADER]
    for r in report.rows:
        for e, (tl, vl) in enumerate(zip(r.train_curve, r.val_curve), start=1):
            lines.append(",".join([
                r.config_id, str(e),
                jsonio.format_float(tl), jsonio.format_float(vl),
            ]))
    return "\n".join(lines) + "\n"


def _log_curve(values) -> list:
    """Natural log of each loss; 0 becomes None (log undefined), <0 rejected."""
    out = []
    for v in values:
        if v < 0.0:
            raise ValueError(f"loss {v!r} is negative; losses are squared errors")
        out.append(None if v == 0.0 else log(v))
    return out


def report_json(report: BenchmarkReport, timing: str = "none") -> str:
    rows = []
    for r in report.rows:
        rows.append({
            "config": r.config_id,
            "cell": r.cell,
            "optimizer": r.optimizer,
            "seed": r.seed,
            "final_train_loss": r.final_train_loss,
            "final_val_loss": r.final_val_loss,
            "rmse_price": r.rmse_price,
            "rmse_norm": r.rmse_norm,
            "epochs_to_threshold": r.epochs_to_threshold,
            "stability_count": r.stability_count,
            "stability_sum": r.stability_sum,
            "wall_clock_s": r.wall_clock_s if timing == "live" else None,
            "grad_evals": r.grad_evals,
            "curves": {
                "train_loss": list(r.train_curve),
                "val_loss": list(r.val_curve),
                "log_train_loss": _log_curve(r.train_curve),
                "log_val_loss": _log_curve(r.val_curve),
            },
        })
    doc = {
        "format": "rnnbench-benchmark",
        "version": 1,
        "epochs": report.epochs,
        "meta": report.meta,
        "rows": rows,
    }
    return jsonio.dumps(doc)


def export(report: BenchmarkReport, out_dir, fmt: str = "both",
           timing: str = "none", stem: str = "benchmark") -> list:
    """Write report files into out_dir; returns the paths written.

    fmt: "csv" (table + curves), "json", or "both".  timing "live"
    includes measured wall-clock values; "none" (default) blanks them so
    repeat runs are byte-identical.
    """
    if fmt not in ("csv", "json", "both"):
        raise ValueError(f"unknown export format {fmt!r}; use csv, json, or both")
    if timing not in TIMING_MODES:
        raise ValueError(f"unknown timing mode {timing!r}; use none or live")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        if fmt in ("csv", "both"):
            table = out / f"{stem}.csv"
            table.write_text(report_csv(report, timing), encoding="ascii")
            written.append(table)
            curves = out / f"{stem}_curves.csv"
            curves.write_text(curves_csv(report), encoding="ascii")
            written.append(curves)
        if fmt in ("json", "both"):
            js = out / f"{stem}.json"
            js.write_text(report_json(report, timing), encoding="ascii")
            written.append(js)
    except OSError as exc:
        raise ValueError(f"cannot write report to {out}: {exc}") from None
    return written


def load_report(path) -> BenchmarkReport:
    """Rebuild a BenchmarkReport from a previously exported JSON file."""
    try:
        doc = jsonio.loads(Path(path).read_text(encoding="ascii"))
    except Exception as exc:
        raise ValueError(f"cannot load report {path}: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != "rnnbench-benchmark":
        raise ValueError(f"{path}: not a rnnbench-benchmark file")
    if doc.get("version") != 1:
        raise ValueError(f"{path}: unsupported version {doc.get('version')!r}")
    rows = []
    for r in doc["rows"]:
        rows.append(RunRow(
            config_id=r["config"],
            cell=r["cell"],
            optimizer=r["optimizer"],
            seed=r["seed"],
            final_train_loss=float(r["final_train_loss"]),
            final_val_loss=float(r["final_val_loss"]),
            rmse_price=float(r["rmse_price"]),
            rmse_norm=float(r["rmse_norm"]),
            epochs_to_threshold=r["epochs_to_threshold"],
            stability_count=int(r["stability_count"]),
            stability_sum=float(r["stability_sum"]),
            wall_clock_s=r["wall_clock_s"],
            grad_evals=r["grad_evals"],
            train_curve=[float(v) for v in r["curves"]["train_loss"]],
            val_curve=[float(v) for v in r["curves"]["val_loss"]],
        ))
    return BenchmarkReport(rows=rows, epochs=int(doc["epochs"]),
                           meta=dict(doc.get("meta", {})))


def format_table(report: BenchmarkReport) -> str:
    """Fixed-width summary table for stdout."""
    headers = ("config", "rmse", "final_train_loss", "final_val_loss",
               "epochs_to_thresh", "stability")
    rows = []
    for r in report.rows:
        rows.append((
            r.config_id,
            f"{r.rmse_price:.4f}",
            f"{r.final_train_loss:.6e}",
            f"{r.final_val_loss:.6e}",
            "-" if r.epochs_to_threshold is None else str(r.epochs_to_threshold),
            f"{r.stability_count}/{r.stability_sum:.3e}",
        ))
    widths = [max(len(h), *(len(row[i]) for row in rows))
              for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines)
