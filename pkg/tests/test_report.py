import math

import pytest

from rnnbench.data import ScalerParams, WindowedDataset, make_windows
from rnnbench.report import (
    CURVES_HEADER,
    REPORT_HEADER,
    BenchmarkReport,
    RunRow,
    build_report,
    curves_csv,
    export,
    format_table,
    load_report,
    predict_series,
    report_csv,
    report_json,
    rmse,
    run_row,
)
from rnnbench.train import TrainConfig, fit


def make_row(cell="lstm", optimizer="adam", seed=0, rmse_price=5.0,
             epochs_to_threshold=None, wall=1.5):
    return RunRow(
        config_id=f"{cell}-{optimizer}",
        cell=cell,
        optimizer=optimizer,
        seed=seed,
        final_train_loss=0.01 + seed * 0.001,
        final_val_loss=0.02,
        rmse_price=rmse_price,
        rmse_norm=rmse_price / 100.0,
        epochs_to_threshold=epochs_to_threshold,
        stability_count=seed % 3,
        stability_sum=0.004 * (seed % 3),
        wall_clock_s=wall,
        grad_evals=330,
        train_curve=[0.1 / (e + 1) + seed * 1e-4 for e in range(3)],
        val_curve=[0.2 / (e + 1) for e in range(3)],
    )


# -- rmse ---------------------------------------------------------------------


def test_rmse_hand_value():
    # errors 3 and 4 -> sqrt((9+16)/2) = sqrt(12.5)
    assert rmse([13.0, 10.0], [10.0, 14.0]) == pytest.approx(math.sqrt(12.5))


def test_rmse_zero_for_perfect_predictions():
    assert rmse([1.0, 2.0], [1.0, 2.0]) == 0.0


def test_rmse_guards():
    with pytest.raises(ValueError, match="mismatch"):
        rmse([1.0], [1.0, 2.0])
    with pytest.raises(ValueError, match="at least one"):
        rmse([], [])


# -- row construction ----------------------------------------------------------


def small_run():
    values = [0.2 + 0.6 * abs(math.sin(i * 0.7)) for i in range(40)]
    full = make_windows(values, 4)
    train = WindowedDataset(4, full.samples[:25])
    val = WindowedDataset(4, full.samples[25:30])
    test = WindowedDataset(4, full.samples[30:])
    config = TrainConfig(cell="gru", optimizer="adam", epochs=3, hidden=4,
                         lookback=4, seed=1)
    return fit(config, train, val), test


def test_run_row_scores_test_partition():
    result, test_set = small_run()
    scaler = ScalerParams(min_x=100.0, max_x=200.0)
    row = run_row(result, scaler, test_set)
    assert row.config_id == "gru-adam"
    assert row.rmse_price == pytest.approx(row.rmse_norm * 100.0)
    assert len(row.train_curve) == 3
    assert row.final_train_loss == result.records[-1].train_loss
    # price-domain predictions live in the scaler's range, roughly
    preds = predict_series(result.model, scaler, test_set)
    assert all(50.0 < p < 250.0 for p in preds)


# -- report assembly -------------------------------------------------------------


def test_build_report_single_seed_order():
    rows = [make_row("gru", "nag"), make_row("lstm", "adam"),
            make_row("gru", "adam"), make_row("lstm", "nag")]
    report = build_report(rows, epochs=3)
    assert [r.config_id for r in report.rows] == \
        ["lstm-adam", "lstm-nag", "gru-adam", "gru-nag"]


def test_build_report_multi_seed_adds_median():
    rows = [make_row("lstm", "adam", seed=s, rmse_price=5.0 + s)
            for s in (0, 1, 2)]
    report = build_report(rows, epochs=3)
    ids = [r.config_id for r in report.rows]
    assert ids == ["lstm-adam:seed=0", "lstm-adam:seed=1",
                   "lstm-adam:seed=2", "lstm-adam:median"]
    median = report.rows[-1]
    assert median.seed is None
    assert median.rmse_price == 6.0
    # curves are elementwise medians
    assert median.train_curve[0] == pytest.approx(0.1 + 1e-4)


def test_median_epochs_to_threshold_never_is_none():
    rows = [make_row("gru", "adam", seed=s, epochs_to_threshold=None)
            for s in (0, 1)]
    report = build_report(rows, epochs=3)
    assert report.rows[-1].epochs_to_threshold is None


def test_median_epochs_to_threshold_lower_median():
    rows = [make_row("gru", "adam", seed=0, epochs_to_threshold=2),
            make_row("gru", "adam", seed=1, epochs_to_threshold=4),
            make_row("gru", "adam", seed=2, epochs_to_threshold=None)]
    report = build_report(rows, epochs=3)
    assert report.rows[-1].epochs_to_threshold == 4  # lower median of {2,4,inf}


def test_build_report_empty_rejected():
    with pytest.raises(ValueError):
        build_report([], epochs=3)


# -- text formats ------------------------------------------------------------------


def test_report_csv_header_and_shape():
    report = build_report([make_row()], epochs=3)
    text = report_csv(report)
    lines = text.splitlines()
    assert lines[0] == REPORT_HEADER
    assert lines[0] == ("config,cell,optimizer,final_train_loss,final_val_loss,"
                        "rmse,epochs_to_threshold,stability_count,stability_sum,"
                        "wall_clock_s")
    assert len(lines) == 2
    fields = lines[1].split(",")
    assert fields[0] == "lstm-adam"
    assert fields[6] == ""   # no threshold crossing
    assert fields[9] == ""   # timing suppressed by default


def test_report_csv_live_timing():
    report = build_report([make_row(wall=2.25)], epochs=3)
    text = report_csv(report, timing="live")
    assert text.splitlines()[1].split(",")[9] == "2.25"


def test_curves_csv_shape():
    report = build_report([make_row()], epochs=3)
    lines = curves_csv(report).splitlines()
    assert lines[0] == CURVES_HEADER
    assert len(lines) == 1 + 3
    assert lines[1].startswith("lstm-adam,1,")


def test_report_json_round_trip(tmp_path):
    rows = [make_row("lstm", "adam", seed=s) for s in (0, 1)] + \
        [make_row("gru", "nag", seed=0)]
    report = build_report(rows, epochs=3, meta={"lr": 0.001})
    paths = export(report, tmp_path, fmt="json")
    assert len(paths) == 1
    loaded = load_report(paths[0])
    assert loaded.epochs == 3
    assert loaded.meta == {"lr": 0.001}
    assert [r.config_id for r in loaded.rows] == \
        [r.config_id for r in report.rows]
    for a, b in zip(loaded.rows, report.rows):
        assert a.final_train_loss == b.final_train_loss
        assert a.train_curve == b.train_curve


def test_json_includes_log_curves():
    report = build_report([make_row()], epochs=3)
    text = report_json(report)
    assert '"log_train_loss"' in text
    doc_rows = load_report_text(text)
    logs = doc_rows[0]["curves"]["log_train_loss"]
    assert logs[0] == pytest.approx(math.log(0.1))


def load_report_text(text):
    from rnnbench.jsonio import loads
    return loads(text)["rows"]


def test_json_zero_loss_logs_as_null():
    row = make_row()
    row.train_curve = [0.0, 0.1, 0.01]
    report = BenchmarkReport(rows=[row], epochs=3, meta={})
    doc_rows = load_report_text(report_json(report))
    assert doc_rows[0]["curves"]["log_train_loss"][0] is None


def test_json_negative_loss_rejected():
    row = make_row()
    row.train_curve = [-0.5, 0.1, 0.01]
    report = BenchmarkReport(rows=[row], epochs=3, meta={})
    with pytest.raises(ValueError, match="negative"):
        report_json(report)


def test_export_both_writes_three_files(tmp_path):
    report = build_report([make_row()], epochs=3)
    paths = export(report, tmp_path / "sub", fmt="both")
    names = sorted(p.name for p in paths)
    assert names == ["benchmark.csv", "benchmark.json", "benchmark_curves.csv"]


def test_export_is_byte_stable(tmp_path):
    report = build_report([make_row()], epochs=3)
    a = export(report, tmp_path / "a")
    b = export(report, tmp_path / "b")
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()


def test_export_rejects_bad_modes(tmp_path):
    report = build_report([make_row()], epochs=3)
    with pytest.raises(ValueError, match="format"):
        export(report, tmp_path, fmt="xml")
    with pytest.raises(ValueError, match="timing"):
        export(report, tmp_path, timing="cpu")


def test_load_report_rejects_other_files(tmp_path):
    path = tmp_path / "x.json"
    path.write_text('{"format": "rnnbench-prepared", "version": 1}')
    with pytest.raises(ValueError, match="not a"):
        load_report(path)


def test_format_table_lists_all_rows():
    rows = [make_row("lstm", "adam"), make_row("gru", "nag")]
    table = format_table(build_report(rows, epochs=3))
    assert "lstm-adam" in table
    assert "gru-nag" in table
    assert table.splitlines()[0].startswith("config")
