"""Timing comparison of the pure-Python and Cython kernel backends.

Runs identical forward/backward sweeps (and a short end-to-end training
run) on both backends and prints per-sample latency plus speedup.  The
numeric results are bit-identical between backends — the test suite
enforces that — so this script is purely about wall-clock.

Usage:
    python3 benchmarks/kernel_bench.py [--hidden 50] [--lookback 60]
                                       [--samples 100] [--epoch-samples 200]
"""

import argparse
import time

from rnnbench import kernels
from rnnbench.cells import Forecaster, backward_sequence, forward_sequence
from rnnbench.data import WindowedDataset
from rnnbench.linalg import Rng
from rnnbench.train import TrainConfig, fit


def time_passes(kind, hidden, lookback, samples):
    model = Forecaster.init_random(kind, hidden, 1, seed=0)
    rng = Rng(1)
    windows = [[rng.next_float() for _ in range(lookback)]
               for _ in range(samples)]
    t0 = time.perf_counter()
    for w in windows:
        pred, cache = forward_sequence(model, w)
        backward_sequence(model, cache, 2.0 * (pred - 0.5))
    return (time.perf_counter() - t0) / samples


def time_fit(kind, hidden, lookback, n_samples):
    rng = Rng(2)
    values = [rng.next_float() for _ in range(n_samples + lookback + 10)]
    full = [(values[i:i + lookback], values[i + lookback])
            for i in range(n_samples)]
    train = WindowedDataset(lookback, full[:int(n_samples * 0.9)])
    val = WindowedDataset(lookback, full[int(n_samples * 0.9):])
    cfg = TrainConfig(cell=kind, optimizer="adam", epochs=1, hidden=hidden,
                      lookback=lookback, seed=0)
    t0 = time.perf_counter()
    fit(cfg, train, val)
    return time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--hidden", type=int, default=50)
    ap.add_argument("--lookback", type=int, default=60)
    ap.add_argument("--samples", type=int, default=100,
                    help="forward+backward pairs to time per cell")
    ap.add_argument("--epoch-samples", type=int, default=200,
                    help="training samples for the one-epoch fit timing")
    args = ap.parse_args()

    backends = kernels.available()
    if "cython" not in backends:
        print("note: compiled backend not built; timing pure Python only")

    print(f"hidden={args.hidden} lookback={args.lookback} "
          f"samples={args.samples} epoch_samples={args.epoch_samples}")
    header = f"{'benchmark':<28}" + "".join(f"{b:>14}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))

    def report(label, fn, kind, n, fmt):
        times = {}
        for backend in backends:
            kernels.set_backend(backend)
            times[backend] = fn(kind, args.hidden, args.lookback, n)
        line = f"{label:<28}" + "".join(fmt(times[b]) for b in backends)
        if len(backends) == 2:
            line += f"{times['python'] / times['cython']:>9.1f}x"
        print(line)

    for kind in ("lstm", "gru"):
        report(f"{kind} fwd+bwd per sample", time_passes, kind, args.samples,
               lambda t: f"{t * 1e3:>12.2f}ms")
    for kind in ("lstm", "gru"):
        report(f"{kind} adam 1-epoch fit", time_fit, kind, args.epoch_samples,
               lambda t: f"{t:>13.2f}s")


if __name__ == "__main__":
    main()
