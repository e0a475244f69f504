"""Compare the compiled and pure-Python alignment kernels.

Times ``dtw_accumulate``, ``sdtw_accumulate`` and ``gms_scan`` for every
importable backend, checks that their outputs agree bit for bit, and reports
how GMS-SDTW time grows when the human sequence doubles in length.

Usage::

    python3 benchmarks/bench_kernels.py [--sizes 64 128 256] [--repeats 3]
"""
import argparse
import time

import numpy as np

from hrmap.kernels import available_backends


def best_time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_kernels(sizes, repeats, seed):
    rng = np.random.default_rng(seed)
    backends = available_backends()
    print(f"{'kernel':<16}{'size':>10}" + "".join(f"{name:>12}" for name in backends) + f"{'speedup':>10}")
    for n in sizes:
        C = rng.uniform(size=(n, n))
        Cq = rng.uniform(size=(4 * n, max(8, n // 4)))
        l_min = max(1, n // 8)
        cases = {
            "dtw_accumulate": (lambda m: m.dtw_accumulate(C), f"{n}x{n}"),
            "sdtw_accumulate": (lambda m: m.sdtw_accumulate(C), f"{n}x{n}"),
            "gms_scan": (lambda m: m.gms_scan(Cq, l_min, l_min + l_min // 2, 0.45), f"{Cq.shape[0]}x{Cq.shape[1]}"),
        }
        for name, (call, label) in cases.items():
            outs = {b: call(m) for b, m in backends.items()}
            ref = next(iter(outs.values()))
            for b, o in outs.items():
                same = np.array_equal(o, ref) if isinstance(o, np.ndarray) else o == ref
                if not same:
                    raise SystemExit(f"backend {b} disagrees on {name} at size {n}")
            times = {b: best_time(lambda m=m: call(m), repeats) for b, m in backends.items()}
            speed = times["python"] / times["cython"] if "cython" in times else float("nan")
            print(f"{name:<16}{label:>10}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times.values()) + f"{speed:>9.1f}x")


def run_scaling(repeats, seed):
    """GMS-SDTW time when the human sequence doubles (robot length fixed)."""
    from hrmap.kernels import BACKEND, gms_scan

    rng = np.random.default_rng(seed)
    T_r, l_min, l_max = 40, 32, 48
    prev = None
    print(f"\nGMS-SDTW scaling ({BACKEND} backend, T_r={T_r}, L={l_min}..{l_max})")
    for T_h in (300, 600, 1200, 2400):
        C = rng.uniform(size=(T_h, T_r))
        t = best_time(lambda: gms_scan(C, l_min, l_max, 0.45), repeats)
        ratio = "" if prev is None else f"  x{t / prev:.2f} vs half length"
        print(f"  T_h={T_h:>5}: {t * 1e3:8.2f} ms{ratio}")
        prev = t


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0],
                                 formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256], help="square cost matrix sizes")
    ap.add_argument("--repeats", type=int, default=3, help="timing repeats; the best is reported")
    ap.add_argument("--seed", type=int, default=0, help="seed for the random cost matrices")
    args = ap.parse_args()
    run_kernels(args.sizes, args.repeats, args.seed)
    run_scaling(args.repeats, args.seed)


if __name__ == "__main__":
    main()
