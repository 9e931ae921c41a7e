"""Compare the compiled geometry kernels with the pure-numpy fallback.

Runs greedy suppression and pairwise-IoU workloads of increasing size on
both backends, checks they agree exactly, and prints the timings. Usage:

    python3 benchmarks/bench_kernels.py [--repeats 5] [--seed 0]
"""

import argparse
import time

import numpy as np

from symscene import _kernels_py

try:
    from symscene import _kernels
except ImportError:
    _kernels = None


def random_scene(rng, n, span=400.0, max_side=120.0):
    x1 = rng.uniform(0, span, n)
    y1 = rng.uniform(0, span, n)
    boxes = np.stack(
        [x1, y1, x1 + rng.uniform(1, max_side, n), y1 + rng.uniform(1, max_side, n)],
        axis=1,
    )
    scores = rng.uniform(0, 1, n)
    order = np.argsort(-scores, kind="stable").astype(np.int64)
    return boxes, order


def best_of(fn, repeats):
    timings = []
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        timings.append(time.perf_counter() - start)
    return result, min(timings)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5, help="timing repeats, best kept")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if _kernels is None:
        print("compiled extension not built; showing the python backend only")
    rng = np.random.default_rng(args.seed)

    print(f"{'workload':<24} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for n in (50, 200, 1000, 4000):
        boxes, order = random_scene(rng, n)
        kept_py, t_py = best_of(lambda: _kernels_py.nms_keep(boxes, order, 0.5), args.repeats)
        if _kernels is None:
            print(f"{'nms n=' + str(n):<24} {t_py * 1e3:>8.2f}ms {'-':>10} {'-':>8}")
            continue
        kept_c, t_c = best_of(lambda: _kernels.nms_keep(boxes, order, 0.5), args.repeats)
        if not np.array_equal(kept_py, kept_c):
            raise SystemExit(f"backends disagree on nms n={n}")
        print(
            f"{'nms n=' + str(n):<24} {t_py * 1e3:>8.2f}ms {t_c * 1e3:>8.2f}ms"
            f" {t_py / t_c:>7.1f}x"
        )

    for n in (200, 1000):
        a, _ = random_scene(rng, n)
        b, _ = random_scene(rng, n)
        m_py, t_py = best_of(lambda: _kernels_py.iou_matrix(a, b), args.repeats)
        if _kernels is None:
            print(f"{f'iou_matrix {n}x{n}':<24} {t_py * 1e3:>8.2f}ms {'-':>10} {'-':>8}")
            continue
        m_c, t_c = best_of(lambda: _kernels.iou_matrix(a, b), args.repeats)
        if not np.array_equal(m_py, m_c):
            raise SystemExit(f"backends disagree on iou_matrix {n}x{n}")
        print(
            f"{f'iou_matrix {n}x{n}':<24} {t_py * 1e3:>8.2f}ms {t_c * 1e3:>8.2f}ms"
            f" {t_py / t_c:>7.1f}x"
        )


if __name__ == "__main__":
    main()
