"""Compare the numba and numpy alignment backends.

    python benchmarks/bench_align.py [--sizes 10 50 200 1000] [--repeat 5]

Reports the best-of-``repeat`` time per pair for the DP table plus
traceback at each sequence length, then a whole MNR run over synthetic
notes with each backend and one or more worker threads.
"""

import argparse
import time

import numpy as np

from notescore import _kernels
from notescore.edit_metrics import breakdowns
from notescore.synth import EditInjectionProfile, generate_edit_pairs


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def pair(n, vocab, rng):
    a = rng.integers(0, vocab, n, dtype=np.int64)
    b = a.copy()
    flip = rng.random(n) < 0.1
    b[flip] = rng.integers(0, vocab, int(flip.sum()))
    return a, b


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[10, 50, 200, 1000])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--pairs", type=int, default=20, help="pairs per size")
    ap.add_argument("--notes", type=int, default=1000)
    ap.add_argument("--note-length", type=int, default=300)
    ap.add_argument("--jobs", type=int, nargs="+", default=[1, 4])
    args = ap.parse_args(argv)

    backends = ["numpy"] + (["numba"] if _kernels.HAS_NUMBA else [])
    for b in backends:
        _kernels.warmup(b)

    rng = np.random.default_rng(0)
    print(f"{'length':>8} " + " ".join(f"{b + ' ms/pair':>16}" for b in backends) + f" {'speedup':>8}")
    for n in args.sizes:
        pairs = [pair(n, 200, rng) for _ in range(args.pairs)]
        per = {}
        for b in backends:
            t = best_of(lambda: [_kernels.edit_ops(x, y, b) for x, y in pairs], args.repeat)
            per[b] = 1000 * t / len(pairs)
        ratio = per["numpy"] / per["numba"] if "numba" in per else float("nan")
        print(f"{n:>8} " + " ".join(f"{per[b]:>16.3f}" for b in backends) + f" {ratio:>7.1f}x")

    k = args.note_length // 10
    notes, _ = generate_edit_pairs(EditInjectionProfile(
        args.notes, args.note_length, (0, k), (0, k), (0, k), seed=1))
    print(f"\nMNR over {args.notes} notes of {args.note_length} words")
    for b in backends:
        for jobs in args.jobs:
            t = best_of(lambda: breakdowns(notes, jobs, backend=b), max(1, args.repeat // 2))
            print(f"  {b:>6}  jobs={jobs:<3} {t:8.3f}s")


if __name__ == "__main__":
    main()
