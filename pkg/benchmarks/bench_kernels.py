"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--seed 0]

Each kernel runs on the same random inputs under every available backend;
the table reports the best-of-N wall time and the speedup over Python.
"""

import argparse
import random
import timeit
from array import array

import numpy as np

from muspan import kernels


def make_cases(seed):
    rng = random.Random(seed)
    text = array("q", (rng.randrange(3) for _ in range(5_000)))
    pattern = array("q", text[4_000:4_012])
    a = "".join(rng.choice("abcdefgh ") for _ in range(300))
    b = "".join(rng.choice("abcdefgh ") for _ in range(300))
    x = array("q", (rng.randrange(50) for _ in range(400)))
    y = array("q", (rng.randrange(50) for _ in range(400)))
    n = 400
    nprng = np.random.default_rng(seed)
    start, end = nprng.dirichlet(np.ones(n + 1)), nprng.dirichlet(np.ones(n + 1))
    blocked = np.zeros(n, dtype=np.uint8)
    blocked[nprng.choice(n, 40, replace=False)] = 1
    return {
        "kmp_find (5000 tokens)": lambda k: k.kmp_find(pattern, text, 2_500),
        "levenshtein (300 x 300 chars)": lambda k: k.levenshtein(a, b),
        "lcs_length (400 x 400)": lambda k: k.lcs_length(x, y),
        "best_pair (n=400, 40 blocked)": lambda k: k.best_pair(start, end, n, blocked, False),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    names = sorted(kernels.BACKENDS, key=lambda s: s != "python")
    if len(names) == 1:
        print("compiled extension not built; only the Python backend is available")
    print(f"{'kernel':32s}" + "".join(f"{n:>12s}" for n in names) + ("   speedup" if len(names) > 1 else ""))
    for label, fn in make_cases(args.seed).items():
        results = [fn(kernels.BACKENDS[n]) for n in names]
        assert all(r == results[0] for r in results), f"{label}: backends disagree {results}"
        times = []
        for n in names:
            impl = kernels.BACKENDS[n]
            timer = timeit.Timer(lambda: fn(impl))
            number, _ = timer.autorange()
            times.append(min(timer.repeat(args.repeat, number)) / number)
        row = f"{label:32s}" + "".join(f"{t * 1e3:10.3f}ms" for t in times)
        if len(times) > 1:
            row += f"   {times[0] / times[1]:6.1f}x"
        print(row)


if __name__ == "__main__":
    main()
