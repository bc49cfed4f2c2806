"""Time the compiled kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--repeat 5] [--batch 1000]

Prints one line per kernel with the best-of-N time for each backend, the
speedup, and the largest absolute difference between the two outputs.
"""
import argparse
import timeit

import numpy as np

from bettersol.kernels import available, get_backend

FAMILIES = {"normal": (0, 0.0), "t5": (1, 5.0), "cauchy": (2, 0.0)}


def cases(batch, rng):
    n, m = 20, 10
    draws = np.column_stack([rng.integers(0, n - j, batch) for j in range(m)])
    V = np.sort(rng.standard_normal((batch, m)), axis=1)
    X = rng.standard_normal((20, 3))
    y = X @ np.array([1.0, -2.0, 0.5]) + rng.standard_normal(20)
    S = get_backend("python").fisher_yates(20, 11, np.column_stack(
        [rng.integers(0, 20 - j, batch) for j in range(11)]))
    out = [("fisher_yates n=20 m=10", lambda k: k.fisher_yates(n, m, draws))]
    for name, (fam, df) in FAMILIES.items():
        out.append((f"ks_min {name}", lambda k, f=fam, d=df: k.ks_min(V, f, d, 1.0, 1e-10)))
        out.append((f"nll_min {name}", lambda k, f=fam, d=df: k.nll_min(V, f, d, 1.0, 1e-10)))
    out.append(("lts_batch p=3 m=11", lambda k: k.lts_batch(X, y, S)))
    return out


def max_diff(a, b):
    if isinstance(a, tuple):
        return max(max_diff(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--batch", type=int, default=1000, help="subsets per call")
    args = ap.parse_args()

    backends = available()
    if "cython" not in backends:
        print("compiled kernels not built; only the python backend is available")
    rng = np.random.default_rng(0)
    print(f"batch {args.batch}, best of {args.repeat}")
    print(f"{'kernel':<24}" + "".join(f"{b + ' ms':>12}" for b in backends)
          + f"{'speedup':>10}{'max diff':>12}")
    for label, call in cases(args.batch, rng):
        times, outs = [], []
        for b in backends:
            mod = get_backend(b)
            outs.append(call(mod))
            times.append(min(timeit.repeat(lambda: call(mod), number=1, repeat=args.repeat)))
        row = f"{label:<24}" + "".join(f"{1e3 * t:>12.2f}" for t in times)
        if len(backends) == 2:
            row += f"{times[1] / times[0]:>9.1f}x{max_diff(outs[0], outs[1]):>12.1e}"
        print(row)


if __name__ == "__main__":
    main()
