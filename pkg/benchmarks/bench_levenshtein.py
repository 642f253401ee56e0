"""Compare the compiled and pure-Python edit-distance kernels.

    python3 benchmarks/bench_levenshtein.py [--pairs N] [--repeat R]
"""
import argparse
import statistics
import timeit

import numpy as np

from speakerid import _fuzzy_py

try:
    from speakerid import _fuzzy_ext
except ImportError:
    _fuzzy_ext = None


def make_pairs(n: int, seed: int = 0) -> list[tuple[str, str]]:
    rng = np.random.default_rng(seed)
    alphabet = list("abcdefghijklmnopqrstuvwxyz ")

    def word():
        return "".join(rng.choice(alphabet, int(rng.integers(3, 24))))

    return [(word(), word()) for _ in range(n)]


def bench(fn, pairs, repeat):
    runs = timeit.repeat(lambda: [fn(a, b) for a, b in pairs], number=1, repeat=repeat)
    return statistics.median(runs)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    pairs = make_pairs(args.pairs)
    backends = {"python": _fuzzy_py}
    if _fuzzy_ext is not None:
        backends["cython"] = _fuzzy_ext
        assert all(_fuzzy_ext.levenshtein(a, b) == _fuzzy_py.levenshtein(a, b) for a, b in pairs[:2000])
    else:
        print("compiled extension not built; timing the fallback only")

    times = {}
    for name, mod in backends.items():
        times[name] = bench(mod.levenshtein, pairs, args.repeat)
        per = 1e6 * times[name] / len(pairs)
        print(f"{name:>7}: {times[name]:.4f}s for {len(pairs)} pairs ({per:.2f} us/pair)")
    if len(times) == 2:
        print(f"speedup: {times['python'] / times['cython']:.1f}x")


if __name__ == "__main__":
    main()
