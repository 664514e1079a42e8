"""Compiled vs pure-Python string kernels.

    python benchmarks/bench_kernels.py [--n 200] [--repeat 3]

Times ``lev`` on single pairs and ``nlev_matrix`` on an n x n block of
command-line-like strings for each available backend, and checks that both
backends return identical results.
"""
import argparse
import timeit

import numpy as np

from logspace import _pykernels

try:
    from logspace import _ckernels
except ImportError:
    _ckernels = None


def corpus(n, seed=0):
    rng = np.random.default_rng(seed)
    stems = ["C:\\Windows\\System32\\svchost.exe -k netsvcs",
             "C:\\Users\\host{}\\AppData\\Local\\Temp\\Low\\{:X}.tmp",
             "\"C:\\Program Files (x86)\\Google\\Chrome\\Application\\chrome.exe\" --type=renderer {}",
             "powershell.exe -NoProfile -NonInteractive -Command Get-Service {}"]
    out = []
    for _ in range(n):
        stem = stems[rng.integers(len(stems))]
        out.append(stem.format(rng.integers(100), rng.integers(0x100, 0x10000)))
    return out


def bench(mod, strings, repeat):
    a, b = strings[0], strings[1]
    pair = min(timeit.repeat(lambda: mod.lev(a, b), number=2000, repeat=repeat)) / 2000
    block = min(timeit.repeat(lambda: mod.nlev_matrix(strings, strings), number=1, repeat=repeat))
    return pair, block


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    strings = corpus(args.n)
    backends = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    results = {}
    print(f"{'backend':<8} {'lev/pair':>12} {'nlev_matrix':>14}  ({args.n}x{args.n})")
    for name, mod in backends:
        pair, block = bench(mod, strings, args.repeat)
        results[name] = (pair, block)
        print(f"{name:<8} {pair * 1e6:>10.2f}us {block:>13.4f}s")
    if _ckernels is None:
        print("compiled extension not built; only the pure-Python backend was timed")
        return
    same = np.array_equal(_pykernels.nlev_matrix(strings[:50], strings[:50]),
                          _ckernels.nlev_matrix(strings[:50], strings[:50]))
    p, c = results["python"], results["cython"]
    print(f"speed-up: lev x{p[0] / c[0]:.1f}, nlev_matrix x{p[1] / c[1]:.1f}; identical output: {same}")


if __name__ == "__main__":
    main()
