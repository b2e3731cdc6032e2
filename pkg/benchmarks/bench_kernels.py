"""Compare the compiled and pure-Python hashing kernels.

    python benchmarks/bench_kernels.py [--repeat N]

Runs each kernel over the bundled knowledge-base texts, checks that both
implementations agree, and prints the median time per pass.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from licvar import _pykernels
from licvar.fingerprint import DEFAULT_K, DEFAULT_W, normalized
from licvar.kb import load

try:
    from licvar import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def timed(fn, texts, repeat: int) -> float:
    samples = []
    for _ in range(repeat):
        start = time.perf_counter()
        for t in texts:
            fn(t)
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    texts = [normalized(lic.full_text) for lic in load().licenses.values()]
    chars = sum(map(len, texts))
    cases = {
        "winnow": lambda m: (lambda t: m.winnow(t, DEFAULT_K, DEFAULT_W)),
        "ngram_counts": lambda m: (lambda t: m.ngram_counts(t, 3, 1024)),
    }
    print(f"{len(texts)} texts, {chars} normalized characters, median of {args.repeat}")
    for name, make in cases.items():
        py = timed(make(_pykernels), texts, args.repeat)
        line = f"{name:14s} python {py * 1e3:9.2f} ms"
        if _ckernels is not None:
            for t in texts:
                a, b = make(_pykernels)(t), make(_ckernels)(t)
                same = bool(np.array_equal(a, b)) if name == "ngram_counts" else a == b
                assert same, f"{name}: kernels disagree"
            cy = timed(make(_ckernels), texts, args.repeat)
            line += f"   cython {cy * 1e3:9.2f} ms   speedup {py / cy:6.1f}x"
        else:
            line += "   cython: not built"
        print(line)


if __name__ == "__main__":
    main()
