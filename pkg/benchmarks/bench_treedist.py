"""Compare the jit-compiled distance kernel against the plain one.

Both entry points run the same source function; the jit path compiles
it with numba while the plain path executes it as ordinary Python over
numpy arrays.  Run directly:

    python benchmarks/bench_treedist.py [--sizes 12,24,48,96] [--repeat 3]

The plain path is quadratic in tree size with a large constant, so the
default sizes stay modest; pass larger ones to stress the jit path
alone (the plain column is skipped above --plain-limit).
"""

import argparse
import random
import time

import numpy as np

from mdlab.astdiff import Tree, treedist_numba, treedist_numpy
from mdlab.astdiff.tree import Flat

LABELS = [f"op{i}" for i in range(12)]


def random_tree(rng: random.Random, n: int) -> Tree:
    nodes = [Tree(rng.choice(LABELS), [])]
    for _ in range(n - 1):
        parent = nodes[rng.randrange(len(nodes))]
        child = Tree(rng.choice(LABELS), [])
        parent.children.insert(rng.randint(0, len(parent.children)), child)
        nodes.append(child)
    return nodes[0]


def interned(f1: Flat, f2: Flat):
    vocab: dict[str, int] = {}

    def intern(labels):
        out = np.zeros(len(labels), dtype=np.int64)
        for k, s in enumerate(labels[1:], start=1):
            out[k] = vocab.setdefault(s, len(vocab))
        return out

    return (
        intern(f1.labels()), f1.lld, f1.keyroots,
        intern(f2.labels()), f2.lld, f2.keyroots,
    )


def timed(fn, args, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="12,24,48,96")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--plain-limit", type=int, default=128)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if treedist_numba is None:
        print("jit kernel unavailable (numba missing or MDLAB_NUMBA=0);")
        print("timing the plain path only.")

    rng = random.Random(args.seed)
    pairs = []
    for n in sizes:
        f1 = Flat(random_tree(rng, n))
        f2 = Flat(random_tree(rng, n))
        pairs.append((n, interned(f1, f2)))

    if treedist_numba is not None:
        treedist_numba(*pairs[0][1])  # compile before timing

    print(f"{'nodes':>6}  {'plain':>10}  {'jit':>10}  {'speedup':>8}")
    for n, a in pairs:
        plain = timed(treedist_numpy, a, args.repeat) if n <= args.plain_limit else None
        jit = timed(treedist_numba, a, args.repeat) if treedist_numba else None
        cols = [
            f"{n:>6}",
            f"{plain * 1e3:>9.2f}ms" if plain is not None else f"{'skipped':>10}",
            f"{jit * 1e3:>9.2f}ms" if jit is not None else f"{'n/a':>10}",
        ]
        if plain is not None and jit is not None:
            cols.append(f"{plain / jit:>7.1f}x")
        print("  ".join(cols))

    if treedist_numba is not None:
        check = [
            (treedist_numpy(*a) == treedist_numba(*a)).all()
            for n, a in pairs
            if n <= args.plain_limit
        ]
        print("tables agree on all timed pairs:", all(check))


if __name__ == "__main__":
    main()
