"""Time the compiled coloring kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

from ramseylab import kernels
from ramseylab.arrow import ArrowProblem
from ramseylab.structures import linear_order as L, ordered_graph

CASES = [
    # (label, C, B, A, k, kernel)
    ("R(3,3): [6] -> ([3])^[2]_2", L(6), L(3), L(2), 2, "exhaustive"),
    ("[7] -> ([3])^[2]_2", L(7), L(3), L(2), 2, "exhaustive"),
    ("[5] -> ([3])^[2]_2, bad coloring", L(5), L(3), L(2), 2, "backtrack"),
    ("[8] -> ([4])^[2]_2, bad coloring", L(8), L(4), L(2), 2, "backtrack"),
    ("[10] -> ([3])^[1]_4", L(10), L(3), L(1), 4, "backtrack"),
    ("K4 ordered -> (edge)^point_2", ordered_graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)]),
     ordered_graph(2, [(0, 1)]), ordered_graph(1), 2, "exhaustive"),
]


def run(mod, problem, k, kind):
    members, offsets = problem.csr
    if kind == "exhaustive":
        return mod.exhaustive(problem.n, k, members, offsets, 0, k, False)[2]
    return mod.backtrack(problem.n, k, members, offsets, problem.degree_order(), 0)[2]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = ["python"] + (["cython"] if kernels.compiled is not None else [])
    if len(backends) == 1:
        print("compiled kernels are not built; timing the fallback only")
    print(f"{'case':40} {'work':>10} " + " ".join(f"{b:>10}" for b in backends) + "   speedup")
    for label, C, B, A, k, kind in CASES:
        problem = ArrowProblem(C, B, A)
        problem.csr  # build outside the timed region
        row = {}
        work = None
        for b in backends:
            t, work = best_of(lambda: run(kernels.get(b), problem, k, kind), args.repeat)
            row[b] = t
        speed = f"{row['python'] / row['cython']:8.1f}x" if "cython" in row else ""
        print(f"{label:40} {work:>10} " + " ".join(f"{row[b]:>9.4f}s" for b in backends) + f"   {speed}")


if __name__ == "__main__":
    main()
