"""Compare the compiled and numpy trial kernels.

    python benchmarks/bench_kernels.py [--trials N] [--repeat R]

Both implementations are run on identical inputs; the script checks that the
tallies agree and prints the best time and throughput of each.
"""
import argparse
import time

import numpy as np

from etbell import _kernels_py, kernels
from etbell.lhv import paper_model
from etbell.montecarlo import _cumulative, _lhv_arrays
from etbell.phys_model import PhaseConfig, qm_joint_table


def best_time(fn, repeat):
    best, result = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=2_000_000)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    impls = {"numpy": _kernels_py}
    if kernels.compiled_available():
        from etbell import _kernels
        impls["cython"] = _kernels
    else:
        print("compiled kernels not built; benchmarking the numpy fallback only")

    setting_cum = _cumulative([0.25] * 4)
    joint_cum = np.array([_cumulative(r) for r in qm_joint_table(PhaseConfig.optimal())])
    lhv_arrays = _lhv_arrays(paper_model((2 + np.sqrt(2)) / 4))
    cases = {
        "quantum": lambda m: m.tally_quantum(args.seed, 0, args.trials, setting_cum, joint_cum),
        "lhv": lambda m: m.tally_lhv(args.seed, 0, args.trials, setting_cum, *lhv_arrays),
    }

    print(f"{'source':8} {'kernel':8} {'seconds':>9} {'Mtrials/s':>10}")
    for name, case in cases.items():
        results = {}
        for label, module in impls.items():
            t, results[label] = best_time(lambda: case(module), args.repeat)
            print(f"{name:8} {label:8} {t:9.4f} {args.trials / t / 1e6:10.2f}")
        ref = results["numpy"]
        for label, res in results.items():
            if not all(np.array_equal(a, b) for a, b in zip(ref, res)):
                raise SystemExit(f"{label} tallies differ from numpy for {name}")
    print("tallies identical across implementations")


if __name__ == "__main__":
    main()
