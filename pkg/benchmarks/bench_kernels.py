"""Compare the compiled and numpy OFUL kernels on a population-sized bank.

    python3 benchmarks/bench_kernels.py --agents 40 --dim 15 --arms 25 --rounds 200
"""
import argparse
import time

import numpy as np

from hetbandits.kernels import available_backends


def bench(impl, n, d, k, rounds, seed=0):
    rng = np.random.default_rng(seed)
    v = np.broadcast_to(np.eye(d), (n, d, d)).copy()
    xty = np.zeros((n, d))
    ones = np.ones(n)
    log_inv_delta = np.full(n, np.log(1 / 0.4))
    contexts = rng.uniform(-1, 1, (rounds, k, d)) / np.sqrt(d)
    ys = rng.standard_normal((rounds, n))
    start = time.perf_counter()
    for t in range(rounds):
        arms = impl.select_arms(v, xty, contexts[t], ones, log_inv_delta, ones, ones)
        impl.rank_one_updates(v, xty, np.ascontiguousarray(contexts[t][arms]), ys[t])
    return time.perf_counter() - start, arms


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--agents", type=int, default=40)
    p.add_argument("--dim", type=int, default=15)
    p.add_argument("--arms", type=int, default=25)
    p.add_argument("--rounds", type=int, default=200)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    backends = available_backends()
    results = {}
    for name, impl in sorted(backends.items()):
        times = [bench(impl, args.agents, args.dim, args.arms, args.rounds)[0] for _ in range(args.repeat)]
        results[name] = min(times)
        per_round = 1e6 * results[name] / args.rounds
        print(f"{name:>7}: {results[name]:.3f}s best of {args.repeat}  ({per_round:.0f} us/round)")
    if len(results) == 2:
        arms = {name: bench(impl, args.agents, args.dim, args.arms, args.rounds)[1] for name, impl in backends.items()}
        print(f"speedup cython over numpy: {results['numpy'] / results['cython']:.2f}x; "
              f"final-round arms agree: {np.array_equal(arms['cython'], arms['numpy'])}")


if __name__ == "__main__":
    main()
