"""Time the compiled and numpy online-SGD kernels on identical inputs.

    python benchmarks/bench_kernels.py [--steps N] [--repeat R]
"""

import argparse
import time

import numpy as np

from hermgen import _backend
from hermgen.nn import init_net

SHAPES = [(32, 128), (128, 512)]


def time_kernel(kernel, d, h, steps, repeat):
    rng = np.random.default_rng(0)
    X = rng.standard_normal((steps, d))
    Y = np.where(rng.random(steps) < 0.5, -1.0, 1.0)
    best = float("inf")
    final = None
    for _ in range(repeat):
        net = init_net(d, h, init_scale=0.1, seed=1)
        start = time.perf_counter()
        kernel(net.V, net.u, net.a, X, Y, 0.05 / d, 0, steps)
        best = min(best, time.perf_counter() - start)
        final = net
    return best, final


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=20_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    print(f"default backend: {_backend.BACKEND}; available: {', '.join(sorted(_backend.KERNELS))}")
    print(f"{'d':>5} {'h':>5} {'kernel':>8} {'seconds':>9} {'steps/s':>10} {'speedup':>8}")
    for d, h in SHAPES:
        results = {name: time_kernel(k, d, h, args.steps, args.repeat)
                   for name, k in sorted(_backend.KERNELS.items())}
        base = results["python"][0]
        for name, (secs, net) in results.items():
            print(f"{d:>5} {h:>5} {name:>8} {secs:>9.3f} {args.steps / secs:>10.0f} {base / secs:>7.1f}x")
        if len(results) > 1:
            nets = [r[1] for r in results.values()]
            drift = max(float(np.max(np.abs(nets[0].V - n.V))) for n in nets[1:])
            print(f"{'':>11} max |V difference| between kernels: {drift:.1e}")


if __name__ == "__main__":
    main()
