"""Compare the numba and pure-numpy conv kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--reps 20]

The numba path must be importable for a meaningful comparison; run with
PRUNEKIT_NO_NUMBA unset.
"""

import argparse
import time

import numpy as np

from prunekit import kernels


def bench(fn, args, reps):
    fn(*args)  # warmup (and JIT compile)
    start = time.perf_counter()
    for _ in range(reps):
        fn(*args)
    return (time.perf_counter() - start) / reps


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--reps", type=int, default=20)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    shapes = {
        # the 8x8 pattern task the engine actually trains on
        "small": ((32, 1, 8, 8), (1, 4, 3, 3)),
        "large": ((32, 8, 28, 28), (8, 16, 3, 3)),
    }
    if not kernels.USING_NUMBA:
        print("numba backend unavailable (PRUNEKIT_NO_NUMBA set or numba missing); "
              "timing numpy only")
    print(f"{'case':<24}{'numpy (ms)':>12}{'numba (ms)':>12}{'speedup':>10}")
    for label, (x_shape, w_shape) in shapes.items():
        x = rng.normal(size=x_shape)
        w = rng.normal(size=w_shape)
        gout = kernels.conv2d_forward_np(x, w)
        cases = [
            ("conv2d_forward", kernels.conv2d_forward_np, (x, w)),
            ("conv2d_grad_w", kernels.conv2d_grad_w_np, (x, gout)),
            ("conv2d_grad_x", kernels.conv2d_grad_x_np, (gout, w)),
        ]
        for name, np_fn, call_args in cases:
            t_np = bench(np_fn, call_args, args.reps) * 1e3
            row = f"{label}/{name}"
            if kernels.USING_NUMBA:
                nb_fn = getattr(kernels, name + "_nb")
                assert np.allclose(nb_fn(*call_args), np_fn(*call_args))
                t_nb = bench(nb_fn, call_args, args.reps) * 1e3
                print(f"{row:<24}{t_np:>12.3f}{t_nb:>12.3f}{t_np / t_nb:>10.2f}x")
            else:
                print(f"{row:<24}{t_np:>12.3f}{'-':>12}{'-':>10}")


if __name__ == "__main__":
    main()
