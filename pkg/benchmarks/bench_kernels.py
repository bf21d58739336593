"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py --repeat 5
"""
import argparse
import time

import numpy as np

from spa_kit import _kernels
from spa_kit.oracles import random_system
from spa_kit.poleselect import polar_grid, spiral_sequence


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(S, grid, poles):
    flat = S.flat
    z = np.exp(1j * np.linspace(0.0, np.pi, 8192))
    return {
        "pf_eval (8192 pts)": lambda impl: _kernels.pf_eval(flat, z, impl),
        "impulse_block (4096)": lambda impl: _kernels.impulse_block(flat, 1, 4096, impl),
        "impulse_energy (T=20000)": lambda impl: _kernels.impulse_energy(flat, 20000, impl),
        "min_dist (disk grid)": lambda impl: _kernels.min_dist(grid, poles, True, impl),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args(argv)

    S = random_system(args.seed, 2, 2, max_poles=6, max_mult=3, pole_radius_cap=0.95)
    grid = polar_grid(0.01, closed=False)
    poles = spiral_sequence(64).poles[0::2]
    impls = [("python", _kernels.python_backend)]
    if _kernels.compiled_backend is not None:
        impls.append(("cython", _kernels.compiled_backend))
    else:
        print("compiled backend unavailable; timing the fallback only")

    print(f"system: {S}")
    print(f"{'kernel':28s}" + "".join(f"{name:>12s}" for name, _ in impls) + f"{'speedup':>10s}")
    for label, fn in cases(S, grid, poles).items():
        t = [best_of(lambda: fn(impl), args.repeat) for _, impl in impls]
        ref = fn(impls[0][1])
        if len(impls) > 1:
            other = fn(impls[1][1])
            scale = max(1.0, float(np.max(np.abs(ref))))
            assert np.allclose(ref, other, rtol=1e-9, atol=1e-9 * scale), label
        speed = f"{t[0] / t[-1]:9.1f}x" if len(t) > 1 else ""
        print(f"{label:28s}" + "".join(f"{x * 1e3:10.2f}ms" for x in t) + speed)


if __name__ == "__main__":
    main()
