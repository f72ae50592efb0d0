"""Time the compiled billiard kernel against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--collisions N] [--repeat R] [--balls B]

Both kernels run the same break from the same initial state; the final
states are compared bit for bit before any timing is reported.
"""
import argparse
import sys
import time

import numpy as np

from desklab.billiard import backend, init_break, simulate


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--collisions", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--balls", type=int, default=15, help="target balls in the rack")
    args = ap.parse_args(argv)

    try:
        ck = backend.get("cython")
    except ImportError:
        print("compiled kernel not built; rebuild with `pip install -e . --no-build-isolation`")
        return 1
    py = backend.get("python")
    world = init_break(n_target_balls=args.balls, cue_offset=0.05)

    results = {}
    for name, k in (("cython", ck), ("python", py)):
        dt, (out, _) = best_of(lambda: simulate(world, collisions=args.collisions, kernel=k), args.repeat)
        results[name] = (dt, out)

    a, b = results["cython"][1], results["python"][1]
    same = np.array_equal(a.positions, b.positions) and np.array_equal(a.velocities, b.velocities)
    print(f"{world.n_balls} balls, {args.collisions} collisions, best of {args.repeat}")
    for name, (dt, _) in results.items():
        print(f"  {name:7s} {dt * 1e3:9.1f} ms  {args.collisions / dt:12.0f} events/s")
    print(f"  speedup {results['python'][0] / results['cython'][0]:.1f}x, bit-identical: {same}")
    return 0 if same else 1


if __name__ == "__main__":
    sys.exit(main())
