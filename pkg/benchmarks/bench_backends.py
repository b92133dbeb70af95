"""Throughput comparison: compiled d=1 kernels vs the pure-Python fallback.

Runs the same workloads through both backends (outputs are bit-identical by
contract, which is asserted here on a sample) and reports wall time and
speedup.  Usage: python benchmarks/bench_backends.py [--quick]
"""

import argparse
import time

from contactqsd import _kernels_py

try:
    from contactqsd import _kernels
except ImportError:
    _kernels = None


def timeit(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return time.perf_counter() - t0, out


def bench_jump(n_replicas):
    def compiled():
        for i in range(n_replicas):
            _kernels.jump_snapshots_d1(i * 2 + 1, 1.0, [0], [12.0], 0)

    def pure():
        for i in range(n_replicas):
            _kernels_py.jump_snapshots(i * 2 + 1, 1.0, [(0,)], [12.0], 0)

    return compiled, pure


def bench_evolve(n_replicas):
    def compiled():
        for i in range(n_replicas):
            _kernels.evolve_snapshots_d1(i * 3 + 1, 1.0, [0, 1, 2], 0.0, [2.0])

    def pure():
        for i in range(n_replicas):
            _kernels_py.evolve_snapshots(
                i * 3 + 1, 1.0, [(0,), (1,), (2,)], 0.0, [2.0]
            )

    return compiled, pure


def bench_fv(n_particles, t_sample):
    def compiled():
        _kernels.fv_run_d1(7, 1.0, n_particles, [0], 10.0, t_sample)

    def pure():
        _kernels_py.fv_run(7, 1.0, n_particles, [(0,)], 10.0, t_sample)

    return compiled, pure


def check_equivalence():
    sc, tc = _kernels.jump_snapshots_d1(42, 1.0, [0, 1], [1.0, 3.0], 0)
    sp, tp = _kernels_py.jump_snapshots(42, 1.0, [(0,), (1,)], [1.0, 3.0], 0)
    assert sc == [tuple(x[0] for x in c) for c in sp] and tc == tp
    ec, _ = _kernels.evolve_snapshots_d1(43, 1.0, [0], 0.0, [4.0])
    ep, _ = _kernels_py.evolve_snapshots(43, 1.0, [(0,)], 0.0, [4.0])
    assert ec == [tuple(x[0] for x in c) for c in ep]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true", help="smaller workloads")
    args = ap.parse_args()

    if _kernels is None:
        raise SystemExit("compiled extension not built; nothing to compare")
    check_equivalence()

    scale = 10 if args.quick else 1
    workloads = [
        ("jump-chain trajectories to t=12", *bench_jump(50_000 // scale)),
        ("graphical evolutions, 3 seeds to t=2", *bench_evolve(20_000 // scale)),
        ("particle ensemble N=2000, window 50", *bench_fv(2000 // scale, 50.0)),
    ]
    print(f"{'workload':45s} {'compiled':>10s} {'pure':>10s} {'speedup':>8s}")
    for name, compiled, pure in workloads:
        tc, _ = timeit(compiled)
        tp, _ = timeit(pure)
        print(f"{name:45s} {tc:9.2f}s {tp:9.2f}s {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
