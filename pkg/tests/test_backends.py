"""Cross-backend equivalence: the compiled d=1 kernels must be bit-identical
to the pure-Python reference, not merely statistically close."""

import pytest

from contactqsd import _kernels_py, backend

compiled = pytest.importorskip("contactqsd._kernels")


def flatten(configs):
    return [tuple(x[0] for x in c) for c in configs]


@pytest.mark.parametrize("seed", [1, 7, 99, 12345, 2**62 + 11])
@pytest.mark.parametrize("lam", [0.0, 0.4, 1.0, 1.5])
def test_jump_snapshots_bit_identical(seed, lam):
    sites = [0, 1, 4]
    times = [0.5, 1.0, 2.5, 6.0]
    sc, tc = compiled.jump_snapshots_d1(seed, lam, sites, times, 0)
    sp, tp = _kernels_py.jump_snapshots(seed, lam, [(x,) for x in sites], times, 0)
    assert sc == flatten(sp)
    assert tc == tp


@pytest.mark.parametrize("seed", [3, 17, 404])
def test_censored_jump_bit_identical(seed):
    sc, tc = compiled.jump_snapshots_d1(seed, 1.2, [0], [8.0], 6)
    sp, tp = _kernels_py.jump_snapshots(seed, 1.2, [(0,)], [8.0], 6)
    assert sc == flatten(sp)
    assert tc == tp
    for cfg in sp:
        if cfg:
            assert cfg[-1][0] - cfg[0][0] < 6


@pytest.mark.parametrize("seed", [11, 222, 3333, 44444])
@pytest.mark.parametrize("lam", [0.0, 0.7, 1.3])
def test_evolve_bit_identical(seed, lam):
    sites = [-1, 0, 2]
    times = [1.0, 2.0, 4.0, 5.0]
    sc, tc = compiled.evolve_snapshots_d1(seed, lam, sites, 0.5, times)
    sp, tp = _kernels_py.evolve_snapshots(
        seed, lam, [(x,) for x in sites], 0.5, times
    )
    assert sc == flatten(sp)
    assert tc == tp


@pytest.mark.parametrize("seed", [5, 50, 500])
def test_fv_bit_identical(seed):
    oc, rc = compiled.fv_run_d1(seed, 1.0, 25, [0], 3.0, 10.0)
    op, rp = _kernels_py.fv_run(seed, 1.0, 25, [(0,)], 3.0, 10.0)
    op_flat = {tuple(x[0] for x in k): v for k, v in op.items()}
    assert rc == rp
    assert oc == op_flat  # keys and float occupancy times all exact


def test_dispatcher_reports_backend():
    assert backend.backend_name() in ("compiled", "pure")
    assert backend.compiled_available()


def test_fv_occupancy_total_is_window_times_particles():
    occ, _ = compiled.fv_run_d1(9, 1.0, 25, [0], 3.0, 10.0)
    total = sum(occ.values())
    assert abs(total - 25 * 10.0) < 1e-6
