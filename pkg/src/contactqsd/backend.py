"""Kernel backend selection.

The compiled extension (``contactqsd._kernels``, Cython) covers the d=1 hot
paths; the pure-Python module ``_kernels_py`` covers every dimension and
doubles as the reference implementation.  Both produce bit-identical results
for d=1, so switching backends never changes output, only speed.

Selection: CONTACTQSD_BACKEND = ``auto`` (default; compiled when available),
``compiled`` (error if missing) or ``pure``.
"""

import os

from .errors import UsageError
from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # pure-Python install
    _compiled = None

_mode = os.environ.get("CONTACTQSD_BACKEND", "auto").lower()
if _mode not in ("auto", "compiled", "pure"):
    raise UsageError(f"CONTACTQSD_BACKEND must be auto|compiled|pure, got {_mode!r}")
if _mode == "compiled" and _compiled is None:
    raise UsageError("CONTACTQSD_BACKEND=compiled but the extension is not built")

_use_compiled = _compiled is not None and _mode != "pure"


def backend_name():
    return "compiled" if _use_compiled else "pure"


def compiled_available():
    return _compiled is not None


def _to_ints(sites):
    return [s[0] for s in sites]


def _to_tuples(flat):
    return tuple((x,) for x in flat)


def evolve_snapshots(field_seed, lam, d, sites, s, times, block_cache=None):
    """Dispatch open-path evolution; returns (list of configs, tau|None)."""
    if d == 1 and _use_compiled:
        snaps, tau = _compiled.evolve_snapshots_d1(
            field_seed, lam, _to_ints(sites), s, list(times)
        )
        return [_to_tuples(c) for c in snaps], tau
    snaps, tau = _kernels_py.evolve_snapshots(
        field_seed, lam, sites, s, list(times), block_cache=block_cache
    )
    return snaps, tau


def jump_snapshots(seed, lam, d, sites, times, censor_width=0):
    """Dispatch jump-chain simulation; returns (list of configs, tau|None)."""
    if d == 1 and _use_compiled:
        snaps, tau = _compiled.jump_snapshots_d1(
            seed, lam, _to_ints(sites), list(times), censor_width
        )
        return [_to_tuples(c) for c in snaps], tau
    snaps, tau = _kernels_py.jump_snapshots(
        seed, lam, sites, list(times), censor_width=censor_width
    )
    return snaps, tau


def fv_run(seed, lam, d, n_particles, sites, t_burn, t_sample):
    """Dispatch the particle ensemble; returns (occupancy dict, resamples)."""
    if d == 1 and _use_compiled:
        occ, resamples = _compiled.fv_run_d1(
            seed, lam, n_particles, _to_ints(sites), t_burn, t_sample
        )
        return {_to_tuples(k): v for k, v in occ.items()}, resamples
    return _kernels_py.fv_run(seed, lam, n_particles, sites, t_burn, t_sample)
