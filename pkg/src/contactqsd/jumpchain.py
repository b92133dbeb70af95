"""Jump-chain simulation of the contact process.

Independent of the graphical construction: waiting times and transitions are
sampled directly, with each infected site contributing total rate
1 + 2*d*lam (recovery, plus every directed arrow whether or not the target
is occupied -- arrows onto occupied sites are no-ops, which keeps the
bookkeeping trivial and the law exact).  Serves both as the fast trajectory
engine for the Monte Carlo estimators and as the law oracle the open-path
evolution is tested against.
"""

from . import backend
from .errors import UsageError
from .lattice import as_config


def jump_evolve(eta0, lam, t, seed, censor_width=0):
    """Sample the configuration at time t started from eta0 at time 0.

    Same law as reading time t off a graphical field.  ``censor_width`` = W
    suppresses infections that would push the diameter to W or beyond
    (the truncated-generator dynamics); 0 disables censoring.
    """
    eta0 = as_config(eta0)
    if t < 0:
        raise UsageError("time must be non-negative")
    if lam < 0:
        raise UsageError("infection rate must be non-negative")
    if not eta0:
        return ()
    if t == 0:
        return eta0
    snaps, _tau = backend.jump_snapshots(
        seed, lam, len(eta0[0]), eta0, [t], censor_width=censor_width
    )
    return snaps[0]


def jump_tau(eta0, lam, t_max, seed, censor_width=0):
    """(final configuration, absorption time or None) up to t_max."""
    eta0 = as_config(eta0)
    if not eta0:
        return (), 0.0
    snaps, tau = backend.jump_snapshots(
        seed, lam, len(eta0[0]), eta0, [t_max], censor_width=censor_width
    )
    return snaps[0], tau


def jump_snapshots(eta0, lam, times, seed, censor_width=0):
    """Snapshots at several increasing times; returns (configs, tau|None)."""
    eta0 = as_config(eta0)
    times = list(times)
    if not times:
        raise UsageError("need at least one snapshot time")
    if any(t2 < t1 for t1, t2 in zip(times, times[1:])):
        raise UsageError("snapshot times must be non-decreasing")
    if not eta0:
        return [()] * len(times), 0.0
    return backend.jump_snapshots(
        seed, lam, len(eta0[0]), eta0, times, censor_width=censor_width
    )
