"""Fleming-Viot particle estimator of the quasi-stationary law.

N copies of the process evolve independently; the moment one hits the
absorbing state it is reinstated as a copy of a uniformly chosen surviving
copy.  The time-averaged empirical measure over a post-burn-in window
approximates the quasi-stationary law, and the per-particle resampling
frequency estimates the absorption rate -- without the e^(alpha t) replica
cost that plain conditioning pays.  The ensemble is one interacting system
driven by a single sequential stream, so runs are single-worker by design.
"""

import math

from . import backend
from .errors import UsageError
from .lattice import as_config, canonicalize
from .qsd import QsdEstimate, normalize_counts
from .rng import TAG_FV, derive


def fleming_viot_estimate(n_particles, lam, t_burn, t_sample, seed,
                          zeta0=((0,),), dimension=None):
    """Run the particle ensemble and return its occupation law.

    All particles start at ``zeta0`` (default: the singleton at the
    origin).  ``alpha_hat`` is (resampling events per unit time) / N over
    the sampling window; its stderr treats resamplings as Poisson, which
    ignores autocorrelation and is reported as a rough scale only.
    """
    if n_particles < 2:
        raise UsageError("need at least 2 particles")
    if t_burn < 0 or t_sample <= 0:
        raise UsageError("t_burn must be >= 0 and t_sample > 0")
    cfg = canonicalize(as_config(zeta0))
    if not isinstance(cfg, tuple) or not cfg:
        raise UsageError("zeta0 must be a non-empty configuration")
    d = len(cfg[0])
    if dimension is not None and dimension != d:
        raise UsageError("dimension does not match zeta0")
    occupancy, resamples = backend.fv_run(
        derive(seed, TAG_FV), lam, d, n_particles, cfg, float(t_burn),
        float(t_sample),
    )
    alpha_hat = resamples / (n_particles * t_sample)
    alpha_stderr = (
        math.sqrt(resamples) / (n_particles * t_sample) if resamples else 0.0
    )
    return QsdEstimate(
        pmf=normalize_counts(occupancy),
        support_truncated=False,
        n_effective=n_particles,
        alpha_hat=alpha_hat,
        method="fleming-viot",
        alpha_stderr=alpha_stderr,
    )
