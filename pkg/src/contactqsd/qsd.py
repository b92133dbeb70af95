"""Monte Carlo estimators of the quasi-stationary behavior.

Conditioned-on-survival state laws at a fixed time, survival curves with
exponential-tail fits, and the initial-condition insensitivity check that
makes uniqueness of the quasi-stationary law an observable.  Trajectories
come from the jump-chain engine; replica i always draws from the substream
keyed (seed, TAG_TRAJ, i), so estimates are reproducible bit-for-bit for
any worker count.
"""

import bisect
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import parallel
from .errors import DegenerateSampleError, InsufficientDataError, UsageError
from .jumpchain import jump_tau
from .lattice import as_config, canonicalize
from .rng import TAG_BOOT, TAG_INIT, TAG_PAIR, TAG_TRAJ, Stream, derive
from .stats import binomial_stderr, fit_log_slope, total_variation

PMF_SUM_TOL = 1e-12


@dataclass
class QsdEstimate:
    """A probability law over canonical configurations plus metadata.

    ``pmf`` maps canonical configs to probabilities summing to 1 (within
    1e-12); ``alpha_hat`` is the absorption-rate estimate when the method
    provides one.  ``support_truncated`` marks serialized copies whose tail
    was folded into an "other" bucket; in-memory estimates are never
    truncated.
    """

    pmf: dict
    support_truncated: bool
    n_effective: float
    alpha_hat: float | None
    method: str
    alpha_stderr: float | None = None
    records: dict | None = dc_field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.n_effective < 1:
            raise UsageError("n_effective must be >= 1")
        if any(p < 0 for p in self.pmf.values()):
            raise UsageError("pmf has negative entries")
        total = math.fsum(self.pmf[k] for k in sorted(self.pmf))
        if abs(total - 1.0) > PMF_SUM_TOL:
            raise UsageError(f"pmf sums to {total!r}, not 1")

    def sampler_table(self):
        """(states, cumulative probabilities) for inverse-CDF sampling."""
        states = sorted(self.pmf)
        cum = []
        acc = 0.0
        for s in states:
            acc += self.pmf[s]
            cum.append(acc)
        cum[-1] = 1.0
        return states, cum


@dataclass
class SurvivalCurve:
    times: list
    survival_prob: list
    stderr: list
    n_replicas: int
    records: dict | None = dc_field(default=None, repr=False, compare=False)


@dataclass
class AlphaEstimate:
    alpha: float
    stderr: float
    ci95: tuple
    n_points: int
    fit_times: list
    residual_signs: list = dc_field(repr=False, default_factory=list)


@dataclass
class TvResult:
    tv: float
    ci95: tuple
    n_effective_a: float
    n_effective_b: float


@dataclass
class GapResult:
    gap: float
    ci95: tuple
    p_diam_below: float
    n_survivors: int


def normalize_counts(counts, total=None):
    """Counts to pmf in sorted-key order; uses fsum to keep the 1e-12 budget."""
    keys = sorted(counts)
    if total is None:
        total = math.fsum(counts[k] for k in keys)
    pmf = {k: counts[k] / total for k in keys}
    s = math.fsum(pmf[k] for k in keys)
    if abs(s - 1.0) > PMF_SUM_TOL:
        pmf = {k: v / s for k, v in pmf.items()}
    return pmf


# --- conditioned law at a fixed time -----------------------------------------


def _yaglom_worker(start, stop, payload):
    seed, zeta0, lam, t, want_records = payload
    counts = {}
    records = {}
    for i in range(start, stop):
        sub = derive(seed, TAG_TRAJ, i)
        final, tau = jump_tau(zeta0, lam, t, sub)
        key = canonicalize(final) if final else ()
        counts[key] = counts.get(key, 0) + 1
        if want_records:
            records[i] = (sub, tau, key)
    agg = parallel.empty_aggregate(("yaglom", zeta0, lam, t, seed))
    agg["counts"]["final"] = counts
    agg["records"] = records
    return agg


def yaglom_estimate(zeta0, lam, t, n_replicas, seed, workers=1,
                    keep_records=False):
    """Empirical law of the state at time t conditioned on survival.

    Simulates ``n_replicas`` independent trajectories from ``zeta0``,
    discards those absorbed by t, and returns the canonical-state pmf among
    survivors; raises DegenerateSampleError when nothing survives.  The
    survivor count is the effective sample size, so runs become expensive
    as t grows (the conditioning costs a factor e^(alpha t)).
    """
    cfg = as_config(zeta0)
    if not cfg:
        raise UsageError("zeta0 must be a non-empty configuration")
    if t <= 0:
        raise UsageError("t must be positive")
    if n_replicas < 1:
        raise UsageError("need at least one replica")
    payload = (seed, canonicalize(cfg), lam, float(t), keep_records)
    agg = parallel.run_replicas(_yaglom_worker, n_replicas, workers, payload)
    counts = dict(agg["counts"]["final"])
    absorbed = counts.pop((), 0)
    survivors = n_replicas - absorbed
    if survivors == 0:
        raise DegenerateSampleError(
            f"all {n_replicas} replicas absorbed by t={t}", survival_estimate=0.0
        )
    return QsdEstimate(
        pmf=normalize_counts(counts, total=float(survivors)),
        support_truncated=False,
        n_effective=survivors,
        alpha_hat=None,
        method="yaglom",
        records=agg["records"] if keep_records else None,
    )


def yaglom_counts(zeta0, lam, t, n_replicas, seed, workers=1):
    """Raw survivor state counts (plus absorbed count under key ())."""
    cfg = as_config(zeta0)
    if not cfg:
        raise UsageError("zeta0 must be a non-empty configuration")
    payload = (seed, canonicalize(cfg), lam, float(t), False)
    agg = parallel.run_replicas(_yaglom_worker, n_replicas, workers, payload)
    return dict(agg["counts"]["final"])


# --- survival curves ----------------------------------------------------------


def _survival_worker(start, stop, payload):
    seed, fixed_eta0, table, lam, grid, want_records = payload
    alive = [0] * len(grid)
    records = {}
    horizon = grid[-1]
    for i in range(start, stop):
        if table is None:
            eta0 = fixed_eta0
        else:
            states, cum = table
            u = Stream(derive(seed, TAG_INIT, i)).next_double()
            eta0 = states[bisect.bisect_left(cum, u)]
        sub = derive(seed, TAG_TRAJ, i)
        final, tau = jump_tau(eta0, lam, horizon, sub)
        for j, g in enumerate(grid):
            if tau is None or tau > g:
                alive[j] += 1
        if want_records:
            records[i] = (sub, tau, tuple(canonicalize(final)) if final else ())
    agg = parallel.empty_aggregate(("survival", fixed_eta0, lam, tuple(grid), seed))
    agg["counts"]["alive"] = {j: c for j, c in enumerate(alive) if c}
    agg["records"] = records
    return agg


def survival_curve(zeta0_sampler, lam, time_grid, n_replicas, seed, workers=1,
                   keep_records=False):
    """Empirical survival probabilities over a time grid.

    ``zeta0_sampler`` is a fixed configuration, or a QsdEstimate whose pmf
    supplies the random initial state of each replica (inverse-CDF over the
    substream keyed to the replica index).
    """
    time_grid = [float(g) for g in time_grid]
    if not time_grid or any(g <= 0 for g in time_grid):
        raise UsageError("time grid must be positive")
    if any(b <= a for a, b in zip(time_grid, time_grid[1:])):
        raise UsageError("time grid must be strictly increasing")
    if isinstance(zeta0_sampler, QsdEstimate):
        table = zeta0_sampler.sampler_table()
        fixed = None
    else:
        table = None
        fixed = canonicalize(as_config(zeta0_sampler))
        if not fixed:
            raise UsageError("initial configuration must be non-empty")
    payload = (seed, fixed, table, lam, time_grid, keep_records)
    agg = parallel.run_replicas(_survival_worker, n_replicas, workers, payload)
    alive = agg["counts"].get("alive", {})
    probs = [alive.get(j, 0) / n_replicas for j in range(len(time_grid))]
    errs = [binomial_stderr(p, n_replicas) for p in probs]
    return SurvivalCurve(
        time_grid, probs, errs, n_replicas,
        records=agg["records"] if keep_records else None,
    )


def estimate_alpha(curve, max_survival=0.5):
    """Absorption rate from the exponential tail of a survival curve.

    Fits a weighted least-squares line to log survival over the grid points
    with 0 < survival <= ``max_survival`` (early points are contaminated by
    the initial condition); if fewer than 3 points qualify, the fit widens
    to every positive point and fails only when those are still < 3.
    """
    usable = [
        (t, p, e)
        for t, p, e in zip(curve.times, curve.survival_prob, curve.stderr)
        if p > 0
    ]
    window = [(t, p, e) for t, p, e in usable if p <= max_survival]
    if len(window) < 3:
        window = usable
    if len(window) < 3:
        raise InsufficientDataError(
            f"only {len(window)} usable survival points, need 3"
        )
    times = [t for t, _, _ in window]
    slope, slope_se, signs = fit_log_slope(
        times, [p for _, p, _ in window], [e for _, _, e in window]
    )
    alpha = -slope
    return AlphaEstimate(
        alpha=alpha,
        stderr=slope_se,
        ci95=(alpha - 1.96 * slope_se, alpha + 1.96 * slope_se),
        n_points=len(window),
        fit_times=times,
        residual_signs=signs,
    )


# --- uniqueness evidence ------------------------------------------------------


def _bootstrap_tv(counts_a, counts_b, n_rounds, seed):
    keys = sorted(set(counts_a) | set(counts_b))
    ca = np.array([counts_a.get(k, 0) for k in keys], dtype=float)
    cb = np.array([counts_b.get(k, 0) for k in keys], dtype=float)
    na, nb = int(ca.sum()), int(cb.sum())
    rng = np.random.default_rng(derive(seed, TAG_BOOT))
    tvs = np.empty(n_rounds)
    for r in range(n_rounds):
        ra = rng.multinomial(na, ca / na)
        rb = rng.multinomial(nb, cb / nb)
        tvs[r] = 0.5 * np.abs(ra / na - rb / nb).sum()
    lo, hi = np.percentile(tvs, [2.5, 97.5])
    return float(lo), float(hi)


def conditioned_insensitivity(zeta0_a, zeta0_b, lam, t, n_replicas, seed,
                              workers=1, bootstrap_rounds=200):
    """TV distance between the conditioned laws from two initial states.

    Uniqueness of the quasi-stationary law predicts this to vanish as t
    grows, for any pair of starting configurations.  The point estimate is
    the TV distance of the two survivor pmfs; the CI is a percentile
    bootstrap over multinomial resamples of both survivor samples.
    """
    counts_a = yaglom_counts(
        zeta0_a, lam, t, n_replicas, derive(seed, TAG_PAIR, 0), workers
    )
    counts_b = yaglom_counts(
        zeta0_b, lam, t, n_replicas, derive(seed, TAG_PAIR, 1), workers
    )
    dead_a = counts_a.pop((), 0)
    dead_b = counts_b.pop((), 0)
    n_a, n_b = n_replicas - dead_a, n_replicas - dead_b
    if n_a == 0 or n_b == 0:
        raise DegenerateSampleError(
            "a survivor sample is empty", survival_estimate=0.0
        )
    tv = total_variation(
        normalize_counts(counts_a, float(n_a)),
        normalize_counts(counts_b, float(n_b)),
    )
    lo, hi = _bootstrap_tv(counts_a, counts_b, bootstrap_rounds, seed)
    return TvResult(tv=tv, ci95=(lo, hi), n_effective_a=n_a, n_effective_b=n_b)


# --- diameter factorization ---------------------------------------------------


def diam_factorization_gap(zeta0, lam, t, radius, n_replicas, seed, reference,
                           workers=1, bootstrap_rounds=200):
    """Gap between the conditioned law and its diameter-factorized form.

    For the reference law nu and the empirical conditioned law p at time t,
    computes max over observed states of
    |p(state) - nu(state) * P(diam < radius | survival)| with a percentile
    bootstrap CI.  The factorization theorem predicts the gap to vanish as
    t grows, uniformly over the initial configuration.
    """
    from .lattice import diameter

    counts = yaglom_counts(zeta0, lam, t, n_replicas, seed, workers)
    counts.pop((), 0)
    if not counts:
        raise DegenerateSampleError("no survivors", survival_estimate=0.0)
    keys = sorted(counts)
    n_surv = sum(counts.values())
    ref = reference.pmf if isinstance(reference, QsdEstimate) else dict(reference)
    below = np.array([1.0 if diameter(k) < radius else 0.0 for k in keys])
    nu = np.array([ref.get(k, 0.0) for k in keys])
    cvec = np.array([counts[k] for k in keys], dtype=float)

    def gap_of(sample_counts):
        n = sample_counts.sum()
        p = sample_counts / n
        p_below = float((sample_counts * below).sum() / n)
        return float(np.max(np.abs(p - nu * p_below))), p_below

    gap, p_below = gap_of(cvec)
    rng = np.random.default_rng(derive(seed, TAG_BOOT))
    gaps = np.empty(bootstrap_rounds)
    for r in range(bootstrap_rounds):
        gaps[r] = gap_of(rng.multinomial(n_surv, cvec / n_surv).astype(float))[0]
    lo, hi = np.percentile(gaps, [2.5, 97.5])
    return GapResult(
        gap=gap, ci95=(float(lo), float(hi)), p_diam_below=p_below,
        n_survivors=n_surv,
    )
