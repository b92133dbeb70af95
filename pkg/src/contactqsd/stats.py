"""Statistical helpers: distances, tests and fits used by the estimators."""

import math

import numpy as np
from scipy import stats as spstats

from .errors import InsufficientDataError


def total_variation(p, q):
    """TV distance between two pmfs given as dicts; missing mass is 0."""
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def counts_to_pmf(counts):
    """Normalize a count map into a pmf dict, summing in sorted-key order."""
    total = sum(counts[k] for k in sorted(counts))
    return {k: counts[k] / total for k in sorted(counts)}


def two_sample_chisquare(counts_a, counts_b, top_k=20):
    """Homogeneity chi-square over the top_k pooled categories plus a rest bucket.

    Returns (statistic, p_value, dof).  Categories are ranked by pooled
    count with lexicographic tie-breaking so the binning is deterministic.
    """
    pooled = {}
    for k, v in counts_a.items():
        pooled[k] = pooled.get(k, 0) + v
    for k, v in counts_b.items():
        pooled[k] = pooled.get(k, 0) + v
    ranked = sorted(pooled, key=lambda k: (-pooled[k], k))
    keep = ranked[:top_k]
    rest = ranked[top_k:]
    row_a = [counts_a.get(k, 0) for k in keep]
    row_b = [counts_b.get(k, 0) for k in keep]
    if rest:
        row_a.append(sum(counts_a.get(k, 0) for k in rest))
        row_b.append(sum(counts_b.get(k, 0) for k in rest))
    table = np.array([row_a, row_b], dtype=float)
    # drop all-zero columns (possible when one sample is tiny)
    table = table[:, table.sum(axis=0) > 0]
    stat, p, dof, _ = spstats.chi2_contingency(table, correction=False)
    return float(stat), float(p), int(dof)


def runs_test_pvalue(signs):
    """Wald-Wolfowitz runs test on a sign sequence; two-sided p-value.

    Zeros are dropped.  Returns 1.0 when one sign is (nearly) absent, since
    then the test has no power rather than evidence of trend.
    """
    seq = [s for s in signs if s != 0]
    n1 = sum(1 for s in seq if s > 0)
    n2 = sum(1 for s in seq if s < 0)
    if n1 < 1 or n2 < 1:
        return 1.0
    runs = 1 + sum(1 for a, b in zip(seq, seq[1:]) if (a > 0) != (b > 0))
    n = n1 + n2
    mean = 1.0 + 2.0 * n1 * n2 / n
    var = 2.0 * n1 * n2 * (2.0 * n1 * n2 - n) / (n * n * (n - 1.0))
    if var <= 0:
        return 1.0
    z = (runs - mean) / math.sqrt(var)
    return float(2.0 * spstats.norm.sf(abs(z)))


def one_sided_greater_pvalue(x_hi, n_hi, x_lo, n_lo):
    """p-value for H1: success probability in 'hi' exceeds that in 'lo'.

    Pooled two-proportion z-test; small-sample edge cases fall back to 1.0.
    """
    if n_hi == 0 or n_lo == 0:
        return 1.0
    p_hi, p_lo = x_hi / n_hi, x_lo / n_lo
    pool = (x_hi + x_lo) / (n_hi + n_lo)
    var = pool * (1 - pool) * (1 / n_hi + 1 / n_lo)
    if var <= 0:
        return 0.0 if p_hi > p_lo else 1.0
    z = (p_hi - p_lo) / math.sqrt(var)
    return float(spstats.norm.sf(z))


def fit_log_slope(times, values, stderrs):
    """Weighted least-squares slope of log(values) against times.

    Weights are the delta-method variances of log(value); an all-zero
    stderr vector (noiseless input) falls back to an unweighted fit.
    Returns (slope, slope_stderr, residual_signs).
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    se = np.asarray(stderrs, dtype=float)
    if len(t) < 3:
        raise InsufficientDataError("need at least 3 points for a slope fit")
    logy = np.log(y)
    if np.all(se == 0):
        w = np.ones_like(t)
    else:
        var = np.where(se > 0, (se / y) ** 2, np.nan)
        floor = np.nanmin(var)
        var = np.where(np.isnan(var), floor, var)
        w = 1.0 / var
    sw = w.sum()
    tbar = (w * t).sum() / sw
    ybar = (w * logy).sum() / sw
    stt = (w * (t - tbar) ** 2).sum()
    slope = (w * (t - tbar) * (logy - ybar)).sum() / stt
    intercept = ybar - slope * tbar
    resid = logy - (intercept + slope * t)
    if np.all(se == 0):
        dof = max(len(t) - 2, 1)
        sigma2 = (resid**2).sum() / dof
        slope_se = math.sqrt(max(sigma2, 0.0) / stt)
    else:
        slope_se = math.sqrt(1.0 / stt)
    signs = np.sign(resid).astype(int).tolist()
    return float(slope), float(slope_se), signs


def binomial_stderr(p, n):
    return math.sqrt(max(p * (1.0 - p), 0.0) / n) if n > 0 else 0.0
