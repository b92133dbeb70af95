"""Detectors for space-time path structures on a graphical field.

These quantify how information flows through the event field:

* jump chains -- the longest sequence of arrows usable by a path that
  ignores recovery marks; bounded jump counts confine a path to a box.
* good points -- space-time points whose every such path stays under a
  jump budget floor(beta * t) over a window of length t.
* cut points / break points -- times at which the descendant set of the
  first surviving seed site collapses to a single site that is also
  isolated from everything else alive, the regeneration device behind the
  diameter-factorization limit.

Break points quantify over paths from the whole lattice at time zero; the
detector restricts to a window of radius 2R + budget + margin around the
seed, which is exact unless some path makes more than budget + margin
jumps (excluded on the good-point event).  Scans report that stance in
their metadata.
"""

import math
from dataclasses import dataclass

from . import parallel
from .errors import UsageError
from .events import SpaceTimePoint, evolve, evolve_snapshots, make_field
from .lattice import as_config, box_sites, chebyshev
from .rng import TAG_FIELD, derive


@dataclass(frozen=True)
class GoodPointQuery:
    point: SpaceTimePoint
    beta: float
    t_horizon: float

    def __post_init__(self):
        if self.beta <= 0 or self.t_horizon <= 0:
            raise UsageError("beta and t_horizon must be positive")
        if self.budget < 1:
            raise UsageError("jump budget floor(beta * t) must be >= 1")

    @property
    def budget(self):
        return int(math.floor(self.beta * self.t_horizon))


@dataclass
class CutBreakResult:
    """First cut break point of the first surviving seed site.

    ``X`` is the lex-least initially infected site whose descendants are
    alive at the query horizon (None if the whole process died).  ``(Y, S)``
    is the earliest integer time S and site Y at which X's descendant set is
    exactly {Y} with nothing else alive within distance 2R; S is None when
    no such point exists by the horizon or the process died.
    """

    X: tuple | None
    Y: tuple | None
    S: int | None


def max_jump_chain(field, start, window, budget):
    """Longest chain of arrows usable from ``start`` within the window, capped.

    Arrows are sorted by time; arrow b extends a chain ending at arrow a
    when a's target is b's source and a fires strictly earlier.  The first
    arrow must leave the start site (a path may wait there first).  Only the
    sup-norm ball of radius ``budget`` around the start can matter: a chain
    of k jumps never leaves the radius-k ball.
    """
    s0, s1 = window
    field._check_interval(s0, s1)
    if budget < 1:
        return 0
    start_site = tuple(start.site)
    arrows = []
    for u in box_sites(start_site, budget):
        for axis in range(len(u)):
            for delta in (1, -1):
                v = tuple(
                    c + delta if i == axis else c for i, c in enumerate(u)
                )
                for e in field.arrow_events(u, v, s0, s1):
                    arrows.append((e, u, v))
    arrows.sort()
    best = {start_site: 0}
    longest = 0
    i = 0
    n = len(arrows)
    while i < n:
        j = i
        while j < n and arrows[j][0] == arrows[i][0]:
            j += 1
        updates = {}
        for e, u, v in arrows[i:j]:
            if u in best:
                cand = best[u] + 1
                if cand > updates.get(v, -1):
                    updates[v] = cand
        for v, cand in updates.items():
            if cand > best.get(v, -1):
                best[v] = cand
                if cand > longest:
                    longest = cand
                    if longest >= budget:
                        return budget
        i = j
    return longest


def is_good_point(field, query):
    """True iff every jump chain from the point stays under the budget."""
    p = query.point
    window = (p.time, p.time + query.t_horizon)
    return max_jump_chain(field, p, window, query.budget) < query.budget


def region_good(field, sites, s, beta, t_horizon):
    """Conjunction of is_good_point over all sites at one time (vacuously true)."""
    return all(
        is_good_point(
            field, GoodPointQuery(SpaceTimePoint(tuple(z), s), beta, t_horizon)
        )
        for z in sites
    )


def find_cut_break(field, eta0, t, radius, beta=8.0, window_margin=None):
    """Locate the first cut break point for the first surviving seed site.

    Scans integer times s = 1..floor(t).  A candidate (z, s) must carry the
    whole descendant set of X ({z} exactly) and be alone within sup-norm
    distance floor(2 * radius): nothing else reachable from the time-zero
    window may live there.  The window has radius floor(2 * radius) +
    budget + margin around X, margin defaulting to the jump budget
    floor(beta * t).
    """
    if t < 1:
        raise UsageError("t must be >= 1")
    if radius < 1:
        raise UsageError("radius must be >= 1")
    eta0 = as_config(eta0)
    if not eta0:
        raise UsageError("initial configuration must be non-empty")
    budget = int(math.floor(beta * t))
    if window_margin is None:
        window_margin = budget
    if window_margin < 0:
        raise UsageError(
            "window too small: margin must be >= 0 so the window covers "
            "2R plus the jump budget"
        )
    if field.horizon < t:
        raise UsageError("field horizon is shorter than the scan time")

    eta_t = evolve(field, eta0, 0.0, t)
    if not eta_t:
        return CutBreakResult(X=None, Y=None, S=None)

    if len(eta0) == 1:
        x_seed = eta0[0]
    else:
        x_seed = None
        for x in eta0:
            if evolve(field, (x,), 0.0, t):
                x_seed = x
                break

    r2 = int(math.floor(2 * radius))
    window = box_sites(x_seed, r2 + budget + window_margin)
    int_times = [float(s) for s in range(1, int(math.floor(t)) + 1)]
    cx_snaps, _ = evolve_snapshots(field, (x_seed,), 0.0, int_times)
    win_snaps, _ = evolve_snapshots(field, window, 0.0, int_times)

    for s, cx, win in zip(int_times, cx_snaps, win_snaps):
        if len(cx) != 1:
            continue
        z = cx[0]
        if all(w == z or chebyshev(w, z) > r2 for w in win):
            return CutBreakResult(X=x_seed, Y=z, S=int(s))
    return CutBreakResult(X=x_seed, Y=None, S=None)


# --- replica-level scans ------------------------------------------------------


def _scan_worker(start, stop, payload):
    (seed, eta0, lam, t, radius, beta, margin, d, want_flags) = payload
    horizon = 2.0 * t if want_flags else float(t)
    n_survived = 0
    n_early = 0
    records = {}
    r2 = int(math.floor(2 * radius))
    for i in range(start, stop):
        fseed = derive(seed, TAG_FIELD, i)
        field = make_field(fseed, lam, horizon, d)
        res = find_cut_break(field, eta0, t, radius, beta=beta,
                             window_margin=margin)
        survived = res.X is not None
        row = {
            "seed": fseed,
            "survived": survived,
            "X": res.X,
            "Y": res.Y,
            "S": res.S,
        }
        if survived:
            n_survived += 1
            if res.S is not None and res.S <= t / 2:
                n_early += 1
        if want_flags and res.S is not None:
            q = GoodPointQuery(SpaceTimePoint(res.Y, float(res.S)), beta, float(t))
            g = is_good_point(field, q)
            shell = [
                z for z in box_sites(res.Y, r2) if chebyshev(z, res.Y) == r2
            ]
            g_hat = region_good(field, shell, float(res.S), beta, float(t))
            row["good"] = g
            row["shell_good"] = g_hat
            row["both_good"] = g and g_hat
        records[i] = row
    agg = parallel.empty_aggregate(
        ("structures", eta0, lam, t, radius, beta, margin, seed)
    )
    agg["counts"]["survived"] = {0: n_survived}
    agg["counts"]["early_cut_break"] = {0: n_early}
    agg["records"] = records
    return agg


def scan_cut_breaks(eta0, lam, t, radius, n_replicas, seed, beta=8.0,
                    window_margin=None, workers=1, want_flags=False,
                    keep_records=False):
    """Estimate P(S <= t/2 | survival) over independent fields.

    Returns a dict with survivor counts, the early-cut-break count, the
    conditional frequency, and (optionally) per-replica records including
    good-point flags at (Y, S).
    """
    eta0 = as_config(eta0)
    if not eta0:
        raise UsageError("initial configuration must be non-empty")
    d = len(eta0[0])
    payload = (seed, eta0, lam, float(t), float(radius), float(beta),
               window_margin, d, want_flags)
    agg = parallel.run_replicas(_scan_worker, n_replicas, workers, payload)
    survived = agg["counts"]["survived"].get(0, 0)
    early = agg["counts"]["early_cut_break"].get(0, 0)
    out = {
        "n_replicas": n_replicas,
        "n_survived": survived,
        "n_early_cut_break": early,
        "p_early_given_survival": (early / survived) if survived else None,
        "window_stance": "break points checked against the forward set of "
        "a finite time-zero window; paths ignored by it exceed the jump "
        "budget plus margin",
    }
    if keep_records or want_flags:
        out["records"] = [agg["records"][i] for i in sorted(agg["records"])]
    return out
