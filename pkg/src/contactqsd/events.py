"""Reproducible graphical event fields and open-path evolution.

An :class:`EventField` is the realized randomness of one simulation run: a
rate-1 Poisson clock of recovery marks per site and a rate-lambda clock of
infection arrows per ordered nearest-neighbor pair, on a finite time horizon
but over the whole (unbounded) lattice.  Event times are derived lazily per
(clock, unit time block) from the field seed, so no spatial window is ever
imposed and query order is irrelevant.

``evolve`` reads the infected set at a later time off the field as the set
of sites reachable by open paths (arrows forward, no recovery mark on any
vertical stretch); ``reaches`` answers single path queries with an
independent search over path segments.  Ties between simultaneous events
are broken recovery-first, then by lexicographic clock key; with
almost-surely distinct Poisson times this never matters, but a fixed rule
keeps every run deterministic.
"""

import heapq
import threading
from dataclasses import dataclass, field as dc_field

from . import _kernels_py, backend
from .errors import UsageError
from .lattice import as_config


@dataclass(frozen=True)
class SpaceTimePoint:
    site: tuple
    time: float


@dataclass
class EventField:
    """Lazily materialized Poisson marks for one run.

    ``materialized`` caches per-(clock, block) event tuples so repeated
    queries and pure-backend evolutions share work; it is protected by a
    lock so concurrent readers always observe the same lists.  Compiled
    evolutions re-derive blocks on the fly instead -- block contents are a
    pure function of the seed, so the results agree exactly.
    """

    master_seed: int
    lam: float
    horizon: float
    dimension: int
    materialized: dict = dc_field(default_factory=dict, repr=False)
    explicit: bool = False
    _lock: threading.Lock = dc_field(
        default_factory=threading.Lock, repr=False, compare=False
    )

    def __post_init__(self):
        if self.lam < 0:
            raise UsageError("infection rate must be non-negative")
        if self.horizon <= 0:
            raise UsageError("horizon must be positive")
        if self.dimension < 1:
            raise UsageError("dimension must be >= 1")

    # -- raw event access ----------------------------------------------------

    def _check_interval(self, a, b):
        if not (0 <= a <= b <= self.horizon):
            raise UsageError(
                f"interval [{a}, {b}] outside field horizon [0, {self.horizon}]"
            )

    def _blocks(self, kind, key, k):
        cache_key = (kind,) + key + (k,)
        if self.explicit:
            return self.materialized.get(cache_key, ())
        with self._lock:
            got = self.materialized.get(cache_key)
            if got is None:
                if kind == _kernels_py._REC:
                    got = tuple(_kernels_py.recovery_block(self.master_seed, key[0], k))
                else:
                    got = tuple(
                        _kernels_py.arrow_block(
                            self.master_seed, self.lam, key[0], key[1], k
                        )
                    )
                self.materialized[cache_key] = got
            return got

    def recovery_events(self, site, a, b):
        """Recovery mark times at ``site`` in [a, b], sorted."""
        self._check_interval(a, b)
        self._check_site(site)
        return self._collect(_kernels_py._REC, (tuple(site),), a, b)

    def arrow_events(self, src, dst, a, b):
        """Arrow times on the directed edge src->dst in [a, b], sorted."""
        self._check_interval(a, b)
        self._check_site(src)
        self._check_site(dst)
        if sum(abs(x - y) for x, y in zip(src, dst)) != 1:
            raise UsageError(f"{src}->{dst} is not a nearest-neighbor edge")
        return self._collect(_kernels_py._ARR, (tuple(src), tuple(dst)), a, b)

    def events_for(self, key, interval):
        """Spec-level accessor: key is a site, or an (src, dst) edge pair."""
        a, b = interval
        if key and isinstance(key[0], tuple):
            return self.arrow_events(key[0], key[1], a, b)
        return self.recovery_events(tuple(key), a, b)

    def _check_site(self, site):
        if len(site) != self.dimension:
            raise UsageError(
                f"site {site} has dimension {len(site)}, field is {self.dimension}-d"
            )

    def _collect(self, kind, key, a, b):
        out = []
        k = max(int(a), 0)
        while k <= b:
            for e in self._blocks(kind, key, k):
                if a <= e <= b:
                    out.append(e)
            k += 1
        return out


def make_field(master_seed, lam, horizon, dimension):
    return EventField(master_seed, lam, horizon, dimension)


def explicit_field(recoveries, arrows, horizon, dimension):
    """Build a field with hand-placed events instead of Poisson clocks.

    ``recoveries`` maps sites to recovery times, ``arrows`` maps (src, dst)
    edges to arrow times.  All clocks not listed are silent.  Used by tests
    to pin exact path scenarios, and by the field-editing hook below.
    """
    materialized = {}

    def insert(kind, key, times):
        for e in sorted(times):
            if not 0 <= e <= horizon:
                raise UsageError(f"event time {e} outside [0, {horizon}]")
            cache_key = (kind,) + key + (int(e),)
            materialized.setdefault(cache_key, [])
            materialized[cache_key] = tuple(list(materialized[cache_key]) + [e])

    for site, times in recoveries.items():
        insert(_kernels_py._REC, (tuple(site),), times)
    for (src, dst), times in arrows.items():
        insert(_kernels_py._ARR, (tuple(src), tuple(dst)), times)
    lam = 1.0 if arrows else 0.0
    return EventField(0, lam, horizon, dimension, materialized=materialized,
                      explicit=True)


def freeze_window(field, sites, a, b):
    """Materialize a field's events over given sites into an explicit field.

    Captures recovery clocks of ``sites`` and arrow clocks between any
    ordered pair of them over [a, b]; everything else is silent.  The
    editing hook for "what if this mark were absent" experiments.
    """
    sites = [tuple(s) for s in sites]
    site_set = set(sites)
    recov = {s: field.recovery_events(s, a, b) for s in sites}
    arrows = {}
    for s in sites:
        for y in _kernels_py._neighbors(s):
            if y in site_set:
                arrows[(s, y)] = field.arrow_events(s, y, a, b)
    return explicit_field(recov, arrows, field.horizon, field.dimension)


def without_arrow(field, src, dst, time):
    """Copy an explicit field minus one specific arrow event."""
    if not field.explicit:
        raise UsageError("without_arrow needs an explicit field; freeze first")
    materialized = dict(field.materialized)
    key = (_kernels_py._ARR, tuple(src), tuple(dst), int(time))
    times = [e for e in materialized.get(key, ()) if e != time]
    materialized[key] = tuple(times)
    return EventField(0, field.lam, field.horizon, field.dimension,
                      materialized=materialized, explicit=True)


def evolve(field, sites, s, t):
    """Set of sites at time t reachable by open paths from ``sites`` at s.

    Event-driven over the currently infected set and its neighbors; exact on
    the unbounded lattice because only armed clocks can fire.  Additive and
    monotone in ``sites`` by construction of the shared field.
    """
    snaps, _tau = evolve_snapshots(field, sites, s, [t])
    return snaps[0]


def evolve_snapshots(field, sites, s, times):
    """Evolve once, reading the state at several increasing times.

    Returns (list of configurations, absorption time or None).  Equivalent
    to repeated ``evolve`` calls by the semigroup property, in one pass.
    """
    times = list(times)
    if not times:
        raise UsageError("need at least one snapshot time")
    if any(t2 < t1 for t1, t2 in zip(times, times[1:])):
        raise UsageError("snapshot times must be non-decreasing")
    if not (0 <= s <= times[0]) or times[-1] > field.horizon:
        raise UsageError("evolution window must satisfy 0 <= s <= times <= horizon")
    sites = as_config(sites)
    if not sites:
        return [()] * len(times), s
    if len(sites[0]) != field.dimension:
        raise UsageError("configuration dimension does not match field")
    if field.explicit:
        return _kernels_py.evolve_snapshots(
            0, field.lam, sites, s, times, block_provider=field._blocks
        )
    cache = field.materialized if backend.backend_name() == "pure" or field.dimension > 1 else None
    return backend.evolve_snapshots(
        field.master_seed, field.lam, field.dimension, sites, s, times,
        block_cache=cache,
    )


def reaches(field, src, dst):
    """True iff an open path runs from space-time point src to dst.

    Independent of ``evolve``: searches over path segments, where a segment
    is a stay at one site from an entry time until the next recovery mark,
    and arrows inside that stay extend the path.  Zero-duration stays are
    allowed (an arrow may fire at the entry time itself), matching the
    evolution's tie rule that a recovery at the arrow's source fires first.
    """
    if src.time > dst.time:
        raise UsageError("reaches requires src.time <= dst.time")
    field._check_site(src.site)
    field._check_site(dst.site)
    a, b = src.time, dst.time
    field._check_interval(a, b)

    src_site = tuple(src.site)
    dst_site = tuple(dst.site)
    if src_site == dst_site and a == b:
        return True

    def first_recovery_after(x, t0):
        for e in field.recovery_events(x, t0, b):
            if e > t0:
                return e
        return None

    seen = set()
    frontier = [(a, src_site)]
    while frontier:
        t0, x = heapq.heappop(frontier)
        if (t0, x) in seen:
            continue
        seen.add((t0, x))
        r = first_recovery_after(x, t0)  # None if no mark on (t0, b]
        if x == dst_site and r is None:
            return True
        if field.lam <= 0:
            continue
        alive_until = b if r is None else r
        for y in _kernels_py._neighbors(x):
            for e in field.arrow_events(x, y, t0, alive_until):
                # stay is (t0, e]; a recovery exactly at e kills the source
                # before the jump, so usable arrows need e < r strictly
                if (r is None or e < r) and (e, y) not in seen:
                    heapq.heappush(frontier, (e, y))
    return False
