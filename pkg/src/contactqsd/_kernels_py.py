"""Pure-Python simulation kernels (reference backend).

These are the slow but dimension-generic twins of the compiled kernels in
``_kernels.pyx``.  For d=1 both backends consume the derived random streams
in exactly the same order and do float arithmetic in exactly the same
sequence, so their outputs are bit-identical; the cross-backend tests assert
this.  Sites are plain int tuples here and int64 scalars in the compiled
kernel.

Three kernels:

* ``evolve_snapshots``   -- open-path evolution read off a graphical event
  field: recovery marks at rate 1 per site, infection arrows at rate lam per
  directed nearest-neighbor edge, all derived lazily per (clock, unit time
  block) from the field seed.
* ``jump_snapshots``     -- continuous-time jump-chain simulation with
  total-rate bookkeeping (each infected site contributes 1 + 2*d*lam, and
  arrows onto occupied sites are no-ops), optionally censoring infections
  that would push the diameter to ``censor_width`` or beyond.
* ``fv_run``             -- conditioned particle ensemble: N independent
  copies, an absorbed particle is immediately reinstated as a copy of a
  uniformly chosen survivor; returns time-averaged canonical-state occupancy
  over the sampling window.
"""

import heapq
from math import floor, log

from .rng import GOLDEN, MASK64, TAG_ARROW, TAG_SITE, derive, mix64


# --- Poisson block machinery ------------------------------------------------


def block_events(stream_seed, rate, k):
    """Event times of one unit-length block [k, k+1) of a Poisson clock.

    A pure function of (stream_seed, rate, k): exponential gaps from the
    block start until the block ends.  Distinct blocks of the same clock use
    distinct seeds, which is what makes materialization order irrelevant.
    """
    if rate <= 0.0:
        return []
    state = stream_seed & MASK64
    t = float(k)
    end = k + 1.0
    out = []
    while True:
        state = (state + GOLDEN) & MASK64
        u = ((mix64(state) >> 11) + 0.5) * 2.0 ** -53
        t += -log(u) / rate
        if t >= end:
            return out
        out.append(t)


def recovery_block(field_seed, site, k):
    return block_events(derive(field_seed, TAG_SITE, *site, k), 1.0, k)


def arrow_block(field_seed, lam, src, dst, k):
    return block_events(derive(field_seed, TAG_ARROW, *src, *dst, k), lam, k)


def _next_in_stream(blocks_of, a, b, include_a):
    """First event time e in the clock with a < e <= b (or a <= e <= b)."""
    k = int(floor(a))
    if k < 0:
        k = 0
    while k <= b:
        for e in blocks_of(k):
            if (e > a or (include_a and e == a)) and e <= b:
                return e
        k += 1
    return None


def _neighbors(site):
    out = []
    for axis in range(len(site)):
        for delta in (1, -1):
            out.append(
                tuple(c + delta if i == axis else c for i, c in enumerate(site))
            )
    return out


# --- graphical (open-path) evolution ----------------------------------------

_REC = 0
_ARR = 1


def evolve_snapshots(field_seed, lam, sites, s, times, block_cache=None,
                     block_provider=None):
    """Evolve the infected set A = ``sites`` from time s through ``times``.

    Returns (snapshots, tau): one sorted site tuple per requested time (all
    times >= s, increasing), and the absorption time if the set emptied (else
    None).  Events are processed in (time, recovery-before-arrow, lex key)
    order; a clock's events are re-derived per block, read through
    ``block_cache`` (a dict) when supplied so repeated evolutions of one
    field share materialization, or taken verbatim from ``block_provider``
    (kind, key, block) -> times, which serves explicitly constructed fields.
    """
    times = list(times)
    end = times[-1]
    infected = set(sites)

    if block_provider is not None:
        rec_blocks = lambda x: (lambda k: block_provider(_REC, (x,), k))
        arr_blocks = lambda x, y: (lambda k: block_provider(_ARR, (x, y), k))
    elif block_cache is None:
        rec_blocks = lambda x: (lambda k: recovery_block(field_seed, x, k))
        arr_blocks = lambda x, y: (lambda k: arrow_block(field_seed, lam, x, y, k))
    else:
        def rec_blocks(x):
            def get(k):
                key = (_REC, x, k)
                got = block_cache.get(key)
                if got is None:
                    got = block_cache[key] = tuple(recovery_block(field_seed, x, k))
                return got
            return get

        def arr_blocks(x, y):
            def get(k):
                key = (_ARR, x, y, k)
                got = block_cache.get(key)
                if got is None:
                    got = block_cache[key] = tuple(
                        arrow_block(field_seed, lam, x, y, k)
                    )
                return got
            return get

    version = {}
    heap = []

    def arm_site(x, t0, include_arrows_at_t0):
        ver = version.get(x, 0) + 1
        version[x] = ver
        e = _next_in_stream(rec_blocks(x), t0, end, False)
        if e is not None:
            heapq.heappush(heap, (e, _REC, x, x, ver))
        if lam > 0.0 or block_provider is not None:
            for y in _neighbors(x):
                e = _next_in_stream(arr_blocks(x, y), t0, end, include_arrows_at_t0)
                if e is not None:
                    heapq.heappush(heap, (e, _ARR, x, y, ver))

    for x in sorted(infected):
        # initial vertical segments are (s, .], so a recovery exactly at s
        # does not kill, while an arrow exactly at s may fire
        arm_site(x, s, True)

    snapshots = []
    idx = 0
    n_times = len(times)
    tau = None

    def flush(upto_exclusive):
        nonlocal idx
        while idx < n_times and times[idx] < upto_exclusive:
            snapshots.append(tuple(sorted(infected)))
            idx += 1

    while heap:
        e, kind, x, y, ver = heapq.heappop(heap)
        if version.get(x) != ver or x not in infected:
            continue
        flush(e)
        if idx >= n_times:
            break
        if kind == _REC:
            infected.discard(x)
            version[x] = version.get(x, 0) + 1
            if not infected:
                tau = e
                break
        else:
            nxt = _next_in_stream(arr_blocks(x, y), e, end, False)
            if nxt is not None:
                heapq.heappush(heap, (nxt, _ARR, x, y, ver))
            if y not in infected:
                infected.add(y)
                arm_site(y, e, True)

    while idx < n_times:
        snapshots.append(tuple(sorted(infected)))
        idx += 1
    return snapshots, tau


# --- jump-chain simulation ---------------------------------------------------


def _pick_action(u, lam, d):
    """Map one uniform onto {recover} + 2d directed infection slots."""
    site_rate = 1.0 + 2.0 * d * lam
    r = u * site_rate
    if r < 1.0:
        return -1
    j = int((r - 1.0) / lam)
    if j > 2 * d - 1:
        j = 2 * d - 1
    return j


def jump_snapshots(seed, lam, sites, times, censor_width=0):
    """Jump-chain trajectory from time 0; snapshots at ``times``.

    Returns (snapshots, tau) like ``evolve_snapshots``.  With
    ``censor_width`` = W > 0, infections that would make the diameter reach
    W are suppressed as no-ops (the event still consumes time and
    randomness), which is the censored dynamics the truncated generator
    encodes.
    """
    times = list(times)
    end = times[-1]
    d = len(sites[0]) if sites else 1
    site_rate = 1.0 + 2.0 * d * lam
    config = sorted(sites)
    state = seed & MASK64

    snapshots = []
    idx = 0
    n_times = len(times)
    tau = None
    t = 0.0

    while True:
        n = len(config)
        state = (state + GOLDEN) & MASK64
        u = ((mix64(state) >> 11) + 0.5) * 2.0 ** -53
        t += -log(u) / (n * site_rate)
        while idx < n_times and times[idx] < t:
            snapshots.append(tuple(config))
            idx += 1
        if t > end or idx >= n_times:
            break
        state = (state + GOLDEN) & MASK64
        i = (mix64(state) * n) >> 64
        x = config[i]
        state = (state + GOLDEN) & MASK64
        u = ((mix64(state) >> 11) + 0.5) * 2.0 ** -53
        j = _pick_action(u, lam, d)
        if j < 0:
            config.pop(i)
            if not config:
                tau = t
                break
        else:
            axis, sign = j >> 1, 1 if (j & 1) == 0 else -1
            y = tuple(
                c + sign if a == axis else c for a, c in enumerate(x)
            )
            if y in config:
                continue
            if censor_width > 0 and _diam_with(config, y, d) >= censor_width:
                continue
            _sorted_insert(config, y)

    while idx < n_times:
        snapshots.append(tuple(config) if tau is None else ())
        idx += 1
    return snapshots, tau


def _sorted_insert(config, y):
    lo, hi = 0, len(config)
    while lo < hi:
        mid = (lo + hi) // 2
        if config[mid] < y:
            lo = mid + 1
        else:
            hi = mid
    config.insert(lo, y)


def _diam_with(config, y, d):
    diam = 0
    for a in range(d):
        lo = hi = y[a]
        for s in config:
            c = s[a]
            if c < lo:
                lo = c
            elif c > hi:
                hi = c
        if hi - lo > diam:
            diam = hi - lo
    return diam


# --- Fleming-Viot particle ensemble ------------------------------------------


def fv_run(seed, lam, n_particles, sites, t_burn, t_sample):
    """Conditioned ensemble of ``n_particles`` jump-chain copies.

    All particles start at ``sites``.  Each carries its own next-event time;
    the earliest particle fires one jump-chain step; on absorption it is
    reinstated as a copy of a uniformly chosen other particle and the event
    counts as one resampling.  Occupancy time per canonical state is
    accumulated over [t_burn, t_burn + t_sample].

    Returns (occupancy dict canonical-config -> time, resamples in window).
    """
    d = len(sites[0])
    site_rate = 1.0 + 2.0 * d * lam
    t_end = t_burn + t_sample
    state = seed & MASK64

    configs = [sorted(sites) for _ in range(n_particles)]
    last_change = [0.0] * n_particles
    occupancy = {}
    resamples = 0

    def canon(config):
        base = config[0]
        if not any(base):
            return tuple(config)
        return tuple(tuple(c - b for c, b in zip(s, base)) for s in config)

    def close_interval(i, now):
        a = last_change[i] if last_change[i] > t_burn else t_burn
        b = now if now < t_end else t_end
        if b > a:
            key = canon(configs[i])
            occupancy[key] = occupancy.get(key, 0.0) + (b - a)

    heap = []
    for i in range(n_particles):
        state = (state + GOLDEN) & MASK64
        u = ((mix64(state) >> 11) + 0.5) * 2.0 ** -53
        heapq.heappush(heap, (-log(u) / (len(configs[i]) * site_rate), i))

    while heap:
        t, i = heapq.heappop(heap)
        if t > t_end:
            break
        config = configs[i]
        n = len(config)
        state = (state + GOLDEN) & MASK64
        k = (mix64(state) * n) >> 64
        x = config[k]
        state = (state + GOLDEN) & MASK64
        u = ((mix64(state) >> 11) + 0.5) * 2.0 ** -53
        j = _pick_action(u, lam, d)
        if j < 0:
            close_interval(i, t)
            config.pop(k)
            last_change[i] = t
            if not config:
                state = (state + GOLDEN) & MASK64
                other = (mix64(state) * (n_particles - 1)) >> 64
                if other >= i:
                    other += 1
                configs[i] = list(configs[other])
                if t >= t_burn:
                    resamples += 1
        else:
            axis, sign = j >> 1, 1 if (j & 1) == 0 else -1
            y = tuple(c + sign if a == axis else c for a, c in enumerate(x))
            if y not in config:
                close_interval(i, t)
                _sorted_insert(config, y)
                last_change[i] = t
        state = (state + GOLDEN) & MASK64
        u = ((mix64(state) >> 11) + 0.5) * 2.0 ** -53
        heapq.heappush(
            heap, (t + -log(u) / (len(configs[i]) * site_rate), i)
        )

    for i in range(n_particles):
        close_interval(i, t_end)
    return occupancy, resamples
