# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled d=1 simulation kernels.

Hot-loop twins of ``_kernels_py``: same derived random streams, same
consumption order, same double arithmetic (the build disables FMA
contraction), so outputs are bit-identical to the pure backend.  Sites are
int64 scalars here; the dispatch layer converts to and from 1-tuples.
"""

from cython.operator cimport dereference as deref, preincrement as inc
from libcpp.vector cimport vector
from libcpp.unordered_set cimport unordered_set
from libcpp.unordered_map cimport unordered_map
from libcpp.map cimport map as cppmap
from libcpp.queue cimport priority_queue
from libc.math cimport log
from libc.stdint cimport uint64_t, int64_t

cdef extern from *:
    """
    #include <cstdint>

    typedef __uint128_t cq_u128;

    struct CqEv {
        double time; int kind; long long a; long long b; long long ver;
    };
    // std::priority_queue pops the largest element; invert every comparison
    // so "largest" means the smallest (time, kind, a, b, ver) tuple, which
    // matches heapq's ascending-tuple pop order in the pure backend.
    inline bool operator<(const CqEv& x, const CqEv& y) {
        if (x.time != y.time) return x.time > y.time;
        if (x.kind != y.kind) return x.kind > y.kind;
        if (x.a != y.a) return x.a > y.a;
        if (x.b != y.b) return x.b > y.b;
        return x.ver > y.ver;
    }

    struct CqFvEv {
        double time; long long idx;
    };
    inline bool operator<(const CqFvEv& x, const CqFvEv& y) {
        if (x.time != y.time) return x.time > y.time;
        return x.idx > y.idx;
    }
    """
    ctypedef unsigned long long u128 "cq_u128"
    cdef struct CqEv:
        double time
        int kind
        long long a
        long long b
        long long ver
    cdef struct CqFvEv:
        double time
        long long idx

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15UL
cdef double POW53 = 2.0 ** -53

# stream tags; must match rng.py
cdef uint64_t TAG_SITE = 3
cdef uint64_t TAG_ARROW = 4

cdef int KIND_REC = 0
cdef int KIND_ARR = 1


cdef inline uint64_t mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9UL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBUL
    return z ^ (z >> 31)


cdef inline uint64_t next_u64(uint64_t* state) nogil:
    state[0] = state[0] + GOLDEN
    return mix64(state[0])


cdef inline double next_double(uint64_t* state) nogil:
    return <double>((next_u64(state) >> 11) + 0.5) * POW53


cdef inline uint64_t mul_shift(uint64_t x, uint64_t n) nogil:
    return <uint64_t>(((<u128>x) * n) >> 64)


cdef inline uint64_t derive_word(uint64_t h, uint64_t w) nogil:
    h = h + GOLDEN
    return mix64(h ^ w)


cdef inline uint64_t rec_stream_seed(uint64_t field_seed, int64_t x,
                                     int64_t k) nogil:
    cdef uint64_t h = derive_word(field_seed, TAG_SITE)
    h = derive_word(h, <uint64_t>x)
    return derive_word(h, <uint64_t>k)


cdef inline uint64_t arrow_stream_seed(uint64_t field_seed, int64_t x,
                                       int64_t y, int64_t k) nogil:
    cdef uint64_t h = derive_word(field_seed, TAG_ARROW)
    h = derive_word(h, <uint64_t>x)
    h = derive_word(h, <uint64_t>y)
    return derive_word(h, <uint64_t>k)


cdef void gen_block(uint64_t stream_seed, double rate, int64_t k,
                    vector[double]* out) nogil:
    out.clear()
    if rate <= 0.0:
        return
    cdef uint64_t state = stream_seed
    cdef double t = <double>k
    cdef double end = k + 1.0
    cdef double u
    while True:
        u = next_double(&state)
        t += -log(u) / rate
        if t >= end:
            return
        out.push_back(t)


cdef double next_stream_event(uint64_t field_seed, double lam, int kind,
                              int64_t x, int64_t y, double a, double b,
                              bint include_a, vector[double]* scratch) nogil:
    """First event e of the clock with a < e <= b (a <= e <= b when
    include_a); -1.0 when the clock is silent on the interval."""
    cdef int64_t k = <int64_t>a
    if a < 0:
        k = 0
    cdef size_t i
    cdef double e
    while <double>k <= b:
        if kind == KIND_REC:
            gen_block(rec_stream_seed(field_seed, x, k), 1.0, k, scratch)
        else:
            gen_block(arrow_stream_seed(field_seed, x, y, k), lam, k, scratch)
        for i in range(scratch.size()):
            e = scratch[0][i]
            if (e > a or (include_a and e == a)) and e <= b:
                return e
        k += 1
    return -1.0


# --- graphical (open-path) evolution ----------------------------------------


cdef void arm_site(uint64_t field_seed, double lam, int64_t x, double t0,
                   double end, bint include_arrows_at_t0,
                   unordered_map[int64_t, long long]* version,
                   priority_queue[CqEv]* heap, vector[double]* scratch) nogil:
    cdef long long ver = 1
    cdef CqEv ev
    cdef int dd
    cdef int64_t y
    cdef double e
    if version.count(x):
        ver = deref(version)[x] + 1
    deref(version)[x] = ver
    e = next_stream_event(field_seed, lam, KIND_REC, x, x, t0, end,
                          False, scratch)
    if e >= 0.0:
        ev.time = e; ev.kind = KIND_REC; ev.a = x; ev.b = x; ev.ver = ver
        heap.push(ev)
    if lam > 0.0:
        for dd in range(2):
            y = x + 1 if dd == 0 else x - 1
            e = next_stream_event(field_seed, lam, KIND_ARR, x, y, t0, end,
                                  include_arrows_at_t0, scratch)
            if e >= 0.0:
                ev.time = e; ev.kind = KIND_ARR; ev.a = x; ev.b = y; ev.ver = ver
                heap.push(ev)


cdef void sort_vec(vector[int64_t]* v) nogil:
    # insertion sort: sets stay small and nearly sorted
    cdef size_t i, j
    cdef int64_t key
    for i in range(1, v.size()):
        key = deref(v)[i]
        j = i
        while j > 0 and deref(v)[j - 1] > key:
            deref(v)[j] = deref(v)[j - 1]
            j -= 1
        deref(v)[j] = key


cdef tuple dump_set_sorted(unordered_set[int64_t]* members):
    cdef vector[int64_t] v
    cdef unordered_set[int64_t].iterator it = members.begin()
    cdef size_t i
    while it != members.end():
        v.push_back(deref(it))
        inc(it)
    sort_vec(&v)
    out = []
    for i in range(v.size()):
        out.append(v[i])
    return tuple(out)


def evolve_snapshots_d1(seed, double lam, sites, double s, times):
    """d=1 open-path evolution; see _kernels_py.evolve_snapshots."""
    cdef uint64_t field_seed = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef vector[double] tvec
    cdef vector[double] scratch
    for t in times:
        tvec.push_back(<double>t)
    cdef double end = tvec[tvec.size() - 1]

    cdef unordered_set[int64_t] infected
    cdef unordered_map[int64_t, long long] version
    cdef priority_queue[CqEv] heap
    cdef vector[int64_t] init
    for x_obj in sorted(sites):
        init.push_back(<int64_t>x_obj)

    cdef size_t i
    for i in range(init.size()):
        infected.insert(init[i])
    for i in range(init.size()):
        arm_site(field_seed, lam, init[i], s, end, True,
                 &version, &heap, &scratch)

    snapshots = []
    cdef size_t idx = 0, n_times = tvec.size()
    cdef double tau = -1.0
    cdef CqEv ev
    cdef double e, e2
    cdef int64_t x, y

    while not heap.empty():
        ev = heap.top()
        heap.pop()
        e = ev.time
        x = ev.a
        y = ev.b
        if version[x] != ev.ver or not infected.count(x):
            continue
        while idx < n_times and tvec[idx] < e:
            snapshots.append(dump_set_sorted(&infected))
            idx += 1
        if idx >= n_times:
            break
        if ev.kind == KIND_REC:
            infected.erase(x)
            version[x] = version[x] + 1
            if infected.empty():
                tau = e
                break
        else:
            e2 = next_stream_event(field_seed, lam, KIND_ARR, x, y,
                                   e, end, False, &scratch)
            if e2 >= 0.0:
                ev.time = e2  # kind/a/b/ver unchanged
                heap.push(ev)
            if not infected.count(y):
                infected.insert(y)
                arm_site(field_seed, lam, y, e, end, True,
                         &version, &heap, &scratch)

    while idx < n_times:
        snapshots.append(dump_set_sorted(&infected))
        idx += 1
    return snapshots, (tau if tau >= 0.0 else None)


# --- jump-chain simulation ---------------------------------------------------


cdef inline long long pick_action(double u, double lam,
                                  double site_rate) nogil:
    cdef double r = u * site_rate
    cdef long long j
    if r < 1.0:
        return -1
    j = <long long>((r - 1.0) / lam)
    if j > 1:
        j = 1
    return j


cdef size_t lower_bound_vec(vector[int64_t]* v, int64_t y) nogil:
    cdef size_t lo = 0, hi = v.size(), mid
    while lo < hi:
        mid = (lo + hi) // 2
        if deref(v)[mid] < y:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef tuple dump_vec(vector[int64_t]* v):
    cdef size_t i
    out = []
    for i in range(v.size()):
        out.append(deref(v)[i])
    return tuple(out)


def jump_snapshots_d1(seed, double lam, sites, times, long long censor_width=0):
    """d=1 jump-chain trajectory; see _kernels_py.jump_snapshots."""
    cdef uint64_t state = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef double site_rate = 1.0 + 2.0 * 1 * lam
    cdef vector[double] tvec
    for t in times:
        tvec.push_back(<double>t)
    cdef double end = tvec[tvec.size() - 1]

    cdef vector[int64_t] config
    for x_obj in sorted(sites):
        config.push_back(<int64_t>x_obj)

    snapshots = []
    cdef size_t idx = 0, n_times = tvec.size()
    cdef double tau = -1.0
    cdef double tcur = 0.0, u
    cdef size_t n, i, pos
    cdef int64_t x0, y, dmax, dmin
    cdef long long act

    while True:
        n = config.size()
        u = next_double(&state)
        tcur += -log(u) / (n * site_rate)
        while idx < n_times and tvec[idx] < tcur:
            snapshots.append(dump_vec(&config))
            idx += 1
        if tcur > end or idx >= n_times:
            break
        i = mul_shift(next_u64(&state), n)
        x0 = config[i]
        u = next_double(&state)
        act = pick_action(u, lam, site_rate)
        if act < 0:
            config.erase(config.begin() + i)
            if config.empty():
                tau = tcur
                break
        else:
            y = x0 + 1 if act == 0 else x0 - 1
            pos = lower_bound_vec(&config, y)
            if pos < config.size() and config[pos] == y:
                continue
            if censor_width > 0:
                dmax = config[config.size() - 1]
                if y > dmax:
                    dmax = y
                dmin = config[0]
                if y < dmin:
                    dmin = y
                if dmax - dmin >= censor_width:
                    continue
            config.insert(config.begin() + pos, y)

    while idx < n_times:
        snapshots.append(dump_vec(&config) if tau < 0.0 else ())
        idx += 1
    return snapshots, (tau if tau >= 0.0 else None)


# --- Fleming-Viot particle ensemble ------------------------------------------


cdef void fv_close_interval(vector[int64_t]* config, double last_change,
                            double now, double t_burn, double t_end,
                            cppmap[vector[int64_t], double]* occupancy,
                            vector[int64_t]* key) nogil:
    cdef double a = last_change
    if a < t_burn:
        a = t_burn
    cdef double b = now
    if b > t_end:
        b = t_end
    if b <= a:
        return
    key.clear()
    cdef int64_t base = deref(config)[0]
    cdef size_t j
    for j in range(config.size()):
        key.push_back(deref(config)[j] - base)
    if occupancy.count(deref(key)):
        deref(occupancy)[deref(key)] = deref(occupancy)[deref(key)] + (b - a)
    else:
        deref(occupancy)[deref(key)] = b - a


def fv_run_d1(seed, double lam, long long n_particles, sites,
              double t_burn, double t_sample):
    """d=1 conditioned particle ensemble; see _kernels_py.fv_run."""
    cdef uint64_t state = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef double site_rate = 1.0 + 2.0 * 1 * lam
    cdef double t_end = t_burn + t_sample

    cdef vector[int64_t] init
    for x_obj in sorted(sites):
        init.push_back(<int64_t>x_obj)

    cdef vector[vector[int64_t]] configs
    cdef vector[double] last_change
    cdef long long i
    for i in range(n_particles):
        configs.push_back(init)
        last_change.push_back(0.0)

    cdef cppmap[vector[int64_t], double] occupancy
    cdef long long resamples = 0
    cdef priority_queue[CqFvEv] heap
    cdef CqFvEv ev
    cdef double u, tcur
    cdef size_t k, pos
    cdef int64_t x0, y
    cdef long long act, other
    cdef vector[int64_t] key

    for i in range(n_particles):
        u = next_double(&state)
        ev.time = -log(u) / (configs[i].size() * site_rate)
        ev.idx = i
        heap.push(ev)

    while not heap.empty():
        ev = heap.top()
        heap.pop()
        tcur = ev.time
        i = ev.idx
        if tcur > t_end:
            break
        k = mul_shift(next_u64(&state), configs[i].size())
        x0 = configs[i][k]
        u = next_double(&state)
        act = pick_action(u, lam, site_rate)
        if act < 0:
            fv_close_interval(&configs[i], last_change[i], tcur, t_burn,
                              t_end, &occupancy, &key)
            configs[i].erase(configs[i].begin() + k)
            last_change[i] = tcur
            if configs[i].empty():
                other = <long long>mul_shift(next_u64(&state),
                                             <uint64_t>(n_particles - 1))
                if other >= i:
                    other += 1
                configs[i] = configs[other]
                if tcur >= t_burn:
                    resamples += 1
        else:
            y = x0 + 1 if act == 0 else x0 - 1
            pos = lower_bound_vec(&configs[i], y)
            if not (pos < configs[i].size() and configs[i][pos] == y):
                fv_close_interval(&configs[i], last_change[i], tcur, t_burn,
                                  t_end, &occupancy, &key)
                configs[i].insert(configs[i].begin() + pos, y)
                last_change[i] = tcur
        u = next_double(&state)
        ev.time = tcur + -log(u) / (configs[i].size() * site_rate)
        ev.idx = i
        heap.push(ev)

    for i in range(n_particles):
        fv_close_interval(&configs[i], last_change[i], t_end, t_burn, t_end,
                          &occupancy, &key)

    out = {}
    cdef cppmap[vector[int64_t], double].iterator it = occupancy.begin()
    cdef size_t j
    while it != occupancy.end():
        pykey = []
        for j in range(deref(it).first.size()):
            pykey.append(deref(it).first[j])
        out[tuple(pykey)] = deref(it).second
        inc(it)
    return out, resamples
