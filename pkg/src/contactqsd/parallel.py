"""Replica partitioning across workers and order-independent merging.

Workers are shared-nothing processes; each owns a contiguous replica range
and returns an aggregate of integer count maps plus optional per-replica
records.  Because every replica draws from a seed substream keyed by its
index, and merging sums integer counts and unions disjoint record keys, the
merged result is identical for any worker count or chunking.
"""

from concurrent.futures import ProcessPoolExecutor

from .errors import UsageError


def empty_aggregate(spec):
    return {"spec": spec, "counts": {}, "records": {}}


def merge_aggregates(partials):
    """Commutative, associative merge of worker aggregates.

    Counts are summed per (counter name, key); records are unioned and must
    not collide.  Partials from different specs are refused.
    """
    partials = list(partials)
    if not partials:
        raise UsageError("nothing to merge")
    spec = partials[0]["spec"]
    merged = empty_aggregate(spec)
    for part in partials:
        if part["spec"] != spec:
            raise UsageError(f"aggregate spec mismatch: {part['spec']} vs {spec}")
        for name, counter in part["counts"].items():
            target = merged["counts"].setdefault(name, {})
            for key, value in counter.items():
                target[key] = target.get(key, 0) + value
        for key, row in part["records"].items():
            if key in merged["records"]:
                raise UsageError(f"duplicate record key {key} while merging")
            merged["records"][key] = row
    return merged


def run_replicas(worker_fn, n_replicas, workers, payload):
    """Run worker_fn(start, stop, payload) over a partition of [0, n)."""
    if n_replicas < 1:
        raise UsageError("need at least one replica")
    workers = max(1, int(workers))
    if workers == 1:
        return worker_fn(0, n_replicas, payload)
    chunks = []
    base = n_replicas // workers
    extra = n_replicas % workers
    start = 0
    for w in range(workers):
        size = base + (1 if w < extra else 0)
        if size:
            chunks.append((start, start + size))
            start += size
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(worker_fn, lo, hi, payload) for lo, hi in chunks
        ]
        partials = [f.result() for f in futures]
    return merge_aggregates(partials)
