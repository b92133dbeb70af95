"""Counter-based, splittable random streams.

Every random quantity in this package is derived from a 64-bit master seed
through keyed splitmix64 chains, so any stream (a replica's trajectory, one
Poisson block of one site's recovery clock, a bootstrap round) is a pure
function of (master_seed, key words).  Streams can therefore be materialized
lazily, in any order, from any worker, and always agree.

The compiled kernels in ``_kernels`` reimplement these exact integer and
floating-point recipes in C; both backends must stay bit-identical.  If you
touch anything here, mirror it there (and in ``_kernels_py``) and run the
cross-backend tests.

Stream consumption contracts (shared with both kernel backends):

* jump-chain step: one u64 -> waiting-time double, one u64 -> site index
  (multiply-shift bounded int), one u64 -> action double.
* Fleming-Viot event: site index, action double, [donor index if the
  particle absorbed], then one waiting-time double for the reschedule.
* Poisson block (unit-length time block k of one site/arrow clock): fresh
  stream seeded by the block key; exponential gaps until the block ends.
"""

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

# Stream-key tags.  These are part of the reproducibility contract: a given
# (master_seed, tag, words...) names the same stream everywhere, forever.
TAG_TRAJ = 1    # per-replica jump-chain stream: (TAG_TRAJ, replica)
TAG_FIELD = 2   # per-replica graphical field seed: (TAG_FIELD, replica)
TAG_SITE = 3    # recovery clock block: (TAG_SITE, *coords, block)
TAG_ARROW = 4   # arrow clock block: (TAG_ARROW, *src, *dst, block)
TAG_FV = 5      # Fleming-Viot driver stream
TAG_INIT = 6    # per-replica initial-state sampling: (TAG_INIT, replica)
TAG_BOOT = 7    # bootstrap rounds: (TAG_BOOT, round)
TAG_PAIR = 8    # two-sample experiments: (TAG_PAIR, 0|1)


def mix64(z):
    """splitmix64 output mixer (Stafford variant 13)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive(seed, *words):
    """Fold key words into a seed; the result seeds an independent stream."""
    h = seed & MASK64
    for w in words:
        h = (h + GOLDEN) & MASK64
        h = mix64(h ^ (w & MASK64))
    return h


class Stream:
    """Sequential splitmix64 generator over a derived seed."""

    __slots__ = ("state",)

    def __init__(self, seed):
        self.state = seed & MASK64

    def next_u64(self):
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def next_double(self):
        """Uniform double strictly inside (0, 1); 53-bit resolution."""
        return ((self.next_u64() >> 11) + 0.5) * 2.0 ** -53

    def next_below(self, n):
        """Uniform integer in [0, n) via multiply-shift; bias < n / 2**64."""
        return (self.next_u64() * n) >> 64
