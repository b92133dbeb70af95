"""Finite lattice configurations and the translation quotient.

A site is a plain tuple of ints, one entry per lattice dimension.  A
configuration is a strictly increasing (lexicographic) tuple of sites with a
common dimension; the empty tuple is the absorbing state.  A canonical
configuration additionally has its lexicographically minimal site at the
origin, which is how the process modulo translations is represented: every
translation orbit owns exactly one canonical form.

Distances and regions use the sup norm, matching the boxes the structure
detectors scan.
"""

from dataclasses import dataclass

from .errors import UsageError


class _Absorbed:
    """Distinguished absorbing state; not a configuration."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Absorbed"

    def __reduce__(self):  # keeps the singleton through pickling
        return (_Absorbed, ())


ABSORBED = _Absorbed()


def lex_compare(a, b):
    """Total order on sites: -1, 0 or 1.  Translation invariant by construction."""
    if len(a) != len(b):
        raise UsageError(f"dimension mismatch: {len(a)} vs {len(b)}")
    if a < b:
        return -1
    if a > b:
        return 1
    return 0


def as_config(sites):
    """Normalize an iterable of sites into a configuration tuple.

    Sorts lexicographically, rejects duplicates and mixed dimensions.
    """
    sites = [tuple(int(c) for c in s) for s in sites]
    if not sites:
        return ()
    d = len(sites[0])
    if d < 1:
        raise UsageError("sites must have dimension >= 1")
    if any(len(s) != d for s in sites):
        raise UsageError("all sites in a configuration must share one dimension")
    sites.sort()
    for prev, cur in zip(sites, sites[1:]):
        if prev == cur:
            raise UsageError(f"duplicate site {cur}")
    return tuple(sites)


def translate(config, v):
    """Translate every site by the vector v; preserves the sort order."""
    return tuple(tuple(c + dv for c, dv in zip(s, v)) for s in config)


def canonicalize(config):
    """Project a configuration onto its canonical translation representative.

    The lex-minimal site lands on the origin.  The empty configuration maps
    to the ABSORBED sentinel rather than to a configuration.  Idempotent.
    """
    if isinstance(config, _Absorbed):
        return ABSORBED
    if not config:
        return ABSORBED
    base = min(config)
    if not any(base):
        return tuple(config)
    return tuple(tuple(c - b for c, b in zip(s, base)) for s in config)


def is_canonical(config):
    return bool(config) and min(config) == (0,) * len(config[0])


def chebyshev(a, b):
    """Sup-norm distance between two sites."""
    return max(abs(x - y) for x, y in zip(a, b))


def diameter(config):
    """Largest pairwise sup-norm distance; 0 for singletons.

    Equals the largest coordinate range, so it is computed per axis rather
    than over site pairs.
    """
    if not config or isinstance(config, _Absorbed):
        raise UsageError("diameter of an empty configuration is undefined")
    d = len(config[0])
    return max(
        max(s[i] for s in config) - min(s[i] for s in config) for i in range(d)
    )


@dataclass(frozen=True)
class Region:
    """A sup-norm box around a center, or the shell between two boxes.

    box(center, r) is all sites within distance r; shell(center, r) is
    box(center, r) minus box(center, r - 1), i.e. the boundary layer at
    exactly distance r.  Shells need r >= 1.
    """

    center: tuple
    radius: int
    kind: str = "box"

    def __post_init__(self):
        if self.kind not in ("box", "shell"):
            raise UsageError(f"unknown region kind {self.kind!r}")
        if self.radius < 0:
            raise UsageError("region radius must be non-negative")
        if self.kind == "shell" and self.radius < 1:
            raise UsageError("shell radius must be >= 1")

    def contains(self, site):
        if len(site) != len(self.center):
            raise UsageError("site dimension does not match region center")
        dist = chebyshev(site, self.center)
        if self.kind == "box":
            return dist <= self.radius
        return dist == self.radius

    def sites(self):
        """Enumerate the region's sites in lexicographic order."""
        d = len(self.center)
        out = []

        def rec(prefix):
            if len(prefix) == d:
                site = tuple(prefix)
                if self.contains(site):
                    out.append(site)
                return
            c = self.center[len(prefix)]
            for v in range(c - self.radius, c + self.radius + 1):
                rec(prefix + [v])

        rec([])
        return out


def region_contains(region, site):
    return region.contains(site)


def box_sites(center, radius):
    return Region(center, radius, "box").sites()


# --- text encoding --------------------------------------------------------
#
# "0,0;0,1;1,-2" -- semicolon-separated sites, comma-separated coordinates.
# The empty string encodes the empty configuration / absorbed state.


def format_config(config):
    if isinstance(config, _Absorbed) or not config:
        return ""
    return ";".join(",".join(str(c) for c in s) for s in config)


def parse_config(text, dimension=None):
    text = text.strip()
    if not text:
        return ()
    sites = []
    for part in text.split(";"):
        coords = tuple(int(c) for c in part.split(","))
        sites.append(coords)
    config = as_config(sites)
    if dimension is not None and config and len(config[0]) != dimension:
        raise UsageError(
            f"configuration {text!r} has dimension {len(config[0])}, expected {dimension}"
        )
    return config
