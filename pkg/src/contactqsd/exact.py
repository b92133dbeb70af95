"""Exact quasi-stationary distribution on a diameter-truncated state space.

The contact process modulo translations restricted to canonical
configurations of diameter < W is a finite absorbed chain: recoveries at
rate 1 per site, infections at rate lambda per (vacant slot, adjacent
infected site) pair, with infections that would reach diameter W suppressed
("censoring"; a "killing" variant that redirects them to the absorbing
state is available for sensitivity checks).  The unique quasi-stationary
law of the truncated chain is the probability left eigenvector of the
generator restricted to live states, extracted by power iteration on the
uniformized kernel.

d=1 state spaces are bitmask-indexed (subsets of {0..W-1} containing 0, so
exactly 2^(W-1) states); other dimensions enumerate canonical forms of
subsets of the W^d box, which is why d=2 is capped at small W.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import NumericalError, SizeError, UsageError
from .lattice import canonicalize, diameter, format_config
from .qsd import QsdEstimate, normalize_counts

MAX_STATES = 1 << 21


@dataclass
class TruncatedStateSpace:
    dimension: int
    width: int
    states: list          # index -> canonical config (tuple of site tuples)
    index: dict           # canonical config -> index

    def __len__(self):
        return len(self.states)


@dataclass
class TruncatedGenerator:
    """Sub-Markov rate matrix over a truncated state space.

    ``rates`` is sparse with non-negative off-diagonals and diagonal
    -(row sum of off-diagonals + absorption rate); ``absorption_rates``
    holds the per-state rate into the absorbing state.
    """

    space: TruncatedStateSpace
    lam: float
    rates: sp.csr_matrix
    absorption_rates: np.ndarray


def _enumerate_states_d1(width):
    # canonical d=1 configs of diameter < W are exactly the subsets of
    # {0..W-1} containing 0: encode as mask over sites 1..W-1
    states = []
    for mask in range(1 << (width - 1)):
        sites = [(0,)]
        m = mask
        pos = 1
        while m:
            if m & 1:
                sites.append((pos,))
            pos += 1
            m >>= 1
        states.append(tuple(sites))
    index = {s: i for i, s in enumerate(states)}
    return states, index


def _enumerate_states_generic(dimension, width):
    # every canonical config of diameter < W is the canonical form of a
    # subset of the W^d box, so enumerate those and deduplicate
    cells = []

    def fill(prefix):
        if len(prefix) == dimension:
            cells.append(tuple(prefix))
            return
        for v in range(width):
            fill(prefix + [v])

    fill([])
    n_cells = len(cells)
    if n_cells > 20:
        raise SizeError(
            f"d={dimension}, W={width}: {1 << n_cells} subsets to scan is too many"
        )
    found = set()
    for mask in range(1, 1 << n_cells):
        sites = [cells[i] for i in range(n_cells) if mask >> i & 1]
        cfg = canonicalize(tuple(sorted(sites)))
        if diameter(cfg) < width:
            found.add(cfg)
    states = sorted(found)
    index = {s: i for i, s in enumerate(states)}
    return states, index


def build_state_space(dimension, width):
    if width < 1:
        raise UsageError("width must be >= 1")
    if dimension == 1:
        if width > 22:
            raise SizeError(f"d=1 supports W <= 22, got {width}")
        states, index = _enumerate_states_d1(width)
    else:
        if dimension == 2 and width > 4:
            raise SizeError(f"d=2 supports W <= 4, got {width}")
        states, index = _enumerate_states_generic(dimension, width)
    if len(states) > MAX_STATES:
        raise SizeError(f"state count {len(states)} exceeds cap {MAX_STATES}")
    return TruncatedStateSpace(dimension, width, states, index)


def _transitions_d1(mask, width, lam, truncation):
    """Yield (target index or None for absorption, rate) from bitmask state.

    Bit i of the full occupancy word is site i; bit 0 is always set for a
    canonical state and the index is the word with bit 0 dropped.
    """
    occ = (mask << 1) | 1
    out = {}
    absorb = 0.0
    # recoveries
    m = occ
    pos = 0
    while m:
        if m & 1:
            rest = occ & ~(1 << pos)
            if rest == 0:
                absorb += 1.0
            else:
                tz = (rest & -rest).bit_length() - 1
                out_state = rest >> tz
                out[out_state >> 1] = out.get(out_state >> 1, 0.0) + 1.0
        m >>= 1
        pos += 1
    if lam > 0:
        top = occ.bit_length() - 1
        # infections into vacant slots 0..W-1 (never censored: max stays < W)
        for j in range(width):
            if occ >> j & 1:
                continue
            c = (1 if j > 0 and occ >> (j - 1) & 1 else 0) + (
                1 if j < width - 1 and occ >> (j + 1) & 1 else 0
            )
            if c:
                new = occ | (1 << j)
                out[new >> 1] = out.get(new >> 1, 0.0) + c * lam
        # infection at -1 (left of the origin): allowed iff diameter stays < W
        if top <= width - 2:
            new = (occ << 1) | 1
            out[new >> 1] = out.get(new >> 1, 0.0) + lam
        elif truncation == "killing":
            absorb += lam
        # slots at j in {top+1..}, beyond width-1, only exist when top = W-1
        if top == width - 1 and truncation == "killing":
            absorb += lam  # right-edge growth redirected to absorption
    return out, absorb


def _transitions_generic(cfg, width, lam, truncation, index):
    out = {}
    absorb = 0.0
    sset = set(cfg)
    for s in cfg:
        rest = tuple(x for x in cfg if x != s)
        if not rest:
            absorb += 1.0
        else:
            target = index[canonicalize(rest)]
            out[target] = out.get(target, 0.0) + 1.0
    if lam > 0:
        d = len(cfg[0])
        slots = {}
        for s in cfg:
            for axis in range(d):
                for delta in (1, -1):
                    y = tuple(
                        c + delta if a == axis else c for a, c in enumerate(s)
                    )
                    if y not in sset:
                        slots[y] = slots.get(y, 0) + 1
        for y, c in slots.items():
            new = canonicalize(tuple(sorted(cfg + (y,))))
            if diameter(new) >= width:
                if truncation == "killing":
                    absorb += c * lam
                continue
            target = index[new]
            out[target] = out.get(target, 0.0) + c * lam
    return out, absorb


def build_generator(dimension, width, lam, truncation="censoring"):
    """Assemble the truncated sub-Markov generator.

    ``truncation``: "censoring" suppresses diameter-violating infections,
    "killing" sends their rate to the absorbing state instead.
    """
    if lam < 0:
        raise UsageError("infection rate must be non-negative")
    if truncation not in ("censoring", "killing"):
        raise UsageError(f"unknown truncation policy {truncation!r}")
    space = build_state_space(dimension, width)
    n = len(space)
    rows, cols, vals = [], [], []
    absorb = np.zeros(n)
    if dimension == 1:
        for i in range(n):
            out, a = _transitions_d1(i, width, lam, truncation)
            absorb[i] = a
            for j, r in sorted(out.items()):
                rows.append(i)
                cols.append(j)
                vals.append(r)
    else:
        for i, cfg in enumerate(space.states):
            out, a = _transitions_generic(cfg, width, lam, truncation, space.index)
            absorb[i] = a
            for j, r in sorted(out.items()):
                rows.append(i)
                cols.append(j)
                vals.append(r)
    q = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    diag = -np.asarray(q.sum(axis=1)).ravel() - absorb
    q = (q + sp.diags(diag)).tocsr()
    return TruncatedGenerator(space, lam, q, absorb)


@dataclass
class EigenResult:
    """Eigen solve output: the law as a QsdEstimate plus solver metadata."""

    estimate: QsdEstimate
    alpha: float
    residual: float
    iterations: int

    @property
    def pmf(self):
        return self.estimate.pmf


def _eigen_result(space, pmf, alpha, residual, iterations):
    est = QsdEstimate(
        pmf=normalize_counts(pmf),
        support_truncated=False,
        n_effective=len(space),
        alpha_hat=alpha,
        method="eigen",
    )
    return EigenResult(est, alpha, residual, iterations)


def qsd_eigen(gen, tolerance=1e-12, max_iterations=10**6, check_every=64):
    """Left Perron eigenpair of the truncated generator.

    Returns the probability row vector nu and rate alpha > 0 solving
    nu Q = -alpha nu, via power iteration on the uniformized kernel
    I + Q/Gamma with per-step renormalization.  Convergence is declared on
    the actual residual ||nu Q + alpha nu||_1 < tolerance.

    For lam = 0 the live chain is not irreducible and the quasi-stationary
    law degenerates to the singleton state, returned directly.
    """
    space = gen.space
    n = len(space)
    origin = (tuple([0] * space.dimension),)
    if gen.lam == 0:
        return _eigen_result(space, {origin: 1.0}, 1.0, 0.0, 0)
    if n == 1:
        return _eigen_result(
            space, {space.states[0]: 1.0}, float(gen.absorption_rates[0]), 0.0, 0
        )

    qt = gen.rates.T.tocsr()
    gamma = float(-gen.rates.diagonal().min())
    v = np.full(n, 1.0 / n)
    alpha = 0.0
    for it in range(1, max_iterations + 1):
        w = v + qt.dot(v) / gamma
        total = w.sum()
        w /= total
        v = w
        if it % check_every == 0 or it == max_iterations:
            alpha = gamma * (1.0 - total)
            residual = np.abs(qt.dot(v) + alpha * v).sum()
            if residual < tolerance:
                pmf = {space.states[i]: float(v[i]) for i in range(n)}
                return _eigen_result(space, pmf, float(alpha), float(residual), it)
    raise NumericalError(
        f"power iteration did not reach residual {tolerance} in {max_iterations} steps",
        residual=float(residual),
    )


def truncation_sweep(dimension, lam, widths, tolerance=1e-12):
    """Eigen results across truncation widths, with convergence diagnostics.

    Returns a list of dicts (W, alpha, pmf) and, per consecutive pair, the
    total-variation distance between the two laws and |delta alpha|.
    """
    results = []
    for w in widths:
        gen = build_generator(dimension, w, lam)
        eig = qsd_eigen(gen, tolerance=tolerance)
        results.append({"W": w, "alpha": eig.alpha, "pmf": eig.pmf})
    diagnostics = []
    for prev, cur in zip(results, results[1:]):
        keys = set(prev["pmf"]) | set(cur["pmf"])
        tv = 0.5 * sum(
            abs(prev["pmf"].get(k, 0.0) - cur["pmf"].get(k, 0.0)) for k in keys
        )
        diagnostics.append(
            {
                "W_pair": (prev["W"], cur["W"]),
                "tv": tv,
                "alpha_delta": abs(cur["alpha"] - prev["alpha"]),
            }
        )
    return results, diagnostics


def export_generator(gen, matrix_path, states_path):
    """Write the rate matrix in coordinate format plus the state index."""
    coo = gen.rates.tocoo()
    with open(matrix_path, "w") as fh:
        for i, j, r in zip(coo.row, coo.col, coo.data):
            fh.write(f"{int(i)} {int(j)} {float(r)!r}\n")
    with open(states_path, "w") as fh:
        for i, cfg in enumerate(gen.space.states):
            fh.write(f"{i}\t{format_config(cfg)}\n")
