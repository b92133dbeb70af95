"""Gap statistic oracles at lambda = 0 (independent unit-rate clocks)."""

import itertools
import math

import pytest

from contactqsd import canonicalize, diam_factorization_gap, diameter


def zero_rate_conditional_law(sites, t):
    """Exact conditioned law at time t: enumerate surviving subsets.

    Each site dies independently with probability 1 - e^-t; condition on at
    least one survivor and project onto canonical classes.
    """
    p = math.exp(-t)
    norm = 1 - (1 - p) ** len(sites)
    law = {}
    for k in range(1, len(sites) + 1):
        for subset in itertools.combinations(sites, k):
            weight = p**k * (1 - p) ** (len(sites) - k) / norm
            key = canonicalize(subset)
            law[key] = law.get(key, 0.0) + weight
    return law


def exact_gap(sites, t, radius, reference):
    law = zero_rate_conditional_law(sites, t)
    p_below = sum(v for k, v in law.items() if diameter(k) < radius)
    keys = set(law) | set(reference)
    return max(abs(law.get(k, 0.0) - reference.get(k, 0.0) * p_below) for k in keys)


def test_singleton_gap_is_zero():
    # the lambda=0 quasi-stationary law is the point mass at the singleton
    res = diam_factorization_gap(
        ((0,),), 0.0, 2.0, 5.0, 20_000, 99, {((0,),): 1.0}
    )
    assert res.gap == 0.0
    assert res.p_diam_below == 1.0


@pytest.mark.parametrize("n_sites,t,radius", [(3, 1.0, 2.5), (4, 0.7, 3.5)])
def test_interval_gap_matches_enumeration(n_sites, t, radius):
    sites = tuple((i,) for i in range(n_sites))
    reference = {((0,),): 1.0}
    want = exact_gap(sites, t, radius, reference)
    res = diam_factorization_gap(
        sites, 0.0, t, radius, 150_000, 1234, reference, workers=2
    )
    # the bootstrap CI is for the estimator; allow its width around the truth
    half_width = (res.ci95[1] - res.ci95[0]) / 2 + 0.005
    assert abs(res.gap - want) <= 3 * half_width
