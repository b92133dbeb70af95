import math

import pytest

from contactqsd import UsageError, diameter, jump_evolve, jump_snapshots, jump_tau
from contactqsd.rng import TAG_TRAJ, derive


class TestZeroRateOracles:
    """At lambda = 0 every site carries an independent unit-rate clock."""

    def test_single_site_survival(self):
        n = 100_000
        t = 1.5
        alive = 0
        for i in range(n):
            final = jump_evolve(((0,),), 0.0, t, derive(42, TAG_TRAJ, i))
            alive += bool(final)
        want = math.exp(-t)
        sigma = math.sqrt(want * (1 - want) / n)
        assert abs(alive / n - want) <= 3 * sigma

    def test_n_site_survival(self):
        n = 100_000
        t = 1.0
        eta0 = tuple((7 * i,) for i in range(4))
        alive = 0
        for i in range(n):
            if jump_evolve(eta0, 0.0, t, derive(43, TAG_TRAJ, i)):
                alive += 1
        want = 1 - (1 - math.exp(-t)) ** 4
        sigma = math.sqrt(want * (1 - want) / n)
        assert abs(alive / n - want) <= 3 * sigma

    def test_sites_never_move(self):
        for i in range(2000):
            final = jump_evolve(((0,), (3,)), 0.0, 2.0, derive(44, TAG_TRAJ, i))
            assert set(final) <= {(0,), (3,)}


class TestPlumbing:
    def test_zero_time_identity(self):
        assert jump_evolve(((0,), (1,)), 1.0, 0.0, 5) == ((0,), (1,))

    def test_negative_time_rejected(self):
        with pytest.raises(UsageError):
            jump_evolve(((0,),), 1.0, -1.0, 5)

    def test_empty_start_stays_empty(self):
        assert jump_evolve((), 1.0, 3.0, 5) == ()

    def test_deterministic(self):
        a = jump_evolve(((0,), (1,)), 1.0, 4.0, 777)
        b = jump_evolve(((0,), (1,)), 1.0, 4.0, 777)
        assert a == b

    def test_tau_matches_snapshots(self):
        for seed in range(200):
            final, tau = jump_tau(((0,),), 0.8, 6.0, seed)
            if tau is not None:
                assert final == ()
                assert 0 < tau <= 6.0
            else:
                assert final

    def test_snapshots_monotone_absorption(self):
        for seed in range(200):
            snaps, tau = jump_snapshots(((0,), (1,)), 1.0, [1.0, 2.0, 4.0], seed)
            dead = False
            for s in snaps:
                if not s:
                    dead = True
                else:
                    assert not dead

    def test_censoring_caps_diameter(self):
        for seed in range(300):
            snaps, _ = jump_snapshots(
                ((0,),), 1.5, [2.0, 5.0, 9.0], seed, censor_width=4
            )
            for s in snaps:
                if s:
                    assert diameter(s) < 4

    def test_2d_neighbors_only(self):
        for seed in range(200):
            final = jump_evolve(((0, 0),), 1.0, 1.0, seed)
            for site in final:
                assert len(site) == 2
