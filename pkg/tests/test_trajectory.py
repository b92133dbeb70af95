import pytest

from contactqsd import ABSORBED, TrajectoryRecord, UsageError, simulate


class TestSimulate:
    @pytest.mark.parametrize("engine", ["graphical", "jump"])
    def test_snapshot_shapes(self, engine):
        rec = simulate(((0,), (1,)), 1.0, [1.0, 2.0, 3.0], 42, engine=engine)
        assert len(rec.snapshots) == 3
        assert rec.lam == 1.0
        for snap in rec.snapshots:
            if snap is not ABSORBED:
                assert min(snap) == (0,)  # canonical

    def test_absorption_is_terminal(self):
        for i in range(300):
            rec = simulate(((0,),), 0.3, [0.5, 1.0, 2.0, 4.0], 7, replica=i,
                           engine="jump")
            dead = False
            for t, snap in zip(rec.snapshot_times, rec.snapshots):
                if snap is ABSORBED:
                    dead = True
                    if rec.tau is not None:
                        assert rec.tau <= t
                else:
                    assert not dead
                    if rec.tau is not None:
                        assert rec.tau > t

    def test_replica_substreams_differ(self):
        a = simulate(((0,),), 1.0, [2.0], 42, replica=0)
        b = simulate(((0,),), 1.0, [2.0], 42, replica=1)
        assert a.seed != b.seed

    def test_deterministic_per_replica(self):
        a = simulate(((0,),), 1.0, [2.0], 42, replica=3)
        b = simulate(((0,),), 1.0, [2.0], 42, replica=3)
        assert a.snapshots == b.snapshots and a.tau == b.tau

    def test_unknown_engine(self):
        with pytest.raises(UsageError):
            simulate(((0,),), 1.0, [1.0], 1, engine="dual")


class TestJsonl:
    def test_round_trip(self):
        rec = simulate(((0,), (3,)), 0.8, [1.0, 2.5], 11, replica=5)
        line = rec.to_json()
        back = TrajectoryRecord.from_json(line)
        assert back.snapshots == rec.snapshots
        assert back.tau == rec.tau
        assert back.eta0 == rec.eta0
        assert back.to_json() == line

    def test_absorbed_snapshot_encoded_as_empty_string(self):
        rec = TrajectoryRecord(
            seed=1, lam=0.5, eta0=((0,),), snapshot_times=[1.0, 2.0],
            snapshots=[((0,),), ABSORBED], tau=1.5,
        )
        line = rec.to_json()
        assert '""' in line
        back = TrajectoryRecord.from_json(line)
        assert back.snapshots[1] is ABSORBED

    def test_invariant_enforced(self):
        with pytest.raises(UsageError):
            TrajectoryRecord(
                seed=1, lam=0.5, eta0=((0,),), snapshot_times=[1.0, 2.0],
                snapshots=[ABSORBED, ((0,),)], tau=0.5,
            )
