"""Trajectory records and their JSONL serialization."""

import json
from dataclasses import dataclass

from . import events, jumpchain
from .errors import UsageError
from .lattice import ABSORBED, as_config, canonicalize, format_config, parse_config
from .rng import TAG_FIELD, TAG_TRAJ, derive


@dataclass
class TrajectoryRecord:
    """One simulated path: inputs, snapshots modulo translations, lifetime.

    ``tau`` is None when the path was still alive at the last snapshot time
    (absorption beyond the observed horizon).  Snapshots hold canonical
    configurations or the ABSORBED sentinel; once absorbed, always absorbed.
    """

    seed: int
    lam: float
    eta0: tuple
    snapshot_times: list
    snapshots: list
    tau: float | None

    def __post_init__(self):
        dead = False
        for t, snap in zip(self.snapshot_times, self.snapshots):
            if snap is ABSORBED:
                dead = True
            elif dead:
                raise UsageError("non-absorbed snapshot after absorption")
            if self.tau is not None and t < self.tau and snap is ABSORBED:
                raise UsageError("absorbed snapshot before the absorption time")

    def to_json(self):
        return json.dumps(
            {
                "seed": self.seed,
                "lambda": self.lam,
                "eta0": format_config(self.eta0),
                "snapshot_times": self.snapshot_times,
                "snapshots": [
                    "" if s is ABSORBED else format_config(s) for s in self.snapshots
                ],
                "tau": self.tau,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, line):
        obj = json.loads(line)
        return cls(
            seed=obj["seed"],
            lam=obj["lambda"],
            eta0=parse_config(obj["eta0"]),
            snapshot_times=list(obj["snapshot_times"]),
            snapshots=[
                ABSORBED if s == "" else parse_config(s) for s in obj["snapshots"]
            ],
            tau=obj["tau"],
        )


def simulate(eta0, lam, snapshot_times, master_seed, replica=0, engine="graphical"):
    """Simulate one replica and package it as a TrajectoryRecord.

    ``engine`` selects the graphical (open-path) construction or the
    jump-chain sampler; both have the same law.  The replica index picks the
    derived seed substream, so records are reproducible independently of how
    replicas are batched.
    """
    eta0 = as_config(eta0)
    if not eta0:
        raise UsageError("initial configuration must be non-empty")
    snapshot_times = list(snapshot_times)
    if engine == "graphical":
        seed = derive(master_seed, TAG_FIELD, replica)
        field = events.make_field(seed, lam, snapshot_times[-1], len(eta0[0]))
        snaps, tau = events.evolve_snapshots(field, eta0, 0.0, snapshot_times)
    elif engine == "jump":
        seed = derive(master_seed, TAG_TRAJ, replica)
        snaps, tau = jumpchain.jump_snapshots(eta0, lam, snapshot_times, seed)
    else:
        raise UsageError(f"unknown engine {engine!r}")
    return TrajectoryRecord(
        seed=seed,
        lam=lam,
        eta0=eta0,
        snapshot_times=snapshot_times,
        snapshots=[canonicalize(s) for s in snaps],
        tau=tau,
    )
