"""Condition assembly, mapping-guided MixUp and co-training batch emission."""
from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from .alignment import MappingTable
from .core import FeatureSequence, Source, Trajectory
from .errors import DimensionMismatch, InsufficientHistory, InvalidInput, UnmappedTimestep

BATCH_MAGIC = b"TRJB"
BATCH_VERSION = 1


@dataclass(frozen=True)
class Condition:
    """Observation history, oldest timestep first.

    ``flattened`` concatenates ``[agent | wrist | proprio]`` for each timestep
    in turn.
    """

    agent: np.ndarray  # (tau, d_a)
    wrist: np.ndarray  # (tau, d_w)
    proprio: np.ndarray  # (tau, d_p)

    @property
    def tau(self) -> int:
        return self.agent.shape[0]

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.agent.shape[1], self.wrist.shape[1], self.proprio.shape[1]

    @property
    def flattened(self) -> np.ndarray:
        return np.concatenate([self.agent, self.wrist, self.proprio], axis=1).reshape(-1)

    @classmethod
    def from_flat(cls, flat, tau: int, d_a: int, d_w: int, d_p: int) -> "Condition":
        flat = np.asarray(flat, dtype=float)
        if flat.size != tau * (d_a + d_w + d_p):
            raise DimensionMismatch(f"flat condition of size {flat.size} does not match dims")
        rows = flat.reshape(tau, d_a + d_w + d_p)
        return cls(rows[:, :d_a].copy(), rows[:, d_a : d_a + d_w].copy(), rows[:, d_a + d_w :].copy())


@dataclass(frozen=True)
class TrainingSample:
    condition: Condition
    actions: np.ndarray  # (k, action_dim)
    domain_alpha: float  # 1 = pure human, 0 = pure robot
    provenance: Optional[tuple] = field(default=None, compare=False)


@dataclass(frozen=True)
class Demo:
    """A trajectory with its per-frame agent-view (and, for robots, wrist-view) features."""

    trajectory: Trajectory
    agent: FeatureSequence
    wrist: Optional[FeatureSequence] = None

    def __post_init__(self):
        if len(self.agent) != len(self.trajectory):
            raise DimensionMismatch("agent features and trajectory differ in length")
        if self.wrist is not None and len(self.wrist) != len(self.trajectory):
            raise DimensionMismatch("wrist features and trajectory differ in length")

    @property
    def demo_id(self) -> str:
        return self.trajectory.demo_id


@dataclass(frozen=True)
class LinearAnneal:
    epochs_to_zero: int = 300
    alpha_min: float = 0.0

    def __post_init__(self):
        if self.epochs_to_zero < 1 or not 0.0 <= self.alpha_min <= 1.0:
            raise InvalidInput("need epochs_to_zero >= 1 and alpha_min in [0, 1]")


@dataclass(frozen=True)
class BetaDist:
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise InvalidInput("beta parameters must be positive")


def schedule_to_dict(schedule) -> dict:
    kind = "linear" if isinstance(schedule, LinearAnneal) else "beta"
    return {"kind": kind, **asdict(schedule)}


def alpha_at(schedule, epoch: int, rng=None) -> float:
    """Interpolation weight for ``epoch``.

    Linear annealing is deterministic. For a beta schedule ``rng`` may be a
    seed or a :class:`numpy.random.Generator`; one value is drawn from it.
    """
    if epoch < 0:
        raise InvalidInput("epoch must be non-negative")
    if isinstance(schedule, LinearAnneal):
        return max(schedule.alpha_min, 1.0 - epoch / schedule.epochs_to_zero)
    if isinstance(schedule, BetaDist):
        gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        return float(gen.beta(schedule.a, schedule.b))
    raise InvalidInput(f"unknown schedule {schedule!r}")


def _window(n: int, t: int, tau: int, pad: bool) -> np.ndarray:
    idx = np.arange(t - tau + 1, t + 1)
    if idx[0] < 0:
        if not pad:
            raise InsufficientHistory(f"t={t} has fewer than tau={tau} frames of history")
        idx = np.maximum(idx, 0)
    return idx


def assemble_condition(traj: Trajectory, features: FeatureSequence, t: int, tau: int, source=None,
                       wrist: FeatureSequence | None = None, wrist_dim: int | None = None,
                       pad_history: bool = False) -> Condition:
    """Condition over timesteps ``t - tau + 1 .. t``.

    Robot conditions stack agent features, wrist features and the robot's
    action vectors as proprioception. Human conditions put zeros in the wrist
    block (width ``wrist_dim``) and use the retargeted action vectors as
    proprioception. With ``pad_history`` the first frame is repeated instead
    of raising when the history runs off the start.
    """
    source = traj.source if source is None else Source(source)
    if tau < 1:
        raise InvalidInput("tau must be >= 1")
    if len(features) != len(traj):
        raise DimensionMismatch("feature sequence and trajectory differ in length")
    if not 0 <= t < len(traj):
        raise InvalidInput(f"timestep {t} outside trajectory of length {len(traj)}")
    idx = _window(len(traj), t, tau, pad_history)
    agent = features.rows[idx]
    proprio = traj.action_vectors()[idx]
    if source is Source.ROBOT:
        if wrist is None:
            raise InvalidInput("robot conditions need wrist features")
        wrist_rows = wrist.rows[idx]
    else:
        if wrist_dim is None:
            wrist_dim = 0 if wrist is None else wrist.dim
        wrist_rows = np.zeros((tau, wrist_dim))
    return Condition(agent, wrist_rows, proprio)


def action_chunk(traj: Trajectory, t: int, k: int) -> np.ndarray:
    """Action vectors for steps ``t+1 .. t+k``, holding the last frame past the end."""
    idx = np.minimum(np.arange(t + 1, t + k + 1), len(traj) - 1)
    return traj.action_vectors()[idx]


def mix(human: TrainingSample, robot: TrainingSample, alpha: float) -> TrainingSample:
    """Convex combination ``alpha * human + (1 - alpha) * robot`` of condition and actions."""
    if not 0.0 <= alpha <= 1.0:
        raise InvalidInput(f"alpha must lie in [0, 1], got {alpha}")
    hc, rc = human.condition, robot.condition
    if hc.dims != rc.dims or hc.tau != rc.tau:
        raise DimensionMismatch(f"condition shapes differ: {hc.dims}x{hc.tau} vs {rc.dims}x{rc.tau}")
    if human.actions.shape != robot.actions.shape:
        raise DimensionMismatch(f"action chunks differ: {human.actions.shape} vs {robot.actions.shape}")
    prov = (human.provenance, robot.provenance)
    if alpha == 1.0:
        return TrainingSample(hc, human.actions.copy(), 1.0, prov)
    if alpha == 0.0:
        return TrainingSample(rc, robot.actions.copy(), 0.0, prov)
    b = 1.0 - alpha
    cond = Condition(
        alpha * hc.agent + b * rc.agent,
        alpha * hc.wrist + b * rc.wrist,
        alpha * hc.proprio + b * rc.proprio,
    )
    return TrainingSample(cond, alpha * human.actions + b * robot.actions, float(alpha), prov)


class BatchEmitter:
    """Deterministic co-training batch stream.

    Each batch holds ``batch_size / 2`` raw robot samples followed by
    ``batch_size / 2`` mixed samples. A mixed sample draws a human timestep
    ``t`` uniformly, then a robot timestep uniformly from ``mapping[t]`` (or
    from all robot timesteps when ``mapping_mode="random"``). Randomness comes
    from a generator seeded with ``(seed, epoch)``.

    Robot demos are expected to be resampled to the human time base already.
    """

    def __init__(self, humans, robots, mapping: MappingTable | None, schedule=LinearAnneal(),
                 batch_size: int = 128, seed: int = 0, tau: int = 2, k: int = 32,
                 batches_per_epoch: int | None = None, mapping_mode: str = "table"):
        self.humans = list(humans)
        self.robots = list(robots)
        if not self.humans or not self.robots:
            raise InvalidInput("need at least one human and one robot demo")
        if batch_size < 2 or batch_size % 2:
            raise InvalidInput(f"batch_size must be a positive even number, got {batch_size}")
        if mapping_mode not in ("table", "random"):
            raise InvalidInput(f"unknown mapping mode {mapping_mode!r}")
        if mapping_mode == "table" and mapping is None:
            raise InvalidInput("table mapping mode needs a mapping table")
        for d in self.robots:
            if d.wrist is None:
                raise InvalidInput(f"robot demo {d.demo_id!r} has no wrist features")
        dims = {(d.agent.dim, d.trajectory.n_joints) for d in self.humans + self.robots}
        if len(dims) != 1:
            raise DimensionMismatch(f"demos disagree on feature/joint dimensions: {sorted(dims)}")
        self.wrist_dim = self.robots[0].wrist.dim
        self.mapping = mapping
        self.schedule = schedule
        self.batch_size = batch_size
        self.seed = int(seed)
        self.tau = tau
        self.k = k
        self.mapping_mode = mapping_mode
        self._robot_by_id = {d.demo_id: d for d in self.robots}
        if batches_per_epoch is None:
            steps = max(sum(len(d.trajectory) for d in self.humans), sum(len(d.trajectory) for d in self.robots))
            batches_per_epoch = max(1, steps // (batch_size // 2))
        self.batches_per_epoch = batches_per_epoch

    @property
    def dims(self) -> dict:
        d = self.robots[0]
        d_p = d.trajectory.action_vectors().shape[1]
        return {"tau": self.tau, "d_a": d.agent.dim, "d_w": self.wrist_dim, "d_p": d_p,
                "k": self.k, "action_dim": d_p}

    def _robot_sample(self, demo: Demo, t: int) -> TrainingSample:
        cond = assemble_condition(demo.trajectory, demo.agent, t, self.tau, Source.ROBOT,
                                  wrist=demo.wrist, pad_history=True)
        return TrainingSample(cond, action_chunk(demo.trajectory, t, self.k), 0.0, (demo.demo_id, t))

    def _human_sample(self, demo: Demo, t: int) -> TrainingSample:
        cond = assemble_condition(demo.trajectory, demo.agent, t, self.tau, Source.HUMAN,
                                  wrist_dim=self.wrist_dim, pad_history=True)
        return TrainingSample(cond, action_chunk(demo.trajectory, t, self.k), 1.0, (demo.demo_id, t))

    def batches(self, epoch: int) -> Iterator[list[TrainingSample]]:
        rng = np.random.default_rng([self.seed, int(epoch)])
        half = self.batch_size // 2
        fixed_alpha = None if isinstance(self.schedule, BetaDist) else alpha_at(self.schedule, epoch)
        for _ in range(self.batches_per_epoch):
            batch = []
            for _ in range(half):
                demo = self.robots[rng.integers(len(self.robots))]
                batch.append(self._robot_sample(demo, int(rng.integers(len(demo.trajectory)))))
            for _ in range(half):
                hd = self.humans[rng.integers(len(self.humans))]
                t = int(rng.integers(len(hd.trajectory)))
                if self.mapping_mode == "table":
                    pairs = self.mapping.get(hd.demo_id, t)
                    if not pairs:
                        raise UnmappedTimestep(f"human demo {hd.demo_id!r} step {t} has no mapped robot step")
                    rid, tp = pairs[rng.integers(len(pairs))]
                    rd = self._robot_by_id.get(rid)
                    if rd is None:
                        raise UnmappedTimestep(f"mapping refers to unknown robot demo {rid!r}")
                else:
                    rd = self.robots[rng.integers(len(self.robots))]
                    tp = int(rng.integers(len(rd.trajectory)))
                alpha = fixed_alpha if fixed_alpha is not None else alpha_at(self.schedule, epoch, rng)
                batch.append(mix(self._human_sample(hd, t), self._robot_sample(rd, tp), alpha))
            yield batch


def emit_batches(humans, robots, mapping, schedule, batch_size: int, epoch: int, rng_seed: int,
                 **kwargs) -> Iterator[list[TrainingSample]]:
    return BatchEmitter(humans, robots, mapping, schedule, batch_size, rng_seed, **kwargs).batches(epoch)


def encode_record(condition, actions, domain_alpha: float) -> bytes:
    cond = np.ascontiguousarray(condition, dtype="<f8").reshape(-1)
    acts = np.ascontiguousarray(actions, dtype="<f8")
    k, adim = acts.shape
    return b"".join([
        struct.pack("<I", cond.size), cond.tobytes(),
        struct.pack("<II", k, adim), acts.tobytes(),
        struct.pack("<d", float(domain_alpha)),
    ])


@dataclass(frozen=True)
class BatchRecord:
    condition: np.ndarray  # flattened
    actions: np.ndarray
    domain_alpha: float


def write_records(records, fh) -> int:
    """Write the TRJB header and one record per :class:`TrainingSample` or :class:`BatchRecord`."""
    fh.write(BATCH_MAGIC + struct.pack("<I", BATCH_VERSION))
    n = 0
    for r in records:
        cond = r.condition.flattened if isinstance(r, TrainingSample) else r.condition
        fh.write(encode_record(cond, r.actions, r.domain_alpha))
        n += 1
    return n


def read_records(path) -> list[BatchRecord]:
    buf = Path(path).read_bytes()
    if buf[:4] != BATCH_MAGIC:
        raise InvalidInput(f"{path}: not a TRJB batch file")
    (version,) = struct.unpack_from("<I", buf, 4)
    if version != BATCH_VERSION:
        raise InvalidInput(f"{path}: unsupported TRJB version {version}")
    pos = 8
    out = []
    try:
        while pos < len(buf):
            (clen,) = struct.unpack_from("<I", buf, pos)
            pos += 4
            cond = np.frombuffer(buf, "<f8", clen, pos).astype(float)
            pos += 8 * clen
            k, adim = struct.unpack_from("<II", buf, pos)
            pos += 8
            acts = np.frombuffer(buf, "<f8", k * adim, pos).astype(float).reshape(k, adim)
            pos += 8 * k * adim
            (alpha,) = struct.unpack_from("<d", buf, pos)
            pos += 8
            out.append(BatchRecord(cond, acts, alpha))
    except (struct.error, ValueError) as exc:
        raise InvalidInput(f"{path}: truncated TRJB record at byte {pos}") from exc
    return out


def manifest_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".manifest.json")


def export_dataset(emitter: BatchEmitter, path, epochs: int) -> dict:
    """Write ``epochs`` epochs of batches to a TRJB file plus a JSON manifest.

    With ``epochs=0`` only the manifest is written.
    """
    if epochs < 0:
        raise InvalidInput("epochs must be non-negative")
    path = Path(path)
    n = 0
    if epochs > 0:
        try:
            with open(path, "wb") as fh:
                n = write_records((s for e in range(epochs) for b in emitter.batches(e) for s in b), fh)
        except OSError as exc:
            raise OSError(f"{path}: {exc.strerror or exc}") from exc
    manifest = {
        "format": "TRJB",
        "version": BATCH_VERSION,
        "data": path.name if epochs > 0 else None,
        "records": n,
        "epochs": epochs,
        "batch_size": emitter.batch_size,
        "batches_per_epoch": emitter.batches_per_epoch,
        "seed": emitter.seed,
        "mapping_mode": emitter.mapping_mode,
        "schedule": schedule_to_dict(emitter.schedule),
        "dims": emitter.dims,
    }
    manifest_path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest
