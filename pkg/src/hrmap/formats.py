"""Trajectory JSON and the ``TRJF`` feature binary format."""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .core import FeatureSequence, Source, Trajectory
from .errors import InvalidInput

FEATURE_MAGIC = b"TRJF"
FEATURE_VERSION = 1


def trajectory_to_dict(traj: Trajectory) -> dict:
    return {
        "dt": traj.dt,
        "source": traj.source.value,
        "demo_id": traj.demo_id,
        "frames": [
            {
                "translation": traj.translations[i].tolist(),
                "quaternion": traj.quaternions[i].tolist(),
                "joints": traj.joints[i].tolist(),
            }
            for i in range(len(traj))
        ],
    }


def trajectory_from_dict(d: dict) -> Trajectory:
    try:
        frames = d["frames"]
        if not frames:
            raise InvalidInput("trajectory has no frames")
        return Trajectory(
            np.array([f["translation"] for f in frames], dtype=float),
            np.array([f["quaternion"] for f in frames], dtype=float),
            np.array([f.get("joints", []) for f in frames], dtype=float).reshape(len(frames), -1),
            d["dt"],
            Source(d.get("source", "robot")),
            d.get("demo_id", ""),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidInput):
            raise
        raise InvalidInput(f"malformed trajectory record: {exc}") from exc


def dumps_trajectory(traj: Trajectory) -> str:
    return json.dumps(trajectory_to_dict(traj)) + "\n"


def write_trajectory(traj: Trajectory, path) -> None:
    Path(path).write_text(dumps_trajectory(traj), encoding="utf-8")


def read_trajectory(path) -> Trajectory:
    with open(path, encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidInput(f"{path}: invalid JSON: {exc}") from exc
    return trajectory_from_dict(d)


def features_to_bytes(fs: FeatureSequence) -> bytes:
    rows, dim = fs.rows.shape
    header = FEATURE_MAGIC + struct.pack("<III", FEATURE_VERSION, rows, dim)
    return header + fs.rows.astype("<f4").tobytes(order="C")


def features_from_bytes(buf: bytes, demo_id: str = "") -> FeatureSequence:
    if len(buf) < 16 or buf[:4] != FEATURE_MAGIC:
        raise InvalidInput("not a TRJF feature file")
    version, rows, dim = struct.unpack_from("<III", buf, 4)
    if version != FEATURE_VERSION:
        raise InvalidInput(f"unsupported TRJF version {version}")
    expected = 16 + 4 * rows * dim
    if len(buf) != expected:
        raise InvalidInput(f"TRJF payload size {len(buf)} does not match header ({expected})")
    data = np.frombuffer(buf, dtype="<f4", offset=16).reshape(rows, dim)
    return FeatureSequence(data.astype(float), demo_id)


def write_features(fs: FeatureSequence, path) -> None:
    Path(path).write_bytes(features_to_bytes(fs))


def read_features(path, demo_id: str | None = None) -> FeatureSequence:
    path = Path(path)
    return features_from_bytes(path.read_bytes(), path.stem if demo_id is None else demo_id)
