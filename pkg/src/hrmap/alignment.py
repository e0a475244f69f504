"""Full-sequence DTW and the human-to-robot timestep mapping table."""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .distance import ActionMetric, cost_matrix
from .errors import InvalidInput


@dataclass(frozen=True)
class WarpPath:
    """Monotone alignment from ``(0, 0)`` to ``(T_a - 1, T_b - 1)``."""

    pairs: np.ndarray  # (n, 2) int
    total_cost: float

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return ((int(i), int(j)) for i, j in self.pairs)


def _check_cost(cost) -> np.ndarray:
    c = np.asarray(cost, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] == 0 or c.shape[1] == 0:
        raise InvalidInput(f"cost matrix must be non-empty 2-D, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise InvalidInput("cost matrix has non-finite entries")
    return c


def sakoe_chiba_mask(n: int, m: int, band: int) -> np.ndarray:
    """Boolean mask of cells within ``band`` of the slope-corrected diagonal."""
    i = np.arange(n)[:, None]
    j = np.arange(m)[None, :]
    centre = i * (m - 1) / max(n - 1, 1)
    return np.abs(j - centre) <= band + 1e-9


def dtw(cost, band: int | None = None) -> WarpPath:
    """Minimum-cost monotone path with steps (1,0), (0,1), (1,1).

    Backtracking prefers the diagonal predecessor, then ``(i-1, j)``, then
    ``(i, j-1)`` when cumulative costs tie.

    Parameters
    ----------
    cost
        ``(T_a, T_b)`` matrix of non-negative frame distances.
    band
        Optional Sakoe-Chiba half-width in columns. Cells outside it are
        unreachable.
    """
    c = _check_cost(cost)
    if band is not None:
        c = np.where(sakoe_chiba_mask(*c.shape, band), c, np.inf)
    D = kernels.dtw_accumulate(c)
    total = float(D[-1, -1])
    if not np.isfinite(total):
        raise InvalidInput(f"band {band} leaves no admissible path")
    pi, pj = kernels.dtw_backtrack(D)
    return WarpPath(np.stack([pi, pj], axis=1), total)


@dataclass
class MappingTable:
    """For each ``(human_demo, t)`` the robot ``(robot_demo, t')`` pairs aligned to it."""

    entries: dict = field(default_factory=dict)

    def add(self, human_demo: str, t: int, robot_demo: str, t_prime: int) -> None:
        self.entries.setdefault((human_demo, int(t)), []).append((robot_demo, int(t_prime)))

    def get(self, human_demo: str, t: int) -> list:
        return self.entries.get((human_demo, int(t)), [])

    def __contains__(self, key) -> bool:
        return (key[0], int(key[1])) in self.entries

    def __len__(self) -> int:
        return sum(len(v) for v in self.entries.values())

    def human_keys(self) -> list:
        return list(self.entries)

    def to_jsonl(self) -> str:
        lines = []
        for (hd, t), pairs in self.entries.items():
            rec = {
                "human_demo": hd,
                "t": t,
                "pairs": [{"robot_demo": rd, "t_prime": tp} for rd, tp in pairs],
            }
            lines.append(json.dumps(rec))
        return "".join(line + "\n" for line in lines)

    @classmethod
    def from_jsonl(cls, text: str) -> "MappingTable":
        table = cls()
        for n, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                key = (str(rec["human_demo"]), int(rec["t"]))
                pairs = [(str(p["robot_demo"]), int(p["t_prime"])) for p in rec["pairs"]]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise InvalidInput(f"mapping line {n}: {exc}") from exc
            if not pairs:
                raise InvalidInput(f"mapping line {n}: human timestep has no pairs")
            table.entries.setdefault(key, []).extend(pairs)
        return table

    def write(self, path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")

    @classmethod
    def read(cls, path) -> "MappingTable":
        return cls.from_jsonl(Path(path).read_text(encoding="utf-8"))


def _demo_id(seq, fallback: str) -> str:
    return getattr(seq, "demo_id", "") or fallback


def build_mapping(humans, robots, metric=ActionMetric(), top_k: int | None = None,
                  threads: int = 1, band: int | None = None) -> MappingTable:
    """Align every human demo with the robot demos and collect the path pairs.

    With ``top_k`` set, only the ``top_k`` robot demos with the lowest total DTW
    cost contribute for each human demo (ties keep input order). Pairs are
    inserted in human order, then timestep, then robot order, so the table is
    the same for any ``threads``.
    """
    humans, robots = list(humans), list(robots)
    if not humans or not robots:
        raise InvalidInput("build_mapping needs at least one human and one robot demo")
    if top_k is not None and top_k < 1:
        raise InvalidInput(f"top_k must be >= 1, got {top_k}")
    h_ids = [_demo_id(h, f"human{i}") for i, h in enumerate(humans)]
    r_ids = [_demo_id(r, f"robot{i}") for i, r in enumerate(robots)]

    def align(pair):
        hi, ri = pair
        return dtw(cost_matrix(humans[hi], robots[ri], metric), band=band)

    jobs = [(hi, ri) for hi in range(len(humans)) for ri in range(len(robots))]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            paths = list(pool.map(align, jobs))
    else:
        paths = [align(j) for j in jobs]
    by_pair = dict(zip(jobs, paths))

    table = MappingTable()
    for hi in range(len(humans)):
        chosen = list(range(len(robots)))
        if top_k is not None:
            chosen = sorted(chosen, key=lambda ri: by_pair[hi, ri].total_cost)[:top_k]
            chosen.sort()
        per_t: dict[int, list] = {}
        for ri in chosen:
            for i, j in by_pair[hi, ri]:
                per_t.setdefault(i, []).append((r_ids[ri], j))
        for t in sorted(per_t):
            for rd, tp in per_t[t]:
                table.add(h_ids[hi], t, rd, tp)
    return table
