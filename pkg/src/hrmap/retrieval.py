"""Subsequence DTW and greedy multi-segment retrieval from long sequences."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .alignment import WarpPath, _check_cost
from .distance import ActionMetric, cost_matrix
from .errors import InvalidInput


@dataclass(frozen=True)
class Segment:
    h_start: int
    h_end: int
    r_start: int
    r_end: int
    cost: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class GmsConfig:
    l_min: int
    l_max: int
    epsilon: float

    def __post_init__(self):
        if not (1 <= self.l_min <= self.l_max):
            raise InvalidInput(f"need 1 <= l_min <= l_max, got {self.l_min}, {self.l_max}")
        if not (self.epsilon > 0):
            raise InvalidInput(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class SdtwResult:
    d: float  # cumulative cost / path length
    j_start: int
    j_end: int
    path: WarpPath
    raw_cost: float


def sdtw(query_cost) -> SdtwResult:
    """Match a whole query (rows) against the best contiguous span of the columns.

    The first row is free to start anywhere, the end column is the leftmost
    argmin of the last cumulative row, and the start column is recovered by
    backtracking with the same tie order as :func:`~hrmap.alignment.dtw`.
    """
    c = _check_cost(query_cost)
    D = kernels.sdtw_accumulate(c)
    j_end = int(np.argmin(D[-1]))
    pi, pj = kernels.sdtw_backtrack(D, j_end)
    raw = float(D[-1, j_end])
    path = WarpPath(np.stack([pi, pj], axis=1), raw)
    return SdtwResult(raw / len(pi), int(pj[0]), j_end, path, raw)


def gms_sdtw(human, robot, metric=ActionMetric(), cfg: GmsConfig = None, cost=None) -> list[Segment]:
    """Greedy multi-segment subsequence DTW.

    Scans ``t`` over the human sequence. At each ``t`` every window
    ``human[t : t+L]`` with ``L`` in ``[l_min, min(l_max, remaining)]`` is
    matched against the robot sequence by :func:`sdtw`; the lowest normalized
    cost wins, and on an exact tie the longer window. A winner below
    ``epsilon`` is emitted and the scan jumps past it; otherwise ``t``
    advances by one.

    ``cost`` may be passed to reuse a precomputed ``(T_h, T_r)`` matrix.
    """
    if cfg is None:
        raise InvalidInput("gms_sdtw needs a GmsConfig")
    c = _check_cost(cost if cost is not None else cost_matrix(human, robot, metric))
    if cfg.l_min > c.shape[0]:
        raise InvalidInput(f"l_min={cfg.l_min} exceeds human length {c.shape[0]}")
    raw = kernels.gms_scan(c, int(cfg.l_min), int(cfg.l_max), float(cfg.epsilon))
    return [Segment(int(a), int(b), int(s), int(e), float(d)) for a, b, s, e, d in raw]


def interval_iou(a, b) -> float:
    """IoU of two inclusive integer intervals."""
    inter = min(a[1], b[1]) - max(a[0], b[0]) + 1
    if inter <= 0:
        return 0.0
    union = (a[1] - a[0] + 1) + (b[1] - b[0] + 1) - inter
    return inter / union


def _span(x):
    if isinstance(x, Segment):
        return (x.h_start, x.h_end)
    s, e = int(x[0]), int(x[1])
    return (s, e)


def eval_retrieval(predicted, truth) -> tuple[float, float]:
    """Mean IoU over ground-truth spans and the fraction matched at IoU >= 0.5.

    Predictions and truths are paired one-to-one greedily by descending IoU;
    unmatched truths score 0.
    """
    preds = [_span(p) for p in predicted]
    truths = [_span(t) for t in truth]
    if not truths:
        raise InvalidInput("ground truth must contain at least one span")
    for s, e in preds + truths:
        if e < s:
            raise InvalidInput(f"malformed span ({s}, {e})")
    cands = []
    for ti, t in enumerate(truths):
        for pi, p in enumerate(preds):
            v = interval_iou(p, t)
            if v > 0:
                cands.append((-v, ti, pi))
    cands.sort()
    matched = [0.0] * len(truths)
    used_t, used_p = set(), set()
    for neg, ti, pi in cands:
        if ti in used_t or pi in used_p:
            continue
        used_t.add(ti)
        used_p.add(pi)
        matched[ti] = -neg
    miou = float(np.mean(matched))
    acc = float(np.mean([m >= 0.5 for m in matched]))
    return miou, acc


def segments_to_jsonl(segments) -> str:
    return "".join(json.dumps(s.to_dict()) + "\n" for s in segments)


def read_segments(path) -> list[Segment]:
    out = []
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if line.strip():
            try:
                out.append(Segment(**json.loads(line)))
            except (json.JSONDecodeError, TypeError) as exc:
                raise InvalidInput(f"{path}:{n}: bad segment record: {exc}") from exc
    return out


def read_truth(path) -> list[tuple[int, int]]:
    """Ground truth as a JSON array of ``{"start": s, "end": e}`` (inclusive)."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return [(int(d["start"]), int(d["end"])) for d in data]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"{path}: bad ground-truth file: {exc}") from exc
