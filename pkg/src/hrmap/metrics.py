"""Movement smoothness (SPARC) and the DTW-based action distance."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .alignment import dtw
from .core import Trajectory
from .distance import ActionDistanceWeights, ActionMetric, cost_matrix
from .errors import DegenerateProfile, InsufficientData, InvalidInput
from .geometry import rot_distance_rows


@dataclass(frozen=True)
class SparcConfig:
    pad_factor: int = 4
    omega_c_max: float = 15.0  # Hz
    amp_threshold: float = 0.05

    def __post_init__(self):
        if self.pad_factor < 1:
            raise InvalidInput("pad_factor must be >= 1")
        if not self.omega_c_max > 0:
            raise InvalidInput("omega_c_max must be positive")
        if not 0 < self.amp_threshold < 1:
            raise InvalidInput("amp_threshold must lie in (0, 1)")


def speed_profile(traj: Trajectory) -> np.ndarray:
    """Finite-difference translational speed, length ``T - 1``."""
    if len(traj) < 2:
        raise InsufficientData("speed profile needs at least two frames")
    return np.linalg.norm(np.diff(traj.translations, axis=0), axis=1) / traj.dt


def sparc(speed, dt: float, cfg: SparcConfig = SparcConfig()) -> tuple[float, float]:
    """Spectral arc length of a speed profile.

    Returns ``(sparc, omega_c)``. The profile is zero-padded to
    ``pad_factor * next_pow2(T)`` samples and its magnitude spectrum is
    normalized by the DC bin. The cutoff is the highest frequency bin whose
    normalized magnitude is still at least ``amp_threshold``, capped at
    ``omega_c_max``. The result is minus the length of the normalized spectrum
    curve over ``[0, omega_c]``, with frequency rescaled by ``1 / omega_c``.
    """
    s = np.asarray(speed, dtype=float).reshape(-1)
    if len(s) < 4:
        raise InsufficientData("SPARC needs at least four speed samples")
    if not np.all(np.isfinite(s)):
        raise InvalidInput("speed profile has non-finite values")
    if not (dt > 0 and np.isfinite(dt)):
        raise InvalidInput("dt must be positive")
    nfft = cfg.pad_factor * (1 << int(np.ceil(np.log2(len(s)))))
    mag = np.abs(np.fft.rfft(s, nfft))
    if mag[0] == 0.0:
        raise DegenerateProfile("speed profile has zero DC component")
    mag = mag / mag[0]
    freq = np.arange(len(mag)) / (nfft * dt)

    above = np.nonzero(mag >= cfg.amp_threshold)[0]
    omega_c = min(cfg.omega_c_max, float(freq[above[-1]]))
    keep = freq <= omega_c
    f_sel, m_sel = freq[keep], mag[keep]
    if len(f_sel) < 2:
        # cutoff inside the first bin: a flat band of unit length
        return -1.0, omega_c
    df = np.diff(f_sel) / omega_c
    dm = np.diff(m_sel)
    return -float(np.sum(np.sqrt(df * df + dm * dm))), omega_c


def _pair_distance(h: Trajectory, r: Trajectory, weights: ActionDistanceWeights) -> float:
    path = dtw(cost_matrix(h, r, ActionMetric(weights)))
    i, j = path.pairs[:, 0], path.pairs[:, 1]
    trans = np.abs(h.translations[i] - r.translations[j]).sum(axis=1)
    rot = rot_distance_rows(h.quaternions[i], r.quaternions[j])
    return float(np.mean(trans + weights.lambda2 * rot))


def action_distance(humans, robots, weights: ActionDistanceWeights = ActionDistanceWeights(),
                    threads: int = 1) -> float:
    """Mean over all (human, robot) demo pairs of the per-step translation and
    orientation distance along their DTW path."""
    humans, robots = list(humans), list(robots)
    if not humans or not robots:
        raise InvalidInput("action distance needs non-empty demo sets")
    return _mean_pairs([(h, r) for h in humans for r in robots], weights, threads)


def intra_action_distance(demos, weights: ActionDistanceWeights = ActionDistanceWeights(),
                          threads: int = 1) -> float:
    """Action distance over distinct pairs within one dataset (diversity statistic)."""
    demos = list(demos)
    if len(demos) < 2:
        raise InsufficientData("intra-dataset distance needs at least two demos")
    pairs = [(demos[a], demos[b]) for a in range(len(demos)) for b in range(a + 1, len(demos))]
    return _mean_pairs(pairs, weights, threads)


def _mean_pairs(pairs, weights, threads) -> float:
    def one(p):
        return _pair_distance(p[0], p[1], weights)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            vals = list(pool.map(one, pairs))
    else:
        vals = [one(p) for p in pairs]
    return float(np.mean(vals))
