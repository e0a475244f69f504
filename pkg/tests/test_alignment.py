import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from hrmap.alignment import MappingTable, build_mapping, dtw
from hrmap.distance import ActionMetric, VisualMetric, cost_matrix
from hrmap.errors import InvalidInput

from helpers import random_traj, smooth_traj
from oracles import dtw_bruteforce, dtw_plain, enumerate_paths

cost_st = hnp.arrays(float, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=st.floats(0, 10))


def check_path(path, n, m, cost):
    p = path.pairs
    assert tuple(p[0]) == (0, 0) and tuple(p[-1]) == (n - 1, m - 1)
    steps = {tuple(s) for s in np.diff(p, axis=0)}
    assert steps <= {(1, 0), (0, 1), (1, 1)}
    total = 0.0
    for i, j in p:
        total += cost[i, j]
    assert total == path.total_cost


def test_dtw_examples(rng):
    C = rng.uniform(1, 2, size=(5, 5))
    np.fill_diagonal(C, 0.0)
    p = dtw(C)
    assert p.total_cost == 0.0
    assert [tuple(x) for x in p.pairs] == [(i, i) for i in range(5)]
    row = rng.uniform(size=(1, 7))
    p = dtw(row)
    assert len(p) == 7 and p.total_cost == pytest.approx(row.sum(), abs=1e-12)
    C = rng.uniform(size=(5, 4))
    assert dtw(C).total_cost == pytest.approx(dtw_bruteforce(C), abs=1e-12)


def test_dtw_errors():
    with pytest.raises(InvalidInput):
        dtw(np.zeros((0, 3)))
    with pytest.raises(InvalidInput):
        dtw([[1.0, np.nan]])


@given(cost_st)
def test_dtw_matches_enumeration(C):
    p = dtw(C)
    check_path(p, *C.shape, C)
    # rounded addition is monotone, so the DP minimum equals the enumerated one exactly
    assert p.total_cost == dtw_bruteforce(C)


@given(cost_st)
def test_dtw_symmetric_and_below_diagonal(C):
    assert dtw(C.T).total_cost == pytest.approx(dtw(C).total_cost, abs=1e-9)
    if C.shape[0] == C.shape[1]:
        assert dtw(C).total_cost <= np.trace(C) + 1e-9


def test_dtw_tie_break_diagonal_first():
    # every path has cost 0, so backtracking must take diagonals first
    p = dtw(np.zeros((3, 5)))
    assert [tuple(x) for x in p.pairs] == [(0, 0), (0, 1), (0, 2), (1, 3), (2, 4)]
    p = dtw(np.zeros((4, 2)))
    assert [tuple(x) for x in p.pairs] == [(0, 0), (1, 0), (2, 0), (3, 1)]


def test_dtw_band(rng):
    C = rng.uniform(size=(20, 20))
    full = dtw(C)
    banded = dtw(C, band=2)
    assert banded.total_cost >= full.total_cost
    assert np.all(np.abs(banded.pairs[:, 0] - banded.pairs[:, 1]) <= 2)
    assert dtw(C, band=100).total_cost == full.total_cost


def test_dtw_plain_oracle_agrees(rng):
    for _ in range(50):
        C = rng.uniform(size=tuple(rng.integers(1, 30, size=2)))
        assert dtw(C).total_cost == pytest.approx(dtw_plain(C), abs=1e-9)


# ----- mapping table


def test_mapping_identical_demo(rng):
    t = smooth_traj(rng, 12, demo_id="h")
    r = type(t)(t.translations, t.quaternions, t.joints, t.dt, t.source, "r")
    table = build_mapping([t], [r])
    for s in range(12):
        assert table.get("h", s) == [("r", s)]


def test_mapping_top_k_picks_copy(rng):
    h = smooth_traj(rng, 15, demo_id="h")
    copy = type(h)(h.translations, h.quaternions, h.joints, h.dt, h.source, "A")
    other = smooth_traj(rng, 15, demo_id="B")
    table = build_mapping([h], [other, copy], top_k=1)
    robots = {rd for s in range(15) for rd, _ in table.get("h", s)}
    assert robots == {"A"}


def test_mapping_size_and_invariants(rng):
    humans = [smooth_traj(rng, int(rng.integers(8, 15)), demo_id=f"h{i}") for i in range(3)]
    robots = [smooth_traj(rng, int(rng.integers(8, 15)), demo_id=f"r{i}") for i in range(2)]
    table = build_mapping(humans, robots)
    paths = {(h.demo_id, r.demo_id): dtw(cost_matrix(h, r, ActionMetric())) for h in humans for r in robots}
    assert len(table) == sum(len(p) for p in paths.values())
    for h in humans:
        for t in range(len(h)):
            pairs = table.get(h.demo_id, t)
            assert pairs
            for rd, tp in pairs:
                assert (t, tp) in set(paths[h.demo_id, rd])


def test_mapping_threads_identical(rng):
    humans = [smooth_traj(rng, 20, demo_id=f"h{i}") for i in range(4)]
    robots = [smooth_traj(rng, 18, demo_id=f"r{i}") for i in range(3)]
    seq = build_mapping(humans, robots, threads=1).to_jsonl()
    for n in (2, 4):
        assert build_mapping(humans, robots, threads=n).to_jsonl() == seq


def test_mapping_visual_metric(rng):
    from hrmap.core import FeatureSequence

    h = [FeatureSequence(rng.normal(size=(6, 3)), "h")]
    r = [FeatureSequence(rng.normal(size=(7, 3)), "r")]
    table = build_mapping(h, r, VisualMetric())
    assert sorted(k[1] for k in table.human_keys()) == list(range(6))


def test_mapping_errors(rng):
    with pytest.raises(InvalidInput):
        build_mapping([], [random_traj(rng, 3)])
    with pytest.raises(InvalidInput):
        build_mapping([random_traj(rng, 3)], [random_traj(rng, 3)], top_k=0)


def test_mapping_jsonl_schema(rng):
    humans = [smooth_traj(rng, 6, demo_id="h")]
    robots = [smooth_traj(rng, 5, demo_id="r")]
    text = build_mapping(humans, robots).to_jsonl()
    lines = text.splitlines()
    assert len(lines) == 6
    for n, line in enumerate(lines):
        rec = json.loads(line)
        assert set(rec) == {"human_demo", "t", "pairs"}
        assert rec["human_demo"] == "h" and rec["t"] == n
        for p in rec["pairs"]:
            assert set(p) == {"robot_demo", "t_prime"}
    again = MappingTable.from_jsonl(text)
    assert again.to_jsonl() == text


def test_mapping_from_jsonl_rejects_garbage():
    with pytest.raises(InvalidInput):
        MappingTable.from_jsonl("{not json}\n")
    with pytest.raises(InvalidInput):
        MappingTable.from_jsonl('{"human_demo": "h"}\n')


# ----- kernels


def test_enumerator_counts():
    # Delannoy numbers
    assert sum(1 for _ in enumerate_paths(3, 3)) == 13
    assert sum(1 for _ in enumerate_paths(4, 4)) == 63


@given(hnp.arrays(float, st.tuples(st.integers(1, 12), st.integers(1, 12)), elements=st.floats(0, 5)))
def test_backends_bitwise_equal(C):
    from hrmap.kernels import available_backends

    mods = list(available_backends().values())
    ref = mods[0]
    for mod in mods[1:]:
        assert np.array_equal(mod.dtw_accumulate(C), ref.dtw_accumulate(C))
        D = ref.dtw_accumulate(C)
        for a, b in zip(mod.dtw_backtrack(D), ref.dtw_backtrack(D)):
            assert np.array_equal(a, b)
        S = ref.sdtw_accumulate(C)
        assert np.array_equal(mod.sdtw_accumulate(C), S)
        j = int(np.argmin(S[-1]))
        for a, b in zip(mod.sdtw_backtrack(S, j), ref.sdtw_backtrack(S, j)):
            assert np.array_equal(a, b)


@given(hnp.arrays(float, st.tuples(st.integers(4, 30), st.integers(1, 6)), elements=st.sampled_from([0.0, 0.5, 1.0, 2.0])),
       st.integers(1, 4), st.integers(0, 4), st.floats(0.1, 2.0))
def test_backends_gms_equal(C, l_min, extra, eps):
    from hrmap.kernels import available_backends

    l_min = min(l_min, C.shape[0])
    mods = list(available_backends().values())
    ref = mods[0].gms_scan(C, l_min, l_min + extra, eps)
    for mod in mods[1:]:
        assert mod.gms_scan(C, l_min, l_min + extra, eps) == ref


def test_backend_kernels_individually(backend, rng):
    C = rng.uniform(size=(6, 5))
    D = backend.dtw_accumulate(C)
    assert D[-1, -1] == pytest.approx(dtw_bruteforce(C), abs=1e-12)
