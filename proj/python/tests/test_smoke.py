import json
import pathlib

import pytest

eiffel_sched = pytest.importorskip("eiffel_sched")

CONFIGS = pathlib.Path(__file__).resolve().parents[2] / "configs"


@pytest.mark.parametrize("kind", ["hffs", "cffs", "approx", "bh", "heap"])
def test_queue_pops_in_rank_order(kind):
    q = eiffel_sched.Queue(kind, 256)
    ranks = [17, 3, 200, 3, 64, 0, 99]
    for i, r in enumerate(ranks):
        q.push(r, i)
    assert len(q) == len(ranks)
    assert q.peek() == 0
    got = []
    while (p := q.pop()) is not None:
        got.append(p[0])
    assert got == sorted(ranks)


def test_unknown_queue_is_value_error():
    with pytest.raises(ValueError):
        eiffel_sched.Queue("splay", 16)


def test_bench_row_has_csv_fields():
    row = eiffel_sched.bench("approx", buckets=2000, occupancy=1.0, repetitions=3)
    for key in ("queue", "buckets", "fill_mode", "fill_value", "seed", "mops",
                "mean_abs_err", "p99_abs_err", "mean_search_len"):
        assert key in row
    assert row["mean_abs_err"] == 0.0
    assert row["mops_min"] <= row["mops"] <= row["mops_max"]


def test_error_curve_zero_when_full():
    curve = eiffel_sched.error_curve(occupancies=[0.5, 1.0], seeds=2, probes=3)
    assert curve[1.0] == 0.0
    assert curve[0.5] > 0.0


def test_guide():
    assert eiffel_sched.guide(500)[0] == "heap"
    assert eiffel_sched.guide(50000, "moving", "dense")[0] == "approx"
    assert eiffel_sched.guide(50000, "moving", "sparse")[0] == "cffs"


def test_simulate_pfabric_with_trace():
    tree = (CONFIGS / "pfabric_tree.json").read_text()
    work = json.loads((CONFIGS / "pfabric_workload.json").read_text())
    work["duration_ms"] = 5
    out = eiffel_sched.simulate(tree, json.dumps(work), trace=True)
    assert out["conserved"]
    lines = out["trace_jsonl"].splitlines()
    assert lines
    rec = json.loads(lines[0])
    assert set(rec) == {"time", "event", "flow", "packet", "rank"}


def test_bad_tree_is_value_error():
    with pytest.raises(ValueError):
        eiffel_sched.simulate('{"nodes": []}', "{}")
