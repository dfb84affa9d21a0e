import random
from types import SimpleNamespace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from patchreward.curriculum import Bucket, MarkerError, assign_bucket, build_schedule, count_hunks


def sample(i, hunks):
    return SimpleNamespace(id=i, hunks=hunks)


def test_bucket_table():
    table = {1: "easy", 2: "easy", 3: "medium", 4: "medium", 5: "medium", 6: "hard", 7: "hard", 100: "hard"}
    for hunks, expected in table.items():
        assert assign_bucket(hunks) == Bucket(expected)


def test_bucket_rejects_zero():
    with pytest.raises(ValueError):
        assign_bucket(0)


def test_count_hunks():
    assert count_hunks("x") == 0
    assert count_hunks("<vul_start>\na\n<vul_end>\nb\n<vul_start>\nc\n<vul_end>\n") == 2
    for bad in ("<vul_start> x <vul_start> y <vul_end>", "<vul_end>", "<vul_start>", "<vul_end><vul_start>"):
        with pytest.raises(MarkerError):
            count_hunks(bad)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.text(alphabet="ab\n ", max_size=5), max_size=8))
def test_count_equals_start_occurrences(chunks):
    text = "".join(f"{c}<vul_start>{c}<vul_end>" for c in chunks)
    assert count_hunks(text) == text.count("<vul_start>")


def test_schedule_one_per_bucket():
    sched = build_schedule([sample("c", 7), sample("a", 1), sample("b", 3)])
    assert [len(ids) for _, ids in sched.stages] == [1, 2, 3]
    assert sched.to_dict() == {
        "stages": [
            {"name": "easy", "ids": ["a"]},
            {"name": "medium", "ids": ["a", "b"]},
            {"name": "hard", "ids": ["a", "b", "c"]},
        ]
    }
    assert sched.stage("medium") == ("a", "b")


def test_all_easy_gives_identical_stages():
    sched = build_schedule([sample(i, 1 + i % 2) for i in range(5)])
    assert len({ids for _, ids in sched.stages}) == 1


def test_mixed_ids_sort_deterministically():
    sched = build_schedule([sample("x", 1), sample(10, 1), sample(2, 1)])
    assert sched.stage("easy") == (2, 10, "x")


def test_schedule_propagates_bucket_errors():
    with pytest.raises(ValueError):
        build_schedule([sample(1, 0)])


def test_inclusion_chain_random():
    rng = random.Random(31)
    for _ in range(100):
        samples = [sample(i, rng.randint(1, 12)) for i in range(100)]
        s1, s2, s3 = (set(ids) for _, ids in build_schedule(samples).stages)
        assert s1 <= s2 <= s3 == {s.id for s in samples}
