"""Hunk-count difficulty buckets and the cumulative three-stage schedule."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

VUL_START = "<vul_start>"
VUL_END = "<vul_end>"


class MarkerError(ValueError):
    """Localization markers are unmatched, nested or out of order."""


class Bucket(str, enum.Enum):
    EASY = "easy"
    MEDIUM = "medium"
    HARD = "hard"


STAGE_ORDER = (Bucket.EASY, Bucket.MEDIUM, Bucket.HARD)


def count_hunks(marked_text: str) -> int:
    """Number of well-formed, non-nested ``<vul_start>``/``<vul_end>`` pairs."""
    count = 0
    open_at = None
    pos = 0
    while True:
        s = marked_text.find(VUL_START, pos)
        e = marked_text.find(VUL_END, pos)
        if s < 0 and e < 0:
            break
        if e < 0 or (0 <= s < e):
            if open_at is not None:
                raise MarkerError(f"nested {VUL_START} at offset {s}")
            open_at = s
            pos = s + len(VUL_START)
        else:
            if open_at is None:
                raise MarkerError(f"{VUL_END} without {VUL_START} at offset {e}")
            open_at = None
            count += 1
            pos = e + len(VUL_END)
    if open_at is not None:
        raise MarkerError(f"unclosed {VUL_START} at offset {open_at}")
    return count


def assign_bucket(hunks: int) -> Bucket:
    if hunks <= 0:
        raise ValueError(f"a training sample needs at least one hunk, got {hunks}")
    if hunks <= 2:
        return Bucket.EASY
    if hunks <= 5:
        return Bucket.MEDIUM
    return Bucket.HARD


def id_sort_key(sample_id):
    if isinstance(sample_id, int) and not isinstance(sample_id, bool):
        return (0, sample_id, "")
    return (1, 0, str(sample_id))


@dataclass(frozen=True)
class CurriculumSchedule:
    stages: tuple[tuple[str, tuple], ...]
    cumulative: bool = True

    def to_dict(self) -> dict:
        return {"stages": [{"name": name, "ids": list(ids)} for name, ids in self.stages]}

    def stage(self, name: str) -> tuple:
        for stage_name, ids in self.stages:
            if stage_name == name:
                return ids
        raise KeyError(name)


def build_schedule(samples: Iterable) -> CurriculumSchedule:
    """Stage k holds every sample whose bucket is at most the k-th bucket.

    ``samples`` are objects with ``id`` and ``hunks`` attributes.
    """
    by_bucket: dict[Bucket, list] = {b: [] for b in STAGE_ORDER}
    for sample in samples:
        by_bucket[assign_bucket(sample.hunks)].append(sample.id)
    stages = []
    acc: list = []
    for bucket in STAGE_ORDER:
        acc = acc + by_bucket[bucket]
        stages.append((bucket.value, tuple(sorted(acc, key=id_sort_key))))
    return CurriculumSchedule(tuple(stages))
