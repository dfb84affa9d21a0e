"""Repair dataset construction: hunks, localization markers, dedup, repo splits."""

from __future__ import annotations

import random
import re
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .curriculum import VUL_END, VUL_START, count_hunks, id_sort_key

SPLIT_NAMES = ("train", "val", "test")
DEFAULT_RATIOS = (0.8, 0.1, 0.1)

_START_LINE = VUL_START + "\n"
_END_LINE = VUL_END + "\n"
_END_AT_EOF = "\n" + VUL_END


class DataError(ValueError):
    """Input records violate the dataset contract."""


class Hunk(NamedTuple):
    """Inclusive 1-based line range in the vulnerable function."""

    start: int
    end: int


def split_lines(text: str) -> list[str]:
    """Lines with their ``\\n`` kept; no phantom empty line after a final newline."""
    parts = text.split("\n")
    lines = [p + "\n" for p in parts[:-1]]
    if parts[-1]:
        lines.append(parts[-1])
    return lines


def _bare_lines(text: str) -> list[str]:
    return [line.rstrip("\n") for line in split_lines(text)]


# -- diffing -------------------------------------------------------------------


def lcs_matches(a: Sequence[str], b: Sequence[str]) -> list[tuple[int, int]]:
    """Index pairs of one longest common subsequence of ``a`` and ``b``.

    Ties prefer deleting from ``a`` first, which keeps the output stable.
    """
    n, m = len(a), len(b)
    pre = 0
    while pre < n and pre < m and a[pre] == b[pre]:
        pre += 1
    suf = 0
    while suf < n - pre and suf < m - pre and a[n - 1 - suf] == b[m - 1 - suf]:
        suf += 1
    a_mid, b_mid = a[pre : n - suf], b[pre : m - suf]
    p, q = len(a_mid), len(b_mid)
    # table[i][j] = LCS length of a_mid[i:] and b_mid[j:]
    table = [[0] * (q + 1) for _ in range(p + 1)]
    for i in range(p - 1, -1, -1):
        row, below = table[i], table[i + 1]
        ai = a_mid[i]
        for j in range(q - 1, -1, -1):
            if ai == b_mid[j]:
                row[j] = below[j + 1] + 1
            else:
                row[j] = below[j] if below[j] >= row[j + 1] else row[j + 1]
    matches = [(k, k) for k in range(pre)]
    i = j = 0
    while i < p and j < q:
        if a_mid[i] == b_mid[j]:
            matches.append((pre + i, pre + j))
            i += 1
            j += 1
        elif table[i + 1][j] >= table[i][j + 1]:
            i += 1
        else:
            j += 1
    matches.extend((n - suf + k, m - suf + k) for k in range(suf))
    return matches


def diff_hunks(vulnerable_fn: str, fixed_fn: str) -> list[Hunk]:
    """Changed regions of ``vulnerable_fn`` relative to ``fixed_fn``.

    Each maximal run of deleted/changed vulnerable lines is one hunk. A pure
    insertion is anchored to the vulnerable line preceding it (the first line
    when the insertion is at the very top).
    """
    if not vulnerable_fn or not fixed_fn:
        raise DataError("both functions must be non-empty")
    a, b = _bare_lines(vulnerable_fn), _bare_lines(fixed_fn)
    matches = lcs_matches(a, b) + [(len(a), len(b))]
    ranges: list[list[int]] = []
    prev_a, prev_b = -1, -1
    for ia, ib in matches:
        deleted = ia - prev_a - 1
        inserted = ib - prev_b - 1
        if deleted > 0:
            # 0-based [prev_a + 1, ia - 1] -> 1-based inclusive
            ranges.append([prev_a + 2, ia])
        elif inserted > 0 and a:
            anchor = max(prev_a, 0) + 1
            ranges.append([anchor, anchor])
        prev_a, prev_b = ia, ib
    merged: list[list[int]] = []
    for start, end in sorted(ranges):
        if merged and start <= merged[-1][1] + 1:
            merged[-1][1] = max(merged[-1][1], end)
        else:
            merged.append([start, end])
    return [Hunk(s, e) for s, e in merged]


# -- markers -------------------------------------------------------------------


def insert_markers(vulnerable_fn: str, hunks: Iterable[tuple[int, int]]) -> str:
    """Bracket each hunk's lines with ``<vul_start>``/``<vul_end>`` marker lines."""
    if VUL_START in vulnerable_fn or VUL_END in vulnerable_fn:
        raise DataError("text already contains localization markers")
    lines = split_lines(vulnerable_fn)
    hunks = [Hunk(*h) for h in hunks]
    last = 0
    for h in hunks:
        if h.start < 1 or h.end > len(lines) or h.start > h.end:
            raise DataError(f"hunk {tuple(h)} outside lines 1..{len(lines)}")
        if h.start <= last:
            raise DataError(f"hunk {tuple(h)} overlaps or is out of order")
        last = h.end
    out = []
    starts = {h.start for h in hunks}
    ends = {h.end for h in hunks}
    for lineno, line in enumerate(lines, start=1):
        if lineno in starts:
            out.append(_START_LINE)
        out.append(line)
        if lineno in ends:
            out.append(_END_LINE if line.endswith("\n") else _END_AT_EOF)
    return "".join(out)


def strip_markers(marked_fn: str) -> str:
    """Inverse of :func:`insert_markers`."""
    text = marked_fn
    if text.endswith(_END_AT_EOF):
        text = text[: -len(_END_AT_EOF)]
    return text.replace(_START_LINE, "").replace(_END_LINE, "")


# -- samples -------------------------------------------------------------------


@dataclass(frozen=True)
class RepairSample:
    id: object
    repo: str
    cwe: str | None
    vulnerable_fn: str
    fixed_fn: str
    marked_fn: str
    hunks: int

    @classmethod
    def build(cls, id, repo, vulnerable_fn, fixed_fn, cwe=None) -> "RepairSample":
        marked = insert_markers(vulnerable_fn, diff_hunks(vulnerable_fn, fixed_fn))
        return cls(id, repo, cwe, vulnerable_fn, fixed_fn, marked, count_hunks(marked))

    @classmethod
    def from_dict(cls, record: dict) -> "RepairSample":
        """Load a record; ``marked_fn``/``hunks`` are derived when absent."""
        missing = [k for k in ("id", "repo", "vulnerable_fn", "fixed_fn") if k not in record]
        if missing:
            raise DataError(f"record missing fields: {', '.join(missing)}")
        if "marked_fn" not in record:
            return cls.build(record["id"], record["repo"], record["vulnerable_fn"], record["fixed_fn"], record.get("cwe"))
        sample = cls(
            record["id"],
            record["repo"],
            record.get("cwe"),
            record["vulnerable_fn"],
            record["fixed_fn"],
            record["marked_fn"],
            record["hunks"] if "hunks" in record else count_hunks(record["marked_fn"]),
        )
        sample.validate()
        return sample

    def validate(self) -> None:
        try:
            hunks = count_hunks(self.marked_fn)
        except ValueError as exc:
            raise DataError(f"sample {self.id!r}: {exc}") from exc
        if hunks != self.hunks:
            raise DataError(f"sample {self.id!r}: hunks={self.hunks} but markers give {hunks}")
        if strip_markers(self.marked_fn) != self.vulnerable_fn:
            raise DataError(f"sample {self.id!r}: marked_fn does not strip back to vulnerable_fn")

    def to_dict(self) -> dict:
        return asdict(self)


_WS = re.compile(r"\s+")


def _normalize(code: str) -> str:
    return _WS.sub(" ", code).strip()


def dedup(samples: Iterable[RepairSample]) -> list[RepairSample]:
    """Drop later samples whose whitespace-normalized (vulnerable, fixed) pair repeats."""
    seen = set()
    out = []
    for sample in samples:
        key = (_normalize(sample.vulnerable_fn), _normalize(sample.fixed_fn))
        if key in seen:
            continue
        seen.add(key)
        out.append(sample)
    return out


# -- repository-level split ----------------------------------------------------


@dataclass(frozen=True)
class SplitManifest:
    train: tuple
    val: tuple
    test: tuple
    repo_assignment: dict[str, str]
    ratios: tuple[float, float, float] = DEFAULT_RATIOS
    achieved_ratios: dict[str, float] = field(default_factory=dict)

    def split_of(self, name: str) -> tuple:
        return getattr(self, name)

    def to_dict(self) -> dict:
        return {
            "train": list(self.train),
            "val": list(self.val),
            "test": list(self.test),
            "repo_assignment": dict(sorted(self.repo_assignment.items())),
            "ratios": list(self.ratios),
            "achieved_ratios": dict(self.achieved_ratios),
        }


def repo_split(
    samples: Sequence[RepairSample],
    ratios: Sequence[float] = DEFAULT_RATIOS,
    seed: int | None = None,
) -> SplitManifest:
    """Assign whole repositories to train/val/test, largest repositories first.

    Each repository goes to the split whose sample deficit against its target
    is largest (ties: train, val, test). Repositories of equal size are taken
    in repo-id order, or in a seeded shuffle of that order when ``seed`` is
    given. Splits are never left empty.
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or any(r <= 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise DataError("ratios must be three positive numbers summing to 1")
    by_repo: dict[str, list] = defaultdict(list)
    for s in samples:
        by_repo[s.repo].append(s.id)
    if len(by_repo) < 3:
        raise DataError(f"need at least 3 repositories, got {len(by_repo)}")

    sizes = Counter({repo: len(ids) for repo, ids in by_repo.items()})
    groups: dict[int, list[str]] = defaultdict(list)
    for repo in sorted(sizes):
        groups[sizes[repo]].append(repo)
    rng = random.Random(seed) if seed is not None else None
    order: list[str] = []
    for size in sorted(groups, reverse=True):
        tied = groups[size]
        if rng is not None:
            rng.shuffle(tied)
        order.extend(tied)

    total = sum(sizes.values())
    targets = [r * total for r in ratios]
    assigned = [0, 0, 0]
    repo_count = [0, 0, 0]
    assignment: dict[str, str] = {}
    for remaining, repo in zip(range(len(order), 0, -1), order):
        candidates = [0, 1, 2]
        empty = [k for k in candidates if repo_count[k] == 0]
        if empty and remaining <= len(empty):
            candidates = empty
        k = max(candidates, key=lambda c: (targets[c] - assigned[c], -c))
        assignment[repo] = SPLIT_NAMES[k]
        assigned[k] += sizes[repo]
        repo_count[k] += 1

    parts: dict[str, list] = {name: [] for name in SPLIT_NAMES}
    for repo, ids in by_repo.items():
        parts[assignment[repo]].extend(ids)
    for name in SPLIT_NAMES:
        parts[name].sort(key=id_sort_key)
    achieved = {name: len(parts[name]) / total for name in SPLIT_NAMES}
    return SplitManifest(
        tuple(parts["train"]),
        tuple(parts["val"]),
        tuple(parts["test"]),
        assignment,
        ratios,
        achieved,
    )
