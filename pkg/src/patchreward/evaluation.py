"""Batch evaluation of predictions against oracle patches, with stratified means."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .curriculum import assign_bucket
from .dataset import RepairSample
from .metrics import DEFAULT_CONFIG, MetricConfig, ScoreReport, exact_match, score_pair


class UnknownPredictionError(KeyError):
    def __init__(self, ids):
        super().__init__(ids)
        self.ids = list(ids)


@dataclass(frozen=True)
class SampleResult:
    id: object
    report: ScoreReport
    exact_match: bool
    hunks: int
    cwe: str | None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            **self.report.to_dict(),
            "exact_match": self.exact_match,
            "hunks": self.hunks,
            "cwe": self.cwe,
        }


def region_bucket(hunks: int) -> str:
    """Vulnerable-region strata: 1, 2-10, >10 (0 for samples without hunks)."""
    if hunks <= 0:
        return "0"
    if hunks == 1:
        return "1"
    if hunks <= 10:
        return "2-10"
    return ">10"


def curriculum_stratum(hunks: int) -> str:
    return assign_bucket(hunks).value if hunks > 0 else "none"


STRATIFIERS: dict[str, Callable[[SampleResult], str]] = {
    "hunk_regions": lambda r: region_bucket(r.hunks),
    "curriculum": lambda r: curriculum_stratum(r.hunks),
    "cwe": lambda r: r.cwe if r.cwe else "unknown",
}


def _summary(rows: list[SampleResult]) -> dict:
    n = len(rows)
    return {
        "count": n,
        "mean_codebleu": sum(r.report.codebleu for r in rows) / n,
        "mean_reward": sum(r.report.reward for r in rows) / n,
        "exact_match_rate": sum(r.exact_match for r in rows) / n,
    }


@dataclass
class EvalReport:
    per_sample: list[SampleResult]
    aggregates: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"per_sample": [r.to_dict() for r in self.per_sample], "aggregates": self.aggregates}


def aggregate(rows: list[SampleResult]) -> dict:
    if not rows:
        return {"overall": {"count": 0, "mean_codebleu": 0.0, "mean_reward": 0.0, "exact_match_rate": 0.0}}
    out: dict = {"overall": _summary(rows)}
    for name, key in STRATIFIERS.items():
        strata: dict[str, list] = defaultdict(list)
        for row in rows:
            strata[key(row)].append(row)
        out[name] = {k: _summary(v) for k, v in sorted(strata.items())}
    return out


def _score_job(args) -> tuple[ScoreReport, bool]:
    prediction, oracle, cfg = args
    return score_pair(prediction, oracle, cfg), exact_match(prediction, oracle)


def evaluate(
    samples: Iterable[RepairSample],
    predictions: Mapping[object, str],
    cfg: MetricConfig = DEFAULT_CONFIG,
    map_fn: Callable = map,
) -> EvalReport:
    """Score every predicted sample against its ``fixed_fn``.

    Rows follow dataset order. Raises :class:`UnknownPredictionError` when a
    prediction id has no sample.
    """
    samples = list(samples)
    known = {s.id for s in samples}
    unknown = [pid for pid in predictions if pid not in known]
    if unknown:
        raise UnknownPredictionError(unknown)
    todo = [s for s in samples if s.id in predictions]
    scored = map_fn(_score_job, [(predictions[s.id], s.fixed_fn, cfg) for s in todo])
    rows = [SampleResult(s.id, rep, em, s.hunks, s.cwe) for s, (rep, em) in zip(todo, scored)]
    return EvalReport(rows, aggregate(rows))
