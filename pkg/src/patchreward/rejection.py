"""Schema validation and similarity filtering of reason-then-patch responses."""

from __future__ import annotations

import enum
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .metrics import DEFAULT_CONFIG, EmptyOracleError, MetricConfig, codebleu

DEFAULT_THRESHOLD = 0.5

REASON_OPEN, REASON_CLOSE = "<reason>", "</reason>"
PATCH_OPEN, PATCH_CLOSE = "<patch>", "</patch>"
_CANONICAL_TAGS = (REASON_OPEN, REASON_CLOSE, PATCH_OPEN, PATCH_CLOSE)
# Anything that looks like one of our tags, including near-misses such as
# "<Reason>", "< patch >" or "<patch lang=c>".
_TAG_LIKE = re.compile(r"<\s*/?\s*(?:reason|patch)\b[^<>]*>", re.IGNORECASE)


class SchemaErrorKind(str, enum.Enum):
    MISSING_REASON = "MissingReason"
    MISSING_PATCH = "MissingPatch"
    MISORDERED = "Misordered"
    MALFORMED = "Malformed"
    DUPLICATE_TAG = "DuplicateTag"
    EMPTY_SECTION = "EmptySection"


@dataclass(frozen=True)
class SchemaError:
    kind: SchemaErrorKind
    detail: str = ""


@dataclass(frozen=True)
class ParsedResponse:
    reason: str
    patch: str

    def serialize(self) -> str:
        return f"{REASON_OPEN}{self.reason}{REASON_CLOSE}{PATCH_OPEN}{self.patch}{PATCH_CLOSE}"


def _error(kind: SchemaErrorKind, detail: str) -> SchemaError:
    return SchemaError(kind, detail)


def parse_response(text: str) -> ParsedResponse | SchemaError:
    """Validate ``[preamble]<reason>...</reason><patch>...</patch>[whitespace]``.

    Returns a :class:`SchemaError` (never raises) naming the most specific
    violation.
    """
    found = list(_TAG_LIKE.finditer(text))
    for m in found:
        if m.group() not in _CANONICAL_TAGS:
            return _error(SchemaErrorKind.MALFORMED, f"unrecognized tag {m.group()!r} at offset {m.start()}")
    counts = Counter(m.group() for m in found)
    dup = [t for t in _CANONICAL_TAGS if counts[t] > 1]
    if dup:
        return _error(SchemaErrorKind.DUPLICATE_TAG, f"{dup[0]} appears {counts[dup[0]]} times")

    has = {t: counts[t] == 1 for t in _CANONICAL_TAGS}
    if not has[REASON_OPEN] and not has[REASON_CLOSE]:
        return _error(SchemaErrorKind.MISSING_REASON, "no <reason> section")
    if not has[PATCH_OPEN] and not has[PATCH_CLOSE]:
        return _error(SchemaErrorKind.MISSING_PATCH, "no <patch> section")
    for open_tag, close_tag in ((REASON_OPEN, REASON_CLOSE), (PATCH_OPEN, PATCH_CLOSE)):
        if has[open_tag] != has[close_tag]:
            present = open_tag if has[open_tag] else close_tag
            return _error(SchemaErrorKind.MALFORMED, f"unpaired {present}")

    pos = {m.group(): m for m in found}
    ro, rc, po, pc = (pos[t] for t in _CANONICAL_TAGS)
    reason_ok = ro.start() < rc.start()
    patch_ok = po.start() < pc.start()
    if not (reason_ok and patch_ok):
        return _error(SchemaErrorKind.MALFORMED, "closing tag before its opening tag")
    if pc.start() < ro.start():
        return _error(SchemaErrorKind.MISORDERED, "<patch> section precedes <reason> section")
    if not rc.start() < po.start():
        return _error(SchemaErrorKind.MALFORMED, "<reason> and <patch> sections interleave")
    if text[rc.end() : po.start()].strip():
        return _error(SchemaErrorKind.MALFORMED, "text between </reason> and <patch>")
    if text[pc.end() :].strip():
        return _error(SchemaErrorKind.MALFORMED, "text after </patch>")

    reason = text[ro.end() : rc.start()]
    patch = text[po.end() : pc.start()]
    if not reason.strip():
        return _error(SchemaErrorKind.EMPTY_SECTION, "empty <reason>")
    if not patch.strip():
        return _error(SchemaErrorKind.EMPTY_SECTION, "empty <patch>")
    return ParsedResponse(reason, patch)


@dataclass(frozen=True)
class FilterDecision:
    keep: bool
    score: float


def decide(score: float, threshold: float = DEFAULT_THRESHOLD) -> FilterDecision:
    """Keep strictly above the threshold."""
    return FilterDecision(score > threshold, score)


def semantic_filter(
    patch: str,
    oracle: str,
    threshold: float = DEFAULT_THRESHOLD,
    cfg: MetricConfig = DEFAULT_CONFIG,
) -> FilterDecision:
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    return decide(codebleu(patch, oracle, cfg), threshold)


@dataclass(frozen=True)
class Kept:
    index: int
    response: ParsedResponse
    score: float


@dataclass(frozen=True)
class Rejected:
    index: int
    kind: str
    score: float | None = None
    detail: str = ""


@dataclass
class FilterResult:
    kept: list[Kept] = field(default_factory=list)
    rejected: list[Rejected] = field(default_factory=list)
    counts: Counter = field(default_factory=Counter)


def filter_one(
    text: str,
    oracle: str,
    threshold: float = DEFAULT_THRESHOLD,
    cfg: MetricConfig = DEFAULT_CONFIG,
    index: int = 0,
) -> Kept | Rejected:
    parsed = parse_response(text)
    if isinstance(parsed, SchemaError):
        return Rejected(index, parsed.kind.value, None, parsed.detail)
    try:
        decision = semantic_filter(parsed.patch, oracle, threshold, cfg)
    except EmptyOracleError:
        return Rejected(index, "drop", None, "empty oracle")
    if decision.keep:
        return Kept(index, parsed, decision.score)
    return Rejected(index, "drop", decision.score)


def filter_batch(
    responses: Iterable[tuple[str, str]],
    threshold: float = DEFAULT_THRESHOLD,
    cfg: MetricConfig = DEFAULT_CONFIG,
    map_fn: Callable = map,
) -> FilterResult:
    """Schema check then similarity check for each (response, oracle) pair.

    ``counts`` tallies schema-error kinds plus ``keep``/``drop`` decisions.
    ``map_fn`` may be an order-preserving parallel map (e.g. an executor's).
    """
    items = list(responses)
    outcomes = map_fn(_filter_job, [(text, oracle, threshold, cfg, i) for i, (text, oracle) in enumerate(items)])
    result = FilterResult()
    for outcome in outcomes:
        if isinstance(outcome, Kept):
            result.kept.append(outcome)
            result.counts["keep"] += 1
        else:
            result.rejected.append(outcome)
            result.counts[outcome.kind] += 1
    return result


def _filter_job(args) -> Kept | Rejected:
    return filter_one(*args)
