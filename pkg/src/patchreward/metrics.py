"""Patch similarity metrics: BLEU, weighted BLEU, AST/DFG match, reward, CodeBLEU."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .codemodel import DataFlowGraph, SyntaxTree, Token, extract_dfg, extract_subtrees, parse, tokenize
from .codemodel.tokens import KEYWORD

CANDIDATE_UNPARSEABLE = "candidate-unparseable"
ORACLE_UNPARSEABLE = "oracle-unparseable"
EMPTY_ORACLE_DFG = "empty-oracle-dfg"


class EmptyOracleError(ValueError):
    """The oracle (reference) patch has no tokens."""


@dataclass(frozen=True)
class MetricConfig:
    max_ngram: int = 4
    keyword_weight: float = 1.0
    other_weight: float = 0.2
    codebleu_weights: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
    min_subtree_height: int = 1
    smoothing_epsilon: float = 1e-9

    def __post_init__(self):
        object.__setattr__(self, "codebleu_weights", tuple(float(w) for w in self.codebleu_weights))
        if self.max_ngram < 1:
            raise ValueError("max_ngram must be >= 1")
        if self.keyword_weight < 0 or self.other_weight < 0:
            raise ValueError("token weights must be non-negative")
        if len(self.codebleu_weights) != 4 or any(w < 0 for w in self.codebleu_weights):
            raise ValueError("codebleu_weights must be four non-negative reals")
        if abs(sum(self.codebleu_weights) - 1.0) > 1e-9:
            raise ValueError("codebleu_weights must sum to 1")
        if self.min_subtree_height < 1:
            raise ValueError("min_subtree_height must be >= 1")
        if not self.smoothing_epsilon > 0:
            raise ValueError("smoothing_epsilon must be positive")

    @classmethod
    def from_mapping(cls, values: dict) -> "MetricConfig":
        names = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in values.items() if k in names})


DEFAULT_CONFIG = MetricConfig()


@dataclass(frozen=True)
class ScoreReport:
    bleu: float
    weighted_bleu: float
    sim_ast: float
    sim_dfg: float
    reward: float
    codebleu: float
    degraded: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["degraded"] = list(self.degraded)
        return out


# -- n-gram metrics ------------------------------------------------------------


def _ngrams(words: Sequence[str], n: int) -> Counter:
    return Counter(tuple(words[i : i + n]) for i in range(len(words) - n + 1))


def _effective_order(cand: Sequence, ref: Sequence, cfg: MetricConfig) -> int:
    return max(1, min(cfg.max_ngram, len(cand), len(ref)))


def _brevity_penalty(cand_len: int, ref_len: int) -> float:
    if cand_len >= ref_len:
        return 1.0
    return math.exp(1.0 - ref_len / cand_len)


def _combine(precisions: list[float], cand_len: int, ref_len: int, eps: float) -> float:
    logs = [math.log(p if p > 0 else eps) for p in precisions]
    return _brevity_penalty(cand_len, ref_len) * math.exp(sum(logs) / len(logs))


def ngram_precisions(cand: Sequence[Token], ref: Sequence[Token], cfg: MetricConfig = DEFAULT_CONFIG) -> list[float]:
    """Clipped n-gram precision for n = 1..N' (unsmoothed)."""
    cw = [t.lexeme for t in cand]
    rw = [t.lexeme for t in ref]
    out = []
    for n in range(1, _effective_order(cw, rw, cfg) + 1):
        c, r = _ngrams(cw, n), _ngrams(rw, n)
        matched = sum(min(k, r[g]) for g, k in c.items())
        out.append(matched / (len(cw) - n + 1))
    return out


def bleu(cand: Sequence[Token], ref: Sequence[Token], cfg: MetricConfig = DEFAULT_CONFIG) -> float:
    if not ref:
        raise EmptyOracleError("reference token list is empty")
    if not cand:
        return 0.0
    return _combine(ngram_precisions(cand, ref, cfg), len(cand), len(ref), cfg.smoothing_epsilon)


def weighted_ngram_precisions(
    cand: Sequence[Token], ref: Sequence[Token], cfg: MetricConfig = DEFAULT_CONFIG
) -> list[float]:
    """Precisions where each n-gram counts with the mean weight of its tokens."""

    def weight(tok: Token) -> float:
        return cfg.keyword_weight if tok.kind == KEYWORD else cfg.other_weight

    cw = [t.lexeme for t in cand]
    rw = [t.lexeme for t in ref]
    cweights = [weight(t) for t in cand]
    out = []
    for n in range(1, _effective_order(cw, rw, cfg) + 1):
        r = _ngrams(rw, n)
        gram_weight: dict[tuple, float] = {}
        counts: Counter = Counter()
        for i in range(len(cw) - n + 1):
            g = tuple(cw[i : i + n])
            gram_weight[g] = sum(cweights[i : i + n]) / n
            counts[g] += 1
        # Same summation order for both sums: identical inputs give exactly 1.0.
        total = sum(k * gram_weight[g] for g, k in counts.items())
        matched = sum(min(k, r[g]) * gram_weight[g] for g, k in counts.items())
        out.append(matched / total if total > 0 else 0.0)
    return out


def weighted_bleu(cand: Sequence[Token], ref: Sequence[Token], cfg: MetricConfig = DEFAULT_CONFIG) -> float:
    if not ref:
        raise EmptyOracleError("reference token list is empty")
    if not cand:
        return 0.0
    return _combine(weighted_ngram_precisions(cand, ref, cfg), len(cand), len(ref), cfg.smoothing_epsilon)


# -- structural metrics --------------------------------------------------------


def ast_similarity(cand_tree: SyntaxTree, ref_tree: SyntaxTree, cfg: MetricConfig = DEFAULT_CONFIG) -> float:
    """Share of the oracle's subtrees (with multiplicity) found in the candidate."""
    ref = extract_subtrees(ref_tree, cfg.min_subtree_height)
    cand = extract_subtrees(cand_tree, cfg.min_subtree_height)
    return _multiset_recall(cand, ref)


def _multiset_recall(cand: Counter, ref: Counter) -> float:
    total = sum(ref.values())
    if total == 0:
        return 1.0 if not cand else 0.0
    return sum((cand & ref).values()) / total


def dfg_similarity(cand_dfg: DataFlowGraph, ref_dfg: DataFlowGraph) -> float | None:
    """Share of oracle edges matched; ``None`` when the oracle has no edges."""
    if not ref_dfg.edges:
        return None
    return _multiset_recall(cand_dfg.edge_counts(), ref_dfg.edge_counts())


def composite_reward(bleu_score: float, sim_ast: float | None, sim_dfg: float | None) -> float:
    """Mean of the available reward components (``None`` marks an excluded one)."""
    parts = [p for p in (bleu_score, sim_ast, sim_dfg) if p is not None]
    return sum(parts) / len(parts)


def combine_codebleu(components: Sequence[float | None], weights: Sequence[float]) -> float:
    """Weighted sum; weights of ``None`` components are spread over the rest."""
    avail = [(c, w) for c, w in zip(components, weights) if c is not None]
    mass = sum(w for _, w in avail)
    if mass <= 0:
        return 0.0
    return sum(c * w for c, w in avail) / mass


# -- full pipeline -------------------------------------------------------------


@dataclass(frozen=True)
class _Analysis:
    tokens: list[Token]
    tree: SyntaxTree | None
    dfg: DataFlowGraph | None


def _analyze(text: str) -> _Analysis:
    tokens = tokenize(text)
    outcome = parse(tokens)
    if outcome.failed:
        return _Analysis(tokens, None, None)
    return _Analysis(tokens, outcome.tree, extract_dfg(outcome.tree))


def score_pair(cand_text: str, ref_text: str, cfg: MetricConfig = DEFAULT_CONFIG) -> ScoreReport:
    """Score a candidate patch against the oracle patch."""
    ref = _analyze(ref_text)
    if not ref.tokens:
        raise EmptyOracleError("oracle patch is empty")
    cand = _analyze(cand_text)
    return _score(cand, ref, cfg)


def _score(cand: _Analysis, ref: _Analysis, cfg: MetricConfig) -> ScoreReport:
    flags = []
    b = bleu(cand.tokens, ref.tokens, cfg)
    wb = weighted_bleu(cand.tokens, ref.tokens, cfg)

    if ref.tree is None:
        flags.append(ORACLE_UNPARSEABLE)
        if cand.tree is None:
            flags.append(CANDIDATE_UNPARSEABLE)
        reward = b
        sim_ast = sim_dfg = 0.0
        ast_c = dfg_c = None
    elif cand.tree is None:
        flags.append(CANDIDATE_UNPARSEABLE)
        sim_ast = sim_dfg = 0.0
        reward = composite_reward(b, 0.0, 0.0)
        ast_c = dfg_c = None
        if not ref.dfg.edges:
            flags.append(EMPTY_ORACLE_DFG)
    else:
        sim_ast = ast_similarity(cand.tree, ref.tree, cfg)
        ast_c = sim_ast
        dfg_c = dfg_similarity(cand.dfg, ref.dfg)
        if dfg_c is None:
            flags.append(EMPTY_ORACLE_DFG)
            sim_dfg = 1.0 if not cand.dfg.edges else 0.0
        else:
            sim_dfg = dfg_c
        reward = composite_reward(b, sim_ast, dfg_c)

    cb = combine_codebleu((b, wb, ast_c, dfg_c), cfg.codebleu_weights)
    return ScoreReport(b, wb, sim_ast, sim_dfg, reward, cb, tuple(flags))


def codebleu(cand_text: str, ref_text: str, cfg: MetricConfig = DEFAULT_CONFIG) -> float:
    return score_pair(cand_text, ref_text, cfg).codebleu


def exact_match(cand_text: str, ref_text: str) -> bool:
    """Token-level equality (comments and layout ignored)."""
    return [t.lexeme for t in tokenize(cand_text)] == [t.lexeme for t in tokenize(ref_text)]
