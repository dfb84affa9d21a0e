"""Patch scoring and RL support for learned vulnerability repair.

The scikit-learn wrappers live in :mod:`patchreward.estimators` and are not
imported here, to keep the command-line tools light.
"""

from .curriculum import Bucket, CurriculumSchedule, assign_bucket, build_schedule, count_hunks
from .dataset import Hunk, RepairSample, SplitManifest, dedup, diff_hunks, insert_markers, repo_split, strip_markers
from .evaluation import EvalReport, evaluate
from .grpo import PolicyEval, RewardGroup, SurrogateReport, clipped_surrogate, grpo_step, normalize_advantages
from .metrics import MetricConfig, ScoreReport, bleu, codebleu, score_pair, weighted_bleu
from .rejection import FilterResult, ParsedResponse, SchemaError, SchemaErrorKind, filter_batch, parse_response

__version__ = "0.1.0"

__all__ = [
    "Bucket",
    "CurriculumSchedule",
    "EvalReport",
    "FilterResult",
    "Hunk",
    "MetricConfig",
    "ParsedResponse",
    "PolicyEval",
    "RepairSample",
    "RewardGroup",
    "SchemaError",
    "SchemaErrorKind",
    "ScoreReport",
    "SplitManifest",
    "SurrogateReport",
    "assign_bucket",
    "bleu",
    "build_schedule",
    "clipped_surrogate",
    "codebleu",
    "count_hunks",
    "dedup",
    "diff_hunks",
    "evaluate",
    "filter_batch",
    "grpo_step",
    "insert_markers",
    "normalize_advantages",
    "parse_response",
    "repo_split",
    "score_pair",
    "strip_markers",
    "weighted_bleu",
]
