"""Command-line entry point.

Exit codes: 0 ok, 2 I/O error, 3 invalid input data, 4 referential
integrity (unknown ids), 5 internal invariant violation.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .codemodel import extract_dfg, parse, tokenize
from .config import ConfigError, Settings, build_settings, load_config_file
from .curriculum import MarkerError, build_schedule
from .dataset import DataError, RepairSample, dedup, repo_split
from .evaluation import UnknownPredictionError, evaluate
from .grpo import PolicyEval, grpo_step, normalize_advantages
from .jsonl import RecordError, dumps, iter_jsonl, write_json, write_jsonl
from .metrics import EmptyOracleError, score_pair
from .rejection import filter_batch
from .service import serve_stream, serve_tcp

EXIT_OK = 0
EXIT_IO = 2
EXIT_INVALID = 3
EXIT_REFERENCE = 4
EXIT_INTERNAL = 5

log = logging.getLogger("patchreward")


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",")]


def _common_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("configuration (flags override --config)")
    g.add_argument("--config", help="JSON or key=value config file")
    g.add_argument("--max-ngram", dest="max_ngram", type=int)
    g.add_argument("--keyword-weight", dest="keyword_weight", type=float)
    g.add_argument("--other-weight", dest="other_weight", type=float)
    g.add_argument("--codebleu-weights", dest="codebleu_weights", type=_floats, metavar="A,B,G,D")
    g.add_argument("--min-subtree-height", dest="min_subtree_height", type=int)
    g.add_argument("--smoothing-epsilon", dest="smoothing_epsilon", type=float)
    g.add_argument("--epsilon", type=float, help="advantage normalization constant")
    g.add_argument("--clip-eps", dest="clip_eps", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--threshold", type=float, help="CodeBLEU threshold for filter")
    g.add_argument("--ratios", type=_floats, metavar="TRAIN,VAL,TEST")
    g.add_argument("--seed", type=int)
    return p


_SETTING_KEYS = (
    "max_ngram", "keyword_weight", "other_weight", "codebleu_weights", "min_subtree_height",
    "smoothing_epsilon", "epsilon", "clip_eps", "beta", "threshold", "ratios", "seed",
)


def _settings(args) -> Settings:
    file_layer = load_config_file(args.config) if args.config else None
    flags = {k: getattr(args, k, None) for k in _SETTING_KEYS}
    return build_settings(file_layer, flags)


@contextlib.contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


@contextlib.contextmanager
def _mapper(jobs: int):
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            yield lambda fn, items: pool.map(fn, items, chunksize=16)
    else:
        yield map


def _load_samples(path) -> list[RepairSample]:
    samples = []
    for record in iter_jsonl(path):
        samples.append(RepairSample.from_dict(record))
    ids = [s.id for s in samples]
    if len(set(ids)) != len(ids):
        raise DataError(f"{path}: duplicate sample ids")
    return samples


def _emit_json(obj, out_path: str | None) -> None:
    with _output(out_path) as fh:
        json.dump(obj, fh, ensure_ascii=False, indent=2)
        fh.write("\n")


# -- commands ------------------------------------------------------------------


def cmd_score(args) -> int:
    settings = _settings(args)
    candidate = Path(args.candidate).read_text(encoding="utf-8")
    oracle = Path(args.oracle).read_text(encoding="utf-8")
    report = score_pair(candidate, oracle, settings.metric)
    print(dumps(report.to_dict()))
    return EXIT_OK


def cmd_eval(args) -> int:
    settings = _settings(args)
    samples = _load_samples(args.dataset)
    predictions = {}
    for record in iter_jsonl(args.predictions):
        if "id" not in record or not isinstance(record.get("prediction"), str):
            raise DataError(f"{args.predictions}: prediction records need 'id' and string 'prediction'")
        predictions[record["id"]] = record["prediction"]
    with _mapper(args.jobs) as map_fn:
        report = evaluate(samples, predictions, settings.metric, map_fn)
    _emit_json(report.to_dict(), args.output)
    return EXIT_OK


def cmd_serve(args) -> int:
    settings = _settings(args)
    if args.port is not None:
        server = serve_tcp(args.host, args.port, settings.metric)
        log.info("serving on %s:%d", *server.server_address[:2])
        with server:
            try:
                server.serve_forever()
            except KeyboardInterrupt:
                pass
        return EXIT_OK
    serve_stream(sys.stdin, sys.stdout, settings.metric)
    return EXIT_OK


def cmd_prepare(args) -> int:
    samples = _load_samples(args.input)
    before = len(samples)
    if not args.keep_duplicates:
        samples = dedup(samples)
    with _output(args.output) as fh:
        for s in samples:
            fh.write(dumps(s.to_dict()) + "\n")
    log.info("prepared %d samples (%d duplicates dropped)", len(samples), before - len(samples))
    return EXIT_OK


def cmd_split(args) -> int:
    settings = _settings(args)
    manifest = repo_split(_load_samples(args.dataset), settings.ratios, settings.seed)
    _emit_json(manifest.to_dict(), args.output)
    return EXIT_OK


def cmd_filter(args) -> int:
    settings = _settings(args)
    records = list(iter_jsonl(args.input))
    for i, r in enumerate(records):
        if not isinstance(r.get("response"), str) or not isinstance(r.get("oracle"), str):
            raise DataError(f"{args.input}: record {i + 1} needs string 'response' and 'oracle'")
    with _mapper(args.jobs) as map_fn:
        result = filter_batch(
            [(r["response"], r["oracle"]) for r in records], settings.threshold, settings.metric, map_fn
        )
    ids = [r.get("id", i) for i, r in enumerate(records)]
    write_jsonl(
        args.kept,
        ({"id": ids[k.index], "reason": k.response.reason, "patch": k.response.patch, "score": k.score}
         for k in result.kept),
    )
    rejected = []
    for rej in result.rejected:
        row = {"id": ids[rej.index], "kind": rej.kind}
        if rej.score is not None:
            row["score"] = rej.score
        rejected.append(row)
    write_jsonl(args.rejected, rejected)
    print(dumps(dict(sorted(result.counts.items()))), file=sys.stderr)
    return EXIT_OK


def cmd_curriculum_plan(args) -> int:
    schedule = build_schedule(_load_samples(args.dataset))
    _emit_json(schedule.to_dict(), args.output)
    return EXIT_OK


def cmd_grpo_advantages(args) -> int:
    settings = _settings(args)
    with _output(args.output) as fh:
        for record in iter_jsonl(args.input):
            if not isinstance(record.get("rewards"), list):
                raise DataError("each record needs a 'rewards' list")
            group = normalize_advantages(record["rewards"], settings.epsilon, record.get("prompt_id"))
            fh.write(dumps(group.to_dict()) + "\n")
    return EXIT_OK


def cmd_grpo_surrogate(args) -> int:
    settings = _settings(args)
    with _output(args.output) as fh:
        for record in iter_jsonl(args.input):
            try:
                ev = PolicyEval(record["logp_new"], record["logp_old"])
                rewards = record["rewards"]
            except KeyError as exc:
                raise DataError(f"record missing field {exc}") from exc
            group, report = grpo_step(
                rewards, ev, settings.epsilon, settings.clip_eps, settings.beta, record.get("prompt_id")
            )
            fh.write(dumps({**group.to_dict(), **report.to_dict()}) + "\n")
    return EXIT_OK


def cmd_parse(args) -> int:
    text = Path(args.file).read_text(encoding="utf-8")
    tokens = tokenize(text)
    outcome = parse(tokens)
    out = {
        "tokens": len(tokens),
        "failed": outcome.failed,
        "diagnostics": [{"line": d.line, "column": d.column, "message": d.message} for d in outcome.diagnostics],
    }
    if not outcome.failed:
        out["coverage"] = outcome.tree.coverage
        out["ast"] = outcome.tree.root.to_dict()
        out["dfg"] = extract_dfg(outcome.tree).to_dict()
    _emit_json(out, args.output)
    return EXIT_OK


# -- wiring --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(prog="patchreward", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", parents=[common], help="score one candidate file against an oracle file")
    p.add_argument("candidate")
    p.add_argument("oracle")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("eval", parents=[common], help="evaluate predictions against a dataset")
    p.add_argument("dataset")
    p.add_argument("predictions", help="JSONL of {id, prediction}")
    p.add_argument("-o", "--output")
    p.add_argument("-j", "--jobs", type=int, default=1)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", parents=[common], help="line-delimited JSON reward service")
    p.add_argument("--port", type=int, help="listen on TCP instead of stdin/stdout")
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("prepare", parents=[common], help="derive hunks/markers and deduplicate raw pairs")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.add_argument("--keep-duplicates", action="store_true")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("split", parents=[common], help="repository-level train/val/test split")
    p.add_argument("dataset")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("filter", parents=[common], help="rejection-sample reason/patch responses")
    p.add_argument("input", help="JSONL of {id, response, oracle}")
    p.add_argument("--kept", required=True)
    p.add_argument("--rejected", required=True)
    p.add_argument("-j", "--jobs", type=int, default=1)
    p.set_defaults(func=cmd_filter)

    cur = sub.add_parser("curriculum", help="curriculum scheduling").add_subparsers(dest="action", required=True)
    p = cur.add_parser("plan", parents=[common], help="write the cumulative stage schedule")
    p.add_argument("dataset")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_curriculum_plan)

    grpo = sub.add_parser("grpo", help="GRPO arithmetic").add_subparsers(dest="action", required=True)
    p = grpo.add_parser("advantages", parents=[common], help="group-normalized advantages")
    p.add_argument("input", help="JSONL of {prompt_id, rewards}")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_grpo_advantages)
    p = grpo.add_parser("surrogate", parents=[common], help="clipped surrogate and loss per group")
    p.add_argument("input", help="JSONL of {prompt_id, rewards, logp_new, logp_old}")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_grpo_surrogate)

    p = sub.add_parser("parse", parents=[common], help="dump the AST and data-flow graph of a file")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_parse)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UnknownPredictionError as exc:
        print(f"error: unknown prediction ids: {', '.join(map(str, exc.ids))}", file=sys.stderr)
        return EXIT_REFERENCE
    except EmptyOracleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (DataError, RecordError, ConfigError, MarkerError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:
        log.exception("internal error")
        print(f"error: internal: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
