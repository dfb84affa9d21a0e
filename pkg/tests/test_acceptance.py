"""Acceptance criteria 1-10.

Each test records a one-line verdict that is printed in the terminal summary
(see conftest.py). Run standalone with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import json
import math
import random
import subprocess
import sys
import time

import numpy as np
import pytest

import patchreward.rejection as rejection
from conftest import ACCEPTANCE_RESULTS
from patchreward.codemodel import extract_dfg, parse_text, tokenize
from patchreward.curriculum import Bucket, assign_bucket, build_schedule
from patchreward.dataset import RepairSample, insert_markers, repo_split, split_lines, strip_markers
from patchreward.grpo import clipped_surrogate, normalize_advantages
from patchreward.metrics import MetricConfig, ast_similarity, bleu, score_pair
from patchreward.rejection import ParsedResponse, parse_response, semantic_filter

from _fixtures import ORACLE, SCHEMA_CASES
from _programs import (
    CORPUS,
    fresh_names,
    multiline,
    naive_ast_similarity,
    oracle_dfg,
    random_program,
    small_program,
)


def verdict(number: int, ok: bool, line: str) -> None:
    ACCEPTANCE_RESULTS[number] = (ok, line)
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {line}")
    assert ok, line


def test_01_metric_identity():
    rng = random.Random(101)
    corpus = list(CORPUS)
    while len(corpus) < 60:
        corpus.append(multiline(random_program(rng)))
    assert all(not parse_text(src).failed for src in corpus)
    start = time.perf_counter()
    worst = 0.0
    for src in corpus:
        r = score_pair(src, src)
        for value in (r.bleu, r.weighted_bleu, r.sim_ast, r.sim_dfg, r.reward, r.codebleu):
            worst = max(worst, abs(value - 1.0))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 5.0
    verdict(1, ok, f"{len(corpus)} functions, max |component-1| = {worst:.1e}, {elapsed:.2f}s (< 5s)")


def test_02_rename_invariance():
    rng = random.Random(102)
    mismatches = 0
    bleu_drops = 0
    pairs = 150
    for _ in range(pairs):
        prog = random_program(rng)
        mapping = fresh_names(prog, rng)
        renamed = prog.renamed(mapping)
        other = random_program(rng)
        for name in other.variables():
            mapping.setdefault(name, f"w_{len(mapping)}")
        other_renamed = other.renamed(mapping)

        base = score_pair(prog.text(), prog.text())
        moved = score_pair(renamed.text(), prog.text())
        if (moved.sim_ast, moved.sim_dfg) != (base.sim_ast, base.sim_dfg):
            mismatches += 1
        if moved.bleu < base.bleu:
            bleu_drops += 1

        cross = score_pair(prog.text(), other.text())
        cross_renamed = score_pair(renamed.text(), other_renamed.text())
        if (cross.sim_ast, cross.sim_dfg) != (cross_renamed.sim_ast, cross_renamed.sim_dfg):
            mismatches += 1
    ok = mismatches == 0 and bleu_drops >= 1
    verdict(2, ok, f"{pairs} rename pairs, {mismatches} structural mismatches, BLEU dropped in {bleu_drops}")


def test_03_brute_force_oracles():
    rng = random.Random(103)
    n = 150
    ast_bad = dfg_bad = 0
    max_tokens = 0
    for _ in range(n):
        prog, other = small_program(rng), small_program(rng)
        max_tokens = max(max_tokens, len(tokenize(prog.text())), len(tokenize(other.text())))
        tree, other_tree = parse_text(prog.text()).tree, parse_text(other.text()).tree
        for h in (1, 2):
            cfg = MetricConfig(min_subtree_height=h)
            if ast_similarity(tree, other_tree, cfg) != naive_ast_similarity(tree.root, other_tree.root, h):
                ast_bad += 1
        g = extract_dfg(tree)
        if (g.slot_count, list(g.edges)) != oracle_dfg(prog):
            dfg_bad += 1
    ok = ast_bad == 0 and dfg_bad == 0 and max_tokens <= 30
    verdict(3, ok, f"{n} programs (<= {max_tokens} tokens): {ast_bad} sim_ast and {dfg_bad} DFG disagreements")


def test_04_bleu_spot_values():
    def t(words):
        return tokenize(" ".join(words))

    short = bleu(t("a b c d".split()), t("a b c d e".split()))
    same = bleu(t("a b c d".split()), t("a b c d".split()))
    disjoint = bleu(t("x y z w".split()), t("a b c d".split()))
    ok = abs(short - math.exp(-0.25)) <= 1e-6 and same == 1.0 and disjoint <= 1e-6
    verdict(4, ok, f"brevity {short:.6f} (e^-0.25 = {math.exp(-0.25):.6f}), identity {same}, disjoint {disjoint:.1e}")


def test_05_grpo_algebra():
    rng = np.random.default_rng(105)
    worst_sum = 0.0
    worst_scale = 0.0
    constant_ok = True
    for i in range(1000):
        m = int(rng.integers(2, 17))
        rewards = rng.random(m)
        group = normalize_advantages(rewards)
        worst_sum = max(worst_sum, abs(sum(group.advantages)) / (1e-9 * m))
        k = float(rng.uniform(0.01, 100))
        a0 = np.array(normalize_advantages(rewards, 0.0).advantages)
        a1 = np.array(normalize_advantages(rewards * k, 0.0).advantages)
        worst_scale = max(worst_scale, float(np.max(np.abs(a0 - a1))))
        const = normalize_advantages([float(rewards[0])] * m)
        constant_ok &= all(a == 0.0 for a in const.advantages)
    fixtures = (
        clipped_surrogate([1.0], [2.0]).per_sample_objective[0],
        clipped_surrogate([1.5], [1.0], 0.2).per_sample_objective[0],
        clipped_surrogate([0.5], [-1.0], 0.2).per_sample_objective[0],
    )
    ok = worst_sum <= 1.0 and worst_scale <= 1e-9 and constant_ok and fixtures == (2.0, 1.2, -0.8)
    verdict(
        5,
        ok,
        f"1000 groups: max |sum A|/(1e-9 M) = {worst_sum:.3f}, scale drift {worst_scale:.1e}, "
        f"constant groups zero: {constant_ok}, surrogate fixtures {fixtures}",
    )


class _S:
    def __init__(self, id, hunks):
        self.id, self.hunks = id, hunks


def test_06_curriculum():
    table = {1: Bucket.EASY, 2: Bucket.EASY, 3: Bucket.MEDIUM, 4: Bucket.MEDIUM, 5: Bucket.MEDIUM,
             6: Bucket.HARD, 7: Bucket.HARD, 100: Bucket.HARD}
    table_ok = all(assign_bucket(h) == b for h, b in table.items())
    rng = random.Random(106)
    chain_failures = 0
    for _ in range(1000):
        samples = [_S(i, rng.randint(1, 15)) for i in range(rng.randint(1, 60))]
        s1, s2, s3 = (set(ids) for _, ids in build_schedule(samples).stages)
        if not (s1 <= s2 <= s3 == {s.id for s in samples}):
            chain_failures += 1
    verdict(6, table_ok and chain_failures == 0,
            f"bucket table exact: {table_ok}; inclusion chain failures over 1000 datasets: {chain_failures}")


def _samples(sizes):
    out, next_id = [], 0
    for r, size in enumerate(sizes):
        for _ in range(size):
            out.append(RepairSample(next_id, f"repo{r:03d}", None, "a\n", "b\n", "<vul_start>\na\n<vul_end>\n", 1))
            next_id += 1
    return out


def test_07_split():
    rng = random.Random(107)
    crossings = 0
    worst_dev = 0.0
    equal_sets = 0
    for trial in range(200):
        n_repos = rng.randint(3, 100)
        if trial % 2 and n_repos >= 20:
            sizes = [rng.randint(1, 30)] * n_repos
        else:
            sizes = [rng.randint(1, 50) for _ in range(n_repos)]
        samples = _samples(sizes)
        m = repo_split(samples, seed=trial)
        split_of = {}
        for name in ("train", "val", "test"):
            for i in m.split_of(name):
                split_of[i] = name
        for s in samples:
            if split_of[s.id] != m.repo_assignment[s.repo]:
                crossings += 1
        if len(set(sizes)) == 1 and n_repos >= 20:
            equal_sets += 1
            dev = max(abs(m.achieved_ratios[k] - t) for k, t in zip(("train", "val", "test"), (0.8, 0.1, 0.1)))
            worst_dev = max(worst_dev, dev)
    ok = crossings == 0 and worst_dev <= 0.05 and equal_sets > 0
    verdict(7, ok, f"200 datasets, {crossings} repo crossings; {equal_sets} equal-size sets, "
                   f"worst deviation {worst_dev * 100:.2f}pp (<= 5pp)")


def test_08_rejection(monkeypatch):
    wrong = []
    for text, expected in SCHEMA_CASES:
        out = parse_response(text)
        got = "ok" if isinstance(out, ParsedResponse) else out.kind.value
        if got != expected:
            wrong.append((text, expected, got))
    monkeypatch.setattr(rejection, "codebleu", lambda *a, **k: 0.5)
    boundary = semantic_filter("anything", ORACLE, 0.5)
    ok = not wrong and len(SCHEMA_CASES) >= 20 and boundary.keep is False
    verdict(8, ok, f"{len(SCHEMA_CASES) - len(wrong)}/{len(SCHEMA_CASES)} schema fixtures correct; "
                   f"score exactly 0.5 kept: {boundary.keep}")


def test_09_marker_roundtrip():
    rng = random.Random(109)
    alphabet = ["", "x", "int a = 0;", "  if (p) {", "}", "\t// c", "return b;"]
    failures = 0
    for _ in range(500):
        lines = [rng.choice(alphabet) for _ in range(rng.randint(1, 20))]
        text = "\n".join(lines) + ("\n" if rng.random() < 0.5 else "")
        n = len(split_lines(text))
        hunks, line = [], 1
        while line <= n and rng.random() < 0.75:
            start = rng.randint(line, n)
            end = rng.randint(start, n)
            hunks.append((start, end))
            line = end + 1
        if strip_markers(insert_markers(text, hunks)) != text:
            failures += 1
    verdict(9, failures == 0, f"500 random (text, hunks) pairs, {failures} round-trip failures")


def test_10_service_determinism_and_throughput():
    rng = random.Random(110)
    requests = []
    max_lines = 0
    while len(requests) < 1000:
        cand, oracle = (multiline(random_program(rng, lo=15, hi=40)) for _ in range(2))
        lines = max(cand.count("\n"), oracle.count("\n"))
        if lines > 200:
            continue
        max_lines = max(max_lines, lines)
        requests.append(json.dumps({"id": len(requests), "candidate": cand, "oracle": oracle}))
    transcript = "\n".join(requests) + "\n"

    def replay():
        t0 = time.perf_counter()
        proc = subprocess.run(
            [sys.executable, "-m", "patchreward.cli", "serve"],
            input=transcript.encode(),
            capture_output=True,
            timeout=600,
        )
        return proc, time.perf_counter() - t0

    first, elapsed = replay()
    second, _ = replay()
    identical = first.stdout == second.stdout and first.returncode == second.returncode == 0
    responses = first.stdout.decode().splitlines()
    ordered = [json.loads(r)["id"] for r in responses] == list(range(1000))
    ok = identical and ordered and elapsed < 60.0
    verdict(10, ok, f"1000 requests (<= {max_lines} lines each): byte-identical replay {identical}, "
                    f"in order {ordered}, {elapsed:.1f}s (< 60s)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
