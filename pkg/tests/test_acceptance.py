"""End-to-end acceptance checks. Each test prints one PASS/FAIL line."""

import dataclasses
import itertools
import math
import random
import time

import numpy as np
import pytest

from docstruct.cli import run
from docstruct.construct import build_toc
from docstruct.geometry import box_delta
from docstruct.metrics import (
    PARAGRAPH_END,
    hungarian,
    levenshtein,
    normalized_similarity,
    reds,
    steds,
    toc_with_payload,
    tree_edit_distance,
)
from docstruct.model import ROOT, BBox, GroupCategory, LogicalRole, ReadingOrderGroup, Region
from docstruct.pipeline import run_pipeline
from docstruct.scoring import HeuristicScorer, OracleScorer, _indicator, row_softmax
from docstruct.synth import corpus_config, generate, write
from oracles import (
    assignment_bruteforce,
    forest_to_tree,
    levenshtein_recursive,
    ordered_forests,
    preorder_parent_and_sibling,
    ted_bruteforce,
)

TEXT, GRAPH = GroupCategory.TEXT, GroupCategory.GRAPHICAL
CORPUS_SEEDS = range(200)


@pytest.fixture(scope="module")
def corpus():
    return [generate(corpus_config(s)) for s in CORPUS_SEEDS]


def _scores(sd, out):
    texts = {ln.id: ln.text for ln in sd.doc.lines}
    truth = sd.truth
    r = reds(out.groups, truth.groups, out.regions, truth.regions)
    toc = steds(toc_with_payload(out.toc, out.regions, texts), toc_with_payload(truth.toc, truth.regions, texts))
    return r, toc, steds(out.hierarchy, truth.hierarchy)


def test_oracle_round_trip(corpus, report):
    t0 = time.perf_counter()
    bad = []
    for sd in corpus:
        out = run_pipeline(sd.doc, OracleScorer(sd.truth))
        r, toc, hier = _scores(sd, out)
        ok = (
            out.regions == sd.truth.regions
            and r[TEXT].score == 1.0
            and r[GRAPH].score == 1.0
            and toc == 1.0
            and hier == 1.0
        )
        if not ok:
            bad.append(sd.config.seed)
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 30.0
    report("1 oracle round-trip", ok, f"{len(corpus) - len(bad)}/{len(corpus)} exact, {elapsed:.1f}s (limit 30s)")
    assert not bad, f"seeds not reproduced: {bad[:10]}"
    assert elapsed < 30.0


def test_toc_builder_exhaustive(report):
    t0 = time.perf_counter()
    trees = 0
    for n in range(9):
        ids = list(range(n))
        for forest in ordered_forests(n):
            t = forest_to_tree(forest)
            parent, sibling = preorder_parent_and_sibling(t)
            p = _indicator(ids, parent, "toc-parent", cols=[ROOT, *ids])
            s = _indicator(ids, sibling, "toc-sibling")
            assert build_toc(ids, p, s) == t, forest
            trees += 1
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        k = int(rng.integers(1, 13))
        ids = [int(x) for x in rng.permutation(100)[:k]]
        p = row_softmax(rng.normal(scale=3.0, size=(k, k + 1)), ids=ids, cols=[ROOT, *ids])
        s = row_softmax(rng.normal(scale=3.0, size=(k, k)), ids=ids)
        assert build_toc(ids, p, s).preorder_ids() == ids
    elapsed = time.perf_counter() - t0
    ok = report("2 TOC builder", elapsed < 60.0, f"{trees} trees exact, 1000 random orders kept, {elapsed:.1f}s (limit 60s)")
    assert ok


def test_levenshtein_oracle(report):
    rng = random.Random(3)
    alphabet = ["a", "b", "c", PARAGRAPH_END]

    def seq():
        return [rng.choice(alphabet) for _ in range(rng.randint(0, 8))]

    mismatches = 0
    for _ in range(1000):
        a, b = seq(), seq()
        mismatches += levenshtein(a, b) != levenshtein_recursive(a, b)
    axioms = 0
    for _ in range(1000):
        a, b, c = seq(), seq(), seq()
        axioms += levenshtein(a, b) != levenshtein(b, a)
        axioms += levenshtein(a, c) > levenshtein(a, b) + levenshtein(b, c)
    ok = report("3 Levenshtein", mismatches == 0 and axioms == 0, f"{mismatches} oracle mismatches, {axioms} axiom violations")
    assert ok


def test_hungarian_oracle(report):
    rng = random.Random(4)
    mismatches = 0
    for _ in range(500):
        p, g = rng.randint(1, 7), rng.randint(1, 7)
        cost = [[rng.randint(0, 100) for _ in range(g)] for _ in range(p)]
        _, total = hungarian(cost)
        mismatches += total != assignment_bruteforce(cost)
    ok = report("4 Hungarian", mismatches == 0, f"{mismatches}/500 mismatches")
    assert ok


def _trees_up_to(nodes):
    # a tree with k nodes is a root over a forest of k - 1
    return [f for k in range(nodes) for f in ordered_forests(k)]


def test_tree_edit_distance_oracle(report):
    rng = random.Random(5)
    shapes = _trees_up_to(5)

    def labelled(forest):
        t = forest_to_tree(forest, ["".join(rng.choice("ab") for _ in range(2)) for _ in range(4)])
        return dataclasses.replace(t, text=rng.choice(["", "a", "ab"]))

    def unit(a, b):
        return 0.0 if a.text == b.text else 1.0

    def fractional(a, b):
        return 1.0 - normalized_similarity(a.text, b.text)

    worst, pairs = 0.0, 0
    for f1, f2 in itertools.product(shapes, repeat=2):
        t1, t2 = labelled(f1), labelled(f2)
        for cost in (unit, fractional):
            worst = max(worst, abs(tree_edit_distance(t1, t2, cost) - ted_bruteforce(t1, t2, cost)))
            pairs += 1
    ok = report("5 tree edit distance", worst <= 1e-9, f"{pairs} tree pairs, max deviation {worst:.1e}")
    assert ok


def _text_region(rid, lines):
    return Region(rid, LogicalRole.PARAGRAPH, BBox(0, 0, 1, 1), 0, tuple(lines))


def test_reds_worked_values(report):
    gt_regions = [_text_region(1, [1, 2]), _text_region(3, [3])]
    gt = [ReadingOrderGroup(TEXT, (1, 3))]
    merged = reds([ReadingOrderGroup(TEXT, (1,))], gt, [_text_region(1, [1, 2, 3])], gt_regions)[TEXT].score
    same = reds(gt, gt, gt_regions)[TEXT].score
    empty = reds([], gt, [], gt_regions)[TEXT].score
    ok = abs(merged - 0.8) <= 1e-9 and same == 1.0 and empty == 0.0
    report("6 REDS worked values", ok, f"example {merged:.12f}, identity {same}, empty {empty}")
    assert ok


def test_geometry_and_softmax(report):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(10_000):
        x, y = rng.uniform(0, 500, 2), rng.uniform(0, 500, 2)
        w, h = rng.uniform(0.5, 200, 2), rng.uniform(0.5, 200, 2)
        a = BBox(x[0], y[0], x[0] + w[0], y[0] + h[0])
        b = BBox(x[1], y[1], x[1] + w[1], y[1] + h[1])
        ab, ba = box_delta(a, b), box_delta(b, a)
        swapped = (ab[4], ab[5], -ab[2], -ab[3], ab[0], ab[1])
        worst = max(worst, max(abs(u - v) for u, v in zip(ba, swapped)))
        worst = max(worst, max(abs(v) for v in box_delta(a, a)))
    row_err = 0.0
    for _ in range(1000):
        n, m = rng.integers(1, 20, 2)
        mask = rng.random((n, m)) < 0.7
        mask[np.arange(n), rng.integers(0, m, n)] = True
        sm = row_softmax(rng.normal(scale=50.0, size=(n, m)), mask)
        row_err = max(row_err, max(abs(math.fsum(r) - 1.0) for r in sm.rows))
    ok = worst <= 1e-9 and row_err <= 1e-9
    report("7 geometry and softmax", ok, f"delta deviation {worst:.1e}, row-sum error {row_err:.1e}")
    assert ok


def test_heuristic_end_to_end(corpus, report):
    text, toc = [], []
    for sd in corpus:
        out = run_pipeline(sd.doc, HeuristicScorer())
        r, t, _ = _scores(sd, out)
        text.append(r[TEXT].score)
        toc.append(t)
    mean_text, mean_toc = float(np.mean(text)), float(np.mean(toc))
    ok = mean_text >= 0.95 and mean_toc >= 0.95
    report("8 heuristic baseline", ok, f"text REDS {mean_text:.4f}, TOC STEDS {mean_toc:.4f} (bar 0.95)")
    assert ok


def test_stage_composition(tmp_path, report):
    src = tmp_path / "in"
    paths = [write(generate(corpus_config(s)), src, f"doc_{s:03d}") for s in range(20)]
    differing = []
    for scorer in ("heuristic", f"files:{src / 'scores'}"):
        dirs = {d: tmp_path / scorer.split(":")[0] / d for d in ("detect", "order", "construct", "pipeline")}
        inputs = [str(p) for p in paths]
        assert run(["pipeline", "--scorer", scorer, *inputs, "-o", str(dirs["pipeline"])]) == 0
        assert run(["detect", "--scorer", scorer, *inputs, "-o", str(dirs["detect"])]) == 0
        assert run(["order", "--scorer", scorer, *(str(dirs["detect"] / p.name) for p in paths), "-o", str(dirs["order"])]) == 0
        assert run(["construct", "--scorer", scorer, *(str(dirs["order"] / p.name) for p in paths), "-o", str(dirs["construct"])]) == 0
        for p in paths:
            if (dirs["construct"] / p.name).read_bytes() != (dirs["pipeline"] / p.name).read_bytes():
                differing.append((scorer, p.name))
    ok = report("9 stage composition", not differing, f"{40 - len(differing)}/40 outputs byte-equal over 20 docs")
    assert ok
