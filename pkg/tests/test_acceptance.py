"""Acceptance suite. Each test records one pass/fail line, printed in the
"acceptance criteria" section at the end of the pytest run."""

import os
import random
import subprocess
import sys
import time

import pytest

from chainlog.engine import EvaluationContext, Result, combine
from chainlog.graph import EdgeKind, VertexKind
from chainlog.io import load_graph, load_knowledge, save_graph, save_knowledge, sorted_ids
from chainlog.knowledge import Selector
from chainlog.oracle import (
    RULE_TABLES,
    GeneratorConfig,
    generate_instance,
    minimal_row_fixture,
    naive_evaluate,
    observed_row_result,
    random_disclosure,
    table_oracle,
    table_rows,
)
from chainlog.status import MALICIOUS, SAFE, VULNERABLE

# pinned budgets (seconds)
USE_CASE_BUDGET = 1.0
ORACLE_BUDGET = 60.0
SCALE_BUDGET = 1.0

ORACLE_INSTANCES = 1000
MONOTONE_INSTANCES, MONOTONE_STEPS = 200, 5
MASKING_INSTANCES = 200
ROUND_TRIP_INSTANCES = 100
SCALE_VERTICES = 10_000


def _show(r):
    sets = " ".join(
        f"{n}={{{','.join(sorted_ids(s))}}}" for n, s in zip(("S_V", "S_M", "H_V", "H_M"), r.sets)
    )
    return f"{r.status} {sets}"


def _fs(*ids):
    return frozenset(str(i) for i in ids)


def test_criterion_1_use_case_1(ref, uc1, criterion):
    start = time.perf_counter()
    ctx = EvaluationContext(ref, uc1)
    got = {t: ctx.evaluate(t) for t in ("9", "10")}
    elapsed = time.perf_counter() - start
    expected = Result(SAFE, vulnerable_artifacts=_fs(2, 3, 4))
    ok = all(r == expected for r in got.values()) and elapsed < USE_CASE_BUDGET
    detail = "; ".join(f"#{t}: {_show(r)}" for t, r in got.items()) + f"; {elapsed * 1000:.1f} ms"
    assert criterion(1, ok, detail), detail


def test_criterion_2_use_case_2(ref, uc2, criterion):
    ctx = EvaluationContext(ref, uc2)
    got = {t: ctx.evaluate(t) for t in ("9", "10")}
    ok = all(r.status is VULNERABLE and {"6", t} <= r.vulnerable_artifacts for t, r in got.items())
    detail = "; ".join(f"#{t}: {_show(r)}" for t, r in got.items())
    assert criterion(2, ok, detail), detail


def test_criterion_3_use_case_3(ref, uc3, criterion):
    ctx = EvaluationContext(ref, uc3)
    r9, r10 = ctx.evaluate("9"), ctx.evaluate("10")
    union = combine([r9, r10])
    ok = (
        r9.status is MALICIOUS
        and r9.compromised_hosts == _fs(5)
        and r9.malicious_artifacts == _fs(4, 9)
        and union.malicious_artifacts == _fs(4, 9, 10)
    )
    detail = f"#9: {_show(r9)}; union S_M={{{','.join(sorted_ids(union.malicious_artifacts))}}}"
    assert criterion(3, ok, detail), detail


def test_criterion_4_rule_tables(criterion):
    total = hits = 0
    misses = []
    for table in RULE_TABLES:
        for row in table_rows(table):
            fx = minimal_row_fixture(table, row)
            res = EvaluationContext(fx.model, fx.kb).evaluate(fx.target)
            total += 1
            if observed_row_result(table, fx, res) == table_oracle(table, row):
                hits += 1
            else:
                misses.append((table, row))
    ok = total == 30 and hits == 30
    assert criterion(4, ok, f"{hits}/{total} rows" + (f"; misses {misses}" if misses else "")), misses


def test_criterion_5_oracle_equivalence(criterion):
    start = time.perf_counter()
    mismatches = []
    compared = 0
    for seed in range(ORACLE_INSTANCES):
        model, kb = generate_instance(GeneratorConfig(seed=seed))
        assert len(model) <= 40
        ctx = EvaluationContext(model, kb)
        for vid in model.vertices:
            compared += 1
            if ctx.evaluate(vid) != naive_evaluate(model, kb, vid):
                mismatches.append((seed, vid))
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < ORACLE_BUDGET
    detail = f"{ORACLE_INSTANCES} instances, {compared} targets, {len(mismatches)} mismatches, {elapsed:.1f} s"
    assert criterion(5, ok, detail), mismatches[:10]


def _shrinks(before, after):
    """Names of the violated orderings between two results."""
    bad = []
    if after.status < before.status:
        bad.append("status")
    names = ("S_V", "S_M", "H_V", "H_M")
    for name, old, new in zip(names, before.sets, after.sets):
        if not old <= new:
            bad.append(name)
    return bad


def test_criterion_6_monotonicity(criterion):
    violations = []
    for seed in range(MONOTONE_INSTANCES):
        model, kb = generate_instance(GeneratorConfig(seed=seed))
        rng = random.Random(seed)
        before = {v: r for v, r in _all(model, kb).items()}
        for _ in range(MONOTONE_STEPS):
            kb = kb.add(*random_disclosure(model, rng))
            after = _all(model, kb)
            for vid in model.vertices:
                bad = _shrinks(before[vid], after[vid])
                if bad:
                    violations.append((seed, vid, tuple(bad)))
            before = after
    kinds = sorted({b for *_, bad in violations for b in bad})
    detail = f"{len(violations)} violations" + (f" (shrinking: {', '.join(kinds)}; e.g. seed {violations[0][0]} vertex {violations[0][1]})" if violations else "")
    assert criterion(6, not violations, detail), detail


def _all(model, kb):
    ctx = EvaluationContext(model, kb, validate=False)
    return {vid: ctx.evaluate(vid) for vid in model.vertices}


def _pure(model, kind):
    out = []
    for a in model.of_kind(VertexKind.SOFTWARE_ARTIFACT):
        kinds = {e.kind for e in model.outgoing(a.id)}
        if kinds == {kind}:
            out.append(a.id)
    return out


def test_criterion_7_masking(criterion):
    violations = []
    toggled = 0
    for seed in range(MASKING_INSTANCES):
        model, kb = generate_instance(GeneratorConfig(seed=seed))
        generated = [
            a.id
            for a in model.of_kind(VertexKind.SOFTWARE_ARTIFACT)
            if any(e.kind is EdgeKind.GENERATED for e in model.incoming(a.id))
        ]
        base = _all(model, kb)
        for kind in (EdgeKind.WAS_BUILD_TOOL_TO, EdgeKind.WAS_PRESENT):
            for vid in _pure(model, kind):
                sel = Selector.vertex(vid)
                if sel in kb.vulnerable_software:
                    flipped = kb.without("sw-vulnerable", sel)
                else:
                    flipped = kb.add("sw-vulnerable", sel)
                toggled += 1
                after = _all(model, flipped)
                for g in generated:
                    if g != vid and after[g].status != base[g].status:
                        violations.append((seed, kind.value, vid, g))
    ok = not violations and toggled > 0
    detail = f"{toggled} toggles over {MASKING_INSTANCES} instances, {len(violations)} violations"
    assert criterion(7, ok, detail), violations[:10]


def test_criterion_8_round_trip_and_determinism(criterion, ref_path, kb_paths):
    failures = []
    for seed in range(ROUND_TRIP_INSTANCES):
        model, kb = generate_instance(GeneratorConfig(seed=seed))
        if load_graph(save_graph(model)) != model or load_knowledge(save_knowledge(kb)) != kb:
            failures.append(seed)
    outputs = set()
    for hash_seed in ("1", "2", "3"):
        env = dict(os.environ, PYTHONHASHSEED=hash_seed)
        proc = subprocess.run(
            [sys.executable, "-m", "chainlog", "report", str(ref_path), "9", "-k", str(kb_paths[3])],
            capture_output=True,
            env=env,
            check=True,
        )
        outputs.add(proc.stdout)
    ok = not failures and len(outputs) == 1
    detail = f"{ROUND_TRIP_INSTANCES - len(failures)}/{ROUND_TRIP_INSTANCES} round trips; {len(outputs)} distinct report output(s) over 3 runs"
    assert criterion(8, ok, detail), failures


def test_criterion_9_scale(criterion):
    model, kb = generate_instance(GeneratorConfig(max_vertices=SCALE_VERTICES, seed=7))
    assert len(model) == SCALE_VERTICES
    order = model.topological_order()
    target = next(v for v in reversed(order) if model.vertex(v).is_artifact)
    start = time.perf_counter()
    res = EvaluationContext(model, kb).evaluate(target)
    elapsed = time.perf_counter() - start
    ok = elapsed < SCALE_BUDGET
    detail = f"{len(model)} vertices, {len(model.edges)} edges, target {target} -> {res.status}, {elapsed * 1000:.0f} ms (incl. validation)"
    assert criterion(9, ok, detail), detail
