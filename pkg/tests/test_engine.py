import random
import sys

import pytest
from hypothesis import given, settings, strategies as st

from chainlog.engine import (
    EMPTY_RESULT,
    EvaluationContext,
    InvalidGraph,
    Result,
    combine,
    evaluate,
    merge_results,
)
from chainlog.graph import EdgeKind, LogModel, UnknownVertex, VertexKind, WrongVertexKind
from chainlog.knowledge import KnowledgeBase, Selector, initial_host_status, initial_software_status
from chainlog.oracle import GeneratorConfig, generate_instance, naive_evaluate
from chainlog.status import MALICIOUS, SAFE, VULNERABLE
from conftest import artifact, edges, env, host, transformer


def fs(*xs):
    return frozenset(xs)


# -- merge / combine ------------------------------------------------------


def test_merge_unions_sets():
    x = Result(SAFE, fs("a"))
    y = Result(SAFE, fs("b"))
    assert merge_results(VULNERABLE, x, y) == Result(VULNERABLE, fs("a", "b"))


def test_merge_of_empties():
    assert merge_results(SAFE, EMPTY_RESULT, EMPTY_RESULT) == Result(SAFE)


result_st = st.builds(
    Result,
    st.sampled_from([SAFE, VULNERABLE, MALICIOUS]),
    *[st.frozensets(st.sampled_from("abcde"), max_size=3) for _ in range(4)],
)


@given(st.sampled_from([SAFE, VULNERABLE, MALICIOUS]), result_st, result_st)
def test_merge_commutes_on_sets(q, x, y):
    assert merge_results(q, x, y) == merge_results(q, y, x)
    assert merge_results(q, x, y).status is q


@given(st.lists(result_st, max_size=6), st.randoms())
def test_combine_is_order_independent(rs, rnd):
    shuffled = list(rs)
    rnd.shuffle(shuffled)
    assert combine(rs) == combine(shuffled)


# -- the three scenarios ----------------------------------------------------


def test_use_case_1_products_stay_safe(ref, uc1):
    res = evaluate(ref, uc1, "9")
    assert res.status is SAFE
    assert res.vulnerable_artifacts == fs("2", "3", "4")


def test_use_case_2_products_vulnerable(ref, uc2):
    for target in ("9", "10"):
        res = evaluate(ref, uc2, target)
        assert res.status is VULNERABLE
        assert {"6", target} <= res.vulnerable_artifacts


def test_use_case_3_products_malicious(ref, uc3):
    r9 = evaluate(ref, uc3, "9")
    assert r9.status is MALICIOUS
    assert r9.malicious_artifacts == fs("4", "9")
    assert r9.compromised_hosts == fs("5")
    assert "10" in evaluate(ref, uc3, "10").malicious_artifacts


def test_empty_knowledge_is_all_safe(ref):
    assert evaluate(ref, KnowledgeBase(), "9") == Result()


# -- per-kind functions -----------------------------------------------------


def test_all_statuses_empty(ref):
    assert EvaluationContext(ref).all_statuses(None, []) == Result()


def test_all_statuses_single_malicious():
    m = LogModel([artifact("m")])
    kb = KnowledgeBase().add("sw-malicious", Selector.vertex("m"))
    expected = naive_evaluate(m, kb, "m")
    assert expected == Result(MALICIOUS, fs(), fs("m"))
    assert EvaluationContext(m, kb).all_statuses(None, [m.vertex("m")]) == expected


def test_all_statuses_permutation(ref, uc3):
    ctx = EvaluationContext(ref, uc3)
    vs = list(ref.vertices.values())
    base = ctx.all_statuses(None, vs)
    rnd = random.Random(3)
    for _ in range(5):
        rnd.shuffle(vs)
        assert EvaluationContext(ref, uc3).all_statuses(None, vs) == base


def test_one_status_absent_vertex_is_malicious(ref):
    ctx = EvaluationContext(ref)
    assert ctx.one_status(None, None).status is MALICIOUS
    assert ctx.one_status(None, "not-in-graph").status is MALICIOUS


def test_one_status_safe_leaf():
    m = LogModel([artifact("a")])
    assert EvaluationContext(m).one_status(None, "a") == Result()


def test_one_status_threads_querying_identity(two_host_chain):
    kb = KnowledgeBase().add("sw-malicious", Selector.vertex("x"))
    ctx = EvaluationContext(two_host_chain, kb)
    x_id = two_host_chain.vertex("x2").identity
    z_id = two_host_chain.vertex("z2").identity
    assert ctx.one_status(x_id, "hB") == ctx.host_status(x_id, "hB")
    assert ctx.one_status(x_id, "hB").status is MALICIOUS
    assert ctx.one_status(z_id, "hB").status is SAFE
    assert ctx.one_status(None, "hB").status is SAFE


def _transformer_fixture():
    return LogModel(
        [artifact("tool"), artifact("in"), env("b"), host("h"), transformer("t"), artifact("out")],
        edges(
            ("wasBuildToolTo", "tool", "t"),
            ("wasInputTo", "in", "t"),
            ("hosted", "h", "b"),
            ("executed", "b", "t"),
            ("generated", "t", "out"),
        ),
    )


def test_vulnerable_tool_is_masked():
    m = _transformer_fixture()
    kb = KnowledgeBase().add("sw-vulnerable", Selector.vertex("tool"))
    res = EvaluationContext(m, kb).transformer_status("t")
    assert res.status is SAFE
    assert res.vulnerable_artifacts == fs("tool")


def test_malicious_tool_propagates():
    m = _transformer_fixture()
    kb = KnowledgeBase().add("sw-malicious", Selector.vertex("tool"))
    assert EvaluationContext(m, kb).transformer_status("t").status is MALICIOUS


def test_compromised_environment_makes_transformer_malicious():
    m = _transformer_fixture()
    kb = KnowledgeBase().add("sw-vulnerable", Selector.vertex("in")).add("host-compromised", Selector.host("h"))
    res = EvaluationContext(m, kb).transformer_status("t")
    assert res.status is MALICIOUS
    assert res.compromised_hosts == fs("h")


def test_tool_role_is_per_edge():
    # one artifact is a tool for t1 and an input for t2
    m = LogModel(
        [artifact("a"), transformer("t1"), transformer("t2"), artifact("o1"), artifact("o2")],
        edges(("wasBuildToolTo", "a", "t1"), ("wasInputTo", "a", "t2"), ("generated", "t1", "o1"), ("generated", "t2", "o2")),
    )
    kb = KnowledgeBase().add("sw-vulnerable", Selector.vertex("a"))
    assert evaluate(m, kb, "o1").status is SAFE
    assert evaluate(m, kb, "o2").status is VULNERABLE


def _environment_fixture():
    return LogModel([host("h"), artifact("p"), env("b")], edges(("hosted", "h", "b"), ("wasPresent", "p", "b")))


def test_vulnerable_environment_is_masked():
    m = _environment_fixture()
    kb = KnowledgeBase().add("host-vulnerable", Selector.host("h")).add("sw-vulnerable", Selector.vertex("p"))
    res = EvaluationContext(m, kb).build_environment_status("b")
    assert res.status is SAFE
    assert res.vulnerable_artifacts == fs("p") and res.vulnerable_hosts == fs("h")


def test_malicious_present_artifact_compromises_environment():
    m = _environment_fixture()
    kb = KnowledgeBase().add("sw-malicious", Selector.vertex("p"))
    assert EvaluationContext(m, kb).build_environment_status("b").status is MALICIOUS


def test_environment_without_parents_is_safe():
    assert EvaluationContext(LogModel([env("b")])).build_environment_status("b") == Result()


def test_host_with_malicious_present_artifact(ref, uc3):
    res = EvaluationContext(ref, uc3).host_status(None, "5")
    assert res.status is MALICIOUS and "5" in res.compromised_hosts


def test_host_records_then_masks_vulnerability():
    m = LogModel([artifact("a"), host("h")], edges(("wasPresent", "a", "h")))
    kb = KnowledgeBase().add("sw-vulnerable", Selector.vertex("a"))
    res = EvaluationContext(m, kb).host_status(None, "h")
    assert res.status is SAFE
    assert res.vulnerable_hosts == fs("h")


def test_two_host_chain(two_host_chain):
    # frozen from naive_evaluate on this fixture
    kb = KnowledgeBase().add("sw-malicious", Selector.vertex("x"))
    y = evaluate(two_host_chain, kb, "y")
    assert y == Result(MALICIOUS, fs(), fs("x", "x2", "y"), fs(), fs("hB"))
    assert evaluate(two_host_chain, kb, "w") == Result()
    assert evaluate(two_host_chain, kb, "z2") == Result()
    for target in ("y", "w", "x2", "z2", "hB"):
        assert evaluate(two_host_chain, kb, target) == naive_evaluate(two_host_chain, kb, target)


def test_vulnerable_published_copy_propagates(two_host_chain):
    kb = KnowledgeBase().add("sw-vulnerable", Selector.vertex("x"))
    y = evaluate(two_host_chain, kb, "y")
    assert y.status is VULNERABLE
    assert y.vulnerable_artifacts == fs("x", "x2", "y")
    assert y.vulnerable_hosts == fs()


def test_compromised_source_host_taints_every_download(two_host_chain):
    kb = KnowledgeBase().add("host-compromised", Selector.host("hB"))
    assert evaluate(two_host_chain, kb, "w").status is MALICIOUS
    assert evaluate(two_host_chain, kb, "y").status is MALICIOUS


def test_wrong_kind_and_unknown(ref):
    ctx = EvaluationContext(ref)
    with pytest.raises(WrongVertexKind):
        ctx.transformer_status("9")
    with pytest.raises(WrongVertexKind):
        ctx.software_status("8")
    with pytest.raises(UnknownVertex):
        ctx.evaluate("404")


def test_invalid_graph_rejected():
    m = LogModel([artifact("a"), transformer("t")], edges(("wasInputTo", "a", "t"), ("generated", "t", "a")))
    with pytest.raises(InvalidGraph) as err:
        evaluate(m, None, "a")
    assert "CycleDetected" in err.value.report.codes()


def test_deep_chain_does_not_recurse():
    depth = 3000
    vertices = [artifact("a0")]
    triples = []
    for i in range(depth):
        vertices += [transformer(f"t{i}"), artifact(f"a{i + 1}")]
        triples += [("wasInputTo", f"a{i}", f"t{i}"), ("generated", f"t{i}", f"a{i + 1}")]
    m = LogModel(vertices, edges(*triples))
    kb = KnowledgeBase().add("sw-vulnerable", Selector.vertex("a0"))
    assert depth * 3 > sys.getrecursionlimit()
    res = evaluate(m, kb, f"a{depth}")
    assert res.status is VULNERABLE
    assert len(res.vulnerable_artifacts) == depth + 1


# -- properties over generated instances ---------------------------------

seeds = st.integers(min_value=0, max_value=10**6)


def _instance(seed, n=25):
    return generate_instance(GeneratorConfig(max_vertices=n, seed=seed))


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_matches_oracle(seed):
    m, kb = _instance(seed)
    for vid in m.vertices:
        assert evaluate(m, kb, vid) == naive_evaluate(m, kb, vid), (seed, vid)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_memo_is_sound_and_deterministic(seed):
    m, kb = _instance(seed)
    with_memo = EvaluationContext(m, kb)
    for vid in m.vertices:
        a = with_memo.evaluate(vid)
        assert a == EvaluationContext(m, kb, memo=False).evaluate(vid)
        assert a == evaluate(m, kb, vid)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_result_invariants(seed):
    m, kb = _instance(seed)
    kind = {vid: v.kind for vid, v in m.vertices.items()}
    for vid, v in m.vertices.items():
        res = evaluate(m, kb, vid)
        assert all(kind[x] is VertexKind.SOFTWARE_ARTIFACT for x in res.vulnerable_artifacts | res.malicious_artifacts)
        assert all(kind[x] is VertexKind.HOST for x in res.vulnerable_hosts | res.compromised_hosts)
        if v.kind is VertexKind.SOFTWARE_ARTIFACT:
            assert res.status >= initial_software_status(kb, v)
            if res.status is SAFE:
                assert all(vid not in s for s in res.sets)
        if v.kind is VertexKind.HOST and initial_host_status(kb, v) is MALICIOUS:
            assert res.status is MALICIOUS


def _influencers(model, target):
    """Every (vertex) whose status can reach ``target``, by backward search."""
    start = model.vertex(target)
    seen = set()
    pending = [(start.id, start.identity if start.kind is VertexKind.SOFTWARE_ARTIFACT else None)]
    while pending:
        vid, q = pending.pop()
        if (vid, q) in seen:
            continue
        seen.add((vid, q))
        v = model.vertex(vid)
        for e in model.incoming(vid):
            src = model.vertex(e.source)
            if v.kind is VertexKind.HOST:
                if e.kind is EdgeKind.WAS_PRESENT:
                    pending.append((src.id, None))
                elif e.kind is EdgeKind.WAS_PUBLISHED_TO and q is not None and src.identity == q:
                    pending.append((src.id, None))
            elif v.kind is VertexKind.SOFTWARE_ARTIFACT:
                pending.append((src.id, v.identity if src.kind is VertexKind.HOST else None))
            else:
                pending.append((src.id, None))
    return {vid for vid, _ in seen}


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_malicious_dominance(seed):
    m, kb = _instance(seed)
    for vid in m.vertices:
        sources = _influencers(m, vid)
        tainted = any(
            (m.vertex(x).is_artifact and initial_software_status(kb, m.vertex(x)) is MALICIOUS)
            or (m.vertex(x).kind is VertexKind.HOST and initial_host_status(kb, m.vertex(x)) is MALICIOUS)
            for x in sources
        )
        if tainted:
            assert evaluate(m, kb, vid).status is MALICIOUS, (seed, vid)


@settings(max_examples=40, deadline=None)
@given(seeds, st.randoms())
def test_status_and_blame_are_monotone(seed, rnd):
    from chainlog.oracle import random_disclosure

    m, kb = _instance(seed)
    category, sel = random_disclosure(m, rnd)
    bigger = kb.add(category, sel)
    for vid in m.vertices:
        before, after = evaluate(m, kb, vid), evaluate(m, bigger, vid)
        assert after.status >= before.status
        # an element may move from the vulnerable to the malicious set, never out
        assert before.vulnerable_artifacts | before.malicious_artifacts <= after.vulnerable_artifacts | after.malicious_artifacts
        assert before.malicious_artifacts <= after.malicious_artifacts
        assert before.vulnerable_hosts | before.compromised_hosts <= after.vulnerable_hosts | after.compromised_hosts
        assert before.compromised_hosts <= after.compromised_hosts


def test_generated_instances_exercise_published_copies():
    # the identity-matched copy path must actually be hit by the random suite
    hits = 0
    for seed in range(200):
        m, kb = generate_instance(GeneratorConfig(seed=seed))
        for h in m.of_kind(VertexKind.HOST):
            published = {p.identity for p in m.parents_via(h.id, EdgeKind.WAS_PUBLISHED_TO)}
            for e in m.outgoing(h.id):
                target = m.vertex(e.target)
                if e.kind is EdgeKind.TRANSFERRED and target.identity in published:
                    if evaluate(m, kb, target.id).status is not SAFE:
                        hits += 1
    assert hits >= 20
