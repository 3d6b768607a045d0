import pytest

from chainlog.fixtures import reference_model, reference_path, knowledge_path, scenario_knowledge
from chainlog.graph import ArtifactIdentity, Edge, LogModel, Vertex, VertexKind


@pytest.fixture
def ref():
    return reference_model()


@pytest.fixture
def ref_path():
    return reference_path()


@pytest.fixture(params=["use_case_1", "use_case_2", "use_case_3"])
def scenario(request):
    return request.param


@pytest.fixture
def uc1():
    return scenario_knowledge("use_case_1")


@pytest.fixture
def uc2():
    return scenario_knowledge("use_case_2")


@pytest.fixture
def uc3():
    return scenario_knowledge("use_case_3")


@pytest.fixture
def kb_paths():
    return {n: knowledge_path(f"use_case_{n}") for n in (1, 2, 3)}


def artifact(vid, name=None, version="1.0"):
    return Vertex(vid, VertexKind.SOFTWARE_ARTIFACT, identity=ArtifactIdentity(name or vid, version))


def host(vid):
    return Vertex(vid, VertexKind.HOST)


def env(vid):
    return Vertex(vid, VertexKind.BUILD_ENVIRONMENT)


def transformer(vid):
    return Vertex(vid, VertexKind.TRANSFORMER)


def edges(*triples):
    return [Edge(f"e{i}", kind, s, t) for i, (kind, s, t) in enumerate(triples, 1)]


@pytest.fixture
def two_host_chain():
    """Artifacts x and z built on host hA, published to hB; consumers fetch
    copies x2 (into y) and z2 (into w) back from hB."""
    vertices = [
        host("hA"), env("bA"), transformer("tA"), artifact("tool", "cc"),
        artifact("x", "libx"), artifact("z", "libz"),
        host("hB"), artifact("x2", "libx"), artifact("z2", "libz"),
        env("bC"), transformer("tC"), artifact("y", "app"),
        transformer("tD"), env("bD"), artifact("w", "other"),
    ]
    es = edges(
        ("hosted", "hA", "bA"), ("executed", "bA", "tA"), ("wasBuildToolTo", "tool", "tA"),
        ("generated", "tA", "x"), ("generated", "tA", "z"),
        ("wasPublishedTo", "x", "hB"), ("wasPublishedTo", "z", "hB"),
        ("transferred", "hB", "x2"), ("transferred", "hB", "z2"),
        ("wasInputTo", "x2", "tC"), ("executed", "bC", "tC"), ("generated", "tC", "y"),
        ("wasInputTo", "z2", "tD"), ("executed", "bD", "tD"), ("generated", "tD", "w"),
    )
    return LogModel(vertices, es)


# -- acceptance reporting ------------------------------------------------

_CRITERIA = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_CRITERIA] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(n, ok, detail)`` then assert."""
    lines = request.config.stash[_CRITERIA]

    def record(number, ok, detail):
        lines[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_CRITERIA, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(lines):
        terminalreporter.write_line(lines[number])
