"""Independent correctness machinery.

* :func:`naive_evaluate` - line-by-line, unmemoized transcription of the
  propagation pseudocode, threading the initial result through every call.
* :func:`table_oracle` - the per-kind rule tables, transcribed row by row.
* :func:`minimal_row_fixture` - smallest graph exercising one table row.
* :func:`generate_instance` - seeded random valid (model, knowledge) pairs.

Nothing here imports the engine's evaluation code; results are converted to
:class:`~chainlog.engine.Result` only at the boundary for comparison.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .engine import Result
from .graph import ArtifactIdentity, Edge, EdgeKind, LogModel, Vertex, VertexKind
from .knowledge import KnowledgeBase, Selector
from .status import MALICIOUS, SAFE, VULNERABLE, SecurityStatus

# -- naive transcription ------------------------------------------------

# Res as a mutable 5-list: [q, S_V, S_M, H_V, H_M]
_Res = list


def _copy(r: _Res) -> _Res:
    return [r[0], set(r[1]), set(r[2]), set(r[3]), set(r[4])]


def _merge(q: SecurityStatus, x: _Res, y: _Res) -> _Res:
    return [q, x[1] | y[1], x[2] | y[2], x[3] | y[3], x[4] | y[4]]


class OracleDepthExceeded(RuntimeError):
    """Recursion deeper than the vertex count: the graph has a cycle."""


class _Naive:
    def __init__(self, model: LogModel, kb: KnowledgeBase) -> None:
        self.model = model
        self.kb = kb
        self.limit = len(model) + 1

    def parents(self, v: Vertex) -> list[Vertex]:
        return [self.model.vertices[e.source] for e in self.model.incoming(v.id)]

    def initial_software(self, s: Vertex) -> SecurityStatus:
        a, b = SAFE, SAFE
        if any(sel.matches(s) for sel in self.kb.vulnerable_software):
            a = VULNERABLE
        if any(sel.matches(s) for sel in self.kb.malicious_software):
            b = MALICIOUS
        return max(a, b)

    def software(self, s: Vertex, r0: _Res, depth: int) -> _Res:
        self._guard(depth)
        r = _copy(r0)
        rp = self.all_statuses(s, self.parents(s), r0, depth)
        q = max(self.initial_software(s), rp[0])
        if q == VULNERABLE:
            r[1] = r[1] | {s.id}
        if q == MALICIOUS:
            r[2] = r[2] | {s.id}
        return _merge(q, r, rp)

    def all_statuses(self, s: Optional[Vertex], vs, r0: _Res, depth: int) -> _Res:
        r = _copy(r0)
        for v in vs:
            rp = self.one_status(s, v, r0, depth + 1)
            r = _merge(max(r[0], rp[0]), r, rp)
        return r

    def one_status(self, s: Optional[Vertex], v: Optional[Vertex], r0: _Res, depth: int) -> _Res:
        if v is not None:
            if v.kind is VertexKind.SOFTWARE_ARTIFACT:
                return self.software(v, r0, depth)
            if v.kind is VertexKind.TRANSFORMER:
                return self.transformer(v, r0, depth)
            if v.kind is VertexKind.BUILD_ENVIRONMENT:
                return self.build_environment(v, r0, depth)
            if v.kind is VertexKind.HOST:
                return self.host(s, v, r0, depth)
        # v doesn't exist or element not known
        r = _copy(r0)
        r[0] = MALICIOUS
        return r

    def transformer(self, t: Vertex, r0: _Res, depth: int) -> _Res:
        self._guard(depth)
        tools: list[Vertex] = []
        others: list[Vertex] = []
        for e in self.model.incoming(t.id):
            v = self.model.vertices[e.source]
            if v.kind is VertexKind.SOFTWARE_ARTIFACT and e.kind is EdgeKind.WAS_BUILD_TOOL_TO:
                tools.append(v)
            else:
                others.append(v)
        r_t = self.all_statuses(None, tools, r0, depth)
        r_a = self.all_statuses(None, others, r0, depth)
        q = SAFE
        if r_t[0] == MALICIOUS:
            q = MALICIOUS
        return _merge(max(q, r_a[0]), r_t, r_a)

    def build_environment(self, b: Vertex, r0: _Res, depth: int) -> _Res:
        self._guard(depth)
        r = self.all_statuses(None, self.parents(b), r0, depth)
        if r[0] == MALICIOUS:
            return r
        r[0] = SAFE
        return r

    def host(self, s: Optional[Vertex], h: Vertex, r0: _Res, depth: int) -> _Res:
        self._guard(depth)
        r = _copy(r0)
        if Selector.host(h.id) in self.kb.compromised_hosts:
            r[0] = MALICIOUS
        elif Selector.host(h.id) in self.kb.vulnerable_hosts:
            r[0] = VULNERABLE
        p_h = self.parents(h)
        p_os = [
            self.model.vertices[e.source]
            for e in self.model.incoming(h.id)
            if e.kind is EdgeKind.WAS_PRESENT
        ]
        r_os = self.all_statuses(s, p_os, r0, depth)
        r = _merge(max(r[0], r_os[0]), r, r_os)
        if r[0] == VULNERABLE:
            r[3] = r[3] | {h.id}
            r[0] = SAFE
        r_s = _copy(r0)
        if s is not None and p_h:
            published = {
                e.source for e in self.model.incoming(h.id) if e.kind is EdgeKind.WAS_PUBLISHED_TO
            }
            matches = [
                x for x in p_h if x.id in published and x.identity == s.identity and x.id != s.id
            ]
            if matches:
                for p in matches:
                    rp = self.one_status(s, p, r0, depth + 1)
                    r_s = _merge(max(r_s[0], rp[0]), r_s, rp)
                q = MALICIOUS
                if r[0] != MALICIOUS:
                    q = r_s[0]
                r = _merge(q, r, r_s)
        if r[0] == MALICIOUS:
            r[4] = r[4] | {h.id}
        return r

    def _guard(self, depth: int) -> None:
        if depth > self.limit:
            raise OracleDepthExceeded(f"recursion depth {depth} exceeds {self.limit}")


def naive_evaluate(model: LogModel, kb: Optional[KnowledgeBase], target: str) -> Result:
    """Exponential-time reference evaluation of ``target``."""
    naive = _Naive(model, kb if kb is not None else KnowledgeBase())
    v = model.vertex(target)
    r0: _Res = [SAFE, set(), set(), set(), set()]
    s = v if v.kind is VertexKind.SOFTWARE_ARTIFACT else None
    r = naive.one_status(s, v, r0, 0)
    return Result(r[0], *(frozenset(x) for x in r[1:]))


# -- rule tables --------------------------------------------------------


class UnknownRow(KeyError):
    pass


# (first input, second input) -> result
RULE_TABLES: dict[str, dict[tuple[str, str], str]] = {
    "host": {  # (Status_S, Status_H) -> host result
        ("safe", "safe"): "safe",
        ("vulnerable", "safe"): "vulnerable",
        ("malicious", "safe"): "compromised",
        ("safe", "compromised"): "compromised",
        ("vulnerable", "compromised"): "compromised",
        ("malicious", "compromised"): "compromised",
    },
    "build-step": {  # (build tools, other inputs) -> T1 result
        ("safe", "safe"): "safe",
        ("vulnerable", "safe"): "safe",
        ("malicious", "safe"): "malicious",
        ("safe", "vulnerable"): "vulnerable",
        ("vulnerable", "vulnerable"): "vulnerable",
        ("malicious", "vulnerable"): "malicious",
        ("safe", "malicious"): "malicious",
        ("vulnerable", "malicious"): "malicious",
        ("malicious", "malicious"): "malicious",
    },
    "environment": {  # (host status, input artifacts) -> build environment result
        ("safe", "safe"): "safe",
        ("vulnerable", "safe"): "safe",
        ("malicious", "safe"): "compromised",
        ("safe", "vulnerable"): "safe",
        ("vulnerable", "vulnerable"): "safe",
        ("malicious", "vulnerable"): "compromised",
        ("safe", "malicious"): "compromised",
        ("vulnerable", "malicious"): "compromised",
        ("malicious", "malicious"): "compromised",
    },
    "transformer": {  # (T1 result, build environment result) -> transformer result
        ("safe", "safe"): "safe",
        ("vulnerable", "safe"): "vulnerable",
        ("malicious", "safe"): "malicious",
        ("safe", "compromised"): "malicious",
        ("vulnerable", "compromised"): "malicious",
        ("malicious", "compromised"): "malicious",
    },
}


def table_rows(table: str) -> list[tuple[str, str]]:
    return list(_table(table))


def _table(table: str) -> dict[tuple[str, str], str]:
    try:
        return RULE_TABLES[table]
    except KeyError:
        raise UnknownRow(f"unknown table {table!r}") from None


def table_oracle(table: str, row: tuple[str, str]) -> str:
    try:
        return _table(table)[tuple(row)]  # type: ignore[index]
    except KeyError:
        raise UnknownRow(f"table {table} has no row {tuple(row)}") from None


@dataclass(frozen=True)
class RowFixture:
    model: LogModel
    kb: KnowledgeBase
    target: str


def _artifact(vid: str) -> Vertex:
    return Vertex(vid, VertexKind.SOFTWARE_ARTIFACT, identity=ArtifactIdentity(vid, "1.0"))


def _disclose_software(kb: KnowledgeBase, vid: str, status: str) -> KnowledgeBase:
    if status == "vulnerable":
        return kb.add("sw-vulnerable", Selector.vertex(vid))
    if status == "malicious":
        return kb.add("sw-malicious", Selector.vertex(vid))
    return kb


def _disclose_host(kb: KnowledgeBase, vid: str, status: str) -> KnowledgeBase:
    if status == "vulnerable":
        return kb.add("host-vulnerable", Selector.host(vid))
    if status in ("malicious", "compromised"):
        return kb.add("host-compromised", Selector.host(vid))
    return kb


def minimal_row_fixture(table: str, row: tuple[str, str]) -> RowFixture:
    """Smallest graph whose evaluation at ``target`` exercises one table row."""
    table_oracle(table, row)
    first, second = row
    kb = KnowledgeBase()
    A, T, B, H = (
        VertexKind.SOFTWARE_ARTIFACT,
        VertexKind.TRANSFORMER,
        VertexKind.BUILD_ENVIRONMENT,
        VertexKind.HOST,
    )

    if table == "host":
        # artifact present on the host; evaluate the host
        m = LogModel(
            [_artifact("a"), Vertex("h", H)],
            [Edge("e1", EdgeKind.WAS_PRESENT, "a", "h")],
        )
        kb = _disclose_host(_disclose_software(kb, "a", first), "h", second)
        return RowFixture(m, kb, "h")

    if table == "build-step":
        # one tool, one input, a safe environment, one product
        m = LogModel(
            [_artifact("tool"), _artifact("in"), Vertex("b", B), Vertex("t", T), _artifact("out")],
            [
                Edge("e1", EdgeKind.WAS_BUILD_TOOL_TO, "tool", "t"),
                Edge("e2", EdgeKind.WAS_INPUT_TO, "in", "t"),
                Edge("e3", EdgeKind.EXECUTED, "b", "t"),
                Edge("e4", EdgeKind.GENERATED, "t", "out"),
            ],
        )
        kb = _disclose_software(_disclose_software(kb, "tool", first), "in", second)
        return RowFixture(m, kb, "out")

    if table == "environment":
        # host and one present artifact feeding the environment; evaluate it
        m = LogModel(
            [Vertex("h", H), _artifact("p"), Vertex("b", B)],
            [
                Edge("e1", EdgeKind.HOSTED, "h", "b"),
                Edge("e2", EdgeKind.WAS_PRESENT, "p", "b"),
            ],
        )
        kb = _disclose_software(_disclose_host(kb, "h", first), "p", second)
        return RowFixture(m, kb, "b")

    # transformer table: phase-1 status comes from the single input, the environment
    # is compromised through its host
    m = LogModel(
        [_artifact("in"), Vertex("h", H), Vertex("b", B), Vertex("t", T), _artifact("out")],
        [
            Edge("e1", EdgeKind.WAS_INPUT_TO, "in", "t"),
            Edge("e2", EdgeKind.HOSTED, "h", "b"),
            Edge("e3", EdgeKind.EXECUTED, "b", "t"),
            Edge("e4", EdgeKind.GENERATED, "t", "out"),
        ],
    )
    kb = _disclose_host(_disclose_software(kb, "in", first), "h", second)
    return RowFixture(m, kb, "out")


def observed_row_result(table: str, fixture: RowFixture, res: Result) -> str:
    """Read the table's result column off an evaluation of the fixture target."""
    if table == "host":
        if res.status is MALICIOUS:
            return "compromised"
        # masked host vulnerability is recorded, not propagated
        return "vulnerable" if fixture.target in res.vulnerable_hosts else "safe"
    if table == "environment":
        return "compromised" if res.status is MALICIOUS else str(res.status)
    return str(res.status)


# -- random instances ---------------------------------------------------


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorConfig:
    max_vertices: int = 40
    edge_density: float = 0.3
    p_sw_vulnerable: float = 0.15
    p_sw_malicious: float = 0.05
    p_host_vulnerable: float = 0.1
    p_host_compromised: float = 0.05
    p_identity_selector: float = 0.3
    seed: int = 0

    def check(self) -> None:
        if self.max_vertices < 1:
            raise ConfigError("max_vertices must be positive")
        for name in (
            "edge_density",
            "p_sw_vulnerable",
            "p_sw_malicious",
            "p_host_vulnerable",
            "p_host_compromised",
            "p_identity_selector",
        ):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {value}")


class _Builder:
    """Adds vertices in creation order; edges only run from older to newer
    vertices, so every generated graph is acyclic."""

    def __init__(self, cfg: GeneratorConfig) -> None:
        self.cfg = cfg
        self.rng = random.Random(cfg.seed)
        self.model = LogModel()
        self.artifacts: list[str] = []
        self.hosts: list[str] = []
        self.n_edges = 0
        self.n_names = 0

    @property
    def room(self) -> int:
        return self.cfg.max_vertices - len(self.model)

    def vertex(self, kind: VertexKind, identity: Optional[ArtifactIdentity] = None) -> str:
        vid = f"v{len(self.model)}"
        self.model.add_vertex(Vertex(vid, kind, identity=identity))
        if kind is VertexKind.SOFTWARE_ARTIFACT:
            self.artifacts.append(vid)
        elif kind is VertexKind.HOST:
            self.hosts.append(vid)
        return vid

    def artifact(self, identity: Optional[ArtifactIdentity] = None) -> str:
        if identity is None:
            self.n_names += 1
            identity = ArtifactIdentity(f"pkg{self.n_names}", f"1.{self.rng.randrange(3)}")
        return self.vertex(VertexKind.SOFTWARE_ARTIFACT, identity)

    def edge(self, kind: EdgeKind, source: str, target: str) -> None:
        self.n_edges += 1
        self.model.add_edge(Edge(f"e{self.n_edges}", kind, source, target))

    def pick(self, pool: list[str], most: int) -> list[str]:
        if not pool or most <= 0:
            return []
        return self.rng.sample(pool, self.rng.randint(0, min(most, len(pool))))

    def spread(self) -> int:
        return max(1, round(4 * self.cfg.edge_density))

    def new_host(self) -> str:
        present = self.pick(self.artifacts, self.spread())
        h = self.vertex(VertexKind.HOST)
        for a in present:
            self.edge(EdgeKind.WAS_PRESENT, a, h)
        return h

    def base_artifact(self) -> str:
        source = self.rng.choice(self.hosts) if self.hosts and self.rng.random() < 0.6 else None
        a = self.artifact()
        if source is not None:
            self.edge(EdgeKind.TRANSFERRED, source, a)
        return a

    def build_step(self, force_roles: bool) -> None:
        rng = self.rng
        b = self.vertex(VertexKind.BUILD_ENVIRONMENT)
        if self.hosts and rng.random() < 0.85:
            self.edge(EdgeKind.HOSTED, rng.choice(self.hosts), b)
        for a in self.pick(self.artifacts, self.spread()):
            self.edge(EdgeKind.WAS_PRESENT, a, b)
        t = self.vertex(VertexKind.TRANSFORMER)
        self.edge(EdgeKind.EXECUTED, b, t)
        low = 1 if force_roles else 0
        tools = rng.sample(self.artifacts, rng.randint(low, min(2, len(self.artifacts))))
        inputs = rng.sample(self.artifacts, rng.randint(max(low, 1), min(3, len(self.artifacts))))
        for a in tools:
            self.edge(EdgeKind.WAS_BUILD_TOOL_TO, a, t)
        for a in inputs:
            if a in tools and rng.random() < 0.5 and not force_roles:
                continue
            self.edge(EdgeKind.WAS_INPUT_TO, a, t)
        outputs = [self.artifact() for _ in range(min(self.room, rng.randint(1, 2)))]
        for g in outputs:
            self.edge(EdgeKind.GENERATED, t, g)
        if outputs and self.room >= 2 and rng.random() < 0.6:
            self.publish(outputs)

    def publish(self, outputs: list[str]) -> None:
        rng = self.rng
        h = self.new_host()
        published = [g for g in outputs if rng.random() < 0.8] or outputs[:1]
        for g in published:
            self.edge(EdgeKind.WAS_PUBLISHED_TO, g, h)
        # consumers fetch copies back; sometimes an unrelated artifact
        for _ in range(rng.randint(1, 2)):
            if self.room < 1:
                break
            if rng.random() < 0.75:
                origin = self.model.vertices[rng.choice(published)]
                copy = self.artifact(origin.identity)
            else:
                copy = self.artifact()
            self.edge(EdgeKind.TRANSFERRED, h, copy)

    def run(self) -> LogModel:
        rng = self.rng
        n_base = min(self.room, rng.randint(2, 4))
        for _ in range(n_base):
            self.artifact()
        if self.room >= 1:
            self.new_host()
        # keep room for one full build step
        for _ in range(min(self.room - 3, rng.randint(1, 3))):
            self.base_artifact()
        first = True
        while self.room >= 3:
            self.build_step(force_roles=first)
            first = False
            if self.room >= 1 and rng.random() < 0.3:
                self.base_artifact()
        while self.room >= 1 and rng.random() < 0.5:
            self.base_artifact()
        return self.model

    def knowledge(self) -> KnowledgeBase:
        cfg, rng = self.cfg, self.rng
        kb = KnowledgeBase()
        for a in self.artifacts:
            for category, p in (
                ("sw-vulnerable", cfg.p_sw_vulnerable),
                ("sw-malicious", cfg.p_sw_malicious),
            ):
                if rng.random() < p:
                    if rng.random() < cfg.p_identity_selector:
                        sel = Selector.of_identity(self.model.vertices[a].identity)  # type: ignore[arg-type]
                    else:
                        sel = Selector.vertex(a)
                    kb = kb.add(category, sel)
        for h in self.hosts:
            if rng.random() < cfg.p_host_vulnerable:
                kb = kb.add("host-vulnerable", Selector.host(h))
            if rng.random() < cfg.p_host_compromised:
                kb = kb.add("host-compromised", Selector.host(h))
        return kb


def generate_instance(config: GeneratorConfig) -> tuple[LogModel, KnowledgeBase]:
    """Seeded random valid (model, knowledge base) pair.

    Construction is layered: base artifacts and a first host, then build
    steps (environment, transformer with tools and inputs, products), with
    products published to fresh hosts and copies transferred back out for
    later steps to consume.
    """
    config.check()
    builder = _Builder(config)
    model = builder.run()
    return model, builder.knowledge()


def random_disclosure(
    model: LogModel, rng: random.Random
) -> tuple[str, Selector]:
    """One random disclosure that applies to some vertex of ``model``."""
    artifacts = model.of_kind(VertexKind.SOFTWARE_ARTIFACT)
    hosts = model.of_kind(VertexKind.HOST)
    choices = []
    if artifacts:
        choices += ["sw-vulnerable", "sw-malicious"]
    if hosts:
        choices += ["host-vulnerable", "host-compromised"]
    category = rng.choice(choices)
    if category.startswith("host"):
        return category, Selector.host(rng.choice(sorted(h.id for h in hosts)))
    a = rng.choice(sorted(artifacts, key=lambda v: v.id))
    if rng.random() < 0.3:
        return category, Selector.of_identity(a.identity)  # type: ignore[arg-type]
    return category, Selector.vertex(a.id)
