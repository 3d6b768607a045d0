"""Typed property graph recording the build history of a software product.

Vertices are hosts, build environments, transformers (build steps) and
software artifacts. Edges are directed and typed; each edge kind admits only
specific endpoint kinds (see ``ALLOWED_ENDPOINTS``).
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import astuple, dataclass, field
from enum import Enum
from graphlib import CycleError, TopologicalSorter
from typing import Iterable, Iterator, Mapping, Optional


class VertexKind(str, Enum):
    SOFTWARE_ARTIFACT = "softwareArtifact"
    TRANSFORMER = "transformer"
    HOST = "host"
    BUILD_ENVIRONMENT = "buildEnvironment"

    def __str__(self) -> str:
        return self.value


class EdgeKind(str, Enum):
    HOSTED = "hosted"
    EXECUTED = "executed"
    WAS_INPUT_TO = "wasInputTo"
    WAS_BUILD_TOOL_TO = "wasBuildToolTo"
    WAS_PRESENT = "wasPresent"
    GENERATED = "generated"
    WAS_PUBLISHED_TO = "wasPublishedTo"
    TRANSFERRED = "transferred"

    def __str__(self) -> str:
        return self.value


S, T, H, B = (
    VertexKind.SOFTWARE_ARTIFACT,
    VertexKind.TRANSFORMER,
    VertexKind.HOST,
    VertexKind.BUILD_ENVIRONMENT,
)

#: edge kind -> (allowed source kinds, allowed target kinds)
ALLOWED_ENDPOINTS: dict[EdgeKind, tuple[frozenset[VertexKind], frozenset[VertexKind]]] = {
    EdgeKind.HOSTED: (frozenset({H}), frozenset({B})),
    EdgeKind.EXECUTED: (frozenset({B}), frozenset({T})),
    EdgeKind.WAS_INPUT_TO: (frozenset({S}), frozenset({T})),
    EdgeKind.WAS_BUILD_TOOL_TO: (frozenset({S}), frozenset({T})),
    EdgeKind.WAS_PRESENT: (frozenset({S}), frozenset({B, H})),
    EdgeKind.GENERATED: (frozenset({T}), frozenset({S})),
    EdgeKind.WAS_PUBLISHED_TO: (frozenset({S}), frozenset({H})),
    EdgeKind.TRANSFERRED: (frozenset({H}), frozenset({S})),
}


def endpoints_allowed(kind: EdgeKind, source: VertexKind, target: VertexKind) -> bool:
    sources, targets = ALLOWED_ENDPOINTS[kind]
    return source in sources and target in targets


class GraphError(Exception):
    """Base class for log model construction errors."""


class DuplicateVertexId(GraphError):
    pass


class DuplicateEdgeId(GraphError):
    pass


class MissingIdentity(GraphError):
    pass


class ForbiddenIdentity(GraphError):
    pass


class DanglingEndpoint(GraphError):
    pass


class IllegalEndpointKinds(GraphError):
    pass


class UnknownVertex(GraphError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class WrongVertexKind(GraphError, TypeError):
    pass


@dataclass(frozen=True, order=True)
class ArtifactIdentity:
    """Logical identity shared by every stored copy of an artifact."""

    name: str
    version: str
    digest: Optional[str] = None

    def __str__(self) -> str:
        text = f"{self.name}@{self.version}"
        return f"{text}#{self.digest}" if self.digest else text

    @classmethod
    def parse(cls, text: str) -> "ArtifactIdentity":
        """Parse ``name@version`` or ``name@version#digest``."""
        body, _, digest = text.partition("#")
        name, sep, version = body.rpartition("@")
        if not sep or not name or not version:
            raise ValueError(f"identity must look like name@version, got {text!r}")
        return cls(name, version, digest or None)


@dataclass(frozen=True)
class Vertex:
    id: str
    kind: VertexKind
    labels: frozenset[str] = frozenset()
    properties: Mapping[str, str] = field(default_factory=dict)
    identity: Optional[ArtifactIdentity] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", VertexKind(self.kind))
        object.__setattr__(self, "labels", frozenset(self.labels))
        object.__setattr__(self, "properties", dict(self.properties))

    def __hash__(self) -> int:
        return hash(self.id)

    @property
    def is_artifact(self) -> bool:
        return self.kind is VertexKind.SOFTWARE_ARTIFACT


@dataclass(frozen=True)
class Edge:
    id: str
    kind: EdgeKind
    source: str
    target: str
    properties: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", EdgeKind(self.kind))
        object.__setattr__(self, "properties", dict(self.properties))

    def __hash__(self) -> int:
        return hash(self.id)


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    elements: tuple[str, ...] = ()

    def __str__(self) -> str:
        where = f" [{', '.join(self.elements)}]" if self.elements else ""
        return f"{self.code}: {self.message}{where}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    def __bool__(self) -> bool:
        return bool(self.violations)

    def __iter__(self) -> Iterator[Violation]:
        return iter(self.violations)

    def __len__(self) -> int:
        return len(self.violations)

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}

    def __str__(self) -> str:
        if self.ok:
            return "OK"
        return "\n".join(str(v) for v in self.violations)


class LogModel:
    """Log model property graph.

    ``add_vertex`` and ``add_edge`` check local invariants eagerly (unless
    ``check=False``). Global invariants (acyclicity, one build environment
    per transformer) are reported by :meth:`validate`.
    """

    def __init__(
        self,
        vertices: Iterable[Vertex] = (),
        edges: Iterable[Edge] = (),
        check: bool = True,
    ) -> None:
        self._vertices: dict[str, Vertex] = {}
        self._edges: dict[str, Edge] = {}
        self._incoming: dict[str, list[Edge]] = defaultdict(list)
        self._outgoing: dict[str, list[Edge]] = defaultdict(list)
        # unknown document fields kept by lenient loading, see io.load_graph
        self.extras: dict[str, dict] = {}
        for v in vertices:
            self.add_vertex(v, check=check)
        for e in edges:
            self.add_edge(e, check=check)

    # -- construction -------------------------------------------------

    def add_vertex(self, v: Vertex, check: bool = True) -> "LogModel":
        if v.id in self._vertices:
            raise DuplicateVertexId(f"vertex id {v.id!r} already present")
        if check:
            _check_identity(v)
        self._vertices[v.id] = v
        return self

    def add_edge(self, e: Edge, check: bool = True) -> "LogModel":
        if e.id in self._edges:
            raise DuplicateEdgeId(f"edge id {e.id!r} already present")
        if check:
            for end in (e.source, e.target):
                if end not in self._vertices:
                    raise DanglingEndpoint(f"edge {e.id!r} references unknown vertex {end!r}")
            src, dst = self._vertices[e.source].kind, self._vertices[e.target].kind
            if not endpoints_allowed(e.kind, src, dst):
                raise IllegalEndpointKinds(
                    f"edge {e.id!r}: {e.kind} cannot connect {src} -> {dst}"
                )
        self._edges[e.id] = e
        self._incoming[e.target].append(e)
        self._outgoing[e.source].append(e)
        return self

    # -- access -------------------------------------------------------

    @property
    def vertices(self) -> Mapping[str, Vertex]:
        return self._vertices

    @property
    def edges(self) -> Mapping[str, Edge]:
        return self._edges

    def __len__(self) -> int:
        return len(self._vertices)

    def __contains__(self, vertex_id: object) -> bool:
        return vertex_id in self._vertices

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LogModel):
            return NotImplemented
        return _full(self._vertices) == _full(other._vertices) and _full(
            self._edges
        ) == _full(other._edges)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"LogModel({len(self._vertices)} vertices, {len(self._edges)} edges)"

    def vertex(self, vertex_id: str) -> Vertex:
        try:
            return self._vertices[vertex_id]
        except KeyError:
            raise UnknownVertex(f"unknown vertex {vertex_id!r}") from None

    def of_kind(self, kind: VertexKind) -> list[Vertex]:
        return [v for v in self._vertices.values() if v.kind is kind]

    def incoming(self, vertex_id: str) -> list[Edge]:
        self.vertex(vertex_id)
        return list(self._incoming.get(vertex_id, ()))

    def outgoing(self, vertex_id: str) -> list[Edge]:
        self.vertex(vertex_id)
        return list(self._outgoing.get(vertex_id, ()))

    def parents_of(self, vertex_id: str) -> frozenset[Vertex]:
        """Sources of all incoming edges of ``vertex_id``."""
        self.vertex(vertex_id)
        return frozenset(self._vertices[e.source] for e in self._incoming.get(vertex_id, ()))

    def parents_via(self, vertex_id: str, kind: EdgeKind) -> frozenset[Vertex]:
        self.vertex(vertex_id)
        kind = EdgeKind(kind)
        return frozenset(
            self._vertices[e.source]
            for e in self._incoming.get(vertex_id, ())
            if e.kind is kind
        )

    def copies_of(self, identity: ArtifactIdentity) -> list[Vertex]:
        return [v for v in self._vertices.values() if v.identity == identity]

    def topological_order(self) -> list[str]:
        """Vertex ids, parents before children. Raises ``graphlib.CycleError``."""
        sorter: TopologicalSorter[str] = TopologicalSorter()
        for vid in sorted(self._vertices):
            sorter.add(vid, *sorted(e.source for e in self._incoming.get(vid, ())))
        return list(sorter.static_order())

    # -- validation ---------------------------------------------------

    def validate(self) -> ValidationReport:
        """Every violated invariant, with the offending element ids."""
        found: list[Violation] = []
        for v in sorted(self._vertices.values(), key=lambda v: v.id):
            try:
                _check_identity(v)
            except GraphError as exc:
                found.append(Violation(type(exc).__name__, str(exc), (v.id,)))

        for e in sorted(self._edges.values(), key=lambda e: e.id):
            missing = [end for end in (e.source, e.target) if end not in self._vertices]
            if missing:
                found.append(
                    Violation("DanglingEndpoint", f"edge references unknown {missing}", (e.id,))
                )
                continue
            src, dst = self._vertices[e.source].kind, self._vertices[e.target].kind
            if not endpoints_allowed(e.kind, src, dst):
                found.append(
                    Violation(
                        "IllegalEndpointKinds",
                        f"{e.kind} cannot connect {src} -> {dst}",
                        (e.id,),
                    )
                )

        for t in sorted(v.id for v in self.of_kind(VertexKind.TRANSFORMER)):
            envs = sorted(
                e.source for e in self._incoming.get(t, ()) if e.kind is EdgeKind.EXECUTED
            )
            if len(envs) > 1:
                found.append(
                    Violation(
                        "MultipleBuildEnvironments",
                        f"transformer {t!r} executed in {len(envs)} build environments",
                        (t, *envs),
                    )
                )

        try:
            self.topological_order()
        except CycleError as exc:
            cycle = tuple(exc.args[1]) if len(exc.args) > 1 else ()
            found.append(Violation("CycleDetected", "graph contains a directed cycle", cycle))
        return ValidationReport(tuple(found))


def _check_identity(v: Vertex) -> None:
    if v.is_artifact and v.identity is None:
        raise MissingIdentity(f"software artifact {v.id!r} has no identity")
    if not v.is_artifact and v.identity is not None:
        raise ForbiddenIdentity(f"{v.kind} {v.id!r} cannot carry an artifact identity")


def _full(items: Mapping[str, object]) -> dict[str, tuple]:
    return {k: astuple(v) for k, v in items.items()}  # type: ignore[arg-type]


def add_vertex(model: LogModel, v: Vertex) -> LogModel:
    return model.add_vertex(v)


def add_edge(model: LogModel, e: Edge) -> LogModel:
    return model.add_edge(e)


def validate_graph(model: LogModel) -> ValidationReport:
    return model.validate()


def parents_of(model: LogModel, vertex_id: str) -> frozenset[Vertex]:
    return model.parents_of(vertex_id)


def parents_via(model: LogModel, vertex_id: str, kind: EdgeKind) -> frozenset[Vertex]:
    return model.parents_via(vertex_id, kind)


def id_sort_key(vertex_id: str) -> tuple:
    """Natural ordering for ids: "2" < "10", "e2" < "e10"."""
    parts = re.split(r"(\d+)", vertex_id)
    return tuple((0, int(p), "") if p.isdigit() else (1, 0, p) for p in parts if p)
