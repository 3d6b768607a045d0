"""Security status propagation over a validated log model.

Every query returns a :class:`Result`: the status of the queried element
plus the blame sets of vulnerable/malicious artifacts and hosts that
contributed to it. Results are pure functions of (model, knowledge, vertex,
querying identity), so they are memoized per evaluation context.

Evaluation is iterative (explicit stack), so deep build chains do not hit
the interpreter recursion limit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .graph import (
    ArtifactIdentity,
    EdgeKind,
    GraphError,
    LogModel,
    ValidationReport,
    Vertex,
    VertexKind,
    WrongVertexKind,
)
from .knowledge import KnowledgeBase, initial_host_status, initial_software_status
from .status import MALICIOUS, SAFE, VULNERABLE, SecurityStatus

_EMPTY: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Result:
    status: SecurityStatus = SAFE
    vulnerable_artifacts: frozenset[str] = _EMPTY
    malicious_artifacts: frozenset[str] = _EMPTY
    vulnerable_hosts: frozenset[str] = _EMPTY
    compromised_hosts: frozenset[str] = _EMPTY

    @property
    def sets(self) -> tuple[frozenset[str], ...]:
        return (
            self.vulnerable_artifacts,
            self.malicious_artifacts,
            self.vulnerable_hosts,
            self.compromised_hosts,
        )

    def with_status(self, status: SecurityStatus) -> "Result":
        return Result(status, *self.sets)

    def adding(
        self,
        vulnerable_artifacts: Iterable[str] = (),
        malicious_artifacts: Iterable[str] = (),
        vulnerable_hosts: Iterable[str] = (),
        compromised_hosts: Iterable[str] = (),
    ) -> "Result":
        return Result(
            self.status,
            self.vulnerable_artifacts.union(vulnerable_artifacts),
            self.malicious_artifacts.union(malicious_artifacts),
            self.vulnerable_hosts.union(vulnerable_hosts),
            self.compromised_hosts.union(compromised_hosts),
        )


EMPTY_RESULT = Result()


def merge_results(q: SecurityStatus, x: Result, y: Result) -> Result:
    """Result with status ``q`` and the element-wise union of the sets of ``x`` and ``y``."""
    return Result(q, *(a | b for a, b in zip(x.sets, y.sets)))


def combine(results: Iterable[Result]) -> Result:
    """Max of the statuses and union of the sets; the empty combination is safe."""
    acc = EMPTY_RESULT
    for r in results:
        acc = merge_results(max(acc.status, r.status), acc, r)
    return acc


class InvalidGraph(GraphError):
    def __init__(self, report: ValidationReport) -> None:
        super().__init__(f"log model is invalid:\n{report}")
        self.report = report


# memo key: (vertex id, querying identity); the identity is kept for hosts only
Key = tuple[str, Optional[ArtifactIdentity]]


class EvaluationContext:
    """Evaluator for one (model, knowledge base) snapshot.

    With ``memo=False`` every sub-result is recomputed on demand, which is
    exponential on diamond-heavy graphs but useful as a cross-check.
    """

    def __init__(
        self,
        model: LogModel,
        kb: Optional[KnowledgeBase] = None,
        memo: bool = True,
        validate: bool = True,
    ) -> None:
        if validate:
            report = model.validate()
            if not report.ok:
                raise InvalidGraph(report)
        self.model = model
        self.kb = kb if kb is not None else KnowledgeBase()
        self.memo: Optional[dict[Key, Result]] = {} if memo else None

    # -- public per-kind entry points --------------------------------

    def software_status(self, s: str) -> Result:
        return self._get(self._key(self._expect(s, VertexKind.SOFTWARE_ARTIFACT), None))

    def transformer_status(self, t: str) -> Result:
        return self._get(self._key(self._expect(t, VertexKind.TRANSFORMER), None))

    def build_environment_status(self, b: str) -> Result:
        return self._get(self._key(self._expect(b, VertexKind.BUILD_ENVIRONMENT), None))

    def host_status(self, querying: Optional[ArtifactIdentity], h: str) -> Result:
        return self._get(self._key(self._expect(h, VertexKind.HOST), querying))

    def one_status(
        self, querying: Optional[ArtifactIdentity], v: Optional[Vertex | str]
    ) -> Result:
        """Dispatch on vertex kind. An absent or unresolvable vertex is worst case."""
        if v is None:
            return Result(MALICIOUS)
        vid = v.id if isinstance(v, Vertex) else v
        vertex = self.model.vertices.get(vid)
        if vertex is None or (isinstance(v, Vertex) and v.kind is not vertex.kind):
            return Result(MALICIOUS)
        return self._get(self._key(vertex, querying))

    def all_statuses(
        self, querying: Optional[ArtifactIdentity], vs: Iterable[Vertex | str | None]
    ) -> Result:
        return combine(self.one_status(querying, v) for v in vs)

    def evaluate(self, target: str) -> Result:
        vertex = self.model.vertex(target)
        return self.one_status(vertex.identity, vertex)

    # -- machinery ----------------------------------------------------

    def _expect(self, vid: str, kind: VertexKind) -> Vertex:
        v = self.model.vertex(vid)
        if v.kind is not kind:
            raise WrongVertexKind(f"{vid!r} is a {v.kind}, not a {kind}")
        return v

    @staticmethod
    def _key(v: Vertex, querying: Optional[ArtifactIdentity]) -> Key:
        return (v.id, querying if v.kind is VertexKind.HOST else None)

    def _get(self, key: Key) -> Result:
        if self.memo is None:
            return self._compute(key, self._get)
        memo = self.memo
        if key in memo:
            return memo[key]
        stack = [key]
        while stack:
            k = stack[-1]
            if k in memo:
                stack.pop()
                continue
            missing = [d for d in self._dependencies(k) if d not in memo]
            if missing:
                stack.extend(missing)
            else:
                memo[k] = self._compute(k, memo.__getitem__)
                stack.pop()
        return memo[key]

    def _tool_split(self, t: str) -> tuple[list[Vertex], list[Vertex]]:
        # build-tool role is decided per edge into this transformer
        tools: dict[str, Vertex] = {}
        others: dict[str, Vertex] = {}
        for e in self.model.incoming(t):
            src = self.model.vertices[e.source]
            if e.kind is EdgeKind.WAS_BUILD_TOOL_TO and src.is_artifact:
                tools[src.id] = src
            else:
                others[src.id] = src
        return list(tools.values()), list(others.values())

    def _published_copies(self, h: str, querying: Optional[ArtifactIdentity]) -> list[Vertex]:
        if querying is None:
            return []
        published = self.model.parents_via(h, EdgeKind.WAS_PUBLISHED_TO)
        return [p for p in published if p.identity == querying]

    def _dependencies(self, key: Key) -> list[Key]:
        vid, querying = key
        v = self.model.vertices[vid]
        parents = self.model.parents_of(vid)
        if v.kind is VertexKind.SOFTWARE_ARTIFACT:
            return [self._key(p, v.identity) for p in parents]
        if v.kind is VertexKind.HOST:
            present = self.model.parents_via(vid, EdgeKind.WAS_PRESENT)
            copies = self._published_copies(vid, querying)
            return [self._key(p, querying) for p in (*present, *copies)]
        return [self._key(p, None) for p in parents]

    def _compute(self, key: Key, get: Callable[[Key], Result]) -> Result:
        vid, querying = key
        v = self.model.vertices[vid]
        kind = v.kind

        if kind is VertexKind.SOFTWARE_ARTIFACT:
            from_parents = combine(
                get(self._key(p, v.identity)) for p in self.model.parents_of(vid)
            )
            q = max(initial_software_status(self.kb, v), from_parents.status)
            own = Result(
                q,
                frozenset({vid}) if q is VULNERABLE else _EMPTY,
                frozenset({vid}) if q is MALICIOUS else _EMPTY,
            )
            return merge_results(q, own, from_parents)

        if kind is VertexKind.TRANSFORMER:
            tools, others = self._tool_split(vid)
            r_tools = combine(get(self._key(p, None)) for p in tools)
            r_other = combine(get(self._key(p, None)) for p in others)
            # vulnerable build tools are not copied into the outputs
            q = MALICIOUS if r_tools.status is MALICIOUS else SAFE
            return merge_results(max(q, r_other.status), r_tools, r_other)

        if kind is VertexKind.BUILD_ENVIRONMENT:
            r = combine(get(self._key(p, None)) for p in self.model.parents_of(vid))
            return r if r.status is MALICIOUS else r.with_status(SAFE)

        if kind is VertexKind.HOST:
            r = Result(initial_host_status(self.kb, v))
            present = self.model.parents_via(vid, EdgeKind.WAS_PRESENT)
            r_present = combine(get(self._key(p, querying)) for p in present)
            r = merge_results(max(r.status, r_present.status), r, r_present)
            if r.status is VULNERABLE:
                # hosts record vulnerability but never propagate it
                r = Result(SAFE, *r.sets).adding(vulnerable_hosts=(vid,))
            copies = self._published_copies(vid, querying)
            if copies:
                r_copy = combine(get(self._key(p, querying)) for p in copies)
                q = MALICIOUS if r.status is MALICIOUS else r_copy.status
                r = merge_results(q, r, r_copy)
            if r.status is MALICIOUS:
                r = r.adding(compromised_hosts=(vid,))
            return r

        return Result(MALICIOUS)


def evaluate(
    model: LogModel,
    kb: Optional[KnowledgeBase],
    target: str,
    memo: bool = True,
) -> Result:
    """Status and blame sets of ``target``."""
    return EvaluationContext(model, kb, memo=memo).evaluate(target)
