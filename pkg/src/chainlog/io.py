"""On-disk formats: graph and knowledge JSON documents, reports, DOT export."""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Mapping, Optional, Union

from .engine import Result
from .graph import (
    ArtifactIdentity,
    Edge,
    EdgeKind,
    GraphError,
    LogModel,
    ValidationReport,
    Vertex,
    VertexKind,
    Violation,
    id_sort_key,
)
from .knowledge import (
    Category,
    CategoryMismatch,
    KnowledgeBase,
    Selector,
    initial_host_status,
    initial_software_status,
)
from .status import SecurityStatus, render_status

SCHEMA_VERSION = "1"

Source = Union[bytes, str, os.PathLike]

_VERTEX_FIELDS = {"id", "kind", "labels", "properties", "identity"}
_EDGE_FIELDS = {"id", "kind", "source", "target", "properties"}
_IDENTITY_FIELDS = {"name", "version", "digest"}
_GRAPH_FIELDS = {"schema-version", "vertices", "edges"}
_KNOWLEDGE_FIELDS = {"schema-version", "entries"}
_ENTRY_FIELDS = {"category", "selector", "annotation"}


class FormatError(Exception):
    """Base class for document loading errors."""


class ParseError(FormatError):
    def __init__(self, message: str, line: int = 0, column: int = 0) -> None:
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class SchemaError(FormatError):
    pass


class ValidationError(FormatError):
    def __init__(self, report: ValidationReport) -> None:
        super().__init__(f"log model failed validation:\n{report}")
        self.report = report


def _read(source: Source) -> Any:
    if isinstance(source, (bytes, bytearray)):
        raw = bytes(source)
    else:
        raw = Path(source).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not UTF-8: {exc.reason}", 0, exc.start) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None


def _dump(doc: Any) -> bytes:
    return (json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode()


def _object(value: Any, what: str, allowed: set[str], strict: bool) -> dict:
    if not isinstance(value, dict):
        raise SchemaError(f"{what} must be an object")
    unknown = set(value) - allowed
    if unknown and strict:
        raise SchemaError(f"{what} has unknown fields {sorted(unknown)}")
    return value


def _string(obj: dict, key: str, what: str, required: bool = True) -> Optional[str]:
    if key not in obj:
        if required:
            raise SchemaError(f"{what} is missing {key!r}")
        return None
    value = obj[key]
    if not isinstance(value, str):
        raise SchemaError(f"{what}.{key} must be a string")
    return value


def _string_map(obj: dict, key: str, what: str) -> dict[str, str]:
    value = obj.get(key, {})
    if not isinstance(value, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in value.items()
    ):
        raise SchemaError(f"{what}.{key} must map strings to strings")
    return value


def _check_version(doc: dict, what: str) -> None:
    version = doc.get("schema-version")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"{what}: unsupported schema-version {version!r}")


def _identity_from(value: Any, what: str, strict: bool) -> ArtifactIdentity:
    obj = _object(value, f"{what}.identity", _IDENTITY_FIELDS, strict)
    return ArtifactIdentity(
        _string(obj, "name", what),  # type: ignore[arg-type]
        _string(obj, "version", what),  # type: ignore[arg-type]
        _string(obj, "digest", what, required=False),
    )


def _identity_doc(identity: ArtifactIdentity) -> dict[str, str]:
    doc = {"name": identity.name, "version": identity.version}
    if identity.digest is not None:
        doc["digest"] = identity.digest
    return doc


def _extras(obj: dict, known: set[str]) -> dict:
    return {k: v for k, v in obj.items() if k not in known}


# -- graphs -------------------------------------------------------------


def load_graph(source: Source, strict: bool = True, validate: bool = True) -> LogModel:
    """Load a graph document.

    Under ``strict`` unknown fields are rejected; otherwise they are kept in
    ``model.extras`` and written back by :func:`save_graph`. With
    ``validate`` (the default) any invariant violation raises
    :class:`ValidationError` and nothing is returned.
    """
    doc = _object(_read(source), "graph document", _GRAPH_FIELDS, strict)
    _check_version(doc, "graph document")
    vertices_doc = doc.get("vertices")
    edges_doc = doc.get("edges")
    if not isinstance(vertices_doc, list) or not isinstance(edges_doc, list):
        raise SchemaError("graph document needs 'vertices' and 'edges' arrays")

    extras: dict[str, dict] = {}
    if _extras(doc, _GRAPH_FIELDS):
        extras["document"] = _extras(doc, _GRAPH_FIELDS)

    vertices = []
    for i, item in enumerate(vertices_doc):
        what = f"vertices[{i}]"
        obj = _object(item, what, _VERTEX_FIELDS, strict)
        vid = _string(obj, "id", what)
        kind_text = _string(obj, "kind", what)
        try:
            kind = VertexKind(kind_text)
        except ValueError:
            raise SchemaError(f"{what}: unknown vertex kind {kind_text!r}") from None
        labels = obj.get("labels", [])
        if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
            raise SchemaError(f"{what}.labels must be an array of strings")
        identity = None
        if obj.get("identity") is not None:
            identity = _identity_from(obj["identity"], what, strict)
        vertices.append(
            Vertex(vid, kind, frozenset(labels), _string_map(obj, "properties", what), identity)  # type: ignore[arg-type]
        )
        if _extras(obj, _VERTEX_FIELDS):
            extras[f"vertex:{vid}"] = _extras(obj, _VERTEX_FIELDS)

    edges = []
    for i, item in enumerate(edges_doc):
        what = f"edges[{i}]"
        obj = _object(item, what, _EDGE_FIELDS, strict)
        eid = _string(obj, "id", what)
        kind_text = _string(obj, "kind", what)
        try:
            kind = EdgeKind(kind_text)
        except ValueError:
            raise SchemaError(f"{what}: unknown edge kind {kind_text!r}") from None
        edges.append(
            Edge(
                eid,  # type: ignore[arg-type]
                kind,
                _string(obj, "source", what),  # type: ignore[arg-type]
                _string(obj, "target", what),  # type: ignore[arg-type]
                _string_map(obj, "properties", what),
            )
        )
        if _extras(obj, _EDGE_FIELDS):
            extras[f"edge:{eid}"] = _extras(obj, _EDGE_FIELDS)

    try:
        model = LogModel(vertices, edges, check=False)
    except GraphError as exc:
        report = ValidationReport((Violation(type(exc).__name__, str(exc)),))
        raise ValidationError(report) from None
    model.extras = extras
    if validate:
        report = model.validate()
        if not report.ok:
            raise ValidationError(report)
    return model


def graph_document(model: LogModel) -> dict:
    extras: Mapping[str, dict] = getattr(model, "extras", {}) or {}
    vertices = []
    for v in sorted(model.vertices.values(), key=lambda v: id_sort_key(v.id)):
        item: dict[str, Any] = {
            "id": v.id,
            "kind": v.kind.value,
            "labels": sorted(v.labels),
            "properties": dict(v.properties),
        }
        if v.identity is not None:
            item["identity"] = _identity_doc(v.identity)
        item.update(extras.get(f"vertex:{v.id}", {}))
        vertices.append(item)
    edges = []
    for e in sorted(model.edges.values(), key=lambda e: id_sort_key(e.id)):
        item = {"id": e.id, "kind": e.kind.value, "source": e.source, "target": e.target}
        if e.properties:
            item["properties"] = dict(e.properties)
        item.update(extras.get(f"edge:{e.id}", {}))
        edges.append(item)
    doc = {"schema-version": SCHEMA_VERSION, "vertices": vertices, "edges": edges}
    doc.update(extras.get("document", {}))
    return doc


def save_graph(model: LogModel) -> bytes:
    """Canonical UTF-8 JSON: sorted keys, elements ordered by id."""
    return _dump(graph_document(model))


# -- knowledge ----------------------------------------------------------


def _selector_from(value: Any, what: str, strict: bool) -> Selector:
    obj = _object(value, what, {"vertex", "host", "identity"}, strict)
    present = [k for k in ("vertex", "host", "identity") if k in obj]
    if len(present) != 1:
        raise SchemaError(f"{what} needs exactly one of vertex, host, identity")
    key = present[0]
    if key == "identity":
        return Selector.of_identity(_identity_from(obj["identity"], what, strict))
    return Selector(key, vertex_id=_string(obj, key, what))


def _selector_doc(sel: Selector) -> dict:
    if sel.kind == "identity":
        return {"identity": _identity_doc(sel.identity)}  # type: ignore[arg-type]
    return {sel.kind: sel.vertex_id}


def load_knowledge(source: Source, strict: bool = True) -> KnowledgeBase:
    """Load a knowledge document. Vertex references are not resolved here."""
    doc = _object(_read(source), "knowledge document", _KNOWLEDGE_FIELDS, strict)
    _check_version(doc, "knowledge document")
    entries = doc.get("entries")
    if not isinstance(entries, list):
        raise SchemaError("knowledge document needs an 'entries' array")
    kb = KnowledgeBase()
    for i, item in enumerate(entries):
        what = f"entries[{i}]"
        obj = _object(item, what, _ENTRY_FIELDS, strict)
        text = _string(obj, "category", what)
        try:
            category = Category(text)
        except ValueError:
            raise SchemaError(f"{what}: unknown category {text!r}") from None
        if "selector" not in obj:
            raise SchemaError(f"{what} is missing 'selector'")
        sel = _selector_from(obj["selector"], f"{what}.selector", strict)
        try:
            kb = kb.add(category, sel, _string(obj, "annotation", what, required=False))
        except CategoryMismatch as exc:
            raise SchemaError(f"{what}: {exc}") from None
    return kb


def save_knowledge(kb: KnowledgeBase) -> bytes:
    entries = []
    for category, sel in kb.entries():
        item: dict[str, Any] = {"category": category.value, "selector": _selector_doc(sel)}
        note = kb.annotations.get((category, sel))
        if note is not None:
            item["annotation"] = note
        entries.append(item)
    return _dump({"schema-version": SCHEMA_VERSION, "entries": entries})


# -- reports ------------------------------------------------------------

SET_NAMES = ("vulnerable-artifacts", "malicious-artifacts", "vulnerable-hosts", "compromised-hosts")

_HOST_LIKE = (VertexKind.HOST, VertexKind.BUILD_ENVIRONMENT)


def render_for(status: SecurityStatus, kind: VertexKind) -> str:
    return render_status(status, host_like=kind in _HOST_LIKE)


def sorted_ids(ids) -> list[str]:
    return sorted(ids, key=id_sort_key)


def export_report(
    res: Result, model: LogModel, target: str, kb: Optional[KnowledgeBase] = None
) -> dict:
    """Report document for ``res``, the result of evaluating ``target``."""
    kb = kb if kb is not None else KnowledgeBase()
    vertex = model.vertex(target)
    sets = {name: sorted_ids(ids) for name, ids in zip(SET_NAMES, res.sets)}
    involved = {target}.union(*res.sets)
    elements = {}
    for vid in sorted_ids(involved):
        v = model.vertices.get(vid)
        if v is None:
            continue
        detail: dict[str, Any] = {"kind": v.kind.value}
        if v.identity is not None:
            detail["identity"] = str(v.identity)
        if v.kind is VertexKind.SOFTWARE_ARTIFACT:
            detail["initial-status"] = render_for(initial_software_status(kb, v), v.kind)
        elif v.kind is VertexKind.HOST:
            detail["initial-status"] = render_for(initial_host_status(kb, v), v.kind)
        elements[vid] = detail
    return {
        "target": target,
        "kind": vertex.kind.value,
        "status": render_for(res.status, vertex.kind),
        "sets": sets,
        "elements": elements,
    }


def report_json(report: Mapping) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


# -- DOT ----------------------------------------------------------------

_SHAPES = {
    VertexKind.HOST: ("box", None),
    VertexKind.SOFTWARE_ARTIFACT: ("box", "rounded"),
    VertexKind.TRANSFORMER: ("parallelogram", None),
    VertexKind.BUILD_ENVIRONMENT: ("parallelogram", None),
}


def _quote(text: str) -> str:
    escaped = (
        text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\r", "")
    )
    return f'"{escaped}"'


def _vertex_label(v: Vertex) -> str:
    lines = [f"#{v.id} {v.kind.value}"]
    if v.identity is not None:
        lines.append(str(v.identity))
    elif "name" in v.properties:
        lines.append(v.properties["name"])
    return "\n".join(lines)


def export_dot(model: LogModel, results: Optional[Mapping[str, Result]] = None) -> str:
    """DOT digraph of ``model``.

    When ``results`` (vertex id -> Result) is given, every artifact or host
    in a malicious/compromised set is drawn dotted and every artifact in a
    vulnerable set dashed. Hosts that only appear among the vulnerable hosts
    get a double border instead: their vulnerability is masked and marks
    them for audit.
    """
    malicious: set[str] = set()
    vulnerable: set[str] = set()
    audit: set[str] = set()
    for res in (results or {}).values():
        malicious |= res.malicious_artifacts | res.compromised_hosts
        vulnerable |= res.vulnerable_artifacts
        audit |= res.vulnerable_hosts

    out = ["digraph LogModel {", "  rankdir=LR;"]
    for v in sorted(model.vertices.values(), key=lambda v: id_sort_key(v.id)):
        shape, base = _SHAPES[v.kind]
        styles = [base] if base else []
        attrs = [f"label={_quote(_vertex_label(v))}", f"shape={shape}"]
        if v.id in malicious:
            styles.append("dotted")
        elif v.id in vulnerable:
            styles.append("dashed")
        elif v.id in audit:
            attrs.append("peripheries=2")
        if styles:
            attrs.append(f"style={_quote(','.join(styles))}")
        out.append(f"  {_quote(v.id)} [{' '.join(attrs)}];")
    for e in sorted(model.edges.values(), key=lambda e: id_sort_key(e.id)):
        out.append(f"  {_quote(e.source)} -> {_quote(e.target)} [label={_quote(e.kind.value)}];")
    out.append("}")
    return "\n".join(out) + "\n"
