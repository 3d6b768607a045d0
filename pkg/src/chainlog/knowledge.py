"""Externally disclosed security knowledge.

Four disclosure sets feed the calculus: vulnerable software, malicious
software, vulnerable hosts and compromised hosts. Software disclosures can
name one vertex (a single observed copy) or a logical identity (every copy).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Mapping, Optional

from .graph import ArtifactIdentity, Vertex, VertexKind, WrongVertexKind
from .status import MALICIOUS, SAFE, VULNERABLE, SecurityStatus


class Category(str, Enum):
    SW_VULNERABLE = "sw-vulnerable"
    SW_MALICIOUS = "sw-malicious"
    HOST_VULNERABLE = "host-vulnerable"
    HOST_COMPROMISED = "host-compromised"

    def __str__(self) -> str:
        return self.value

    @property
    def is_host(self) -> bool:
        return self in (Category.HOST_VULNERABLE, Category.HOST_COMPROMISED)


class CategoryMismatch(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Selector:
    """Reference to the disclosed element.

    ``kind`` is ``"vertex"`` (one artifact vertex), ``"identity"`` (every
    artifact copy with that identity) or ``"host"`` (one host vertex).
    """

    kind: str
    vertex_id: Optional[str] = None
    identity: Optional[ArtifactIdentity] = None

    def __post_init__(self) -> None:
        if self.kind == "identity":
            if self.identity is None or self.vertex_id is not None:
                raise ValueError("identity selector needs exactly an identity")
        elif self.kind in ("vertex", "host"):
            if self.vertex_id is None or self.identity is not None:
                raise ValueError(f"{self.kind} selector needs exactly a vertex id")
        else:
            raise ValueError(f"unknown selector kind {self.kind!r}")

    @classmethod
    def vertex(cls, vertex_id: str) -> "Selector":
        return cls("vertex", vertex_id=str(vertex_id))

    @classmethod
    def host(cls, vertex_id: str) -> "Selector":
        return cls("host", vertex_id=str(vertex_id))

    @classmethod
    def of_identity(cls, identity: ArtifactIdentity | str) -> "Selector":
        if isinstance(identity, str):
            identity = ArtifactIdentity.parse(identity)
        return cls("identity", identity=identity)

    @classmethod
    def parse(cls, text: str) -> "Selector":
        """Parse ``vertex=ID``, ``host=ID`` or ``identity=name@version[#digest]``."""
        kind, sep, value = text.partition("=")
        if not sep or not value:
            raise ValueError(f"selector must look like kind=value, got {text!r}")
        kind = kind.strip()
        if kind == "identity":
            return cls.of_identity(value)
        return cls(kind, vertex_id=value)

    def __str__(self) -> str:
        value = self.identity if self.kind == "identity" else self.vertex_id
        return f"{self.kind}={value}"

    def matches(self, v: Vertex) -> bool:
        if self.kind == "identity":
            ident = v.identity
            if ident is None or self.identity is None:
                return False
            if (ident.name, ident.version) != (self.identity.name, self.identity.version):
                return False
            # a digest-less disclosure covers every build of name@version
            return self.identity.digest is None or self.identity.digest == ident.digest
        return self.vertex_id == v.id


def _accepts(category: Category, sel: Selector) -> bool:
    if category.is_host:
        return sel.kind == "host"
    return sel.kind in ("vertex", "identity")


@dataclass(frozen=True)
class KnowledgeBase:
    vulnerable_software: frozenset[Selector] = frozenset()
    malicious_software: frozenset[Selector] = frozenset()
    vulnerable_hosts: frozenset[Selector] = frozenset()
    compromised_hosts: frozenset[Selector] = frozenset()
    annotations: Mapping[tuple[Category, Selector], str] = field(
        default_factory=dict, compare=False, hash=False
    )

    def selectors(self, category: Category) -> frozenset[Selector]:
        return getattr(self, _FIELD[Category(category)])

    def add(
        self, category: Category | str, sel: Selector, annotation: Optional[str] = None
    ) -> "KnowledgeBase":
        """Copy of this knowledge base with ``sel`` disclosed under ``category``."""
        category = Category(category)
        if not _accepts(category, sel):
            raise CategoryMismatch(f"{category} cannot take a {sel.kind} selector")
        name = _FIELD[category]
        notes = dict(self.annotations)
        if annotation is not None:
            notes[(category, sel)] = annotation
        return replace(self, **{name: getattr(self, name) | {sel}}, annotations=notes)

    def without(self, category: Category | str, sel: Selector) -> "KnowledgeBase":
        category = Category(category)
        name = _FIELD[category]
        notes = {k: v for k, v in self.annotations.items() if k != (category, sel)}
        return replace(self, **{name: getattr(self, name) - {sel}}, annotations=notes)

    def entries(self) -> list[tuple[Category, Selector]]:
        """All disclosures in a stable order."""
        return [(c, s) for c in Category for s in sorted(self.selectors(c))]

    def __len__(self) -> int:
        return sum(len(self.selectors(c)) for c in Category)

    @cached_property
    def _software_index(self) -> dict[str, tuple[frozenset, frozenset]]:
        index = {}
        for name in ("vulnerable_software", "malicious_software"):
            sels = getattr(self, name)
            ids = frozenset(s.vertex_id for s in sels if s.kind == "vertex")
            idents = frozenset(s.identity for s in sels if s.kind == "identity")
            index[name] = (ids, idents)
        return index

    def _software_hit(self, name: str, v: Vertex) -> bool:
        ids, idents = self._software_index[name]
        if v.id in ids:
            return True
        ident = v.identity
        if ident is None or not idents:
            return False
        return ident in idents or ArtifactIdentity(ident.name, ident.version) in idents

    def is_vulnerable_software(self, v: Vertex) -> bool:
        return self._software_hit("vulnerable_software", v)

    def is_malicious_software(self, v: Vertex) -> bool:
        return self._software_hit("malicious_software", v)

    def is_vulnerable_host(self, h: Vertex) -> bool:
        return Selector.host(h.id) in self.vulnerable_hosts

    def is_compromised_host(self, h: Vertex) -> bool:
        return Selector.host(h.id) in self.compromised_hosts


_FIELD = {
    Category.SW_VULNERABLE: "vulnerable_software",
    Category.SW_MALICIOUS: "malicious_software",
    Category.HOST_VULNERABLE: "vulnerable_hosts",
    Category.HOST_COMPROMISED: "compromised_hosts",
}


def add_disclosure(
    kb: KnowledgeBase, category: Category | str, sel: Selector
) -> KnowledgeBase:
    return kb.add(category, sel)


def initial_software_status(kb: KnowledgeBase, s: Vertex) -> SecurityStatus:
    if s.kind is not VertexKind.SOFTWARE_ARTIFACT:
        raise WrongVertexKind(f"{s.id!r} is a {s.kind}, not a softwareArtifact")
    a = VULNERABLE if kb.is_vulnerable_software(s) else SAFE
    b = MALICIOUS if kb.is_malicious_software(s) else SAFE
    return max(a, b)


def initial_host_status(kb: KnowledgeBase, h: Vertex) -> SecurityStatus:
    if h.kind is not VertexKind.HOST:
        raise WrongVertexKind(f"{h.id!r} is a {h.kind}, not a host")
    if kb.is_compromised_host(h):
        return MALICIOUS
    if kb.is_vulnerable_host(h):
        return VULNERABLE
    return SAFE
