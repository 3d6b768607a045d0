"""Bundled example supply chain and the knowledge bases of its three scenarios.

The graph is an 11-vertex build: host 5 ("CodeForge 1") hosts build
environment 7, which executes transformer 8. Artifact 2 (GCC) is the build
tool, artifact 6 the input, and 9 and 10 are the products, published to
host 11. Artifacts 2, 3 and 6 were transferred from mirror host 1; artifact 3
was present in the build environment and artifact 4 on host 5.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .graph import LogModel
from .io import load_graph, load_knowledge
from .knowledge import KnowledgeBase

SCENARIOS = ("use_case_1", "use_case_2", "use_case_3")


def data_path(name: str) -> Path:
    return Path(str(resources.files("chainlog") / "data" / name))


def reference_path() -> Path:
    return data_path("reference_build.lm.json")


def knowledge_path(scenario: str) -> Path:
    if scenario not in SCENARIOS:
        raise KeyError(f"unknown scenario {scenario!r}; pick one of {SCENARIOS}")
    return data_path(f"{scenario}.kb.json")


def reference_model() -> LogModel:
    return load_graph(reference_path())


def scenario_knowledge(scenario: str) -> KnowledgeBase:
    return load_knowledge(knowledge_path(scenario))
