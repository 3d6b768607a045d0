"""
Building and validating a log model
===================================

A log model records one product's build history as a typed graph. Here we
build a small one by hand, check it, then break it on purpose.
"""

from chainlog import ArtifactIdentity, Edge, LogModel, Vertex, VertexKind
from chainlog.graph import EdgeKind

# a mirror serves a compiler and a source tarball
model = LogModel()
model.add_vertex(Vertex("mirror", VertexKind.HOST, properties={"name": "package mirror"}))
model.add_vertex(Vertex("cc", VertexKind.SOFTWARE_ARTIFACT, identity=ArtifactIdentity("cc", "12.1")))
model.add_vertex(Vertex("src", VertexKind.SOFTWARE_ARTIFACT, identity=ArtifactIdentity("tool-src", "0.4")))
model.add_edge(Edge("e1", EdgeKind.TRANSFERRED, "mirror", "cc"))
model.add_edge(Edge("e2", EdgeKind.TRANSFERRED, "mirror", "src"))

# one build step: a CI runner provides an environment that runs the transformer
model.add_vertex(Vertex("runner", VertexKind.HOST))
model.add_vertex(Vertex("vm", VertexKind.BUILD_ENVIRONMENT))
model.add_vertex(Vertex("make", VertexKind.TRANSFORMER))
model.add_vertex(Vertex("bin", VertexKind.SOFTWARE_ARTIFACT, identity=ArtifactIdentity("tool", "0.4")))
model.add_edge(Edge("e3", EdgeKind.HOSTED, "runner", "vm"))
model.add_edge(Edge("e4", EdgeKind.EXECUTED, "vm", "make"))
model.add_edge(Edge("e5", EdgeKind.WAS_BUILD_TOOL_TO, "cc", "make"))
model.add_edge(Edge("e6", EdgeKind.WAS_INPUT_TO, "src", "make"))
model.add_edge(Edge("e7", EdgeKind.GENERATED, "make", "bin"))

print("vertices:", len(model), "edges:", len(model.edges))
print("validation:", model.validate())
print("build order:", model.topological_order())

# add_edge refuses illegal endpoint kinds straight away
try:
    model.add_edge(Edge("bad", EdgeKind.GENERATED, "runner", "bin"))
except Exception as exc:
    print("rejected:", type(exc).__name__, exc)

# with check=False the edge goes in, and validate() reports it with a code
model.add_edge(Edge("loop", EdgeKind.WAS_INPUT_TO, "bin", "make"), check=False)
report = model.validate()
print("after adding a loop:", report.codes())
print(report)
