"""
Drawing the graph
=================

export_dot emits Graphviz source. Malicious artifacts and compromised hosts
are dotted, vulnerable artifacts dashed, and hosts that are only vulnerable
get a double border.
"""

import sys
from pathlib import Path

from chainlog import EvaluationContext
from chainlog.fixtures import reference_model, scenario_knowledge
from chainlog.io import export_dot

model = reference_model()
ctx = EvaluationContext(model, scenario_knowledge("use_case_3"))
results = {t: ctx.evaluate(t) for t in ("9", "10")}

text = export_dot(model, results)
out = Path(sys.argv[1]) if len(sys.argv) > 1 else None
if out:
    out.write_text(text)
    print(f"wrote {out}; render with: dot -Tsvg {out} -o graph.svg")
else:
    print(text)
