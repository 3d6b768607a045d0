"""
Three disclosure scenarios on the reference build
=================================================

The bundled reference graph has one application build: a compiler from a
mirror, an OS component and library present in the build VM, and two
products published to a release repository. We replay three disclosures
against it.
"""

from chainlog import EvaluationContext
from chainlog.fixtures import reference_model, scenario_knowledge
from chainlog.io import render_for, sorted_ids

model = reference_model()
for vid in model.topological_order():
    v = model.vertex(vid)
    print(f"{vid:>3}  {v.kind.value:<17} {v.identity or v.properties.get('name', '')}")


def show(scenario, targets=("9", "10")):
    ctx = EvaluationContext(model, scenario_knowledge(scenario))
    print(f"\n{scenario}")
    for t in targets:
        r = ctx.evaluate(t)
        print(f"  #{t}: {render_for(r.status, model.vertex(t).kind)}")
        for name, ids in zip(("S_V", "S_M", "H_V", "H_M"), r.sets):
            if ids:
                print(f"      {name} = {{{', '.join(sorted_ids(ids))}}}")


# 1) the compiler, the OS component and the library are vulnerable.
#    None of them is copied into the product, so it stays safe, yet all
#    three are listed (with the build host) for audit.
show("use_case_1")

# 2) the application source itself is vulnerable: this flows into both products
show("use_case_2")

# 3) the library on the build VM is malicious: the host is compromised and
#    everything built there is malicious
show("use_case_3")
show("use_case_3", targets=("5", "7"))
