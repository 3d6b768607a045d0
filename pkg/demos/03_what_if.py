"""
What-if analysis
================

Knowledge bases are immutable, so asking "what if this were disclosed?"
is just evaluating a second copy with one more entry.
"""

from chainlog import EvaluationContext, Selector
from chainlog.fixtures import reference_model, scenario_knowledge
from chainlog.io import SET_NAMES, sorted_ids

model = reference_model()
base = scenario_knowledge("use_case_1")


def diff(kb_before, kb_after, target):
    before = EvaluationContext(model, kb_before).evaluate(target)
    after = EvaluationContext(model, kb_after).evaluate(target)
    print(f"#{target}: {before.status} -> {after.status}")
    for name, old, new in zip(SET_NAMES, before.sets, after.sets):
        changes = [f"+{x}" for x in sorted_ids(new - old)] + [f"-{x}" for x in sorted_ids(old - new)]
        if changes:
            print(f"  {name}: {' '.join(changes)}")


# the vulnerable library turns out to be malicious
diff(base, base.add("sw-malicious", Selector.vertex("4")), "9")

# every copy of the compiler, wherever it was downloaded, is malicious
diff(base, base.add("sw-malicious", Selector.of_identity("GCC@9.0.0")), "10")

# the release repository is compromised after publication: the products
# as recorded at build time are unaffected
diff(base, base.add("host-compromised", Selector.host("11")), "9")

# the same questions from the shell:
#   chainlog what-if graph.lm.json 9 -k kb.json -d sw-malicious:vertex=4
