#!/usr/bin/env python3
"""How a candidate structure is priced, component by component.

We build a two-variable world where the columns move in lockstep, then score
the three possible structures (no arc, A->B, B->A) against an existing
network that already believes A->B.  The punchline: the two orientations fit
the data identically, and only the deviation term separates them.
"""

import numpy as np

from bnrefine import (
    DagStructure,
    Dataset,
    ScorerConfig,
    Variable,
    total_dl,
)

rng = np.random.default_rng(0)

# 300 cases where B simply copies A
a = rng.integers(0, 2, size=300)
data = Dataset(
    variables=(Variable("A", ("lo", "hi")), Variable("B", ("lo", "hi"))),
    codes=np.column_stack([a, a]),
)

existing = DagStructure.from_arcs(("A", "B"), [("A", "B")])

candidates = {
    "no arc   ": DagStructure.from_arcs(("A", "B"), []),
    "A -> B   ": DagStructure.from_arcs(("A", "B"), [("A", "B")]),
    "B -> A   ": DagStructure.from_arcs(("A", "B"), [("B", "A")]),
}

cfg = ScorerConfig(domain_size=2)
print("candidate   structure      data  deviation      total")
for label, structure in candidates.items():
    s = total_dl(structure, data, existing, cfg)
    print(
        f"{label}  {s.structure_bits:9.2f} {s.data_bits:9.2f} "
        f"{s.deviation_bits:10.2f} {s.total_bits:10.2f}"
    )

print()
print("Both orientations explain the data equally well (the data column is")
print("identical), so the 2*log2(n) deviation charge on the reversed arc is")
print("what keeps the learner aligned with the deployed network.")

# The full per-node breakdown is also available as an aligned table:
print()
print(total_dl(candidates["A -> B   "], data, existing, cfg).to_text_table())
