#!/usr/bin/env python3
"""Replacement units, and why cycles force choices between them.

The learned structure here disagrees with the deployed network in two places
that cannot both be accepted: substituting both parent sets would close a
directed loop.  The refiner ranks the units, walks apply/skip decisions
best-first, and keeps the alternative that saves more bits.
"""

import numpy as np

from bnrefine import (
    DagStructure,
    Dataset,
    LearnConfig,
    ScorerConfig,
    Variable,
    marked_nodes,
    partition_into_subgraphs,
    refine,
)

names = ("A", "B", "C")
rng = np.random.default_rng(3)

# B drives C with a little noise; A copies C exactly
b = rng.integers(0, 2, size=400)
c = np.where(rng.random(400) < 0.12, 1 - b, b)
a = c.copy()
data = Dataset(
    variables=tuple(Variable(n, ("0", "1")) for n in names),
    codes=np.column_stack([a, b, c]),
)

existing = DagStructure.from_arcs(names, [("A", "B")])
learned = DagStructure.from_arcs(names, [("C", "A"), ("B", "C")])

marked = marked_nodes(existing, learned)
print(f"marked nodes: {sorted(marked)}")

cfg = LearnConfig(scorer=ScorerConfig(domain_size=3))
units = partition_into_subgraphs(marked, existing, learned, data, cfg.scorer)
for u in units:
    print(f"  unit {u.members}: benefit {u.benefit:8.2f} bits, "
          f"new parents {{{', '.join(f'{k}<-{sorted(v)}' for k, v in u.new_parents.items())}}}")

plan = refine(existing, learned, data, cfg)
print()
print(f"applied units: {[plan.units[i].members for i in plan.applied]}")
print(f"skipped because of cycles: "
      f"{[plan.units[i].members for i in plan.skipped_for_cycle]}")
print(f"refined arcs: {plan.result.arcs()}")
print(f"bits saved: {plan.score_delta:.2f}")
print()
print("Taking C's new parents (B -> C) while A already feeds B and C feeds A")
print("would close the loop A -> B -> C -> A, so only the stronger unit wins.")
