#!/usr/bin/env python3
"""Learning a partial structure from sampled cases.

A four-variable chain generates complete cases; we observe only three of the
variables and learn a structure over them, comparing greedy hill-climbing
against the exhaustive enumeration oracle (29281 DAGs at five nodes, a
comfortable 543 at four, 25 at three).
"""

import numpy as np

from bnrefine import (
    Cpt,
    DagStructure,
    LearnConfig,
    Network,
    SampleSpec,
    ScorerConfig,
    Variable,
    exhaustive_oracle,
    forward_sample,
    learn_partial,
    project,
)

# ground truth: wind -> waves -> surf_quality, tide -> surf_quality
names = ("wind", "waves", "tide", "surf_quality")
variables = tuple(Variable(n, ("low", "high")) for n in names)
truth_structure = DagStructure.from_arcs(
    names, [("wind", "waves"), ("waves", "surf_quality"), ("tide", "surf_quality")]
)
cpts = {
    "wind": Cpt("wind", (), (), np.array([[0.6, 0.4]])),
    "tide": Cpt("tide", (), (), np.array([[0.5, 0.5]])),
    "waves": Cpt("waves", ("wind",), (2,), np.array([[0.85, 0.15], [0.2, 0.8]])),
    "surf_quality": Cpt(
        "surf_quality",
        ("tide", "waves"),
        (2, 2),
        np.array([[0.95, 0.05], [0.5, 0.5], [0.6, 0.4], [0.05, 0.95]]),
    ),
}
truth = Network(variables=variables, structure=truth_structure, cpts=cpts)

complete = forward_sample(truth, SampleSpec(count=2000, seed=7))
observed = project(complete, ["waves", "tide", "surf_quality"])
print(f"sampled {complete.n_rows} complete cases, observing {observed.column_names}")

# the deployed network got the surf arc backwards
existing = DagStructure.from_arcs(
    names, [("wind", "waves"), ("surf_quality", "waves"), ("tide", "surf_quality")]
)

cfg = LearnConfig(scorer=ScorerConfig(domain_size=len(names)))
learned = learn_partial(observed, existing, cfg)
oracle = exhaustive_oracle(observed, existing, cfg)

print(f"hill climbing ({learned.expansions_used} steps): {learned.structure.arcs()}")
print(f"             total {learned.score.total_bits:.2f} bits")
print(f"oracle ({oracle.expansions_used} DAGs scored):   {oracle.structure.arcs()}")
print(f"             total {oracle.score.total_bits:.2f} bits")
print()
print("The collider at surf_quality is visible in the data (waves and tide")
print("are independent until you condition on the surf), so the learner")
print("corrects the reversed arc despite the pull of the existing network.")
