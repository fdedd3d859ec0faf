"""Shared generators and independent oracles used across the test modules.

The entropy oracles here deliberately avoid the package's contingency-table
path: they count whole label rows in plain dicts, so they can catch mistakes
in the production counting code.
"""

from __future__ import annotations

import math
from collections import Counter

import numpy as np

from bnrefine.data import Dataset
from bnrefine.graph import Cpt, DagStructure, Network, Variable


def random_dag(rng: np.random.Generator, names, p_arc: float = 0.35) -> DagStructure:
    """A uniform-ish random DAG: random order, independent arc coin flips."""
    names = list(names)
    order = list(rng.permutation(names))
    parents = {n: set() for n in names}
    for i in range(len(order)):
        for j in range(i + 1, len(order)):
            if rng.random() < p_arc:
                parents[order[j]].add(order[i])
    return DagStructure(tuple(names), {n: frozenset(v) for n, v in parents.items()})


def random_variables(rng: np.random.Generator, n: int, max_states: int = 3):
    return tuple(
        Variable(
            f"V{i:02d}",
            tuple(f"s{k}" for k in range(rng.integers(2, max_states + 1))),
        )
        for i in range(n)
    )


def random_dataset(rng: np.random.Generator, variables, n_rows: int) -> Dataset:
    codes = np.column_stack(
        [rng.integers(0, v.n_states, size=n_rows) for v in variables]
    )
    return Dataset(variables=tuple(variables), codes=codes)


def random_network(
    rng: np.random.Generator,
    n_nodes: int,
    p_arc: float = 0.4,
    max_states: int = 3,
    concentration: float = 0.5,
) -> Network:
    """Random structure plus Dirichlet CPT rows (small concentration = strong rows)."""
    variables = random_variables(rng, n_nodes, max_states)
    structure = random_dag(rng, [v.name for v in variables], p_arc)
    by_name = {v.name: v for v in variables}
    cpts = {}
    for v in variables:
        parents = tuple(sorted(structure.parents[v.name]))
        cards = tuple(by_name[p].n_states for p in parents)
        n_cfg = int(np.prod(cards)) if parents else 1
        table = rng.dirichlet([concentration] * v.n_states, size=n_cfg)
        cpts[v.name] = Cpt(v.name, parents, cards, table)
    return Network(variables=variables, structure=structure, cpts=cpts)


def joint_entropy_bits(d: Dataset, columns) -> float:
    """Empirical joint entropy (bits/case) of the named columns, by raw row counting."""
    columns = list(columns)
    idx = {v.name: j for j, v in enumerate(d.variables)}
    cols = [idx[c] for c in columns]
    counter: Counter = Counter()
    for row in d.iter_rows():
        counter[tuple(row[j] for j in cols)] += 1
    n = d.n_rows
    h = 0.0
    for c in counter.values():
        p = c / n
        h -= p * math.log2(p)
    return h


def conditional_code_bits(d: Dataset, child: str, parents) -> float:
    """Oracle for data_dl: N * (H(parents + child) - H(parents))."""
    parents = list(parents)
    return d.n_rows * (
        joint_entropy_bits(d, parents + [child]) - joint_entropy_bits(d, parents)
    )


def dag_from_arcs(names, arcs) -> DagStructure:
    return DagStructure.from_arcs(tuple(names), [tuple(a) for a in arcs])


def binary_variables(*names) -> tuple[Variable, ...]:
    return tuple(Variable(n, ("f", "t")) for n in names)


def marked_total_bits(structure, marked, d, h_n, scorer_cfg) -> float:
    """Independent rescoring: summed node description length over the marked set."""
    from bnrefine.scoring import node_dl

    return sum(
        node_dl(x, sorted(structure.parents[x]), d, h_n, scorer_cfg)
        for x in sorted(marked)
    )


def best_unit_subset(h_n, units, marked, d, scorer_cfg):
    """Brute force over all unit subsets: the acyclic one of lowest rescored total.

    Ties prefer fewer units, then the lexicographically smallest index tuple,
    mirroring the refiner's deterministic choice rule.  Returns the index
    tuple into ``units``.
    """
    import itertools

    from bnrefine.graph import is_acyclic, substitute_parents

    best_key = None
    best = ()
    for r in range(len(units) + 1):
        for combo in itertools.combinations(range(len(units)), r):
            assignments = {}
            for i in combo:
                assignments.update(units[i].assignments())
            candidate = substitute_parents(h_n, assignments)
            if not is_acyclic(candidate):
                continue
            total = marked_total_bits(candidate, marked, d, h_n, scorer_cfg)
            key = (total, len(combo), combo)
            if best_key is None or key < best_key:
                best_key = key
                best = combo
    return best
