"""Refine an existing network by substituting learned parent sets into it.

A node of the learned partial structure is *marked* when its full parent set
in the existing network lies inside the observed variables; only then are its
two local description lengths comparable.  Marked nodes connected through
reversed arcs must be substituted together (replacing one endpoint's parents
alone would leave both orientations of the arc in place), so the marked set
is partitioned into replacement units, each carrying the bits saved by
substituting it.

Because a node's description length depends only on its own parent sets, unit
benefits are independent: applying any other unit leaves them unchanged.
Substitutions can still interact through acyclicity, so a best-first search
over "apply or skip" decisions, taken in ranked unit order, picks the subset
to apply.  Candidate structures are only kept when acyclic; the unchanged
network is always a candidate, so refinement never makes the score worse.
"""

from __future__ import annotations

import dataclasses
import heapq
from typing import Mapping

from .data import Dataset
from .errors import NodeMismatchError
from .graph import DagStructure, is_acyclic, substitute_parents
from .learn import LearnConfig
from .scoring import NodeScoreCache


def marked_nodes(h_n: DagStructure, h_p: DagStructure) -> frozenset[str]:
    """Nodes of ``h_p`` whose entire existing parent set is observed."""
    observed = set(h_p.nodes)
    outside = observed - set(h_n.nodes)
    if outside:
        raise NodeMismatchError(
            f"partial structure mentions nodes outside the network: {sorted(outside)}"
        )
    return frozenset(n for n in h_p.nodes if h_n.parents[n] <= observed)


def _reversal_partners(node: str, h_n: DagStructure, h_p: DagStructure) -> set[str]:
    """Nodes joined to ``node`` by an arc the partial structure reverses.

    Covers both orientations: partners appearing in ``node``'s learned parent
    set whose existing arc points the other way, and learned children of
    ``node`` that are its existing parents.  Symmetric by construction, which
    is what makes the unit found by :func:`construct_subgraph` independent of
    its starting member.
    """
    partners = set()
    for p in h_p.parents[node]:
        if h_n.has_arc(node, p):
            partners.add(p)
    for c in h_p.nodes:
        if node in h_p.parents[c] and h_n.has_arc(c, node):
            partners.add(c)
    return partners


def construct_subgraph(
    q: set[str],
    x_m: str,
    m: set[str],
    h_n: DagStructure,
    h_p: DagStructure,
) -> tuple[set[str], set[str]]:
    """Grow one replacement unit ``q`` outward from ``x_m``.

    Every reversal partner of ``x_m`` is removed from the pool ``m``
    unconditionally; marked partners not yet in ``q`` are added to it and
    expanded recursively.  Both sets are updated in place and returned.
    """
    if x_m not in q:
        raise ValueError(f"seed node {x_m!r} must already be in the unit set")
    marked = marked_nodes(h_n, h_p)
    for x_r in sorted(_reversal_partners(x_m, h_n, h_p)):
        m.discard(x_r)
        if x_r in marked and x_r not in q:
            q.add(x_r)
            construct_subgraph(q, x_r, m, h_n, h_p)
    return q, m


@dataclasses.dataclass(frozen=True)
class SubgraphUnit:
    """A set of marked nodes substituted as one atomic step."""

    members: tuple[str, ...]
    new_parents: Mapping[str, frozenset[str]]
    benefit: float  # bits saved by substituting; positive is an improvement

    def assignments(self) -> dict[str, frozenset[str]]:
        return {x: self.new_parents[x] for x in self.members}


def partition_into_subgraphs(
    marked: frozenset[str],
    h_n: DagStructure,
    h_p: DagStructure,
    d: Dataset,
    cfg,
) -> list[SubgraphUnit]:
    """Split the marked set into disjoint replacement units.

    Repeatedly seeds a unit with the lexicographically smallest unconsumed
    marked node and grows it with :func:`construct_subgraph`; together the
    units cover the whole marked set.  Each unit's benefit is the summed drop
    in node description length when its members trade their existing parents
    for their learned ones.  ``cfg`` is the scoring configuration.
    """
    cache = NodeScoreCache(d, h_n, cfg)
    pool = set(marked)
    units: list[SubgraphUnit] = []
    while pool:
        x_m = min(pool)
        pool.remove(x_m)
        q: set[str] = {x_m}
        construct_subgraph(q, x_m, pool, h_n, h_p)
        members = tuple(sorted(q))
        benefit = sum(
            cache.node_dl(x, h_n.parents[x]) - cache.node_dl(x, h_p.parents[x])
            for x in members
        )
        units.append(
            SubgraphUnit(
                members=members,
                new_parents={x: h_p.parents[x] for x in members},
                benefit=benefit,
            )
        )
    return units


@dataclasses.dataclass(frozen=True)
class RefinePlan:
    """Outcome of a refinement run.

    ``units`` is the ranked unit list the search walked (worst benefit
    first); ``applied`` and ``skipped_for_cycle`` index into it.  ``result``
    equals the existing structure with every applied unit's parent
    assignments substituted, and is always acyclic.  ``score_delta`` is the
    total bits saved (the sum of applied benefits).
    """

    units: tuple[SubgraphUnit, ...]
    applied: tuple[int, ...]
    skipped_for_cycle: tuple[int, ...]
    result: DagStructure
    score_delta: float
    expansions_used: int
    converged: bool

    def applied_units(self) -> tuple[SubgraphUnit, ...]:
        return tuple(self.units[i] for i in self.applied)


def _substituted(h_n: DagStructure, units: tuple[SubgraphUnit, ...], chosen) -> DagStructure:
    assignments: dict[str, frozenset[str]] = {}
    for i in chosen:
        assignments.update(units[i].assignments())
    return substitute_parents(h_n, assignments)


def refine(
    h_n: DagStructure, h_p: DagStructure, d: Dataset, cfg: LearnConfig
) -> RefinePlan:
    """Choose and apply the best acyclic set of replacement units.

    Units are ranked in ascending order of benefit; the search walks that
    list best-first, deciding "apply" or "skip" for each unit.  An element of
    the frontier is the pair (structure built so far, next unit to decide),
    ordered by the structure's description length minus the benefit of the
    next unit -- the projected total after substituting it.  Applying a unit
    that would create a cycle prunes that branch, so a unit can be skipped
    even between two applied ones.  The unchanged network enters the frontier
    as well, making the no-op plan always available.

    With equal totals, plans applying fewer units win, so units with zero
    benefit are never applied.  The search budget is
    ``cfg.max_expansions`` frontier extractions; exhausting it returns the
    best structure seen with ``converged=False``.
    """
    if set(h_p.nodes) != set(d.column_names):
        raise NodeMismatchError(
            "partial structure nodes and dataset columns disagree: "
            f"{sorted(set(h_p.nodes) ^ set(d.column_names))}"
        )
    marked = marked_nodes(h_n, h_p)
    raw_units = partition_into_subgraphs(marked, h_n, h_p, d, cfg.scorer)
    units = tuple(sorted(raw_units, key=lambda u: (u.benefit, u.members)))
    t = len(units)

    if t == 0:
        return RefinePlan(
            units=(),
            applied=(),
            skipped_for_cycle=(),
            result=h_n,
            score_delta=0.0,
            expansions_used=0,
            converged=True,
        )

    benefits = [u.benefit for u in units]

    # All candidates are compared by (bits relative to the unchanged network,
    # number of applied units, the applied index tuple); smaller wins.
    best_key: tuple[float, int, tuple[int, ...]] = (0.0, 0, ())
    best_applied: frozenset[int] = frozenset()

    def consider(applied: frozenset[int]) -> None:
        nonlocal best_key, best_applied
        chosen = tuple(sorted(applied))
        key = (-sum(benefits[i] for i in chosen), len(chosen), chosen)
        if key < best_key:
            best_key = key
            best_applied = applied

    def priority(applied: frozenset[int], next_i: int) -> float:
        return -sum(benefits[i] for i in applied) - benefits[next_i]

    open_heap: list[tuple[float, int, tuple[int, ...], int]] = []
    seen: set[tuple[frozenset[int], int]] = set()

    def push(applied: frozenset[int], next_i: int) -> None:
        if next_i >= t or (applied, next_i) in seen:
            return
        seen.add((applied, next_i))
        heapq.heappush(
            open_heap,
            (priority(applied, next_i), len(applied), tuple(sorted(applied)), next_i),
        )

    # the no-op element, so the unchanged network is always reachable
    push(frozenset(), 0)
    # one seed per single-unit substitution of the existing structure; a
    # cyclic seed still enters the frontier (a later unit may remove the
    # offending arcs) but never becomes a result candidate
    for i in range(t - 1):
        applied = frozenset([i])
        if is_acyclic(_substituted(h_n, units, applied)):
            consider(applied)
        push(applied, i + 1)

    expansions = 0
    converged = True
    while open_heap:
        if expansions >= cfg.max_expansions:
            converged = False
            break
        _, _, applied_tuple, i = heapq.heappop(open_heap)
        applied = frozenset(applied_tuple)
        expansions += 1

        with_i = applied | {i}
        if is_acyclic(_substituted(h_n, units, with_i)):
            consider(with_i)
            push(with_i, i + 1)
        push(applied, i + 1)

    applied_idx = tuple(sorted(best_applied))
    result = _substituted(h_n, units, applied_idx)
    assert is_acyclic(result)

    skipped = tuple(
        j
        for j in range(t)
        if j not in best_applied
        and units[j].benefit > 0.0
        and not is_acyclic(_substituted(h_n, units, applied_idx + (j,)))
    )
    return RefinePlan(
        units=units,
        applied=applied_idx,
        skipped_for_cycle=skipped,
        result=result,
        score_delta=sum(benefits[i] for i in applied_idx),
        expansions_used=expansions,
        converged=converged,
    )
