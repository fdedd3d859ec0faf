"""Directed-graph types for categorical Bayesian networks.

This module holds the structural half of the package: variables with finite
state lists, parent-set DAG structures, networks (structure plus optional
conditional probability tables), and the structural diff that describes one
structure as a set of arc edits against another.  All types are immutable and
all operations are pure functions, so they are safe to use concurrently.

Structures are compared and serialized deterministically: node sets are
unordered for equality, arcs are reported in lexicographic order, and the
JSON form produced by :func:`network_to_json` is byte-stable.
"""

from __future__ import annotations

import dataclasses
import json
import os
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np

from .errors import (
    CptError,
    CycleError,
    NetworkFormatError,
    NodeMismatchError,
    SelfLoopError,
    UnknownNodeError,
)

Arc = tuple[str, str]


@dataclasses.dataclass(frozen=True)
class Variable:
    """A named categorical variable with an ordered list of >= 2 states."""

    name: str
    states: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if not self.name:
            raise NetworkFormatError("variable name must be a non-empty string")
        if len(self.states) < 2:
            raise NetworkFormatError(
                f"variable {self.name!r} needs at least 2 states, got {len(self.states)}"
            )
        if len(set(self.states)) != len(self.states):
            raise NetworkFormatError(f"variable {self.name!r} has duplicate states")

    @property
    def n_states(self) -> int:
        return len(self.states)


@dataclasses.dataclass(frozen=True, eq=False)
class DagStructure:
    """A directed graph stored as a parent set per node.

    Self-loops and references to undeclared nodes are rejected at
    construction.  Acyclicity is deliberately *not* enforced here: search code
    builds candidate structures that may be cyclic and checks them with
    :func:`is_acyclic` before use.  Anything wrapped in a :class:`Network` is
    checked at that point.
    """

    nodes: tuple[str, ...]
    parents: Mapping[str, frozenset[str]]

    def __post_init__(self):
        nodes = tuple(self.nodes)
        if len(set(nodes)) != len(nodes):
            raise NetworkFormatError("duplicate node names in structure")
        node_set = set(nodes)
        given = dict(self.parents)
        parents: dict[str, frozenset[str]] = {}
        for name in given:
            if name not in node_set:
                raise UnknownNodeError(f"parent map mentions undeclared node {name!r}")
        for name in nodes:
            ps = frozenset(given.get(name, frozenset()))
            if name in ps:
                raise SelfLoopError(f"node {name!r} listed as its own parent")
            for p in ps:
                if p not in node_set:
                    raise UnknownNodeError(
                        f"node {name!r} has undeclared parent {p!r}"
                    )
            parents[name] = ps
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "parents", parents)

    @classmethod
    def from_arcs(cls, nodes: Iterable[str], arcs: Iterable[Arc]) -> "DagStructure":
        nodes = tuple(nodes)
        parents: dict[str, set[str]] = {n: set() for n in nodes}
        for parent, child in arcs:
            if child not in parents:
                raise UnknownNodeError(f"arc {parent!r} -> {child!r}: unknown child")
            parents[child].add(parent)
        return cls(nodes, {n: frozenset(ps) for n, ps in parents.items()})

    def arcs(self) -> tuple[Arc, ...]:
        """All arcs as (parent, child) pairs in lexicographic order."""
        return tuple(
            sorted((p, c) for c in self.nodes for p in self.parents[c])
        )

    def arc_set(self) -> frozenset[Arc]:
        return frozenset((p, c) for c in self.nodes for p in self.parents[c])

    def has_arc(self, parent: str, child: str) -> bool:
        return child in self.parents and parent in self.parents[child]

    def restrict(self, keep: Iterable[str]) -> "DagStructure":
        """The induced subgraph over ``keep`` (declared order preserved)."""
        keep_set = set(keep)
        unknown = keep_set - set(self.nodes)
        if unknown:
            raise UnknownNodeError(f"cannot restrict to unknown nodes {sorted(unknown)}")
        nodes = tuple(n for n in self.nodes if n in keep_set)
        return DagStructure(
            nodes, {n: self.parents[n] & keep_set for n in nodes}
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, DagStructure):
            return NotImplemented
        return set(self.nodes) == set(other.nodes) and self.parents == other.parents

    def __hash__(self) -> int:
        return hash((frozenset(self.nodes), frozenset(self.parents.items())))

    def __repr__(self) -> str:
        arcs = ", ".join(f"{p}->{c}" for p, c in self.arcs())
        return f"DagStructure({len(self.nodes)} nodes: {arcs or 'no arcs'})"


def is_acyclic(g: DagStructure) -> bool:
    """True iff ``g`` contains no directed cycle."""
    in_deg = {n: len(g.parents[n]) for n in g.nodes}
    children: dict[str, list[str]] = {n: [] for n in g.nodes}
    for c in g.nodes:
        for p in g.parents[c]:
            children[p].append(c)
    ready = [n for n in g.nodes if in_deg[n] == 0]
    seen = 0
    while ready:
        node = ready.pop()
        seen += 1
        for c in children[node]:
            in_deg[c] -= 1
            if in_deg[c] == 0:
                ready.append(c)
    return seen == len(g.nodes)


def _find_cycle(g: DagStructure) -> list[str]:
    """One directed cycle of a cyclic graph, as a node list closing on itself."""
    color: dict[str, int] = {n: 0 for n in g.nodes}  # 0 new, 1 on stack, 2 done
    children: dict[str, list[str]] = {n: [] for n in g.nodes}
    for c in g.nodes:
        for p in sorted(g.parents[c]):
            children[p].append(c)

    stack: list[str] = []

    def visit(node: str) -> list[str] | None:
        color[node] = 1
        stack.append(node)
        for c in children[node]:
            if color[c] == 1:
                return stack[stack.index(c):] + [c]
            if color[c] == 0:
                found = visit(c)
                if found is not None:
                    return found
        stack.pop()
        color[node] = 2
        return None

    for n in sorted(g.nodes):
        if color[n] == 0:
            found = visit(n)
            if found is not None:
                return found
    raise AssertionError("graph is acyclic; no cycle to report")


def topological_order(g: DagStructure) -> list[str]:
    """Nodes ordered so every parent precedes its children.

    Deterministic: among nodes whose parents are all placed, the
    lexicographically smallest name goes next.  Raises :class:`CycleError`
    (naming one offending cycle) when ``g`` is cyclic.
    """
    import heapq

    in_deg = {n: len(g.parents[n]) for n in g.nodes}
    children: dict[str, list[str]] = {n: [] for n in g.nodes}
    for c in g.nodes:
        for p in g.parents[c]:
            children[p].append(c)
    ready = [n for n in g.nodes if in_deg[n] == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        node = heapq.heappop(ready)
        order.append(node)
        for c in children[node]:
            in_deg[c] -= 1
            if in_deg[c] == 0:
                heapq.heappush(ready, c)
    if len(order) != len(g.nodes):
        raise CycleError(_find_cycle(g))
    return order


def substitute_parents(
    g: DagStructure, assignments: Mapping[str, Iterable[str]]
) -> DagStructure:
    """Copy of ``g`` with the listed nodes' parent sets replaced.

    Only the listed nodes change; the result may be cyclic (it is the
    caller's job to check with :func:`is_acyclic` when that matters).
    """
    node_set = set(g.nodes)
    new_parents = dict(g.parents)
    for node, ps in assignments.items():
        if node not in node_set:
            raise UnknownNodeError(f"cannot substitute parents of unknown node {node!r}")
        ps = frozenset(ps)
        if node in ps:
            raise SelfLoopError(f"substitution makes {node!r} its own parent")
        for p in ps:
            if p not in node_set:
                raise UnknownNodeError(
                    f"substitution gives {node!r} unknown parent {p!r}"
                )
        new_parents[node] = ps
    return DagStructure(g.nodes, new_parents)


@dataclasses.dataclass(frozen=True)
class ArcCounts:
    """Per-node tallies of reversed / additional / missing arcs."""

    reversed: int = 0
    additional: int = 0
    missing: int = 0

    @property
    def total(self) -> int:
        return self.reversed + self.additional + self.missing


@dataclasses.dataclass(frozen=True)
class StructuralDiff:
    """Arc edits that recover one structure (the reference) from another.

    Given a reference structure ``h_ref`` over the full domain and a partial
    structure ``h_part`` over a node subset:

    * ``reversed_arcs``  -- arcs of ``h_ref`` present in ``h_part`` with the
      opposite orientation; listed in their ``h_ref`` orientation.
    * ``additional_arcs`` -- arcs of ``h_ref`` with no counterpart in
      ``h_part`` in either orientation (this includes every arc touching a
      node outside ``h_part``).
    * ``missing_arcs``   -- arcs of ``h_part`` with no counterpart in
      ``h_ref`` in either orientation; listed in their ``h_part`` orientation.

    Applying (reverse the reversed, add the additional, delete the missing)
    to ``h_part`` reconstructs ``h_ref`` exactly.

    ``per_node`` assigns each arc to exactly one node: reversed and
    additional arcs to their destination in ``h_ref``, missing arcs to their
    destination in ``h_part``.  Every node of ``h_ref`` has an entry (zero
    counts included), so count totals can be read either from the arc lists
    or by summing ``per_node``.
    """

    per_node: Mapping[str, ArcCounts]
    reversed_arcs: tuple[Arc, ...]
    additional_arcs: tuple[Arc, ...]
    missing_arcs: tuple[Arc, ...]

    @property
    def n_reversed(self) -> int:
        return len(self.reversed_arcs)

    @property
    def n_additional(self) -> int:
        return len(self.additional_arcs)

    @property
    def n_missing(self) -> int:
        return len(self.missing_arcs)

    @property
    def total_edits(self) -> int:
        return self.n_reversed + self.n_additional + self.n_missing

    def counts_at(self, node: str) -> ArcCounts:
        return self.per_node.get(node, ArcCounts())

    def is_empty(self) -> bool:
        return self.total_edits == 0


def structural_diff(h_ref: DagStructure, h_part: DagStructure) -> StructuralDiff:
    """Classify every arc of ``h_ref`` and ``h_part`` as kept, reversed, additional or missing.

    ``h_part``'s nodes must be a subset of ``h_ref``'s, otherwise
    :class:`NodeMismatchError` is raised.
    """
    ref_nodes = set(h_ref.nodes)
    extra = set(h_part.nodes) - ref_nodes
    if extra:
        raise NodeMismatchError(
            f"partial structure mentions nodes outside the reference: {sorted(extra)}"
        )

    reversed_arcs: list[Arc] = []
    additional_arcs: list[Arc] = []
    missing_arcs: list[Arc] = []
    counts: dict[str, list[int]] = {n: [0, 0, 0] for n in h_ref.nodes}

    for parent, child in h_ref.arcs():
        if h_part.has_arc(parent, child):
            continue  # kept as-is
        if h_part.has_arc(child, parent):
            reversed_arcs.append((parent, child))
            counts[child][0] += 1
        else:
            additional_arcs.append((parent, child))
            counts[child][1] += 1

    for parent, child in h_part.arcs():
        if not h_ref.has_arc(parent, child) and not h_ref.has_arc(child, parent):
            missing_arcs.append((parent, child))
            counts[child][2] += 1

    per_node = {n: ArcCounts(*counts[n]) for n in h_ref.nodes}
    return StructuralDiff(
        per_node=per_node,
        reversed_arcs=tuple(sorted(reversed_arcs)),
        additional_arcs=tuple(sorted(additional_arcs)),
        missing_arcs=tuple(sorted(missing_arcs)),
    )


class Cpt:
    """Conditional probability table for one node.

    Rows are indexed by the state configuration of the node's parents taken
    in lexicographic name order; within a row, probabilities follow the
    child's declared state order.  Each row must sum to 1 within 1e-9.
    """

    __slots__ = ("child", "parents", "parent_cards", "table")

    def __init__(
        self,
        child: str,
        parents: Sequence[str],
        parent_cards: Sequence[int],
        table: np.ndarray,
    ):
        self.child = child
        self.parents = tuple(parents)
        self.parent_cards = tuple(int(c) for c in parent_cards)
        table = np.asarray(table, dtype=np.float64)
        expected_rows = int(np.prod(self.parent_cards)) if self.parents else 1
        if table.ndim != 2 or table.shape[0] != expected_rows:
            raise CptError(
                f"cpt for {child!r}: expected {expected_rows} rows, got {table.shape}"
            )
        if np.any(table < -1e-12) or np.any(table > 1 + 1e-9):
            raise CptError(f"cpt for {child!r}: probabilities outside [0, 1]")
        sums = table.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-9):
            bad = int(np.argmax(np.abs(sums - 1.0)))
            raise CptError(
                f"cpt for {child!r}: row {bad} sums to {sums[bad]!r}, not 1"
            )
        table = table.copy()
        table.flags.writeable = False
        self.table = table

    def row_index(self, parent_state_indices: Sequence[int]) -> int:
        if not self.parents:
            return 0
        idx = 0
        for card, state in zip(self.parent_cards, parent_state_indices):
            idx = idx * card + int(state)
        return idx

    def distribution(self, parent_state_indices: Sequence[int]) -> np.ndarray:
        return self.table[self.row_index(parent_state_indices)]


@dataclasses.dataclass(frozen=True, eq=False)
class Network:
    """A categorical network: variables, DAG structure, optional CPTs.

    The structure must be acyclic.  CPTs are either present for every node or
    for none; ground-truth generators carry them, learned structures usually
    do not.
    """

    variables: tuple[Variable, ...]
    structure: DagStructure
    cpts: Mapping[str, Cpt] | None = None

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise NetworkFormatError("duplicate variable names in network")
        if set(names) != set(self.structure.nodes):
            raise NetworkFormatError(
                "network variables and structure nodes disagree: "
                f"{sorted(set(names) ^ set(self.structure.nodes))}"
            )
        topological_order(self.structure)  # raises CycleError when cyclic
        if self.cpts is not None:
            missing = set(names) - set(self.cpts)
            extra = set(self.cpts) - set(names)
            if missing or extra:
                raise NetworkFormatError(
                    f"cpts must cover every node exactly once (missing {sorted(missing)}, "
                    f"extra {sorted(extra)})"
                )
            by_name = {v.name: v for v in self.variables}
            for name, cpt in self.cpts.items():
                want_parents = tuple(sorted(self.structure.parents[name]))
                if cpt.child != name or cpt.parents != want_parents:
                    raise NetworkFormatError(
                        f"cpt for {name!r} does not match its structural parents "
                        f"{want_parents}"
                    )
                if cpt.table.shape[1] != by_name[name].n_states:
                    raise NetworkFormatError(
                        f"cpt for {name!r} has {cpt.table.shape[1]} columns but the "
                        f"variable has {by_name[name].n_states} states"
                    )

    @property
    def n_nodes(self) -> int:
        return len(self.variables)

    def variable(self, name: str) -> Variable:
        for v in self.variables:
            if v.name == name:
                return v
        raise UnknownNodeError(f"network has no variable {name!r}")

    def has_cpts(self) -> bool:
        return self.cpts is not None

    def __eq__(self, other) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return (
            set(self.variables) == set(other.variables)
            and self.structure == other.structure
        )

    def __hash__(self) -> int:
        return hash((frozenset(self.variables), self.structure))


def network_from_dict(doc: Mapping) -> Network:
    """Build a :class:`Network` from the JSON-level dict form.

    Expected shape::

        {"variables": [{"name": ..., "states": [...]}, ...],
         "arcs": [[parent, child], ...],
         "cpts": {node: [{"parent_config": {...}, "distribution": {...}}, ...]}}

    ``cpts`` is optional.  Rows may appear in any order but must cover every
    parent configuration exactly once.
    """
    try:
        raw_vars = doc["variables"]
        raw_arcs = doc["arcs"]
    except (KeyError, TypeError) as exc:
        raise NetworkFormatError(f"network document missing field: {exc}") from None

    variables = tuple(
        Variable(str(v["name"]), tuple(str(s) for s in v["states"])) for v in raw_vars
    )
    by_name = {v.name: v for v in variables}
    arcs = []
    for pair in raw_arcs:
        if len(pair) != 2:
            raise NetworkFormatError(f"arc entries must be [parent, child], got {pair!r}")
        arcs.append((str(pair[0]), str(pair[1])))
    for p, c in arcs:
        if p not in by_name or c not in by_name:
            raise NetworkFormatError(f"arc [{p!r}, {c!r}] mentions an undeclared variable")
    structure = DagStructure.from_arcs([v.name for v in variables], arcs)

    cpts = None
    if doc.get("cpts") is not None:
        cpts = {}
        for name, rows in doc["cpts"].items():
            if name not in by_name:
                raise NetworkFormatError(f"cpt given for undeclared variable {name!r}")
            cpts[name] = _cpt_from_rows(by_name[name], structure.parents[name], rows, by_name)
    return Network(variables=variables, structure=structure, cpts=cpts)


def _cpt_from_rows(
    child: Variable,
    parent_names: frozenset[str],
    rows: Sequence[Mapping],
    by_name: Mapping[str, Variable],
) -> Cpt:
    parents = tuple(sorted(parent_names))
    cards = tuple(by_name[p].n_states for p in parents)
    n_rows = int(np.prod(cards)) if parents else 1
    table = np.full((n_rows, child.n_states), np.nan)
    for row in rows:
        config = row.get("parent_config", {})
        if set(config) != set(parents):
            raise CptError(
                f"cpt for {child.name!r}: parent_config keys {sorted(config)} "
                f"do not match parents {list(parents)}"
            )
        idx = 0
        for p, card in zip(parents, cards):
            state = str(config[p])
            if state not in by_name[p].states:
                raise CptError(
                    f"cpt for {child.name!r}: {p!r} has no state {state!r}"
                )
            idx = idx * card + by_name[p].states.index(state)
        if not np.all(np.isnan(table[idx])):
            raise CptError(
                f"cpt for {child.name!r}: duplicate row for configuration {config}"
            )
        dist = row.get("distribution", {})
        if set(dist) != set(child.states):
            raise CptError(
                f"cpt for {child.name!r}: distribution keys {sorted(dist)} "
                f"do not match states {list(child.states)}"
            )
        table[idx] = [float(dist[s]) for s in child.states]
    if np.any(np.isnan(table)):
        raise CptError(
            f"cpt for {child.name!r}: {int(np.isnan(table[:, 0]).sum())} parent "
            "configurations have no row"
        )
    return Cpt(child.name, parents, cards, table)


def network_to_dict(net: Network) -> dict:
    """Deterministic JSON-level dict form of a network.

    Variables keep their declared order, arcs are sorted lexicographically,
    CPT rows are emitted in parent-configuration order (parents sorted by
    name, states in declared order), so equal networks serialize to
    byte-identical JSON.
    """
    doc: dict = {
        "variables": [{"name": v.name, "states": list(v.states)} for v in net.variables],
        "arcs": [list(a) for a in net.structure.arcs()],
    }
    if net.cpts is not None:
        by_name = {v.name: v for v in net.variables}
        cpts: dict = {}
        for v in net.variables:
            cpt = net.cpts[v.name]
            rows = []
            for idx in range(cpt.table.shape[0]):
                config = {}
                rem = idx
                for p, card in zip(reversed(cpt.parents), reversed(cpt.parent_cards)):
                    config[p] = by_name[p].states[rem % card]
                    rem //= card
                rows.append(
                    {
                        "parent_config": {p: config[p] for p in cpt.parents},
                        "distribution": {
                            s: float(cpt.table[idx, k]) for k, s in enumerate(v.states)
                        },
                    }
                )
            cpts[v.name] = rows
        doc["cpts"] = cpts
    return doc


def network_to_json(net: Network) -> str:
    return json.dumps(network_to_dict(net), indent=2) + "\n"


def load_network(source: str | os.PathLike | TextIO) -> Network:
    """Read a network from a JSON file path or an open text stream."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = json.load(source)
    return network_from_dict(doc)


def structure_only_network(variables: Sequence[Variable], structure: DagStructure) -> Network:
    """Convenience wrapper for learned structures that carry no tables."""
    return Network(variables=tuple(variables), structure=structure, cpts=None)
