"""Description-length scoring of candidate structures against an existing network.

The score of a candidate structure over the observed variables has three
per-node components, all in bits:

* structure bits -- naming the node's parents (one node id of ``log2 n`` bits
  per parent, where ``n`` is the size of the full domain) plus the
  conditional-probability-table parameters at a configurable precision of
  ``bits_per_parameter`` bits each;
* data bits -- the empirical conditional-entropy code length of the node's
  data column given its parents (:func:`bnrefine.data.data_dl`);
* deviation bits -- ``2 * log2(n)`` for every arc edit (reversed, additional
  or missing) assigned to the node by the structural diff against the
  existing network, which biases the search toward structures that keep the
  deployed topology.

Arcs confined to unobserved variables contribute a constant that is the same
for every candidate; it is omitted from all totals, and every
:class:`ScoreBreakdown` carries a note saying so.

All functions here are pure; :class:`NodeScoreCache` adds memoization for the
search layers and is itself safe to share across threads for reading.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Iterable, Mapping, Sequence

from .data import Dataset, count, data_dl
from .errors import NodeMismatchError, UnknownNodeError
from .graph import DagStructure, StructuralDiff, structural_diff

OMITTED_CONSTANT_NOTE = (
    "arc edits confined to unobserved variables add a constant that is "
    "identical for every candidate and is omitted from all totals"
)


@dataclasses.dataclass(frozen=True)
class ScorerConfig:
    """Scoring constants.

    ``domain_size`` is the node count of the full existing network (not of
    the observed subset): node identifiers are priced at ``log2(domain_size)``
    bits everywhere.  ``bits_per_parameter`` prices one table entry.
    """

    domain_size: int
    bits_per_parameter: float = 10.0

    def __post_init__(self):
        if self.domain_size < 1:
            raise ValueError(f"domain_size must be >= 1, got {self.domain_size}")
        if self.bits_per_parameter <= 0:
            raise ValueError(
                f"bits_per_parameter must be > 0, got {self.bits_per_parameter}"
            )

    @property
    def log_n(self) -> float:
        return math.log2(self.domain_size)

    @classmethod
    def for_network(cls, h_n: DagStructure, bits_per_parameter: float = 10.0) -> "ScorerConfig":
        return cls(domain_size=len(h_n.nodes), bits_per_parameter=bits_per_parameter)


@dataclasses.dataclass(frozen=True)
class NodeScore:
    structure_bits: float
    data_bits: float
    deviation_bits: float

    @property
    def total_bits(self) -> float:
        return self.structure_bits + self.data_bits + self.deviation_bits


@dataclasses.dataclass(frozen=True)
class ScoreBreakdown:
    """Per-node decomposition of a candidate structure's description length."""

    per_node: Mapping[str, NodeScore]
    omitted_constant: str = OMITTED_CONSTANT_NOTE

    @property
    def structure_bits(self) -> float:
        return sum(s.structure_bits for s in self.per_node.values())

    @property
    def data_bits(self) -> float:
        return sum(s.data_bits for s in self.per_node.values())

    @property
    def deviation_bits(self) -> float:
        return sum(s.deviation_bits for s in self.per_node.values())

    @property
    def total_bits(self) -> float:
        return sum(s.total_bits for s in self.per_node.values())

    def to_dict(self) -> dict:
        return {
            "per_node": {
                name: {
                    "structure_bits": s.structure_bits,
                    "data_bits": s.data_bits,
                    "deviation_bits": s.deviation_bits,
                    "total_bits": s.total_bits,
                }
                for name, s in self.per_node.items()
            },
            "totals": {
                "structure_bits": self.structure_bits,
                "data_bits": self.data_bits,
                "deviation_bits": self.deviation_bits,
                "total_bits": self.total_bits,
            },
            "omitted_constant": self.omitted_constant,
        }

    def to_text_table(self) -> str:
        """Aligned, human-readable rendering of the breakdown."""
        headers = ("node", "structure", "data", "deviation", "total")
        rows = [
            (
                name,
                f"{s.structure_bits:.3f}",
                f"{s.data_bits:.3f}",
                f"{s.deviation_bits:.3f}",
                f"{s.total_bits:.3f}",
            )
            for name, s in self.per_node.items()
        ]
        rows.append(
            (
                "TOTAL",
                f"{self.structure_bits:.3f}",
                f"{self.data_bits:.3f}",
                f"{self.deviation_bits:.3f}",
                f"{self.total_bits:.3f}",
            )
        )
        widths = [
            max(len(headers[k]), max(len(r[k]) for r in rows)) for k in range(5)
        ]
        lines = [
            "  ".join(h.ljust(widths[k]) for k, h in enumerate(headers)),
            "  ".join("-" * w for w in widths),
        ]
        for r in rows:
            lines.append(
                r[0].ljust(widths[0])
                + "  "
                + "  ".join(r[k].rjust(widths[k]) for k in range(1, 5))
            )
        lines.append("(" + self.omitted_constant + ")")
        return "\n".join(lines)


def _structure_bits(
    child: str, parents: Sequence[str], d: Dataset, cfg: ScorerConfig
) -> float:
    s_child = d.variable(child).n_states
    prod = 1
    for p in parents:
        prod *= d.variable(p).n_states
    return len(parents) * cfg.log_n + cfg.bits_per_parameter * (s_child - 1) * prod


def node_dl_old(
    child: str, parents: Sequence[str], d: Dataset, cfg: ScorerConfig
) -> float:
    """The node's description length ignoring the existing network.

    Parent-list bits plus table-parameter bits plus the conditional-entropy
    data bits.
    """
    table = count(d, child, parents)
    return _structure_bits(child, parents, d, cfg) + data_dl(table)


def deviation_penalty(node: str, diff: StructuralDiff, cfg: ScorerConfig) -> float:
    """Bits charged at ``node`` for the arc edits the diff assigns to it.

    Nodes absent from the diff are treated as having zero counts.
    """
    return diff.counts_at(node).total * 2.0 * cfg.log_n


def local_edit_count(child: str, parents_in_hp: Iterable[str], h_n: DagStructure) -> int:
    """Arc-edit count at one node, from its two parent sets alone.

    Counts every existing-network arc into ``child`` that the proposal drops
    (whether it disappears or comes back reversed, the charge is the same)
    plus every proposed parent with no existing arc to ``child`` in either
    direction.  For acyclic proposals this equals the per-node total of the
    full structural diff at ``child``, but needs only the node's own parent
    sets plus the existing network.
    """
    if child not in h_n.parents:
        raise UnknownNodeError(f"existing network has no node {child!r}")
    proposed = frozenset(parents_in_hp)
    for p in proposed:
        if p not in h_n.parents:
            raise UnknownNodeError(f"existing network has no node {p!r}")
    existing = h_n.parents[child]
    dropped_or_reversed = len(existing - proposed)
    missing = sum(
        1 for p in proposed if p not in existing and child not in h_n.parents[p]
    )
    return dropped_or_reversed + missing


def node_dl(
    child: str,
    parents_in_hp: Iterable[str],
    d: Dataset,
    h_n: DagStructure,
    cfg: ScorerConfig,
) -> float:
    """Full node description length: ``node_dl_old`` plus the deviation term."""
    parents = tuple(parents_in_hp)
    edits = local_edit_count(child, parents, h_n)
    return node_dl_old(child, parents, d, cfg) + edits * 2.0 * cfg.log_n


def total_dl(
    h_p: DagStructure, d: Dataset, h_n: DagStructure, cfg: ScorerConfig
) -> ScoreBreakdown:
    """Per-node breakdown and total for a candidate structure ``h_p``.

    ``h_p``'s nodes must be exactly the dataset columns and a subset of the
    existing network's nodes.  Deviation bits come from the full structural
    diff, so the per-node split between reversed and additional arcs follows
    the diff's assignment convention; the per-node totals agree with
    :func:`local_edit_count`.
    """
    if set(h_p.nodes) != set(d.column_names):
        raise NodeMismatchError(
            "candidate nodes and dataset columns disagree: "
            f"{sorted(set(h_p.nodes) ^ set(d.column_names))}"
        )
    diff = structural_diff(h_n, h_p)
    if cfg.domain_size < len(h_p.nodes):
        raise ValueError(
            f"domain_size {cfg.domain_size} is smaller than the observed set "
            f"({len(h_p.nodes)} nodes)"
        )
    per_node: dict[str, NodeScore] = {}
    for name in h_p.nodes:
        parents = tuple(sorted(h_p.parents[name]))
        per_node[name] = NodeScore(
            structure_bits=_structure_bits(name, parents, d, cfg),
            data_bits=data_dl(count(d, name, parents)),
            deviation_bits=deviation_penalty(name, diff, cfg),
        )
    return ScoreBreakdown(per_node=per_node)


def total_deviation_bits(diff: StructuralDiff, cfg: ScorerConfig) -> float:
    """Description length of the whole arc-edit list: ``(edits) * 2 * log2(n)``.

    The edit count is summed as an integer before the single multiplication,
    so the value computed from per-node counts and the value computed from
    the arc lists are the same floating-point number.
    """
    return diff.total_edits * 2.0 * cfg.log_n


class NodeScoreCache:
    """Memoized per-node description lengths for one (dataset, network) pair.

    Keyed by (child, frozen parent set).  The search layers call this instead
    of :func:`node_dl` directly so repeated families are counted only once.
    """

    def __init__(self, d: Dataset, h_n: DagStructure, cfg: ScorerConfig):
        self.dataset = d
        self.h_n = h_n
        self.cfg = cfg
        self._cache: dict[tuple[str, frozenset[str]], float] = {}

    def node_dl(self, child: str, parents: frozenset[str]) -> float:
        key = (child, parents)
        got = self._cache.get(key)
        if got is None:
            got = node_dl(child, sorted(parents), self.dataset, self.h_n, self.cfg)
            self._cache[key] = got
        return got

    def structure_total(self, g: DagStructure) -> float:
        """Sum of cached node scores over all of ``g``'s nodes."""
        return sum(self.node_dl(n, g.parents[n]) for n in g.nodes)
