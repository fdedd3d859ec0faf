"""Search for the partial structure over the observed variables.

The production search is deterministic greedy hill-climbing over single-arc
operations (add, delete, reverse), starting from the empty graph so that any
pull toward the existing network comes only from the deviation term of the
score.  :func:`exhaustive_oracle` enumerates every DAG over small domains and
is the reference the hill-climber is validated against.
"""

from __future__ import annotations

import dataclasses
import itertools
from typing import Iterable, Sequence

from .data import Dataset
from .errors import EmptyDataError, NodeMismatchError, TooManyVariablesError
from .graph import DagStructure, is_acyclic
from .scoring import NodeScoreCache, ScoreBreakdown, ScorerConfig, total_dl

#: Feasible limit for exhaustive DAG enumeration (29281 DAGs at 5 nodes).
MAX_ORACLE_VARIABLES = 5

_OP_RANK = {"delete": 0, "reverse": 1, "add": 2}


@dataclasses.dataclass(frozen=True)
class LearnConfig:
    scorer: ScorerConfig
    max_parents: int = 5
    max_expansions: int = 10000
    seed_from_existent: bool = False

    def __post_init__(self):
        if self.max_parents < 1:
            raise ValueError(f"max_parents must be >= 1, got {self.max_parents}")
        if self.max_expansions < 1:
            raise ValueError(f"max_expansions must be >= 1, got {self.max_expansions}")


@dataclasses.dataclass(frozen=True)
class ArcOp:
    """One structure edit: kind is 'delete', 'reverse' or 'add'."""

    kind: str
    parent: str
    child: str

    @property
    def rank(self) -> tuple[int, str, str]:
        """Tie-break key: delete < reverse < add, then lexicographic arc."""
        return (_OP_RANK[self.kind], self.parent, self.child)

    def affected_nodes(self) -> tuple[str, ...]:
        if self.kind == "reverse":
            return (self.parent, self.child)
        return (self.child,)

    def __str__(self) -> str:
        return f"{self.kind} {self.parent}->{self.child}"


@dataclasses.dataclass(frozen=True)
class LearnResult:
    structure: DagStructure
    score: ScoreBreakdown
    expansions_used: int
    converged: bool


def _reaches(g: DagStructure, start: str, goal: str, skip_arc: tuple[str, str] | None) -> bool:
    """Is there a directed path start -> ... -> goal (optionally ignoring one arc)?"""
    children: dict[str, list[str]] = {n: [] for n in g.nodes}
    for c in g.nodes:
        for p in g.parents[c]:
            if skip_arc is not None and (p, c) == skip_arc:
                continue
            children[p].append(c)
    stack = [start]
    seen = {start}
    while stack:
        node = stack.pop()
        if node == goal:
            return True
        for c in children[node]:
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return False


def neighbors(
    g: DagStructure, max_parents: int
) -> list[tuple[ArcOp, DagStructure]]:
    """Every single-arc edit of ``g`` that stays acyclic and within the cap.

    Deterministic order: deletes, then reverses, then adds, each sorted
    lexicographically by (parent, child).
    """
    out: list[tuple[ArcOp, DagStructure]] = []
    arcs = g.arcs()

    for p, c in arcs:
        new = dict(g.parents)
        new[c] = g.parents[c] - {p}
        out.append((ArcOp("delete", p, c), DagStructure(g.nodes, new)))

    for p, c in arcs:
        if len(g.parents[p]) + 1 > max_parents:
            continue
        # reversing p->c adds c->p; cyclic iff another path p ~> c survives
        if _reaches(g, p, c, skip_arc=(p, c)):
            continue
        new = dict(g.parents)
        new[c] = g.parents[c] - {p}
        new[p] = g.parents[p] | {c}
        out.append((ArcOp("reverse", p, c), DagStructure(g.nodes, new)))

    names = sorted(g.nodes)
    for p, c in itertools.permutations(names, 2):
        if g.has_arc(p, c) or g.has_arc(c, p):
            continue
        if len(g.parents[c]) + 1 > max_parents:
            continue
        if _reaches(g, c, p, skip_arc=None):
            continue
        new = dict(g.parents)
        new[c] = g.parents[c] | {p}
        out.append((ArcOp("add", p, c), DagStructure(g.nodes, new)))

    return out


def _check_inputs(d: Dataset, h_n: DagStructure) -> None:
    observed = set(d.column_names)
    outside = observed - set(h_n.nodes)
    if outside:
        raise NodeMismatchError(
            f"dataset columns {sorted(outside)} are not nodes of the existing network"
        )
    if d.n_rows < 1:
        raise EmptyDataError("learning needs at least one case row")


def learn_partial(d: Dataset, h_n: DagStructure, cfg: LearnConfig) -> LearnResult:
    """Greedy hill-climbing minimization of the total description length.

    Starts from the empty structure over the observed variables (or from the
    existing network restricted to them when ``cfg.seed_from_existent`` is
    set; seeded arcs are kept even if a node then exceeds ``max_parents`` --
    the cap constrains moves, and deletes can always shrink the set).  Each
    step applies the single arc operation that most reduces the total, with
    ties broken by operation kind (delete < reverse < add) then lexicographic
    arc.  Stops when no operation improves the score or the expansion budget
    runs out; running out of budget is reported via ``converged=False``, not
    as an error.
    """
    _check_inputs(d, h_n)
    observed = d.column_names
    cache = NodeScoreCache(d, h_n, cfg.scorer)

    if cfg.seed_from_existent:
        current = h_n.restrict(observed)
    else:
        current = DagStructure(observed, {})

    expansions = 0
    converged = False
    while True:
        if expansions >= cfg.max_expansions:
            break
        best: tuple[float, ArcOp, DagStructure] | None = None
        for op, candidate in neighbors(current, cfg.max_parents):
            delta = sum(
                cache.node_dl(n, candidate.parents[n])
                - cache.node_dl(n, current.parents[n])
                for n in op.affected_nodes()
            )
            if delta < 0.0 and (best is None or delta < best[0]):
                best = (delta, op, candidate)
        if best is None:
            converged = True
            break
        current = best[2]
        expansions += 1

    return LearnResult(
        structure=current,
        score=total_dl(current, d, h_n, cfg.scorer),
        expansions_used=expansions,
        converged=converged,
    )


def _all_dags(names: Sequence[str]) -> Iterable[DagStructure]:
    """Every labeled DAG over ``names`` (each unordered pair: absent, one way, other way)."""
    names = sorted(names)
    pairs = list(itertools.combinations(names, 2))
    for choice in itertools.product((0, 1, 2), repeat=len(pairs)):
        parents: dict[str, set[str]] = {n: set() for n in names}
        for (a, b), c in zip(pairs, choice):
            if c == 1:
                parents[b].add(a)
            elif c == 2:
                parents[a].add(b)
        g = DagStructure(tuple(names), {n: frozenset(v) for n, v in parents.items()})
        if is_acyclic(g):
            yield g


def exhaustive_oracle(d: Dataset, h_n: DagStructure, cfg: LearnConfig) -> LearnResult:
    """Score every DAG over the observed variables and return the minimum.

    Only feasible for small domains; more than :data:`MAX_ORACLE_VARIABLES`
    observed variables raises :class:`TooManyVariablesError`.  Ties are broken
    by arc count, then by the lexicographic arc list, so the result is unique.
    The ``max_parents`` cap is deliberately not applied: the oracle bounds
    what any search could achieve.
    """
    _check_inputs(d, h_n)
    observed = d.column_names
    if len(observed) > MAX_ORACLE_VARIABLES:
        raise TooManyVariablesError(
            f"exhaustive enumeration supports at most {MAX_ORACLE_VARIABLES} "
            f"variables, got {len(observed)}"
        )
    cache = NodeScoreCache(d, h_n, cfg.scorer)

    best_key: tuple[float, int, tuple] | None = None
    best: DagStructure | None = None
    n_scored = 0
    for g in _all_dags(observed):
        n_scored += 1
        arcs = g.arcs()
        key = (cache.structure_total(g), len(arcs), arcs)
        if best_key is None or key < best_key:
            best_key = key
            best = g

    assert best is not None
    # restore the dataset's column order for the reported structure
    best = DagStructure(observed, dict(best.parents))
    return LearnResult(
        structure=best,
        score=total_dl(best, d, h_n, cfg.scorer),
        expansions_used=n_scored,
        converged=True,
    )
