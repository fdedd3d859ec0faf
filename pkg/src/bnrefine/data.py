"""Case tables: CSV ingestion, projection, contingency counts, data code length.

New data arrives as a rectangular table of fully-observed cases over a subset
of the domain variables (partiality is by absent columns, never by missing
cells).  Internally a :class:`Dataset` stores one integer state code per cell;
the string labels live on the :class:`~bnrefine.graph.Variable` schema.

``data_dl`` is the empirical conditional-entropy code length: the number of
bits needed to transmit a child column given its parent columns under the
best memoryless code fitted to the same data.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import math
import os
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np

from .errors import (
    ChildInParentsError,
    EmptyDataError,
    RaggedRowError,
    UnknownColumnError,
    UnknownStateError,
)
from .graph import Variable


@dataclasses.dataclass(frozen=True, eq=False)
class Dataset:
    """An immutable table of cases over an ordered list of variables."""

    variables: tuple[Variable, ...]
    codes: np.ndarray  # shape (n_rows, n_variables), integer state indices

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        codes = np.asarray(self.codes, dtype=np.int64)
        if codes.ndim != 2 or codes.shape[1] != len(self.variables):
            raise ValueError(
                f"codes must be (n_rows, {len(self.variables)}), got {codes.shape}"
            )
        for j, v in enumerate(self.variables):
            col = codes[:, j]
            if col.size and (col.min() < 0 or col.max() >= v.n_states):
                raise UnknownStateError(
                    f"column {v.name!r} holds a state index outside 0..{v.n_states - 1}"
                )
        codes = codes.copy()
        codes.flags.writeable = False
        object.__setattr__(self, "codes", codes)

    @property
    def n_rows(self) -> int:
        return int(self.codes.shape[0])

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def variable(self, name: str) -> Variable:
        for v in self.variables:
            if v.name == name:
                return v
        raise UnknownColumnError(f"dataset has no column {name!r}")

    def column(self, name: str) -> np.ndarray:
        """State-code column for ``name`` (read-only view)."""
        for j, v in enumerate(self.variables):
            if v.name == name:
                return self.codes[:, j]
        raise UnknownColumnError(f"dataset has no column {name!r}")

    def iter_rows(self) -> Iterable[tuple[str, ...]]:
        """Rows as tuples of state labels, in storage order."""
        for row in self.codes:
            yield tuple(v.states[row[j]] for j, v in enumerate(self.variables))

    @classmethod
    def from_rows(
        cls, variables: Sequence[Variable], rows: Iterable[Sequence[str]]
    ) -> "Dataset":
        """Build a dataset from label rows, validating every cell."""
        variables = tuple(variables)
        lookup = [{s: k for k, s in enumerate(v.states)} for v in variables]
        coded = []
        for i, row in enumerate(rows, start=1):
            row = list(row)
            if len(row) != len(variables):
                raise RaggedRowError(
                    f"row {i} has {len(row)} cells, expected {len(variables)}"
                )
            out = []
            for j, cell in enumerate(row):
                try:
                    out.append(lookup[j][cell])
                except KeyError:
                    v = variables[j]
                    raise UnknownStateError(
                        f"row {i}, column {v.name!r}: {cell!r} is not one of "
                        f"{list(v.states)}"
                    ) from None
            coded.append(out)
        codes = np.asarray(coded, dtype=np.int64).reshape(len(coded), len(variables))
        return cls(variables=variables, codes=codes)


def load_dataset(
    source: str | os.PathLike | TextIO, schema: Sequence[Variable]
) -> Dataset:
    """Read comma-separated cases (header row of variable names) against ``schema``.

    ``source`` may be a file path or an open text stream.  Column order is
    preserved.  Raises :class:`UnknownColumnError` for header names outside
    the schema, :class:`UnknownStateError` for undeclared cell values (naming
    the row and column), :class:`RaggedRowError` for rows of the wrong width
    and :class:`EmptyDataError` when there are no case rows.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            return _load_dataset_stream(fh, schema)
    return _load_dataset_stream(source, schema)


def _load_dataset_stream(stream: TextIO, schema: Sequence[Variable]) -> Dataset:
    by_name = {v.name: v for v in schema}
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyDataError("data source is empty (no header row)") from None
    header = [h.strip() for h in header]
    unknown = [h for h in header if h not in by_name]
    if unknown:
        raise UnknownColumnError(
            f"header names {unknown} are not declared variables"
        )
    if len(set(header)) != len(header):
        raise UnknownColumnError("header repeats a variable name")
    variables = tuple(by_name[h] for h in header)
    rows = [[cell.strip() for cell in row] for row in reader if row]
    if not rows:
        raise EmptyDataError("data source has a header but no case rows")
    return Dataset.from_rows(variables, rows)


def dataset_to_csv(d: Dataset) -> str:
    """The CSV text form of a dataset (header plus one line per case)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(d.column_names)
    for row in d.iter_rows():
        writer.writerow(row)
    return buf.getvalue()


def project(d: Dataset, names: Sequence[str]) -> Dataset:
    """Restrict ``d`` to the named columns, in the requested order.

    Row count and row order are preserved; duplicate rows are kept (bag
    semantics), since only the resulting counts matter downstream.
    """
    names = list(names)
    if len(set(names)) != len(names):
        raise UnknownColumnError(f"projection repeats a column: {names}")
    index = {v.name: j for j, v in enumerate(d.variables)}
    missing = [n for n in names if n not in index]
    if missing:
        raise UnknownColumnError(f"projection names unknown columns {missing}")
    cols = [index[n] for n in names]
    return Dataset(
        variables=tuple(d.variables[j] for j in cols),
        codes=d.codes[:, cols],
    )


@dataclasses.dataclass(frozen=True)
class ContingencyTable:
    """Joint counts of one child column against a parent configuration.

    ``counts`` maps (parent-state tuple, child state) to the number of cases;
    configurations that never occur are simply absent.  ``parent_marginals``
    gives the case count per parent configuration.
    """

    child: str
    parents: tuple[str, ...]
    counts: Mapping[tuple[tuple[str, ...], str], int]
    parent_marginals: Mapping[tuple[str, ...], int]
    n_rows: int


def count(d: Dataset, child: str, parents: Sequence[str]) -> ContingencyTable:
    """Exact joint counts of ``child`` against ``parents`` over the dataset."""
    parents = tuple(parents)
    if child in parents:
        raise ChildInParentsError(f"child {child!r} listed among its own parents")
    child_var = d.variable(child)
    parent_vars = [d.variable(p) for p in parents]

    child_col = d.column(child)
    n = d.n_rows
    if parents:
        radix = np.zeros(n, dtype=np.int64)
        for pv in parent_vars:
            radix = radix * pv.n_states + d.column(pv.name)
        n_cfg = int(np.prod([pv.n_states for pv in parent_vars]))
    else:
        radix = np.zeros(n, dtype=np.int64)
        n_cfg = 1

    joint = np.bincount(
        radix * child_var.n_states + child_col, minlength=n_cfg * child_var.n_states
    )
    marg = np.bincount(radix, minlength=n_cfg)

    cards = [pv.n_states for pv in parent_vars]

    def decode(cfg_index: int) -> tuple[str, ...]:
        labels = []
        rem = cfg_index
        for pv, card in zip(reversed(parent_vars), reversed(cards)):
            labels.append(pv.states[rem % card])
            rem //= card
        return tuple(reversed(labels))

    counts: dict[tuple[tuple[str, ...], str], int] = {}
    marginals: dict[tuple[str, ...], int] = {}
    for cfg in np.nonzero(marg)[0]:
        cfg = int(cfg)
        labels = decode(cfg)
        marginals[labels] = int(marg[cfg])
        base = cfg * child_var.n_states
        for k, state in enumerate(child_var.states):
            c = int(joint[base + k])
            if c:
                counts[(labels, state)] = c
    return ContingencyTable(
        child=child,
        parents=parents,
        counts=counts,
        parent_marginals=marginals,
        n_rows=n,
    )


def data_dl(t: ContingencyTable) -> float:
    """Bits to encode the child column given its parents, from empirical counts.

    Sum over occupied cells of ``-count * log2(count / parent_marginal)``,
    i.e. N times the empirical conditional entropy; empty cells contribute
    nothing (the 0 * log 0 = 0 convention).
    """
    bits = 0.0
    for (cfg, _state), c in t.counts.items():
        bits += c * math.log2(t.parent_marginals[cfg] / c)
    return bits
