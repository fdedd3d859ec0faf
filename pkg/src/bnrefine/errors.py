"""Exception hierarchy shared by all bnrefine modules.

Everything raised on bad input derives from :class:`BnRefineError`, so callers
(including the command-line front end) can distinguish validation failures
from programming errors with a single ``except`` clause.
"""


class BnRefineError(Exception):
    """Base class for all errors raised by this package."""


class CycleError(BnRefineError):
    """A directed cycle was found where an acyclic graph is required.

    ``cycle`` holds one offending node sequence, e.g. ``['A', 'B', 'A']``.
    """

    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("directed cycle detected: " + " -> ".join(self.cycle))


class UnknownNodeError(BnRefineError):
    """A node name was referenced that the graph does not declare."""


class SelfLoopError(BnRefineError):
    """A node was listed as its own parent."""


class NodeMismatchError(BnRefineError):
    """Two structures being compared do not have compatible node sets."""


class NetworkFormatError(BnRefineError):
    """A network description (JSON or in-memory) violates the schema."""


class DataError(BnRefineError):
    """Base class for dataset ingestion and lookup problems."""


class UnknownColumnError(DataError):
    """A CSV header or projection named a variable outside the schema."""


class UnknownStateError(DataError):
    """A data cell holds a value that is not a declared state."""


class RaggedRowError(DataError):
    """A CSV row has a different number of cells than the header."""


class EmptyDataError(DataError):
    """The data source contains a header but no case rows."""


class ChildInParentsError(DataError):
    """A contingency query listed the child among its own parents."""


class MissingCptError(BnRefineError):
    """Sampling was requested from a network without probability tables."""


class CptError(NetworkFormatError):
    """A conditional probability table is malformed or not normalized."""


class TooManyVariablesError(BnRefineError):
    """Exhaustive structure enumeration was asked for too large a domain."""
