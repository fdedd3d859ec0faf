"""bnrefine: refine a categorical Bayesian network structure from new data.

The package learns a partial structure over whatever variables the new data
mentions, scores candidates by total description length (data fit + model
complexity + deviation from the deployed network), and substitutes beneficial
parent sets back into the deployed network without ever creating a cycle.
"""

from .data import (
    ContingencyTable,
    Dataset,
    count,
    data_dl,
    dataset_to_csv,
    load_dataset,
    project,
)
from .errors import (
    BnRefineError,
    ChildInParentsError,
    CptError,
    CycleError,
    DataError,
    EmptyDataError,
    MissingCptError,
    NetworkFormatError,
    NodeMismatchError,
    RaggedRowError,
    SelfLoopError,
    TooManyVariablesError,
    UnknownColumnError,
    UnknownNodeError,
    UnknownStateError,
)
from .graph import (
    ArcCounts,
    Cpt,
    DagStructure,
    Network,
    StructuralDiff,
    Variable,
    is_acyclic,
    load_network,
    network_from_dict,
    network_to_dict,
    network_to_json,
    structural_diff,
    structure_only_network,
    substitute_parents,
    topological_order,
)
from .learn import (
    ArcOp,
    LearnConfig,
    LearnResult,
    exhaustive_oracle,
    learn_partial,
    neighbors,
)
from .refine import (
    RefinePlan,
    SubgraphUnit,
    construct_subgraph,
    marked_nodes,
    partition_into_subgraphs,
    refine,
)
from .sampling import SampleSpec, forward_sample
from .scoring import (
    NodeScore,
    NodeScoreCache,
    ScoreBreakdown,
    ScorerConfig,
    deviation_penalty,
    local_edit_count,
    node_dl,
    node_dl_old,
    total_deviation_bits,
    total_dl,
)
from .cli import ExperimentSpec, run_experiment

__version__ = "0.1.0"
