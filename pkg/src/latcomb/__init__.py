"""Lattice combination toolkit.

Combines an NMT translation lattice (with UNK placeholders) and a hiero
translation lattice by composing them through a typed edit-distance
transducer and taking the shortest path; the combined translation is the
NMT hypothesis with each UNK filled from the aligned hiero words.
"""

from .algorithms import (
    PathWitness,
    compose,
    connect,
    nbest,
    prune_to_node_budget,
    replace,
    scale_weights,
    shortest_path,
)
from .editfst import (
    EditCostModel,
    build_modified_edit_fst,
    build_standard_edit_fst,
    build_unk_insertion_fst,
)
from .errors import ContractError, FormatError, LatcombError, NoPathError
from .fst import (
    EPSILON,
    UNK,
    Arc,
    SymbolTable,
    Wfst,
    count_paths,
    is_acyclic,
    linear_chain,
    validate,
)
from .pipeline import (
    CombinationParams,
    CombinationResult,
    CorpusReport,
    EditStats,
    combine,
    corpus_report,
    decompose_alignment,
)
from .semiring import (
    EDIT_COUNT,
    HIERO_SCORE,
    NMT_SCORE,
    ONE,
    SUB_COUNT,
    UNK_EXT_COUNT,
    ZERO,
    FeatureWeight,
    ParamVector,
    format_weight,
    parse_weight,
    plus,
    scalarize,
    times,
    weight,
)

__version__ = "0.1.0"
