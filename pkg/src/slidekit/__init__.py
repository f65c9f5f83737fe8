"""Slide constraint propagation: a GAC chain propagator and encodings of sliding-sequence constraints."""

from .encodings import (
    Dfa,
    EncodingResult,
    encode_among,
    encode_among_seq,
    encode_cardpath,
    encode_contiguity,
    encode_lex_leq,
    encode_regular,
    encode_sliding_sum,
    encode_stretch,
)
from .model import Domain, Model, ResourceError, SlidekitError, UsageError, Variable
from .propagator import (
    Outcome,
    PropagationResult,
    SlideConstraint,
    SupportSets,
    WindowChain,
    build_chain,
    projection,
    propagate_gac,
    schedule,
    support_sets,
)
from .search import SearchStats, SolveResult, Status, fixpoint, solve
from .specs import (
    CounterStep,
    DfaTransition,
    ExtensionalTable,
    LexStep,
    Predicate,
    SlidSpec,
    SumInRange,
    named_predicate,
)

__version__ = "0.1.0"
