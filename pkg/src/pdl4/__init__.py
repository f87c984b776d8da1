"""Four-valued dynamic hybrid logic toolkit: parsing, finite-model
checking under non-dual paraconsistent semantics, a terminating tableau
prover with countermodel extraction, and a brute-force model-search
oracle for cross-validation."""

from .fourval import (
    FourValue,
    VALUES,
    cneg4,
    designated,
    imp4,
    join_t,
    leq_k,
    leq_t,
    meet_t,
    neg4,
)
from .oracle import (
    CeilingExceeded,
    EnumerationSpec,
    countermodel_search,
    enumerate_models,
    find_model,
    search_space_size,
)
from .semantics import (
    CompositeProgramError,
    FourModel,
    Model,
    ModelError,
    ProgramDenotation,
    diagram,
    from_four_model,
    globally_satisfies,
    interpret_program,
    load_model,
    parse_model,
    satisfies,
    serialize_model,
    to_four_model,
    value4,
)
from .syntax import (
    And,
    At,
    Atomic,
    Bottom,
    Box,
    Choice,
    Diamond,
    Formula,
    Implies,
    Neg,
    Nominal,
    Or,
    ParseError,
    Program,
    PropVar,
    Seq,
    SignedFormula,
    Signature,
    Star,
    Test,
    actions_of,
    cneg,
    fischer_ladner_closure,
    iff,
    nominals_of,
    parse_formula,
    parse_program,
    propositions_of,
    render,
    render_program,
    top,
)
from .tableau import (
    Branch,
    BranchFormula,
    BranchStatus,
    CountermodelError,
    ProofStats,
    TableauError,
    TableauLimits,
    TableauResult,
    apply_rules_step,
    classify,
    extract_model,
    inclusion,
    initialize,
    prove_consequence,
    prove_from_roots,
    prove_validity,
    working_closure,
)

__version__ = "0.1.0"
